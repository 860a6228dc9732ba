#include "swarmwatch/sim.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

namespace swarmwatch::sim {

double DiurnalModel::probability(double local_hour) const {
  double d = std::fmod(local_hour - peak_hour + 6.0, 24.0);
  if (d < 0) d += 24.0;
  const double lobe = d < 12.0 ? std::sin(std::numbers::pi * d / 12.0) : 0.0;
  return floor + amplitude * std::pow(std::max(0.0, lobe), sharpness);
}

double DiurnalModel::half_width_hours(double u) const {
  if (u < floor) return 12.0;
  if (amplitude <= 0.0) return -1.0;
  const double v = (u - floor) / amplitude;
  if (v >= 1.0) return -1.0;
  // p(h) > u  <=>  sin(theta) > v^(1/k), an interval centered on the peak.
  return 6.0 - 12.0 * std::asin(std::pow(v, 1.0 / sharpness)) / std::numbers::pi;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(const std::string& what) { throw SimError(Errc::bad_spec, "population spec: " + what); }

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    bad(fmt::format("'{}' is not a number: '{}'", key, v));
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad(fmt::format("'{}' is not a whole number: '{}'", key, v));
  return out;
}

Seconds minutes_value(std::string_view key, std::string_view v) {
  return Seconds{static_cast<std::int64_t>(std::llround(to_double(key, v) * 60.0))};
}

std::optional<std::size_t> region_index(std::string_view name) {
  for (std::size_t i = 0; i < sim_regions.size(); ++i)
    if (geodb::region_name(sim_regions[i]) == name) return i;
  return std::nullopt;
}

bool probability_ok(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

void PopulationSpec::validate() const {
  if (swarm_sizes.empty()) bad("swarm_sizes is required");
  for (auto s : swarm_sizes)
    if (s == 0) bad("swarm sizes must be positive");
  if (duration <= Seconds{0}) bad("days must be positive");
  double sum = 0;
  for (double m : mix) {
    if (!probability_ok(m)) bad("region shares must lie in [0, 1]");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9) bad(fmt::format("region shares sum to {}, not 1", sum));
  if (!probability_ok(diurnal.floor) || !probability_ok(diurnal.amplitude) ||
      diurnal.floor + diurnal.amplitude > 1.0 + 1e-12)
    bad("diurnal floor and amplitude must be probabilities with floor + amplitude <= 1");
  if (diurnal.peak_hour < 0.0 || diurnal.peak_hour >= 24.0) bad("diurnal.peak_hour must lie in [0, 24)");
  if (diurnal.sharpness < 1.0) bad("diurnal.sharpness must be at least 1");
  for (double o : utc_offset_hours)
    if (o < -12.0 || o > 14.0) bad("UTC offsets must lie in [-12, 14]");
  if (!probability_ok(churn_rate)) bad("churn_rate must lie in [0, 1]");
  if (!probability_ok(seeder_share)) bad("seeder_share must lie in [0, 1]");
  if (!probability_ok(unresolvable_share)) bad("unresolvable_share must lie in [0, 1]");
  if (mean_session <= Seconds{0} || min_session < Seconds{0}) bad("session lengths must be positive");
  if (!overlap.empty()) {
    if (overlap.size() != swarm_sizes.size()) bad("overlap matrix size differs from the swarm count");
    for (const auto& row : overlap) {
      if (row.size() != swarm_sizes.size()) bad("overlap matrix is not square");
      for (double p : row)
        if (!probability_ok(p)) bad("overlap probabilities must lie in [0, 1]");
    }
  }
}

PopulationSpec PopulationSpec::parse(std::string_view text) {
  PopulationSpec spec;
  std::map<std::pair<std::size_t, std::size_t>, double> overlaps;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(fmt::format("line {}: expected key = value", line_no));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (key == "seed") {
      spec.seed = to_uint(key, value);
    } else if (key == "start") {
      auto t = parse_iso8601(value);
      if (!t) bad(fmt::format("line {}: bad start instant '{}'", line_no, value));
      spec.start = *t;
    } else if (key == "days") {
      spec.duration = Seconds{static_cast<std::int64_t>(std::llround(to_double(key, value) * 86400.0))};
    } else if (key == "hours") {
      spec.duration = Seconds{static_cast<std::int64_t>(std::llround(to_double(key, value) * 3600.0))};
    } else if (key == "swarm_sizes") {
      spec.swarm_sizes.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        spec.swarm_sizes.push_back(to_uint(key, trim(rest.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    } else if (key.starts_with("mix.")) {
      auto i = region_index(key.substr(4));
      if (!i) bad(fmt::format("line {}: unknown region in '{}'", line_no, key));
      spec.mix[*i] = to_double(key, value);
    } else if (key.starts_with("offset.")) {
      auto i = region_index(key.substr(7));
      if (!i) bad(fmt::format("line {}: unknown region in '{}'", line_no, key));
      spec.utc_offset_hours[*i] = to_double(key, value);
    } else if (key == "diurnal.floor") {
      spec.diurnal.floor = to_double(key, value);
    } else if (key == "diurnal.amplitude") {
      spec.diurnal.amplitude = to_double(key, value);
    } else if (key == "diurnal.peak_hour") {
      spec.diurnal.peak_hour = to_double(key, value);
    } else if (key == "diurnal.sharpness") {
      spec.diurnal.sharpness = to_double(key, value);
    } else if (key == "churn_rate") {
      spec.churn_rate = to_double(key, value);
    } else if (key == "session.mean_minutes") {
      spec.mean_session = minutes_value(key, value);
    } else if (key == "session.min_minutes") {
      spec.min_session = minutes_value(key, value);
    } else if (key == "seeder_share") {
      spec.seeder_share = to_double(key, value);
    } else if (key == "unresolvable_share") {
      spec.unresolvable_share = to_double(key, value);
    } else if (key.starts_with("overlap.")) {
      const auto ids = key.substr(8);
      const auto dot = ids.find('.');
      if (dot == std::string_view::npos) bad(fmt::format("line {}: expected overlap.I.J", line_no));
      const auto i = to_uint(key, ids.substr(0, dot));
      const auto j = to_uint(key, ids.substr(dot + 1));
      if (i == 0 || j == 0 || i == j) bad(fmt::format("line {}: overlap ids must be distinct and 1-based", line_no));
      overlaps[{i - 1, j - 1}] = to_double(key, value);
    } else {
      bad(fmt::format("line {}: unknown key '{}'", line_no, key));
    }
  }
  if (!overlaps.empty()) {
    const auto n = spec.swarm_sizes.size();
    spec.overlap.assign(n, std::vector<double>(n, 0.0));
    for (const auto& [ij, p] : overlaps) {
      if (ij.first >= n || ij.second >= n) bad("overlap refers to a swarm beyond swarm_sizes");
      spec.overlap[ij.first][ij.second] = p;
    }
  }
  spec.validate();
  return spec;
}

PopulationSpec PopulationSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string PopulationSpec::to_config() const {
  std::string out;
  out += fmt::format("seed = {}\nstart = {}\nhours = {}\n", seed, format_iso8601(start),
                     static_cast<double>(duration.count()) / 3600.0);
  out += "swarm_sizes = ";
  for (std::size_t i = 0; i < swarm_sizes.size(); ++i) out += fmt::format("{}{}", i ? ", " : "", swarm_sizes[i]);
  out += '\n';
  for (std::size_t i = 0; i < sim_regions.size(); ++i) {
    out += fmt::format("mix.{} = {}\n", geodb::region_name(sim_regions[i]), mix[i]);
    out += fmt::format("offset.{} = {}\n", geodb::region_name(sim_regions[i]), utc_offset_hours[i]);
  }
  out += fmt::format("diurnal.floor = {}\ndiurnal.amplitude = {}\ndiurnal.peak_hour = {}\ndiurnal.sharpness = {}\n",
                     diurnal.floor, diurnal.amplitude, diurnal.peak_hour, diurnal.sharpness);
  out += fmt::format("churn_rate = {}\nsession.mean_minutes = {}\nsession.min_minutes = {}\n", churn_rate,
                     static_cast<double>(mean_session.count()) / 60.0, static_cast<double>(min_session.count()) / 60.0);
  out += fmt::format("seeder_share = {}\nunresolvable_share = {}\n", seeder_share, unresolvable_share);
  for (std::size_t i = 0; i < overlap.size(); ++i)
    for (std::size_t j = 0; j < overlap[i].size(); ++j)
      if (i != j && overlap[i][j] != 0.0) out += fmt::format("overlap.{}.{} = {}\n", i + 1, j + 1, overlap[i][j]);
  return out;
}

} // namespace swarmwatch::sim
