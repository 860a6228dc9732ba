#include "swarmwatch/geodb.hpp"

#include "swarmwatch/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace swarmwatch::geodb {

namespace {

std::uint32_t parse_bound(std::string_view text, std::size_t line_no) {
  if (auto ip = Ipv4::parse(text)) return ip->value();
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw GeoError(Errc::parse_error, fmt::format("geodb: line {}: bad range bound '{}'", line_no, text), line_no);
  return v;
}

double parse_degrees(const std::string& text, double limit, std::size_t line_no) {
  if (text.empty()) return 0.0;
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v) || std::fabs(v) > limit)
    throw GeoError(Errc::parse_error, fmt::format("geodb: line {}: bad coordinate '{}'", line_no, text), line_no);
  return v;
}

GeoTable validated(std::vector<GeoRecord> records, const std::vector<std::size_t>& line_numbers) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].range_start < records[b].range_start; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& prev = records[order[i - 1]];
    const auto& cur = records[order[i]];
    if (cur.range_start <= prev.range_end) {
      const auto a = std::min(line_numbers[order[i - 1]], line_numbers[order[i]]);
      const auto b = std::max(line_numbers[order[i - 1]], line_numbers[order[i]]);
      throw GeoError(Errc::overlap_error, fmt::format("geodb: ranges on lines {} and {} overlap", a, b), a, b);
    }
  }
  std::vector<GeoRecord> sorted;
  sorted.reserve(records.size());
  for (auto i : order) sorted.push_back(std::move(records[i]));
  return GeoTable::from_records(std::move(sorted));
}

} // namespace

GeoTable GeoTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeoError(Errc::io_error, fmt::format("geodb: cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

GeoTable GeoTable::parse(std::string_view text) {
  std::vector<GeoRecord> records;
  std::vector<std::size_t> lines;
  std::vector<std::string> f;
  bool header_seen = false;
  csv::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (!header_seen) {
      if (line != csv_header)
        throw GeoError(Errc::parse_error, fmt::format("geodb: line 1: expected header '{}'", csv_header), 1);
      header_seen = true;
      return;
    }
    if (line.empty()) return;
    if (!csv::split_line(line, f))
      throw GeoError(Errc::parse_error, fmt::format("geodb: line {}: unterminated quote", line_no), line_no);
    if (f.size() != 8)
      throw GeoError(Errc::parse_error, fmt::format("geodb: line {}: {} fields, expected 8", line_no, f.size()), line_no);
    GeoRecord r;
    r.range_start = parse_bound(f[0], line_no);
    r.range_end = parse_bound(f[1], line_no);
    if (r.range_start > r.range_end)
      throw GeoError(Errc::parse_error, fmt::format("geodb: line {}: range start after end", line_no), line_no);
    r.country = f[2];
    if (!r.country.empty() && (r.country.size() != 2 || !std::isupper(static_cast<unsigned char>(r.country[0])) ||
                               !std::isupper(static_cast<unsigned char>(r.country[1]))))
      throw GeoError(Errc::parse_error, fmt::format("geodb: line {}: bad country code '{}'", line_no, r.country), line_no);
    if (r.country == "US" || r.country == "CA") r.state = f[3];
    r.city = f[4];
    r.isp = f[5];
    r.longitude = parse_degrees(f[6], 180.0, line_no);
    r.latitude = parse_degrees(f[7], 90.0, line_no);
    records.push_back(std::move(r));
    lines.push_back(line_no);
  });
  if (!header_seen) throw GeoError(Errc::parse_error, "geodb: empty input", 1);
  return validated(std::move(records), lines);
}

GeoTable GeoTable::from_records(std::vector<GeoRecord> records) {
  const bool sorted = std::is_sorted(records.begin(), records.end(),
                                     [](const auto& a, const auto& b) { return a.range_start < b.range_start; });
  if (!sorted) {
    std::vector<std::size_t> lines(records.size());
    std::iota(lines.begin(), lines.end(), std::size_t{1});
    return validated(std::move(records), lines);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    if (r.range_start > r.range_end)
      throw GeoError(Errc::parse_error, fmt::format("geodb: record {}: range start after end", i + 1), i + 1);
    if (std::fabs(r.latitude) > 90.0 || std::fabs(r.longitude) > 180.0)
      throw GeoError(Errc::parse_error, fmt::format("geodb: record {}: coordinates out of range", i + 1), i + 1);
    if (r.country != "US" && r.country != "CA") r.state.clear();
    if (i > 0 && r.range_start <= records[i - 1].range_end)
      throw GeoError(Errc::overlap_error, fmt::format("geodb: records {} and {} overlap", i, i + 1), i, i + 1);
  }
  GeoTable table;
  table.records_ = std::move(records);
  return table;
}

const GeoRecord* GeoTable::lookup(Ipv4 ip) const {
  if (ip.is_bogon()) return nullptr;
  auto it = std::upper_bound(records_.begin(), records_.end(), ip.value(),
                             [](std::uint32_t v, const GeoRecord& r) { return v < r.range_start; });
  if (it == records_.begin()) return nullptr;
  --it;
  return it->contains(ip) ? &*it : nullptr;
}

std::string GeoTable::to_csv() const {
  std::string out{csv_header};
  out.push_back('\n');
  for (const auto& r : records_) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", Ipv4{r.range_start}.to_string(),
                   Ipv4{r.range_end}.to_string(), r.country, csv::quote(r.state), csv::quote(r.city), csv::quote(r.isp), r.longitude,
                   r.latitude);
  }
  return out;
}

} // namespace swarmwatch::geodb
