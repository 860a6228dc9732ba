#include "swarmwatch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "swarmwatch/digest.hpp"

namespace swarmwatch::sim {

bool SimPeer::online_at(Instant t) const {
  auto it = std::upper_bound(online.begin(), online.end(), t, [](Instant x, const Interval& iv) { return x < iv.from; });
  return it != online.begin() && std::prev(it)->contains(t);
}

Seconds SimPeer::online_within(Instant from, Instant to) const {
  Seconds total{0};
  for (const auto& iv : online) {
    const auto a = std::max(from, iv.from);
    const auto b = std::min(to, iv.to);
    if (a < b) total += b - a;
  }
  return total;
}

std::uint32_t GroundTruth::swarm_id(const Infohash& hash) const {
  auto it = by_hash_.find(hash);
  return it == by_hash_.end() ? 0 : it->second;
}

std::vector<std::uint32_t> GroundTruth::online_in(std::uint32_t swarm, Instant t) const {
  std::vector<std::uint32_t> out;
  if (swarm == 0 || swarm > swarms_.size()) return out;
  for (auto i : swarms_[swarm - 1].members)
    if (peers_[i].online_at(t)) out.push_back(i);
  return out;
}

double GroundTruth::expected_online_share(geodb::Region region, Instant t) const {
  std::size_t r = 3;
  for (std::size_t i = 0; i < sim_regions.size(); ++i)
    if (sim_regions[i] == region) r = i;
  const auto since_midnight = t - std::chrono::floor<std::chrono::days>(t);
  const double local = static_cast<double>(since_midnight.count()) / 3600.0 + spec_.utc_offset_hours[r];
  return spec_.diurnal.probability(local);
}

TorrentRegistry GroundTruth::registry() const {
  TorrentRegistry reg;
  for (const auto& s : swarms_) {
    TorrentInfo info;
    info.id = s.id;
    info.infohash = s.infohash;
    info.name = s.name;
    reg.add(std::move(info));
  }
  return reg;
}

std::vector<crawler::CrawlJob> GroundTruth::jobs(const std::string& tracker_url, Seconds interval) const {
  std::vector<crawler::CrawlJob> out;
  for (const auto& s : swarms_) {
    crawler::CrawlJob job;
    job.torrent.infohash = s.infohash;
    job.torrent.name = s.name;
    job.torrent.announce_urls = {tracker_url};
    job.torrent_id = s.id;
    job.trackers = {tracker_url};
    job.cycle_interval = interval;
    out.push_back(std::move(job));
  }
  return out;
}

std::string GroundTruth::to_csv() const {
  std::string out = "ip,port,region,country,home,swarms,churner,seeder,intervals\n";
  for (const auto& p : peers_) {
    std::string swarms;
    for (auto id : p.swarms.ids()) swarms += fmt::format("{}{}", swarms.empty() ? "" : ";", id);
    std::string intervals;
    for (const auto& iv : p.online)
      intervals += fmt::format("{}{}/{}", intervals.empty() ? "" : ";", format_compact(iv.from), format_compact(iv.to));
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", p.endpoint.ip.to_string(), p.endpoint.port,
                       geodb::region_name(p.region), p.country, p.home, swarms, p.churner, p.seeder, intervals);
  }
  return out;
}

namespace {

/// Home-swarm sizes h with h_j + sum_{i != j} h_i * overlap[i][j] = target_j.
std::vector<std::uint64_t> solve_home_sizes(const PopulationSpec& spec) {
  const auto n = spec.swarm_sizes.size();
  if (spec.overlap.empty()) return spec.swarm_sizes;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    b(static_cast<Eigen::Index>(j)) = static_cast<double>(spec.swarm_sizes[j]);
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = spec.overlap[i][j];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < static_cast<Eigen::Index>(n))
    throw SimError(Errc::infeasible_spec, "population spec: overlap matrix leaves swarm sizes undetermined");
  const Eigen::VectorXd h = qr.solve(b);
  std::vector<std::uint64_t> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = h(static_cast<Eigen::Index>(j));
    if (!(v > -1e-6))
      throw SimError(Errc::infeasible_spec,
                     fmt::format("population spec: swarm {} would need {:.1f} own peers to meet its overlap shares",
                                 j + 1, v));
    out[j] = static_cast<std::uint64_t>(std::llround(std::max(0.0, v)));
  }
  return out;
}

/// Splits `total` by `shares` with the largest-remainder rule.
std::array<std::uint64_t, 4> apportion(std::uint64_t total, const std::array<double, 4>& shares) {
  std::array<std::uint64_t, 4> out{};
  std::array<double, 4> rem{};
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    out[i] = static_cast<std::uint64_t>(std::floor(exact));
    rem[i] = exact - std::floor(exact);
    used += out[i];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return rem[x] > rem[y]; });
  for (std::size_t k = 0; used < total && k < 4; ++k) {
    if (shares[order[k]] <= 0.0) continue;
    ++out[order[k]];
    ++used;
  }
  return out;
}

class AddressPool {
public:
  AddressPool(const geodb::GeoTable& geo, std::mt19937_64& rng) : geo_(geo), rng_(rng) {
    for (std::size_t i = 0; i < geo.records().size(); ++i) {
      const auto& rec = geo.records()[i];
      const auto region = geodb::classify_region(rec.country);
      for (std::size_t r = 0; r < sim_regions.size(); ++r)
        if (sim_regions[r] == region) by_region_[r].push_back(i);
    }
  }

  std::pair<Ipv4, std::string> resolvable(std::size_t region) {
    const auto& candidates = by_region_[region];
    if (candidates.empty())
      throw SimError(Errc::geo_exhausted, fmt::format("simulator: geo table has no ranges in region {}",
                                                      geodb::region_name(sim_regions[region])));
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const auto& rec = geo_.records()[candidates[pick(rng_)]];
      std::uniform_int_distribution<std::uint32_t> in_range(rec.range_start, rec.range_end);
      const Ipv4 ip{in_range(rng_)};
      if (ip.is_bogon() || !used_.insert(ip.value()).second) continue;
      return {ip, rec.country};
    }
    throw SimError(Errc::geo_exhausted, "simulator: ran out of unused addresses in the geo table");
  }

  Ipv4 unresolvable() {
    std::uniform_int_distribution<std::uint32_t> any;
    for (int attempt = 0; attempt < 100000; ++attempt) {
      const Ipv4 ip{any(rng_)};
      if (ip.is_bogon() || geo_.lookup(ip) != nullptr || !used_.insert(ip.value()).second) continue;
      return ip;
    }
    throw SimError(Errc::geo_exhausted, "simulator: geo table leaves no unresolvable addresses");
  }

private:
  const geodb::GeoTable& geo_;
  std::mt19937_64& rng_;
  std::array<std::vector<std::size_t>, 4> by_region_;
  std::unordered_set<std::uint32_t> used_;
};

std::vector<Interval> diurnal_intervals(const PopulationSpec& spec, double offset_hours, double half_width) {
  const Instant from = spec.start;
  const Instant to = spec.end();
  if (half_width < 0.0) return {};
  if (half_width >= 12.0) return {{from, to}};
  std::vector<Interval> out;
  const auto half = Seconds{static_cast<std::int64_t>(std::llround(half_width * 3600.0))};
  const auto peak_utc = Seconds{static_cast<std::int64_t>(std::llround((spec.diurnal.peak_hour - offset_hours) * 3600.0))};
  const auto first_day = std::chrono::floor<std::chrono::days>(from) - std::chrono::days{2};
  for (auto day = first_day; day < to + std::chrono::days{2}; day += std::chrono::days{1}) {
    const Instant center = Instant{day} + peak_utc;
    const Instant a = std::max(from, center - half);
    const Instant b = std::min(to, center + half);
    if (a < b) out.push_back({a, b});
  }
  return out;
}

} // namespace

GroundTruth generate(const PopulationSpec& spec, const geodb::GeoTable& geo) {
  spec.validate();
  GroundTruth truth;
  truth.spec_ = spec;
  std::mt19937_64 rng(spec.seed);
  const auto homes = solve_home_sizes(spec);
  const auto n = spec.swarm_sizes.size();

  AddressPool pool(geo, rng);
  std::bernoulli_distribution seeder(spec.seeder_share);
  std::uniform_int_distribution<std::uint32_t> port(1024, 65535);
  const Seconds span = spec.duration;
  const double extra_mean = static_cast<double>((spec.mean_session - spec.min_session).count());
  std::vector<std::vector<std::uint32_t>> by_home(n);

  for (std::size_t h = 0; h < n; ++h) {
    const auto by_region = apportion(homes[h], spec.mix);
    for (std::size_t r = 0; r < sim_regions.size(); ++r) {
      const std::uint64_t group = by_region[r];
      if (group == 0) continue;
      const auto churners = static_cast<std::uint64_t>(std::llround(spec.churn_rate * static_cast<double>(group)));
      const std::uint64_t steady = group - churners;
      // Activity thresholds are stratified, (k + 0.5) / steady, and dealt to
      // peers in random order, so the online count follows p(t) exactly.
      std::vector<std::uint64_t> rank(group);
      std::iota(rank.begin(), rank.end(), 0);
      std::shuffle(rank.begin(), rank.end(), rng);
      for (std::uint64_t k = 0; k < group; ++k) {
        SimPeer peer;
        peer.region = sim_regions[r];
        peer.home = static_cast<std::uint32_t>(h + 1);
        peer.swarms.set(peer.home);
        peer.seeder = seeder(rng);
        peer.endpoint.port = static_cast<std::uint16_t>(port(rng));
        if (rank[k] < churners) {
          peer.churner = true;
          std::uniform_int_distribution<std::int64_t> arrival(0, span.count() - 1);
          const Instant a = spec.start + Seconds{arrival(rng)};
          double extra = 0.0;
          if (extra_mean > 0.0) extra = std::exponential_distribution<double>(1.0 / extra_mean)(rng);
          const auto length = std::max<std::int64_t>(1, spec.min_session.count() + std::llround(extra));
          peer.online.push_back({a, std::min(spec.end(), a + Seconds{length})});
        } else {
          const double u = (static_cast<double>(rank[k] - churners) + 0.5) / static_cast<double>(steady);
          peer.online = diurnal_intervals(spec, spec.utc_offset_hours[r], spec.diurnal.half_width_hours(u));
        }
        by_home[h].push_back(static_cast<std::uint32_t>(truth.peers_.size()));
        truth.peers_.push_back(std::move(peer));
      }
    }
  }

  // Addresses: a fixed number of peers, chosen at random, get addresses
  // outside every geo range.
  std::vector<std::uint32_t> order(truth.peers_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto unresolvable =
      static_cast<std::size_t>(std::llround(spec.unresolvable_share * static_cast<double>(order.size())));
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& peer = truth.peers_[order[k]];
    if (k < unresolvable) {
      peer.endpoint.ip = pool.unresolvable();
      continue;
    }
    std::size_t r = 0;
    while (sim_regions[r] != peer.region) ++r;
    auto [ip, country] = pool.resolvable(r);
    peer.endpoint.ip = ip;
    peer.country = std::move(country);
  }

  // Cross-swarm membership: an exact share of each home group joins j.
  if (!spec.overlap.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || spec.overlap[i][j] <= 0.0) continue;
        auto members = by_home[i];
        std::shuffle(members.begin(), members.end(), rng);
        const auto take = std::min<std::size_t>(
            members.size(),
            static_cast<std::size_t>(std::llround(spec.overlap[i][j] * static_cast<double>(members.size()))));
        for (std::size_t k = 0; k < take; ++k) truth.peers_[members[k]].swarms.set(static_cast<std::uint32_t>(j + 1));
      }
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    SimSwarm s;
    s.id = static_cast<std::uint32_t>(j + 1);
    s.infohash = sha1(fmt::format("swarmwatch-sim/{}/{}", spec.seed, s.id));
    s.name = fmt::format("sim-swarm-{}", s.id);
    for (std::uint32_t p = 0; p < truth.peers_.size(); ++p)
      if (truth.peers_[p].swarms.test(s.id)) s.members.push_back(p);
    truth.by_hash_.emplace(s.infohash, s.id);
    truth.swarms_.push_back(std::move(s));
  }
  return truth;
}

} // namespace swarmwatch::sim
