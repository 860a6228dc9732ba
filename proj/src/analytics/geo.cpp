#include "swarmwatch/analytics.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <fmt/format.h>

namespace swarmwatch::analytics {

std::string_view geo_level_name(GeoLevel level) {
  switch (level) {
  case GeoLevel::country: return "country";
  case GeoLevel::state: return "state";
  case GeoLevel::city: return "city";
  case GeoLevel::isp: return "isp";
  }
  return "country";
}

std::optional<GeoLevel> parse_geo_level(std::string_view text) {
  for (auto level : {GeoLevel::country, GeoLevel::state, GeoLevel::city, GeoLevel::isp})
    if (geo_level_name(level) == text) return level;
  return std::nullopt;
}

namespace {

class GeoCounter {
public:
  GeoCounter(GeoLevel level, const std::optional<std::string>& scope) : level_(level), scope_(scope) {
    if (level == GeoLevel::state && (!scope || (*scope != "US" && *scope != "CA")))
      throw AnalyticsError(Errc::bad_scope, "analytics: state level needs scope US or CA");
  }

  void add(const PeerRecord& p) {
    if (scope_ && p.country != *scope_) return;
    Key key;
    switch (level_) {
    case GeoLevel::country: key = {p.country, "", ""}; break;
    case GeoLevel::state: key = {p.country, p.state, ""}; break;
    case GeoLevel::city: key = {p.country, p.state, p.city}; break;
    case GeoLevel::isp: key = {"", "", p.isp}; break;
    }
    const std::string& value = level_ == GeoLevel::country ? std::get<0>(key)
                               : level_ == GeoLevel::state ? std::get<1>(key)
                                                           : std::get<2>(key);
    if (value.empty()) return;
    ++counts_[key];
    ++total_;
  }

  GeoReport finish(std::size_t n) const {
    GeoReport report;
    report.level = level_;
    report.scope = scope_;
    report.total = total_;
    for (const auto& [key, count] : counts_) {
      const auto& [country, state, city] = key;
      GeoRow row;
      row.country = country;
      row.count = count;
      switch (level_) {
      case GeoLevel::country:
        row.value = country;
        row.label = std::string(geodb::country_name(country));
        break;
      case GeoLevel::state:
        row.value = state;
        row.label = state;
        break;
      case GeoLevel::city:
        row.value = city;
        row.label = fmt::format("{}, {}", city, geodb::country_name(country));
        break;
      case GeoLevel::isp:
        row.value = city;
        row.label = city;
        break;
      }
      report.rows.push_back(std::move(row));
    }
    std::sort(report.rows.begin(), report.rows.end(), [](const GeoRow& a, const GeoRow& b) {
      if (a.count != b.count) return a.count > b.count;
      return std::tie(a.label, a.country) < std::tie(b.label, b.country);
    });
    if (report.rows.size() > n) report.rows.resize(n);
    std::uint64_t running = 0;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      auto& row = report.rows[i];
      row.rank = i + 1;
      running += row.count;
      row.share = percent_of(row.count, total_);
      row.cumulative = percent_of(running, total_);
    }
    return report;
  }

private:
  using Key = std::tuple<std::string, std::string, std::string>;

  GeoLevel level_;
  std::optional<std::string> scope_;
  std::map<Key, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

} // namespace

GeoReport geo_top(std::span<const PeerRecord> peers, GeoLevel level, std::size_t n,
                  const std::optional<std::string>& scope) {
  GeoCounter counter(level, scope);
  for (const auto& p : peers) counter.add(p);
  return counter.finish(n);
}

GeoReport geo_top(const PeerStore& store, GeoLevel level, std::size_t n, const std::optional<std::string>& scope) {
  GeoCounter counter(level, scope);
  store.for_each_matching({}, [&](const PeerRecord& p) { counter.add(p); });
  return counter.finish(n);
}

} // namespace swarmwatch::analytics
