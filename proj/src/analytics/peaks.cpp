#include "swarmwatch/analytics.hpp"

#include <algorithm>

#include <fmt/chrono.h>
#include <fmt/format.h>

namespace swarmwatch::analytics {

std::chrono::minutes region_utc_offset(geodb::Region region) {
  using std::chrono::hours;
  switch (region) {
  case geodb::Region::europe: return hours{1};
  case geodb::Region::north_america: return hours{-5};
  case geodb::Region::australia: return hours{10};
  default: return hours{0};
  }
}

std::vector<std::optional<double>> smooth(std::span<const std::optional<double>> values, std::size_t width) {
  const std::size_t half = std::max<std::size_t>(width, 1) / 2;
  std::vector<std::optional<double>> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(values.size() - 1, i + half);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (!values[j]) continue;
      sum += *values[j];
      ++n;
    }
    if (n > 0) out[i] = sum / static_cast<double>(n);
  }
  return out;
}

std::vector<Peak> detect_peaks(std::span<const std::optional<double>> values, Instant start, Seconds width,
                               const PeakOptions& options) {
  const std::size_t window = options.smoothing | 1U;
  if (values.size() <= window)
    throw AnalyticsError(Errc::series_too_short,
                         fmt::format("analytics: {} buckets is too short for a smoothing window of {}", values.size(),
                                     window));
  const auto smoothed = smooth(values, window);

  // Gaps are stepped over: neighbours are the nearest present buckets.
  std::vector<std::size_t> index;
  std::vector<double> v;
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    if (!smoothed[i]) continue;
    index.push_back(i);
    v.push_back(*smoothed[i]);
  }
  std::vector<Peak> peaks;
  if (v.size() < 3) return peaks;
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double range = *hi_it - *lo_it;
  if (range <= 0.0) return peaks;
  const double threshold = options.min_prominence * range;

  std::size_t j = 1;
  while (j + 1 < v.size()) {
    if (!(v[j] > v[j - 1])) {
      ++j;
      continue;
    }
    std::size_t k = j;
    while (k + 1 < v.size() && v[k + 1] == v[j]) ++k;
    if (k + 1 >= v.size() || !(v[k + 1] < v[j])) {
      j = k + 1;
      continue;
    }
    const double top = v[j];
    double left_min = top;
    for (std::size_t m = j; m-- > 0;) {
      if (v[m] > top) break;
      left_min = std::min(left_min, v[m]);
    }
    double right_min = top;
    for (std::size_t m = k + 1; m < v.size(); ++m) {
      if (v[m] > top) break;
      right_min = std::min(right_min, v[m]);
    }
    const double prominence = top - std::max(left_min, right_min);
    if (prominence > 0.0 && prominence >= threshold) {
      Peak p;
      p.bucket = index[(j + k) / 2];
      p.time = start + width * static_cast<std::int64_t>(p.bucket);
      p.magnitude = top;
      p.prominence = prominence;
      if (options.lens) {
        const auto local = p.time + region_utc_offset(*options.lens);
        p.local_time = fmt::format("{:%H:%M}", std::chrono::floor<std::chrono::minutes>(local));
      }
      peaks.push_back(std::move(p));
    }
    j = k + 1;
  }
  return peaks;
}

std::vector<Peak> detect_peaks(const SwarmTimeSeries& series, const PeakOptions& options) {
  std::vector<std::optional<double>> values(series.buckets.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (series.buckets[i]) values[i] = static_cast<double>(series_value(*series.buckets[i], options.series));
  return detect_peaks(values, series.start, series.width, options);
}

} // namespace swarmwatch::analytics
