#include <algorithm>
#include <future>

#include "swarmwatch/crawler.hpp"

namespace swarmwatch::crawler {

ScheduleStats run_schedule(std::span<const CrawlJob> jobs, Instant stop_at, const Enumerator& enumerator,
                           Clock& clock, const std::function<void(const CrawlCycleResult&)>& emit,
                           ScheduleOptions options) {
  ScheduleStats stats;
  if (jobs.empty()) return stats;

  Seconds interval{1};
  for (const auto& job : jobs) interval = std::max(interval, job.cycle_interval);

  for (;;) {
    const Instant cycle_start = clock.now();
    if (cycle_start >= stop_at) break;
    ++stats.cycles;

    if (options.parallel_jobs && jobs.size() > 1) {
      std::vector<std::future<CrawlCycleResult>> pending;
      for (const auto& job : jobs)
        pending.push_back(std::async(std::launch::async, [&enumerator, &job] { return enumerator.enumerate(job); }));
      for (auto& f : pending) {
        emit(f.get());
        ++stats.results;
      }
    } else {
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (i > 0 && clock.now() >= stop_at) break;
        emit(enumerator.enumerate(jobs[i]));
        ++stats.results;
      }
    }

    const Instant next = cycle_start + interval;
    if (clock.now() >= next) {
      ++stats.overruns;
      continue;
    }
    clock.sleep_until(std::min(next, stop_at));
  }
  return stats;
}

} // namespace swarmwatch::crawler
