#include "swarmwatch/clock.hpp"

#include <thread>

namespace swarmwatch {

Instant SystemClock::now() { return std::chrono::floor<Seconds>(std::chrono::system_clock::now()); }

void SystemClock::sleep_until(Instant t) { std::this_thread::sleep_until(t); }

Instant VirtualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::sleep_until(Instant t) {
  std::lock_guard lock(mu_);
  if (t > now_) now_ = t;
}

void VirtualClock::advance(Seconds d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

void VirtualClock::set(Instant t) {
  std::lock_guard lock(mu_);
  now_ = t;
}

} // namespace swarmwatch
