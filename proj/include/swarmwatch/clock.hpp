#pragma once

#include <mutex>

#include "swarmwatch/time.hpp"

namespace swarmwatch {

class Clock {
public:
  virtual ~Clock() = default;
  virtual Instant now() = 0;
  virtual void sleep_until(Instant t) = 0;
};

class SystemClock final : public Clock {
public:
  Instant now() override;
  void sleep_until(Instant t) override;
};

/// Manually driven clock; sleeping jumps straight to the target.
class VirtualClock final : public Clock {
public:
  explicit VirtualClock(Instant start) : now_(start) {}

  Instant now() override;
  void sleep_until(Instant t) override;
  void advance(Seconds d);
  void set(Instant t);

private:
  std::mutex mu_;
  Instant now_;
};

} // namespace swarmwatch
