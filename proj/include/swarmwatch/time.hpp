#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace swarmwatch {

/// All recorded instants are UTC with one-second resolution.
using Instant = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// "2013-08-12T12:00:00Z"
std::string format_iso8601(Instant t);
/// "20130812T120000Z", used in snapshot file names.
std::string format_compact(Instant t);
/// Accepts the two forms above; a trailing 'Z' is required.
std::optional<Instant> parse_iso8601(std::string_view text);

/// Instant from a civil UTC date-time.
Instant make_instant(int year, unsigned month, unsigned day, unsigned hour = 0, unsigned minute = 0,
                     unsigned second = 0);

} // namespace swarmwatch
