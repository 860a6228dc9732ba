#include "swarmwatch/time.hpp"

#include <charconv>

#include <fmt/format.h>

namespace swarmwatch {

namespace {

struct Civil {
  int year;
  unsigned month, day, hour, minute, second;
};

Civil to_civil(Instant t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()), unsigned(hms.hours().count()),
          unsigned(hms.minutes().count()), unsigned(hms.seconds().count())};
}

bool read_digits(std::string_view& s, std::size_t n, unsigned& out) {
  if (s.size() < n) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  std::from_chars(s.data(), s.data() + n, out);
  s.remove_prefix(n);
  return true;
}

bool expect(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

} // namespace

Instant make_instant(int year, unsigned month, unsigned day, unsigned hour, unsigned minute, unsigned second) {
  using namespace std::chrono;
  const sys_days d = std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
  return d + hours{hour} + minutes{minute} + std::chrono::seconds{second};
}

std::string format_iso8601(Instant t) {
  const Civil c = to_civil(t);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", c.year, c.month, c.day, c.hour, c.minute, c.second);
}

std::string format_compact(Instant t) {
  const Civil c = to_civil(t);
  return fmt::format("{:04}{:02}{:02}T{:02}{:02}{:02}Z", c.year, c.month, c.day, c.hour, c.minute, c.second);
}

std::optional<Instant> parse_iso8601(std::string_view s) {
  unsigned y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  const bool extended = s.size() > 4 && s[4] == '-';
  if (!read_digits(s, 4, y)) return std::nullopt;
  if (extended && !expect(s, '-')) return std::nullopt;
  if (!read_digits(s, 2, mo)) return std::nullopt;
  if (extended && !expect(s, '-')) return std::nullopt;
  if (!read_digits(s, 2, d) || !expect(s, 'T') || !read_digits(s, 2, h)) return std::nullopt;
  if (extended && !expect(s, ':')) return std::nullopt;
  if (!read_digits(s, 2, mi)) return std::nullopt;
  if (extended && !expect(s, ':')) return std::nullopt;
  if (!read_digits(s, 2, se) || !expect(s, 'Z') || !s.empty()) return std::nullopt;

  const std::chrono::year_month_day ymd{std::chrono::year{int(y)}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || se > 60) return std::nullopt;
  return make_instant(int(y), mo, d, h, mi, se);
}

} // namespace swarmwatch
