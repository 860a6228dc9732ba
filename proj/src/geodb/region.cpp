#include <cctype>
#include <algorithm>
#include <array>
#include <utility>

#include "swarmwatch/geodb.hpp"

namespace swarmwatch::geodb {

namespace {

// EU and EEA members, UK, CH, and the remaining states and territories of
// geographic Europe (Balkans, microstates, Belarus, Ukraine, Moldova, Russia,
// Turkey, the Caucasus, Faroe, Gibraltar, Channel Islands, Isle of Man, Aland,
// Svalbard, Kosovo).
constexpr std::array europe_codes = std::to_array<std::string_view>({
    "AD", "AL", "AM", "AT", "AX", "AZ", "BA", "BE", "BG", "BY", "CH", "CY", "CZ", "DE", "DK", "EE",
    "ES", "FI", "FO", "FR", "GB", "GE", "GG", "GI", "GR", "HR", "HU", "IE", "IM", "IS", "IT", "JE",
    "LI", "LT", "LU", "LV", "MC", "MD", "ME", "MK", "MT", "NL", "NO", "PL", "PT", "RO", "RS", "RU",
    "SE", "SI", "SJ", "SK", "SM", "TR", "UA", "VA", "XK",
});

constexpr std::array country_names = std::to_array<std::pair<std::string_view, std::string_view>>({
    {"AR", "Argentina"},   {"AT", "Austria"},        {"AU", "Australia"},     {"BE", "Belgium"},
    {"BG", "Bulgaria"},    {"BR", "Brazil"},         {"CA", "Canada"},        {"CH", "Switzerland"},
    {"CL", "Chile"},       {"CN", "China"},          {"CY", "Cyprus"},        {"CZ", "Czech Republic"},
    {"DE", "Germany"},     {"DK", "Denmark"},        {"EG", "Egypt"},         {"ES", "Spain"},
    {"FI", "Finland"},     {"FR", "France"},         {"GB", "United Kingdom"}, {"GR", "Greece"},
    {"HR", "Croatia"},     {"HU", "Hungary"},        {"ID", "Indonesia"},     {"IE", "Ireland"},
    {"IL", "Israel"},      {"IN", "India"},          {"IT", "Italy"},         {"JP", "Japan"},
    {"KR", "South Korea"}, {"MX", "Mexico"},         {"MY", "Malaysia"},      {"NL", "Netherlands"},
    {"NO", "Norway"},      {"NZ", "New Zealand"},    {"PH", "Philippines"},   {"PK", "Pakistan"},
    {"PL", "Poland"},      {"PT", "Portugal"},       {"RO", "Romania"},       {"RS", "Serbia"},
    {"RU", "Russia"},      {"SA", "Saudi Arabia"},   {"SE", "Sweden"},        {"SG", "Singapore"},
    {"TH", "Thailand"},    {"TR", "Turkey"},         {"UA", "Ukraine"},       {"US", "United States"},
    {"VN", "Vietnam"},     {"ZA", "South Africa"},
});

static_assert(std::is_sorted(europe_codes.begin(), europe_codes.end()));
static_assert(std::is_sorted(country_names.begin(), country_names.end()));

} // namespace

std::string_view region_name(Region r) {
  switch (r) {
  case Region::europe: return "europe";
  case Region::north_america: return "north_america";
  case Region::australia: return "australia";
  case Region::other: return "other";
  case Region::unknown: break;
  }
  return "unknown";
}

Region classify_region(std::string_view country) {
  if (country.size() != 2 || !std::isupper(static_cast<unsigned char>(country[0])) ||
      !std::isupper(static_cast<unsigned char>(country[1])))
    return Region::unknown;
  if (country == "US" || country == "CA") return Region::north_america;
  if (country == "AU") return Region::australia;
  if (std::binary_search(europe_codes.begin(), europe_codes.end(), country)) return Region::europe;
  return Region::other;
}

std::span<const std::string_view> europe_country_codes() { return europe_codes; }

std::string_view country_name(std::string_view code) {
  auto it = std::lower_bound(country_names.begin(), country_names.end(), code,
                             [](const auto& entry, std::string_view c) { return entry.first < c; });
  return it != country_names.end() && it->first == code ? it->second : code;
}

} // namespace swarmwatch::geodb
