#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace swarmwatch::csv {

/// Splits one CSV record. Fields may be double-quoted with "" escapes.
/// Returns false on an unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote or newline.
std::string quote(std::string_view field);

/// Iterates over lines, stripping a trailing '\r'; `fn(line_number, line)` with 1-based numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
  }
}

} // namespace swarmwatch::csv
