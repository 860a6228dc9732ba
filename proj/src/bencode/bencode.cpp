#include "swarmwatch/bencode.hpp"

#include <algorithm>
#include <functional>
#include <limits>

#include <fmt/format.h>

namespace swarmwatch::bencode {

const Value* Value::find(std::string_view key) const {
  const auto* dict = std::get_if<Dict>(&data_);
  if (dict == nullptr) return nullptr;
  for (const auto& [k, v] : *dict)
    if (k == key) return &v;
  return nullptr;
}

namespace {

bool dict_equal(const Dict& a, const Dict& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [key, value] : a) {
    const auto it = std::find_if(b.begin(), b.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == b.end() || !(it->second == value)) return false;
  }
  return true;
}

} // namespace

bool operator==(const Value& a, const Value& b) {
  if (a.data_.index() != b.data_.index()) return false;
  if (a.is_dict()) return dict_equal(a.as_dict(), b.as_dict());
  return a.data_ == b.data_;
}

namespace {

class Parser {
public:
  Parser(std::string_view in, const DecodeOptions& options) : in_(in), opt_(options) {}

  Value parse_value(std::size_t depth) {
    if (depth > opt_.max_depth) fail("nesting too deep");
    if (at_end()) fail("unexpected end of input");
    const char c = in_[pos_];
    if (c == 'i') return parse_integer();
    if (c == 'l') {
      ++pos_;
      List list;
      while (peek() != 'e') list.push_back(parse_value(depth + 1));
      ++pos_;
      return list;
    }
    if (c == 'd') return parse_dict(depth, nullptr);
    if (c >= '0' && c <= '9') return parse_bytes();
    fail(fmt::format("unexpected byte 0x{:02x}", static_cast<unsigned char>(c)));
  }

  /// Parses a top-level dictionary and reports the span of `key`'s value.
  std::string_view find_span(std::string_view key) {
    if (peek() != 'd') fail("top level is not a dictionary");
    std::string_view span;
    const KeySpanFn on_key = [&](std::string_view k, std::size_t begin, std::size_t end) {
      if (k == key) span = in_.substr(begin, end - begin);
    };
    parse_dict(0, &on_key);
    return span;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= in_.size(); }

private:
  using KeySpanFn = std::function<void(std::string_view key, std::size_t begin, std::size_t end)>;

  Value parse_dict(std::size_t depth, const KeySpanFn* on_key) {
    ++pos_;
    Dict dict;
    while (peek() != 'e') {
      const std::size_t key_pos = pos_;
      if (in_[pos_] < '0' || in_[pos_] > '9') fail("dictionary key is not a byte string");
      Bytes key = parse_bytes().as_bytes();
      for (const auto& entry : dict)
        if (entry.first == key)
          throw Error(Errc::duplicate_key,
                      fmt::format("bencode: duplicate dictionary key '{}' at offset {}", key, key_pos), key_pos);
      if (opt_.strict && !dict.empty() && !(dict.back().first < key))
        fail_at(key_pos, fmt::format("dictionary key '{}' out of order", key));
      const std::size_t begin = pos_;
      Value v = parse_value(depth + 1);
      if (on_key != nullptr) (*on_key)(key, begin, pos_);
      dict.emplace_back(std::move(key), std::move(v));
    }
    ++pos_;
    return dict;
  }

  Value parse_integer() {
    ++pos_;
    const std::size_t start = pos_;
    bool negative = false;
    if (peek() == '-') {
      negative = true;
      ++pos_;
    }
    const std::size_t digits_start = pos_;
    std::uint64_t magnitude = 0;
    const std::uint64_t limit = negative ? std::uint64_t{1} << 63 : std::numeric_limits<Integer>::max();
    while (peek() != 'e') {
      const char c = in_[pos_];
      if (c < '0' || c > '9') fail("non-digit in integer");
      const auto d = static_cast<std::uint64_t>(c - '0');
      if (magnitude > (limit - d) / 10) fail("integer exceeds 64 bits");
      magnitude = magnitude * 10 + d;
      ++pos_;
    }
    const std::size_t ndigits = pos_ - digits_start;
    if (ndigits == 0) fail_at(start, "empty integer");
    if (in_[digits_start] == '0' && (ndigits > 1 || negative)) fail_at(start, "non-canonical integer");
    ++pos_;
    if (negative) return magnitude == (std::uint64_t{1} << 63) ? std::numeric_limits<Integer>::min()
                                                                : -static_cast<Integer>(magnitude);
    return static_cast<Integer>(magnitude);
  }

  Value parse_bytes() {
    const std::size_t start = pos_;
    std::uint64_t len = 0;
    while (peek() != ':') {
      const char c = in_[pos_];
      if (c < '0' || c > '9') fail("non-digit in string length");
      len = len * 10 + static_cast<std::uint64_t>(c - '0');
      if (len > in_.size()) fail_at(start, "string length overruns input");
      ++pos_;
    }
    if (pos_ - start > 1 && in_[start] == '0') fail_at(start, "non-canonical string length");
    ++pos_;
    if (len > in_.size() - pos_) fail_at(start, "string length overruns input");
    Bytes out{in_.substr(pos_, len)};
    pos_ += len;
    return out;
  }

  char peek() {
    if (at_end()) fail("unexpected end of input");
    return in_[pos_];
  }

  [[noreturn]] void fail(const std::string& why) { fail_at(pos_, why); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& why) {
    throw Error(Errc::malformed_input, fmt::format("bencode: {} at offset {}", why, at), at);
  }

  std::string_view in_;
  const DecodeOptions& opt_;
  std::size_t pos_ = 0;
};

void encode_into(const Value& v, std::string& out) {
  std::visit(
      [&out](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Integer>) {
          fmt::format_to(std::back_inserter(out), "i{}e", x);
        } else if constexpr (std::is_same_v<T, Bytes>) {
          fmt::format_to(std::back_inserter(out), "{}:", x.size());
          out += x;
        } else if constexpr (std::is_same_v<T, List>) {
          out.push_back('l');
          for (const auto& item : x) encode_into(item, out);
          out.push_back('e');
        } else {
          std::vector<const std::pair<Bytes, Value>*> sorted;
          sorted.reserve(x.size());
          for (const auto& kv : x) sorted.push_back(&kv);
          std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->first < b->first; });
          for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i - 1]->first == sorted[i]->first)
              throw Error(Errc::duplicate_key, fmt::format("bencode: duplicate key '{}'", sorted[i]->first));
          out.push_back('d');
          for (const auto* kv : sorted) {
            fmt::format_to(std::back_inserter(out), "{}:", kv->first.size());
            out += kv->first;
            encode_into(kv->second, out);
          }
          out.push_back('e');
        }
      },
      v.storage());
}

} // namespace

Value decode(std::string_view input, const DecodeOptions& options) {
  if (input.empty()) throw Error(Errc::malformed_input, "bencode: empty input");
  Parser p(input, options);
  Value v = p.parse_value(0);
  if (!p.at_end())
    throw Error(Errc::trailing_bytes, fmt::format("bencode: {} trailing bytes", input.size() - p.pos()), p.pos());
  return v;
}

std::string encode(const Value& value) {
  std::string out;
  encode_into(value, out);
  return out;
}

std::string_view raw_dict_value(std::string_view document, std::string_view key, const DecodeOptions& options) {
  if (document.empty()) throw Error(Errc::malformed_input, "bencode: empty input");
  Parser p(document, options);
  const std::string_view span = p.find_span(key);
  if (!p.at_end())
    throw Error(Errc::trailing_bytes, fmt::format("bencode: {} trailing bytes", document.size() - p.pos()), p.pos());
  return span;
}

} // namespace swarmwatch::bencode
