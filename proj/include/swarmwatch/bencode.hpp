#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace swarmwatch::bencode {

enum class Errc {
  malformed_input,
  trailing_bytes,
  duplicate_key,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), code_(code), offset_(offset) {}
  Errc code() const { return code_; }
  /// Byte offset into the input where decoding failed (0 for encode errors).
  std::size_t offset() const { return offset_; }

private:
  Errc code_;
  std::size_t offset_;
};

class Value;
using Integer = std::int64_t;
/// Raw octets; never assumed to be UTF-8.
using Bytes = std::string;
using List = std::vector<Value>;
/// Keys kept in insertion order; encode() sorts them by raw bytes.
using Dict = std::vector<std::pair<Bytes, Value>>;

class Value {
public:
  using Storage = std::variant<Integer, Bytes, List, Dict>;

  Value() : data_(Integer{0}) {}
  Value(Integer i) : data_(i) {}
  Value(int i) : data_(Integer{i}) {}
  Value(Bytes s) : data_(std::move(s)) {}
  Value(const char* s) : data_(Bytes{s}) {}
  Value(List l) : data_(std::move(l)) {}
  Value(Dict d) : data_(std::move(d)) {}

  bool is_integer() const { return std::holds_alternative<Integer>(data_); }
  bool is_bytes() const { return std::holds_alternative<Bytes>(data_); }
  bool is_list() const { return std::holds_alternative<List>(data_); }
  bool is_dict() const { return std::holds_alternative<Dict>(data_); }

  Integer as_integer() const { return std::get<Integer>(data_); }
  const Bytes& as_bytes() const { return std::get<Bytes>(data_); }
  const List& as_list() const { return std::get<List>(data_); }
  const Dict& as_dict() const { return std::get<Dict>(data_); }
  List& as_list() { return std::get<List>(data_); }
  Dict& as_dict() { return std::get<Dict>(data_); }

  /// Dictionary lookup; nullptr when absent or when this is not a dict.
  const Value* find(std::string_view key) const;

  const Storage& storage() const { return data_; }

  /// Structural equality; dictionaries compare as mappings, independent of key order.
  friend bool operator==(const Value& a, const Value& b);

private:
  Storage data_;
};

struct DecodeOptions {
  /// Strict rejects dictionary keys that are not in ascending raw-byte order.
  /// Duplicate keys are rejected in both modes.
  bool strict = true;
  std::size_t max_depth = 256;
};

Value decode(std::string_view input, const DecodeOptions& options = {});
std::string encode(const Value& value);

/// Byte span of the value stored under `key` in the top-level dictionary of
/// `document`, exactly as it appears in the input. Empty when the key is absent.
std::string_view raw_dict_value(std::string_view document, std::string_view key,
                                const DecodeOptions& options = {});

} // namespace swarmwatch::bencode
