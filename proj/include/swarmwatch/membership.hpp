#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace swarmwatch {

/// Per-peer torrent flags, bit i-1 for torrent id i. One inline word covers
/// 64 torrents; wider registries spill to the heap. Trailing zero words are
/// never stored, so equal sets compare equal.
class Membership {
public:
  Membership() = default;
  Membership(std::initializer_list<std::uint32_t> ids);
  static Membership of(std::span<const std::uint32_t> ids);

  /// Ids are 1-based; 0 is ignored.
  void set(std::uint32_t id);
  bool test(std::uint32_t id) const;
  bool empty() const { return words_.empty(); }
  std::size_t count() const;
  std::vector<std::uint32_t> ids() const;

  bool intersects(const Membership& other) const;
  /// Every bit of `other` is also set here.
  bool contains_all(const Membership& other) const;

  Membership& operator|=(const Membership& other);
  friend Membership operator|(Membership a, const Membership& b) { return a |= b; }

  std::span<const std::uint64_t> words() const { return {words_.data(), words_.size()}; }

  friend bool operator==(const Membership& a, const Membership& b) { return a.words_ == b.words_; }
  friend std::strong_ordering operator<=>(const Membership& a, const Membership& b);

private:
  boost::container::small_vector<std::uint64_t, 1> words_;
};

enum class SetMode {
  /// Peers with any selected bit.
  union_,
  /// Peers with all selected bits.
  intersection,
  /// Peers whose bits are exactly the selection.
  exact,
};

bool matches(const Membership& peer, const Membership& selector, SetMode mode);

/// Distinct-peer counts keyed by exact membership set (the Venn regions of
/// all torrents). Any union/intersection/exact count is a sum over regions.
class RegionHistogram {
public:
  void add(const Membership& region, std::uint64_t peers = 1);

  std::uint64_t total() const { return total_; }
  std::uint64_t count(const Membership& selector, SetMode mode) const;
  const std::map<Membership, std::uint64_t>& regions() const { return regions_; }

private:
  std::map<Membership, std::uint64_t> regions_;
  std::uint64_t total_ = 0;
};

} // namespace swarmwatch
