#include "swarmwatch/membership.hpp"

#include <algorithm>
#include <bit>

namespace swarmwatch {

Membership::Membership(std::initializer_list<std::uint32_t> ids) {
  for (auto id : ids) set(id);
}

Membership Membership::of(std::span<const std::uint32_t> ids) {
  Membership m;
  for (auto id : ids) m.set(id);
  return m;
}

void Membership::set(std::uint32_t id) {
  if (id == 0) return;
  const std::size_t word = (id - 1) / 64;
  if (words_.size() <= word) words_.resize(word + 1, 0);
  words_[word] |= std::uint64_t{1} << ((id - 1) % 64);
}

bool Membership::test(std::uint32_t id) const {
  if (id == 0) return false;
  const std::size_t word = (id - 1) / 64;
  return word < words_.size() && (words_[word] >> ((id - 1) % 64) & 1U) != 0;
}

std::size_t Membership::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint32_t> Membership::ids() const {
  std::vector<std::uint32_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w)
    for (std::uint64_t bits = words_[w]; bits != 0; bits &= bits - 1)
      out.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)) + 1));
  return out;
}

bool Membership::intersects(const Membership& other) const {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t i = 0; i < n; ++i)
    if ((words_[i] & other.words_[i]) != 0) return true;
  return false;
}

bool Membership::contains_all(const Membership& other) const {
  if (other.words_.size() > words_.size()) return false;
  for (std::size_t i = 0; i < other.words_.size(); ++i)
    if ((words_[i] & other.words_[i]) != other.words_[i]) return false;
  return true;
}

Membership& Membership::operator|=(const Membership& other) {
  if (words_.size() < other.words_.size()) words_.resize(other.words_.size(), 0);
  for (std::size_t i = 0; i < other.words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

std::strong_ordering operator<=>(const Membership& a, const Membership& b) {
  return std::lexicographical_compare_three_way(a.words_.begin(), a.words_.end(), b.words_.begin(), b.words_.end());
}

bool matches(const Membership& peer, const Membership& selector, SetMode mode) {
  switch (mode) {
  case SetMode::union_: return peer.intersects(selector);
  case SetMode::intersection: return !selector.empty() && peer.contains_all(selector);
  case SetMode::exact: return peer == selector;
  }
  return false;
}

void RegionHistogram::add(const Membership& region, std::uint64_t peers) {
  if (peers == 0 || region.empty()) return;
  regions_[region] += peers;
  total_ += peers;
}

std::uint64_t RegionHistogram::count(const Membership& selector, SetMode mode) const {
  if (mode == SetMode::exact) {
    auto it = regions_.find(selector);
    return it == regions_.end() ? 0 : it->second;
  }
  std::uint64_t n = 0;
  for (const auto& [region, peers] : regions_)
    if (matches(region, selector, mode)) n += peers;
  return n;
}

} // namespace swarmwatch
