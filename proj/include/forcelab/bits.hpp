#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace forcelab {

// Fixed-width bitset over condition indices.
class CondSet {
 public:
  CondSet() = default;
  explicit CondSet(std::size_t n, bool fill = false)
      : n_(n), w_((n + 63) / 64, fill ? ~std::uint64_t{0} : 0) {
    trim();
  }

  static CondSet singleton(std::size_t n, std::size_t i) {
    CondSet s(n);
    s.set(i);
    return s;
  }

  std::size_t universe() const { return n_; }
  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v = true) {
    if (v)
      w_[i >> 6] |= std::uint64_t{1} << (i & 63);
    else
      w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : w_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const {
    for (auto w : w_)
      if (w) return false;
    return true;
  }
  bool any() const { return !none(); }
  bool all() const { return count() == n_; }

  bool intersects(const CondSet& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k] & o.w_[k]) return true;
    return false;
  }
  bool subset_of(const CondSet& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k] & ~o.w_[k]) return false;
    return true;
  }

  CondSet& operator&=(const CondSet& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
    return *this;
  }
  CondSet& operator|=(const CondSet& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
    return *this;
  }
  CondSet& subtract(const CondSet& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= ~o.w_[k];
    return *this;
  }
  CondSet complement() const {
    CondSet r = *this;
    for (auto& w : r.w_) w = ~w;
    r.trim();
    return r;
  }
  friend CondSet operator&(CondSet a, const CondSet& b) { return a &= b; }
  friend CondSet operator|(CondSet a, const CondSet& b) { return a |= b; }
  friend bool operator==(const CondSet&, const CondSet&) = default;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      std::uint64_t w = w_[k];
      while (w) {
        int b = std::countr_zero(w);
        f(k * 64 + static_cast<std::size_t>(b));
        w &= w - 1;
      }
    }
  }
  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }
  long first() const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k]) return static_cast<long>(k * 64 + std::countr_zero(w_[k]));
    return -1;
  }

  std::size_t hash() const {
    std::size_t h = n_;
    for (auto w : w_) h = h * 0x9E3779B97F4A7C15ULL + std::hash<std::uint64_t>{}(w);
    return h;
  }

 private:
  void trim() {
    if (n_ % 64 && !w_.empty()) w_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

struct CondSetHash {
  std::size_t operator()(const CondSet& s) const { return s.hash(); }
};

inline std::size_t hash_mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
}

}  // namespace forcelab
