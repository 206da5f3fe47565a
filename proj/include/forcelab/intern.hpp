#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "bits.hpp"

namespace forcelab::detail {

using InternKey = std::vector<std::uintptr_t>;

struct InternKeyHash {
  std::size_t operator()(const InternKey& k) const {
    std::size_t h = k.size();
    for (auto v : k) h = hash_mix(h, std::hash<std::uintptr_t>{}(v));
    return h;
  }
};

// Append-only hash-consing table; node addresses are stable for the process lifetime.
template <class Node>
class InternTable {
 public:
  template <class Make>
  const Node* intern(InternKey key, Make&& make) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    Node& n = nodes_.emplace_back(make());
    n.id = static_cast<std::uint32_t>(nodes_.size() - 1);
    index_.emplace(std::move(key), &n);
    return &n;
  }

  std::size_t size() {
    std::lock_guard<std::mutex> lock(mu_);
    return nodes_.size();
  }

 private:
  std::mutex mu_;
  std::deque<Node> nodes_;
  std::unordered_map<InternKey, const Node*, InternKeyHash> index_;
};

}  // namespace forcelab::detail
