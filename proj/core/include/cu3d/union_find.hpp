#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace cu3d {

/// Disjoint-set forest over sparse uint32 keys. The representative of a set is
/// always its smallest member, so results do not depend on union order.
class UnionFind {
 public:
  void insert(std::uint32_t x) { parent_.try_emplace(x, x); }

  std::uint32_t find(std::uint32_t x) {
    insert(x);
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    std::uint32_t ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (rb < ra) std::swap(ra, rb);
    parent_[rb] = ra;
  }

  /// Blocks keyed by representative; members sorted ascending.
  std::map<std::uint32_t, std::vector<std::uint32_t>> blocks() {
    std::map<std::uint32_t, std::vector<std::uint32_t>> out;
    for (const auto& entry : parent_) out[find(entry.first)].push_back(entry.first);
    return out;
  }

 private:
  std::map<std::uint32_t, std::uint32_t> parent_;
};

}  // namespace cu3d
