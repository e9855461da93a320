#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace sgm {

// A set of nodes packed into a word; bit i corresponds to node i.
// Everything in this library indexes nodes 0-based internally; external
// file formats use 1-based labels.
using NodeSet = std::uint64_t;

constexpr int max_nodes = 64;

constexpr NodeSet node_bit(int i) { return NodeSet{1} << i; }

constexpr bool set_contains(NodeSet s, int i) { return (s >> i) & 1; }

inline int set_size(NodeSet s) { return std::popcount(s); }

constexpr NodeSet full_set(int d) {
  return d >= max_nodes ? ~NodeSet{0} : (NodeSet{1} << d) - 1;
}

inline std::vector<int> set_to_nodes(NodeSet s) {
  std::vector<int> out;
  while (s) {
    int i = std::countr_zero(s);
    out.push_back(i);
    s &= s - 1;
  }
  return out;
}

inline NodeSet nodes_to_set(const std::vector<int>& nodes) {
  NodeSet s = 0;
  for (int v : nodes) s |= node_bit(v);
  return s;
}

// Packs the bits of x selected by mask into a contiguous low-order index
// (software pext). Used to address marginal tables.
inline std::uint32_t compress_bits(std::uint64_t x, NodeSet mask) {
  std::uint32_t out = 0;
  int k = 0;
  while (mask) {
    int i = std::countr_zero(mask);
    out |= static_cast<std::uint32_t>((x >> i) & 1) << k;
    ++k;
    mask &= mask - 1;
  }
  return out;
}

// Inverse of compress_bits: spreads the low set_size(mask) bits of y onto
// the positions of mask.
inline std::uint64_t expand_bits(std::uint32_t y, NodeSet mask) {
  std::uint64_t out = 0;
  int k = 0;
  while (mask) {
    int i = std::countr_zero(mask);
    out |= static_cast<std::uint64_t>((y >> k) & 1) << i;
    ++k;
    mask &= mask - 1;
  }
  return out;
}

// Calls f(sub) for every subset of mask, including 0 and mask itself.
template <typename F>
void for_each_subset(NodeSet mask, F&& f) {
  NodeSet sub = mask;
  while (true) {
    f(sub);
    if (sub == 0) break;
    sub = (sub - 1) & mask;
  }
}

inline std::string set_to_string(NodeSet s) {
  std::string out = "{";
  bool first = true;
  for (int v : set_to_nodes(s)) {
    if (!first) out += ",";
    out += std::to_string(v + 1);
    first = false;
  }
  return out + "}";
}

}  // namespace sgm
