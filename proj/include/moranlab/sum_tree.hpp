#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <vector>

namespace moranlab {

// Complete binary tree of partial sums over non-negative weights.
// set() and sample() are O(log n). Internal nodes are always recomputed
// from their children, so the root never accumulates rounding drift from
// a long sequence of updates.
class SumTree {
 public:
  SumTree() = default;
  explicit SumTree(std::size_t size) { reset(size); }

  void reset(std::size_t size) {
    size_ = size;
    leaves_ = 1;
    while (leaves_ < size) leaves_ <<= 1;
    nodes_.assign(2 * leaves_, 0.0);
  }

  std::size_t size() const { return size_; }
  double total() const { return nodes_[1]; }
  double weight(std::size_t i) const { return nodes_[leaves_ + i]; }

  void set(std::size_t i, double w) {
    assert(i < size_ && w >= 0);
    std::size_t k = leaves_ + i;
    if (nodes_[k] == w) return;
    nodes_[k] = w;
    for (k >>= 1; k >= 1; k >>= 1) nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
  }

  // Rebuilds every internal node from the leaves.
  void rebuild() {
    for (std::size_t k = leaves_ - 1; k >= 1; --k) nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
  }
  // Sets a leaf without touching ancestors; call rebuild() afterwards.
  void set_leaf(std::size_t i, double w) { nodes_[leaves_ + i] = w; }

  // Index i drawn with probability weight(i)/total(), given u uniform on
  // [0,1). Never returns a zero-weight leaf while total() > 0.
  std::size_t sample(double u) const {
    assert(total() > 0);
    double r = u * nodes_[1];
    std::size_t k = 1;
    while (k < leaves_) {
      const double left = nodes_[2 * k];
      const double right = nodes_[2 * k + 1];
      if ((r < left && left > 0) || right <= 0) {
        k = 2 * k;
      } else {
        r -= left;
        k = 2 * k + 1;
      }
    }
    return k - leaves_;
  }

 private:
  std::size_t size_ = 0;
  std::size_t leaves_ = 1;
  std::vector<double> nodes_{0.0, 0.0};
};

// Two SumTrees over the same index set stored node-interleaved, so that
// updating both weights of one index walks a single root path.
class PairSumTree {
 public:
  PairSumTree() = default;
  explicit PairSumTree(std::size_t size) { reset(size); }

  void reset(std::size_t size) {
    size_ = size;
    leaves_ = 1;
    while (leaves_ < size) leaves_ <<= 1;
    nodes_.assign(2 * leaves_, {0.0, 0.0});
  }

  std::size_t size() const { return size_; }
  double total(int c) const { return nodes_[1][c]; }
  double weight(int c, std::size_t i) const { return nodes_[leaves_ + i][c]; }

  void set(std::size_t i, double a, double b) {
    assert(i < size_ && a >= 0 && b >= 0);
    std::size_t k = leaves_ + i;
    auto* nd = nodes_.data();
    if (nd[k][0] == a && nd[k][1] == b) return;
    nd[k] = {a, b};
    for (k >>= 1; k >= 1; k >>= 1) {
      const auto& l = nd[2 * k];
      const auto& r = nd[2 * k + 1];
      nd[k] = {l[0] + r[0], l[1] + r[1]};
    }
  }

  void set_leaf(std::size_t i, double a, double b) { nodes_[leaves_ + i] = {a, b}; }
  void rebuild() {
    for (std::size_t k = leaves_ - 1; k >= 1; --k) {
      nodes_[k][0] = nodes_[2 * k][0] + nodes_[2 * k + 1][0];
      nodes_[k][1] = nodes_[2 * k][1] + nodes_[2 * k + 1][1];
    }
  }

  // As SumTree::sample, on channel c.
  std::size_t sample(int c, double u) const { return locate(c, u * nodes_[1][c]); }

  // Leaf whose cumulative interval on channel c contains r, for r in
  // [0, total(c)); skips zero-weight leaves like sample().
  std::size_t locate(int c, double r) const {
    assert(total(c) > 0);
    const auto* nd = nodes_.data();
    std::size_t k = 1;
    while (k < leaves_) {
      const double left = nd[2 * k][c];
      const double right = nd[2 * k + 1][c];
      if ((r < left && left > 0) || right <= 0) {
        k = 2 * k;
      } else {
        r -= left;
        k = 2 * k + 1;
      }
    }
    return k - leaves_;
  }

 private:
  std::size_t size_ = 0;
  std::size_t leaves_ = 1;
  std::vector<std::array<double, 2>> nodes_{{0.0, 0.0}, {0.0, 0.0}};
};

}  // namespace moranlab
