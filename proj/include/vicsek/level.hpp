#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vicsek/errors.hpp"
#include "vicsek/ratio_sequence.hpp"
#include "vicsek/word.hpp"

namespace vicsek {

using VertexId = std::uint32_t;
using CellId = std::uint64_t;

struct Edge {
  VertexId tail;
  VertexId head;
  CellId cell;
  int corner;  // 1..4; the cell's center is the other endpoint
};

struct BuildOptions {
  std::uint64_t max_cells = std::uint64_t(1) << 22;
};

inline void check_budget(const RatioSequence& rs, std::size_t n, const BuildOptions& opt) {
  const BigInt& cells = rs.word_count(n);
  if (cells > BigInt(opt.max_cells))
    throw ResourceError("level " + std::to_string(n) + " needs #W_" + std::to_string(n) + " = " + cells.str() +
                            " cells, budget is " + std::to_string(opt.max_cells),
                        cells.str());
}

// Exact level-n graph.  Vertex ids follow first appearance over cells in
// lexicographic order, so the vertices first produced by the descendants of any
// coarser cell form a contiguous id range.
class VicsekLevel {
 public:
  VicsekLevel(std::shared_ptr<const RatioSequence> rs, std::size_t n, const BuildOptions& opt = {})
      : rs_(std::move(rs)), level_(n) {
    check_budget(*rs_, n, opt);
    L_ = rs_->scale_i64(n);
    if (L_ > (std::int64_t(1) << 30)) throw ResourceError("coordinates exceed packing range", rs_->scale(n).str());
    build();
  }

  const RatioSequence& ratios() const { return *rs_; }
  std::shared_ptr<const RatioSequence> ratios_ptr() const { return rs_; }
  std::size_t level() const { return level_; }
  std::int64_t scale() const { return L_; }
  std::size_t vertex_count() const { return x_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::uint64_t cell_count() const { return cells_.size(); }

  LatticePoint point(VertexId v) const { return {x_.at(v), y_.at(v), level_}; }
  std::int64_t x(VertexId v) const { return x_[v]; }
  std::int64_t y(VertexId v) const { return y_[v]; }
  const std::vector<Edge>& edges() const { return edges_; }
  // Vertex ids of cell c: center, q1..q4.
  const std::array<VertexId, 5>& cell(CellId c) const { return cells_.at(c); }
  LatticePoint cell_center(CellId c) const { return point(cells_.at(c)[0]); }
  Word cell_word(CellId c) const { return word_from_index(*rs_, level_, c); }
  // Number of (cell, corner) incidences producing v.
  int multiplicity(VertexId v) const { return multiplicity_.at(v); }

  // Edge count from the origin.
  std::uint32_t depth(VertexId v) const { return depth_.at(v); }
  VertexId parent(VertexId v) const { return parent_.at(v); }
  VertexId origin() const { return origin_; }
  const std::vector<VertexId>& bfs_order() const { return bfs_order_; }
  Rational edge_length() const { return Rational(1) / rs_->scale(level_); }
  Rational geodesic_from_origin(VertexId v) const { return Rational(depth(v)) / rs_->scale(level_); }

  std::size_t degree(VertexId v) const { return adj_off_.at(v + 1) - adj_off_[v]; }
  const VertexId* neighbors_begin(VertexId v) const { return adj_.data() + adj_off_[v]; }
  const VertexId* neighbors_end(VertexId v) const { return adj_.data() + adj_off_[v + 1]; }

  std::optional<VertexId> find_vertex(std::int64_t x, std::int64_t y) const {
    if (std::abs(x) > L_ || std::abs(y) > L_) return std::nullopt;
    auto it = index_.find(key(x, y));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  // Cell whose center is (x, y).
  std::optional<CellId> find_cell(std::int64_t x, std::int64_t y) const {
    auto v = find_vertex(x, y);
    if (!v || center_cell_[*v] == kNoCell) return std::nullopt;
    return center_cell_[*v];
  }

  // First cell (in lexicographic order) containing v.
  CellId owner_cell(VertexId v) const { return owner_.at(v); }
  // Ids first produced by level-k ancestor cell c form [owned_begin(k,c), owned_end(k,c)).
  VertexId owned_begin(std::size_t k, CellId c) const { return start_.at(c * below(k)); }
  VertexId owned_end(std::size_t k, CellId c) const { return start_.at((c + 1) * below(k)); }
  // #W_n / #W_k: number of level-n descendants of a level-k cell.
  std::uint64_t below(std::size_t k) const { return below_.at(k); }
  CellId ancestor(CellId c, std::size_t k) const { return c / below(k); }

 private:
  static constexpr CellId kNoCell = ~CellId(0);

  std::uint64_t key(std::int64_t x, std::int64_t y) const {
    const auto w = static_cast<std::uint64_t>(2 * L_ + 1);
    return static_cast<std::uint64_t>(x + L_) * w + static_cast<std::uint64_t>(y + L_);
  }

  void build() {
    const RatioSequence& rs = *rs_;
    const std::size_t n = level_;
    below_.assign(n + 1, 1);
    for (std::size_t k = n; k-- > 0;) below_[k] = below_[k + 1] * static_cast<std::uint64_t>(2 * rs.ratio(k + 1) - 1);

    std::vector<std::pair<std::int64_t, std::int64_t>> centers{{0, 0}}, next;
    for (std::size_t k = 1; k <= n; ++k) {
      const int l = rs.ratio(k);
      const auto letters = enumerate_letters(l);
      next.clear();
      next.reserve(centers.size() * letters.size());
      for (const auto& c : centers)
        for (const Letter& a : letters) {
          std::int64_t cx = c.first * l, cy = c.second * l;
          if (!a.is_center()) {
            cx += 2 * a.step * kCorner[static_cast<std::size_t>(a.direction)][0];
            cy += 2 * a.step * kCorner[static_cast<std::size_t>(a.direction)][1];
          }
          next.emplace_back(cx, cy);
        }
      centers.swap(next);
    }

    const std::size_t W = centers.size();
    cells_.resize(W);
    edges_.reserve(4 * W);
    x_.reserve(4 * W + 1);
    y_.reserve(4 * W + 1);
    start_.resize(W + 1);
    index_.reserve(4 * W + 1);
    for (std::size_t c = 0; c < W; ++c) {
      start_[c] = static_cast<VertexId>(x_.size());
      for (int j = 0; j <= 4; ++j) {
        const std::int64_t px = centers[c].first + kCorner[static_cast<std::size_t>(j)][0];
        const std::int64_t py = centers[c].second + kCorner[static_cast<std::size_t>(j)][1];
        auto [it, fresh] = index_.try_emplace(key(px, py), static_cast<VertexId>(x_.size()));
        if (fresh) {
          x_.push_back(px);
          y_.push_back(py);
          multiplicity_.push_back(0);
          owner_.push_back(c);
        }
        ++multiplicity_[it->second];
        cells_[c][static_cast<std::size_t>(j)] = it->second;
      }
      for (int j = 1; j <= 4; ++j) edges_.push_back({cells_[c][0], cells_[c][static_cast<std::size_t>(j)], c, j});
    }
    start_[W] = static_cast<VertexId>(x_.size());

    center_cell_.assign(x_.size(), kNoCell);
    for (std::size_t c = 0; c < W; ++c) center_cell_[cells_[c][0]] = c;

    const std::size_t V = x_.size();
    adj_off_.assign(V + 1, 0);
    for (const Edge& e : edges_) {
      ++adj_off_[e.tail + 1];
      ++adj_off_[e.head + 1];
    }
    for (std::size_t v = 0; v < V; ++v) adj_off_[v + 1] += adj_off_[v];
    adj_.resize(adj_off_[V]);
    std::vector<std::size_t> fill(adj_off_.begin(), adj_off_.end() - 1);
    for (const Edge& e : edges_) {
      adj_[fill[e.tail]++] = e.head;
      adj_[fill[e.head]++] = e.tail;
    }

    origin_ = *find_vertex(0, 0);
    depth_.assign(V, UINT32_MAX);
    parent_.assign(V, origin_);
    bfs_order_.reserve(V);
    depth_[origin_] = 0;
    bfs_order_.push_back(origin_);
    for (std::size_t i = 0; i < bfs_order_.size(); ++i) {
      const VertexId v = bfs_order_[i];
      for (auto* it = neighbors_begin(v); it != neighbors_end(v); ++it) {
        if (depth_[*it] != UINT32_MAX) continue;
        depth_[*it] = depth_[v] + 1;
        parent_[*it] = v;
        bfs_order_.push_back(*it);
      }
    }
    for (Edge& e : edges_)
      if (depth_[e.tail] > depth_[e.head]) std::swap(e.tail, e.head);
  }

  std::shared_ptr<const RatioSequence> rs_;
  std::size_t level_;
  std::int64_t L_ = 1;
  std::vector<std::int64_t> x_, y_;
  std::vector<Edge> edges_;
  std::vector<std::array<VertexId, 5>> cells_;
  std::vector<std::uint8_t> multiplicity_;
  std::vector<CellId> owner_;
  std::vector<CellId> center_cell_;
  std::vector<VertexId> start_;
  std::vector<std::uint64_t> below_;
  std::vector<std::size_t> adj_off_;
  std::vector<VertexId> adj_;
  std::vector<std::uint32_t> depth_;
  std::vector<VertexId> parent_;
  std::vector<VertexId> bfs_order_;
  VertexId origin_ = 0;
  std::unordered_map<std::uint64_t, VertexId> index_;
};

inline VicsekLevel build_level(const RatioSequence& rs, std::size_t n, const BuildOptions& opt = {}) {
  return VicsekLevel(std::make_shared<const RatioSequence>(rs), n, opt);
}

// Number of edges on the tree path a..b.
inline std::uint32_t geodesic_steps(const VicsekLevel& g, VertexId a, VertexId b) {
  if (a >= g.vertex_count() || b >= g.vertex_count())
    throw LookupError("vertex id out of range (" + std::to_string(std::max(a, b)) + ")");
  std::uint32_t steps = 0;
  while (g.depth(a) > g.depth(b)) a = g.parent(a), ++steps;
  while (g.depth(b) > g.depth(a)) b = g.parent(b), ++steps;
  while (a != b) a = g.parent(a), b = g.parent(b), steps += 2;
  return steps;
}

inline Rational geodesic_distance(const VicsekLevel& g, VertexId a, VertexId b) {
  return Rational(geodesic_steps(g, a, b)) / g.ratios().scale(g.level());
}

// Vertices on the tree path from a to b, inclusive.
inline std::vector<VertexId> geodesic_path(const VicsekLevel& g, VertexId a, VertexId b) {
  geodesic_steps(g, a, b);
  std::vector<VertexId> front, back;
  while (g.depth(a) > g.depth(b)) front.push_back(a), a = g.parent(a);
  while (g.depth(b) > g.depth(a)) back.push_back(b), b = g.parent(b);
  while (a != b) front.push_back(a), back.push_back(b), a = g.parent(a), b = g.parent(b);
  front.push_back(a);
  front.insert(front.end(), back.rbegin(), back.rend());
  return front;
}

// Levels 0..N over one ratio sequence, built eagerly and immutable afterwards.
class Hierarchy {
 public:
  Hierarchy(const RatioSequence& rs, std::size_t max_level, const BuildOptions& opt = {})
      : rs_(std::make_shared<const RatioSequence>(rs)) {
    check_budget(*rs_, max_level, opt);
    for (std::size_t n = 0; n <= max_level; ++n) levels_.push_back(std::make_unique<VicsekLevel>(rs_, n, opt));
  }

  const RatioSequence& ratios() const { return *rs_; }
  std::size_t max_level() const { return levels_.size() - 1; }
  const VicsekLevel& level(std::size_t n) const {
    if (n >= levels_.size())
      throw LevelError("level " + std::to_string(n) + " not built (max " + std::to_string(max_level()) + ")");
    return *levels_[n];
  }

 private:
  std::shared_ptr<const RatioSequence> rs_;
  std::vector<std::unique_ptr<VicsekLevel>> levels_;
};

}  // namespace vicsek
