#pragma once

#include <concepts>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bfly/errors.hpp"

namespace bfly {

// ---------------------------------------------------------------------------
// Wrap-around butterfly
// ---------------------------------------------------------------------------

/// A vertex of the wrap-around butterfly: a level in [0, m) and an m-bit
/// place-within-level. Bit i of `place` is the coefficient of 2^i; textual
/// form prints bit 0 rightmost.
struct NodeId {
  int level = 0;
  std::uint64_t place = 0;

  friend bool operator==(const NodeId&, const NodeId&) = default;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct ButterflyParams {
  int m;
};

/// Dense index type shared by the butterfly and generic graphs.
using VertexIndex = std::uint32_t;

/// The m-dimensional directed wrap-around butterfly. Adjacency is computed
/// arithmetically; nothing is materialized. The undirected view (union of
/// out- and in-edges) backs distance and trust computations, while route
/// construction uses the directed edges only.
class ButterflyGraph {
 public:
  /// Rejects m < 2 (and m too large to index with 32-bit vertex ids).
  explicit ButterflyGraph(ButterflyParams params);

  int m() const { return m_; }
  std::uint64_t place_mask() const { return mask_; }
  std::size_t node_count() const { return std::size_t(m_) << m_; }
  std::size_t directed_edge_count() const { return 2 * node_count(); }

  bool contains(NodeId u) const {
    return u.level >= 0 && u.level < m_ && (u.place & ~mask_) == 0;
  }

  VertexIndex index_of(NodeId u) const {
    return static_cast<VertexIndex>((std::uint64_t(u.level) << m_) | u.place);
  }
  NodeId node_at(VertexIndex i) const {
    return {static_cast<int>(i >> m_), i & mask_};
  }

  /// Directed successors: the down edge keeps the place, the down-right edge
  /// flips bit `level` of the place; both increment the level mod m.
  struct OutNeighbors {
    NodeId down;
    NodeId downright;
  };
  OutNeighbors out_neighbors(NodeId u) const {
    const int l = next_level(u.level);
    return {{l, u.place}, {l, u.place ^ (std::uint64_t(1) << u.level)}};
  }

  struct InNeighbors {
    NodeId down;
    NodeId downright;
  };
  InNeighbors in_neighbors(NodeId u) const {
    const int l = prev_level(u.level);
    return {{l, u.place}, {l, u.place ^ (std::uint64_t(1) << l)}};
  }

  /// Distinct undirected neighbors. Size is 4 for m >= 3; for m = 2 the in-
  /// and out-edges can coincide and the set shrinks.
  std::vector<NodeId> undirected_neighbors(NodeId u) const;

  /// Calls f(VertexIndex) for every undirected neighbor, duplicates removed.
  template <typename F>
  void for_each_neighbor(VertexIndex i, F&& f) const {
    const NodeId u = node_at(i);
    const auto out = out_neighbors(u);
    const auto in = in_neighbors(u);
    VertexIndex seen[4];
    int n = 0;
    for (NodeId v : {out.down, out.downright, in.down, in.downright}) {
      const VertexIndex j = index_of(v);
      bool dup = false;
      for (int k = 0; k < n; ++k) dup |= (seen[k] == j);
      if (!dup) {
        seen[n++] = j;
        f(j);
      }
    }
  }

  int next_level(int l) const { return l + 1 == m_ ? 0 : l + 1; }
  int prev_level(int l) const { return l == 0 ? m_ - 1 : l - 1; }

 private:
  int m_;
  std::uint64_t mask_;
};

/// A level/place relabeling of the butterfly that preserves edges and edge
/// types: XOR the place with a constant, then shift levels and rotate bit
/// indices by the same amount.
struct Automorphism {
  int m = 0;
  int level_shift = 0;        // applied as level -> (level + shift) mod m
  std::uint64_t place_xor = 0;  // applied before the rotation

  NodeId apply(NodeId u) const;
  NodeId invert(NodeId u) const;
};

/// The automorphism mapping v to (0, 0...0), together with the image of w.
/// Applying `map.invert` to every node of a canonical-frame route yields a
/// valid route in the original frame.
struct CanonicalFrame {
  NodeId w_canonical;
  Automorphism map;
};
CanonicalFrame canonicalize(const ButterflyGraph& g, NodeId v, NodeId w);

/// Renders "(l,zzzz)" with the place as a fixed-width binary literal,
/// bit 0 rightmost.
std::string format_node(NodeId u, int m);

/// Parses the literal form accepted by format_node. Throws ProtocolError on
/// malformed input or a place that is not exactly m bits wide.
NodeId parse_node(std::string_view text, int m);

// ---------------------------------------------------------------------------
// Generic graphs
// ---------------------------------------------------------------------------

/// Simple undirected graph over opaque string labels, mapped to dense
/// vertex ids at load time.
class GenericGraph {
 public:
  VertexIndex add_node(const std::string& label);
  /// Adds an undirected edge; duplicates collapse, self-loops throw.
  void add_edge(VertexIndex a, VertexIndex b);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  const std::string& label(VertexIndex i) const { return labels_[i]; }
  std::optional<VertexIndex> find(std::string_view label) const;

  const std::vector<VertexIndex>& neighbors(VertexIndex i) const {
    return adjacency_[i];
  }

  template <typename F>
  void for_each_neighbor(VertexIndex i, F&& f) const {
    for (VertexIndex j : adjacency_[i]) f(j);
  }

  /// Connected component id per vertex, labeled 0..k-1 in BFS order.
  std::vector<int> components() const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, VertexIndex> index_;
  std::vector<std::vector<VertexIndex>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Parses whitespace-separated label pairs, one edge per line. Lines that
/// are blank or start with '#' are skipped. Malformed lines and self-loops
/// throw ProtocolError naming the line number.
GenericGraph load_graph(std::istream& source);
GenericGraph load_graph(const std::string& text);

// ---------------------------------------------------------------------------
// Shared graph-view utilities
// ---------------------------------------------------------------------------

template <typename G>
concept GraphView = requires(const G& g, VertexIndex u) {
  { g.node_count() } -> std::convertible_to<std::size_t>;
  g.for_each_neighbor(u, [](VertexIndex) {});
};

/// Breadth-first hop counts from `start` on the undirected view; -1 marks
/// unreachable vertices. `max_depth < 0` explores everything.
template <GraphView G>
std::vector<int> bfs_distances(const G& g, VertexIndex start,
                               int max_depth = -1) {
  std::vector<int> dist(g.node_count(), -1);
  std::vector<VertexIndex> frontier{start}, next;
  dist[start] = 0;
  int depth = 0;
  while (!frontier.empty() && (max_depth < 0 || depth < max_depth)) {
    ++depth;
    next.clear();
    for (VertexIndex u : frontier) {
      g.for_each_neighbor(u, [&](VertexIndex v) {
        if (dist[v] < 0) {
          dist[v] = depth;
          next.push_back(v);
        }
      });
    }
    frontier.swap(next);
  }
  return dist;
}

/// Exact shortest-path hop count, or nullopt for a disconnected pair.
template <GraphView G>
std::optional<int> distance(const G& g, VertexIndex u, VertexIndex v) {
  if (u == v) return 0;
  std::vector<int> dist(g.node_count(), -1);
  std::vector<VertexIndex> frontier{u}, next;
  dist[u] = 0;
  int depth = 0;
  while (!frontier.empty()) {
    ++depth;
    next.clear();
    for (VertexIndex x : frontier) {
      std::optional<int> hit;
      g.for_each_neighbor(x, [&](VertexIndex y) {
        if (dist[y] < 0) {
          dist[y] = depth;
          if (y == v) hit = depth;
          next.push_back(y);
        }
      });
      if (hit) return hit;
    }
    frontier.swap(next);
  }
  return std::nullopt;
}

inline std::optional<int> distance(const ButterflyGraph& g, NodeId u,
                                   NodeId v) {
  return distance(g, g.index_of(u), g.index_of(v));
}

}  // namespace bfly

template <>
struct std::hash<bfly::NodeId> {
  std::size_t operator()(const bfly::NodeId& u) const noexcept {
    return std::hash<std::uint64_t>()(
        (std::uint64_t(u.level) << 58) ^ u.place);
  }
};
