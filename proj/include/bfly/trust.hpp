#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "bfly/maxflow.hpp"
#include "bfly/rng.hpp"
#include "bfly/topology.hpp"

namespace bfly {

struct TrustRadius {
  int h;
};

inline void validate(TrustRadius r) {
  if (r.h < 1) {
    throw std::invalid_argument("trust radius h must be at least 1, got " +
                                std::to_string(r.h));
  }
}

/// Vertices strictly closer than h hops to u, including u itself.
template <GraphView G>
std::vector<VertexIndex> trusted_neighborhood(const G& g, VertexIndex u,
                                              TrustRadius r) {
  validate(r);
  const auto dist = bfs_distances(g, u, r.h);
  std::vector<VertexIndex> result;
  for (VertexIndex i = 0; i < g.node_count(); ++i) {
    if (dist[i] >= 0 && dist[i] < r.h) result.push_back(i);
  }
  return result;
}

/// Vertices at distance exactly h from u.
template <GraphView G>
std::vector<VertexIndex> trust_boundary(const G& g, VertexIndex u,
                                        TrustRadius r) {
  validate(r);
  const auto dist = bfs_distances(g, u, r.h);
  std::vector<VertexIndex> result;
  for (VertexIndex i = 0; i < g.node_count(); ++i) {
    if (dist[i] == r.h) result.push_back(i);
  }
  return result;
}

/// Trusted neighborhoods and boundaries of both endpoints plus the untrusted
/// remainder. `mutually_trusted` is set when the neighborhoods overlap or a
/// direct edge joins them; every sender-to-receiver path then has a fully
/// trusted variant and the redundancy question degenerates.
struct TrustContext {
  VertexIndex v = 0;
  VertexIndex w = 0;
  int h = 1;
  std::vector<VertexIndex> trusted_v, boundary_v, trusted_w, boundary_w;
  std::vector<VertexIndex> untrusted;
  std::vector<std::uint8_t> in_trusted_v, in_trusted_w;
  bool mutually_trusted = false;
};

template <GraphView G>
TrustContext make_trust_context(const G& g, VertexIndex v, VertexIndex w,
                                TrustRadius r) {
  validate(r);
  if (v == w) throw std::invalid_argument("endpoints must differ");
  TrustContext ctx;
  ctx.v = v;
  ctx.w = w;
  ctx.h = r.h;
  const std::size_t n = g.node_count();
  const auto dv = bfs_distances(g, v, r.h);
  const auto dw = bfs_distances(g, w, r.h);
  ctx.in_trusted_v.assign(n, 0);
  ctx.in_trusted_w.assign(n, 0);
  for (VertexIndex i = 0; i < n; ++i) {
    const bool tv = dv[i] >= 0 && dv[i] < r.h;
    const bool tw = dw[i] >= 0 && dw[i] < r.h;
    ctx.in_trusted_v[i] = tv;
    ctx.in_trusted_w[i] = tw;
    if (tv && tw) ctx.mutually_trusted = true;
    if (tv) ctx.trusted_v.push_back(i);
    if (tw) ctx.trusted_w.push_back(i);
    if (dv[i] == r.h) ctx.boundary_v.push_back(i);
    if (dw[i] == r.h) ctx.boundary_w.push_back(i);
    if (!tv && !tw) ctx.untrusted.push_back(i);
  }
  if (!ctx.mutually_trusted) {
    // A trusted-to-trusted edge gives an unattackable path, which behaves
    // like overlap for redundancy purposes.
    for (VertexIndex a : ctx.trusted_v) {
      bool hit = false;
      g.for_each_neighbor(a, [&](VertexIndex b) { hit |= ctx.in_trusted_w[b] != 0; });
      if (hit) {
        ctx.mutually_trusted = true;
        break;
      }
    }
  }
  return ctx;
}

/// Result of the collapsed vertex max-flow between two trusted
/// neighborhoods. `delta` is the effective redundancy; `min_cut` is a set of
/// exactly delta untrusted vertices whose removal separates the collapsed
/// endpoints; `witness_paths` are delta full vertex sequences from v to w,
/// pairwise disjoint outside the trusted neighborhoods. When
/// `mutually_trusted` is set delta is conceptually unbounded and reported
/// as -1.
struct RedundancyResult {
  int delta = 0;
  bool mutually_trusted = false;
  std::vector<VertexIndex> min_cut;
  std::vector<std::vector<VertexIndex>> witness_paths;
  std::size_t boundary_v_size = 0;
  std::size_t boundary_w_size = 0;
};

namespace detail {

/// Walks the BFS parent tree from `node` back to the root. Every hop strictly
/// decreases the BFS depth, so the chain stays inside the trusted ball.
template <GraphView G>
std::vector<VertexIndex> chain_to_root(const G& g, const std::vector<int>& dist,
                                       VertexIndex node) {
  std::vector<VertexIndex> chain{node};
  VertexIndex cur = node;
  while (dist[cur] > 0) {
    VertexIndex parent = cur;
    g.for_each_neighbor(cur, [&](VertexIndex p) {
      if (parent == cur && dist[p] == dist[cur] - 1) parent = p;
    });
    chain.push_back(parent);
    cur = parent;
  }
  return chain;
}

}  // namespace detail

template <GraphView G>
RedundancyResult effective_redundancy(const G& g, VertexIndex v, VertexIndex w,
                                      TrustRadius r, bool with_witnesses = true) {
  const TrustContext ctx = make_trust_context(g, v, w, r);
  RedundancyResult result;
  result.boundary_v_size = ctx.boundary_v.size();
  result.boundary_w_size = ctx.boundary_w.size();
  if (ctx.mutually_trusted) {
    result.mutually_trusted = true;
    result.delta = -1;
    return result;
  }

  // Node-split reduction: untrusted vertex u becomes u_in -> u_out with
  // capacity 1; T_h(v) collapses to the source, T_h(w) to the sink.
  const std::size_t n = g.node_count();
  std::vector<int> in_id(n, -1);
  FlowNetwork net(static_cast<int>(2 * ctx.untrusted.size()) + 2);
  const int source = static_cast<int>(2 * ctx.untrusted.size());
  const int sink = source + 1;
  std::vector<VertexIndex> split_node;
  std::vector<int> arc_node;  // arc id / 2 -> vertex, -1 for non-split arcs
  auto register_arc = [&](int arc, int node) {
    const std::size_t slot = arc / 2;
    if (arc_node.size() <= slot) arc_node.resize(slot + 1, -1);
    arc_node[slot] = node;
  };
  for (std::size_t i = 0; i < ctx.untrusted.size(); ++i) {
    in_id[ctx.untrusted[i]] = static_cast<int>(2 * i);
    const int arc = net.add_arc(static_cast<int>(2 * i),
                                static_cast<int>(2 * i) + 1, 1);
    register_arc(arc, static_cast<int>(ctx.untrusted[i]));
  }

  std::vector<std::uint8_t> source_arc(n, 0), sink_arc(n, 0);
  for (VertexIndex a = 0; a < n; ++a) {
    g.for_each_neighbor(a, [&](VertexIndex b) {
      if (in_id[a] >= 0 && in_id[b] >= 0) {
        if (a < b) {
          register_arc(net.add_arc(in_id[a] + 1, in_id[b], FlowNetwork::kUnbounded), -1);
          register_arc(net.add_arc(in_id[b] + 1, in_id[a], FlowNetwork::kUnbounded), -1);
        }
      } else if (ctx.in_trusted_v[a] && in_id[b] >= 0 && !source_arc[b]) {
        source_arc[b] = 1;
        register_arc(net.add_arc(source, in_id[b], FlowNetwork::kUnbounded), -1);
      } else if (ctx.in_trusted_w[a] && in_id[b] >= 0 && !sink_arc[b]) {
        sink_arc[b] = 1;
        register_arc(net.add_arc(in_id[b] + 1, sink, FlowNetwork::kUnbounded), -1);
      }
    });
  }

  result.delta = net.max_flow(source, sink);

  // Source-side residual frontier: the cut is the set of saturated split
  // arcs, i.e. vertices whose in-half is reachable but out-half is not.
  const auto reach = net.residual_source_side(source);
  for (VertexIndex u : ctx.untrusted) {
    if (reach[in_id[u]] && !reach[in_id[u] + 1]) result.min_cut.push_back(u);
  }

  if (with_witnesses && result.delta > 0) {
    const auto dv = bfs_distances(g, v, ctx.h);
    const auto dw = bfs_distances(g, w, ctx.h);
    for (const auto& arc_path : net.unit_paths(source, sink)) {
      std::vector<VertexIndex> mid;
      for (int arc : arc_path) {
        const int node = arc_node[arc / 2];
        if (node >= 0) mid.push_back(static_cast<VertexIndex>(node));
      }
      if (mid.empty()) continue;
      std::vector<VertexIndex> path;
      // v-side: locate a trusted neighbor of the first untrusted vertex and
      // climb the BFS tree back to v.
      VertexIndex entry = v;
      bool found = false;
      g.for_each_neighbor(mid.front(), [&](VertexIndex p) {
        if (!found && ctx.in_trusted_v[p]) {
          entry = p;
          found = true;
        }
      });
      auto head = detail::chain_to_root(g, dv, entry);
      std::reverse(head.begin(), head.end());
      path.insert(path.end(), head.begin(), head.end());
      path.insert(path.end(), mid.begin(), mid.end());
      VertexIndex exit = w;
      found = false;
      g.for_each_neighbor(mid.back(), [&](VertexIndex p) {
        if (!found && ctx.in_trusted_w[p]) {
          exit = p;
          found = true;
        }
      });
      const auto tail = detail::chain_to_root(g, dw, exit);
      path.insert(path.end(), tail.begin(), tail.end());
      result.witness_paths.push_back(std::move(path));
    }
  }
  return result;
}

/// The min cut achieving the effective redundancy.
template <GraphView G>
std::vector<VertexIndex> min_vertex_cut(const G& g, VertexIndex v, VertexIndex w,
                                        TrustRadius r) {
  auto result = effective_redundancy(g, v, w, r, false);
  if (result.mutually_trusted) {
    throw PreconditionError("no finite vertex cut: endpoints are mutually trusted");
  }
  return result.min_cut;
}

/// Minimum effective redundancy over vertex pairs. Pairs flagged mutually
/// trusted are skipped and counted. When `sample_pairs` is set the minimum
/// is taken over that many random pairs instead of all of them, making the
/// result an upper bound (exact = false).
struct GraphRedundancy {
  std::optional<int> value;
  bool exact = true;
  std::size_t evaluated_pairs = 0;
  std::size_t excluded_pairs = 0;
};

template <GraphView G>
GraphRedundancy graph_redundancy(const G& g, TrustRadius r,
                                 std::size_t sample_pairs = 0,
                                 std::uint64_t seed = 0) {
  validate(r);
  const std::size_t n = g.node_count();
  GraphRedundancy out;
  auto consider = [&](VertexIndex v, VertexIndex w) {
    const auto res = effective_redundancy(g, v, w, r, false);
    if (res.mutually_trusted) {
      ++out.excluded_pairs;
      return;
    }
    ++out.evaluated_pairs;
    if (!out.value || res.delta < *out.value) out.value = res.delta;
  };
  if (sample_pairs == 0) {
    for (VertexIndex v = 0; v + 1 < n; ++v) {
      for (VertexIndex w = v + 1; w < n; ++w) consider(v, w);
    }
  } else {
    out.exact = false;
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < sample_pairs; ++i) {
      const auto v = static_cast<VertexIndex>(rng.below(n));
      auto w = static_cast<VertexIndex>(rng.below(n - 1));
      if (w >= v) ++w;
      consider(v, w);
    }
  }
  return out;
}

}  // namespace bfly
