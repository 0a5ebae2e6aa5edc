#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "bfly/topology.hpp"

namespace bfly {

/// Per-hop construction stage. Stages 1-4 build the path-specific bit
/// pattern on the way to the intermediate vertex; stages 5-7 rewrite the
/// place toward the destination. Shortcut marks hops of a route whose
/// middle cycle collapsed (see multipath_routes).
enum class Stage : std::uint8_t {
  S1 = 1,
  S2 = 2,
  S3 = 3,
  S4 = 4,
  S5 = 5,
  S6 = 6,
  S7 = 7,
  Shortcut = 8,
};

const char* stage_name(Stage stage);

/// Selects one of the 2^h constructed routes.
struct PathParam {
  std::uint32_t s = 0;
  int h = 0;
};

struct Route {
  std::vector<NodeId> nodes;  // length() + 1 entries, nodes[0] == source
  std::vector<Stage> stages;  // one label per hop
  PathParam param;

  int length() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Greedy single-path routing: one level cycle fixing each place bit toward
/// the destination, then down edges to the destination level. Length is
/// m + ((w.level - v.level) mod m) except for the trivial v == w route.
Route unipath_route(const ButterflyGraph& g, NodeId v, NodeId w);

/// Constructs the 2^h routes, one per path index s. Requires
/// 1 <= h <= floor(m/2) and d(v, w) >= 2h (undirected distance); violations
/// throw invalid_argument / PreconditionError respectively.
///
/// In the canonical frame every route cycles levels, writing a path-specific
/// pattern before the final approach rewrites each bit to the destination
/// value. Routes whose middle cycle degenerates into a loop (the pattern
/// already matches the destination on the way through) have the loop
/// excised and the affected hops labeled Shortcut; every other route has
/// exactly m + l_w hops when the canonical destination level l_w is at
/// least h, and 2m + l_w hops otherwise (the construction then needs a
/// second pattern cycle to keep the 2^h routes distinct).
std::vector<Route> multipath_routes(const ButterflyGraph& g, NodeId v, NodeId w,
                                    int h);

/// Stateless forwarding: the node following `current` at step t of route
/// (v, w, s). Chaining from v reproduces multipath_routes(g, v, w, h)[s]
/// exactly. Throws PreconditionError if (current, t) is not on that route.
NodeId next_hop(NodeId current, int t, NodeId v, NodeId w, std::uint32_t s,
                int h, int m);

struct IndependenceViolation {
  std::uint32_t s = 0;
  std::uint32_t s_prime = 0;
  NodeId node;
};

struct IndependenceReport {
  bool pass = true;
  std::vector<IndependenceViolation> violations;
};

/// Checks that every pair of routes intersects only inside `trusted`.
IndependenceReport verify_independence(const std::vector<Route>& routes,
                                       const std::unordered_set<NodeId>& trusted);

/// The stage whose step interval contains t, for the printed stage geometry
/// (destination level l_w, 0 <= t < m + l_w). Where intervals overlap at
/// degenerate geometries, the sender-trusted prefix counts as stage 1 and
/// the final approach as stage 7. Out-of-range t throws invalid_argument.
Stage classify_stage(int t, int m, int l_w, int h);

/// Cyclic permutation pairing a path index with its destination-side bit
/// block: result bit i is s bit (i + l_w) mod h.
std::uint32_t s_tilde(std::uint32_t s, int l_w, int h);

/// The three place-within-level classes used to reason about route
/// disjointness, relative to a source place z0 and destination level l_w:
///   Q: bits h..l_w-h-1 match z0 (vacuously true when the range is empty),
///   R: the lowest h bits match s,
///   S: the h bits cyclically preceding index l_w match s_tilde(s, l_w, h).
/// Distinct s give disjoint R classes and disjoint S classes.
struct ClassPredicates {
  int m = 0;
  int h = 0;
  int l_w = 0;
  std::uint64_t z0 = 0;
  std::uint32_t s = 0;
  std::uint32_t s_tilde_bits = 0;

  bool in_q(std::uint64_t place) const;
  bool in_r(std::uint64_t place) const;
  bool in_s(std::uint64_t place) const;
};

ClassPredicates make_class_predicates(int m, int h, int l_w, std::uint64_t z0,
                                      std::uint32_t s);

/// True when (a, b) is a directed butterfly edge (down or down-right).
bool is_directed_edge(const ButterflyGraph& g, NodeId a, NodeId b);

}  // namespace bfly
