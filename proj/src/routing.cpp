#include "bfly/routing.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <unordered_map>

namespace bfly {

namespace {

std::uint64_t bit_of(std::uint64_t word, int i) { return (word >> i) & 1; }

/// Canonical-frame description of one route. The only freedom the topology
/// leaves is the intermediate value of each place bit before the final
/// approach rewrites it; `pattern` holds those values. `cycle2` is the
/// number of approach steps: the destination level, lifted by a full extra
/// cycle when the level is below h (otherwise fewer than 2^h distinct
/// patterns would exist). A route whose pattern already matches the
/// destination along the stretch [cycle2 - h, cycle2 - h + m) stands still
/// there; the loop is excised and marks the route as shortcut.
struct RoutePlan {
  int m = 0;
  int h = 0;
  int dest_level = 0;
  std::uint64_t dest_place = 0;
  std::uint32_t s = 0;
  int cycle2 = 0;     // L: steps after the pattern phase
  int total_raw = 0;  // m + L, before loop excision
  std::uint64_t pattern = 0;
  bool spliced = false;
  int splice_begin = 0;
};

/// Desired value of bit (t mod m) when leaving the step-t node.
bool write_bit(const RoutePlan& p, int t) {
  const int i = t % p.m;
  return t < p.cycle2 ? bit_of(p.pattern, i) : bit_of(p.dest_place, i);
}

/// Closed-form node of the unspliced walk at step t: each bit carries the
/// value of its most recent write before t, or the canonical source bit 0.
NodeId raw_node_at(const RoutePlan& p, int t) {
  std::uint64_t z = 0;
  for (int i = 0; i < p.m; ++i) {
    int last = -1;
    for (int step = i; step < t; step += p.m) last = step;
    if (last >= 0) {
      z |= std::uint64_t(last < p.cycle2 ? bit_of(p.pattern, i)
                                         : bit_of(p.dest_place, i))
           << i;
    }
  }
  return {t % p.m, z};
}

RoutePlan make_plan(int m, int h, NodeId w_canonical, std::uint32_t s) {
  RoutePlan p;
  p.m = m;
  p.h = h;
  p.dest_level = w_canonical.level;
  p.dest_place = w_canonical.place;
  p.s = s;
  p.cycle2 = p.dest_level >= h ? p.dest_level : p.dest_level + m;
  p.total_raw = m + p.cycle2;

  // Pattern blocks: the lowest h bits carry s; the h bits cyclically
  // preceding the destination level carry a block that is a cyclic
  // permutation of s XOR the destination's lowest h bits (so the one route
  // whose approach window starts from the untouched state is the same route
  // whose pattern drifts into the destination, making that coincidence a
  // self-intersection instead of a cross-route one); everything else is
  // inverted relative to the canonical source place. Where the two blocks
  // overlap the s block wins.
  const std::uint32_t h_mask = (h >= 32) ? 0xffffffffu : ((1u << h) - 1);
  const std::uint32_t sig_source = (s ^ static_cast<std::uint32_t>(p.dest_place)) & h_mask;
  const int window_start = ((p.dest_level - h) % m + m) % m;
  std::uint64_t pattern = 0;
  for (int i = 0; i < m; ++i) {
    const int off = (i - window_start + m) % m;
    bool bit;
    if (i < h) {
      bit = bit_of(s, i);
    } else if (off < h) {
      bit = bit_of(sig_source, (off + p.dest_level) % h);
    } else if (p.cycle2 == p.dest_level && i >= p.dest_level) {
      bit = bit_of(p.dest_place, i);  // written by the approach, kept tidy
    } else {
      bit = true;
    }
    pattern |= std::uint64_t(bit) << i;
  }
  p.pattern = pattern;

  p.splice_begin = p.cycle2 - h;
  p.spliced = raw_node_at(p, p.splice_begin) ==
              raw_node_at(p, p.splice_begin + m);
  return p;
}

Stage classify_with_cycle(int t, int m, int cycle2, int h) {
  if (t < h) return Stage::S1;
  if (t >= cycle2 + m - h) return Stage::S7;
  if (t < cycle2 - h) return Stage::S2;
  if (t < cycle2) return Stage::S3;
  if (t < m) return Stage::S4;
  return (t % m) < h ? Stage::S5 : Stage::S6;
}

/// Materializes the canonical walk, erases the standstill loop if present,
/// and maps back to the original frame. Stage labels follow the raw step
/// that produced each hop; hops at or past an excision point are Shortcut.
Route materialize(const RoutePlan& p,
                  const Automorphism& to_original) {
  std::vector<NodeId> nodes;
  std::vector<int> raw_step;  // raw step index of the hop ending at nodes[k]
  nodes.reserve(p.total_raw + 1);
  nodes.push_back({0, 0});
  raw_step.push_back(-1);
  std::uint64_t z = 0;
  std::unordered_map<NodeId, int> seen;
  seen.emplace(nodes[0], 0);
  int erased = 0;
  int erase_begin = -1;
  for (int t = 0; t < p.total_raw; ++t) {
    const int i = t % p.m;
    z = (z & ~(std::uint64_t(1) << i)) |
        (std::uint64_t(write_bit(p, t)) << i);
    const NodeId next{(t + 1) % p.m, z};
    const auto [it, inserted] = seen.emplace(next, static_cast<int>(nodes.size()));
    if (!inserted) {
      // Revisited node: drop the loop. Valid walks stand still for exactly
      // one full level cycle, so this fires at most once per route.
      const int keep = it->second;
      erased += static_cast<int>(nodes.size()) - keep;
      if (erase_begin < 0) erase_begin = raw_step[keep] < 0 ? 0 : raw_step[keep] + 1;
      for (int j = keep + 1; j < static_cast<int>(nodes.size()); ++j) {
        seen.erase(nodes[j]);
      }
      nodes.resize(keep + 1);
      raw_step.resize(keep + 1);
    } else {
      nodes.push_back(next);
      raw_step.push_back(t);
    }
  }
  if (erased != (p.spliced ? p.m : 0)) {
    throw std::logic_error("route loop excision disagrees with plan analysis");
  }

  Route route;
  route.param = {p.s, p.h};
  route.nodes.reserve(nodes.size());
  for (NodeId u : nodes) route.nodes.push_back(to_original.invert(u));
  route.stages.reserve(nodes.size() - 1);
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (erase_begin >= 0 && raw_step[k] >= erase_begin) {
      route.stages.push_back(Stage::Shortcut);
    } else {
      route.stages.push_back(classify_with_cycle(raw_step[k], p.m, p.cycle2, p.h));
    }
  }
  return route;
}

void validate_radius(const ButterflyGraph& g, int h) {
  if (h < 1 || h > g.m() / 2) {
    throw std::invalid_argument("trust radius h must satisfy 1 <= h <= m/2 (m=" +
                                std::to_string(g.m()) + ", h=" + std::to_string(h) +
                                ")");
  }
}

}  // namespace

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::S1: return "1";
    case Stage::S2: return "2";
    case Stage::S3: return "3";
    case Stage::S4: return "4";
    case Stage::S5: return "5";
    case Stage::S6: return "6";
    case Stage::S7: return "7";
    case Stage::Shortcut: return "shortcut";
  }
  return "?";
}

Route unipath_route(const ButterflyGraph& g, NodeId v, NodeId w) {
  if (!g.contains(v) || !g.contains(w)) {
    throw std::invalid_argument("node outside butterfly");
  }
  Route route;
  route.param = {0, 0};
  if (v == w) {
    route.nodes = {v};
    return route;
  }
  const auto frame = canonicalize(g, v, w);
  const int m = g.m();
  const int l_w = frame.w_canonical.level;
  std::uint64_t z = 0;
  route.nodes.push_back(v);
  for (int t = 0; t < m + l_w; ++t) {
    const int i = t % m;
    if (t < m) {
      z = (z & ~(std::uint64_t(1) << i)) |
          (bit_of(frame.w_canonical.place, i) << i);
    }
    route.nodes.push_back(frame.map.invert({(t + 1) % m, z}));
    route.stages.push_back(Stage::Shortcut);
  }
  assert(route.nodes.back() == w);
  return route;
}

std::vector<Route> multipath_routes(const ButterflyGraph& g, NodeId v, NodeId w,
                                    int h) {
  validate_radius(g, h);
  if (!g.contains(v) || !g.contains(w)) {
    throw std::invalid_argument("node outside butterfly");
  }
  const auto d = distance(g, v, w);
  if (!d || *d < 2 * h) {
    throw PreconditionError(
        "multipath routing requires d(v,w) >= 2h: d=" +
        (d ? std::to_string(*d) : std::string("unreachable")) +
        ", 2h=" + std::to_string(2 * h));
  }
  const auto frame = canonicalize(g, v, w);
  std::vector<Route> routes;
  routes.reserve(std::size_t(1) << h);
  for (std::uint32_t s = 0; s < (std::uint32_t(1) << h); ++s) {
    routes.push_back(
        materialize(make_plan(g.m(), h, frame.w_canonical, s), frame.map));
  }
  return routes;
}

NodeId next_hop(NodeId current, int t, NodeId v, NodeId w, std::uint32_t s,
                int h, int m) {
  const ButterflyGraph g({m});
  validate_radius(g, h);
  const auto frame = canonicalize(g, v, w);
  const RoutePlan p = make_plan(m, h, frame.w_canonical, s);
  const int route_len = p.spliced ? p.total_raw - m : p.total_raw;
  if (t < 0 || t >= route_len) {
    throw PreconditionError("step index " + std::to_string(t) +
                            " outside route of length " + std::to_string(route_len));
  }
  const int raw = (p.spliced && t >= p.splice_begin) ? t + m : t;
  const NodeId expected = frame.map.invert(raw_node_at(p, raw));
  if (expected != current) {
    throw PreconditionError("node " + format_node(current, m) +
                            " is not step " + std::to_string(t) +
                            " of route s=" + std::to_string(s));
  }
  const NodeId cur_c = frame.map.apply(current);
  const int i = raw % m;
  const std::uint64_t z =
      (cur_c.place & ~(std::uint64_t(1) << i)) |
      (std::uint64_t(write_bit(p, raw)) << i);
  return frame.map.invert({(raw + 1) % m, z});
}

IndependenceReport verify_independence(
    const std::vector<Route>& routes,
    const std::unordered_set<NodeId>& trusted) {
  IndependenceReport report;
  std::vector<std::unordered_set<NodeId>> untrusted_nodes(routes.size());
  for (std::size_t i = 0; i < routes.size(); ++i) {
    for (NodeId u : routes[i].nodes) {
      if (!trusted.contains(u)) untrusted_nodes[i].insert(u);
    }
  }
  for (std::size_t i = 0; i + 1 < routes.size(); ++i) {
    for (std::size_t j = i + 1; j < routes.size(); ++j) {
      const auto& small = untrusted_nodes[i].size() <= untrusted_nodes[j].size()
                              ? untrusted_nodes[i]
                              : untrusted_nodes[j];
      const auto& large = untrusted_nodes[i].size() <= untrusted_nodes[j].size()
                              ? untrusted_nodes[j]
                              : untrusted_nodes[i];
      for (NodeId u : small) {
        if (large.contains(u)) {
          report.pass = false;
          report.violations.push_back(
              {routes[i].param.s, routes[j].param.s, u});
        }
      }
    }
  }
  return report;
}

Stage classify_stage(int t, int m, int l_w, int h) {
  if (l_w < 0 || l_w >= m || h < 1 || h > m / 2) {
    throw std::invalid_argument("bad stage geometry");
  }
  if (t < 0 || t >= m + l_w) {
    throw std::invalid_argument("step " + std::to_string(t) +
                                " outside [0, m + l_w)");
  }
  return classify_with_cycle(t, m, l_w, h);
}

std::uint32_t s_tilde(std::uint32_t s, int l_w, int h) {
  std::uint32_t out = 0;
  for (int i = 0; i < h; ++i) {
    out |= ((s >> ((i + l_w) % h)) & 1u) << i;
  }
  return out;
}

bool ClassPredicates::in_q(std::uint64_t place) const {
  for (int i = h; i < l_w - h; ++i) {
    if (bit_of(place, i) != bit_of(z0, i)) return false;
  }
  return true;
}

bool ClassPredicates::in_r(std::uint64_t place) const {
  for (int i = 0; i < h; ++i) {
    if (bit_of(place, i) != ((s >> i) & 1)) return false;
  }
  return true;
}

bool ClassPredicates::in_s(std::uint64_t place) const {
  const int start = ((l_w - h) % m + m) % m;
  for (int j = 0; j < h; ++j) {
    if (bit_of(place, (start + j) % m) != ((s_tilde_bits >> j) & 1)) return false;
  }
  return true;
}

ClassPredicates make_class_predicates(int m, int h, int l_w, std::uint64_t z0,
                                      std::uint32_t s) {
  return {m, h, l_w, z0, s, s_tilde(s, l_w, h)};
}

bool is_directed_edge(const ButterflyGraph& g, NodeId a, NodeId b) {
  const auto out = g.out_neighbors(a);
  return b == out.down || b == out.downright;
}

}  // namespace bfly
