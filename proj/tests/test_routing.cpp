#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "bfly/rng.hpp"
#include "bfly/routing.hpp"
#include "bfly/topology.hpp"
#include "bfly/trust.hpp"

using namespace bfly;

namespace {

std::unordered_set<NodeId> trusted_union(const ButterflyGraph& g, NodeId v,
                                         NodeId w, int h) {
  std::unordered_set<NodeId> trusted;
  for (VertexIndex i : trusted_neighborhood(g, g.index_of(v), TrustRadius{h})) {
    trusted.insert(g.node_at(i));
  }
  for (VertexIndex i : trusted_neighborhood(g, g.index_of(w), TrustRadius{h})) {
    trusted.insert(g.node_at(i));
  }
  return trusted;
}

void check_route_shape(const ButterflyGraph& g, const Route& route, NodeId v,
                       NodeId w, int canonical_dest_level) {
  CHECK(route.nodes.front() == v);
  CHECK(route.nodes.back() == w);
  for (std::size_t i = 0; i + 1 < route.nodes.size(); ++i) {
    CHECK(is_directed_edge(g, route.nodes[i], route.nodes[i + 1]));
  }
  const bool shortcut =
      std::find(route.stages.begin(), route.stages.end(), Stage::Shortcut) !=
      route.stages.end();
  const int m = g.m();
  const int l_w = canonical_dest_level;
  if (!shortcut) {
    // Lifted geometry (destination level below h) runs one extra cycle.
    const int expected = l_w >= route.param.h ? m + l_w : 2 * m + l_w;
    CHECK(route.length() == expected);
  } else {
    CHECK(route.length() < 2 * m + l_w);
  }
}

// Destination sampler: uniform over nodes at distance >= 2h from v.
std::vector<NodeId> valid_destinations(const ButterflyGraph& g, NodeId v, int h) {
  const auto dist = bfs_distances(g, g.index_of(v));
  std::vector<NodeId> out;
  for (VertexIndex i = 0; i < g.node_count(); ++i) {
    if (dist[i] >= 2 * h) out.push_back(g.node_at(i));
  }
  return out;
}

}  // namespace

TEST_CASE("unipath trivial and full-flip routes") {
  const ButterflyGraph g({3});
  SUBCASE("v equals w") {
    const Route r = unipath_route(g, {1, 0b010}, {1, 0b010});
    CHECK(r.length() == 0);
    CHECK(r.nodes == std::vector<NodeId>{{1, 0b010}});
  }
  SUBCASE("all bits differ, levels equal") {
    const Route r = unipath_route(g, {0, 0b000}, {0, 0b111});
    CHECK(r.length() == 3);
    CHECK(r.nodes.back() == NodeId{0, 0b111});
    for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i) {
      CHECK(is_directed_edge(g, r.nodes[i], r.nodes[i + 1]));
    }
  }
}

TEST_CASE("unipath length is m plus the level offset") {
  const ButterflyGraph g({7});
  const NodeId v{0, 0};
  const NodeId w = parse_node("(6,0110111)", 7);
  const Route r = unipath_route(g, v, w);
  CHECK(r.length() == 13);
  CHECK(r.nodes.front() == v);
  CHECK(r.nodes.back() == w);
  for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i) {
    CHECK(is_directed_edge(g, r.nodes[i], r.nodes[i + 1]));
  }

  SplitMix64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = g.node_at(VertexIndex(rng.below(g.node_count())));
    const auto b = g.node_at(VertexIndex(rng.below(g.node_count())));
    if (a == b) continue;
    const Route route = unipath_route(g, a, b);
    CHECK(route.length() == 7 + ((b.level - a.level) % 7 + 7) % 7);
    CHECK(route.nodes.back() == b);
  }
}

TEST_CASE("multipath rejects bad parameters") {
  const ButterflyGraph g({6});
  CHECK_THROWS_AS(multipath_routes(g, {0, 0}, {3, 0b000111}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(multipath_routes(g, {0, 0}, {3, 0b000111}, 4),
                  std::invalid_argument);
  // Adjacent pair: d = 1 < 2h.
  try {
    multipath_routes(g, {0, 0}, {1, 0}, 1);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("d=1") != std::string::npos);
  }
}

TEST_CASE("h=1 yields exactly two routes") {
  const ButterflyGraph g({4});
  const NodeId w{2, 0b1111};
  REQUIRE(*distance(g, {0, 0}, w) >= 2);
  const auto routes = multipath_routes(g, {0, 0}, w, 1);
  CHECK(routes.size() == 2);
}

TEST_CASE("figure-style configuration: m=7 h=2") {
  const ButterflyGraph g({7});
  const NodeId v{0, 0};
  const NodeId w = parse_node("(6,0110111)", 7);
  const auto routes = multipath_routes(g, v, w, 2);
  REQUIRE(routes.size() == 4);
  for (const auto& route : routes) check_route_shape(g, route, v, w, 6);

  const auto verdict = verify_independence(routes, trusted_union(g, v, w, 2));
  CHECK(verdict.pass);
  CHECK(verdict.violations.empty());

  SUBCASE("class discipline: first cycle in R, second cycle in S") {
    // The pattern blocks pair route s with the S-class of s XOR the
    // destination's low bits (cyclically permuted); check membership hop by
    // hop on the canonical frame.
    const std::uint32_t z_hat = std::uint32_t(w.place) & 0b11;
    for (const auto& route : routes) {
      if (std::find(route.stages.begin(), route.stages.end(),
                    Stage::Shortcut) != route.stages.end()) {
        continue;
      }
      const auto r_pred = make_class_predicates(7, 2, 6, 0, route.param.s);
      const auto s_pred =
          make_class_predicates(7, 2, 6, 0, route.param.s ^ z_hat);
      for (int t = 0; t <= route.length(); ++t) {
        const NodeId node = route.nodes[t];
        if (t >= 2 && t <= 7) CHECK(r_pred.in_r(node.place));
        if (t >= 6 && t <= 11) CHECK(s_pred.in_s(node.place));
      }
    }
  }
}

TEST_CASE("m=6 h=3 full route family is pairwise independent") {
  const ButterflyGraph g({6});
  const NodeId v{0, 0};
  SplitMix64 rng(11);
  const auto candidates = valid_destinations(g, v, 3);
  REQUIRE_FALSE(candidates.empty());
  for (int trial = 0; trial < 5; ++trial) {
    const NodeId w = candidates[rng.below(candidates.size())];
    const auto routes = multipath_routes(g, v, w, 3);
    CHECK(routes.size() == 8);
    for (const auto& route : routes) {
      check_route_shape(g, route, v, w, w.level);
    }
    const auto verdict = verify_independence(routes, trusted_union(g, v, w, 3));
    CHECK(verdict.pass);
  }
}

TEST_CASE("next hop: first step follows the path index") {
  const ButterflyGraph g({7});
  const NodeId v{0, 0};
  const NodeId w = parse_node("(6,0110111)", 7);
  // Stage 1 writes bit 0 = s_0: down edge when 0, down-right when 1.
  const NodeId step0_s0 = next_hop(v, 0, v, w, 0b00, 2, 7);
  CHECK(step0_s0 == NodeId{1, 0});
  const NodeId step0_s1 = next_hop(v, 0, v, w, 0b01, 2, 7);
  CHECK(step0_s1 == NodeId{1, 1});
}

TEST_CASE("next hop chaining reproduces batch construction") {
  for (int m : {4, 5, 6, 7}) {
    const ButterflyGraph g({m});
    SplitMix64 rng(100 + m);
    for (int trial = 0; trial < 6; ++trial) {
      const auto v = g.node_at(VertexIndex(rng.below(g.node_count())));
      for (int h = 1; h <= m / 2; ++h) {
        const auto candidates = valid_destinations(g, v, h);
        if (candidates.empty()) continue;
        const NodeId w = candidates[rng.below(candidates.size())];
        const auto routes = multipath_routes(g, v, w, h);
        for (const auto& route : routes) {
          NodeId cur = v;
          for (int t = 0; t < route.length(); ++t) {
            cur = next_hop(cur, t, v, w, route.param.s, h, m);
            CHECK(cur == route.nodes[t + 1]);
          }
          CHECK(cur == w);
        }
      }
    }
  }
}

TEST_CASE("next hop rejects nodes that are not on the route") {
  const ButterflyGraph g({6});
  const NodeId v{0, 0};
  const NodeId w{3, 0b011100};
  REQUIRE(*distance(g, v, w) >= 4);
  const auto routes = multipath_routes(g, v, w, 2);
  const NodeId second = routes[1].nodes[1];
  CHECK_THROWS_AS(next_hop(second, 0, v, w, 0, 2, 6), PreconditionError);
  CHECK_THROWS_AS(next_hop(v, 5, v, w, 0, 2, 6), PreconditionError);
  CHECK_THROWS_AS(next_hop(v, -1, v, w, 0, 2, 6), PreconditionError);
}

TEST_CASE("verify_independence verdicts") {
  const ButterflyGraph g({6});
  const NodeId v{0, 0};
  const NodeId w{3, 0b000111};
  auto routes = multipath_routes(g, v, w, 1);

  SUBCASE("single route passes") {
    const std::vector<Route> one{routes[0]};
    CHECK(verify_independence(one, {}).pass);
  }
  SUBCASE("duplicated route with empty trusted set lists every shared node") {
    const std::vector<Route> dup{routes[0], routes[0]};
    const auto verdict = verify_independence(dup, {});
    CHECK_FALSE(verdict.pass);
    std::set<NodeId> listed;
    for (const auto& violation : verdict.violations) listed.insert(violation.node);
    const std::set<NodeId> expected(routes[0].nodes.begin(),
                                    routes[0].nodes.end());
    CHECK(listed == expected);
  }
}

TEST_CASE("theorem sweep: 200 random configurations stay independent") {
  SplitMix64 rng(2024);
  int checked = 0;
  while (checked < 200) {
    const int m = 4 + static_cast<int>(rng.below(5));  // 4..8
    const ButterflyGraph g({m});
    const int h = 1 + static_cast<int>(rng.below(std::uint64_t(m / 2)));
    const auto v = g.node_at(VertexIndex(rng.below(g.node_count())));
    const auto candidates = valid_destinations(g, v, h);
    if (candidates.empty()) continue;
    const NodeId w = candidates[rng.below(candidates.size())];
    ++checked;
    const auto routes = multipath_routes(g, v, w, h);
    REQUIRE(routes.size() == (std::size_t(1) << h));
    const auto verdict = verify_independence(routes, trusted_union(g, v, w, h));
    if (!verdict.pass) {
      for (const auto& violation : verdict.violations) {
        MESSAGE("m=", m, " h=", h, " v=", format_node(v, m), " w=",
                format_node(w, m), " s=", violation.s, " s'=", violation.s_prime,
                " node=", format_node(violation.node, m));
      }
    }
    CHECK(verdict.pass);
    for (const auto& route : routes) {
      const auto frame = canonicalize(g, v, w);
      check_route_shape(g, route, v, w, frame.w_canonical.level);
    }
  }
}

TEST_CASE("adversarial geometries: destination patterns that collide naively") {
  // Destinations whose middle block is all-inverted and whose tail matches
  // the source place force the coincidences the shortcut exists for; sweep
  // them for every level and prefix.
  for (int m : {4, 5, 6, 7}) {
    const ButterflyGraph g({m});
    const NodeId v{0, 0};
    for (int h = 1; h <= m / 2; ++h) {
      for (int l_w = 0; l_w < m; ++l_w) {
        for (std::uint32_t prefix = 0; prefix < (1u << h); ++prefix) {
          std::uint64_t place = prefix;
          for (int i = h; i < l_w - h; ++i) place |= std::uint64_t(1) << i;
          const NodeId w{l_w, place};
          if (w == v) continue;
          const auto d = distance(g, v, w);
          if (!d || *d < 2 * h) continue;
          const auto routes = multipath_routes(g, v, w, h);
          REQUIRE(routes.size() == (std::size_t(1) << h));
          const auto verdict =
              verify_independence(routes, trusted_union(g, v, w, h));
          if (!verdict.pass) {
            MESSAGE("m=", m, " h=", h, " w=", format_node(w, m));
          }
          CHECK(verdict.pass);
          for (const auto& route : routes) {
            check_route_shape(g, route, v, w, l_w);
          }
        }
      }
    }
  }
}

TEST_CASE("shortcut appears exactly when a route would stand still") {
  // m=4, h=1, w=(2,0011): the naive pairing makes routes 0 and 1 share the
  // untrusted node (1,0001); the corrected pairing turns that into a loop on
  // one route, excised and labeled shortcut.
  const ButterflyGraph g({4});
  const NodeId v{0, 0};
  const NodeId w = parse_node("(2,0011)", 4);
  REQUIRE(*distance(g, v, w) == 2);
  const auto routes = multipath_routes(g, v, w, 1);
  REQUIRE(routes.size() == 2);
  const auto verdict = verify_independence(routes, trusted_union(g, v, w, 1));
  CHECK(verdict.pass);
  int shortcuts = 0;
  for (const auto& route : routes) {
    if (std::find(route.stages.begin(), route.stages.end(), Stage::Shortcut) !=
        route.stages.end()) {
      ++shortcuts;
      CHECK(route.length() == 2);
    }
  }
  CHECK(shortcuts == 1);
}

TEST_CASE("frame equivalence: non-canonical sources map the canonical family") {
  const ButterflyGraph g({6});
  SplitMix64 rng(77);
  int tested = 0;
  while (tested < 20) {
    const auto v = g.node_at(VertexIndex(rng.below(g.node_count())));
    if (v == NodeId{0, 0}) continue;
    const auto candidates = valid_destinations(g, v, 2);
    if (candidates.empty()) continue;
    const NodeId w = candidates[rng.below(candidates.size())];
    ++tested;
    const auto routes = multipath_routes(g, v, w, 2);
    const auto frame = canonicalize(g, v, w);
    const auto canonical_routes =
        multipath_routes(g, {0, 0}, frame.w_canonical, 2);
    REQUIRE(routes.size() == canonical_routes.size());
    for (std::size_t s = 0; s < routes.size(); ++s) {
      REQUIRE(routes[s].nodes.size() == canonical_routes[s].nodes.size());
      for (std::size_t i = 0; i < routes[s].nodes.size(); ++i) {
        CHECK(frame.map.apply(routes[s].nodes[i]) ==
              canonical_routes[s].nodes[i]);
      }
    }
    const auto verdict = verify_independence(routes, trusted_union(g, v, w, 2));
    CHECK(verdict.pass);
  }
}

TEST_CASE("classify_stage intervals") {
  CHECK(classify_stage(0, 7, 6, 2) == Stage::S1);
  CHECK(classify_stage(4, 7, 6, 2) == Stage::S3);
  CHECK(classify_stage(12, 7, 6, 2) == Stage::S7);
  CHECK(classify_stage(2, 7, 6, 2) == Stage::S2);
  CHECK(classify_stage(6, 7, 6, 2) == Stage::S4);
  CHECK(classify_stage(7, 7, 6, 2) == Stage::S5);
  CHECK(classify_stage(9, 7, 6, 2) == Stage::S6);
  CHECK_THROWS_AS(classify_stage(13, 7, 6, 2), std::invalid_argument);
  CHECK_THROWS_AS(classify_stage(-1, 7, 6, 2), std::invalid_argument);
}

TEST_CASE("class predicates partition strings per path index") {
  // For s != s', no m-bit string lies in both R classes, nor in both S
  // classes; exhaustive over all strings for small m.
  for (int m : {4, 6}) {
    for (int h = 1; h <= m / 2; ++h) {
      for (int l_w = 0; l_w < m; ++l_w) {
        for (std::uint64_t place = 0; place < (std::uint64_t(1) << m); ++place) {
          int r_hits = 0, s_hits = 0;
          for (std::uint32_t s = 0; s < (1u << h); ++s) {
            const auto pred = make_class_predicates(m, h, l_w, 0, s);
            r_hits += pred.in_r(place);
            s_hits += pred.in_s(place);
          }
          CHECK(r_hits == 1);
          CHECK(s_hits == 1);
        }
      }
    }
  }
}

TEST_CASE("s_tilde is the stated cyclic permutation") {
  // s_tilde_i = s_((i + l_w) mod h)
  CHECK(s_tilde(0b10, 6, 2) == 0b10);  // shift by 6 ≡ 0 mod 2
  CHECK(s_tilde(0b10, 5, 2) == 0b01);
  CHECK(s_tilde(0b110, 4, 3) == 0b011);
  for (std::uint32_t s = 0; s < 8; ++s) {
    for (int l_w = 0; l_w < 9; ++l_w) {
      std::uint32_t expected = 0;
      for (int i = 0; i < 3; ++i) {
        expected |= ((s >> ((i + l_w) % 3)) & 1u) << i;
      }
      CHECK(s_tilde(s, l_w, 3) == expected);
    }
  }
}

TEST_CASE("route hop levels cycle") {
  const ButterflyGraph g({5});
  const NodeId v{0, 0};
  const auto candidates = valid_destinations(g, v, 2);
  SplitMix64 rng(5);
  const NodeId w = candidates[rng.below(candidates.size())];
  for (const auto& route : multipath_routes(g, v, w, 2)) {
    for (std::size_t t = 0; t < route.nodes.size(); ++t) {
      CHECK(route.nodes[t].level == static_cast<int>(t % 5));
    }
  }
}

TEST_CASE("next hop folds the full figure-style route") {
  const ButterflyGraph g({7});
  const NodeId v{0, 0};
  const NodeId w = parse_node("(6,0110111)", 7);
  const auto routes = multipath_routes(g, v, w, 2);
  for (const auto& route : routes) {
    NodeId cur = v;
    for (int t = 0; t < route.length(); ++t) {
      cur = next_hop(cur, t, v, w, route.param.s, 2, 7);
    }
    CHECK(cur == w);
    CHECK(route.length() == 13);
  }
}

TEST_CASE("class disjointness stays exhaustive at m=8") {
  const int m = 8;
  for (int h : {1, 2, 3, 4}) {
    for (int l_w : {0, 3, 7}) {
      for (std::uint64_t place = 0; place < (std::uint64_t(1) << m); ++place) {
        int r_hits = 0, s_hits = 0;
        for (std::uint32_t s = 0; s < (1u << h); ++s) {
          const auto pred = make_class_predicates(m, h, l_w, 0, s);
          r_hits += pred.in_r(place);
          s_hits += pred.in_s(place);
        }
        REQUIRE(r_hits == 1);
        REQUIRE(s_hits == 1);
      }
    }
  }
}
