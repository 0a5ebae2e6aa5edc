#include "bfly/cli.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bfly/faultsim.hpp"
#include "bfly/routing.hpp"
#include "bfly/topology.hpp"
#include "bfly/trust.hpp"

namespace bfly {

namespace {

using nlohmann::json;

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Writes to --out when given, otherwise to the command's stdout stream.
void emit(const std::string& text, const std::string& out_path,
          std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ProtocolError("cannot open output file '" + out_path + "'");
  file << text;
}

NodeId parse_or_default(const std::string& text, int m) {
  if (text.empty()) return {0, 0};  // canonical source
  return parse_node(text, m);
}

json route_json(const Route& route, int m) {
  json hops = json::array();
  for (NodeId u : route.nodes) hops.push_back(format_node(u, m));
  json stages = json::array();
  for (Stage s : route.stages) stages.push_back(stage_name(s));
  return json{{"s", route.param.s},
              {"h", route.param.h},
              {"length", route.length()},
              {"hops", hops},
              {"stages", stages}};
}

int cmd_build(int m, const std::string& format, const std::string& out_path,
              std::ostream& out) {
  const ButterflyGraph g({m});
  std::ostringstream text;
  if (format == "edges") {
    for (VertexIndex i = 0; i < g.node_count(); ++i) {
      const NodeId u = g.node_at(i);
      const auto nbrs = g.out_neighbors(u);
      text << format_node(u, m) << " " << format_node(nbrs.down, m) << "\n";
      text << format_node(u, m) << " " << format_node(nbrs.downright, m) << "\n";
    }
  } else if (format == "dot") {
    text << "digraph wbf" << m << " {\n";
    for (VertexIndex i = 0; i < g.node_count(); ++i) {
      text << "  \"" << format_node(g.node_at(i), m) << "\";\n";
    }
    for (VertexIndex i = 0; i < g.node_count(); ++i) {
      const NodeId u = g.node_at(i);
      const auto nbrs = g.out_neighbors(u);
      text << "  \"" << format_node(u, m) << "\" -> \""
           << format_node(nbrs.down, m) << "\";\n";
      text << "  \"" << format_node(u, m) << "\" -> \""
           << format_node(nbrs.downright, m) << "\" [style=dashed];\n";
    }
    text << "}\n";
  } else if (format == "json") {
    json nodes = json::array();
    json edges = json::array();
    for (VertexIndex i = 0; i < g.node_count(); ++i) {
      const NodeId u = g.node_at(i);
      nodes.push_back(format_node(u, m));
      const auto nbrs = g.out_neighbors(u);
      edges.push_back({format_node(u, m), format_node(nbrs.down, m)});
      edges.push_back({format_node(u, m), format_node(nbrs.downright, m)});
    }
    text << json{{"m", m}, {"nodes", nodes}, {"edges", edges}}.dump(2) << "\n";
  } else {
    throw std::invalid_argument("unknown format '" + format + "'");
  }
  emit(text.str(), out_path, out);
  return kExitOk;
}

int cmd_route(int m, const std::string& v_text, const std::string& w_text,
              const std::string& format, const std::string& out_path,
              std::ostream& out) {
  const ButterflyGraph g({m});
  const NodeId v = parse_or_default(v_text, m);
  const NodeId w = parse_node(w_text, m);
  const Route route = unipath_route(g, v, w);
  std::ostringstream text;
  if (format == "json") {
    text << route_json(route, m).dump(2) << "\n";
  } else {
    for (NodeId u : route.nodes) text << format_node(u, m) << "\n";
  }
  emit(text.str(), out_path, out);
  return kExitOk;
}

void routes_as_dot(const ButterflyGraph& g, const std::vector<Route>& routes,
                   std::ostringstream& text) {
  static const char* kColors[] = {"red",    "blue",   "green",  "orange",
                                  "purple", "brown",  "cyan",   "magenta",
                                  "gold",   "gray30", "pink",   "olive",
                                  "navy",   "teal",   "salmon", "indigo"};
  const int m = g.m();
  text << "digraph wbf" << m << "_routes {\n";
  for (VertexIndex i = 0; i < g.node_count(); ++i) {
    const NodeId u = g.node_at(i);
    const auto nbrs = g.out_neighbors(u);
    text << "  \"" << format_node(u, m) << "\" -> \""
         << format_node(nbrs.down, m) << "\" [color=gray80];\n";
    text << "  \"" << format_node(u, m) << "\" -> \""
         << format_node(nbrs.downright, m) << "\" [color=gray80,style=dashed];\n";
  }
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const char* color = kColors[r % 16];
    for (std::size_t k = 0; k + 1 < routes[r].nodes.size(); ++k) {
      text << "  \"" << format_node(routes[r].nodes[k], m) << "\" -> \""
           << format_node(routes[r].nodes[k + 1], m) << "\" [color=" << color
           << ",penwidth=2,label=\"s" << routes[r].param.s << "\"];\n";
    }
  }
  text << "}\n";
}

int cmd_multipath(int m, int h, const std::string& v_text,
                  const std::string& w_text, const std::string& format,
                  const std::string& out_path, std::ostream& out) {
  const ButterflyGraph g({m});
  const NodeId v = parse_or_default(v_text, m);
  const NodeId w = parse_node(w_text, m);
  const auto routes = multipath_routes(g, v, w, h);

  std::unordered_set<NodeId> trusted;
  for (VertexIndex i : trusted_neighborhood(g, g.index_of(v), TrustRadius{h})) {
    trusted.insert(g.node_at(i));
  }
  for (VertexIndex i : trusted_neighborhood(g, g.index_of(w), TrustRadius{h})) {
    trusted.insert(g.node_at(i));
  }
  const auto verdict = verify_independence(routes, trusted);

  std::ostringstream text;
  if (format == "dot") {
    routes_as_dot(g, routes, text);
  } else {
    json jroutes = json::array();
    for (const Route& route : routes) jroutes.push_back(route_json(route, m));
    json violations = json::array();
    for (const auto& violation : verdict.violations) {
      violations.push_back({{"s", violation.s},
                            {"s_prime", violation.s_prime},
                            {"node", format_node(violation.node, m)}});
    }
    text << json{{"m", m},
                 {"h", h},
                 {"v", format_node(v, m)},
                 {"w", format_node(w, m)},
                 {"routes", jroutes},
                 {"independent", verdict.pass},
                 {"violations", violations}}
                .dump(2)
         << "\n";
  }
  emit(text.str(), out_path, out);
  return verdict.pass ? kExitOk : kExitVerification;
}

template <GraphView G>
json redundancy_json(const G& g, VertexIndex v, VertexIndex w, int h,
                     const std::function<std::string(VertexIndex)>& name) {
  const auto result = effective_redundancy(g, v, w, TrustRadius{h});
  json cut = json::array();
  for (VertexIndex u : result.min_cut) cut.push_back(name(u));
  json paths = json::array();
  for (const auto& path : result.witness_paths) {
    json jp = json::array();
    for (VertexIndex u : path) jp.push_back(name(u));
    paths.push_back(jp);
  }
  json record{{"v", name(v)},
              {"w", name(w)},
              {"h", h},
              {"mutually_trusted", result.mutually_trusted},
              {"boundary_v", result.boundary_v_size},
              {"boundary_w", result.boundary_w_size},
              {"min_cut", cut},
              {"witness_paths", paths}};
  if (result.mutually_trusted) {
    record["delta"] = nullptr;
  } else {
    record["delta"] = result.delta;
  }
  return record;
}

int cmd_redundancy(int butterfly_m, const std::string& graph_path,
                   const std::string& v_text, const std::string& w_text, int h,
                   const std::string& out_path, std::ostream& out) {
  json record;
  if (butterfly_m > 0) {
    const ButterflyGraph g({butterfly_m});
    const NodeId v = parse_or_default(v_text, butterfly_m);
    const NodeId w = parse_node(w_text, butterfly_m);
    record = redundancy_json(g, g.index_of(v), g.index_of(w), h,
                             [&](VertexIndex i) {
                               return format_node(g.node_at(i), butterfly_m);
                             });
    if (!record["mutually_trusted"].get<bool>()) {
      const int lower = 1 << h;
      record["route_lower_bound"] = lower;
      record["lower_bound_ok"] = record["delta"].get<int>() >= lower;
      record["upper_bound_ok"] =
          record["delta"].get<std::size_t>() <=
          std::min(record["boundary_v"].get<std::size_t>(),
                   record["boundary_w"].get<std::size_t>());
    }
  } else {
    std::ifstream file(graph_path);
    if (!file) throw ProtocolError("cannot open graph file '" + graph_path + "'");
    const GenericGraph g = load_graph(file);
    const auto v = g.find(v_text);
    const auto w = g.find(w_text);
    if (!v || !w) throw std::invalid_argument("endpoint label not in graph");
    record = redundancy_json(g, *v, *w, h,
                             [&](VertexIndex i) { return g.label(i); });
  }
  std::ostringstream text;
  text << record.dump(2) << "\n";
  emit(text.str(), out_path, out);
  return kExitOk;
}

int cmd_sweep(int delta, long long trials, std::uint64_t seed, int workers,
              const std::string& out_path, std::ostream& out) {
  if (delta < 1) throw std::invalid_argument("delta must be at least 1");
  std::ostringstream csv;
  csv << "delta,k,c,exact,estimate,stderr,trials,seed\n";
  for (int k = 1; k <= delta; ++k) {
    for (int c = 0; c <= delta; ++c) {
      const ChannelModel model{delta, k, c};
      const std::uint64_t cell_seed =
          derive_stream(seed, std::uint64_t(k) * (delta + 1) + c).state;
      const FaultReport report = monte_carlo(model, trials, cell_seed, workers);
      csv << delta << "," << k << "," << c << "," << fmt_double(report.exact)
          << "," << fmt_double(report.estimate) << ","
          << fmt_double(report.stderr_est) << "," << trials << "," << seed
          << "\n";
    }
  }
  emit(csv.str(), out_path, out);
  return kExitOk;
}

json report_json(const FaultReport& report) {
  return json{{"trials", report.trials},
              {"tallies",
               {{"accepted_clean", report.accepted_clean},
                {"detected_error", report.detected_error},
                {"undetected_failure", report.undetected_failure}}},
              {"estimate", report.estimate},
              {"exact", report.exact},
              {"stderr", report.stderr_est},
              {"seed", report.seed}};
}

int cmd_simulate(int m, int h, const std::string& v_text,
                 const std::string& w_text, int k, int c, long long trials,
                 std::uint64_t seed, int workers, const std::string& out_path,
                 std::ostream& out) {
  const ButterflyGraph g({m});
  const NodeId v = parse_or_default(v_text, m);
  const NodeId w = parse_node(w_text, m);
  if (k < 1 || k > (1 << h)) {
    throw std::invalid_argument("k must satisfy 1 <= k <= 2^h");
  }
  const FaultReport report =
      network_simulate(g, v, w, h, k, c, trials, seed, workers);
  json record = report_json(report);
  record["m"] = m;
  record["h"] = h;
  record["v"] = format_node(v, m);
  record["w"] = format_node(w, m);
  record["k"] = k;
  record["c"] = c;
  record["delta"] = 1 << h;
  std::ostringstream text;
  text << record.dump(2) << "\n";
  emit(text.str(), out_path, out);
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "PASS " : "FAIL ") << name;
    if (!ok && !detail.empty()) out << "  (" << detail << ")";
    out << "\n";
    failures += ok ? 0 : 1;
  };

  // Route independence and validity over a parameter grid.
  SplitMix64 rng(seed);
  for (int m : {4, 5, 6}) {
    const ButterflyGraph g({m});
    for (int h = 1; h <= std::min(2, m / 2); ++h) {
      bool independent = true;
      bool valid = true;
      std::string detail;
      int sampled = 0;
      const auto dist = bfs_distances(g, 0);
      std::vector<NodeId> candidates;
      for (VertexIndex i = 0; i < g.node_count(); ++i) {
        if (dist[i] >= 2 * h) candidates.push_back(g.node_at(i));
      }
      while (sampled < 10 && !candidates.empty()) {
        const NodeId w = candidates[rng.below(candidates.size())];
        ++sampled;
        const auto routes = multipath_routes(g, {0, 0}, w, h);
        std::unordered_set<NodeId> trusted;
        for (VertexIndex i :
             trusted_neighborhood(g, g.index_of({0, 0}), TrustRadius{h})) {
          trusted.insert(g.node_at(i));
        }
        for (VertexIndex i :
             trusted_neighborhood(g, g.index_of(w), TrustRadius{h})) {
          trusted.insert(g.node_at(i));
        }
        const auto verdict = verify_independence(routes, trusted);
        if (!verdict.pass) {
          independent = false;
          detail = "w=" + format_node(w, m) +
                   " violations=" + std::to_string(verdict.violations.size());
        }
        if (static_cast<int>(routes.size()) != (1 << h)) valid = false;
        for (const Route& route : routes) {
          for (std::size_t i = 0; i + 1 < route.nodes.size(); ++i) {
            if (!is_directed_edge(g, route.nodes[i], route.nodes[i + 1])) {
              valid = false;
            }
          }
          if (route.nodes.back() != w) valid = false;
        }
      }
      const std::string label = "m=" + std::to_string(m) + ",h=" + std::to_string(h);
      check("independence " + label, independent, detail);
      check("route-validity " + label, valid);
    }
  }

  // Channel model against exhaustive enumeration for small delta.
  bool exact_ok = true;
  for (int delta = 1; delta <= 8 && exact_ok; ++delta) {
    for (int k = 1; k <= delta && exact_ok; ++k) {
      for (int c = 0; c <= delta && exact_ok; ++c) {
        long long total = 0, failures_count = 0;
        std::vector<int> ks, cs;
        // Enumerate subset pairs via bitmasks.
        for (int km = 0; km < (1 << delta); ++km) {
          if (std::popcount(unsigned(km)) != k) continue;
          for (int cm = 0; cm < (1 << delta); ++cm) {
            if (std::popcount(unsigned(cm)) != c) continue;
            ++total;
            if ((km & ~cm) == 0) ++failures_count;
          }
        }
        const double brute = double(failures_count) / double(total);
        const double fast = p_failure_exact({delta, k, c});
        if (std::abs(brute - fast) > 1e-12 * std::max(1.0, brute)) exact_ok = false;
      }
    }
  }
  check("failure-probability-enumeration", exact_ok);

  // Redundancy bounds on a small butterfly.
  {
    const ButterflyGraph g({5});
    const auto dist = bfs_distances(g, 0);
    bool bounds_ok = true;
    int tested = 0;
    for (VertexIndex i = 0; i < g.node_count() && tested < 20; ++i) {
      if (dist[i] < 2) continue;
      ++tested;
      const auto res = effective_redundancy(g, 0, i, TrustRadius{1});
      if (res.mutually_trusted) continue;
      if (res.delta < 2 || res.delta > 4) bounds_ok = false;
      if (static_cast<int>(res.min_cut.size()) != res.delta) bounds_ok = false;
    }
    check("redundancy-bounds m=5,h=1", bounds_ok);
  }

  if (failures > 0) {
    err << failures << " verification check(s) failed\n";
    return kExitVerification;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "bfly: trust-aware redundancy analysis and concurrent multipath routing\n"
      "on the wrap-around butterfly topology.\n\n"
      "Butterfly nodes are written (level,bits) with the place-within-level\n"
      "as an m-bit binary literal, lowest-order bit rightmost."};
  app.require_subcommand(1);
  // --h is the trust radius, so help lives on --help alone.
  app.set_help_flag("--help", "print help and exit");

  int m = 0, h = 1, k = 1, c = 0, delta = 4, workers = 1, butterfly_m = 0;
  long long trials = 10000;
  std::uint64_t seed = kDefaultSeed;
  std::string v_text, w_text, out_path, graph_path;
  std::string build_format = "edges", route_format = "text",
              multipath_format = "json";

  auto* build = app.add_subcommand("build", "Emit the wrap-around butterfly graph");
  build->set_help_flag("--help");
  build->add_option("--m", m, "butterfly dimension (>= 2)")->required();
  build->add_option("--format", build_format, "edges|dot|json");
  build->add_option("--out", out_path, "output file (default stdout)");

  auto* route = app.add_subcommand("route", "Single greedy route between two nodes");
  route->set_help_flag("--help");
  route->add_option("--m", m)->required();
  route->add_option("--v", v_text, "source node, default (0,0...0)");
  route->add_option("--w", w_text, "destination node")->required();
  route->add_option("--format", route_format, "text|json");
  route->add_option("--out", out_path);

  auto* multipath = app.add_subcommand(
      "multipath", "All 2^h independent routes plus the independence verdict");
  multipath->set_help_flag("--help");
  multipath->add_option("--m", m)->required();
  multipath->add_option("--h", h, "trust radius, 1 <= h <= m/2")->required();
  multipath->add_option("--v", v_text, "source node, default (0,0...0)");
  multipath->add_option("--w", w_text, "destination node")->required();
  multipath->add_option("--format", multipath_format, "json|dot");
  multipath->add_option("--out", out_path);

  auto* redundancy = app.add_subcommand(
      "redundancy", "Effective redundancy via vertex max-flow after collapsing "
                    "trusted neighborhoods");
  redundancy->set_help_flag("--help");
  redundancy->add_option("--butterfly", butterfly_m, "analyze WBF(m)");
  redundancy->add_option("--graph", graph_path, "edge-list file to analyze");
  redundancy->add_option("--v", v_text, "source (node literal or label)");
  redundancy->add_option("--w", w_text, "sink (node literal or label)")->required();
  redundancy->add_option("--h", h, "trust radius")->required();
  redundancy->add_option("--out", out_path);

  auto* sweep = app.add_subcommand(
      "sweep", "CSV grid of failure probabilities over all (k, c) pairs");
  sweep->set_help_flag("--help");
  sweep->add_option("--delta", delta, "channel count")->required();
  sweep->add_option("--trials", trials, "Monte Carlo trials per cell")
      ->default_val(10000);
  sweep->add_option("--seed", seed, "master seed (default 1729)");
  sweep->add_option("--workers", workers, "worker threads")->default_val(1);
  sweep->add_option("--out", out_path);

  auto* simulate = app.add_subcommand(
      "simulate", "Network-level attack simulation on the butterfly");
  simulate->set_help_flag("--help");
  simulate->add_option("--m", m)->required();
  simulate->add_option("--h", h)->required();
  simulate->add_option("--v", v_text, "source node, default (0,0...0)");
  simulate->add_option("--w", w_text, "destination node")->required();
  simulate->add_option("--k", k, "message copies sent")->required();
  simulate->add_option("--c", c, "nodes the adversary compromises")->required();
  simulate->add_option("--trials", trials)->default_val(10000);
  simulate->add_option("--seed", seed, "master seed (default 1729)");
  simulate->add_option("--workers", workers)->default_val(1);
  simulate->add_option("--out", out_path);

  auto* verify = app.add_subcommand(
      "verify", "Run the routing/flow/probability property suite");
  verify->set_help_flag("--help");
  verify->add_option("--seed", seed, "sampling seed (default 1729)");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_build(m, build_format, out_path, out);
    if (route->parsed()) {
      return cmd_route(m, v_text, w_text, route_format, out_path, out);
    }
    if (multipath->parsed()) {
      return cmd_multipath(m, h, v_text, w_text, multipath_format, out_path, out);
    }
    if (redundancy->parsed()) {
      if ((butterfly_m > 0) == !graph_path.empty()) {
        throw std::invalid_argument(
            "redundancy needs exactly one of --butterfly and --graph");
      }
      return cmd_redundancy(butterfly_m, graph_path, v_text, w_text, h,
                            out_path, out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(delta, trials, seed, workers, out_path, out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(m, h, v_text, w_text, k, c, trials, seed, workers,
                          out_path, out);
    }
    if (verify->parsed()) return cmd_verify(seed, out, err);
  } catch (const PreconditionError& e) {
    err << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const ProtocolError& e) {
    err << "input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "domain: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace bfly
