#pragma once

#include <cstdint>
#include <vector>

namespace bfly {

/// Integral max-flow via BFS level phases and blocking-flow DFS (Dinic).
/// Built for the vertex-capacity reduction: split arcs carry capacity 1,
/// everything else effectively unbounded, so flow values stay tiny.
class FlowNetwork {
 public:
  static constexpr int kUnbounded = 1 << 29;

  explicit FlowNetwork(int node_count);

  int add_node();
  /// Returns the arc id; the paired reverse arc has capacity 0.
  int add_arc(int from, int to, int capacity);

  int max_flow(int source, int sink);

  /// Vertices reachable from `source` in the residual graph of the last
  /// max_flow run. The saturated arcs crossing this frontier form a
  /// minimum cut.
  std::vector<std::uint8_t> residual_source_side(int source) const;

  /// Decomposes the current integral flow into arc-id paths from source to
  /// sink. Only meaningful when every source-leaving unit belongs to one
  /// unit-capacity chain, as in the node-split construction.
  std::vector<std::vector<int>> unit_paths(int source, int sink) const;

  int arc_flow(int arc) const { return arcs_[arc].flow; }
  int arc_to(int arc) const { return arcs_[arc].to; }
  int arc_from(int arc) const { return arcs_[arc ^ 1].to; }

 private:
  struct Arc {
    int to;
    int cap;
    int flow;
  };

  bool build_levels(int source, int sink);
  int push(int u, int sink, int limit);

  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> out_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
};

}  // namespace bfly
