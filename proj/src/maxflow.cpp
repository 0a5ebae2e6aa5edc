#include "bfly/maxflow.hpp"

#include <algorithm>
#include <stdexcept>

namespace bfly {

FlowNetwork::FlowNetwork(int node_count) : out_(node_count) {}

int FlowNetwork::add_node() {
  out_.emplace_back();
  return static_cast<int>(out_.size()) - 1;
}

int FlowNetwork::add_arc(int from, int to, int capacity) {
  const int id = static_cast<int>(arcs_.size());
  arcs_.push_back({to, capacity, 0});
  arcs_.push_back({from, 0, 0});
  out_[from].push_back(id);
  out_[to].push_back(id + 1);
  return id;
}

bool FlowNetwork::build_levels(int source, int sink) {
  level_.assign(out_.size(), -1);
  std::vector<int> frontier{source}, next;
  level_[source] = 0;
  while (!frontier.empty() && level_[sink] < 0) {
    next.clear();
    for (int u : frontier) {
      for (int id : out_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap - a.flow > 0 && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          next.push_back(a.to);
        }
      }
    }
    frontier.swap(next);
  }
  return level_[sink] >= 0;
}

int FlowNetwork::push(int u, int sink, int limit) {
  if (u == sink) return limit;
  for (std::size_t& i = cursor_[u]; i < out_[u].size(); ++i) {
    const int id = out_[u][i];
    Arc& a = arcs_[id];
    if (a.cap - a.flow > 0 && level_[a.to] == level_[u] + 1) {
      const int pushed = push(a.to, sink, std::min(limit, a.cap - a.flow));
      if (pushed > 0) {
        a.flow += pushed;
        arcs_[id ^ 1].flow -= pushed;
        return pushed;
      }
    }
  }
  return 0;
}

int FlowNetwork::max_flow(int source, int sink) {
  if (source == sink) throw std::invalid_argument("flow source equals sink");
  int total = 0;
  while (build_levels(source, sink)) {
    cursor_.assign(out_.size(), 0);
    while (int pushed = push(source, sink, kUnbounded)) total += pushed;
  }
  return total;
}

std::vector<std::uint8_t> FlowNetwork::residual_source_side(int source) const {
  std::vector<std::uint8_t> seen(out_.size(), 0);
  std::vector<int> stack{source};
  seen[source] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int id : out_[u]) {
      const Arc& a = arcs_[id];
      if (a.cap - a.flow > 0 && !seen[a.to]) {
        seen[a.to] = 1;
        stack.push_back(a.to);
      }
    }
  }
  return seen;
}

std::vector<std::vector<int>> FlowNetwork::unit_paths(int source,
                                                      int sink) const {
  std::vector<int> remaining(arcs_.size());
  for (std::size_t i = 0; i < arcs_.size(); ++i) remaining[i] = arcs_[i].flow;
  std::vector<std::vector<int>> paths;
  for (;;) {
    std::vector<int> path;
    int u = source;
    while (u != sink) {
      int chosen = -1;
      for (int id : out_[u]) {
        if (remaining[id] > 0) {
          chosen = id;
          break;
        }
      }
      if (chosen < 0) break;
      --remaining[chosen];
      path.push_back(chosen);
      u = arcs_[chosen].to;
    }
    if (u != sink || path.empty()) break;
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace bfly
