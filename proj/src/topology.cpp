#include "bfly/topology.hpp"

#include <algorithm>
#include <charconv>
#include <queue>
#include <sstream>

namespace bfly {

ButterflyGraph::ButterflyGraph(ButterflyParams params) : m_(params.m) {
  if (m_ < 2) {
    throw std::invalid_argument("butterfly dimension m must be at least 2, got " +
                                std::to_string(m_));
  }
  if (m_ > 26) {
    throw std::invalid_argument(
        "butterfly dimension m too large for dense vertex indexing (max 26)");
  }
  mask_ = (std::uint64_t(1) << m_) - 1;
}

std::vector<NodeId> ButterflyGraph::undirected_neighbors(NodeId u) const {
  const auto out = out_neighbors(u);
  const auto in = in_neighbors(u);
  std::vector<NodeId> result;
  result.reserve(4);
  for (NodeId v : {out.down, out.downright, in.down, in.downright}) {
    if (std::find(result.begin(), result.end(), v) == result.end()) {
      result.push_back(v);
    }
  }
  return result;
}

namespace {

std::uint64_t rotate_place(std::uint64_t z, int k, int m) {
  // Left-rotate within m bits: bit i of z moves to bit (i + k) mod m.
  k %= m;
  if (k == 0) return z;
  const std::uint64_t mask = (std::uint64_t(1) << m) - 1;
  return ((z << k) | (z >> (m - k))) & mask;
}

}  // namespace

NodeId Automorphism::apply(NodeId u) const {
  const int level = (u.level + level_shift) % m;
  return {level, rotate_place(u.place ^ place_xor, level_shift, m)};
}

NodeId Automorphism::invert(NodeId u) const {
  const int level = (u.level - level_shift % m + m) % m;
  return {level, rotate_place(u.place, m - level_shift % m, m) ^ place_xor};
}

CanonicalFrame canonicalize(const ButterflyGraph& g, NodeId v, NodeId w) {
  if (!g.contains(v) || !g.contains(w)) {
    throw std::invalid_argument("node outside butterfly");
  }
  Automorphism map{g.m(), (g.m() - v.level) % g.m(), v.place};
  return {map.apply(w), map};
}

std::string format_node(NodeId u, int m) {
  std::string bits(m, '0');
  for (int i = 0; i < m; ++i) {
    if ((u.place >> i) & 1) bits[m - 1 - i] = '1';
  }
  return "(" + std::to_string(u.level) + "," + bits + ")";
}

NodeId parse_node(std::string_view text, int m) {
  auto fail = [&](const std::string& why) -> NodeId {
    throw ProtocolError("bad node literal '" + std::string(text) + "': " + why);
  };
  std::string_view s = text;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    s = s.substr(1, s.size() - 2);
  }
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) return fail("expected '(level,bits)'");
  const std::string_view level_part = s.substr(0, comma);
  const std::string_view bits = s.substr(comma + 1);
  int level = -1;
  const auto [ptr, ec] =
      std::from_chars(level_part.data(), level_part.data() + level_part.size(), level);
  if (ec != std::errc() || ptr != level_part.data() + level_part.size()) {
    return fail("unparsable level");
  }
  if (level < 0 || level >= m) return fail("level out of [0, m)");
  if (static_cast<int>(bits.size()) != m) {
    return fail("place must be exactly " + std::to_string(m) + " bits");
  }
  std::uint64_t place = 0;
  for (int i = 0; i < m; ++i) {
    const char c = bits[m - 1 - i];  // index 0 is the rightmost character
    if (c == '1') {
      place |= std::uint64_t(1) << i;
    } else if (c != '0') {
      return fail("place must be a binary literal");
    }
  }
  return {level, place};
}

VertexIndex GenericGraph::add_node(const std::string& label) {
  const auto [it, inserted] =
      index_.emplace(label, static_cast<VertexIndex>(labels_.size()));
  if (inserted) {
    labels_.push_back(label);
    adjacency_.emplace_back();
  }
  return it->second;
}

void GenericGraph::add_edge(VertexIndex a, VertexIndex b) {
  if (a == b) {
    throw ProtocolError("self-loop on node '" + labels_[a] + "'");
  }
  auto& na = adjacency_[a];
  if (std::find(na.begin(), na.end(), b) != na.end()) return;
  na.push_back(b);
  adjacency_[b].push_back(a);
  ++edge_count_;
}

std::optional<VertexIndex> GenericGraph::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> GenericGraph::components() const {
  std::vector<int> comp(node_count(), -1);
  int next_id = 0;
  for (VertexIndex s = 0; s < node_count(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next_id;
    std::queue<VertexIndex> queue;
    queue.push(s);
    while (!queue.empty()) {
      const VertexIndex u = queue.front();
      queue.pop();
      for (VertexIndex v : adjacency_[u]) {
        if (comp[v] < 0) {
          comp[v] = next_id;
          queue.push(v);
        }
      }
    }
    ++next_id;
  }
  return comp;
}

GenericGraph load_graph(std::istream& source) {
  GenericGraph g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;        // blank line
    if (a.front() == '#') continue;      // comment
    if (!(fields >> b) || (fields >> extra)) {
      throw ProtocolError("line " + std::to_string(line_no) +
                          ": expected exactly two node labels");
    }
    const VertexIndex ia = g.add_node(a);
    const VertexIndex ib = g.add_node(b);
    try {
      g.add_edge(ia, ib);
    } catch (const ProtocolError& e) {
      throw ProtocolError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return g;
}

GenericGraph load_graph(const std::string& text) {
  std::istringstream stream(text);
  return load_graph(stream);
}

}  // namespace bfly
