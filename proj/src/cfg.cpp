#include "irforge/cfg.hpp"

#include <stdexcept>
#include <unordered_map>

namespace irforge {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Entry: return "entry";
    case NodeKind::Exit: return "exit";
    case NodeKind::Branch: return "branch";
    case NodeKind::Switch: return "switch";
    case NodeKind::Call: return "call";
    case NodeKind::Return: return "return";
    case NodeKind::Plain: return "plain";
  }
  return "plain";
}

int Cfg::add_node(NodeKind kind) {
  kinds_.push_back(kind);
  return static_cast<int>(kinds_.size() - 1);
}

bool Cfg::add_edge(int from, int to) {
  const auto n = static_cast<int>(kinds_.size());
  if (from < 0 || to < 0 || from >= n || to >= n) throw std::out_of_range("Cfg::add_edge: bad node id");
  const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) | static_cast<std::uint32_t>(to);
  if (!edge_set_.insert(key).second) return false;
  edges_.emplace_back(from, to);
  return true;
}

Cfg::FunctionSpan& Cfg::begin_function(std::string name) {
  functions_.push_back({std::move(name), -1, {}});
  return functions_.back();
}

void Cfg::note_node(int node) {
  if (functions_.empty()) return;
  auto& f = functions_.back();
  if (f.entry < 0) f.entry = node;
  f.nodes.push_back(node);
}

std::vector<std::vector<int>> Cfg::adjacency(bool directed) const {
  std::vector<std::vector<int>> adj(kinds_.size());
  for (auto [a, b] : edges_) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    if (!directed && a != b) adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

Cfg Cfg::function_subgraph(std::string_view name) const {
  Cfg out(origin_);
  int entry = out.add_node(NodeKind::Entry);
  for (const auto& f : functions_) {
    if (f.name != name) continue;
    std::unordered_map<int, int> remap;
    auto& span = out.begin_function(f.name);
    (void)span;
    for (int n : f.nodes) {
      int m = out.add_node(kind(n));
      remap[n] = m;
      out.note_node(m);
    }
    if (f.entry >= 0) out.add_edge(entry, remap.at(f.entry));
    for (auto [a, b] : edges_) {
      auto ia = remap.find(a), ib = remap.find(b);
      if (ia != remap.end() && ib != remap.end()) out.add_edge(ia->second, ib->second);
    }
    break;
  }
  return out;
}

}  // namespace irforge
