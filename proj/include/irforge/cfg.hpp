#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace irforge {

// Coarse node alphabet shared by source-side and IR-side graphs.
enum class NodeKind : std::uint8_t { Entry, Exit, Branch, Switch, Call, Return, Plain };
inline constexpr std::size_t kNodeKindCount = 7;

const char* to_string(NodeKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Origin { Source, Ir };

// Simple directed graph with dense node ids. Both builders add a synthetic
// module entry (node 0, kind Entry) with an edge to every function entry.
class Cfg {
 public:
  struct FunctionSpan {
    std::string name;
    int entry = -1;
    std::vector<int> nodes;
  };

  explicit Cfg(Origin origin = Origin::Ir) : origin_(origin) {}

  Origin origin() const { return origin_; }
  std::size_t node_count() const { return kinds_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<NodeKind>& kinds() const { return kinds_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<FunctionSpan>& functions() const { return functions_; }

  int add_node(NodeKind kind);
  /// Returns false (and adds nothing) when the edge already exists.
  bool add_edge(int from, int to);
  void set_kind(int node, NodeKind kind) { kinds_.at(static_cast<std::size_t>(node)) = kind; }
  NodeKind kind(int node) const { return kinds_.at(static_cast<std::size_t>(node)); }

  FunctionSpan& begin_function(std::string name);
  void note_node(int node);  // attributes node to the most recent function

  std::vector<std::vector<int>> adjacency(bool directed = true) const;

  /// Synthetic entry plus the nodes of the named function, renumbered.
  Cfg function_subgraph(std::string_view name) const;

 private:
  Origin origin_;
  std::vector<NodeKind> kinds_;
  std::vector<std::pair<int, int>> edges_;
  std::unordered_set<std::uint64_t> edge_set_;
  std::vector<FunctionSpan> functions_;
};

}  // namespace irforge
