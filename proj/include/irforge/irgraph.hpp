#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "irforge/cfg.hpp"

namespace irforge {

struct CanonStmt {
  std::string text;    // canonical form
  std::string opcode;  // leading operation token
  NodeKind kind = NodeKind::Plain;
  std::string raw;     // comment-stripped, whitespace-normalized original

  friend bool operator==(const CanonStmt&, const CanonStmt&) = default;
};

/// Local names -> %ID, globals -> @ID, label operands -> LBL; metadata
/// attachments, attribute-group references and comments dropped; opcodes,
/// types and literals kept. Identified struct/union/class type names and any
/// name in `type_names` (given without the sigil) are preserved.
CanonStmt canonicalize(std::string_view raw, const std::set<std::string>* type_names = nullptr);

struct IrBlock {
  std::string id;
  std::vector<CanonStmt> statements;
  std::vector<std::string> successors;  // distinct, in first-reference order
  std::size_t line = 0;

  friend bool operator==(const IrBlock& a, const IrBlock& b) {
    return a.id == b.id && a.statements == b.statements && a.successors == b.successors;
  }
};

struct IrFunction {
  std::string name;
  std::vector<IrBlock> blocks;  // blocks[0] is the entry

  friend bool operator==(const IrFunction&, const IrFunction&) = default;
};

struct IrModule {
  std::vector<IrFunction> functions;

  std::size_t block_count() const;
  std::size_t statement_count() const;
  friend bool operator==(const IrModule&, const IrModule&) = default;
};

/// Parses function definitions out of textual IR. Throws ParseError for an
/// unterminated function or a branch to an undefined block.
IrModule parse_ir(std::string_view text);

/// Re-emits a module as parseable text (raw statements, explicit labels).
std::string print_ir(const IrModule& m);

/// Block-level CFG: one node per block, kind from the terminator (an
/// unconditional fall-through block that makes a non-intrinsic call is a
/// Call node), plus the synthetic module entry.
Cfg ir_cfg(const IrModule& m);

NodeKind block_kind(const IrBlock& b);

}  // namespace irforge
