#include "irforge/irgraph.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_map>
#include <unordered_set>

namespace irforge {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '$' || c == '.' || c == '_';
}

bool metadata_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Consumes a name after a sigil: either a quoted string or identifier chars.
std::string_view take_name(std::string_view s, std::size_t& i) {
  std::size_t start = i;
  if (i < s.size() && s[i] == '"') {
    ++i;
    while (i < s.size() && s[i] != '"') ++i;
    if (i < s.size()) ++i;
  } else {
    while (i < s.size() && ident_char(s[i])) ++i;
  }
  return s.substr(start, i - start);
}

// Skips a metadata value: !N, !"str", !{...}, !name.
void skip_metadata_value(std::string_view s, std::size_t& i) {
  if (i >= s.size() || s[i] != '!') return;
  ++i;
  if (i < s.size() && s[i] == '{') {
    int depth = 0;
    for (; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        ++i;
        return;
      }
    }
    return;
  }
  if (i < s.size() && s[i] == '"') {
    ++i;
    while (i < s.size() && s[i] != '"') ++i;
    if (i < s.size()) ++i;
    return;
  }
  while (i < s.size() && metadata_name_char(s[i])) ++i;
}

bool is_type_name(std::string_view name, const std::set<std::string>* type_names) {
  if (name.rfind("struct.", 0) == 0 || name.rfind("union.", 0) == 0 || name.rfind("class.", 0) == 0)
    return true;
  return type_names && type_names->count(std::string(name));
}

std::string strip_comment_and_space(std::string_view raw) {
  std::string out;
  bool in_quote = false;
  bool pending_space = false;
  for (char c : raw) {
    if (!in_quote && c == ';') break;
    if (c == '"') in_quote = !in_quote;
    if (!in_quote && std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string leading_opcode(std::string_view s) {
  s = trim(s);
  // "%x = ..." or "%x = tail call ..."
  if (!s.empty() && s[0] == '%') {
    auto eq = s.find(" = ");
    if (eq != std::string_view::npos) s.remove_prefix(eq + 3);
  }
  while (true) {
    auto sp = s.find(' ');
    std::string_view tok = s.substr(0, sp);
    if ((tok == "tail" || tok == "musttail" || tok == "notail") && sp != std::string_view::npos) {
      s.remove_prefix(sp + 1);
      continue;
    }
    return std::string(tok);
  }
}

NodeKind statement_kind(std::string_view opcode) {
  if (opcode == "br") return NodeKind::Branch;
  if (opcode == "switch" || opcode == "indirectbr") return NodeKind::Switch;
  if (opcode == "ret") return NodeKind::Return;
  if (opcode == "unreachable" || opcode == "resume") return NodeKind::Exit;
  if (opcode == "call" || opcode == "invoke" || opcode == "callbr") return NodeKind::Call;
  return NodeKind::Plain;
}

bool is_terminator(std::string_view opcode) {
  static const std::unordered_set<std::string_view> kTerm = {
      "br", "switch", "indirectbr", "ret", "unreachable", "invoke", "resume",
      "callbr", "catchswitch", "catchret", "cleanupret"};
  return kTerm.count(opcode) > 0;
}

std::vector<std::string> label_refs(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = raw.find("label %", pos)) != std::string_view::npos) {
    std::size_t i = pos + 7;
    auto name = take_name(raw, i);
    std::string id(name);
    if (!id.empty() && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    pos = i;
  }
  return out;
}

std::optional<std::string> label_definition(std::string_view line) {
  line = trim(line);
  if (line.empty() || line[0] == ';') return std::nullopt;
  std::size_t i = 0;
  auto name = take_name(line, i);
  if (name.empty() || i >= line.size() || line[i] != ':') return std::nullopt;
  auto rest = trim(line.substr(i + 1));
  if (!rest.empty() && rest[0] != ';') return std::nullopt;
  return std::string(name);
}

int bracket_balance(std::string_view s) {
  int bal = 0;
  bool in_quote = false;
  for (char c : s) {
    if (c == '"') in_quote = !in_quote;
    if (in_quote) continue;
    if (c == '[') ++bal;
    if (c == ']') --bal;
  }
  return bal;
}

}  // namespace

CanonStmt canonicalize(std::string_view raw_in, const std::set<std::string>* type_names) {
  CanonStmt stmt;
  stmt.raw = strip_comment_and_space(raw_in);
  const std::string_view s = stmt.raw;

  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    char c = s[i];
    if (c == '"') {
      auto j = s.find('"', i + 1);
      j = j == std::string_view::npos ? s.size() : j + 1;
      out.append(s.substr(i, j - i));
      i = j;
      continue;
    }
    if (c == '%' || c == '@') {
      std::size_t j = i + 1;
      auto name = take_name(s, j);
      if (name.empty()) {
        out.push_back(c);
        ++i;
        continue;
      }
      if (c == '%' && ends_with(out, "label ")) {
        out += "LBL";
      } else if (c == '%' && is_type_name(name, type_names)) {
        out.push_back('%');
        out.append(name);
      } else {
        out.push_back(c);
        out += "ID";
      }
      i = j;
      continue;
    }
    if (c == '!') {
      // ", !name !value" attachment
      std::size_t j = i + 1;
      while (j < s.size() && metadata_name_char(s[j])) ++j;
      std::size_t k = j;
      while (k < s.size() && s[k] == ' ') ++k;
      bool attachment = j > i + 1 && k < s.size() && s[k] == '!' && ends_with(trim(out), ",");
      if (attachment) {
        while (!out.empty() && (out.back() == ' ' || out.back() == ',')) out.pop_back();
        i = k;
        skip_metadata_value(s, i);
        continue;
      }
      out.push_back(c);
      ++i;
      continue;
    }
    if (c == '#' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      while (!out.empty() && out.back() == ' ') out.pop_back();
      i = j;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  stmt.text = std::string(trim(out));
  stmt.opcode = leading_opcode(stmt.text);
  stmt.kind = statement_kind(stmt.opcode);
  return stmt;
}

std::size_t IrModule::block_count() const {
  std::size_t n = 0;
  for (const auto& f : functions) n += f.blocks.size();
  return n;
}

std::size_t IrModule::statement_count() const {
  std::size_t n = 0;
  for (const auto& f : functions)
    for (const auto& b : f.blocks) n += b.statements.size();
  return n;
}

IrModule parse_ir(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }

  std::set<std::string> type_names;
  for (auto line : lines) {
    auto t = trim(line);
    if (t.size() > 1 && t[0] == '%') {
      std::size_t i = 1;
      auto name = take_name(t, i);
      if (t.substr(i).rfind(" = type ", 0) == 0) type_names.insert(std::string(name));
    }
  }

  IrModule module;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    auto t = trim(lines[ln]);
    if (t.rfind("define ", 0) != 0) continue;

    const std::size_t define_line = ln + 1;
    std::string header(t);
    while (header.find('{') == std::string::npos) {
      if (++ln >= lines.size()) throw ParseError("function header without body", define_line);
      header += ' ';
      header += trim(lines[ln]);
    }
    IrFunction fn;
    auto at = header.find('@');
    if (at == std::string::npos) throw ParseError("function definition without a name", define_line);
    std::size_t ni = at + 1;
    fn.name = std::string(take_name(header, ni));

    // Unnamed entry blocks take the next number after the unnamed arguments.
    int next_number = 0;
    auto params_end = header.find(')', ni);
    for (std::size_t p = header.find('%', ni); p != std::string::npos && p < params_end;
         p = header.find('%', p + 1)) {
      std::size_t q = p + 1;
      if (q < header.size() && std::isdigit(static_cast<unsigned char>(header[q]))) {
        int v = 0;
        while (q < header.size() && std::isdigit(static_cast<unsigned char>(header[q]))) v = v * 10 + (header[q++] - '0');
        next_number = std::max(next_number, v + 1);
      }
    }

    bool closed = false;
    std::vector<std::size_t> stmt_lines;  // per-block line of the terminator
    for (++ln; ln < lines.size(); ++ln) {
      auto body = trim(lines[ln]);
      if (body == "}") {
        closed = true;
        break;
      }
      if (body.empty() || body[0] == ';') continue;
      if (auto label = label_definition(body)) {
        fn.blocks.push_back({*label, {}, {}, ln + 1});
        continue;
      }
      std::string stmt(body);
      const std::size_t stmt_line = ln + 1;
      while (bracket_balance(stmt) > 0 && ln + 1 < lines.size()) {
        auto cont = trim(lines[++ln]);
        if (cont == "}") {
          --ln;
          break;
        }
        stmt += ' ';
        stmt += cont;
      }
      if (fn.blocks.empty()) fn.blocks.push_back({std::to_string(next_number), {}, {}, stmt_line});
      auto& blk = fn.blocks.back();
      blk.statements.push_back(canonicalize(stmt, &type_names));
      if (is_terminator(blk.statements.back().opcode)) blk.line = stmt_line;
    }
    if (!closed) throw ParseError("unterminated function @" + fn.name, define_line);

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
      if (!index.emplace(fn.blocks[b].id, b).second)
        throw ParseError("duplicate block label " + fn.blocks[b].id + " in @" + fn.name, fn.blocks[b].line);
    }
    for (auto& blk : fn.blocks) {
      if (blk.statements.empty() || !is_terminator(blk.statements.back().opcode)) continue;
      for (auto& target : label_refs(blk.statements.back().raw)) {
        if (!index.count(target))
          throw ParseError("unknown block %" + target + " referenced in @" + fn.name, blk.line);
        blk.successors.push_back(target);
      }
    }
    module.functions.push_back(std::move(fn));
  }
  return module;
}

std::string print_ir(const IrModule& m) {
  std::string out;
  for (const auto& fn : m.functions) {
    out += "define void @" + fn.name + "() {\n";
    for (const auto& b : fn.blocks) {
      out += b.id + ":\n";
      for (const auto& s : b.statements) out += "  " + s.raw + "\n";
    }
    out += "}\n\n";
  }
  return out;
}

NodeKind block_kind(const IrBlock& b) {
  if (b.statements.empty()) return NodeKind::Plain;
  const auto& term = b.statements.back();
  NodeKind kind = NodeKind::Plain;
  if (term.opcode == "br") {
    kind = b.successors.size() >= 2 ? NodeKind::Branch : NodeKind::Plain;
  } else if (term.opcode == "switch" || term.opcode == "indirectbr") {
    kind = NodeKind::Switch;
  } else if (term.opcode == "callbr") {
    kind = NodeKind::Branch;
  } else {
    kind = term.kind;
  }
  if (kind == NodeKind::Plain) {
    for (const auto& s : b.statements)
      if (s.opcode == "call" && s.raw.find("@llvm.") == std::string::npos) return NodeKind::Call;
  }
  return kind;
}

Cfg ir_cfg(const IrModule& m) {
  Cfg g(Origin::Ir);
  const int entry = g.add_node(NodeKind::Entry);
  for (const auto& fn : m.functions) {
    g.begin_function(fn.name);
    std::unordered_map<std::string, int> ids;
    for (const auto& b : fn.blocks) {
      int n = g.add_node(block_kind(b));
      g.note_node(n);
      ids[b.id] = n;
    }
    if (!fn.blocks.empty()) g.add_edge(entry, ids.at(fn.blocks.front().id));
    for (const auto& b : fn.blocks)
      for (const auto& s : b.successors) g.add_edge(ids.at(b.id), ids.at(s));
  }
  return g;
}

}  // namespace irforge
