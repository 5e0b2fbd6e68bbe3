#include "irforge/srcgraph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

namespace irforge {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> k = {
      "if", "else", "while", "for", "do", "switch", "case", "default", "break", "continue",
      "return", "goto", "sizeof", "_Alignof", "alignof", "typeof", "__typeof__", "_Generic",
      "__attribute__", "__asm__", "asm", "struct", "union", "enum", "defined", "_Static_assert",
      "static_assert", "__builtin_offsetof", "__extension__"};
  return k;
}

bool is_keyword(std::string_view s) { return keywords().count(s) > 0; }

class Builder {
 public:
  Builder(const std::vector<SrcToken>& toks, Cfg& g) : t_(toks), g_(g) {}

  void function(std::size_t open_brace, std::string name) {
    g_.begin_function(std::move(name));
    preds_ = {0};
    open_ = -1;
    labels_.clear();
    gotos_.clear();
    pos_ = open_brace;
    compound();
    // falling off the end returns
    if (!preds_.empty()) {
      if (open_ >= 0) {
        g_.set_kind(open_, NodeKind::Return);
      } else {
        node(NodeKind::Return);
      }
    }
    for (auto& [from, label] : gotos_) {
      auto it = labels_.find(label);
      if (it != labels_.end()) g_.add_edge(from, it->second);
    }
  }

 private:
  const SrcToken& tok(std::size_t i) const {
    static const SrcToken eof{"", 0, false};
    return i < t_.size() ? t_[i] : eof;
  }
  const std::string& cur() const { return tok(pos_).text; }
  bool at(std::string_view s) const { return cur() == s; }
  bool at_end() const { return pos_ >= t_.size(); }
  void expect(std::string_view s) {
    if (!at(s)) throw ParseError("expected '" + std::string(s) + "' near '" + cur() + "'", tok(pos_).line);
    ++pos_;
  }

  int node(NodeKind k) {
    if (dead_ > 0) {
      preds_.clear();
      open_ = -1;
      return -1;
    }
    int n = g_.add_node(k);
    g_.note_node(n);
    for (int p : preds_) g_.add_edge(p, n);
    preds_ = {n};
    open_ = -1;
    return n;
  }

  void simple(bool has_call) {
    if (dead_ > 0) return;
    if (open_ >= 0) {
      if (has_call && g_.kind(open_) == NodeKind::Plain) g_.set_kind(open_, NodeKind::Call);
      return;
    }
    open_ = node(has_call ? NodeKind::Call : NodeKind::Plain);
  }

  // Header node for if/switch: the condition is evaluated in the open block.
  int header(NodeKind k) {
    if (dead_ > 0) return -1;
    if (open_ >= 0) {
      int h = open_;
      g_.set_kind(h, k);
      open_ = -1;
      return h;
    }
    return node(k);
  }

  void add_preds(std::vector<int>& into, const std::vector<int>& from) {
    for (int p : from)
      if (std::find(into.begin(), into.end(), p) == into.end()) into.push_back(p);
  }

  // Index just past the token matching the opener at i.
  std::size_t match(std::size_t i) const {
    const std::string open = tok(i).text;
    const std::string close = open == "(" ? ")" : open == "[" ? "]" : "}";
    int depth = 0;
    for (std::size_t j = i; j < t_.size(); ++j) {
      if (t_[j].text == open) ++depth;
      if (t_[j].text == close && --depth == 0) return j + 1;
    }
    throw ParseError("unbalanced '" + open + "'", tok(i).line);
  }

  bool range_has_call(std::size_t a, std::size_t b) const {
    for (std::size_t i = a; i + 1 < b; ++i)
      if (t_[i].ident && !is_keyword(t_[i].text) && t_[i + 1].text == "(") return true;
    return false;
  }

  // Literal-constant condition spanning [a, b): 1 = true, 0 = false, -1 = unknown.
  static int constant_condition(const std::vector<SrcToken>& t, std::size_t a, std::size_t b) {
    if (b != a + 1) return -1;
    const auto& s = t[a].text;
    if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0]))) return -1;
    bool zero = std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == 'x' || c == 'X' || c == 'u' || c == 'U' || c == 'l' || c == 'L'; });
    return zero ? 0 : 1;
  }

  bool is_label_start() const {
    if (at("case") || at("default")) return true;
    return tok(pos_).ident && !is_keyword(cur()) && tok(pos_ + 1).text == ":" && tok(pos_ + 2).text != ":";
  }

  void compound() {
    expect("{");
    while (!at("}")) {
      if (at_end()) throw ParseError("unbalanced '{'", t_.back().line);
      statement();
    }
    ++pos_;
  }

  void statement() {
    // Code with no predecessors is dropped unless it can be jumped into.
    bool unreachable = preds_.empty() && !at("{") && !is_label_start();
    if (unreachable) ++dead_;
    statement_body();
    if (unreachable) --dead_;
  }

  void statement_body() {
    const std::string& s = cur();
    if (s == "{") return compound();
    if (s == ";") {
      ++pos_;
      return;
    }
    if (s == "if") return if_stmt();
    if (s == "while") return while_stmt();
    if (s == "for") return for_stmt();
    if (s == "do") return do_stmt();
    if (s == "switch") return switch_stmt();
    if (s == "case" || s == "default") return case_label();
    if (s == "break" || s == "continue") {
      auto& stack = s == "break" ? breaks_ : continues_;
      ++pos_;
      if (!stack.empty()) add_preds(stack.back(), preds_);
      preds_.clear();
      open_ = -1;
      expect(";");
      return;
    }
    if (s == "return") {
      ++pos_;
      skip_expression();
      expect(";");
      if (dead_ == 0) {
        if (open_ >= 0) {
          g_.set_kind(open_, NodeKind::Return);
        } else {
          node(NodeKind::Return);
        }
      }
      preds_.clear();
      open_ = -1;
      return;
    }
    if (s == "goto") {
      ++pos_;
      std::string label = cur();
      ++pos_;
      expect(";");
      if (dead_ == 0) {
        if (open_ < 0 && !preds_.empty()) simple(false);
        for (int p : preds_) gotos_.emplace_back(p, label);
      }
      preds_.clear();
      open_ = -1;
      return;
    }
    if (is_label_start()) {
      std::string label = cur();
      pos_ += 2;
      int n = node(NodeKind::Plain);
      if (n >= 0) labels_[label] = n;
      open_ = n;
      if (!at("}")) statement();
      return;
    }
    expression_statement();
  }

  // Advances to the ';' (or closing token) ending an expression at depth 0.
  void skip_expression() {
    while (!at_end() && !at(";") && !at("}")) {
      if (at("(") || at("[") || at("{")) {
        pos_ = match(pos_);
      } else {
        ++pos_;
      }
    }
  }

  void expression_statement() {
    std::size_t a = pos_;
    while (!at_end() && !at(";") && !at("}")) {
      if (at("{")) {
        // `NAME(args) { ... }`: a macro-driven block; keep its body.
        if (pos_ > a && tok(pos_ - 1).text == ")") {
          simple(range_has_call(a, pos_));
          compound();
          return;
        }
        pos_ = match(pos_);
      } else if (at("(") || at("[")) {
        pos_ = match(pos_);
      } else {
        ++pos_;
      }
    }
    simple(range_has_call(a, pos_));
    if (at(";")) ++pos_;
  }

  std::pair<std::size_t, std::size_t> paren_range() {
    if (!at("(")) throw ParseError("expected '(' near '" + cur() + "'", tok(pos_).line);
    std::size_t a = pos_ + 1;
    pos_ = match(pos_);
    return {a, pos_ - 1};
  }

  void if_stmt() {
    ++pos_;
    auto [a, b] = paren_range();
    int c = constant_condition(t_, a, b);
    if (c >= 0) {
      // folded: only the live arm is built
      if (range_has_call(a, b)) simple(true);
      if (c == 0) ++dead_;
      statement();
      if (c == 0) --dead_;
      if (at("else")) {
        ++pos_;
        if (c == 1) ++dead_;
        statement();
        if (c == 1) --dead_;
      }
      return;
    }
    int h = header(NodeKind::Branch);
    std::vector<int> head = h >= 0 ? std::vector<int>{h} : std::vector<int>{};
    preds_ = head;
    statement();
    std::vector<int> exits = preds_;
    if (at("else")) {
      ++pos_;
      preds_ = head;
      open_ = -1;
      statement();
      add_preds(exits, preds_);
    } else {
      add_preds(exits, head);
    }
    preds_ = exits;
    open_ = -1;
  }

  void loop_body() {
    breaks_.emplace_back();
    continues_.emplace_back();
    statement();
  }

  void while_stmt() {
    ++pos_;
    auto [a, b] = paren_range();
    int c = constant_condition(t_, a, b);
    if (c == 0) {
      ++dead_;
      statement();
      --dead_;
      return;
    }
    bool call = range_has_call(a, b);
    int h = node(c == 1 ? (call ? NodeKind::Call : NodeKind::Plain) : NodeKind::Branch);
    loop_body();
    std::vector<int> back = preds_;
    add_preds(back, continues_.back());
    if (h >= 0)
      for (int p : back) g_.add_edge(p, h);
    preds_ = c == 1 || h < 0 ? std::vector<int>{} : std::vector<int>{h};
    add_preds(preds_, breaks_.back());
    breaks_.pop_back();
    continues_.pop_back();
    open_ = -1;
  }

  void for_stmt() {
    ++pos_;
    auto [a, b] = paren_range();
    std::size_t s1 = a;
    while (s1 < b && t_[s1].text != ";") s1 = t_[s1].text == "(" ? match(s1) : s1 + 1;
    std::size_t s2 = s1 + 1;
    while (s2 < b && t_[s2].text != ";") s2 = t_[s2].text == "(" ? match(s2) : s2 + 1;
    if (s1 >= b || s2 >= b) throw ParseError("malformed for header", tok(a).line);
    if (s1 > a) simple(range_has_call(a, s1));
    bool has_cond = s2 > s1 + 1;
    int c = has_cond ? constant_condition(t_, s1 + 1, s2) : 1;
    int h = node(c == 1 ? NodeKind::Plain : NodeKind::Branch);
    loop_body();
    std::vector<int> back = preds_;
    add_preds(back, continues_.back());
    preds_ = back;
    open_ = -1;
    if (b > s2 + 1 && !preds_.empty()) {
      node(range_has_call(s2 + 1, b) ? NodeKind::Call : NodeKind::Plain);
    }
    if (h >= 0)
      for (int p : preds_) g_.add_edge(p, h);
    preds_ = c == 1 || h < 0 ? std::vector<int>{} : std::vector<int>{h};
    add_preds(preds_, breaks_.back());
    breaks_.pop_back();
    continues_.pop_back();
    open_ = -1;
  }

  void do_stmt() {
    ++pos_;
    int body = node(NodeKind::Plain);
    open_ = body;
    loop_body();
    if (!at("while")) throw ParseError("expected 'while' after do body", tok(pos_).line);
    ++pos_;
    auto [a, b] = paren_range();
    expect(";");
    add_preds(preds_, continues_.back());
    open_ = -1;
    int c = constant_condition(t_, a, b);
    std::vector<int> after;
    if (!preds_.empty()) {
      int cond = node(c >= 0 ? NodeKind::Plain : NodeKind::Branch);
      if (cond >= 0) {
        if (c != 0 && body >= 0) g_.add_edge(cond, body);
        if (c != 1) after.push_back(cond);
      }
    }
    add_preds(after, breaks_.back());
    preds_ = after;
    breaks_.pop_back();
    continues_.pop_back();
    open_ = -1;
  }

  void switch_stmt() {
    ++pos_;
    paren_range();
    int h = header(NodeKind::Switch);
    switches_.push_back({h, false});
    breaks_.emplace_back();
    preds_.clear();
    open_ = -1;
    statement();
    std::vector<int> exits = preds_;
    add_preds(exits, breaks_.back());
    if (!switches_.back().has_default && h >= 0) add_preds(exits, {h});
    preds_ = exits;
    open_ = -1;
    breaks_.pop_back();
    switches_.pop_back();
  }

  void case_label() {
    bool is_default = at("default");
    ++pos_;
    // case expressions may contain ?: but never a bare ':' at depth 0 otherwise
    int ternary = 0;
    while (!at_end()) {
      if (at("?")) ++ternary;
      if (at(":")) {
        if (ternary == 0) break;
        --ternary;
      }
      if (at("(")) {
        pos_ = match(pos_);
        continue;
      }
      ++pos_;
    }
    expect(":");
    if (!switches_.empty()) {
      auto& sw = switches_.back();
      if (is_default) sw.has_default = true;
      if (sw.header >= 0) add_preds(preds_, {sw.header});
    }
    open_ = -1;
    open_ = node(NodeKind::Plain);
    if (!at("}")) statement();
  }

  struct SwitchCtx {
    int header;
    bool has_default;
  };

  const std::vector<SrcToken>& t_;
  Cfg& g_;
  std::size_t pos_ = 0;
  std::vector<int> preds_;
  int open_ = -1;
  int dead_ = 0;
  std::vector<std::vector<int>> breaks_, continues_;
  std::vector<SwitchCtx> switches_;
  std::map<std::string, int> labels_;
  std::vector<std::pair<int, std::string>> gotos_;
};

}  // namespace

std::vector<SrcToken> tokenize_c(std::string_view src) {
  std::vector<SrcToken> out;
  std::size_t line = 1;
  bool line_start = true;
  for (std::size_t i = 0; i < src.size();) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      line_start = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (line_start && c == '#') {
      // preprocessor directive, honoring continuations and comments
      while (i < src.size() && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < src.size() && src[i + 1] == '\n') {
          ++line;
          i += 2;
          continue;
        }
        if (src.compare(i, 2, "/*") == 0) {
          auto e = src.find("*/", i + 2);
          e = e == std::string_view::npos ? src.size() : e + 2;
          line += static_cast<std::size_t>(std::count(src.begin() + static_cast<long>(i), src.begin() + static_cast<long>(e), '\n'));
          i = e;
          continue;
        }
        ++i;
      }
      continue;
    }
    line_start = false;
    if (src.compare(i, 2, "//") == 0) {
      while (i < src.size() && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < src.size() && src[i + 1] == '\n') ++line, ++i;
        ++i;
      }
      continue;
    }
    if (src.compare(i, 2, "/*") == 0) {
      auto e = src.find("*/", i + 2);
      e = e == std::string_view::npos ? src.size() : e + 2;
      line += static_cast<std::size_t>(std::count(src.begin() + static_cast<long>(i), src.begin() + static_cast<long>(e), '\n'));
      i = e;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t start_line = line;
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != c && src[j] != '\n') {
        if (src[j] == '\\' && j + 1 < src.size()) ++j;
        if (src[j] == '\n') ++line;
        ++j;
      }
      out.push_back({c == '"' ? "\"\"" : "'c'", start_line, false});
      i = j < src.size() ? j + 1 : j;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) ++j;
      // prefixed literals such as L"..", u8"..", U'..'
      if (j < src.size() && (src[j] == '"' || src[j] == '\'')) {
        auto pre = src.substr(i, j - i);
        if (pre == "L" || pre == "u" || pre == "U" || pre == "u8") {
          i = j;
          continue;
        }
      }
      out.push_back({std::string(src.substr(i, j - i)), line, true});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (is_ident_char(src[j]) || src[j] == '.' ||
                                ((src[j] == '+' || src[j] == '-') && (src[j - 1] == 'e' || src[j - 1] == 'E' || src[j - 1] == 'p' || src[j - 1] == 'P'))))
        ++j;
      out.push_back({std::string(src.substr(i, j - i)), line, false});
      i = j;
      continue;
    }
    // '::' stays one token so labels are not confused with scope operators
    if (c == ':' && i + 1 < src.size() && src[i + 1] == ':') {
      out.push_back({"::", line, false});
      i += 2;
      continue;
    }
    out.push_back({std::string(1, c), line, false});
    ++i;
  }
  return out;
}

Cfg source_cfg(std::string_view source) {
  auto toks = tokenize_c(source);
  Cfg g(Origin::Source);
  g.add_node(NodeKind::Entry);

  // brace balance is checked up front so errors name the offending line
  {
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& s = toks[i].text;
      if (s == "{" || s == "(" || s == "[") stack.push_back(i);
      if (s == "}" || s == ")" || s == "]") {
        if (stack.empty()) throw ParseError("unbalanced '" + s + "'", toks[i].line);
        const auto& o = toks[stack.back()].text;
        if ((s == "}" && o != "{") || (s == ")" && o != "(") || (s == "]" && o != "["))
          throw ParseError("mismatched '" + s + "'", toks[i].line);
        stack.pop_back();
      }
    }
    if (!stack.empty()) throw ParseError("unbalanced '" + toks[stack.back()].text + "'", toks[stack.back()].line);
  }

  Builder b(toks, g);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].text != "{") continue;
    // find the matching close to skip non-function braces in one step
    std::size_t depth = 0, close = i;
    for (std::size_t j = i; j < toks.size(); ++j) {
      if (toks[j].text == "{") ++depth;
      if (toks[j].text == "}" && --depth == 0) {
        close = j;
        break;
      }
    }
    std::string name;
    if (i > 0 && toks[i - 1].text == ")") {
      int pd = 0;
      std::size_t k = i - 1;
      for (;; --k) {
        if (toks[k].text == ")") ++pd;
        if (toks[k].text == "(" && --pd == 0) break;
        if (k == 0) break;
      }
      if (k > 0 && toks[k - 1].ident && !is_keyword(toks[k - 1].text)) name = toks[k - 1].text;
    }
    if (!name.empty()) b.function(i, name);
    i = close;
  }
  return g;
}

}  // namespace irforge
