#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "envelope/lts.hpp"

namespace envelope {

/// Syntax or semantic error in a model file. Line and column are 1-based and
/// point at the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t line, std::size_t column, std::string token)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message +
                           (token.empty() ? "" : " (at '" + token + "')")),
        message_(std::move(message)),
        line_(line),
        column_(column),
        token_(std::move(token)) {}

  [[nodiscard]] const std::string& message() const { return message_; }
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::size_t column() const { return column_; }
  [[nodiscard]] const std::string& token() const { return token_; }

 private:
  std::string message_;
  std::size_t line_;
  std::size_t column_;
  std::string token_;
};

struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;
};

/// A parsed bundle: one environment plus named controllers, properties and
/// constraints, each kept in declaration order.
struct ModelFile {
  std::optional<Lts> environment;
  std::vector<Lts> controllers;
  std::vector<Lts> properties;
  std::vector<Lts> constraints;
  std::map<std::string, SourceSpan> spans;  // declaration name -> position

  [[nodiscard]] const Lts* find(const std::vector<Lts>& in, std::string_view name) const {
    for (const auto& l : in)
      if (l.name() == name) return &l;
    return nullptr;
  }
  [[nodiscard]] const Lts* controller(std::string_view name) const { return find(controllers, name); }
  [[nodiscard]] const Lts* property(std::string_view name) const { return find(properties, name); }
  [[nodiscard]] const Lts* constraint(std::string_view name) const { return find(constraints, name); }
};

namespace detail {

enum class Tok { ident, lbrace, rbrace, semi, comma, dash, arrow, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.' || c == '\'';
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const std::size_t l = line;
    const std::size_t cl = col;
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Tok::ident, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    switch (c) {
      case '{': out.push_back({Tok::lbrace, "{", l, cl}); break;
      case '}': out.push_back({Tok::rbrace, "}", l, cl}); break;
      case ';': out.push_back({Tok::semi, ";", l, cl}); break;
      case ',': out.push_back({Tok::comma, ",", l, cl}); break;
      case '-':
        if (i + 1 < src.size() && src[i + 1] == '>') {
          out.push_back({Tok::arrow, "->", l, cl});
          advance(2);
          continue;
        }
        out.push_back({Tok::dash, "-", l, cl});
        break;
      default:
        throw ParseError("unexpected character", l, cl, std::string(1, c));
    }
    advance(1);
  }
  out.push_back({Tok::end, "", line, col});
  return out;
}

inline bool is_keyword(std::string_view s) {
  return s == "environment" || s == "controller" || s == "property" || s == "constraint" ||
         s == "init" || s == "alphabet" || s == "complete";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  ModelFile parse() {
    ModelFile model;
    std::optional<Token> env_token;
    std::vector<std::pair<Token, const Lts*>> controller_tokens;
    if (peek().kind == Tok::end) fail("expected a declaration");
    while (peek().kind != Tok::end) {
      Token kind_tok = expect(Tok::ident, "expected declaration kind");
      auto kind = parse_kind(kind_tok.text);
      if (!kind) throw ParseError("unknown declaration kind", kind_tok.line, kind_tok.column, kind_tok.text);
      Token name = identifier("expected declaration name");
      if (model.spans.count(name.text) != 0)
        throw ParseError("duplicate declaration name", name.line, name.column, name.text);
      model.spans[name.text] = {name.line, name.column};
      bool complete = false;
      if (peek().kind == Tok::ident && peek().text == "complete") {
        const Token& mod = next();
        if (!has_reserved_error(*kind))
          throw ParseError("'complete' applies to properties and constraints only", mod.line,
                           mod.column, mod.text);
        complete = true;
      }
      Lts lts = body(name.text, *kind);
      // A safety LTS that never mentions err would be vacuous, so it is read
      // as listing exactly the allowed moves.
      if (has_reserved_error(*kind) && !lts.error()) complete = true;
      if (complete) lts = complete_property(lts);
      switch (*kind) {
        case LtsKind::environment:
          if (model.environment)
            throw ParseError("multiple environment declarations", kind_tok.line, kind_tok.column,
                             name.text);
          model.environment = std::move(lts);
          env_token = name;
          break;
        case LtsKind::controller: model.controllers.push_back(std::move(lts)); break;
        case LtsKind::property: model.properties.push_back(std::move(lts)); break;
        case LtsKind::constraint: model.constraints.push_back(std::move(lts)); break;
        case LtsKind::derived: break;
      }
    }
    if (!model.environment) throw ParseError("missing environment declaration", 1, 1, "");
    const Alphabet& act = model.environment->alphabet();
    for (const auto& c : model.controllers) {
      if (!c.alphabet().same_set(act)) {
        auto s = model.spans[c.name()];
        throw ParseError("controller alphabet differs from the environment alphabet", s.line, s.column,
                         c.name());
      }
    }
    for (const auto* group : {&model.properties, &model.constraints}) {
      for (const auto& p : *group) {
        if (!p.alphabet().subset_of(act)) {
          auto s = model.spans[p.name()];
          throw ParseError("uses actions outside the environment alphabet", s.line, s.column, p.name());
        }
      }
    }
    return model;
  }

 private:
  Lts body(const std::string& name, LtsKind kind) {
    expect(Tok::lbrace, "expected '{'");
    Token init_kw = expect(Tok::ident, "expected 'init'");
    if (init_kw.text != "init") throw ParseError("expected 'init'", init_kw.line, init_kw.column, init_kw.text);
    LtsBuilder builder(name, kind);
    Token init = identifier("expected initial state");
    builder.initial(init.text);
    expect(Tok::semi, "expected ';'");
    while (peek().kind != Tok::rbrace) {
      if (peek().kind == Tok::ident && peek().text == "alphabet") {
        next();
        do {
          builder.action(identifier("expected action name").text);
        } while (accept(Tok::comma));
        expect(Tok::semi, "expected ';'");
        continue;
      }
      Token from = identifier("expected transition or 'alphabet'");
      expect(Tok::dash, "expected '-'");
      std::vector<std::string> actions;
      do {
        actions.push_back(identifier("expected action name").text);
      } while (accept(Tok::comma));
      expect(Tok::arrow, "expected '->'");
      Token to = identifier("expected target state");
      expect(Tok::semi, "expected ';'");
      if (has_reserved_error(kind) && from.text == kErrorState)
        throw ParseError("err is a sink and cannot have outgoing transitions", from.line, from.column,
                         from.text);
      for (const auto& a : actions) builder.transition(from.text, a, to.text);
    }
    expect(Tok::rbrace, "expected '}'");
    return builder.build();
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg, t.line, t.column, t.text);
  }

  Token expect(Tok k, const std::string& msg) {
    if (peek().kind != k) fail(msg);
    return next();
  }

  Token identifier(const std::string& msg) {
    if (peek().kind != Tok::ident || is_keyword(peek().text)) fail(msg);
    return next();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ModelFile parse_model(std::string_view text) { return detail::Parser(text).parse(); }

inline void write_declaration(std::ostream& os, const Lts& l) {
  os << to_string(l.kind()) << ' ' << l.name() << " {\n";
  os << "  init " << l.state_name(l.initial()) << ";\n";
  if (l.alphabet().size() > 0) {
    os << "  alphabet ";
    for (std::size_t i = 0; i < l.alphabet().size(); ++i)
      os << (i ? ", " : "") << l.alphabet().name(static_cast<ActionId>(i));
    os << ";\n";
  }
  // States are interned on first mention, so emit them in the order a reader
  // meets them: breadth first from init, then whatever is left. Re-parsing
  // then reproduces the same numbering and the text is a fixpoint.
  std::vector<bool> seen(l.num_states(), false);
  std::vector<StateId> order{l.initial()};
  seen[l.initial()] = true;
  std::size_t next_unseen = 0;
  for (std::size_t i = 0; i < l.num_states(); ++i) {
    if (i == order.size()) {
      while (seen[next_unseen]) ++next_unseen;
      seen[next_unseen] = true;
      order.push_back(static_cast<StateId>(next_unseen));
    }
    auto out = l.out(order[i]);
    std::vector<Transition> ts(out.begin(), out.end());
    std::stable_sort(ts.begin(), ts.end(), [&](const Transition& a, const Transition& b) {
      if (a.action != b.action) return a.action < b.action;
      return l.state_name(a.to) < l.state_name(b.to);
    });
    for (const auto& t : ts) {
      os << "  " << l.state_name(t.from) << " -" << l.alphabet().name(t.action) << "-> "
         << l.state_name(t.to) << ";\n";
      if (!seen[t.to]) {
        seen[t.to] = true;
        order.push_back(t.to);
      }
    }
  }
  os << "}\n";
}

/// Canonical text form: environment first, then controllers, properties and
/// constraints in declaration order.
inline std::string serialize(const ModelFile& model) {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const Lts& l) {
    if (!first) os << '\n';
    first = false;
    write_declaration(os, l);
  };
  if (model.environment) emit(*model.environment);
  for (const auto& l : model.controllers) emit(l);
  for (const auto& l : model.properties) emit(l);
  for (const auto& l : model.constraints) emit(l);
  return os.str();
}

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

class DotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graphviz rendering: normative edges dashed blue, deviated edges solid
/// green, the initial state marked by an inbound arrow from a point node.
inline std::string dot_export(const Lts& e, const std::vector<Transition>& normative,
                              const std::vector<Transition>& deviated) {
  auto in = [](const std::vector<Transition>& v, const Transition& t) {
    return std::find(v.begin(), v.end(), t) != v.end();
  };
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(e.name()) << " {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=circle];\n";
  os << "  __init [shape=point, label=\"\"];\n";
  for (StateId s = 0; s < e.num_states(); ++s) os << "  " << detail::dot_quote(e.state_name(s)) << ";\n";
  os << "  __init -> " << detail::dot_quote(e.state_name(e.initial())) << ";\n";
  for (const auto& t : e.transitions()) {
    const char* style = nullptr;
    if (in(deviated, t)) style = "style=solid, color=green";
    else if (in(normative, t)) style = "style=dashed, color=blue";
    else throw DotError("transition " + e.state_name(t.from) + " -" + e.alphabet().name(t.action) +
                        "-> " + e.state_name(t.to) + " is neither normative nor deviated");
    os << "  " << detail::dot_quote(e.state_name(t.from)) << " -> "
       << detail::dot_quote(e.state_name(t.to)) << " [label=" << detail::dot_quote(e.alphabet().name(t.action))
       << ", " << style << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace envelope
