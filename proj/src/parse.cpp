#include "qml/parse.hpp"

#include <cctype>
#include <set>
#include <utility>
#include <vector>

namespace qml {

Sort conventional_sort(std::string_view name) {
  if (name.empty()) return Sort::individual();
  if (std::isupper(static_cast<unsigned char>(name[0]))) return Sort::relation(1);
  if (name[0] == 'p' || name[0] == 'q' || name[0] == 'r' || name[0] == 's') {
    bool tail_ok = true;
    for (std::size_t i = 1; i < name.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(name[i])) && name[i] != '\'') tail_ok = false;
    if (tail_ok) return Sort::proposition();
  }
  return Sort::individual();
}

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> k{"forall", "exists", "the", "true", "false", "xor", "dia"};
  return k;
}

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line, col;
};

// Multi-byte spellings accepted as aliases of the ASCII operators.
const std::vector<std::pair<std::string, std::string>>& unicode_aliases() {
  static const std::vector<std::pair<std::string, std::string>> a{
      {"□", "[]"},  {"◇", "<>"}, {"¬", "~"},      {"→", "->"},
      {"↔", "<->"}, {"≡", "<->"}, {"∧", "&"},     {"∨", "|"},
      {"∀", "forall"}, {"∃", "exists"}, {"λ", "\\"}, {"\U0001D49C", "@"}};
  return a;
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
        ++col;
      }
      ++i;
    }
  };
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t l = line, cl = col;
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      if (j < s.size() && (s[j] == '!' || s[j] == '*') && !(s[j] == '!' && j + 1 < s.size() && s[j + 1] == '='))
        ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Number, std::string(s.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const auto& [u, ascii] : unicode_aliases()) {
      if (s.substr(i, u.size()) == u) {
        out.push_back({ascii == "forall" || ascii == "exists" ? Tok::Ident : Tok::Sym, ascii, l, cl});
        advance(u.size());
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const char* const kSyms[] = {"<->", "[]", "<>", "->", "!=", "~", "&", "|", "@", "(",
                                        ")",   "[",  "]",  "\\", ".",  ",", ":", "="};
    for (const char* sym : kSyms) {
      const std::string_view sv(sym);
      if (s.substr(i, sv.size()) == sv) {
        out.push_back({Tok::Sym, std::string(sv), l, cl});
        advance(sv.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError("unexpected character '" + std::string(1, c) + "'", l, cl);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

Sort sort_from_annotation(const Token& t) {
  if (t.kind == Tok::Ident && t.text == "i") return Sort::individual();
  if (t.kind == Tok::Ident && t.text == "o") return Sort::proposition();
  if (t.kind == Tok::Number) return Sort::relation(std::stoi(t.text));
  throw ParseError("expected a sort (i, o or an arity)", t.line, t.col);
}

class Parser {
 public:
  Parser(std::string_view text, const Signature& sig) : sig_(sig), toks_(lex(text)) {}

  Formula whole_formula() {
    Formula f = formula();
    expect_end();
    return f;
  }

  Term whole_term() {
    Term t = term();
    expect_end();
    return t;
  }

 private:
  struct Bound {
    std::string name;
    Sort sort;
  };

  const Signature& sig_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Bound> scope_;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool is_sym(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
  }
  bool is_word(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == s;
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + (peek().kind == Tok::End ? " at end of input" : " near '" + peek().text + "'"),
                     peek().line, peek().col);
  }
  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(std::string("expected '") + s + "'");
    next();
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected trailing input");
  }
  bool is_name(std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && !keywords().count(peek(ahead).text);
  }
  std::string take_name() {
    if (!is_name()) fail("expected a name");
    return next().text;
  }
  // `name:sort` with sort one of i, o, or an arity.
  bool annotation_follows() const {
    return is_sym(":") && (peek(1).kind == Tok::Number ||
                           (peek(1).kind == Tok::Ident && (peek(1).text == "i" || peek(1).text == "o")));
  }
  std::optional<Sort> annotation() {
    if (!annotation_follows()) return std::nullopt;
    next();
    return sort_from_annotation(next());
  }

  bool is_identity_op() const { return is_sym("=") || is_sym("!="); }

  // ---- formulas --------------------------------------------------------------

  Formula formula() {
    Formula left = implication();
    while (is_sym("<->") || is_word("xor")) {
      const bool is_xor = is_word("xor");
      next();
      Formula right = implication();
      left = is_xor ? exclusive_or(left, right) : iff(left, right);
    }
    return left;
  }

  Formula implication() {
    Formula left = disjunction();
    if (is_sym("->")) {
      next();
      return implies(left, implication());
    }
    return left;
  }

  Formula disjunction() {
    Formula left = conjunction();
    while (is_sym("|")) {
      next();
      left = disj(left, conjunction());
    }
    return left;
  }

  Formula conjunction() {
    Formula left = unary();
    while (is_sym("&")) {
      next();
      left = conj(left, unary());
    }
    return left;
  }

  Formula unary() {
    if (is_sym("~")) {
      next();
      return neg(unary());
    }
    if (is_sym("[]")) {
      next();
      return box(unary());
    }
    if (is_sym("<>") || is_word("dia")) {
      next();
      return dia(unary());
    }
    if (is_sym("@")) {
      next();
      return actually(unary());
    }
    if (is_word("forall") || is_word("exists")) return quantifier();
    return atom();
  }

  Formula quantifier() {
    const bool universal = next().text == "forall";
    std::vector<Bound> vars;
    while (is_name()) {
      std::string name = next().text;
      Sort s = annotation().value_or(conventional_sort(name));
      vars.push_back({name, s});
    }
    if (vars.empty()) fail("expected a bound variable");
    // `exists F (φ)` scopes over the parenthesized group only.
    const bool grouped = is_sym("(") && !description_ahead();
    if (!grouped) expect_sym(".");
    for (const auto& v : vars) scope_.push_back(v);
    Formula body = grouped ? atom() : formula();
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      scope_.pop_back();
      body = universal ? forall_raw(it->name, it->sort, body) : exists_raw(it->name, it->sort, body);
    }
    return body;
  }

  bool description_ahead() const { return is_sym("(") && is_word("the", 1); }
  bool lambda_ahead() const { return is_sym("[") && is_sym("\\", 1); }
  bool term_ahead() const { return is_name() || description_ahead() || lambda_ahead(); }

  const Bound* find_bound(const std::string& name, int* index) const {
    for (std::size_t i = scope_.size(); i-- > 0;) {
      if (scope_[i].name == name) {
        *index = static_cast<int>(scope_.size() - 1 - i);
        return &scope_[i];
      }
    }
    return nullptr;
  }

  Formula atom() {
    if (is_word("true")) {
      next();
      return verum();
    }
    if (is_word("false")) {
      next();
      return falsum();
    }
    if (is_sym("(") && !description_ahead()) {
      next();
      Formula f = formula();
      expect_sym(")");
      return f;
    }
    if (is_name() && is_sym("(", 1) && is_formula_macro(peek().text) && peek().text != "=") {
      int unused;
      if (!find_bound(peek().text, &unused)) return macro_call();
    }
    if (is_name()) {
      int unused;
      const ConstDecl* c = sig_.find(peek().text);
      if (c && c->kind == ConstKind::SecondOrder && !find_bound(peek().text, &unused)) {
        const std::string q = next().text;
        Term arg;
        if (is_sym("(")) {
          next();
          arg = term();
          expect_sym(")");
        } else {
          arg = term();
        }
        return second_order(q, arg);
      }
    }
    if (!term_ahead()) fail("expected a formula");
    const Token at = peek();
    Term t = term();
    if (is_identity_op()) return identity(t);
    if (t.sort().is_individual()) {
      if (!is_sym("[")) fail("expected '[' (encoding) or '=' after individual term");
      next();
      Term rel = term();
      expect_sym("]");
      if (sig_.mode == Mode::Classical)
        throw ModeError("encoding atom '" + print_term(t) + "[" + print_term(rel) +
                        "]' is not allowed in a classical signature");
      return encode(t, rel);
    }
    const int n = t.sort().arity();
    std::vector<Term> args;
    if (n > 0 && is_sym("(") && !description_ahead()) {
      next();
      args.push_back(term());
      while (is_sym(",")) {
        next();
        args.push_back(term());
      }
      expect_sym(")");
    } else {
      for (int i = 0; i < n; ++i) {
        if (!term_ahead())
          throw SortError("relation '" + (t->name.empty() ? at.text : t->name) + "' expects " +
                          std::to_string(n) + " argument(s)");
        args.push_back(term());
      }
    }
    return exemplify(t, std::move(args));
  }

  Formula identity(const Term& left) {
    const bool negated = next().text == "!=";
    Term right = term();
    Formula eq = sig_.mode == Mode::Aot ? macro("=", {left, right}) : equals(left, right);
    return negated ? neg(eq) : eq;
  }

  Formula macro_call() {
    const std::string name = next().text;
    expect_sym("(");
    std::vector<Term> args;
    if (!is_sym(")")) {
      args.push_back(term());
      while (is_sym(",")) {
        next();
        args.push_back(term());
      }
    }
    expect_sym(")");
    return macro(name, std::move(args));
  }

  // ---- terms ---------------------------------------------------------------------

  Term term() {
    if (description_ahead()) {
      next();
      next();
      const std::string name = take_name();
      expect_sym(":");
      scope_.push_back({name, Sort::individual()});
      Formula body = formula();
      scope_.pop_back();
      expect_sym(")");
      return description_raw(name, body);
    }
    if (lambda_ahead()) return lambda_term();
    if (!is_name()) fail("expected a term");
    const std::string name = next().text;
    const std::optional<Sort> ann = annotation();
    int index = 0;
    if (const Bound* b = find_bound(name, &index)) {
      if (ann && *ann != b->sort)
        throw SortError("bound variable '" + name + "' has sort " + to_string(b->sort));
      return bound_var(index, b->sort, name);
    }
    if (is_relation_macro(name)) return macro_relation(name);
    if (const ConstDecl* c = sig_.find(name)) {
      if (c->kind == ConstKind::SecondOrder)
        throw SortError("second-order constant '" + name + "' used as a term");
      if (ann && *ann != c->sort())
        throw SortError("constant '" + name + "' has sort " + to_string(c->sort()));
      return constant(name, c->sort());
    }
    return free_var(name, ann.value_or(conventional_sort(name)));
  }

  Term lambda_term() {
    next();  // [
    next();  // '\'
    std::vector<Bound> vars;
    if (is_sym(".")) {
      next();
    } else {
      // One variable without a dot, or several followed by '.'.
      std::size_t k = 0;
      bool dotted = false;
      while (peek(k).kind == Tok::Ident && !keywords().count(peek(k).text)) {
        ++k;
        if (peek(k).kind == Tok::Sym && peek(k).text == ":") k += 2;
        if (peek(k).kind == Tok::Sym && peek(k).text == ".") {
          dotted = true;
          break;
        }
      }
      do {
        std::string name = take_name();
        Sort s = annotation().value_or(Sort::individual());
        if (!s.is_individual()) throw SortError("lambda variable '" + name + "' must be an individual");
        vars.push_back({name, s});
      } while (dotted && !is_sym("."));
      if (dotted) next();
    }
    for (const auto& v : vars) scope_.push_back(v);
    Formula body = formula();
    for (std::size_t i = 0; i < vars.size(); ++i) scope_.pop_back();
    expect_sym("]");
    std::vector<std::string> names;
    std::vector<Sort> sorts;
    for (const auto& v : vars) {
      names.push_back(v.name);
      sorts.push_back(v.sort);
    }
    return lambda_raw(names, sorts, body);
  }
};

// ---- printing ------------------------------------------------------------------------

enum Prec { kIff = 0, kImp = 1, kOr = 2, kAnd = 3, kUnary = 4 };

class Printer {
 public:
  explicit Printer(std::set<std::string> taken) : taken_(std::move(taken)) {}

  std::string formula(const Formula& f, int min_prec, bool tail) {
    switch (f.kind()) {
      case FormulaKind::Falsum: return "false";
      case FormulaKind::Verum: return "true";
      case FormulaKind::Exemplify: return exemplification(f);
      case FormulaKind::Encode: return term(f->terms[0]) + "[" + term(f->terms[1]) + "]";
      case FormulaKind::SecondOrder: return f->name + "(" + term(f->terms[0]) + ")";
      case FormulaKind::Eq: return term(f->terms[0]) + " = " + term(f->terms[1]);
      case FormulaKind::Not: {
        const Formula& s = f->subs[0];
        if (s.kind() == FormulaKind::Eq || (s.kind() == FormulaKind::Macro && s->name == "="))
          return term(s->terms[0]) + " != " + term(s->terms[1]);
        return "~" + formula(s, kUnary, tail);
      }
      case FormulaKind::Box: return "[]" + formula(f->subs[0], kUnary, tail);
      case FormulaKind::Dia: return "dia " + formula(f->subs[0], kUnary, tail);
      case FormulaKind::Actually: return "@" + formula(f->subs[0], kUnary, tail);
      case FormulaKind::ForAll:
      case FormulaKind::Exists: {
        std::string s = quantified(f);
        return tail ? s : "(" + s + ")";
      }
      case FormulaKind::Implies: return binary(f, " -> ", kImp, kOr, kImp, min_prec, tail);
      case FormulaKind::And: return binary(f, " & ", kAnd, kAnd, kUnary, min_prec, tail);
      case FormulaKind::Or: return binary(f, " | ", kOr, kOr, kAnd, min_prec, tail);
      case FormulaKind::Iff: return binary(f, " <-> ", kIff, kIff, kImp, min_prec, tail);
      case FormulaKind::Xor: return binary(f, " xor ", kIff, kIff, kImp, min_prec, tail);
      case FormulaKind::Macro: {
        if (f->name == "=") return term(f->terms[0]) + " = " + term(f->terms[1]);
        std::string s = f->name + "(";
        for (std::size_t i = 0; i < f->terms.size(); ++i) s += (i ? ", " : "") + term(f->terms[i]);
        return s + ")";
      }
    }
    return "?";
  }

  std::string term(const Term& t) {
    switch (t.kind()) {
      case TermKind::Bound: {
        if (t->index < 0 || static_cast<std::size_t>(t->index) >= scope_.size())
          return "#" + std::to_string(t->index);
        return scope_[scope_.size() - 1 - static_cast<std::size_t>(t->index)];
      }
      case TermKind::Free:
        return conventional_sort(t->name) == t.sort() ? t->name : t->name + ":" + to_string(t.sort());
      case TermKind::Const:
      case TermKind::Macro:
        return t->name;
      case TermKind::Description: {
        const std::string x = fresh(t->binders[0], Sort::individual(), false);
        scope_.push_back(x);
        std::string s = "(the " + x + ": " + formula(t->body, kIff, true) + ")";
        scope_.pop_back();
        return s;
      }
      case TermKind::Lambda: {
        std::string head;
        const std::size_t n = t->binders.size();
        for (std::size_t i = 0; i < n; ++i) {
          const std::string x = fresh(t->binders[i], t->binder_sorts[i], false);
          scope_.push_back(x);
          head += (i ? " " : "") + x;
        }
        std::string s = n == 0 ? "[\\. " : n == 1 ? "[\\" + head + " " : "[\\" + head + ". ";
        s += formula(t->body, kIff, true) + "]";
        for (std::size_t i = 0; i < n; ++i) scope_.pop_back();
        return s;
      }
    }
    return "?";
  }

 private:
  std::set<std::string> taken_;
  std::vector<std::string> scope_;

  std::string fresh(const std::string& hint, Sort sort, bool annotate) {
    std::string name = hint;
    if (name.empty()) name = sort.is_individual() ? "x" : sort.is_proposition() ? "p" : "F";
    auto clash = [&](const std::string& n) {
      if (taken_.count(n) || keywords().count(n) || is_relation_macro(n) || is_formula_macro(n))
        return true;
      for (const auto& s : scope_)
        if (s == n) return true;
      return false;
    };
    while (clash(name)) name += "'";
    if (annotate && conventional_sort(name) != sort) return name + ":" + to_string(sort);
    return name;
  }

  std::string binary(const Formula& f, const char* op, int own, int left_prec, int right_prec,
                     int min_prec, bool tail) {
    const bool wrap = own < min_prec;
    const bool t = wrap ? true : tail;
    std::string s = formula(f->subs[0], left_prec, false) + op + formula(f->subs[1], right_prec, t);
    return wrap ? "(" + s + ")" : s;
  }

  std::string quantified(const Formula& f) {
    const FormulaKind k = f.kind();
    std::string s = k == FormulaKind::ForAll ? "forall" : "exists";
    Formula cur = f;
    std::size_t pushed = 0;
    while (cur.kind() == k) {
      std::string shown = fresh(cur->name, cur->binder_sort, true);
      scope_.push_back(shown.substr(0, shown.find(':')));
      ++pushed;
      s += " " + shown;
      cur = cur->subs[0];
    }
    s += ". " + formula(cur, kIff, true);
    for (std::size_t i = 0; i < pushed; ++i) scope_.pop_back();
    return s;
  }

  std::string exemplification(const Formula& f) {
    std::string s = term(f->terms[0]);
    for (std::size_t i = 1; i < f->terms.size(); ++i) {
      const char last = s.empty() ? ' ' : s.back();
      if (!(i == 1 && (last == '!' || last == '*' || last == ']'))) s += ' ';
      s += term(f->terms[i]);
    }
    return s;
  }
};

void collect_names(const Formula& f, std::set<std::string>& out);

void collect_names(const Term& t, std::set<std::string>& out) {
  if (t.kind() == TermKind::Free || t.kind() == TermKind::Const) out.insert(t->name);
  if (t->body) collect_names(t->body, out);
}

void collect_names(const Formula& f, std::set<std::string>& out) {
  if (f.kind() == FormulaKind::SecondOrder) out.insert(f->name);
  for (const auto& s : f->subs) collect_names(s, out);
  for (const auto& t : f->terms) collect_names(t, out);
}

}  // namespace

Formula parse_formula(std::string_view text, const Signature& sig) {
  return Parser(text, sig).whole_formula();
}

Term parse_term(std::string_view text, const Signature& sig) { return Parser(text, sig).whole_term(); }

std::string print_formula(const Formula& f) {
  std::set<std::string> names;
  collect_names(f, names);
  return Printer(std::move(names)).formula(f, kIff, true);
}

std::string print_term(const Term& t) {
  std::set<std::string> names;
  collect_names(t, names);
  return Printer(std::move(names)).term(t);
}

}  // namespace qml
