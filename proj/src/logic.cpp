#include "pd/logic.hpp"

#include <cctype>

#include "pd/error.hpp"

namespace pd {

std::string sequent_str(const Sequent& s) {
  std::string r;
  for (std::size_t i = 0; i < s.size(); ++i) r += (i ? ", " : "") + s[i].str();
  return r;
}

namespace {

void skip_ws(std::string_view t, std::size_t& i) {
  while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
}

}  // namespace

Sequent parse_sequent(std::string_view text) {
  std::size_t i = 0;
  skip_ws(text, i);
  if (text.substr(i, 2) == "|-") i += 2;
  Sequent s;
  skip_ws(text, i);
  if (i == text.size()) return s;
  while (true) {
    s.push_back(parse_formula_at(text, i));
    skip_ws(text, i);
    if (i == text.size()) break;
    if (text[i] != ',') fail(Errc::Parse, "expected ',' in sequent at offset " + std::to_string(i));
    ++i;
  }
  return s;
}

const char* rule_name(RuleKind k) {
  switch (k) {
    case RuleKind::Ax: return "ax";
    case RuleKind::One: return "one";
    case RuleKind::Bot: return "bot";
    case RuleKind::Par: return "par";
    case RuleKind::Tensor: return "tensor";
    case RuleKind::Cut: return "cut";
    case RuleKind::Exchange: return "ex";
    case RuleKind::Hyp: return "hyp";
  }
  return "?";
}

Derivation Derivation::ax(const Formula& a) {
  Derivation d;
  d.rule = RuleKind::Ax;
  d.a = a;
  d.conclusion = {a, negate(a)};
  return d;
}

Derivation Derivation::one() {
  Derivation d;
  d.rule = RuleKind::One;
  d.conclusion = {Formula::one()};
  return d;
}

Derivation Derivation::bot(std::size_t pos, Derivation p) {
  if (pos > p.conclusion.size()) fail(Errc::InvalidRule, "bot position out of range");
  Derivation d;
  d.rule = RuleKind::Bot;
  d.pos = pos;
  d.conclusion = p.conclusion;
  d.conclusion.insert(d.conclusion.begin() + pos, Formula::bot());
  d.premises.push_back(std::move(p));
  return d;
}

Derivation Derivation::par(std::size_t pos, Derivation p) {
  if (pos + 1 >= p.conclusion.size()) fail(Errc::InvalidRule, "par needs two formulas at the position");
  Derivation d;
  d.rule = RuleKind::Par;
  d.pos = pos;
  d.conclusion = p.conclusion;
  Formula f = Formula::par(d.conclusion[pos], d.conclusion[pos + 1]);
  d.conclusion.erase(d.conclusion.begin() + pos, d.conclusion.begin() + pos + 2);
  d.conclusion.insert(d.conclusion.begin() + pos, f);
  d.premises.push_back(std::move(p));
  return d;
}

Derivation Derivation::tensor(Derivation l, Derivation r) {
  if (l.conclusion.empty() || r.conclusion.empty()) fail(Errc::InvalidRule, "tensor premise with empty conclusion");
  Derivation d;
  d.rule = RuleKind::Tensor;
  d.pos = l.conclusion.size() - 1;
  d.conclusion.assign(l.conclusion.begin(), l.conclusion.end() - 1);
  d.conclusion.push_back(Formula::tensor(l.conclusion.back(), r.conclusion.front()));
  d.conclusion.insert(d.conclusion.end(), r.conclusion.begin() + 1, r.conclusion.end());
  d.premises.push_back(std::move(l));
  d.premises.push_back(std::move(r));
  return d;
}

Derivation Derivation::cut(Derivation l, Derivation r) {
  if (l.conclusion.empty() || r.conclusion.empty()) fail(Errc::InvalidRule, "cut premise with empty conclusion");
  if (r.conclusion.front() != negate(l.conclusion.back()))
    fail(Errc::InvalidRule, "cut formulas " + l.conclusion.back().str() + " and " + r.conclusion.front().str() +
                                " are not dual");
  Derivation d;
  d.rule = RuleKind::Cut;
  d.a = l.conclusion.back();
  d.pos = l.conclusion.size() - 1;
  d.conclusion.assign(l.conclusion.begin(), l.conclusion.end() - 1);
  d.conclusion.insert(d.conclusion.end(), r.conclusion.begin() + 1, r.conclusion.end());
  d.premises.push_back(std::move(l));
  d.premises.push_back(std::move(r));
  return d;
}

Derivation Derivation::exchange(const Permutation& sigma, Derivation p) {
  if (sigma.size() != p.conclusion.size())
    fail(Errc::InvalidRule, "exchange " + sigma.str() + " on a sequent of length " + std::to_string(p.conclusion.size()));
  Derivation d;
  d.rule = RuleKind::Exchange;
  d.perm = sigma;
  for (std::size_t i = 1; i <= sigma.size(); ++i) d.conclusion.push_back(p.conclusion[sigma(i) - 1]);
  d.premises.push_back(std::move(p));
  return d;
}

Derivation Derivation::hyp(Sequent s) {
  Derivation d;
  d.rule = RuleKind::Hyp;
  d.conclusion = std::move(s);
  return d;
}

Derivation exchange_fused(const Permutation& sigma, Derivation d) {
  if (d.rule == RuleKind::Exchange) {
    Permutation c = compose(d.perm, sigma);
    Derivation inner = std::move(d.premises[0]);
    if (c.is_identity()) return inner;
    return Derivation::exchange(c, std::move(inner));
  }
  if (sigma.is_identity()) return d;
  return Derivation::exchange(sigma, std::move(d));
}

std::string path_str(const Path& p) {
  std::string s = "root";
  for (std::size_t i : p) s += "." + std::to_string(i);
  return s;
}

namespace {

Sequent check_at(const Derivation& d, Path& path) {
  static const std::size_t arity[] = {0, 0, 1, 1, 2, 2, 1, 0};
  if (d.premises.size() != arity[static_cast<int>(d.rule)])
    fail(Errc::InvalidRule, path_str(path) + ": wrong number of premises for " + rule_name(d.rule));
  std::vector<Derivation> ps;
  for (std::size_t i = 0; i < d.premises.size(); ++i) {
    path.push_back(i);
    Sequent s = check_at(d.premises[i], path);
    path.pop_back();
    ps.push_back(Derivation::hyp(s));
  }
  Derivation r;
  try {
    switch (d.rule) {
      case RuleKind::Ax: r = Derivation::ax(d.a); break;
      case RuleKind::One: r = Derivation::one(); break;
      case RuleKind::Bot: r = Derivation::bot(d.pos, ps[0]); break;
      case RuleKind::Par: r = Derivation::par(d.pos, ps[0]); break;
      case RuleKind::Tensor: r = Derivation::tensor(ps[0], ps[1]); break;
      case RuleKind::Cut: r = Derivation::cut(ps[0], ps[1]); break;
      case RuleKind::Exchange: {
        Permutation::from_images(d.perm.images);
        r = Derivation::exchange(d.perm, ps[0]);
        break;
      }
      case RuleKind::Hyp: r = d; break;
    }
  } catch (const Error& e) {
    fail(Errc::InvalidRule, path_str(path) + ": " + e.detail());
  }
  if (r.conclusion != d.conclusion)
    fail(Errc::InvalidRule, path_str(path) + ": stored conclusion " + sequent_str(d.conclusion) + " but the rule gives " +
                                sequent_str(r.conclusion));
  return r.conclusion;
}

}  // namespace

Sequent check_derivation(const Derivation& d) {
  Path p;
  return check_at(d, p);
}

std::size_t rule_count(const Derivation& d) {
  std::size_t n = d.rule == RuleKind::Exchange || d.rule == RuleKind::Hyp ? 0 : 1;
  for (const Derivation& p : d.premises) n += rule_count(p);
  return n;
}

std::size_t cut_count(const Derivation& d) {
  std::size_t n = d.rule == RuleKind::Cut ? 1 : 0;
  for (const Derivation& p : d.premises) n += cut_count(p);
  return n;
}

std::string to_string(const Derivation& d) {
  std::string s = "(";
  s += rule_name(d.rule);
  switch (d.rule) {
    case RuleKind::Ax: s += " " + d.a.str(); break;
    case RuleKind::Bot:
    case RuleKind::Par: s += " " + std::to_string(d.pos + 1); break;
    case RuleKind::Exchange: s += " " + d.perm.str(); break;
    case RuleKind::Hyp:
      for (const Formula& f : d.conclusion) s += " " + f.str();
      break;
    default: break;
  }
  for (const Derivation& p : d.premises) s += " " + to_string(p);
  return s + ")";
}

namespace {

struct Parser {
  std::string_view t;
  std::size_t i = 0;

  [[noreturn]] void error(const std::string& msg) { fail(Errc::Parse, msg + " at offset " + std::to_string(i)); }

  void expect(char c) {
    skip_ws(t, i);
    if (i >= t.size() || t[i] != c) error(std::string("expected '") + c + "'");
    ++i;
  }

  bool peek(char c) {
    skip_ws(t, i);
    return i < t.size() && t[i] == c;
  }

  std::string word() {
    skip_ws(t, i);
    std::size_t s = i;
    while (i < t.size() && std::isalpha(static_cast<unsigned char>(t[i]))) ++i;
    return std::string(t.substr(s, i - s));
  }

  std::optional<std::size_t> number() {
    skip_ws(t, i);
    if (i >= t.size() || !std::isdigit(static_cast<unsigned char>(t[i]))) return std::nullopt;
    std::size_t s = i;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    std::size_t v = std::stoul(std::string(t.substr(s, i - s)));
    if (v == 0) error("positions are 1-based");
    return v - 1;
  }

  Derivation derivation() {
    expect('(');
    std::string w = word();
    Derivation d;
    try {
      if (w == "ax") {
        skip_ws(t, i);
        d = Derivation::ax(parse_formula_at(t, i));
      } else if (w == "one") {
        d = Derivation::one();
      } else if (w == "bot" || w == "par") {
        auto pos = number();
        Derivation p = derivation();
        std::size_t n = p.conclusion.size();
        if (w == "bot")
          d = Derivation::bot(pos.value_or(n), std::move(p));
        else
          d = Derivation::par(pos.value_or(n < 2 ? 0 : n - 2), std::move(p));
      } else if (w == "tensor" || w == "cut") {
        Derivation l = derivation();
        Derivation r = derivation();
        d = w == "tensor" ? Derivation::tensor(std::move(l), std::move(r)) : Derivation::cut(std::move(l), std::move(r));
      } else if (w == "ex") {
        skip_ws(t, i);
        std::size_t s = i;
        while (i < t.size() && t[i] != ']') ++i;
        if (i >= t.size()) error("unterminated permutation");
        ++i;
        Permutation p = parse_permutation(t.substr(s, i - s));
        d = Derivation::exchange(p, derivation());
      } else if (w == "hyp") {
        Sequent s;
        while (!peek(')')) s.push_back(parse_formula_at(t, i));
        d = Derivation::hyp(std::move(s));
      } else {
        error("unknown rule '" + w + "'");
      }
    } catch (const Error& e) {
      if (e.code() == Errc::Parse) throw;
      fail(Errc::InvalidRule, e.detail());
    }
    expect(')');
    return d;
  }
};

}  // namespace

Derivation parse_derivation(std::string_view text) {
  Parser p{text};
  Derivation d = p.derivation();
  skip_ws(text, p.i);
  if (p.i != text.size()) p.error("trailing input");
  return d;
}

const Derivation& at(const Derivation& d, const Path& p) {
  const Derivation* n = &d;
  for (std::size_t i : p) {
    if (i >= n->premises.size()) fail(Errc::BadIndex, "no premise " + std::to_string(i) + " on " + path_str(p));
    n = &n->premises[i];
  }
  return *n;
}

namespace {

void collect_cuts(const Derivation& d, Path& p, std::vector<Path>& out) {
  if (d.rule == RuleKind::Cut) out.push_back(p);
  for (std::size_t i = 0; i < d.premises.size(); ++i) {
    p.push_back(i);
    collect_cuts(d.premises[i], p, out);
    p.pop_back();
  }
}

}  // namespace

std::vector<Path> cut_paths(const Derivation& d) {
  std::vector<Path> out;
  Path p;
  collect_cuts(d, p, out);
  return out;
}

}  // namespace pd
