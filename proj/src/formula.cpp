#include "pd/formula.hpp"

#include <cctype>
#include <functional>

#include "pd/error.hpp"

namespace pd {

struct Formula::Node {
  Kind kind = Kind::One;
  std::string name;
  bool dual = false;
  bool meta = false;
  Formula l, r;
  std::size_t conn = 0;
  std::size_t h = 11;
  bool has_meta = false;
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

const Formula::Node& Formula::node() const {
  static const Node one_node{};
  return node_ ? *node_ : one_node;
}

Formula Formula::atom(std::string name, bool dual) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->name = std::move(name);
  n->dual = dual;
  n->h = mix(mix(1, std::hash<std::string>{}(n->name)), dual ? 7 : 3);
  return Formula(std::move(n));
}

Formula Formula::meta(std::string name, bool dual) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->name = std::move(name);
  n->dual = dual;
  n->meta = true;
  n->has_meta = true;
  n->h = mix(mix(2, std::hash<std::string>{}(n->name)), dual ? 7 : 3);
  return Formula(std::move(n));
}

Formula Formula::binary(Kind k, Formula l, Formula r) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->conn = 1 + l.connectives() + r.connectives();
  n->has_meta = l.has_meta() || r.has_meta();
  n->h = mix(mix(k == Kind::Tensor ? 17 : 19, l.hash()), r.hash());
  n->l = std::move(l);
  n->r = std::move(r);
  return Formula(std::move(n));
}

Formula Formula::tensor(Formula l, Formula r) { return binary(Kind::Tensor, std::move(l), std::move(r)); }
Formula Formula::par(Formula l, Formula r) { return binary(Kind::Par, std::move(l), std::move(r)); }
Formula Formula::one() { return Formula(); }

Formula Formula::bot() {
  static const std::shared_ptr<const Node> b = [] {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Bot;
    n->h = 13;
    return n;
  }();
  return Formula(b);
}

Formula::Kind Formula::kind() const { return node().kind; }
const std::string& Formula::name() const { return node().name; }
bool Formula::dual() const { return node().dual; }
bool Formula::is_meta() const { return node().meta; }
const Formula& Formula::left() const { return node().l; }
const Formula& Formula::right() const { return node().r; }
std::size_t Formula::connectives() const { return node().conn; }
bool Formula::has_meta() const { return node().has_meta; }
std::size_t Formula::hash() const { return node().h; }

std::string Formula::str() const {
  switch (kind()) {
    case Kind::Atom: return (is_meta() ? "?" : "") + name() + (dual() ? "^" : "");
    case Kind::One: return "1";
    case Kind::Bot: return "_";
    case Kind::Tensor: return "(" + left().str() + "*" + right().str() + ")";
    case Kind::Par: return "(" + left().str() + "|" + right().str() + ")";
  }
  return "";
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return (a <=> b) == 0;
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  switch (a.kind()) {
    case Formula::Kind::Atom:
      if (auto c = a.is_meta() <=> b.is_meta(); c != 0) return c;
      if (auto c = a.name() <=> b.name(); c != 0) return c;
      return a.dual() <=> b.dual();
    case Formula::Kind::Tensor:
    case Formula::Kind::Par:
      if (auto c = a.left() <=> b.left(); c != 0) return c;
      return a.right() <=> b.right();
    default:
      return std::strong_ordering::equal;
  }
}

Formula negate(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.is_meta() ? Formula::meta(f.name(), !f.dual()) : Formula::atom(f.name(), !f.dual());
    case Formula::Kind::One: return Formula::bot();
    case Formula::Kind::Bot: return Formula::one();
    case Formula::Kind::Tensor: return Formula::par(negate(f.right()), negate(f.left()));
    case Formula::Kind::Par: return Formula::tensor(negate(f.right()), negate(f.left()));
  }
  return f;
}

Formula mirror(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Tensor: return Formula::tensor(mirror(f.right()), mirror(f.left()));
    case Formula::Kind::Par: return Formula::par(mirror(f.right()), mirror(f.left()));
    default: return f;
  }
}

namespace {

void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

[[noreturn]] void parse_fail(std::string_view s, std::size_t i, const std::string& why) {
  fail(Errc::Parse, "formula '" + std::string(s) + "' at column " + std::to_string(i + 1) + ": " + why);
}

}  // namespace

Formula parse_formula_at(std::string_view s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) parse_fail(s, i, "unexpected end");
  char c = s[i];
  if (c == '1') {
    ++i;
    return Formula::one();
  }
  if (c == '_') {
    ++i;
    return Formula::bot();
  }
  if (c == '(') {
    ++i;
    Formula l = parse_formula_at(s, i);
    skip_ws(s, i);
    if (i >= s.size() || (s[i] != '*' && s[i] != '|')) parse_fail(s, i, "expected '*' or '|'");
    bool tensor = s[i] == '*';
    ++i;
    Formula r = parse_formula_at(s, i);
    skip_ws(s, i);
    if (i >= s.size() || s[i] != ')') parse_fail(s, i, "expected ')'");
    ++i;
    return tensor ? Formula::tensor(l, r) : Formula::par(l, r);
  }
  bool meta = false;
  if (c == '?') {
    meta = true;
    ++i;
  }
  std::size_t start = i;
  if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) parse_fail(s, i, "expected atom");
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
  std::string name(s.substr(start, i - start));
  bool dual = false;
  if (i < s.size() && s[i] == '^') {
    dual = true;
    ++i;
  }
  if (!meta && (name == "L" || name == "R")) parse_fail(s, start, "L and R are reserved for control wires");
  return meta ? Formula::meta(name, dual) : Formula::atom(name, dual);
}

Formula parse_formula(std::string_view s) {
  std::size_t i = 0;
  Formula f = parse_formula_at(s, i);
  skip_ws(s, i);
  if (i != s.size()) parse_fail(s, i, "trailing input");
  return f;
}

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Parse: return "ParseError";
    case Errc::BoundaryMismatch: return "BoundaryMismatch";
    case Errc::StaleSite: return "StaleSite";
    case Errc::InvalidRule: return "InvalidRule";
    case Errc::NotApplicable: return "NotApplicable";
    case Errc::BadIndex: return "BadIndex";
    case Errc::NonTwistGate: return "NonTwistGate";
    case Errc::UnknownPolygraph: return "UnknownPolygraph";
    case Errc::FuelExhausted: return "FuelExhausted";
    case Errc::MissingInterpretation: return "MissingInterpretation";
    case Errc::NotSequentializable: return "NotSequentializable";
    case Errc::MalformedBranch: return "MalformedBranch";
    case Errc::NotIrreducible: return "NotIrreducible";
    case Errc::NoCrossingSplit: return "NoCrossingSplit";
    case Errc::ConclusionMismatch: return "ConclusionMismatch";
    case Errc::Contract: return "ContractViolation";
  }
  return "Error";
}

}  // namespace pd
