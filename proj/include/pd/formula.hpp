#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace pd {

/// Negation-normal MLL formula with units. Atoms flagged `meta` are schema
/// metavariables; they are only meaningful inside rewrite rules.
class Formula {
 public:
  enum class Kind : unsigned char { Atom, Tensor, Par, One, Bot };

  Formula() = default;  // the unit 1

  static Formula atom(std::string name, bool dual = false);
  static Formula meta(std::string name, bool dual = false);
  static Formula tensor(Formula l, Formula r);
  static Formula par(Formula l, Formula r);
  static Formula one();
  static Formula bot();

  Kind kind() const;
  bool is_atom() const { return kind() == Kind::Atom; }
  const std::string& name() const;
  bool dual() const;
  bool is_meta() const;
  const Formula& left() const;
  const Formula& right() const;

  /// Number of tensor and par nodes.
  std::size_t connectives() const;
  bool has_meta() const;
  std::size_t hash() const;
  std::string str() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula binary(Kind k, Formula l, Formula r);
  const Node& node() const;
  std::shared_ptr<const Node> node_;  // null encodes 1
};

Formula negate(const Formula& f);

/// Left-right reflection: operands of binary connectives are swapped.
Formula mirror(const Formula& f);

/// Grammar: `a`, `a^`, `(A*B)`, `(A|B)`, `1`, `_`, and `?X` for metavariables.
Formula parse_formula(std::string_view text);

/// Parses one formula starting at `pos` and advances `pos` past it.
Formula parse_formula_at(std::string_view text, std::size_t& pos);

}  // namespace pd

template <>
struct std::hash<pd::Formula> {
  std::size_t operator()(const pd::Formula& f) const { return f.hash(); }
};
