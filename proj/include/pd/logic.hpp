#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pd/formula.hpp"
#include "pd/permutation.hpp"

namespace pd {

using Sequent = std::vector<Formula>;

std::string sequent_str(const Sequent& s);
/// Comma separated formulas, optionally preceded by `|-`.
Sequent parse_sequent(std::string_view text);

/// Hyp is an open leaf with a given conclusion. It only appears in partial
/// derivations built internally.
enum class RuleKind { Ax, One, Bot, Par, Tensor, Cut, Exchange, Hyp };
const char* rule_name(RuleKind k);

/// A derivation node. Premises are stored by value. The conclusion is
/// computed by the constructors below, which reject ill-formed rule
/// instances with InvalidRule.
///
/// Rule shapes (positions 0-based):
///   Ax(A):         |- A, A^
///   One:           |- 1
///   Bot(p):        G |- G with _ inserted at p
///   Par(p):        A at p and B at p+1 become (A|B) at p
///   Tensor:        |- S, A  and  |- B, G  give  |- S, (A*B), G
///   Cut:           |- S, A  and  |- A^, G  give  |- S, G
///   Exchange(s):   conclusion[i] = premise[s(i+1)-1]
struct Derivation {
  RuleKind rule = RuleKind::One;
  Formula a;            // Ax formula, Cut formula (the left active one)
  std::size_t pos = 0;  // Bot, Par, Tensor (index of the principal formula)
  Permutation perm;     // Exchange
  std::vector<Derivation> premises;
  Sequent conclusion;

  static Derivation ax(const Formula& a);
  static Derivation one();
  static Derivation bot(std::size_t pos, Derivation d);
  static Derivation par(std::size_t pos, Derivation d);
  static Derivation tensor(Derivation l, Derivation r);
  static Derivation cut(Derivation l, Derivation r);
  static Derivation exchange(const Permutation& sigma, Derivation d);
  static Derivation hyp(Sequent s);

  friend bool operator==(const Derivation&, const Derivation&) = default;
};

/// Exchange that fuses with an exchange directly below and vanishes when
/// the result is the identity.
Derivation exchange_fused(const Permutation& sigma, Derivation d);

/// Re-validates every node; InvalidRule names the first bad node by path.
Sequent check_derivation(const Derivation& d);

/// Rule nodes other than Exchange and Hyp.
std::size_t rule_count(const Derivation& d);
std::size_t cut_count(const Derivation& d);

/// S-expression form, e.g. `(cut (ax a) (par 1 (ax a^)))`. Positions in the
/// text are 1-based. Printing always writes positions.
std::string to_string(const Derivation& d);
Derivation parse_derivation(std::string_view text);

/// Premise indices from the root.
using Path = std::vector<std::size_t>;
std::string path_str(const Path& p);
const Derivation& at(const Derivation& d, const Path& p);
/// Paths of all Cut nodes, pre-order.
std::vector<Path> cut_paths(const Derivation& d);

// ---------------------------------------------------------------------------
// Skeletons: derivations with exchanges erased and formula occurrences
// tracked by identity.

struct SkNode {
  RuleKind rule = RuleKind::One;
  Formula a;
  std::vector<std::size_t> in;   // consumed occurrences (Par: A,B; Tensor: A,B; Cut: A,A^)
  std::vector<std::size_t> out;  // created occurrences
  std::vector<SkNode> kids;

  friend bool operator==(const SkNode&, const SkNode&) = default;
};

struct Skeleton {
  SkNode root;
  std::vector<Formula> occ;        // formula of every occurrence id
  std::vector<std::size_t> order;  // occurrences of the final conclusion, in order

  /// Canonical text: occurrences renumbered in post-order. Two derivations
  /// have the same key iff they differ only in where exchanges sit.
  std::string key() const;
};

Skeleton skeleton(const Derivation& d);
/// Rebuilds a derivation with exchanges placed canonically: only where a
/// rule needs its active formulas adjacent (Par) or at the border (Tensor,
/// Cut), plus one final exchange to reach `order`.
Derivation rebuild(const Skeleton& s);

/// One-permutation neighbours under the standard equivalence: unary/unary,
/// unary/binary in both directions, and binary/binary reorderings.
std::vector<Skeleton> sim_neighbors(const Skeleton& s);
std::vector<Derivation> sim_neighbors(const Derivation& d);

/// Bidirectional search over skeleton keys. Returns the number of
/// permutations found to connect d1 and d2, or nullopt within `bound`.
std::optional<std::size_t> sim_distance(const Derivation& d1, const Derivation& d2, std::size_t bound = 10);

/// Applies the cut-elimination step at the Cut node found at `path`.
/// NotApplicable when the cut is commutative.
Derivation cut_step(const Derivation& d, const Path& path);
/// Paths of cuts where cut_step applies.
std::vector<Path> applicable_cuts(const Derivation& d);

/// All cut-free derivations of s with at most `max_rules` rule nodes, up to
/// exchange placement (one rebuilt derivation per skeleton).
std::vector<Derivation> enumerate_derivations(const Sequent& s, std::size_t max_rules);
/// Cut-free provability by backward search.
bool provable(const Sequent& s);

}  // namespace pd
