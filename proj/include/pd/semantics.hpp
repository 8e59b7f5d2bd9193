#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pd/diagram.hpp"
#include "pd/logic.hpp"
#include "pd/match.hpp"
#include "pd/permutation.hpp"
#include "pd/rewrite.hpp"

namespace pd {

/// Two stacked splitting gates (tensor or cut) whose branches should be
/// re-paired. Indices are steps of the canonical step form.
struct CrossingSplit {
  enum class Kind {
    Tangled,      // a twist above the upper gate crosses the two lineages
    CutDirected,  // a topmost cut whose active formula sits in a region closed by the upper gate
  };
  std::size_t upper = 0;  // beta
  std::size_t lower = 0;  // alpha
  Side side = Side::Left;  // branch of beta that feeds alpha's active input
  Kind kind = Kind::Tangled;
};

/// Crossing splits of an irreducible, B-free controlled diagram.
/// NotIrreducible when an MLL_ctrl rule still applies.
std::vector<CrossingSplit> crossing_splits(const Diagram& phi);
std::vector<MatchSite> detect_crossing_splits(const Diagram& phi);

/// Every pair (beta above alpha) where alpha's active input on `side` comes
/// from beta's premise on that side without passing through beta. Crossing
/// splits are a subset of these; all of them are rule permutations.
std::vector<CrossingSplit> commuting_pairs(const Diagram& phi);

/// B-gate introduction at one pair: the three branches stay on top, a B-gate
/// swaps two of them and the part below is rebuilt with alpha above beta.
/// nullopt when the pair cannot be re-paired (the diagram must be closed,
/// sequentializable and B-free).
std::optional<Diagram> introduce_b_gate(const Diagram& phi, const CrossingSplit& x);

/// Moves the gates above B-gates below them until every B-gate is
/// eliminated or has only boundary inputs above it.
std::pair<Diagram, RewriteTrace> drive_b_gates(const Diagram& phi);

/// One B-introduction at the first crossing split, then B-gate elimination.
/// NoCrossingSplit when there is none.
std::pair<Diagram, RewriteTrace> untangle(const Diagram& phi);

/// Normal form under Sem.
std::pair<Diagram, RewriteTrace> eliminate_cuts(const Diagram& phi, std::size_t fuel = 100000);

enum class Verdict { Yes, No, Unknown };
const char* verdict_name(Verdict v);

enum class EquivMode { Sim, Sem };

struct EquivResult {
  Verdict verdict = Verdict::Unknown;
  std::string reason;
  /// When yes: the meeting diagram and the path from each side.
  std::optional<Diagram> meeting;
  RewriteTrace left, right;
  std::size_t explored = 0;
};

/// Bounded bidirectional search over diagram moves. Sim: branch re-pairings
/// in both directions. Sem: also every cut rule application. Each move is
/// followed by MLL_ctrl normalization and B-gate elimination, and `bound`
/// counts moves on each side. ConclusionMismatch when the conclusions differ
/// as multisets.
EquivResult equivalent(const Derivation& d1, const Derivation& d2, std::size_t bound = 12,
                       EquivMode mode = EquivMode::Sem);

/// Sem normal form of represent(d) with its trace. Sem is not confluent, so
/// two derivations may have different denotations here and still be
/// equivalent; compare with `equivalent`.
std::pair<Diagram, RewriteTrace> denotation(const Derivation& d);

/// Proof structure up to renumbering of cells, as a string.
std::string proof_structure_key(const Diagram& phi);

}  // namespace pd
