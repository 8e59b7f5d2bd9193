#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pd/diagram.hpp"
#include "pd/linear.hpp"
#include "pd/logic.hpp"

namespace pd {

/// Diagram of a derivation, ∅ → Γ (uncontrolled) or ∅ → L Γ R (controlled).
/// Hyp leaves become input wires (input sheaves L S R when controlled).
Diagram represent(const Derivation& d, Signature sig = Signature::Controlled);
Linear represent_linear(const Derivation& d, Signature sig = Signature::Controlled);

/// Boundary test: empty input, output L Γ R with Γ control-free. When
/// `comparisons` is given it receives the number of label comparisons made.
bool is_sequentializable(const Diagram& phi, std::size_t* comparisons = nullptr);

/// Derivation of the output sequent, peeling the bottommost step.
/// NotSequentializable when the boundary test fails, MalformedBranch when a
/// split does not produce two complete branches.
Derivation sequentialize(const Diagram& phi);
/// Same on a step form whose input is a sequence of sheaves L S R, each of
/// which becomes a Hyp leaf.
Derivation sequentialize_open(const Linear& l);

/// Proof structure read off a diagram: cells for tensor, par, bot and one;
/// Ax and Cut gates and twists only bend wires.
struct ProofStructure {
  enum class Cell { Tensor, Par, One, Bot };
  struct Node {
    Cell cell;
    Formula f;  // conclusion of the cell
  };
  /// Cell input or output, conclusion, or hypothesis (diagram input).
  struct End {
    enum class Kind { CellIn, CellOut, Conclusion, Hypothesis } kind;
    std::size_t index = 0;
    std::size_t slot = 0;
    friend bool operator==(const End&, const End&) = default;
  };
  /// Wire: one upward end and one downward end. Axiom: two downward ends
  /// (labels dual). Cut: two upward ends.
  struct Link {
    enum class Kind { Wire, Axiom, Cut } kind;
    End a, b;
    Formula label;  // formula at end a
  };
  std::vector<Node> cells;
  std::vector<Formula> conclusions;
  std::vector<Formula> hypotheses;
  std::vector<Link> links;
  std::size_t loops = 0;  // closed Ax/Cut cycles, which have no ends

  std::size_t count(Cell c) const;
  std::size_t count(Link::Kind k) const;
};

/// Control wires are ignored, so controlled diagrams are accepted too.
ProofStructure to_proof_structure(const Diagram& phi);
/// Node and edge list, see docs/formats.md.
std::string proof_structure_str(const ProofStructure& ps);

}  // namespace pd
