#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pd/diagram.hpp"

namespace pd {

/// One gate occurrence applied at `offset` of the current word.
struct Step {
  GateType type;
  std::size_t offset = 0;
  friend bool operator==(const Step&, const Step&) = default;
};

/// Step form of a diagram: an input word and a sequence of gate applications.
/// Every diagram has many step forms; `to_layers` picks the canonical layering.
struct Linear {
  Signature sig = Signature::Controlled;
  Word input;
  std::vector<Step> steps;
};

Linear linearize(const Diagram& d);
Diagram to_layers(const Linear& l);
/// Canonical step order: by interchange level, then left to right.
Linear canonical_linear(const Diagram& d);
Linear canonical_linear(const Linear& l);

/// Applies a step, checking that its inputs match the word.
void apply_step(Word& w, const Step& s, Signature sig);
Word output_word(const Linear& l);

/// Swaps steps i and i+1 when they commute; returns false otherwise.
bool swap_steps(Linear& l, std::size_t i);

/// For every step, the set of earlier steps it directly depends on.
std::vector<std::vector<std::size_t>> step_dependencies(const Linear& l);
/// Longest-path depth of each step in the dependency order (0-based).
std::vector<std::size_t> step_levels(const Linear& l);

/// Moves steps into the given order using adjacent swaps. `order[k]` is the
/// index of the step that should end up in position k. Returns nullopt when
/// some required swap is blocked by a dependency.
std::optional<Linear> reorder(const Linear& l, const std::vector<std::size_t>& order);

/// Wire endpoints of the step form. A producer is either an input position
/// (`step == npos`) or an output port of a step; likewise for consumers.
struct PortRef {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t step = npos;
  std::size_t port = 0;
  friend bool operator==(const PortRef&, const PortRef&) = default;
};

struct WireGraph {
  std::vector<std::vector<PortRef>> in_src;   // per step, per input port
  std::vector<std::vector<PortRef>> out_dst;  // per step, per output port
  std::vector<PortRef> input_dst;             // per boundary input
  std::vector<PortRef> output_src;            // per boundary output
};

WireGraph wire_graph(const Linear& l);

/// Incremental construction of diagrams from gate applications. Labels of
/// binary gates are read off the current word.
class Builder {
 public:
  Builder(Signature sig, Word input = {});
  Builder& gate(const GateType& g, std::size_t offset);
  Builder& tensor(std::size_t offset);
  Builder& par(std::size_t offset);
  Builder& cut(std::size_t offset);
  Builder& twist(std::size_t offset);
  Builder& ax(const Formula& a, std::size_t offset);
  Builder& one(std::size_t offset);
  Builder& bot(std::size_t offset);
  Builder& big(std::size_t offset, const Word& w, const Word& w2);

  const Word& word() const { return word_; }
  const Linear& linear() const { return lin_; }
  Diagram diagram() const { return to_layers(lin_); }

 private:
  Linear lin_;
  Word word_;
};

}  // namespace pd
