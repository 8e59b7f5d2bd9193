#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pd/diagram.hpp"
#include "pd/linear.hpp"

namespace pd {

/// Bindings of formula metavariables, plus word variables recorded by rule
/// families (informational; words are expanded into formula variables).
struct Substitution {
  std::map<std::string, Formula> vars;
  std::map<std::string, Word> words;

  Formula apply(const Formula& f) const;
  WireLabel apply(const WireLabel& l) const;
  Word apply(const Word& w) const;
  GateType apply(const GateType& g) const;
  Diagram apply(const Diagram& d) const;
  std::string str() const;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

bool unify(const Formula& pattern, const Formula& value, Substitution& s);
bool unify(const WireLabel& pattern, const WireLabel& value, Substitution& s);
bool unify(const GateType& pattern, const GateType& value, Substitution& s);

struct MatchSite {
  std::pair<std::size_t, std::size_t> layer_span{0, 0};
  std::size_t offset = 0;
  Substitution substitution;
  /// Matched steps of the canonical step form of phi, in schema order.
  std::vector<std::size_t> steps;
  std::size_t fingerprint = 0;
  Word window_in, window_out;
};

/// A schema prepared for repeated matching.
class Pattern {
 public:
  explicit Pattern(const Diagram& schema);
  const Linear& linear() const { return lin_; }
  const Diagram& diagram() const { return schema_; }
  const Word& output() const { return out_; }

 private:
  friend class MatchContext;
  struct Edge {
    std::size_t from;  // already mapped pattern step
    bool via_input;    // follow an input port (towards a producer) or an output port
    std::size_t port;
    std::size_t to;
    std::size_t to_port;
  };
  Diagram schema_;
  Linear lin_;
  WireGraph g_;
  Word out_;
  std::vector<std::size_t> roots_;
  std::vector<std::vector<Edge>> plans_;
};

/// Precomputed data about a diagram for matching several patterns.
class MatchContext {
 public:
  explicit MatchContext(const Diagram& phi);
  const Linear& linear() const { return lin_; }
  const Diagram& canonical() const { return canon_; }
  std::size_t fingerprint() const { return fp_; }
  std::vector<MatchSite> find(const Pattern& p) const;
  const std::vector<std::size_t>& levels() const { return lv_; }

 private:
  Diagram canon_;
  Linear lin_;
  WireGraph g_;
  std::vector<std::size_t> lv_;
  std::vector<std::vector<std::size_t>> deps_, succ_;
  std::vector<std::size_t> pos_in_layer_;
  std::size_t fp_ = 0;
};

std::string linear_key(const Linear& l);
std::size_t fingerprint(const Diagram& canonical_phi);

std::vector<MatchSite> find_matches(const Diagram& phi, const Diagram& schema);
Diagram replace_at(const Diagram& phi, const MatchSite& site, const Diagram& target);

/// Convex reordering used by matching: steps not below the block, the block
/// in the given order, then the remaining descendants. Returns the reordered
/// step form and the index where the block starts.
std::optional<std::pair<Linear, std::size_t>> isolate_block(const Linear& l, const std::vector<std::size_t>& block);

}  // namespace pd
