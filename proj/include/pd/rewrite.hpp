#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pd/diagram.hpp"
#include "pd/match.hpp"

namespace pd {

/// An oriented rule between two schema diagrams. Formula metavariables are
/// written `?X`; a family instance expands its word variable into formula
/// variables `?G1 .. ?Gn` and records the word variable name in `word_vars`.
struct RewriteRule {
  std::string name;
  std::string group;
  Diagram source, target;
  std::vector<std::string> word_vars;
  std::string note;
};

/// One applicable rewrite: where it matched and what it produces.
struct Application {
  std::string rule;
  MatchSite site;
  Diagram result;
};

/// Rules that are not a single schema (B-gate introduction, untangling).
/// They receive the canonical diagram of the match context.
class Procedure {
 public:
  virtual ~Procedure() = default;
  virtual std::string name() const = 0;
  virtual std::string group() const = 0;
  virtual std::string describe() const = 0;
  virtual std::vector<Application> find(const MatchContext& ctx) const = 0;
};

class Polygraph {
 public:
  struct Entry {
    enum class Kind { Fixed, Family, Procedural } kind = Kind::Fixed;
    std::string name;
    std::string group;
    RewriteRule rule;                                          // Fixed
    std::function<std::vector<RewriteRule>(std::size_t)> make;  // Family: instances for word length n
    std::size_t max_n = static_cast<std::size_t>(-1);          // Family: largest word length
    std::shared_ptr<const Procedure> proc;                     // Procedural
  };

  /// A rule instance with its prepared pattern, in declaration order.
  struct Prepared {
    const RewriteRule* rule = nullptr;
    const Pattern* pattern = nullptr;
    const Procedure* proc = nullptr;
  };

  Polygraph(std::string name, Signature sig, std::string wires, std::string twisting, std::vector<Family> families,
            std::vector<Entry> entries);

  const std::string& name() const { return name_; }
  Signature signature() const { return sig_; }
  const std::string& wire_alphabet() const { return wires_; }
  const std::string& twisting_family() const { return twisting_; }
  const std::vector<Family>& families() const { return families_; }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Rules in declaration order with families expanded up to word length
  /// `width` (and the family's own bound).
  std::vector<Prepared> rules(std::size_t width) const;
  /// Fixed rules and family instances up to `width`, schemas only.
  std::vector<RewriteRule> schemas(std::size_t width) const;
  /// Group of a rule or family instance ("cut-tensor/2" is in the family's group).
  std::string group_of(const std::string& rule) const;

 private:
  struct Instance {
    RewriteRule rule;
    std::unique_ptr<Pattern> pattern;
  };
  void expand(std::size_t width) const;

  std::string name_;
  Signature sig_;
  std::string wires_, twisting_;
  std::vector<Family> families_;
  std::vector<Entry> entries_;
  std::vector<std::unique_ptr<Pattern>> fixed_patterns_;
  mutable std::mutex mu_;
  mutable std::size_t expanded_ = 0;
  mutable bool any_expanded_ = false;
  mutable std::vector<std::vector<std::unique_ptr<Instance>>> instances_;  // per entry
};

/// One of S, MLLu_Cut, MLL_ctrl, MLL_big, Sem. UnknownPolygraph otherwise.
/// The objects are built once and shared.
const Polygraph& polygraph(const std::string& name);
std::vector<std::string> polygraph_names();

struct TraceStep {
  std::string rule;
  MatchSite site;
};

struct RewriteTrace {
  Diagram initial;
  std::vector<TraceStep> steps;
  Diagram final;
};

/// Every application of every rule, in declaration order, sites ordered
/// topmost-leftmost within a rule.
std::vector<Application> all_applications(const Polygraph& p, const Diagram& phi);
/// First rule in declaration order that applies, at its topmost-leftmost site.
std::optional<Application> apply_once(const Polygraph& p, const Diagram& phi);

/// Rewrites to an irreducible diagram. FuelExhausted after `fuel` steps.
std::pair<Diagram, RewriteTrace> normalize(const Polygraph& p, const Diagram& phi, std::size_t fuel = 100000);
/// Re-applies the steps of a trace from its initial diagram. StaleSite when
/// a recorded site cannot be found again.
Diagram replay(const Polygraph& p, const RewriteTrace& t);
/// One recorded step applied to `cur`. StaleSite when it cannot be found.
Diagram apply_recorded(const Polygraph& p, const Diagram& cur, const TraceStep& st);

// ---------------------------------------------------------------------------
// Termination certificates.

/// c + sum k[i] * x[i]
struct Affine {
  long c = 0;
  std::vector<long> k;
  long eval(const std::vector<long>& x) const;
  friend bool operator==(const Affine&, const Affine&) = default;
};

/// Vector functions over the naturals, one per gate family; a gate maps its
/// input values to its output values. Families without an entry are missing.
/// With `crossing_cost_first` the order is lexicographic: first the sum of
/// |A|*|B| over twist gates, then the interpretation.
struct MonotoneInterpretation {
  std::string name;
  std::map<Family, std::function<std::vector<Affine>(const GateType&, Signature)>> gates;
  bool crossing_cost_first = false;
};

/// As printed: twist (x,y) -> (x+y, x), par and tensor x+y+1, Ax (1,1,1,1),
/// bot 1, one (1,1,1), Cut to the empty vector.
MonotoneInterpretation doubling_interpretation();
/// The certificate shipped for a polygraph: S uses twist (x,y) -> (x+y+1, x);
/// MLL_ctrl adds the crossing cost in front.
MonotoneInterpretation certificate(const std::string& polygraph_name);

/// Output forms of a diagram over its input variables. MissingInterpretation
/// when a gate family has no entry.
std::vector<Affine> interpret(const MonotoneInterpretation& m, const Diagram& phi);
std::vector<long> evaluate(const MonotoneInterpretation& m, const Diagram& phi, const std::vector<long>& x);

/// Sum of |A|*|B| over twist gates, |A| counting atoms, units and connectives.
long crossing_cost(const Diagram& phi);

struct DecreaseViolation {
  std::size_t step = 0;
  std::string rule;
  std::string detail;
};

struct DecreaseReport {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // procedural steps, which carry no schema instance
  std::vector<DecreaseViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Instance of the matched window before and after one step.
std::pair<Diagram, Diagram> step_instance(const Polygraph& p, const Diagram& before, const TraceStep& s);

/// Strict decrease, in the product order (componentwise >= and not equal),
/// of the source instance over the target instance at every point of the
/// grid {0..grid}^arity, plus a symbolic comparison of the affine forms.
DecreaseReport check_decrease(const Polygraph& p, const MonotoneInterpretation& m, const RewriteTrace& t,
                              long grid = 3);
/// Same check for one pair of diagrams with equal boundaries; empty string
/// when it decreases.
std::string compare_strict(const MonotoneInterpretation& m, const Diagram& src, const Diagram& tgt, long grid = 3);

/// Sum over Cut gates of 3^(connectives in the cut formula).
unsigned long long cut_weight(const Diagram& phi);

// Procedural rules, defined with the semantics module.
std::shared_ptr<const Procedure> untangle_procedure();
std::shared_ptr<const Procedure> b_intro_procedure();

}  // namespace pd
