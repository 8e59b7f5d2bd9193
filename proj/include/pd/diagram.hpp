#pragma once

#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "pd/formula.hpp"

namespace pd {

enum class Signature : unsigned char { Uncontrolled, Controlled };

class WireLabel {
 public:
  enum class Kind : unsigned char { Formula, L, R };

  WireLabel(Formula f) : kind_(Kind::Formula), f_(std::move(f)) {}  // NOLINT implicit
  static WireLabel ctrl_left() { return WireLabel(Kind::L); }
  static WireLabel ctrl_right() { return WireLabel(Kind::R); }

  Kind kind() const { return kind_; }
  bool is_formula() const { return kind_ == Kind::Formula; }
  bool is_control() const { return kind_ != Kind::Formula; }
  const pd::Formula& formula() const { return f_; }
  std::string str() const;
  std::size_t hash() const;

  friend bool operator==(const WireLabel& a, const WireLabel& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Formula || a.f_ == b.f_);
  }
  friend std::strong_ordering operator<=>(const WireLabel& a, const WireLabel& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    if (a.kind_ != Kind::Formula) return std::strong_ordering::equal;
    return a.f_ <=> b.f_;
  }

 private:
  explicit WireLabel(Kind k) : kind_(k) {}
  Kind kind_;
  pd::Formula f_;
};

using Word = std::vector<WireLabel>;

std::string word_str(const Word& w);
Word formulas_word(const std::vector<Formula>& fs);
inline const WireLabel kL = WireLabel::ctrl_left();
inline const WireLabel kR = WireLabel::ctrl_right();

enum class Family : unsigned char { Tensor, Par, Ax, Cut, Twist, One, Bot, Big };
const char* family_name(Family f);

struct GateType {
  Family family = Family::One;
  Formula a, b;  // Tensor/Par/Twist use both, Ax/Cut use `a`
  Word w, w2;    // Big only

  static GateType tensor(Formula a, Formula b) { return {Family::Tensor, std::move(a), std::move(b), {}, {}}; }
  static GateType par(Formula a, Formula b) { return {Family::Par, std::move(a), std::move(b), {}, {}}; }
  static GateType ax(Formula a) { return {Family::Ax, std::move(a), {}, {}, {}}; }
  static GateType cut(Formula a) { return {Family::Cut, std::move(a), {}, {}, {}}; }
  static GateType twist(Formula a, Formula b) { return {Family::Twist, std::move(a), std::move(b), {}, {}}; }
  static GateType one() { return {Family::One, {}, {}, {}, {}}; }
  static GateType bot() { return {Family::Bot, {}, {}, {}, {}}; }
  static GateType big(Word w, Word w2) { return {Family::Big, {}, {}, std::move(w), std::move(w2)}; }

  Word inputs(Signature sig) const;
  Word outputs(Signature sig) const;
  std::size_t in_arity(Signature sig) const;
  std::size_t out_arity(Signature sig) const;
  bool has_meta() const;
  std::string str() const;

  friend bool operator==(const GateType&, const GateType&) = default;
  friend std::strong_ordering operator<=>(const GateType& x, const GateType& y);
};

struct Gate {
  GateType type;
  friend bool operator==(const Gate&, const Gate&) = default;
};

struct Identity {
  WireLabel label;
  friend bool operator==(const Identity&, const Identity&) = default;
};

using Slot = std::variant<Identity, Gate>;
using Layer = std::vector<Slot>;

/// Layered string diagram. Construction validates the chaining of words.
class Diagram {
 public:
  Diagram() = default;
  Diagram(Signature sig, Word input, std::vector<Layer> layers = {});

  Signature signature() const { return sig_; }
  const Word& input() const { return input_; }
  const Word& output() const { return output_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t gate_count() const;

  friend bool operator==(const Diagram& a, const Diagram& b) {
    return a.sig_ == b.sig_ && a.input_ == b.input_ && a.layers_ == b.layers_;
  }

 private:
  Signature sig_ = Signature::Controlled;
  Word input_;
  std::vector<Layer> layers_;
  Word output_;
};

Word slot_inputs(const Slot& s, Signature sig);
Word slot_outputs(const Slot& s, Signature sig);

Diagram identity(Signature sig, const Word& w);
/// One layer: identities on `left`, the gate, identities on `right`.
Diagram gate_diagram(Signature sig, const GateType& g, const Word& left = {}, const Word& right = {});

Diagram compose_seq(const Diagram& phi, const Diagram& psi);
Diagram compose_par(const Diagram& phi, const Diagram& psi);
Diagram interchange_canonical_form(const Diagram& phi);
inline Diagram canonical(const Diagram& phi) { return interchange_canonical_form(phi); }

std::size_t gate_count(const Diagram& phi, const std::set<Family>& subset);
/// Left-right reflection of a diagram (L and R exchanged, words reversed).
Diagram mirror(const Diagram& phi);

}  // namespace pd
