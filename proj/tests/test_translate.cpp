#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pd/error.hpp"
#include "pd/translate.hpp"

using namespace pd;

namespace {

const Formula a = Formula::atom("a"), b = Formula::atom("b");

Derivation P(const char* text) { return parse_derivation(text); }

std::size_t rules_without_exchange(const Derivation& d) {
  std::size_t n = d.rule == RuleKind::Exchange ? 0 : 1;
  for (const Derivation& p : d.premises) n += rules_without_exchange(p);
  return n;
}

}  // namespace

TEST_CASE("represent: small derivations") {
  Diagram ax = represent(Derivation::ax(a));
  CHECK(ax.output() == Word{kL, a, negate(a), kR});
  CHECK(ax.gate_count() == 1);
  CHECK(is_sequentializable(ax));

  Diagram t = represent(P("(tensor (ax a) (ax b))"));
  CHECK(gate_count(t, {Family::Ax}) == 2);
  CHECK(gate_count(t, {Family::Tensor}) == 1);
  CHECK(t.output() == Word{kL, a, Formula::tensor(negate(a), b), negate(b), kR});

  Diagram u = represent(P("(ax a)"), Signature::Uncontrolled);
  CHECK(u.output() == Word{a, negate(a)});
  CHECK_FALSE(is_sequentializable(u));

  // exchanges become twists
  Diagram e = represent(P("(ex [2,1] (ax a))"));
  CHECK(gate_count(e, {Family::Twist}) == 1);
  CHECK(e.output() == Word{kL, negate(a), a, kR});
}

TEST_CASE("boundary test") {
  CHECK_FALSE(is_sequentializable(Diagram(Signature::Controlled, {})));
  CHECK_FALSE(is_sequentializable(identity(Signature::Controlled, {a})));
  CHECK_FALSE(is_sequentializable(identity(Signature::Controlled, {kL, a, kR})));
  Builder two(Signature::Controlled);
  two.ax(a, 0).ax(b, 4);
  CHECK_FALSE(is_sequentializable(two.diagram()));
  std::size_t n = 0;
  CHECK(is_sequentializable(represent(P("(tensor (ax a) (ax b))")), &n));
  CHECK(n == 5);
}

TEST_CASE("represent keeps the rule count") {
  std::mt19937 rng(11);
  for (int i = 0; i < 300; ++i) {
    Derivation d = oracle::random_derivation(rng, 10, {"a", "b"}, i % 2 == 0);
    Diagram phi = represent(d);
    CHECK(gate_count(phi, {Family::Ax, Family::One, Family::Bot, Family::Par, Family::Tensor, Family::Cut}) ==
          rules_without_exchange(d));
    CHECK(is_sequentializable(phi));
  }
}

TEST_CASE("sequentialize") {
  Derivation d = sequentialize(represent(Derivation::ax(a)));
  CHECK(d.rule == RuleKind::Ax);
  CHECK(d.conclusion == Sequent{a, negate(a)});
  try {
    sequentialize(identity(Signature::Controlled, {a}));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotSequentializable);
  }
  Derivation c = P("(cut (ax a) (par 2 (bot 3 (ax a))))");
  CHECK(check_derivation(sequentialize(represent(c))) == c.conclusion);
}

TEST_CASE("round trip up to permutations of rules") {
  std::mt19937 rng(5);
  for (int i = 0; i < 150; ++i) {
    Derivation d = oracle::random_derivation(rng, 8, {"a", "b"}, i % 3 == 0);
    Derivation s = sequentialize(represent(d));
    CHECK(check_derivation(s) == d.conclusion);
    CHECK(sim_distance(d, s, 10).has_value());
  }
}

TEST_CASE("open branches become hypotheses") {
  Linear l = represent_linear(P("(tensor (ax a) (ax b))"));
  // cut the two axioms off and sequentialize the rest
  Linear rest{l.sig, {kL, a, negate(a), kR, kL, b, negate(b), kR}, {l.steps.back()}};
  Derivation d = sequentialize_open(rest);
  CHECK(d.rule == RuleKind::Tensor);
  CHECK(d.premises[0].rule == RuleKind::Hyp);
  CHECK(d.premises[1].rule == RuleKind::Hyp);
  CHECK(represent_linear(d).steps.size() == 1);
}

TEST_CASE("proof structures") {
  using PS = ProofStructure;
  PS ax = to_proof_structure(represent(Derivation::ax(a)));
  CHECK(ax.cells.empty());
  CHECK(ax.count(PS::Link::Kind::Axiom) == 1);
  CHECK(ax.conclusions.size() == 2);

  PS t = to_proof_structure(represent(P("(tensor (ax a) (ax b))")));
  CHECK(t.count(PS::Cell::Tensor) == 1);
  CHECK(t.count(PS::Link::Kind::Axiom) == 2);
  CHECK(t.conclusions.size() == 3);

  Builder tw(Signature::Uncontrolled, {a, b});
  tw.twist(0);
  PS w = to_proof_structure(tw.diagram());
  CHECK(w.cells.empty());
  CHECK(w.conclusions == std::vector<Formula>{b, a});
  CHECK(w.hypotheses == std::vector<Formula>{a, b});
  CHECK(w.count(PS::Link::Kind::Wire) == 2);

  // axiom and cut wires chain into one link
  PS c = to_proof_structure(represent(P("(cut (ax a) (ax a))")));
  CHECK(c.count(PS::Link::Kind::Cut) == 0);
  CHECK(c.count(PS::Link::Kind::Axiom) == 1);
  PS u = to_proof_structure(represent(P("(cut (one) (bot 1 (ax a)))")));
  CHECK(u.count(PS::Link::Kind::Cut) == 1);
  CHECK(u.count(PS::Cell::One) == 1);
  CHECK(u.count(PS::Cell::Bot) == 1);

  std::string text = proof_structure_str(t);
  CHECK(text.rfind("proof-structure 1\n", 0) == 0);
}
