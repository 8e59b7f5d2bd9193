// Acceptance suite: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pd/error.hpp"
#include "pd/permutation.hpp"
#include "pd/rewrite.hpp"
#include "pd/semantics.hpp"
#include "pd/translate.hpp"

using namespace pd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; only the first few are printed.
struct Failures {
  std::size_t count = 0;
  std::vector<std::string> shown;
  void add(const std::string& what) {
    if (++count <= 3) shown.push_back(what);
  }
  std::string str() const {
    std::string s;
    for (const std::string& x : shown) s += "\n      " + x;
    return s;
  }
};

Derivation P(const char* text) { return parse_derivation(text); }

const Formula a = Formula::atom("a"), b = Formula::atom("b");

// ---------------------------------------------------------------------------

Word wires(std::size_t n) {
  Word w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(Formula::atom("x" + std::to_string(i)));
  return w;
}

Diagram random_twists(std::mt19937& rng, std::size_t n, std::size_t gates) {
  Builder bld(Signature::Uncontrolled, wires(n));
  std::uniform_int_distribution<std::size_t> pos(0, n - 2);
  for (std::size_t g = 0; g < gates; ++g) bld.twist(pos(rng));
  return bld.diagram();
}

// sigma in the library convention from the oracle's wire destinations
Permutation perm_of(const Diagram& d) {
  std::vector<std::size_t> dest = oracle::twist_destinations(d), img(dest.size());
  for (std::size_t i = 0; i < dest.size(); ++i) img[dest[i]] = i + 1;
  return Permutation::from_images(img);
}

std::size_t inversions(const Permutation& p) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) n += p.images[i] > p.images[j];
  return n;
}

// A twist word for sigma: a random scramble, then bubble moves into place.
Diagram word_for(std::mt19937& rng, const Permutation& sigma) {
  const std::size_t n = sigma.size();
  Builder bld(Signature::Uncontrolled, wires(n));
  std::vector<std::size_t> arr(n);
  for (std::size_t i = 0; i < n; ++i) arr[i] = i + 1;
  std::uniform_int_distribution<std::size_t> pos(0, n - 2);
  for (std::size_t k = rng() % 4; k > 0; --k) {
    std::size_t i = pos(rng);
    bld.twist(i);
    std::swap(arr[i], arr[i + 1]);
  }
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t j = static_cast<std::size_t>(std::find(arr.begin(), arr.end(), sigma.images[t]) - arr.begin());
    for (; j > t; --j) {
      bld.twist(j - 1);
      std::swap(arr[j - 1], arr[j]);
    }
  }
  return bld.diagram();
}

std::vector<RewriteTrace> g_s_traces;  // criterion 1 traces, checked again by criterion 2

Outcome criterion1() {
  std::mt19937 rng(1001);
  const Polygraph& S = polygraph("S");
  Failures f;
  std::size_t diagrams = 0;
  std::string forms;
  for (std::size_t n = 2; n <= 5; ++n) {
    for (int i = 0; i < 500; ++i) {
      Diagram phi = random_twists(rng, n, 1 + rng() % 10);
      auto [nf, t] = normalize(S, phi);
      const Permutation sigma = perm_of(phi);
      ++diagrams;
      if (perm_of(nf) != sigma) f.add("normal form changes the permutation: " + sigma.str());
      if (gate_count(nf, {Family::Twist}) != inversions(sigma)) f.add("normal form not reduced: " + sigma.str());
      if (canonical(nf) != canonical(canonical_perm_diagram(sigma, phi.input())))
        f.add("not the canonical diagram of " + sigma.str());
      g_s_traces.push_back(std::move(t));
    }
    // every permutation of n points
    std::set<std::string> keys;
    std::vector<std::size_t> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = i + 1;
    std::size_t count = 0;
    do {
      const Permutation sigma = Permutation::from_images(img);
      for (int rep = 0; rep < 2; ++rep) {
        auto [nf, t] = normalize(S, word_for(rng, sigma));
        ++diagrams;
        if (canonical(nf) != canonical(canonical_perm_diagram(sigma, wires(n))))
          f.add("word for " + sigma.str() + " does not reach its canonical diagram");
        if (rep == 0) keys.insert(linear_key(canonical_linear(nf)));
        g_s_traces.push_back(std::move(t));
      }
      ++count;
    } while (std::next_permutation(img.begin(), img.end()));
    if (keys.size() != count) f.add("n=" + std::to_string(n) + ": " + std::to_string(keys.size()) + " normal forms for " +
                                    std::to_string(count) + " permutations");
    forms += (forms.empty() ? "" : "/") + std::to_string(keys.size());
  }
  return {f.count == 0, std::to_string(diagrams) + " diagrams normalized, normal forms per n=2..5: " + forms +
                            " (n! = 2/6/24/120), " + std::to_string(f.count) + " failures" + f.str()};
}

Outcome criterion2() {
  std::size_t steps = 0, violations = 0;
  Failures f;
  const Polygraph& S = polygraph("S");
  const MonotoneInterpretation cs = certificate("S");
  for (const RewriteTrace& t : g_s_traces) {
    DecreaseReport r = check_decrease(S, cs, t);
    steps += r.checked;
    violations += r.violations.size();
    for (const auto& v : r.violations) f.add("S " + v.rule + ": " + v.detail);
  }
  std::mt19937 rng(2002);
  const Polygraph& C = polygraph("MLL_ctrl");
  const MonotoneInterpretation cc = certificate("MLL_ctrl");
  std::size_t ctrl_steps = 0;
  for (int i = 0; i < 500; ++i) {
    Diagram phi = represent(oracle::random_derivation(rng, 10, {"a", "b"}, i % 2 == 0));
    auto t = normalize(C, phi).second;
    DecreaseReport r = check_decrease(C, cc, t);
    ctrl_steps += r.checked;
    violations += r.violations.size();
    for (const auto& v : r.violations) f.add("MLL_ctrl " + v.rule + ": " + v.detail);
  }

  // pinned values
  bool pinned = true;
  Builder tt(Signature::Uncontrolled, {a, b});
  tt.twist(0).twist(0);
  const Diagram id2 = identity(Signature::Uncontrolled, {a, b});
  pinned &= interpret(doubling_interpretation(), tt.diagram()) == std::vector<Affine>{Affine{0, {2, 1}}, Affine{0, {1, 1}}};
  pinned &= compare_strict(cs, tt.diagram(), id2).empty();
  Builder src(Signature::Uncontrolled, {a}), tgt(Signature::Uncontrolled, {a});
  src.one(0).twist(0);
  tgt.one(1);
  pinned &= interpret(cs, src.diagram()) == std::vector<Affine>{Affine{2, {1}}, Affine{1, {0}}};
  pinned &= interpret(cs, tgt.diagram()) == std::vector<Affine>{Affine{0, {1}}, Affine{1, {0}}};
  pinned &= compare_strict(cs, src.diagram(), tgt.diagram()).empty();
  // The printed twist interpretation is not strict at the origin; see README.
  const bool origin_tie = !compare_strict(doubling_interpretation(), tt.diagram(), id2).empty();
  if (!pinned) f.add("pinned inequalities do not hold");

  return {f.count == 0 && pinned,
          std::to_string(steps) + " S steps and " + std::to_string(ctrl_steps) + " MLL_ctrl steps checked on {0..3}^arity, " +
              std::to_string(violations) + " violations; pinned (2x+y,x+y)>(x,y) and (x+2,1)>(x,1): " +
              (pinned ? "hold" : "FAIL") + (origin_tie ? "; printed twist form ties at the origin" : "") + f.str()};
}

Outcome criterion3() {
  auto classes = oracle::closed_controlled_diagrams(5, "a");
  std::size_t total = 0, seqable = 0;
  Failures f;
  for (const auto& level : classes)
    for (const Diagram& d : level) {
      ++total;
      const Word& w = d.output();
      bool shaped = w.size() >= 2 && w.front() == kL && w.back() == kR;
      std::vector<Formula> gamma;
      for (std::size_t i = 1; shaped && i + 1 < w.size(); ++i) {
        if (!w[i].is_formula())
          shaped = false;
        else
          gamma.push_back(w[i].formula());
      }
      const bool proves = shaped && oracle::bf_provable(gamma);
      const bool s = is_sequentializable(d);
      if (s != proves) f.add("disagreement on " + word_str(w));
      if (s) {
        ++seqable;
        try {
          Derivation dv = sequentialize(d);
          if (check_derivation(dv) != gamma || cut_count(dv) != gate_count(d, {Family::Cut}))
            f.add("sequentialization of " + word_str(w) + " proves " + sequent_str(check_derivation(dv)));
        } catch (const Error& e) {
          f.add(std::string("sequentialize threw ") + e.what());
        }
      }
    }
  return {f.count == 0, std::to_string(total) + " interchange classes (<=5 gates, atom a), " + std::to_string(seqable) +
                            " sequentializable, " + std::to_string(f.count) + " disagreements" + f.str()};
}

std::vector<Derivation> hand_corpus() {
  return {
      P("(ax a)"),
      P("(one)"),
      P("(bot 1 (one))"),
      P("(par 1 (ax a))"),
      P("(tensor (ax a) (ax b))"),
      P("(tensor (ax a) (one))"),
      P("(ex [3,2,1] (tensor (ax a) (ax b)))"),
      P("(par 2 (tensor (ax a) (ax b)))"),
      P("(par 1 (par 2 (tensor (tensor (ax a) (ax b)) (ax a))))"),
      P("(par 2 (par 1 (tensor (tensor (ax a) (ax b)) (ax a))))"),
      P("(ex [2,1] (tensor (ex [2,1] (tensor (tensor (ax a) (one)) (one))) (one)))"),
      P("(tensor (ex [2,1] (tensor (ex [2,1] (tensor (ax a) (one))) (one))) (one))"),
      P("(tensor (ex [2,1] (ax a)) (ax a))"),
      P("(ex [3,2,1] (tensor (ex [2,1] (ax a)) (ax a)))"),
      P("(bot 2 (bot 1 (tensor (ax a) (ax b))))"),
      P("(tensor (bot 1 (one)) (par 1 (ax b)))"),
      P("(cut (ax a) (ax a))"),
      P("(cut (ax a) (par 2 (bot 3 (ax a))))"),
      P("(cut (one) (bot 1 (ax a)))"),
      P("(cut (tensor (one) (one)) (par 1 (bot 1 (bot 1 (one)))))"),
      P("(cut (ex [1,3,2] (tensor (ax a) (ax b))) (par 1 (ex [1,3,2] (tensor (ax b^) (ax a^)))))"),
      P("(cut (ex [2,1] (tensor (ax a) (one))) (par 2 (bot 3 (ax a^))))"),
  };
}

Outcome criterion4() {
  std::vector<Derivation> corpus = hand_corpus();
  std::mt19937 rng(4004);
  for (int i = 0; i < 150; ++i) corpus.push_back(oracle::random_derivation(rng, 8, {"a", "b"}, i % 3 == 0));
  Failures f;
  std::size_t ok = 0, worst = 0;
  for (const Derivation& d : corpus) {
    Derivation s = sequentialize(represent(d));
    std::optional<std::size_t> dist = sim_distance(d, s, 10);
    if (dist && check_derivation(s) == d.conclusion) {
      ++ok;
      worst = std::max(worst, *dist);
    } else {
      f.add(to_string(d) + " -> " + to_string(s));
    }
  }
  return {ok == corpus.size(), std::to_string(ok) + "/" + std::to_string(corpus.size()) +
                                   " derivations within 10 steps (largest distance " + std::to_string(worst) + ")" +
                                   f.str()};
}

Outcome criterion5() {
  std::vector<Derivation> corpus;
  for (const Derivation& d : hand_corpus())
    if (cut_count(d) > 0) corpus.push_back(d);
  std::mt19937 rng(5005);
  while (corpus.size() < 300) {
    Derivation d = oracle::random_derivation(rng, 12, {"a", "b"}, true);
    if (cut_count(d) > 0) corpus.push_back(d);
  }
  const Polygraph& sem = polygraph("Sem");
  Failures f;
  std::size_t ok = 0, cut_steps = 0, other_steps = 0;
  for (const Derivation& d : corpus) {
    const std::size_t before = f.count;
    auto [nf, t] = eliminate_cuts(represent(d));
    if (gate_count(nf, {Family::Cut, Family::Big}) != 0) f.add("cut or B gate left in " + to_string(d));
    Derivation cf = sequentialize(nf);
    if (cut_count(cf) != 0 || check_derivation(cf) != d.conclusion) f.add("bad cut-free proof for " + to_string(d));
    Diagram cur = canonical(t.initial);
    for (const TraceStep& st : t.steps) {
      Diagram next = canonical(apply_recorded(sem, cur, st));
      const unsigned long long w0 = cut_weight(cur), w1 = cut_weight(next);
      if (sem.group_of(st.rule) == "cut") {
        ++cut_steps;
        if (!(w1 < w0)) f.add(st.rule + " does not decrease the cut weight in " + to_string(d));
      } else {
        ++other_steps;
        if (w1 != w0) f.add(st.rule + " changes the cut weight in " + to_string(d));
      }
      cur = std::move(next);
    }
    if (cur != canonical(nf)) f.add("trace does not end at the normal form for " + to_string(d));
    ok += f.count == before;
  }
  return {ok == corpus.size(), std::to_string(ok) + "/" + std::to_string(corpus.size()) + " cut derivations; " +
                                   std::to_string(cut_steps) + " cut steps decrease the weight, " +
                                   std::to_string(other_steps) + " MLL_big steps keep it" + f.str()};
}

Outcome criterion6() {
  Builder bld(Signature::Controlled, {a, b, Formula::atom("c"), kR, kL, Formula::atom("d")});
  bld.twist(0).twist(1).twist(0).tensor(2).twist(1).twist(0);
  const Polygraph& p = polygraph("MLL_ctrl");
  std::vector<Application> apps = all_applications(p, bld.diagram());
  if (apps.size() != 2) return {false, std::to_string(apps.size()) + " first steps instead of 2"};
  Diagram x = normalize(p, apps[0].result).first, y = normalize(p, apps[1].result).first;
  const bool irreducible = !apply_once(p, x) && !apply_once(p, y);
  const bool distinct = canonical(x) != canonical(y);
  return {irreducible && distinct && apps[0].rule == "yb" && apps[1].rule == "yb",
          "first steps " + apps[0].rule + ", " + apps[1].rule + "; normal forms " +
              (irreducible ? "irreducible" : "reducible") + " and " + (distinct ? "distinct" : "equal") + " (" +
              std::to_string(gate_count(x, {Family::Twist})) + " and " + std::to_string(gate_count(y, {Family::Twist})) +
              " twists)"};
}

Outcome criterion7() {
  Failures f;
  // property 1
  std::mt19937 rng(7007);
  std::size_t steps = 0, yes = 0;
  std::vector<std::pair<Derivation, Derivation>> related;
  std::vector<Derivation> corpus;
  for (const Derivation& d : hand_corpus())
    if (cut_count(d) > 0) corpus.push_back(d);
  for (int i = 0; i < 600; ++i) corpus.push_back(oracle::random_derivation(rng, 12, {"a", "b"}, true));
  for (const Derivation& d : corpus)
    for (const Path& p : applicable_cuts(d)) {
      ++steps;
      Derivation e = cut_step(d, p);
      EquivResult r = equivalent(d, e, 12, EquivMode::Sem);
      if (r.verdict == Verdict::Yes) {
        ++yes;
        related.emplace_back(d, e);
      } else {
        f.add(std::string(verdict_name(r.verdict)) + " for the cut step at " + path_str(p) + " of " + to_string(d));
      }
    }

  // property 2
  const Derivation x = P("(tensor (ex [2,1] (ax a)) (ax a))");
  const Derivation y = P("(ex [3,2,1] (tensor (ex [2,1] (ax a)) (ax a)))");
  std::size_t nd_yes = 0;
  std::string nd;
  for (std::size_t bound : {0, 4, 12})
    for (EquivMode m : {EquivMode::Sim, EquivMode::Sem}) {
      Verdict v = equivalent(x, y, bound, m).verdict;
      nd_yes += v == Verdict::Yes;
      if (bound == 12) nd += std::string(nd.empty() ? "" : "/") + verdict_name(v);
    }
  if (nd_yes) f.add("the two axiom linkings were identified");

  // property 3: the same context around both members of a related pair
  related.emplace_back(hand_corpus()[10], hand_corpus()[11]);
  std::vector<std::function<Derivation(const Derivation&)>> contexts = {
      [](const Derivation& d) { return Derivation::bot(0, d); },
      [](const Derivation& d) { return Derivation::tensor(d, Derivation::ax(b)); },
      [](const Derivation& d) { return Derivation::tensor(Derivation::ax(b), d); },
      [](const Derivation& d) {
        return d.conclusion.size() >= 2 ? Derivation::par(0, d) : Derivation::bot(1, d);
      },
      [](const Derivation& d) { return Derivation::cut(d, Derivation::ax(negate(d.conclusion.back()))); },
  };
  std::size_t pairs = 0, congruent = 0;
  std::shuffle(related.begin(), related.end() - 1, rng);
  for (std::size_t i = 0; pairs < 20 && i < related.size(); ++i) {
    const auto& [d1, d2] = related[related.size() - 1 - i];
    auto& ctx = contexts[i % contexts.size()];
    ++pairs;
    Verdict v = equivalent(ctx(d1), ctx(d2), 12, EquivMode::Sem).verdict;
    if (v == Verdict::Yes)
      ++congruent;
    else
      f.add(std::string(verdict_name(v)) + " after wrapping " + to_string(d1) + " and " + to_string(d2));
  }

  return {yes == steps && steps > 0 && nd_yes == 0 && congruent == pairs && pairs == 20,
          "property 1: " + std::to_string(yes) + "/" + std::to_string(steps) + " cut steps yes; property 2: never yes (" +
              nd + " at bound 12, sim/sem); property 3: " + std::to_string(congruent) + "/" + std::to_string(pairs) +
              " wrapped pairs yes" + f.str()};
}

// Closed controlled diagram with k axioms tensored in a row, `bots` units ⊥
// added inside the brackets and `twist_pairs` pairs of twists on top.
Diagram wide(std::size_t k, std::size_t bots, std::size_t twist_pairs) {
  std::vector<Layer> layers;
  Layer axioms;
  for (std::size_t i = 0; i < k; ++i) axioms.push_back(Gate{GateType::ax(a)});
  layers.push_back(axioms);
  Layer tensors{Identity{kL}, Identity{a}};
  for (std::size_t i = 0; i + 1 < k; ++i) tensors.push_back(Gate{GateType::tensor(negate(a), a)});
  tensors.push_back(Identity{negate(a)});
  tensors.push_back(Identity{kR});
  if (k > 1) layers.push_back(tensors);
  Diagram d(Signature::Controlled, {}, layers);
  Word w = d.output();
  if (bots) {
    Layer l{Identity{kL}};
    for (std::size_t i = 0; i < bots; ++i) l.push_back(Gate{GateType::bot()});
    for (std::size_t i = 1; i < w.size(); ++i) l.push_back(Identity{w[i]});
    layers.push_back(l);
    w = Diagram(Signature::Controlled, {}, layers).output();
  }
  for (std::size_t t = 0; t < 2 * twist_pairs; ++t) {
    Layer l{Identity{kL}, Gate{GateType::twist(w[1].formula(), w[2].formula())}};
    for (std::size_t i = 3; i < w.size(); ++i) l.push_back(Identity{w[i]});
    layers.push_back(l);
    std::swap(w[1], w[2]);
  }
  return Diagram(Signature::Controlled, {}, layers);
}

Outcome criterion8() {
  std::vector<double> xs, ys;
  std::string pts;
  for (std::size_t boundary : {10, 100, 1000, 10000}) {
    Diagram d = wide(boundary - 3, 0, 0);
    std::size_t n = 0;
    if (!is_sequentializable(d, &n)) return {false, "a wide diagram was rejected"};
    xs.push_back(static_cast<double>(d.output().size()));
    ys.push_back(static_cast<double>(n));
    pts += (pts.empty() ? "" : ", ") + std::to_string(d.output().size()) + ":" + std::to_string(n);
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double r2 = syy == 0 ? 0 : sxy * sxy / (sxx * syy);

  std::set<std::size_t> at_fixed;
  std::string gates;
  for (std::size_t twist_pairs : {0, 45, 495}) {
    Diagram d = wide(4, 3, twist_pairs);  // boundary 10
    std::size_t n = 0;
    is_sequentializable(d, &n);
    at_fixed.insert(n);
    gates += (gates.empty() ? "" : "/") + std::to_string(d.gate_count());
  }
  std::ostringstream r2s;
  r2s.precision(6);
  r2s << r2;
  return {r2 > 0.99 && at_fixed.size() == 1,
          "boundary:comparisons " + pts + ", R^2 = " + r2s.str() + "; boundary 10 with " + gates + " gates: " +
              std::to_string(*at_fixed.begin()) + (at_fixed.size() == 1 ? " comparisons each" : " and others")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"permutation convergence", criterion1}, {"termination certificates", criterion2},
      {"controlled correspondence", criterion3}, {"round trip up to rule permutations", criterion4},
      {"cut elimination", criterion5},          {"non-confluent peak", criterion6},
      {"semantics properties", criterion7},      {"linear-time boundary check", criterion8},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  if (only.count(2)) only.insert(1);  // criterion 2 reuses the traces of criterion 1
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int num = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(num)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (num == 1 && secs >= 30) {
      o.pass = false;
      o.detail += " (over the 30 s budget)";
    }
    if (num == 3 && secs >= 300) {
      o.pass = false;
      o.detail += " (over the 5 min budget)";
    }
    char t[32];
    std::snprintf(t, sizeof t, "%.1fs", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << num << " " << criteria[i].first << " [" << t
              << "]: " << o.detail << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
