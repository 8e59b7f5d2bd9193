#include "oracles.hpp"

#include "pd/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <stdexcept>

namespace oracle {

using namespace pd;

namespace {

std::string key(const Diagram& d) {
  std::string k = std::string(d.signature() == Signature::Controlled ? "c " : "u ") + word_str(d.input()) + "|";
  for (const Layer& l : d.layers()) {
    for (const Slot& s : l) {
      if (auto* id = std::get_if<Identity>(&s))
        k += id->label.str();
      else
        k += std::get<Gate>(s).type.str();
      k += ' ';
    }
    k += '/';
  }
  return k;
}

bool is_gate(const Slot& s) { return std::holds_alternative<Gate>(s); }

std::vector<Layer> drop_identity_layers(std::vector<Layer> layers) {
  std::erase_if(layers, [](const Layer& l) { return std::none_of(l.begin(), l.end(), is_gate); });
  return layers;
}

// Splits layer `li` so that gate number `g` (counting gates only) runs alone,
// either before or after the other gates of the layer.
std::vector<Layer> split(const Diagram& d, std::size_t li, std::size_t g, bool first) {
  Signature sig = d.signature();
  const Layer& layer = d.layers()[li];
  Layer a, b;
  std::size_t gi = 0;
  for (const Slot& s : layer) {
    if (!is_gate(s)) {
      a.push_back(s);
      b.push_back(s);
      continue;
    }
    bool alone = gi++ == g;
    bool in_a = alone == first;
    if (in_a) {
      a.push_back(s);
      for (const WireLabel& w : slot_outputs(s, sig)) b.push_back(Identity{w});
    } else {
      for (const WireLabel& w : slot_inputs(s, sig)) a.push_back(Identity{w});
      b.push_back(s);
    }
  }
  std::vector<Layer> layers = d.layers();
  layers.erase(layers.begin() + li);
  layers.insert(layers.begin() + li, {a, b});
  return drop_identity_layers(std::move(layers));
}

struct Token {
  bool gate;
  std::size_t slot;
  std::size_t first, count;  // output wires
};

// All ways of merging layers li and li+1 into one layer.
std::vector<std::vector<Layer>> merges(const Diagram& d, std::size_t li) {
  Signature sig = d.signature();
  const Layer& A = d.layers()[li];
  const Layer& B = d.layers()[li + 1];
  std::vector<Token> toks;
  std::size_t wire = 0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    std::size_t n = slot_outputs(A[i], sig).size();
    toks.push_back({is_gate(A[i]), i, wire, n});
    wire += n;
  }
  auto token_of = [&](std::size_t w) {
    for (std::size_t t = 0; t < toks.size(); ++t)
      if (toks[t].count && w >= toks[t].first && w < toks[t].first + toks[t].count) return t;
    return toks.size();
  };
  // For every B slot: either a set of consumed tokens or a range of insertion points.
  struct Place {
    std::vector<std::size_t> toks;  // consumed tokens, consecutive
    std::size_t lo = 0, hi = 0;     // for 0-input gates: insert before token t in [lo, hi]
    bool point = false;
  };
  std::vector<Place> places;
  std::size_t pos = 0;
  for (const Slot& s : B) {
    std::size_t in = slot_inputs(s, sig).size();
    Place p;
    if (in == 0) {
      p.point = true;
      std::size_t left = pos == 0 ? toks.size() : token_of(pos - 1);
      std::size_t right = pos == wire ? toks.size() : token_of(pos);
      if (left != toks.size() && left == right) return {};
      p.lo = left == toks.size() ? 0 : left + 1;
      p.hi = right == toks.size() ? toks.size() : right;
      if (pos == wire) p.hi = toks.size();
      if (pos == 0) p.lo = 0;
      if (p.lo > p.hi) return {};
    } else {
      for (std::size_t w = pos; w < pos + in; ++w) {
        std::size_t t = token_of(w);
        if (is_gate(s) && toks[t].gate) return {};
        if (p.toks.empty() || p.toks.back() != t) p.toks.push_back(t);
      }
      for (std::size_t j = 1; j < p.toks.size(); ++j)
        if (p.toks[j] != p.toks[j - 1] + 1) {
          // tokens in between must be empty, which blocks the merge
          return {};
        }
      if (!is_gate(s) && toks[p.toks[0]].gate) {
        // identity over a gate output: keep the A gate; handled below
      }
    }
    places.push_back(p);
    pos += in;
  }
  // A B-identity over an A-gate output leaves the A gate in place. A B-gate
  // over identity tokens replaces them. Build the merged layer for every
  // monotone choice of insertion points.
  std::vector<std::vector<Layer>> out;
  std::vector<std::size_t> choice(B.size(), 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t bi, std::size_t min_pt) {
    if (bi == B.size()) {
      Layer m;
      std::vector<char> emitted(toks.size(), 0);
      std::vector<std::vector<std::size_t>> before(toks.size() + 1);
      std::vector<std::size_t> owner(toks.size(), B.size());
      for (std::size_t j = 0; j < B.size(); ++j) {
        if (places[j].point)
          before[choice[j]].push_back(j);
        else if (is_gate(B[j]))
          for (std::size_t t : places[j].toks) owner[t] = j;
      }
      for (std::size_t t = 0; t <= toks.size(); ++t) {
        for (std::size_t j : before[t]) m.push_back(B[j]);
        if (t == toks.size()) break;
        if (owner[t] != B.size()) {
          if (!emitted[t]) {
            m.push_back(B[owner[t]]);
            for (std::size_t u : places[owner[t]].toks) emitted[u] = 1;
          }
        } else {
          m.push_back(A[toks[t].slot]);
        }
      }
      std::vector<Layer> layers = d.layers();
      layers.erase(layers.begin() + li, layers.begin() + li + 2);
      layers.insert(layers.begin() + li, m);
      out.push_back(drop_identity_layers(std::move(layers)));
      return;
    }
    if (!places[bi].point) {
      rec(bi + 1, places[bi].toks.empty() ? min_pt : std::max(min_pt, places[bi].toks.back() + 1));
      return;
    }
    for (std::size_t c = std::max(places[bi].lo, min_pt); c <= places[bi].hi; ++c) {
      choice[bi] = c;
      rec(bi + 1, c);
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

std::vector<Diagram> layer_shuffle_closure(const Diagram& d0) {
  Diagram start(d0.signature(), d0.input(), drop_identity_layers(d0.layers()));
  std::map<std::string, Diagram> seen;
  std::deque<Diagram> queue{start};
  seen.emplace(key(start), start);
  auto visit = [&](std::vector<Layer> layers, const Diagram& from) {
    try {
      Diagram nd(from.signature(), from.input(), std::move(layers));
      if (nd.output() != from.output()) return;
      if (seen.emplace(key(nd), nd).second) queue.push_back(nd);
    } catch (const Error&) {
    }
  };
  while (!queue.empty()) {
    Diagram d = queue.front();
    queue.pop_front();
    for (std::size_t li = 0; li < d.layers().size(); ++li) {
      std::size_t gates = std::count_if(d.layers()[li].begin(), d.layers()[li].end(), is_gate);
      if (gates >= 2)
        for (std::size_t g = 0; g < gates; ++g) {
          visit(split(d, li, g, true), d);
          visit(split(d, li, g, false), d);
        }
      if (li + 1 < d.layers().size())
        for (auto& m : merges(d, li)) visit(std::move(m), d);
    }
  }
  std::vector<Diagram> out;
  for (auto& [k, v] : seen) out.push_back(v);
  return out;
}

namespace {

using WireId = std::pair<std::size_t, std::size_t>;  // (step id or npos, port)
constexpr std::size_t kInput = static_cast<std::size_t>(-1);

std::vector<WireId> run_ids(const std::vector<WireId>& w0, const pd::Step& s, std::size_t id, pd::Signature sig,
                            std::vector<WireId>* consumed = nullptr) {
  std::vector<WireId> w = w0;
  std::size_t in = s.type.in_arity(sig), out = s.type.out_arity(sig);
  if (consumed) consumed->assign(w.begin() + s.offset, w.begin() + s.offset + in);
  w.erase(w.begin() + s.offset, w.begin() + s.offset + in);
  std::vector<WireId> fresh;
  for (std::size_t j = 0; j < out; ++j) fresh.push_back({id, j});
  w.insert(w.begin() + s.offset, fresh.begin(), fresh.end());
  return w;
}

std::vector<WireId> initial_ids(const pd::Word& input) {
  std::vector<WireId> w;
  for (std::size_t i = 0; i < input.size(); ++i) w.push_back({kInput, i});
  return w;
}

// Every way to run order[i+1] before order[i] with the same overall effect.
std::vector<Order> swaps(const pd::Word& input, pd::Signature sig, const Order& order, std::size_t i) {
  std::vector<WireId> w = initial_ids(input);
  for (std::size_t k = 0; k < i; ++k) w = run_ids(w, order[k].step, order[k].id, sig);
  const TaggedStep& x = order[i];
  const TaggedStep& y = order[i + 1];
  std::vector<WireId> cx, cy;
  std::vector<WireId> w1 = run_ids(w, x.step, x.id, sig, &cx);
  std::vector<WireId> w2 = run_ids(w1, y.step, y.id, sig, &cy);
  std::vector<Order> out;
  std::size_t in_x = x.step.type.in_arity(sig), in_y = y.step.type.in_arity(sig);
  for (std::size_t p = 0; p + in_y <= w.size(); ++p) {
    if (!std::equal(cy.begin(), cy.end(), w.begin() + p)) continue;
    std::vector<WireId> v1 = run_ids(w, {y.step.type, p}, y.id, sig);
    for (std::size_t q = 0; q + in_x <= v1.size(); ++q) {
      if (!std::equal(cx.begin(), cx.end(), v1.begin() + q)) continue;
      if (run_ids(v1, {x.step.type, q}, x.id, sig) != w2) continue;
      Order o = order;
      o[i] = {{y.step.type, p}, y.id};
      o[i + 1] = {{x.step.type, q}, x.id};
      out.push_back(std::move(o));
    }
  }
  return out;
}

std::string order_key(const Order& o) {
  std::string k;
  for (const TaggedStep& t : o) k += std::to_string(t.id) + ":" + std::to_string(t.step.offset) + ";";
  return k;
}

}  // namespace

bool swap_by_wires(const pd::Word& input, pd::Signature sig, Order& order, std::size_t i) {
  auto v = swaps(input, sig, order, i);
  if (v.empty()) return false;
  order = v.front();
  return true;
}

std::vector<Order> all_orders(const Linear& l) {
  Order start;
  for (std::size_t i = 0; i < l.steps.size(); ++i) start.push_back({l.steps[i], i});
  std::map<std::string, Order> seen{{order_key(start), start}};
  std::deque<Order> queue{start};
  while (!queue.empty()) {
    Order o = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i + 1 < o.size(); ++i)
      for (Order& n : swaps(l.input, l.sig, o, i))
        if (seen.emplace(order_key(n), n).second) queue.push_back(n);
  }
  std::vector<Order> out;
  for (auto& [k, v] : seen) out.push_back(v);
  return out;
}

std::set<std::pair<std::vector<std::size_t>, std::string>> brute_sites(const Diagram& phi, const Diagram& schema) {
  std::set<std::pair<std::vector<std::size_t>, std::string>> sites;
  Linear base = linearize(canonical(phi));
  Linear pat = linearize(canonical(schema));
  std::size_t m = pat.steps.size();
  if (m == 0 || base.sig != pat.sig) return sites;
  auto porders = all_orders(pat);
  for (const Order& o : all_orders(base)) {
    Word w = base.input;
    for (std::size_t s = 0; s + m <= o.size(); ++s) {
      for (const Order& po : porders) {
        std::ptrdiff_t d = static_cast<std::ptrdiff_t>(o[s].step.offset) - static_cast<std::ptrdiff_t>(po[0].step.offset);
        if (d < 0) continue;
        Substitution sub;
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) {
          ok = static_cast<std::ptrdiff_t>(o[s + j].step.offset) == d + static_cast<std::ptrdiff_t>(po[j].step.offset) &&
               unify(po[j].step.type, o[s + j].step.type, sub);
        }
        if (!ok || static_cast<std::size_t>(d) + pat.input.size() > w.size()) continue;
        for (std::size_t i = 0; i < pat.input.size() && ok; ++i) ok = unify(pat.input[i], w[d + i], sub);
        if (!ok) continue;
        std::vector<std::size_t> ids;
        for (std::size_t j = 0; j < m; ++j) ids.push_back(o[s + j].id);
        std::sort(ids.begin(), ids.end());
        sites.insert({ids, sub.str()});
      }
      apply_step(w, o[s].step, base.sig);
    }
  }
  return sites;
}

Diagram random_diagram(std::mt19937& rng, Signature sig, std::size_t max_gates, const std::vector<std::string>& atoms,
                       std::size_t max_input) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<Formula> pool;
  for (const std::string& a : atoms) {
    pool.push_back(Formula::atom(a));
    pool.push_back(Formula::atom(a, true));
  }
  Word input;
  std::size_t len = pick(max_input + 1);
  for (std::size_t i = 0; i < len; ++i) input.push_back(pool[pick(pool.size())]);
  Builder b(sig, input);
  std::size_t gates = pick(max_gates + 1);
  bool ctrl = sig == Signature::Controlled;
  for (std::size_t g = 0; g < gates; ++g) {
    const Word& w = b.word();
    std::vector<std::function<void()>> moves;
    for (std::size_t i = 0; i <= w.size(); ++i) {
      Formula a = pool[pick(pool.size())];
      moves.push_back([&b, a, i] { b.ax(a, i); });
      moves.push_back([&b, i] { b.one(i); });
      moves.push_back([&b, i] { b.bot(i); });
    }
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i].is_formula() && w[i + 1].is_formula()) {
        moves.push_back([&b, i] { b.twist(i); });
        moves.push_back([&b, i] { b.par(i); });
        if (!ctrl) {
          moves.push_back([&b, i] { b.tensor(i); });
          if (w[i + 1].formula() == negate(w[i].formula())) moves.push_back([&b, i] { b.cut(i); });
        }
      }
      if (ctrl && i + 3 < w.size() && w[i].is_formula() && w[i + 1] == kR && w[i + 2] == kL && w[i + 3].is_formula()) {
        moves.push_back([&b, i] { b.tensor(i); });
        if (w[i + 3].formula() == negate(w[i].formula())) moves.push_back([&b, i] { b.cut(i); });
      }
    }
    // favour binary gates so that diagrams are not only leaves
    std::vector<std::function<void()>> binary(moves.begin() + 3 * (w.size() + 1), moves.end());
    if (!binary.empty() && pick(3) != 0)
      binary[pick(binary.size())]();
    else
      moves[pick(moves.size())]();
  }
  return b.diagram();
}

namespace {

pd::Permutation random_perm(std::mt19937& rng, std::size_t n) {
  pd::Permutation p = pd::Permutation::identity(n);
  std::shuffle(p.images.begin(), p.images.end(), rng);
  return p;
}

// Exchange moving the formula at i to the front or to the back.
pd::Derivation move_to(pd::Derivation d, std::size_t i, bool back) {
  std::size_t n = d.conclusion.size();
  std::vector<std::size_t> img;
  if (!back) img.push_back(i + 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) img.push_back(j + 1);
  if (back) img.push_back(i + 1);
  return pd::exchange_fused(pd::Permutation::from_images(img), std::move(d));
}

}  // namespace

pd::Derivation random_derivation(std::mt19937& rng, std::size_t max_rules, const std::vector<std::string>& atoms,
                                 bool with_cuts) {
  using pd::Derivation;
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::size_t target = 1 + pick(std::max<std::size_t>(max_rules, 1));
  std::vector<Derivation> pool;
  auto leaf = [&]() {
    if (pick(4) == 0) return Derivation::one();
    Formula f = Formula::atom(atoms[pick(atoms.size())], pick(2) == 1);
    return Derivation::ax(f);
  };
  for (int i = 0; i < 3; ++i) pool.push_back(leaf());
  for (int iter = 0; iter < 400; ++iter) {
    Derivation best = pool.front();
    for (const Derivation& d : pool)
      if (pd::rule_count(d) > pd::rule_count(best)) best = d;
    if (pd::rule_count(best) >= target) break;
    std::size_t action = pick(10);
    Derivation d = pool[pick(pool.size())];
    std::size_t rc = pd::rule_count(d);
    if (action == 0) {
      pool.push_back(leaf());
    } else if (action <= 2 && rc + 1 <= target) {
      pool.push_back(Derivation::bot(pick(d.conclusion.size() + 1), d));
    } else if (action <= 4 && rc + 1 <= target && d.conclusion.size() >= 2) {
      pool.push_back(Derivation::par(pick(d.conclusion.size() - 1), d));
    } else if (action == 5 && d.conclusion.size() >= 2) {
      pool.push_back(pd::exchange_fused(random_perm(rng, d.conclusion.size()), d));
    } else {
      Derivation e = pool[pick(pool.size())];
      if (rc + pd::rule_count(e) + 1 > target) continue;
      if (with_cuts && pick(2) == 0) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < d.conclusion.size(); ++i)
          for (std::size_t j = 0; j < e.conclusion.size(); ++j)
            if (e.conclusion[j] == pd::negate(d.conclusion[i])) pairs.push_back({i, j});
        if (pairs.empty()) continue;
        auto [i, j] = pairs[pick(pairs.size())];
        Derivation c = Derivation::cut(move_to(d, i, true), move_to(e, j, false));
        if (!c.conclusion.empty()) pool.push_back(c);
      } else {
        pool.push_back(Derivation::tensor(move_to(d, pick(d.conclusion.size()), true),
                                          move_to(e, pick(e.conclusion.size()), false)));
      }
    }
  }
  Derivation best = pool.front();
  for (const Derivation& d : pool)
    if (pd::rule_count(d) > pd::rule_count(best) && pd::rule_count(d) <= target) best = d;
  if (pick(3) == 0 && best.conclusion.size() >= 2)
    best = pd::exchange_fused(random_perm(rng, best.conclusion.size()), best);
  return best;
}

std::vector<std::size_t> twist_destinations(const Diagram& d) {
  // origin[k] = input position of the wire now at position k
  std::vector<std::size_t> origin(d.input().size());
  for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = i;
  for (const Layer& layer : d.layers()) {
    std::vector<std::size_t> next;
    std::size_t k = 0;
    for (const Slot& s : layer) {
      if (std::holds_alternative<Identity>(s)) {
        next.push_back(origin[k++]);
        continue;
      }
      if (std::get<Gate>(s).type.family != pd::Family::Twist) throw std::logic_error("not a twist diagram");
      next.push_back(origin[k + 1]);
      next.push_back(origin[k]);
      k += 2;
    }
    origin = next;
  }
  std::vector<std::size_t> dest(origin.size());
  for (std::size_t k = 0; k < origin.size(); ++k) dest[origin[k]] = k;
  return dest;
}

namespace {

std::string seq_key(const std::vector<Formula>& s) {
  std::string k;
  for (const Formula& f : s) k += f.str() + ",";
  return k;
}

bool provable_sorted(const std::vector<Formula>& s, std::map<std::string, bool>& memo) {
  const std::string key = seq_key(s);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  memo[key] = false;  // cycles cannot occur; every rule shrinks the sequent
  auto rest_without = [&](std::size_t i) {
    std::vector<Formula> r = s;
    r.erase(r.begin() + static_cast<std::ptrdiff_t>(i));
    return r;
  };
  auto sorted = [](std::vector<Formula> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  bool ok = false;
  if (s.size() == 2 && s[0].is_atom() && s[1] == pd::negate(s[0])) ok = true;
  if (s.size() == 1 && s[0].kind() == Formula::Kind::One) ok = true;
  for (std::size_t i = 0; i < s.size() && !ok; ++i) {
    if (i > 0 && s[i] == s[i - 1]) continue;
    switch (s[i].kind()) {
      case Formula::Kind::Bot: ok = provable_sorted(rest_without(i), memo); break;
      case Formula::Kind::Par: {
        std::vector<Formula> r = rest_without(i);
        r.push_back(s[i].left());
        r.push_back(s[i].right());
        ok = provable_sorted(sorted(r), memo);
        break;
      }
      case Formula::Kind::Tensor: {
        std::vector<Formula> r = rest_without(i);
        for (std::size_t mask = 0; mask < (std::size_t{1} << r.size()) && !ok; ++mask) {
          std::vector<Formula> g{s[i].left()}, h{s[i].right()};
          for (std::size_t j = 0; j < r.size(); ++j) (mask >> j & 1 ? g : h).push_back(r[j]);
          ok = provable_sorted(sorted(g), memo) && provable_sorted(sorted(h), memo);
        }
        break;
      }
      default: break;
    }
  }
  memo[key] = ok;
  return ok;
}

}  // namespace

bool bf_provable(std::vector<Formula> sequent) {
  static std::map<std::string, bool> memo;
  std::sort(sequent.begin(), sequent.end());
  return provable_sorted(sequent, memo);
}

std::vector<std::vector<Diagram>> closed_controlled_diagrams(std::size_t max_gates, const std::string& atom) {
  const Formula a = Formula::atom(atom);
  std::vector<std::vector<Diagram>> out(max_gates + 1);
  std::vector<Linear> frontier{Linear{Signature::Controlled, {}, {}}};
  out[0].push_back(pd::to_layers(frontier[0]));
  for (std::size_t g = 1; g <= max_gates; ++g) {
    std::set<std::string> seen;
    std::vector<Linear> next;
    for (const Linear& l : frontier) {
      const Word w = pd::output_word(l);
      std::vector<pd::Step> moves;
      for (std::size_t i = 0; i <= w.size(); ++i) {
        moves.push_back({pd::GateType::ax(a), i});
        moves.push_back({pd::GateType::ax(pd::negate(a)), i});
        moves.push_back({pd::GateType::one(), i});
        moves.push_back({pd::GateType::bot(), i});
      }
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (w[i].is_formula() && w[i + 1].is_formula()) {
          moves.push_back({pd::GateType::par(w[i].formula(), w[i + 1].formula()), i});
          moves.push_back({pd::GateType::twist(w[i].formula(), w[i + 1].formula()), i});
        }
        if (i + 3 < w.size() && w[i].is_formula() && w[i + 1] == pd::kR && w[i + 2] == pd::kL &&
            w[i + 3].is_formula()) {
          moves.push_back({pd::GateType::tensor(w[i].formula(), w[i + 3].formula()), i});
          if (w[i + 3].formula() == pd::negate(w[i].formula()))
            moves.push_back({pd::GateType::cut(w[i].formula()), i});
        }
      }
      for (const pd::Step& st : moves) {
        Linear m = l;
        m.steps.push_back(st);
        Linear c = pd::canonical_linear(m);
        if (seen.insert(pd::linear_key(c)).second) next.push_back(std::move(c));
      }
    }
    for (const Linear& l : next) out[g].push_back(pd::to_layers(l));
    frontier = std::move(next);
  }
  return out;
}

}  // namespace oracle
