#include "pd/translate.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "pd/error.hpp"
#include "pd/permutation.hpp"

namespace pd {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

struct Frag {
  Linear lin;
  Word out;

  void push(Step s) {
    apply_step(out, s, lin.sig);
    lin.steps.push_back(std::move(s));
  }
};

Frag rep(const Derivation& d, Signature sig) {
  const bool c = sig == Signature::Controlled;
  const std::size_t off = c ? 1 : 0;
  Frag f;
  f.lin.sig = sig;
  switch (d.rule) {
    case RuleKind::Ax: f.push({GateType::ax(d.a), 0}); return f;
    case RuleKind::One: f.push({GateType::one(), 0}); return f;
    case RuleKind::Hyp: {
      if (c) f.lin.input.push_back(kL);
      for (const Formula& x : d.conclusion) f.lin.input.push_back(x);
      if (c) f.lin.input.push_back(kR);
      f.out = f.lin.input;
      return f;
    }
    case RuleKind::Bot:
      f = rep(d.premises[0], sig);
      f.push({GateType::bot(), d.pos + off});
      return f;
    case RuleKind::Par: {
      f = rep(d.premises[0], sig);
      const Sequent& p = d.premises[0].conclusion;
      f.push({GateType::par(p[d.pos], p[d.pos + 1]), d.pos + off});
      return f;
    }
    case RuleKind::Exchange:
      f = rep(d.premises[0], sig);
      for (std::size_t o : canonical_twist_offsets(d.perm)) {
        std::size_t at = o + off;
        f.push({GateType::twist(f.out[at].formula(), f.out[at + 1].formula()), at});
      }
      return f;
    case RuleKind::Tensor:
    case RuleKind::Cut: {
      Frag l = rep(d.premises[0], sig), r = rep(d.premises[1], sig);
      f.lin.input = l.lin.input;
      f.lin.input.insert(f.lin.input.end(), r.lin.input.begin(), r.lin.input.end());
      f.out = f.lin.input;
      for (const Step& s : l.lin.steps) f.push(s);
      const std::size_t shift = l.out.size();
      for (const Step& s : r.lin.steps) f.push({s.type, s.offset + shift});
      const std::size_t at = shift - 1 - off;
      const Formula& a = f.out[at].formula();
      if (d.rule == RuleKind::Tensor)
        f.push({GateType::tensor(a, d.premises[1].conclusion.front()), at});
      else
        f.push({GateType::cut(a), at});
      return f;
    }
  }
  fail(Errc::Contract, "unknown rule");
}

// ---------------------------------------------------------------------------

struct UnionFind {
  std::vector<std::size_t> parent;
  std::size_t make() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Splits of a word into sheaves L .. R; empty when it is not such a sequence.
std::vector<std::pair<std::size_t, std::size_t>> sheaves(const Word& w) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < w.size()) {
    if (w[i] != kL) return {};
    std::size_t j = i + 1;
    while (j < w.size() && w[j].is_formula()) ++j;
    if (j == w.size() || w[j] != kR) return {};
    out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

std::size_t big_split(const GateType& g) { return g.w.size() + 2; }

Derivation seq(const Linear& l);

// Splits the steps of `l` (the part above a tensor or cut acting at
// `offset`) into the branch left of the R·L inputs and the branch right of it.
std::pair<Linear, Linear> split(const Linear& l, std::size_t offset) {
  UnionFind uf;
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < l.input.size(); ++i) ids.push_back(uf.make());
  auto in_sheaves = sheaves(l.input);
  if (!l.input.empty() && in_sheaves.empty()) fail(Errc::MalformedBranch, "input is not a sequence of sheaves");
  for (auto [a, b] : in_sheaves)
    for (std::size_t i = a; i < b; ++i) uf.unite(ids[i], ids[b]);

  const Signature sig = l.sig;
  std::vector<std::size_t> rep(l.steps.size(), npos);
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> big_in(l.steps.size());
  for (std::size_t k = 0; k < l.steps.size(); ++k) {
    const Step& s = l.steps[k];
    const std::size_t ar = s.type.in_arity(sig);
    std::vector<std::size_t> ins(ids.begin() + s.offset, ids.begin() + s.offset + ar), outs;
    if (s.type.family == Family::Big) {
      std::size_t m = big_split(s.type);
      big_in[k].first.assign(ins.begin(), ins.begin() + m);
      big_in[k].second.assign(ins.begin() + m, ins.end());
      outs = big_in[k].second;
      outs.insert(outs.end(), big_in[k].first.begin(), big_in[k].first.end());
    } else {
      for (std::size_t j = 0; j < s.type.out_arity(sig); ++j) outs.push_back(uf.make());
      std::vector<std::size_t> all = ins;
      all.insert(all.end(), outs.begin(), outs.end());
      for (std::size_t x : all) uf.unite(x, all.front());
      rep[k] = all.empty() ? npos : all.front();
    }
    ids.erase(ids.begin() + s.offset, ids.begin() + s.offset + ar);
    ids.insert(ids.begin() + s.offset, outs.begin(), outs.end());
  }

  Word before = output_word(l);
  auto regions = sheaves(before);
  if (regions.size() != 2 || regions[0].second != offset + 1)
    fail(Errc::MalformedBranch, "a split needs exactly two regions around the gate, got '" + word_str(before) + "'");
  std::set<std::size_t> left, right;
  for (std::size_t i = 0; i < ids.size(); ++i) (i <= offset + 1 ? left : right).insert(uf.find(ids[i]));
  for (std::size_t c : left)
    if (right.count(c)) fail(Errc::MalformedBranch, "the two premises of a split are connected");
  auto side = [&](std::size_t wire) -> int {
    std::size_t c = uf.find(wire);
    if (left.count(c)) return 0;
    if (right.count(c)) return 1;
    fail(Errc::MalformedBranch, "a step belongs to neither premise");
  };
  auto sheaf_side = [&](const std::vector<std::size_t>& ws) {
    int s = side(ws.front());
    for (std::size_t w : ws)
      if (side(w) != s) fail(Errc::MalformedBranch, "a B-gate sheaf straddles the split");
    return s;
  };

  // step -> 0 left, 1 right, 2 dropped B-gate
  std::vector<int> where(l.steps.size());
  for (std::size_t k = 0; k < l.steps.size(); ++k) {
    if (l.steps[k].type.family == Family::Big) {
      int a = sheaf_side(big_in[k].first), b = sheaf_side(big_in[k].second);
      where[k] = a == b ? a : 2;
    } else {
      where[k] = side(rep[k]);
    }
  }

  // replay, computing branch-local offsets
  std::pair<Linear, Linear> out{Linear{sig, {}, {}}, Linear{sig, {}, {}}};
  Linear* br[2] = {&out.first, &out.second};
  ids.clear();
  std::vector<int> wside;
  for (std::size_t i = 0; i < l.input.size(); ++i) {
    // input wire ids were made first, so id i is input i
    wside.push_back(side(i));
    br[wside.back()]->input.push_back(l.input[i]);
  }
  for (std::size_t k = 0; k < l.steps.size(); ++k) {
    const Step& s = l.steps[k];
    const std::size_t ar = s.type.in_arity(sig);
    std::vector<int> outs;
    if (where[k] == 2 || s.type.family == Family::Big) {
      std::size_t m = big_split(s.type);
      outs.assign(wside.begin() + s.offset + m, wside.begin() + s.offset + ar);
      outs.insert(outs.end(), wside.begin() + s.offset, wside.begin() + s.offset + m);
    } else {
      outs.assign(s.type.out_arity(sig), where[k]);
    }
    if (where[k] != 2) {
      std::size_t local = static_cast<std::size_t>(std::count(wside.begin(), wside.begin() + s.offset, where[k]));
      br[where[k]]->steps.push_back({s.type, local});
    }
    wside.erase(wside.begin() + s.offset, wside.begin() + s.offset + ar);
    wside.insert(wside.begin() + s.offset, outs.begin(), outs.end());
  }
  return out;
}

Derivation seq(const Linear& l) {
  if (l.steps.empty()) {
    auto sh = sheaves(l.input);
    if (sh.size() != 1) fail(Errc::MalformedBranch, "open branch '" + word_str(l.input) + "' is not one sheaf");
    Sequent s;
    for (std::size_t i = 1; i + 1 < l.input.size(); ++i) s.push_back(l.input[i].formula());
    return Derivation::hyp(std::move(s));
  }
  const Step& s = l.steps.back();
  Linear rest{l.sig, l.input, {l.steps.begin(), l.steps.end() - 1}};
  switch (s.type.family) {
    case Family::Twist: {
      Derivation d = seq(rest);
      std::size_t n = d.conclusion.size();
      if (s.offset == 0 || s.offset + 1 > n) fail(Errc::MalformedBranch, "twist outside the sequent");
      return exchange_fused(Permutation::transposition(n, s.offset), std::move(d));
    }
    case Family::Par: return Derivation::par(s.offset - 1, seq(rest));
    case Family::Bot: return Derivation::bot(s.offset - 1, seq(rest));
    case Family::Ax:
    case Family::One:
      if (!rest.steps.empty() || !rest.input.empty())
        fail(Errc::MalformedBranch, std::string(family_name(s.type.family)) + " gate is not alone in its branch");
      return s.type.family == Family::Ax ? Derivation::ax(s.type.a) : Derivation::one();
    case Family::Tensor:
    case Family::Cut: {
      auto [lb, rb] = split(rest, s.offset);
      Derivation dl = seq(lb), dr = seq(rb);
      return s.type.family == Family::Tensor ? Derivation::tensor(std::move(dl), std::move(dr))
                                             : Derivation::cut(std::move(dl), std::move(dr));
    }
    case Family::Big: fail(Errc::MalformedBranch, "a B-gate is the bottommost gate");
  }
  fail(Errc::Contract, "unknown gate family");
}

}  // namespace

Linear represent_linear(const Derivation& d, Signature sig) { return rep(d, sig).lin; }

Diagram represent(const Derivation& d, Signature sig) { return to_layers(represent_linear(d, sig)); }

bool is_sequentializable(const Diagram& phi, std::size_t* comparisons) {
  std::size_t n = 0;
  bool ok = phi.signature() == Signature::Controlled && phi.input().empty();
  const Word& w = phi.output();
  if (ok) {
    ok = w.size() >= 2;
    for (std::size_t i = 0; ok && i < w.size(); ++i) {
      ++n;
      if (i == 0)
        ok = w[i] == kL;
      else if (i + 1 == w.size())
        ok = w[i] == kR;
      else
        ok = w[i].is_formula();
    }
  }
  if (comparisons) *comparisons = n;
  return ok;
}

Derivation sequentialize(const Diagram& phi) {
  if (!is_sequentializable(phi))
    fail(Errc::NotSequentializable, "boundary " + word_str(phi.input()) + " -> " + word_str(phi.output()));
  return seq(canonical_linear(phi));
}

Derivation sequentialize_open(const Linear& l) {
  if (l.sig != Signature::Controlled) fail(Errc::NotSequentializable, "uncontrolled diagram");
  auto out = sheaves(output_word(l));
  if (out.size() != 1) fail(Errc::NotSequentializable, "output is not a single sheaf");
  return seq(l);
}

// ---------------------------------------------------------------------------

std::size_t ProofStructure::count(Cell c) const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [&](const Node& n) { return n.cell == c; }));
}

std::size_t ProofStructure::count(Link::Kind k) const {
  return static_cast<std::size_t>(std::count_if(links.begin(), links.end(), [&](const Link& l) { return l.kind == k; }));
}

namespace {

using End = ProofStructure::End;

struct Hop {
  enum class Kind { None, End, Pass, Partner } kind = Kind::None;
  End end{End::Kind::Conclusion, 0, 0};
  std::size_t wire = npos;
};

}  // namespace

ProofStructure to_proof_structure(const Diagram& phi) {
  ProofStructure ps;
  const Signature sig = phi.signature();
  Linear l = linearize(phi);
  std::vector<Hop> up, down;
  std::vector<Formula> label;
  auto fresh = [&](const Formula& f) {
    up.emplace_back();
    down.emplace_back();
    label.push_back(f);
    return up.size() - 1;
  };
  // word positions hold wire ids, npos for control wires
  std::vector<std::size_t> ids;
  for (const WireLabel& x : l.input) {
    if (x.is_control()) {
      ids.push_back(npos);
      continue;
    }
    std::size_t w = fresh(x.formula());
    up[w] = {Hop::Kind::End, {End::Kind::Hypothesis, ps.hypotheses.size(), 0}, npos};
    ps.hypotheses.push_back(x.formula());
    ids.push_back(w);
  }
  for (const Step& s : l.steps) {
    const std::size_t ar = s.type.in_arity(sig);
    Word in_lbl = s.type.inputs(sig), out_lbl = s.type.outputs(sig);
    std::vector<std::size_t> ins(ids.begin() + s.offset, ids.begin() + s.offset + ar), fins;
    for (std::size_t w : ins)
      if (w != npos) fins.push_back(w);
    std::vector<std::size_t> outs;
    switch (s.type.family) {
      case Family::Twist:
      case Family::Big: {
        // wires pass through; outputs are a permutation of the inputs
        std::vector<std::size_t> perm;
        if (s.type.family == Family::Twist) {
          perm = {ins[1], ins[0]};
        } else {
          std::size_t m = big_split(s.type);
          perm.assign(ins.begin() + m, ins.end());
          perm.insert(perm.end(), ins.begin(), ins.begin() + m);
        }
        for (std::size_t w : perm) {
          if (w == npos) {
            outs.push_back(npos);
            continue;
          }
          std::size_t n = fresh(label[w]);
          down[w] = {Hop::Kind::Pass, {}, n};
          up[n] = {Hop::Kind::Pass, {}, w};
          outs.push_back(n);
        }
        break;
      }
      case Family::Ax: {
        std::vector<std::size_t> pair;
        for (const WireLabel& x : out_lbl) {
          if (x.is_control()) {
            outs.push_back(npos);
            continue;
          }
          pair.push_back(fresh(x.formula()));
          outs.push_back(pair.back());
        }
        up[pair[0]] = {Hop::Kind::Partner, {}, pair[1]};
        up[pair[1]] = {Hop::Kind::Partner, {}, pair[0]};
        break;
      }
      case Family::Cut:
        down[fins[0]] = {Hop::Kind::Partner, {}, fins[1]};
        down[fins[1]] = {Hop::Kind::Partner, {}, fins[0]};
        break;
      default: {
        ProofStructure::Cell cell = s.type.family == Family::Tensor ? ProofStructure::Cell::Tensor
                                    : s.type.family == Family::Par  ? ProofStructure::Cell::Par
                                    : s.type.family == Family::One  ? ProofStructure::Cell::One
                                                                    : ProofStructure::Cell::Bot;
        std::size_t idx = ps.cells.size();
        for (std::size_t j = 0; j < fins.size(); ++j) down[fins[j]] = {Hop::Kind::End, {End::Kind::CellIn, idx, j}, npos};
        Formula f;
        for (const WireLabel& x : out_lbl) {
          if (x.is_control()) {
            outs.push_back(npos);
            continue;
          }
          f = x.formula();
          std::size_t w = fresh(f);
          up[w] = {Hop::Kind::End, {End::Kind::CellOut, idx, 0}, npos};
          outs.push_back(w);
        }
        ps.cells.push_back({cell, f});
      }
    }
    ids.erase(ids.begin() + s.offset, ids.begin() + s.offset + ar);
    ids.insert(ids.begin() + s.offset, outs.begin(), outs.end());
  }
  for (std::size_t w : ids) {
    if (w == npos) continue;
    down[w] = {Hop::Kind::End, {End::Kind::Conclusion, ps.conclusions.size(), 0}, npos};
    ps.conclusions.push_back(label[w]);
  }

  std::vector<char> seen(up.size(), 0);
  // Walks from a wire in a direction until an end; marks wires.
  auto walk = [&](std::size_t w, bool downward) -> std::pair<End, bool> {
    while (true) {
      seen[w] = 1;
      const Hop& h = downward ? down[w] : up[w];
      switch (h.kind) {
        case Hop::Kind::End: return {h.end, downward};
        case Hop::Kind::Pass: w = h.wire; break;
        case Hop::Kind::Partner:
          w = h.wire;
          downward = !downward;
          break;
        case Hop::Kind::None: fail(Errc::Contract, "dangling wire in proof structure");
      }
    }
  };
  for (std::size_t w = 0; w < up.size(); ++w) {
    if (seen[w]) continue;
    bool start_up = up[w].kind == Hop::Kind::End, start_down = down[w].kind == Hop::Kind::End;
    if (!start_up && !start_down) continue;
    // start at an end and walk away from it
    End a = start_up ? up[w].end : down[w].end;
    auto [b, b_down] = walk(w, start_up);
    bool a_down = !start_up;
    ProofStructure::Link::Kind k = a_down == b_down ? (a_down ? ProofStructure::Link::Kind::Axiom
                                                              : ProofStructure::Link::Kind::Cut)
                                                    : ProofStructure::Link::Kind::Wire;
    if (k == ProofStructure::Link::Kind::Wire && a_down) std::swap(a, b);
    ps.links.push_back({k, a, b, label[w]});
  }
  // remaining wires lie on closed cycles
  for (std::size_t w = 0; w < up.size(); ++w) {
    if (seen[w]) continue;
    ++ps.loops;
    std::size_t x = w;
    bool downward = true;
    while (!seen[x]) {
      seen[x] = 1;
      const Hop& h = downward ? down[x] : up[x];
      x = h.wire;
      if (h.kind == Hop::Kind::Partner) downward = !downward;
    }
  }
  return ps;
}

namespace {

std::string end_str(const End& e) {
  switch (e.kind) {
    case End::Kind::CellIn: return "in:" + std::to_string(e.index) + ":" + std::to_string(e.slot);
    case End::Kind::CellOut: return "out:" + std::to_string(e.index);
    case End::Kind::Conclusion: return "concl:" + std::to_string(e.index);
    case End::Kind::Hypothesis: return "hyp:" + std::to_string(e.index);
  }
  return "?";
}

const char* cell_str(ProofStructure::Cell c) {
  switch (c) {
    case ProofStructure::Cell::Tensor: return "tensor";
    case ProofStructure::Cell::Par: return "par";
    case ProofStructure::Cell::One: return "one";
    case ProofStructure::Cell::Bot: return "bot";
  }
  return "?";
}

}  // namespace

std::string proof_structure_str(const ProofStructure& ps) {
  std::string s = "proof-structure 1\n";
  for (std::size_t i = 0; i < ps.cells.size(); ++i)
    s += "cell " + std::to_string(i) + " " + cell_str(ps.cells[i].cell) + " " + ps.cells[i].f.str() + "\n";
  for (std::size_t i = 0; i < ps.hypotheses.size(); ++i)
    s += "hyp " + std::to_string(i) + " " + ps.hypotheses[i].str() + "\n";
  for (std::size_t i = 0; i < ps.conclusions.size(); ++i)
    s += "concl " + std::to_string(i) + " " + ps.conclusions[i].str() + "\n";
  for (const auto& l : ps.links) {
    const char* k = l.kind == ProofStructure::Link::Kind::Wire ? "wire" : l.kind == ProofStructure::Link::Kind::Axiom ? "axiom" : "cut";
    s += std::string("link ") + k + " " + end_str(l.a) + " " + end_str(l.b) + " " + l.label.str() + "\n";
  }
  s += "loops " + std::to_string(ps.loops) + "\n";
  return s;
}

}  // namespace pd
