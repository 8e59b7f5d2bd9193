#include "pd/semantics.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "pd/error.hpp"
#include "pd/linear.hpp"
#include "pd/translate.hpp"

namespace pd {

namespace {

constexpr std::size_t npos = PortRef::npos;

bool splitting(Family f) { return f == Family::Tensor || f == Family::Cut; }

std::vector<std::pair<std::size_t, std::size_t>> sheaves(const Word& w) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < w.size()) {
    if (w[i] != kL) return {};
    std::size_t j = i + 1;
    while (j < w.size() && w[j] != kR) ++j;
    if (j == w.size()) return {};
    out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

Word inner(const Word& w, std::size_t from, std::size_t to) {
  return Word(w.begin() + static_cast<std::ptrdiff_t>(from) + 1, w.begin() + static_cast<std::ptrdiff_t>(to));
}

bool has_big(const Linear& l) {
  return std::any_of(l.steps.begin(), l.steps.end(), [](const Step& s) { return s.type.family == Family::Big; });
}

// Wires of a step form numbered densely: input i is wire i, output port p
// of step t is wire base[t] + p.
struct Timeline {
  Linear lin;
  WireGraph g;
  std::vector<std::size_t> base;
  std::vector<PortRef> prod, cons;
  std::vector<WireLabel> label;
  std::vector<std::vector<std::size_t>> words;  // before each step, plus the output

  explicit Timeline(Linear l) : lin(std::move(l)), g(wire_graph(lin)) {
    const Signature sig = lin.sig;
    std::vector<std::size_t> w(lin.input.size());
    std::iota(w.begin(), w.end(), 0);
    for (std::size_t i = 0; i < lin.input.size(); ++i) {
      prod.push_back({npos, i});
      label.push_back(lin.input[i]);
    }
    words.push_back(w);
    for (std::size_t k = 0; k < lin.steps.size(); ++k) {
      const Step& s = lin.steps[k];
      base.push_back(prod.size());
      Word outs = s.type.outputs(sig);
      std::vector<std::size_t> fresh;
      for (std::size_t j = 0; j < outs.size(); ++j) {
        fresh.push_back(prod.size());
        prod.push_back({k, j});
        label.push_back(outs[j]);
      }
      auto at = w.begin() + static_cast<std::ptrdiff_t>(s.offset);
      w.erase(at, at + static_cast<std::ptrdiff_t>(s.type.in_arity(sig)));
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(s.offset), fresh.begin(), fresh.end());
      words.push_back(w);
    }
    cons.resize(prod.size());
    for (std::size_t i = 0; i < prod.size(); ++i) {
      const PortRef& p = prod[i];
      cons[i] = p.step == npos ? g.input_dst[p.port] : g.out_dst[p.step][p.port];
    }
  }

  std::size_t id(const PortRef& p) const { return p.step == npos ? p.port : base[p.step] + p.port; }
  std::size_t in(std::size_t step, std::size_t port) const { return id(g.in_src[step][port]); }
  Family family(std::size_t step) const { return lin.steps[step].type.family; }
  std::size_t size() const { return lin.steps.size(); }
};

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Connected components of the wires using the steps before `t`. B-gates
// only permute sheaves and join nothing.
UnionFind classes_at(const Timeline& tl, std::size_t t) {
  UnionFind uf(tl.prod.size());
  const Signature sig = tl.lin.sig;
  for (std::size_t k = 0; k < t; ++k) {
    const Step& s = tl.lin.steps[k];
    if (s.type.family == Family::Big) continue;
    std::vector<std::size_t> ws;
    for (std::size_t j = 0; j < s.type.in_arity(sig); ++j) ws.push_back(tl.in(k, j));
    for (std::size_t j = 0; j < s.type.out_arity(sig); ++j) ws.push_back(tl.base[k] + j);
    // a unit inserted into a sheaf joins the sheaf
    if (ws.size() == s.type.out_arity(sig) && !ws.empty() && tl.label[ws.front()] != kL) {
      const auto& w = tl.words[k];
      if (s.offset > 0 && tl.label[w[s.offset - 1]] != kR)
        ws.push_back(w[s.offset - 1]);
      else if (s.offset < w.size() && tl.label[w[s.offset]] != kL)
        ws.push_back(w[s.offset]);
    }
    for (std::size_t x : ws) uf.unite(x, ws.front());
  }
  return uf;
}

std::size_t step_wire(const Timeline& tl, std::size_t k) {
  return tl.lin.steps[k].type.in_arity(tl.lin.sig) ? tl.in(k, 0) : tl.base[k];
}

// Wires reaching `w` from above through twists (and pars when asked).
std::set<std::size_t> lineage(const Timeline& tl, std::size_t w, bool through_par) {
  std::set<std::size_t> seen;
  std::vector<std::size_t> todo{w};
  while (!todo.empty()) {
    std::size_t x = todo.back();
    todo.pop_back();
    if (!seen.insert(x).second) continue;
    const PortRef& p = tl.prod[x];
    if (p.step == npos) continue;
    Family f = tl.family(p.step);
    if (f == Family::Twist) todo.push_back(tl.in(p.step, 1 - p.port));
    if (f == Family::Par && through_par) {
      todo.push_back(tl.in(p.step, 0));
      todo.push_back(tl.in(p.step, 1));
    }
  }
  return seen;
}

bool passes(const Timeline& tl, std::size_t w, bool through_par) {
  const PortRef& p = tl.prod[w];
  if (p.step == npos) return false;
  Family f = tl.family(p.step);
  return f == Family::Twist || (through_par && f == Family::Par);
}

// Does alpha's active input on `side` come from beta's premise on that side
// without passing through beta?
bool from_premise(const Timeline& tl, std::size_t beta, std::size_t alpha, Side side, std::set<std::size_t>* lin) {
  const std::size_t port = side == Side::Left ? 0 : 3;
  std::set<std::size_t> lu = lineage(tl, tl.in(alpha, port), true);
  if (tl.family(beta) == Family::Tensor && lu.count(tl.base[beta])) return false;
  const auto& w = tl.words[beta];
  const std::size_t o = tl.lin.steps[beta].offset;
  std::size_t from, to;
  if (side == Side::Left) {
    to = o + 1;
    from = o;
    while (from > 0 && tl.label[w[from]] != kL) --from;
  } else {
    from = o + 2;
    to = from;
    while (to < w.size() && tl.label[w[to]] != kR) ++to;
  }
  bool any = false;
  for (std::size_t x : lu) {
    auto it = std::find(w.begin(), w.end(), x);
    if (it != w.end()) {
      std::size_t pos = static_cast<std::size_t>(it - w.begin());
      if (pos < from || pos > to) return false;
      any = true;
      continue;
    }
    // created after beta: only units with nothing to carry
    const PortRef& p = tl.prod[x];
    if (p.step != npos && p.step >= beta && !passes(tl, x, true) && tl.family(p.step) != Family::Bot) return false;
  }
  if (lin) *lin = std::move(lu);
  return any;
}

std::vector<CrossingSplit> pairs_on(const Timeline& tl, bool all_pairs) {
  std::vector<CrossingSplit> out;
  std::set<std::tuple<std::size_t, std::size_t, int>> seen;
  auto push = [&](CrossingSplit x) {
    if (seen.insert({x.upper, x.lower, x.side == Side::Left ? 0 : 1}).second) out.push_back(x);
  };
  if (!all_pairs) {
    // Cut-directed: a topmost cut whose active formula's region was closed
    // off by a splitting gate before reaching the cut.
    for (std::size_t a = 0; a < tl.size(); ++a) {
      if (tl.family(a) != Family::Cut) continue;
      UnionFind uf = classes_at(tl, a);
      std::size_t cl = uf.find(tl.in(a, 0)), cr = uf.find(tl.in(a, 3));
      bool topmost = true;
      for (std::size_t k = 0; k < a && topmost; ++k)
        if (tl.family(k) == Family::Cut) {
          std::size_t c = uf.find(tl.in(k, 0));
          topmost = c != cl && c != cr;
        }
      if (!topmost) continue;
      for (Side side : {Side::Left, Side::Right}) {
        std::size_t u = tl.in(a, side == Side::Left ? 0 : 3);
        while (passes(tl, u, false)) u = tl.in(tl.prod[u].step, 1 - tl.prod[u].port);
        const PortRef& p = tl.prod[u];
        if (p.step == npos) continue;
        const Step& g = tl.lin.steps[p.step];
        std::size_t border = npos;
        switch (g.type.family) {
          case Family::Ax:
          case Family::One:
            border = tl.base[p.step] + (side == Side::Left ? g.type.out_arity(tl.lin.sig) - 1 : 0);
            break;
          case Family::Tensor:
          case Family::Par: {
            const auto& w = tl.words[p.step + 1];
            std::size_t pos = static_cast<std::size_t>(std::find(w.begin(), w.end(), u) - w.begin());
            if (side == Side::Left) {
              while (pos < w.size() && tl.label[w[pos]] != kR) ++pos;
            } else {
              while (pos > 0 && tl.label[w[pos]] != kL) --pos;
              if (tl.label[w[pos]] != kL) pos = w.size();
            }
            if (pos < w.size()) border = w[pos];
            break;
          }
          default: break;
        }
        if (border == npos) continue;
        const PortRef& c = tl.cons[border];
        if (c.step == npos || c.step == a || c.step > a || !splitting(tl.family(c.step))) continue;
        push({c.step, a, side, CrossingSplit::Kind::CutDirected});
      }
    }
  }
  for (std::size_t a = 0; a < tl.size(); ++a) {
    if (!splitting(tl.family(a))) continue;
    for (std::size_t b = 0; b < a; ++b) {
      if (!splitting(tl.family(b))) continue;
      if (tl.family(b) == Family::Cut && tl.family(a) == Family::Tensor) continue;
      for (Side side : {Side::Left, Side::Right}) {
        std::set<std::size_t> lu;
        if (!from_premise(tl, b, a, side, &lu)) continue;
        if (all_pairs) {
          push({b, a, side, CrossingSplit::Kind::Tangled});
          continue;
        }
        std::set<std::size_t> lb = lineage(tl, tl.in(b, side == Side::Left ? 0 : 3), false);
        bool tangled = false;
        for (std::size_t t = 0; t < b && !tangled; ++t) {
          if (tl.family(t) != Family::Twist) continue;
          std::size_t o0 = tl.base[t], o1 = o0 + 1;
          tangled = (lb.count(o0) && lu.count(o1)) || (lb.count(o1) && lu.count(o0));
        }
        if (tangled) push({b, a, side, CrossingSplit::Kind::Tangled});
      }
    }
  }
  return out;
}

void require_irreducible(const Diagram& phi) {
  if (phi.signature() != Signature::Controlled) fail(Errc::Contract, "crossing splits need a controlled diagram");
  if (auto a = apply_once(polygraph("MLL_ctrl"), phi))
    fail(Errc::NotIrreducible, "MLL_ctrl rule " + a->rule + " still applies");
}

// ---------------------------------------------------------------------------
// Skeleton surgery for B-introduction.

using TreePath = std::vector<std::size_t>;

void hyp_paths(const SkNode& n, TreePath& at, std::vector<TreePath>& out) {
  if (n.rule == RuleKind::Hyp) out.push_back(at);
  for (std::size_t k = 0; k < n.kids.size(); ++k) {
    at.push_back(k);
    hyp_paths(n.kids[k], at, out);
    at.pop_back();
  }
}

SkNode& node_at(SkNode& root, const TreePath& p, std::size_t len) {
  SkNode* n = &root;
  for (std::size_t i = 0; i < len; ++i) n = &n->kids[p[i]];
  return *n;
}

TreePath common(const TreePath& a, const TreePath& b) {
  TreePath r;
  for (std::size_t i = 0; i < a.size() && i < b.size() && a[i] == b[i]; ++i) r.push_back(a[i]);
  return r;
}

void live_into(const SkNode& n, std::vector<std::size_t>& acc) {
  for (const SkNode& k : n.kids) live_into(k, acc);
  for (std::size_t o : n.in) acc.erase(std::find(acc.begin(), acc.end(), o));
  acc.insert(acc.end(), n.out.begin(), n.out.end());
}

bool is_unary(RuleKind k) { return k == RuleKind::Par || k == RuleKind::Bot; }

RuleKind rule_of(Family f) { return f == Family::Tensor ? RuleKind::Tensor : RuleKind::Cut; }

std::optional<Diagram> b_intro(const Diagram& phi, const Timeline& tl, const CrossingSplit& x) {
  if (!is_sequentializable(phi) || has_big(tl.lin)) return std::nullopt;
  const std::size_t bi = x.upper, ai = x.lower;
  if (bi >= ai || ai >= tl.size() || !splitting(tl.family(bi)) || !splitting(tl.family(ai))) return std::nullopt;
  const bool left = x.side == Side::Left;

  // P and Q: beta's premises; Z: alpha's other premise.
  UnionFind cb = classes_at(tl, bi);
  const std::size_t cP = cb.find(tl.in(bi, left ? 0 : 3)), cQ = cb.find(tl.in(bi, left ? 3 : 0));
  UnionFind ca = classes_at(tl, ai);
  const std::size_t cZ = ca.find(tl.in(ai, left ? 3 : 0));
  std::vector<int> tag(tl.size(), -1);
  for (std::size_t k = 0; k < bi; ++k) {
    std::size_t c = cb.find(step_wire(tl, k));
    if (c == cP) tag[k] = 0;
    if (c == cQ) tag[k] = 1;
  }
  for (std::size_t k = 0; k < ai; ++k)
    if (ca.find(step_wire(tl, k)) == cZ) {
      if (tag[k] != -1) return std::nullopt;
      tag[k] = 2;
    }
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < tl.size(); ++k)
    if (tag[k] != -1) order.push_back(k);
  const std::size_t top = order.size();
  for (std::size_t k = 0; k < tl.size(); ++k)
    if (tag[k] == -1) order.push_back(k);
  std::optional<Linear> l2 = reorder(tl.lin, order);
  if (!l2) return std::nullopt;

  Word w0 = l2->input;
  for (std::size_t k = 0; k < top; ++k) apply_step(w0, l2->steps[k], l2->sig);
  auto sh = sheaves(w0);
  if (sh.size() != 3) return std::nullopt;
  Linear rest{l2->sig, w0, {l2->steps.begin() + static_cast<std::ptrdiff_t>(top), l2->steps.end()}};

  Skeleton sk;
  try {
    sk = skeleton(sequentialize_open(rest));
  } catch (const Error&) {
    return std::nullopt;
  }
  std::vector<TreePath> hyps;
  TreePath at;
  hyp_paths(sk.root, at, hyps);
  if (hyps.size() != 3) return std::nullopt;
  const TreePath& hP = hyps[left ? 0 : 2];
  const TreePath& hQ = hyps[1];
  const TreePath& hZ = hyps[left ? 2 : 0];
  const TreePath bp = common(hP, hQ), ap = common(bp, hZ);
  if (ap.size() >= bp.size()) return std::nullopt;
  const std::size_t pside = left ? 0 : 1, zside = 1 - pside;
  if (hP[bp.size()] != pside || hQ[bp.size()] != zside) return std::nullopt;
  if (bp[ap.size()] != pside || hZ[ap.size()] != zside) return std::nullopt;

  SkNode root = sk.root;
  const SkNode alpha = node_at(root, ap, ap.size());
  const SkNode beta = node_at(root, bp, bp.size());
  if (alpha.rule != rule_of(tl.family(ai)) || beta.rule != rule_of(tl.family(bi))) return std::nullopt;

  // Nodes between alpha and beta, nearest to alpha first.
  struct Between {
    SkNode node;
    std::size_t toward;
    bool carries = false;  // part of the lineage of alpha's active input
  };
  std::vector<Between> path;
  for (std::size_t d = ap.size() + 1; d < bp.size(); ++d) path.push_back({node_at(root, bp, d), bp[d]});
  std::set<std::size_t> need{alpha.in[pside]};
  for (Between& b : path) {
    bool hit = std::any_of(b.node.out.begin(), b.node.out.end(), [&](std::size_t o) { return need.count(o); });
    if (!hit) continue;
    if (!is_unary(b.node.rule)) return std::nullopt;
    b.carries = true;
    for (std::size_t o : b.node.out) need.erase(o);
    need.insert(b.node.in.begin(), b.node.in.end());
  }
  std::vector<std::size_t> plive;
  live_into(beta.kids[pside], plive);
  for (std::size_t o : need)
    if (std::find(plive.begin(), plive.end(), o) == plive.end() ||
        std::find(beta.in.begin(), beta.in.end(), o) != beta.in.end())
      return std::nullopt;

  SkNode pchain = beta.kids[pside];
  for (std::size_t i = path.size(); i-- > 0;)
    if (path[i].carries) {
      SkNode n = path[i].node;
      n.kids = {std::move(pchain)};
      pchain = std::move(n);
    }
  SkNode alpha2 = alpha;
  alpha2.kids[pside] = std::move(pchain);
  SkNode core = beta;
  core.kids[pside] = std::move(alpha2);
  for (std::size_t i = path.size(); i-- > 0;)
    if (!path[i].carries) {
      SkNode n = path[i].node;
      n.kids[path[i].toward] = std::move(core);
      core = std::move(n);
    }
  node_at(root, ap, ap.size()) = std::move(core);

  Linear below;
  try {
    Derivation d2 = rebuild(Skeleton{std::move(root), sk.occ, sk.order});
    check_derivation(d2);
    below = represent_linear(d2);
  } catch (const Error&) {
    return std::nullopt;
  }

  // P Q Z on top (Z Q P for the right side), a B-gate swapping the two
  // branches that trade places, then the rebuilt part.
  Linear target{l2->sig, l2->input, {l2->steps.begin(), l2->steps.begin() + static_cast<std::ptrdiff_t>(top)}};
  const auto& s1 = left ? sh[1] : sh[0];
  const auto& s2 = left ? sh[2] : sh[1];
  target.steps.push_back({GateType::big(inner(w0, s1.first, s1.second), inner(w0, s2.first, s2.second)), s1.first});
  Word w1 = w0;
  apply_step(w1, target.steps.back(), target.sig);
  if (w1 != below.input) return std::nullopt;
  target.steps.insert(target.steps.end(), below.steps.begin(), below.steps.end());
  try {
    if (output_word(target) != phi.output()) return std::nullopt;
    return to_layers(target);
  } catch (const Error&) {
    return std::nullopt;
  }
}

MatchSite whole_site(const MatchContext& ctx, std::vector<std::size_t> steps) {
  MatchSite s;
  s.layer_span = {0, ctx.canonical().layers().size()};
  s.offset = 0;
  s.steps = std::move(steps);
  s.fingerprint = ctx.fingerprint();
  s.window_in = ctx.canonical().input();
  s.window_out = ctx.canonical().output();
  return s;
}

// ---------------------------------------------------------------------------
// Untangle relations: a gate directly above a B-gate slides below it.

struct Untangle {
  std::size_t gate, big;
};

std::vector<Untangle> untangle_sites(const Timeline& tl) {
  std::vector<Untangle> out;
  const Signature sig = tl.lin.sig;
  for (std::size_t b = 0; b < tl.size(); ++b) {
    if (tl.family(b) != Family::Big) continue;
    std::set<std::size_t> seen;
    for (const PortRef& src : tl.g.in_src[b]) {
      if (src.step == npos || !seen.insert(src.step).second) continue;
      const Step& g = tl.lin.steps[src.step];
      if (g.type.family == Family::Big || g.type.out_arity(sig) == 0) continue;
      bool all = std::all_of(tl.g.out_dst[src.step].begin(), tl.g.out_dst[src.step].end(),
                             [&](const PortRef& d) { return d.step == b; });
      if (all) out.push_back({src.step, b});
    }
  }
  std::sort(out.begin(), out.end(), [](const Untangle& x, const Untangle& y) {
    return std::tie(x.big, x.gate) < std::tie(y.big, y.gate);
  });
  return out;
}

Word cat_word(const Word& a, const Word& b, const Word& c) {
  Word r = a;
  r.insert(r.end(), b.begin(), b.end());
  r.insert(r.end(), c.begin(), c.end());
  return r;
}

std::optional<Diagram> untangle_at(const Timeline& tl, const Untangle& u) {
  const Signature sig = tl.lin.sig;
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < tl.size(); ++k) {
    if (k == u.gate) continue;
    if (k == u.big) order.push_back(u.gate);
    order.push_back(k);
  }
  std::optional<Linear> l = reorder(tl.lin, order);
  if (!l) return std::nullopt;
  const std::size_t bpos = static_cast<std::size_t>(std::find(order.begin(), order.end(), u.big) - order.begin());
  const Step g = l->steps[bpos - 1], big = l->steps[bpos];
  const std::size_t o = big.offset, m1 = big.type.w.size() + 2, m2 = big.type.w2.size() + 2;
  Word x1 = cat_word({kL}, big.type.w, {kR}), x2 = cat_word({kL}, big.type.w2, {kR});
  const Word gin = g.type.inputs(sig);
  const std::size_t gout = g.type.out_arity(sig);
  const bool first = g.offset < o + m1;
  Word& x = first ? x1 : x2;
  const std::size_t rel = g.offset - (first ? o : o + m1);
  if (rel + gout > x.size()) return std::nullopt;
  x.erase(x.begin() + static_cast<std::ptrdiff_t>(rel), x.begin() + static_cast<std::ptrdiff_t>(rel + gout));
  x.insert(x.begin() + static_cast<std::ptrdiff_t>(rel), gin.begin(), gin.end());
  if (!x.empty() && (x.front() != kL || x.back() != kR)) return std::nullopt;
  std::vector<Step> repl;
  if (!x1.empty() && !x2.empty()) repl.push_back({GateType::big(inner(x1, 0, x1.size() - 1), inner(x2, 0, x2.size() - 1)), o});
  repl.push_back({g.type, first ? o + m2 + rel : o + rel});
  l->steps.erase(l->steps.begin() + static_cast<std::ptrdiff_t>(bpos) - 1,
                 l->steps.begin() + static_cast<std::ptrdiff_t>(bpos) + 1);
  l->steps.insert(l->steps.begin() + static_cast<std::ptrdiff_t>(bpos) - 1, repl.begin(), repl.end());
  try {
    return to_layers(*l);
  } catch (const Error&) {
    return std::nullopt;
  }
}

class UntangleProcedure : public Procedure {
 public:
  std::string name() const override { return "untangle"; }
  std::string group() const override { return "big"; }
  std::string describe() const override {
    return "a gate whose outputs all enter one sheaf of a B-gate moves below it, into the other position";
  }
  std::vector<Application> find(const MatchContext& ctx) const override {
    std::vector<Application> out;
    if (ctx.canonical().signature() != Signature::Controlled || !has_big(ctx.linear())) return out;
    Timeline tl(ctx.linear());
    for (const Untangle& u : untangle_sites(tl))
      if (auto r = untangle_at(tl, u)) out.push_back({name(), whole_site(ctx, {u.gate, u.big}), std::move(*r)});
    return out;
  }
};

const Polygraph& cleanup_polygraph() {
  static const Polygraph p = [] {
    const Polygraph& c = polygraph("MLL_ctrl");
    std::vector<Polygraph::Entry> es = c.entries();
    Polygraph::Entry e;
    e.kind = Polygraph::Entry::Kind::Procedural;
    e.proc = untangle_procedure();
    e.name = e.proc->name();
    e.group = e.proc->group();
    es.push_back(std::move(e));
    return Polygraph("MLL_ctrl+untangle", c.signature(), c.wire_alphabet(), c.twisting_family(), c.families(),
                     std::move(es));
  }();
  return p;
}

std::size_t split_count(const Diagram& phi) {
  MatchContext ctx(phi);
  return pairs_on(Timeline(ctx.linear()), false).size();
}

class BIntroProcedure : public Procedure {
 public:
  std::string name() const override { return "b-intro"; }
  std::string group() const override { return "big"; }
  std::string describe() const override {
    return "re-pairs the branches of a crossing split through a B-gate; tangled splits are taken only when the "
           "split count drops after B-gate elimination";
  }
  std::vector<Application> find(const MatchContext& ctx) const override {
    std::vector<Application> out;
    const Diagram& phi = ctx.canonical();
    if (phi.signature() != Signature::Controlled || has_big(ctx.linear()) || !is_sequentializable(phi)) return out;
    if (apply_once(polygraph("MLL_ctrl"), phi)) return out;
    Timeline tl(ctx.linear());
    std::vector<CrossingSplit> xs = pairs_on(tl, false);
    std::set<std::vector<std::size_t>> used;
    for (const CrossingSplit& x : xs) {
      std::vector<std::size_t> key{x.upper, x.lower};
      if (used.count(key)) continue;
      std::optional<Diagram> r = b_intro(phi, tl, x);
      if (!r) continue;
      if (x.kind == CrossingSplit::Kind::Tangled) {
        Diagram after = normalize(cleanup_polygraph(), *r).first;
        if (split_count(after) >= xs.size()) continue;
      }
      used.insert(key);
      out.push_back({name(), whole_site(ctx, key), std::move(*r)});
    }
    return out;
  }
};

}  // namespace

std::shared_ptr<const Procedure> untangle_procedure() {
  static const auto p = std::make_shared<const UntangleProcedure>();
  return p;
}

std::shared_ptr<const Procedure> b_intro_procedure() {
  static const auto p = std::make_shared<const BIntroProcedure>();
  return p;
}

// ---------------------------------------------------------------------------

std::vector<CrossingSplit> crossing_splits(const Diagram& phi) {
  require_irreducible(phi);
  MatchContext ctx(phi);
  if (has_big(ctx.linear())) fail(Errc::NotIrreducible, "diagram contains B-gates");
  return pairs_on(Timeline(ctx.linear()), false);
}

std::vector<MatchSite> detect_crossing_splits(const Diagram& phi) {
  std::vector<MatchSite> out;
  MatchContext ctx(phi);
  for (const CrossingSplit& x : crossing_splits(phi)) {
    MatchSite s = whole_site(ctx, {x.upper, x.lower});
    s.offset = ctx.linear().steps[x.lower].offset;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<CrossingSplit> commuting_pairs(const Diagram& phi) {
  MatchContext ctx(phi);
  if (phi.signature() != Signature::Controlled || has_big(ctx.linear())) return {};
  return pairs_on(Timeline(ctx.linear()), true);
}

std::optional<Diagram> introduce_b_gate(const Diagram& phi, const CrossingSplit& x) {
  MatchContext ctx(phi);
  return b_intro(ctx.canonical(), Timeline(ctx.linear()), x);
}

std::pair<Diagram, RewriteTrace> drive_b_gates(const Diagram& phi) {
  RewriteTrace t;
  t.initial = canonical(phi);
  Diagram cur = t.initial;
  while (true) {
    MatchContext ctx(cur);
    auto as = untangle_procedure()->find(ctx);
    if (as.empty()) break;
    t.steps.push_back({as.front().rule, as.front().site});
    cur = canonical(as.front().result);
  }
  t.final = cur;
  return {cur, t};
}

std::pair<Diagram, RewriteTrace> untangle(const Diagram& phi) {
  auto [start, trace] = normalize(polygraph("MLL_ctrl"), phi);
  MatchContext ctx(start);
  if (has_big(ctx.linear())) fail(Errc::NotIrreducible, "diagram already contains B-gates");
  auto as = b_intro_procedure()->find(ctx);
  if (as.empty()) fail(Errc::NoCrossingSplit, "no crossing split can be untangled");
  trace.steps.push_back({as.front().rule, as.front().site});
  auto [res, t2] = normalize(cleanup_polygraph(), as.front().result);
  trace.steps.insert(trace.steps.end(), t2.steps.begin(), t2.steps.end());
  trace.initial = canonical(phi);
  trace.final = res;
  return {res, trace};
}

std::pair<Diagram, RewriteTrace> eliminate_cuts(const Diagram& phi, std::size_t fuel) {
  return normalize(polygraph("Sem"), phi, fuel);
}

std::pair<Diagram, RewriteTrace> denotation(const Derivation& d) { return eliminate_cuts(represent(d)); }

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

// ---------------------------------------------------------------------------

std::string proof_structure_key(const Diagram& phi) {
  using PS = ProofStructure;
  PS ps = to_proof_structure(phi);
  auto end_key = [](const PS::End& e) {
    return std::make_tuple(static_cast<int>(e.kind), e.index, e.slot);
  };
  std::map<std::tuple<int, std::size_t, std::size_t>, std::pair<const PS::Link*, PS::End>> at;
  for (const PS::Link& l : ps.links) {
    at[end_key(l.a)] = {&l, l.b};
    at[end_key(l.b)] = {&l, l.a};
  }
  std::vector<long> num(ps.cells.size(), -1);
  std::deque<std::size_t> todo;
  long next = 0;
  auto cell_name = [](PS::Cell c) {
    switch (c) {
      case PS::Cell::Tensor: return "T";
      case PS::Cell::Par: return "P";
      case PS::Cell::One: return "1";
      case PS::Cell::Bot: return "B";
    }
    return "?";
  };
  auto name = [&](const PS::End& e) {
    switch (e.kind) {
      case PS::End::Kind::Conclusion: return "c" + std::to_string(e.index);
      case PS::End::Kind::Hypothesis: return "h" + std::to_string(e.index);
      default: {
        std::string s;
        if (num[e.index] < 0) {
          num[e.index] = next++;
          todo.push_back(e.index);
          s = std::string("new") + cell_name(ps.cells[e.index].cell) + ps.cells[e.index].f.str();
        }
        return s + (e.kind == PS::End::Kind::CellIn ? "i" : "o") + std::to_string(num[e.index]) + "." +
               std::to_string(e.slot);
      }
    }
  };
  auto kind = [](const PS::Link* l) {
    return l->kind == PS::Link::Kind::Wire ? "-w-" : l->kind == PS::Link::Kind::Axiom ? "-a-" : "-x-";
  };
  std::string out;
  auto edge = [&](const PS::End& e) {
    auto it = at.find(end_key(e));
    if (it == at.end()) return;
    std::string self = name(e);
    out += self + kind(it->second.first) + name(it->second.second) + ";";
  };
  auto drain = [&] {
    while (!todo.empty()) {
      std::size_t c = todo.front();
      todo.pop_front();
      edge({PS::End::Kind::CellOut, c, 0});
      std::size_t arity = ps.cells[c].cell == PS::Cell::Tensor || ps.cells[c].cell == PS::Cell::Par ? 2 : 0;
      for (std::size_t s = 0; s < arity; ++s) edge({PS::End::Kind::CellIn, c, s});
    }
  };
  for (std::size_t i = 0; i < ps.hypotheses.size(); ++i) edge({PS::End::Kind::Hypothesis, i, 0});
  for (std::size_t i = 0; i < ps.conclusions.size(); ++i) edge({PS::End::Kind::Conclusion, i, 0});
  drain();
  // components without boundary ends, in order of their smallest key
  std::vector<std::string> loose;
  for (std::size_t c = 0; c < ps.cells.size(); ++c) {
    if (num[c] >= 0) continue;
    std::string saved = out;
    out.clear();
    edge({PS::End::Kind::CellOut, c, 0});
    if (num[c] < 0) {
      num[c] = next++;
      todo.push_back(c);
    }
    drain();
    loose.push_back(out);
    out = saved;
  }
  std::sort(loose.begin(), loose.end());
  for (const std::string& s : loose) out += "|" + s;
  return out + "|loops " + std::to_string(ps.loops);
}

// ---------------------------------------------------------------------------

namespace {

std::string state_key(const Diagram& d) { return linear_key(linearize(canonical(d))); }

std::size_t width(const Diagram& phi) {
  std::size_t w = phi.input().size();
  for (const Layer& l : phi.layers()) {
    std::size_t k = 0;
    for (const Slot& s : l) k += slot_outputs(s, phi.signature()).size();
    w = std::max(w, k);
  }
  return w;
}

struct Move {
  Diagram result;
  std::vector<TraceStep> steps;
};

std::vector<Move> moves(const Diagram& phi, EquivMode mode) {
  std::vector<Move> out;
  auto finish = [&](const Diagram& d, TraceStep first) {
    auto [n, t] = normalize(cleanup_polygraph(), d);
    Move m{n, {std::move(first)}};
    m.steps.insert(m.steps.end(), t.steps.begin(), t.steps.end());
    out.push_back(std::move(m));
  };
  MatchContext ctx(phi);
  if (!has_big(ctx.linear())) {
    Timeline tl(ctx.linear());
    for (const CrossingSplit& x : pairs_on(tl, true))
      if (auto r = b_intro(ctx.canonical(), tl, x)) finish(*r, {"swap", whole_site(ctx, {x.upper, x.lower})});
  }
  if (mode == EquivMode::Sem) {
    const Polygraph& sem = polygraph("Sem");
    for (const auto& r : sem.rules(width(phi))) {
      if (!r.rule || r.rule->group != "cut") continue;
      for (const MatchSite& s : ctx.find(*r.pattern)) finish(replace_at(ctx.canonical(), s, r.rule->target), {r.rule->name, s});
    }
  }
  return out;
}

struct Visit {
  std::string parent;
  std::vector<TraceStep> steps;
  Diagram d;
};

RewriteTrace path_to(const std::map<std::string, Visit>& seen, std::string key, const Diagram& initial) {
  std::vector<const Visit*> chain;
  while (true) {
    const Visit& v = seen.at(key);
    chain.push_back(&v);
    if (v.parent.empty()) break;
    key = v.parent;
  }
  RewriteTrace t;
  t.initial = initial;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) t.steps.insert(t.steps.end(), (*it)->steps.begin(), (*it)->steps.end());
  t.final = chain.front()->d;
  return t;
}

}  // namespace

EquivResult equivalent(const Derivation& d1, const Derivation& d2, std::size_t bound, EquivMode mode) {
  Sequent c1 = check_derivation(d1), c2 = check_derivation(d2);
  Derivation e2 = d2;
  if (c1 != c2) {
    std::vector<std::size_t> img;
    std::vector<bool> used(c2.size(), false);
    if (c1.size() != c2.size()) fail(Errc::ConclusionMismatch, sequent_str(c1) + " vs " + sequent_str(c2));
    for (const Formula& f : c1) {
      std::size_t j = 0;
      while (j < c2.size() && (used[j] || !(c2[j] == f))) ++j;
      if (j == c2.size()) fail(Errc::ConclusionMismatch, sequent_str(c1) + " vs " + sequent_str(c2));
      used[j] = true;
      img.push_back(j + 1);
    }
    e2 = Derivation::exchange(Permutation::from_images(img), d2);
  }
  EquivResult res;
  Diagram D1 = canonical(represent(d1)), D2 = canonical(represent(e2));
  if (mode == EquivMode::Sim) {
    if (proof_structure_key(D1) != proof_structure_key(D2)) {
      res.verdict = Verdict::No;
      res.reason = "proof structures differ";
      return res;
    }
  } else {
    try {
      Diagram n1 = eliminate_cuts(D1).first, n2 = eliminate_cuts(D2).first;
      auto clean = [](const Diagram& d) { return gate_count(d, {Family::Cut, Family::Big}) == 0; };
      if (clean(n1) && clean(n2) && proof_structure_key(n1) != proof_structure_key(n2)) {
        res.verdict = Verdict::No;
        res.reason = "cut-free proof structures differ";
        return res;
      }
    } catch (const Error&) {
      // no invariant available; fall back to search
    }
  }

  std::map<std::string, Visit> seen[2];
  std::vector<std::string> frontier[2];
  Diagram start[2] = {D1, D2};
  for (int s = 0; s < 2; ++s) {
    auto [n, t] = normalize(cleanup_polygraph(), start[s]);
    std::string k0 = state_key(start[s]), k = state_key(n);
    seen[s][k0] = {"", {}, start[s]};
    if (k != k0) seen[s][k] = {k0, t.steps, n};
    frontier[s].push_back(k);
  }
  auto meet = [&](const std::string& k, int s) {
    if (!seen[1 - s].count(k)) return false;
    res.verdict = Verdict::Yes;
    res.meeting = seen[s].at(k).d;
    res.left = path_to(seen[0], k, D1);
    res.right = path_to(seen[1], k, D2);
    res.reason = "met after " + std::to_string(res.left.steps.size()) + "+" + std::to_string(res.right.steps.size()) +
                 " steps";
    return true;
  };
  for (int s = 0; s < 2; ++s)
    for (const auto& [k, v] : seen[s])
      if (meet(k, s)) {
        res.explored = seen[0].size() + seen[1].size();
        return res;
      }
  std::size_t depth[2] = {0, 0};
  while ((depth[0] < bound && !frontier[0].empty()) || (depth[1] < bound && !frontier[1].empty())) {
    int s = 0;
    if (depth[0] >= bound || frontier[0].empty() ||
        (depth[1] < bound && !frontier[1].empty() && frontier[1].size() < frontier[0].size()))
      s = 1;
    std::vector<std::string> next;
    for (const std::string& k : frontier[s]) {
      Diagram cur = seen[s].at(k).d;
      for (Move& m : moves(cur, mode)) {
        std::string nk = state_key(m.result);
        if (seen[s].count(nk)) continue;
        seen[s][nk] = {k, std::move(m.steps), m.result};
        if (meet(nk, s)) {
          res.explored = seen[0].size() + seen[1].size();
          return res;
        }
        next.push_back(nk);
      }
    }
    frontier[s] = std::move(next);
    ++depth[s];
  }
  res.explored = seen[0].size() + seen[1].size();
  if (frontier[0].empty() && frontier[1].empty() && mode == EquivMode::Sim) {
    res.verdict = Verdict::No;
    res.reason = "both closures exhausted";
  } else {
    res.verdict = Verdict::Unknown;
    res.reason = "no meeting within bound " + std::to_string(bound);
  }
  return res;
}

}  // namespace pd
