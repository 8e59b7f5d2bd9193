#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "pd/error.hpp"
#include "pd/logic.hpp"

namespace pd {

namespace {

bool is_binary(RuleKind k) { return k == RuleKind::Tensor || k == RuleKind::Cut; }
bool is_unary(RuleKind k) { return k == RuleKind::Par || k == RuleKind::Bot; }

struct ToSkeleton {
  std::vector<Formula>& occ;

  std::size_t fresh(const Formula& f) {
    occ.push_back(f);
    return occ.size() - 1;
  }

  // Returns the node (or, for exchanges, the node below) and the order of
  // its conclusion occurrences.
  std::pair<SkNode, std::vector<std::size_t>> run(const Derivation& d) {
    SkNode n;
    n.rule = d.rule;
    n.a = d.a;
    std::vector<std::size_t> ord;
    switch (d.rule) {
      case RuleKind::Ax:
        n.out = {fresh(d.conclusion[0]), fresh(d.conclusion[1])};
        ord = n.out;
        break;
      case RuleKind::One:
      case RuleKind::Hyp:
        for (const Formula& f : d.conclusion) n.out.push_back(fresh(f));
        ord = n.out;
        break;
      case RuleKind::Exchange: {
        auto [k, o] = run(d.premises[0]);
        for (std::size_t i = 1; i <= d.perm.size(); ++i) ord.push_back(o[d.perm(i) - 1]);
        return {std::move(k), ord};
      }
      case RuleKind::Bot: {
        auto [k, o] = run(d.premises[0]);
        n.out = {fresh(Formula::bot())};
        o.insert(o.begin() + d.pos, n.out[0]);
        ord = std::move(o);
        n.kids.push_back(std::move(k));
        break;
      }
      case RuleKind::Par: {
        auto [k, o] = run(d.premises[0]);
        n.in = {o[d.pos], o[d.pos + 1]};
        n.out = {fresh(d.conclusion[d.pos])};
        o.erase(o.begin() + d.pos, o.begin() + d.pos + 2);
        o.insert(o.begin() + d.pos, n.out[0]);
        ord = std::move(o);
        n.kids.push_back(std::move(k));
        break;
      }
      case RuleKind::Tensor:
      case RuleKind::Cut: {
        auto [l, ol] = run(d.premises[0]);
        auto [r, orr] = run(d.premises[1]);
        n.in = {ol.back(), orr.front()};
        ord.assign(ol.begin(), ol.end() - 1);
        if (d.rule == RuleKind::Tensor) {
          n.out = {fresh(d.conclusion[d.pos])};
          ord.push_back(n.out[0]);
        }
        ord.insert(ord.end(), orr.begin() + 1, orr.end());
        n.kids.push_back(std::move(l));
        n.kids.push_back(std::move(r));
        break;
      }
    }
    return {std::move(n), ord};
  }
};

void live_into(const SkNode& n, std::vector<std::size_t>& acc) {
  for (const SkNode& k : n.kids) live_into(k, acc);
  for (std::size_t o : n.in) acc.erase(std::find(acc.begin(), acc.end(), o));
  acc.insert(acc.end(), n.out.begin(), n.out.end());
}

std::vector<std::size_t> live(const SkNode& n) {
  std::vector<std::size_t> acc;
  live_into(n, acc);
  return acc;
}

bool contains(const std::vector<std::size_t>& v, std::size_t x) { return std::find(v.begin(), v.end(), x) != v.end(); }

Permutation perm_to(const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
  std::vector<std::size_t> img;
  for (std::size_t o : to) img.push_back(std::find(from.begin(), from.end(), o) - from.begin() + 1);
  return Permutation::from_images(std::move(img));
}

struct Rebuild {
  const std::vector<Formula>& occ;

  std::pair<Derivation, std::vector<std::size_t>> run(const SkNode& n) {
    switch (n.rule) {
      case RuleKind::Ax: return {Derivation::ax(n.a), n.out};
      case RuleKind::One: return {Derivation::one(), n.out};
      case RuleKind::Hyp: {
        Sequent s;
        for (std::size_t o : n.out) s.push_back(occ[o]);
        return {Derivation::hyp(std::move(s)), n.out};
      }
      case RuleKind::Bot: {
        auto [d, o] = run(n.kids[0]);
        std::size_t p = o.size();
        o.push_back(n.out[0]);
        return {Derivation::bot(p, std::move(d)), o};
      }
      case RuleKind::Par: {
        auto [d, o] = run(n.kids[0]);
        auto ia = std::find(o.begin(), o.end(), n.in[0]) - o.begin();
        auto ib = std::find(o.begin(), o.end(), n.in[1]) - o.begin();
        if (ib != ia + 1) {
          std::vector<std::size_t> want = o;
          want.erase(want.begin() + ib);
          auto na = std::find(want.begin(), want.end(), n.in[0]) - want.begin();
          want.insert(want.begin() + na + 1, n.in[1]);
          d = exchange_fused(perm_to(o, want), std::move(d));
          o = want;
          ia = na;
        }
        Derivation r = Derivation::par(ia, std::move(d));
        o.erase(o.begin() + ia, o.begin() + ia + 2);
        o.insert(o.begin() + ia, n.out.empty() ? 0 : n.out[0]);
        return {std::move(r), o};
      }
      case RuleKind::Tensor:
      case RuleKind::Cut: {
        auto [l, ol] = run(n.kids[0]);
        auto [r, orr] = run(n.kids[1]);
        if (ol.back() != n.in[0]) {
          std::vector<std::size_t> want = ol;
          want.erase(std::find(want.begin(), want.end(), n.in[0]));
          want.push_back(n.in[0]);
          l = exchange_fused(perm_to(ol, want), std::move(l));
          ol = want;
        }
        if (orr.front() != n.in[1]) {
          std::vector<std::size_t> want = orr;
          want.erase(std::find(want.begin(), want.end(), n.in[1]));
          want.insert(want.begin(), n.in[1]);
          r = exchange_fused(perm_to(orr, want), std::move(r));
          orr = want;
        }
        std::vector<std::size_t> o(ol.begin(), ol.end() - 1);
        if (n.rule == RuleKind::Tensor) o.push_back(n.out[0]);
        o.insert(o.end(), orr.begin() + 1, orr.end());
        Derivation d = n.rule == RuleKind::Tensor ? Derivation::tensor(std::move(l), std::move(r))
                                                  : Derivation::cut(std::move(l), std::move(r));
        return {std::move(d), o};
      }
      case RuleKind::Exchange: break;
    }
    fail(Errc::Contract, "exchange node inside a skeleton");
  }
};

void renumber(const SkNode& n, std::map<std::size_t, std::size_t>& ids) {
  for (const SkNode& k : n.kids) renumber(k, ids);
  for (std::size_t o : n.out) ids.emplace(o, ids.size());
}

void print(const SkNode& n, const std::map<std::size_t, std::size_t>& ids, const std::vector<Formula>& occ,
           std::string& s) {
  s += rule_name(n.rule);
  if (n.rule == RuleKind::Ax) s += " " + n.a.str();
  if (n.rule == RuleKind::Hyp)
    for (std::size_t o : n.out) s += " " + occ[o].str();
  s += "[";
  for (std::size_t o : n.in) s += std::to_string(ids.at(o)) + ",";
  s += "](";
  for (const SkNode& k : n.kids) {
    print(k, ids, occ, s);
    s += ";";
  }
  s += ")";
}

// Calls f on every node of the tree in pre-order with its index.
void each_node(SkNode& n, std::size_t& idx, const std::function<void(SkNode&, std::size_t)>& f) {
  f(n, idx++);
  for (SkNode& k : n.kids) each_node(k, idx, f);
}

SkNode* node_at(SkNode& root, std::size_t target) {
  SkNode* hit = nullptr;
  std::size_t idx = 0;
  each_node(root, idx, [&](SkNode& n, std::size_t i) {
    if (i == target) hit = &n;
  });
  return hit;
}

// Local permutations with n as the lower rule.
std::vector<SkNode> local_moves(const SkNode& n) {
  std::vector<SkNode> out;
  if (is_unary(n.rule)) {
    const SkNode& c = n.kids[0];
    bool indep = std::none_of(n.in.begin(), n.in.end(), [&](std::size_t o) { return contains(c.out, o); });
    if (!indep) return out;
    if (is_unary(c.rule)) {
      SkNode lower = n;
      lower.kids = c.kids;
      SkNode upper = c;
      upper.kids = {std::move(lower)};
      out.push_back(std::move(upper));
    } else if (is_binary(c.rule)) {
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<std::size_t> lv = live(c.kids[k]);
        if (!std::all_of(n.in.begin(), n.in.end(), [&](std::size_t o) { return contains(lv, o); })) continue;
        SkNode moved = n;
        moved.kids = {c.kids[k]};
        SkNode top = c;
        top.kids[k] = std::move(moved);
        out.push_back(std::move(top));
      }
    }
  } else if (is_binary(n.rule)) {
    for (std::size_t k = 0; k < 2; ++k) {
      const SkNode& c = n.kids[k];
      if (contains(c.out, n.in[k])) continue;
      if (is_unary(c.rule)) {
        SkNode lower = n;
        lower.kids[k] = c.kids[0];
        SkNode upper = c;
        upper.kids = {std::move(lower)};
        out.push_back(std::move(upper));
      } else if (is_binary(c.rule)) {
        std::size_t j = contains(live(c.kids[0]), n.in[k]) ? 0 : 1;
        SkNode alpha = n;
        alpha.kids[k] = c.kids[j];
        SkNode beta = c;
        beta.kids[j] = std::move(alpha);
        out.push_back(std::move(beta));
      }
    }
  }
  return out;
}

void rename(SkNode& n, std::size_t from, std::size_t to) {
  for (auto& o : n.in)
    if (o == from) o = to;
  for (auto& o : n.out)
    if (o == from) o = to;
  for (SkNode& k : n.kids) rename(k, from, to);
}

// Local cut-elimination step at a Cut node.
SkNode cut_local(const SkNode& c, std::vector<Formula>& occ) {
  const SkNode& l = c.kids[0];
  const SkNode& r = c.kids[1];
  std::size_t x = c.in[0], y = c.in[1];
  if (l.rule == RuleKind::Ax) {
    std::size_t p = l.out[0] == x ? l.out[1] : l.out[0];
    SkNode res = r;
    rename(res, y, p);
    return res;
  }
  if (r.rule == RuleKind::Ax) {
    std::size_t q = r.out[0] == y ? r.out[1] : r.out[0];
    SkNode res = l;
    rename(res, x, q);
    return res;
  }
  if (l.rule == RuleKind::Tensor && l.out[0] == x && r.rule == RuleKind::Par && r.out[0] == y) {
    SkNode inner;
    inner.rule = RuleKind::Cut;
    inner.a = occ[l.in[1]];
    inner.in = {l.in[1], r.in[0]};
    inner.kids = {l.kids[1], r.kids[0]};
    SkNode outer;
    outer.rule = RuleKind::Cut;
    outer.a = occ[l.in[0]];
    outer.in = {l.in[0], r.in[1]};
    outer.kids = {l.kids[0], std::move(inner)};
    return outer;
  }
  if (l.rule == RuleKind::Par && l.out[0] == x && r.rule == RuleKind::Tensor && r.out[0] == y) {
    SkNode inner;
    inner.rule = RuleKind::Cut;
    inner.a = occ[l.in[1]];
    inner.in = {l.in[1], r.in[0]};
    inner.kids = {l.kids[0], r.kids[0]};
    SkNode outer;
    outer.rule = RuleKind::Cut;
    outer.a = occ[l.in[0]];
    outer.in = {l.in[0], r.in[1]};
    outer.kids = {std::move(inner), r.kids[1]};
    return outer;
  }
  if (l.rule == RuleKind::Bot && l.out[0] == x && r.rule == RuleKind::One) return l.kids[0];
  if (l.rule == RuleKind::One && r.rule == RuleKind::Bot && r.out[0] == y) return r.kids[0];
  fail(Errc::NotApplicable, "commutative cut: an active formula is not principal");
}

// Pre-order index of the skeleton node reached by a derivation path.
std::size_t skeleton_index(const Derivation& d, const Path& path) {
  const Derivation* n = &d;
  // walk the derivation while keeping track of the pre-order index in the skeleton
  std::function<std::size_t(const Derivation&)> size = [&](const Derivation& x) -> std::size_t {
    if (x.rule == RuleKind::Exchange) return size(x.premises[0]);
    std::size_t s = 1;
    for (const Derivation& p : x.premises) s += size(p);
    return s;
  };
  std::size_t idx = 0;
  for (std::size_t i : path) {
    if (i >= n->premises.size()) fail(Errc::BadIndex, "bad path " + path_str(path));
    if (n->rule != RuleKind::Exchange) {
      idx += 1;
      for (std::size_t j = 0; j < i; ++j) idx += size(n->premises[j]);
    }
    n = &n->premises[i];
  }
  while (n->rule == RuleKind::Exchange) n = &n->premises[0];
  return idx;
}

}  // namespace

Skeleton skeleton(const Derivation& d) {
  Skeleton s;
  ToSkeleton t{s.occ};
  auto [root, ord] = t.run(d);
  s.root = std::move(root);
  s.order = std::move(ord);
  return s;
}

std::string Skeleton::key() const {
  std::map<std::size_t, std::size_t> ids;
  renumber(root, ids);
  std::string s;
  print(root, ids, occ, s);
  s += "|";
  for (std::size_t o : order) s += std::to_string(ids.at(o)) + ",";
  return s;
}

Derivation rebuild(const Skeleton& s) {
  Rebuild r{s.occ};
  auto [d, o] = r.run(s.root);
  return exchange_fused(perm_to(o, s.order), std::move(d));
}

std::vector<Skeleton> sim_neighbors(const Skeleton& s) {
  std::vector<Skeleton> out;
  std::size_t count = 0;
  {
    SkNode copy = s.root;
    each_node(copy, count, [](SkNode&, std::size_t) {});
  }
  for (std::size_t i = 0; i < count; ++i) {
    Skeleton base = s;
    SkNode* n = node_at(base.root, i);
    for (SkNode& alt : local_moves(*n)) {
      Skeleton t = s;
      *node_at(t.root, i) = std::move(alt);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<Derivation> sim_neighbors(const Derivation& d) {
  std::vector<Derivation> out;
  for (const Skeleton& s : sim_neighbors(skeleton(d))) out.push_back(rebuild(s));
  return out;
}

std::optional<std::size_t> sim_distance(const Derivation& d1, const Derivation& d2, std::size_t bound) {
  struct Side {
    std::unordered_map<std::string, std::size_t> dist;
    std::vector<Skeleton> frontier;
    std::size_t depth = 0;
  };
  Side a, b;
  Skeleton s1 = skeleton(d1), s2 = skeleton(d2);
  a.dist[s1.key()] = 0;
  b.dist[s2.key()] = 0;
  if (a.dist.count(s2.key())) return 0;
  a.frontier = {s1};
  b.frontier = {s2};
  while (a.depth + b.depth < bound) {
    Side& x = a.frontier.size() <= b.frontier.size() && !a.frontier.empty() ? a : b;
    Side& y = &x == &a ? b : a;
    if (x.frontier.empty()) return std::nullopt;
    std::vector<Skeleton> next;
    ++x.depth;
    for (const Skeleton& s : x.frontier)
      for (Skeleton& n : sim_neighbors(s)) {
        std::string k = n.key();
        if (x.dist.count(k)) continue;
        x.dist[k] = x.depth;
        if (auto it = y.dist.find(k); it != y.dist.end()) return x.depth + it->second;
        next.push_back(std::move(n));
      }
    x.frontier = std::move(next);
  }
  return std::nullopt;
}

Derivation cut_step(const Derivation& d, const Path& path) {
  if (at(d, path).rule != RuleKind::Cut) fail(Errc::NotApplicable, path_str(path) + " is not a cut");
  Skeleton s = skeleton(d);
  SkNode* c = node_at(s.root, skeleton_index(d, path));
  *c = cut_local(*c, s.occ);
  return rebuild(s);
}

std::vector<Path> applicable_cuts(const Derivation& d) {
  std::vector<Path> out;
  for (const Path& p : cut_paths(d)) {
    try {
      cut_step(d, p);
      out.push_back(p);
    } catch (const Error& e) {
      if (e.code() != Errc::NotApplicable) throw;
    }
  }
  return out;
}

namespace {

// Rule count of any cut-free proof of the sequent with atomic axioms, or
// npos when the atom counts rule a proof out.
std::size_t needed_rules(const std::vector<Formula>& fs) {
  std::size_t n = 0;
  std::map<std::string, long> balance;
  std::size_t atoms = 0;
  std::function<void(const Formula&)> walk = [&](const Formula& f) {
    switch (f.kind()) {
      case Formula::Kind::Atom:
        balance[f.name()] += f.dual() ? -1 : 1;
        ++atoms;
        break;
      case Formula::Kind::One:
      case Formula::Kind::Bot: ++n; break;
      default:
        ++n;
        walk(f.left());
        walk(f.right());
    }
  };
  for (const Formula& f : fs) walk(f);
  for (auto& [k, v] : balance)
    if (v != 0) return static_cast<std::size_t>(-1);
  return n + atoms / 2;
}

struct Search {
  std::vector<Formula>& occ;

  std::size_t fresh(const Formula& f) {
    occ.push_back(f);
    return occ.size() - 1;
  }

  std::vector<Formula> formulas(const std::vector<std::size_t>& goal) const {
    std::vector<Formula> fs;
    for (std::size_t o : goal) fs.push_back(occ[o]);
    return fs;
  }

  std::vector<SkNode> all(const std::vector<std::size_t>& goal) {
    std::vector<SkNode> out;
    if (needed_rules(formulas(goal)) == static_cast<std::size_t>(-1)) return out;
    if (goal.size() == 2 && occ[goal[1]] == negate(occ[goal[0]])) {
      SkNode n;
      n.rule = RuleKind::Ax;
      n.a = occ[goal[0]];
      n.out = goal;
      out.push_back(n);
    }
    if (goal.size() == 1 && occ[goal[0]].kind() == Formula::Kind::One) {
      SkNode n;
      n.rule = RuleKind::One;
      n.out = goal;
      out.push_back(n);
    }
    for (std::size_t i = 0; i < goal.size(); ++i) {
      Formula f = occ[goal[i]];
      std::vector<std::size_t> rest = goal;
      rest.erase(rest.begin() + i);
      if (f.kind() == Formula::Kind::Bot) {
        for (SkNode& k : all(rest)) {
          SkNode n;
          n.rule = RuleKind::Bot;
          n.out = {goal[i]};
          n.kids = {std::move(k)};
          out.push_back(std::move(n));
        }
      } else if (f.kind() == Formula::Kind::Par) {
        std::size_t a = fresh(f.left()), b = fresh(f.right());
        std::vector<std::size_t> prem = rest;
        prem.push_back(a);
        prem.push_back(b);
        for (SkNode& k : all(prem)) {
          SkNode n;
          n.rule = RuleKind::Par;
          n.in = {a, b};
          n.out = {goal[i]};
          n.kids = {std::move(k)};
          out.push_back(std::move(n));
        }
      } else if (f.kind() == Formula::Kind::Tensor) {
        std::size_t a = fresh(f.left()), b = fresh(f.right());
        for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
          std::vector<std::size_t> lg, rg{b};
          for (std::size_t j = 0; j < rest.size(); ++j) (mask >> j & 1 ? lg : rg).push_back(rest[j]);
          lg.push_back(a);
          if (needed_rules(formulas(lg)) == static_cast<std::size_t>(-1) ||
              needed_rules(formulas(rg)) == static_cast<std::size_t>(-1))
            continue;
          auto ls = all(lg);
          if (ls.empty()) continue;
          auto rs = all(rg);
          for (const SkNode& l : ls)
            for (const SkNode& r : rs) {
              SkNode n;
              n.rule = RuleKind::Tensor;
              n.in = {a, b};
              n.out = {goal[i]};
              n.kids = {l, r};
              out.push_back(std::move(n));
            }
        }
      }
    }
    return out;
  }
};

std::size_t node_count(const SkNode& n) {
  std::size_t c = 1;
  for (const SkNode& k : n.kids) c += node_count(k);
  return c;
}

std::string multiset_key(std::vector<Formula> fs) {
  std::sort(fs.begin(), fs.end());
  std::string k;
  for (const Formula& f : fs) k += f.str() + ",";
  return k;
}

bool prove(std::vector<Formula> fs, std::unordered_map<std::string, bool>& memo) {
  if (needed_rules(fs) == static_cast<std::size_t>(-1)) return false;
  std::string key = multiset_key(fs);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  bool ok = false;
  if (fs.size() == 2 && fs[0].is_atom() && fs[1] == negate(fs[0])) ok = true;
  if (fs.size() == 1 && fs[0].kind() == Formula::Kind::One) ok = true;
  for (std::size_t i = 0; i < fs.size() && !ok; ++i) {
    std::vector<Formula> rest = fs;
    rest.erase(rest.begin() + i);
    const Formula& f = fs[i];
    if (f.kind() == Formula::Kind::Bot) {
      ok = prove(rest, memo);
    } else if (f.kind() == Formula::Kind::Par) {
      rest.push_back(f.left());
      rest.push_back(f.right());
      ok = prove(rest, memo);
    } else if (f.kind() == Formula::Kind::Tensor) {
      for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()) && !ok; ++mask) {
        std::vector<Formula> l{f.left()}, r{f.right()};
        for (std::size_t j = 0; j < rest.size(); ++j) (mask >> j & 1 ? l : r).push_back(rest[j]);
        ok = prove(l, memo) && prove(r, memo);
      }
    }
  }
  memo[key] = ok;
  return ok;
}

}  // namespace

std::vector<Derivation> enumerate_derivations(const Sequent& s, std::size_t max_rules) {
  std::vector<Derivation> out;
  Skeleton base;
  for (const Formula& f : s) {
    base.occ.push_back(f);
    base.order.push_back(base.occ.size() - 1);
  }
  Search search{base.occ};
  std::vector<SkNode> roots = search.all(base.order);
  std::set<std::string> seen;
  for (SkNode& r : roots) {
    Skeleton sk;
    sk.root = std::move(r);
    sk.occ = base.occ;
    sk.order = base.order;
    if (node_count(sk.root) <= max_rules && seen.insert(sk.key()).second) out.push_back(rebuild(sk));
  }
  return out;
}

bool provable(const Sequent& s) {
  std::unordered_map<std::string, bool> memo;
  return prove(s, memo);
}

}  // namespace pd
