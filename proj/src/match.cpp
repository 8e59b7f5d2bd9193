#include "pd/match.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <tuple>

#include "pd/error.hpp"

namespace pd {

Formula Substitution::apply(const Formula& f) const {
  if (!f.has_meta()) return f;
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = vars.find(f.name());
      if (it == vars.end()) return f;
      return f.dual() ? negate(it->second) : it->second;
    }
    case Formula::Kind::Tensor: return Formula::tensor(apply(f.left()), apply(f.right()));
    case Formula::Kind::Par: return Formula::par(apply(f.left()), apply(f.right()));
    default: return f;
  }
}

WireLabel Substitution::apply(const WireLabel& l) const { return l.is_formula() ? WireLabel(apply(l.formula())) : l; }

Word Substitution::apply(const Word& w) const {
  Word r;
  r.reserve(w.size());
  for (const WireLabel& l : w) r.push_back(apply(l));
  return r;
}

GateType Substitution::apply(const GateType& g) const {
  GateType r = g;
  r.a = apply(g.a);
  r.b = apply(g.b);
  r.w = apply(g.w);
  r.w2 = apply(g.w2);
  return r;
}

Diagram Substitution::apply(const Diagram& d) const {
  std::vector<Layer> layers;
  for (const Layer& l : d.layers()) {
    Layer m;
    for (const Slot& s : l) {
      if (auto* id = std::get_if<Identity>(&s))
        m.push_back(Identity{apply(id->label)});
      else
        m.push_back(Gate{apply(std::get<Gate>(s).type)});
    }
    layers.push_back(std::move(m));
  }
  return Diagram(d.signature(), apply(d.input()), std::move(layers));
}

std::string Substitution::str() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : vars) {
    s += (first ? "" : ", ") + k + "->" + v.str();
    first = false;
  }
  for (const auto& [k, v] : words) {
    s += (first ? "" : ", ") + k + "->[" + word_str(v) + "]";
    first = false;
  }
  return s + "}";
}

bool unify(const Formula& p, const Formula& v, Substitution& s) {
  if (!p.has_meta()) return p == v;
  if (p.is_meta()) {
    Formula target = p.dual() ? negate(v) : v;
    auto [it, fresh] = s.vars.emplace(p.name(), target);
    return fresh || it->second == target;
  }
  if (p.kind() != v.kind()) return false;
  return unify(p.left(), v.left(), s) && unify(p.right(), v.right(), s);
}

bool unify(const WireLabel& p, const WireLabel& v, Substitution& s) {
  if (p.kind() != v.kind()) return false;
  return !p.is_formula() || unify(p.formula(), v.formula(), s);
}

bool unify(const GateType& p, const GateType& v, Substitution& s) {
  if (p.family != v.family) return false;
  switch (p.family) {
    case Family::Tensor:
    case Family::Par:
    case Family::Twist: return unify(p.a, v.a, s) && unify(p.b, v.b, s);
    case Family::Ax:
    case Family::Cut: return unify(p.a, v.a, s);
    case Family::Big: {
      if (p.w.size() != v.w.size() || p.w2.size() != v.w2.size()) return false;
      for (std::size_t i = 0; i < p.w.size(); ++i)
        if (!unify(p.w[i], v.w[i], s)) return false;
      for (std::size_t i = 0; i < p.w2.size(); ++i)
        if (!unify(p.w2[i], v.w2[i], s)) return false;
      return true;
    }
    default: return true;
  }
}

std::string linear_key(const Linear& l) {
  std::string k = l.sig == Signature::Controlled ? "c|" : "u|";
  k += word_str(l.input);
  k += '|';
  for (const Step& s : l.steps) {
    k += s.type.str();
    k += '@';
    k += std::to_string(s.offset);
    k += ';';
  }
  return k;
}

std::size_t fingerprint(const Diagram& canonical_phi) {
  return std::hash<std::string>{}(linear_key(linearize(canonical_phi)));
}

namespace {

std::vector<std::vector<std::size_t>> successors(const std::vector<std::vector<std::size_t>>& deps) {
  std::vector<std::vector<std::size_t>> succ(deps.size());
  for (std::size_t k = 0; k < deps.size(); ++k)
    for (std::size_t d : deps[k]) succ[d].push_back(k);
  return succ;
}

std::optional<std::pair<Linear, std::size_t>> isolate_with(const Linear& l, const std::vector<std::size_t>& block,
                                                           const std::vector<std::vector<std::size_t>>& deps,
                                                           const std::vector<std::vector<std::size_t>>& succ) {
  std::size_t n = l.steps.size();
  std::vector<char> in_block(n, 0), desc(n, 0), anc(n, 0);
  for (std::size_t b : block) in_block[b] = 1;
  std::vector<std::size_t> stack(block.begin(), block.end());
  while (!stack.empty()) {
    std::size_t x = stack.back();
    stack.pop_back();
    for (std::size_t y : succ[x])
      if (!desc[y]) {
        desc[y] = 1;
        stack.push_back(y);
      }
  }
  stack.assign(block.begin(), block.end());
  while (!stack.empty()) {
    std::size_t x = stack.back();
    stack.pop_back();
    for (std::size_t y : deps[x])
      if (!anc[y]) {
        anc[y] = 1;
        stack.push_back(y);
      }
  }
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    if (desc[i] && anc[i] && !in_block[i]) return std::nullopt;
    if (!in_block[i] && !desc[i]) order.push_back(i);
  }
  std::size_t base = order.size();
  order.insert(order.end(), block.begin(), block.end());
  for (std::size_t i = 0; i < n; ++i)
    if (desc[i] && !in_block[i]) order.push_back(i);
  auto r = reorder(l, order);
  if (!r) return std::nullopt;
  return std::make_pair(std::move(*r), base);
}

}  // namespace

std::optional<std::pair<Linear, std::size_t>> isolate_block(const Linear& l, const std::vector<std::size_t>& block) {
  auto deps = step_dependencies(l);
  return isolate_with(l, block, deps, successors(deps));
}

Pattern::Pattern(const Diagram& schema) {
  schema_ = pd::canonical(schema);
  lin_ = linearize(schema_);
  g_ = wire_graph(lin_);
  out_ = schema_.output();
  std::size_t m = lin_.steps.size();
  std::vector<char> seen(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    if (seen[r]) continue;
    roots_.push_back(r);
    plans_.emplace_back();
    std::vector<std::size_t> queue{r};
    seen[r] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      std::size_t a = queue[qi];
      for (std::size_t j = 0; j < g_.in_src[a].size(); ++j) {
        const PortRef& src = g_.in_src[a][j];
        if (src.step != PortRef::npos && !seen[src.step]) {
          seen[src.step] = 1;
          queue.push_back(src.step);
          plans_.back().push_back({a, true, j, src.step, src.port});
        }
      }
      for (std::size_t j = 0; j < g_.out_dst[a].size(); ++j) {
        const PortRef& dst = g_.out_dst[a][j];
        if (dst.step != PortRef::npos && !seen[dst.step]) {
          seen[dst.step] = 1;
          queue.push_back(dst.step);
          plans_.back().push_back({a, false, j, dst.step, dst.port});
        }
      }
    }
  }
}

MatchContext::MatchContext(const Diagram& phi) {
  canon_ = pd::canonical(phi);
  lin_ = linearize(canon_);
  g_ = wire_graph(lin_);
  deps_ = step_dependencies(lin_);
  succ_ = successors(deps_);
  for (std::size_t i = 0; i < canon_.layers().size(); ++i)
    for (const Slot& s : canon_.layers()[i])
      if (std::holds_alternative<Gate>(s)) lv_.push_back(i);
  pos_in_layer_.assign(lin_.steps.size(), 0);
  std::ptrdiff_t shift = 0;
  for (std::size_t k = 0; k < lin_.steps.size(); ++k) {
    if (k == 0 || lv_[k] != lv_[k - 1]) shift = 0;
    const Step& s = lin_.steps[k];
    pos_in_layer_[k] = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.offset) - shift);
    shift += static_cast<std::ptrdiff_t>(s.type.out_arity(lin_.sig)) - static_cast<std::ptrdiff_t>(s.type.in_arity(lin_.sig));
  }
  fp_ = std::hash<std::string>{}(linear_key(lin_));
}

std::vector<MatchSite> MatchContext::find(const Pattern& p) const {
  std::vector<MatchSite> sites;
  const std::size_t m = p.lin_.steps.size(), n = lin_.steps.size();
  if (m == 0 || m > n || p.lin_.sig != lin_.sig) return sites;
  constexpr std::size_t npos = PortRef::npos;
  std::vector<std::size_t> map(m, npos);
  std::vector<char> used(n, 0);

  auto finalize = [&]() {
    std::vector<char> image(n, 0);
    for (std::size_t f : map) image[f] = 1;
    for (std::size_t a = 0; a < m; ++a) {
      std::size_t fa = map[a];
      for (std::size_t j = 0; j < p.g_.in_src[a].size(); ++j) {
        const PortRef& ps = p.g_.in_src[a][j];
        const PortRef& fs = g_.in_src[fa][j];
        if (ps.step != npos) {
          if (fs.step != map[ps.step] || fs.port != ps.port) return;
        } else if (fs.step != npos && image[fs.step]) {
          return;
        }
      }
      for (std::size_t j = 0; j < p.g_.out_dst[a].size(); ++j) {
        const PortRef& pd = p.g_.out_dst[a][j];
        const PortRef& fd = g_.out_dst[fa][j];
        if (pd.step != npos) {
          if (fd.step != map[pd.step] || fd.port != pd.port) return;
        } else if (fd.step != npos && image[fd.step]) {
          return;
        }
      }
    }
    Substitution sub;
    for (std::size_t a = 0; a < m; ++a)
      if (!unify(p.lin_.steps[a].type, lin_.steps[map[a]].type, sub)) return;
    auto iso = isolate_with(lin_, map, deps_, succ_);
    if (!iso) return;
    const auto& [fl, base] = *iso;
    std::ptrdiff_t d = static_cast<std::ptrdiff_t>(fl.steps[base].offset) - static_cast<std::ptrdiff_t>(p.lin_.steps[0].offset);
    if (d < 0) return;
    for (std::size_t j = 0; j < m; ++j)
      if (static_cast<std::ptrdiff_t>(fl.steps[base + j].offset) != d + static_cast<std::ptrdiff_t>(p.lin_.steps[j].offset)) return;
    Word w = fl.input;
    for (std::size_t k = 0; k < base; ++k) apply_step(w, fl.steps[k], fl.sig);
    std::size_t ud = static_cast<std::size_t>(d);
    if (ud + p.lin_.input.size() > w.size()) return;
    for (std::size_t i = 0; i < p.lin_.input.size(); ++i)
      if (!unify(p.lin_.input[i], w[ud + i], sub)) return;
    MatchSite site;
    site.offset = ud;
    site.steps = map;
    site.fingerprint = fp_;
    std::size_t lo = lv_[map[0]], hi = lv_[map[0]];
    for (std::size_t f : map) {
      lo = std::min(lo, lv_[f]);
      hi = std::max(hi, lv_[f]);
    }
    site.layer_span = {lo, hi};
    site.window_in = sub.apply(p.lin_.input);
    site.window_out = sub.apply(p.out_);
    site.substitution = std::move(sub);
    sites.push_back(std::move(site));
  };

  std::function<void(std::size_t)> comp = [&](std::size_t c) {
    if (c == p.roots_.size()) {
      finalize();
      return;
    }
    std::size_t r = p.roots_[c];
    const GateType& rt = p.lin_.steps[r].type;
    for (std::size_t f = 0; f < n; ++f) {
      if (used[f] || lin_.steps[f].type.family != rt.family) continue;
      std::vector<std::size_t> assigned{r};
      map[r] = f;
      used[f] = 1;
      bool ok = true;
      for (const Pattern::Edge& e : p.plans_[c]) {
        std::size_t fa = map[e.from];
        const PortRef& ref = e.via_input ? g_.in_src[fa][e.port] : g_.out_dst[fa][e.port];
        if (ref.step == npos || ref.port != e.to_port || used[ref.step] ||
            lin_.steps[ref.step].type.family != p.lin_.steps[e.to].type.family) {
          ok = false;
          break;
        }
        map[e.to] = ref.step;
        used[ref.step] = 1;
        assigned.push_back(e.to);
      }
      if (ok) comp(c + 1);
      for (std::size_t a : assigned) {
        used[map[a]] = 0;
        map[a] = npos;
      }
    }
  };
  comp(0);

  auto key = [&](const MatchSite& s) {
    std::size_t left = npos;
    for (std::size_t f : s.steps)
      if (lv_[f] == s.layer_span.first) left = std::min(left, pos_in_layer_[f]);
    return std::make_tuple(s.layer_span.first, left, s.steps);
  };
  std::stable_sort(sites.begin(), sites.end(), [&](const MatchSite& a, const MatchSite& b) { return key(a) < key(b); });
  return sites;
}

std::vector<MatchSite> find_matches(const Diagram& phi, const Diagram& schema) {
  return MatchContext(phi).find(Pattern(schema));
}

Diagram replace_at(const Diagram& phi, const MatchSite& site, const Diagram& target) {
  Diagram canon = canonical(phi);
  Linear lin = linearize(canon);
  if (std::hash<std::string>{}(linear_key(lin)) != site.fingerprint)
    fail(Errc::StaleSite, "diagram changed since the site was computed");
  for (std::size_t s : site.steps)
    if (s >= lin.steps.size()) fail(Errc::StaleSite, "site refers to a missing step");
  auto iso = isolate_block(lin, site.steps);
  if (!iso) fail(Errc::StaleSite, "matched block is no longer convex");
  const auto& [fl, base] = *iso;
  Diagram inst = canonical(site.substitution.apply(target));
  if (inst.input() != site.window_in)
    fail(Errc::BoundaryMismatch, "target input '" + word_str(inst.input()) + "' differs from site '" + word_str(site.window_in) + "'");
  if (inst.output() != site.window_out)
    fail(Errc::BoundaryMismatch, "target output '" + word_str(inst.output()) + "' differs from site '" + word_str(site.window_out) + "'");
  Linear t = linearize(inst);
  Linear out{fl.sig, fl.input, {}};
  out.steps.assign(fl.steps.begin(), fl.steps.begin() + base);
  for (const Step& s : t.steps) out.steps.push_back({s.type, s.offset + site.offset});
  out.steps.insert(out.steps.end(), fl.steps.begin() + base + site.steps.size(), fl.steps.end());
  return to_layers(out);
}

}  // namespace pd
