#include "pd/rewrite.hpp"

#include <algorithm>
#include <functional>
#include <tuple>

#include "pd/error.hpp"
#include "pd/linear.hpp"
#include "pd/permutation.hpp"

namespace pd {

namespace {

using Kind = Polygraph::Entry::Kind;

const Formula A = Formula::meta("A"), B = Formula::meta("B"), C = Formula::meta("C");

Formula gvar(std::size_t i) { return Formula::meta("G" + std::to_string(i + 1)); }

Word gamma(std::size_t n) {
  Word w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(gvar(i));
  return w;
}

Word cat(std::initializer_list<Word> parts) {
  Word r;
  for (const Word& p : parts) r.insert(r.end(), p.begin(), p.end());
  return r;
}

// Moves the wire at `from` right over the next n wires.
Builder& left_ladder(Builder& b, std::size_t from, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) b.twist(from + i);
  return b;
}

// Moves the wire at `from` left over the n wires before it.
Builder& right_ladder(Builder& b, std::size_t from, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) b.twist(from - 1 - i);
  return b;
}

struct RuleBuilder {
  Signature sig;
  std::string group;

  RewriteRule operator()(std::string name, const Word& in, const std::function<void(Builder&)>& src,
                         const std::function<void(Builder&)>& tgt, std::vector<std::string> words = {}) const {
    Builder s(sig, in), t(sig, in);
    src(s);
    tgt(t);
    RewriteRule r{std::move(name), group, s.diagram(), t.diagram(), std::move(words), {}};
    if (r.source.output() != r.target.output())
      fail(Errc::BoundaryMismatch, "rule " + r.name + ": '" + word_str(r.source.output()) + "' vs '" +
                                       word_str(r.target.output()) + "'");
    return r;
  }
};

Polygraph::Entry fixed(RewriteRule r) {
  Polygraph::Entry e;
  e.kind = Kind::Fixed;
  e.name = r.name;
  e.group = r.group;
  e.rule = std::move(r);
  return e;
}

Polygraph::Entry family(std::string name, std::string group, std::function<std::vector<RewriteRule>(std::size_t)> make,
                        std::size_t max_n = static_cast<std::size_t>(-1)) {
  Polygraph::Entry e;
  e.kind = Kind::Family;
  e.name = std::move(name);
  e.group = std::move(group);
  e.make = std::move(make);
  e.max_n = max_n;
  return e;
}

Polygraph::Entry procedural(std::shared_ptr<const Procedure> p) {
  Polygraph::Entry e;
  e.kind = Kind::Procedural;
  e.name = p->name();
  e.group = p->group();
  e.proc = std::move(p);
  return e;
}

std::vector<Polygraph::Entry> twist_laws(Signature sig) {
  RuleBuilder r{sig, "twist"};
  return {
      fixed(r("inv", {A, B}, [](Builder& b) { b.twist(0).twist(0); }, [](Builder&) {})),
      fixed(r("yb", {A, B, C}, [](Builder& b) { b.twist(0).twist(1).twist(0); },
              [](Builder& b) { b.twist(1).twist(0).twist(1); })),
  };
}

// Gate crossings for a binary gate family acting on formula wires only.
std::vector<Polygraph::Entry> binary_crossings(Signature sig, const std::string& tag,
                                               Builder& (Builder::*g)(std::size_t), const std::string& group) {
  RuleBuilder r{sig, group};
  return {
      fixed(r(tag + "-cross-l", {A, B, C}, [&](Builder& b) { (b.*g)(0).twist(0); },
              [&](Builder& b) { (b.twist(1).twist(0).*g)(1); })),
      fixed(r(tag + "-cross-r", {C, A, B}, [&](Builder& b) { (b.*g)(1).twist(0); },
              [&](Builder& b) { (b.twist(0).twist(1).*g)(0); })),
  };
}

std::vector<Polygraph::Entry> unit_crossings(Signature sig, const std::string& tag, Builder& (Builder::*g)(std::size_t),
                                             const std::string& group) {
  RuleBuilder r{sig, group};
  return {
      fixed(r(tag + "-cross-l", {A}, [&](Builder& b) { (b.*g)(0).twist(0); }, [&](Builder& b) { (b.*g)(1); })),
      fixed(r(tag + "-cross-r", {A}, [&](Builder& b) { (b.*g)(1).twist(0); }, [&](Builder& b) { (b.*g)(0); })),
  };
}

void append(std::vector<Polygraph::Entry>& to, std::vector<Polygraph::Entry> from) {
  for (auto& e : from) to.push_back(std::move(e));
}

std::vector<Family> uncontrolled_families() {
  return {Family::Tensor, Family::Par, Family::Ax, Family::Cut, Family::Twist, Family::One, Family::Bot};
}

Polygraph make_S() {
  return Polygraph("S", Signature::Uncontrolled, "any formula", "all wires", {Family::Twist},
                   twist_laws(Signature::Uncontrolled));
}

Polygraph make_MLLu_Cut() {
  const Signature u = Signature::Uncontrolled;
  std::vector<Polygraph::Entry> es = twist_laws(u);
  RuleBuilder m{u, "twist-M"};
  es.push_back(fixed(m("ax-slide-l", {B}, [](Builder& b) { b.ax(A, 0).twist(1).twist(0); },
                       [](Builder& b) { b.ax(A, 1); })));
  es.push_back(fixed(m("ax-slide-r", {B}, [](Builder& b) { b.ax(A, 1).twist(0).twist(1); },
                       [](Builder& b) { b.ax(A, 0); })));
  es.push_back(fixed(m("cut-slide-l", {A, negate(A), B}, [](Builder& b) { b.twist(1).twist(0).cut(1); },
                       [](Builder& b) { b.cut(0); })));
  es.push_back(fixed(m("cut-slide-r", {B, A, negate(A)}, [](Builder& b) { b.twist(0).twist(1).cut(0); },
                       [](Builder& b) { b.cut(1); })));
  append(es, binary_crossings(u, "tensor", &Builder::tensor, "twist-M"));
  append(es, binary_crossings(u, "par", &Builder::par, "twist-M"));
  es.push_back(fixed(m("ax-inv", {}, [](Builder& b) { b.ax(A, 0).twist(0); },
                       [](Builder& b) { b.ax(negate(A), 0); })));
  es.push_back(fixed(m("cut-inv", {negate(A), A}, [](Builder& b) { b.twist(0).cut(0); },
                       [](Builder& b) { b.cut(0); })));
  append(es, unit_crossings(u, "bot", &Builder::bot, "twist-u"));
  append(es, unit_crossings(u, "one", &Builder::one, "twist-u"));

  RuleBuilder x{u, "ax-cut"};
  es.push_back(family("ax-cut-r", "ax-cut", [x](std::size_t n) {
    return std::vector<RewriteRule>{x("ax-cut-r/" + std::to_string(n), cat({gamma(n), {A}}),
                                      [n](Builder& b) { left_ladder(b.ax(A, 0), 1, n).cut(n + 1); },
                                      [n](Builder& b) { right_ladder(b, n, n); }, {"G"})};
  }));
  es.push_back(family("ax-cut-l", "ax-cut", [x](std::size_t n) {
    return std::vector<RewriteRule>{x("ax-cut-l/" + std::to_string(n), cat({{A}, gamma(n)}),
                                      [n](Builder& b) { right_ladder(b.ax(negate(A), n + 1), n + 1, n).cut(0); },
                                      [n](Builder& b) { left_ladder(b, 0, n); }, {"G"})};
  }));
  es.push_back(fixed(x("ax-cut-twist", {A}, [](Builder& b) { b.ax(negate(A), 0).twist(1).cut(0); },
                       [](Builder&) {})));
  // Bounded to n <= 3: one rule per permutation of the passing wires.
  es.push_back(family(
      "ax-cut-sigma", "ax-cut",
      [x](std::size_t n) {
        std::vector<RewriteRule> out;
        for (const Permutation& s : all_permutations(n)) {
          std::vector<std::size_t> offs = canonical_twist_offsets(s);
          out.push_back(x("ax-cut-sigma/" + std::to_string(n) + s.str(), cat({{A}, gamma(n)}),
                          [n, offs](Builder& b) {
                            right_ladder(b.ax(A, n + 1), n + 1, n).twist(0);
                            for (std::size_t o : offs) b.twist(2 + o);
                            left_ladder(b, 1, n).cut(n + 1);
                          },
                          [offs](Builder& b) {
                            for (std::size_t o : offs) b.twist(1 + o);
                          },
                          {"G"}));
        }
        return out;
      },
      3));
  RuleBuilder c{u, "M-cut"};
  es.push_back(fixed(c("par-tensor-cut", {A, B, negate(B), negate(A)}, [](Builder& b) { b.par(0).tensor(1).cut(0); },
                       [](Builder& b) { b.cut(1).cut(0); })));
  es.push_back(fixed(c("tensor-par-cut", {A, B, negate(B), negate(A)}, [](Builder& b) { b.tensor(0).par(1).cut(0); },
                       [](Builder& b) { b.cut(1).cut(0); })));
  RuleBuilder uc{u, "u-cut"};
  es.push_back(fixed(uc("bot-one-cut", {}, [](Builder& b) { b.bot(0).one(1).cut(0); }, [](Builder&) {})));
  es.push_back(fixed(uc("one-bot-cut", {}, [](Builder& b) { b.one(0).bot(1).cut(0); }, [](Builder&) {})));
  return Polygraph("MLLu_Cut", u, "any formula", "all wires", uncontrolled_families(), std::move(es));
}

std::vector<Polygraph::Entry> ctrl_rules() {
  const Signature c = Signature::Controlled;
  std::vector<Polygraph::Entry> es = twist_laws(c);
  append(es, binary_crossings(c, "par", &Builder::par, "twist"));
  RuleBuilder r{c, "twist"};
  es.push_back(fixed(r("ax-inv", {}, [](Builder& b) { b.ax(A, 0).twist(1); },
                       [](Builder& b) { b.ax(negate(A), 0); })));
  append(es, unit_crossings(c, "bot", &Builder::bot, "twist"));
  return es;
}

std::vector<Family> controlled_families(bool big) {
  std::vector<Family> f = uncontrolled_families();
  if (big) f.push_back(Family::Big);
  return f;
}

const char* kCtrlWires = "formulas plus the non-twisting control wires L and R";
const char* kCtrlTwisting = "formula wires";

Polygraph make_MLL_ctrl() {
  return Polygraph("MLL_ctrl", Signature::Controlled, kCtrlWires, kCtrlTwisting, controlled_families(false),
                   ctrl_rules());
}

std::vector<Polygraph::Entry> big_rules_head() {
  std::vector<Polygraph::Entry> es = ctrl_rules();
  es.push_back(procedural(untangle_procedure()));
  return es;
}

Polygraph make_MLL_big() {
  std::vector<Polygraph::Entry> es = big_rules_head();
  es.push_back(procedural(b_intro_procedure()));
  return Polygraph("MLL_big", Signature::Controlled, kCtrlWires, kCtrlTwisting, controlled_families(true),
                   std::move(es));
}

Polygraph make_Sem() {
  const Signature c = Signature::Controlled;
  std::vector<Polygraph::Entry> es = big_rules_head();
  RuleBuilder s{c, "cut"};
  const Word l{kL}, r{kR};
  es.push_back(fixed(s("cut-ax-l", {kL, A}, [](Builder& b) { b.ax(A, 0).cut(2); }, [](Builder&) {})));
  es.push_back(fixed(s("cut-ax-r", {A, kR}, [](Builder& b) { b.ax(negate(A), 2).cut(0); }, [](Builder&) {})));
  es.push_back(family("cut-tensor", "cut", [s](std::size_t n) {
    Word in = cat({{A, kR, kL, B}, gamma(n), {kR, kL, negate(B), negate(A)}});
    return std::vector<RewriteRule>{s(
        "cut-tensor/" + std::to_string(n), in,
        [n](Builder& b) { left_ladder(b.tensor(0).par(n + 3), 0, n).cut(n); },
        [n](Builder& b) { right_ladder(left_ladder(b, 3, n).cut(n + 3), n + 3, n).cut(0); }, {"G"})};
  }));
  es.push_back(family("cut-par", "cut", [s](std::size_t n) {
    Word in = cat({{A, B, kR, kL}, gamma(n), {negate(B), kR, kL, negate(A)}});
    return std::vector<RewriteRule>{s(
        "cut-par/" + std::to_string(n), in,
        [n](Builder& b) { right_ladder(b.par(0).tensor(n + 3), n + 3, n).cut(0); },
        [n](Builder& b) { left_ladder(right_ladder(b, n + 4, n).cut(1), 0, n).cut(n); }, {"G"})};
  }));
  es.push_back(fixed(s("cut-bot-one", {kR}, [](Builder& b) { b.bot(0).one(2).cut(0); }, [](Builder&) {})));
  es.push_back(fixed(s("cut-one-bot", {kL}, [](Builder& b) { b.one(0).bot(4).cut(1); }, [](Builder&) {})));
  es.push_back(procedural(b_intro_procedure()));
  return Polygraph("Sem", c, kCtrlWires, kCtrlTwisting, controlled_families(true), std::move(es));
}

std::size_t max_width(const Diagram& phi) {
  std::size_t w = phi.input().size();
  for (const Layer& l : phi.layers()) {
    std::size_t k = 0;
    for (const Slot& s : l) k += slot_outputs(s, phi.signature()).size();
    w = std::max(w, k);
  }
  return w;
}

bool site_before(const MatchSite& a, const MatchSite& b) {
  return std::tie(a.layer_span.first, a.offset, a.steps) < std::tie(b.layer_span.first, b.offset, b.steps);
}

const Polygraph::Prepared* find_rule(const std::vector<Polygraph::Prepared>& rs, const std::string& name) {
  for (const auto& r : rs) {
    if (r.proc && r.proc->name() == name) return &r;
    if (r.rule && r.rule->name == name) return &r;
  }
  return nullptr;
}


long formula_size(const Formula& f) { return 2 * static_cast<long>(f.connectives()) + 1; }

Affine var(std::size_t n, std::size_t i) {
  Affine a;
  a.k.assign(n, 0);
  a.k[i] = 1;
  return a;
}

Affine constant(long c, std::size_t n = 0) { return Affine{c, std::vector<long>(n, 0)}; }

MonotoneInterpretation base_interpretation(std::string name, long twist_c) {
  MonotoneInterpretation m;
  m.name = std::move(name);
  m.gates[Family::Twist] = [twist_c](const GateType&, Signature) {
    return std::vector<Affine>{{twist_c, {1, 1}}, {0, {1, 0}}};
  };
  m.gates[Family::Par] = [](const GateType&, Signature) { return std::vector<Affine>{{1, {1, 1}}}; };
  m.gates[Family::Tensor] = [](const GateType&, Signature sig) {
    if (sig == Signature::Controlled) return std::vector<Affine>{{1, {1, 0, 0, 1}}};
    return std::vector<Affine>{{1, {1, 1}}};
  };
  m.gates[Family::Ax] = [](const GateType&, Signature sig) {
    return std::vector<Affine>(sig == Signature::Controlled ? 4 : 2, constant(1));
  };
  m.gates[Family::Cut] = [](const GateType&, Signature) { return std::vector<Affine>{}; };
  m.gates[Family::Bot] = [](const GateType&, Signature) { return std::vector<Affine>{constant(1)}; };
  m.gates[Family::One] = [](const GateType&, Signature sig) {
    return std::vector<Affine>(sig == Signature::Controlled ? 3 : 1, constant(1));
  };
  return m;
}

std::string vec_str(const std::vector<long>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

}  // namespace

Diagram apply_recorded(const Polygraph& p, const Diagram& cur, const TraceStep& st) {
  auto rs = p.rules(max_width(cur));
  const Polygraph::Prepared* r = find_rule(rs, st.rule);
  if (!r) fail(Errc::StaleSite, "rule " + st.rule + " is not available at this width");
  MatchContext ctx(cur);
  if (r->proc) {
    for (Application& a : r->proc->find(ctx))
      if (a.site.steps == st.site.steps) return std::move(a.result);
    fail(Errc::StaleSite, "no " + st.rule + " application at the recorded steps");
  }
  for (const MatchSite& s : ctx.find(*r->pattern))
    if (s.steps == st.site.steps && s.substitution == st.site.substitution)
      return replace_at(ctx.canonical(), s, r->rule->target);
  fail(Errc::StaleSite, "no " + st.rule + " match at the recorded steps");
}

std::string Polygraph::group_of(const std::string& rule) const {
  const std::string base = rule.substr(0, rule.find('/'));
  for (const Entry& e : entries_)
    if (e.name == base) return e.group;
  fail(Errc::InvalidRule, "no rule " + rule + " in " + name_);
}

// ---------------------------------------------------------------------------

Polygraph::Polygraph(std::string name, Signature sig, std::string wires, std::string twisting,
                     std::vector<Family> families, std::vector<Entry> entries)
    : name_(std::move(name)),
      sig_(sig),
      wires_(std::move(wires)),
      twisting_(std::move(twisting)),
      families_(std::move(families)),
      entries_(std::move(entries)) {
  for (const Entry& e : entries_)
    fixed_patterns_.push_back(e.kind == Kind::Fixed ? std::make_unique<Pattern>(e.rule.source) : nullptr);
  instances_.resize(entries_.size());
}

void Polygraph::expand(std::size_t width) const {
  if (any_expanded_ && expanded_ >= width) return;
  std::size_t from = any_expanded_ ? expanded_ + 1 : 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.kind != Kind::Family) continue;
    for (std::size_t n = from; n <= width && n <= e.max_n; ++n)
      for (RewriteRule& r : e.make(n)) {
        auto inst = std::make_unique<Instance>();
        inst->pattern = std::make_unique<Pattern>(r.source);
        inst->rule = std::move(r);
        instances_[i].push_back(std::move(inst));
      }
  }
  expanded_ = width;
  any_expanded_ = true;
}

std::vector<Polygraph::Prepared> Polygraph::rules(std::size_t width) const {
  std::lock_guard<std::mutex> lock(mu_);
  expand(width);
  std::vector<Prepared> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    switch (e.kind) {
      case Kind::Fixed: out.push_back({&e.rule, fixed_patterns_[i].get(), nullptr}); break;
      case Kind::Procedural: out.push_back({nullptr, nullptr, e.proc.get()}); break;
      case Kind::Family:
        for (const auto& inst : instances_[i]) {
          // instances are stored by increasing n; the word length is the
          // number of G variables in the source input
          std::size_t n = 0;
          for (const WireLabel& l : inst->rule.source.input())
            if (l.is_formula() && l.formula().is_meta() && l.formula().name()[0] == 'G') ++n;
          if (n <= width) out.push_back({&inst->rule, inst->pattern.get(), nullptr});
        }
        break;
    }
  }
  return out;
}

std::vector<RewriteRule> Polygraph::schemas(std::size_t width) const {
  std::vector<RewriteRule> out;
  for (const Prepared& p : rules(width))
    if (p.rule) out.push_back(*p.rule);
  return out;
}

const Polygraph& polygraph(const std::string& name) {
  // Built on first use; function-local statics are thread-safe.
  if (name == "S") {
    static const Polygraph p = make_S();
    return p;
  }
  if (name == "MLLu_Cut") {
    static const Polygraph p = make_MLLu_Cut();
    return p;
  }
  if (name == "MLL_ctrl") {
    static const Polygraph p = make_MLL_ctrl();
    return p;
  }
  if (name == "MLL_big") {
    static const Polygraph p = make_MLL_big();
    return p;
  }
  if (name == "Sem") {
    static const Polygraph p = make_Sem();
    return p;
  }
  fail(Errc::UnknownPolygraph, "'" + name + "' (expected one of S, MLLu_Cut, MLL_ctrl, MLL_big, Sem)");
}

std::vector<std::string> polygraph_names() { return {"S", "MLLu_Cut", "MLL_ctrl", "MLL_big", "Sem"}; }

std::vector<Application> all_applications(const Polygraph& p, const Diagram& phi) {
  std::vector<Application> out;
  if (phi.signature() != p.signature()) return out;
  MatchContext ctx(phi);
  for (const auto& r : p.rules(max_width(phi))) {
    if (r.proc) {
      for (Application& a : r.proc->find(ctx)) out.push_back(std::move(a));
      continue;
    }
    std::vector<MatchSite> sites = ctx.find(*r.pattern);
    std::sort(sites.begin(), sites.end(), site_before);
    for (MatchSite& s : sites) {
      Diagram res = replace_at(ctx.canonical(), s, r.rule->target);
      out.push_back({r.rule->name, std::move(s), std::move(res)});
    }
  }
  return out;
}

std::optional<Application> apply_once(const Polygraph& p, const Diagram& phi) {
  if (phi.signature() != p.signature()) return std::nullopt;
  MatchContext ctx(phi);
  for (const auto& r : p.rules(max_width(phi))) {
    if (r.proc) {
      std::vector<Application> as = r.proc->find(ctx);
      if (!as.empty()) return std::move(as.front());
      continue;
    }
    std::vector<MatchSite> sites = ctx.find(*r.pattern);
    if (sites.empty()) continue;
    MatchSite best = *std::min_element(sites.begin(), sites.end(), site_before);
    Diagram res = replace_at(ctx.canonical(), best, r.rule->target);
    return Application{r.rule->name, std::move(best), std::move(res)};
  }
  return std::nullopt;
}

std::pair<Diagram, RewriteTrace> normalize(const Polygraph& p, const Diagram& phi, std::size_t fuel) {
  RewriteTrace t;
  t.initial = canonical(phi);
  Diagram cur = t.initial;
  while (auto a = apply_once(p, cur)) {
    if (t.steps.size() >= fuel)
      fail(Errc::FuelExhausted, "no normal form within " + std::to_string(fuel) + " steps under " + p.name());
    t.steps.push_back({a->rule, a->site});
    cur = canonical(a->result);
  }
  t.final = cur;
  return {cur, t};
}

Diagram replay(const Polygraph& p, const RewriteTrace& t) {
  Diagram cur = canonical(t.initial);
  for (const TraceStep& s : t.steps) cur = canonical(apply_recorded(p, cur, s));
  return cur;
}

// ---------------------------------------------------------------------------

long Affine::eval(const std::vector<long>& x) const {
  long v = c;
  for (std::size_t i = 0; i < k.size(); ++i) v += k[i] * x[i];
  return v;
}

MonotoneInterpretation doubling_interpretation() { return base_interpretation("doubling", 0); }

MonotoneInterpretation certificate(const std::string& polygraph_name) {
  polygraph(polygraph_name);  // validates the name
  MonotoneInterpretation m = base_interpretation("certified", 1);
  m.crossing_cost_first = polygraph_name != "S";
  return m;
}

std::vector<Affine> interpret(const MonotoneInterpretation& m, const Diagram& phi) {
  Linear l = linearize(phi);
  const std::size_t n = l.input.size();
  std::vector<Affine> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(var(n, i));
  for (const Step& s : l.steps) {
    auto it = m.gates.find(s.type.family);
    if (it == m.gates.end())
      fail(Errc::MissingInterpretation, std::string(family_name(s.type.family)) + " in " + m.name);
    std::vector<Affine> g = it->second(s.type, l.sig);
    const std::size_t ar = s.type.in_arity(l.sig);
    std::vector<Affine> outs;
    for (const Affine& f : g) {
      Affine o = constant(f.c, n);
      for (std::size_t j = 0; j < ar && j < f.k.size(); ++j) {
        const Affine& x = w[s.offset + j];
        o.c += f.k[j] * x.c;
        for (std::size_t v = 0; v < n; ++v) o.k[v] += f.k[j] * x.k[v];
      }
      outs.push_back(std::move(o));
    }
    w.erase(w.begin() + s.offset, w.begin() + s.offset + ar);
    w.insert(w.begin() + s.offset, outs.begin(), outs.end());
  }
  return w;
}

std::vector<long> evaluate(const MonotoneInterpretation& m, const Diagram& phi, const std::vector<long>& x) {
  std::vector<long> out;
  for (const Affine& f : interpret(m, phi)) out.push_back(f.eval(x));
  return out;
}

long crossing_cost(const Diagram& phi) {
  long c = 0;
  for (const Layer& l : phi.layers())
    for (const Slot& s : l)
      if (auto* g = std::get_if<Gate>(&s); g && g->type.family == Family::Twist)
        c += formula_size(g->type.a) * formula_size(g->type.b);
  return c;
}

std::string compare_strict(const MonotoneInterpretation& m, const Diagram& src, const Diagram& tgt, long grid) {
  if (src.input() != tgt.input() || src.output() != tgt.output()) return "boundaries differ";
  if (m.crossing_cost_first) {
    long a = crossing_cost(src), b = crossing_cost(tgt);
    if (a > b) return "";
    if (a < b) return "crossing cost grows from " + std::to_string(a) + " to " + std::to_string(b);
  }
  std::vector<Affine> f = interpret(m, src), g = interpret(m, tgt);
  const std::size_t n = src.input().size();
  // symbolic: every component difference has non-negative coefficients and
  // some component has a positive constant difference
  bool symbolic = f.size() == g.size() && !f.empty();
  bool strict = false;
  for (std::size_t i = 0; symbolic && i < f.size(); ++i) {
    if (f[i].c < g[i].c) symbolic = false;
    for (std::size_t v = 0; v < n; ++v)
      if (f[i].k[v] < g[i].k[v]) symbolic = false;
    strict |= f[i].c > g[i].c;
  }
  if (!symbolic || !strict) return "affine forms are not strictly ordered";
  std::vector<long> x(n, 0);
  while (true) {
    std::vector<long> a, b;
    for (const Affine& e : f) a.push_back(e.eval(x));
    for (const Affine& e : g) b.push_back(e.eval(x));
    bool ge = true;
    for (std::size_t i = 0; i < a.size(); ++i) ge &= a[i] >= b[i];
    if (!ge || a == b) return "at x=" + vec_str(x) + ": " + vec_str(a) + " vs " + vec_str(b);
    std::size_t i = 0;
    while (i < n && x[i] == grid) x[i++] = 0;
    if (i == n) break;
    ++x[i];
  }
  return "";
}

std::pair<Diagram, Diagram> step_instance(const Polygraph& p, const Diagram& before, const TraceStep& st) {
  auto rs = p.rules(max_width(before));
  const Polygraph::Prepared* r = find_rule(rs, st.rule);
  if (!r || !r->rule) fail(Errc::NotApplicable, st.rule + " has no schema instance");
  Linear lin = linearize(canonical(before));
  auto iso = isolate_block(lin, st.site.steps);
  if (!iso) fail(Errc::StaleSite, "block of " + st.rule + " is not convex");
  const auto& [fl, base] = *iso;
  Linear block{fl.sig, st.site.window_in, {}};
  for (std::size_t j = 0; j < st.site.steps.size(); ++j) {
    Step s = fl.steps[base + j];
    s.offset -= st.site.offset;
    block.steps.push_back(std::move(s));
  }
  return {to_layers(block), canonical(st.site.substitution.apply(r->rule->target))};
}

DecreaseReport check_decrease(const Polygraph& p, const MonotoneInterpretation& m, const RewriteTrace& t, long grid) {
  DecreaseReport rep;
  Diagram cur = canonical(t.initial);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const TraceStep& st = t.steps[i];
    auto rs = p.rules(max_width(cur));
    const Polygraph::Prepared* r = find_rule(rs, st.rule);
    if (r && r->proc) {
      ++rep.skipped;
    } else {
      auto [src, tgt] = step_instance(p, cur, st);
      std::string why = compare_strict(m, src, tgt, grid);
      ++rep.checked;
      if (!why.empty()) rep.violations.push_back({i, st.rule, why});
    }
    cur = canonical(apply_recorded(p, cur, st));
  }
  return rep;
}

unsigned long long cut_weight(const Diagram& phi) {
  unsigned long long w = 0;
  for (const Layer& l : phi.layers())
    for (const Slot& s : l)
      if (auto* g = std::get_if<Gate>(&s); g && g->type.family == Family::Cut) {
        unsigned long long t = 1;
        for (std::size_t i = 0; i < g->type.a.connectives(); ++i) t *= 3;
        w += t;
      }
  return w;
}

}  // namespace pd
