#include "pd/diagram.hpp"

#include <algorithm>

#include "pd/error.hpp"
#include "pd/linear.hpp"

namespace pd {

std::string WireLabel::str() const {
  switch (kind_) {
    case Kind::L: return "L";
    case Kind::R: return "R";
    default: return f_.str();
  }
}

std::size_t WireLabel::hash() const {
  return kind_ == Kind::Formula ? f_.hash() : (kind_ == Kind::L ? 0x51ed27 : 0x2f9a13);
}

std::string word_str(const Word& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += w[i].str();
  }
  return out;
}

Word formulas_word(const std::vector<Formula>& fs) { return Word(fs.begin(), fs.end()); }

const char* family_name(Family f) {
  switch (f) {
    case Family::Tensor: return "tensor";
    case Family::Par: return "par";
    case Family::Ax: return "ax";
    case Family::Cut: return "cut";
    case Family::Twist: return "twist";
    case Family::One: return "one";
    case Family::Bot: return "bot";
    case Family::Big: return "big";
  }
  return "?";
}

Word GateType::inputs(Signature sig) const {
  bool c = sig == Signature::Controlled;
  switch (family) {
    case Family::Tensor: return c ? Word{a, kR, kL, b} : Word{a, b};
    case Family::Par: return {a, b};
    case Family::Cut: return c ? Word{a, kR, kL, negate(a)} : Word{a, negate(a)};
    case Family::Twist: return {a, b};
    case Family::Ax:
    case Family::One:
    case Family::Bot: return {};
    case Family::Big: {
      Word r{kL};
      r.insert(r.end(), w.begin(), w.end());
      r.push_back(kR);
      r.push_back(kL);
      r.insert(r.end(), w2.begin(), w2.end());
      r.push_back(kR);
      return r;
    }
  }
  return {};
}

Word GateType::outputs(Signature sig) const {
  bool c = sig == Signature::Controlled;
  switch (family) {
    case Family::Tensor: return {Formula::tensor(a, b)};
    case Family::Par: return {Formula::par(a, b)};
    case Family::Cut: return {};
    case Family::Twist: return {b, a};
    case Family::Ax: return c ? Word{kL, a, negate(a), kR} : Word{a, negate(a)};
    case Family::One: return c ? Word{kL, Formula::one(), kR} : Word{Formula::one()};
    case Family::Bot: return {Formula::bot()};
    case Family::Big: {
      Word r{kL};
      r.insert(r.end(), w2.begin(), w2.end());
      r.push_back(kR);
      r.push_back(kL);
      r.insert(r.end(), w.begin(), w.end());
      r.push_back(kR);
      return r;
    }
  }
  return {};
}

std::size_t GateType::in_arity(Signature sig) const {
  bool c = sig == Signature::Controlled;
  switch (family) {
    case Family::Tensor:
    case Family::Cut: return c ? 4 : 2;
    case Family::Par:
    case Family::Twist: return 2;
    case Family::Big: return w.size() + w2.size() + 4;
    default: return 0;
  }
}

std::size_t GateType::out_arity(Signature sig) const {
  bool c = sig == Signature::Controlled;
  switch (family) {
    case Family::Tensor:
    case Family::Par:
    case Family::Bot: return 1;
    case Family::Cut: return 0;
    case Family::Twist: return 2;
    case Family::Ax: return c ? 4 : 2;
    case Family::One: return c ? 3 : 1;
    case Family::Big: return w.size() + w2.size() + 4;
  }
  return 0;
}

bool GateType::has_meta() const {
  auto word_meta = [](const Word& x) {
    return std::any_of(x.begin(), x.end(), [](const WireLabel& l) { return l.is_formula() && l.formula().has_meta(); });
  };
  switch (family) {
    case Family::Tensor:
    case Family::Par:
    case Family::Twist: return a.has_meta() || b.has_meta();
    case Family::Ax:
    case Family::Cut: return a.has_meta();
    case Family::Big: return word_meta(w) || word_meta(w2);
    default: return false;
  }
}

std::string GateType::str() const {
  std::string n = std::string("@") + family_name(family);
  switch (family) {
    case Family::Tensor:
    case Family::Par:
    case Family::Twist: return n + "(" + a.str() + "," + b.str() + ")";
    case Family::Ax:
    case Family::Cut: return n + "(" + a.str() + ")";
    case Family::Big: {
      auto dotted = [](const Word& x) {
        std::string s;
        for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "." : "") + x[i].str();
        return s;
      };
      return n + "(" + dotted(w) + ";" + dotted(w2) + ")";
    }
    default: return n;
  }
}

std::strong_ordering operator<=>(const GateType& x, const GateType& y) {
  if (auto c = x.family <=> y.family; c != 0) return c;
  if (auto c = x.a <=> y.a; c != 0) return c;
  if (auto c = x.b <=> y.b; c != 0) return c;
  if (auto c = x.w <=> y.w; c != 0) return c;
  return x.w2 <=> y.w2;
}

Word slot_inputs(const Slot& s, Signature sig) {
  if (auto* id = std::get_if<Identity>(&s)) return {id->label};
  return std::get<Gate>(s).type.inputs(sig);
}

Word slot_outputs(const Slot& s, Signature sig) {
  if (auto* id = std::get_if<Identity>(&s)) return {id->label};
  return std::get<Gate>(s).type.outputs(sig);
}

namespace {

[[noreturn]] void boundary_fail(const Word& expect, const Word& got, const std::string& where) {
  std::size_t i = 0;
  while (i < expect.size() && i < got.size() && expect[i] == got[i]) ++i;
  std::string detail = where + ": words differ at position " + std::to_string(i) + " (expected '" +
                       word_str(expect) + "', got '" + word_str(got) + "')";
  fail(Errc::BoundaryMismatch, detail);
}

}  // namespace

Diagram::Diagram(Signature sig, Word input, std::vector<Layer> layers)
    : sig_(sig), input_(std::move(input)), layers_(std::move(layers)) {
  Word cur = input_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Word in, out;
    for (const Slot& s : layers_[i]) {
      if (auto* g = std::get_if<Gate>(&s)) {
        if (g->type.family == Family::Big && sig_ != Signature::Controlled)
          fail(Errc::Contract, "big gates exist only in the controlled signature");
      }
      Word si = slot_inputs(s, sig_), so = slot_outputs(s, sig_);
      in.insert(in.end(), si.begin(), si.end());
      out.insert(out.end(), so.begin(), so.end());
    }
    if (in != cur) boundary_fail(cur, in, "layer " + std::to_string(i));
    cur = std::move(out);
  }
  output_ = std::move(cur);
}

std::size_t Diagram::gate_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_)
    for (const Slot& s : l) n += std::holds_alternative<Gate>(s);
  return n;
}

Diagram identity(Signature sig, const Word& w) { return Diagram(sig, w, {}); }

Diagram gate_diagram(Signature sig, const GateType& g, const Word& left, const Word& right) {
  Layer layer;
  Word in;
  for (const WireLabel& l : left) {
    layer.push_back(Identity{l});
    in.push_back(l);
  }
  layer.push_back(Gate{g});
  Word gi = g.inputs(sig);
  in.insert(in.end(), gi.begin(), gi.end());
  for (const WireLabel& l : right) {
    layer.push_back(Identity{l});
    in.push_back(l);
  }
  return Diagram(sig, in, {layer});
}

Diagram compose_seq(const Diagram& phi, const Diagram& psi) {
  if (phi.signature() != psi.signature()) fail(Errc::Contract, "signatures differ");
  if (phi.output() != psi.input()) boundary_fail(phi.output(), psi.input(), "compose_seq");
  std::vector<Layer> layers = phi.layers();
  layers.insert(layers.end(), psi.layers().begin(), psi.layers().end());
  return Diagram(phi.signature(), phi.input(), std::move(layers));
}

Diagram compose_par(const Diagram& phi, const Diagram& psi) {
  if (phi.layers().empty() && phi.input().empty()) return psi;
  if (psi.layers().empty() && psi.input().empty()) return phi;
  if (phi.signature() != psi.signature()) fail(Errc::Contract, "signatures differ");
  auto pad = [](const Diagram& d, std::size_t i) {
    if (i < d.layers().size()) return d.layers()[i];
    Layer l;
    for (const WireLabel& w : d.output()) l.push_back(Identity{w});
    return l;
  };
  std::size_t n = std::max(phi.layers().size(), psi.layers().size());
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < n; ++i) {
    Layer l = pad(phi, i), r = pad(psi, i);
    l.insert(l.end(), r.begin(), r.end());
    layers.push_back(std::move(l));
  }
  Word in = phi.input();
  in.insert(in.end(), psi.input().begin(), psi.input().end());
  return Diagram(phi.signature(), std::move(in), std::move(layers));
}

Diagram interchange_canonical_form(const Diagram& phi) { return to_layers(linearize(phi)); }

std::size_t gate_count(const Diagram& phi, const std::set<Family>& subset) {
  std::size_t n = 0;
  for (const Layer& l : phi.layers())
    for (const Slot& s : l)
      if (auto* g = std::get_if<Gate>(&s)) n += subset.count(g->type.family);
  return n;
}

namespace {

WireLabel mirror_label(const WireLabel& l) {
  if (l.kind() == WireLabel::Kind::L) return kR;
  if (l.kind() == WireLabel::Kind::R) return kL;
  return mirror(l.formula());
}

Word mirror_word(const Word& w) {
  Word r;
  for (auto it = w.rbegin(); it != w.rend(); ++it) r.push_back(mirror_label(*it));
  return r;
}

GateType mirror_gate(const GateType& g) {
  switch (g.family) {
    case Family::Tensor: return GateType::tensor(mirror(g.b), mirror(g.a));
    case Family::Par: return GateType::par(mirror(g.b), mirror(g.a));
    case Family::Twist: return GateType::twist(mirror(g.b), mirror(g.a));
    case Family::Ax: return GateType::ax(negate(mirror(g.a)));
    case Family::Cut: return GateType::cut(negate(mirror(g.a)));
    case Family::Big: return GateType::big(mirror_word(g.w2), mirror_word(g.w));
    default: return g;
  }
}

}  // namespace

Diagram mirror(const Diagram& phi) {
  std::vector<Layer> layers;
  for (const Layer& l : phi.layers()) {
    Layer m;
    for (auto it = l.rbegin(); it != l.rend(); ++it) {
      if (auto* id = std::get_if<Identity>(&*it))
        m.push_back(Identity{mirror_label(id->label)});
      else
        m.push_back(Gate{mirror_gate(std::get<Gate>(*it).type)});
    }
    layers.push_back(std::move(m));
  }
  return Diagram(phi.signature(), mirror_word(phi.input()), std::move(layers));
}

}  // namespace pd
