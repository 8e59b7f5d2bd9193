#include "pd/linear.hpp"

#include <algorithm>

#include "pd/error.hpp"

namespace pd {

Linear linearize(const Diagram& d) {
  Linear l{d.signature(), d.input(), {}};
  for (const Layer& layer : d.layers()) {
    std::size_t pos = 0;
    std::ptrdiff_t delta = 0;
    for (const Slot& s : layer) {
      if (std::holds_alternative<Identity>(s)) {
        ++pos;
        continue;
      }
      const GateType& g = std::get<Gate>(s).type;
      l.steps.push_back({g, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) + delta)});
      std::size_t in = g.in_arity(d.signature()), out = g.out_arity(d.signature());
      pos += in;
      delta += static_cast<std::ptrdiff_t>(out) - static_cast<std::ptrdiff_t>(in);
    }
  }
  return l;
}

void apply_step(Word& w, const Step& s, Signature sig) {
  Word in = s.type.inputs(sig);
  if (s.offset + in.size() > w.size() || !std::equal(in.begin(), in.end(), w.begin() + s.offset)) {
    Word got;
    for (std::size_t i = s.offset; i < std::min(w.size(), s.offset + in.size()); ++i) got.push_back(w[i]);
    fail(Errc::BoundaryMismatch, s.type.str() + " at offset " + std::to_string(s.offset) + " expects '" +
                                     word_str(in) + "' but finds '" + word_str(got) + "'");
  }
  Word out = s.type.outputs(sig);
  w.erase(w.begin() + s.offset, w.begin() + s.offset + in.size());
  w.insert(w.begin() + s.offset, out.begin(), out.end());
}

Word output_word(const Linear& l) {
  Word w = l.input;
  for (const Step& s : l.steps) apply_step(w, s, l.sig);
  return w;
}

namespace {

bool left_of(const Step& x, const Step& y, Signature sig) {
  return y.offset + y.type.in_arity(sig) <= x.offset;
}

bool right_of(const Step& x, const Step& y, Signature sig) {
  return y.offset >= x.offset + x.type.out_arity(sig);
}

}  // namespace

bool swap_steps(Linear& l, std::size_t i) {
  Step x = l.steps[i], y = l.steps[i + 1];
  std::size_t in_x = x.type.in_arity(l.sig), out_x = x.type.out_arity(l.sig);
  std::size_t in_y = y.type.in_arity(l.sig), out_y = y.type.out_arity(l.sig);
  if (left_of(x, y, l.sig)) {
    x.offset = x.offset + out_y - in_y;
  } else if (right_of(x, y, l.sig)) {
    y.offset = y.offset - out_x + in_x;
  } else {
    return false;
  }
  l.steps[i] = y;
  l.steps[i + 1] = x;
  return true;
}

namespace {

// Dependency tags on the gaps between adjacent wires. `point` constrains
// 0-input gates inserted into the gap, `straddle` constrains gates whose
// inputs span the gap.
struct Gap {
  std::vector<std::size_t> point, straddle;
};

void add_all(std::vector<std::size_t>& dst, const std::vector<std::size_t>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

std::vector<std::vector<std::size_t>> step_dependencies(const Linear& l) {
  std::vector<std::size_t> producer(l.input.size(), PortRef::npos);
  std::vector<Gap> gaps(l.input.size() + 1);
  std::vector<std::vector<std::size_t>> deps(l.steps.size());
  for (std::size_t k = 0; k < l.steps.size(); ++k) {
    const Step& s = l.steps[k];
    std::size_t o = s.offset, in = s.type.in_arity(l.sig), out = s.type.out_arity(l.sig);
    if (o + in > producer.size()) fail(Errc::BoundaryMismatch, "step " + std::to_string(k) + " out of range");
    std::vector<std::size_t> d;
    for (std::size_t j = o; j < o + in; ++j)
      if (producer[j] != PortRef::npos) d.push_back(producer[j]);
    for (std::size_t g = o + 1; g < o + in; ++g) add_all(d, gaps[g].straddle);
    if (in == 0) add_all(d, gaps[o].point);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    deps[k] = std::move(d);

    Gap left = gaps[o], right = gaps[o + in];
    std::vector<Gap> fresh;
    if (out == 0) {
      Gap m;
      m.point = left.point;
      m.straddle = left.straddle;
      add_all(m.straddle, right.straddle);
      m.straddle.push_back(k);
      fresh.push_back(std::move(m));
    } else {
      fresh.push_back(left);
      for (std::size_t j = 1; j < out; ++j) fresh.push_back(Gap{{k}, {k}});
      fresh.push_back(right);
    }
    gaps.erase(gaps.begin() + o, gaps.begin() + o + in + 1);
    gaps.insert(gaps.begin() + o, fresh.begin(), fresh.end());
    producer.erase(producer.begin() + o, producer.begin() + o + in);
    producer.insert(producer.begin() + o, out, k);
  }
  return deps;
}

std::vector<std::size_t> step_levels(const Linear& l) {
  auto deps = step_dependencies(l);
  std::vector<std::size_t> lv(l.steps.size(), 0);
  for (std::size_t k = 0; k < deps.size(); ++k)
    for (std::size_t d : deps[k]) lv[k] = std::max(lv[k], lv[d] + 1);
  return lv;
}

namespace {

// Insertion pass: every step moves up past the steps it commutes with and
// gets level one more than the first step that blocks it. Steps stay sorted
// by level, and steps of one level are sorted left to right.
std::vector<std::size_t> levelize(Linear& l) {
  std::vector<std::size_t> lv;
  for (std::size_t k = 0; k < l.steps.size(); ++k) {
    Linear probe = l;
    std::size_t j = k;
    while (j > 0 && swap_steps(probe, j - 1)) --j;
    const std::size_t level = j == 0 ? 0 : lv[j - 1] + 1;
    j = k;
    while (j > 0 && lv[j - 1] > level) {
      if (!swap_steps(l, j - 1)) fail(Errc::Contract, "interchange: inconsistent step order");
      --j;
    }
    lv.insert(lv.begin() + static_cast<std::ptrdiff_t>(j), level);
  }
  std::size_t s = 0;
  while (s < l.steps.size()) {
    std::size_t e = s;
    while (e < l.steps.size() && lv[e] == lv[s]) ++e;
    for (std::size_t i = s + 1; i < e; ++i) {
      for (std::size_t j = i; j > s && left_of(l.steps[j - 1], l.steps[j], l.sig); --j) {
        if (!swap_steps(l, j - 1)) fail(Errc::Contract, "interchange: level not independent");
      }
    }
    s = e;
  }
  return lv;
}

}  // namespace

Linear canonical_linear(const Linear& in) {
  Linear l = in;
  levelize(l);
  return l;
}

Linear canonical_linear(const Diagram& d) { return canonical_linear(linearize(d)); }

Diagram to_layers(const Linear& in) {
  Linear l = in;
  std::vector<std::size_t> lv = levelize(l);
  std::vector<Layer> layers;
  Word w = l.input;
  std::size_t s = 0;
  while (s < l.steps.size()) {
    std::size_t e = s;
    while (e < l.steps.size() && lv[e] == lv[s]) ++e;
    Layer layer;
    std::size_t pos = 0;
    std::ptrdiff_t shift = 0;
    for (std::size_t k = s; k < e; ++k) {
      const Step& st = l.steps[k];
      std::size_t start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(st.offset) - shift);
      while (pos < start) layer.push_back(Identity{w[pos++]});
      layer.push_back(Gate{st.type});
      std::size_t in_a = st.type.in_arity(l.sig), out_a = st.type.out_arity(l.sig);
      pos += in_a;
      shift += static_cast<std::ptrdiff_t>(out_a) - static_cast<std::ptrdiff_t>(in_a);
    }
    while (pos < w.size()) layer.push_back(Identity{w[pos++]});
    for (std::size_t k = s; k < e; ++k) apply_step(w, l.steps[k], l.sig);
    layers.push_back(std::move(layer));
    s = e;
  }
  return Diagram(l.sig, l.input, std::move(layers));
}

std::optional<Linear> reorder(const Linear& in, const std::vector<std::size_t>& order) {
  Linear l = in;
  std::vector<std::size_t> ids(l.steps.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::size_t j = std::find(ids.begin() + k, ids.end(), order[k]) - ids.begin();
    if (j == ids.size()) return std::nullopt;
    for (; j > k; --j) {
      if (!swap_steps(l, j - 1)) return std::nullopt;
      std::swap(ids[j - 1], ids[j]);
    }
  }
  return l;
}

WireGraph wire_graph(const Linear& l) {
  WireGraph g;
  g.in_src.resize(l.steps.size());
  g.out_dst.resize(l.steps.size());
  g.input_dst.resize(l.input.size());
  std::vector<PortRef> word;
  for (std::size_t i = 0; i < l.input.size(); ++i) word.push_back({PortRef::npos, i});
  auto bind = [&](const PortRef& src, const PortRef& dst) {
    if (src.step == PortRef::npos)
      g.input_dst[src.port] = dst;
    else
      g.out_dst[src.step][src.port] = dst;
  };
  for (std::size_t k = 0; k < l.steps.size(); ++k) {
    const Step& s = l.steps[k];
    std::size_t in = s.type.in_arity(l.sig), out = s.type.out_arity(l.sig);
    g.out_dst[k].assign(out, PortRef{});
    for (std::size_t j = 0; j < in; ++j) {
      g.in_src[k].push_back(word[s.offset + j]);
      bind(word[s.offset + j], PortRef{k, j});
    }
    word.erase(word.begin() + s.offset, word.begin() + s.offset + in);
    std::vector<PortRef> fresh;
    for (std::size_t j = 0; j < out; ++j) fresh.push_back({k, j});
    word.insert(word.begin() + s.offset, fresh.begin(), fresh.end());
  }
  for (std::size_t i = 0; i < word.size(); ++i) {
    g.output_src.push_back(word[i]);
    bind(word[i], PortRef{PortRef::npos, i});
  }
  return g;
}

Builder::Builder(Signature sig, Word input) : lin_{sig, input, {}}, word_(std::move(input)) {}

Builder& Builder::gate(const GateType& g, std::size_t offset) {
  Step s{g, offset};
  apply_step(word_, s, lin_.sig);
  lin_.steps.push_back(std::move(s));
  return *this;
}

namespace {

const Formula& formula_at(const Word& w, std::size_t i) {
  if (i >= w.size() || !w[i].is_formula())
    fail(Errc::BoundaryMismatch, "expected a formula wire at position " + std::to_string(i) + " of '" + word_str(w) + "'");
  return w[i].formula();
}

}  // namespace

Builder& Builder::tensor(std::size_t o) {
  std::size_t k = lin_.sig == Signature::Controlled ? 3 : 1;
  return gate(GateType::tensor(formula_at(word_, o), formula_at(word_, o + k)), o);
}
Builder& Builder::par(std::size_t o) { return gate(GateType::par(formula_at(word_, o), formula_at(word_, o + 1)), o); }
Builder& Builder::cut(std::size_t o) { return gate(GateType::cut(formula_at(word_, o)), o); }
Builder& Builder::twist(std::size_t o) { return gate(GateType::twist(formula_at(word_, o), formula_at(word_, o + 1)), o); }
Builder& Builder::ax(const Formula& a, std::size_t o) { return gate(GateType::ax(a), o); }
Builder& Builder::one(std::size_t o) { return gate(GateType::one(), o); }
Builder& Builder::bot(std::size_t o) { return gate(GateType::bot(), o); }
Builder& Builder::big(std::size_t o, const Word& w, const Word& w2) { return gate(GateType::big(w, w2), o); }

}  // namespace pd
