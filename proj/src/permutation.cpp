#include "pd/permutation.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "pd/error.hpp"
#include "pd/linear.hpp"

namespace pd {

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.images.resize(n);
  std::iota(p.images.begin(), p.images.end(), std::size_t{1});
  return p;
}

Permutation Permutation::from_images(std::vector<std::size_t> images) {
  std::vector<bool> seen(images.size() + 1, false);
  for (std::size_t v : images) {
    if (v == 0 || v > images.size() || seen[v])
      fail(Errc::BadIndex, "not a permutation of 1.." + std::to_string(images.size()));
    seen[v] = true;
  }
  return Permutation{std::move(images)};
}

Permutation Permutation::transposition(std::size_t n, std::size_t k) {
  if (k == 0 || k >= n) fail(Errc::BadIndex, "transposition index out of range");
  Permutation p = identity(n);
  std::swap(p.images[k - 1], p.images[k]);
  return p;
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < images.size(); ++i)
    if (images[i] != i + 1) return false;
  return true;
}

Permutation Permutation::inverse() const {
  Permutation r;
  r.images.resize(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) r.images[images[i] - 1] = i + 1;
  return r;
}

std::string Permutation::str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < images.size(); ++i) s += (i ? "," : "") + std::to_string(images[i]);
  return s + "]";
}

Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) fail(Errc::BadIndex, "composing permutations of different sizes");
  Permutation r;
  r.images.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r.images[i] = a.images[b.images[i] - 1];
  return r;
}

Permutation parse_permutation(std::string_view text) {
  std::vector<std::size_t> v;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip();
  if (i >= text.size() || text[i] != '[') fail(Errc::Parse, "permutation must start with '['");
  ++i;
  skip();
  if (i < text.size() && text[i] == ']') {
    ++i;
  } else {
    while (true) {
      skip();
      std::size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (start == i) fail(Errc::Parse, "expected a number in permutation");
      v.push_back(std::stoul(std::string(text.substr(start, i - start))));
      skip();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == ']') {
        ++i;
        break;
      }
      fail(Errc::Parse, "expected ',' or ']' in permutation");
    }
  }
  skip();
  if (i != text.size()) fail(Errc::Parse, "trailing characters after permutation");
  try {
    return Permutation::from_images(std::move(v));
  } catch (const Error& e) {
    fail(Errc::Parse, e.detail());
  }
}

std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<Permutation> out;
  Permutation p = Permutation::identity(n);
  do out.push_back(p);
  while (std::next_permutation(p.images.begin(), p.images.end()));
  return out;
}

Permutation erase_first(const Permutation& tau) {
  std::size_t k = tau.images.at(0);
  Permutation r;
  for (std::size_t i = 1; i < tau.size(); ++i) {
    std::size_t t = tau.images[i];
    r.images.push_back(t < k ? t : t - 1);
  }
  return r;
}

namespace {

// Twists for the map tau (input i goes to output tau(i)), top to bottom.
void twists_for(const Permutation& tau, std::size_t base, std::vector<std::size_t>& out) {
  if (tau.size() <= 1) return;
  twists_for(erase_first(tau), base + 1, out);
  std::size_t k = tau.images[0];
  for (std::size_t j = 0; j + 1 < k; ++j) out.push_back(base + j);
}

}  // namespace

std::vector<std::size_t> canonical_twist_offsets(const Permutation& sigma) {
  std::vector<std::size_t> out;
  twists_for(sigma.inverse(), 0, out);
  return out;
}

namespace {

Word default_labels(std::size_t n, const Word& labels) {
  if (labels.empty()) return Word(n, Formula::atom("x"));
  if (labels.size() != n) fail(Errc::BadIndex, "label count differs from permutation size");
  return labels;
}

}  // namespace

Diagram canonical_perm_diagram(const Permutation& sigma, const Word& labels, Signature sig) {
  Builder b(sig, default_labels(sigma.size(), labels));
  for (std::size_t o : canonical_twist_offsets(sigma)) b.twist(o);
  return b.diagram();
}

Diagram ladder(Side side, std::size_t n, std::size_t k, Signature sig) {
  if (k == 0 || k > n) fail(Errc::BadIndex, "ladder needs 1 <= k <= n");
  Builder b(sig, Word(n, Formula::atom("x")));
  if (side == Side::Left) {
    for (std::size_t j = 0; j + 1 < k; ++j) b.twist(j);
  } else {
    for (std::size_t j = n - 1; j > n - k; --j) b.twist(j - 1);
  }
  return b.diagram();
}

Permutation diagram_to_perm(const Diagram& phi) {
  std::vector<std::size_t> wires(phi.input().size());
  std::iota(wires.begin(), wires.end(), std::size_t{1});
  for (const Step& s : linearize(phi).steps) {
    if (s.type.family != Family::Twist) fail(Errc::NonTwistGate, s.type.str() + " is not a twist");
    std::swap(wires[s.offset], wires[s.offset + 1]);
  }
  return Permutation{std::move(wires)};
}

}  // namespace pd
