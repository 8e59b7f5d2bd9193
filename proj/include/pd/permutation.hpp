#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pd/diagram.hpp"

namespace pd {

/// A permutation in one-line notation, 1-based. Read on diagrams as: output
/// position i carries the wire that entered at position images[i-1].
struct Permutation {
  std::vector<std::size_t> images;

  static Permutation identity(std::size_t n);
  /// Validates that `images` is a bijection on {1..n}.
  static Permutation from_images(std::vector<std::size_t> images);
  /// The transposition (k, k+1) on n points.
  static Permutation transposition(std::size_t n, std::size_t k);

  std::size_t size() const { return images.size(); }
  std::size_t operator()(std::size_t i) const { return images[i - 1]; }
  bool is_identity() const;
  Permutation inverse() const;
  std::string str() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;
};

/// (a * b)(i) = a(b(i)). With the convention above, the permutation of
/// `compose_seq(phi, psi)` is `compose(perm(phi), perm(psi))`.
Permutation compose(const Permutation& a, const Permutation& b);

/// Parses `[2,3,1]`.
Permutation parse_permutation(std::string_view text);

/// All permutations of {1..n} in lexicographic order.
std::vector<Permutation> all_permutations(std::size_t n);

/// The reduced permutation used by the canonical-diagram recursion: drop the
/// first wire and close the gap in the remaining targets. Takes and returns
/// maps "input i goes to output tau(i)".
Permutation erase_first(const Permutation& tau);

/// Offsets of the twists of the canonical diagram of sigma, top to bottom,
/// each relative to the first wire of the permuted block.
std::vector<std::size_t> canonical_twist_offsets(const Permutation& sigma);

/// Irreducible twist diagram of sigma. Wires are labelled by `labels` (one
/// per input, default the atom `x`).
Diagram canonical_perm_diagram(const Permutation& sigma, const Word& labels = {},
                               Signature sig = Signature::Uncontrolled);

enum class Side { Left, Right };

/// Left ladder: wire 1 moves to position k, wires k+1..n untouched.
/// Right ladder: the mirror image, wire n moves to position n-k+1.
Diagram ladder(Side side, std::size_t n, std::size_t k, Signature sig = Signature::Uncontrolled);

/// Throws NonTwistGate when phi contains any other gate.
Permutation diagram_to_perm(const Diagram& phi);

}  // namespace pd
