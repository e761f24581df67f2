#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fixcalc/intlin.hpp"

namespace fixcalc::freegrp {

using intlin::Int;
using intlin::IntVec;

// A letter is +g for generator x_g, -g for its inverse (g in 1..rank).
using Letter = int;

/// Freely reduced word. The invariant (no adjacent cancelling pair) is
/// established on construction and preserved by every operation.
class Word {
public:
  Word() = default;

  /// Reduce an arbitrary letter sequence. Letters must be nonzero.
  static Word from_letters(const std::vector<Letter>& raw);
  static Word generator(int g, int sign = +1);

  const std::vector<Letter>& letters() const { return letters_; }
  bool empty() const { return letters_.empty(); }
  std::size_t size() const { return letters_.size(); }
  int max_generator() const;

  Word inverse() const;
  Word pow(long e) const;
  friend Word operator*(const Word& a, const Word& b);

  friend bool operator==(const Word& a, const Word& b) {
    return a.letters_ == b.letters_;
  }
  friend bool operator<(const Word& a, const Word& b) {
    return a.letters_ < b.letters_;
  }

  /// Canonical text form: x1x2^-1..., empty word prints as "1".
  std::string str() const;

private:
  std::vector<Letter> letters_;
  friend Word reduce(std::vector<Letter> raw);
};

Word reduce(std::vector<Letter> raw);

/// Exponent-sum vector in Z^n; errors if the word uses a generator > n.
IntVec abelianize(const Word& w, std::size_t n);
Int exponent_sum(const Word& w, int generator);

/// Homomorphism of free groups given by generator images.
struct FreeHomo {
  std::size_t source_rank = 0;
  std::size_t target_rank = 0;
  std::vector<Word> images;  // exactly source_rank entries

  static FreeHomo identity(std::size_t n);
};

Word apply_homo(const FreeHomo& f, const Word& w);
FreeHomo compose_homo(const FreeHomo& outer, const FreeHomo& inner);
/// Row i = abelianization of the image of x_i.
intlin::IntMatrix abelianization_matrix(const std::vector<Word>& images,
                                        std::size_t source_rank,
                                        std::size_t target_rank);

/// Folded, based, labeled graph of a finitely generated subgroup.
class StallingsGraph {
public:
  /// Fold the wedge of loops spelling `generators` at the base vertex.
  /// Output is independent of generator order (up to isomorphism) and
  /// idempotent under refolding.
  static StallingsGraph fold(const std::vector<Word>& generators,
                             std::size_t alphabet_rank);

  std::size_t alphabet_rank() const { return rank_n_; }
  std::size_t vertex_count() const { return out_.size(); }
  std::size_t edge_count() const;
  std::size_t base() const { return base_; }

  /// True iff the freely reduced word reads a based loop.
  bool member(const Word& w) const;

  /// First Betti number |E| - |V| + 1 = rank of the subgroup.
  std::size_t rank() const;

  /// Finite index (graph complete and regular) or nullopt for infinite.
  std::optional<std::size_t> index() const;

  /// Free basis read off a breadth-first spanning tree; |basis| == rank().
  std::vector<Word> basis() const;

private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t rank_n_ = 0;
  std::size_t base_ = 0;
  // out_[v][g-1]: head of the g-edge leaving v; in_[v][g-1]: tail of the
  // g-edge entering v. npos when absent.
  std::vector<std::vector<std::size_t>> out_, in_;

  std::size_t step(std::size_t v, Letter l) const;
  void trim();
  friend StallingsGraph build_folded(std::vector<std::vector<std::size_t>> out,
                                     std::vector<std::vector<std::size_t>> in,
                                     std::size_t rank_n);
};

/// x_i -> x_i for i in `fixed`, x_i -> x_i^-1 otherwise.
struct SignedClassEndo {
  std::size_t rank = 0;
  std::set<int> fixed;
};

FreeHomo signed_images(const SignedClassEndo& e);
/// Basis of the fixed subgroup: exactly the fixed generators.
std::vector<Word> signed_fix(const SignedClassEndo& e);

/// Replace abstract letter +-i by basis[i-1]^{+-1}.
Word substitute(const Word& abstract_word, const std::vector<Word>& basis);

/// Kernel of the map from the free group on `basis` onto a finite abelian
/// group A = Z/m_1 + ... + Z/m_r, where basis element i maps to images[i].
/// Schreier generators over a breadth-first transversal; deterministic.
struct KernelOfAbelianMap {
  std::vector<Word> abstract_basis;  // words in the abstract generators
  std::vector<Word> basis;           // substituted through `basis`
  Int index;                         // order d of the image subgroup
};

KernelOfAbelianMap kernel_of_abelian_map(const std::vector<Word>& basis,
                                         std::size_t ambient_rank,
                                         const std::vector<Int>& moduli,
                                         const std::vector<IntVec>& images);

/// Coset-graph core shared with the surface-group Reidemeister-Schreier:
/// Schreier generators for the kernel of F_k -> A without any freeness
/// check on the way the abstract generators are realized.
struct SchreierKernel {
  std::vector<Word> abstract_basis;
  Int index;
};
SchreierKernel schreier_kernel(std::size_t k, const std::vector<Int>& moduli,
                               const std::vector<IntVec>& images,
                               std::size_t max_states = 4096);

/// Injective iff the images fold to a rank-n graph (the image is free of
/// rank n and F_n is Hopfian); surjective iff the fold is the full rose.
bool is_injective_endo(const FreeHomo& f);
bool is_surjective_endo(const FreeHomo& f);

}  // namespace fixcalc::freegrp
