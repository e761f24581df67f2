#pragma once

#include <vector>

#include "fixcalc/freegrp.hpp"
#include "fixcalc/subgroup_type.hpp"

namespace fixcalc::surfgrp {

using freegrp::Word;
using intlin::Int;
using intlin::IntVec;

/// Closed orientable surface group of genus g >= 2 with the one-relator
/// presentation on x_1..x_2g, relator [x1,x2][x3,x4]...[x_2g-1,x_2g].
/// Genus 1 is the torus Z^2 and is handled by the linear machinery, not
/// here.
class SurfaceGroupSpec {
public:
  explicit SurfaceGroupSpec(int genus);

  int genus() const { return genus_; }
  std::size_t alphabet_rank() const {
    return static_cast<std::size_t>(2 * genus_);
  }
  const Word& relator() const { return relator_; }

private:
  int genus_;
  Word relator_;
};

/// Word problem by Dehn's algorithm: repeatedly replace any subword covering
/// more than half of a cyclic conjugate of the relator (or its inverse) by
/// the shorter complement. The canonical presentation satisfies C'(1/6) for
/// g >= 2, so an irreducible nonempty word is nontrivial.
bool is_trivial(const SurfaceGroupSpec& spec, const Word& w);
bool equal(const SurfaceGroupSpec& spec, const Word& a, const Word& b);

/// Exponent sums in Z^2g; well defined on the group since the relator
/// abelianizes to zero.
IntVec abelianize_surface(const SurfaceGroupSpec& spec, const Word& w);

/// A generator assignment extends to an endomorphism iff it kills the
/// relator.
bool validate_endo(const SurfaceGroupSpec& spec,
                   const std::vector<Word>& images);

/// Presentation of a finite-index subgroup produced by Reidemeister-
/// Schreier rewriting; relators are freely reduced and tree generators
/// eliminated, nothing more.
struct SurfacePresentation {
  std::size_t generator_count = 0;
  std::vector<Word> relators;  // words over the new generators

  /// Exponent matrix of the relators (one row per relator).
  intlin::IntMatrix relation_matrix() const;
};

/// Kernel of the map pi_1 -> A sending generator i to images[i], where A is
/// the finite abelian group with the given moduli. The image subgroup must
/// have order d <= 8.
SurfacePresentation reidemeister_schreier(const SurfaceGroupSpec& spec,
                                          const std::vector<Int>& moduli,
                                          const std::vector<IntVec>& images);

/// Index-d subgroups of a genus-g surface group are surface groups of genus
/// d(g-1)+1.
SubgroupType subgroup_type_from_index(int genus, const Int& d);
Int genus_of_index(int genus, const Int& d);

}  // namespace fixcalc::surfgrp
