#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "fixcalc/freegrp.hpp"
#include "fixcalc/subgroup_type.hpp"
#include "fixcalc/surfgrp.hpp"

namespace fixcalc::prodgrp {

using freegrp::Word;
using intlin::Int;
using intlin::IntMatrix;
using intlin::IntVec;

/// Ambient group base x Z^m with base either F_n (n >= 0) or a closed
/// surface group of genus g >= 2.
struct AmbientSpec {
  enum class Base { free_group, surface_group };

  Base base = Base::free_group;
  int n_or_g = 0;
  int m = 0;

  static AmbientSpec free_ambient(int n, int m);
  static AmbientSpec surface_ambient(int g, int m);

  bool is_free() const { return base == Base::free_group; }
  std::size_t base_rank() const {
    return is_free() ? static_cast<std::size_t>(n_or_g)
                     : static_cast<std::size_t>(2 * n_or_g);
  }
  surfgrp::SurfaceGroupSpec surface() const;

  /// Equality of base-group elements: literal for the free base, Dehn for
  /// the surface base.
  bool base_equal(const Word& a, const Word& b) const;
  bool base_trivial(const Word& a) const;

  std::string str() const;

  friend bool operator==(const AmbientSpec& a, const AmbientSpec& b) {
    return a.base == b.base && a.n_or_g == b.n_or_g && a.m == b.m;
  }
};

/// Normal form u t^a: a reduced base word and an exponent row vector.
struct ProdElement {
  Word u;
  IntVec a;
};

ProdElement identity_element(const AmbientSpec& amb);
ProdElement mult(const AmbientSpec& amb, const ProdElement& e1,
                 const ProdElement& e2);
ProdElement inv(const AmbientSpec& amb, const ProdElement& e);
bool element_equal(const AmbientSpec& amb, const ProdElement& e1,
                   const ProdElement& e2);
IntVec abelianize_base(const AmbientSpec& amb, const Word& u);

/// Base-group endomorphism with its provenance class. The class drives
/// which fixed-subgroup data and inverses are constructible.
struct BaseEndo {
  enum class Kind { identity, signed_class, inner, general };

  Kind kind = Kind::general;
  std::vector<Word> images;
  std::set<int> signed_fixed;  // kind == signed_class
  Word conjugator;             // kind == inner
  std::optional<std::vector<Word>> inverse_images;

  static BaseEndo identity_endo(std::size_t rank);
  static BaseEndo signed_class(const freegrp::SignedClassEndo& e);
  static BaseEndo inner(const Word& w, std::size_t rank);
  static BaseEndo general(std::vector<Word> images,
                          std::optional<std::vector<Word>> inverse = {});

  std::size_t rank() const { return images.size(); }
  Word apply(const Word& w) const;
  bool is_identity_images() const;
};

/// u t^a -> phi(u) t^(aQ + uP)
struct EndoType1 {
  BaseEndo phi;
  IntMatrix Q;  // m x m
  IntMatrix P;  // base_rank x m
};

/// u t^a -> z^(a l^T + u h^T) t^(aQ + uP); the image lies in <z> x Z^m.
struct EndoType2 {
  Word z;    // nontrivial, not a proper power
  IntVec l;  // nonzero, length m
  IntVec h;  // length base_rank
  IntMatrix Q;
  IntMatrix P;
};

class Endomorphism;
using EndoPtr = std::shared_ptr<const Endomorphism>;

/// Opaque pointwise composite kept for mixed-type compositions, where
/// recanonicalizing would require root extraction for z.
struct CompositePair {
  EndoPtr outer, inner;
};

class Endomorphism {
public:
  using Form = std::variant<EndoType1, EndoType2, CompositePair>;

  explicit Endomorphism(Form f) : form_(std::move(f)) {}

  const Form& form() const { return form_; }
  bool is_type1() const { return std::holds_alternative<EndoType1>(form_); }
  bool is_type2() const { return std::holds_alternative<EndoType2>(form_); }
  bool is_composite() const {
    return std::holds_alternative<CompositePair>(form_);
  }
  const EndoType1& type1() const { return std::get<EndoType1>(form_); }
  const EndoType2& type2() const { return std::get<EndoType2>(form_); }
  const CompositePair& composite() const {
    return std::get<CompositePair>(form_);
  }

private:
  Form form_;
};

/// Validating constructors. Surface Type-1 maps are accepted only when the
/// generator assignment kills the relator; a supplied inverse is verified by
/// a generator round-trip. Type-2 rejects z = 1, l = 0 and (at desk scale)
/// a proper-power z.
Endomorphism make_type1(const AmbientSpec& amb, BaseEndo phi, IntMatrix Q,
                        IntMatrix P);
Endomorphism make_type2(const AmbientSpec& amb, Word z, IntVec l, IntVec h,
                        IntMatrix Q, IntMatrix P);
Endomorphism identity_endo(const AmbientSpec& amb);

ProdElement apply(const AmbientSpec& amb, const Endomorphism& psi,
                  const ProdElement& e);

/// Composition "outer after inner". Two Type-1 maps compose in closed form
/// (phi2 phi1, Q1 Q2, P1 Q2 + M1 P2); anything involving a Type-2 factor
/// stays an opaque pointwise composite.
Endomorphism compose(const AmbientSpec& amb, const Endomorphism& outer,
                     const Endomorphism& inner);

enum class Verdict { yes, no, unknown };
std::string verdict_str(Verdict v);

/// Injectivity/surjectivity. Free base is fully decidable; the surface
/// phi-side is certified for identity/inner/supplied-inverse classes,
/// refuted through a non-unimodular abelianization, unknown otherwise.
/// Automorphism == epimorphism (the ambient is Hopfian).
Verdict is_mono(const AmbientSpec& amb, const Endomorphism& psi);
Verdict is_epi(const AmbientSpec& amb, const Endomorphism& psi);
Verdict is_auto(const AmbientSpec& amb, const Endomorphism& psi);

/// Inverse of an automorphism: (phi^-1, Q^-1, -M^-1 P Q^-1) with M the
/// abelianization of phi.
Endomorphism invert(const AmbientSpec& amb, const Endomorphism& psi);

/// How the fixed subgroup of the base endomorphism phi is communicated.
struct FixSource {
  enum class Kind { whole_group, signed_marker, basis };
  Kind kind = Kind::whole_group;
  std::vector<Word> basis;

  static FixSource whole_group_marker() { return {Kind::whole_group, {}}; }
  static FixSource signed_marker() { return {Kind::signed_marker, {}}; }
  static FixSource from_basis(std::vector<Word> b) {
    return {Kind::basis, std::move(b)};
  }
};

struct FixReport {
  enum class PPart {
    trivial_part,
    finite_basis,
    surface_index,
    free_infinite,
  };

  SubgroupType type;
  std::size_t s = 0;          // rank of Fix(psi) cap Z^m
  std::optional<Int> index;   // [Fix phi : p(Fix psi)]; nullopt = infinite
  PPart p_part = PPart::trivial_part;
  std::vector<Word> p_basis;  // finite_basis: explicit kernel basis
  std::vector<std::pair<Int, IntVec>> abelian_solutions;  // Type-2 (c,a) basis
  bool from_type2 = false;
  std::function<bool(const ProdElement&)> member;
};

/// Fixed subgroup of a Type-1 endomorphism. The source supplies Fix phi:
/// the whole-group marker (phi must be the identity), the signed-class
/// marker, or an explicit basis whose elements are verified to be fixed
/// pointwise (completeness of a user basis is trusted, not verified).
FixReport fix(const AmbientSpec& amb, const EndoType1& psi,
              const FixSource& fixphi);

/// Fixed subgroup of a Type-2 endomorphism: always abelian, computed as the
/// left null lattice of the (1+m)-dimensional block system in (c, a).
FixReport fix_type2(const AmbientSpec& amb, const EndoType2& psi);

/// Dispatch on the canonical form; composites are rejected.
FixReport fix_any(const AmbientSpec& amb, const Endomorphism& psi,
                  const FixSource& fixphi);

/// Exhaustive oracle: all fixed elements with |u| <= word_len_bound and
/// |a_i| <= abelian_bound. Refuses bounds beyond the desk-scale budget
/// (word_len_bound <= 8, abelian_bound <= 4).
std::vector<ProdElement> brute_force_fix(const AmbientSpec& amb,
                                         const Endomorphism& psi,
                                         std::size_t word_len_bound,
                                         long abelian_bound);

/// All freely reduced words of length <= max_len, ordered by length then
/// lexicographically.
std::vector<Word> all_reduced_words(std::size_t rank, std::size_t max_len);

}  // namespace fixcalc::prodgrp
