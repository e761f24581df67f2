#include "fixcalc/prodgrp.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace fixcalc {

// --- SubgroupType -----------------------------------------------------

SubgroupType SubgroupType::abelian(Int s) {
  if (s < 0) fail(ErrorKind::range, "negative abelian rank");
  SubgroupType t;
  t.core = Core::trivial;
  t.abelian_rank = std::move(s);
  return t;
}

SubgroupType SubgroupType::free_group(Int t, Int s) {
  if (t < 0 || s < 0) fail(ErrorKind::range, "negative rank");
  if (t == 0) return abelian(std::move(s));
  if (t == 1) return abelian(s + 1);  // F_1 x Z^s = Z^(s+1)
  SubgroupType out;
  out.core = Core::free_finite;
  out.param = std::move(t);
  out.abelian_rank = std::move(s);
  return out;
}

SubgroupType SubgroupType::free_infinite(Int s) {
  if (s < 0) fail(ErrorKind::range, "negative abelian rank");
  SubgroupType out;
  out.core = Core::free_infinite;
  out.abelian_rank = std::move(s);
  return out;
}

SubgroupType SubgroupType::surface_group(Int genus, Int s) {
  if (genus < 2) fail(ErrorKind::range, "surface genus must be >= 2");
  if (s < 0) fail(ErrorKind::range, "negative abelian rank");
  SubgroupType out;
  out.core = Core::surface;
  out.param = std::move(genus);
  out.abelian_rank = std::move(s);
  return out;
}

std::string SubgroupType::str() const {
  std::ostringstream os;
  switch (core) {
    case Core::trivial:
      if (abelian_rank == 0) return "1";
      os << "Z^" << abelian_rank;
      return os.str();
    case Core::free_finite:
      os << 'F' << param;
      break;
    case Core::free_infinite:
      os << "Finf";
      break;
    case Core::surface:
      os << "Surface" << param;
      break;
  }
  if (abelian_rank > 0) os << "xZ^" << abelian_rank;
  return os.str();
}

std::optional<SubgroupType> SubgroupType::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) return std::nullopt;
  if (s == "1") return trivial_group();

  auto parse_int = [](const std::string& digits) -> std::optional<Int> {
    if (digits.empty()) return std::nullopt;
    for (char c : digits)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return Int(digits);
  };

  // optional "xZ" / "xZ^s" suffix
  Int abel = 0;
  std::string head = s;
  auto xpos = s.find("xZ");
  if (xpos != std::string::npos) {
    std::string tail = s.substr(xpos + 2);
    head = s.substr(0, xpos);
    if (tail.empty())
      abel = 1;
    else if (tail[0] == '^') {
      auto v = parse_int(tail.substr(1));
      if (!v) return std::nullopt;
      abel = *v;
    } else {
      return std::nullopt;
    }
  }

  if (head == "Z") return abelian(abel + 1);
  if (head.rfind("Z^", 0) == 0) {
    auto v = parse_int(head.substr(2));
    if (!v) return std::nullopt;
    return abelian(*v + abel);
  }
  if (head == "1") return abelian(abel);
  if (head == "Finf" || head == "Faleph0") return free_infinite(abel);
  if (head.rfind("Surface", 0) == 0) {
    auto v = parse_int(head.substr(7));
    if (!v || *v < 2) return std::nullopt;
    return surface_group(*v, abel);
  }
  if (head[0] == 'F') {
    auto v = parse_int(head.substr(1));
    if (!v) return std::nullopt;
    return free_group(*v, abel);
  }
  return std::nullopt;
}

bool operator<(const SubgroupType& a, const SubgroupType& b) {
  if (a.core != b.core) return a.core < b.core;
  if (a.param != b.param) return a.param < b.param;
  return a.abelian_rank < b.abelian_rank;
}

}  // namespace fixcalc

namespace fixcalc::prodgrp {

// --- ambient and elements ---------------------------------------------

AmbientSpec AmbientSpec::free_ambient(int n, int m) {
  if (n < 0) fail(ErrorKind::range, "free rank must be >= 0");
  if (m < 0) fail(ErrorKind::range, "abelian rank must be >= 0");
  return {Base::free_group, n, m};
}

AmbientSpec AmbientSpec::surface_ambient(int g, int m) {
  if (g < 2) fail(ErrorKind::range, "surface genus must be >= 2");
  if (m < 0) fail(ErrorKind::range, "abelian rank must be >= 0");
  return {Base::surface_group, g, m};
}

surfgrp::SurfaceGroupSpec AmbientSpec::surface() const {
  if (is_free()) fail(ErrorKind::range, "ambient has a free base");
  return surfgrp::SurfaceGroupSpec(n_or_g);
}

bool AmbientSpec::base_equal(const Word& a, const Word& b) const {
  if (a == b) return true;
  if (is_free()) return false;
  return surfgrp::equal(surface(), a, b);
}

bool AmbientSpec::base_trivial(const Word& a) const {
  if (a.empty()) return true;
  if (is_free()) return false;
  return surfgrp::is_trivial(surface(), a);
}

std::string AmbientSpec::str() const {
  std::ostringstream os;
  if (is_free())
    os << "free n=" << n_or_g << " m=" << m;
  else
    os << "surface g=" << n_or_g << " m=" << m;
  return os.str();
}

ProdElement identity_element(const AmbientSpec& amb) {
  return {Word(), IntVec(amb.m)};
}

static void check_element(const AmbientSpec& amb, const ProdElement& e) {
  if (e.a.size() != static_cast<std::size_t>(amb.m))
    fail(ErrorKind::dimension, "exponent vector length mismatch");
  if (static_cast<std::size_t>(e.u.max_generator()) > amb.base_rank())
    fail(ErrorKind::range, "generator index out of range");
}

ProdElement mult(const AmbientSpec& amb, const ProdElement& e1,
                 const ProdElement& e2) {
  check_element(amb, e1);
  check_element(amb, e2);
  return {e1.u * e2.u, intlin::add(e1.a, e2.a)};
}

ProdElement inv(const AmbientSpec& amb, const ProdElement& e) {
  check_element(amb, e);
  IntVec neg(e.a.size());
  for (std::size_t i = 0; i < e.a.size(); ++i) neg[i] = -e.a[i];
  return {e.u.inverse(), std::move(neg)};
}

bool element_equal(const AmbientSpec& amb, const ProdElement& e1,
                   const ProdElement& e2) {
  return e1.a == e2.a && amb.base_equal(e1.u, e2.u);
}

IntVec abelianize_base(const AmbientSpec& amb, const Word& u) {
  return freegrp::abelianize(u, amb.base_rank());
}

// --- base endomorphisms ------------------------------------------------

BaseEndo BaseEndo::identity_endo(std::size_t rank) {
  BaseEndo e;
  e.kind = Kind::identity;
  e.images = freegrp::FreeHomo::identity(rank).images;
  e.inverse_images = e.images;
  return e;
}

BaseEndo BaseEndo::signed_class(const freegrp::SignedClassEndo& se) {
  BaseEndo e;
  e.kind = Kind::signed_class;
  e.signed_fixed = se.fixed;
  e.images = freegrp::signed_images(se).images;
  e.inverse_images = e.images;  // the map is an involution
  return e;
}

BaseEndo BaseEndo::inner(const Word& w, std::size_t rank) {
  BaseEndo e;
  e.kind = Kind::inner;
  e.conjugator = w;
  for (std::size_t i = 1; i <= rank; ++i) {
    Word x = Word::generator(static_cast<int>(i));
    e.images.push_back(w * x * w.inverse());
  }
  std::vector<Word> inv_images;
  Word wi = w.inverse();
  for (std::size_t i = 1; i <= rank; ++i) {
    Word x = Word::generator(static_cast<int>(i));
    inv_images.push_back(wi * x * w);
  }
  e.inverse_images = std::move(inv_images);
  return e;
}

BaseEndo BaseEndo::general(std::vector<Word> images,
                           std::optional<std::vector<Word>> inverse) {
  BaseEndo e;
  e.kind = Kind::general;
  e.images = std::move(images);
  e.inverse_images = std::move(inverse);
  return e;
}

Word BaseEndo::apply(const Word& w) const {
  freegrp::FreeHomo f;
  f.source_rank = f.target_rank = images.size();
  f.images = images;
  return freegrp::apply_homo(f, w);
}

bool BaseEndo::is_identity_images() const {
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& l = images[i].letters();
    if (l.size() != 1 || l[0] != static_cast<int>(i + 1)) return false;
  }
  return true;
}

// --- canonical form constructors ---------------------------------------

namespace {

void check_matrix_dims(const AmbientSpec& amb, const IntMatrix& q,
                       const IntMatrix& p) {
  const std::size_t m = static_cast<std::size_t>(amb.m);
  if (q.rows() != m || q.cols() != m)
    fail(ErrorKind::dimension, "Q must be m x m");
  if (p.rows() != amb.base_rank() || p.cols() != m)
    fail(ErrorKind::dimension, "P must be base_rank x m");
}

// Exact free-group test: cyclically reduce, then look for a literal root.
bool is_literal_proper_power(const Word& z) {
  std::vector<freegrp::Letter> l = z.letters();
  std::size_t lo = 0, hi = l.size();
  while (hi - lo >= 2 && l[lo] == -l[hi - 1]) {
    ++lo;
    --hi;
  }
  const std::size_t n = hi - lo;
  if (n == 0) return false;
  for (std::size_t period = 1; period <= n / 2; ++period) {
    if (n % period != 0) continue;
    bool match = true;
    for (std::size_t i = period; i < n && match; ++i)
      match = l[lo + i] == l[lo + i % period];
    if (match) return true;
  }
  return false;
}

// Surface-group side of the proper-power check, at desk scale only: short
// candidate roots, small exponents, Dehn equality.
bool is_surface_proper_power_desk(const surfgrp::SurfaceGroupSpec& spec,
                                  const Word& z) {
  const std::size_t max_root = std::min<std::size_t>(z.size() / 2, 3);
  for (std::size_t len = 1; len <= max_root; ++len)
    for (const Word& w : all_reduced_words(spec.alphabet_rank(), len)) {
      if (w.size() != len) continue;
      for (long j = 2; j <= 8; ++j) {
        Word p = w.pow(j);
        if (p.size() > z.size() + 4 * spec.alphabet_rank()) break;
        if (surfgrp::equal(spec, p, z)) return true;
      }
    }
  return false;
}

}  // namespace

Endomorphism make_type1(const AmbientSpec& amb, BaseEndo phi, IntMatrix Q,
                        IntMatrix P) {
  check_matrix_dims(amb, Q, P);
  if (phi.images.size() != amb.base_rank())
    fail(ErrorKind::dimension, "phi must have one image per base generator");
  for (const Word& w : phi.images)
    if (static_cast<std::size_t>(w.max_generator()) > amb.base_rank())
      fail(ErrorKind::range, "generator index out of range in phi");
  if (!amb.is_free() && !surfgrp::validate_endo(amb.surface(), phi.images))
    fail(ErrorKind::verification,
         "generator assignment does not kill the surface relator");
  if (phi.inverse_images && phi.kind == BaseEndo::Kind::general) {
    // certify the claimed inverse by a generator round-trip
    BaseEndo inv_candidate = BaseEndo::general(*phi.inverse_images);
    if (inv_candidate.images.size() != amb.base_rank())
      fail(ErrorKind::dimension, "inverse image list size mismatch");
    for (std::size_t i = 1; i <= amb.base_rank(); ++i) {
      Word x = Word::generator(static_cast<int>(i));
      if (!amb.base_equal(phi.apply(inv_candidate.apply(x)), x) ||
          !amb.base_equal(inv_candidate.apply(phi.apply(x)), x))
        fail(ErrorKind::verification,
             "supplied inverse of phi fails the round-trip check");
    }
  }
  return Endomorphism(EndoType1{std::move(phi), std::move(Q), std::move(P)});
}

Endomorphism make_type2(const AmbientSpec& amb, Word z, IntVec l, IntVec h,
                        IntMatrix Q, IntMatrix P) {
  if (amb.m < 1)
    fail(ErrorKind::range, "Type-2 requires abelian rank m >= 1");
  check_matrix_dims(amb, Q, P);
  if (l.size() != static_cast<std::size_t>(amb.m))
    fail(ErrorKind::dimension, "l must have length m");
  if (h.size() != amb.base_rank())
    fail(ErrorKind::dimension, "h must have length base_rank");
  if (amb.base_trivial(z))
    fail(ErrorKind::verification, "z must be nontrivial");
  if (static_cast<std::size_t>(z.max_generator()) > amb.base_rank())
    fail(ErrorKind::range, "generator index out of range in z");
  if (intlin::is_zero(l)) fail(ErrorKind::verification, "l must be nonzero");
  if (is_literal_proper_power(z))
    fail(ErrorKind::verification, "z is a proper power");
  if (!amb.is_free() && is_surface_proper_power_desk(amb.surface(), z))
    fail(ErrorKind::verification, "z is a proper power");
  return Endomorphism(EndoType2{std::move(z), std::move(l), std::move(h),
                                std::move(Q), std::move(P)});
}

Endomorphism identity_endo(const AmbientSpec& amb) {
  return make_type1(amb, BaseEndo::identity_endo(amb.base_rank()),
                    IntMatrix::identity(amb.m),
                    IntMatrix::zero(amb.base_rank(), amb.m));
}

// --- apply / compose ----------------------------------------------------

namespace {

long to_long_exponent(const Int& c) {
  if (!c.fits_slong_p() || abs(c) > 1000000)
    fail(ErrorKind::range, "exponent beyond desk scale");
  return c.get_si();
}

}  // namespace

ProdElement apply(const AmbientSpec& amb, const Endomorphism& psi,
                  const ProdElement& e) {
  check_element(amb, e);
  if (psi.is_type1()) {
    const EndoType1& t = psi.type1();
    IntVec u_ab = abelianize_base(amb, e.u);
    IntVec a_new =
        intlin::add(intlin::mul(e.a, t.Q), intlin::mul(u_ab, t.P));
    return {t.phi.apply(e.u), std::move(a_new)};
  }
  if (psi.is_type2()) {
    const EndoType2& t = psi.type2();
    IntVec u_ab = abelianize_base(amb, e.u);
    Int c = intlin::dot(e.a, t.l) + intlin::dot(u_ab, t.h);
    IntVec a_new =
        intlin::add(intlin::mul(e.a, t.Q), intlin::mul(u_ab, t.P));
    return {t.z.pow(to_long_exponent(c)), std::move(a_new)};
  }
  const CompositePair& c = psi.composite();
  return apply(amb, *c.outer, apply(amb, *c.inner, e));
}

Endomorphism compose(const AmbientSpec& amb, const Endomorphism& outer,
                     const Endomorphism& inner) {
  if (outer.is_type1() && inner.is_type1()) {
    const EndoType1& t2 = outer.type1();
    const EndoType1& t1 = inner.type1();
    BaseEndo phi;
    // preserve the provenance class where composition keeps it
    if (t1.phi.kind == BaseEndo::Kind::identity) {
      phi = t2.phi;
    } else if (t2.phi.kind == BaseEndo::Kind::identity) {
      phi = t1.phi;
    } else if (t1.phi.kind == BaseEndo::Kind::signed_class &&
               t2.phi.kind == BaseEndo::Kind::signed_class) {
      freegrp::SignedClassEndo se;
      se.rank = t1.phi.images.size();
      for (std::size_t i = 1; i <= se.rank; ++i) {
        bool f1 = t1.phi.signed_fixed.count(static_cast<int>(i)) > 0;
        bool f2 = t2.phi.signed_fixed.count(static_cast<int>(i)) > 0;
        if (f1 == f2) se.fixed.insert(static_cast<int>(i));
      }
      phi = BaseEndo::signed_class(se);
    } else if (t1.phi.kind == BaseEndo::Kind::inner &&
               t2.phi.kind == BaseEndo::Kind::inner) {
      phi = BaseEndo::inner(t2.phi.conjugator * t1.phi.conjugator,
                            t1.phi.images.size());
    } else {
      std::vector<Word> images;
      for (const Word& w : t1.phi.images) images.push_back(t2.phi.apply(w));
      std::optional<std::vector<Word>> inverse;
      if (t1.phi.inverse_images && t2.phi.inverse_images) {
        BaseEndo inv1 = BaseEndo::general(*t1.phi.inverse_images);
        std::vector<Word> inv;
        for (const Word& w : *t2.phi.inverse_images)
          inv.push_back(inv1.apply(w));
        inverse = std::move(inv);
      }
      phi = BaseEndo::general(std::move(images), std::move(inverse));
    }
    IntMatrix Q = t1.Q * t2.Q;
    IntMatrix M1 = freegrp::abelianization_matrix(
        t1.phi.images, amb.base_rank(), amb.base_rank());
    IntMatrix P = t1.P * t2.Q + M1 * t2.P;
    return make_type1(amb, std::move(phi), std::move(Q), std::move(P));
  }
  return Endomorphism(CompositePair{
      std::make_shared<Endomorphism>(outer),
      std::make_shared<Endomorphism>(inner)});
}

// --- mono / epi / auto --------------------------------------------------

std::string verdict_str(Verdict v) {
  switch (v) {
    case Verdict::yes:
      return "yes";
    case Verdict::no:
      return "no";
    default:
      return "unknown";
  }
}

namespace {

Verdict verdict_and(Verdict a, Verdict b) {
  if (a == Verdict::no || b == Verdict::no) return Verdict::no;
  if (a == Verdict::unknown || b == Verdict::unknown) return Verdict::unknown;
  return Verdict::yes;
}

struct PhiVerdicts {
  Verdict mono, epi;
};

PhiVerdicts phi_verdicts(const AmbientSpec& amb, const BaseEndo& phi) {
  if (amb.is_free()) {
    freegrp::FreeHomo f;
    f.source_rank = f.target_rank = amb.base_rank();
    f.images = phi.images;
    Verdict mono =
        freegrp::is_injective_endo(f) ? Verdict::yes : Verdict::no;
    Verdict epi =
        freegrp::is_surjective_endo(f) ? Verdict::yes : Verdict::no;
    return {mono, epi};
  }
  switch (phi.kind) {
    case BaseEndo::Kind::identity:
    case BaseEndo::Kind::inner:
      return {Verdict::yes, Verdict::yes};
    case BaseEndo::Kind::signed_class:
    case BaseEndo::Kind::general: {
      if (phi.inverse_images) return {Verdict::yes, Verdict::yes};
      IntMatrix M = freegrp::abelianization_matrix(
          phi.images, amb.base_rank(), amb.base_rank());
      // A surface endomorphism is mono iff epi iff auto (Hopfian and
      // co-Hopfian), and an automorphism has unimodular H_1.
      if (!intlin::is_unimodular(M)) return {Verdict::no, Verdict::no};
      return {Verdict::unknown, Verdict::unknown};
    }
  }
  return {Verdict::unknown, Verdict::unknown};
}

bool has_type2_factor(const Endomorphism& psi) {
  if (psi.is_type2()) return true;
  if (psi.is_composite())
    return has_type2_factor(*psi.composite().outer) ||
           has_type2_factor(*psi.composite().inner);
  return false;
}

}  // namespace

Verdict is_mono(const AmbientSpec& amb, const Endomorphism& psi) {
  if (psi.is_type1()) {
    const EndoType1& t = psi.type1();
    Verdict detq = intlin::det(t.Q) != 0 ? Verdict::yes : Verdict::no;
    return verdict_and(phi_verdicts(amb, t.phi).mono, detq);
  }
  // Abelian image: never injective on a non-abelian ambient.
  if (has_type2_factor(psi) && amb.base_rank() >= 2) return Verdict::no;
  return Verdict::unknown;
}

Verdict is_epi(const AmbientSpec& amb, const Endomorphism& psi) {
  if (psi.is_type1()) {
    const EndoType1& t = psi.type1();
    Verdict detq = intlin::is_unimodular(t.Q) ? Verdict::yes : Verdict::no;
    return verdict_and(phi_verdicts(amb, t.phi).epi, detq);
  }
  if (has_type2_factor(psi) && amb.base_rank() >= 2) return Verdict::no;
  return Verdict::unknown;
}

Verdict is_auto(const AmbientSpec& amb, const Endomorphism& psi) {
  // The ambient is Hopfian: epimorphism == automorphism.
  return is_epi(amb, psi);
}

Endomorphism invert(const AmbientSpec& amb, const Endomorphism& psi) {
  if (is_auto(amb, psi) != Verdict::yes)
    fail(ErrorKind::verification, "not an automorphism");
  const EndoType1& t = psi.type1();

  BaseEndo phi_inv;
  switch (t.phi.kind) {
    case BaseEndo::Kind::identity:
      phi_inv = t.phi;
      break;
    case BaseEndo::Kind::signed_class:
      phi_inv = t.phi;  // involution
      break;
    case BaseEndo::Kind::inner:
      phi_inv = BaseEndo::inner(t.phi.conjugator.inverse(), t.phi.rank());
      break;
    case BaseEndo::Kind::general:
      if (!t.phi.inverse_images)
        fail(ErrorKind::missing_data, "inverse of phi not constructible");
      phi_inv = BaseEndo::general(*t.phi.inverse_images, t.phi.images);
      break;
  }

  IntMatrix Qinv = intlin::inverse_unimodular(t.Q);
  IntMatrix M = freegrp::abelianization_matrix(t.phi.images, amb.base_rank(),
                                               amb.base_rank());
  IntMatrix Minv = intlin::inverse_unimodular(M);
  IntMatrix Pnew = IntMatrix::zero(amb.base_rank(), amb.m) - Minv * t.P * Qinv;
  return make_type1(amb, std::move(phi_inv), std::move(Qinv),
                    std::move(Pnew));
}

// --- the fixed-subgroup engine ------------------------------------------

namespace {

// Fix phi as resolved from the fix source.
struct ResolvedFix {
  bool whole_surface = false;  // Fix phi = the entire surface group
  std::vector<Word> basis;     // otherwise: free basis of Fix phi
};

ResolvedFix resolve_fix_source(const AmbientSpec& amb, const EndoType1& psi,
                               const FixSource& src) {
  ResolvedFix out;
  switch (src.kind) {
    case FixSource::Kind::whole_group: {
      if (!psi.phi.is_identity_images())
        fail(ErrorKind::verification,
             "whole-group marker requires the identity base map");
      if (amb.is_free()) {
        for (std::size_t i = 1; i <= amb.base_rank(); ++i)
          out.basis.push_back(Word::generator(static_cast<int>(i)));
      } else {
        out.whole_surface = true;
      }
      return out;
    }
    case FixSource::Kind::signed_marker: {
      if (!amb.is_free())
        fail(ErrorKind::missing_data,
             "signed marker is only available for a free base");
      std::set<int> fixed;
      for (std::size_t i = 0; i < psi.phi.images.size(); ++i) {
        const auto& l = psi.phi.images[i].letters();
        int want = static_cast<int>(i + 1);
        if (l.size() == 1 && l[0] == want)
          fixed.insert(want);
        else if (!(l.size() == 1 && l[0] == -want))
          fail(ErrorKind::verification,
               "signed marker requires every image to be x_i or x_i^-1");
      }
      freegrp::SignedClassEndo se;
      se.rank = amb.base_rank();
      se.fixed = std::move(fixed);
      out.basis = freegrp::signed_fix(se);
      return out;
    }
    case FixSource::Kind::basis: {
      for (const Word& b : src.basis)
        if (!amb.base_equal(psi.phi.apply(b), b))
          fail(ErrorKind::verification,
               "basis fails pointwise fixedness check");
      if (amb.is_free()) {
        freegrp::StallingsGraph g =
            freegrp::StallingsGraph::fold(src.basis, amb.base_rank());
        if (g.rank() != src.basis.size())
          fail(ErrorKind::verification, "not a free basis");
      } else if (src.basis.size() >= amb.base_rank()) {
        // Fixed subgroups of surface endomorphisms are F_k (k < 2g) or the
        // whole group; a claimed free basis this large contradicts that.
        fail(ErrorKind::verification,
             "claimed fixed-subgroup rank contradicts the surface bound");
      }
      out.basis = src.basis;
      return out;
    }
  }
  fail(ErrorKind::missing_data, "unresolved fix source");
}

struct MemberCtx {
  AmbientSpec amb;
  IntMatrix Q, P;
  BaseEndo phi;
  intlin::QuotientStructure quotient;
  FixReport::PPart p_part;
  std::shared_ptr<freegrp::StallingsGraph> p_fold;  // free finite basis only
};

bool a_equation_holds(const MemberCtx& ctx, const ProdElement& e) {
  IntVec u_ab = abelianize_base(ctx.amb, e.u);
  IntVec rhs = intlin::add(intlin::mul(e.a, ctx.Q), intlin::mul(u_ab, ctx.P));
  return e.a == rhs;
}

bool p_membership(const MemberCtx& ctx, const Word& u) {
  switch (ctx.p_part) {
    case FixReport::PPart::finite_basis:
      if (ctx.p_fold) return ctx.p_fold->member(u);
      // surface words: kernel-of-quotient route
      return ctx.amb.base_equal(ctx.phi.apply(u), u) &&
             ctx.quotient.project(intlin::mul(abelianize_base(ctx.amb, u),
                                              ctx.P))
                 .is_zero();
    case FixReport::PPart::surface_index:
    case FixReport::PPart::free_infinite:
      return ctx.amb.base_equal(ctx.phi.apply(u), u) &&
             ctx.quotient.project(intlin::mul(abelianize_base(ctx.amb, u),
                                              ctx.P))
                 .is_zero();
    case FixReport::PPart::trivial_part:
      return ctx.amb.base_trivial(u);
  }
  return false;
}

}  // namespace

FixReport fix(const AmbientSpec& amb, const EndoType1& psi,
              const FixSource& fixphi) {
  check_matrix_dims(amb, psi.Q, psi.P);
  ResolvedFix fixed = resolve_fix_source(amb, psi, fixphi);

  const IntMatrix i_minus_q =
      IntMatrix::identity(amb.m) - psi.Q;
  intlin::QuotientStructure quotient(i_minus_q);
  const std::size_t s = quotient.free_rank();

  // Images of the Fix phi generators in Z^m / Row(I - Q) under u -> class
  // of uP.
  std::vector<intlin::QuotientStructure::Image> images;
  if (fixed.whole_surface) {
    for (std::size_t i = 0; i < amb.base_rank(); ++i)
      images.push_back(quotient.project(psi.P.row(i)));
  } else {
    for (const Word& b : fixed.basis)
      images.push_back(
          quotient.project(intlin::mul(abelianize_base(amb, b), psi.P)));
  }
  bool image_infinite = false;
  for (const auto& img : images)
    if (!intlin::is_zero(img.free)) image_infinite = true;

  FixReport report;
  report.s = s;

  auto finish = [&](FixReport::PPart part,
                    std::shared_ptr<freegrp::StallingsGraph> fold) {
    report.p_part = part;
    MemberCtx ctx{amb,      psi.Q, psi.P,           psi.phi,
                  quotient, part,  std::move(fold)};
    auto shared = std::make_shared<MemberCtx>(std::move(ctx));
    report.member = [shared](const ProdElement& e) {
      if (e.a.size() != shared->Q.rows()) return false;
      return p_membership(*shared, e.u) && a_equation_holds(*shared, e);
    };
  };

  if (fixed.whole_surface) {
    if (image_infinite) {
      // infinite-index nontrivial normal subgroup of a surface group
      report.type = SubgroupType::free_infinite(s);
      report.index = std::nullopt;
      finish(FixReport::PPart::free_infinite, nullptr);
      return report;
    }
    std::vector<IntVec> residues;
    for (const auto& img : images) residues.push_back(img.residues);
    Int d = quotient.torsion_subgroup_order(residues);
    report.index = d;
    report.type = SubgroupType::surface_group(
        surfgrp::genus_of_index(amb.n_or_g, d), s);
    finish(FixReport::PPart::surface_index, nullptr);
    return report;
  }

  const std::size_t k = fixed.basis.size();
  if (k == 0) {
    report.type = SubgroupType::abelian(s);
    report.index = Int(1);
    finish(FixReport::PPart::trivial_part, nullptr);
    return report;
  }

  if (k == 1) {
    // Direct kernel computation inside Fix phi = <b> = Z.
    const Word& b = fixed.basis[0];
    if (image_infinite) {
      report.type = SubgroupType::abelian(s);
      report.index = std::nullopt;
      finish(FixReport::PPart::trivial_part, nullptr);
      return report;
    }
    Int order = quotient.torsion_element_order(images[0].residues);
    report.index = order;
    report.p_basis = {b.pow(to_long_exponent(order))};
    report.type = SubgroupType::free_group(1, s);  // canonical Z^(s+1)
    auto fold = amb.is_free()
                    ? std::make_shared<freegrp::StallingsGraph>(
                          freegrp::StallingsGraph::fold(report.p_basis,
                                                        amb.base_rank()))
                    : nullptr;
    finish(FixReport::PPart::finite_basis, std::move(fold));
    return report;
  }

  if (image_infinite) {
    // Normal infinite-index subgroup of F_k (k >= 2) containing the
    // commutators: F_aleph0.
    report.type = SubgroupType::free_infinite(s);
    report.index = std::nullopt;
    finish(FixReport::PPart::free_infinite, nullptr);
    return report;
  }

  std::vector<IntVec> residues;
  for (const auto& img : images) residues.push_back(img.residues);
  if (amb.is_free()) {
    freegrp::KernelOfAbelianMap kernel = freegrp::kernel_of_abelian_map(
        fixed.basis, amb.base_rank(), quotient.torsion(), residues);
    report.index = kernel.index;
    report.p_basis = kernel.basis;
    report.type = SubgroupType::free_group(
        Int(static_cast<unsigned long>(kernel.basis.size())), s);
    auto fold = std::make_shared<freegrp::StallingsGraph>(
        freegrp::StallingsGraph::fold(report.p_basis, amb.base_rank()));
    finish(FixReport::PPart::finite_basis, std::move(fold));
    return report;
  }
  // Surface base, free Fix phi supplied as a basis: the coset machinery is
  // abstract, the produced words live in the surface group.
  freegrp::SchreierKernel kernel =
      freegrp::schreier_kernel(k, quotient.torsion(), residues);
  report.index = kernel.index;
  for (const Word& w : kernel.abstract_basis)
    report.p_basis.push_back(freegrp::substitute(w, fixed.basis));
  report.type = SubgroupType::free_group(
      Int(static_cast<unsigned long>(report.p_basis.size())), s);
  finish(FixReport::PPart::finite_basis, nullptr);
  return report;
}

FixReport fix_type2(const AmbientSpec& amb, const EndoType2& psi) {
  check_matrix_dims(amb, psi.Q, psi.P);
  if (is_literal_proper_power(psi.z))
    fail(ErrorKind::verification, "z is a proper power");
  const std::size_t m = static_cast<std::size_t>(amb.m);
  IntVec z_ab = abelianize_base(amb, psi.z);
  Int zh = intlin::dot(z_ab, psi.h);
  IntVec zp = intlin::mul(z_ab, psi.P);

  // Solutions (c, a) of  c = a l^T + c (z h^T),  a = a Q + c (z P).
  IntMatrix b(1 + m, 1 + m);
  b.at(0, 0) = 1 - zh;
  for (std::size_t i = 0; i < m; ++i) b.at(1 + i, 0) = -psi.l[i];
  for (std::size_t j = 0; j < m; ++j) b.at(0, 1 + j) = -zp[j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      b.at(1 + i, 1 + j) = (i == j ? Int(1) : Int(0)) - psi.Q.at(i, j);

  std::vector<IntVec> basis = intlin::left_null_basis(b);

  FixReport report;
  report.from_type2 = true;
  report.type = SubgroupType::abelian(
      Int(static_cast<unsigned long>(basis.size())));
  report.s = basis.size();
  for (const IntVec& v : basis) {
    IntVec a(v.begin() + 1, v.end());
    report.abelian_solutions.emplace_back(v[0], std::move(a));
  }

  IntMatrix solution_matrix(basis.size(), 1 + m);
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < 1 + m; ++j)
      solution_matrix.at(i, j) = basis[i][j];

  struct Ctx {
    AmbientSpec amb;
    Word z;
    IntMatrix solutions;
  };
  auto ctx = std::make_shared<Ctx>(Ctx{amb, psi.z, solution_matrix});
  report.member = [ctx](const ProdElement& e) {
    if (e.a.size() != ctx->solutions.cols() - 1) return false;
    // u must be z^c for some integer c; u = z^c forces the abelianized
    // equation u_ab = c * z_ab, which pins c whenever z_ab is nonzero.
    std::optional<Int> c;
    if (ctx->amb.base_trivial(e.u)) {
      c = 0;
    } else {
      IntVec zv = abelianize_base(ctx->amb, ctx->z);
      IntVec uv = abelianize_base(ctx->amb, e.u);
      if (!intlin::is_zero(zv)) {
        std::size_t pivot = 0;
        while (zv[pivot] == 0) ++pivot;
        if (uv[pivot] % zv[pivot] != 0) return false;
        Int cand = uv[pivot] / zv[pivot];
        for (std::size_t i = 0; i < zv.size(); ++i)
          if (uv[i] != cand * zv[i]) return false;
        if (!ctx->amb.base_equal(ctx->z.pow(to_long_exponent(cand)), e.u))
          return false;
        c = cand;
      } else {
        // z abelianizes to zero; scan exponents up to a desk-scale bound
        const long bound =
            static_cast<long>(e.u.size() + 8 * ctx->amb.base_rank() + 8);
        for (long j = 1; j <= bound && !c; ++j) {
          Word p = ctx->z.pow(j);
          if (ctx->amb.is_free() && p.size() > e.u.size()) break;
          if (ctx->amb.base_equal(p, e.u))
            c = j;
          else if (ctx->amb.base_equal(p.inverse(), e.u))
            c = -j;
        }
        if (!c) return false;
      }
    }
    IntVec target(1 + e.a.size());
    target[0] = *c;
    for (std::size_t i = 0; i < e.a.size(); ++i) target[1 + i] = e.a[i];
    return intlin::solve_left(ctx->solutions, target).has_value();
  };
  return report;
}

FixReport fix_any(const AmbientSpec& amb, const Endomorphism& psi,
                  const FixSource& fixphi) {
  if (psi.is_type1()) return fix(amb, psi.type1(), fixphi);
  if (psi.is_type2()) return fix_type2(amb, psi.type2());
  fail(ErrorKind::missing_data,
       "fixed subgroup of an opaque composite is not supported; "
       "recompose in canonical form");
}

// --- brute force oracle ---------------------------------------------------

std::vector<Word> all_reduced_words(std::size_t rank, std::size_t max_len) {
  std::vector<Word> out{Word()};
  std::vector<Word> frontier{Word()};
  std::vector<freegrp::Letter> alphabet;
  for (std::size_t i = 1; i <= rank; ++i) {
    alphabet.push_back(static_cast<int>(i));
    alphabet.push_back(-static_cast<int>(i));
  }
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const Word& w : frontier)
      for (freegrp::Letter l : alphabet) {
        if (!w.empty() && w.letters().back() == -l) continue;
        std::vector<freegrp::Letter> letters = w.letters();
        letters.push_back(l);
        next.push_back(Word::from_letters(std::move(letters)));
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::vector<ProdElement> brute_force_fix(const AmbientSpec& amb,
                                         const Endomorphism& psi,
                                         std::size_t word_len_bound,
                                         long abelian_bound) {
  if (word_len_bound > 8 || abelian_bound > 4 || abelian_bound < 0)
    fail(ErrorKind::range, "bounds too large");
  const std::size_t rank = amb.base_rank();
  double words = 1;
  if (rank > 0) {
    double level = 2.0 * rank;
    for (std::size_t i = 0; i < word_len_bound; ++i) {
      words += level;
      level *= 2.0 * rank - 1;
    }
  }
  double vectors = 1;
  for (int i = 0; i < amb.m; ++i) vectors *= 2.0 * abelian_bound + 1;
  if (words * vectors > 1e7) fail(ErrorKind::range, "bounds too large");

  std::vector<IntVec> box{IntVec(amb.m)};
  for (int coord = 0; coord < amb.m; ++coord) {
    std::vector<IntVec> next;
    for (const IntVec& v : box)
      for (long val = -abelian_bound; val <= abelian_bound; ++val) {
        IntVec w = v;
        w[coord] = val;
        next.push_back(std::move(w));
      }
    box = std::move(next);
  }

  std::vector<ProdElement> fixed;
  for (const Word& u : all_reduced_words(rank, word_len_bound))
    for (const IntVec& a : box) {
      ProdElement e{u, a};
      ProdElement image = apply(amb, psi, e);
      if (element_equal(amb, image, e)) fixed.push_back(std::move(e));
    }
  return fixed;
}

}  // namespace fixcalc::prodgrp
