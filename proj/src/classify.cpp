#include "fixcalc/classify.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace fixcalc::classify {

using prodgrp::BaseEndo;
using prodgrp::Endomorphism;
using prodgrp::FixReport;
using prodgrp::FixSource;
using prodgrp::ProdElement;
using freegrp::Word;
using intlin::Int;
using intlin::IntMatrix;
using intlin::IntVec;

namespace {

void check_theorem_range(const AmbientSpec& amb) {
  if (amb.m < 1) fail(ErrorKind::range, "out of theorem range");
  if (amb.is_free() && amb.n_or_g < 2)
    fail(ErrorKind::range, "out of theorem range");
}

bool realizable(const AmbientSpec& amb, const SubgroupType& t) {
  const Int m = amb.m;
  switch (t.core) {
    case SubgroupType::Core::trivial:
      return t.abelian_rank <= m + 1;  // Z^(m+1) sits inside <x1> x Z^m
    case SubgroupType::Core::free_finite:
    case SubgroupType::Core::free_infinite:
      return t.abelian_rank <= m;
    case SubgroupType::Core::surface: {
      if (amb.is_free()) return false;
      Int g = amb.n_or_g;
      if (t.param < g) return false;
      if ((t.param - 1) % (g - 1) != 0) return false;
      return t.abelian_rank <= m;
    }
  }
  return false;
}

// Exclusion-list encodings of the end-fixed tables. The same shape covers
// m = 1 and m >= 2 for each base.
bool end_excluded(const AmbientSpec& amb, const SubgroupType& t) {
  const Int m = amb.m;
  if (t.core == SubgroupType::Core::free_infinite && t.abelian_rank == 0)
    return true;
  if (amb.is_free()) {
    const Int n = amb.n_or_g;
    return t.core == SubgroupType::Core::free_finite &&
           t.abelian_rank == m && t.param > n;
  }
  const Int g = amb.n_or_g;
  if (t.core == SubgroupType::Core::free_finite && t.abelian_rank == m &&
      t.param >= 2 * g)
    return true;
  if (t.core == SubgroupType::Core::surface && t.abelian_rank == m &&
      t.param > g)
    return true;
  return false;
}

// Extra aut-only exclusions for m = 1.
bool aut_extra_excluded_m1(const AmbientSpec& amb, const SubgroupType& t) {
  if (t.abelian_rank != 0) return false;
  if (amb.is_free()) {
    const Int n = amb.n_or_g;
    if (t.core != SubgroupType::Core::free_finite) return false;
    if (t.param % 2 == 0 && t.param > n) return true;  // F_2k, 2k > n
    if (t.param > 2 * n) return true;                  // F_t, t > 2n
    return false;
  }
  const Int g = amb.n_or_g;
  if (t.core == SubgroupType::Core::free_finite) {
    if (t.param % 2 == 0 && t.param >= 2 * g) return true;  // F_2n, n >= g
    if (t.param >= 4 * g - 1) return true;                  // F_t, t >= 4g-1
    return false;
  }
  if (t.core == SubgroupType::Core::surface)
    return t.param > g && t.param != 2 * g - 1;
  return false;
}

// Allowed-list encodings of the aut-fixed tables, used to cross-check the
// exclusion route.
bool aut_allowed_list(const AmbientSpec& amb, const SubgroupType& t) {
  const Int m = amb.m;
  if (amb.is_free()) {
    const Int n = amb.n_or_g;
    if (m >= 2) {
      switch (t.core) {
        case SubgroupType::Core::trivial:
          return t.abelian_rank <= m || (t.abelian_rank == m + 1 && n >= 1);
        case SubgroupType::Core::free_finite:
          return t.abelian_rank <= m - 1 ||
                 (t.abelian_rank == m && t.param <= n);
        case SubgroupType::Core::free_infinite:
          return t.abelian_rank >= 1 && t.abelian_rank <= m;
        case SubgroupType::Core::surface:
          return false;
      }
    }
    // m == 1: F_{2t-1} (1 <= t <= n), F_t x Z^s (t <= n, s <= 1), Finf x Z
    switch (t.core) {
      case SubgroupType::Core::trivial:
        return t.abelian_rank <= 2;
      case SubgroupType::Core::free_finite:
        if (t.abelian_rank == 0)
          return t.param <= n || (t.param % 2 == 1 && t.param <= 2 * n - 1);
        if (t.abelian_rank == 1) return t.param <= n;
        return false;
      case SubgroupType::Core::free_infinite:
        return t.abelian_rank == 1;
      case SubgroupType::Core::surface:
        return false;
    }
  }
  const Int g = amb.n_or_g;
  if (m >= 2) {
    switch (t.core) {
      case SubgroupType::Core::trivial:
        return t.abelian_rank <= m + 1;
      case SubgroupType::Core::free_finite:
        return t.abelian_rank <= m - 1 ||
               (t.abelian_rank == m && t.param < 2 * g);
      case SubgroupType::Core::free_infinite:
        return t.abelian_rank >= 1 && t.abelian_rank <= m;
      case SubgroupType::Core::surface:
        return t.abelian_rank <= m - 1 ||
               (t.abelian_rank == m && t.param == g);
    }
  }
  // m == 1: F_{2t-1} (t < 2g), Surface(2g-1), Finf x Z, Surface(g) x Z^s,
  // F_t x Z^s (t < 2g, s <= 1)
  switch (t.core) {
    case SubgroupType::Core::trivial:
      return t.abelian_rank <= 2;
    case SubgroupType::Core::free_finite:
      if (t.abelian_rank == 0)
        return t.param < 2 * g ||
               (t.param % 2 == 1 && t.param <= 4 * g - 3);
      if (t.abelian_rank == 1) return t.param < 2 * g;
      return false;
    case SubgroupType::Core::free_infinite:
      return t.abelian_rank == 1;
    case SubgroupType::Core::surface:
      if (t.abelian_rank == 0) return t.param == g || t.param == 2 * g - 1;
      if (t.abelian_rank == 1) return t.param == g;
      return false;
  }
  return false;
}

}  // namespace

std::string Verdict::str(const SubgroupType& t) const {
  std::ostringstream os;
  os << "type=" << t.str() << " aut=" << (aut_fixed ? 'y' : 'n')
     << " end=" << (end_fixed ? 'y' : 'n') << " witness=";
  switch (witness_available) {
    case Witness::yes:
      os << 'y';
      break;
    case Witness::no:
      os << 'n';
      break;
    case Witness::cited_elsewhere:
      os << "cited";
      break;
  }
  return os.str();
}

Verdict classify(const AmbientSpec& amb, const SubgroupType& t) {
  check_theorem_range(amb);
  if (!realizable(amb, t)) fail(ErrorKind::range, "not a subgroup");

  Verdict v;
  v.end_fixed = !end_excluded(amb, t);
  bool aut_via_exclusion =
      v.end_fixed && !(amb.m == 1 && aut_extra_excluded_m1(amb, t));
  bool aut_via_list = aut_allowed_list(amb, t);
  if (aut_via_exclusion != aut_via_list)
    fail(ErrorKind::range, "classification table gap");
  v.aut_fixed = aut_via_exclusion;

  if (!v.end_fixed) {
    v.witness_available = Verdict::Witness::no;
  } else if (witness(amb, t)) {
    v.witness_available = Verdict::Witness::yes;
  } else {
    v.witness_available = Verdict::Witness::cited_elsewhere;
  }
  return v;
}

std::vector<SubgroupType> enumerate_types(const AmbientSpec& amb,
                                          const EnumBounds& bounds,
                                          bool include_infinite) {
  std::vector<SubgroupType> out;
  const long m = amb.m;
  const long s_abelian_cap = std::min(bounds.max_s, m + 1);
  const long s_cap = std::min(bounds.max_s, m);
  for (long s = 0; s <= s_abelian_cap; ++s)
    out.push_back(SubgroupType::abelian(s));
  for (long t = 2; t <= bounds.max_rank; ++t)
    for (long s = 0; s <= s_cap; ++s)
      out.push_back(SubgroupType::free_group(t, s));
  if (include_infinite)
    for (long s = 0; s <= s_cap; ++s)
      out.push_back(SubgroupType::free_infinite(s));
  if (!amb.is_free()) {
    const long g = amb.n_or_g;
    for (long j = 1;; ++j) {
      long genus = j * (g - 1) + 1;
      if (genus > bounds.max_genus) break;
      for (long s = 0; s <= s_cap; ++s)
        out.push_back(SubgroupType::surface_group(genus, s));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Q = diag(I_s, c * I_(m-s)): the first s coordinates survive into the free
// part of Z^m / Row(I - Q), the rest are collapsed mod (1 - c).
IntMatrix block_q(long s, long m, const Int& c) {
  IntMatrix q = IntMatrix::identity(m);
  for (long i = s; i < m; ++i) q.at(i, i) = c;
  return q;
}

// P sending x1 to the given coordinate vector e_col, all other generators
// to zero.
IntMatrix x1_column(std::size_t base_rank, long m, long col) {
  IntMatrix p = IntMatrix::zero(base_rank, m);
  p.at(0, col) = 1;
  return p;
}

BaseEndo signed_prefix(std::size_t base_rank, long fixed_count) {
  freegrp::SignedClassEndo se;
  se.rank = base_rank;
  for (long i = 1; i <= fixed_count; ++i) se.fixed.insert(static_cast<int>(i));
  return BaseEndo::signed_class(se);
}

}  // namespace

std::optional<WitnessRecipe> witness(const AmbientSpec& amb,
                                     const SubgroupType& t) {
  check_theorem_range(amb);
  {
    // reuse the verdict tables without recursing through classify()
    if (!realizable(amb, t)) fail(ErrorKind::range, "not a subgroup");
    if (end_excluded(amb, t))
      fail(ErrorKind::verification, "type is not end-fixed");
  }
  const long m = amb.m;
  const std::size_t rank = amb.base_rank();
  const long s = t.abelian_rank.get_si();

  auto type1 = [&](BaseEndo phi, IntMatrix Q, IntMatrix P, FixSource src,
                   std::string provenance) {
    WitnessRecipe r{prodgrp::make_type1(amb, std::move(phi), std::move(Q),
                                        std::move(P)),
                    std::move(src), t, std::move(provenance)};
    return std::optional<WitnessRecipe>(std::move(r));
  };

  if (t.core == SubgroupType::Core::free_infinite) {
    // collapse all but s coordinates; send x1 into a surviving (free)
    // quotient direction, so the kernel has infinite index
    return type1(BaseEndo::identity_endo(rank), block_q(s, m, 2),
                 x1_column(rank, m, 0), FixSource::whole_group_marker(),
                 "identity base map, x1 exponent sum onto a free quotient "
                 "coordinate");
  }

  if (t.core == SubgroupType::Core::trivial) {
    if (amb.is_free()) {
      if (s <= m)
        return type1(signed_prefix(rank, 0), block_q(s, m, 2),
                     IntMatrix::zero(rank, m), FixSource::signed_marker(),
                     "all-inverting signed map, trivial fixed base part");
      // s == m + 1: <x1> x Z^m
      return type1(signed_prefix(rank, 1), IntMatrix::identity(m),
                   IntMatrix::zero(rank, m), FixSource::signed_marker(),
                   "signed map fixing x1 only");
    }
    if (s > m) return std::nullopt;  // needs Fix phi = Z, cited elsewhere
    // abelian image endomorphism: z = x1, l = e_m, Q = diag(I_s, 0)
    IntVec l(m);
    l[m - 1] = 1;
    WitnessRecipe r{prodgrp::make_type2(amb, Word::generator(1), l,
                                        IntVec(rank), block_q(s, m, s == m ? 1 : 0),
                                        IntMatrix::zero(rank, m)),
                    FixSource::whole_group_marker(), t,
                    "abelian-image map with prescribed solution lattice"};
    return r;
  }

  if (t.core == SubgroupType::Core::free_finite) {
    if (!amb.is_free()) return std::nullopt;  // needs a free Fix phi
    const Int& rank_t = t.param;
    const Int n = amb.n_or_g;
    if (rank_t <= n) {
      return type1(signed_prefix(rank, rank_t.get_si()), block_q(s, m, 2),
                   IntMatrix::zero(rank, m), FixSource::signed_marker(),
                   "signed map fixing a prefix of the basis");
    }
    // rank_t > n: exponent-sum index construction on Fix phi = <x1, x2>,
    // kernel of index rank_t - 1
    return type1(signed_prefix(rank, 2), block_q(s, m, rank_t),
                 x1_column(rank, m, s), FixSource::signed_marker(),
                 "signed map with x1-exponent index construction");
  }

  // surface core
  const Int genus = t.param;
  const Int g = amb.n_or_g;
  Int j = (genus - 1) / (g - 1);
  if (j == 1) {
    return type1(BaseEndo::identity_endo(rank), block_q(s, m, 2),
                 IntMatrix::zero(rank, m), FixSource::whole_group_marker(),
                 "identity base map");
  }
  return type1(BaseEndo::identity_endo(rank), block_q(s, m, 1 - j),
               x1_column(rank, m, s), FixSource::whole_group_marker(),
               "identity base map with x1-exponent index construction");
}

bool verify_witness(const AmbientSpec& amb, const WitnessRecipe& r) {
  FixReport rep = prodgrp::fix_any(amb, r.endo, r.fix_source);
  if (!(rep.type == r.expected)) return false;
  // Cross-check reports with explicit finite data against the exhaustive
  // oracle at small bounds.
  if (rep.p_part == FixReport::PPart::finite_basis || rep.from_type2) {
    const std::size_t len = amb.is_free() ? 4 : 3;
    const long box = amb.is_free() ? 2 : 1;
    for (const Word& u : prodgrp::all_reduced_words(amb.base_rank(), len)) {
      std::vector<IntVec> vectors{IntVec(amb.m)};
      for (int coord = 0; coord < amb.m; ++coord) {
        std::vector<IntVec> next;
        for (const IntVec& v : vectors)
          for (long val = -box; val <= box; ++val) {
            IntVec w = v;
            w[coord] = val;
            next.push_back(std::move(w));
          }
        vectors = std::move(next);
      }
      for (const IntVec& a : vectors) {
        ProdElement e{u, a};
        bool fixed = prodgrp::element_equal(
            amb, prodgrp::apply(amb, r.endo, e), e);
        if (fixed != rep.member(e)) return false;
      }
    }
  }
  return true;
}

CohopfCertificate cohopf_demo(const AmbientSpec& amb) {
  if (!amb.is_free() || amb.n_or_g < 2)
    fail(ErrorKind::range, "demo requires a free base of rank >= 2");
  if (amb.m != 1)
    fail(ErrorKind::range, "demo requires abelian rank m = 1");
  const std::size_t n = amb.base_rank();
  std::vector<Word> images;
  images.push_back(Word::generator(1));
  Word x1 = Word::generator(1), x2 = Word::generator(2);
  for (std::size_t j = 2; j <= n; ++j) {
    Word xj = Word::generator(static_cast<int>(j));
    images.push_back(x2 * x1 * xj * x1.inverse() * x2.inverse());
  }
  CohopfCertificate cert{
      prodgrp::make_type1(amb, BaseEndo::general(images),
                          IntMatrix::identity(1), IntMatrix::zero(n, 1)),
      0, true, false};
  freegrp::StallingsGraph g = freegrp::StallingsGraph::fold(images, n);
  cert.image_rank = g.rank();
  cert.x2_in_image = g.member(x2);
  cert.mono = cert.image_rank == n &&
              prodgrp::is_mono(amb, cert.endo) == prodgrp::Verdict::yes;
  return cert;
}

namespace {

IntMatrix random_matrix(std::mt19937_64& rng, std::size_t rows,
                        std::size_t cols, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  IntMatrix mtx(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) mtx.at(i, j) = dist(rng);
  return mtx;
}

IntMatrix random_unimodular(std::mt19937_64& rng, std::size_t n) {
  IntMatrix q = IntMatrix::identity(n);
  if (n == 0) return q;
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_int_distribution<int> op(0, 2);
  for (int step = 0; step < 8; ++step) {
    std::size_t i = pick(rng), j = pick(rng);
    switch (op(rng)) {
      case 0:
        if (i != j) {
          Int c = coef(rng);
          for (std::size_t k = 0; k < n; ++k) q.at(i, k) += c * q.at(j, k);
        }
        break;
      case 1:
        q.swap_rows(i, j);
        break;
      default:
        for (std::size_t k = 0; k < n; ++k) q.at(i, k) = -q.at(i, k);
        break;
    }
  }
  return q;
}

// Random free-group automorphism assembled from elementary Nielsen moves,
// with the inverse images tracked move by move, so invert() has a
// certificate to work with.
BaseEndo random_certified_auto(std::mt19937_64& rng, std::size_t rank) {
  freegrp::FreeHomo f = freegrp::FreeHomo::identity(rank);
  freegrp::FreeHomo g = freegrp::FreeHomo::identity(rank);
  if (rank >= 1) {
    std::uniform_int_distribution<int> pick(1, static_cast<int>(rank));
    std::uniform_int_distribution<int> op(0, 2);
    for (int step = 0; step < 4; ++step) {
      int i = pick(rng), j = pick(rng);
      freegrp::FreeHomo move = freegrp::FreeHomo::identity(rank);
      freegrp::FreeHomo back = freegrp::FreeHomo::identity(rank);
      switch (op(rng)) {
        case 0:
          std::swap(move.images[i - 1], move.images[j - 1]);
          std::swap(back.images[i - 1], back.images[j - 1]);
          break;
        case 1:
          move.images[i - 1] = Word::generator(i, -1);
          back.images[i - 1] = Word::generator(i, -1);
          break;
        default:
          if (i != j) {
            move.images[i - 1] = Word::generator(i) * Word::generator(j);
            back.images[i - 1] =
                Word::generator(i) * Word::generator(j, -1);
          }
          break;
      }
      f = freegrp::compose_homo(move, f);
      g = freegrp::compose_homo(g, back);
    }
  }
  return BaseEndo::general(f.images, g.images);
}

BaseEndo random_base_endo(std::mt19937_64& rng, const AmbientSpec& amb) {
  const std::size_t rank = amb.base_rank();
  std::uniform_int_distribution<int> coin(0, 9);
  if (amb.is_free()) {
    int roll = coin(rng);
    if (roll < 5) {
      freegrp::SignedClassEndo se;
      se.rank = rank;
      std::uniform_int_distribution<int> bit(0, 1);
      for (std::size_t i = 1; i <= rank; ++i)
        if (bit(rng)) se.fixed.insert(static_cast<int>(i));
      return BaseEndo::signed_class(se);
    }
    if (roll < 7) return random_certified_auto(rng, rank);
    // short random images; frequently non-injective
    std::uniform_int_distribution<int> len(0, 2);
    std::uniform_int_distribution<int> gen(1, static_cast<int>(rank));
    std::uniform_int_distribution<int> sign(0, 1);
    std::vector<Word> images;
    for (std::size_t i = 0; i < rank; ++i) {
      std::vector<freegrp::Letter> letters;
      int L = len(rng) + (roll < 9 ? 1 : 0);
      for (int k = 0; k < L; ++k)
        letters.push_back(sign(rng) ? gen(rng) : -gen(rng));
      images.push_back(Word::from_letters(letters));
    }
    return BaseEndo::general(std::move(images));
  }
  int roll = coin(rng);
  if (roll < 4) return BaseEndo::identity_endo(rank);
  if (roll < 8) {
    std::uniform_int_distribution<int> len(1, 3);
    std::uniform_int_distribution<int> gen(1, static_cast<int>(rank));
    std::uniform_int_distribution<int> sign(0, 1);
    std::vector<freegrp::Letter> letters;
    int L = len(rng);
    for (int k = 0; k < L; ++k)
      letters.push_back(sign(rng) ? gen(rng) : -gen(rng));
    return BaseEndo::inner(Word::from_letters(letters), rank);
  }
  // abelian-image assignment x_i -> x1^{c_i}: kills the relator outright
  std::uniform_int_distribution<int> c(-2, 2);
  std::vector<Word> images;
  for (std::size_t i = 0; i < rank; ++i)
    images.push_back(Word::generator(1).pow(c(rng)));
  return BaseEndo::general(std::move(images));
}

}  // namespace

HopfianReport hopfian_demo(const AmbientSpec& amb, int trials, unsigned seed,
                           bool constrain_epi) {
  std::mt19937_64 rng(seed);
  HopfianReport report;
  report.trials = trials;
  const std::size_t rank = amb.base_rank();
  for (int trial = 0; trial < trials; ++trial) {
    BaseEndo phi = constrain_epi && amb.is_free()
                       ? signed_prefix(rank, rank)
                       : random_base_endo(rng, amb);
    if (constrain_epi && !amb.is_free())
      phi = BaseEndo::identity_endo(rank);
    IntMatrix q = constrain_epi ? random_unimodular(rng, amb.m)
                                : random_matrix(rng, amb.m, amb.m, -2, 2);
    IntMatrix p = random_matrix(rng, rank, amb.m, -2, 2);
    Endomorphism psi = prodgrp::make_type1(amb, phi, q, p);
    if (prodgrp::is_epi(amb, psi) != prodgrp::Verdict::yes) continue;
    ++report.epi_count;
    if (prodgrp::is_mono(amb, psi) != prodgrp::Verdict::yes) {
      ++report.mono_violations;
      continue;
    }
    std::optional<Endomorphism> maybe_inv;
    try {
      maybe_inv = prodgrp::invert(amb, psi);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::missing_data) throw;
      // an accidental surjection with no inverse certificate
      ++report.roundtrip_skipped;
      continue;
    }
    Endomorphism inv = *maybe_inv;
    Endomorphism left = prodgrp::compose(amb, inv, psi);
    Endomorphism right = prodgrp::compose(amb, psi, inv);
    bool ok = true;
    for (std::size_t i = 1; i <= rank && ok; ++i) {
      ProdElement e{Word::generator(static_cast<int>(i)), IntVec(amb.m)};
      ok = prodgrp::element_equal(amb, prodgrp::apply(amb, left, e), e) &&
           prodgrp::element_equal(amb, prodgrp::apply(amb, right, e), e);
    }
    for (int j = 0; j < amb.m && ok; ++j) {
      ProdElement e{Word(), IntVec(amb.m)};
      e.a[j] = 1;
      ok = prodgrp::element_equal(amb, prodgrp::apply(amb, left, e), e) &&
           prodgrp::element_equal(amb, prodgrp::apply(amb, right, e), e);
    }
    if (!ok) ++report.roundtrip_failures;
  }
  return report;
}

}  // namespace fixcalc::classify
