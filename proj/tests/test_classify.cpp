#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixcalc/classify.hpp"

using namespace fixcalc;
using classify::CohopfCertificate;
using classify::EnumBounds;
using classify::HopfianReport;
using classify::Verdict;
using classify::WitnessRecipe;
using classify::cohopf_demo;
using classify::enumerate_types;
using classify::hopfian_demo;
using classify::verify_witness;
using classify::witness;
using prodgrp::AmbientSpec;
using intlin::Int;

TEST_CASE("classify: headline examples") {
  // F5 x Z^2 inside F3 x Z^2: excluded entirely (t > n at s = m)
  {
    Verdict v = classify::classify(AmbientSpec::free_ambient(3, 2),
                         SubgroupType::free_group(5, 2));
    CHECK(!v.aut_fixed);
    CHECK(!v.end_fixed);
    CHECK(v.witness_available == Verdict::Witness::no);
  }
  // F4 inside F2 x Z: end-fixed but not aut-fixed (even rank above n)
  {
    Verdict v = classify::classify(AmbientSpec::free_ambient(2, 1),
                         SubgroupType::free_group(4, 0));
    CHECK(!v.aut_fixed);
    CHECK(v.end_fixed);
    CHECK(v.witness_available == Verdict::Witness::yes);
  }
  // Surface4 inside Surface2 x Z: end-fixed but not aut-fixed
  {
    Verdict v = classify::classify(AmbientSpec::surface_ambient(2, 1),
                         SubgroupType::surface_group(4, 0));
    CHECK(!v.aut_fixed);
    CHECK(v.end_fixed);
    CHECK(v.witness_available == Verdict::Witness::yes);
  }
  // Surface3 = Surface(2g-1) inside Surface2 x Z: aut-fixed
  {
    Verdict v = classify::classify(AmbientSpec::surface_ambient(2, 1),
                         SubgroupType::surface_group(3, 0));
    CHECK(v.aut_fixed);
    CHECK(v.end_fixed);
  }
  // the whole group is always aut-fixed
  {
    Verdict v = classify::classify(AmbientSpec::free_ambient(3, 2),
                         SubgroupType::free_group(3, 2));
    CHECK(v.aut_fixed);
    CHECK(v.end_fixed);
    CHECK(v.witness_available == Verdict::Witness::yes);
  }
  // F_aleph0 with no abelian factor is never a fixed subgroup
  {
    Verdict v = classify::classify(AmbientSpec::free_ambient(3, 2),
                         SubgroupType::free_infinite(0));
    CHECK(!v.end_fixed);
  }
}

TEST_CASE("classify: verdict line format") {
  Verdict v = classify::classify(AmbientSpec::free_ambient(2, 1),
                       SubgroupType::free_group(4, 0));
  CHECK(v.str(SubgroupType::free_group(4, 0)) ==
        "type=F4 aut=n end=y witness=y");
}

TEST_CASE("classify: range and subgroup errors") {
  CHECK_THROWS_AS(classify::classify(AmbientSpec::free_ambient(1, 1),
                           SubgroupType::abelian(1)),
                  Error);
  CHECK_THROWS_AS(classify::classify(AmbientSpec::free_ambient(2, 0),
                           SubgroupType::abelian(0)),
                  Error);
  // surface types are not subgroups of a free ambient
  CHECK_THROWS_AS(classify::classify(AmbientSpec::free_ambient(2, 1),
                           SubgroupType::surface_group(2, 0)),
                  Error);
  // genus must be 1 mod (g-1)
  CHECK_THROWS_AS(classify::classify(AmbientSpec::surface_ambient(3, 1),
                           SubgroupType::surface_group(4, 0)),
                  Error);
  // abelian factor too large
  CHECK_THROWS_AS(classify::classify(AmbientSpec::free_ambient(2, 1),
                           SubgroupType::free_group(2, 2)),
                  Error);
}

TEST_CASE("enumerate_types shapes") {
  // free ambient with rank bound 2 and the infinite family
  {
    auto types = enumerate_types(AmbientSpec::free_ambient(2, 1),
                                 {2, 6, 64}, true);
    std::set<SubgroupType> got(types.begin(), types.end());
    std::set<SubgroupType> expect{
        SubgroupType::abelian(0),       SubgroupType::abelian(1),
        SubgroupType::abelian(2),       SubgroupType::free_group(2, 0),
        SubgroupType::free_group(2, 1), SubgroupType::free_infinite(0),
        SubgroupType::free_infinite(1)};
    CHECK(got == expect);
    CHECK(types.size() == expect.size());  // no duplicates
  }
  // surface ambient: only genera 1 mod (g-1) appear
  {
    auto types = enumerate_types(AmbientSpec::surface_ambient(2, 1),
                                 {0, 3, 64}, false);
    std::set<SubgroupType> got(types.begin(), types.end());
    std::set<SubgroupType> expect{
        SubgroupType::abelian(0),
        SubgroupType::abelian(1),
        SubgroupType::abelian(2),
        SubgroupType::surface_group(2, 0),
        SubgroupType::surface_group(2, 1),
        SubgroupType::surface_group(3, 0),
        SubgroupType::surface_group(3, 1)};
    CHECK(got == expect);
  }
  // zero bounds leave only the abelian tower
  {
    auto types = enumerate_types(AmbientSpec::free_ambient(2, 2),
                                 {0, 0, 64}, false);
    for (const auto& t : types)
      CHECK(t.core == SubgroupType::Core::trivial);
    CHECK(types.size() == 4);  // Z^0 .. Z^3
  }
}

TEST_CASE("witness: the spec instances round-trip through fix") {
  // F3 in F2 x Z: signed map fixing x1, x2 with Q = (3), P = e1
  {
    AmbientSpec amb = AmbientSpec::free_ambient(2, 1);
    auto r = witness(amb, SubgroupType::free_group(3, 0));
    REQUIRE(r.has_value());
    REQUIRE(r->endo.is_type1());
    CHECK(r->endo.type1().Q.at(0, 0) == 3);
    CHECK(verify_witness(amb, *r));
  }
  // Surface4 in Surface2 x Z: identity with Q = (-2), P = e1
  {
    AmbientSpec amb = AmbientSpec::surface_ambient(2, 1);
    auto r = witness(amb, SubgroupType::surface_group(4, 0));
    REQUIRE(r.has_value());
    CHECK(r->endo.type1().Q.at(0, 0) == -2);
    CHECK(verify_witness(amb, *r));
  }
  // F_aleph0 x Z^2 in F3 x Z^2: identity with Q = I, P = e1
  {
    AmbientSpec amb = AmbientSpec::free_ambient(3, 2);
    auto r = witness(amb, SubgroupType::free_infinite(2));
    REQUIRE(r.has_value());
    CHECK(r->endo.type1().Q.is_identity());
    CHECK(verify_witness(amb, *r));
  }
}

TEST_CASE("witness: tampering is caught by verify_witness") {
  AmbientSpec amb = AmbientSpec::free_ambient(2, 1);
  auto r = witness(amb, SubgroupType::free_group(3, 0));
  REQUIRE(r.has_value());
  // bump Q from (3) to (4): the index becomes 3 and the rank 4
  WitnessRecipe tampered = *r;
  prodgrp::EndoType1 t = tampered.endo.type1();
  t.Q.at(0, 0) = 4;
  tampered.endo = prodgrp::make_type1(amb, t.phi, t.Q, t.P);
  CHECK(!verify_witness(amb, tampered));
  prodgrp::FixReport rep =
      prodgrp::fix(amb, tampered.endo.type1(), tampered.fix_source);
  CHECK(rep.type == SubgroupType::free_group(4, 0));
}

TEST_CASE("witness: identity recipe realizes the whole group") {
  AmbientSpec amb = AmbientSpec::free_ambient(2, 2);
  auto r = witness(amb, SubgroupType::free_group(2, 2));
  REQUIRE(r.has_value());
  CHECK(verify_witness(amb, *r));
}

TEST_CASE("witness: errors and cited-elsewhere cases") {
  // not end-fixed: error
  CHECK_THROWS_AS(witness(AmbientSpec::free_ambient(2, 1),
                          SubgroupType::free_infinite(0)),
                  Error);
  // free types in a surface ambient need the cited construction
  CHECK(!witness(AmbientSpec::surface_ambient(2, 1),
                 SubgroupType::free_group(4, 0))
             .has_value());
  // abelian tower above m in a surface ambient likewise
  CHECK(!witness(AmbientSpec::surface_ambient(2, 1),
                 SubgroupType::abelian(2))
             .has_value());
  CHECK(classify::classify(AmbientSpec::surface_ambient(2, 1),
                 SubgroupType::free_group(4, 0))
            .witness_available == Verdict::Witness::cited_elsewhere);
}

TEST_CASE("witness soundness across the enumerated end-fixed types") {
  for (const AmbientSpec& amb :
       {AmbientSpec::free_ambient(2, 1), AmbientSpec::free_ambient(3, 2),
        AmbientSpec::surface_ambient(2, 1),
        AmbientSpec::surface_ambient(2, 2)}) {
    EnumBounds bounds{amb.is_free() ? 5 : 3, 4, 64};
    for (const SubgroupType& t : enumerate_types(amb, bounds, true)) {
      Verdict v = classify::classify(amb, t);
      if (!v.end_fixed) continue;
      auto r = witness(amb, t);
      if (!r) {
        CHECK(v.witness_available == Verdict::Witness::cited_elsewhere);
        continue;
      }
      CHECK(v.witness_available == Verdict::Witness::yes);
      CHECK(r->expected == t);
      CHECK(verify_witness(amb, *r));
    }
  }
}

TEST_CASE("table coherence: aut equals end for m >= 2") {
  for (const AmbientSpec& amb : {AmbientSpec::free_ambient(2, 2),
                                 AmbientSpec::free_ambient(4, 3),
                                 AmbientSpec::surface_ambient(2, 2),
                                 AmbientSpec::surface_ambient(3, 2)}) {
    for (const SubgroupType& t : enumerate_types(amb, {8, 9, 64}, true)) {
      Verdict v = classify::classify(amb, t);
      CHECK(v.aut_fixed == v.end_fixed);
    }
  }
}

TEST_CASE("complement law for F_n x Z^m (n, m >= 2)") {
  for (int n : {2, 3, 4}) {
    AmbientSpec amb = AmbientSpec::free_ambient(n, 2);
    for (const SubgroupType& t : enumerate_types(amb, {8, 9, 64}, true)) {
      Verdict v = classify::classify(amb, t);
      bool excluded =
          (t.core == SubgroupType::Core::free_infinite &&
           t.abelian_rank == 0) ||
          (t.core == SubgroupType::Core::free_finite &&
           t.abelian_rank == 2 && t.param > n);
      CHECK(v.end_fixed == !excluded);
    }
  }
}

TEST_CASE("difference sets for m = 1 match the corollaries") {
  // free: end-only types are F_2k (2k > n) and F_t (t > 2n)
  for (int n : {2, 3, 4}) {
    AmbientSpec amb = AmbientSpec::free_ambient(n, 1);
    for (const SubgroupType& t : enumerate_types(amb, {2 * n + 4, 9, 64},
                                                 true)) {
      Verdict v = classify::classify(amb, t);
      bool expect_diff =
          t.core == SubgroupType::Core::free_finite &&
          t.abelian_rank == 0 &&
          ((t.param % 2 == 0 && t.param > n) || t.param > 2 * n);
      CHECK((v.end_fixed && !v.aut_fixed) == expect_diff);
    }
  }
  // surface: F_2n (n >= g), F_t (t >= 4g-1), Surface(k) (2g-1 != k > g)
  for (int g : {2, 3}) {
    AmbientSpec amb = AmbientSpec::surface_ambient(g, 1);
    for (const SubgroupType& t : enumerate_types(amb, {4 * g + 4, 4 * g, 64},
                                                 true)) {
      Verdict v = classify::classify(amb, t);
      bool expect_diff = false;
      if (t.abelian_rank == 0 && t.core == SubgroupType::Core::free_finite)
        expect_diff = (t.param % 2 == 0 && t.param >= 2 * g) ||
                      t.param >= 4 * g - 1;
      if (t.abelian_rank == 0 && t.core == SubgroupType::Core::surface)
        expect_diff = t.param > g && t.param != 2 * g - 1;
      CHECK((v.end_fixed && !v.aut_fixed) == expect_diff);
    }
  }
}

TEST_CASE("cohopf demo: proper self-embedding for n = 2..5") {
  for (int n = 2; n <= 5; ++n) {
    AmbientSpec amb = AmbientSpec::free_ambient(n, 1);
    CohopfCertificate cert = cohopf_demo(amb);
    CHECK(cert.image_rank == static_cast<std::size_t>(n));
    CHECK(!cert.x2_in_image);
    CHECK(cert.mono);
    CHECK(cert.proper());
    // composing the embedding with itself stays injective
    prodgrp::Endomorphism twice =
        prodgrp::compose(amb, cert.endo, cert.endo);
    CHECK(prodgrp::is_mono(amb, twice) == prodgrp::Verdict::yes);
  }
  CHECK_THROWS_AS(cohopf_demo(AmbientSpec::free_ambient(1, 1)), Error);
  CHECK_THROWS_AS(cohopf_demo(AmbientSpec::surface_ambient(2, 1)), Error);
  CHECK_THROWS_AS(cohopf_demo(AmbientSpec::free_ambient(2, 2)), Error);
}

TEST_CASE("cohopf demo: the n = 2 image is the documented subgroup") {
  CohopfCertificate cert = cohopf_demo(AmbientSpec::free_ambient(2, 1));
  const auto& images = cert.endo.type1().phi.images;
  REQUIRE(images.size() == 2);
  CHECK(images[0] == freegrp::Word::generator(1));
  CHECK(images[1] ==
        freegrp::Word::from_letters({2, 1, 2, -1, -2}));
}

TEST_CASE("hopfian demo: no epi-but-not-mono instances") {
  for (const AmbientSpec& amb : {AmbientSpec::free_ambient(2, 2),
                                 AmbientSpec::surface_ambient(2, 1)}) {
    HopfianReport rep = hopfian_demo(amb, 60, 424242);
    CHECK(rep.trials == 60);
    CHECK(rep.mono_violations == 0);
    CHECK(rep.roundtrip_failures == 0);
  }
  // constrained generator: everything sampled is an automorphism
  HopfianReport all_epi =
      hopfian_demo(AmbientSpec::free_ambient(2, 2), 40, 7, true);
  CHECK(all_epi.epi_count == 40);
  CHECK(all_epi.mono_violations == 0);
  CHECK(all_epi.roundtrip_failures == 0);
  // zero trials: empty report
  HopfianReport empty = hopfian_demo(AmbientSpec::free_ambient(2, 2), 0, 1);
  CHECK(empty.trials == 0);
  CHECK(empty.epi_count == 0);
}

TEST_CASE("hopfian demo is deterministic for a fixed seed") {
  AmbientSpec amb = AmbientSpec::free_ambient(2, 2);
  HopfianReport a = hopfian_demo(amb, 30, 99);
  HopfianReport b = hopfian_demo(amb, 30, 99);
  CHECK(a.epi_count == b.epi_count);
}
