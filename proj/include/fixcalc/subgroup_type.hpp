#pragma once

#include <optional>
#include <string>

#include "fixcalc/intlin.hpp"

namespace fixcalc {

using intlin::Int;

/// Symbolic isomorphism type of a subgroup: (core) x Z^s where the core is
/// trivial, free of finite rank, free of countable rank, or a closed
/// surface group. Values are kept canonical: F_0 is the trivial group and
/// F_1 x Z^s = Z^(s+1), so those fold into the abelian rank.
struct SubgroupType {
  enum class Core { trivial, free_finite, free_infinite, surface };

  Core core = Core::trivial;
  Int param = 0;         // free rank t >= 2, or genus k >= 2
  Int abelian_rank = 0;  // s >= 0

  static SubgroupType trivial_group() { return {}; }
  static SubgroupType abelian(Int s);
  static SubgroupType free_group(Int t, Int s = 0);
  static SubgroupType free_infinite(Int s = 0);
  static SubgroupType surface_group(Int genus, Int s = 0);

  bool is_abelian() const { return core == Core::trivial; }

  std::string str() const;
  static std::optional<SubgroupType> parse(const std::string& text);

  friend bool operator==(const SubgroupType& a, const SubgroupType& b) {
    return a.core == b.core && a.param == b.param &&
           a.abelian_rank == b.abelian_rank;
  }
  friend bool operator<(const SubgroupType& a, const SubgroupType& b);
};

}  // namespace fixcalc
