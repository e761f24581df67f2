#include "fixcalc/surfgrp.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace fixcalc::surfgrp {

using freegrp::Letter;

SurfaceGroupSpec::SurfaceGroupSpec(int genus) : genus_(genus) {
  if (genus < 2) fail(ErrorKind::range, "not hyperbolic presentation");
  std::vector<Letter> letters;
  for (int i = 0; i < genus; ++i) {
    int a = 2 * i + 1, b = 2 * i + 2;
    letters.insert(letters.end(), {a, b, -a, -b});
  }
  relator_ = Word::from_letters(letters);
}

namespace {

// All cyclic rotations of R and R^-1; every subword of a cyclic conjugate is
// a prefix of one of these.
std::vector<std::vector<Letter>> relator_rotations(const SurfaceGroupSpec& s) {
  std::vector<std::vector<Letter>> rots;
  for (const Word& base : {s.relator(), s.relator().inverse()}) {
    std::vector<Letter> l = base.letters();
    for (std::size_t r = 0; r < l.size(); ++r) {
      std::vector<Letter> rot(l.begin() + r, l.end());
      rot.insert(rot.end(), l.begin(), l.begin() + r);
      rots.push_back(std::move(rot));
    }
  }
  return rots;
}

}  // namespace

bool is_trivial(const SurfaceGroupSpec& spec, const Word& w) {
  const std::size_t relator_len = 4 * static_cast<std::size_t>(spec.genus());
  const std::size_t threshold = 2 * static_cast<std::size_t>(spec.genus()) + 1;
  const auto rotations = relator_rotations(spec);

  std::vector<Letter> cur = w.letters();
  for (;;) {
    if (cur.empty()) return true;
    // leftmost position, then longest match of length >= threshold
    std::size_t best_pos = 0, best_len = 0;
    const std::vector<Letter>* best_rot = nullptr;
    for (std::size_t pos = 0; pos < cur.size() && !best_rot; ++pos) {
      for (const auto& rot : rotations) {
        std::size_t len = 0;
        while (len < relator_len && pos + len < cur.size() &&
               cur[pos + len] == rot[len])
          ++len;
        if (len >= threshold && len > best_len) {
          best_len = len;
          best_pos = pos;
          best_rot = &rot;
        }
      }
    }
    if (!best_rot) return false;
    // p q = rotation with our subword p, so p = q^-1 in the group.
    std::vector<Letter> next(cur.begin(), cur.begin() + best_pos);
    for (std::size_t i = relator_len; i-- > best_len;)
      next.push_back(-(*best_rot)[i]);
    next.insert(next.end(), cur.begin() + best_pos + best_len, cur.end());
    cur = freegrp::reduce(std::move(next)).letters();
  }
}

bool equal(const SurfaceGroupSpec& spec, const Word& a, const Word& b) {
  if (a == b) return true;
  return is_trivial(spec, a * b.inverse());
}

IntVec abelianize_surface(const SurfaceGroupSpec& spec, const Word& w) {
  return freegrp::abelianize(w, spec.alphabet_rank());
}

bool validate_endo(const SurfaceGroupSpec& spec,
                   const std::vector<Word>& images) {
  if (images.size() != spec.alphabet_rank())
    fail(ErrorKind::dimension, "one image per generator required");
  freegrp::FreeHomo f;
  f.source_rank = f.target_rank = spec.alphabet_rank();
  f.images = images;
  return is_trivial(spec, freegrp::apply_homo(f, spec.relator()));
}

intlin::IntMatrix SurfacePresentation::relation_matrix() const {
  intlin::IntMatrix m(relators.size(), generator_count);
  for (std::size_t i = 0; i < relators.size(); ++i) {
    IntVec row = freegrp::abelianize(relators[i], generator_count);
    for (std::size_t j = 0; j < generator_count; ++j) m.at(i, j) = row[j];
  }
  return m;
}

SurfacePresentation reidemeister_schreier(const SurfaceGroupSpec& spec,
                                          const std::vector<Int>& moduli,
                                          const std::vector<IntVec>& images) {
  const std::size_t k = spec.alphabet_rank();
  if (images.size() != k)
    fail(ErrorKind::dimension, "one image per generator required");
  for (const IntVec& img : images)
    if (img.size() != moduli.size())
      fail(ErrorKind::dimension, "image length must match moduli");
  for (const Int& m : moduli)
    if (m < 1) fail(ErrorKind::range, "moduli must be positive");

  // Coset exploration over the image subgroup of A; same breadth-first
  // tree convention as the free-group kernel machinery.
  auto normalize = [&](IntVec v) {
    for (std::size_t j = 0; j < moduli.size(); ++j)
      mpz_fdiv_r(v[j].get_mpz_t(), v[j].get_mpz_t(), moduli[j].get_mpz_t());
    return v;
  };
  std::map<IntVec, std::size_t> state_id;
  std::vector<IntVec> states;
  states.push_back(normalize(IntVec(moduli.size())));
  state_id.emplace(states[0], 0);
  std::vector<std::vector<bool>> tree_pos;
  tree_pos.emplace_back(std::vector<bool>(k, false));
  for (std::size_t head = 0; head < states.size(); ++head) {
    std::vector<Letter> order;
    for (std::size_t i = 1; i <= k; ++i) order.push_back(static_cast<int>(i));
    for (std::size_t i = 1; i <= k; ++i) order.push_back(-static_cast<int>(i));
    for (Letter l : order) {
      std::size_t i = static_cast<std::size_t>(std::abs(l)) - 1;
      IntVec nxt = states[head];
      for (std::size_t j = 0; j < moduli.size(); ++j)
        nxt[j] += (l > 0 ? images[i][j] : -images[i][j]);
      nxt = normalize(std::move(nxt));
      auto [it, fresh] = state_id.try_emplace(nxt, states.size());
      if (fresh) {
        states.push_back(nxt);
        tree_pos.emplace_back(std::vector<bool>(k, false));
        if (l > 0)
          tree_pos[head][i] = true;
        else
          tree_pos[it->second][i] = true;
        if (states.size() > 8)
          fail(ErrorKind::range, "index beyond desk scale");
      }
    }
  }
  const std::size_t d = states.size();

  // Number the non-tree positive edges: these are the subgroup generators.
  std::map<std::pair<std::size_t, std::size_t>, int> gen_id;
  int next_gen = 1;
  for (std::size_t s = 0; s < d; ++s)
    for (std::size_t i = 0; i < k; ++i)
      if (!tree_pos[s][i]) gen_id[{s, i}] = next_gen++;

  auto walk_target = [&](std::size_t s, std::size_t i, bool forward) {
    IntVec nxt = states[s];
    for (std::size_t j = 0; j < moduli.size(); ++j)
      nxt[j] += (forward ? images[i][j] : -images[i][j]);
    return state_id.at(normalize(std::move(nxt)));
  };

  // Reidemeister rewriting of T(s) R T(s)^-1: walk R from coset s, emitting
  // the generator of every non-tree edge crossed.
  SurfacePresentation pres;
  pres.generator_count = static_cast<std::size_t>(next_gen - 1);
  for (std::size_t s = 0; s < d; ++s) {
    std::vector<Letter> rewritten;
    std::size_t c = s;
    for (Letter l : spec.relator().letters()) {
      std::size_t i = static_cast<std::size_t>(std::abs(l)) - 1;
      if (l > 0) {
        if (!tree_pos[c][i]) rewritten.push_back(gen_id.at({c, i}));
        c = walk_target(c, i, true);
      } else {
        std::size_t from = walk_target(c, i, false);
        if (!tree_pos[from][i]) rewritten.push_back(-gen_id.at({from, i}));
        c = from;
      }
    }
    pres.relators.push_back(Word::from_letters(rewritten));
  }
  return pres;
}

Int genus_of_index(int genus, const Int& d) {
  return d * (genus - 1) + 1;
}

SubgroupType subgroup_type_from_index(int genus, const Int& d) {
  if (genus < 2) fail(ErrorKind::range, "not hyperbolic presentation");
  if (d < 1) fail(ErrorKind::range, "index must be positive");
  return SubgroupType::surface_group(genus_of_index(genus, d), 0);
}

}  // namespace fixcalc::surfgrp
