#include "fixcalc/freegrp.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

namespace fixcalc::freegrp {

Word reduce(std::vector<Letter> raw) {
  std::vector<Letter> stack;
  stack.reserve(raw.size());
  for (Letter l : raw) {
    if (l == 0) fail(ErrorKind::range, "letter 0 is not a generator");
    if (!stack.empty() && stack.back() == -l)
      stack.pop_back();
    else
      stack.push_back(l);
  }
  Word w;
  w.letters_ = std::move(stack);
  return w;
}

Word Word::from_letters(const std::vector<Letter>& raw) { return reduce(raw); }

Word Word::generator(int g, int sign) {
  if (g <= 0) fail(ErrorKind::range, "generator index must be positive");
  return reduce({sign >= 0 ? g : -g});
}

int Word::max_generator() const {
  int m = 0;
  for (Letter l : letters_) m = std::max(m, std::abs(l));
  return m;
}

Word Word::inverse() const {
  std::vector<Letter> rev(letters_.rbegin(), letters_.rend());
  for (Letter& l : rev) l = -l;
  Word w;
  w.letters_ = std::move(rev);  // reversal of a reduced word stays reduced
  return w;
}

Word operator*(const Word& a, const Word& b) {
  std::vector<Letter> cat = a.letters_;
  cat.insert(cat.end(), b.letters_.begin(), b.letters_.end());
  return reduce(std::move(cat));
}

Word Word::pow(long e) const {
  Word base = e >= 0 ? *this : inverse();
  long k = e >= 0 ? e : -e;
  Word acc;
  for (long i = 0; i < k; ++i) acc = acc * base;
  return acc;
}

std::string Word::str() const {
  if (letters_.empty()) return "1";
  std::ostringstream os;
  for (Letter l : letters_) {
    os << 'x' << std::abs(l);
    if (l < 0) os << "^-1";
  }
  return os.str();
}

IntVec abelianize(const Word& w, std::size_t n) {
  IntVec v(n);
  for (Letter l : w.letters()) {
    std::size_t g = static_cast<std::size_t>(std::abs(l));
    if (g > n) fail(ErrorKind::range, "generator index out of range");
    v[g - 1] += (l > 0 ? 1 : -1);
  }
  return v;
}

Int exponent_sum(const Word& w, int generator) {
  Int s = 0;
  for (Letter l : w.letters()) {
    if (l == generator) ++s;
    if (l == -generator) --s;
  }
  return s;
}

FreeHomo FreeHomo::identity(std::size_t n) {
  FreeHomo f;
  f.source_rank = f.target_rank = n;
  for (std::size_t i = 1; i <= n; ++i)
    f.images.push_back(Word::generator(static_cast<int>(i)));
  return f;
}

Word apply_homo(const FreeHomo& f, const Word& w) {
  if (f.images.size() != f.source_rank)
    fail(ErrorKind::dimension, "homomorphism image list incomplete");
  std::vector<Letter> out;
  for (Letter l : w.letters()) {
    std::size_t g = static_cast<std::size_t>(std::abs(l));
    if (g > f.source_rank)
      fail(ErrorKind::range, "generator index out of range");
    const Word& img = l > 0 ? f.images[g - 1] : f.images[g - 1].inverse();
    out.insert(out.end(), img.letters().begin(), img.letters().end());
  }
  return reduce(std::move(out));
}

FreeHomo compose_homo(const FreeHomo& outer, const FreeHomo& inner) {
  if (inner.target_rank != outer.source_rank)
    fail(ErrorKind::dimension, "homomorphism ranks do not compose");
  FreeHomo f;
  f.source_rank = inner.source_rank;
  f.target_rank = outer.target_rank;
  for (const Word& w : inner.images) f.images.push_back(apply_homo(outer, w));
  return f;
}

intlin::IntMatrix abelianization_matrix(const std::vector<Word>& images,
                                        std::size_t source_rank,
                                        std::size_t target_rank) {
  if (images.size() != source_rank)
    fail(ErrorKind::dimension, "image list size mismatch");
  intlin::IntMatrix m(source_rank, target_rank);
  for (std::size_t i = 0; i < source_rank; ++i) {
    IntVec row = abelianize(images[i], target_rank);
    for (std::size_t j = 0; j < target_rank; ++j) m.at(i, j) = row[j];
  }
  return m;
}

namespace {

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

StallingsGraph StallingsGraph::fold(const std::vector<Word>& generators,
                                    std::size_t alphabet_rank) {
  // Wedge of loops at vertex 0, one loop per generator word.
  struct Edge {
    std::size_t u, v;
    std::size_t g;  // 1..n
  };
  std::vector<Edge> edges;
  std::size_t next_vertex = 1;
  for (const Word& w : generators) {
    if (static_cast<std::size_t>(w.max_generator()) > alphabet_rank)
      fail(ErrorKind::range, "generator index out of range");
    if (w.empty()) continue;
    std::size_t cur = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      Letter l = w.letters()[i];
      std::size_t nxt = (i + 1 == w.size()) ? 0 : next_vertex++;
      if (l > 0)
        edges.push_back({cur, nxt, static_cast<std::size_t>(l)});
      else
        edges.push_back({nxt, cur, static_cast<std::size_t>(-l)});
      cur = nxt;
    }
  }

  Dsu dsu(next_vertex);
  // Identify endpoints until no vertex carries two equal-label edges in the
  // same direction. Rescan from scratch after every merge; fine at this
  // scale.
  for (bool changed = true; changed;) {
    changed = false;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> out_seen,
        in_seen;
    for (const Edge& e : edges) {
      std::size_t u = dsu.find(e.u), v = dsu.find(e.v);
      auto [it_out, fresh_out] = out_seen.try_emplace({u, e.g}, v);
      if (!fresh_out && it_out->second != v) {
        dsu.unite(it_out->second, v);
        changed = true;
        break;
      }
      auto [it_in, fresh_in] = in_seen.try_emplace({v, e.g}, u);
      if (!fresh_in && it_in->second != u) {
        dsu.unite(it_in->second, u);
        changed = true;
        break;
      }
    }
  }

  // Renumber the surviving classes; base class first.
  std::map<std::size_t, std::size_t> id;
  auto vid = [&](std::size_t raw) {
    std::size_t root = dsu.find(raw);
    auto it = id.find(root);
    if (it != id.end()) return it->second;
    std::size_t fresh = id.size();
    id.emplace(root, fresh);
    return fresh;
  };
  StallingsGraph g;
  g.rank_n_ = alphabet_rank;
  g.base_ = vid(0);
  std::size_t nv = 1;
  for (const Edge& e : edges) {
    nv = std::max({nv, vid(e.u) + 1, vid(e.v) + 1});
  }
  g.out_.assign(nv, std::vector<std::size_t>(alphabet_rank, npos));
  g.in_.assign(nv, std::vector<std::size_t>(alphabet_rank, npos));
  for (const Edge& e : edges) {
    std::size_t u = vid(e.u), v = vid(e.v);
    g.out_[u][e.g - 1] = v;
    g.in_[v][e.g - 1] = u;
  }
  g.trim();
  return g;
}

void StallingsGraph::trim() {
  // Drop hanging trees; the spur carrying the base stays.
  const std::size_t n = rank_n_;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t v = 0; v < out_.size(); ++v) {
      if (v == base_) continue;
      std::size_t deg = 0;
      for (std::size_t gi = 0; gi < n; ++gi) {
        if (out_[v][gi] != npos) ++deg;
        if (in_[v][gi] != npos) ++deg;
      }
      if (deg > 1) continue;
      // detach v
      for (std::size_t gi = 0; gi < n; ++gi) {
        if (out_[v][gi] != npos) in_[out_[v][gi]][gi] = npos;
        if (in_[v][gi] != npos) out_[in_[v][gi]][gi] = npos;
        out_[v][gi] = in_[v][gi] = npos;
      }
      changed = true;
    }
  }
  // Compact away isolated non-base vertices.
  std::vector<std::size_t> remap(out_.size(), npos);
  std::size_t next = 0;
  for (std::size_t v = 0; v < out_.size(); ++v) {
    bool used = v == base_;
    for (std::size_t gi = 0; gi < n && !used; ++gi)
      used = out_[v][gi] != npos || in_[v][gi] != npos;
    if (used) remap[v] = next++;
  }
  std::vector<std::vector<std::size_t>> nout(next,
                                             std::vector<std::size_t>(n, npos)),
      nin(next, std::vector<std::size_t>(n, npos));
  for (std::size_t v = 0; v < out_.size(); ++v) {
    if (remap[v] == npos) continue;
    for (std::size_t gi = 0; gi < n; ++gi) {
      if (out_[v][gi] != npos) nout[remap[v]][gi] = remap[out_[v][gi]];
      if (in_[v][gi] != npos) nin[remap[v]][gi] = remap[in_[v][gi]];
    }
  }
  base_ = remap[base_];
  out_ = std::move(nout);
  in_ = std::move(nin);
}

std::size_t StallingsGraph::edge_count() const {
  std::size_t e = 0;
  for (const auto& row : out_)
    for (std::size_t t : row)
      if (t != npos) ++e;
  return e;
}

std::size_t StallingsGraph::step(std::size_t v, Letter l) const {
  std::size_t g = static_cast<std::size_t>(std::abs(l));
  if (g == 0 || g > rank_n_)
    fail(ErrorKind::range, "generator index out of range");
  return l > 0 ? out_[v][g - 1] : in_[v][g - 1];
}

bool StallingsGraph::member(const Word& w) const {
  std::size_t v = base_;
  for (Letter l : w.letters()) {
    v = step(v, l);
    if (v == npos) return false;
  }
  return v == base_;
}

std::size_t StallingsGraph::rank() const {
  return edge_count() - vertex_count() + 1;
}

std::optional<std::size_t> StallingsGraph::index() const {
  for (std::size_t v = 0; v < out_.size(); ++v)
    for (std::size_t gi = 0; gi < rank_n_; ++gi)
      if (out_[v][gi] == npos || in_[v][gi] == npos) return std::nullopt;
  return vertex_count();
}

std::vector<Word> StallingsGraph::basis() const {
  // BFS spanning tree from the base; every non-tree edge contributes
  // T(u) g T(head)^-1.
  std::vector<std::vector<Letter>> path(vertex_count());
  std::vector<bool> seen(vertex_count(), false);
  // tree_edge[(v, g-1)] true when the g-edge leaving v lies on the tree
  std::vector<std::vector<bool>> tree(vertex_count(),
                                      std::vector<bool>(rank_n_, false));
  std::deque<std::size_t> queue{base_};
  seen[base_] = true;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t gi = 0; gi < rank_n_; ++gi) {
      std::size_t w = out_[v][gi];
      if (w != npos && !seen[w]) {
        seen[w] = true;
        tree[v][gi] = true;
        path[w] = path[v];
        path[w].push_back(static_cast<Letter>(gi + 1));
        queue.push_back(w);
      }
      w = in_[v][gi];
      if (w != npos && !seen[w]) {
        seen[w] = true;
        tree[w][gi] = true;  // the edge w --g--> v is in the tree
        path[w] = path[v];
        path[w].push_back(-static_cast<Letter>(gi + 1));
        queue.push_back(w);
      }
    }
  }
  std::vector<Word> out;
  for (std::size_t v = 0; v < out_.size(); ++v)
    for (std::size_t gi = 0; gi < rank_n_; ++gi) {
      std::size_t w = out_[v][gi];
      if (w == npos || tree[v][gi]) continue;
      std::vector<Letter> letters = path[v];
      letters.push_back(static_cast<Letter>(gi + 1));
      for (auto it = path[w].rbegin(); it != path[w].rend(); ++it)
        letters.push_back(-*it);
      out.push_back(reduce(std::move(letters)));
    }
  return out;
}

FreeHomo signed_images(const SignedClassEndo& e) {
  FreeHomo f;
  f.source_rank = f.target_rank = e.rank;
  for (std::size_t i = 1; i <= e.rank; ++i)
    f.images.push_back(Word::generator(
        static_cast<int>(i), e.fixed.count(static_cast<int>(i)) ? +1 : -1));
  return f;
}

std::vector<Word> signed_fix(const SignedClassEndo& e) {
  std::vector<Word> basis;
  for (int i : e.fixed) {
    if (i < 1 || static_cast<std::size_t>(i) > e.rank)
      fail(ErrorKind::range, "fixed set outside alphabet");
    basis.push_back(Word::generator(i));
  }
  return basis;
}

Word substitute(const Word& abstract_word, const std::vector<Word>& basis) {
  std::vector<Letter> out;
  for (Letter l : abstract_word.letters()) {
    std::size_t g = static_cast<std::size_t>(std::abs(l));
    if (g > basis.size()) fail(ErrorKind::range, "abstract letter out of range");
    const Word img = l > 0 ? basis[g - 1] : basis[g - 1].inverse();
    out.insert(out.end(), img.letters().begin(), img.letters().end());
  }
  return reduce(std::move(out));
}

SchreierKernel schreier_kernel(std::size_t k, const std::vector<Int>& moduli,
                               const std::vector<IntVec>& images,
                               std::size_t max_states) {
  if (images.size() != k)
    fail(ErrorKind::dimension, "one image per abstract generator required");
  for (const IntVec& img : images)
    if (img.size() != moduli.size())
      fail(ErrorKind::dimension, "image length must match moduli");
  for (const Int& m : moduli)
    if (m < 1) fail(ErrorKind::range, "moduli must be positive");

  auto normalize = [&](IntVec v) {
    for (std::size_t j = 0; j < moduli.size(); ++j)
      mpz_fdiv_r(v[j].get_mpz_t(), v[j].get_mpz_t(), moduli[j].get_mpz_t());
    return v;
  };

  // Breadth-first coset exploration, letters ordered x1..xk, x1^-1..xk^-1.
  std::map<IntVec, std::size_t> state_id;
  std::vector<IntVec> states;
  std::vector<std::vector<Letter>> transversal;
  IntVec zero = normalize(IntVec(moduli.size()));
  state_id.emplace(zero, 0);
  states.push_back(zero);
  transversal.push_back({});
  // tree_pos[s][i-1]: the positive edge (s, x_i) lies on the BFS tree
  std::vector<std::vector<bool>> tree_pos;

  auto ensure_rows = [&](std::size_t upto) {
    while (tree_pos.size() < upto)
      tree_pos.emplace_back(std::vector<bool>(k, false));
  };
  ensure_rows(1);

  for (std::size_t head = 0; head < states.size(); ++head) {
    if (states.size() > max_states)
      fail(ErrorKind::range, "index beyond desk scale");
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
        transversal.push_back(transversal[head]);
        transversal.back().push_back(l);
        ensure_rows(states.size());
        if (l > 0)
          tree_pos[head][i] = true;
        else
          tree_pos[it->second][i] = true;  // positive twin of the tree edge
      }
      if (states.size() > max_states)
        fail(ErrorKind::range, "index beyond desk scale");
    }
  }

  SchreierKernel out;
  out.index = Int(static_cast<unsigned long>(states.size()));
  for (std::size_t s = 0; s < states.size(); ++s)
    for (std::size_t i = 0; i < k; ++i) {
      if (tree_pos[s][i]) continue;
      IntVec nxt = states[s];
      for (std::size_t j = 0; j < moduli.size(); ++j) nxt[j] += images[i][j];
      nxt = normalize(std::move(nxt));
      std::size_t t = state_id.at(nxt);
      std::vector<Letter> letters = transversal[s];
      letters.push_back(static_cast<int>(i + 1));
      for (auto it = transversal[t].rbegin(); it != transversal[t].rend(); ++it)
        letters.push_back(-*it);
      out.abstract_basis.push_back(reduce(std::move(letters)));
    }
  return out;
}

KernelOfAbelianMap kernel_of_abelian_map(const std::vector<Word>& basis,
                                         std::size_t ambient_rank,
                                         const std::vector<Int>& moduli,
                                         const std::vector<IntVec>& images) {
  StallingsGraph g = StallingsGraph::fold(basis, ambient_rank);
  if (g.rank() != basis.size())
    fail(ErrorKind::verification, "not a free basis");
  SchreierKernel sk = schreier_kernel(basis.size(), moduli, images);
  KernelOfAbelianMap out;
  out.index = sk.index;
  out.abstract_basis = std::move(sk.abstract_basis);
  for (const Word& w : out.abstract_basis)
    out.basis.push_back(substitute(w, basis));
  return out;
}

bool is_injective_endo(const FreeHomo& f) {
  StallingsGraph g = StallingsGraph::fold(f.images, f.target_rank);
  return g.rank() == f.source_rank;
}

bool is_surjective_endo(const FreeHomo& f) {
  StallingsGraph g = StallingsGraph::fold(f.images, f.target_rank);
  auto idx = g.index();
  return idx.has_value() && *idx == 1;
}

}  // namespace fixcalc::freegrp
