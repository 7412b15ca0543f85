#include "combi/decode.hpp"

#include "combi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace combi {

LinearScorer::LinearScorer(Eigen::VectorXd w) : w_x(std::move(w)) {
  if (!w_x.allFinite()) throw ValidationError("scorer weights must be finite");
}

namespace {

SiblingSystem signed_pair_system(std::string name, StructureSpace space) {
  SiblingSystem s;
  s.name = std::move(name);
  s.space = space;
  s.psi = [space](const Structure& y) { return embed(space, y); };
  s.sibling = [space](const Structure& y) { return reverse_structure(space, y); };
  s.c = Eigen::VectorXd::Zero(space.dim());
  s.uniform = uniform_sampler_for(space);
  return s;
}

void check_scorer(const LinearScorer& scorer, int dim) {
  if (scorer.w_x.size() != dim)
    throw ValidationError("scorer has dimension " + std::to_string(scorer.w_x.size()) + ", expected " +
                          std::to_string(dim));
}

}  // namespace

SiblingSystem signed_multilabel_system(int d) {
  StructureSpace space = StructureSpace::multilabel(d);
  SiblingSystem s;
  s.name = "signed_multilabel";
  s.space = space;
  s.psi = [](const Structure& y) {
    Eigen::VectorXd v(y.data.size());
    for (std::size_t i = 0; i < y.data.size(); ++i) v[i] = 2.0 * y.data[i] - 1.0;
    return v;
  };
  s.sibling = [space](const Structure& y) { return reverse_structure(space, y); };
  s.c = Eigen::VectorXd::Zero(d);
  s.uniform = uniform_sampler_for(space);
  return s;
}

SiblingSystem permutation_system(int d) { return signed_pair_system("permutations", StructureSpace::permutations(d)); }
SiblingSystem dicycle_system(int n) { return signed_pair_system("directed_cycles", StructureSpace::directed_cycles(n)); }
SiblingSystem tournament_system(int n) {
  return signed_pair_system("partial_tournaments", StructureSpace::partial_tournaments(n));
}

void check_sibling(const SiblingSystem& sys, Rng& rng, long samples, std::uint64_t enum_limit) {
  auto check = [&](const Structure& z) {
    Eigen::VectorXd a = sys.psi(z);
    Structure rz = sys.sibling(z);
    check_membership(sys.space, rz);
    if (!(sys.sibling(rz) == z)) throw ValidationError(sys.name + ": sibling map is not an involution");
    Eigen::VectorXd sum = a + sys.psi(rz);
    if ((sum - sys.c).lpNorm<Eigen::Infinity>() > 1e-12)
      throw ValidationError(sys.name + ": psi(z) + psi(r(z)) differs from c");
    if (std::abs(sys.c.dot(a)) > 1e-12) throw ValidationError(sys.name + ": <c, psi(z)> is not zero");
  };
  if (cardinality(sys.space) <= BigInt(enum_limit)) {
    for (const auto& z : enumerate_small(sys.space, enum_limit)) check(z);
  } else {
    for (long i = 0; i < samples; ++i) check(sys.uniform(rng));
  }
}

DecodeResult decode_sibling(const SiblingSystem& sys, const LinearScorer& scorer, Rng& rng) {
  check_scorer(scorer, sys.dim());
  Structure y = sys.uniform(rng);
  double s = scorer(sys.psi(y));
  if (s >= 0) return {std::move(y), s};
  Structure r = sys.sibling(y);
  double sr = scorer(sys.psi(r));
  return {std::move(r), sr};
}

Eigen::VectorXd IndependenceSystem::embed(const std::vector<int>& bits) const {
  Eigen::VectorXd v(size);
  for (int u = 0; u < size; ++u) v[u] = bits[u] ? (mu.size() ? std::sqrt(mu[u]) : 1.0) : 0.0;
  return v;
}

IndependenceSystem free_system(int size) {
  if (size < 1) throw ValidationError("ground set must be non-empty");
  return {size, [](const std::vector<int>&) { return true; }, {}};
}

IndependenceSystem uniform_matroid(int size, int k) {
  if (size < 1 || k < 0) throw ValidationError("bad uniform matroid parameters");
  return {size, [k](const std::vector<int>& b) { return std::accumulate(b.begin(), b.end(), 0) <= k; }, {}};
}

int independence_block_count(int size) {
  if (size <= 2) return 1;
  return std::max(1, static_cast<int>(std::floor(size / std::log2(static_cast<double>(size)))));
}

DecodeResult decode_independence(const IndependenceSystem& sys, const LinearScorer& scorer) {
  int n = sys.size;
  if (n < 1) throw ValidationError("ground set must be non-empty");
  if (n > 62) throw TooLargeError("ground set too large for block decoding");
  check_scorer(scorer, n);
  if (sys.mu.size() && sys.mu.size() != n) throw ValidationError("mu has the wrong length");
  std::vector<int> empty(n, 0);
  if (!sys.member(empty)) throw ValidationError("the empty set must be a member of an independence system");
  Eigen::VectorXd gain(n);
  for (int u = 0; u < n; ++u) gain[u] = scorer.w_x[u] * (sys.mu.size() ? std::sqrt(sys.mu[u]) : 1.0);

  int k = independence_block_count(n);
  DecodeResult best{Structure{Family::multilabel, empty}, 0.0};
  int start = 0;
  for (int b = 0; b < k; ++b) {
    int len = n / k + (b < n % k ? 1 : 0);
    std::vector<int> elems(len);
    std::iota(elems.begin(), elems.end(), start);
    start += len;
    std::uint64_t total = std::uint64_t{1} << len;
    std::vector<char> bad(total, 0);
    for (std::uint64_t mask = 1; mask < total; ++mask) {
      for (int i = 0; i < len && !bad[mask]; ++i)
        if (mask >> i & 1) bad[mask] = bad[mask ^ (std::uint64_t{1} << i)];
      if (bad[mask]) continue;
      std::vector<int> bits(n, 0);
      double s = 0;
      for (int i = 0; i < len; ++i)
        if (mask >> i & 1) {
          bits[elems[i]] = 1;
          s += gain[elems[i]];
        }
      if (!sys.member(bits)) {
        bad[mask] = 1;
        continue;
      }
      if (s > best.score) best = {Structure{Family::multilabel, std::move(bits)}, s};
    }
  }
  return best;
}

DecodeResult decode_independence_exact(const IndependenceSystem& sys, const LinearScorer& scorer, bool minimize) {
  int n = sys.size;
  if (n > 24) throw TooLargeError("exhaustive independence search limited to 24 elements");
  check_scorer(scorer, n);
  DecodeResult best{Structure{Family::multilabel, std::vector<int>(n, 0)}, 0.0};
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> bits(n);
    for (int i = 0; i < n; ++i) bits[i] = mask >> i & 1;
    if (!sys.member(bits)) continue;
    double s = scorer(sys.embed(bits));
    if (minimize ? s < best.score : s > best.score) best = {Structure{Family::multilabel, std::move(bits)}, s};
  }
  return best;
}

ZApproxEnumerator::ZApproxEnumerator(SiblingSystem sys, LinearScorer scorer, double nu, std::uint64_t limit)
    : sys_(std::move(sys)), scorer_(std::move(scorer)), nu_(nu) {
  check_scorer(scorer_, sys_.dim());
  if (!(nu > 0 && nu < 1)) throw ValidationError("nu must lie in (0, 1)");
  all_ = enumerate_small(sys_.space, limit);
}

std::optional<DecodeResult> ZApproxEnumerator::next() {
  while (pos_ < all_.size()) {
    const Structure& y = all_[pos_++];
    if (emitted_.count(y.data)) continue;
    Structure r = sys_.sibling(y);
    if (emitted_.count(r.data)) continue;
    double sy = scorer_(sys_.psi(y)), sr = scorer_(sys_.psi(r));
    DecodeResult out = sr > sy ? DecodeResult{std::move(r), sr} : DecodeResult{y, sy};
    emitted_.insert(out.y.data);
    return out;
  }
  return std::nullopt;
}

std::vector<DecodeResult> enumerate_z_approx(const SiblingSystem& sys, const LinearScorer& scorer, double nu) {
  ZApproxEnumerator e(sys, scorer, nu);
  std::vector<DecodeResult> out;
  while (auto r = e.next()) out.push_back(std::move(*r));
  return out;
}

DecodeResult decode_exact_small(const StructureSpace& space, const LinearScorer& scorer, std::uint64_t limit) {
  check_scorer(scorer, space.dim());
  auto ys = enumerate_small(space, limit);
  if (ys.empty()) throw ValidationError("space is empty");
  std::size_t best = 0;
  double bs = scorer(embed(space, ys[0]));
  for (std::size_t i = 1; i < ys.size(); ++i) {
    double s = scorer(embed(space, ys[i]));
    if (s > bs) {
      bs = s;
      best = i;
    }
  }
  return {ys[best], bs};
}

DecodeResult decode_exact_small(const SiblingSystem& sys, const LinearScorer& scorer, std::uint64_t limit) {
  check_scorer(scorer, sys.dim());
  auto ys = enumerate_small(sys.space, limit);
  std::size_t best = 0;
  double bs = scorer(sys.psi(ys[0]));
  for (std::size_t i = 1; i < ys.size(); ++i) {
    double s = scorer(sys.psi(ys[i]));
    if (s > bs) {
      bs = s;
      best = i;
    }
  }
  return {ys[best], bs};
}

std::pair<double, double> exact_extrema(const SiblingSystem& sys, const LinearScorer& scorer, std::uint64_t limit) {
  check_scorer(scorer, sys.dim());
  double hi = -INFINITY, lo = INFINITY;
  for (const auto& y : enumerate_small(sys.space, limit)) {
    double s = scorer(sys.psi(y));
    hi = std::max(hi, s);
    lo = std::min(lo, s);
  }
  return {hi, lo};
}

PredictDecode decode_for_predict(const StructureSpace& space, const LinearScorer& scorer, Rng& rng,
                                 std::uint64_t enum_limit, int draws) {
  check_scorer(scorer, space.dim());
  const Eigen::VectorXd& w = scorer.w_x;
  int n = space.size();
  auto finish = [&](Structure y, std::string method) {
    double s = scorer(embed(space, y));
    return PredictDecode{{std::move(y), s}, std::move(method)};
  };
  switch (space.family()) {
    case Family::multilabel: {
      Structure y{Family::multilabel, std::vector<int>(n)};
      for (int i = 0; i < n; ++i) y.data[i] = w[i] > 0;
      return finish(std::move(y), "exact");
    }
    case Family::ell_subsets: {
      std::vector<int> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return w[a] > w[b]; });
      idx.resize(space.ell());
      return finish(make_set(Family::ell_subsets, n, idx), "exact");
    }
    case Family::partial_tournaments: {
      Structure y{Family::partial_tournaments, std::vector<int>(w.size())};
      for (long e = 0; e < w.size(); ++e) y.data[e] = w[e] > 0 ? 1 : (w[e] < 0 ? -1 : 0);
      return finish(std::move(y), "exact");
    }
    case Family::subtrees: {
      const Tree& t = space.tree();
      std::vector<double> g(n, 0.0);
      auto order = t.preorder();
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        g[*it] = w[*it];
        for (int c : t.children[*it]) g[*it] += std::max(0.0, g[c]);
      }
      Structure y{Family::subtrees, std::vector<int>(n, 0)};
      if (g[t.root] > 0) {
        for (int v : order) {
          int p = t.parent[v];
          if (v == t.root || (y.data[p] && g[v] > 0)) y.data[v] = 1;
        }
      }
      return finish(std::move(y), "exact");
    }
    default:
      break;
  }
  if (space.family() == Family::posets || cardinality(space) <= BigInt(enum_limit)) {
    auto r = decode_exact_small(space, scorer, std::max<std::uint64_t>(enum_limit, kEnumerationLimit));
    return {std::move(r), "enumeration"};
  }
  UniformSampler uniform = uniform_sampler_for(space);
  DecodeResult best{uniform(rng), 0.0};
  best.score = scorer(embed(space, best.y));
  std::string method = "sampled";
  if (space.family() == Family::permutations || space.family() == Family::directed_cycles) {
    SiblingSystem sys = space.family() == Family::permutations ? permutation_system(n) : dicycle_system(n);
    DecodeResult s = decode_sibling(sys, scorer, rng);
    if (s.score > best.score) best = std::move(s);
    method = "sibling";
  }
  for (int i = 0; i < draws; ++i) {
    Structure y = uniform(rng);
    double s = scorer(embed(space, y));
    if (s > best.score) best = {std::move(y), s};
  }
  return {std::move(best), method};
}

}  // namespace combi
