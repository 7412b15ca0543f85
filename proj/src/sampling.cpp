#include "combi/sampling.hpp"

#include "combi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace combi {

namespace {

// first k entries become a uniform k-subset of [n] in uniform order
std::vector<int> partial_shuffle(int n, int k, Rng& rng) {
  std::vector<int> a(n);
  std::iota(a.begin(), a.end(), 0);
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(a[i], a[j]);
  }
  a.resize(k);
  return a;
}

// successor map of a uniform cyclic order over vs (Sattolo)
std::vector<int> sattolo(std::vector<int> vs, Rng& rng) {
  int k = static_cast<int>(vs.size());
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = k - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_index(static_cast<std::uint64_t>(i))]);
  std::vector<int> cycle;
  cycle.reserve(k);
  // walk the single cycle of i -> idx[i] starting at 0
  int cur = 0;
  do {
    cycle.push_back(vs[cur]);
    cur = idx[cur];
  } while (cur != 0);
  return cycle;
}

std::vector<int> cycle_vertices(int n, bool directed, Rng& rng) {
  std::vector<BigInt> w(n + 1, BigInt(0));
  BigInt total = 0;
  for (int i = 3; i <= n; ++i) {
    w[i] = binomial(n, i) * factorial(i - 1);
    if (!directed) w[i] /= 2;
    total += w[i];
  }
  BigInt u = rng.uniform_below(total);
  int size = 3;
  for (int i = 3; i <= n; ++i) {
    if (u < w[i]) {
      size = i;
      break;
    }
    u -= w[i];
  }
  return sattolo(partial_shuffle(n, size, rng), rng);
}

}  // namespace

Structure uniform_hypercube(int d, Rng& rng) {
  if (d < 1) throw ValidationError("hypercube dimension must be >= 1");
  Structure y{Family::multilabel, std::vector<int>(d)};
  for (int i = 0; i < d; ++i) y.data[i] = static_cast<int>(rng.uniform_index(2));
  return y;
}

Structure uniform_permutation(int d, Rng& rng) {
  if (d < 1) throw ValidationError("permutation size must be >= 1");
  std::vector<int> p(d);
  std::iota(p.begin(), p.end(), 0);
  for (int i = d - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
  return make_ranking(p);
}

Structure uniform_cyclic(int n, Rng& rng) {
  if (n < 3) throw ValidationError("cycles need at least 3 vertices");
  return make_dicycle(n, cycle_vertices(n, true, rng));
}

Structure uniform_subtree(const Tree& tree, const std::vector<BigInt>& f, bool include_empty, Rng& rng) {
  Structure y{Family::subtrees, std::vector<int>(tree.size(), 0)};
  if (include_empty && rng.uniform_below(f[tree.root]) == 0) return y;
  std::vector<int> stack{tree.root};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    y.data[v] = 1;
    // child kept with probability (f(c) - 1) / f(c): the share of its non-empty subtrees
    for (int c : tree.children[v])
      if (rng.uniform_below(f[c]) != 0) stack.push_back(c);
  }
  return y;
}

Structure uniform_subtree(const Tree& tree, bool include_empty, Rng& rng) {
  return uniform_subtree(tree, count_subtrees(tree), include_empty, rng);
}

UniformSampler uniform_sampler_for(const StructureSpace& space) {
  Family fam = space.family();
  int n = space.size();
  switch (fam) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      return [fam, n](Rng& r) { return make_element(fam, static_cast<int>(r.uniform_index(n))); };
    case Family::multilabel:
    case Family::cliques:
      return [fam, n](Rng& r) {
        Structure y = uniform_hypercube(n, r);
        y.family = fam;
        return y;
      };
    case Family::ell_subsets: {
      int k = space.ell();
      return [n, k](Rng& r) { return make_set(Family::ell_subsets, n, partial_shuffle(n, k, r)); };
    }
    case Family::permutations:
      return [n](Rng& r) { return uniform_permutation(n, r); };
    case Family::partial_tournaments:
      return [n](Rng& r) {
        Structure y{Family::partial_tournaments, std::vector<int>(pair_count(n))};
        for (int& e : y.data) e = static_cast<int>(r.uniform_index(3)) - 1;
        return y;
      };
    case Family::undirected_cycles:
      return [n](Rng& r) { return make_ucycle(n, cycle_vertices(n, false, r)); };
    case Family::directed_cycles:
      return [n](Rng& r) { return uniform_cyclic(n, r); };
    case Family::subtrees: {
      Tree t = space.tree();
      auto f = count_subtrees(t);
      return [t, f](Rng& r) { return uniform_subtree(t, f, true, r); };
    }
    case Family::posets:
      break;
  }
  throw NoClosedFormError("no exact uniform sampler for " + family_name(fam));
}

double max_embedding_norm(const StructureSpace& space) {
  int n = space.size();
  switch (space.family()) {
    case Family::multiclass:
      return 1.0;
    case Family::multilabel:
    case Family::ordinal:
    case Family::subtrees:
    case Family::undirected_cycles:
    case Family::directed_cycles:
      return std::sqrt(static_cast<double>(n));
    case Family::ell_subsets:
      return std::sqrt(static_cast<double>(space.ell()));
    case Family::poset_regression:
    case Family::hierarchy: {
      int best = 0;
      for (int z = 0; z < n; ++z) best = std::max(best, static_cast<int>(embed(space, make_element(space.family(), z)).sum()));
      return std::sqrt(static_cast<double>(best));
    }
    case Family::permutations:
    case Family::partial_tournaments:
    case Family::cliques:
    case Family::posets:
      return std::sqrt(static_cast<double>(pair_count(n)));
  }
  return 0.0;
}

double Tilt::score(const StructureSpace& space, const Structure& y) const { return wx.dot(embed(space, y)); }

ExpFamilyModel ExpFamilyModel::make(const StructureSpace& space, Eigen::VectorXd w, int n_features,
                                    double x_norm_bound) {
  ExpFamilyModel m;
  m.d = space.dim();
  m.n = n_features;
  if (w.size() != static_cast<long>(m.d) * n_features)
    throw ValidationError("weight vector length must be dim * n_features");
  if (!w.allFinite()) throw ValidationError("weights must be finite");
  m.w = std::move(w);
  m.R = max_embedding_norm(space) * x_norm_bound;
  m.B = m.w.norm();
  return m;
}

Eigen::VectorXd ExpFamilyModel::weight_for(const Eigen::VectorXd& x) const {
  if (x.size() != n) throw ValidationError("input dimension does not match the model");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(w.data(), d, n);
  return W * x;
}

Tilt ExpFamilyModel::tilt(const Eigen::VectorXd& x) const {
  return {weight_for(x), R * w.norm()};
}

double ExpFamilyModel::score(const StructureSpace& space, const Eigen::VectorXd& x, const Structure& y) const {
  return weight_for(x).dot(embed(space, y));
}

ChainState meta_step(const ChainState& state, const StructureSpace& space, const Tilt& tilt,
                     const UniformSampler& sampler, Rng& rng) {
  Structure z = sampler(rng);
  double u = rng.uniform01();
  double delta = tilt.score(space, z) - tilt.score(space, state.current);
  ChainState next{state.current, state.step + 1, 0};
  if (delta >= 0 || u <= std::exp(delta)) next.current = std::move(z);
  next.rng_cursor = rng.position();
  return next;
}

ChainState meta_step(const ChainState& state, const ExpFamilyModel& model, const Eigen::VectorXd& x,
                     const StructureSpace& space, const UniformSampler& sampler, Rng& rng) {
  return meta_step(state, space, model.tilt(x), sampler, rng);
}

CftpResult cftp_sample(const StructureSpace& space, const Tilt& tilt, const UniformSampler& sampler, Rng& rng,
                       double budget) {
  const double M = tilt.bound;
  if (budget <= 0) budget = 100.0 * std::exp(2.0 * M);
  // the update at time -t draws from rng.split(t)
  long coalesced = 0;
  std::vector<Structure> proposals;
  std::vector<double> us;
  for (long t = 1; coalesced == 0; ++t) {
    if (static_cast<double>(t) > budget) {
      std::ostringstream os;
      os << "CFTP step budget " << budget << " exceeded (B*R = " << M << ")";
      throw BudgetExceeded(os.str());
    }
    Rng rt = rng.split(static_cast<std::uint64_t>(t));
    proposals.push_back(sampler(rt));
    us.push_back(rt.uniform01());
    // accepted from every state when u <= exp(s(z) - M), since s(y) <= M
    if (us.back() <= std::exp(tilt.score(space, proposals.back()) - M)) coalesced = t;
  }
  Structure cur = proposals[coalesced - 1];
  double s_cur = tilt.score(space, cur);
  for (long s = coalesced - 1; s >= 1; --s) {
    double sz = tilt.score(space, proposals[s - 1]);
    double delta = sz - s_cur;
    if (delta >= 0 || us[s - 1] <= std::exp(delta)) {
      cur = proposals[s - 1];
      s_cur = sz;
    }
  }
  rng = rng.split(0x5eedULL);
  return {std::move(cur), coalesced, 2 * coalesced - 1};
}

CftpResult cftp_sample(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                       const UniformSampler& sampler, Rng& rng, double budget) {
  return cftp_sample(space, model.tilt(x), sampler, rng, budget);
}

Structure chain_sample(const StructureSpace& space, const Tilt& tilt, const UniformSampler& sampler, long steps,
                       Rng& rng) {
  ChainState st{sampler(rng), 0, 0};
  for (long i = 0; i < steps; ++i) st = meta_step(st, space, tilt, sampler, rng);
  return st.current;
}

long coupling_mixing_bound(double B, double R, double epsilon) {
  if (!(B > 0) || !(R > 0)) throw ValidationError("B and R must be positive");
  if (!(epsilon > 0) || epsilon > 1) throw ValidationError("epsilon must lie in (0, 1]");
  double denom = -std::log1p(-std::exp(-2.0 * B * R));
  return static_cast<long>(std::ceil(std::log(1.0 / epsilon) / denom));
}

ChainState mc_cube_step(const ChainState& state, const LogDensity& log_pi, Rng& rng) {
  int d = static_cast<int>(state.current.data.size());
  if (d < 1) throw ValidationError("hypercube state is empty");
  int i = static_cast<int>(rng.uniform_index(d));
  int b = static_cast<int>(rng.uniform_index(2));
  double u = rng.uniform01();
  ChainState next{state.current, state.step + 1, 0};
  if (state.current.data[i] != b) {
    std::vector<int> v = state.current.data;
    v[i] = b;
    double delta = log_pi(v) - log_pi(state.current.data);
    if (delta >= 0 || u <= std::exp(delta)) next.current.data = std::move(v);
  }
  next.rng_cursor = rng.position();
  return next;
}

Eigen::MatrixXd meta_transition_matrix(const StructureSpace& space, const Tilt& tilt,
                                       const std::vector<Structure>& states) {
  long n = static_cast<long>(states.size());
  Eigen::VectorXd s(n);
  for (long i = 0; i < n; ++i) s[i] = tilt.score(space, states[i]);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (long a = 0; a < n; ++a) {
    double off = 0;
    for (long b = 0; b < n; ++b) {
      if (a == b) continue;
      P(a, b) = std::min(1.0, std::exp(s[b] - s[a])) / static_cast<double>(n);
      off += P(a, b);
    }
    P(a, a) = 1.0 - off;
  }
  return P;
}

Eigen::MatrixXd mc_cube_transition_matrix(int d, const LogDensity& log_pi) {
  long n = 1L << d;
  Eigen::VectorXd lp(n);
  auto bits = [d](long mask) {
    std::vector<int> v(d);
    for (int i = 0; i < d; ++i) v[i] = mask >> i & 1;
    return v;
  };
  for (long u = 0; u < n; ++u) lp[u] = log_pi(bits(u));
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (long u = 0; u < n; ++u) {
    double off = 0;
    for (int i = 0; i < d; ++i) {
      long v = u ^ (1L << i);
      P(u, v) = std::min(1.0, std::exp(lp[v] - lp[u])) / (2.0 * d);
      off += P(u, v);
    }
    P(u, u) = 1.0 - off;
  }
  return P;
}

}  // namespace combi
