#pragma once
// Shared test helpers: random datasets and enumeration-based loss oracles.

#include "combi/counting.hpp"
#include "combi/ridge.hpp"
#include "combi/rng.hpp"
#include "combi/sampling.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

namespace fixtures {

using namespace combi;

inline Eigen::MatrixXd normal_matrix(long rows, long cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd M(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) M(i, j) = scale * rng.normal();
  return M;
}

// m instances with 1..max_labels distinct label structures each
inline Dataset random_dataset(const StructureSpace& space, int m, int n_features, int max_labels, Rng& rng) {
  Dataset d;
  d.space = space;
  d.inputs = normal_matrix(m, n_features, rng);
  UniformSampler u = uniform_sampler_for(space);
  for (int i = 0; i < m; ++i) {
    int want = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_labels)));
    std::set<std::vector<int>> seen;
    std::vector<Structure> ys;
    for (int tries = 0; tries < 50 && static_cast<int>(ys.size()) < want; ++tries) {
      Structure y = u(rng);
      if (seen.insert(y.data).second) ys.push_back(y);
    }
    d.labels.push_back(ys);
  }
  return d;
}

// sum over y in Yi, z outside Yi of h(z) - h(y) + h(z)^2/2 - h(z)h(y) + h(y)^2/2
inline double pair_sum_loss(const StructureSpace& space, const std::vector<Structure>& all,
                            const std::vector<Structure>& Yi, const Eigen::VectorXd& f) {
  std::set<std::vector<int>> in;
  std::vector<double> hy;
  for (const auto& y : Yi) {
    in.insert(y.data);
    hy.push_back(embed(space, y).dot(f));
  }
  double total = 0.0;
  for (const auto& z : all) {
    if (in.count(z.data)) continue;
    double hz = embed(space, z).dot(f);
    for (double h : hy) total += hz - h + 0.5 * hz * hz - hz * h + 0.5 * h * h;
  }
  return total;
}

// exp(1 + h(z) - h(y)) and the step-function ranking loss, both by enumeration
inline std::pair<double, double> exp_and_auc_loss(const StructureSpace& space, const std::vector<Structure>& all,
                                                  const std::vector<Structure>& Yi, const Eigen::VectorXd& f) {
  std::set<std::vector<int>> in;
  std::vector<double> hy;
  for (const auto& y : Yi) {
    in.insert(y.data);
    hy.push_back(embed(space, y).dot(f));
  }
  double ex = 0.0, auc = 0.0;
  for (const auto& z : all) {
    if (in.count(z.data)) continue;
    double hz = embed(space, z).dot(f);
    for (double h : hy) {
      ex += std::exp(1.0 + hz - h);
      auc += hz > h ? 1.0 : hz == h ? 0.5 : 0.0;
    }
  }
  return {ex, auc};
}

// objective written out from the aggregate matrix form, independently of the library
inline double matrix_form(const Eigen::MatrixXd& a, const Eigen::MatrixXd& K, const Eigen::MatrixXd& Y, const EmbeddingStats& s,
                   double lambda) {
  double n = to_double(s.count);
  Eigen::MatrixXd aK = a * K;
  Eigen::VectorXd diag = (Y * aK).diagonal();
  Eigen::VectorXd one = Eigen::VectorXd::Ones(K.rows());
  double t1 = lambda * (a * K * a.transpose()).trace();
  double t2 = 0.5 * (K * a.transpose() * s.C * a * K).trace();
  double t3 = s.psi.dot(aK * one);
  double t4 = 0.5 * n * diag.squaredNorm();
  double t5 = -n * (Y * aK).trace();
  double t6 = -s.psi.dot(aK * diag);
  return t1 + t2 + t3 + t4 + t5 + t6;
}

// central differences of a scalar function of a matrix
inline Eigen::MatrixXd fd_gradient(const std::function<double(const Eigen::MatrixXd&)>& fn, const Eigen::MatrixXd& a,
                                   double h = 1e-5) {
  Eigen::MatrixXd g(a.rows(), a.cols());
  for (long j = 0; j < a.cols(); ++j)
    for (long i = 0; i < a.rows(); ++i) {
      Eigen::MatrixXd p = a, q = a;
      p(i, j) += h;
      q(i, j) -= h;
      g(i, j) = (fn(p) - fn(q)) / (2 * h);
    }
  return g;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// Pearson statistic of observed counts against expected counts, and its upper-tail p-value
struct ChiSquare {
  double stat = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double min_expected = 0.0;
};

inline ChiSquare chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
  ChiSquare c;
  c.min_expected = *std::min_element(expected.begin(), expected.end());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double diff = observed[i] - expected[i];
    c.stat += diff * diff / expected[i];
  }
  c.dof = static_cast<int>(observed.size()) - 1;
  if (c.dof > 0) c.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(c.dof), c.stat));
  return c;
}

// draws n samples and tests them against probabilities over `states` (keyed by payload)
inline ChiSquare sample_fit(const std::vector<Structure>& states, const std::vector<double>& prob, long n,
                            const std::function<Structure(long)>& draw) {
  std::map<std::vector<int>, std::size_t> at;
  for (std::size_t i = 0; i < states.size(); ++i) at[states[i].data] = i;
  std::vector<double> obs(states.size(), 0.0), want(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) want[i] = prob[i] * static_cast<double>(n);
  for (long k = 0; k < n; ++k) {
    auto it = at.find(draw(k).data);
    if (it == at.end()) return {1e300, 0, 0.0, 0.0};
    obs[it->second] += 1.0;
  }
  return chi_square(obs, want);
}

inline std::vector<double> tilted_probs(const StructureSpace& s, const std::vector<Structure>& states,
                                        const Eigen::VectorXd& wx) {
  std::vector<double> p;
  double z = 0.0;
  for (const auto& y : states) {
    p.push_back(std::exp(embed(s, y).dot(wx)));
    z += p.back();
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace fixtures
