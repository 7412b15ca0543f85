#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "combi/error.hpp"
#include "combi/online.hpp"
#include "fixtures.hpp"

#include <numeric>
#include <sstream>

using namespace combi;
using fixtures::rel_err;

namespace {

Eigen::MatrixXd embeddings(const StructureSpace& s, const std::vector<Structure>& ys) {
  Eigen::MatrixXd E(s.dim(), static_cast<long>(ys.size()));
  for (std::size_t j = 0; j < ys.size(); ++j) E.col(static_cast<long>(j)) = embed(s, ys[j]);
  return E;
}

// straightforward dense replay: every step shrinks all live columns, writes the new one,
// and zeroes columns that fell out of the horizon
Eigen::MatrixXd dense_sgd(const Dataset& d, const SgdConfig& cfg, std::uint64_t seed) {
  int m = d.size(), dim = d.space.dim();
  StatsView v = StatsView::from(exact_stats(d.space), cfg.normalize);
  Eigen::MatrixXd K = gram_matrix(d.inputs, cfg.kernel);
  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(dim, m);
  std::vector<int> live;
  Rng rng(seed);
  long t = 0;
  int tau = cfg.horizon(m);
  for (int pass = 0; pass < cfg.passes; ++pass) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng r = rng.split(static_cast<std::uint64_t>(pass));
    for (int i = m - 1; i > 0; --i) std::swap(order[i], order[r.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
    for (int idx : order) {
      ++t;
      double eta = std::min(cfg.p / (cfg.lambda * t), 1.0 / cfg.lambda);
      Eigen::VectorXd f = alpha * K.col(idx);
      Eigen::VectorXd g = quad_loss_gradient(v, embeddings(d.space, d.labels[idx]), f);
      alpha *= 1.0 - cfg.lambda * eta;
      alpha.col(idx) += -eta * g;
      live.push_back(idx);
      if (static_cast<int>(live.size()) > tau) {
        int old = live.front();
        live.erase(live.begin());
        alpha.col(old).setZero();
      }
    }
  }
  return alpha;
}

}  // namespace

TEST_CASE("instantaneous objective at zero and t = 1") {
  StructureSpace s = StructureSpace::multiclass(2);
  StatsView v = StatsView::from(exact_stats(s), false);
  Eigen::MatrixXd K = Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd E = embed(s, make_element(Family::multiclass, 0));
  CHECK(instantaneous_objective(Eigen::MatrixXd::Zero(2, 1), K, E, v, 1.0) == 0.0);
  Eigen::MatrixXd g = instantaneous_gradient(Eigen::MatrixXd::Zero(2, 1), K, E, v, 1.0);
  CHECK(g(0, 0) == doctest::Approx(-1.0));
  CHECK(g(1, 0) == doctest::Approx(1.0));

  Rng rng(3);
  for (const auto& sp : {StructureSpace::multilabel(4), StructureSpace::permutations(4),
                         StructureSpace::directed_cycles(4)}) {
    Dataset d = fixtures::random_dataset(sp, 1, 3, 2, rng);
    EmbeddingStats st = exact_stats(sp);
    RidgeProblem pr = make_problem(d, KernelSpec::linear_kernel(), 0.8, false, st);
    Eigen::MatrixXd a = fixtures::normal_matrix(sp.dim(), 1, rng, 0.3);
    StatsView sv = StatsView::from(st, false);
    Eigen::MatrixXd Ei = embeddings(sp, d.labels[0]);
    CHECK(rel_err(instantaneous_objective(a, pr.gram(), Ei, sv, 0.8), pr.objective(a)) <= 1e-12);
    CHECK(rel_err(instantaneous_gradient(a, pr.gram(), Ei, sv, 0.8), pr.gradient(a)) <= 1e-12);
  }
}

TEST_CASE("instantaneous objective restricted to the current example") {
  Rng rng(4);
  for (const auto& sp : {StructureSpace::multilabel(3), StructureSpace::ell_subsets(5, 2), StructureSpace::permutations(4),
                         StructureSpace::undirected_cycles(5)}) {
    CAPTURE(sp.describe());
    auto all = enumerate_small(sp);
    for (int t : {1, 3, 6}) {
      Dataset d = fixtures::random_dataset(sp, t, 3, 2, rng);
      Eigen::MatrixXd K = gram_matrix(d.inputs, KernelSpec::rbf_kernel(0.4));
      Eigen::MatrixXd a = fixtures::normal_matrix(sp.dim(), t, rng, 0.4);
      StatsView sv = StatsView::from(exact_stats(sp), false);
      Eigen::MatrixXd E = embeddings(sp, d.labels[t - 1]);
      double lambda = 0.6;
      Eigen::VectorXd f = a * K.col(t - 1);
      double ref = lambda * (a * K * a.transpose()).trace() + fixtures::pair_sum_loss(sp, all, d.labels[t - 1], f);
      double obj = instantaneous_objective(a, K, E, sv, lambda);
      CHECK(rel_err(obj, ref) <= 1e-10);

      Eigen::MatrixXd g = instantaneous_gradient(a, K, E, sv, lambda);
      Eigen::MatrixXd fd = fixtures::fd_gradient(
          [&](const Eigen::MatrixXd& b) { return instantaneous_objective(b, K, E, sv, lambda); }, a);
      CHECK(rel_err(g, fd) <= 1e-5);
      Eigen::MatrixXd gl = 2 * lambda * a * K;
      CHECK(rel_err(instantaneous_gradient(a, K, E, sv, lambda) - gl,
                    quad_loss_gradient(sv, E, f) * K.col(t - 1).transpose()) <= 1e-10);

      Eigen::MatrixXd v = fixtures::normal_matrix(sp.dim(), t, rng);
      double h = 1e-5;
      Eigen::MatrixXd hfd = (instantaneous_gradient(a + h * v, K, E, sv, lambda) -
                             instantaneous_gradient(a - h * v, K, E, sv, lambda)) /
                            (2 * h);
      CHECK(rel_err(instantaneous_hessian_vector(K, E, sv, lambda, v), hfd) <= 1e-4);
    }
  }
  StatsView sv = StatsView::from(exact_stats(StructureSpace::multilabel(3)), false);
  CHECK_THROWS_AS(instantaneous_objective(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Ones(1, 1),
                                          Eigen::MatrixXd::Zero(3, 1), sv, 1.0),
                  ValidationError);
}

TEST_CASE("sgd matches a dense replay of the update rule") {
  Rng rng(8);
  Dataset d = fixtures::random_dataset(StructureSpace::multilabel(4), 15, 3, 2, rng);
  for (int tau : {0, 1, 4}) {
    for (int passes : {1, 2}) {
      // a dense replay cannot keep two live contributions of one instance apart
      if (tau > 0 && passes > 1) continue;
      SgdConfig cfg = SgdConfig::matching_batch(5.0, d.size(), 0.3, tau);
      cfg.passes = passes;
      cfg.normalize = true;
      SgdResult r = sgd_train(d, cfg, 77);
      Eigen::MatrixXd ref = dense_sgd(d, cfg, 77);
      CHECK(rel_err(r.model.alpha, ref) <= 1e-9);
      CHECK(static_cast<int>(r.log.size()) == passes * d.size());
    }
  }
}

TEST_CASE("truncation to one column") {
  Rng rng(9);
  Dataset d = fixtures::random_dataset(StructureSpace::permutations(4), 10, 3, 1, rng);
  SgdConfig cfg = SgdConfig::matching_batch(2.0, d.size(), 0.5, 1);
  cfg.normalize = true;
  SgdResult r = sgd_train(d, cfg, 1);
  int nonzero = 0;
  for (long j = 0; j < r.model.alpha.cols(); ++j) nonzero += r.model.alpha.col(j).norm() > 0;
  CHECK(nonzero == 1);
  for (const auto& row : r.log) CHECK(row.active_columns == 1);

  cfg.tau = 0;
  cfg.tau_fraction = 0.3;
  CHECK(cfg.horizon(10) == 3);
  SgdResult r3 = sgd_train(d, cfg, 1);
  CHECK(r3.log.back().active_columns == 3);
}

TEST_CASE("tiny steps stay near zero") {
  Rng rng(10);
  Dataset one = fixtures::random_dataset(StructureSpace::multilabel(3), 1, 2, 1, rng);
  Dataset d = one;
  for (int k = 0; k < 9; ++k) {
    d.inputs.conservativeResize(d.inputs.rows() + 1, Eigen::NoChange);
    d.inputs.row(d.inputs.rows() - 1) = one.inputs.row(0);
    d.labels.push_back(one.labels[0]);
  }
  SgdConfig cfg;
  cfg.p = 1e-6;
  cfg.lambda = 1.0;
  SgdResult r = sgd_train(d, cfg, 4);
  CHECK(r.model.alpha.norm() < 1e-4);
  CHECK(std::abs(objective(r.model, d)) < 1e-2);
}

TEST_CASE("step size and clipping") {
  Rng rng(11);
  Dataset d = fixtures::random_dataset(StructureSpace::multilabel(3), 5, 2, 1, rng);
  SgdConfig cfg;
  cfg.lambda = 0.5;
  cfg.p = 0.2;
  SgdResult r = sgd_train(d, cfg, 2);
  CHECK_FALSE(r.eta_clipped);
  for (const auto& row : r.log) CHECK(row.eta == doctest::Approx(0.2 / (0.5 * row.step)));
  cfg.p = 2.0;
  SgdResult c = sgd_train(d, cfg, 2);
  CHECK(c.eta_clipped);
  CHECK(c.log[0].eta == doctest::Approx(2.0));
  CHECK(c.log[2].eta == doctest::Approx(2.0 / (0.5 * 3)));
}

TEST_CASE("determinism and log format") {
  Rng rng(12);
  Dataset d = fixtures::random_dataset(StructureSpace::ordinal(5), 20, 3, 1, rng);
  SgdConfig cfg = SgdConfig::matching_batch(3.0, d.size(), 0.1, 5);
  SgdResult a = sgd_train(d, cfg, 99), b = sgd_train(d, cfg, 99), c = sgd_train(d, cfg, 100);
  std::ostringstream la, lb, lc;
  write_sgd_log(la, a.log);
  write_sgd_log(lb, b.log);
  write_sgd_log(lc, c.log);
  CHECK(la.str() == lb.str());
  CHECK(la.str() != lc.str());
  CHECK(la.str().rfind("step,eta,instantaneous_objective,active_columns\n", 0) == 0);
  CHECK(a.model.alpha == b.model.alpha);
}

TEST_CASE("divergence is reported") {
  Rng rng(13);
  Dataset d = fixtures::random_dataset(StructureSpace::multilabel(12), 30, 3, 1, rng);
  d.inputs *= 30.0;
  SgdConfig cfg;
  cfg.lambda = 1e-6;
  cfg.p = 1.0;
  CHECK_THROWS_AS(sgd_train(d, cfg, 1), NumericError);
  cfg.p = -1.0;
  CHECK_THROWS_AS(sgd_train(d, cfg, 1), ValidationError);
}

TEST_CASE("single pass sgd is comparable to ncg on a toy multiclass set") {
  Rng rng(14);
  Dataset d;
  d.space = StructureSpace::multiclass(3);
  d.inputs = Eigen::MatrixXd(60, 3);
  for (int i = 0; i < 60; ++i) {
    int c = i % 3;
    Eigen::Vector3d x = Eigen::Vector3d::Unit(c) + 0.2 * fixtures::normal_matrix(3, 1, rng).col(0);
    d.inputs.row(i) = x.normalized().transpose();
    d.labels.push_back({make_element(Family::multiclass, c)});
  }
  TrainConfig tc;
  tc.normalize = true;
  RidgeModel ncg = train_ncg(d, tc);
  double lb = default_lambda(d, exact_stats(d.space), true);
  SgdConfig sc = SgdConfig::matching_batch(lb, d.size(), 0.02, d.size());
  sc.normalize = true;
  SgdResult s = sgd_train(d, sc, 5);
  double on = objective(ncg, d), os = objective(s.model, d);
  CHECK(on < 0);
  CHECK(std::abs(os - on) <= 0.2 * std::abs(on));
}
