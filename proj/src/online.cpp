#include "combi/online.hpp"

#include "combi/error.hpp"
#include "combi/rng.hpp"

#include <cmath>
#include <deque>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace combi {

SgdConfig SgdConfig::matching_batch(double lambda_batch, int m, double p, int tau) {
  SgdConfig c;
  c.lambda = 2.0 * lambda_batch / m;
  c.p = p;
  c.tau = tau;
  return c;
}

int SgdConfig::horizon(int m) const {
  if (tau_fraction) return std::max(1, static_cast<int>(std::ceil(*tau_fraction * m)));
  return tau <= 0 ? std::numeric_limits<int>::max() : tau;
}

namespace {

void check_inst(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& K, const Eigen::MatrixXd& E,
                const StatsView& v) {
  if (K.rows() != K.cols() || K.rows() != alpha.cols() || K.rows() < 1)
    throw ValidationError("instantaneous objective: K must be t x t with t = alpha columns");
  if (E.rows() != alpha.rows() || v.psi.size() != alpha.rows())
    throw ValidationError("instantaneous objective: embedding dimension mismatch");
}

}  // namespace

double instantaneous_objective(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& K,
                               const Eigen::MatrixXd& E, const StatsView& v, double lambda) {
  check_inst(alpha, K, E, v);
  Eigen::VectorXd f = alpha * K.col(K.cols() - 1);
  return lambda * (alpha * K * alpha.transpose()).trace() + quad_loss(v, E, f);
}

Eigen::MatrixXd instantaneous_gradient(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& K,
                                       const Eigen::MatrixXd& E, const StatsView& v, double lambda) {
  check_inst(alpha, K, E, v);
  Eigen::VectorXd k = K.col(K.cols() - 1);
  Eigen::VectorXd f = alpha * k;
  return 2.0 * lambda * alpha * K + quad_loss_gradient(v, E, f) * k.transpose();
}

Eigen::MatrixXd instantaneous_hessian_vector(const Eigen::MatrixXd& K, const Eigen::MatrixXd& E,
                                             const StatsView& v, double lambda, const Eigen::MatrixXd& V) {
  check_inst(V, K, E, v);
  Eigen::VectorXd k = K.col(K.cols() - 1);
  return 2.0 * lambda * V * K + quad_loss_hessian(v, E, V * k) * k.transpose();
}

SgdResult sgd_train(const Dataset& data, const SgdConfig& cfg, std::uint64_t seed) {
  data.validate();
  if (!(cfg.lambda > 0)) throw ValidationError("sgd lambda must be positive");
  if (!(cfg.p > 0)) throw ValidationError("sgd p must be positive");
  if (cfg.passes < 1) throw ValidationError("sgd passes must be >= 1");
  int m = data.size();
  int d = data.space.dim();
  int tau = cfg.horizon(m);

  SgdResult res;
  RidgeModel& model = res.model;
  model.space = data.space;
  model.stats = exact_stats(data.space);
  model.kernel = cfg.kernel;
  model.normalized = cfg.normalize;
  model.lambda = cfg.lambda * m / 2.0;
  model.train_inputs = data.inputs;
  StatsView view = StatsView::from(model.stats, cfg.normalize);
  if (!std::isfinite(view.count_term) || !view.C.allFinite())
    throw NumericError("space statistics overflow double precision; enable count normalization");

  Eigen::MatrixXd K = data.gram ? *data.gram : gram_matrix(data.inputs, cfg.kernel);
  std::vector<Eigen::MatrixXd> E(m);
  for (int i = 0; i < m; ++i) {
    E[i].resize(d, static_cast<long>(data.labels[i].size()));
    for (std::size_t j = 0; j < data.labels[i].size(); ++j)
      E[i].col(static_cast<long>(j)) = embed(data.space, data.labels[i][j]);
  }

  struct Column {
    int index;
    Eigen::VectorXd a;
  };
  std::deque<Column> active;
  Rng rng(seed);
  long t = 0;
  double lam = cfg.lambda;
  double sq_norm = 0.0;
  for (int pass = 0; pass < cfg.passes; ++pass) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng r = rng.split(static_cast<std::uint64_t>(pass));
    for (int i = m - 1; i > 0; --i) std::swap(order[i], order[r.uniform_index(static_cast<std::uint64_t>(i) + 1)]);

    for (int idx : order) {
      ++t;
      double eta = cfg.p / (lam * static_cast<double>(t));
      if (lam * eta > 1.0) {
        eta = 1.0 / lam;
        res.eta_clipped = true;
      }
      Eigen::VectorXd f = Eigen::VectorXd::Zero(d);
      for (const auto& c : active) f += K(c.index, idx) * c.a;
      Eigen::VectorXd g = quad_loss_gradient(view, E[idx], f);
      double shrink = 1.0 - lam * eta;
      for (auto& c : active) c.a *= shrink;
      Eigen::VectorXd a_new = -eta * g;
      // norm^2 of the expansion, updated in O(tau d)
      sq_norm = shrink * shrink * sq_norm + 2.0 * shrink * f.dot(a_new) + K(idx, idx) * a_new.squaredNorm();
      Eigen::VectorXd f_new = shrink * f + K(idx, idx) * a_new;
      active.push_back({idx, a_new});
      while (static_cast<int>(active.size()) > tau) {
        const Column& o = active.front();
        Eigen::VectorXd ko = Eigen::VectorXd::Zero(d);
        for (std::size_t b = 1; b < active.size(); ++b) ko += K(o.index, active[b].index) * active[b].a;
        sq_norm -= 2.0 * o.a.dot(ko) + K(o.index, o.index) * o.a.squaredNorm();
        f_new -= K(o.index, idx) * o.a;
        active.pop_front();
      }
      int n_act = static_cast<int>(active.size());
      // objective descended by the step: (lambda/2)||f||^2 + loss_t
      double obj = 0.5 * lam * sq_norm + quad_loss(view, E[idx], f_new);
      if (!std::isfinite(obj) || std::abs(obj) > 1e12) {
        std::ostringstream os;
        os << "sgd diverged at step " << t << " (instantaneous objective " << obj << ", eta " << eta
           << "); reduce p or enable count normalization";
        throw NumericError(os.str());
      }
      res.log.push_back({t, eta, obj, n_act});
    }
  }

  model.alpha = Eigen::MatrixXd::Zero(d, m);
  for (const auto& c : active) model.alpha.col(c.index) += c.a;
  return res;
}

void write_sgd_log(std::ostream& os, const std::vector<SgdLogRow>& log) {
  os << "step,eta,instantaneous_objective,active_columns\n";
  os << std::setprecision(17);
  for (const auto& r : log) os << r.step << ',' << r.eta << ',' << r.objective << ',' << r.active_columns << '\n';
}

}  // namespace combi
