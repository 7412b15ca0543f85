#include "combi/ridge.hpp"

#include "combi/error.hpp"
#include "combi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace combi {

namespace {

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a.cwiseProduct(b).sum(); }

void check_dims(const Eigen::MatrixXd& a, int d, int m, const char* what) {
  if (a.rows() != d || a.cols() != m) {
    std::ostringstream os;
    os << what << " has shape " << a.rows() << "x" << a.cols() << ", expected " << d << "x" << m;
    throw ValidationError(os.str());
  }
}

}  // namespace

std::size_t Dataset::total_labels() const {
  std::size_t n = 0;
  for (const auto& ys : labels) n += ys.size();
  return n;
}

void Dataset::validate() const {
  int m = size();
  if (m < 1) throw ValidationError("dataset has no instances");
  if (gram) {
    if (gram->rows() != m || gram->cols() != m)
      throw ValidationError("precomputed gram matrix does not match instance count");
  } else if (inputs.rows() != m) {
    throw ValidationError("input rows do not match label rows");
  }
  if (!gram && !inputs.allFinite()) throw ValidationError("inputs contain non-finite values");
  for (int i = 0; i < m; ++i) {
    if (labels[i].empty()) throw ValidationError("instance " + std::to_string(i) + " has no labels");
    std::set<std::vector<int>> seen;
    for (const auto& y : labels[i]) {
      check_membership(space, y);
      if (!seen.insert(y.data).second)
        throw ValidationError("instance " + std::to_string(i) + " lists a structure twice");
    }
  }
}

Eigen::MatrixXd y_matrix(const Dataset& data) {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(data.size(), data.space.dim());
  for (int i = 0; i < data.size(); ++i)
    for (const auto& y : data.labels[i]) Y.row(i) += embed(data.space, y).transpose();
  return Y;
}

StatsView StatsView::from(const EmbeddingStats& stats, bool normalize) {
  StatsView v;
  int d = stats.dim();
  if (!normalize) {
    v.scale = 1.0;
    v.count_term = to_double(stats.count);
    v.psi = stats.psi;
    v.C = stats.C;
    return v;
  }
  v.scale = ratio_to_double(1, stats.count);
  v.count_term = 1.0;
  v.psi.resize(d);
  v.C.resize(d, d);
  for (int i = 0; i < d; ++i) v.psi[i] = ratio_to_double(stats.psi_exact[i], stats.count);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      v.C(i, j) = ratio_to_double(stats.cov_exact[static_cast<std::size_t>(i) * d + j], stats.count);
  return v;
}

Eigen::VectorXd RidgeModel::kernel_column(const Eigen::VectorXd& x) const {
  Eigen::VectorXd k(train_inputs.rows());
  for (long i = 0; i < train_inputs.rows(); ++i) k[i] = kernel.eval(train_inputs.row(i).transpose(), x);
  return k;
}

Eigen::VectorXd RidgeModel::weight_for(const Eigen::VectorXd& x) const {
  if (x.size() != train_inputs.cols())
    throw ValidationError("input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(train_inputs.cols()));
  return alpha * kernel_column(x);
}

double default_lambda(const Dataset& data, const EmbeddingStats& stats, bool normalize) {
  double avg = static_cast<double>(data.total_labels()) / data.size();
  return normalize ? avg : to_double(stats.count) * avg;
}

RidgeProblem::RidgeProblem(const Dataset& data, Eigen::MatrixXd K, const EmbeddingStats& stats,
                           double lambda, bool normalize)
    : d_(data.space.dim()), m_(data.size()), lambda_(lambda), K_(std::move(K)) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive and finite");
  if (K_.rows() != m_ || K_.cols() != m_) throw ValidationError("gram matrix does not match dataset");
  if (stats.dim() != d_) throw ValidationError("statistics do not match the embedding dimension");
  view_ = StatsView::from(stats, normalize);
  if (!std::isfinite(view_.count_term) || !view_.C.allFinite() || !view_.psi.allFinite())
    throw NumericError("space statistics overflow double precision (|Y| = " + stats.count.str().substr(0, 24) +
                       "...); enable count normalization");
  Y_ = Eigen::MatrixXd::Zero(m_, d_);
  E_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const auto& ys = data.labels[i];
    E_[i].resize(d_, static_cast<long>(ys.size()));
    for (std::size_t j = 0; j < ys.size(); ++j) E_[i].col(static_cast<long>(j)) = embed(data.space, ys[j]);
    Y_.row(i) = E_[i].rowwise().sum().transpose();
    if (ys.size() != 1) single_ = false;
  }
}

double quad_loss(const StatsView& v, const Eigen::MatrixXd& E, const Eigen::VectorXd& f) {
  double n = static_cast<double>(E.cols());
  Eigen::VectorXd ybar = E.rowwise().sum();
  double S1 = f.dot(v.psi);
  double S2 = f.dot(v.C * f);
  double A1 = f.dot(ybar);
  double A2 = (E.transpose() * f).squaredNorm();
  return n * S1 - v.count_term * A1 + 0.5 * n * S2 - A1 * S1 + v.scale * A1 * A1 +
         0.5 * v.count_term * A2 - v.scale * n * A2;
}

Eigen::VectorXd quad_loss_gradient(const StatsView& v, const Eigen::MatrixXd& E, const Eigen::VectorXd& f) {
  double n = static_cast<double>(E.cols());
  Eigen::VectorXd ybar = E.rowwise().sum();
  double S1 = f.dot(v.psi);
  double A1 = f.dot(ybar);
  Eigen::VectorXd g = n * v.psi - v.count_term * ybar + n * (v.C * f) - S1 * ybar - A1 * v.psi +
                      2.0 * v.scale * A1 * ybar;
  g += (v.count_term - 2.0 * v.scale * n) * (E * (E.transpose() * f));
  return g;
}

Eigen::VectorXd quad_loss_hessian(const StatsView& v, const Eigen::MatrixXd& E, const Eigen::VectorXd& u) {
  double n = static_cast<double>(E.cols());
  Eigen::VectorXd ybar = E.rowwise().sum();
  Eigen::VectorXd h = n * (v.C * u) - u.dot(v.psi) * ybar - u.dot(ybar) * v.psi +
                      2.0 * v.scale * u.dot(ybar) * ybar;
  h += (v.count_term - 2.0 * v.scale * n) * (E * (E.transpose() * u));
  return h;
}

double RidgeProblem::loss_at(const Eigen::VectorXd& f, int i) const { return quad_loss(view_, E_[i], f); }

Eigen::VectorXd RidgeProblem::loss_gradient_at(const Eigen::VectorXd& f, int i) const {
  return quad_loss_gradient(view_, E_[i], f);
}

Eigen::VectorXd RidgeProblem::loss_hessian_at(const Eigen::VectorXd& u, int i) const {
  return quad_loss_hessian(view_, E_[i], u);
}

double RidgeProblem::loss(const Eigen::MatrixXd& alpha, int i) const {
  check_dims(alpha, d_, m_, "alpha");
  if (i < 0 || i >= m_) throw ValidationError("instance index out of range");
  return loss_at(alpha * K_.col(i), i);
}

double RidgeProblem::objective(const Eigen::MatrixXd& alpha) const {
  check_dims(alpha, d_, m_, "alpha");
  Eigen::MatrixXd F = alpha * K_;
  double reg = lambda_ * inner(F, alpha);
  double losses = blocked_sum(static_cast<std::size_t>(m_),
                              [&](std::size_t i) { return loss_at(F.col(static_cast<long>(i)), static_cast<int>(i)); });
  return reg + losses;
}

Eigen::MatrixXd RidgeProblem::gradient(const Eigen::MatrixXd& alpha) const {
  check_dims(alpha, d_, m_, "alpha");
  Eigen::MatrixXd F = alpha * K_;
  Eigen::MatrixXd G(d_, m_);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m_; ++i) G.col(i) = loss_gradient_at(F.col(i), i);
  return 2.0 * lambda_ * F + G * K_;
}

Eigen::MatrixXd RidgeProblem::gradient_serial(const Eigen::MatrixXd& alpha) const {
  check_dims(alpha, d_, m_, "alpha");
  Eigen::MatrixXd F = alpha * K_;
  Eigen::MatrixXd G(d_, m_);
  for (int i = 0; i < m_; ++i) G.col(i) = loss_gradient_at(F.col(i), i);
  return 2.0 * lambda_ * F + G * K_;
}

Eigen::MatrixXd RidgeProblem::hessian_vector(const Eigen::MatrixXd& v) const {
  check_dims(v, d_, m_, "v");
  Eigen::MatrixXd VK = v * K_;
  Eigen::MatrixXd H(d_, m_);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m_; ++i) H.col(i) = loss_hessian_at(VK.col(i), i);
  return 2.0 * lambda_ * VK + H * K_;
}

void RidgeProblem::require_single_labels() const {
  if (!single_) throw ValidationError("the aggregate matrix form needs |Y_i| = 1 for every instance");
}

double RidgeProblem::objective_matrix(const Eigen::MatrixXd& alpha) const {
  check_dims(alpha, d_, m_, "alpha");
  require_single_labels();
  const auto& v = view_;
  Eigen::MatrixXd aK = alpha * K_;
  Eigen::MatrixXd YaK = Y_ * aK;  // m x m
  Eigen::VectorXd dg = YaK.diagonal();
  Eigen::RowVectorXd psiaK = v.psi.transpose() * aK;
  double t = lambda_ * (alpha * K_ * alpha.transpose()).trace();
  t += 0.5 * (K_ * alpha.transpose() * v.C * alpha * K_).trace();
  t += psiaK.sum();
  t += 0.5 * v.count_term * dg.squaredNorm();
  t -= v.count_term * YaK.trace();
  t -= psiaK * dg;
  return t;
}

Eigen::MatrixXd RidgeProblem::gradient_matrix(const Eigen::MatrixXd& alpha) const {
  check_dims(alpha, d_, m_, "alpha");
  require_single_labels();
  const auto& v = view_;
  Eigen::MatrixXd aK = alpha * K_;
  Eigen::VectorXd dg = (Y_ * aK).diagonal();
  Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(m_);
  Eigen::RowVectorXd psiaK = v.psi.transpose() * aK;
  Eigen::MatrixXd Yt = Y_.transpose();
  Eigen::MatrixXd g = 2.0 * lambda_ * aK + v.C * aK * K_ + v.psi * ones * K_ -
                      Yt * psiaK.asDiagonal() * K_ - v.count_term * Yt * K_ +
                      (v.count_term * Yt - v.psi * ones) * dg.asDiagonal() * K_;
  return g;
}

Eigen::MatrixXd RidgeProblem::hessian_vector_matrix(const Eigen::MatrixXd& vv) const {
  check_dims(vv, d_, m_, "v");
  require_single_labels();
  const auto& v = view_;
  Eigen::MatrixXd vK = vv * K_;
  Eigen::VectorXd dg = (Y_ * vK).diagonal();
  Eigen::RowVectorXd psivK = v.psi.transpose() * vK;
  Eigen::MatrixXd Yt = Y_.transpose();
  return 2.0 * lambda_ * vK + v.C * vK * K_ + v.count_term * Yt * dg.asDiagonal() * K_ -
         v.psi * dg.transpose() * K_ - Yt * psivK.asDiagonal() * K_;
}

RidgeProblem make_problem(const Dataset& data, const KernelSpec& kernel, double lambda, bool normalize,
                          const EmbeddingStats& stats) {
  data.validate();
  Eigen::MatrixXd K = data.gram ? *data.gram : gram_matrix(data.inputs, kernel);
  return RidgeProblem(data, std::move(K), stats, lambda, normalize);
}

Eigen::MatrixXd minimize_ncg(const RidgeProblem& problem, Eigen::MatrixXd alpha, const NcgConfig& cfg,
                             TrainReport* report) {
  TrainReport rep;
  double f = problem.objective(alpha);
  if (!std::isfinite(f)) throw NumericError("non-finite objective; enable count normalization");
  Eigen::MatrixXd g = problem.gradient(alpha);
  double gnorm = g.norm();
  rep.initial_grad_norm = gnorm;
  double target = cfg.tol * gnorm;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    if (gnorm <= target || gnorm == 0.0) {
      rep.converged = true;
      break;
    }
    // truncated CG on H p = -g
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    Eigen::MatrixXd r = -g;
    Eigen::MatrixXd dir = r;
    double rr = inner(r, r);
    double cg_target = cfg.cg_rel_tol * gnorm;
    for (int k = 0; k < cfg.max_cg_iter; ++k) {
      Eigen::MatrixXd Hd = problem.hessian_vector(dir);
      double curv = inner(dir, Hd);
      ++rep.cg_iterations;
      if (!(curv > 0)) {
        if (k == 0) p = -g;
        break;
      }
      double a = rr / curv;
      p += a * dir;
      r -= a * Hd;
      double rr_new = inner(r, r);
      if (std::sqrt(rr_new) <= cg_target) break;
      dir = r + (rr_new / rr) * dir;
      rr = rr_new;
    }
    double gp = inner(g, p);
    if (!(gp < 0)) {
      p = -g;
      gp = -gnorm * gnorm;
    }
    double t = 1.0;
    bool accepted = false;
    Eigen::MatrixXd cand;
    double fc = f;
    for (int ls = 0; ls < 60; ++ls) {
      cand = alpha + t * p;
      fc = problem.objective(cand);
      if (!std::isfinite(fc)) throw NumericError("non-finite objective during line search; enable count normalization");
      if (fc <= f + cfg.armijo_c * t * gp) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    alpha = std::move(cand);
    f = fc;
    rep.objective_trace.push_back(f);
    g = problem.gradient(alpha);
    gnorm = g.norm();
  }
  if (!rep.converged && (gnorm <= target || gnorm == 0.0)) rep.converged = true;
  rep.iterations = it;
  rep.grad_norm = gnorm;
  rep.objective = f;
  if (report) *report = rep;
  return alpha;
}

RidgeModel train_ncg(const Dataset& data, const TrainConfig& cfg, TrainReport* report) {
  data.validate();
  RidgeModel model;
  model.space = data.space;
  model.stats = exact_stats(data.space);
  model.kernel = cfg.kernel;
  model.normalized = cfg.normalize;
  model.lambda = cfg.lambda ? *cfg.lambda : default_lambda(data, model.stats, cfg.normalize);
  model.train_inputs = data.inputs;
  RidgeProblem problem = make_problem(data, cfg.kernel, model.lambda, cfg.normalize, model.stats);
  model.alpha = minimize_ncg(problem, Eigen::MatrixXd::Zero(problem.dim(), problem.size()), cfg.ncg, report);
  return model;
}

namespace {

RidgeProblem bound_problem(const RidgeModel& model, const Dataset& data) {
  if (data.space.describe() != model.space.describe())
    throw ValidationError("dataset space does not match the model space");
  return make_problem(data, model.kernel, model.lambda, model.normalized, model.stats);
}

}  // namespace

double surrogate_loss(const RidgeModel& model, const Dataset& data, int i) {
  return bound_problem(model, data).loss(model.alpha, i);
}

double objective(const RidgeModel& model, const Dataset& data) {
  return bound_problem(model, data).objective(model.alpha);
}

Eigen::MatrixXd gradient(const RidgeModel& model, const Dataset& data) {
  return bound_problem(model, data).gradient(model.alpha);
}

Eigen::MatrixXd hessian_vector(const RidgeModel& model, const Dataset& data, const Eigen::MatrixXd& v) {
  return bound_problem(model, data).hessian_vector(v);
}

double score(const RidgeModel& model, const Eigen::VectorXd& x, const Structure& y) {
  return model.weight_for(x).dot(embed(model.space, y));
}

Eigen::MatrixXd nystrom_embed(const Eigen::MatrixXd& gram, const std::vector<int>& landmarks, int out_dim) {
  long m = gram.rows();
  int k = static_cast<int>(landmarks.size());
  if (gram.cols() != m) throw ValidationError("gram matrix must be square");
  if (k < 1 || k > m) throw ValidationError("landmark count must be in [1, m]");
  if (out_dim < 1 || out_dim > k) throw ValidationError("output dimension must be in [1, k]");
  std::vector<int> is_landmark(m, -1);
  for (int j = 0; j < k; ++j) {
    int l = landmarks[j];
    if (l < 0 || l >= m) throw ValidationError("landmark index out of range");
    if (is_landmark[l] >= 0) throw ValidationError("landmark listed twice");
    is_landmark[l] = j;
  }
  Eigen::MatrixXd A(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) A(a, b) = gram(landmarks[a], landmarks[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXd ev = es.eigenvalues();  // ascending
  int usable = 0;
  for (int i = 0; i < k; ++i) usable += ev[i] > 1e-12;
  if (usable < out_dim)
    throw NumericError("landmark block has usable rank " + std::to_string(usable) + ", below requested " +
                       std::to_string(out_dim));
  Eigen::MatrixXd U = es.eigenvectors().rightCols(out_dim).rowwise().reverse();
  Eigen::VectorXd lam = ev.tail(out_dim).reverse();
  Eigen::MatrixXd out(m, out_dim);
  Eigen::VectorXd sq = lam.cwiseSqrt();
  Eigen::VectorXd isq = sq.cwiseInverse();
  for (long r = 0; r < m; ++r) {
    if (is_landmark[r] >= 0) {
      out.row(r) = U.row(is_landmark[r]).cwiseProduct(sq.transpose());
    } else {
      Eigen::RowVectorXd b(k);
      for (int a = 0; a < k; ++a) b[a] = gram(landmarks[a], r);
      out.row(r) = (b * U).cwiseProduct(isq.transpose());
    }
  }
  return out;
}

}  // namespace combi
