#pragma once

#include "combi/counting.hpp"
#include "combi/kernels.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace combi {

struct Dataset {
  StructureSpace space;
  Eigen::MatrixXd inputs;               // m x n_features, rows are instances
  std::optional<Eigen::MatrixXd> gram;  // precomputed m x m, overrides inputs
  std::vector<std::vector<Structure>> labels;

  int size() const { return static_cast<int>(labels.size()); }
  std::size_t total_labels() const;
  void validate() const;
};

// m x d, row i = sum of psi(y) over Y_i
Eigen::MatrixXd y_matrix(const Dataset& data);

// Statistics as consumed by the loss, optionally scaled by 1/|Y|.
// count_term = |Y|*scale, psi = Psi*scale, C = C*scale.
struct StatsView {
  double scale = 1.0;
  double count_term = 0.0;
  Eigen::VectorXd psi;
  Eigen::MatrixXd C;

  static StatsView from(const EmbeddingStats& stats, bool normalize);
};

// Pairwise quadratic loss of one instance at f, with E the d x n_i embeddings of Y_i:
// n S1 - |Y| A1 + n/2 S2 - A1 S1 + A1^2 + |Y|/2 A2 - n A2 (scaled through the view).
double quad_loss(const StatsView& v, const Eigen::MatrixXd& E, const Eigen::VectorXd& f);
Eigen::VectorXd quad_loss_gradient(const StatsView& v, const Eigen::MatrixXd& E, const Eigen::VectorXd& f);
Eigen::VectorXd quad_loss_hessian(const StatsView& v, const Eigen::MatrixXd& E, const Eigen::VectorXd& u);

struct RidgeModel {
  StructureSpace space;
  EmbeddingStats stats;
  KernelSpec kernel;
  double lambda = 1.0;
  bool normalized = false;
  Eigen::MatrixXd alpha;         // d x m
  Eigen::MatrixXd train_inputs;  // m x n_features

  Eigen::VectorXd kernel_column(const Eigen::VectorXd& x) const;
  // w_x = alpha k(x)
  Eigen::VectorXd weight_for(const Eigen::VectorXd& x) const;
};

double default_lambda(const Dataset& data, const EmbeddingStats& stats, bool normalize);

// Objective, gradient and Hessian-vector product over dual parameters alpha.
class RidgeProblem {
public:
  RidgeProblem(const Dataset& data, Eigen::MatrixXd K, const EmbeddingStats& stats, double lambda,
               bool normalize);

  int dim() const { return d_; }
  int size() const { return m_; }
  double lambda() const { return lambda_; }
  const Eigen::MatrixXd& gram() const { return K_; }
  const Eigen::MatrixXd& Y() const { return Y_; }
  const StatsView& view() const { return view_; }
  const Eigen::MatrixXd& embeddings(int i) const { return E_[i]; }

  // per-instance surrogate loss at f = alpha K_{.i}
  double loss(const Eigen::MatrixXd& alpha, int i) const;
  double loss_at(const Eigen::VectorXd& f, int i) const;
  Eigen::VectorXd loss_gradient_at(const Eigen::VectorXd& f, int i) const;
  Eigen::VectorXd loss_hessian_at(const Eigen::VectorXd& u, int i) const;

  double objective(const Eigen::MatrixXd& alpha) const;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& alpha) const;
  Eigen::MatrixXd gradient_serial(const Eigen::MatrixXd& alpha) const;
  Eigen::MatrixXd hessian_vector(const Eigen::MatrixXd& v) const;

  // The aggregate matrix forms; valid only when every |Y_i| = 1.
  double objective_matrix(const Eigen::MatrixXd& alpha) const;
  Eigen::MatrixXd gradient_matrix(const Eigen::MatrixXd& alpha) const;
  Eigen::MatrixXd hessian_vector_matrix(const Eigen::MatrixXd& v) const;

private:
  void require_single_labels() const;

  int d_ = 0;
  int m_ = 0;
  double lambda_ = 1.0;
  Eigen::MatrixXd K_;
  Eigen::MatrixXd Y_;
  std::vector<Eigen::MatrixXd> E_;  // d x n_i embeddings of Y_i
  StatsView view_;
  bool single_ = true;
};

struct NcgConfig {
  double tol = 1e-6;  // relative to the gradient norm at alpha = 0
  int max_iter = 200;
  double armijo_c = 1e-4;
  double cg_rel_tol = 0.1;
  int max_cg_iter = 1000;
};

struct TrainConfig {
  KernelSpec kernel;
  std::optional<double> lambda;
  bool normalize = false;
  NcgConfig ncg;
};

struct TrainReport {
  int iterations = 0;
  int cg_iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  double initial_grad_norm = 0.0;
  double objective = 0.0;
  std::vector<double> objective_trace;  // after each accepted step
};

RidgeProblem make_problem(const Dataset& data, const KernelSpec& kernel, double lambda,
                          bool normalize, const EmbeddingStats& stats);
RidgeModel train_ncg(const Dataset& data, const TrainConfig& config, TrainReport* report = nullptr);
// minimizes an already built problem from alpha0
Eigen::MatrixXd minimize_ncg(const RidgeProblem& problem, Eigen::MatrixXd alpha0,
                             const NcgConfig& config, TrainReport* report = nullptr);

// Operation forms bound to a model and dataset.
double surrogate_loss(const RidgeModel& model, const Dataset& data, int i);
double objective(const RidgeModel& model, const Dataset& data);
Eigen::MatrixXd gradient(const RidgeModel& model, const Dataset& data);
Eigen::MatrixXd hessian_vector(const RidgeModel& model, const Dataset& data,
                               const Eigen::MatrixXd& v);
double score(const RidgeModel& model, const Eigen::VectorXd& x, const Structure& y);

// Rows in original index order; landmark rows use U Lambda^{1/2}, others B^T U Lambda^{-1/2}.
Eigen::MatrixXd nystrom_embed(const Eigen::MatrixXd& gram, const std::vector<int>& landmarks,
                              int out_dim);

}  // namespace combi
