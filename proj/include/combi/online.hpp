#pragma once

#include "combi/ridge.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace combi {

struct SgdConfig {
  double p = 1.0;       // step-size numerator, eta_t = p / (lambda t)
  int tau = 0;          // retained columns; 0 keeps all
  std::optional<double> tau_fraction;  // alternative unit: tau = ceil(fraction * m)
  double lambda = 1.0;  // per-step regularization: retained columns shrink by (1 - lambda eta_t)
  int passes = 1;
  bool normalize = false;
  KernelSpec kernel;

  // Per-step lambda whose expected step targets the batch objective
  // lambda_batch ||f||^2 + sum_i loss_i over m instances.
  static SgdConfig matching_batch(double lambda_batch, int m, double p, int tau);
  int horizon(int m) const;
};

struct SgdLogRow {
  long step = 0;
  double eta = 0.0;
  double objective = 0.0;
  int active_columns = 0;
};

struct SgdResult {
  RidgeModel model;
  std::vector<SgdLogRow> log;
  bool eta_clipped = false;
};

// Paper-form instantaneous quantities. alpha is d x t, K is t x t with k its
// last column, E holds the embeddings of the current Y_t (d x n_t).
double instantaneous_objective(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& K,
                               const Eigen::MatrixXd& E, const StatsView& stats, double lambda);
Eigen::MatrixXd instantaneous_gradient(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& K,
                                       const Eigen::MatrixXd& E, const StatsView& stats,
                                       double lambda);
Eigen::MatrixXd instantaneous_hessian_vector(const Eigen::MatrixXd& K, const Eigen::MatrixXd& E,
                                             const StatsView& stats, double lambda,
                                             const Eigen::MatrixXd& v);

SgdResult sgd_train(const Dataset& data, const SgdConfig& config, std::uint64_t seed);

void write_sgd_log(std::ostream& os, const std::vector<SgdLogRow>& log);

}  // namespace combi
