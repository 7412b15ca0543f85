#pragma once

#include "combi/io.hpp"
#include "combi/online.hpp"
#include "combi/ridge.hpp"
#include "combi/rng.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace combi {

// n antisymmetric reward matrices over Σ x Σ with entries in [-1, 1]
struct DicyclePolicy {
  int sigma = 0;
  std::vector<Eigen::MatrixXd> A;

  Eigen::MatrixXd reward(const Eigen::VectorXd& x) const;
  // entry pair_index(u,v) = reward(x)(u,v) for u < v; <r, psi(y)> is the reward of y
  Eigen::VectorXd pair_vector(const Eigen::VectorXd& x) const;
};

struct DicycleData {
  Dataset train;
  Eigen::MatrixXd test_inputs;
  DicyclePolicy policy;
  int best_of = 200;
};

DicycleData generate_dicycle_dataset(int n, int m, int m_test, int sigma_size, int labels_per_instance, Rng& rng,
                                     int best_of = 200);

struct CosineReport {
  double mean = 0.0;
  int zero_norm = 0;  // instances whose learned weight vanished (counted as 0)
};
CosineReport eval_policy_cosine(const RidgeModel& model, const Eigen::MatrixXd& test_inputs,
                                const DicyclePolicy& policy);

double hierarchical_loss(const std::vector<int>& z, const std::vector<int>& y, const Tree& tree);

struct SetLosses {
  double zero_one = 0.0;
  double hamming = 0.0;
  double ranking = 0.0;
};
// fraction of (relevant, irrelevant) pairs ordered wrongly; ties count 1/2
double ranking_loss(const Eigen::VectorXd& scores, const std::vector<int>& relevant);
// ranking uses `scores` when given, else the 0/1 prediction z
SetLosses set_losses(const std::vector<int>& z, const std::vector<int>& y, const Eigen::VectorXd* scores = nullptr);

struct PlantedMultilabel {
  Dataset data;
  Eigen::MatrixXd W;  // d_labels x d_features
};
// x uniform on the unit sphere; W rows share a common direction (label correlation);
// label l is on iff (W x)_l + noise * N(0,1) > 0.
PlantedMultilabel generate_multilabel_dataset(int m, int d_features, int d_labels, double noise, Rng& rng);

struct PlantedHierarchy {
  Dataset data;
  Tree tree;
};
// random taxonomy; labels are the best root subtree under W x + noise
PlantedHierarchy generate_hierarchy_dataset(int m, int d_features, int nodes, double noise, Rng& rng);

Dataset take_first(const Dataset& data, int m);

// Runs config["experiment"] in {dicycle, multilabel, hierarchical, sgd_vs_ncg}.
// Writes <output>/results.csv, <output>/config.json and <output>/timings.csv.
void run_experiment(const json& config);

}  // namespace combi
