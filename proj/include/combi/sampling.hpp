#pragma once

#include "combi/counting.hpp"
#include "combi/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace combi {

using UniformSampler = std::function<Structure(Rng&)>;

Structure uniform_hypercube(int d, Rng& rng);
Structure uniform_permutation(int d, Rng& rng);
// uniform over directed simple cycles on >= 3 of n labeled vertices
Structure uniform_cyclic(int n, Rng& rng);
Structure uniform_subtree(const Tree& tree, const std::vector<BigInt>& f, bool include_empty, Rng& rng);
Structure uniform_subtree(const Tree& tree, bool include_empty, Rng& rng);

// Exact uniform sampler for any family with a closed-form count.
UniformSampler uniform_sampler_for(const StructureSpace& space);

// largest ||psi(y)|| over the space
double max_embedding_norm(const StructureSpace& space);

// p(y) ∝ exp(<wx, psi(y)>) with |<wx, psi(y)>| <= bound for all y
struct Tilt {
  Eigen::VectorXd wx;
  double bound = 0.0;

  double score(const StructureSpace& space, const Structure& y) const;
  Tilt scaled(double beta) const { return {beta * wx, beta * bound}; }
};

// w is the row-major flattening of a d x n matrix W, so <w, psi ⊗ x> = psi^T W x.
struct ExpFamilyModel {
  Eigen::VectorXd w;
  int d = 0;
  int n = 0;
  double R = 0.0;  // ||phi(x,y)|| <= R
  double B = 0.0;  // ||w|| <= B

  static ExpFamilyModel make(const StructureSpace& space, Eigen::VectorXd w, int n_features,
                             double x_norm_bound);
  Eigen::VectorXd weight_for(const Eigen::VectorXd& x) const;
  Tilt tilt(const Eigen::VectorXd& x) const;
  double score(const StructureSpace& space, const Eigen::VectorXd& x, const Structure& y) const;
};

struct ChainState {
  Structure current;
  long step = 0;
  std::uint64_t rng_cursor = 0;
};

ChainState meta_step(const ChainState& state, const StructureSpace& space, const Tilt& tilt,
                     const UniformSampler& sampler, Rng& rng);
ChainState meta_step(const ChainState& state, const ExpFamilyModel& model, const Eigen::VectorXd& x,
                     const StructureSpace& space, const UniformSampler& sampler, Rng& rng);

struct CftpResult {
  Structure sample;
  long coalescence_steps = 0;  // distance into the past of the coalescing update
  long work = 0;               // proposals evaluated
};

// budget <= 0 selects 100 exp(2 bound)
CftpResult cftp_sample(const StructureSpace& space, const Tilt& tilt, const UniformSampler& sampler,
                       Rng& rng, double budget = 0.0);
CftpResult cftp_sample(const ExpFamilyModel& model, const Eigen::VectorXd& x,
                       const StructureSpace& space, const UniformSampler& sampler, Rng& rng,
                       double budget = 0.0);

// Meta chain started from a uniform state, run for `steps` transitions.
Structure chain_sample(const StructureSpace& space, const Tilt& tilt, const UniformSampler& sampler,
                       long steps, Rng& rng);

long coupling_mixing_bound(double B, double R, double epsilon);

using LogDensity = std::function<double(const std::vector<int>& bits)>;
ChainState mc_cube_step(const ChainState& state, const LogDensity& log_pi, Rng& rng);

// Exact transition matrices over enumerate_small order / mask order.
Eigen::MatrixXd meta_transition_matrix(const StructureSpace& space, const Tilt& tilt,
                                       const std::vector<Structure>& states);
Eigen::MatrixXd mc_cube_transition_matrix(int d, const LogDensity& log_pi);

}  // namespace combi
