#pragma once

#include "combi/counting.hpp"
#include "combi/rng.hpp"
#include "combi/sampling.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace combi {

// Z = sum_y exp(<wx, psi(y)>) by enumeration.
double exact_partition(const StructureSpace& space, const Tilt& tilt, std::uint64_t limit = kEnumerationLimit);
double exact_partition_serial(const StructureSpace& space, const Tilt& tilt,
                              std::uint64_t limit = kEnumerationLimit);
double exact_partition(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                       std::uint64_t limit = kEnumerationLimit);

enum class ScheduleForm {
  listed,       // 0, 1/q, ..., p*floor(R|w|)/q, 1
  bounded_gap,  // j/q for j/q < 1, then 1; every gap <= 1/q
};

struct CoolingSchedule {
  std::vector<double> betas;
  double q = 0.0;
  int p = 3;

  int levels() const { return static_cast<int>(betas.size()) - 1; }
};

CoolingSchedule cooling_schedule(double R, double w_norm, int p, ScheduleForm form = ScheduleForm::listed);

long fpras_sample_size(double epsilon, int levels, int p);

// draws from p(y) ∝ exp(<tilt.wx, psi(y)>); must be safe to call concurrently
using LevelSampler = std::function<Structure(const Tilt&, Rng&)>;

LevelSampler cftp_level_sampler(const StructureSpace& space, UniformSampler uniform, double budget = 0.0);
LevelSampler chain_level_sampler(const StructureSpace& space, UniformSampler uniform, long steps);
LevelSampler exact_level_sampler(const StructureSpace& space, std::uint64_t limit = kEnumerationLimit);

struct LevelStats {
  double beta_from = 0.0;
  double beta_to = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance of f_i
  double min_f = 0.0;
  double max_f = 0.0;
};

struct ZEstimate {
  double value = 0.0;
  double log_value = 0.0;
  double epsilon = 0.0;
  long samples_per_level = 0;
  int levels = 0;
  std::vector<LevelStats> level;
  std::string confidence = "(1+-eps) with probability >= 3/4";
};

struct FprasConfig {
  double epsilon = 0.5;
  int p = 3;
  ScheduleForm form = ScheduleForm::bounded_gap;
  long samples_override = 0;  // > 0 replaces the computed S
  bool parallel = true;
};

// Telescoping estimate Z = |Y| / prod rho_i with rho_i = E_{beta_i}[exp((beta_{i-1}-beta_i) s(y))].
// Sample k of level i draws from rng.split(i).split(k).
ZEstimate estimate_partition(const StructureSpace& space, const Tilt& tilt, const FprasConfig& cfg,
                             const LevelSampler& sampler, const Rng& rng);
ZEstimate estimate_partition(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                             double epsilon, const Rng& rng, int p = 3);

// Meta chain steps giving per-level variation distance eps / (5 l exp(2/p)).
long approx_chain_steps(double bound, double epsilon, int levels, int p);
ZEstimate estimate_partition_approx_sampler(const ExpFamilyModel& model, const Eigen::VectorXd& x,
                                            const StructureSpace& space, double epsilon, long chain_steps,
                                            const Rng& rng, int p = 3);

// rho_i computed by enumeration for every level of the schedule
std::vector<double> exact_level_ratios(const StructureSpace& space, const Tilt& tilt, const CoolingSchedule& sched,
                                       std::uint64_t limit = kEnumerationLimit);

// |Y| + <wx, Psi> + c * wx^T C wx with c = 1/2, or c = 1 when literal is set
double taylor_partition(const StructureSpace& space, const EmbeddingStats& stats, const Eigen::VectorXd& wx,
                        bool literal = false);
double taylor_partition(const StructureSpace& space, const EmbeddingStats& stats, const ExpFamilyModel& model,
                        const Eigen::VectorXd& x, bool literal = false);
// sum_y exp(max(0, f)) |f|^3 / 6, a bound on |Z - taylor|
double taylor_remainder_bound(const StructureSpace& space, const Tilt& tilt, std::uint64_t limit = kEnumerationLimit);

long hoeffding_sample_size(double R, double G, double delta, double epsilon);
// mean of <phi(x,y), z> under p(y|x,w); z is the row-major flattening of a d x n matrix
double hoeffding_gradient_dot(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                              const Eigen::VectorXd& z, double delta, double epsilon, const LevelSampler& sampler,
                              const Rng& rng);

// Z_j / Z for feature j = l*n + k (psi_l(y) x_k) of an indicator family
double estimate_moment(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space, int j,
                       double epsilon, double gamma, const Rng& rng, int p = 3);

double weight_norm_bound(const StructureSpace& space, double lambda);

}  // namespace combi
