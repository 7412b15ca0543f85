#include "combi/partition.hpp"

#include "combi/error.hpp"
#include "combi/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <sstream>

namespace combi {

namespace {

Eigen::MatrixXd embedding_rows(const StructureSpace& space, const std::vector<Structure>& ys) {
  Eigen::MatrixXd E(static_cast<long>(ys.size()), space.dim());
  for (std::size_t i = 0; i < ys.size(); ++i) E.row(static_cast<long>(i)) = embed(space, ys[i]).transpose();
  return E;
}

void check_tilt(const StructureSpace& space, const Tilt& tilt) {
  if (tilt.wx.size() != space.dim()) throw ValidationError("tilt dimension does not match the space");
  if (!tilt.wx.allFinite()) throw ValidationError("tilt has non-finite entries");
}

// values[k] = term(k), filled in parallel or serially; any exception is rethrown after the loop
template <class F>
std::vector<double> farm(long count, bool parallel, F&& term) {
  std::vector<double> out(static_cast<std::size_t>(count));
  std::exception_ptr err;
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long k = 0; k < count; ++k) {
      try {
        out[k] = term(k);
      } catch (...) {
#pragma omp critical(combi_farm_error)
        if (!err) err = std::current_exception();
      }
    }
  } else {
    for (long k = 0; k < count; ++k) out[k] = term(k);
  }
  if (err) std::rethrow_exception(err);
  return out;
}

struct Telescope {
  double log_ratio_product = 0.0;
  int levels = 0;
  long samples = 0;
  std::vector<LevelStats> stats;
};

Telescope telescope(const StructureSpace& space, const Tilt& tilt, const FprasConfig& cfg,
                    const LevelSampler& sampler, const Rng& rng) {
  if (!(cfg.epsilon > 0)) throw ValidationError("epsilon must be positive");
  Telescope out;
  if (tilt.bound <= 0) {
    out.levels = 1;
    out.stats.push_back({0.0, 1.0, 1.0, 0.0, 1.0, 1.0});
    return out;
  }
  CoolingSchedule sched = cooling_schedule(tilt.bound, 1.0, cfg.p, cfg.form);
  out.levels = sched.levels();
  out.samples = cfg.samples_override > 0 ? cfg.samples_override : fpras_sample_size(cfg.epsilon, out.levels, cfg.p);
  for (int i = 1; i <= out.levels; ++i) {
    double b0 = sched.betas[i - 1], b1 = sched.betas[i];
    Tilt level = tilt.scaled(b1);
    Rng lr = rng.split(static_cast<std::uint64_t>(i));
    auto f = farm(out.samples, cfg.parallel, [&](long k) {
      Rng r = lr.split(static_cast<std::uint64_t>(k));
      Structure y = sampler(level, r);
      return std::exp((b0 - b1) * tilt.score(space, y));
    });
    LevelStats st{b0, b1, 0, 0, *std::min_element(f.begin(), f.end()), *std::max_element(f.begin(), f.end())};
    st.mean = pairwise_sum(f) / static_cast<double>(f.size());
    if (f.size() > 1) {
      std::vector<double> dev(f.size());
      for (std::size_t k = 0; k < f.size(); ++k) dev[k] = (f[k] - st.mean) * (f[k] - st.mean);
      st.variance = pairwise_sum(dev) / static_cast<double>(f.size() - 1);
    }
    out.log_ratio_product += std::log(st.mean);
    out.stats.push_back(st);
  }
  return out;
}

ZEstimate finish(const Telescope& t, double log_base, double epsilon) {
  ZEstimate z;
  z.log_value = log_base - t.log_ratio_product;
  z.value = std::exp(z.log_value);
  z.epsilon = epsilon;
  z.samples_per_level = t.samples;
  z.levels = t.levels;
  z.level = t.stats;
  return z;
}

}  // namespace

double exact_partition(const StructureSpace& space, const Tilt& tilt, std::uint64_t limit) {
  check_tilt(space, tilt);
  auto ys = enumerate_small(space, limit);
  return blocked_sum(ys.size(), [&](std::size_t i) { return std::exp(tilt.score(space, ys[i])); });
}

double exact_partition_serial(const StructureSpace& space, const Tilt& tilt, std::uint64_t limit) {
  check_tilt(space, tilt);
  auto ys = enumerate_small(space, limit);
  return blocked_sum_serial(ys.size(), [&](std::size_t i) { return std::exp(tilt.score(space, ys[i])); });
}

double exact_partition(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                       std::uint64_t limit) {
  return exact_partition(space, model.tilt(x), limit);
}

CoolingSchedule cooling_schedule(double R, double w_norm, int p, ScheduleForm form) {
  if (p < 3) throw ValidationError("cooling parameter p must be >= 3");
  if (!(R >= 0) || !(w_norm >= 0) || !std::isfinite(R * w_norm)) throw ValidationError("R and |w| must be finite and >= 0");
  CoolingSchedule s;
  s.p = p;
  double rw = R * w_norm;
  s.q = p * rw;
  if (rw == 0) {
    s.betas = {0.0, 1.0};
    return s;
  }
  long last = form == ScheduleForm::listed ? static_cast<long>(p * std::floor(rw)) : static_cast<long>(std::ceil(s.q)) - 1;
  for (long j = 0; j <= last; ++j) {
    double b = static_cast<double>(j) / s.q;
    if (b < 1.0) s.betas.push_back(b);
  }
  s.betas.push_back(1.0);
  return s;
}

long fpras_sample_size(double epsilon, int levels, int p) {
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  return static_cast<long>(std::ceil(65.0 / (epsilon * epsilon) * levels * std::exp(2.0 / p)));
}

LevelSampler cftp_level_sampler(const StructureSpace& space, UniformSampler uniform, double budget) {
  return [space, uniform = std::move(uniform), budget](const Tilt& t, Rng& r) {
    return cftp_sample(space, t, uniform, r, budget).sample;
  };
}

LevelSampler chain_level_sampler(const StructureSpace& space, UniformSampler uniform, long steps) {
  if (steps < 0) throw ValidationError("chain steps must be >= 0");
  return [space, uniform = std::move(uniform), steps](const Tilt& t, Rng& r) {
    return chain_sample(space, t, uniform, steps, r);
  };
}

LevelSampler exact_level_sampler(const StructureSpace& space, std::uint64_t limit) {
  auto ys = std::make_shared<const std::vector<Structure>>(enumerate_small(space, limit));
  auto E = std::make_shared<const Eigen::MatrixXd>(embedding_rows(space, *ys));
  return [ys, E](const Tilt& t, Rng& r) {
    Eigen::VectorXd s = *E * t.wx;
    double top = s.maxCoeff();
    std::vector<double> cum(static_cast<std::size_t>(s.size()));
    double acc = 0;
    for (long i = 0; i < s.size(); ++i) cum[i] = acc += std::exp(s[i] - top);
    double u = r.uniform01() * acc;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
    return (*ys)[idx];
  };
}

ZEstimate estimate_partition(const StructureSpace& space, const Tilt& tilt, const FprasConfig& cfg,
                             const LevelSampler& sampler, const Rng& rng) {
  check_tilt(space, tilt);
  BigInt count = cardinality(space);
  ZEstimate z = finish(telescope(space, tilt, cfg, sampler, rng), log_bigint(count), cfg.epsilon);
  if (tilt.bound <= 0) z.value = to_double(count);  // every f_i is 1
  return z;
}

ZEstimate estimate_partition(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                             double epsilon, const Rng& rng, int p) {
  FprasConfig cfg;
  cfg.epsilon = epsilon;
  cfg.p = p;
  return estimate_partition(space, model.tilt(x), cfg, cftp_level_sampler(space, uniform_sampler_for(space)), rng);
}

long approx_chain_steps(double bound, double epsilon, int levels, int p) {
  if (bound <= 0) return 0;
  double target = epsilon / (5.0 * levels * std::exp(2.0 / p));
  return coupling_mixing_bound(bound, 1.0, std::min(target, 1.0));
}

ZEstimate estimate_partition_approx_sampler(const ExpFamilyModel& model, const Eigen::VectorXd& x,
                                            const StructureSpace& space, double epsilon, long chain_steps,
                                            const Rng& rng, int p) {
  Tilt t = model.tilt(x);
  FprasConfig cfg;
  cfg.epsilon = epsilon;
  cfg.p = p;
  if (chain_steps <= 0) {
    int l = cooling_schedule(t.bound, 1.0, p, cfg.form).levels();
    chain_steps = approx_chain_steps(t.bound, epsilon, l, p);
  }
  return estimate_partition(space, t, cfg, chain_level_sampler(space, uniform_sampler_for(space), chain_steps), rng);
}

std::vector<double> exact_level_ratios(const StructureSpace& space, const Tilt& tilt, const CoolingSchedule& sched,
                                       std::uint64_t limit) {
  check_tilt(space, tilt);
  auto ys = enumerate_small(space, limit);
  Eigen::VectorXd s = embedding_rows(space, ys) * tilt.wx;
  auto z_at = [&](double beta) {
    return blocked_sum(static_cast<std::size_t>(s.size()), [&](std::size_t i) { return std::exp(beta * s[i]); });
  };
  std::vector<double> out;
  for (int i = 1; i <= sched.levels(); ++i) out.push_back(z_at(sched.betas[i - 1]) / z_at(sched.betas[i]));
  return out;
}

double taylor_partition(const StructureSpace& space, const EmbeddingStats& stats, const Eigen::VectorXd& wx,
                        bool literal) {
  if (!space.indicator_embedding())
    throw ValidationError("taylor partition needs a 0/1 embedding; " + family_name(space.family()) +
                          " uses signed features");
  if (wx.size() != stats.dim()) throw ValidationError("weight dimension does not match the statistics");
  double c = literal ? 1.0 : 0.5;
  return to_double(stats.count) + wx.dot(stats.psi) + c * wx.dot(stats.C * wx);
}

double taylor_partition(const StructureSpace& space, const EmbeddingStats& stats, const ExpFamilyModel& model,
                        const Eigen::VectorXd& x, bool literal) {
  return taylor_partition(space, stats, model.weight_for(x), literal);
}

double taylor_remainder_bound(const StructureSpace& space, const Tilt& tilt, std::uint64_t limit) {
  check_tilt(space, tilt);
  auto ys = enumerate_small(space, limit);
  return blocked_sum(ys.size(), [&](std::size_t i) {
    double f = tilt.score(space, ys[i]);
    return std::exp(std::max(0.0, f)) * std::abs(f * f * f) / 6.0;
  });
}

long hoeffding_sample_size(double R, double G, double delta, double epsilon) {
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta must lie in (0, 1)");
  if (!(epsilon > 0)) throw ValidationError("epsilon must be positive");
  if (!(R >= 0) || !(G >= 0)) throw ValidationError("R and G must be >= 0");
  return std::max(1L, static_cast<long>(std::ceil(2.0 * R * R * G * G * std::log(2.0 / delta) / (epsilon * epsilon))));
}

double hoeffding_gradient_dot(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space,
                              const Eigen::VectorXd& z, double delta, double epsilon, const LevelSampler& sampler,
                              const Rng& rng) {
  if (z.size() != model.w.size()) throw ValidationError("direction has the wrong length");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Z(z.data(), model.d,
                                                                                             model.n);
  Eigen::VectorXd zx = Z * x;
  long S = hoeffding_sample_size(model.R, z.norm(), delta, epsilon);
  Tilt t = model.tilt(x);
  auto vals = farm(S, true, [&](long k) {
    Rng r = rng.split(static_cast<std::uint64_t>(k));
    return zx.dot(embed(space, sampler(t, r)));
  });
  return pairwise_sum(vals) / static_cast<double>(S);
}

double estimate_moment(const ExpFamilyModel& model, const Eigen::VectorXd& x, const StructureSpace& space, int j,
                       double epsilon, double gamma, const Rng& rng, int p) {
  if (!space.indicator_embedding())
    throw ValidationError("moment estimation needs a 0/1 embedding so that phi_j is one-signed on its support");
  if (j < 0 || j >= model.d * model.n) throw ValidationError("feature index out of range");
  if (x.size() != model.n) throw ValidationError("input dimension does not match the model");
  int l = j / model.n, k = j % model.n;
  double xk = x[k];
  if (std::abs(xk) < gamma || xk == 0.0)
    throw ValidationError("feature " + std::to_string(j) + " is below gamma on its whole support");
  BigInt support = psi_sum_exact(space)[l];
  if (support == 0) return 0.0;
  Tilt t = model.tilt(x);
  UniformSampler uniform = uniform_sampler_for(space);
  UniformSampler restricted = [space, uniform, l](Rng& r) {
    for (;;) {
      Structure y = uniform(r);
      if (embed_int(space, y)[l] != 0) return y;
    }
  };
  FprasConfig cfg;
  cfg.epsilon = epsilon;
  cfg.p = p;
  // phi_j = x_k on the support, so ln phi_j is a constant shift and the schedule of Z applies unchanged
  Telescope sub = telescope(space, t, cfg, cftp_level_sampler(space, restricted), rng);
  Telescope full = telescope(space, t, cfg, cftp_level_sampler(space, uniform), rng);
  double log_ratio = (log_bigint(support) - sub.log_ratio_product) -
                     (log_bigint(cardinality(space)) - full.log_ratio_product);
  return xk * std::exp(log_ratio);
}

double weight_norm_bound(const StructureSpace& space, double lambda) {
  if (!(lambda > 0)) throw ValidationError("lambda must be positive");
  return std::sqrt(log_bigint(cardinality(space)) / lambda);
}

}  // namespace combi
