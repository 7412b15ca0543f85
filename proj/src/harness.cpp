#include "combi/harness.hpp"

#include "combi/decode.hpp"
#include "combi/error.hpp"
#include "combi/parallel.hpp"
#include "combi/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace combi {

Eigen::MatrixXd DicyclePolicy::reward(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<long>(A.size())) throw ValidationError("input dimension does not match the policy");
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(sigma, sigma);
  for (std::size_t j = 0; j < A.size(); ++j) R += x[static_cast<long>(j)] * A[j];
  return R;
}

Eigen::VectorXd DicyclePolicy::pair_vector(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd R = reward(x);
  Eigen::VectorXd r(pair_count(sigma));
  for (int u = 0; u < sigma; ++u)
    for (int v = u + 1; v < sigma; ++v) r[pair_index(u, v, sigma)] = R(u, v);
  return r;
}

DicycleData generate_dicycle_dataset(int n, int m, int m_test, int sigma_size, int labels_per_instance, Rng& rng,
                                     int best_of) {
  if (sigma_size < 3) throw ValidationError("sigma_size must be >= 3");
  if (n < 1 || m < 1 || m_test < 0) throw ValidationError("dataset sizes must be positive");
  if (best_of < 1) throw ValidationError("best_of must be >= 1");
  if (labels_per_instance < 1 || labels_per_instance > best_of)
    throw ValidationError("labels_per_instance must lie in [1, best_of]");
  DicycleData out;
  out.best_of = best_of;
  out.policy.sigma = sigma_size;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(sigma_size, sigma_size);
    for (int u = 0; u < sigma_size; ++u)
      for (int v = u + 1; v < sigma_size; ++v) {
        A(u, v) = 2.0 * rng.uniform01() - 1.0;
        A(v, u) = -A(u, v);
      }
    out.policy.A.push_back(std::move(A));
  }
  StructureSpace space = StructureSpace::directed_cycles(sigma_size);
  out.train.space = space;
  out.train.inputs.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out.train.inputs(i, j) = rng.uniform01();
    Eigen::VectorXd r = out.policy.pair_vector(out.train.inputs.row(i).transpose());
    std::vector<std::pair<double, Structure>> cand;
    for (int k = 0; k < best_of; ++k) {
      Structure y = uniform_cyclic(sigma_size, rng);
      cand.emplace_back(r.dot(embed(space, y)), std::move(y));
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Structure> ys;
    for (const auto& c : cand) {
      if (static_cast<int>(ys.size()) == labels_per_instance) break;
      if (std::find(ys.begin(), ys.end(), c.second) == ys.end()) ys.push_back(c.second);
    }
    out.train.labels.push_back(std::move(ys));
  }
  out.test_inputs.resize(m_test, n);
  for (int i = 0; i < m_test; ++i)
    for (int j = 0; j < n; ++j) out.test_inputs(i, j) = rng.uniform01();
  return out;
}

CosineReport eval_policy_cosine(const RidgeModel& model, const Eigen::MatrixXd& test_inputs,
                                const DicyclePolicy& policy) {
  if (model.space.family() != Family::directed_cycles || model.space.size() != policy.sigma)
    throw ValidationError("model is not a dicycle model over the policy alphabet");
  CosineReport rep;
  if (test_inputs.rows() == 0) return rep;
  std::vector<double> cos(static_cast<std::size_t>(test_inputs.rows()), 0.0);
  for (long i = 0; i < test_inputs.rows(); ++i) {
    Eigen::VectorXd x = test_inputs.row(i).transpose();
    Eigen::VectorXd f = model.weight_for(x);
    Eigen::VectorXd r = policy.pair_vector(x);
    double nf = f.norm(), nr = r.norm();
    if (nf == 0.0 || nr == 0.0) {
      ++rep.zero_norm;
      continue;
    }
    cos[i] = std::clamp(f.dot(r) / (nf * nr), -1.0, 1.0);
  }
  if (rep.zero_norm > 0)
    std::cerr << "warning: " << rep.zero_norm << " test instances have a zero-norm policy; counted as cosine 0\n";
  rep.mean = pairwise_sum(cos) / static_cast<double>(cos.size());
  return rep;
}

double hierarchical_loss(const std::vector<int>& z, const std::vector<int>& y, const Tree& tree) {
  int n = tree.size();
  if (static_cast<int>(z.size()) != n || static_cast<int>(y.size()) != n)
    throw ValidationError("microlabel vectors must have one entry per taxonomy node");
  double loss = 0;
  for (int i = 0; i < n; ++i) {
    if (z[i] == y[i]) continue;
    bool ancestors_agree = true;
    for (int a = tree.parent[i]; a != -1 && ancestors_agree; a = tree.parent[a]) ancestors_agree = z[a] == y[a];
    if (ancestors_agree) loss += 1;
  }
  return loss;
}

double ranking_loss(const Eigen::VectorXd& scores, const std::vector<int>& relevant) {
  if (static_cast<long>(relevant.size()) != scores.size()) throw ValidationError("scores and relevance differ in length");
  double bad = 0;
  long pairs = 0;
  for (long p = 0; p < scores.size(); ++p) {
    if (!relevant[p]) continue;
    for (long q = 0; q < scores.size(); ++q) {
      if (relevant[q]) continue;
      ++pairs;
      if (scores[p] < scores[q])
        bad += 1;
      else if (scores[p] == scores[q])
        bad += 0.5;
    }
  }
  return pairs ? bad / static_cast<double>(pairs) : 0.0;
}

SetLosses set_losses(const std::vector<int>& z, const std::vector<int>& y, const Eigen::VectorXd* scores) {
  if (z.size() != y.size() || z.empty()) throw ValidationError("set vectors must be non-empty and equal length");
  SetLosses out;
  long diff = 0;
  for (std::size_t i = 0; i < z.size(); ++i) diff += z[i] != y[i];
  out.zero_one = diff ? 1.0 : 0.0;
  out.hamming = static_cast<double>(diff) / static_cast<double>(z.size());
  Eigen::VectorXd s(static_cast<long>(z.size()));
  for (std::size_t i = 0; i < z.size(); ++i) s[static_cast<long>(i)] = z[i];
  out.ranking = ranking_loss(scores ? *scores : s, y);
  return out;
}

PlantedMultilabel generate_multilabel_dataset(int m, int d_features, int d_labels, double noise, Rng& rng) {
  if (m < 1 || d_features < 1 || d_labels < 1) throw ValidationError("dataset sizes must be positive");
  if (!(noise >= 0)) throw ValidationError("noise must be >= 0");
  PlantedMultilabel out;
  Eigen::VectorXd common(d_features);
  for (int j = 0; j < d_features; ++j) common[j] = rng.normal();
  out.W.resize(d_labels, d_features);
  for (int l = 0; l < d_labels; ++l)
    for (int j = 0; j < d_features; ++j) out.W(l, j) = 0.6 * common[j] + 0.8 * rng.normal();
  out.data.space = StructureSpace::multilabel(d_labels);
  out.data.inputs.resize(m, d_features);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d_features; ++j) out.data.inputs(i, j) = rng.normal();
    out.data.inputs.row(i) /= std::max(out.data.inputs.row(i).norm(), 1e-300);
    Eigen::VectorXd s = out.W * out.data.inputs.row(i).transpose();
    Structure y{Family::multilabel, std::vector<int>(d_labels)};
    for (int l = 0; l < d_labels; ++l) y.data[l] = s[l] + noise * rng.normal() > 0;
    out.data.labels.push_back({std::move(y)});
  }
  return out;
}

PlantedHierarchy generate_hierarchy_dataset(int m, int d_features, int nodes, double noise, Rng& rng) {
  if (m < 1 || d_features < 1 || nodes < 1) throw ValidationError("dataset sizes must be positive");
  std::vector<int> parent(nodes, -1);
  for (int v = 1; v < nodes; ++v) parent[v] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(v)));
  PlantedHierarchy out;
  out.tree = Tree::from_parents(parent);
  StructureSpace space = StructureSpace::subtrees(out.tree);
  Eigen::MatrixXd W(nodes, d_features);
  for (int v = 0; v < nodes; ++v)
    for (int j = 0; j < d_features; ++j) W(v, j) = rng.normal();
  out.data.space = space;
  out.data.inputs.resize(m, d_features);
  Rng unused(0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d_features; ++j) out.data.inputs(i, j) = rng.normal();
    Eigen::VectorXd s = W * out.data.inputs.row(i).transpose();
    for (int v = 0; v < nodes; ++v) s[v] += noise * rng.normal();
    out.data.labels.push_back({decode_for_predict(space, LinearScorer(s), unused).result.y});
  }
  return out;
}

Dataset take_first(const Dataset& data, int m) {
  if (m < 1 || m > data.size()) throw ValidationError("subset size outside [1, m]");
  Dataset out;
  out.space = data.space;
  out.inputs = data.inputs.topRows(m);
  if (data.gram) out.gram = data.gram->topLeftCorner(m, m);
  out.labels.assign(data.labels.begin(), data.labels.begin() + m);
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

KernelSpec kernel_from_config(const json& c) {
  std::string t = c.value("kernel", std::string("linear"));
  if (t == "linear") return KernelSpec::linear_kernel();
  if (t == "rbf") return KernelSpec::rbf_kernel(c.value("gamma", 1.0));
  if (t == "polynomial") return KernelSpec::polynomial_kernel(c.value("degree", 2), c.value("offset", 1.0));
  throw ValidationError("unknown kernel '" + t + "'");
}

TrainConfig train_config(const json& c) {
  TrainConfig tc;
  tc.kernel = kernel_from_config(c);
  if (c.contains("lambda")) tc.lambda = c["lambda"].get<double>();
  tc.normalize = c.value("normalize", false);
  tc.ncg.tol = c.value("tol", tc.ncg.tol);
  tc.ncg.max_iter = c.value("max_iter", tc.ncg.max_iter);
  return tc;
}

class Stopwatch {
public:
  void start(std::string stage) {
    stage_ = std::move(stage);
    t0_ = std::chrono::steady_clock::now();
  }
  void stop() {
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    rows_ << stage_ << "," << num(s) << "\n";
  }
  const std::string& stage() const { return stage_; }
  std::string csv() const { return "stage,seconds\n" + rows_.str(); }

private:
  std::string stage_ = "setup";
  std::chrono::steady_clock::time_point t0_;
  std::ostringstream rows_;
};

int positive(const json& c, const char* key, int def) {
  int v = c.value(key, def);
  if (v < 1) throw ValidationError(std::string(key) + " must be positive");
  return v;
}

std::string run_dicycle(const json& c, std::uint64_t seed, Stopwatch& sw) {
  int n = positive(c, "n", 15), sigma = positive(c, "sigma_size", 10), m_test = positive(c, "m_test", 500);
  int seeds = positive(c, "seeds", 5), lpi = positive(c, "labels_per_instance", 1), K = positive(c, "best_of", 200);
  std::vector<int> sizes = c.value("sizes", std::vector<int>{50, 100, 200, 400});
  if (sizes.empty()) throw ValidationError("sizes must be non-empty");
  for (int s : sizes)
    if (s < 1) throw ValidationError("sizes must be positive");
  json tcj = c;
  if (!tcj.contains("normalize")) tcj["normalize"] = true;
  TrainConfig tc = train_config(tcj);
  int m_max = *std::max_element(sizes.begin(), sizes.end());
  std::ostringstream csv;
  csv << "seed,m,cosine,zero_norm,best_of\n";
  for (int s = 0; s < seeds; ++s) {
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(s));
    sw.start("generate seed " + std::to_string(s));
    DicycleData dd = generate_dicycle_dataset(n, m_max, m_test, sigma, lpi, rng, K);
    sw.stop();
    for (int m : sizes) {
      sw.start("train seed " + std::to_string(s) + " m " + std::to_string(m));
      RidgeModel model = train_ncg(take_first(dd.train, m), tc);
      sw.stop();
      sw.start("evaluate seed " + std::to_string(s) + " m " + std::to_string(m));
      CosineReport rep = eval_policy_cosine(model, dd.test_inputs, dd.policy);
      sw.stop();
      csv << s << "," << m << "," << num(rep.mean) << "," << rep.zero_norm << "," << K << "\n";
    }
  }
  return csv.str();
}

std::string run_multilabel(const json& c, std::uint64_t seed, Stopwatch& sw) {
  int m = positive(c, "m", 200), m_test = positive(c, "m_test", 200), dx = positive(c, "d_features", 10);
  int dl = positive(c, "d_labels", 5), seeds = positive(c, "seeds", 1);
  double noise = c.value("noise", 0.1);
  TrainConfig tc = train_config(c);
  std::ostringstream csv;
  csv << "seed,m,zero_one,hamming,ranking\n";
  for (int s = 0; s < seeds; ++s) {
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(s));
    sw.start("generate seed " + std::to_string(s));
    PlantedMultilabel pm = generate_multilabel_dataset(m + m_test, dx, dl, noise, rng);
    sw.stop();
    sw.start("train seed " + std::to_string(s));
    RidgeModel model = train_ncg(take_first(pm.data, m), tc);
    sw.stop();
    sw.start("evaluate seed " + std::to_string(s));
    SetLosses total;
    for (int i = m; i < m + m_test; ++i) {
      Eigen::VectorXd w = model.weight_for(pm.data.inputs.row(i).transpose());
      Rng dr(0);
      Structure z = decode_for_predict(model.space, LinearScorer(w), dr).result.y;
      SetLosses l = set_losses(z.data, pm.data.labels[i][0].data, &w);
      total.zero_one += l.zero_one;
      total.hamming += l.hamming;
      total.ranking += l.ranking;
    }
    sw.stop();
    csv << s << "," << m << "," << num(total.zero_one / m_test) << "," << num(total.hamming / m_test) << ","
        << num(total.ranking / m_test) << "\n";
  }
  return csv.str();
}

std::string run_hierarchical(const json& c, std::uint64_t seed, Stopwatch& sw) {
  int m = positive(c, "m", 200), m_test = positive(c, "m_test", 200), dx = positive(c, "d_features", 10);
  int nodes = positive(c, "nodes", 15), seeds = positive(c, "seeds", 1);
  double noise = c.value("noise", 0.3);
  TrainConfig tc = train_config(c);
  std::ostringstream csv;
  csv << "seed,m,loss_zero_one,loss_delta,loss_h\n";
  for (int s = 0; s < seeds; ++s) {
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(s));
    sw.start("generate seed " + std::to_string(s));
    PlantedHierarchy ph = generate_hierarchy_dataset(m + m_test, dx, nodes, noise, rng);
    sw.stop();
    sw.start("train seed " + std::to_string(s));
    RidgeModel model = train_ncg(take_first(ph.data, m), tc);
    sw.stop();
    sw.start("evaluate seed " + std::to_string(s));
    double l01 = 0, ld = 0, lh = 0;
    for (int i = m; i < m + m_test; ++i) {
      Eigen::VectorXd w = model.weight_for(ph.data.inputs.row(i).transpose());
      Rng dr(0);
      const auto& z = decode_for_predict(model.space, LinearScorer(w), dr).result.y.data;
      const auto& y = ph.data.labels[i][0].data;
      SetLosses sl = set_losses(z, y);
      l01 += sl.zero_one;
      ld += sl.hamming * nodes;
      lh += hierarchical_loss(z, y, ph.tree);
    }
    sw.stop();
    csv << s << "," << m << "," << num(l01 / m_test) << "," << num(ld / m_test) << "," << num(lh / m_test) << "\n";
  }
  return csv.str();
}

std::string run_sgd_vs_ncg(const json& c, std::uint64_t seed, Stopwatch& sw) {
  int m = positive(c, "m", 200), dx = positive(c, "d_features", 10), dl = positive(c, "d_labels", 5);
  double noise = c.value("noise", 0.1);
  Rng rng(seed);
  sw.start("generate");
  PlantedMultilabel pm = generate_multilabel_dataset(m, dx, dl, noise, rng);
  sw.stop();
  TrainConfig tc = train_config(c);
  EmbeddingStats stats = exact_stats(pm.data.space);
  double lambda = tc.lambda ? *tc.lambda : default_lambda(pm.data, stats, tc.normalize);
  tc.lambda = lambda;
  sw.start("ncg");
  TrainReport rep;
  RidgeModel ncg = train_ncg(pm.data, tc, &rep);
  sw.stop();
  int tau = c.value("tau", m);
  SgdConfig sc = SgdConfig::matching_batch(lambda, m, c.value("p", 0.02), tau);
  sc.passes = positive(c, "passes", 1);
  sc.normalize = tc.normalize;
  sc.kernel = tc.kernel;
  sw.start("sgd");
  SgdResult sgd = sgd_train(pm.data, sc, Rng(seed).split(1).next_u64());
  sw.stop();
  RidgeProblem prob = make_problem(pm.data, tc.kernel, lambda, tc.normalize, stats);
  double f_ncg = prob.objective(ncg.alpha), f_sgd = prob.objective(sgd.model.alpha);
  std::ostringstream csv;
  csv << "method,objective,relative_gap,iterations\n";
  csv << "ncg," << num(f_ncg) << ",0," << rep.iterations << "\n";
  csv << "sgd," << num(f_sgd) << "," << num((f_sgd - f_ncg) / std::abs(f_ncg)) << "," << sgd.log.size() << "\n";
  return csv.str();
}

}  // namespace

void run_experiment(const json& config) {
  if (!config.is_object()) throw ValidationError("experiment config must be a JSON object");
  if (!config.contains("seed")) throw ValidationError("experiment config needs an explicit seed");
  std::string id = config.value("experiment", std::string());
  std::string outdir = config.value("output", std::string());
  if (outdir.empty()) throw ValidationError("experiment config needs an output directory");
  std::uint64_t seed = config["seed"].get<std::uint64_t>();
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  fs::path results = fs::path(outdir) / "results.csv", echo = fs::path(outdir) / "config.json",
           timings = fs::path(outdir) / "timings.csv";
  Stopwatch sw;
  try {
    std::string csv;
    if (id == "dicycle")
      csv = run_dicycle(config, seed, sw);
    else if (id == "multilabel")
      csv = run_multilabel(config, seed, sw);
    else if (id == "hierarchical")
      csv = run_hierarchical(config, seed, sw);
    else if (id == "sgd_vs_ncg")
      csv = run_sgd_vs_ncg(config, seed, sw);
    else
      throw ValidationError("unknown experiment '" + id + "'");
    sw.start("write");
    json env{{"compiler", __VERSION__}, {"workers", worker_count()}, {"cxx_standard", static_cast<long>(__cplusplus)}};
    json full{{"config", config}, {"environment", env}};
    write_text_file(results.string(), csv);
    write_text_file(echo.string(), full.dump(2) + "\n");
    sw.stop();
    write_text_file(timings.string(), sw.csv());
  } catch (const Error& e) {
    std::error_code ec;
    for (const auto& p : {results, echo, timings}) fs::remove(p, ec);
    std::string msg = "experiment stage '" + sw.stage() + "' failed: " + e.what();
    if (e.exit_code() == 3) throw NumericError(msg);
    if (e.exit_code() == 4) throw BudgetExceeded(msg);
    throw ValidationError(msg);
  }
}

}  // namespace combi
