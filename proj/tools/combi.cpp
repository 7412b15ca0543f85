#include "combi/decode.hpp"
#include "combi/error.hpp"
#include "combi/harness.hpp"
#include "combi/io.hpp"
#include "combi/online.hpp"
#include "combi/parallel.hpp"
#include "combi/partition.hpp"
#include "combi/ridge.hpp"
#include "combi/sampling.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace combi;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Eigen::VectorXd input_row(const std::string& path, int row, int n_features) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  Eigen::MatrixXd X = read_inputs(in, n_features);
  if (row < 0 || row >= X.rows())
    throw ValidationError("input row " + std::to_string(row) + " not present in '" + path + "'");
  return X.row(row).transpose();
}

Tilt model_tilt(const RidgeModel& model, const Eigen::VectorXd& x) {
  Eigen::VectorXd wx = model.weight_for(x);
  return {wx, max_embedding_norm(model.space) * wx.norm()};
}

int cmd_count(const std::string& spec, const std::string& out) {
  StructureSpace space = parse_space_spec(spec);
  json j = stats_to_json(exact_stats(space));
  j["space"] = space.describe();
  emit(j.dump(1) + "\n", out);
  return 0;
}

int cmd_train(const std::string& dataset, const std::string& config, const std::string& model_out,
              const std::string& log_out) {
  json c = read_json_file(config);
  if (!c.contains("space")) throw ValidationError("train config needs a space spec");
  StructureSpace space = parse_space_spec(c["space"].get<std::string>());
  Dataset data = read_dataset_file(space, dataset, c.value("n_features", 0));
  std::string trainer = c.value("trainer", std::string("ncg"));
  KernelSpec kernel = KernelSpec::linear_kernel();
  std::string kt = c.value("kernel", std::string("linear"));
  if (kt == "rbf")
    kernel = KernelSpec::rbf_kernel(c.value("gamma", 1.0));
  else if (kt == "polynomial")
    kernel = KernelSpec::polynomial_kernel(c.value("degree", 2), c.value("offset", 1.0));
  else if (kt != "linear")
    throw ValidationError("unknown kernel '" + kt + "'");
  bool normalize = c.value("normalize", false);
  json summary;
  RidgeModel model;
  if (trainer == "ncg") {
    TrainConfig tc;
    tc.kernel = kernel;
    tc.normalize = normalize;
    if (c.contains("lambda")) tc.lambda = c["lambda"].get<double>();
    tc.ncg.tol = c.value("tol", tc.ncg.tol);
    tc.ncg.max_iter = c.value("max_iter", tc.ncg.max_iter);
    TrainReport rep;
    model = train_ncg(data, tc, &rep);
    summary = {{"trainer", "ncg"},         {"iterations", rep.iterations}, {"converged", rep.converged},
               {"objective", rep.objective}, {"grad_norm", rep.grad_norm},  {"lambda", model.lambda}};
  } else if (trainer == "sgd") {
    if (!c.contains("seed")) throw ValidationError("sgd training needs an explicit seed");
    EmbeddingStats stats = exact_stats(space);
    double lb = c.contains("lambda") ? c["lambda"].get<double>() : default_lambda(data, stats, normalize);
    SgdConfig sc = SgdConfig::matching_batch(lb, data.size(), c.value("p", 0.02), c.value("tau", 0));
    if (c.contains("tau_fraction")) sc.tau_fraction = c["tau_fraction"].get<double>();
    sc.passes = c.value("passes", 1);
    sc.normalize = normalize;
    sc.kernel = kernel;
    SgdResult res = sgd_train(data, sc, c["seed"].get<std::uint64_t>());
    model = res.model;
    summary = {{"trainer", "sgd"}, {"steps", res.log.size()}, {"eta_clipped", res.eta_clipped}, {"lambda", model.lambda}};
    if (!log_out.empty()) {
      std::ofstream lo(log_out);
      if (!lo) throw ValidationError("cannot write '" + log_out + "'");
      write_sgd_log(lo, res.log);
    }
  } else {
    throw ValidationError("unknown trainer '" + trainer + "'");
  }
  save_model(model, model_out);
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& inputs, const std::string& out,
                std::uint64_t seed) {
  RidgeModel model = load_model(model_path);
  std::ifstream in(inputs);
  if (!in) throw ValidationError("cannot open '" + inputs + "'");
  Eigen::MatrixXd X = read_inputs(in, static_cast<int>(model.train_inputs.cols()));
  std::ostringstream os;
  for (long i = 0; i < X.rows(); ++i) {
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(i));
    PredictDecode d = decode_for_predict(model.space, LinearScorer(model.weight_for(X.row(i).transpose())), rng);
    os << format_structure(model.space, d.result.y) << "\t" << num(d.result.score + 0.0) << "\n";
  }
  emit(os.str(), out);
  return 0;
}

int cmd_sample(const std::string& spec, const std::string& model_path, const std::string& input, int row, long count,
               std::uint64_t seed, const std::string& out, const std::string& diag) {
  if (count < 1) throw ValidationError("count must be positive");
  Rng rng(seed);
  std::ostringstream os;
  if (model_path.empty()) {
    if (spec.empty()) throw ValidationError("sample needs a space spec or a model");
    StructureSpace space = parse_space_spec(spec);
    UniformSampler u = uniform_sampler_for(space);
    for (long k = 0; k < count; ++k) {
      Rng r = rng.split(static_cast<std::uint64_t>(k));
      os << format_structure(space, u(r)) << "\n";
    }
    emit(os.str(), out);
    return 0;
  }
  RidgeModel model = load_model(model_path);
  if (!spec.empty() && parse_space_spec(spec).describe() != model.space.describe())
    throw ValidationError("space spec does not match the model space");
  if (input.empty()) throw ValidationError("model sampling needs --input");
  Tilt tilt = model_tilt(model, input_row(input, row, static_cast<int>(model.train_inputs.cols())));
  UniformSampler u = uniform_sampler_for(model.space);
  std::map<long, long> hist;
  for (long k = 0; k < count; ++k) {
    Rng r = rng.split(static_cast<std::uint64_t>(k));
    CftpResult res = cftp_sample(model.space, tilt, u, r);
    ++hist[res.coalescence_steps];
    os << format_structure(model.space, res.sample) << "\n";
  }
  emit(os.str(), out);
  if (!diag.empty()) {
    json h = json::array();
    for (auto [steps, n] : hist) h.push_back({{"steps", steps}, {"count", n}});
    json d{{"bound", tilt.bound}, {"samples", count}, {"coalescence_histogram", h}};
    write_text_file(diag, d.dump(1) + "\n");
  }
  return 0;
}

int cmd_estimate_z(const std::string& model_path, const std::string& input, int row, double eps, int p,
                   std::uint64_t seed, const std::string& sampler_choice, const std::string& out) {
  auto t0 = std::chrono::steady_clock::now();
  RidgeModel model = load_model(model_path);
  Tilt tilt = model_tilt(model, input_row(input, row, static_cast<int>(model.train_inputs.cols())));
  FprasConfig cfg;
  cfg.epsilon = eps;
  cfg.p = p;
  LevelSampler sampler;
  if (sampler_choice == "cftp") {
    sampler = cftp_level_sampler(model.space, uniform_sampler_for(model.space));
  } else if (sampler_choice == "exact") {
    sampler = exact_level_sampler(model.space);
  } else if (sampler_choice.rfind("chain:", 0) == 0) {
    long steps = 0;
    try {
      steps = std::stol(sampler_choice.substr(6));
    } catch (const std::exception&) {
      throw ValidationError("chain sampler needs chain:<steps>");
    }
    if (steps < 1) throw ValidationError("chain steps must be positive");
    sampler = chain_level_sampler(model.space, uniform_sampler_for(model.space), steps);
  } else {
    throw ValidationError("sampler must be cftp, exact or chain:<steps>");
  }
  ZEstimate z = estimate_partition(model.space, tilt, cfg, sampler, Rng(seed));
  json j{{"Z", z.value}, {"log_Z", z.log_value}, {"S", z.samples_per_level}, {"l", z.levels}, {"epsilon", eps},
         {"p", p}, {"sampler", sampler_choice}};
  if (!out.empty()) write_text_file(out, j.dump(1) + "\n");
  j["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << j.dump(1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"combi: structured prediction over combinatorial output spaces"};
  app.require_subcommand(1);

  std::string spec, out, dataset, config, model, inputs, log_out, sampler = "cftp", diag, input;
  std::uint64_t seed = 0;
  long count = 10;
  int row = 0, p = 3;
  double eps = 0.5;

  auto* count_cmd = app.add_subcommand("count", "exact |Y|, Psi and C of a space as JSON");
  count_cmd->add_option("space", spec, "space spec, e.g. multilabel:d=5")->required();
  count_cmd->add_option("-o,--out", out, "output file");

  auto* train = app.add_subcommand("train", "train a ridge model");
  train->add_option("dataset", dataset)->required();
  train->add_option("config", config, "JSON config")->required();
  train->add_option("-o,--model", model, "model output file")->required();
  train->add_option("--log", log_out, "SGD log CSV");

  auto* predict = app.add_subcommand("predict", "decode one structure per input row");
  predict->add_option("model", model)->required();
  predict->add_option("inputs", inputs)->required();
  predict->add_option("-o,--out", out);
  predict->add_option("--seed", seed);

  auto* sample = app.add_subcommand("sample", "uniform or model-tilted exact samples");
  sample->add_option("space", spec);
  sample->add_option("--model", model);
  sample->add_option("--input", input, "file of input rows");
  sample->add_option("--row", row);
  sample->add_option("-n,--count", count);
  sample->add_option("--seed", seed)->required();
  sample->add_option("-o,--out", out);
  sample->add_option("--diagnostics", diag, "coalescence histogram JSON");

  auto* estz = app.add_subcommand("estimate-z", "estimate the partition function for one input");
  estz->add_option("model", model)->required();
  estz->add_option("input", input)->required();
  estz->add_option("--row", row);
  estz->add_option("--epsilon", eps);
  estz->add_option("-p", p);
  estz->add_option("--seed", seed)->required();
  estz->add_option("--sampler", sampler, "cftp | exact | chain:<steps>");
  estz->add_option("-o,--out", out);

  auto* exp = app.add_subcommand("experiment", "run an experiment config");
  exp->add_option("config", config)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*count_cmd) return cmd_count(spec, out);
    if (*train) return cmd_train(dataset, config, model, log_out);
    if (*predict) return cmd_predict(model, inputs, out, seed);
    if (*sample) return cmd_sample(spec, model, input, row, count, seed, out, diag);
    if (*estz) return cmd_estimate_z(model, input, row, eps, p, seed, sampler, out);
    if (*exp) {
      run_experiment(read_json_file(config));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
