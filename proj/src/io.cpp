#include "combi/io.hpp"

#include "combi/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace combi {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  std::string t = trim(s);
  try {
    std::size_t used = 0;
    int v = std::stoi(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " from '" + t + "'");
  }
}

double to_real(const std::string& s, const std::string& what) {
  std::string t = trim(s);
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " from '" + t + "'");
  }
}

std::pair<int, int> parse_pair(const std::string& s, char sep) {
  auto parts = split(s, sep);
  if (parts.size() != 2) throw ValidationError("expected a pair 'u" + std::string(1, sep) + "v', got '" + s + "'");
  return {to_int(parts[0], "vertex id"), to_int(parts[1], "vertex id")};
}

void check_vertex(int v, int n) {
  if (v < 0 || v >= n) throw MembershipError("vertex id " + std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
}

std::vector<int> parse_id_list(const std::string& text, char sep) {
  std::string t = trim(text);
  std::vector<int> out;
  if (t.empty() || t == "-") return out;
  for (const auto& p : split(t, sep)) out.push_back(to_int(p, "label id"));
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out.empty() ? "-" : out;
}

}  // namespace

StructureSpace parse_space_spec(const std::string& spec) {
  auto colon = spec.find(':');
  std::string fam_name = trim(spec.substr(0, colon));
  Family fam = parse_family(fam_name);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    for (const auto& item : split(spec.substr(colon + 1), ',')) {
      if (trim(item).empty()) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos) throw ValidationError("space parameter '" + item + "' needs key=value");
      kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
  }
  auto size = [&]() {
    for (const char* k : {"d", "n"})
      if (kv.count(k)) return to_int(kv[k], k);
    throw ValidationError(fam_name + " needs a size parameter d= or n=");
  };
  auto tree = [&]() {
    if (kv.count("tree")) return read_tree_file(kv["tree"]);
    if (kv.count("parents")) {
      std::vector<int> parents;
      for (const auto& p : split(kv["parents"], '/')) parents.push_back(to_int(p, "parent id"));
      return Tree::from_parents(parents);
    }
    throw ValidationError(fam_name + " needs tree=<file> or parents=p0/p1/...");
  };
  switch (fam) {
    case Family::multiclass:
      return StructureSpace::multiclass(size());
    case Family::multilabel:
      return StructureSpace::multilabel(size());
    case Family::ell_subsets:
      if (!kv.count("l")) throw ValidationError("ell_subsets needs l=");
      return StructureSpace::ell_subsets(size(), to_int(kv["l"], "l"));
    case Family::ordinal:
      return StructureSpace::ordinal(size());
    case Family::poset_regression: {
      int n = kv.count("d") || kv.count("n") ? size() : 0;
      if (kv.count("poset")) return StructureSpace::poset_regression(read_poset_file(kv["poset"], n));
      if (kv.count("edges")) {
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : split(kv["edges"], '/')) edges.push_back(parse_pair(e, '>'));
        if (n == 0) throw ValidationError("poset_regression with edges= needs n=");
        return StructureSpace::poset_regression(Poset::closure_of(n, edges));
      }
      throw ValidationError("poset_regression needs poset=<file> or edges=a>b/...");
    }
    case Family::hierarchy:
      return StructureSpace::hierarchy(tree());
    case Family::permutations:
      return StructureSpace::permutations(size());
    case Family::partial_tournaments:
      return StructureSpace::partial_tournaments(size());
    case Family::cliques:
      return StructureSpace::cliques(size());
    case Family::undirected_cycles:
      return StructureSpace::undirected_cycles(size());
    case Family::directed_cycles:
      return StructureSpace::directed_cycles(size());
    case Family::subtrees:
      return StructureSpace::subtrees(tree());
    case Family::posets:
      return StructureSpace::posets(size());
  }
  throw ValidationError("unknown family");
}

json space_to_json(const StructureSpace& space) {
  json j;
  j["family"] = family_name(space.family());
  j["size"] = space.size();
  if (space.family() == Family::ell_subsets) j["l"] = space.ell();
  if (space.family() == Family::hierarchy || space.family() == Family::subtrees) j["parents"] = space.tree().parent;
  if (space.family() == Family::poset_regression) {
    json edges = json::array();
    for (auto [a, b] : space.order().edges()) edges.push_back({a, b});
    j["edges"] = edges;
  }
  return j;
}

StructureSpace space_from_json(const json& j) {
  try {
    Family fam = parse_family(j.at("family").get<std::string>());
    int n = j.at("size").get<int>();
    switch (fam) {
      case Family::ell_subsets:
        return StructureSpace::ell_subsets(n, j.at("l").get<int>());
      case Family::hierarchy:
        return StructureSpace::hierarchy(Tree::from_parents(j.at("parents").get<std::vector<int>>()));
      case Family::subtrees:
        return StructureSpace::subtrees(Tree::from_parents(j.at("parents").get<std::vector<int>>()));
      case Family::poset_regression: {
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        return StructureSpace::poset_regression(Poset::from_edges(n, edges));
      }
      default:
        return parse_space_spec(family_name(fam) + ":n=" + std::to_string(n));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed space description: ") + e.what());
  }
}

Tree read_tree(std::istream& in) {
  std::vector<std::pair<int, int>> rows;
  std::string line;
  int max_id = -1;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string a, b, extra;
    if (!(is >> a >> b) || (is >> extra)) throw ValidationError("tree line must be 'vertex parent': '" + line + "'");
    rows.emplace_back(to_int(a, "vertex id"), to_int(b, "parent id"));
    max_id = std::max(max_id, rows.back().first);
  }
  if (rows.empty()) throw ValidationError("tree file is empty");
  std::vector<int> parent(static_cast<std::size_t>(max_id) + 1, -2);
  for (auto [v, p] : rows) {
    if (v < 0) throw ValidationError("negative vertex id in tree file");
    if (parent[v] != -2) throw ValidationError("vertex " + std::to_string(v) + " listed twice in tree file");
    parent[v] = p;
  }
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (parent[v] == -2) throw ValidationError("vertex " + std::to_string(v) + " missing from tree file");
  return Tree::from_parents(parent);
}

Tree read_tree_file(const std::string& path) {
  auto in = open_in(path);
  return read_tree(in);
}

Poset read_poset(std::istream& in, int n) {
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int max_id = -1;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string a, b, extra;
    if (!(is >> a >> b) || (is >> extra)) throw ValidationError("poset line must be 'u v': '" + line + "'");
    edges.emplace_back(to_int(a, "element id"), to_int(b, "element id"));
    max_id = std::max({max_id, edges.back().first, edges.back().second});
  }
  if (n == 0) n = max_id + 1;
  if (n < 1) throw ValidationError("poset has no elements");
  return Poset::closure_of(n, edges);
}

Poset read_poset_file(const std::string& path, int n) {
  auto in = open_in(path);
  return read_poset(in, n);
}

json stats_to_json(const EmbeddingStats& stats) {
  json j;
  j["count"] = stats.count.str();
  j["psi"] = std::vector<double>(stats.psi.data(), stats.psi.data() + stats.psi.size());
  json C = json::array();
  for (long i = 0; i < stats.C.rows(); ++i) {
    std::vector<double> row(stats.C.cols());
    for (long k = 0; k < stats.C.cols(); ++k) row[k] = stats.C(i, k);
    C.push_back(row);
  }
  j["C"] = C;
  return j;
}

std::string format_structure(const StructureSpace& space, const Structure& y) {
  check_membership(space, y);
  int n = space.size();
  const auto& v = y.data;
  std::vector<std::string> parts;
  switch (space.family()) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      return std::to_string(v[0]);
    case Family::multilabel:
    case Family::ell_subsets:
    case Family::cliques:
    case Family::subtrees:
      for (int i = 0; i < n; ++i)
        if (v[i]) parts.push_back(std::to_string(i));
      return join(parts, ",");
    case Family::permutations:
      for (int r : v) parts.push_back(std::to_string(r));
      return join(parts, ">");
    case Family::partial_tournaments:
    case Family::posets:
      for (int e = 0; e < static_cast<int>(v.size()); ++e) {
        if (!v[e]) continue;
        auto [a, b] = pair_at(e, n);
        if (v[e] < 0) std::swap(a, b);
        parts.push_back(std::to_string(a) + ">" + std::to_string(b));
      }
      return join(parts, ",");
    case Family::undirected_cycles:
      for (int e = 0; e < static_cast<int>(v.size()); ++e) {
        if (!v[e]) continue;
        auto [a, b] = pair_at(e, n);
        parts.push_back(std::to_string(a) + "-" + std::to_string(b));
      }
      return join(parts, ",");
    case Family::directed_cycles: {
      int start = 0;
      while (v[start] == -1) ++start;
      int u = start;
      do {
        parts.push_back(std::to_string(u) + ">" + std::to_string(v[u]));
        u = v[u];
      } while (u != start);
      return join(parts, ",");
    }
  }
  return "";
}

Structure parse_structure(const StructureSpace& space, const std::string& text) {
  int n = space.size();
  Family fam = space.family();
  std::string t = trim(text);
  Structure y{fam, {}};
  switch (fam) {
    case Family::multiclass:
    case Family::ordinal:
    case Family::poset_regression:
    case Family::hierarchy:
      y.data = {to_int(t, "label id")};
      break;
    case Family::multilabel:
    case Family::ell_subsets:
    case Family::cliques:
    case Family::subtrees: {
      y.data.assign(n, 0);
      for (int id : parse_id_list(t, ',')) {
        check_vertex(id, n);
        if (y.data[id]) throw MembershipError("label id " + std::to_string(id) + " repeated");
        y.data[id] = 1;
      }
      break;
    }
    case Family::permutations:
      y.data = parse_id_list(t, '>');
      break;
    case Family::partial_tournaments:
    case Family::posets:
    case Family::undirected_cycles:
    case Family::directed_cycles: {
      bool directed = fam != Family::undirected_cycles;
      if (fam == Family::directed_cycles)
        y.data.assign(n, -1);
      else
        y.data.assign(pair_count(n), 0);
      if (t.empty() || t == "-") break;
      for (const auto& item : split(t, ',')) {
        auto [a, b] = parse_pair(trim(item), directed ? '>' : '-');
        check_vertex(a, n);
        check_vertex(b, n);
        if (a == b) throw MembershipError("self pair " + std::to_string(a));
        if (fam == Family::directed_cycles) {
          if (y.data[a] != -1) throw MembershipError("vertex " + std::to_string(a) + " has two successors");
          y.data[a] = b;
          continue;
        }
        int e = pair_index(a, b, n);
        if (y.data[e]) throw MembershipError("pair " + trim(item) + " listed twice");
        y.data[e] = directed ? (a < b ? 1 : -1) : 1;
      }
      break;
    }
  }
  check_membership(space, y);
  return y;
}

Eigen::VectorXd parse_sparse_row(const std::string& text, int n_features) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_features);
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    auto c = tok.find(':');
    if (c == std::string::npos) throw ValidationError("feature '" + tok + "' must be idx:val");
    int idx = to_int(tok.substr(0, c), "feature index");
    if (idx < 0 || idx >= n_features)
      throw ValidationError("feature index " + std::to_string(idx) + " outside [0, " + std::to_string(n_features) + ")");
    double v = to_real(tok.substr(c + 1), "feature value");
    if (!std::isfinite(v)) throw ValidationError("feature value must be finite");
    x[idx] = v;
  }
  return x;
}

std::string format_sparse_row(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << std::setprecision(17);
  bool first = true;
  for (long i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    os << (first ? "" : " ") << i << ":" << x[i];
    first = false;
  }
  return os.str();
}

namespace {

int max_feature_index(const std::string& text) {
  int best = -1;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    auto c = tok.find(':');
    if (c == std::string::npos) throw ValidationError("feature '" + tok + "' must be idx:val");
    best = std::max(best, to_int(tok.substr(0, c), "feature index"));
  }
  return best;
}

}  // namespace

Dataset read_dataset(const StructureSpace& space, std::istream& in, int n_features) {
  Dataset data;
  data.space = space;
  std::vector<std::string> feats;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto bar = t.find('|');
    if (bar == std::string::npos) throw ValidationError("line " + std::to_string(lineno) + ": missing '|'");
    std::vector<Structure> ys;
    try {
      for (const auto& part : split(t.substr(0, bar), ';')) ys.push_back(parse_structure(space, part));
    } catch (const Error& e) {
      throw MembershipError("line " + std::to_string(lineno) + ": " + e.what());
    }
    data.labels.push_back(std::move(ys));
    feats.push_back(t.substr(bar + 1));
  }
  if (data.labels.empty()) throw ValidationError("dataset has no instances");
  if (n_features == 0)
    for (const auto& f : feats) n_features = std::max(n_features, max_feature_index(f) + 1);
  if (n_features == 0) n_features = 1;
  data.inputs.resize(static_cast<long>(feats.size()), n_features);
  for (std::size_t i = 0; i < feats.size(); ++i)
    data.inputs.row(static_cast<long>(i)) = parse_sparse_row(feats[i], n_features).transpose();
  data.validate();
  return data;
}

Dataset read_dataset_file(const StructureSpace& space, const std::string& path, int n_features) {
  auto in = open_in(path);
  return read_dataset(space, in, n_features);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (int i = 0; i < data.size(); ++i) {
    std::string labels;
    for (std::size_t j = 0; j < data.labels[i].size(); ++j)
      labels += (j ? ";" : "") + format_structure(data.space, data.labels[i][j]);
    out << labels << " | " << format_sparse_row(data.inputs.row(i).transpose()) << "\n";
  }
}

Eigen::MatrixXd read_inputs(std::istream& in, int n_features) {
  std::vector<Eigen::VectorXd> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto bar = t.find('|');
    rows.push_back(parse_sparse_row(bar == std::string::npos ? t : t.substr(bar + 1), n_features));
  }
  Eigen::MatrixXd X(static_cast<long>(rows.size()), n_features);
  for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<long>(i)) = rows[i].transpose();
  return X;
}

std::uint64_t fingerprint(const Eigen::MatrixXd& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  std::int64_t dims[2] = {m.rows(), m.cols()};
  feed(dims, sizeof dims);
  for (long i = 0; i < m.rows(); ++i)
    for (long k = 0; k < m.cols(); ++k) {
      double v = m(i, k);
      feed(&v, sizeof v);
    }
  return h;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (long i = 0; i < m.rows(); ++i)
    for (long k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  long r = j.at("rows").get<long>(), c = j.at("cols").get<long>();
  auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<long>(data.size()) != r * c) throw ValidationError("matrix data length does not match its shape");
  Eigen::MatrixXd m(r, c);
  for (long i = 0; i < r; ++i)
    for (long k = 0; k < c; ++k) m(i, k) = data[static_cast<std::size_t>(i * c + k)];
  return m;
}

namespace {

json kernel_to_json(const KernelSpec& k) {
  json j{{"type", k.type == KernelSpec::Type::linear ? "linear" : k.type == KernelSpec::Type::rbf ? "rbf" : "polynomial"}};
  if (k.type == KernelSpec::Type::polynomial) {
    j["degree"] = k.degree;
    j["offset"] = k.offset;
  }
  if (k.type == KernelSpec::Type::rbf) j["gamma"] = k.gamma;
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  std::string t = j.at("type").get<std::string>();
  if (t == "linear") return KernelSpec::linear_kernel();
  if (t == "polynomial") return KernelSpec::polynomial_kernel(j.value("degree", 2), j.value("offset", 1.0));
  if (t == "rbf") return KernelSpec::rbf_kernel(j.value("gamma", 1.0));
  throw ValidationError("unknown kernel type '" + t + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

json model_to_json(const RidgeModel& model) {
  json j;
  j["format"] = "combi-model/1";
  j["space"] = space_to_json(model.space);
  j["kernel"] = kernel_to_json(model.kernel);
  j["lambda"] = model.lambda;
  j["normalized"] = model.normalized;
  j["alpha"] = matrix_to_json(model.alpha);
  j["train_inputs"] = matrix_to_json(model.train_inputs);
  j["fingerprint"] = hex64(fingerprint(model.train_inputs));
  return j;
}

RidgeModel model_from_json(const json& j) {
  try {
    RidgeModel m;
    m.space = space_from_json(j.at("space"));
    m.kernel = kernel_from_json(j.at("kernel"));
    m.lambda = j.at("lambda").get<double>();
    m.normalized = j.at("normalized").get<bool>();
    m.alpha = matrix_from_json(j.at("alpha"));
    m.train_inputs = matrix_from_json(j.at("train_inputs"));
    if (j.contains("fingerprint") && j["fingerprint"].get<std::string>() != hex64(fingerprint(m.train_inputs)))
      throw ValidationError("model fingerprint does not match its training inputs");
    if (m.alpha.rows() != m.space.dim() || m.alpha.cols() != m.train_inputs.rows())
      throw ValidationError("model alpha shape does not match space and training inputs");
    m.stats = exact_stats(m.space);
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const RidgeModel& model, const std::string& path) {
  write_text_file(path, model_to_json(model).dump(1) + "\n");
}

RidgeModel load_model(const std::string& path) {
  try {
    return model_from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw ValidationError("model file '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

}  // namespace combi
