#pragma once

#include "combi/counting.hpp"
#include "combi/ridge.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace combi {

using json = nlohmann::json;

// "family:key=value,..." with keys d or n (size), l (subset size),
// tree=<file> for hierarchy/subtrees, poset=<file> for poset_regression.
StructureSpace parse_space_spec(const std::string& spec);

json space_to_json(const StructureSpace& space);
StructureSpace space_from_json(const json& j);

// "vertex parent" lines, root parent -1
Tree read_tree(std::istream& in);
Tree read_tree_file(const std::string& path);
// "u v" lines meaning u ≻ v; n = 0 infers 1 + the largest id. The transitive closure is taken.
Poset read_poset(std::istream& in, int n = 0);
Poset read_poset_file(const std::string& path, int n = 0);

json stats_to_json(const EmbeddingStats& stats);

// Label syntax: element id; comma-separated ids for sets ("-" is empty);
// "2>0>1" for rankings; "u>v" pairs for tournaments, posets and directed cycles;
// "u-v" pairs for undirected cycles.
std::string format_structure(const StructureSpace& space, const Structure& y);
Structure parse_structure(const StructureSpace& space, const std::string& text);

// Sparse rows "idx:val idx:val", 0-based.
Eigen::VectorXd parse_sparse_row(const std::string& text, int n_features);
std::string format_sparse_row(const Eigen::VectorXd& x);

// "labels | features" lines, labels separated by ';'. n_features = 0 infers it.
Dataset read_dataset(const StructureSpace& space, std::istream& in, int n_features = 0);
Dataset read_dataset_file(const StructureSpace& space, const std::string& path, int n_features = 0);
void write_dataset(std::ostream& out, const Dataset& data);

// rows of "idx:val" (an optional "labels |" prefix is ignored)
Eigen::MatrixXd read_inputs(std::istream& in, int n_features);

std::uint64_t fingerprint(const Eigen::MatrixXd& m);

json model_to_json(const RidgeModel& model);
RidgeModel model_from_json(const json& j);
void save_model(const RidgeModel& model, const std::string& path);
RidgeModel load_model(const std::string& path);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace combi
