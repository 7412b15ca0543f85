#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "combi/error.hpp"
#include "combi/io.hpp"
#include "fixtures.hpp"

#include <filesystem>
#include <sstream>

using namespace combi;

namespace {

std::vector<StructureSpace> small_spaces() {
  Tree t = Tree::from_parents({-1, 0, 0, 2});
  return {StructureSpace::multiclass(4),
          StructureSpace::multilabel(4),
          StructureSpace::ell_subsets(5, 2),
          StructureSpace::ordinal(3),
          StructureSpace::poset_regression(Poset::closure_of(4, {{0, 1}, {1, 2}})),
          StructureSpace::hierarchy(t),
          StructureSpace::permutations(4),
          StructureSpace::partial_tournaments(3),
          StructureSpace::cliques(4),
          StructureSpace::undirected_cycles(5),
          StructureSpace::directed_cycles(4),
          StructureSpace::subtrees(t),
          StructureSpace::posets(3)};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("combi_io_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("space specs") {
  CHECK(parse_space_spec("multilabel:d=5").describe() == "multilabel:d=5");
  CHECK(parse_space_spec("ell_subsets:d=6,l=2").describe() == "ell_subsets:d=6,l=2");
  CHECK(parse_space_spec("permutations:n=4").size() == 4);
  CHECK(parse_space_spec("subtrees:parents=-1/0/0/2").size() == 4);
  StructureSpace pr = parse_space_spec("poset_regression:n=3,edges=0>1/1>2");
  CHECK(pr.order().gt(0, 2));

  CHECK_THROWS_AS(parse_space_spec("bogus:d=3"), ValidationError);
  CHECK_THROWS_AS(parse_space_spec("multilabel"), ValidationError);
  CHECK_THROWS_AS(parse_space_spec("multilabel:d=x"), ValidationError);
  CHECK_THROWS_AS(parse_space_spec("multilabel:d"), ValidationError);
  CHECK_THROWS_AS(parse_space_spec("ell_subsets:d=4"), ValidationError);
  CHECK_THROWS_AS(parse_space_spec("hierarchy:d=4"), ValidationError);
  CHECK_THROWS_AS(parse_space_spec("subtrees:tree=/nonexistent/tree.txt"), ValidationError);

  for (const auto& s : small_spaces()) {
    CAPTURE(s.describe());
    StructureSpace back = space_from_json(space_to_json(s));
    CHECK(back.describe() == s.describe());
    CHECK(enumerate_small(back).size() == enumerate_small(s).size());
  }
  CHECK_THROWS_AS(space_from_json(json{{"family", "multilabel"}}), ValidationError);
}

TEST_CASE("structure text round trips for every family") {
  for (const auto& s : small_spaces()) {
    CAPTURE(s.describe());
    for (const auto& y : enumerate_small(s)) {
      std::string text = format_structure(s, y);
      CAPTURE(text);
      CHECK_FALSE(text.empty());
      CHECK(parse_structure(s, text).data == y.data);
    }
  }
}

TEST_CASE("structure text examples and errors") {
  StructureSpace ml = StructureSpace::multilabel(4);
  CHECK(parse_structure(ml, "-").data == std::vector<int>{0, 0, 0, 0});
  CHECK(parse_structure(ml, "").data == std::vector<int>{0, 0, 0, 0});
  CHECK(format_structure(ml, Structure{Family::multilabel, {0, 0, 0, 0}}) == "-");
  CHECK(parse_structure(ml, " 3,1 ").data == std::vector<int>{0, 1, 0, 1});
  CHECK_THROWS_AS(parse_structure(ml, "4"), MembershipError);
  CHECK_THROWS_AS(parse_structure(ml, "1,1"), MembershipError);
  CHECK_THROWS_AS(parse_structure(ml, "a"), ValidationError);

  StructureSpace pm = StructureSpace::permutations(3);
  CHECK(parse_structure(pm, "2>0>1").data == std::vector<int>{2, 0, 1});
  CHECK_THROWS_AS(parse_structure(pm, "2>0>0"), MembershipError);
  CHECK_THROWS_AS(parse_structure(pm, "2>0"), MembershipError);

  StructureSpace dc = StructureSpace::directed_cycles(4);
  Structure cyc = parse_structure(dc, "2>3,0>2,3>0");
  CHECK(format_structure(dc, cyc) == "0>2,2>3,3>0");
  CHECK_THROWS_AS(parse_structure(dc, "0>2,2>0"), ValidationError);
  CHECK_THROWS_AS(parse_structure(dc, "0>1,0>2"), MembershipError);
  CHECK_THROWS_AS(parse_structure(dc, "0>0"), MembershipError);

  StructureSpace ls = StructureSpace::ell_subsets(4, 2);
  CHECK_THROWS_AS(parse_structure(ls, "1"), MembershipError);

  StructureSpace mc = StructureSpace::multiclass(3);
  CHECK_THROWS_AS(parse_structure(mc, "3"), MembershipError);
}

TEST_CASE("sparse rows") {
  Eigen::VectorXd x = parse_sparse_row("0:1.5 3:-2", 5);
  CHECK(x.size() == 5);
  CHECK(x[0] == 1.5);
  CHECK(x[3] == -2.0);
  CHECK(x.sum() == -0.5);
  CHECK(format_sparse_row(x) == "0:1.5 3:-2");
  CHECK(parse_sparse_row("", 2).isZero());
  CHECK_THROWS_AS(parse_sparse_row("5:1", 5), ValidationError);
  CHECK_THROWS_AS(parse_sparse_row("-1:1", 5), ValidationError);
  CHECK_THROWS_AS(parse_sparse_row("1", 5), ValidationError);
  CHECK_THROWS_AS(parse_sparse_row("1:nan", 5), ValidationError);
  CHECK_THROWS_AS(parse_sparse_row("1:x", 5), ValidationError);

  Rng rng(4);
  Eigen::VectorXd r = fixtures::normal_matrix(7, 1, rng).col(0);
  CHECK(parse_sparse_row(format_sparse_row(r), 7) == r);
}

TEST_CASE("dataset round trip") {
  StructureSpace s = StructureSpace::multilabel(3);
  std::istringstream in(
      "# comment\n"
      "0,2 | 0:1 2:0.5\n"
      "\n"
      "-;1 | 1:-1\n");
  Dataset d = read_dataset(s, in);
  REQUIRE(d.size() == 2);
  CHECK(d.inputs.cols() == 3);
  CHECK(d.labels[0].size() == 1);
  CHECK(d.labels[1].size() == 2);
  CHECK(d.labels[1][0].data == std::vector<int>{0, 0, 0});
  CHECK(d.inputs(0, 2) == 0.5);

  std::ostringstream out;
  write_dataset(out, d);
  CHECK(out.str() == "0,2 | 0:1 2:0.5\n-;1 | 1:-1\n");
  std::istringstream again(out.str());
  Dataset e = read_dataset(s, again, 3);
  CHECK(e.inputs == d.inputs);
  CHECK(e.labels[1][1].data == d.labels[1][1].data);

  Rng rng(9);
  for (const auto& sp : small_spaces()) {
    CAPTURE(sp.describe());
    if (sp.family() == Family::posets) continue;  // no uniform sampler
    Dataset r = fixtures::random_dataset(sp, 6, 4, 3, rng);
    std::ostringstream o;
    write_dataset(o, r);
    std::istringstream i(o.str());
    Dataset b = read_dataset(sp, i, 4);
    CHECK(b.inputs == r.inputs);
    REQUIRE(b.size() == r.size());
    for (int k = 0; k < r.size(); ++k) {
      REQUIRE(b.labels[k].size() == r.labels[k].size());
      for (std::size_t j = 0; j < r.labels[k].size(); ++j) CHECK(b.labels[k][j].data == r.labels[k][j].data);
    }
  }

  std::istringstream no_bar("0 0:1\n");
  CHECK_THROWS_AS(read_dataset(s, no_bar), ValidationError);
  std::istringstream bad_label("7 | 0:1\n");
  CHECK_THROWS_AS(read_dataset(s, bad_label), MembershipError);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_dataset(s, empty), ValidationError);
  std::istringstream wide("0 | 4:1\n");
  CHECK_THROWS_AS(read_dataset(s, wide, 2), ValidationError);
  CHECK_THROWS_AS(read_dataset_file(s, "/nonexistent/data.txt"), ValidationError);
}

TEST_CASE("inputs") {
  std::istringstream in("0:1\n# c\n1 | 1:2\n\n");
  Eigen::MatrixXd X = read_inputs(in, 2);
  REQUIRE(X.rows() == 2);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(1, 1) == 2.0);
  CHECK(X(1, 0) == 0.0);
}

TEST_CASE("trees and posets from text") {
  std::istringstream t("# root first\n0 -1\n2 0\n1 0\n3 2\n");
  Tree tree = read_tree(t);
  CHECK(tree.parent == std::vector<int>{-1, 0, 0, 2});

  std::istringstream dup("0 -1\n1 0\n1 0\n");
  CHECK_THROWS_AS(read_tree(dup), ValidationError);
  std::istringstream gap("0 -1\n2 0\n");
  CHECK_THROWS_AS(read_tree(gap), ValidationError);
  std::istringstream extra("0 -1 5\n");
  CHECK_THROWS_AS(read_tree(extra), ValidationError);
  std::istringstream none("");
  CHECK_THROWS_AS(read_tree(none), ValidationError);

  std::istringstream p("0 1\n1 2\n");
  Poset po = read_poset(p);
  CHECK(po.n == 3);
  CHECK(po.gt(0, 2));
  CHECK(po.gt(0, 1));
  CHECK_FALSE(po.gt(2, 0));
  std::istringstream p5("0 1\n");
  CHECK(read_poset(p5, 5).n == 5);
  std::istringstream cyc("0 1\n1 0\n");
  CHECK_THROWS_AS(read_poset(cyc), ValidationError);

  auto dir = temp_dir("tree");
  write_text_file((dir / "t.txt").string(), "0 -1\n1 0\n2 0\n3 2\n");
  StructureSpace s = parse_space_spec("subtrees:tree=" + (dir / "t.txt").string());
  CHECK(s.tree().parent == std::vector<int>{-1, 0, 0, 2});
  std::filesystem::remove_all(dir);
}

TEST_CASE("model json round trip") {
  Rng rng(2);
  StructureSpace s = StructureSpace::multilabel(3);
  Dataset d = fixtures::random_dataset(s, 8, 3, 2, rng);
  TrainConfig tc;
  tc.kernel = KernelSpec::rbf_kernel(0.5);
  RidgeModel m = train_ncg(d, tc);

  json j = model_to_json(m);
  RidgeModel b = model_from_json(j);
  CHECK(b.alpha == m.alpha);
  CHECK(b.train_inputs == m.train_inputs);
  CHECK(b.lambda == m.lambda);
  CHECK(b.kernel.gamma == 0.5);
  CHECK(b.space.describe() == s.describe());
  Eigen::VectorXd x = fixtures::normal_matrix(3, 1, rng).col(0);
  CHECK(b.weight_for(x) == m.weight_for(x));

  auto dir = temp_dir("model");
  std::string path = (dir / "m.json").string();
  save_model(m, path);
  CHECK(load_model(path).alpha == m.alpha);

  json tampered = j;
  tampered["train_inputs"]["data"][0] = 123.0;
  CHECK_THROWS_AS(model_from_json(tampered), ValidationError);
  json shape = j;
  shape["alpha"]["rows"] = 2;
  shape["alpha"]["data"] = std::vector<double>(2 * 8, 0.0);
  CHECK_THROWS_AS(model_from_json(shape), ValidationError);
  json missing = j;
  missing.erase("kernel");
  CHECK_THROWS_AS(model_from_json(missing), ValidationError);

  write_text_file(path, "{not json");
  CHECK_THROWS_AS(load_model(path), ValidationError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("fingerprint and matrices") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  Eigen::MatrixXd b = a;
  CHECK(fingerprint(a) == fingerprint(b));
  b(1, 1) = 4.0000000001;
  CHECK(fingerprint(a) != fingerprint(b));
  CHECK(fingerprint(Eigen::MatrixXd::Zero(1, 4)) != fingerprint(Eigen::MatrixXd::Zero(4, 1)));
  CHECK(matrix_from_json(matrix_to_json(a)) == a);
  CHECK_THROWS_AS(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"data", {1.0}}}), ValidationError);
}

TEST_CASE("stats json") {
  EmbeddingStats st = exact_stats(StructureSpace::multilabel(2));
  json j = stats_to_json(st);
  CHECK(j["count"] == "4");
  CHECK(j["psi"] == std::vector<double>{2, 2});
  CHECK(j["C"][0] == std::vector<double>{2, 1});
  CHECK(j["C"][1] == std::vector<double>{1, 2});
}
