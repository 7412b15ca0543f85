#pragma once

#include "combi/bigint.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace combi {

enum class Family {
  multiclass,
  multilabel,
  ell_subsets,
  ordinal,
  poset_regression,
  hierarchy,
  permutations,
  partial_tournaments,
  cliques,
  undirected_cycles,
  directed_cycles,
  subtrees,
  posets,  // all partial orders on [N]; enumeration only, no closed-form stats
};

std::string family_name(Family f);
Family parse_family(const std::string& name);

// Unordered pair {u,v}, u<v, in lexicographic order: (0,1),(0,2),...,(1,2),...
inline int pair_count(int n) { return n * (n - 1) / 2; }
inline int pair_index(int u, int v, int n) {
  if (u > v) std::swap(u, v);
  return u * (2 * n - u - 1) / 2 + (v - u - 1);
}
std::pair<int, int> pair_at(int index, int n);

struct Tree {
  std::vector<int> parent;  // parent[root] = -1
  std::vector<std::vector<int>> children;
  int root = -1;

  // throws ValidationError for forests, cycles or bad ids
  static Tree from_parents(std::vector<int> parent);
  int size() const { return static_cast<int>(parent.size()); }
  std::vector<int> path_to(int v) const;  // root .. v
  std::vector<int> preorder() const;
};

// Strict partial order over [n]; gt(a,b) means a ≻ b.
struct Poset {
  int n = 0;
  std::vector<std::uint8_t> rel;

  bool gt(int a, int b) const { return rel[static_cast<std::size_t>(a) * n + b] != 0; }
  // edges are (a,b) meaning a ≻ b; validates irreflexive, acyclic, transitively closed
  static Poset from_edges(int n, const std::vector<std::pair<int, int>>& edges);
  static Poset closure_of(int n, const std::vector<std::pair<int, int>>& edges);
  Poset dual() const;
  std::vector<std::pair<int, int>> edges() const;
  int relation_size() const;
};

class StructureSpace {
public:
  static StructureSpace multiclass(int d);
  static StructureSpace multilabel(int d);
  static StructureSpace ell_subsets(int d, int ell);
  static StructureSpace ordinal(int d);
  static StructureSpace poset_regression(Poset order);
  static StructureSpace hierarchy(Tree tree);
  static StructureSpace permutations(int d);
  static StructureSpace partial_tournaments(int n);
  static StructureSpace cliques(int n);
  static StructureSpace undirected_cycles(int n);
  static StructureSpace directed_cycles(int n);
  static StructureSpace subtrees(Tree tree);
  static StructureSpace posets(int n);

  Family family() const { return family_; }
  int size() const { return n_; }  // alphabet size d / vertex count N
  int ell() const { return ell_; }
  const Tree& tree() const { return tree_; }
  const Poset& order() const { return order_; }

  int dim() const;
  // psi takes values in {0,1} (as opposed to signed pair features)
  bool indicator_embedding() const;
  std::string describe() const;

private:
  Family family_ = Family::multiclass;
  int n_ = 0;
  int ell_ = 0;
  Tree tree_;
  Poset order_;
};

// Payload conventions:
//   multiclass, ordinal, poset_regression, hierarchy: {z}
//   multilabel, ell_subsets, cliques (vertex set), subtrees: 0/1 per element
//   permutations: ranking array, data[0] is ranked highest
//   partial_tournaments, posets: one entry per unordered pair, +1 if u≻v, -1 if v≻u, 0
//   undirected_cycles: 0/1 per unordered pair (edge set)
//   directed_cycles: successor per vertex, -1 when off the cycle
struct Structure {
  Family family = Family::multiclass;
  std::vector<int> data;

  friend bool operator==(const Structure& a, const Structure& b) {
    return a.family == b.family && a.data == b.data;
  }
  friend bool operator<(const Structure& a, const Structure& b) {
    return a.data < b.data;
  }
};

struct EmbeddingStats {
  BigInt count;
  std::vector<BigInt> psi_exact;
  std::vector<BigInt> cov_exact;  // dim*dim row-major
  Eigen::VectorXd psi;
  Eigen::MatrixXd C;

  int dim() const { return static_cast<int>(psi_exact.size()); }
  static EmbeddingStats from_exact(BigInt count, std::vector<BigInt> psi,
                                   std::vector<BigInt> cov);
};

BigInt cardinality(const StructureSpace& space);
Eigen::VectorXd psi_sum(const StructureSpace& space);
Eigen::MatrixXd psi_cov(const StructureSpace& space);
EmbeddingStats exact_stats(const StructureSpace& space);

// Closed forms as exact integers.
std::vector<BigInt> psi_sum_exact(const StructureSpace& space);
std::vector<BigInt> psi_cov_exact(const StructureSpace& space);

void check_membership(const StructureSpace& space, const Structure& y);
bool is_member(const StructureSpace& space, const Structure& y);

std::vector<int> embed_int(const StructureSpace& space, const Structure& y);
Eigen::VectorXd embed(const StructureSpace& space, const Structure& y);

constexpr std::uint64_t kEnumerationLimit = 1000000;
std::vector<Structure> enumerate_small(const StructureSpace& space,
                                       std::uint64_t limit = kEnumerationLimit);

// Aggregates over an explicit list; exact integer accumulation.
EmbeddingStats enumerated_stats(const StructureSpace& space, const std::vector<Structure>& ys);
EmbeddingStats enumerated_stats_serial(const StructureSpace& space,
                                       const std::vector<Structure>& ys);

// f(v) = 1 + prod_{c in children(v)} f(c)
std::vector<BigInt> count_subtrees(const Tree& tree);

enum class PosetKernel { position, edge, signed_edge };
double poset_kernel(PosetKernel kind, const Poset& a, const Poset& b);

// helpers used across modules
Structure make_element(Family f, int z);
Structure make_set(Family f, int n, const std::vector<int>& members);
Structure make_ranking(const std::vector<int>& order);
Structure make_dicycle(int n, const std::vector<int>& cycle);  // cycle order v0->v1->...->v0
Structure make_ucycle(int n, const std::vector<int>& cycle);
Structure reverse_structure(const StructureSpace& space, const Structure& y);

}  // namespace combi
