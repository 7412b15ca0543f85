#pragma once

#include "combi/counting.hpp"
#include "combi/rng.hpp"
#include "combi/sampling.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace combi {

struct LinearScorer {
  Eigen::VectorXd w_x;

  explicit LinearScorer(Eigen::VectorXd w);
  double operator()(const Eigen::VectorXd& psi) const { return w_x.dot(psi); }
};

struct DecodeResult {
  Structure y;
  double score = 0.0;
};

// Involution r with psi(z) + psi(r(z)) = c and <c, psi(z)> = 0.
struct SiblingSystem {
  std::string name;
  StructureSpace space;  // structures, enumeration order and uniform sampling
  std::function<Eigen::VectorXd(const Structure&)> psi;
  std::function<Structure(const Structure&)> sibling;
  Eigen::VectorXd c;
  UniformSampler uniform;

  int dim() const { return static_cast<int>(c.size()); }
};

// multilabel bits b with psi = 2b - 1, sibling = complement
SiblingSystem signed_multilabel_system(int d);
SiblingSystem permutation_system(int d);
SiblingSystem dicycle_system(int n);
SiblingSystem tournament_system(int n);

// Checks both sibling conditions on every structure when |Y| <= enum_limit,
// otherwise on `samples` uniform draws. Throws ValidationError naming the failure.
void check_sibling(const SiblingSystem& sys, Rng& rng, long samples = 1000, std::uint64_t enum_limit = 10000);

DecodeResult decode_sibling(const SiblingSystem& sys, const LinearScorer& scorer, Rng& rng);

// Hereditary set system over [size]; member() receives 0/1 bits.
struct IndependenceSystem {
  int size = 0;
  std::function<bool(const std::vector<int>&)> member;
  Eigen::VectorXd mu;  // psi_u = sqrt(mu_u) on members; empty means mu = 1

  Eigen::VectorXd embed(const std::vector<int>& bits) const;
};

IndependenceSystem free_system(int size);
// sets of size <= k
IndependenceSystem uniform_matroid(int size, int k);

int independence_block_count(int size);
DecodeResult decode_independence(const IndependenceSystem& sys, const LinearScorer& scorer);
// exhaustive reference over all 2^size subsets
DecodeResult decode_independence_exact(const IndependenceSystem& sys, const LinearScorer& scorer, bool minimize = false);

// Streams max(y, r(y)) over the enumeration of Y, once per sibling pair.
class ZApproxEnumerator {
public:
  ZApproxEnumerator(SiblingSystem sys, LinearScorer scorer, double nu = 0.5,
                    std::uint64_t limit = kEnumerationLimit);
  std::optional<DecodeResult> next();
  double nu() const { return nu_; }

private:
  SiblingSystem sys_;
  LinearScorer scorer_;
  double nu_;
  std::vector<Structure> all_;
  std::size_t pos_ = 0;
  std::set<std::vector<int>> emitted_;
};

std::vector<DecodeResult> enumerate_z_approx(const SiblingSystem& sys, const LinearScorer& scorer, double nu = 0.5);

DecodeResult decode_exact_small(const StructureSpace& space, const LinearScorer& scorer,
                                std::uint64_t limit = kEnumerationLimit);
DecodeResult decode_exact_small(const SiblingSystem& sys, const LinearScorer& scorer,
                                std::uint64_t limit = kEnumerationLimit);
// (max, min) over a sibling system by enumeration
std::pair<double, double> exact_extrema(const SiblingSystem& sys, const LinearScorer& scorer,
                                        std::uint64_t limit = kEnumerationLimit);

// Prediction-time decoder for any family: exact where the family allows it,
// enumeration for small spaces, otherwise the best of a sibling draw and `draws` uniform samples.
struct PredictDecode {
  DecodeResult result;
  std::string method;
};
PredictDecode decode_for_predict(const StructureSpace& space, const LinearScorer& scorer, Rng& rng,
                                 std::uint64_t enum_limit = 100000, int draws = 200);

}  // namespace combi
