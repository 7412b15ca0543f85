#include "combi/kernels.hpp"

#include "combi/error.hpp"

#include <cmath>

namespace combi {

double KernelSpec::eval(const Eigen::Ref<const Eigen::VectorXd>& a,
                        const Eigen::Ref<const Eigen::VectorXd>& b) const {
  if (a.size() != b.size()) throw ValidationError("kernel arguments differ in dimension");
  switch (type) {
    case Type::linear:
      return a.dot(b);
    case Type::polynomial:
      return std::pow(a.dot(b) + offset, degree);
    case Type::rbf:
      return std::exp(-gamma * (a - b).squaredNorm());
  }
  return 0.0;
}

std::string KernelSpec::name() const {
  switch (type) {
    case Type::linear:
      return "linear";
    case Type::polynomial:
      return "polynomial";
    case Type::rbf:
      return "rbf";
  }
  return "linear";
}

Eigen::MatrixXd gram_matrix_serial(const Eigen::MatrixXd& X, const KernelSpec& k) {
  long m = X.rows();
  Eigen::MatrixXd K(m, m);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j <= i; ++j) K(i, j) = K(j, i) = k.eval(X.row(i).transpose(), X.row(j).transpose());
  return K;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const KernelSpec& k) {
  long m = X.rows();
  Eigen::MatrixXd K(m, m);
  // each entry is written once; no reduction involved
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < m; ++i)
    for (long j = 0; j <= i; ++j) K(i, j) = K(j, i) = k.eval(X.row(i).transpose(), X.row(j).transpose());
  return K;
}

Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const KernelSpec& k) {
  Eigen::MatrixXd G(X.rows(), Z.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < X.rows(); ++i)
    for (long j = 0; j < Z.rows(); ++j) G(i, j) = k.eval(X.row(i).transpose(), Z.row(j).transpose());
  return G;
}

}  // namespace combi
