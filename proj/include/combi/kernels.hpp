#pragma once

#include <Eigen/Dense>

#include <string>

namespace combi {

struct KernelSpec {
  enum class Type { linear, polynomial, rbf };
  Type type = Type::linear;
  int degree = 2;       // polynomial
  double offset = 1.0;  // polynomial: (<a,b> + offset)^degree
  double gamma = 1.0;   // rbf: exp(-gamma |a-b|^2)

  double eval(const Eigen::Ref<const Eigen::VectorXd>& a,
              const Eigen::Ref<const Eigen::VectorXd>& b) const;
  std::string name() const;
  static KernelSpec linear_kernel() { return {}; }
  static KernelSpec polynomial_kernel(int degree, double offset = 1.0) {
    KernelSpec k;
    k.type = Type::polynomial;
    k.degree = degree;
    k.offset = offset;
    return k;
  }
  static KernelSpec rbf_kernel(double gamma) {
    KernelSpec k;
    k.type = Type::rbf;
    k.gamma = gamma;
    return k;
  }
};

// rows of X are instances
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, const KernelSpec& k);
Eigen::MatrixXd gram_matrix_serial(const Eigen::MatrixXd& X, const KernelSpec& k);
// (i,j) = k(X_i, Z_j)
Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z, const KernelSpec& k);

}  // namespace combi
