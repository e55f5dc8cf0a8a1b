#pragma once

#include <vector>

#include <Eigen/Dense>

namespace magflow {

using IndexTuple = std::vector<int>;

/// Strictly increasing k-tuples over {0, ..., dim-1} in lexicographic order.
/// This ordering fixes the basis of Lambda^k R^dim everywhere in the library.
std::vector<IndexTuple> increasing_tuples(int dim, int k);

/// Position of an increasing tuple in the lexicographic basis.
int tuple_index(int dim, const IndexTuple& tuple);

int binomial(int n, int k);

/// Element of Lambda^k R^q stored on the increasing-tuple basis.
struct MultiVector {
  int dim = 0;
  int degree = 0;
  Eigen::VectorXd coeffs;

  static MultiVector zero(int dim, int degree);
  static MultiVector basis(int dim, const IndexTuple& tuple);

  MultiVector operator+(const MultiVector& other) const;
  MultiVector operator*(double s) const;
};

/// Linear map Lambda^k R^m -> Lambda^k R^q as a C(q,k) x C(m,k) matrix.
struct MultiLinearMap {
  int degree = 0;
  int in_dim = 0;
  int out_dim = 0;
  Eigen::MatrixXd matrix;

  MultiVector apply(const MultiVector& xi) const;
  /// Frame norm over the orthonormal increasing-tuple basis.
  double norm() const { return matrix.norm(); }
};

/// xi_1 ^ ... ^ xi_k; coefficients are the k x k minors of [xi_1 ... xi_k].
MultiVector wedge(const std::vector<Eigen::VectorXd>& vectors);

/// Exterior product of two multivectors on the same space.
MultiVector wedge(const MultiVector& a, const MultiVector& b);

/// k-th compound matrix: all k x k minors of A, rows and columns on the
/// increasing-tuple bases.
Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& A, int k);

/// A^{k underlined} = A^k / k!, acting on decomposables as A(xi_1) ^ ... ^ A(xi_k).
MultiLinearMap underlined_power(const Eigen::MatrixXd& A, int k);

/// A_1 ~^ ... ~^ A_k, the sum over permutations of A_1(xi_s1) ^ ... ^ A_k(xi_sk).
/// Obtained from compound matrices by polarization.
MultiLinearMap tilde_wedge(const std::vector<Eigen::MatrixXd>& maps);

/// Product of a degree-j and a degree-l map, normalized by 1/(j! l!) so that
/// it reproduces tilde_wedge on degree-1 factors. Associative and symmetric.
MultiLinearMap tilde_product(const MultiLinearMap& a, const MultiLinearMap& b);

/// The wedge metric: increasing-tuple basis elements are orthonormal.
double wedge_inner(const MultiVector& a, const MultiVector& b);

/// Inner product of the underlying antisymmetric tensors; equals k! times
/// the wedge metric.
double full_tensor_inner(const MultiVector& a, const MultiVector& b);

}  // namespace magflow
