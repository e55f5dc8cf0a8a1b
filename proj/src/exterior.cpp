#include "magflow/exterior.hpp"

#include <algorithm>

#include "magflow/errors.hpp"

namespace magflow {

namespace {

void collect_tuples(int dim, int k, int start, IndexTuple& current, std::vector<IndexTuple>& out) {
  if (static_cast<int>(current.size()) == k) {
    out.push_back(current);
    return;
  }
  for (int i = start; i < dim; ++i) {
    current.push_back(i);
    collect_tuples(dim, k, i + 1, current, out);
    current.pop_back();
  }
}

// Sign of the permutation sorting the concatenation a ++ b (a, b increasing, disjoint).
double merge_sign(const IndexTuple& a, const IndexTuple& b) {
  int inversions = 0;
  for (int i : a)
    for (int j : b)
      if (i > j) ++inversions;
  return inversions % 2 ? -1.0 : 1.0;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& A, const IndexTuple& rows, const IndexTuple& cols) {
  Eigen::MatrixXd s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = A(rows[i], cols[j]);
  return s;
}

void check_degree(int k, int limit) {
  if (k < 1 || k > limit) {
    throw Error(ErrorKind::DegreeOutOfRange,
                "degree " + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
  }
}

}  // namespace

std::vector<IndexTuple> increasing_tuples(int dim, int k) {
  std::vector<IndexTuple> out;
  IndexTuple current;
  collect_tuples(dim, k, 0, current, out);
  return out;
}

int tuple_index(int dim, const IndexTuple& tuple) {
  // Lexicographic rank: count tuples that precede `tuple` position by position.
  const int k = static_cast<int>(tuple.size());
  int rank = 0;
  int prev = -1;
  for (int pos = 0; pos < k; ++pos) {
    for (int v = prev + 1; v < tuple[pos]; ++v) rank += binomial(dim - v - 1, k - pos - 1);
    prev = tuple[pos];
  }
  return rank;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

MultiVector MultiVector::zero(int dim, int degree) {
  return {dim, degree, Eigen::VectorXd::Zero(binomial(dim, degree))};
}

MultiVector MultiVector::basis(int dim, const IndexTuple& tuple) {
  MultiVector m = zero(dim, static_cast<int>(tuple.size()));
  m.coeffs(tuple_index(dim, tuple)) = 1.0;
  return m;
}

MultiVector MultiVector::operator+(const MultiVector& other) const {
  if (other.dim != dim) throw Error(ErrorKind::DimensionMismatch, "multivectors over different spaces");
  if (other.degree != degree) throw Error(ErrorKind::DegreeMismatch, "multivectors of different degree");
  return {dim, degree, coeffs + other.coeffs};
}

MultiVector MultiVector::operator*(double s) const { return {dim, degree, coeffs * s}; }

MultiVector MultiLinearMap::apply(const MultiVector& xi) const {
  if (xi.degree != degree) throw Error(ErrorKind::DegreeMismatch, "map and multivector degree differ");
  if (xi.dim != in_dim) throw Error(ErrorKind::DimensionMismatch, "multivector not in the map's domain");
  return {out_dim, degree, matrix * xi.coeffs};
}

MultiVector wedge(const std::vector<Eigen::VectorXd>& vectors) {
  if (vectors.empty()) throw Error(ErrorKind::DegreeOutOfRange, "wedge of no vectors");
  const int q = static_cast<int>(vectors.front().size());
  const int k = static_cast<int>(vectors.size());
  check_degree(k, q);
  Eigen::MatrixXd cols(q, k);
  for (int i = 0; i < k; ++i) {
    if (vectors[i].size() != q) throw Error(ErrorKind::DimensionMismatch, "vectors of different length");
    cols.col(i) = vectors[i];
  }
  IndexTuple all(k);
  for (int i = 0; i < k; ++i) all[i] = i;
  MultiVector out = MultiVector::zero(q, k);
  const auto rows = increasing_tuples(q, k);
  for (std::size_t r = 0; r < rows.size(); ++r) out.coeffs(r) = submatrix(cols, rows[r], all).determinant();
  return out;
}

MultiVector wedge(const MultiVector& a, const MultiVector& b) {
  if (a.dim != b.dim) throw Error(ErrorKind::DimensionMismatch, "multivectors over different spaces");
  const int degree = a.degree + b.degree;
  check_degree(degree, a.dim);
  MultiVector out = MultiVector::zero(a.dim, degree);
  const auto ta = increasing_tuples(a.dim, a.degree);
  const auto tb = increasing_tuples(b.dim, b.degree);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a.coeffs(i) == 0.0) continue;
    for (std::size_t j = 0; j < tb.size(); ++j) {
      if (b.coeffs(j) == 0.0) continue;
      IndexTuple merged = ta[i];
      merged.insert(merged.end(), tb[j].begin(), tb[j].end());
      std::sort(merged.begin(), merged.end());
      if (std::adjacent_find(merged.begin(), merged.end()) != merged.end()) continue;
      out.coeffs(tuple_index(a.dim, merged)) += merge_sign(ta[i], tb[j]) * a.coeffs(i) * b.coeffs(j);
    }
  }
  return out;
}

Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& A, int k) {
  check_degree(k, static_cast<int>(std::min(A.rows(), A.cols())));
  const auto rows = increasing_tuples(static_cast<int>(A.rows()), k);
  const auto cols = increasing_tuples(static_cast<int>(A.cols()), k);
  Eigen::MatrixXd C(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) C(i, j) = submatrix(A, rows[i], cols[j]).determinant();
  return C;
}

MultiLinearMap underlined_power(const Eigen::MatrixXd& A, int k) {
  return {k, static_cast<int>(A.cols()), static_cast<int>(A.rows()), compound_matrix(A, k)};
}

MultiLinearMap tilde_wedge(const std::vector<Eigen::MatrixXd>& maps) {
  if (maps.empty()) throw Error(ErrorKind::DegreeOutOfRange, "tilde product of no maps");
  const auto rows = maps.front().rows();
  const auto cols = maps.front().cols();
  for (const auto& m : maps) {
    if (m.rows() != rows || m.cols() != cols) {
      throw Error(ErrorKind::DimensionMismatch, "tilde product factors differ in shape");
    }
  }
  const int k = static_cast<int>(maps.size());
  check_degree(k, static_cast<int>(std::min(rows, cols)));
  // The multilinear part of the degree-k polynomial B -> C_k(B) is recovered by
  // inclusion-exclusion over subsets of the factors.
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(binomial(rows, k), binomial(cols, k));
  for (unsigned subset = 1; subset < (1u << k); ++subset) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows, cols);
    int size = 0;
    for (int i = 0; i < k; ++i) {
      if (subset & (1u << i)) {
        sum += maps[i];
        ++size;
      }
    }
    const double sign = (k - size) % 2 ? -1.0 : 1.0;
    total += sign * compound_matrix(sum, k);
  }
  return {k, static_cast<int>(cols), static_cast<int>(rows), total};
}

MultiLinearMap tilde_product(const MultiLinearMap& a, const MultiLinearMap& b) {
  if (a.in_dim != b.in_dim || a.out_dim != b.out_dim) {
    throw Error(ErrorKind::DimensionMismatch, "tilde product factors act between different spaces");
  }
  const int degree = a.degree + b.degree;
  check_degree(degree, std::min(a.in_dim, a.out_dim));
  const auto inputs = increasing_tuples(a.in_dim, degree);
  const auto splits = increasing_tuples(degree, a.degree);
  MultiLinearMap out{degree, a.in_dim, a.out_dim,
                     Eigen::MatrixXd::Zero(binomial(a.out_dim, degree), inputs.size())};
  // Permutations that only reorder inside each factor contribute j! l! equal
  // terms; what remains is a signed sum over shuffles.
  for (std::size_t col = 0; col < inputs.size(); ++col) {
    const IndexTuple& J = inputs[col];
    MultiVector acc = MultiVector::zero(a.out_dim, degree);
    for (const IndexTuple& positions : splits) {
      IndexTuple first, rest, first_pos, rest_pos;
      for (int p = 0; p < degree; ++p) {
        if (std::binary_search(positions.begin(), positions.end(), p)) {
          first.push_back(J[p]);
          first_pos.push_back(p);
        } else {
          rest.push_back(J[p]);
          rest_pos.push_back(p);
        }
      }
      const double sign = merge_sign(first_pos, rest_pos);
      const MultiVector fa = a.apply(MultiVector::basis(a.in_dim, first));
      const MultiVector fb = b.apply(MultiVector::basis(b.in_dim, rest));
      acc = acc + wedge(fa, fb) * sign;
    }
    out.matrix.col(col) = acc.coeffs;
  }
  return out;
}

double wedge_inner(const MultiVector& a, const MultiVector& b) {
  if (a.degree != b.degree) throw Error(ErrorKind::DegreeMismatch, "inner product of different degrees");
  if (a.dim != b.dim) throw Error(ErrorKind::DimensionMismatch, "inner product over different spaces");
  return a.coeffs.dot(b.coeffs);
}

double full_tensor_inner(const MultiVector& a, const MultiVector& b) {
  double factorial = 1.0;
  for (int i = 2; i <= a.degree; ++i) factorial *= i;
  return factorial * wedge_inner(a, b);
}

}  // namespace magflow
