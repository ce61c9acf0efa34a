#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace darcy {

/// Raised when a factorization fails or the residual contract is violated.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
            std::vector<double> values)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
        values_(std::move(values)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when outside the pattern.
  double coeff(int i, int j) const {
    const auto begin = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i)];
    const auto end = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i) + 1];
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  std::vector<double> multiply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != cols_) throw std::invalid_argument("dimension mismatch in product");
    std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
        s += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
      y[static_cast<std::size_t>(i)] = s;
    }
    return y;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// max |A_ij - A_ji| over the union of both patterns.
  double max_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < rows_; ++i)
      for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
        const int j = col_idx_[static_cast<std::size_t>(k)];
        m = std::max(m, std::abs(values_[static_cast<std::size_t>(k)] - coeff(j, i)));
      }
    return m;
  }

  bool is_symmetric(double rel_tol = 1e-10) const {
    return rows_ == cols_ && max_asymmetry() <= rel_tol * max_abs();
  }

  Eigen::SparseMatrix<double> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (int i = 0; i < rows_; ++i)
      for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
        t.emplace_back(i, col_idx_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]);
    Eigen::SparseMatrix<double> a(rows_, cols_);
    a.setFromTriplets(t.begin(), t.end());
    return a;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
        a(i, col_idx_[static_cast<std::size_t>(k)]) += values_[static_cast<std::size_t>(k)];
    return a;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// Sums duplicates and sorts each row. Summation order within an entry
/// follows the triplet order, so results are reproducible.
inline CsrMatrix compress(int rows, int cols, std::span<const Triplet> triplets) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  std::vector<int> count(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::out_of_range("triplet index out of range");
    ++count[static_cast<std::size_t>(t.row) + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // bucket by row, stable in input order
  std::vector<int> order(triplets.size());
  {
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < triplets.size(); ++k)
      order[static_cast<std::size_t>(fill[static_cast<std::size_t>(triplets[k].row)]++)] = static_cast<int>(k);
  }

  std::vector<int> row_ptr(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<int> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  std::vector<int> row_items;
  for (int i = 0; i < rows; ++i) {
    row_items.assign(order.begin() + count[static_cast<std::size_t>(i)],
                     order.begin() + count[static_cast<std::size_t>(i) + 1]);
    std::stable_sort(row_items.begin(), row_items.end(), [&](int a, int b) {
      return triplets[static_cast<std::size_t>(a)].col < triplets[static_cast<std::size_t>(b)].col;
    });
    for (int k : row_items) {
      const auto& t = triplets[static_cast<std::size_t>(k)];
      if (static_cast<int>(col_idx.size()) > row_ptr[static_cast<std::size_t>(i)] && col_idx.back() == t.col)
        values.back() += t.value;
      else {
        col_idx.push_back(t.col);
        values.push_back(t.value);
      }
    }
    row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(col_idx.size());
  }
  return {rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values)};
}

struct SolveReport {
  double relative_residual = 0.0;
  int refinement_steps = 0;
};

inline double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Relative residual ||Ax - b|| / ||b|| (absolute when b = 0).
inline double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b) {
  const auto ax = a.multiply(x);
  double r = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) r += (ax[i] - b[i]) * (ax[i] - b[i]);
  const double nb = euclidean_norm(b);
  return nb > 0.0 ? std::sqrt(r) / nb : std::sqrt(r);
}

inline constexpr double kResidualTolerance = 1e-10;

/// Direct sparse LU (COLAMD ordering) with up to three steps of iterative
/// refinement. Throws NumericalError when the factorization is singular or
/// the relative residual stays above kResidualTolerance.
///
/// The `symmetric` flag is accepted for interface parity; the same pivoted
/// LU handles the indefinite symmetric systems.
inline std::vector<double> solve(const CsrMatrix& a, std::span<const double> rhs, bool symmetric = false,
                                 SolveReport* report = nullptr) {
  (void)symmetric;
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix must be square");
  if (static_cast<int>(rhs.size()) != a.rows()) throw std::invalid_argument("rhs dimension mismatch");
  const auto n = static_cast<std::size_t>(a.rows());
  if (n == 0) return {};
  if (euclidean_norm(rhs) == 0.0) {
    if (report) *report = {};
    return std::vector<double>(n, 0.0);
  }

  Eigen::SparseMatrix<double> m = a.to_eigen();
  m.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU factorization failed: " + lu.lastErrorMessage());

  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("sparse LU solve failed");

  const double nb = b.norm();
  double res = (m * x - b).norm() / nb;
  int steps = 0;
  while (res > 1e-3 * kResidualTolerance && steps < 3) {
    const Eigen::VectorXd r = b - m * x;
    x += lu.solve(r);
    res = (m * x - b).norm() / nb;
    ++steps;
  }
  if (!(res <= kResidualTolerance))
    throw NumericalError("residual contract violated: relative residual " + std::to_string(res));
  if (report) *report = {res, steps};
  return {x.data(), x.data() + n};
}

}  // namespace darcy
