#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace l2sp {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an input violates an operation's contract (dimensions,
/// non-finite entries, infeasible parameters). CLI maps this to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative procedure fails to converge. CLI exit code 1.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_finite(const Mat& m, const char* name);
void require_finite(const Vec& v, const char* name);

/// Symmetric positive semi-definite matrix. Construction symmetrizes after
/// checking symmetry to 1e-12 relative and rejects eigenvalues below
/// -1e-10 * max|eig|. Identity and diagonal structure are detected once so
/// downstream code can take cheap paths.
class SpdMatrix {
 public:
  explicit SpdMatrix(Mat m);

  static SpdMatrix identity(Index dim);
  /// Diagonal Sigma from a list of nonnegative eigenvalues (kept in the
  /// given order, i.e. the standard basis is the eigenbasis).
  static SpdMatrix diagonal(const Vec& diag);

  Index dim() const { return mat_.rows(); }
  const Mat& mat() const { return mat_; }
  bool is_identity() const { return identity_; }
  bool is_diagonal() const { return diagonal_; }

  /// Eigenvalues sorted descending. O(1) for diagonal matrices.
  Vec eigenvalues_desc() const;

 private:
  SpdMatrix() = default;
  Mat mat_;
  bool identity_ = false;
  bool diagonal_ = false;
};

/// (X'X + lambda I)^{-1} X' y for lambda > 0; the minimum-norm least-squares
/// solution X^+ y for lambda = 0. Solves the n x n dual system when p > n.
Vec ridge_solve(const Mat& X, const Vec& y, double lambda);

/// Moore-Penrose pseudoinverse via SVD with singular values below
/// max(n,p) * eps * s_max treated as zero.
Mat pseudo_inverse(const Mat& X);

/// Orthogonal projector onto row(X), P = X^+ X.
Mat row_projector(const Mat& X);

struct SymEig {
  Vec values;   // descending
  Mat vectors;  // columns match values
};

/// Symmetric eigendecomposition, eigenvalues sorted descending.
SymEig sym_eig(const SpdMatrix& S);

/// Symmetric PSD square root R with R*R = S.
Mat spd_sqrt(const SpdMatrix& S);

/// v' S v
double sigma_norm_sq(const Vec& v, const SpdMatrix& S);

/// Tr(A' S A), computed as <A, S A>_F without forming A' S A.
double sigma_frob_sq(const Mat& A, const SpdMatrix& S);

/// Rank tolerance used for pseudo-inverse truncation.
double pinv_rank_tolerance(Index rows, Index cols, double smax);

}  // namespace l2sp
