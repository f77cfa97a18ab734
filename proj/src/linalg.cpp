#include "l2sp/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace l2sp {

void require_finite(const Mat& m, const char* name) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(name) + ": non-finite entries");
  }
}

void require_finite(const Vec& v, const char* name) {
  if (!v.allFinite()) {
    throw InvalidInput(std::string(name) + ": non-finite entries");
  }
}

SpdMatrix::SpdMatrix(Mat m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidInput("SpdMatrix: matrix must be square and non-empty");
  }
  require_finite(m, "SpdMatrix");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, scale)) {
    throw InvalidInput("SpdMatrix: input not symmetric within tolerance");
  }
  mat_ = 0.5 * (m + m.transpose());

  diagonal_ = mat_.isDiagonal(0.0);
  identity_ = diagonal_ && mat_.diagonal().isConstant(1.0, 0.0);

  if (diagonal_) {
    if (mat_.diagonal().minCoeff() < -1e-10 * std::max(1.0, scale)) {
      throw InvalidInput("SpdMatrix: negative diagonal entry");
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(mat_, Eigen::EigenvaluesOnly);
    const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, emax)) {
      throw InvalidInput("SpdMatrix: negative eigenvalue beyond tolerance");
    }
  }
}

SpdMatrix SpdMatrix::identity(Index dim) {
  SpdMatrix s;
  s.mat_ = Mat::Identity(dim, dim);
  s.identity_ = true;
  s.diagonal_ = true;
  return s;
}

SpdMatrix SpdMatrix::diagonal(const Vec& diag) {
  if (diag.size() == 0) throw InvalidInput("SpdMatrix::diagonal: empty");
  require_finite(diag, "SpdMatrix::diagonal");
  if (diag.minCoeff() < 0.0) {
    throw InvalidInput("SpdMatrix::diagonal: negative eigenvalue");
  }
  SpdMatrix s;
  s.mat_ = diag.asDiagonal();
  s.diagonal_ = true;
  s.identity_ = diag.isConstant(1.0, 0.0);
  return s;
}

Vec SpdMatrix::eigenvalues_desc() const {
  if (diagonal_) {
    Vec v = mat_.diagonal();
    std::sort(v.data(), v.data() + v.size(), std::greater<double>());
    return v;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(mat_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

double pinv_rank_tolerance(Index rows, Index cols, double smax) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon() * smax;
}

Vec ridge_solve(const Mat& X, const Vec& y, double lambda) {
  if (X.rows() != y.size()) {
    throw InvalidInput("ridge_solve: X rows must match y size");
  }
  require_finite(X, "ridge_solve: X");
  require_finite(y, "ridge_solve: y");
  if (lambda < 0.0 || !std::isfinite(lambda)) {
    throw InvalidInput("ridge_solve: lambda must be >= 0");
  }
  const Index n = X.rows();
  const Index p = X.cols();

  if (lambda == 0.0) {
    // Minimum-norm least squares via SVD with rank truncation.
    Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double tol = pinv_rank_tolerance(n, p, sv.size() > 0 ? sv(0) : 0.0);
    Vec inv = Vec::Zero(sv.size());
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol) inv(i) = 1.0 / sv(i);
    }
    return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * y));
  }

  if (p <= n) {
    Mat a = X.transpose() * X;
    a.diagonal().array() += lambda;
    return a.llt().solve(X.transpose() * y);
  }
  // Dual n x n system: (X'X + lambda I)^{-1} X' y = X' (XX' + lambda I)^{-1} y.
  Mat k = X * X.transpose();
  k.diagonal().array() += lambda;
  return X.transpose() * k.llt().solve(y);
}

Mat pseudo_inverse(const Mat& X) {
  require_finite(X, "pseudo_inverse: X");
  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double tol =
      pinv_rank_tolerance(X.rows(), X.cols(), sv.size() > 0 ? sv(0) : 0.0);
  Vec inv = Vec::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat row_projector(const Mat& X) {
  require_finite(X, "row_projector: X");
  // P = X^+ X = V_r V_r' over the retained singular directions.
  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double tol =
      pinv_rank_tolerance(X.rows(), X.cols(), sv.size() > 0 ? sv(0) : 0.0);
  Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  const Mat vr = svd.matrixV().leftCols(r);
  return vr * vr.transpose();
}

SymEig sym_eig(const SpdMatrix& S) {
  Eigen::SelfAdjointEigenSolver<Mat> es(S.mat());
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("sym_eig: eigendecomposition failed");
  }
  SymEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

Mat spd_sqrt(const SpdMatrix& S) {
  if (S.is_identity()) return S.mat();
  if (S.is_diagonal()) {
    return Vec(S.mat().diagonal().cwiseMax(0.0).cwiseSqrt()).asDiagonal();
  }
  SymEig eig = sym_eig(S);
  const Vec root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal() * eig.vectors.transpose();
}

double sigma_norm_sq(const Vec& v, const SpdMatrix& S) {
  if (v.size() != S.dim()) {
    throw InvalidInput("sigma_norm_sq: dimension mismatch");
  }
  if (S.is_identity()) return v.squaredNorm();
  return v.dot(S.mat() * v);
}

double sigma_frob_sq(const Mat& A, const SpdMatrix& S) {
  if (A.rows() != S.dim()) {
    throw InvalidInput("sigma_frob_sq: dimension mismatch");
  }
  if (S.is_identity()) return A.squaredNorm();
  if (S.is_diagonal()) {
    const Vec row_sq = A.array().square().rowwise().sum();
    return S.mat().diagonal().dot(row_sq);
  }
  return (A.cwiseProduct(S.mat() * A)).sum();
}

}  // namespace l2sp
