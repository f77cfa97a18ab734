#include "l2sp/estimators.hpp"

namespace l2sp {

FittedModel fit_source(const Mat& X0, const Vec& y0, double lambda0) {
  return FittedModel{ridge_solve(X0, y0, lambda0), ModelKind::Source, lambda0,
                     std::nullopt};
}

FittedModel fit_scratch(const Mat& X1, const Vec& y1, double lambda1) {
  return FittedModel{ridge_solve(X1, y1, lambda1), ModelKind::ScratchTarget,
                     lambda1, std::nullopt};
}

FittedModel fit_transfer(const Mat& X1, const Vec& y1, double lambda1,
                         const Vec& beta0, std::string prior_ref) {
  if (X1.cols() != beta0.size()) {
    throw InvalidInput("fit_transfer: beta0 size must match X1 columns");
  }
  require_finite(beta0, "fit_transfer: beta0");
  // (X'X + lambda I)^{-1} (X'y + lambda beta0) = beta0 + ridge_solve(X, y - X beta0);
  // the second form covers lambda = 0 as the project-onto-constraints limit.
  Vec beta = beta0 + ridge_solve(X1, y1 - X1 * beta0, lambda1);
  return FittedModel{std::move(beta), ModelKind::TransferTarget, lambda1,
                     std::move(prior_ref)};
}

double target_risk(const Vec& beta, const TaskPair& tp) {
  if (beta.size() != tp.p()) {
    throw InvalidInput("target_risk: beta size must equal p");
  }
  return sigma_norm_sq(beta - tp.w1(), tp.Sigma1());
}

}  // namespace l2sp
