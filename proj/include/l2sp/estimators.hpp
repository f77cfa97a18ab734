#pragma once

#include "l2sp/linalg.hpp"
#include "l2sp/task.hpp"

#include <optional>
#include <string>

namespace l2sp {

enum class ModelKind { Source, ScratchTarget, TransferTarget };

struct FittedModel {
  Vec beta;
  ModelKind kind;
  double lambda;
  std::optional<std::string> prior_ref;  // present iff kind == TransferTarget
};

/// Ridge (or ridgeless minimum-norm) fit on the source data.
FittedModel fit_source(const Mat& X0, const Vec& y0, double lambda0);

/// Ridge (or ridgeless) fit on the target data from scratch.
FittedModel fit_scratch(const Mat& X1, const Vec& y1, double lambda1);

/// L2-SP fit: argmin ||y1 - X1 b||^2 + lambda1 ||b - beta0||^2.
/// For lambda1 = 0 this is the limit beta0 + X1^+ (y1 - X1 beta0).
FittedModel fit_transfer(const Mat& X1, const Vec& y1, double lambda1,
                         const Vec& beta0,
                         std::string prior_ref = "source-fit");

/// ||beta - w1||^2_{Sigma1}: the expected out-of-sample target risk.
double target_risk(const Vec& beta, const TaskPair& tp);

}  // namespace l2sp
