#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "drx/dist.hpp"
#include "drx/error.hpp"

namespace drx {

// Classical OLS inference bundle, one row per coefficient plus the fit
// summary a regression table reports: RMSE = sqrt(SSE/(n-p)), R^2, and the
// F statistic against the constant (intercept-only) model.
struct OlsFit {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  double rmse = 0.0;
  double r2 = 0.0;
  double f_stat = 0.0;
  double f_p_value = 1.0;
  std::size_t n_obs = 0;
  std::size_t n_params = 0;
  std::size_t df_resid = 0;
  bool has_intercept = true;
  std::vector<double> residuals;

  double estimate(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return estimates[i];
    throw DomainError("no coefficient named '" + name + "'");
  }
};

// Least squares via column-pivoted Householder QR. Rank deficiency is an
// error that names the offending columns rather than silently dropping
// them; lag designs get collinear exactly when the caller has made a
// modeling mistake worth hearing about.
inline OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                  const std::vector<std::string>& names, bool has_intercept = true) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (static_cast<std::size_t>(p) != names.size())
    throw DomainError("ols: names/columns mismatch");
  if (n < p + 1)
    throw InsufficientDataError("ols: need at least cols+1 rows, got " +
                                std::to_string(n) + " rows for " +
                                std::to_string(p) + " columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) {
    const auto& perm = qr.colsPermutation().indices();
    std::string cols;
    for (Eigen::Index i = qr.rank(); i < p; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += names[static_cast<std::size_t>(perm[i])];
    }
    throw SingularDesignError("ols: rank-deficient design; collinear columns: " + cols);
  }

  OlsFit fit;
  fit.names = names;
  fit.n_obs = static_cast<std::size_t>(n);
  fit.n_params = static_cast<std::size_t>(p);
  fit.df_resid = static_cast<std::size_t>(n - p);
  fit.has_intercept = has_intercept;

  const Eigen::VectorXd beta = qr.solve(response);
  const Eigen::VectorXd resid = response - design * beta;
  const double sse = resid.squaredNorm();
  const double df = static_cast<double>(n - p);
  const double sigma2 = sse / df;
  fit.rmse = std::sqrt(sigma2);
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  fit.estimates.assign(beta.data(), beta.data() + beta.size());

  // (X'X)^-1 from the QR factors: P R^-1 R^-T P'.
  const Eigen::MatrixXd r_full = qr.matrixR().topLeftCorner(p, p);
  const Eigen::MatrixXd r_inv = r_full.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov_unscaled =
      qr.colsPermutation() * (r_inv * r_inv.transpose()) *
      qr.colsPermutation().transpose();

  fit.std_errors.resize(p);
  fit.t_stats.resize(p);
  fit.p_values.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double se = std::sqrt(std::max(0.0, cov_unscaled(i, i)) * sigma2);
    fit.std_errors[i] = se;
    if (se > 0.0) {
      fit.t_stats[i] = beta[i] / se;
      fit.p_values[i] = t_tail_p(fit.t_stats[i], df);
    } else {
      // Exact fit: the statistic degenerates. Report the limit values.
      fit.t_stats[i] = beta[i] == 0.0
                           ? 0.0
                           : std::copysign(std::numeric_limits<double>::infinity(), beta[i]);
      fit.p_values[i] = beta[i] == 0.0 ? 1.0 : 0.0;
    }
  }

  double sst;
  if (has_intercept) {
    const double ybar = response.mean();
    sst = (response.array() - ybar).matrix().squaredNorm();
  } else {
    sst = response.squaredNorm();
  }
  fit.r2 = sst > 0.0 ? 1.0 - sse / sst : 0.0;
  if (fit.r2 < 0.0) fit.r2 = 0.0;
  if (fit.r2 > 1.0) fit.r2 = 1.0;

  const std::size_t df_model = has_intercept ? fit.n_params - 1 : fit.n_params;
  if (df_model == 0 || sst <= 0.0) {
    fit.f_stat = std::numeric_limits<double>::quiet_NaN();
    fit.f_p_value = 1.0;
  } else if (sse <= 0.0) {
    fit.f_stat = std::numeric_limits<double>::max();
    fit.f_p_value = 0.0;
  } else {
    fit.f_stat = ((sst - sse) / static_cast<double>(df_model)) / sigma2;
    fit.f_p_value = f_tail_p(fit.f_stat, static_cast<double>(df_model), df);
  }
  return fit;
}

}  // namespace drx
