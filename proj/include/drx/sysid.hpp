#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "drx/ols.hpp"
#include "drx/rng.hpp"
#include "drx/series.hpp"
#include "drx/stats.hpp"

namespace drx {

// ---------------------------------------------------------------------------
// Regime segmentation
// ---------------------------------------------------------------------------

// Quantile (or explicit) price threshold and the induced partition of the
// valid samples. Every high index has P > threshold, strictly.
struct RegimeSplit {
  double threshold = 0.0;
  std::vector<std::size_t> moderate;
  std::vector<std::size_t> high;
};

inline RegimeSplit split_regimes_at(const AlignedSeries& s, double threshold) {
  RegimeSplit split;
  split.threshold = threshold;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.mask[i]) continue;
    (s.prices[i] > threshold ? split.high : split.moderate).push_back(i);
  }
  return split;
}

inline RegimeSplit split_regimes(const AlignedSeries& s, double quantile_frac) {
  if (!(quantile_frac > 0.0 && quantile_frac < 1.0))
    throw DomainError("split_regimes: quantile outside (0,1)");
  if (s.valid_count() < 20)
    throw DegenerateInputError("split_regimes: need >= 20 valid samples");
  return split_regimes_at(s, quantile(s.prices, quantile_frac, s.mask));
}

// ---------------------------------------------------------------------------
// Model types
// ---------------------------------------------------------------------------

enum class Transform { identity, log };

// ARX difference equation
//   Q(t) = sum_i a_i Q(t-i) + sum_j b_j T(P(t-j)) + intercept + e_t
// with T either the identity or log to the configured base (natural by
// default). Lags are strictly increasing and start at 1.
struct ArxModel {
  std::vector<int> ar_lags;
  std::vector<double> ar_coeffs;
  std::vector<int> x_lags;
  std::vector<double> x_coeffs;
  double intercept = 0.0;
  Transform transform = Transform::identity;
  double log_base = 2.718281828459045235;  // natural log unless configured
  double noise_std = 0.0;
  int interval_mins = 15;

  int max_ar_lag() const { return ar_lags.empty() ? 0 : ar_lags.back(); }
  int max_x_lag() const { return x_lags.empty() ? 0 : x_lags.back(); }
  int max_lag() const { return std::max(max_ar_lag(), max_x_lag()); }

  double apply_transform(double price) const {
    if (transform == Transform::identity) return price;
    if (!(price > 0.0))
      throw TransformDomainError("log transform of nonpositive price " +
                                 std::to_string(price));
    return std::log(price) / std::log(log_base);
  }

  void validate() const {
    auto check = [](const std::vector<int>& lags, const std::vector<double>& c,
                    const char* what) {
      if (lags.size() != c.size())
        throw DomainError(std::string(what) + ": lag/coefficient count mismatch");
      for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 1) throw DomainError(std::string(what) + ": lags must be >= 1");
        if (i > 0 && lags[i] <= lags[i - 1])
          throw DomainError(std::string(what) + ": lags must be strictly increasing");
      }
    };
    check(ar_lags, ar_coeffs, "ar");
    check(x_lags, x_coeffs, "x");
    if (!(log_base > 0.0) || log_base == 1.0)
      throw DomainError("invalid log base");
  }
};

// Rational transfer function in the backshift variable z^-1:
// numerator[i] and denominator[i] multiply z^-i; denominator[0] == 1.
struct TransferFunction {
  std::vector<double> numerator;
  std::vector<double> denominator;
};

// Rearranges the difference equation into B(z^-1)/A(z^-1): the numerator
// is the x polynomial, the denominator 1 minus the AR polynomial.
inline TransferFunction to_transfer_function(const ArxModel& m) {
  m.validate();
  if (m.ar_lags.empty() && m.x_lags.empty())
    throw DomainError("to_transfer_function: model has no coefficients");
  TransferFunction tf;
  tf.numerator.assign(static_cast<std::size_t>(m.max_x_lag()) + 1, 0.0);
  for (std::size_t j = 0; j < m.x_lags.size(); ++j)
    tf.numerator[static_cast<std::size_t>(m.x_lags[j])] = m.x_coeffs[j];
  tf.denominator.assign(static_cast<std::size_t>(m.max_ar_lag()) + 1, 0.0);
  tf.denominator[0] = 1.0;
  for (std::size_t i = 0; i < m.ar_lags.size(); ++i)
    tf.denominator[static_cast<std::size_t>(m.ar_lags[i])] = -m.ar_coeffs[i];
  return tf;
}

// Inverse of to_transfer_function for round-trip checks and model files.
inline ArxModel from_transfer_function(const TransferFunction& tf) {
  if (tf.denominator.empty() || tf.denominator[0] != 1.0)
    throw DomainError("from_transfer_function: denominator must lead with 1");
  ArxModel m;
  for (std::size_t i = 1; i < tf.denominator.size(); ++i)
    if (tf.denominator[i] != 0.0) {
      m.ar_lags.push_back(static_cast<int>(i));
      m.ar_coeffs.push_back(-tf.denominator[i]);
    }
  for (std::size_t j = 1; j < tf.numerator.size(); ++j)
    if (tf.numerator[j] != 0.0) {
      m.x_lags.push_back(static_cast<int>(j));
      m.x_coeffs.push_back(tf.numerator[j]);
    }
  return m;
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

enum class StabilityClass { stable, marginal, unstable };

struct StabilityResult {
  std::vector<double> root_moduli;  // characteristic roots, sorted ascending
  double max_modulus = 0.0;
  StabilityClass cls = StabilityClass::stable;
  bool stable = false;  // strictly inside the unit circle
};

// Characteristic roots of the denominator via the companion-matrix
// eigenvalue method. In z the polynomial is z^m + d1 z^(m-1) + ... + dm
// where di = denominator[i]; stability means all roots strictly inside
// the unit circle. Moduli within 1e-9 of the circle are flagged marginal.
inline StabilityResult stability(const TransferFunction& tf) {
  if (tf.denominator.size() < 2)
    throw DomainError("stability: denominator degree must be >= 1");
  const std::size_t m = tf.denominator.size() - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i)
    companion(0, i) = -tf.denominator[i + 1];
  for (std::size_t i = 1; i < m; ++i) companion(i, i - 1) = 1.0;

  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  StabilityResult r;
  r.root_moduli.reserve(m);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    r.root_moduli.push_back(std::abs(es.eigenvalues()[i]));
  std::sort(r.root_moduli.begin(), r.root_moduli.end());
  r.max_modulus = r.root_moduli.back();

  constexpr double kTol = 1e-9;
  if (r.max_modulus < 1.0 - kTol)
    r.cls = StabilityClass::stable;
  else if (r.max_modulus <= 1.0 + kTol)
    r.cls = StabilityClass::marginal;
  else
    r.cls = StabilityClass::unstable;
  r.stable = r.cls == StabilityClass::stable;
  return r;
}

inline StabilityResult stability(const ArxModel& m) {
  return stability(to_transfer_function(m));
}

// ---------------------------------------------------------------------------
// Regression-row construction
// ---------------------------------------------------------------------------

namespace detail {

// Complete-case rows: t is usable when the sample itself, every AR lag of
// the load, and every exogenous lag of the price are valid grid slots.
// A nonpositive price under the log transform inside the candidate scope
// is a hard error, not a silent drop.
inline std::vector<std::size_t> regression_rows(
    const AlignedSeries& s, const std::vector<int>& ar_lags,
    const std::vector<int>& x_lags, Transform transform,
    const std::optional<std::vector<std::size_t>>& scope) {
  std::vector<std::size_t> rows;
  auto usable = [&](std::size_t t) {
    if (!s.mask[t]) return false;
    for (int lag : ar_lags) {
      if (static_cast<std::size_t>(lag) > t) return false;
      if (!s.mask[t - static_cast<std::size_t>(lag)]) return false;
    }
    for (int lag : x_lags) {
      if (static_cast<std::size_t>(lag) > t) return false;
      const std::size_t u = t - static_cast<std::size_t>(lag);
      if (!s.mask[u]) return false;
      if (transform == Transform::log && !(s.prices[u] > 0.0))
        throw TransformDomainError(
            "log transform: nonpositive price at " + format_timestamp(s.time_at(u)));
    }
    return true;
  };
  if (scope) {
    for (std::size_t t : *scope)
      if (t < s.size() && usable(t)) rows.push_back(t);
  } else {
    for (std::size_t t = 0; t < s.size(); ++t)
      if (usable(t)) rows.push_back(t);
  }
  return rows;
}

inline std::string lag_name(const char* sym, int lag) {
  return std::string(sym) + std::to_string(lag);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// AR and two-step ARX estimation
// ---------------------------------------------------------------------------

struct ArFitResult {
  OlsFit fit;
  ArxModel model;                 // beta empty
  std::vector<std::size_t> rows;  // grid indices of the regression rows
  std::vector<double> residual;   // Q_res per row (step-1 residual)
};

// AR regression of the load on its own lags plus an intercept. The
// residual series is what step 2 of the two-step procedure consumes.
inline ArFitResult fit_ar(const AlignedSeries& s, const std::vector<int>& lags,
                          const std::optional<std::vector<std::size_t>>& scope = {}) {
  if (lags.empty()) throw DomainError("fit_ar: empty lag set");
  const auto rows = detail::regression_rows(s, lags, {}, Transform::identity, scope);
  const std::size_t p = lags.size() + 1;
  if (rows.size() < 10 * p)
    throw InsufficientDataError("fit_ar: need >= 10 rows per coefficient, have " +
                                std::to_string(rows.size()));

  Eigen::MatrixXd X(rows.size(), p);
  Eigen::VectorXd y(rows.size());
  std::vector<std::string> names;
  for (int lag : lags) names.push_back(detail::lag_name("alpha", lag));
  names.push_back("alpha0");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t t = rows[r];
    for (std::size_t c = 0; c < lags.size(); ++c)
      X(r, c) = s.loads[t - static_cast<std::size_t>(lags[c])];
    X(r, lags.size()) = 1.0;
    y(r) = s.loads[t];
  }

  ArFitResult out;
  out.fit = ols(X, y, names, /*has_intercept=*/true);
  out.rows = rows;
  out.residual = out.fit.residuals;
  out.model.ar_lags = lags;
  out.model.ar_coeffs.assign(out.fit.estimates.begin(),
                             out.fit.estimates.end() - 1);
  out.model.intercept = out.fit.estimates.back();
  out.model.noise_std = out.fit.rmse;
  out.model.interval_mins = s.interval_mins;
  return out;
}

struct TwoStepSpec {
  std::vector<int> ar_lags;
  std::vector<int> x_lags;
  Transform transform = Transform::identity;
  double log_base = 2.718281828459045235;
  // Candidate row indices (e.g. a regime's index set); all rows if absent.
  std::optional<std::vector<std::size_t>> scope;
};

struct TwoStepFit {
  OlsFit step1;  // AR table (alpha rows)
  OlsFit step2;  // residual-on-price table (beta rows)
  ArxModel model;
  double combined_r2 = 0.0;  // explained share of Q's variance over the rows
  std::vector<std::size_t> rows;
};

// The two-step procedure: fit the AR part, then regress its residual on
// lagged (transformed) prices to isolate the net price contribution. Both
// steps run over the same complete-case row set so the combined R^2
// decomposes exactly. The combined intercept is the sum of the two step
// intercepts. Deliberately not equivalent to joint OLS.
inline TwoStepFit two_step_arx(const AlignedSeries& s, const TwoStepSpec& spec) {
  if (spec.ar_lags.empty()) throw DomainError("two_step_arx: empty AR lag set");
  const auto rows = detail::regression_rows(s, spec.ar_lags, spec.x_lags,
                                            spec.transform, spec.scope);
  const std::size_t p_needed = spec.ar_lags.size() + spec.x_lags.size() + 1;
  if (rows.size() < 10 * p_needed)
    throw InsufficientDataError("two_step_arx: only " + std::to_string(rows.size()) +
                                " usable rows");

  TwoStepFit out;
  out.rows = rows;

  // Step 1: AR with intercept.
  {
    Eigen::MatrixXd X(rows.size(), spec.ar_lags.size() + 1);
    Eigen::VectorXd y(rows.size());
    std::vector<std::string> names;
    for (int lag : spec.ar_lags) names.push_back(detail::lag_name("alpha", lag));
    names.push_back("alpha0");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t t = rows[r];
      for (std::size_t c = 0; c < spec.ar_lags.size(); ++c)
        X(r, c) = s.loads[t - static_cast<std::size_t>(spec.ar_lags[c])];
      X(r, spec.ar_lags.size()) = 1.0;
      y(r) = s.loads[t];
    }
    out.step1 = ols(X, y, names, true);
  }

  out.model.ar_lags = spec.ar_lags;
  out.model.ar_coeffs.assign(out.step1.estimates.begin(),
                             out.step1.estimates.end() - 1);
  out.model.transform = spec.transform;
  out.model.log_base = spec.log_base;
  out.model.interval_mins = s.interval_mins;

  if (spec.x_lags.empty()) {
    // Degenerate two-step: reduces exactly to fit_ar.
    out.step2 = out.step1;
    out.model.intercept = out.step1.estimates.back();
    out.model.noise_std = out.step1.rmse;
    out.combined_r2 = out.step1.r2;
    return out;
  }

  // Step 2: step-1 residual on transformed lagged prices with intercept.
  ArxModel transformer;
  transformer.transform = spec.transform;
  transformer.log_base = spec.log_base;
  {
    Eigen::MatrixXd X(rows.size(), spec.x_lags.size() + 1);
    Eigen::VectorXd y(rows.size());
    std::vector<std::string> names;
    for (int lag : spec.x_lags) names.push_back(detail::lag_name("beta", lag));
    names.push_back("beta0");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t t = rows[r];
      for (std::size_t c = 0; c < spec.x_lags.size(); ++c)
        X(r, c) = transformer.apply_transform(
            s.prices[t - static_cast<std::size_t>(spec.x_lags[c])]);
      X(r, spec.x_lags.size()) = 1.0;
      y(r) = out.step1.residuals[r];
    }
    out.step2 = ols(X, y, names, true);
  }

  out.model.x_lags = spec.x_lags;
  out.model.x_coeffs.assign(out.step2.estimates.begin(),
                            out.step2.estimates.end() - 1);
  out.model.intercept = out.step1.estimates.back() + out.step2.estimates.back();
  out.model.noise_std = out.step2.rmse;

  // Combined R^2 against the original load variance over the same rows.
  {
    double ybar = 0.0;
    for (std::size_t t : rows) ybar += s.loads[t];
    ybar /= static_cast<double>(rows.size());
    double sst = 0.0;
    for (std::size_t t : rows) sst += (s.loads[t] - ybar) * (s.loads[t] - ybar);
    double sse2 = 0.0;
    for (double e : out.step2.residuals) sse2 += e * e;
    out.combined_r2 = sst > 0.0 ? 1.0 - sse2 / sst : 0.0;
  }
  return out;
}

// Joint single-pass OLS on all regressors, for comparison with the
// two-step reference numbers.
inline TwoStepFit joint_arx(const AlignedSeries& s, const TwoStepSpec& spec) {
  if (spec.ar_lags.empty()) throw DomainError("joint_arx: empty AR lag set");
  const auto rows = detail::regression_rows(s, spec.ar_lags, spec.x_lags,
                                            spec.transform, spec.scope);
  const std::size_t p = spec.ar_lags.size() + spec.x_lags.size() + 1;
  if (rows.size() < 10 * p)
    throw InsufficientDataError("joint_arx: only " + std::to_string(rows.size()) +
                                " usable rows");
  ArxModel transformer;
  transformer.transform = spec.transform;
  transformer.log_base = spec.log_base;

  Eigen::MatrixXd X(rows.size(), p);
  Eigen::VectorXd y(rows.size());
  std::vector<std::string> names;
  for (int lag : spec.ar_lags) names.push_back(detail::lag_name("alpha", lag));
  for (int lag : spec.x_lags) names.push_back(detail::lag_name("beta", lag));
  names.push_back("eps0");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t t = rows[r];
    std::size_t c = 0;
    for (int lag : spec.ar_lags)
      X(r, c++) = s.loads[t - static_cast<std::size_t>(lag)];
    for (int lag : spec.x_lags)
      X(r, c++) = transformer.apply_transform(
          s.prices[t - static_cast<std::size_t>(lag)]);
    X(r, c) = 1.0;
    y(r) = s.loads[t];
  }

  TwoStepFit out;
  out.rows = rows;
  out.step1 = out.step2 = ols(X, y, names, true);
  out.model = transformer;
  out.model.ar_lags = spec.ar_lags;
  out.model.x_lags = spec.x_lags;
  out.model.interval_mins = s.interval_mins;
  out.model.ar_coeffs.assign(out.step1.estimates.begin(),
                             out.step1.estimates.begin() + spec.ar_lags.size());
  out.model.x_coeffs.assign(out.step1.estimates.begin() + spec.ar_lags.size(),
                            out.step1.estimates.end() - 1);
  out.model.intercept = out.step1.estimates.back();
  out.model.noise_std = out.step1.rmse;
  out.combined_r2 = out.step1.r2;
  return out;
}

// ---------------------------------------------------------------------------
// Lag selection
// ---------------------------------------------------------------------------

struct LagSelection {
  std::vector<int> lags;
  std::string diagnostic;  // set when everything was pruned
};

// Backward elimination on the AR fit: start from 1..max_lag, repeatedly
// drop the least significant lag until every |t| >= threshold (pruning
// never touches the intercept). The pinned reproduction path is simply
// passing the configured lag set straight to the fit.
inline LagSelection select_lags_tprune(const AlignedSeries& s, int max_lag,
                                       double t_threshold = 2.0,
                                       const std::optional<std::vector<std::size_t>>& scope = {}) {
  if (max_lag < 1) throw DomainError("select_lags: max_lag must be >= 1");
  LagSelection sel;
  for (int k = 1; k <= max_lag; ++k) sel.lags.push_back(k);
  while (!sel.lags.empty()) {
    const ArFitResult ar = fit_ar(s, sel.lags, scope);
    double worst = std::numeric_limits<double>::infinity();
    std::size_t worst_idx = 0;
    for (std::size_t i = 0; i < sel.lags.size(); ++i) {  // skip intercept row
      const double abs_t = std::fabs(ar.fit.t_stats[i]);
      if (abs_t < worst) {
        worst = abs_t;
        worst_idx = i;
      }
    }
    if (worst >= t_threshold) return sel;
    sel.lags.erase(sel.lags.begin() + static_cast<std::ptrdiff_t>(worst_idx));
  }
  sel.diagnostic = "all lags pruned at |t| < " + std::to_string(t_threshold);
  return sel;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CrossValidation {
  TwoStepFit train;
  double test_r2 = 0.0;
  double test_rmse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

enum class Estimator { two_step, joint };

// Random row-level split (lag windows stay intact inside each row), fit on
// the training half, evaluate one-step predictions on the held-out half.
// Deterministic for a fixed seed.
inline CrossValidation cross_validate(const AlignedSeries& s, const TwoStepSpec& spec,
                                      double train_fraction, std::uint64_t seed,
                                      Estimator estimator = Estimator::two_step) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DomainError("cross_validate: train fraction outside (0,1)");
  auto rows = detail::regression_rows(s, spec.ar_lags, spec.x_lags, spec.transform,
                                      spec.scope);
  Rng rng(seed);
  for (std::size_t i = rows.size(); i > 1; --i)
    std::swap(rows[i - 1], rows[rng.below(i)]);
  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
  if (n_train == 0 || n_train == rows.size())
    throw InsufficientDataError("cross_validate: degenerate split");

  std::vector<std::size_t> train_rows(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  TwoStepSpec train_spec = spec;
  train_spec.scope = train_rows;

  CrossValidation cv;
  cv.train = estimator == Estimator::joint ? joint_arx(s, train_spec)
                                           : two_step_arx(s, train_spec);
  cv.n_train = train_rows.size();
  cv.n_test = test_rows.size();

  const ArxModel& m = cv.train.model;
  double ybar = 0.0;
  for (std::size_t t : test_rows) ybar += s.loads[t];
  ybar /= static_cast<double>(test_rows.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t t : test_rows) {
    double pred = m.intercept;
    for (std::size_t i = 0; i < m.ar_lags.size(); ++i)
      pred += m.ar_coeffs[i] * s.loads[t - static_cast<std::size_t>(m.ar_lags[i])];
    for (std::size_t j = 0; j < m.x_lags.size(); ++j)
      pred += m.x_coeffs[j] *
              m.apply_transform(s.prices[t - static_cast<std::size_t>(m.x_lags[j])]);
    sse += (s.loads[t] - pred) * (s.loads[t] - pred);
    sst += (s.loads[t] - ybar) * (s.loads[t] - ybar);
  }
  cv.test_r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  cv.test_rmse = std::sqrt(sse / static_cast<double>(test_rows.size()));
  return cv;
}

// ---------------------------------------------------------------------------
// Peak-regime row scope
// ---------------------------------------------------------------------------

// Rows for the high-price fit: t qualifies when the surge anchor time
// t - anchor_lag falls inside the clock window, and (optionally) the price
// at the anchor exceeds the threshold. anchor_lag is normally the model's
// pure delay, so the regression target trails the windowed surge.
struct PeakScopeOptions {
  int window_start_tod = 14 * 60;       // 14:00
  int window_end_tod = 14 * 60 + 30;    // 14:30, window is [start, end)
  int anchor_lag = 4;
  double surge_threshold = 0.0;
  bool surge_only = true;
};

inline std::vector<std::size_t> peak_scope(const AlignedSeries& s,
                                           const PeakScopeOptions& opt) {
  if (opt.window_start_tod >= opt.window_end_tod)
    throw DomainError("peak_scope: degenerate window");
  std::vector<std::size_t> scope;
  const std::size_t lag = static_cast<std::size_t>(opt.anchor_lag);
  for (std::size_t t = lag; t < s.size(); ++t) {
    const std::size_t anchor = t - lag;
    if (!s.mask[anchor]) continue;
    const int tod = minute_of_day(s.time_at(anchor));
    if (tod < opt.window_start_tod || tod >= opt.window_end_tod) continue;
    if (opt.surge_only && !(s.prices[anchor] > opt.surge_threshold)) continue;
    scope.push_back(t);
  }
  return scope;
}

}  // namespace drx
