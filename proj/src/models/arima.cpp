// Copyright 2026 The Tickwatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tickwatch/models/arima.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "tickwatch/core/error.hpp"
#include "tickwatch/kernels/kernels.hpp"
#include "tickwatch/models/json_io.hpp"

namespace tickwatch::models {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string OrderString(const ArimaOrder& o) {
  return "(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," +
         std::to_string(o.q) + ")";
}

std::vector<double> Difference(std::span<const double> x, int d) {
  std::vector<double> y(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = y.size() - 1; i > 0; --i) y[i] -= y[i - 1];
    y.erase(y.begin());
  }
  return y;
}

// Parameter vector layout: [intercept, ar_1..ar_p, ma_1..ma_q].
struct ArmaParams {
  int p = 0;
  int q = 0;
  Eigen::VectorXd beta;
};

// One pass of the ARMA recursion over y. pred (size m + 1) receives the
// one-step predictions, NaN for t < p; resid receives e_t (0 for t < p).
void ArmaRecursion(const ArmaParams& params, std::span<const double> y,
                   std::vector<double>& pred, std::vector<double>& resid) {
  const std::size_t m = y.size();
  const auto p = static_cast<std::size_t>(params.p);
  const auto q = static_cast<std::size_t>(params.q);
  pred.assign(m + 1, kNaN);
  resid.assign(m, 0.0);
  const double c = params.beta[0];
  for (std::size_t t = p; t <= m; ++t) {
    double f = c;
    for (std::size_t i = 1; i <= p; ++i) f += params.beta[static_cast<Eigen::Index>(i)] * y[t - i];
    for (std::size_t j = 1; j <= q && j <= t; ++j) {
      f += params.beta[static_cast<Eigen::Index>(p + j)] * resid[t - j];
    }
    pred[t] = f;
    if (t < m) resid[t] = y[t] - f;
  }
}

// Conditional residual vector e_p..e_{m-1}.
Eigen::VectorXd CssResiduals(const ArmaParams& params, std::span<const double> y) {
  std::vector<double> pred, resid;
  ArmaRecursion(params, y, pred, resid);
  const auto p = static_cast<std::size_t>(params.p);
  Eigen::VectorXd r(static_cast<Eigen::Index>(y.size() - p));
  for (std::size_t t = p; t < y.size(); ++t) r[static_cast<Eigen::Index>(t - p)] = resid[t];
  return r;
}

double SumOfSquares(const Eigen::VectorXd& r) {
  return kernels::SumSquaredDeviation(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())), 0.0);
}

struct CssFit {
  ArmaParams params;
  double sse = 0.0;
  std::size_t effective_n = 0;
};

// Levenberg-damped Gauss-Newton on the conditional sum of squares with a
// forward-difference Jacobian.
CssFit FitCss(std::span<const double> y, const ArimaOrder& order, int max_iterations) {
  ArmaParams params{order.p, order.q, Eigen::VectorXd::Zero(1 + order.p + order.q)};
  const double mean = kernels::Sum(y) / static_cast<double>(y.size());
  double ar_sum = 0.0;
  if (order.p > 0) {
    const std::vector<double> yw = YuleWalker(y, order.p);
    for (int i = 0; i < order.p; ++i) {
      params.beta[1 + i] = yw[static_cast<std::size_t>(i)];
      ar_sum += yw[static_cast<std::size_t>(i)];
    }
  }
  params.beta[0] = mean * (1.0 - ar_sum);

  Eigen::VectorXd r = CssResiduals(params, y);
  double sse = SumOfSquares(r);
  if (!std::isfinite(sse)) {
    Fail(ErrorCode::kFitFailure, "ARIMA" + OrderString(order) + ": non-finite initial residuals");
  }
  const Eigen::Index k = params.beta.size();
  double lambda = 1e-3;
  for (int iter = 0; iter < max_iterations && sse > 0.0; ++iter) {
    Eigen::MatrixXd jac(r.size(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      ArmaParams shifted = params;
      const double h = 1e-6 * std::max(1.0, std::fabs(params.beta[j]));
      shifted.beta[j] += h;
      jac.col(j) = (CssResiduals(shifted, y) - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool improved = false;
    for (int attempt = 0; attempt < 10; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index j = 0; j < k; ++j) damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      ArmaParams trial = params;
      trial.beta += step;
      const Eigen::VectorXd trial_r = CssResiduals(trial, y);
      const double trial_sse = SumOfSquares(trial_r);
      if (std::isfinite(trial_sse) && trial_sse < sse) {
        const double rel = (sse - trial_sse) / sse;
        params = std::move(trial);
        r = trial_r;
        sse = trial_sse;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < 1e-10) iter = max_iterations;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  if (!params.beta.allFinite() || !std::isfinite(sse)) {
    Fail(ErrorCode::kFitFailure, "ARIMA" + OrderString(order) + ": optimization diverged");
  }
  return {std::move(params), sse, static_cast<std::size_t>(r.size())};
}

std::shared_ptr<ArimaModel> BuildModel(const ArimaOrder& order, const CssFit& fit,
                                       Boundary boundary,
                                       std::optional<SeasonalProfile> seasonal) {
  std::vector<double> ar(static_cast<std::size_t>(order.p));
  std::vector<double> ma(static_cast<std::size_t>(order.q));
  for (int i = 0; i < order.p; ++i) ar[static_cast<std::size_t>(i)] = fit.params.beta[1 + i];
  for (int j = 0; j < order.q; ++j) ma[static_cast<std::size_t>(j)] = fit.params.beta[1 + order.p + j];
  return std::make_shared<ArimaModel>(order, std::move(ar), std::move(ma), fit.params.beta[0],
                                      boundary, std::move(seasonal));
}

}  // namespace

std::size_t ArimaMinTrainingLength(const ArimaOrder& order) {
  return std::max<std::size_t>(30, 10 * static_cast<std::size_t>(order.p + order.q + 1));
}

std::vector<double> YuleWalker(std::span<const double> values, int p) {
  if (p <= 0) return {};
  const std::size_t n = values.size();
  if (n <= static_cast<std::size_t>(p)) {
    Fail(ErrorCode::kInsufficientData, "Yule-Walker needs more samples than the order");
  }
  const double mean = kernels::Sum(values) / static_cast<double>(n);
  std::vector<double> gamma(static_cast<std::size_t>(p) + 1, 0.0);
  for (std::size_t lag = 0; lag <= static_cast<std::size_t>(p); ++lag) {
    double acc = 0.0;
    for (std::size_t t = lag; t < n; ++t) acc += (values[t] - mean) * (values[t - lag] - mean);
    gamma[lag] = acc / static_cast<double>(n);
  }
  if (gamma[0] <= 0.0) return std::vector<double>(static_cast<std::size_t>(p), 0.0);
  Eigen::MatrixXd toeplitz(p, p);
  Eigen::VectorXd rhs(p);
  for (int i = 0; i < p; ++i) {
    rhs[i] = gamma[static_cast<std::size_t>(i) + 1];
    for (int j = 0; j < p; ++j) toeplitz(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
  }
  const Eigen::VectorXd phi = toeplitz.ldlt().solve(rhs);
  std::vector<double> out(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = std::isfinite(phi[i]) ? phi[i] : 0.0;
  return out;
}

double ArSpectralRadius(std::span<const double> ar) {
  const auto p = static_cast<Eigen::Index>(ar.size());
  if (p == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = ar[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd eig = companion.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) radius = std::max(radius, std::abs(eig[i]));
  return radius;
}

ArimaModel::ArimaModel(ArimaOrder order, std::vector<double> ar, std::vector<double> ma,
                       double intercept, Boundary resid_boundary,
                       std::optional<SeasonalProfile> seasonal)
    : order_(order),
      ar_(std::move(ar)),
      ma_(std::move(ma)),
      intercept_(intercept),
      resid_boundary_(resid_boundary),
      seasonal_(std::move(seasonal)) {
  if (order_.d < 0 || order_.d > 2 || order_.p < 0 || order_.p > 5 || order_.q < 0 ||
      order_.q > 5) {
    Fail(ErrorCode::kInvalidInput, "ARIMA order out of range " + OrderString(order_));
  }
  if (ar_.size() != static_cast<std::size_t>(order_.p) ||
      ma_.size() != static_cast<std::size_t>(order_.q)) {
    Fail(ErrorCode::kInvalidInput, "ARIMA coefficient count does not match order");
  }
  stationary_ = ArSpectralRadius(ar_) < 1.0 + 1e-6;
}

std::size_t ArimaModel::min_history() const {
  return static_cast<std::size_t>(order_.d + order_.p);
}

std::vector<double> ArimaModel::Deseasonalize(const SeriesWindow& series) const {
  std::vector<double> v = series.values();
  if (seasonal_) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] -= seasonal_->level + seasonal_->PhaseValueAt(series.points()[i].ts);
    }
  }
  return v;
}

std::vector<double> ArimaModel::Predictions(std::span<const double> x) const {
  const std::size_t n = x.size();
  const auto d = static_cast<std::size_t>(order_.d);
  std::vector<double> out(n + 1, kNaN);
  if (n < d) return out;
  const std::vector<double> y = Difference(x, order_.d);
  ArmaParams params{order_.p, order_.q, Eigen::VectorXd(1 + order_.p + order_.q)};
  params.beta[0] = intercept_;
  for (int i = 0; i < order_.p; ++i) params.beta[1 + i] = ar_[static_cast<std::size_t>(i)];
  for (int j = 0; j < order_.q; ++j) params.beta[1 + order_.p + j] = ma_[static_cast<std::size_t>(j)];
  std::vector<double> pred, resid;
  ArmaRecursion(params, y, pred, resid);
  // y[k] is the d-th difference ending at x[k + d].
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (std::isnan(pred[k])) continue;
    const std::size_t t = k + d;
    double level = 0.0;
    if (d == 1) {
      level = x[t - 1];
    } else if (d == 2) {
      level = 2.0 * x[t - 1] - x[t - 2];
    }
    out[t] = pred[k] + level;
  }
  return out;
}

std::vector<double> ArimaModel::OneStepResiduals(std::span<const double> values) const {
  const std::vector<double> pred = Predictions(values);
  std::vector<double> out(values.size(), kNaN);
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isnan(pred[t])) out[t] = values[t] - pred[t];
  }
  return out;
}

double ArimaModel::Forecast(const SeriesWindow& history) const {
  const std::size_t need = static_cast<std::size_t>(order_.p + order_.d + order_.q);
  if (history.size() < std::max<std::size_t>(need, 1) ||
      history.size() < static_cast<std::size_t>(order_.p + order_.d)) {
    Fail(ErrorCode::kInsufficientData,
         "forecast needs at least " + std::to_string(need) + " history points");
  }
  const std::vector<double> pred = Predictions(Deseasonalize(history));
  double forecast = pred.back();
  if (seasonal_) {
    const std::int64_t next_ts = history.points().back().ts + history.step_ms();
    forecast += seasonal_->level + seasonal_->PhaseValueAt(next_ts);
  }
  return forecast;
}

WindowScores ArimaModel::ScoreWindow(const FeatureWindow& window) const {
  if (window.feature_count() != 1) {
    Fail(ErrorCode::kInvalidInput, "ARIMA scores univariate windows only");
  }
  const SeriesWindow series = window.Column(0);
  const std::vector<double> v = Deseasonalize(series);
  const std::vector<double> pred = Predictions(v);
  WindowScores out;
  out.boundary = resid_boundary_;
  out.scores.assign(v.size(), 0.0);
  out.valid.assign(v.size(), false);
  out.predicted.assign(v.size(), kNaN);
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (std::isnan(pred[t])) continue;
    out.valid[t] = true;
    out.scores[t] = v[t] - pred[t];
    out.predicted[t] = pred[t];
    if (seasonal_) {
      out.predicted[t] += seasonal_->level + seasonal_->PhaseValueAt(series.points()[t].ts);
    }
  }
  return out;
}

nlohmann::json ArimaModel::Payload() const {
  nlohmann::json j{{"order", {{"p", order_.p}, {"d", order_.d}, {"q", order_.q}}},
                   {"ar", ar_},
                   {"ma", ma_},
                   {"intercept", intercept_},
                   {"resid_boundary", BoundaryToJson(resid_boundary_)},
                   {"aic", aic_},
                   {"seasonal", nullptr}};
  if (seasonal_) j["seasonal"] = ProfileToJson(*seasonal_);
  return j;
}

std::shared_ptr<const ArimaModel> ArimaModel::FromPayload(const nlohmann::json& j) {
  const auto& o = j.at("order");
  ArimaOrder order{o.at("p").get<int>(), o.at("d").get<int>(), o.at("q").get<int>()};
  std::optional<SeasonalProfile> seasonal;
  if (!j.at("seasonal").is_null()) seasonal = ProfileFromJson(j.at("seasonal"));
  auto model = std::make_shared<ArimaModel>(
      order, j.at("ar").get<std::vector<double>>(), j.at("ma").get<std::vector<double>>(),
      j.at("intercept").get<double>(), BoundaryFromJson(j.at("resid_boundary")),
      std::move(seasonal));
  model->set_aic(j.at("aic").get<double>());
  return model;
}

std::shared_ptr<const ArimaModel> ArimaFit(const SeriesWindow& series,
                                           const ArimaFitOptions& options,
                                           std::uint64_t seed) {
  (void)seed;  // CSS estimation is deterministic; the seed is part of the plug-in contract
  const std::size_t n = series.size();
  const std::size_t floor_len =
      options.order ? ArimaMinTrainingLength(*options.order) : ArimaMinTrainingLength({});
  if (n < floor_len) {
    Fail(ErrorCode::kInsufficientData,
         "ARIMA needs at least " + std::to_string(floor_len) + " points, got " +
             std::to_string(n));
  }

  std::optional<SeasonalProfile> seasonal;
  std::vector<double> x;
  if (options.seasonality_period) {
    MediffResult decomposition = MediffExtract(series, *options.seasonality_period);
    seasonal = std::move(decomposition.profile);
    x = std::move(decomposition.residuals);
  } else {
    x = series.values();
  }
  const kernels::Moments moments = kernels::ComputeMoments(x);
  const double variance_floor = 1e-12 * (1.0 + moments.std * moments.std);

  std::vector<ArimaOrder> candidates;
  if (options.order) {
    candidates.push_back(*options.order);
  } else {
    for (int d = 0; d <= 1; ++d) {
      for (int p = 0; p <= 3; ++p) {
        for (int q = 0; q <= 2; ++q) {
          const ArimaOrder o{p, d, q};
          if (ArimaMinTrainingLength(o) <= n) candidates.push_back(o);
        }
      }
    }
  }

  struct Scored {
    ArimaOrder order;
    CssFit fit;
    double aic;
    bool stationary;
  };
  std::optional<Scored> best;
  std::string failures;
  for (const ArimaOrder& order : candidates) {
    try {
      const std::vector<double> y = Difference(x, order.d);
      if (y.size() <= static_cast<std::size_t>(order.p) + 1) {
        Fail(ErrorCode::kInsufficientData, "series too short after differencing");
      }
      CssFit fit = FitCss(y, order, options.max_iterations);
      const double m = static_cast<double>(fit.effective_n);
      const double sigma2 = std::max(fit.sse / m, variance_floor);
      const double aic = m * std::log(sigma2) + 2.0 * (order.p + order.q + 1);
      std::vector<double> ar(fit.params.beta.data() + 1, fit.params.beta.data() + 1 + order.p);
      const bool stationary = ArSpectralRadius(ar) < 1.0 + 1e-6;
      const bool better = !best || (stationary && !best->stationary) ||
                          (stationary == best->stationary && aic < best->aic);
      if (better) best = Scored{order, std::move(fit), aic, stationary};
    } catch (const Error& e) {
      if (options.order) throw;
      failures += " " + OrderString(order) + ": " + e.what() + ";";
    }
  }
  if (!best) {
    std::ostringstream tried;
    for (const ArimaOrder& o : candidates) tried << OrderString(o) << " ";
    Fail(ErrorCode::kFitFailure, "no ARIMA order converged; tried " + tried.str() + failures);
  }

  // In-sample one-step residuals set the decision boundary.
  auto provisional = BuildModel(best->order, best->fit, Boundary{}, std::nullopt);
  std::vector<double> residuals;
  for (double r : provisional->OneStepResiduals(x)) {
    if (!std::isnan(r)) residuals.push_back(r);
  }
  auto model = BuildModel(best->order, best->fit, IqrBoundary(residuals, options.iqr_multiplier),
                          std::move(seasonal));
  model->set_aic(best->aic);
  return model;
}

}  // namespace tickwatch::models
