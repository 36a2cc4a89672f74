#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace am {

WeightScheme WeightScheme::inv(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) fail(ErrorCode::Config, "gamma must lie in (0, 1)");
  return {SchemeKind::Inv, gamma};
}

WeightScheme WeightScheme::parse(const std::string& name, double gamma) {
  if (name == "sqrt") return sqrt();
  if (name == "lure") return lure();
  if (name == "comb") return comb();
  if (name == "inv") return inv(gamma);
  fail(ErrorCode::Config, "unknown weighting scheme: " + name);
}

std::string WeightScheme::name() const {
  switch (kind) {
    case SchemeKind::Sqrt: return "sqrt";
    case SchemeKind::Lure: return "lure";
    case SchemeKind::Comb: return "comb";
    case SchemeKind::Inv: return "inv";
  }
  return "?";
}

double lure_weight(std::size_t tau, std::size_t n) {
  if (tau < 1 || tau >= n)
    fail(ErrorCode::Singularity, "LURE weight undefined at tau=" + std::to_string(tau) +
                                     " for N=" + std::to_string(n));
  const double a = static_cast<double>(n - tau);
  return 1.0 / (a * (a + 1.0));
}

std::vector<double> sqrt_weights(std::size_t t) {
  std::vector<double> w(t);
  for (std::size_t tau = 1; tau <= t; ++tau) w[tau - 1] = std::sqrt(static_cast<double>(tau));
  return w;
}

std::vector<double> lure_weights(std::size_t t, std::size_t n) {
  if (t >= n) fail(ErrorCode::Singularity, "LURE weights need t < N");
  std::vector<double> w(t);
  for (std::size_t tau = 1; tau <= t; ++tau) w[tau - 1] = lure_weight(tau, n);
  return w;
}

std::vector<double> comb_weights(std::size_t t, std::size_t n) {
  if (t >= n) fail(ErrorCode::Singularity, "COMB weights need t < N");
  std::vector<double> w(t);
  for (std::size_t tau = 1; tau <= t; ++tau)
    w[tau - 1] = lure_weight(tau, n) * std::sqrt(static_cast<double>(tau));
  return w;
}

std::size_t inv_junction(double gamma, std::size_t t) {
  // The small offset keeps products like 0.9 * 10 from rounding up.
  auto j = static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(t) - 1e-9));
  return std::clamp<std::size_t>(j, 1, t);
}

std::vector<double> inv_weights(std::span<const double> var_hats, double gamma, std::size_t t,
                                std::size_t n) {
  if (t >= n) fail(ErrorCode::Singularity, "INV weights need t < N");
  const std::size_t j = inv_junction(gamma, t);
  if (var_hats.size() < j) fail(ErrorCode::Shape, "not enough variance estimates for INV weights");
  for (std::size_t k = 0; k < j; ++k)
    if (!(var_hats[k] > 0.0))
      fail(ErrorCode::DegenerateVariance,
           "nonpositive variance estimate at tau=" + std::to_string(k + 1));
  std::vector<double> w(t);
  for (std::size_t tau = 1; tau <= j; ++tau) w[tau - 1] = 1.0 / var_hats[tau - 1];
  const double junction_comb = lure_weight(j, n) * std::sqrt(static_cast<double>(j));
  const double scale = w[j - 1] / junction_comb;
  for (std::size_t tau = j + 1; tau <= t; ++tau)
    w[tau - 1] = lure_weight(tau, n) * std::sqrt(static_cast<double>(tau)) * scale;
  return w;
}

std::vector<double> normalize(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorCode::Normalization, "weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum > 0.0)) fail(ErrorCode::Normalization, "cannot normalize all-zero weights");
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = weights[i] / sum;
  return out;
}

double worst_case_ratio(std::span<const double> w, std::size_t t) {
  if (t < 1 || w.size() < t) fail(ErrorCode::Precondition, "worst_case_ratio needs 1 <= t <= |w|");
  double s0 = 0.0, s1 = 0.0, sh = 0.0;
  for (std::size_t tau = 1; tau <= t; ++tau) {
    const double wt = w[tau - 1];
    if (!(wt > 0.0)) fail(ErrorCode::Precondition, "weights must be positive");
    if (tau > 1 && wt < w[tau - 2]) fail(ErrorCode::Precondition, "weights must be non-decreasing");
    const double x = static_cast<double>(tau);
    s0 += wt;
    s1 += wt * x;
    sh += wt * std::sqrt(x);
  }
  return (s0 * s1) / (sh * sh);
}

SchemeWeights scheme_weights(const WeightScheme& scheme, std::size_t t, std::size_t n,
                             std::span<const double> var_hats) {
  switch (scheme.kind) {
    case SchemeKind::Sqrt: return {normalize(sqrt_weights(t)), false};
    case SchemeKind::Lure: return {normalize(lure_weights(t, n)), false};
    case SchemeKind::Comb: return {normalize(comb_weights(t, n)), false};
    case SchemeKind::Inv: break;
  }
  const std::size_t j = inv_junction(scheme.gamma, t);
  if (var_hats.size() < j) fail(ErrorCode::Shape, "not enough variance estimates for INV weights");
  double smallest = std::numeric_limits<double>::infinity();
  bool degenerate = false;
  for (std::size_t k = 0; k < j; ++k) {
    if (var_hats[k] > 0.0)
      smallest = std::min(smallest, var_hats[k]);
    else
      degenerate = true;
  }
  if (!degenerate) return {normalize(inv_weights(var_hats, scheme.gamma, t, n)), false};
  if (!std::isfinite(smallest)) return {normalize(comb_weights(t, n)), true};
  std::vector<double> patched(var_hats.begin(), var_hats.begin() + static_cast<std::ptrdiff_t>(j));
  for (double& v : patched)
    if (!(v > 0.0)) v = smallest;
  return {normalize(inv_weights(patched, scheme.gamma, t, n)), true};
}

}  // namespace am
