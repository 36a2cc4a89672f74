#include "variance.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "weights.hpp"

namespace am {

std::span<const double> VarianceAccumulator::update(const StepRecord& step,
                                                    std::span<const double> q_hist, double beta,
                                                    double combined_prev) {
  const std::size_t t = var_.size() + 1;
  if (step.tau != t || q_hist.size() != t)
    fail(ErrorCode::Sequencing, "streaming update for step " + std::to_string(step.tau) +
                                    " but accumulator expects step " + std::to_string(t));
  for (auto* reg : {&x_, &y_, &z_, &a_, &b_, &c_, &u_, &var_}) reg->push_back(0.0);
  partial_.push_back(step.partial_before);
  shift_.push_back(combined_prev - step.partial_before);

  const double f = step.f_value;
  const double q_t = step.q;
  for (std::size_t k = 0; k < t; ++k) {
    const double q_tau = q_hist[k];
    const double e = f / q_tau - shift_[k];
    const double ratio = q_tau / q_t;
    a_[k] += beta * (x_[k] + ratio * e * e);
    b_[k] += beta * (y_[k] + ratio * e);
    c_[k] += beta * (z_[k] + ratio);
    u_[k] += beta;
    const double d = (combined_prev - partial_[k]) - shift_[k];
    var_[k] = u_[k] > 0.0 ? (a_[k] - 2.0 * b_[k] * d + c_[k] * d * d) / u_[k] : 0.0;
    x_[k] += q_tau * e * e;
    y_[k] += q_tau * e;
    z_[k] += q_tau;
  }
  return var_;
}

VarianceAccumulator::Registers VarianceAccumulator::registers(std::size_t tau) const {
  if (tau < 1 || tau > var_.size()) fail(ErrorCode::State, "no registers for tau=" + std::to_string(tau));
  const std::size_t k = tau - 1;
  return {x_[k], y_[k], z_[k], a_[k], b_[k], c_[k], u_[k], partial_[k], shift_[k]};
}

double var_single(const Trajectory& run, std::size_t tau, std::size_t r, double mean) {
  if (tau < 1 || tau > r || r > run.steps())
    fail(ErrorCode::Precondition, "var_single needs 1 <= tau <= r <= t");
  double exact = 0.0;
  for (std::size_t k = tau; k < r; ++k) {
    const StepRecord& s = run.step(k);
    const double q_tau = run.q(tau, s.unit);
    const double d = s.f_value / q_tau - mean;
    exact += q_tau * d * d;
  }
  const StepRecord& last = run.step(r);
  const double q_tau = run.q(tau, last.unit);
  const double d = last.f_value / q_tau - mean;
  return exact + (q_tau / last.q) * d * d;
}

double var_tau(const Trajectory& run, std::size_t tau, std::size_t t, double mean, std::size_t n) {
  if (tau < 1 || tau > t) fail(ErrorCode::Precondition, "var_tau needs 1 <= tau <= t");
  double num = 0.0;
  double mass = 0.0;
  for (std::size_t r = tau; r <= t; ++r) {
    const double beta = lure_weight(r, n);
    num += beta * var_single(run, tau, r, mean);
    mass += beta;
  }
  return num / mass;
}

std::vector<double> var_taus_naive(const Trajectory& run, std::size_t t, double combined_prev,
                                   std::size_t n) {
  std::vector<double> out(t);
  for (std::size_t tau = 1; tau <= t; ++tau)
    out[tau - 1] = var_tau(run, tau, t, plug_in_mean(run, tau, combined_prev), n);
  return out;
}

double plug_in_mean(const Trajectory& run, std::size_t tau, double combined_prev) {
  return combined_prev - run.step(tau).partial_before;
}

double var_combined_raw(std::span<const double> weights, std::span<const double> var_hats) {
  if (weights.size() != var_hats.size()) fail(ErrorCode::Shape, "weights and variances differ in length");
  double v = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) v += weights[i] * weights[i] * var_hats[i];
  return v;
}

double var_combined(std::span<const double> weights, std::span<const double> var_hats) {
  const double v = var_combined_raw(weights, var_hats);
  return v > 0.0 ? v : 0.0;
}

double var_simple(std::span<const double> weights, std::span<const double> estimates,
                  double combined) {
  if (weights.size() != estimates.size()) fail(ErrorCode::Shape, "weights and estimates differ in length");
  double v = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double d = estimates[i] - combined;
    v += weights[i] * weights[i] * d * d;
  }
  return v > 0.0 ? v : 0.0;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::Domain, "quantile needs p in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::Domain, "confidence level must lie in (0, 1)");
  return normal_quantile(1.0 - (1.0 - level) / 2.0);
}

std::pair<double, double> confidence_interval(double estimate, double var_hat, double level) {
  const double z = z_for_level(level);
  if (!(var_hat >= 0.0)) fail(ErrorCode::Domain, "variance estimate must be >= 0");
  const double radius = z * std::sqrt(var_hat);
  return {estimate - radius, estimate + radius};
}

}  // namespace am
