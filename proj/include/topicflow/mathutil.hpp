#pragma once

// Special functions and small numeric helpers used by the variational
// trainer and the scoring modules.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "topicflow/common.hpp"

namespace topicflow::math {

// psi(x) via upward recurrence into the asymptotic region. The shift
// point of 10 keeps the truncated Bernoulli series below 1e-13 relative.
inline double digamma(double x) {
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv;
  result -= inv2 * (1.0 / 12.0 -
            inv2 * (1.0 / 120.0 -
            inv2 * (1.0 / 252.0 -
            inv2 * (1.0 / 240.0 -
            inv2 * (1.0 / 132.0)))));
  return result;
}

// psi'(x), same scheme.
inline double trigamma(double x) {
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
            inv2 * (1.0 / 6.0 -
            inv2 * (1.0 / 30.0 -
            inv2 * (1.0 / 42.0 -
            inv2 * (1.0 / 30.0)))));
  return result;
}

// E[log x] components for x ~ Dir(gamma): psi(gamma_k) - psi(sum gamma).
inline std::vector<double> dirichlet_expectation(const std::vector<double>& gamma) {
  double total = 0.0;
  for (double g : gamma) total += g;
  const double psi_total = digamma(total);
  std::vector<double> out(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) out[k] = digamma(gamma[k]) - psi_total;
  return out;
}

// Dirichlet log likelihood of n observations summarized by the mean
// sufficient statistic logphat_k = (1/n) sum_i E[log x_ik].
inline double dirichlet_loglik(const std::vector<double>& prior,
                               const std::vector<double>& logphat, double n) {
  double sum_prior = 0.0;
  double term = 0.0;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    sum_prior += prior[k];
    term += (prior[k] - 1.0) * logphat[k] - std::lgamma(prior[k]);
  }
  return n * (std::lgamma(sum_prior) + term);
}

// One damped Newton update of a Dirichlet prior given the mean observed
// log-probabilities. The Hessian diag(q) + c*11^T is inverted in closed
// form; the full step is halved until the likelihood improves. Components
// are clipped below at 1e-8. Returns the (possibly unchanged) prior.
inline std::vector<double> update_dirichlet_prior(const std::vector<double>& prior,
                                                  const std::vector<double>& logphat,
                                                  double n) {
  const std::size_t k_dim = prior.size();
  constexpr double kFloor = 1e-8;

  double sum_prior = 0.0;
  for (double p : prior) sum_prior += p;
  const double psi_sum = digamma(sum_prior);

  std::vector<double> grad(k_dim), q(k_dim);
  double inv_q_sum = 0.0, g_over_q = 0.0;
  for (std::size_t k = 0; k < k_dim; ++k) {
    grad[k] = n * (psi_sum - digamma(prior[k]) + logphat[k]);
    q[k] = -n * trigamma(prior[k]);
    inv_q_sum += 1.0 / q[k];
    g_over_q += grad[k] / q[k];
  }
  const double c = n * trigamma(sum_prior);
  const double b = g_over_q / (1.0 / c + inv_q_sum);

  std::vector<double> step(k_dim);
  for (std::size_t k = 0; k < k_dim; ++k) step[k] = -(grad[k] - b) / q[k];

  const double f0 = dirichlet_loglik(prior, logphat, n);
  std::vector<double> candidate(k_dim);
  double scale = 1.0;
  for (int half = 0; half < 30; ++half, scale *= 0.5) {
    bool positive = true;
    for (std::size_t k = 0; k < k_dim; ++k) {
      candidate[k] = prior[k] + scale * step[k];
      if (candidate[k] < kFloor) candidate[k] = kFloor;
      if (!std::isfinite(candidate[k])) positive = false;
    }
    if (!positive) continue;
    if (dirichlet_loglik(candidate, logphat, n) > f0) return candidate;
  }
  return prior;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample variance (n-1 denominator).
inline double sample_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::vector<double> sample_dirichlet(const std::vector<double>& alpha,
                                            std::mt19937_64& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    std::gamma_distribution<double> g(alpha[k], 1.0);
    out[k] = g(rng);
    total += out[k];
  }
  if (total <= 0.0) throw Error("degenerate Dirichlet sample");
  for (double& x : out) x /= total;
  return out;
}

// Index draw from an unnormalized weight vector by CDF inversion.
inline std::size_t sample_categorical(const std::vector<double>& weights, double total,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, total);
  double r = u(rng);
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    r -= weights[i];
    if (r <= 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace topicflow::math
