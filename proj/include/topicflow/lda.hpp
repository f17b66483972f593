#pragma once

// LDA via online variational Bayes: a generative corpus sampler, the
// minibatch trainer with decaying step size rho_t = (tau0 + t)^(-kappa),
// per-document inference, and prior construction (symmetric, asymmetric,
// auto-learned via damped Newton updates).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "topicflow/common.hpp"
#include "topicflow/mathutil.hpp"
#include "topicflow/textprep.hpp"

namespace topicflow::lda {

using textprep::BagOfWords;

struct LdaConfig {
  int k = 10;
  std::string alpha_mode = "symmetric";  // symmetric | asymmetric | auto
  std::string eta_mode = "symmetric";    // symmetric | auto
  int minibatch_size = 256;
  double tau0 = 1.0;
  double kappa = 0.7;  // must lie in (0.5, 1]
  int passes = 1;
  double e_step_tol = 1e-3;  // mean absolute change in gamma
  int e_step_max_iter = 100;
  std::uint64_t seed = 0;
  double xi = 40.0;  // expected document length, sampler only
};

inline std::vector<std::string> validate_config(const LdaConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.k < 2) problems.push_back("lda.k must be >= 2");
  if (cfg.alpha_mode != "symmetric" && cfg.alpha_mode != "asymmetric" && cfg.alpha_mode != "auto")
    problems.push_back("lda.alpha_mode must be symmetric, asymmetric or auto");
  if (cfg.eta_mode != "symmetric" && cfg.eta_mode != "auto")
    problems.push_back("lda.eta_mode must be symmetric or auto");
  if (cfg.minibatch_size < 1) problems.push_back("lda.minibatch_size must be >= 1");
  if (cfg.tau0 < 0.0) problems.push_back("lda.tau0 must be >= 0");
  if (!(cfg.kappa > 0.5 && cfg.kappa <= 1.0)) problems.push_back("lda.kappa must be in (0.5, 1]");
  if (cfg.passes < 1) problems.push_back("lda.passes must be >= 1");
  if (!(cfg.e_step_tol > 0.0)) problems.push_back("lda.e_step_tol must be > 0");
  if (cfg.e_step_max_iter < 1) problems.push_back("lda.e_step_max_iter must be >= 1");
  if (!(cfg.xi > 0.0)) problems.push_back("lda.xi must be > 0");
  return problems;
}

// symmetric: 1/K each. asymmetric: 1/(k + sqrt(K)) for zero-based k,
// normalized to sum 1. auto starts symmetric and is learned during fitting.
inline std::vector<double> make_prior(const std::string& mode, int k_topics) {
  if (k_topics < 2) throw ValidationError("make_prior: K must be >= 2");
  std::vector<double> prior(static_cast<std::size_t>(k_topics));
  if (mode == "symmetric" || mode == "auto") {
    std::fill(prior.begin(), prior.end(), 1.0 / k_topics);
  } else if (mode == "asymmetric") {
    double total = 0.0;
    for (int k = 0; k < k_topics; ++k) {
      prior[k] = 1.0 / (k + std::sqrt(static_cast<double>(k_topics)));
      total += prior[k];
    }
    for (double& p : prior) p /= total;
  } else {
    throw ValidationError("make_prior: unknown mode '" + mode + "'");
  }
  return prior;
}

struct TopicModel {
  Matrix lambda;              // K x V variational parameter, strictly positive
  std::vector<double> alpha;  // K document-topic prior
  std::vector<double> eta;    // size 1 (symmetric scalar) or V (learned)
  std::int64_t updates_seen = 0;
  std::string vocab_fingerprint;
  LdaConfig config;

  int k() const { return static_cast<int>(lambda.rows); }
  int v() const { return static_cast<int>(lambda.cols); }

  double eta_at(std::size_t w) const { return eta.size() == 1 ? eta[0] : eta[w]; }

  // Expected beta: rows of lambda normalized to probability vectors.
  Matrix expected_beta() const {
    Matrix beta(lambda.rows, lambda.cols);
    for (std::size_t r = 0; r < lambda.rows; ++r) {
      const double* in = lambda.row(r);
      double total = std::accumulate(in, in + lambda.cols, 0.0);
      double* out = beta.row(r);
      for (std::size_t c = 0; c < lambda.cols; ++c) out[c] = in[c] / total;
    }
    return beta;
  }
};

namespace detail {

// exp(E[log beta]) for the current lambda.
inline Matrix exp_dirichlet_expectation_rows(const Matrix& lambda) {
  Matrix out(lambda.rows, lambda.cols);
  for (std::size_t r = 0; r < lambda.rows; ++r) {
    const double* in = lambda.row(r);
    const double row_sum = std::accumulate(in, in + lambda.cols, 0.0);
    const double psi_sum = math::digamma(row_sum);
    double* o = out.row(r);
    for (std::size_t c = 0; c < lambda.cols; ++c) o[c] = std::exp(math::digamma(in[c]) - psi_sum);
  }
  return out;
}

constexpr double kPhiFloor = 1e-100;  // keeps phinorm away from log(0)

}  // namespace detail

struct EStepResult {
  std::vector<double> gamma;   // K, strictly positive
  std::vector<double> sstats;  // K x |doc terms|, row-major; phi_wk * n_w
  int iterations = 0;
};

// Fixed-point iteration for one document: phi ~ exp(E[log theta]) *
// exp(E[log beta]), gamma = alpha + sum_w n_w phi_w. Stops when the mean
// absolute change in gamma drops below tol. An empty bag returns gamma =
// alpha and no statistics.
inline EStepResult e_step(const BagOfWords& bow, const std::vector<double>& alpha,
                          const Matrix& exp_elog_beta, double tol, int max_iter) {
  const std::size_t k_dim = alpha.size();
  const std::size_t n_terms = bow.pairs.size();
  EStepResult res;
  res.gamma = alpha;
  if (n_terms == 0) return res;

  double n_total = 0.0;
  for (const auto& [id, c] : bow.pairs) n_total += c;
  for (std::size_t k = 0; k < k_dim; ++k) res.gamma[k] = alpha[k] + n_total / k_dim;

  std::vector<double> exp_elog_theta(k_dim), gamma_new(k_dim), phinorm(n_terms);
  for (int it = 0; it < max_iter; ++it) {
    {
      double total = std::accumulate(res.gamma.begin(), res.gamma.end(), 0.0);
      const double psi_total = math::digamma(total);
      for (std::size_t k = 0; k < k_dim; ++k)
        exp_elog_theta[k] = std::exp(math::digamma(res.gamma[k]) - psi_total);
    }
    for (std::size_t w = 0; w < n_terms; ++w) {
      const std::int32_t id = bow.pairs[w].first;
      double dot = 0.0;
      for (std::size_t k = 0; k < k_dim; ++k)
        dot += exp_elog_theta[k] * exp_elog_beta(k, static_cast<std::size_t>(id));
      phinorm[w] = dot + detail::kPhiFloor;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < k_dim; ++k) {
      double acc = 0.0;
      for (std::size_t w = 0; w < n_terms; ++w) {
        const auto& [id, count] = bow.pairs[w];
        acc += count * exp_elog_beta(k, static_cast<std::size_t>(id)) / phinorm[w];
      }
      gamma_new[k] = alpha[k] + exp_elog_theta[k] * acc;
      change += std::fabs(gamma_new[k] - res.gamma[k]);
    }
    res.gamma.swap(gamma_new);
    ++res.iterations;
    if (change / k_dim < tol) break;
  }

  // Final phi against the converged gamma.
  {
    double total = std::accumulate(res.gamma.begin(), res.gamma.end(), 0.0);
    const double psi_total = math::digamma(total);
    for (std::size_t k = 0; k < k_dim; ++k)
      exp_elog_theta[k] = std::exp(math::digamma(res.gamma[k]) - psi_total);
  }
  res.sstats.assign(k_dim * n_terms, 0.0);
  for (std::size_t w = 0; w < n_terms; ++w) {
    const auto& [id, count] = bow.pairs[w];
    double dot = 0.0;
    for (std::size_t k = 0; k < k_dim; ++k)
      dot += exp_elog_theta[k] * exp_elog_beta(k, static_cast<std::size_t>(id));
    const double inv = count / (dot + detail::kPhiFloor);
    for (std::size_t k = 0; k < k_dim; ++k)
      res.sstats[k * n_terms + w] =
          exp_elog_theta[k] * exp_elog_beta(k, static_cast<std::size_t>(id)) * inv;
  }
  return res;
}

inline EStepResult e_step(const BagOfWords& bow, const TopicModel& model) {
  const Matrix exp_elog_beta = detail::exp_dirichlet_expectation_rows(model.lambda);
  return e_step(bow, model.alpha, exp_elog_beta, model.config.e_step_tol,
                model.config.e_step_max_iter);
}

struct SampledCorpus {
  std::vector<BagOfWords> docs;
  std::vector<std::vector<double>> thetas;  // generating theta per document
};

// The generative process: N_d ~ Poisson(xi), theta ~ Dir(alpha), then per
// word z ~ Multinomial(theta) and w ~ Multinomial(beta_z). Deterministic
// under a fixed seed.
inline SampledCorpus sample_corpus(const Matrix& true_beta, std::size_t n_docs, double xi,
                                   const std::vector<double>& alpha, std::uint64_t seed) {
  if (true_beta.rows == 0 || true_beta.cols == 0) throw ValidationError("sampler: empty beta");
  if (alpha.size() != true_beta.rows) throw ValidationError("sampler: alpha size != K");
  std::vector<double> row_sums(true_beta.rows);
  for (std::size_t k = 0; k < true_beta.rows; ++k) {
    const double* row = true_beta.row(k);
    double s = 0.0;
    for (std::size_t w = 0; w < true_beta.cols; ++w) {
      if (row[w] < 0.0) throw ValidationError("sampler: negative beta entry");
      s += row[w];
    }
    if (s <= 0.0) throw ValidationError("sampler: degenerate beta row " + std::to_string(k));
    if (std::fabs(s - 1.0) > 1e-6)
      throw ValidationError("sampler: beta row " + std::to_string(k) + " does not sum to 1");
    row_sums[k] = s;
  }

  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> poisson(xi);
  SampledCorpus out;
  out.docs.reserve(n_docs);
  out.thetas.reserve(n_docs);

  std::vector<double> beta_row(true_beta.cols);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const int n_words = poisson(rng);
    std::vector<double> theta = math::sample_dirichlet(alpha, rng);
    std::map<std::int32_t, std::int32_t> counts;
    for (int n = 0; n < n_words; ++n) {
      const std::size_t z =
          true_beta.rows == 1 ? 0 : math::sample_categorical(theta, 1.0, rng);
      beta_row.assign(true_beta.row(z), true_beta.row(z) + true_beta.cols);
      const std::size_t w = math::sample_categorical(beta_row, row_sums[z], rng);
      ++counts[static_cast<std::int32_t>(w)];
    }
    BagOfWords bow;
    bow.pairs.assign(counts.begin(), counts.end());
    out.docs.push_back(std::move(bow));
    out.thetas.push_back(std::move(theta));
  }
  return out;
}

struct FitResult {
  TopicModel model;
  std::vector<double> pass_bounds;  // per-word variational bound after each pass
};

// Per-word evidence lower bound of the corpus under the model, using a
// fresh converged E-step per document. Used as the training progress proxy.
inline double per_word_bound(const std::vector<BagOfWords>& corpus, const TopicModel& model) {
  const std::size_t k_dim = model.alpha.size();
  const std::size_t v_dim = model.lambda.cols;
  const Matrix exp_elog_beta = detail::exp_dirichlet_expectation_rows(model.lambda);

  double score = 0.0;
  double token_total = 0.0;
  double alpha_sum = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);
  double lgamma_alpha_sum = std::lgamma(alpha_sum);
  double sum_lgamma_alpha = 0.0;
  for (double a : model.alpha) sum_lgamma_alpha += std::lgamma(a);

  for (const auto& bow : corpus) {
    auto res = e_step(bow, model.alpha, exp_elog_beta, model.config.e_step_tol,
                      model.config.e_step_max_iter);
    const auto elog_theta = math::dirichlet_expectation(res.gamma);
    std::vector<double> exp_elog_theta(k_dim);
    for (std::size_t k = 0; k < k_dim; ++k) exp_elog_theta[k] = std::exp(elog_theta[k]);

    for (const auto& [id, count] : bow.pairs) {
      double dot = 0.0;
      for (std::size_t k = 0; k < k_dim; ++k)
        dot += exp_elog_theta[k] * exp_elog_beta(k, static_cast<std::size_t>(id));
      score += count * std::log(dot + detail::kPhiFloor);
      token_total += count;
    }
    double gamma_sum = std::accumulate(res.gamma.begin(), res.gamma.end(), 0.0);
    for (std::size_t k = 0; k < k_dim; ++k) {
      score += (model.alpha[k] - res.gamma[k]) * elog_theta[k];
      score += std::lgamma(res.gamma[k]);
    }
    score += lgamma_alpha_sum - sum_lgamma_alpha - std::lgamma(gamma_sum);
  }

  // Topic-word part.
  double eta_sum = 0.0, sum_lgamma_eta = 0.0;
  for (std::size_t w = 0; w < v_dim; ++w) {
    eta_sum += model.eta_at(w);
    sum_lgamma_eta += std::lgamma(model.eta_at(w));
  }
  for (std::size_t k = 0; k < k_dim; ++k) {
    const double* lam = model.lambda.row(k);
    const double lam_sum = std::accumulate(lam, lam + v_dim, 0.0);
    const double psi_sum = math::digamma(lam_sum);
    for (std::size_t w = 0; w < v_dim; ++w) {
      const double elog = math::digamma(lam[w]) - psi_sum;
      score += (model.eta_at(w) - lam[w]) * elog + std::lgamma(lam[w]);
    }
    score += std::lgamma(eta_sum) - sum_lgamma_eta - std::lgamma(lam_sum);
  }
  return token_total > 0.0 ? score / token_total : 0.0;
}

// Online variational Bayes. Documents are visited in corpus order; after
// minibatch t (counted from 1 across passes) the update is
//   lambda <- (1 - rho_t) lambda + rho_t lambda_hat,
//   lambda_hat_kw = eta_w + (D / |batch|) sstats_kw,
//   rho_t = (tau0 + t)^(-kappa).
// E-steps within a minibatch run on worker chunks merged in chunk order, so
// results are reproducible for a fixed seed and thread count.
inline FitResult fit_online(const std::vector<BagOfWords>& corpus, const LdaConfig& cfg,
                            std::size_t vocab_size, const std::string& vocab_fingerprint,
                            unsigned n_threads = 1) {
  {
    auto problems = validate_config(cfg);
    if (!problems.empty()) {
      std::string msg = "invalid lda config:";
      for (const auto& p : problems) msg += " " + p + ";";
      throw ValidationError(msg);
    }
  }
  if (corpus.empty()) throw ValidationError("fit_online: empty corpus");
  if (vocab_size == 0) throw ValidationError("fit_online: empty vocabulary");
  const auto k_dim = static_cast<std::size_t>(cfg.k);
  const std::size_t v_dim = vocab_size;
  for (const auto& bow : corpus)
    for (const auto& [id, count] : bow.pairs)
      if (id < 0 || static_cast<std::size_t>(id) >= v_dim)
        throw ValidationError("fit_online: term id outside vocabulary");

  TopicModel model;
  model.config = cfg;
  model.vocab_fingerprint = vocab_fingerprint;
  model.alpha = make_prior(cfg.alpha_mode, cfg.k);
  if (cfg.eta_mode == "auto") {
    model.eta.assign(v_dim, 1.0 / cfg.k);
  } else {
    model.eta.assign(1, 1.0 / cfg.k);
  }

  // Near-uniform strictly positive start.
  model.lambda = Matrix(k_dim, v_dim);
  {
    std::mt19937_64 rng(cfg.seed);
    std::gamma_distribution<double> gamma_init(100.0, 0.01);
    for (std::size_t k = 0; k < k_dim; ++k) {
      double* row = model.lambda.row(k);
      for (std::size_t w = 0; w < v_dim; ++w) row[w] = gamma_init(rng);
    }
  }

  Matrix exp_elog_beta = detail::exp_dirichlet_expectation_rows(model.lambda);
  const double corpus_size = static_cast<double>(corpus.size());

  FitResult out;
  for (int pass = 0; pass < cfg.passes; ++pass) {
    for (std::size_t batch_start = 0; batch_start < corpus.size();
         batch_start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t batch_end =
          std::min(corpus.size(), batch_start + static_cast<std::size_t>(cfg.minibatch_size));
      const std::size_t batch_len = batch_end - batch_start;

      std::vector<Matrix> chunk_sstats;
      std::vector<std::vector<double>> chunk_logphat;
      unsigned used_threads = n_threads == 0 ? 1 : n_threads;
      if (used_threads > batch_len) used_threads = static_cast<unsigned>(batch_len);
      chunk_sstats.assign(used_threads, Matrix(k_dim, v_dim));
      const bool track_alpha = cfg.alpha_mode == "auto";
      chunk_logphat.assign(used_threads, std::vector<double>(track_alpha ? k_dim : 0, 0.0));

      parallel_chunks(batch_len, used_threads,
                      [&](std::size_t begin, std::size_t end, unsigned chunk) {
        Matrix& sstats = chunk_sstats[chunk];
        for (std::size_t d = begin; d < end; ++d) {
          const BagOfWords& bow = corpus[batch_start + d];
          auto res = e_step(bow, model.alpha, exp_elog_beta, cfg.e_step_tol, cfg.e_step_max_iter);
          const std::size_t n_terms = bow.pairs.size();
          for (std::size_t k = 0; k < k_dim; ++k) {
            double* row = sstats.row(k);
            const double* contrib = res.sstats.data() + k * n_terms;
            for (std::size_t w = 0; w < n_terms; ++w)
              row[static_cast<std::size_t>(bow.pairs[w].first)] += contrib[w];
          }
          if (track_alpha) {
            const auto elog_theta = math::dirichlet_expectation(res.gamma);
            for (std::size_t k = 0; k < k_dim; ++k) chunk_logphat[chunk][k] += elog_theta[k];
          }
        }
      });
      for (unsigned c = 1; c < used_threads; ++c)
        for (std::size_t i = 0; i < chunk_sstats[0].data.size(); ++i)
          chunk_sstats[0].data[i] += chunk_sstats[c].data[i];
      const Matrix& sstats = chunk_sstats[0];

      model.updates_seen += 1;
      const double rho = std::pow(cfg.tau0 + static_cast<double>(model.updates_seen), -cfg.kappa);
      const double scale = corpus_size / static_cast<double>(batch_len);
      for (std::size_t k = 0; k < k_dim; ++k) {
        double* lam = model.lambda.row(k);
        const double* ss = sstats.row(k);
        for (std::size_t w = 0; w < v_dim; ++w) {
          const double lambda_hat = model.eta_at(w) + scale * ss[w];
          lam[w] = (1.0 - rho) * lam[w] + rho * lambda_hat;
          if (!std::isfinite(lam[w]))
            throw Error("fit_online: non-finite lambda at update " +
                        std::to_string(model.updates_seen) + ", topic " + std::to_string(k));
        }
      }
      exp_elog_beta = detail::exp_dirichlet_expectation_rows(model.lambda);

      if (track_alpha) {
        std::vector<double> logphat(k_dim, 0.0);
        for (unsigned c = 0; c < used_threads; ++c)
          for (std::size_t k = 0; k < k_dim; ++k) logphat[k] += chunk_logphat[c][k];
        for (std::size_t k = 0; k < k_dim; ++k) logphat[k] /= static_cast<double>(batch_len);
        model.alpha =
            math::update_dirichlet_prior(model.alpha, logphat, static_cast<double>(batch_len));
      }
      if (cfg.eta_mode == "auto") {
        std::vector<double> logphat(v_dim, 0.0);
        for (std::size_t k = 0; k < k_dim; ++k) {
          const double* lam = model.lambda.row(k);
          const double row_sum = std::accumulate(lam, lam + v_dim, 0.0);
          const double psi_sum = math::digamma(row_sum);
          for (std::size_t w = 0; w < v_dim; ++w)
            logphat[w] += math::digamma(lam[w]) - psi_sum;
        }
        for (std::size_t w = 0; w < v_dim; ++w) logphat[w] /= static_cast<double>(k_dim);
        model.eta = math::update_dirichlet_prior(model.eta, logphat, static_cast<double>(k_dim));
      }
    }
    out.pass_bounds.push_back(per_word_bound(corpus, model));
  }

  out.model = std::move(model);
  return out;
}

struct DocTopics {
  std::vector<double> theta;  // probability vector over topics
  bool from_prior = false;    // true when the bag was empty
};

inline DocTopics infer_theta(const BagOfWords& bow, const TopicModel& model) {
  DocTopics out;
  if (bow.empty()) {
    out.from_prior = true;
    double total = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);
    out.theta.resize(model.alpha.size());
    for (std::size_t k = 0; k < model.alpha.size(); ++k) out.theta[k] = model.alpha[k] / total;
    return out;
  }
  auto res = e_step(bow, model);
  double total = std::accumulate(res.gamma.begin(), res.gamma.end(), 0.0);
  out.theta.resize(res.gamma.size());
  for (std::size_t k = 0; k < res.gamma.size(); ++k) out.theta[k] = res.gamma[k] / total;
  return out;
}

// Batch inference sharing one expectation matrix; parallel over documents.
inline std::vector<DocTopics> infer_thetas(const std::vector<BagOfWords>& corpus,
                                           const TopicModel& model, unsigned n_threads = 1) {
  const Matrix exp_elog_beta = detail::exp_dirichlet_expectation_rows(model.lambda);
  std::vector<DocTopics> out(corpus.size());
  parallel_chunks(corpus.size(), n_threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t d = begin; d < end; ++d) {
      DocTopics dt;
      if (corpus[d].empty()) {
        dt.from_prior = true;
        double total = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);
        dt.theta.resize(model.alpha.size());
        for (std::size_t k = 0; k < model.alpha.size(); ++k) dt.theta[k] = model.alpha[k] / total;
      } else {
        auto res = e_step(corpus[d], model.alpha, exp_elog_beta, model.config.e_step_tol,
                          model.config.e_step_max_iter);
        double total = std::accumulate(res.gamma.begin(), res.gamma.end(), 0.0);
        dt.theta.resize(res.gamma.size());
        for (std::size_t k = 0; k < res.gamma.size(); ++k) dt.theta[k] = res.gamma[k] / total;
      }
      out[d] = std::move(dt);
    }
  });
  return out;
}

// Terms of topic k ranked by expected probability, ties broken by lower
// term index.
inline std::vector<std::int32_t> top_words(const TopicModel& model, int topic, std::size_t n) {
  if (topic < 0 || topic >= model.k())
    throw ValidationError("top_words: topic index out of range");
  const double* lam = model.lambda.row(static_cast<std::size_t>(topic));
  const std::size_t v_dim = model.lambda.cols;
  std::vector<std::int32_t> ids(v_dim);
  std::iota(ids.begin(), ids.end(), 0);
  if (n > v_dim) n = v_dim;
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::int32_t a, std::int32_t b) {
                      if (lam[a] != lam[b]) return lam[a] > lam[b];
                      return a < b;
                    });
  ids.resize(n);
  return ids;
}

// ---------------------------------------------------------------------------
// Model container: JSON with a format version; doubles round-trip exactly.

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json config_to_json(const LdaConfig& cfg) {
  return nlohmann::json{{"k", cfg.k},
                        {"alpha_mode", cfg.alpha_mode},
                        {"eta_mode", cfg.eta_mode},
                        {"minibatch_size", cfg.minibatch_size},
                        {"tau0", cfg.tau0},
                        {"kappa", cfg.kappa},
                        {"passes", cfg.passes},
                        {"e_step_tol", cfg.e_step_tol},
                        {"e_step_max_iter", cfg.e_step_max_iter},
                        {"seed", cfg.seed},
                        {"xi", cfg.xi}};
}

inline LdaConfig config_from_json(const nlohmann::json& j) {
  LdaConfig cfg;
  cfg.k = j.value("k", cfg.k);
  cfg.alpha_mode = j.value("alpha_mode", cfg.alpha_mode);
  cfg.eta_mode = j.value("eta_mode", cfg.eta_mode);
  cfg.minibatch_size = j.value("minibatch_size", cfg.minibatch_size);
  cfg.tau0 = j.value("tau0", cfg.tau0);
  cfg.kappa = j.value("kappa", cfg.kappa);
  cfg.passes = j.value("passes", cfg.passes);
  cfg.e_step_tol = j.value("e_step_tol", cfg.e_step_tol);
  cfg.e_step_max_iter = j.value("e_step_max_iter", cfg.e_step_max_iter);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.xi = j.value("xi", cfg.xi);
  return cfg;
}

inline nlohmann::json save_model(const TopicModel& model) {
  nlohmann::json lambda_rows = nlohmann::json::array();
  for (std::size_t k = 0; k < model.lambda.rows; ++k) {
    lambda_rows.push_back(
        std::vector<double>(model.lambda.row(k), model.lambda.row(k) + model.lambda.cols));
  }
  return nlohmann::json{{"format", "topicflow-model"},
                        {"version", kModelFormatVersion},
                        {"config", config_to_json(model.config)},
                        {"vocab_fingerprint", model.vocab_fingerprint},
                        {"k", model.k()},
                        {"v", model.v()},
                        {"alpha", model.alpha},
                        {"eta", model.eta},
                        {"lambda", lambda_rows},
                        {"updates_seen", model.updates_seen}};
}

inline TopicModel load_model(const nlohmann::json& j) {
  if (j.value("format", "") != "topicflow-model") throw Error("model file: unrecognized format");
  if (j.value("version", -1) != kModelFormatVersion) throw Error("model file: unsupported version");
  TopicModel model;
  model.config = config_from_json(j.at("config"));
  model.vocab_fingerprint = j.at("vocab_fingerprint").get<std::string>();
  model.alpha = j.at("alpha").get<std::vector<double>>();
  model.eta = j.at("eta").get<std::vector<double>>();
  model.updates_seen = j.at("updates_seen").get<std::int64_t>();
  const auto k_dim = j.at("k").get<std::size_t>();
  const auto v_dim = j.at("v").get<std::size_t>();
  model.lambda = Matrix(k_dim, v_dim);
  const auto& rows = j.at("lambda");
  if (rows.size() != k_dim) throw Error("model file: lambda row count mismatch");
  for (std::size_t k = 0; k < k_dim; ++k) {
    const auto row = rows[k].get<std::vector<double>>();
    if (row.size() != v_dim) throw Error("model file: lambda column count mismatch");
    std::copy(row.begin(), row.end(), model.lambda.row(k));
  }
  return model;
}

}  // namespace topicflow::lda
