#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "topicflow/lda.hpp"
#include "topicflow/mathutil.hpp"

using namespace topicflow;
using lda::BagOfWords;
using lda::LdaConfig;

namespace {

// Reference fixed point written with plain dense loops: phi_wk proportional
// to exp(E[log theta_k]) * exp(E[log beta_kw]), gamma = alpha + sum n_w phi,
// iterated far past the library's own tolerance.
std::vector<double> dense_e_step_oracle(const BagOfWords& bow, const std::vector<double>& alpha,
                                        const Matrix& exp_elog_beta) {
  const std::size_t K = alpha.size();
  std::vector<double> gamma(K);
  double n_total = 0.0;
  for (const auto& [id, c] : bow.pairs) n_total += c;
  for (std::size_t k = 0; k < K; ++k) gamma[k] = alpha[k] + n_total / static_cast<double>(K);

  for (int iter = 0; iter < 5000; ++iter) {
    const double psi_sum = math::digamma(std::accumulate(gamma.begin(), gamma.end(), 0.0));
    std::vector<double> exp_elog_theta(K);
    for (std::size_t k = 0; k < K; ++k)
      exp_elog_theta[k] = std::exp(math::digamma(gamma[k]) - psi_sum);

    std::vector<double> next(alpha);
    for (const auto& [id, count] : bow.pairs) {
      std::vector<double> phi(K);
      double norm = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        phi[k] = exp_elog_theta[k] * exp_elog_beta(k, static_cast<std::size_t>(id));
        norm += phi[k];
      }
      for (std::size_t k = 0; k < K; ++k) next[k] += count * phi[k] / norm;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < K; ++k) change += std::fabs(next[k] - gamma[k]);
    gamma = next;
    if (change < 1e-12) break;
  }
  return gamma;
}

Matrix block_beta(int k_topics, int v) {
  Matrix beta(static_cast<std::size_t>(k_topics), static_cast<std::size_t>(v));
  const int per = v / k_topics;
  for (int k = 0; k < k_topics; ++k)
    for (int w = k * per; w < (k + 1) * per; ++w)
      beta(static_cast<std::size_t>(k), static_cast<std::size_t>(w)) = 1.0 / per;
  return beta;
}

double cosine(const double* a, const double* b, std::size_t n) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

double best_permutation_mean_cosine(const Matrix& est, const Matrix& truth) {
  std::vector<int> perm(truth.rows);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.rows; ++i)
      acc += cosine(truth.row(i), est.row(static_cast<std::size_t>(perm[i])), truth.cols);
    best = std::max(best, acc / static_cast<double>(truth.rows));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("digamma and trigamma match reference values") {
  constexpr double euler = 0.57721566490153286;
  CHECK(math::digamma(1.0) == Catch::Approx(-euler).epsilon(1e-12));
  CHECK(math::digamma(0.5) == Catch::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(math::digamma(2.0) == Catch::Approx(1.0 - euler).epsilon(1e-12));
  // psi(x + 1) = psi(x) + 1/x
  for (double x : {0.1, 0.7, 1.3, 4.2, 17.0})
    CHECK(math::digamma(x + 1.0) == Catch::Approx(math::digamma(x) + 1.0 / x).epsilon(1e-12));
  CHECK(math::trigamma(1.0) ==
        Catch::Approx(1.6449340668482264).epsilon(1e-10));  // pi^2 / 6
  for (double x : {0.4, 2.5, 9.0})
    CHECK(math::trigamma(x + 1.0) ==
          Catch::Approx(math::trigamma(x) - 1.0 / (x * x)).epsilon(1e-10));
}

TEST_CASE("priors follow the three construction modes") {
  const auto sym = lda::make_prior("symmetric", 4);
  for (double a : sym) CHECK(a == Catch::Approx(0.25));

  const auto asym = lda::make_prior("asymmetric", 4);
  double total = 0.0;
  std::vector<double> raw(4);
  for (int k = 0; k < 4; ++k) {
    raw[static_cast<std::size_t>(k)] = 1.0 / (k + std::sqrt(4.0));
    total += raw[static_cast<std::size_t>(k)];
  }
  for (int k = 0; k < 4; ++k)
    CHECK(asym[static_cast<std::size_t>(k)] ==
          Catch::Approx(raw[static_cast<std::size_t>(k)] / total).epsilon(1e-14));
  CHECK(std::accumulate(asym.begin(), asym.end(), 0.0) == Catch::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 1; k < asym.size(); ++k) CHECK(asym[k] < asym[k - 1]);

  CHECK(lda::make_prior("auto", 3) == lda::make_prior("symmetric", 3));
  CHECK_THROWS_AS(lda::make_prior("symmetric", 1), ValidationError);
  CHECK_THROWS_AS(lda::make_prior("bogus", 4), ValidationError);
}

TEST_CASE("learned dirichlet prior satisfies the stationarity condition") {
  // Synthetic mean log-probabilities from a known Dirichlet.
  const std::vector<double> truth{0.8, 0.3, 1.9};
  std::mt19937_64 rng(5);
  std::vector<double> logphat(truth.size(), 0.0);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto sample = math::sample_dirichlet(truth, rng);
    for (std::size_t k = 0; k < truth.size(); ++k) logphat[k] += std::log(sample[k]);
  }
  for (double& v : logphat) v /= n;

  std::vector<double> prior{1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (int it = 0; it < 200; ++it) prior = math::update_dirichlet_prior(prior, logphat, n);

  const double psi_total =
      math::digamma(std::accumulate(prior.begin(), prior.end(), 0.0));
  for (std::size_t k = 0; k < prior.size(); ++k) {
    const double gradient = psi_total - math::digamma(prior[k]) + logphat[k];
    CHECK(std::fabs(gradient) < 1e-6);
  }
  // With 4000 samples the MLE should sit near the generator.
  for (std::size_t k = 0; k < prior.size(); ++k)
    CHECK(prior[k] == Catch::Approx(truth[k]).epsilon(0.15));
}

TEST_CASE("corpus sampler is seeded and validates beta") {
  const Matrix beta = block_beta(2, 10);
  const std::vector<double> alpha{0.1, 0.1};
  const auto a = lda::sample_corpus(beta, 50, 20.0, alpha, 9);
  const auto b = lda::sample_corpus(beta, 50, 20.0, alpha, 9);
  const auto c = lda::sample_corpus(beta, 50, 20.0, alpha, 10);
  REQUIRE(a.docs.size() == 50);
  REQUIRE(a.thetas.size() == 50);
  bool identical = true, different = false;
  for (std::size_t d = 0; d < 50; ++d) {
    identical = identical && a.docs[d].pairs == b.docs[d].pairs;
    different = different || a.docs[d].pairs != c.docs[d].pairs;
  }
  CHECK(identical);
  CHECK(different);
  for (const auto& theta : a.thetas)
    CHECK(std::accumulate(theta.begin(), theta.end(), 0.0) == Catch::Approx(1.0).epsilon(1e-9));

  Matrix zero_row(2, 4);
  zero_row(0, 0) = 1.0;  // row 1 left all zero
  CHECK_THROWS_AS(lda::sample_corpus(zero_row, 5, 10.0, alpha, 1), ValidationError);
  Matrix bad_sum(1, 2);
  bad_sum(0, 0) = 0.6;
  bad_sum(0, 1) = 0.6;
  CHECK_THROWS_AS(lda::sample_corpus(bad_sum, 5, 10.0, {1.0}, 1), ValidationError);
}

TEST_CASE("e-step gamma matches the dense fixed-point oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    // 2 topics, 3 terms, random positive lambda.
    Matrix lambda(2, 3);
    for (auto& v : lambda.data) v = unif(rng);
    const Matrix exp_elog_beta = lda::detail::exp_dirichlet_expectation_rows(lambda);
    const std::vector<double> alpha{unif(rng), unif(rng)};

    BagOfWords bow;
    for (std::int32_t w = 0; w < 3; ++w) {
      const auto count = static_cast<std::int32_t>(rng() % 7);
      if (count > 0) bow.pairs.emplace_back(w, count);
    }
    if (bow.pairs.empty()) bow.pairs.emplace_back(0, 1);

    const auto res = lda::e_step(bow, alpha, exp_elog_beta, 1e-10, 3000);
    const auto oracle = dense_e_step_oracle(bow, alpha, exp_elog_beta);
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(res.gamma[k] == Catch::Approx(oracle[k]).margin(1e-8));
  }
}

TEST_CASE("single-topic e-step reduces to the closed form") {
  Matrix lambda(1, 4);
  lambda(0, 0) = 0.7;
  lambda(0, 1) = 2.0;
  lambda(0, 2) = 5.5;
  lambda(0, 3) = 0.3;
  const Matrix exp_elog_beta = lda::detail::exp_dirichlet_expectation_rows(lambda);
  BagOfWords bow;
  bow.pairs = {{0, 3}, {2, 4}, {3, 1}};
  const auto res = lda::e_step(bow, {0.5}, exp_elog_beta, 1e-8, 100);
  CHECK(res.gamma[0] == 0.5 + 8.0);  // alpha + N_d, exact
}

TEST_CASE("e-step of an empty bag returns the prior") {
  Matrix lambda(2, 3, 1.0);
  const Matrix exp_elog_beta = lda::detail::exp_dirichlet_expectation_rows(lambda);
  const auto res = lda::e_step({}, {0.3, 0.7}, exp_elog_beta, 1e-8, 100);
  CHECK(res.gamma == std::vector<double>{0.3, 0.7});
  CHECK(res.sstats.empty());
  CHECK(res.iterations == 0);
}

TEST_CASE("e-step statistics preserve token counts per term") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  Matrix lambda(3, 5);
  for (auto& v : lambda.data) v = unif(rng);
  const Matrix exp_elog_beta = lda::detail::exp_dirichlet_expectation_rows(lambda);
  BagOfWords bow;
  bow.pairs = {{0, 2}, {1, 1}, {3, 4}, {4, 1}};
  const auto res = lda::e_step(bow, {0.4, 0.3, 0.3}, exp_elog_beta, 1e-10, 2000);
  // Column sums of phi * counts give the token counts back.
  for (std::size_t w = 0; w < bow.pairs.size(); ++w) {
    double col = 0.0;
    for (std::size_t k = 0; k < 3; ++k) col += res.sstats[k * bow.pairs.size() + w];
    CHECK(col == Catch::Approx(static_cast<double>(bow.pairs[w].second)).epsilon(1e-9));
  }
}

TEST_CASE("online fit is deterministic under a fixed seed") {
  const Matrix beta = block_beta(2, 20);
  const auto corpus = lda::sample_corpus(beta, 120, 15.0, {0.2, 0.2}, 3);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.minibatch_size = 32;
  cfg.passes = 2;
  cfg.seed = 11;
  const auto a = lda::fit_online(corpus.docs, cfg, 20, "fp", 1);
  const auto b = lda::fit_online(corpus.docs, cfg, 20, "fp", 1);
  CHECK(a.model.lambda.data == b.model.lambda.data);
  CHECK(a.model.updates_seen == b.model.updates_seen);
  cfg.seed = 12;
  const auto c = lda::fit_online(corpus.docs, cfg, 20, "fp", 1);
  CHECK(a.model.lambda.data != c.model.lambda.data);
}

TEST_CASE("worker count only reassociates floating point sums") {
  const Matrix beta = block_beta(2, 20);
  const auto corpus = lda::sample_corpus(beta, 150, 15.0, {0.2, 0.2}, 8);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.minibatch_size = 64;
  cfg.passes = 2;
  cfg.seed = 21;
  const auto single = lda::fit_online(corpus.docs, cfg, 20, "fp", 1);
  const auto threaded = lda::fit_online(corpus.docs, cfg, 20, "fp", 4);
  REQUIRE(single.model.lambda.data.size() == threaded.model.lambda.data.size());
  for (std::size_t i = 0; i < single.model.lambda.data.size(); ++i)
    CHECK(threaded.model.lambda.data[i] ==
          Catch::Approx(single.model.lambda.data[i]).epsilon(1e-9));
  // Repeating with the same worker count reproduces bytes exactly.
  const auto threaded_again = lda::fit_online(corpus.docs, cfg, 20, "fp", 4);
  CHECK(threaded.model.lambda.data == threaded_again.model.lambda.data);
}

TEST_CASE("online fit recovers planted topics") {
  const Matrix beta = block_beta(5, 100);
  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto corpus =
        lda::sample_corpus(beta, 2000, 40.0, std::vector<double>(5, 0.1), seed);
    LdaConfig cfg;
    cfg.k = 5;
    cfg.minibatch_size = 256;
    cfg.passes = 3;
    cfg.seed = seed * 100;
    const auto fit = lda::fit_online(corpus.docs, cfg, 100, "fp", 1);
    if (best_permutation_mean_cosine(fit.model.expected_beta(), beta) >= 0.8) ++recovered;
  }
  CHECK(recovered == 3);
}

TEST_CASE("auto priors move away from the symmetric start") {
  // Heavily skewed mixtures: topic 0 dominates almost every document.
  const Matrix beta = block_beta(2, 20);
  const auto corpus = lda::sample_corpus(beta, 400, 25.0, {2.0, 0.05}, 17);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.alpha_mode = "auto";
  cfg.eta_mode = "auto";
  cfg.minibatch_size = 100;
  cfg.passes = 3;
  cfg.seed = 5;
  const auto fit = lda::fit_online(corpus.docs, cfg, 20, "fp", 1);
  CHECK(fit.model.alpha[0] != fit.model.alpha[1]);
  REQUIRE(fit.model.eta.size() == 20);
  for (double e : fit.model.eta) CHECK(e > 0.0);
}

TEST_CASE("fit validates its configuration and inputs") {
  LdaConfig cfg;
  cfg.k = 1;
  cfg.kappa = 0.4;
  BagOfWords bow;
  bow.pairs = {{0, 1}};
  CHECK_THROWS_AS(lda::fit_online({bow}, cfg, 4, "fp", 1), ValidationError);
  LdaConfig ok;
  ok.k = 2;
  CHECK_THROWS_AS(lda::fit_online({}, ok, 4, "fp", 1), ValidationError);
  BagOfWords out_of_range;
  out_of_range.pairs = {{9, 1}};
  CHECK_THROWS_AS(lda::fit_online({out_of_range}, ok, 4, "fp", 1), ValidationError);
}

TEST_CASE("per-pass bounds are finite and improve on random initialization") {
  const Matrix beta = block_beta(2, 20);
  const auto corpus = lda::sample_corpus(beta, 200, 20.0, {0.3, 0.3}, 23);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.minibatch_size = 50;
  cfg.passes = 3;
  cfg.seed = 2;
  const auto fit = lda::fit_online(corpus.docs, cfg, 20, "fp", 1);
  REQUIRE(fit.pass_bounds.size() == 3);
  for (double b : fit.pass_bounds) CHECK(std::isfinite(b));
  CHECK(fit.pass_bounds.back() >= fit.pass_bounds.front() - 1e-9);
}

TEST_CASE("theta inference normalizes gamma and flags empty documents") {
  const Matrix beta = block_beta(2, 10);
  const auto corpus = lda::sample_corpus(beta, 60, 12.0, {0.4, 0.4}, 6);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.minibatch_size = 30;
  cfg.seed = 4;
  const auto fit = lda::fit_online(corpus.docs, cfg, 10, "fp", 1);

  const auto dt = lda::infer_theta(corpus.docs[0], fit.model);
  CHECK_FALSE(dt.from_prior);
  CHECK(std::accumulate(dt.theta.begin(), dt.theta.end(), 0.0) ==
        Catch::Approx(1.0).epsilon(1e-12));

  const auto empty = lda::infer_theta({}, fit.model);
  CHECK(empty.from_prior);
  CHECK(empty.theta == std::vector<double>{0.5, 0.5});

  auto batch = corpus.docs;
  batch.push_back({});
  const auto all = lda::infer_thetas(batch, fit.model, 3);
  REQUIRE(all.size() == batch.size());
  CHECK(all.back().from_prior);
  const auto again = lda::infer_theta(batch[5], fit.model);
  CHECK(all[5].theta == again.theta);
}

TEST_CASE("top words rank by weight with index tie-break") {
  lda::TopicModel model;
  model.lambda = Matrix(1, 5);
  model.lambda(0, 0) = 0.2;
  model.lambda(0, 1) = 5.0;
  model.lambda(0, 2) = 1.0;
  model.lambda(0, 3) = 5.0;
  model.lambda(0, 4) = 0.9;
  model.alpha = {1.0};
  CHECK(lda::top_words(model, 0, 3) == std::vector<std::int32_t>{1, 3, 2});
  CHECK(lda::top_words(model, 0, 99).size() == 5);
  CHECK_THROWS_AS(lda::top_words(model, 2, 3), ValidationError);
}

TEST_CASE("model json round trips bit for bit") {
  const Matrix beta = block_beta(2, 10);
  const auto corpus = lda::sample_corpus(beta, 80, 12.0, {0.4, 0.4}, 13);
  LdaConfig cfg;
  cfg.k = 2;
  cfg.alpha_mode = "asymmetric";
  cfg.minibatch_size = 40;
  cfg.seed = 99;
  const auto fit = lda::fit_online(corpus.docs, cfg, 10, "vocab-fp", 1);

  const auto dumped = lda::save_model(fit.model).dump();
  const auto loaded = lda::load_model(nlohmann::json::parse(dumped));
  CHECK(loaded.lambda.data == fit.model.lambda.data);
  CHECK(loaded.alpha == fit.model.alpha);
  CHECK(loaded.eta == fit.model.eta);
  CHECK(loaded.updates_seen == fit.model.updates_seen);
  CHECK(loaded.vocab_fingerprint == "vocab-fp");
  CHECK(loaded.config.alpha_mode == "asymmetric");

  nlohmann::json bad = lda::save_model(fit.model);
  bad["format"] = "other";
  CHECK_THROWS_AS(lda::load_model(bad), Error);
}
