#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "topicflow/innovation.hpp"
#include "topicflow/mathutil.hpp"
#include "topicflow/trends.hpp"

using namespace topicflow;
using innovation::InnovationScore;
using innovation::ThetaTable;

namespace {

// 36 months, three documents per month, seeded Dirichlet mixtures.
struct DualityFixture {
  std::vector<std::vector<double>> thetas;
  std::vector<int> months;
};

DualityFixture make_duality_fixture(std::uint64_t seed) {
  DualityFixture fx;
  std::mt19937_64 rng(seed);
  const std::vector<double> alpha{0.4, 0.9, 0.2, 1.3};
  for (int m = 0; m < 36; ++m) {
    for (int d = 0; d < 3; ++d) {
      fx.thetas.push_back(math::sample_dirichlet(alpha, rng));
      fx.months.push_back(m);
    }
  }
  return fx;
}

}  // namespace

TEST_CASE("kld in bits matches the hand-computed pair") {
  // 0.5 log2(0.5/0.25) + 0.5 log2(0.5/0.75) = 1 - 0.5 log2(3)
  const double expected = 0.2075187496394219;
  CHECK(innovation::kld_bits({0.5, 0.5}, {0.25, 0.75}) ==
        Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("kld of a distribution with itself is exactly zero") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = innovation::smooth_distribution(
        math::sample_dirichlet({0.3, 0.8, 0.5, 1.0, 0.2}, rng));
    CHECK(innovation::kld_bits(p, p) == 0.0);
  }
}

TEST_CASE("kld is non-negative across random smoothed pairs") {
  std::mt19937_64 rng(23);
  for (std::size_t k_dim : {2u, 5u, 17u}) {
    const std::vector<double> alpha(k_dim, 0.4);
    for (int trial = 0; trial < 40; ++trial) {
      const auto p = innovation::smooth_distribution(math::sample_dirichlet(alpha, rng));
      const auto q = innovation::smooth_distribution(math::sample_dirichlet(alpha, rng));
      CHECK(innovation::kld_bits(p, q) >= -1e-9);
    }
  }
}

TEST_CASE("kld validates shapes and rejects unsmoothed zeros") {
  CHECK_THROWS_AS(innovation::kld_bits({0.5, 0.5}, {1.0}), ValidationError);
  CHECK_THROWS_AS(innovation::kld_bits({}, {}), ValidationError);
  CHECK_THROWS_AS(innovation::kld_bits({0.5, 0.5}, {1.0, 0.0}), ValidationError);
  // A zero p coordinate contributes nothing even against zero q.
  CHECK(innovation::kld_bits({0.0, 1.0}, {0.0, 1.0}) == 0.0);
}

TEST_CASE("smoothing keeps coordinates positive and normalized") {
  const auto smoothed = innovation::smooth_distribution({0.0, 0.25, 0.75}, 1e-10);
  REQUIRE(smoothed.size() == 3);
  double total = 0.0;
  for (double v : smoothed) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(total == Catch::Approx(1.0).margin(1e-15));
  CHECK(smoothed[1] < smoothed[2]);
  CHECK(smoothed[0] < smoothed[1]);
  CHECK_THROWS_AS(innovation::smooth_distribution({}), ValidationError);
}

TEST_CASE("theta table groups documents by month in input order") {
  ThetaTable table({{0.5, 0.5}, {0.9, 0.1}, {0.2, 0.8}}, {7, 3, 7});
  CHECK(table.n_docs() == 3);
  CHECK(table.min_month() == 3);
  CHECK(table.max_month() == 7);
  CHECK(table.month_of(1) == 3);
  REQUIRE(table.docs_in_month(7) != nullptr);
  CHECK(*table.docs_in_month(7) == std::vector<std::size_t>{0, 2});
  CHECK(table.docs_in_month(5) == nullptr);

  CHECK_THROWS_AS(ThetaTable({{0.5, 0.5}}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(ThetaTable({}, {}), ValidationError);
  CHECK_THROWS_AS(ThetaTable({{0.5, 0.5}, {1.0}}, {1, 2}), ValidationError);
}

TEST_CASE("identical documents score exactly zero everywhere valid") {
  std::vector<std::vector<double>> thetas;
  std::vector<int> months;
  for (int m = 0; m < 36; ++m)
    for (int d = 0; d < 2; ++d) {
      thetas.push_back({0.25, 0.25, 0.5});
      months.push_back(m);
    }
  ThetaTable table(std::move(thetas), std::move(months));
  const auto scores = innovation::score_all(table, 12);
  int n_valid = 0;
  for (std::size_t d = 0; d < scores.size(); ++d) {
    const int m = table.month_of(d);
    if (m >= 12 && m <= 23) {
      REQUIRE(scores[d].valid);
      CHECK(scores[d].novelty == 0.0);
      CHECK(scores[d].transience == 0.0);
      CHECK(scores[d].resonance == 0.0);
      ++n_valid;
    } else {
      CHECK_FALSE(scores[d].valid);
      CHECK(std::isnan(scores[d].resonance));
    }
  }
  CHECK(n_valid == 24);
}

TEST_CASE("reversing the time axis swaps novelty and transience bit for bit") {
  const auto fx = make_duality_fixture(311);
  ThetaTable forward(fx.thetas, fx.months);
  std::vector<int> reversed_months(fx.months.size());
  for (std::size_t d = 0; d < fx.months.size(); ++d) reversed_months[d] = -fx.months[d];
  ThetaTable reversed(fx.thetas, reversed_months);

  const auto fwd = innovation::score_all(forward, 12);
  const auto rev = innovation::score_all(reversed, 12);
  REQUIRE(fwd.size() == rev.size());
  int n_valid = 0;
  for (std::size_t d = 0; d < fwd.size(); ++d) {
    REQUIRE(fwd[d].valid == rev[d].valid);
    if (!fwd[d].valid) continue;
    ++n_valid;
    CHECK(rev[d].novelty == fwd[d].transience);
    CHECK(rev[d].transience == fwd[d].novelty);
    CHECK(rev[d].resonance == -fwd[d].resonance);
  }
  CHECK(n_valid == 3 * 12);
}

TEST_CASE("a single outlier between steady months has zero resonance") {
  const std::vector<double> background{0.3, 0.3, 0.4};
  const std::vector<double> outlier{0.8, 0.1, 0.1};
  std::vector<std::vector<double>> thetas;
  std::vector<int> months;
  for (int m = 0; m <= 24; ++m)
    for (int d = 0; d < 2; ++d) {
      thetas.push_back(background);
      months.push_back(m);
    }
  thetas.push_back(outlier);
  months.push_back(12);
  ThetaTable table(std::move(thetas), std::move(months));

  const std::size_t outlier_doc = table.n_docs() - 1;
  const auto s = innovation::score_one(table, outlier_doc, 12);
  REQUIRE(s.valid);
  const double expected = innovation::kld_bits(innovation::smooth_distribution(outlier),
                                               innovation::smooth_distribution(background));
  CHECK(s.novelty == Catch::Approx(expected).epsilon(1e-12));
  CHECK(s.transience == Catch::Approx(expected).epsilon(1e-12));
  CHECK(s.resonance == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("validity needs a full window of observed months with documents") {
  // Documents exist only in months 0, 13 and 26.
  std::vector<std::vector<double>> thetas;
  std::vector<int> months;
  for (int m : {0, 13, 26}) {
    thetas.push_back({0.5, 0.5});
    months.push_back(m);
  }
  ThetaTable table(std::move(thetas), std::move(months));
  const auto scores = innovation::score_all(table, 12);

  // Month 0 and 26 run off the ends; month 13's windows lie inside the
  // range but cover only empty months.
  for (const auto& s : scores) CHECK_FALSE(s.valid);

  // Partial scores still surface where one side is computable.
  std::vector<std::vector<double>> thetas2;
  std::vector<int> months2;
  for (int m = 0; m < 36; ++m) {
    thetas2.push_back({0.6, 0.4});
    months2.push_back(m);
  }
  ThetaTable dense(std::move(thetas2), std::move(months2));
  const auto tail = innovation::score_one(dense, 35, 12);
  CHECK_FALSE(tail.valid);
  CHECK_FALSE(std::isnan(tail.novelty));
  CHECK(std::isnan(tail.transience));
  CHECK(std::isnan(tail.resonance));

  CHECK_THROWS_AS(innovation::score_one(dense, 5, 0), ValidationError);
}

TEST_CASE("parallel scoring equals the serial pass") {
  const auto fx = make_duality_fixture(1234);
  ThetaTable table(fx.thetas, fx.months);
  const auto serial = innovation::score_all(table, 12, 1);
  const auto parallel = innovation::score_all(table, 12, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t d = 0; d < serial.size(); ++d) {
    CHECK(serial[d].valid == parallel[d].valid);
    if (!serial[d].valid) continue;
    CHECK(serial[d].novelty == parallel[d].novelty);
    CHECK(serial[d].transience == parallel[d].transience);
  }
}

TEST_CASE("zscore standardizes with the sample standard deviation") {
  const auto z = innovation::zscore({1.0, 2.0, 3.0});
  REQUIRE(z.size() == 3);
  CHECK(z[0] == Catch::Approx(-1.0).margin(1e-12));
  CHECK(z[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(z[2] == Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(innovation::zscore({1.0}), ValidationError);
  CHECK_THROWS_AS(innovation::zscore({2.0, 2.0, 2.0}), ValidationError);
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> x, y;
  for (int i = 1; i <= 8; ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(0.25 + 0.5 * static_cast<double>(i));
  }
  const auto fit = innovation::fit_ols(x, y);
  CHECK(fit.slope == Catch::Approx(0.5).margin(1e-12));
  CHECK(fit.intercept == Catch::Approx(0.25).margin(1e-12));
  CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));
  CHECK(fit.n == 8);
  CHECK(fit.predict(10.0) == Catch::Approx(5.25).margin(1e-12));
}

TEST_CASE("least squares agrees with an unmeaned normal-equations oracle") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(40), y(40);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = unif(rng);
      y[i] = 0.7 * x[i] - 0.3 + 0.5 * unif(rng);
    }
    // Solve [n, sx; sx, sxx] [b; m] = [sy; sxy] by Cramer's rule.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double n = static_cast<double>(x.size());
    const double det = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;

    const auto fit = innovation::fit_ols(x, y);
    CHECK(fit.slope == Catch::Approx(slope).epsilon(1e-9));
    CHECK(fit.intercept == Catch::Approx(intercept).margin(1e-9));
    CHECK(fit.r_squared ==
          Catch::Approx(std::pow(trends::pearson(x, y), 2.0)).epsilon(1e-9));
  }

  CHECK_THROWS_AS(innovation::fit_ols({1.0, 2.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(innovation::fit_ols({1.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(innovation::fit_ols({3.0, 3.0}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("regression residuals average to zero over the fitted sample") {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> unif(-1.5, 1.5);
  std::vector<double> novelty(60), resonance(60);
  for (std::size_t i = 0; i < novelty.size(); ++i) {
    novelty[i] = unif(rng);
    resonance[i] = -0.4 * novelty[i] + 0.8 * unif(rng);
  }
  const auto zn = innovation::zscore(novelty);
  const auto zr = innovation::zscore(resonance);
  const auto fit = innovation::fit_ols(zn, zr);
  const auto dz = innovation::delta_z(zn, zr, fit);

  REQUIRE(dz.size() == zn.size());
  CHECK(math::mean(dz) == Catch::Approx(0.0).margin(1e-9));
  for (std::size_t i = 0; i < dz.size(); ++i)
    CHECK(dz[i] == Catch::Approx(zr[i] - fit.intercept - fit.slope * zn[i]).margin(1e-12));
  CHECK_THROWS_AS(innovation::delta_z({1.0}, {1.0, 2.0}, fit), ValidationError);
}

TEST_CASE("scores csv leaves invalid rows blank") {
  std::vector<InnovationScore> scores(2);
  scores[0].novelty = 0.5;
  scores[0].transience = 0.25;
  scores[0].resonance = 0.25;
  scores[0].valid = true;

  std::ostringstream out;
  innovation::write_scores_csv(out, {"a", "b"}, {12, 0}, {"1987-01", "1986-01"}, scores);
  CHECK(out.str() ==
        "doc_id,month,month_index,novelty,transience,resonance,valid\n"
        "a,1987-01,12,0.5,0.25,0.25,true\n"
        "b,1986-01,0,,,,false\n");

  CHECK_THROWS_AS(innovation::write_scores_csv(out, {"a"}, {1, 2}, {"x", "y"}, scores),
                  ValidationError);
}
