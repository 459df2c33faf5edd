#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "easyuq/idr.hpp"
#include "easyuq/pav.hpp"
#include "easyuq/scoring.hpp"
#include "easyuq/types.hpp"

using namespace easyuq;

namespace {

std::vector<double> indicator_column(const std::vector<double>& y, double t) {
  std::vector<double> v(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) v[i] = y[i] <= t ? 1.0 : 0.0;
  return v;
}

}  // namespace

TEST_CASE("three-point example matches the min-max reference per column") {
  const TrainingData data({1, 2, 3}, {3, 1, 2});
  const IdrModel model = fit_idr(data);
  REQUIRE(model.k() == 3);
  REQUIRE(model.m() == 3);
  CHECK(model.thresholds().values() == std::vector<double>{1, 2, 3});

  // covariates are distinct and already ordered, so columns must equal the
  // min-max solution of the indicator sequences
  for (std::size_t j = 0; j < 3; ++j) {
    const auto expected =
        minmax_fit(indicator_column({3, 1, 2}, model.thresholds()[j]));
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(model.row(r)[j] == doctest::Approx(expected[r]).epsilon(1e-14));
    }
  }
  // the first column is the antitonic fit of (0,1,0)
  CHECK(model.row(0)[0] == doctest::Approx(0.5));
  CHECK(model.row(1)[0] == doctest::Approx(0.5));
  CHECK(model.row(2)[0] == doctest::Approx(0.0));
}

TEST_CASE("every column equals the min-max reference, exhaustively") {
  // all outcome patterns over a three-letter alphabet, n up to 5
  for (std::size_t n = 1; n <= 5; ++n) {
    std::size_t patterns = 1;
    for (std::size_t i = 0; i < n; ++i) patterns *= 3;
    for (std::size_t code = 0; code < patterns; ++code) {
      std::vector<double> x(n), y(n);
      std::size_t rest = code;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(i);  // distinct covariates
        y[i] = static_cast<double>(rest % 3);
        rest /= 3;
      }
      const IdrModel model = fit_idr(TrainingData(x, y));
      for (std::size_t j = 0; j < model.m(); ++j) {
        const auto expected =
            minmax_fit(indicator_column(y, model.thresholds()[j]));
        for (std::size_t r = 0; r < model.k(); ++r) {
          CHECK(std::abs(model.row(r)[j] - expected[r]) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("columns match the reference on random real-valued samples") {
  std::mt19937_64 gen(555);
  std::uniform_real_distribution<double> outcome(-1.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + gen() % 8;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(i);
      y[i] = outcome(gen);
    }
    const IdrModel model = fit_idr(TrainingData(x, y));
    for (std::size_t j = 0; j < model.m(); ++j) {
      const auto expected = minmax_fit(indicator_column(y, model.thresholds()[j]));
      for (std::size_t r = 0; r < model.k(); ++r) {
        CHECK(std::abs(model.row(r)[j] - expected[r]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("constant outcomes give point masses") {
  const IdrModel model = fit_idr(TrainingData({1, 2, 3, 4}, {7, 7, 7, 7}));
  CHECK(model.m() == 1);
  for (std::size_t r = 0; r < model.k(); ++r) {
    CHECK(model.row(r)[0] == 1.0);
  }
}

TEST_CASE("comonotone data gives one point mass per covariate") {
  const IdrModel model = fit_idr(TrainingData({1, 2, 3}, {10, 20, 30}));
  REQUIRE(model.k() == 3);
  REQUIRE(model.m() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(model.row(r)[j] == (j >= r ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("prediction interpolates, matches stored rows, and clamps") {
  const TrainingData data({1, 2, 4}, {3, 1, 2});
  const IdrModel model = fit_idr(data);

  const auto exact = model.predict(2.0);
  for (std::size_t j = 0; j < model.m(); ++j) {
    CHECK(exact.cumulative()[j] == model.row(1)[j]);
  }

  const auto mid = model.predict(3.0);  // midpoint of 2 and 4
  for (std::size_t j = 0; j < model.m(); ++j) {
    CHECK(mid.cumulative()[j] ==
          doctest::Approx(0.5 * (model.row(1)[j] + model.row(2)[j])));
  }

  const auto low = model.predict(-10.0);
  const auto high = model.predict(99.0);
  for (std::size_t j = 0; j < model.m(); ++j) {
    CHECK(low.cumulative()[j] == model.row(0)[j]);
    CHECK(high.cumulative()[j] == model.row(2)[j]);
  }

  CHECK_THROWS_AS(model.predict(std::nan("")), std::invalid_argument);
}

TEST_CASE("point mass quantiles") {
  const IdrModel model = fit_idr(TrainingData({0}, {5}));
  const auto cdf = model.predict(0.0);
  for (double alpha : {0.01, 0.5, 0.99}) {
    CHECK(cdf.quantile(alpha) == 5.0);
  }
}

TEST_CASE("quantiles are monotone in level and in the covariate") {
  const TrainingData data = ([] {
    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::vector<double> x(60), y(60);
    for (std::size_t i = 0; i < 60; ++i) {
      x[i] = unif(gen);
      y[i] = x[i] + unif(gen);
    }
    return TrainingData(x, y);
  })();
  const IdrModel model = fit_idr(data);
  const std::vector<double> levels{0.05, 0.25, 0.5, 0.75, 0.95};
  double prev_by_level[5] = {-1e30, -1e30, -1e30, -1e30, -1e30};
  for (double x = -2.5; x <= 2.5; x += 0.25) {
    const StepCdf cdf = model.predict(x);
    double prev = -1e30;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double q = cdf.quantile(levels[l]);
      CHECK(q >= prev);          // nondecreasing in the level
      CHECK(q >= prev_by_level[l]);  // nondecreasing in the covariate
      prev = q;
      prev_by_level[l] = q;
    }
  }
}

TEST_CASE("predictions respect stochastic ordering at random query pairs") {
  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + gen() % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = unif(gen);
      y[i] = unif(gen) + 0.5 * x[i];
    }
    const IdrModel model = fit_idr(TrainingData(x, y));
    for (int q = 0; q < 20; ++q) {
      double a = unif(gen), b = unif(gen);
      if (a > b) std::swap(a, b);
      const auto fa = model.predict(a);
      const auto fb = model.predict(b);
      for (std::size_t j = 0; j < model.m(); ++j) {
        CHECK(fa.cumulative()[j] >= fb.cumulative()[j] - 1e-12);
      }
    }
  }
}

TEST_CASE("invariant under strictly increasing covariate transforms") {
  std::mt19937_64 gen(31337);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + gen() % 30;
    std::vector<double> x(n), gx(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = unif(gen);
      gx[i] = std::exp(x[i]);
      y[i] = unif(gen);
    }
    const IdrModel plain = fit_idr(TrainingData(x, y));
    const IdrModel mapped = fit_idr(TrainingData(gx, y));
    REQUIRE(plain.k() == mapped.k());
    REQUIRE(plain.m() == mapped.m());
    for (std::size_t r = 0; r < plain.k(); ++r) {
      for (std::size_t j = 0; j < plain.m(); ++j) {
        CHECK(std::abs(plain.row(r)[j] - mapped.row(r)[j]) <= 1e-12);
      }
      // predictions agree at the transformed training points
      CHECK(mapped.predict(gx[r % n]).cumulative() ==
            plain.predict(x[r % n]).cumulative());
    }
  }
}

namespace {

// a random valid competitor: antitonic rows built bottom-up over the same
// support, so it satisfies exactly the constraints the fit optimizes over
std::vector<std::vector<double>> random_antitonic_matrix(
    const IdrModel& model, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t k = model.k(), m = model.m();
  std::vector<std::vector<double>> matrix(k, std::vector<double>(m));

  std::vector<double> weights(m);
  double total = 0.0;
  for (auto& w : weights) total += (w = unif(gen));
  double running = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    running += weights[j] / total;
    matrix[k - 1][j] = std::min(running, 1.0);
  }
  matrix[k - 1][m - 1] = 1.0;

  for (std::size_t r = k - 1; r-- > 0;) {
    double high = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      high = std::max(high, std::min(matrix[r + 1][j] + 0.3 * unif(gen), 1.0));
      matrix[r][j] = high;
    }
    matrix[r][m - 1] = 1.0;
  }
  return matrix;
}

}  // namespace

TEST_CASE("training CRPS is optimal among antitonic competitors") {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 3 + gen() % 25;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = unif(gen);
      y[i] = unif(gen) + x[i];
    }
    const TrainingData data(x, y);
    const IdrModel model = fit_idr(data);

    double fitted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      fitted += crps(model.predict(x[i]), y[i]);
    }

    // competitor (a): the unconditional empirical CDF at every point
    std::vector<double> ecdf(model.m());
    for (std::size_t j = 0; j < model.m(); ++j) {
      double count = 0.0;
      for (double v : y) count += v <= model.thresholds()[j] ? 1.0 : 0.0;
      ecdf[j] = count / static_cast<double>(n);
    }
    const StepCdf pooled(model.thresholds_ptr(), ecdf);
    double unconditional = 0.0;
    for (std::size_t i = 0; i < n; ++i) unconditional += crps(pooled, y[i]);
    CHECK(fitted <= unconditional + 1e-9);

    // competitor (b): random antitonic matrices on the same support
    for (int cand = 0; cand < 10; ++cand) {
      const auto matrix = random_antitonic_matrix(model, gen);
      double challenger = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = model.row_index_of(x[i]);
        REQUIRE(r < model.k());
        challenger += crps(StepCdf(model.thresholds_ptr(), matrix[r]), y[i]);
      }
      CHECK(fitted <= challenger + 1e-9);
    }
  }
}

TEST_CASE("json round trip is bit exact") {
  std::mt19937_64 gen(9001);
  std::uniform_real_distribution<double> unif(-1e3, 1e3);
  std::vector<double> x(40), y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x[i] = unif(gen);
    y[i] = unif(gen);
  }
  const IdrModel model = fit_idr(TrainingData(x, y));
  const IdrModel loaded = idr_from_json(to_json(model));

  REQUIRE(loaded.k() == model.k());
  REQUIRE(loaded.m() == model.m());
  CHECK(loaded.unique_x() == model.unique_x());
  CHECK(loaded.thresholds().values() == model.thresholds().values());
  for (std::size_t r = 0; r < model.k(); ++r) {
    for (std::size_t j = 0; j < model.m(); ++j) {
      CHECK(loaded.row(r)[j] == model.row(r)[j]);
    }
  }

  const std::string path = "idr_roundtrip_test.json";
  save_model(model, path);
  const IdrModel from_file = load_model(path);
  CHECK(from_file.row(0)[0] == model.row(0)[0]);
  std::remove(path.c_str());
}
