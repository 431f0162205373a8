#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tunnelsim/error.hpp"
#include "tunnelsim/fit.hpp"

using namespace tunnelsim;

namespace {

std::vector<double> sample(FitModel m, const std::vector<double>& p, const std::vector<double>& x) {
  std::vector<double> y;
  for (double xi : x) y.push_back(model_value(m, p, xi));
  return y;
}

}  // namespace

TEST_CASE("exponential fit recovers exact parameters") {
  std::vector<double> x;
  for (int i = 0; i < 17; ++i) x.push_back(0.1 * std::pow(100.0, i / 16.0) / 4.7);
  const std::vector<double> p{0.58, 22.1, 0.0061};
  const FitResult f = fit_exponential(x, sample(FitModel::kExponential, p, x));
  REQUIRE(f.params.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(f.params[i] == doctest::Approx(p[i]).epsilon(1e-8));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.abscissa == "sigma_b/sigma_c");
  for (double r : f.residuals) CHECK(std::abs(r) < 1e-9);
}

TEST_CASE("tanh fit recovers exact parameters") {
  std::vector<double> x;
  for (int i = 0; i <= 20; ++i) x.push_back(0.9 + 0.01 * i);
  for (const std::vector<double>& p : {std::vector<double>{0.5, -22.96, 0.501},
                                       std::vector<double>{0.499, -31.79, 0.5}}) {
    const FitResult f = fit_tanh(x, sample(FitModel::kTanh, p, x));
    for (int i = 0; i < 3; ++i) CHECK(f.params[i] == doctest::Approx(p[i]).epsilon(1e-8));
    CHECK(f.evaluate(1.05) == doctest::Approx(model_value(FitModel::kTanh, p, 1.05)));
  }
}

TEST_CASE("sinusoid fit recovers frequency") {
  std::vector<double> t;
  for (int i = 0; i < 1200; ++i) t.push_back(0.02 * i);
  const std::vector<double> p{0.3, -0.2, 2.7, 1.7658};
  const FitResult f = fit_sinusoid(t, sample(FitModel::kSinusoid, p, t), 1.2, 2.8);
  for (int i = 0; i < 4; ++i) CHECK(f.params[i] == doctest::Approx(p[i]).epsilon(1e-8));
  CHECK_THROWS_AS(fit_sinusoid(t, sample(FitModel::kSinusoid, p, t), 2.0, 1.0), FitError);
}

TEST_CASE("noisy data keeps r squared in range") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.9 + 0.2 * i / 29.0);
    y.push_back(model_value(FitModel::kTanh, std::vector<double>{0.5, -23.0, 0.5}, x.back()) + noise(rng));
  }
  const FitResult f = fit_tanh(x, y);
  CHECK(f.r_squared >= 0.0);
  CHECK(f.r_squared <= 1.0);
  CHECK(f.r_squared > 0.9);
}

TEST_CASE("fit errors") {
  const std::vector<double> three{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fit_exponential(three, three), FitError);
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> bad{1.0, NAN, 3.0, 4.0};
  CHECK_THROWS_AS(fit_tanh(x, bad), FitError);
  CHECK_THROWS_AS(fit_tanh(x, three), FitError);
}

TEST_CASE("published width and height fits agree at the shared point") {
  // sigma_b = l_z with sigma_c = 4.7 l_z, V0/E = 1.1 and a_s = 0 in both fits.
  const double width = model_value(FitModel::kExponential, std::vector<double>{0.58, 22.1, 0.0061}, 1.0 / 4.7);
  const double height = model_value(FitModel::kTanh, std::vector<double>{0.500, -22.96, 0.501}, 1.1);
  CHECK(std::abs(width - height) < 0.002);
}
