#pragma once

// Least-squares fits used by the sweeps and the breathing-mode check.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tunnelsim {

enum class FitModel {
  kExponential,  // A exp(-lambda x) + B, params {A, lambda, B}
  kTanh,         // a tanh(b (x - 1)) + c, params {a, b, c} with a >= 0
  kSinusoid,     // A cos(omega x) + B sin(omega x) + C, params {A, B, C, omega}
};

std::string_view to_string(FitModel m) noexcept;

struct FitResult {
  FitModel model = FitModel::kExponential;
  std::vector<double> params;
  double r_squared = 0.0;       // clamped to [0, 1]
  std::vector<double> residuals;  // y_i - model(x_i)
  std::string abscissa;
  int evaluations = 0;

  double evaluate(double x) const;
};

double model_value(FitModel m, std::span<const double> params, double x);

/// Needs at least four points. Throws FitError when no start converges to finite parameters.
FitResult fit_exponential(std::span<const double> x, std::span<const double> y,
                          std::string abscissa = "sigma_b/sigma_c");
FitResult fit_tanh(std::span<const double> x, std::span<const double> y,
                   std::string abscissa = "V0/E");
/// Frequency scan over [omega_min, omega_max] by linear least squares, then joint refinement.
FitResult fit_sinusoid(std::span<const double> t, std::span<const double> y, double omega_min,
                       double omega_max, std::string abscissa = "t");

}  // namespace tunnelsim
