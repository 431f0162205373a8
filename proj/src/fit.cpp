#include "tunnelsim/fit.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tunnelsim/error.hpp"

namespace tunnelsim {

std::string_view to_string(FitModel m) noexcept {
  switch (m) {
    case FitModel::kExponential: return "exp";
    case FitModel::kTanh: return "tanh";
    case FitModel::kSinusoid: return "sinusoid";
  }
  return "unknown";
}

double model_value(FitModel m, std::span<const double> p, double x) {
  switch (m) {
    case FitModel::kExponential: return p[0] * std::exp(-p[1] * x) + p[2];
    case FitModel::kTanh: return p[0] * std::tanh(p[1] * (x - 1.0)) + p[2];
    case FitModel::kSinusoid: return p[0] * std::cos(p[3] * x) + p[1] * std::sin(p[3] * x) + p[2];
  }
  return 0.0;
}

double FitResult::evaluate(double x) const { return model_value(model, params, x); }

namespace {

// d model / d params at x.
void model_gradient(FitModel m, const Eigen::VectorXd& p, double x, Eigen::RowVectorXd& g) {
  switch (m) {
    case FitModel::kExponential: {
      const double e = std::exp(-p[1] * x);
      g << e, -p[0] * x * e, 1.0;
      break;
    }
    case FitModel::kTanh: {
      const double th = std::tanh(p[1] * (x - 1.0));
      g << th, p[0] * (x - 1.0) * (1.0 - th * th), 1.0;
      break;
    }
    case FitModel::kSinusoid: {
      const double c = std::cos(p[3] * x), s = std::sin(p[3] * x);
      g << c, s, 1.0, x * (-p[0] * s + p[1] * c);
      break;
    }
  }
}

struct Residual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  FitModel model;
  std::span<const double> x, y;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    const std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    for (std::size_t i = 0; i < x.size(); ++i) f[Eigen::Index(i)] = model_value(model, ps, x[i]) - y[i];
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    Eigen::RowVectorXd g(n_params);
    for (std::size_t i = 0; i < x.size(); ++i) {
      model_gradient(model, p, x[i], g);
      J.row(Eigen::Index(i)) = g;
    }
    return 0;
  }
};

int param_count(FitModel m) { return m == FitModel::kSinusoid ? 4 : 3; }

// Linear parameters for a fixed nonlinear one; returns the residual sum of squares.
double linear_solve(FitModel m, std::span<const double> x, std::span<const double> y, double q,
                    Eigen::VectorXd& p) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const int cols = m == FitModel::kSinusoid ? 3 : 2;
  Eigen::MatrixXd A(n, cols);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[std::size_t(i)];
    switch (m) {
      case FitModel::kExponential: A.row(i) << std::exp(-q * xi), 1.0; break;
      case FitModel::kTanh: A.row(i) << std::tanh(q * (xi - 1.0)), 1.0; break;
      case FitModel::kSinusoid: A.row(i) << std::cos(q * xi), std::sin(q * xi), 1.0; break;
    }
    b[i] = y[std::size_t(i)];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  p.resize(param_count(m));
  switch (m) {
    case FitModel::kExponential: p << c[0], q, c[1]; break;
    case FitModel::kTanh: p << c[0], q, c[1]; break;
    case FitModel::kSinusoid: p << c[0], c[1], c[2], q; break;
  }
  const double rss = (A * c - b).squaredNorm();
  return std::isfinite(rss) ? rss : std::numeric_limits<double>::infinity();
}

FitResult finish(FitModel m, std::span<const double> x, std::span<const double> y,
                 const Eigen::VectorXd& p, int evaluations, std::string abscissa) {
  FitResult r;
  r.model = m;
  r.params.assign(p.data(), p.data() + p.size());
  r.abscissa = std::move(abscissa);
  r.evaluations = evaluations;
  long double mean = 0.0L;
  for (double v : y) mean += v;
  mean /= static_cast<long double>(y.size());
  long double ss_tot = 0.0L, ss_res = 0.0L;
  r.residuals.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.residuals[i] = y[i] - r.evaluate(x[i]);
    ss_res += static_cast<long double>(r.residuals[i]) * r.residuals[i];
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  const double r2 = ss_tot > 0.0L ? static_cast<double>(1.0L - ss_res / ss_tot)
                                  : (ss_res == 0.0L ? 1.0 : 0.0);
  r.r_squared = std::clamp(r2, 0.0, 1.0);
  return r;
}

// Scan the nonlinear parameter over `grid`, keep the best few starts and refine each jointly.
FitResult fit_model(FitModel m, std::span<const double> x, std::span<const double> y,
                    const std::vector<double>& grid, std::string abscissa) {
  if (x.size() != y.size()) throw FitError("abscissa and ordinate sizes differ");
  if (x.size() < 4) throw FitError("at least four points are required for a fit");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw FitError("non-finite data point");
  }

  std::vector<std::pair<double, Eigen::VectorXd>> starts;
  for (double q : grid) {
    Eigen::VectorXd p;
    const double rss = linear_solve(m, x, y, q, p);
    if (std::isfinite(rss) && p.allFinite()) starts.emplace_back(rss, std::move(p));
  }
  if (starts.empty()) throw FitError("no finite starting point for " + std::string(to_string(m)));
  std::sort(starts.begin(), starts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  starts.resize(std::min<std::size_t>(starts.size(), 5));

  Residual functor{m, x, y, param_count(m)};
  double best_rss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  int evaluations = 0;
  std::string trace;
  for (auto& [rss0, p] : starts) {
    Eigen::LevenbergMarquardt<Residual> lm(functor);
    lm.parameters.ftol = 1e-15;
    lm.parameters.xtol = 1e-15;
    lm.parameters.gtol = 0.0;
    lm.parameters.maxfev = 4000;
    Eigen::VectorXd q = p;
    const auto status = lm.minimize(q);
    evaluations += static_cast<int>(lm.nfev);
    Eigen::VectorXd f(x.size());
    functor(q, f);
    const double rss = f.squaredNorm();
    trace += " start rss " + std::to_string(rss0) + " -> " + std::to_string(rss) + " (status " +
             std::to_string(static_cast<int>(status)) + ");";
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) continue;
    if (!q.allFinite() || !std::isfinite(rss)) continue;
    const double candidate = rss <= rss0 ? rss : rss0;
    if (candidate < best_rss) {
      best_rss = candidate;
      best = rss <= rss0 ? q : p;
    }
  }
  if (best.size() == 0) throw FitError(std::string(to_string(m)) + " fit did not converge:" + trace);
  return finish(m, x, y, best, evaluations, std::move(abscissa));
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[std::size_t(i)] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

}  // namespace

FitResult fit_exponential(std::span<const double> x, std::span<const double> y, std::string abscissa) {
  std::vector<double> grid = log_grid(1e-3, 1e3, 121);
  return fit_model(FitModel::kExponential, x, y, grid, std::move(abscissa));
}

FitResult fit_tanh(std::span<const double> x, std::span<const double> y, std::string abscissa) {
  std::vector<double> grid = log_grid(1e-2, 1e3, 101);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) grid.push_back(-grid[i]);
  FitResult f = fit_model(FitModel::kTanh, x, y, grid, std::move(abscissa));
  // a tanh(b u) = (-a) tanh(-b u); report a >= 0.
  if (f.params[0] < 0.0) {
    f.params[0] = -f.params[0];
    f.params[1] = -f.params[1];
  }
  return f;
}

FitResult fit_sinusoid(std::span<const double> t, std::span<const double> y, double omega_min,
                       double omega_max, std::string abscissa) {
  if (!(omega_max > omega_min) || !(omega_min > 0.0)) throw FitError("invalid frequency range");
  std::vector<double> grid;
  const int n = 2001;
  for (int i = 0; i < n; ++i) grid.push_back(omega_min + (omega_max - omega_min) * i / (n - 1));
  return fit_model(FitModel::kSinusoid, t, y, grid, std::move(abscissa));
}

}  // namespace tunnelsim
