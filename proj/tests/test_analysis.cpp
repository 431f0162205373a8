#include <doctest.h>

#include <cmath>
#include <vector>

#include "tunnelsim/analysis.hpp"
#include "tunnelsim/error.hpp"

using namespace tunnelsim;

namespace {

TransmissionResult bve_row(double T, PointKey p = {0.0, 1.1, 1.0}) {
  TransmissionResult r;
  r.source = Source::kBve;
  r.T = T;
  r.point = p;
  return r;
}

}  // namespace

TEST_CASE("piecewise-linear integration") {
  const Grid g(0.0, 10.0, 1024);
  std::vector<double> lin(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) lin[j] = 2.0 * g.z(j) + 1.0;
  auto exact = [](double a, double b) { return (b * b + b) - (a * a + a); };
  CHECK(integrate_linear(g, lin, 1.234, 7.891) == doctest::Approx(exact(1.234, 7.891)).epsilon(1e-12));
  CHECK(integrate_linear(g, lin, 3.001, 3.002) == doctest::Approx(exact(3.001, 3.002)).epsilon(1e-9));
  const double top = g.z(g.size() - 1);
  CHECK(integrate_linear(g, lin, -5.0, 100.0) == doctest::Approx(exact(0.0, top)).epsilon(1e-12));
  CHECK(integrate_linear(g, lin, 5.0, 4.0) == 0.0);
}

TEST_CASE("region counts for density on one side") {
  const Grid g(-50.0, 50.0, 4096);
  const BarrierSpec b{200.0, 1.0, 0.0};
  std::vector<std::complex<double>> right(g.size()), left(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    right[j] = std::exp(-0.5 * std::pow(g.z(j) - 20.0, 2));
    left[j] = std::exp(-0.5 * std::pow(g.z(j) + 20.0, 2));
  }
  const RegionCounts cr = region_counts(g, right, b);
  const double n = std::sqrt(std::numbers::pi);
  CHECK(cr.n_t == doctest::Approx(n).epsilon(1e-10));
  CHECK(cr.n_lost < 1e-30);
  const TransmissionResult all_t = make_result(cr, cr.n_t + cr.n_r + cr.n_lost, 1.0, Source::kGpe);
  CHECK(all_t.T == doctest::Approx(1.0));
  const RegionCounts cl = region_counts(g, left, b);
  CHECK(make_result(cl, n, 1.0, Source::kGpe).T < 1e-100);
  CHECK(cl.n_t + cl.n_r + cl.n_lost == doctest::Approx(n).epsilon(1e-10));
}

TEST_CASE("incoming atoms use the local velocity") {
  const Grid g(-50.0, 50.0, 4096);
  const BarrierSpec b{200.0, 1.0, 0.0};
  std::vector<std::complex<double>> moving(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double z = g.z(j);
    moving[j] = std::exp(-0.5 * std::pow(z + 10.0, 2)) * std::polar(1.0, 5.0 * z);
  }
  CHECK(region_counts(g, moving, b, 4.0).n_incoming == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-6));
  CHECK(region_counts(g, moving, b, 0.2).n_incoming < 1e-6 * std::sqrt(std::numbers::pi));
  CHECK(region_counts(g, moving, b, 0.0).n_incoming == 0.0);
}

TEST_CASE("classical counts are exact multiples of N/M") {
  const BarrierSpec b{200.0, 1.0, 0.0};
  const std::vector<double> z{-5.0, -3.0, 0.0, 1.0, 2.5, 9.0};
  const std::vector<double> p{1.0, 10.0, 0.0, 0.0, -1.0, 1.0};
  const RegionCounts c = region_counts(z, p, b, 600.0, 0.5);
  CHECK(c.n_t == 200.0);
  CHECK(c.n_r == 200.0);
  CHECK(c.n_lost == 200.0);
  CHECK(c.n_t + c.n_r + c.n_lost == 600.0);
  CHECK(c.n_incoming == 200.0);
  CHECK(make_result(c, 600.0, 1.0, Source::kBve).T == doctest::Approx(0.5));
}

TEST_CASE("stop monitor") {
  StopOptions o;
  o.t_cap = 1.0;
  SUBCASE("stationary empty region meets the criterion after one window") {
    StopMonitor m(100.0, o);
    bool met = false;
    double t = 0.0;
    for (; t < 0.5 && !met; t += 0.01) met = m.update(t, {0.0, 100.0, 0.0, 0.0});
    CHECK(met);
    CHECK(m.t_end() == doctest::Approx(0.1));
    CHECK(measure(m, Source::kGpe).T == 0.0);
    CHECK(measure(m, Source::kGpe).converged);
    // Stays met.
    CHECK(m.update(t + 0.01, {0.0, 100.0, 0.0, 0.0}));
    CHECK(m.met());
  }
  SUBCASE("atoms in the barrier region hold it open until the cap") {
    StopMonitor m(100.0, o);
    CHECK_THROWS_AS(measure(m, Source::kGpe), PrematureMeasurementError);
    for (double t = 0.0; t <= 1.0 + 1e-12; t += 0.01) m.update(t, {50.0, 49.0, 1.0, 0.0});
    CHECK(m.capped());
    CHECK_FALSE(m.met());
    const TransmissionResult r = measure(m, Source::kGpe);
    CHECK_FALSE(r.converged);
    CHECK(r.T == doctest::Approx(50.0 / 99.0));
    CHECK(m.diagnostics().find("cap reached") == 0);
  }
  SUBCASE("incoming atoms hold it open") {
    StopMonitor m(100.0, o);
    for (double t = 0.0; t < 0.5; t += 0.01) CHECK_FALSE(m.update(t, {0.0, 100.0, 0.0, 10.0}));
  }
  SUBCASE("changing counts hold it open") {
    StopMonitor m(100.0, o);
    for (double t = 0.0; t < 0.5; t += 0.01) CHECK_FALSE(m.update(t, {t, 100.0 - t, 0.0, 0.0}));
  }
}

TEST_CASE("stop cap") {
  const BarrierSpec b{220.0, 1.0, -17.9};
  const double cap = default_stop_cap(-50.0, 4.7, 20.0, b);
  CHECK(cap == doctest::Approx(2.0 * (b.z_T() + 50.0 + 14.1) / 20.0 + 12.0 / std::sqrt(440.0)));
  CHECK(default_stop_cap(-50.0, 4.7, 0.0, b) == 2.0);
}

TEST_CASE("aggregate") {
  const std::vector<TransmissionResult> two{bve_row(0.4), bve_row(0.6)};
  const EnsembleStatistics s = aggregate(two);
  CHECK(s.mean == doctest::Approx(0.5));
  CHECK(s.stderr_ == doctest::Approx(0.1));
  CHECK(s.error_bar == doctest::Approx(0.3));
  CHECK(aggregate(std::vector<TransmissionResult>(5, bve_row(0.3))).stderr_ == 0.0);

  std::vector<TransmissionResult> twenty;
  for (int i = 0; i < 20; ++i) twenty.push_back(bve_row(0.1 + 0.01 * i));
  double mean = 0.0, ss = 0.0;
  for (const auto& r : twenty) mean += r.T / 20.0;
  for (const auto& r : twenty) ss += (r.T - mean) * (r.T - mean);
  CHECK(aggregate(twenty).error_bar == doctest::Approx(3.0 * std::sqrt(ss / 19.0) / std::sqrt(20.0)));

  CHECK_THROWS_AS(aggregate(std::vector<TransmissionResult>{bve_row(0.4)}), AggregationError);
  CHECK_THROWS_AS(aggregate(std::vector<TransmissionResult>{bve_row(0.4), bve_row(0.5, {0.5, 1.1, 1.0})}),
                  AggregationError);
  TransmissionResult gpe = bve_row(0.4);
  gpe.source = Source::kGpe;
  CHECK_THROWS_AS(aggregate(std::vector<TransmissionResult>{gpe, bve_row(0.5)}), AggregationError);
}

TEST_CASE("quantum tunneling difference") {
  TransmissionResult gpe = bve_row(0.011);
  gpe.source = Source::kGpe;
  const EnsembleStatistics bve = aggregate(std::vector<TransmissionResult>{bve_row(0.002), bve_row(0.004)});
  const TunnelingResult t = quantum_tunneling(gpe, bve);
  CHECK(t.delta_T == gpe.T - bve.mean);
  CHECK(t.error_bar == bve.error_bar);
  EnsembleStatistics same = bve;
  same.mean = gpe.T;
  CHECK(quantum_tunneling(gpe, same).delta_T == 0.0);
  // Swapping the roles flips the sign.
  TransmissionResult as_gpe = gpe;
  as_gpe.T = bve.mean;
  EnsembleStatistics as_bve = bve;
  as_bve.mean = gpe.T;
  CHECK(quantum_tunneling(as_gpe, as_bve).delta_T == -t.delta_T);
  EnsembleStatistics other = bve;
  other.point.a_s_a0 = 0.5;
  CHECK_THROWS_AS(quantum_tunneling(gpe, other), PairingError);
}

TEST_CASE("source tags") {
  CHECK(to_string(Source::kGpe) == "GPE");
  CHECK(parse_source("BVE") == Source::kBve);
  CHECK_THROWS_AS(parse_source("gpe"), SchemaError);
}
