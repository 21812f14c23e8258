#include <cmath>
#include <sstream>

#include "doctest.h"
#include "shb/analysis.hpp"
#include "shb/engine.hpp"
#include "shb/scenario.hpp"

using namespace shb;

namespace {

XYData double_exp(double a1, double t1, double a2, double t2, double scale = 1.0) {
  XYData d;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.5 * std::pow(1200.0, i / 49.0);
    d.x.push_back(scale * t);
    d.y.push_back(a1 * std::exp(-t / t1) + a2 * std::exp(-t / t2));
  }
  return d;
}

XYData exp_offset(double a, double rate, double c) {
  XYData d;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.1 * i;
    d.x.push_back(t);
    d.y.push_back(a * std::exp(-rate * t) + c);
  }
  return d;
}

Spectrum flat_spectrum(double od, double lo = -10.0, double hi = 10.0) {
  Spectrum s;
  for (int i = 0; i <= 20; ++i) {
    s.freqs_MHz.push_back(lo + (hi - lo) * i / 20.0);
    s.optical_depth.push_back(od);
    s.transmission.push_back(std::exp(-od));
  }
  return s;
}

}  // namespace

TEST_CASE("levenberg-marquardt on a quadratic model") {
  // y = p0 + p1 x + p2 x^2 is linear in p; LM must land on the normal-equation answer.
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(20, -1.0, 1.0);
  Eigen::VectorXd y = 0.3 + 2.0 * x.array() - 1.5 * x.array().square();
  y[3] += 0.01;
  ModelFunction model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& out, Eigen::MatrixXd* j) {
    out = p[0] + p[1] * x.array() + p[2] * x.array().square();
    if (j) {
      j->resize(x.size(), 3);
      j->col(0).setOnes();
      j->col(1) = x;
      j->col(2) = x.array().square();
    }
  };
  Eigen::MatrixXd a(x.size(), 3);
  a.col(0).setOnes();
  a.col(1) = x;
  a.col(2) = x.array().square();
  const Eigen::VectorXd exact = a.colPivHouseholderQr().solve(y);
  const LmOutcome o = levenberg_marquardt(model, y, Eigen::Vector3d(5.0, -5.0, 5.0));
  CHECK(o.converged);
  CHECK((o.params - exact).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("double exponential") {
  SUBCASE("noiseless roundtrip") {
    const FitResult f = fit_double_exponential(double_exp(1.0, 11.0, 0.3, 100.0));
    CHECK(f.converged);
    CHECK_FALSE(f.degenerate);
    CHECK(f.value("A1") == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(f.value("tau1") == doctest::Approx(11.0).epsilon(1e-3));
    CHECK(f.value("A2") == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(f.value("tau2") == doctest::Approx(100.0).epsilon(1e-3));
    CHECK(std::abs(f.value("offset")) < 1e-6);
  }
  SUBCASE("time rescaling scales the lifetimes") {
    const FitResult a = fit_double_exponential(double_exp(1.0, 11.0, 0.3, 100.0));
    const FitResult b = fit_double_exponential(double_exp(1.0, 11.0, 0.3, 100.0, 3.0));
    CHECK(b.value("tau1") == doctest::Approx(3.0 * a.value("tau1")).epsilon(1e-6));
    CHECK(b.value("tau2") == doctest::Approx(3.0 * a.value("tau2")).epsilon(1e-6));
  }
  SUBCASE("a single exponential is flagged") {
    CHECK(fit_double_exponential(double_exp(1.0, 11.0, 0.0, 100.0)).degenerate);
  }
  SUBCASE("explicit starting point") {
    const FitResult f =
        fit_double_exponential(double_exp(1.0, 11.0, 0.3, 100.0), std::vector<double>{0.5, 5.0, 0.5, 50.0, 0.0});
    CHECK(f.value("tau2") == doctest::Approx(100.0).epsilon(1e-3));
    CHECK_THROWS_AS(fit_double_exponential(double_exp(1, 11, 0.3, 100), std::vector<double>{1.0}), Error);
  }
  SUBCASE("bad input") {
    XYData d = double_exp(1.0, 11.0, 0.3, 100.0);
    std::swap(d.x[3], d.x[4]);
    CHECK_THROWS_AS(fit_double_exponential(d), Error);
    CHECK_THROWS_AS(fit_double_exponential(XYData{{1, 2}, {1, 2}}), Error);
  }
  SUBCASE("unknown parameter names") {
    const FitResult f = fit_double_exponential(double_exp(1.0, 11.0, 0.3, 100.0));
    CHECK_THROWS_AS(f.value("tau3"), Error);
  }
}

TEST_CASE("lorentzian") {
  XYData d;
  for (int i = 0; i <= 40; ++i) {
    const double f = -50000.0 + 2500.0 * i;
    d.x.push_back(f);
    d.y.push_back(0.2 + 3.0 * lorentzian(f, 14000.0));
  }
  const FitResult r = fit_lorentzian(d);
  CHECK(r.value("fwhm") == doctest::Approx(14000.0).epsilon(1e-3));
  CHECK(std::abs(r.value("center")) < 1e-3);  // symmetric data
  CHECK(r.value("amplitude") == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(r.value("offset") == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("linear") {
  const LinearFit a = fit_linear({{0, 1, 2, 3}, {1, 3, 5, 7}});
  CHECK(a.slope == doctest::Approx(2.0));
  CHECK(a.intercept == doctest::Approx(1.0));
  CHECK(a.r_squared == doctest::Approx(1.0));
  const LinearFit b = fit_linear({{0, 1, 2}, {4, 4, 4}});
  CHECK(b.slope == 0.0);
  CHECK(b.r_squared == 1.0);
  CHECK_THROWS_AS(fit_linear({{1, 1}, {1, 2}}), Error);
  CHECK(to_fit_result(a).value("slope") == doctest::Approx(2.0));
}

TEST_CASE("exponential with offset") {
  SUBCASE("noiseless roundtrip") {
    const FitResult f = fit_exponential_offset(exp_offset(0.9, 0.35, 0.1));
    CHECK(f.value("amplitude") == doctest::Approx(0.9).epsilon(5e-3));
    CHECK(f.value("rate") == doctest::Approx(0.35).epsilon(5e-3));
    CHECK(f.value("offset") == doctest::Approx(0.1).epsilon(5e-3));
  }
  SUBCASE("zero rate is flagged") {
    CHECK(fit_exponential_offset(exp_offset(0.9, 0.0, 0.1)).degenerate);
  }
}

TEST_CASE("noisy roundtrips stay within 5 percent") {
  const XYData clean = exp_offset(0.9, 0.35, 0.1);
  XYData noisy = clean;
  const auto z = add_gaussian_noise(std::vector<double>(clean.size(), 0.0), 0.01, 17);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy.y[i] *= 1.0 + z[i];
  const FitResult f = fit_exponential_offset(noisy);
  CHECK(f.value("rate") == doctest::Approx(0.35).epsilon(0.05));
  CHECK(f.value("offset") == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("noise is seeded") {
  const std::vector<double> v(100, 1.0);
  CHECK(add_gaussian_noise(v, 0.1, 4) == add_gaussian_noise(v, 0.1, 4));
  CHECK(add_gaussian_noise(v, 0.1, 4) != add_gaussian_noise(v, 0.1, 5));
  CHECK(add_gaussian_noise(v, 0.0, 4) == v);
}

TEST_CASE("residual metrics") {
  const Spectrum base = flat_spectrum(1.0);
  const FrequencyWindow w{-5.0, 5.0};
  SUBCASE("quarter residual") {
    const ResidualMetrics m = residual_metrics(base, flat_spectrum(0.25), w);
    CHECK(m.rho1_res == doctest::Approx(0.25));
    CHECK(m.remaining_total_fraction == doctest::Approx(0.125));
    CHECK(population_ratio_from_residual(m.rho1_res) == doctest::Approx(7.0));
  }
  SUBCASE("8 percent remaining is 92 percent polarization") {
    const ResidualMetrics m = residual_metrics(base, flat_spectrum(0.16), w);
    CHECK(m.remaining_total_fraction == doctest::Approx(0.08));
    CHECK(m.spin_polarization == doctest::Approx(0.92));
  }
  SUBCASE("no pumping") {
    const ResidualMetrics m = residual_metrics(base, base, w);
    CHECK(m.rho1_res == 1.0);
    CHECK(m.spin_polarization == doctest::Approx(0.5));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(residual_metrics(base, flat_spectrum(0.5, -9.0, 10.0), w), Error);
    CHECK_THROWS_AS(residual_metrics(flat_spectrum(0.0), base, w), Error);
    CHECK_THROWS_AS(residual_metrics(base, base, FrequencyWindow{20.0, 30.0}), Error);
  }
}

TEST_CASE("xy csv") {
  std::istringstream in("x,y\n1,2\n3,4.5\n");
  const XYData d = read_xy_csv(in);
  CHECK(d.x == std::vector<double>{1, 3});
  CHECK(d.y == std::vector<double>{2, 4.5});
}

TEST_CASE("stimulation detuning scan recovers the response width") {
  const ScanResult r = run_scan(preset("fig4_stimulation_spectrum"));
  REQUIRE(r.fits.size() == 1);
  CHECK(r.fits[0].value("fwhm") == doctest::Approx(14000.0).epsilon(0.02));
}

TEST_CASE("persistent holes give the fitted offset") {
  const ExperimentConfig c = preset("fig5_stimulation_rate");
  const ScanResult r = run_scan(c);
  REQUIRE(r.fits.size() == 3);
  for (const auto& f : r.fits) CHECK(std::abs(f.value("offset") - 0.1) < 0.02);
  CHECK(r.followup->r_squared > 0.99);
}
