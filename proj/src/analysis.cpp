#include "shb/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "shb/csv.hpp"
#include "shb/error.hpp"

namespace shb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double data_scale(const Eigen::VectorXd& y) {
  const double s = y.cwiseAbs().maxCoeff();
  return s > 0.0 ? s : 1.0;
}

void check_xy(const XYData& d, std::size_t min_points, const char* what) {
  if (d.x.size() != d.y.size()) throw Error(std::string(what) + ": x and y differ in length");
  if (d.size() < min_points) {
    throw Error(std::string(what) + ": need at least " + std::to_string(min_points) + " points");
  }
}

// Gradient measure used for convergence: relative parameter changes against
// the squared data scale.
double scaled_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& scales, double ys) {
  return (grad.cwiseAbs().cwiseProduct(scales)).maxCoeff() / (ys * ys);
}

Eigen::VectorXd std_errors(const Eigen::MatrixXd& jacobian, double cost, Eigen::Index n) {
  const Eigen::Index p = jacobian.cols();
  Eigen::VectorXd se = Eigen::VectorXd::Constant(p, kNaN);
  if (n <= p) return se;
  const double s2 = 2.0 * cost / static_cast<double>(n - p);
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  if (cod.rank() < p) return se;
  const Eigen::MatrixXd cov = cod.pseudoInverse() * s2;
  for (Eigen::Index i = 0; i < p; ++i) se[i] = std::sqrt(std::max(cov(i, i), 0.0));
  return se;
}

// Least-squares coefficients of y against the columns of `basis`; returns the
// residual sum of squares.
double linear_solve(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y, Eigen::VectorXd& coef) {
  coef = basis.colPivHouseholderQr().solve(y);
  return (basis * coef - y).squaredNorm();
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  }
  return g;
}

double min_spacing(const std::vector<double>& x) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double d = x[i] - x[i - 1];
    if (!(d > 0.0)) throw Error("fit: x values must be strictly increasing");
    dt = std::min(dt, d);
  }
  return dt;
}

}  // namespace

double FitResult::value(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.value;
  }
  throw Error("fit result has no parameter '" + name + "'");
}

double FitResult::std_error(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.std_error;
  }
  throw Error("fit result has no parameter '" + name + "'");
}

LmOutcome levenberg_marquardt(const ModelFunction& model, const Eigen::VectorXd& data,
                              Eigen::VectorXd initial, const LmOptions& options) {
  const Eigen::Index n = data.size();
  const Eigen::Index p = initial.size();
  const double ys = data_scale(data);

  LmOutcome out;
  out.params = std::move(initial);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd jac(n, p);
  model(out.params, y, &jac);
  Eigen::VectorXd r = data - y;
  out.cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(out.cost)) throw NumericError("fit: model is not finite at the start point");

  auto param_scales = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd s(p);
    for (Eigen::Index i = 0; i < p; ++i) s[i] = std::max(std::abs(q[i]), 1.0);
    return s;
  };

  double lambda = 1e-3;
  int stagnant = 0;
  Eigen::VectorXd trial_y(n);
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    const Eigen::VectorXd grad = jac.transpose() * r;
    out.gradient_norm = scaled_gradient(grad, param_scales(out.params), ys);
    if (out.gradient_norm <= options.gradient_tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index i = 0; i < p; ++i) diag[i] = std::max(diag[i], 1e-12 * diag.maxCoeff() + 1e-300);

    bool accepted = false;
    while (lambda < 1e20) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const Eigen::VectorXd step = a.ldlt().solve(grad);
      const Eigen::VectorXd trial = out.params + step;
      model(trial, trial_y, nullptr);
      const double trial_cost = 0.5 * (data - trial_y).squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= out.cost) {
        const double drop = out.cost - trial_cost;
        stagnant = drop <= 1e-15 * out.cost ? stagnant + 1 : 0;
        out.params = trial;
        out.cost = trial_cost;
        model(out.params, y, &jac);
        r = data - y;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted || stagnant >= 3) {
      const Eigen::VectorXd g = jac.transpose() * r;
      out.gradient_norm = scaled_gradient(g, param_scales(out.params), ys);
      out.converged = out.gradient_norm <= options.gradient_tolerance;
      ++out.iterations;
      break;
    }
  }
  out.jacobian = jac;
  return out;
}

FitResult fit_double_exponential(const XYData& trace, const std::optional<std::vector<double>>& init_guess,
                                 const LmOptions& options) {
  check_xy(trace, 6, "fit_double_exponential");
  const double dt = min_spacing(trace.x);
  const Eigen::VectorXd t = to_vector(trace.x);
  const Eigen::VectorXd y = to_vector(trace.y);
  const Eigen::Index n = t.size();

  // Parameters: A1, log tau1, A2, log tau2, offset.
  Eigen::VectorXd q(5);
  if (init_guess) {
    const auto& g = *init_guess;
    if (g.size() != 5 || !(g[1] > 0.0) || !(g[3] > 0.0)) {
      throw Error("fit_double_exponential: init guess must be (A1, tau1>0, A2, tau2>0, offset)");
    }
    q << g[0], std::log(g[1]), g[2], std::log(g[3]), g[4];
  } else {
    // Variable projection over a log grid of time constants.
    const double span = trace.x.back() - trace.x.front();
    const auto taus = log_grid(0.5 * dt, 10.0 * span, 40);
    double best = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd basis(n, 3);
    basis.col(2).setOnes();
    Eigen::VectorXd coef;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      basis.col(0) = (-t.array() / taus[i]).exp();
      for (std::size_t j = i + 1; j < taus.size(); ++j) {
        basis.col(1) = (-t.array() / taus[j]).exp();
        const double rss = linear_solve(basis, y, coef);
        if (rss < best) {
          best = rss;
          q << coef[0], std::log(taus[i]), coef[1], std::log(taus[j]), coef[2];
        }
      }
    }
  }

  const ModelFunction model = [&t](const Eigen::VectorXd& p, Eigen::VectorXd& out, Eigen::MatrixXd* jac) {
    const Eigen::ArrayXd e1 = (-t.array() * std::exp(-p[1])).exp();
    const Eigen::ArrayXd e2 = (-t.array() * std::exp(-p[3])).exp();
    out = (p[0] * e1 + p[2] * e2 + p[4]).matrix();
    if (jac != nullptr) {
      jac->col(0) = e1.matrix();
      jac->col(1) = (p[0] * e1 * t.array() * std::exp(-p[1])).matrix();
      jac->col(2) = e2.matrix();
      jac->col(3) = (p[2] * e2 * t.array() * std::exp(-p[3])).matrix();
      jac->col(4).setOnes();
    }
  };
  LmOutcome lm = levenberg_marquardt(model, y, q, options);
  Eigen::VectorXd se = std_errors(lm.jacobian, lm.cost, n);

  double a1 = lm.params[0], a2 = lm.params[2];
  double tau1 = std::exp(lm.params[1]), tau2 = std::exp(lm.params[3]);
  double se_a1 = se[0], se_a2 = se[2];
  double se_t1 = tau1 * se[1], se_t2 = tau2 * se[3];
  if (tau1 > tau2) {
    std::swap(a1, a2);
    std::swap(tau1, tau2);
    std::swap(se_a1, se_a2);
    std::swap(se_t1, se_t2);
  }

  FitResult fit;
  fit.model = "doubleexp";
  fit.parameters = {{"A1", "a.u.", a1, se_a1},
                    {"tau1", "ms", tau1, se_t1},
                    {"A2", "a.u.", a2, se_a2},
                    {"tau2", "ms", tau2, se_t2},
                    {"offset", "a.u.", lm.params[4], se[4]}};
  fit.residual_norm = std::sqrt(2.0 * lm.cost);
  fit.gradient_norm = lm.gradient_norm;
  fit.converged = lm.converged;
  fit.iterations = lm.iterations;

  const double amp = std::abs(a1) + std::abs(a2);
  fit.degenerate = std::abs(a1) <= 1e-6 * amp || std::abs(a2) <= 1e-6 * amp ||
                   std::abs(std::log(tau2 / tau1)) < 1e-3 || !std::isfinite(se_t1) ||
                   !std::isfinite(se_t2);
  return fit;
}

FitResult fit_lorentzian(const XYData& points, const LmOptions& options) {
  check_xy(points, 5, "fit_lorentzian");
  const double df = min_spacing(points.x);
  const Eigen::VectorXd f = to_vector(points.x);
  const Eigen::VectorXd y = to_vector(points.y);
  const Eigen::Index n = f.size();

  // Offset from the outer tenth of the data on both sides.
  const Eigen::Index edge = std::max<Eigen::Index>(1, n / 10);
  std::vector<double> edges;
  for (Eigen::Index i = 0; i < edge; ++i) {
    edges.push_back(y[i]);
    edges.push_back(y[n - 1 - i]);
  }
  std::nth_element(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(edges.size() / 2), edges.end());
  const double c0 = edges[edges.size() / 2];
  Eigen::Index peak = 0;
  (y.array() - c0).abs().maxCoeff(&peak);
  const double a0 = y[peak] - c0;
  Eigen::Index lo = peak, hi = peak;
  while (lo > 0 && std::abs(y[lo - 1] - c0) >= 0.5 * std::abs(a0)) --lo;
  while (hi < n - 1 && std::abs(y[hi + 1] - c0) >= 0.5 * std::abs(a0)) ++hi;
  const double w0 = std::max(f[hi] - f[lo], 2.0 * df);

  Eigen::VectorXd q(4);
  q << f[peak], std::log(w0), a0, c0;
  const ModelFunction model = [&f](const Eigen::VectorXd& p, Eigen::VectorXd& out, Eigen::MatrixXd* jac) {
    const double w = std::exp(p[1]);
    const double hw2 = 0.25 * w * w;
    const Eigen::ArrayXd d = f.array() - p[0];
    const Eigen::ArrayXd den = d * d + hw2;
    const Eigen::ArrayXd shape = hw2 / den;
    out = (p[2] * shape + p[3]).matrix();
    if (jac != nullptr) {
      jac->col(0) = (p[2] * 2.0 * d * hw2 / (den * den)).matrix();
      // d(shape)/d(log w) = 2 hw2 d^2 / den^2
      jac->col(1) = (p[2] * 2.0 * hw2 * d * d / (den * den)).matrix();
      jac->col(2) = shape.matrix();
      jac->col(3).setOnes();
    }
  };
  // Center and width move on the frequency scale rather than as relative values.
  LmOutcome lm = levenberg_marquardt(model, y, q, options);
  const Eigen::VectorXd se = std_errors(lm.jacobian, lm.cost, n);
  const double w = std::exp(lm.params[1]);

  FitResult fit;
  fit.model = "lorentzian";
  fit.parameters = {{"center", "MHz", lm.params[0], se[0]},
                    {"fwhm", "MHz", w, w * se[1]},
                    {"amplitude", "a.u.", lm.params[2], se[2]},
                    {"offset", "a.u.", lm.params[3], se[3]}};
  fit.residual_norm = std::sqrt(2.0 * lm.cost);
  fit.gradient_norm = lm.gradient_norm;
  fit.converged = lm.converged;
  fit.iterations = lm.iterations;
  fit.degenerate = std::abs(lm.params[2]) <= 1e-9 * data_scale(y) || !std::isfinite(se[1]);
  return fit;
}

LinearFit fit_linear(const XYData& points) {
  check_xy(points, 2, "fit_linear");
  const Eigen::VectorXd x = to_vector(points.x);
  const Eigen::VectorXd y = to_vector(points.y);
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw Error("fit_linear: need at least two distinct x values");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_tot = (y.array() - my).square().sum();
  const double ss_res = (y.array() - (fit.slope * x.array() + fit.intercept)).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

FitResult to_fit_result(const LinearFit& fit) {
  FitResult out;
  out.model = "linear";
  out.parameters = {{"slope", "a.u.", fit.slope, kNaN},
                    {"intercept", "a.u.", fit.intercept, kNaN},
                    {"r_squared", "", fit.r_squared, kNaN}};
  out.converged = true;
  return out;
}

FitResult fit_exponential_offset(const XYData& trace, const LmOptions& options) {
  check_xy(trace, 4, "fit_exponential_offset");
  const double dt = min_spacing(trace.x);
  const Eigen::VectorXd t = to_vector(trace.x);
  const Eigen::VectorXd y = to_vector(trace.y);
  const Eigen::Index n = t.size();
  const double span = trace.x.back() - trace.x.front();
  const double ys = data_scale(y);

  // Parameters: amplitude, log rate, offset.
  Eigen::VectorXd q(3);
  {
    double best = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd basis(n, 2);
    basis.col(1).setOnes();
    Eigen::VectorXd coef;
    for (double rate : log_grid(0.01 / span, 10.0 / dt, 80)) {
      basis.col(0) = (-t.array() * rate).exp();
      const double rss = linear_solve(basis, y, coef);
      if (rss < best) {
        best = rss;
        q << coef[0], std::log(rate), coef[1];
      }
    }
  }
  const ModelFunction model = [&t](const Eigen::VectorXd& p, Eigen::VectorXd& out, Eigen::MatrixXd* jac) {
    const double rate = std::exp(p[1]);
    const Eigen::ArrayXd e = (-t.array() * rate).exp();
    out = (p[0] * e + p[2]).matrix();
    if (jac != nullptr) {
      jac->col(0) = e.matrix();
      jac->col(1) = (-p[0] * e * t.array() * rate).matrix();
      jac->col(2).setOnes();
    }
  };
  LmOutcome lm = levenberg_marquardt(model, y, q, options);
  const Eigen::VectorXd se = std_errors(lm.jacobian, lm.cost, n);
  const double rate = std::exp(lm.params[1]);

  FitResult fit;
  fit.model = "expoffset";
  fit.parameters = {{"amplitude", "a.u.", lm.params[0], se[0]},
                    {"rate", "1/ms", rate, rate * se[1]},
                    {"offset", "a.u.", lm.params[2], se[2]}};
  fit.residual_norm = std::sqrt(2.0 * lm.cost);
  fit.gradient_norm = lm.gradient_norm;
  fit.converged = lm.converged;
  fit.iterations = lm.iterations;
  const double visible = std::abs(lm.params[0]) * (1.0 - std::exp(-rate * span));
  fit.degenerate = visible <= 1e-6 * ys || rate * span < 1e-6 || !std::isfinite(se[1]);
  return fit;
}

ResidualMetrics residual_metrics(const Spectrum& baseline, const Spectrum& pumped,
                                 const FrequencyWindow& window) {
  if (baseline.size() != pumped.size()) throw Error("residual_metrics: spectra have different grids");
  double sum_base = 0.0;
  double sum_pumped = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (baseline.freqs_MHz[i] != pumped.freqs_MHz[i]) {
      throw Error("residual_metrics: spectra have different grids");
    }
    if (!window.contains(baseline.freqs_MHz[i])) continue;
    sum_base += baseline.optical_depth[i];
    sum_pumped += pumped.optical_depth[i];
    ++count;
  }
  if (count == 0) throw Error("residual_metrics: window contains no grid points");
  if (std::abs(sum_base) / static_cast<double>(count) < 1e-12) {
    throw Error("residual_metrics: baseline is transparent inside the window");
  }
  ResidualMetrics m;
  m.rho1_res = sum_pumped / sum_base;
  m.remaining_total_fraction = 0.5 * m.rho1_res;
  m.spin_polarization = 1.0 - m.remaining_total_fraction;
  return m;
}

double population_ratio_from_residual(double rho1_res) {
  if (!(rho1_res > 0.0)) throw Error("population ratio needs a positive residual");
  return (2.0 - rho1_res) / rho1_res;
}

std::vector<double> add_gaussian_noise(std::vector<double> values, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (auto& v : values) v += normal(rng);
  return values;
}

XYData read_xy_csv(std::istream& in) {
  XYData d;
  for (const auto& row : csv::read_numeric(in, 2)) {
    d.x.push_back(row[0]);
    d.y.push_back(row[1]);
  }
  return d;
}

}  // namespace shb
