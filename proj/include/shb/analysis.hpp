#pragma once

// Curve fits and derived metrics for hole-burning data.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shb/ensemble.hpp"

namespace shb {

struct FitParameter {
  std::string name;
  std::string unit;
  double value = 0.0;
  double std_error = 0.0;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> parameters;
  double residual_norm = 0.0;
  // Max over parameters of |dcost/dp_i| * |p_i|, relative to the data scale.
  double gradient_norm = 0.0;
  bool converged = false;
  // Some parameter is not identifiable from the data.
  bool degenerate = false;
  int iterations = 0;

  double value(const std::string& name) const;
  double std_error(const std::string& name) const;
};

struct LmOptions {
  double gradient_tolerance = 1e-10;
  int max_iterations = 500;
};

/// Model callback: fills y(p) and, when `jacobian` is non-null, dy/dp.
using ModelFunction =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& y, Eigen::MatrixXd* jacobian)>;

struct LmOutcome {
  Eigen::VectorXd params;
  Eigen::MatrixXd jacobian;  // at the solution
  double cost = 0.0;         // 0.5 * |r|^2
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton with Marquardt diagonal scaling. Accepted steps never
/// increase the cost.
LmOutcome levenberg_marquardt(const ModelFunction& model, const Eigen::VectorXd& data,
                              Eigen::VectorXd initial, const LmOptions& options = {});

struct XYData {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
};

/// y = A1 exp(-t/tau1) + A2 exp(-t/tau2) + offset, reported with tau1 <= tau2.
FitResult fit_double_exponential(const XYData& trace,
                                 const std::optional<std::vector<double>>& init_guess = std::nullopt,
                                 const LmOptions& options = {});

/// y = amplitude * L(f - center; fwhm) + offset with a unit-peak Lorentzian.
FitResult fit_lorentzian(const XYData& points, const LmOptions& options = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit fit_linear(const XYData& points);
FitResult to_fit_result(const LinearFit& fit);

/// y = amplitude * exp(-rate * tau) + offset.
FitResult fit_exponential_offset(const XYData& trace, const LmOptions& options = {});

struct ResidualMetrics {
  double rho1_res = 0.0;
  double remaining_total_fraction = 0.0;
  double spin_polarization = 0.0;
};

ResidualMetrics residual_metrics(const Spectrum& baseline, const Spectrum& pumped,
                                 const FrequencyWindow& window);

/// rho2 / rho1 assuming all depleted ions sit in the other Zeeman level.
double population_ratio_from_residual(double rho1_res);

/// Seeded additive Gaussian noise with a fixed standard deviation.
std::vector<double> add_gaussian_noise(std::vector<double> values, double sigma,
                                       std::uint64_t seed);

XYData read_xy_csv(std::istream& in);

}  // namespace shb
