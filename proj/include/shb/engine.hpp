#pragma once

// Population dynamics of a single frequency class.
//
// State basis is (g1, g2, e1, e2). The short-lived Z2 level is eliminated:
// stimulated decay e_i -> Z2 is rerouted straight to the ground doublet.
// Persistent bleaching is not part of the generator; see
// apply_persistent_bleaching().

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "shb/error.hpp"
#include "shb/levels.hpp"

namespace shb {

enum Level : int { kG1 = 0, kG2 = 1, kE1 = 2, kE2 = 3 };

template <typename Scalar>
using Vector4T = Eigen::Matrix<Scalar, 4, 1>;

template <typename Scalar>
using RateMatrixT = Eigen::Matrix<Scalar, 4, 4>;

template <typename Scalar>
struct IonClassStateT {
  Vector4T<Scalar> levels = Vector4T<Scalar>::Zero();
  Scalar persistent_bleached = Scalar(0);

  static IonClassStateT thermal() {
    IonClassStateT s;
    s.levels << Scalar(0.5), Scalar(0.5), Scalar(0), Scalar(0);
    return s;
  }

  Scalar g1() const { return levels[kG1]; }
  Scalar g2() const { return levels[kG2]; }
  Scalar e1() const { return levels[kE1]; }
  Scalar e2() const { return levels[kE2]; }
  Scalar ground() const { return levels[kG1] + levels[kG2]; }
  Scalar excited() const { return levels[kE1] + levels[kE2]; }
  Scalar total() const { return levels.sum() + persistent_bleached; }
};

template <typename Scalar>
struct DriveRatesT {
  std::array<Scalar, 4> pump_rate{};  // indexed by Transition
  Scalar stim_rate_e1 = Scalar(0);
  Scalar stim_rate_e2 = Scalar(0);
  Scalar rf_mix_rate = Scalar(0);

  bool valid() const {
    return std::all_of(pump_rate.begin(), pump_rate.end(),
                       [](Scalar r) { return r >= Scalar(0); }) &&
           stim_rate_e1 >= Scalar(0) && stim_rate_e2 >= Scalar(0) &&
           rf_mix_rate >= Scalar(0);
  }
};

/// Column j holds the rates out of level j; M(i, j) is the j -> i rate.
template <typename Scalar>
RateMatrixT<Scalar> build_rate_matrix(const RateParamsT<Scalar>& params,
                                      const DriveRatesT<Scalar>& drive) {
  RateMatrixT<Scalar> m = RateMatrixT<Scalar>::Zero();
  const Scalar flip = Scalar(1) / (Scalar(2) * params.tz_ms);
  m(kG2, kG1) += flip;
  m(kG1, kG2) += flip;

  const Scalar a = Scalar(1) / params.t1_ms;
  const Scalar same = params.beta * a;
  const Scalar other = (Scalar(1) - params.beta) * a;
  m(kG1, kE1) += same;
  m(kG2, kE1) += other;
  m(kG2, kE2) += same;
  m(kG1, kE2) += other;

  for (Transition t : kAllTransitions) {
    const Scalar r = drive.pump_rate[static_cast<std::size_t>(t)];
    const int g = ground_of(t);
    const int e = kE1 + excited_of(t);
    m(e, g) += r;
    m(g, e) += r;
  }

  const Scalar bz = params.beta_z2;
  m(kG1, kE1) += bz * drive.stim_rate_e1;
  m(kG2, kE1) += (Scalar(1) - bz) * drive.stim_rate_e1;
  m(kG2, kE2) += bz * drive.stim_rate_e2;
  m(kG1, kE2) += (Scalar(1) - bz) * drive.stim_rate_e2;

  m(kE2, kE1) += drive.rf_mix_rate;
  m(kE1, kE2) += drive.rf_mix_rate;

  for (int j = 0; j < 4; ++j) {
    m(j, j) = Scalar(0);
    m(j, j) = -m.col(j).sum();
  }
  return m;
}

namespace detail {

template <typename Derived>
Eigen::Index count_non_finite(const Eigen::MatrixBase<Derived>& x) {
  Eigen::Index n = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (!std::isfinite(static_cast<double>(x(i, j)))) ++n;
    }
  }
  return n;
}

template <typename Scalar>
void clamp_roundoff(RateMatrixT<Scalar>& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u.data()[i] < Scalar(0)) u.data()[i] = Scalar(0);
  }
}

}  // namespace detail

/// exp(m * dt). Diagonalizes when the eigenbasis is well conditioned, and
/// falls back to Pade scaling-and-squaring otherwise.
template <typename Scalar>
RateMatrixT<Scalar> propagator(const RateMatrixT<Scalar>& m, Scalar dt) {
  if (detail::count_non_finite(m) != 0 || !std::isfinite(double(dt))) {
    throw NumericError("rate matrix has non-finite entries");
  }
  if (dt == Scalar(0)) return RateMatrixT<Scalar>::Identity();

  using Complex = std::complex<Scalar>;
  using ComplexMatrix = Eigen::Matrix<Complex, 4, 4>;

  RateMatrixT<Scalar> u;
  bool diagonalized = false;
  Eigen::EigenSolver<RateMatrixT<Scalar>> solver(m, true);
  if (solver.info() == Eigen::Success) {
    const ComplexMatrix v = solver.eigenvectors();
    Eigen::PartialPivLU<ComplexMatrix> lu(v);
    const ComplexMatrix v_inv = lu.inverse();
    const Scalar cond = v.cwiseAbs().colwise().sum().maxCoeff() *
                        v_inv.cwiseAbs().colwise().sum().maxCoeff();
    if (std::isfinite(double(cond)) && cond < Scalar(1e6)) {
      Eigen::Matrix<Complex, 4, 1> expo;
      for (int i = 0; i < 4; ++i) expo[i] = std::exp(solver.eigenvalues()[i] * dt);
      u = (v * expo.asDiagonal() * v_inv).real();
      diagonalized = true;
    }
  }
  if (!diagonalized) {
    const RateMatrixT<Scalar> scaled = m * dt;
    u = scaled.exp();
  }
  if (detail::count_non_finite(u) != 0) {
    throw NumericError("propagator overflowed");
  }
  detail::clamp_roundoff(u);
  return u;
}

/// u^n by repeated squaring.
template <typename Scalar>
RateMatrixT<Scalar> matrix_power(RateMatrixT<Scalar> u, std::uint64_t n) {
  RateMatrixT<Scalar> result = RateMatrixT<Scalar>::Identity();
  while (n > 0) {
    if (n & 1U) result = u * result;
    n >>= 1U;
    if (n > 0) u = u * u;
  }
  return result;
}

template <typename Scalar>
IonClassStateT<Scalar> apply(const RateMatrixT<Scalar>& u,
                             const IonClassStateT<Scalar>& state) {
  IonClassStateT<Scalar> out = state;
  out.levels.noalias() = u * state.levels;
  for (int i = 0; i < 4; ++i) {
    if (out.levels[i] < Scalar(0)) out.levels[i] = Scalar(0);
  }
  return out;
}

template <typename Scalar>
IonClassStateT<Scalar> evolve(const IonClassStateT<Scalar>& state,
                              const RateMatrixT<Scalar>& m, Scalar dt) {
  if (dt < Scalar(0)) throw Error("evolve: negative time step");
  return apply(propagator(m, dt), state);
}

/// Normalized null vector of a conservative generator.
template <typename Scalar>
IonClassStateT<Scalar> steady_state(const RateMatrixT<Scalar>& m) {
  if (detail::count_non_finite(m) != 0) {
    throw NumericError("rate matrix has non-finite entries");
  }
  Eigen::JacobiSVD<RateMatrixT<Scalar>> svd(m);
  const auto& sv = svd.singularValues();
  const Scalar scale = std::max(sv[0], Scalar(1e-300));
  if (sv[2] <= Scalar(1e-12) * scale) {
    throw NonUniqueSteadyStateError(
        "generator has a degenerate null space (disconnected levels)");
  }
  Eigen::Matrix<Scalar, 5, 4> a;
  a.template topRows<4>() = m / scale;
  a.row(4).setOnes();
  Eigen::Matrix<Scalar, 5, 1> b = Eigen::Matrix<Scalar, 5, 1>::Zero();
  b[4] = Scalar(1);
  IonClassStateT<Scalar> s;
  s.levels = a.colPivHouseholderQr().solve(b);
  for (int i = 0; i < 4; ++i) s.levels[i] = std::max(s.levels[i], Scalar(0));
  s.levels /= s.levels.sum();
  return s;
}

/// Moves a non-recovering share of the optically removed population out of
/// the ground doublet. The added bleaching makes up `fraction` of the class's
/// total absorption deficit (summed over the four transitions) at the moment
/// of the call.
template <typename Scalar>
IonClassStateT<Scalar> apply_persistent_bleaching(IonClassStateT<Scalar> state,
                                                  Scalar fraction) {
  if (fraction <= Scalar(0)) return state;
  const Scalar ground = state.ground();
  if (ground <= Scalar(0)) return state;
  // Deficit of an excited ion is 4 units, of a bleached ion 2 units.
  const Scalar amount =
      std::min(ground, Scalar(2) * fraction * state.excited() / (Scalar(1) - fraction));
  state.levels[kG1] -= amount * state.levels[kG1] / ground;
  state.levels[kG2] -= amount * state.levels[kG2] / ground;
  state.persistent_bleached += amount;
  return state;
}

template <typename Scalar>
Scalar ratio_standard(Scalar t1_ms, Scalar tz_ms) {
  return Scalar(1) + Scalar(2) * tz_ms / t1_ms;
}

template <typename Scalar>
Scalar ratio_effective(Scalar t1_ms, Scalar tz_ms, Scalar beta) {
  if (!(beta < Scalar(1))) {
    throw NoDecayChannelError("ratio_effective requires beta < 1");
  }
  return Scalar(1) + Scalar(2) * tz_ms * (Scalar(1) - beta) / t1_ms;
}

template <typename Scalar>
Scalar ratio_stimulated(Scalar beta, Scalar gamma_per_ms, Scalar tz_ms) {
  return Scalar(1) + Scalar(2) * (Scalar(1) - beta) * gamma_per_ms * tz_ms;
}

/// Unit-peak Lorentzian of full width `fwhm`.
template <typename Scalar>
Scalar lorentzian(Scalar detuning, Scalar fwhm) {
  const Scalar hw = fwhm / Scalar(2);
  return hw * hw / (detuning * detuning + hw * hw);
}

enum class Lineshape { kLorentzian, kGaussian };

/// Unit-peak Gaussian with full width at half maximum `fwhm`.
template <typename Scalar>
Scalar gaussian(Scalar detuning, Scalar fwhm) {
  using std::exp;
  using std::log;
  const Scalar x = detuning / fwhm;
  return exp(-Scalar(4) * log(Scalar(2)) * x * x);
}

template <typename Scalar>
Scalar pump_rate_profile(Scalar peak_rate, Scalar laser_linewidth_MHz,
                         Scalar detuning_MHz, Lineshape shape = Lineshape::kLorentzian) {
  if (!(laser_linewidth_MHz > Scalar(0))) {
    throw Error("pump_rate_profile: linewidth must be positive");
  }
  if (shape == Lineshape::kGaussian) {
    return peak_rate * gaussian(detuning_MHz, laser_linewidth_MHz);
  }
  return peak_rate * lorentzian(detuning_MHz, laser_linewidth_MHz);
}

template <typename Scalar>
Scalar stimulation_rate(Scalar power_mW, Scalar slope_per_mW_ms) {
  return slope_per_mW_ms * power_mW;
}

template <typename Scalar>
Scalar rf_mix_rate(Scalar voltage_Vpp, Scalar coupling_per_V2_ms) {
  return coupling_per_V2_ms * voltage_Vpp * voltage_Vpp;
}

using Vector4 = Vector4T<double>;
using RateMatrix = RateMatrixT<double>;
using IonClassState = IonClassStateT<double>;
using DriveRates = DriveRatesT<double>;

}  // namespace shb
