#pragma once

// Zeeman structure and rate parameters of a Kramers-doublet ion with two
// ground (g1, g2) and two excited (e1, e2) sublevels.
//
// All frequencies are linear frequencies in MHz, times in ms, fields in mT.

#include <array>

#include "shb/error.hpp"

namespace shb {

/// Bohr magneton over Planck's constant, MHz/mT.
inline constexpr double kBohrMHzPerMilliTesla = 13.996;

template <typename Scalar>
struct ZeemanConfigT {
  Scalar field_mT = Scalar(0);
  Scalar theta_deg = Scalar(0);  // metadata only
  Scalar g_ground = Scalar(12);
  Scalar g_excited = Scalar(8);
  Scalar bohr_MHz_per_mT = Scalar(kBohrMHzPerMilliTesla);

  bool valid() const {
    return field_mT >= Scalar(0) && g_ground > Scalar(0) &&
           g_excited > Scalar(0) && bohr_MHz_per_mT > Scalar(0);
  }

  bool operator==(const ZeemanConfigT&) const = default;
};

template <typename Scalar>
struct RateParamsT {
  Scalar t1_ms = Scalar(11);
  Scalar tz_ms = Scalar(130);
  Scalar beta = Scalar(0.9);
  Scalar beta_z2 = Scalar(0.9);
  Scalar sigma_scale = Scalar(1);
  Scalar persistent_fraction = Scalar(0);

  bool valid() const {
    return t1_ms > Scalar(0) && tz_ms > Scalar(0) && beta >= Scalar(0) &&
           beta <= Scalar(1) && beta_z2 >= Scalar(0) && beta_z2 <= Scalar(1) &&
           persistent_fraction >= Scalar(0) && persistent_fraction < Scalar(1);
  }

  bool operator==(const RateParamsT&) const = default;
};

/// Optical transition labels: 1: g1->e1, 2: g1->e2, 3: g2->e1, 4: g2->e2.
enum class Transition { kG1E1 = 0, kG1E2 = 1, kG2E1 = 2, kG2E2 = 3 };

inline constexpr std::array<Transition, 4> kAllTransitions = {
    Transition::kG1E1, Transition::kG1E2, Transition::kG2E1, Transition::kG2E2};

/// Ground index (0 = g1, 1 = g2) and excited index (0 = e1, 1 = e2).
constexpr int ground_of(Transition t) { return static_cast<int>(t) / 2; }
constexpr int excited_of(Transition t) { return static_cast<int>(t) % 2; }

template <typename Scalar>
struct TransitionSetT {
  std::array<Scalar, 4> freq_MHz{};

  Scalar operator[](Transition t) const {
    return freq_MHz[static_cast<std::size_t>(t)];
  }
};

template <typename Scalar>
Scalar zeeman_splitting(Scalar g, const ZeemanConfigT<Scalar>& config) {
  return config.bohr_MHz_per_mT * g * config.field_mT;
}

template <typename Scalar>
Scalar ground_splitting(const ZeemanConfigT<Scalar>& config) {
  return zeeman_splitting(config.g_ground, config);
}

template <typename Scalar>
Scalar excited_splitting(const ZeemanConfigT<Scalar>& config) {
  return zeeman_splitting(config.g_excited, config);
}

/// The four transition frequencies of the class whose g1->e1 line sits at
/// `class_center`.
template <typename Scalar>
TransitionSetT<Scalar> transition_set(Scalar class_center,
                                      const ZeemanConfigT<Scalar>& config) {
  const Scalar dg = ground_splitting(config);
  const Scalar de = excited_splitting(config);
  TransitionSetT<Scalar> set;
  set.freq_MHz = {class_center, class_center + de, class_center - dg,
                  class_center - (dg - de)};
  return set;
}

/// T1 / (1 - beta): mean time between spin-changing decays.
template <typename Scalar>
Scalar effective_lifetime(const RateParamsT<Scalar>& params) {
  if (!(params.beta < Scalar(1))) {
    throw NoDecayChannelError(
        "effective lifetime diverges: beta = 1 leaves no spin-changing decay");
  }
  return params.t1_ms / (Scalar(1) - params.beta);
}

using ZeemanConfig = ZeemanConfigT<double>;
using RateParams = RateParamsT<double>;
using TransitionSet = TransitionSetT<double>;

}  // namespace shb
