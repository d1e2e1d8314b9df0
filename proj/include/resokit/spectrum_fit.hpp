#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "resokit/resonator_model.hpp"

namespace resokit::fit {

enum class FitFlag {
  kLowSnr,          // residual rms above 10% of the resonance-circle diameter
  kDelayUncertain,  // edge windows still contain resonance features
  kShallowDip,      // dip less than 3 dB below the median level
  kNotConverged,    // final refinement hit its iteration limit
};

std::string_view to_string(FitFlag flag);
std::optional<FitFlag> flag_from_string(std::string_view name);

/// One-sigma uncertainties, same units as the parameters they describe.
struct NotchUncertainty {
  double f_r = 0.0;
  double q_loaded = 0.0;
  double q_coupling_mag = 0.0;
  double phi = 0.0;
  double amp = 0.0;
  double phase_offset = 0.0;
  double delay = 0.0;
  double q_internal = 0.0;

  bool operator==(const NotchUncertainty&) const = default;
};

struct FitReport {
  resonator::NotchParams params;
  double q_internal = 0.0;
  NotchUncertainty uncertainties;
  double rms_residual = 0.0;
  int n_points = 0;
  std::vector<FitFlag> flags;  // sorted, unique

  bool has(FitFlag flag) const;
  bool operator==(const FitReport&) const = default;
};

struct DelayEstimate {
  double delay = 0.0;  // s
  bool uncertain = false;
};

/// Cable delay from the phase slope of the outer 20% of the grid on each side,
/// refined by minimising the circle-fit residual of the delay-corrected data.
DelayEstimate estimate_delay(const resonator::S21Trace& trace);

/// Full notch extraction: delay removal, circle fit, phase fit, environment recovery,
/// seven-parameter refinement on the raw complex data, then Q_i.
/// Throws NoResonanceError when no dip stands out of the noise, UnphysicalError when the
/// fitted quality factors imply negative internal loss.
FitReport fit_notch(const resonator::S21Trace& trace);

/// Q_i = 1 / (1/Q_l - cos(phi)/|Q_c|). Throws UnphysicalError when the denominator is <= 0.
double extract_qi(double q_loaded, double q_coupling_mag, double phi);

/// Cumulative nearest-branch phase unwrap. An exact +-pi step stays on the previous
/// sample's branch.
std::vector<double> unwrap_phase(std::span<const double> wrapped);

}  // namespace resokit::fit
