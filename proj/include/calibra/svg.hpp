#pragma once

#include <string>
#include <vector>

#include "calibra/freq.hpp"
#include "calibra/sbc.hpp"

namespace calibra {

/// Mean posterior model probability per effect with 95% CI error bars and a
/// dashed prior line; one panel per analysis.
std::string render_calibration_svg(const std::vector<SummaryRow>& rows,
                                   double prior_p1, const std::string& title);

struct SweepBin {
  std::string analysis_id;
  std::string effect_id;
  double center = 0.0;
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int n = 0;
};

struct SweepFit {
  std::string analysis_id;
  std::string effect_id;
  double intercept = 0.0;
  double slope = 0.0;
};

/// Posterior model probability against the swept SD: binned means with CIs
/// plus the logistic fit curve; one panel per (analysis, effect).
std::string render_sweep_svg(const std::vector<SweepBin>& bins,
                             const std::vector<SweepFit>& fits,
                             double prior_p1, double sweep_from,
                             double sweep_to, const std::string& title);

/// Rejection-rate curves with binomial CIs; dashed line at the alpha level.
std::string render_curve_svg(const ErrorRateCurve& curve, double alpha_level,
                             const std::string& title);

}  // namespace calibra
