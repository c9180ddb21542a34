#pragma once

#include <cmath>
#include <functional>

namespace calibra {

/// log of the integral of exp(log_f(t)) over the whole real line.
///
/// The integrand is first scanned on a coarse grid to locate its peak; the
/// Gauss-Kronrod pass then works on exp(log_f(t) - shift) so that extreme
/// magnitudes never leave the representable range. Intended for smooth,
/// unimodal-ish integrands such as marginal likelihoods over a log-variance.
double log_integrate(const std::function<double(double)>& log_f,
                     double scan_lo = -60.0, double scan_hi = 60.0,
                     int scan_points = 241, double rel_tol = 1e-9);

/// Nested 2-D version: log of the double integral of exp(log_f(s, t)).
double log_integrate_2d(const std::function<double(double, double)>& log_f,
                        double scan_lo = -40.0, double scan_hi = 40.0,
                        int scan_points = 81, double rel_tol = 1e-7);

}  // namespace calibra
