#include "calibra/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "calibra/stats.hpp"

namespace calibra {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double scan_max(const std::function<double(double)>& log_f, double lo,
                double hi, int points, double* arg = nullptr) {
  double best = kNegInf;
  double best_t = 0.0;
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double t = lo + i * step;
    const double v = log_f(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  if (arg) *arg = best_t;
  return best;
}

}  // namespace

double log_integrate(const std::function<double(double)>& log_f,
                     double scan_lo, double scan_hi, int scan_points,
                     double rel_tol) {
  double peak_t = 0.0;
  const double shift = scan_max(log_f, scan_lo, scan_hi, scan_points, &peak_t);
  if (shift == kNegInf) return kNegInf;
  auto f = [&](double t) {
    const double v = log_f(t);
    if (!std::isfinite(v)) return 0.0;  // boundary evaluations under the map
    return std::exp(v - shift);
  };
  // Split at the peak: GK handles one-sided infinite ranges more reliably
  // than a doubly infinite one when the mass is far from zero.
  const double left =
      GK::integrate(f, -std::numeric_limits<double>::infinity(), peak_t, 15,
                    rel_tol);
  const double right =
      GK::integrate(f, peak_t, std::numeric_limits<double>::infinity(), 15,
                    rel_tol);
  return shift + std::log(left + right);
}

double log_integrate_2d(const std::function<double(double, double)>& log_f,
                        double scan_lo, double scan_hi, int scan_points,
                        double rel_tol) {
  // Coarse 2-D scan for a global shift.
  double shift = kNegInf;
  double peak_s = 0.0;
  const double step = (scan_hi - scan_lo) / (scan_points - 1);
  for (int i = 0; i < scan_points; ++i) {
    for (int j = 0; j < scan_points; ++j) {
      const double s = scan_lo + i * step;
      const double t = scan_lo + j * step;
      const double v = log_f(s, t);
      if (v > shift) {
        shift = v;
        peak_s = s;
      }
    }
  }
  if (shift == kNegInf) return kNegInf;
  const double inf = std::numeric_limits<double>::infinity();
  auto outer = [&](double s) {
    auto inner = [&](double t) {
      const double v = log_f(s, t);
      if (!std::isfinite(v)) return 0.0;
      return std::exp(v - shift);
    };
    return GK::integrate(inner, -inf, inf, 10, rel_tol);
  };
  const double left = GK::integrate(outer, -inf, peak_s, 10, rel_tol);
  const double right = GK::integrate(outer, peak_s, inf, 10, rel_tol);
  return shift + std::log(left + right);
}

}  // namespace calibra
