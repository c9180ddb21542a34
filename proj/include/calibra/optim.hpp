#pragma once

#include <Eigen/Dense>
#include <functional>

namespace calibra {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fmin = 0.0;
  int n_eval = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  double initial_step = 0.5;
  double f_tol = 1e-9;
  int max_eval = 4000;
};

/// Derivative-free simplex minimizer (Nelder-Mead with standard
/// reflection/expansion/contraction coefficients).
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace calibra
