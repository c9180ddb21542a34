#pragma once

#include <cstdint>
#include <random>

namespace calibra {

/// Seedable random stream. Streams are derived from a master seed plus a
/// small tuple of indices so that parallel workers never share state and
/// results do not depend on scheduling order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  RngStream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
            std::uint64_t c = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(master),
                      static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(a),
                      static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c),
                      static_cast<std::uint32_t>(c >> 32)};
    gen_.seed(seq);
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(gen_);
  }
  double gamma(double shape, double scale = 1.0) {
    return std::gamma_distribution<double>(shape, scale)(gen_);
  }
  double chisq(double df) { return gamma(df / 2.0, 2.0); }
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }
  double cauchy(double loc, double scale) {
    return std::cauchy_distribution<double>(loc, scale)(gen_);
  }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t bits() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace calibra
