#pragma once

// Keyed, counter-based random streams. Every stream is derived from a master
// seed plus a small tuple of integer key words, so any unit of work (a
// replication, a tie-break draw for pair (j,k), ...) can regenerate its own
// randomness independently of execution order or worker count.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace confsel::rng {

// ===== key mixing =====

// SplitMix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Fold a tuple of key words into one stream seed. Order-sensitive.
inline std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

// Map a 64-bit word to a double in [0, 1) using the top 53 bits.
inline double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// ===== sequential stream =====

// Deterministic sequential generator over a derived seed (SplitMix64 walk).
class Stream {
 public:
  explicit Stream(std::uint64_t derived_seed) : state_(derived_seed) {}

  Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> words)
      : state_(derive(seed, words)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double unit() { return to_unit(next_u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per draw.
  double normal() {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Laplace(0, scale) via inverse CDF.
  double laplace(double scale) {
    if (scale <= 0.0) throw std::invalid_argument("laplace scale must be positive");
    const double e = unit() - 0.5;
    const double a = 1.0 - 2.0 * std::abs(e);
    const double safe = a > 0.0 ? a : std::numeric_limits<double>::min();
    return (e < 0.0 ? scale : -scale) * std::log(safe);
  }

  Eigen::VectorXd normal_vector(int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = normal();
    return v;
  }

  // Zero-mean Gaussian vector with equicorrelated covariance
  // sigma^2 * ((1-rho) I + rho 11'). Uses the closed-form matrix square root,
  // valid for rho in (-1/(d-1), 1).
  Eigen::VectorXd equicorrelated_normal(int d, double sigma, double rho) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    if (d > 1 && (rho <= -1.0 / (d - 1) || rho >= 1.0))
      throw std::invalid_argument("rho outside the positive-definite range");
    Eigen::VectorXd z = normal_vector(d);
    if (d == 1) return sigma * z;
    const double zbar = z.mean();
    const double a = std::sqrt(1.0 - rho);
    const double b = std::sqrt(1.0 + (d - 1) * rho);
    return sigma * (a * (z.array() - zbar) + b * zbar).matrix();
  }

 private:
  std::uint64_t state_;
};

// ===== stream purposes =====

// Tags separating the independent per-replication streams.
enum class Purpose : std::uint64_t {
  features = 1,
  coefficients = 2,
  noise = 3,
  split = 4,
  regions = 5,
};

inline Stream make_stream(std::uint64_t seed, std::uint64_t replication, Purpose purpose) {
  return Stream(seed, {replication, static_cast<std::uint64_t>(purpose)});
}

}  // namespace confsel::rng
