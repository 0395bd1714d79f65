#pragma once

// Shared helpers for the test suite: seeded generators for points and
// multipliers, and tolerance checks used across modules.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "prpc/core.hpp"

namespace prpc_test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Uniform sample from a problem's space (box: per-dimension uniform;
/// finite: uniform element pick).
inline prpc::Assignment sample_point(const prpc::Problem& p, std::mt19937_64& gen) {
  if (p.space.kind == prpc::ParamSpace::Kind::finite) {
    std::uniform_int_distribution<std::size_t> pick(0, p.space.elements.size() - 1);
    return p.space.elements[pick(gen)];
  }
  std::vector<double> w(p.dim);
  for (std::size_t k = 0; k < p.dim; ++k) {
    const auto& iv = p.space.box[k];
    w[k] = iv.lo + (iv.hi - iv.lo) * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
  }
  return prpc::Assignment{w};
}

/// Interior sample: stays a fixed relative margin away from box faces.
inline prpc::Assignment sample_interior(const prpc::Problem& p, std::mt19937_64& gen,
                                        double margin = 0.05) {
  std::vector<double> w(p.dim);
  for (std::size_t k = 0; k < p.dim; ++k) {
    const auto& iv = p.space.box[k];
    const double span = iv.hi - iv.lo;
    w[k] = iv.lo + span * (margin + (1.0 - 2.0 * margin) *
                                        std::uniform_real_distribution<double>(0.0, 1.0)(gen));
  }
  return prpc::Assignment{w};
}

/// Log-uniform multiplier vector in [lo, hi]^m.
inline prpc::Multipliers random_lambda(std::size_t m, std::mt19937_64& gen, double lo = 1e-3,
                                       double hi = 1e3) {
  std::vector<double> lambda(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    lambda[j] = std::exp(std::lerp(std::log(lo), std::log(hi), u));
  }
  return prpc::Multipliers{lambda};
}

inline bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool close_rel(double a, double b, double rel) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * std::max(1.0, scale);
}

}  // namespace prpc_test
