#pragma once

#include <stdexcept>

#include "qmimo/types.hpp"

namespace qmimo {

// Input prior for the estimators: complex Gaussian per entry (channel
// estimation) or a discrete constellation with point probabilities (data
// equalization).
struct Prior {
  enum class Kind { kGaussian, kDiscrete };

  Kind kind = Kind::kGaussian;
  RVec var;     // Gaussian: per-entry complex variance (size 1 broadcasts)
  CVec points;  // Discrete: constellation points
  RVec probs;   // Discrete: point probabilities, sum to 1

  static Prior gaussian(double v) {
    Prior p;
    p.kind = Kind::kGaussian;
    p.var = RVec::Constant(1, v);
    p.validate();
    return p;
  }

  static Prior gaussian(RVec v) {
    Prior p;
    p.kind = Kind::kGaussian;
    p.var = std::move(v);
    p.validate();
    return p;
  }

  static Prior discrete(CVec pts, RVec pr) {
    Prior p;
    p.kind = Kind::kDiscrete;
    p.points = std::move(pts);
    p.probs = std::move(pr);
    p.validate();
    return p;
  }

  static Prior discrete_uniform(const CVec& pts) {
    return discrete(pts, RVec::Constant(pts.size(), 1.0 / double(pts.size())));
  }

  double var_at(Eigen::Index i) const { return var.size() == 1 ? var[0] : var[i]; }

  double mean_power() const {
    if (kind == Kind::kGaussian) return var.mean();
    return (probs.array() * points.array().abs2()).sum();
  }

  void validate() const {
    if (kind == Kind::kGaussian) {
      if (var.size() == 0 || (var.array() < 0.0).any())
        throw std::invalid_argument("Prior: Gaussian variances must be nonnegative");
    } else {
      if (points.size() == 0 || points.size() != probs.size())
        throw std::invalid_argument("Prior: discrete points/probs mismatch");
      if ((probs.array() < 0.0).any() || std::abs(probs.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("Prior: discrete probabilities must sum to 1");
    }
  }
};

}  // namespace qmimo
