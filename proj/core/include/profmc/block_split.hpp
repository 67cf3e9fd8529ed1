#pragma once

#include <Eigen/Core>

#include "profmc/errors.hpp"

namespace profmc {

/*
 * Dimension bookkeeping for the joint parameter upsilon = (theta, eta):
 * theta is the leading p_target block (the estimation target), eta the
 * trailing p_nuisance block that is profiled out.
 */
struct BlockSplit {
  int p_total = 0;
  int p_target = 0;
  int p_nuisance = 0;

  static BlockSplit make(int p_total, int p_target) {
    if (p_total < 1) throw ConfigInvalid("BlockSplit: p_total must be >= 1");
    if (p_target < 1 || p_target > p_total)
      throw ConfigInvalid("BlockSplit: p_target must lie in [1, p_total]");
    return BlockSplit{p_total, p_target, p_total - p_target};
  }
};

// A point in the joint parameter space. Views are cheap Eigen segments; the
// split travels separately so the vector stays a plain dense payload.
struct JointParameter {
  Eigen::VectorXd values;

  auto theta(const BlockSplit& s) const { return values.head(s.p_target); }
  auto eta(const BlockSplit& s) const { return values.tail(s.p_nuisance); }
};

}  // namespace profmc
