#ifndef TRAJSEL_TESTS_BBOB_REFERENCE_HPP
#define TRAJSEL_TESTS_BBOB_REFERENCE_HPP

#include <Eigen/Core>

#include "trajsel/bench_suite.hpp"

namespace trajsel_test {

// Straight-from-definition re-implementation of the 24 TRAIN functions,
// written independently of the suite code (scalar loops, own transform
// helpers). Shares only the instance parameters (shift, rotations, offsets)
// exposed by the problem, which are data, not formulas.
double reference_value(const trajsel::ProblemInstance& p,
                       const Eigen::VectorXd& x);

}  // namespace trajsel_test

#endif
