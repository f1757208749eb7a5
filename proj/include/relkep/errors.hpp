#pragma once

#include <stdexcept>
#include <string>

namespace relkep {

// Trajectory reached the collision floor r < r_floor.
struct CollisionError : std::runtime_error {
    double t;
    double r;
    CollisionError(double t_, double r_)
        : std::runtime_error("collision: r = " + std::to_string(r_) +
                             " below floor at t = " + std::to_string(t_)),
          t(t_), r(r_) {}
};

// Adaptive step size underflowed before reaching t_end.
struct StepUnderflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fewer section crossings than requested, or no transversal section at all.
struct SectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No momentum branch satisfies the energy constraint at the trial point.
struct EnergyBranchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solve (Newton, bisection, quadrature refinement) failed to converge.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace relkep
