#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

#include "relkep/errors.hpp"
#include "relkep/systems.hpp"

namespace relkep {

struct IntegratorConfig {
    double rel_tol = 1e-11;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double r_floor = kDefaultRFloor;

    void validate() const;  // tolerances must lie in (0, 1e-2]
};

namespace detail {

// Dormand-Prince 5(4) pair with the 4th-order continuous extension
// (coefficients from Hairer-Norsett-Wanner, DOPRI5).
template <std::size_t N>
struct DenseBlock {
    double t0 = 0.0;
    double h = 0.0;
    std::array<std::array<double, N>, 5> rcont{};

    std::array<double, N> eval(double t) const {
        const double s = (t - t0) / h, s1 = 1.0 - s;
        std::array<double, N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = rcont[0][i] +
                   s * (rcont[1][i] +
                        s1 * (rcont[2][i] + s * (rcont[3][i] + s1 * rcont[4][i])));
        return y;
    }
};

template <std::size_t N>
struct OdeSolution {
    std::vector<double> times;                       // node times, strictly increasing
    std::vector<std::array<double, N>> states;       // matching node states
    std::vector<DenseBlock<N>> blocks;               // one per accepted step

    std::size_t block_index(double t) const;
    std::array<double, N> at(double t) const;
};

// rhs signature: void(double t, const std::array<double,N>& y, std::array<double,N>& dydt)
template <std::size_t N, typename RHS>
OdeSolution<N> dopri5(RHS&& rhs, const std::array<double, N>& y0, double t0,
                      double t1, const IntegratorConfig& cfg);

}  // namespace detail

// Integrated phase curve of one of the two systems, with dense output and
// the unwrapped polar angle theta(t) carried along.
class Trajectory {
  public:
    double t_begin() const { return sol_.times.front(); }
    double t_end() const { return sol_.times.back(); }
    std::size_t n_nodes() const { return sol_.times.size(); }
    const std::vector<double>& times() const { return sol_.times; }

    CartesianState node_state(std::size_t i) const;
    double node_theta(std::size_t i) const { return theta_[i]; }

    CartesianState state_at(double t) const;
    double theta_at(double t) const;       // unwrapped, continuous in t
    double radial_momentum_at(double t) const;  // p_r = <x, p>/|x|

  private:
    friend Trajectory integrate(const SystemSpec&, const CartesianState&, double,
                                double, const PerturbationSpec&, const IntegratorConfig&);
    detail::OdeSolution<4> sol_;
    std::vector<double> theta_;  // unwrapped angle at nodes
};

// Integrate the (possibly perturbed) system over [0, t_end], t_end > 0.
Trajectory integrate(const SystemSpec& sys, const CartesianState& s0, double t_end,
                     double eps = 0.0, const PerturbationSpec& U = {},
                     const IntegratorConfig& cfg = {});

struct SectionCrossing {
    double t;
    CartesianState state;
};

// Pericenter passages: times where p_r crosses zero from below. Throws
// SectionError when the section is degenerate (p_r ~ 0 throughout, circular
// orbit) or fewer than `count` crossings exist.
std::vector<SectionCrossing> section_crossings(const Trajectory& traj, int count);

// Root of p_r on the dense interpolant inside [t_lo, t_hi]; requires a sign
// change over the bracket. Converges to a few ulps in t.
double refine_pericenter_time(const Trajectory& traj, double t_lo, double t_hi);

struct WindingResult {
    double raw;  // (theta(t1) - theta(t0)) / 2pi before rounding
    long k;
};

// Throws ConvergenceError when assert_periodic is set and the pre-rounding
// value is farther than 0.05 from an integer.
WindingResult winding_number(const Trajectory& traj, double t0, double t1,
                             bool assert_periodic = false);

// CSV export, header: t,x1,x2,p1,p2,r,theta_unwrapped,H,L
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const SystemSpec& sys, double eps = 0.0,
                          const PerturbationSpec& U = {});

}  // namespace relkep
