#pragma once

#include <vector>

#include "relkep/flow.hpp"
#include "relkep/radial.hpp"
#include "relkep/systems.hpp"

namespace relkep {

// Resonant unperturbed torus: Theta(H, L) = 2 pi k, all of whose orbits are
// closed with winding number k over one radial period.
struct TorusSeed {
    EnergyMomentum em;
    int k = 0;
    double T = 0.0;      // minimal period
    double Theta = 0.0;  // apsidal angle, = 2 pi k
};

// Periodic solution anchored at an upward p_r = 0 crossing (pericenter).
struct PeriodicOrbit {
    CartesianState s0;
    double tau = 0.0;
    int k = 0;
    double eps = 0.0;
    double energy_residual = 0.0;   // |H_eps(s0) - H*|
    double closure_residual = 0.0;  // shooting residual norm at the solution
};

struct OrbitVerification {
    double closure_residual = 0.0;  // |state(tau) - s0|
    double max_energy_dev = 0.0;    // max_t |H_eps(t) - H*|
    double winding_raw = 0.0;
    long winding = 0;
    bool minimal = false;  // no tau/l (l = 2..k) is a period
    bool pass = false;
};

struct ShootingOptions {
    int n_seeds = 16;
    int max_iterations = 60;
    double residual_tol = 1e-8;         // search phase, in the caller's flow
    double polish_residual_tol = 1e-8;  // final phase, in the verification flow
    double fd_step = 1e-7;              // forward-difference step scale for the flow Jacobian
    double lm_damping0 = 1e-8;          // initial Levenberg damping
    double dedup_tol = 1e-6;            // section-state distance identifying equal orbits
    IntegratorConfig integrator{};
};

struct OrbitSearchResult {
    std::vector<PeriodicOrbit> orbits;  // verified, deduplicated, ordered by pericenter angle
    int seeds_tried = 0;
    int converged = 0;
    int rejected = 0;  // converged but failed verification or the period window
};

struct ContinuationMember {
    double eps = 0.0;
    PeriodicOrbit orbit;
    OrbitVerification verification;
};

struct ContinuationBranch {
    int branch_id = 0;
    std::vector<ContinuationMember> members;
    bool stalled = false;
};

struct ContinuationResult {
    std::vector<ContinuationBranch> branches;
    double eps_reached = 0.0;
    bool stalled = false;
};

// The L at which the admissible band closes at energy H (w_min(L) = H).
double lstar_max_lc(const LeviCivitaSystem& sys, double H);

// Largest integer at or below Theta(H, L*_max)/2pi; resonant winding numbers
// are floor + 1, floor + 2, ...
int winding_floor(const SystemSpec& sys, double H);

// Closed-form resonant angular momentum, validated against the apsidal angle
// and admissibility. Throws std::out_of_range when k <= winding_floor(H).
TorusSeed solve_resonant_L(const SystemSpec& sys, double H, int k);

// Oracle route for the same L: bisection of the quadrature apsidal angle.
double resonant_L_bisection(const SystemSpec& sys, double H, int k);

// Closed orbit of the seed torus with pericenter at polar angle psi,
// verified by integration over one period at round-off-limited tolerance.
PeriodicOrbit unperturbed_orbit(const SystemSpec& sys, const TorusSeed& seed, double psi);

// Positive-branch canonical angular momentum solving
// H_eps(section state at (r0, theta0)) = H_star; throws EnergyBranchError
// when no branch exists.
double ptheta_for_energy(const SystemSpec& sys, double r0, double theta0, double eps,
                         const PerturbationSpec& U, double H_star);

CartesianState section_state(const SystemSpec& sys, double r0, double theta0, double eps,
                             const PerturbationSpec& U, double H_star);

// Shooting on the pericenter section with unknowns (r0, theta0, tau) and
// residual (p_r(tau), r(tau) - r0, theta(tau) - theta(0) - 2 pi k), damped
// Levenberg-Marquardt from n_seeds theta0 values; energy is enforced exactly
// at the initial point through the p_theta branch and conserved by the flow.
OrbitSearchResult find_prescribed_energy_orbits(const SystemSpec& sys,
                                                const PerturbationSpec& U, double eps,
                                                double H_star, int k,
                                                const ShootingOptions& opts = {},
                                                int jobs = 1);

// Re-integration at tightened tolerance: closure, energy deviation, winding,
// and the minimal-period check (state at tau/l must differ from s0 for
// l = 2..k).
OrbitVerification verify_orbit(const SystemSpec& sys, const PerturbationSpec& U, double eps,
                               const PeriodicOrbit& orbit, double H_star);

// Natural-parameter continuation from the unperturbed torus to eps_max in
// `steps` increments, halving on Newton failure (aborting a branch below
// step 1e-8).
ContinuationResult continuation_in_epsilon(const SystemSpec& sys, const PerturbationSpec& U,
                                           double H_star, int k, double eps_max, int steps,
                                           const ShootingOptions& opts = {}, int jobs = 1);

// Levi-Civita parameters of the physical problem with gravitational constant
// G, central mass M, particle mass m, speed of light c and energy E:
// kappa = mGM + 4EGM/c^2, lambda = 3G^2M^2/c^2. Requires E in (-mc^2/4, 0).
LeviCivitaSystem levi_civita_physical(double G, double M, double m, double c, double E);

}  // namespace relkep
