#pragma once

#include <string>
#include <variant>
#include <vector>

#include "relkep/vec2.hpp"

namespace relkep {

// Default collision floor: states with |x| below this radius are rejected.
inline constexpr double kDefaultRFloor = 1e-8;

// Planar Kepler problem with an inverse-square correction of the potential:
//   m x'' = -kappa x/|x|^3 - 2 lambda x/|x|^4 + eps grad U(x).
struct LeviCivitaSystem {
    double m = 1.0;       // particle mass
    double kappa = 1.0;   // Newtonian coupling
    double lambda = 0.1;  // inverse-square coupling

    void validate() const;
};

// Planar Kepler problem with the relativistic momentum relation:
//   d/dt( m x'/sqrt(1-|x'|^2/c^2) ) = -alpha x/|x|^3 + eps grad U(x).
struct RelativisticSystem {
    double m = 1.0;      // rest mass
    double alpha = 1.0;  // gravitational coupling
    double c = 10.0;     // speed of light

    void validate() const;
};

using SystemSpec = std::variant<LeviCivitaSystem, RelativisticSystem>;

inline bool is_levi_civita(const SystemSpec& sys) {
    return std::holds_alternative<LeviCivitaSystem>(sys);
}
std::string family_name(const SystemSpec& sys);

// Polynomial external potential U(x) = sum_i c_i x1^{a_i} x2^{b_i}.
// Monomial sums keep the gradient exact and closed-form.
struct PerturbationTerm {
    double c = 0.0;
    int a = 0;
    int b = 0;
};

struct PerturbationSpec {
    std::vector<PerturbationTerm> terms;

    double eval(const Vec2& x) const;
    Vec2 grad(const Vec2& x) const;

    static PerturbationSpec x1();  // U(x) = x1, the reference perturbation
};

struct CartesianState {
    Vec2 x;  // position, |x| > 0
    Vec2 p;  // conjugate momentum
};

// theta is kept unwrapped (a real number, not reduced mod 2pi).
// p_theta is the canonical angular momentum <x, J p>.
struct PolarState {
    double r = 1.0;
    double theta = 0.0;
    double p_r = 0.0;
    double p_theta = 0.0;
};

PolarState to_polar(const CartesianState& s);
CartesianState to_cartesian(const PolarState& s);

// Canonical angular momentum <x, J p> = x1 p2 - x2 p1.
double angular_momentum(const CartesianState& s);

double lc_hamiltonian(const LeviCivitaSystem& sys, const CartesianState& s,
                      double eps = 0.0, const PerturbationSpec& U = {});
double rel_hamiltonian(const RelativisticSystem& sys, const CartesianState& s,
                       double eps = 0.0, const PerturbationSpec& U = {});
double hamiltonian(const SystemSpec& sys, const CartesianState& s,
                   double eps = 0.0, const PerturbationSpec& U = {});

// Velocity form of the relativistic energy; requires |v| < c.
double rel_energy_from_velocity(const RelativisticSystem& sys, const Vec2& x,
                                const Vec2& v, double eps = 0.0,
                                const PerturbationSpec& U = {});

// p = m v / sqrt(1 - |v|^2/c^2) and its inverse; the inverse maps all of R^2
// back into the open disc |v| < c.
Vec2 velocity_to_momentum(const RelativisticSystem& sys, const Vec2& v);
Vec2 momentum_to_velocity(const RelativisticSystem& sys, const Vec2& p);

struct PhaseVelocity {
    Vec2 xdot;
    Vec2 pdot;
};

// Hamiltonian vector field of either family. Throws CollisionError when
// |x| < r_floor.
PhaseVelocity vector_field(const SystemSpec& sys, const CartesianState& s,
                           double eps = 0.0, const PerturbationSpec& U = {},
                           double r_floor = kDefaultRFloor);

Vec2 perturbation_grad(const PerturbationSpec& U, const Vec2& x);

}  // namespace relkep
