#pragma once

#include <utility>

#include "relkep/systems.hpp"

namespace relkep {

// First integrals labelling an unperturbed invariant torus.
//
// Angular momentum convention: the closed-form period / apsidal-angle /
// area expressions are written in the L that makes them exact, and the two
// families use different normalizations of <x, J p>:
//   Levi-Civita family:  L = r^2 theta' = <x, J p> / m   (specific)
//   relativistic family: L = <x, J p>                    (canonical)
// state_energy_momentum() applies the right one; everything downstream
// (admissibility, quadratures, actions, resonance solving) uses this L.
struct EnergyMomentum {
    double H = 0.0;
    double L = 0.0;
};

struct RadialOrbitData {
    double r_minus = 0.0;  // pericenter radius
    double r_plus = 0.0;   // apocenter radius
    double T = 0.0;        // radial period
    double Theta = 0.0;    // apsidal angle
    double A = 0.0;        // phase-plane area enclosed by the radial orbit
};

// (H, L) of an unperturbed state, in the family's L normalization.
EnergyMomentum state_energy_momentum(const SystemSpec& sys, const CartesianState& s);

// Levi-Civita effective potential W(r; L) = (mL^2-2lambda)/(2r^2) - kappa/r.
double lc_effective_potential(const LeviCivitaSystem& sys, double r, double L);

// Minimum of W(.; L) and its location (mL^2-2lambda)/kappa.
double lc_w_min(const LeviCivitaSystem& sys, double L);
double lc_w_min_location(const LeviCivitaSystem& sys, double L);

// Squared radial momentum p_r^2(r; H, L) of the unperturbed radial motion.
// LC: 2m(H - W(r;L)); relativistic: (E+alpha/r)^2/c^2 - m^2c^2 - L^2/r^2
// with E = H + mc^2.
double radial_momentum_sq(const SystemSpec& sys, const EnergyMomentum& em, double r);

// True iff (H, L) labels a bounded non-collision orbit of the family.
bool admissible(const SystemSpec& sys, const EnergyMomentum& em);

// Admissible open L-interval (positive branch) at fixed H; for grid scans.
std::pair<double, double> admissible_L_range(const SystemSpec& sys, double H);

// The two positive roots of p_r^2(r) = 0, closed form + one Newton polish.
// Throws on the circular-orbit boundary (vanishing discriminant).
std::pair<double, double> turning_points(const SystemSpec& sys, const EnergyMomentum& em);

// Quadrature oracles. Gauss-Legendre after r = r_- + (r_+ - r_-) sin^2 u,
// node count doubled from 200 until successive results agree to 1e-11
// relative (capped at 3200).
double radial_period_quadrature(const SystemSpec& sys, const EnergyMomentum& em);
double apsidal_angle_quadrature(const SystemSpec& sys, const EnergyMomentum& em);
double area_quadrature(const SystemSpec& sys, const EnergyMomentum& em);

// Closed forms.
// LC: T = pi kappa sqrt(m) / (sqrt(2) (-H)^{3/2}),
//     Theta = 2 pi sqrt(m) |L| / sqrt(m L^2 - 2 lambda),
//     A = 2 pi sqrt(m) (kappa/sqrt(-2H) - sqrt(m L^2 - 2 lambda)).
// Relativistic: T = 2 pi alpha m^2 c^3 / (-2mc^2 H - H^2)^{3/2},
//     Theta = 2 pi / sqrt(1 - alpha^2/(c^2 L^2)).
double radial_period_closed(const SystemSpec& sys, const EnergyMomentum& em);
double apsidal_angle_closed(const SystemSpec& sys, const EnergyMomentum& em);
double area_closed(const LeviCivitaSystem& sys, const EnergyMomentum& em);

// Turning points plus all three quadrature values in one call.
RadialOrbitData radial_orbit_quadrature(const SystemSpec& sys, const EnergyMomentum& em);

namespace detail {
// Gauss-Legendre nodes/weights on [-1, 1], cached per n.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);
}  // namespace detail

}  // namespace relkep
