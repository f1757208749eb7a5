#pragma once

#include "relkep/flow.hpp"
#include "relkep/radial.hpp"
#include "relkep/systems.hpp"

namespace relkep {

// Action coordinates (I1, I2) = (A(H,L)/2pi + L, L).
struct ActionPair {
    double I1 = 0.0;
    double I2 = 0.0;
};

// Both angles reduced to [0, 2pi) exactly once, at construction.
struct AnglePair {
    double phi1 = 0.0;
    double phi2 = 0.0;

    AnglePair() = default;
    AnglePair(double p1, double p2);
};

// Symmetric 2x2 Hessian of K0.
struct Hessian2 {
    double h11 = 0.0;
    double h12 = 0.0;
    double h22 = 0.0;

    double det() const { return h11 * h22 - h12 * h12; }
    double trace() const { return h11 + h22; }
};

struct NondegeneracyReport {
    double grad1 = 0.0;
    double grad2 = 0.0;
    Hessian2 hessian;
    double bordered_det = 0.0;    // det [[H, g^T], [g, 0]]
    double quadratic_form = 0.0;  // <H v, v>, v = (g2, -g1); equals -bordered_det
    double fd_error = 0.0;        // certified absolute error bound on quadratic_form
};

ActionPair actions_from_hl(const SystemSpec& sys, const EnergyMomentum& em);

// Angles of an unperturbed (eps = 0) state on an admissible torus.
// phi1 = 2 pi mu / T, phi2 = (Theta_signed - 2 pi) mu / T + psi, where mu is
// the time since the previous pericenter passage and psi its polar angle.
AnglePair angles_from_state(const SystemSpec& sys, const CartesianState& s,
                            const IntegratorConfig& cfg = {});

double k0_levicivita(const LeviCivitaSystem& sys, const ActionPair& I);
double k0_relativistic(const RelativisticSystem& sys, const ActionPair& I);
double k0(const SystemSpec& sys, const ActionPair& I);

// Levi-Civita: analytic; relativistic: certified central differences with one
// Richardson extrapolation (step 1e-5 max(1,|I_i|) per component).
struct Gradient2 {
    double g1 = 0.0;
    double g2 = 0.0;
};
Gradient2 k0_gradient(const SystemSpec& sys, const ActionPair& I);
Hessian2 k0_hessian(const SystemSpec& sys, const ActionPair& I);

// Closed determinant of the LC Hessian:
// 6 lambda m^3 sqrt(m) kappa^4 gamma^-7 (m I2^2 - 2 lambda)^{-3/2}.
double lc_hessian_det_closed(const LeviCivitaSystem& sys, const ActionPair& I);

NondegeneracyReport isoenergetic_nondegeneracy(const SystemSpec& sys, const ActionPair& I);

namespace detail {

// FD values with certified absolute error estimates (Richardson residual
// plus a rounding floor), entry by entry.
struct CertifiedGradient {
    Gradient2 value;
    Gradient2 error;
};
struct CertifiedHessian {
    Hessian2 value;
    Hessian2 error;
};

CertifiedGradient fd_gradient(const SystemSpec& sys, const ActionPair& I);
CertifiedHessian fd_hessian(const SystemSpec& sys, const ActionPair& I);

// det of [[h11,h12,g1],[h12,h22,g2],[g1,g2,0]] by cofactor expansion of the
// assembled 3x3 matrix; kept independent of the quadratic-form route.
double bordered_determinant(const Hessian2& h, double g1, double g2);

}  // namespace detail

}  // namespace relkep
