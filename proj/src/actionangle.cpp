#include "relkep/actionangle.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace relkep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mod_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

// gamma(I1, I2) = I1 - I2 + sqrt(m) sqrt(m I2^2 - 2 lambda); throws outside
// the LC action domain.
double lc_gamma(const LeviCivitaSystem& sys, const ActionPair& I, double* beta_out = nullptr) {
    const double beta = sys.m * I.I2 * I.I2 - 2.0 * sys.lambda;
    if (!(beta > 0.0)) throw std::domain_error("k0: m I2^2 <= 2 lambda");
    const double gamma = I.I1 - I.I2 + std::sqrt(sys.m) * std::sqrt(beta);
    if (!(gamma > 0.0)) throw std::domain_error("k0: gamma(I1, I2) <= 0");
    if (beta_out) *beta_out = beta;
    return gamma;
}

}  // namespace

AnglePair::AnglePair(double p1, double p2) : phi1(mod_two_pi(p1)), phi2(mod_two_pi(p2)) {}

ActionPair actions_from_hl(const SystemSpec& sys, const EnergyMomentum& em) {
    const double area = is_levi_civita(sys)
                            ? area_closed(std::get<LeviCivitaSystem>(sys), em)
                            : area_quadrature(sys, em);
    return {area / kTwoPi + em.L, em.L};
}

AnglePair angles_from_state(const SystemSpec& sys, const CartesianState& s,
                            const IntegratorConfig& cfg) {
    const EnergyMomentum em = state_energy_momentum(sys, s);
    if (!admissible(sys, em))
        throw std::domain_error("angles_from_state: state is not on an admissible torus");
    const double T = radial_period_closed(sys, em);
    const double theta_adv = (em.L < 0.0 ? -1.0 : 1.0) * apsidal_angle_closed(sys, em);

    const Trajectory traj = integrate(sys, s, 1.05 * T, 0.0, {}, cfg);
    const double t_cross = section_crossings(traj, 1).front().t;

    double mu, psi;
    if (t_cross < 1e-9 * T) {
        mu = 0.0;
        psi = std::atan2(s.x.y, s.x.x);
    } else {
        mu = T - t_cross;
        psi = traj.theta_at(t_cross) - theta_adv;
    }
    return AnglePair(kTwoPi * mu / T, (theta_adv - kTwoPi) * mu / T + psi);
}

double k0_levicivita(const LeviCivitaSystem& sys, const ActionPair& I) {
    const double gamma = lc_gamma(sys, I);
    return -0.5 * sys.m * sys.kappa * sys.kappa / (gamma * gamma);
}

double k0_relativistic(const RelativisticSystem& sys, const ActionPair& I) {
    const double w2 = sys.c * sys.c * I.I2 * I.I2 - sys.alpha * sys.alpha;
    if (!(w2 > 0.0)) throw std::domain_error("k0: c^2 I2^2 <= alpha^2");
    const double dj = I.I1 - I.I2;
    const double X = dj + std::sqrt(w2) / sys.c;
    const double R = X * X + sys.alpha * sys.alpha / (sys.c * sys.c);
    if (!(dj * dj + I.I2 * I.I2 + 2.0 * dj * std::sqrt(w2) / sys.c > 0.0))
        throw std::domain_error("k0: radicand is not positive");
    const double D = std::sqrt(R);
    // m c^2 (X/D - 1) = -m alpha^2 / (D (X + D)) when X > 0; the direct form
    // cancels catastrophically there (X/D -> 1 as c grows).
    if (X > 0.0) return -sys.m * sys.alpha * sys.alpha / (D * (X + D));
    return sys.m * sys.c * sys.c * (X - D) / D;
}

double k0(const SystemSpec& sys, const ActionPair& I) {
    return is_levi_civita(sys) ? k0_levicivita(std::get<LeviCivitaSystem>(sys), I)
                               : k0_relativistic(std::get<RelativisticSystem>(sys), I);
}

Gradient2 k0_gradient(const SystemSpec& sys, const ActionPair& I) {
    if (!is_levi_civita(sys)) return detail::fd_gradient(sys, I).value;
    const auto& lc = std::get<LeviCivitaSystem>(sys);
    double beta;
    const double gamma = lc_gamma(lc, I, &beta);
    const double g3 = lc.m * lc.kappa * lc.kappa / (gamma * gamma * gamma);
    const double slope = lc.m * std::sqrt(lc.m) * I.I2 / std::sqrt(beta) - 1.0;
    return {g3, g3 * slope};
}

Hessian2 k0_hessian(const SystemSpec& sys, const ActionPair& I) {
    if (!is_levi_civita(sys)) return detail::fd_hessian(sys, I).value;
    const auto& lc = std::get<LeviCivitaSystem>(sys);
    double beta;
    const double gamma = lc_gamma(lc, I, &beta);
    const double g4 = -3.0 * lc.m * lc.kappa * lc.kappa / std::pow(gamma, 4);
    const double slope = lc.m * std::sqrt(lc.m) * I.I2 / std::sqrt(beta) - 1.0;
    Hessian2 h;
    h.h11 = g4;
    h.h12 = g4 * slope;
    h.h22 = g4 * slope * slope -
            2.0 * lc.lambda * lc.m * lc.m * std::sqrt(lc.m) * lc.kappa * lc.kappa /
                (std::pow(gamma, 3) * std::pow(beta, 1.5));
    return h;
}

double lc_hessian_det_closed(const LeviCivitaSystem& sys, const ActionPair& I) {
    double beta;
    const double gamma = lc_gamma(sys, I, &beta);
    return 6.0 * sys.lambda * std::pow(sys.m, 3) * std::sqrt(sys.m) *
           std::pow(sys.kappa, 4) / (std::pow(gamma, 7) * std::pow(beta, 1.5));
}

NondegeneracyReport isoenergetic_nondegeneracy(const SystemSpec& sys, const ActionPair& I) {
    NondegeneracyReport rep;
    const auto fd_g = detail::fd_gradient(sys, I);
    const auto fd_h = detail::fd_hessian(sys, I);

    Gradient2 g;
    Hessian2 h;
    double err_g1, err_g2, err_h11, err_h12, err_h22;
    if (is_levi_civita(sys)) {
        g = k0_gradient(sys, I);
        h = k0_hessian(sys, I);
        // Analytic entries are exact; carry the analytic-vs-FD discrepancy.
        err_g1 = std::abs(g.g1 - fd_g.value.g1);
        err_g2 = std::abs(g.g2 - fd_g.value.g2);
        err_h11 = std::abs(h.h11 - fd_h.value.h11);
        err_h12 = std::abs(h.h12 - fd_h.value.h12);
        err_h22 = std::abs(h.h22 - fd_h.value.h22);
    } else {
        g = fd_g.value;
        h = fd_h.value;
        err_g1 = fd_g.error.g1;
        err_g2 = fd_g.error.g2;
        err_h11 = fd_h.error.h11;
        err_h12 = fd_h.error.h12;
        err_h22 = fd_h.error.h22;
    }

    rep.grad1 = g.g1;
    rep.grad2 = g.g2;
    rep.hessian = h;
    rep.bordered_det = detail::bordered_determinant(h, g.g1, g.g2);
    const double v1 = g.g2, v2 = -g.g1;
    rep.quadratic_form = h.h11 * v1 * v1 + 2.0 * h.h12 * v1 * v2 + h.h22 * v2 * v2;

    // First-order propagation of the entry uncertainties into <H v, v>.
    const double hv1 = h.h11 * v1 + h.h12 * v2;
    const double hv2 = h.h12 * v1 + h.h22 * v2;
    rep.fd_error = v1 * v1 * err_h11 + 2.0 * std::abs(v1 * v2) * err_h12 +
                   v2 * v2 * err_h22 + 2.0 * std::abs(hv1) * err_g2 +
                   2.0 * std::abs(hv2) * err_g1;
    return rep;
}

namespace detail {

namespace {

double fd_step(double component) { return 1e-5 * std::max(1.0, std::abs(component)); }

double eval_k0(const SystemSpec& sys, double i1, double i2) {
    return k0(sys, {i1, i2});
}

}  // namespace

CertifiedGradient fd_gradient(const SystemSpec& sys, const ActionPair& I) {
    CertifiedGradient out;
    const double f0 = std::abs(eval_k0(sys, I.I1, I.I2));
    const std::array<double, 2> base{I.I1, I.I2};
    for (int dim = 0; dim < 2; ++dim) {
        const double h = fd_step(base[dim]);
        auto diff = [&](double hh) {
            std::array<double, 2> up = base, dn = base;
            up[dim] += hh;
            dn[dim] -= hh;
            return (eval_k0(sys, up[0], up[1]) - eval_k0(sys, dn[0], dn[1])) / (2.0 * hh);
        };
        const double d1 = diff(h), d2 = diff(0.5 * h);
        const double value = (4.0 * d2 - d1) / 3.0;
        const double error = std::abs(d2 - d1) / 3.0 + 4.0 * 1.1e-16 * f0 / h;
        if (dim == 0) {
            out.value.g1 = value;
            out.error.g1 = error;
        } else {
            out.value.g2 = value;
            out.error.g2 = error;
        }
    }
    return out;
}

CertifiedHessian fd_hessian(const SystemSpec& sys, const ActionPair& I) {
    CertifiedHessian out;
    const double f0 = eval_k0(sys, I.I1, I.I2);
    const double h1 = fd_step(I.I1), h2 = fd_step(I.I2);

    auto second = [&](int dim, double h) {
        std::array<double, 2> up{I.I1, I.I2}, dn{I.I1, I.I2};
        up[dim] += h;
        dn[dim] -= h;
        return (eval_k0(sys, up[0], up[1]) - 2.0 * f0 + eval_k0(sys, dn[0], dn[1])) / (h * h);
    };
    auto cross = [&](double s1, double s2) {
        return (eval_k0(sys, I.I1 + s1, I.I2 + s2) - eval_k0(sys, I.I1 + s1, I.I2 - s2) -
                eval_k0(sys, I.I1 - s1, I.I2 + s2) + eval_k0(sys, I.I1 - s1, I.I2 - s2)) /
               (4.0 * s1 * s2);
    };

    const double rounding = 1.1e-16 * std::abs(f0);

    const double d11a = second(0, h1), d11b = second(0, 0.5 * h1);
    out.value.h11 = (4.0 * d11b - d11a) / 3.0;
    out.error.h11 = std::abs(d11b - d11a) / 3.0 + 16.0 * rounding / (h1 * h1);

    const double d22a = second(1, h2), d22b = second(1, 0.5 * h2);
    out.value.h22 = (4.0 * d22b - d22a) / 3.0;
    out.error.h22 = std::abs(d22b - d22a) / 3.0 + 16.0 * rounding / (h2 * h2);

    const double d12a = cross(h1, h2), d12b = cross(0.5 * h1, 0.5 * h2);
    out.value.h12 = (4.0 * d12b - d12a) / 3.0;
    out.error.h12 = std::abs(d12b - d12a) / 3.0 + 16.0 * rounding / (h1 * h2);
    return out;
}

double bordered_determinant(const Hessian2& h, double g1, double g2) {
    const double m[3][3] = {{h.h11, h.h12, g1}, {h.h12, h.h22, g2}, {g1, g2, 0.0}};
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace detail

}  // namespace relkep
