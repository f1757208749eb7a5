#include "relkep/systems.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "relkep/errors.hpp"

namespace relkep {

void LeviCivitaSystem::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("LeviCivitaSystem: m must be > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("LeviCivitaSystem: kappa must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("LeviCivitaSystem: lambda must be > 0");
}

void RelativisticSystem::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("RelativisticSystem: m must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("RelativisticSystem: alpha must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("RelativisticSystem: c must be > 0");
}

std::string family_name(const SystemSpec& sys) {
    return is_levi_civita(sys) ? "levi-civita" : "relativistic";
}

double PerturbationSpec::eval(const Vec2& x) const {
    double u = 0.0;
    for (const auto& t : terms)
        u += t.c * std::pow(x.x, t.a) * std::pow(x.y, t.b);
    return u;
}

Vec2 PerturbationSpec::grad(const Vec2& x) const {
    Vec2 g;
    for (const auto& t : terms) {
        if (t.a > 0) g.x += t.c * t.a * std::pow(x.x, t.a - 1) * std::pow(x.y, t.b);
        if (t.b > 0) g.y += t.c * t.b * std::pow(x.x, t.a) * std::pow(x.y, t.b - 1);
    }
    return g;
}

PerturbationSpec PerturbationSpec::x1() { return {{{1.0, 1, 0}}}; }

Vec2 perturbation_grad(const PerturbationSpec& U, const Vec2& x) { return U.grad(x); }

PolarState to_polar(const CartesianState& s) {
    PolarState ps;
    ps.r = norm(s.x);
    if (ps.r <= 0.0) throw std::domain_error("to_polar: |x| = 0");
    ps.theta = std::atan2(s.x.y, s.x.x);
    ps.p_r = dot(s.x, s.p) / ps.r;
    ps.p_theta = angular_momentum(s);
    return ps;
}

CartesianState to_cartesian(const PolarState& s) {
    if (!(s.r > 0.0)) throw std::domain_error("to_cartesian: r must be > 0");
    const Vec2 er{std::cos(s.theta), std::sin(s.theta)};
    const Vec2 et{-er.y, er.x};
    return {s.r * er, s.p_r * er + (s.p_theta / s.r) * et};
}

double angular_momentum(const CartesianState& s) {
    return dot(s.x, symplectic_J(s.p));
}

namespace {

double check_radius(const CartesianState& s) {
    const double r = norm(s.x);
    if (r <= 0.0) throw std::domain_error("state at the singularity |x| = 0");
    return r;
}

}  // namespace

double lc_hamiltonian(const LeviCivitaSystem& sys, const CartesianState& s,
                      double eps, const PerturbationSpec& U) {
    const double r = check_radius(s);
    return norm_sq(s.p) / (2.0 * sys.m) - sys.kappa / r - sys.lambda / (r * r) -
           eps * U.eval(s.x);
}

double rel_hamiltonian(const RelativisticSystem& sys, const CartesianState& s,
                       double eps, const PerturbationSpec& U) {
    const double r = check_radius(s);
    const double mc = sys.m * sys.c;
    // m c^2 (sqrt(1+q) - 1) = m c^2 q/(sqrt(1+q)+1) avoids cancellation as q -> 0.
    const double q = norm_sq(s.p) / (mc * mc);
    const double kinetic = sys.m * sys.c * sys.c * q / (std::sqrt(1.0 + q) + 1.0);
    return kinetic - sys.alpha / r - eps * U.eval(s.x);
}

double hamiltonian(const SystemSpec& sys, const CartesianState& s, double eps,
                   const PerturbationSpec& U) {
    return std::visit(
        [&](const auto& sy) {
            if constexpr (std::is_same_v<std::decay_t<decltype(sy)>, LeviCivitaSystem>)
                return lc_hamiltonian(sy, s, eps, U);
            else
                return rel_hamiltonian(sy, s, eps, U);
        },
        sys);
}

double rel_energy_from_velocity(const RelativisticSystem& sys, const Vec2& x,
                                const Vec2& v, double eps,
                                const PerturbationSpec& U) {
    const double r = norm(x);
    if (r <= 0.0) throw std::domain_error("state at the singularity |x| = 0");
    const double beta2 = norm_sq(v) / (sys.c * sys.c);
    if (beta2 >= 1.0) throw std::domain_error("rel_energy_from_velocity: |v| >= c");
    // m c^2 (1/sqrt(1-b) - 1) = m c^2 b / (sqrt(1-b)(1+sqrt(1-b)))
    const double g = std::sqrt(1.0 - beta2);
    const double kinetic = sys.m * sys.c * sys.c * beta2 / (g * (1.0 + g));
    return kinetic - sys.alpha / r - eps * U.eval(x);
}

Vec2 velocity_to_momentum(const RelativisticSystem& sys, const Vec2& v) {
    const double beta2 = norm_sq(v) / (sys.c * sys.c);
    if (beta2 >= 1.0) throw std::domain_error("velocity_to_momentum: |v| >= c");
    return (sys.m / std::sqrt(1.0 - beta2)) * v;
}

Vec2 momentum_to_velocity(const RelativisticSystem& sys, const Vec2& p) {
    const double mc = sys.m * sys.c;
    const double gamma = std::sqrt(1.0 + norm_sq(p) / (mc * mc));
    return (1.0 / (sys.m * gamma)) * p;
}

PhaseVelocity vector_field(const SystemSpec& sys, const CartesianState& s,
                           double eps, const PerturbationSpec& U, double r_floor) {
    const double r = norm(s.x);
    if (r < r_floor) throw CollisionError(0.0, r);

    PhaseVelocity f;
    const double r3 = r * r * r;
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        f.xdot = (1.0 / lc.m) * s.p;
        f.pdot = (-lc.kappa / r3 - 2.0 * lc.lambda / (r3 * r)) * s.x;
    } else {
        const auto& rel = std::get<RelativisticSystem>(sys);
        f.xdot = momentum_to_velocity(rel, s.p);
        f.pdot = (-rel.alpha / r3) * s.x;
    }
    if (eps != 0.0) f.pdot += eps * U.grad(s.x);
    return f;
}

}  // namespace relkep
