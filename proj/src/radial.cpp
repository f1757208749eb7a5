#include "relkep/radial.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "relkep/errors.hpp"

namespace relkep {

namespace {

constexpr double kPi = std::numbers::pi;

struct RadialWell {
    double r_minus;
    double r_plus;
    double K;  // p_r^2(r) = K (r - r_minus)(r_plus - r) / r^2
};

// Both families reduce p_r^2 r^2 to a downward quadratic a r^2 + b r + c;
// the stable quadratic formula avoids cancellation between the roots.
RadialWell solve_well(const SystemSpec& sys, const EnergyMomentum& em) {
    double a, b, c;
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        const double beta = lc.m * em.L * em.L - 2.0 * lc.lambda;
        a = 2.0 * lc.m * em.H;
        b = 2.0 * lc.m * lc.kappa;
        c = -lc.m * beta;
    } else {
        const auto& rel = std::get<RelativisticSystem>(sys);
        const double c2 = rel.c * rel.c;
        const double E = em.H + rel.m * c2;
        a = (E * E - rel.m * rel.m * c2 * c2) / c2;
        b = 2.0 * E * rel.alpha / c2;
        c = rel.alpha * rel.alpha / c2 - em.L * em.L;
    }
    const double disc = b * b - 4.0 * a * c;
    if (!(disc > 0.0))
        throw std::domain_error("turning_points: degenerate radial well (circular-orbit boundary)");
    const double q = -0.5 * (b + std::sqrt(disc));  // b > 0 on the admissible set
    RadialWell w{c / q, q / a, -a};
    // One Newton polish per root on the exact quadratic.
    for (double* r : {&w.r_minus, &w.r_plus}) {
        const double f = (a * *r + b) * *r + c;
        const double df = 2.0 * a * *r + b;
        if (df != 0.0) *r -= f / df;
    }
    if (!(w.r_minus > 0.0 && w.r_minus < w.r_plus))
        throw std::domain_error("turning_points: no bounded radial well");
    return w;
}

void require_admissible(const SystemSpec& sys, const EnergyMomentum& em) {
    if (!admissible(sys, em))
        throw std::domain_error("(H, L) is not admissible for the " + family_name(sys) + " family");
}

// Integrate f over u in [0, pi/2] with Gauss-Legendre, doubling nodes from
// 200 until two successive results agree to 1e-11 relative (cap 3200).
template <typename F>
double adaptive_gl(F&& f) {
    double prev = 0.0;
    bool have_prev = false;
    for (int n = 200; n <= 3200; n *= 2) {
        const auto& gl = detail::gauss_legendre(n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = 0.25 * kPi * (gl.nodes[i] + 1.0);
            sum += gl.weights[i] * f(u);
        }
        sum *= 0.25 * kPi;
        if (have_prev) {
            const double scale = std::max(std::abs(sum), 1e-300);
            if (std::abs(sum - prev) <= 1e-11 * scale) return sum;
        }
        prev = sum;
        have_prev = true;
    }
    // Accept the capped result only if the last doubling moved it less
    // than the documented non-convergence bound.
    const auto& gl = detail::gauss_legendre(3200);
    double sum = 0.0;
    for (int i = 0; i < 3200; ++i) {
        const double u = 0.25 * kPi * (gl.nodes[i] + 1.0);
        sum += gl.weights[i] * f(u);
    }
    sum *= 0.25 * kPi;
    if (std::abs(sum - prev) > 1e-8 * std::max(std::abs(sum), 1e-300))
        throw ConvergenceError("radial quadrature did not converge at 3200 nodes");
    return sum;
}

}  // namespace

EnergyMomentum state_energy_momentum(const SystemSpec& sys, const CartesianState& s) {
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        return {lc_hamiltonian(lc, s), angular_momentum(s) / lc.m};
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    return {rel_hamiltonian(rel, s), angular_momentum(s)};
}

double lc_effective_potential(const LeviCivitaSystem& sys, double r, double L) {
    if (!(r > 0.0)) throw std::domain_error("effective potential: r must be > 0");
    const double beta = sys.m * L * L - 2.0 * sys.lambda;
    if (!(beta > 0.0)) throw std::domain_error("effective potential: m L^2 <= 2 lambda");
    return 0.5 * beta / (r * r) - sys.kappa / r;
}

double lc_w_min(const LeviCivitaSystem& sys, double L) {
    const double beta = sys.m * L * L - 2.0 * sys.lambda;
    if (!(beta > 0.0)) throw std::domain_error("w_min: m L^2 <= 2 lambda");
    return -sys.kappa * sys.kappa / (2.0 * beta);
}

double lc_w_min_location(const LeviCivitaSystem& sys, double L) {
    const double beta = sys.m * L * L - 2.0 * sys.lambda;
    if (!(beta > 0.0)) throw std::domain_error("w_min: m L^2 <= 2 lambda");
    return beta / sys.kappa;
}

double radial_momentum_sq(const SystemSpec& sys, const EnergyMomentum& em, double r) {
    if (!(r > 0.0)) throw std::domain_error("radial_momentum_sq: r must be > 0");
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        return 2.0 * lc.m * (em.H - lc_effective_potential(lc, r, em.L));
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double c2 = rel.c * rel.c;
    const double E = em.H + rel.m * c2;
    const double g = E + rel.alpha / r;
    return g * g / c2 - rel.m * rel.m * c2 - em.L * em.L / (r * r);
}

bool admissible(const SystemSpec& sys, const EnergyMomentum& em) {
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        const double beta = lc.m * em.L * em.L - 2.0 * lc.lambda;
        if (!(beta > 0.0)) return false;
        return em.H > -lc.kappa * lc.kappa / (2.0 * beta) && em.H < 0.0;
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double c2 = rel.c * rel.c;
    if (!(em.H > -rel.m * c2 && em.H < 0.0)) return false;
    const double L2 = em.L * em.L;
    const double denom = -2.0 * rel.m * c2 * em.H - em.H * em.H;  // m^2 c^4 - E^2 > 0
    return L2 > rel.alpha * rel.alpha / c2 &&
           L2 < rel.alpha * rel.alpha * rel.m * rel.m * c2 / denom;
}

std::pair<double, double> admissible_L_range(const SystemSpec& sys, double H) {
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        if (!(H < 0.0)) throw std::domain_error("admissible_L_range: H must be < 0");
        const double lo = std::sqrt(2.0 * lc.lambda / lc.m);
        const double hi =
            std::sqrt((2.0 * lc.lambda + lc.kappa * lc.kappa / (-2.0 * H)) / lc.m);
        return {lo, hi};
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double c2 = rel.c * rel.c;
    if (!(H > -rel.m * c2 && H < 0.0))
        throw std::domain_error("admissible_L_range: H outside (-mc^2, 0)");
    const double denom = -2.0 * rel.m * c2 * H - H * H;
    return {rel.alpha / rel.c, rel.alpha * rel.m * rel.c / std::sqrt(denom)};
}

std::pair<double, double> turning_points(const SystemSpec& sys, const EnergyMomentum& em) {
    require_admissible(sys, em);
    const RadialWell w = solve_well(sys, em);
    return {w.r_minus, w.r_plus};
}

double radial_period_quadrature(const SystemSpec& sys, const EnergyMomentum& em) {
    require_admissible(sys, em);
    const RadialWell w = solve_well(sys, em);
    const double delta = w.r_plus - w.r_minus;
    const double sqrtK = std::sqrt(w.K);
    if (is_levi_civita(sys)) {
        const double m = std::get<LeviCivitaSystem>(sys).m;
        return 4.0 * m / sqrtK * adaptive_gl([&](double u) {
                   const double s = std::sin(u);
                   return w.r_minus + delta * s * s;
               });
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double c2 = rel.c * rel.c;
    const double E = em.H + rel.m * c2;
    return 4.0 / (c2 * sqrtK) * adaptive_gl([&](double u) {
               const double s = std::sin(u);
               return E * (w.r_minus + delta * s * s) + rel.alpha;
           });
}

double apsidal_angle_quadrature(const SystemSpec& sys, const EnergyMomentum& em) {
    require_admissible(sys, em);
    const RadialWell w = solve_well(sys, em);
    const double delta = w.r_plus - w.r_minus;
    const double sqrtK = std::sqrt(w.K);
    const double mL = is_levi_civita(sys)
                          ? std::get<LeviCivitaSystem>(sys).m * std::abs(em.L)
                          : std::abs(em.L);
    return 4.0 * mL / sqrtK * adaptive_gl([&](double u) {
               const double s = std::sin(u);
               return 1.0 / (w.r_minus + delta * s * s);
           });
}

double area_quadrature(const SystemSpec& sys, const EnergyMomentum& em) {
    require_admissible(sys, em);
    const RadialWell w = solve_well(sys, em);
    const double delta = w.r_plus - w.r_minus;
    return 4.0 * std::sqrt(w.K) * delta * delta * adaptive_gl([&](double u) {
               const double s = std::sin(u), c = std::cos(u);
               return s * s * c * c / (w.r_minus + delta * s * s);
           });
}

double radial_period_closed(const SystemSpec& sys, const EnergyMomentum& em) {
    require_admissible(sys, em);
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        return kPi * lc.kappa * std::sqrt(lc.m) /
               (std::sqrt(2.0) * std::pow(-em.H, 1.5));
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double c2 = rel.c * rel.c;
    const double denom = -2.0 * rel.m * c2 * em.H - em.H * em.H;
    return 2.0 * kPi * rel.alpha * rel.m * rel.m * c2 * rel.c / std::pow(denom, 1.5);
}

double apsidal_angle_closed(const SystemSpec& sys, const EnergyMomentum& em) {
    require_admissible(sys, em);
    const double L = std::abs(em.L);
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        const double beta = lc.m * L * L - 2.0 * lc.lambda;
        return 2.0 * kPi * std::sqrt(lc.m) * L / std::sqrt(beta);
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double ratio = rel.alpha * rel.alpha / (rel.c * rel.c * L * L);
    return 2.0 * kPi / std::sqrt(1.0 - ratio);
}

double area_closed(const LeviCivitaSystem& sys, const EnergyMomentum& em) {
    require_admissible(SystemSpec{sys}, em);
    const double beta = sys.m * em.L * em.L - 2.0 * sys.lambda;
    return 2.0 * kPi * std::sqrt(sys.m) *
           (sys.kappa / std::sqrt(-2.0 * em.H) - std::sqrt(beta));
}

RadialOrbitData radial_orbit_quadrature(const SystemSpec& sys, const EnergyMomentum& em) {
    RadialOrbitData d;
    std::tie(d.r_minus, d.r_plus) = turning_points(sys, em);
    d.T = radial_period_quadrature(sys, em);
    d.Theta = apsidal_angle_quadrature(sys, em);
    d.A = area_quadrature(sys, em);
    return d;
}

namespace detail {

// Nodes by Newton iteration on P_n with the Chebyshev-like initial guess.
const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double wgt = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = wgt;
        gl.weights[n - 1 - i] = wgt;
    }
    return cache.emplace(n, std::move(gl)).first->second;
}

}  // namespace detail

}  // namespace relkep
