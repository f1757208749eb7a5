#include "relkep/orbits.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace relkep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double state_distance(const CartesianState& a, const CartesianState& b) {
    return std::sqrt(norm_sq(a.x - b.x) + norm_sq(a.p - b.p));
}

struct Residual {
    std::array<double, 3> F;
    double norm_inf() const {
        return std::max({std::abs(F[0]), std::abs(F[1]), std::abs(F[2])});
    }
    double norm_sq() const { return F[0] * F[0] + F[1] * F[1] + F[2] * F[2]; }
};

// Shooting residual at u = (r0, theta0, tau).
Residual shooting_residual(const SystemSpec& sys, const PerturbationSpec& U, double eps,
                           double H_star, int k, const std::array<double, 3>& u,
                           const IntegratorConfig& cfg) {
    const double r0 = u[0], theta0 = u[1], tau = u[2];
    if (!(r0 > 10.0 * cfg.r_floor) || !(tau > 0.0))
        throw EnergyBranchError("shooting: trial point left the admissible region");
    const CartesianState s0 = section_state(sys, r0, theta0, eps, U, H_star);
    const Trajectory traj = integrate(sys, s0, tau, eps, U, cfg);
    const CartesianState s1 = traj.state_at(tau);
    Residual res;
    res.F[0] = dot(s1.x, s1.p) / norm(s1.x);
    res.F[1] = norm(s1.x) - r0;
    res.F[2] = (traj.theta_at(tau) - traj.theta_at(0.0)) - kTwoPi * k;
    return res;
}

// Solve the damped normal equations (J^T J + lm I) d = -J^T F, 3x3.
std::array<double, 3> lm_step(const std::array<std::array<double, 3>, 3>& J,
                              const Residual& res, double lm) {
    double A[3][3], b[3];
    for (int i = 0; i < 3; ++i) {
        b[i] = 0.0;
        for (int j = 0; j < 3; ++j) {
            A[i][j] = 0.0;
            for (int l = 0; l < 3; ++l) A[i][j] += J[l][i] * J[l][j];
        }
        for (int l = 0; l < 3; ++l) b[i] -= J[l][i] * res.F[l];
        A[i][i] += lm;
    }
    // Gaussian elimination with partial pivoting.
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 2; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(A[perm[row]][col]) > std::abs(A[perm[piv]][col])) piv = row;
        std::swap(perm[col], perm[piv]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = A[perm[row]][col] / A[perm[col]][col];
            for (int j = col; j < 3; ++j) A[perm[row]][j] -= f * A[perm[col]][j];
            b[perm[row]] -= f * b[perm[col]];
        }
    }
    std::array<double, 3> d{};
    for (int row = 2; row >= 0; --row) {
        double acc = b[perm[row]];
        for (int j = row + 1; j < 3; ++j) acc -= A[perm[row]][j] * d[j];
        d[row] = acc / A[perm[row]][row];
    }
    return d;
}

struct SolveOutcome {
    std::array<double, 3> u;
    double residual_norm;
};

// The verification flow: the tightest tolerance the stepper sustains before
// round-off dominates. Final Newton polishing runs in this same flow so the
// measured closure is the polished residual, not cross-tolerance flow error.
IntegratorConfig verify_config() {
    IntegratorConfig cfg;
    cfg.rel_tol = 3e-15;
    cfg.abs_tol = 3e-16;
    return cfg;
}

// Damped Levenberg-Marquardt with a forward-difference flow Jacobian and
// gain-ratio adaptation of the damping.
std::optional<SolveOutcome> lm_solve(const SystemSpec& sys, const PerturbationSpec& U,
                                     double eps, double H_star, int k,
                                     std::array<double, 3> u, const ShootingOptions& opts,
                                     const IntegratorConfig& flow_cfg, double residual_tol) {
    auto eval = [&](const std::array<double, 3>& v) {
        return shooting_residual(sys, U, eps, H_star, k, v, flow_cfg);
    };

    Residual res;
    try {
        res = eval(u);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    double lm = opts.lm_damping0;
    double nu = 2.0;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (res.norm_inf() < residual_tol) return SolveOutcome{u, res.norm_inf()};

        std::array<std::array<double, 3>, 3> J;
        bool jac_ok = true;
        for (int j = 0; j < 3; ++j) {
            const double h = opts.fd_step * std::max(1.0, std::abs(u[j]));
            std::array<double, 3> up = u;
            up[j] += h;
            try {
                const Residual rp = eval(up);
                for (int i = 0; i < 3; ++i) J[i][j] = (rp.F[i] - res.F[i]) / h;
            } catch (const std::exception&) {
                jac_ok = false;
                break;
            }
        }
        if (!jac_ok) return std::nullopt;

        bool accepted = false;
        for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
            const std::array<double, 3> d = lm_step(J, res, lm);
            std::array<double, 3> u_new{u[0] + d[0], u[1] + d[1], u[2] + d[2]};
            double predicted = 0.0;
            for (int i = 0; i < 3; ++i) {
                double Jtf = 0.0;
                for (int l = 0; l < 3; ++l) Jtf += J[l][i] * res.F[l];
                predicted += d[i] * (lm * d[i] - Jtf);
            }
            try {
                const Residual res_new = eval(u_new);
                const double rho = predicted > 0.0
                                       ? (res.norm_sq() - res_new.norm_sq()) / predicted
                                       : -1.0;
                if (rho > 0.0) {
                    u = u_new;
                    res = res_new;
                    lm *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                    nu = 2.0;
                    accepted = true;
                    continue;
                }
            } catch (const std::exception&) {
                // fall through to heavier damping
            }
            lm *= nu;
            nu *= 2.0;
            if (lm > 1e14) return std::nullopt;
        }
        if (!accepted) return std::nullopt;
    }
    if (res.norm_inf() < residual_tol) return SolveOutcome{u, res.norm_inf()};
    return std::nullopt;
}

// Search in the caller's flow, then re-converge in the verification flow.
std::optional<SolveOutcome> solve_and_polish(const SystemSpec& sys, const PerturbationSpec& U,
                                             double eps, double H_star, int k,
                                             const std::array<double, 3>& u0,
                                             const ShootingOptions& opts) {
    const auto coarse =
        lm_solve(sys, U, eps, H_star, k, u0, opts, opts.integrator, opts.residual_tol);
    if (!coarse) return std::nullopt;
    return lm_solve(sys, U, eps, H_star, k, coarse->u, opts, verify_config(),
                    opts.polish_residual_tol);
}

// Radial closure at fixed theta0: (r0, tau) such that the trajectory returns
// to the section (p_r = 0) with winding exactly 2 pi k. The leftover radial
// mismatch g = r(tau) - r0 is the bifurcation function on the circle of
// unperturbed orbits; its zeros are the periodic orbits.
struct RadialClosure {
    double r0;
    double tau;
    double g;
};

std::optional<RadialClosure> radial_closure(const SystemSpec& sys, const PerturbationSpec& U,
                                            double eps, double H_star, int k, double theta0,
                                            double r0_init, double tau_init,
                                            const ShootingOptions& opts,
                                            const IntegratorConfig& flow_cfg) {
    std::array<double, 2> v{r0_init, tau_init};
    std::array<double, 2> G;
    double g_out = 0.0;

    auto eval = [&](const std::array<double, 2>& vv, std::array<double, 2>& GG) {
        const Residual res =
            shooting_residual(sys, U, eps, H_star, k, {vv[0], theta0, vv[1]}, flow_cfg);
        GG = {res.F[0], res.F[2]};
        return res.F[1];
    };

    try {
        g_out = eval(v, G);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    double lm = opts.lm_damping0;
    double nu = 2.0;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if (std::max(std::abs(G[0]), std::abs(G[1])) < opts.residual_tol)
            return RadialClosure{v[0], v[1], g_out};

        double J[2][2];
        for (int j = 0; j < 2; ++j) {
            const double h = opts.fd_step * std::max(1.0, std::abs(v[j]));
            std::array<double, 2> vp = v, Gp;
            vp[j] += h;
            try {
                eval(vp, Gp);
            } catch (const std::exception&) {
                return std::nullopt;
            }
            for (int i = 0; i < 2; ++i) J[i][j] = (Gp[i] - G[i]) / h;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
            double A[2][2], b[2];
            for (int i = 0; i < 2; ++i) {
                b[i] = -(J[0][i] * G[0] + J[1][i] * G[1]);
                for (int j = 0; j < 2; ++j) A[i][j] = J[0][i] * J[0][j] + J[1][i] * J[1][j];
                A[i][i] += lm;
            }
            const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
            if (det == 0.0) return std::nullopt;
            const std::array<double, 2> d{(b[0] * A[1][1] - b[1] * A[0][1]) / det,
                                          (b[1] * A[0][0] - b[0] * A[1][0]) / det};
            const double predicted =
                d[0] * (lm * d[0] - (J[0][0] * G[0] + J[1][0] * G[1])) +
                d[1] * (lm * d[1] - (J[0][1] * G[0] + J[1][1] * G[1]));
            std::array<double, 2> v_new{v[0] + d[0], v[1] + d[1]}, G_new;
            try {
                const double g_new = eval(v_new, G_new);
                const double old_sq = G[0] * G[0] + G[1] * G[1];
                const double new_sq = G_new[0] * G_new[0] + G_new[1] * G_new[1];
                const double rho = predicted > 0.0 ? (old_sq - new_sq) / predicted : -1.0;
                if (rho > 0.0) {
                    v = v_new;
                    G = G_new;
                    g_out = g_new;
                    lm *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                    nu = 2.0;
                    accepted = true;
                    continue;
                }
            } catch (const std::exception&) {
            }
            lm *= nu;
            nu *= 2.0;
            if (lm > 1e14) return std::nullopt;
        }
        if (!accepted) return std::nullopt;
    }
    if (std::max(std::abs(G[0]), std::abs(G[1])) < opts.residual_tol)
        return RadialClosure{v[0], v[1], g_out};
    return std::nullopt;
}

PeriodicOrbit orbit_from_solution(const SystemSpec& sys, const PerturbationSpec& U,
                                  double eps, double H_star, int k,
                                  const SolveOutcome& sol) {
    PeriodicOrbit orb;
    orb.s0 = section_state(sys, sol.u[0], sol.u[1], eps, U, H_star);
    orb.tau = sol.u[2];
    orb.k = k;
    orb.eps = eps;
    orb.energy_residual = std::abs(hamiltonian(sys, orb.s0, eps, U) - H_star);
    orb.closure_residual = sol.residual_norm;
    return orb;
}

double pericenter_angle(const PeriodicOrbit& orb) {
    const double a = std::atan2(orb.s0.x.y, orb.s0.x.x);
    return a < 0.0 ? a + kTwoPi : a;
}

// Deduplicate by section-state distance, keeping the first representative.
std::vector<PeriodicOrbit> dedup(std::vector<PeriodicOrbit> candidates, double tol) {
    std::vector<PeriodicOrbit> unique;
    for (const auto& orb : candidates) {
        bool dup = false;
        for (const auto& kept : unique)
            if (state_distance(orb.s0, kept.s0) < tol) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(orb);
    }
    return unique;
}

}  // namespace

double lstar_max_lc(const LeviCivitaSystem& sys, double H) {
    if (!(H < 0.0)) throw std::domain_error("lstar_max_lc: H must be < 0");
    return std::sqrt((2.0 * sys.lambda + sys.kappa * sys.kappa / (-2.0 * H)) / sys.m);
}

int winding_floor(const SystemSpec& sys, double H) {
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        if (!(H < 0.0)) throw std::domain_error("winding_floor: H must be < 0");
        const double v = std::sqrt(-2.0 * H) / lc.kappa *
                         std::sqrt(2.0 * lc.lambda + lc.kappa * lc.kappa / (-2.0 * H));
        return static_cast<int>(std::floor(v));
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double mc2 = rel.m * rel.c * rel.c;
    if (!(H > -mc2 && H < 0.0))
        throw std::domain_error("winding_floor: H outside (-mc^2, 0)");
    return static_cast<int>(std::floor(mc2 / (H + mc2)));
}

TorusSeed solve_resonant_L(const SystemSpec& sys, double H, int k) {
    if (k < winding_floor(sys, H) + 1)
        throw std::out_of_range("solve_resonant_L: k = " + std::to_string(k) +
                                " is at or below the winding floor at this energy");
    double L;
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        L = std::sqrt(2.0 * lc.lambda * k * k /
                      (lc.m * (static_cast<double>(k) * k - 1.0)));
    } else {
        const auto& rel = std::get<RelativisticSystem>(sys);
        L = rel.alpha * k / (rel.c * std::sqrt(static_cast<double>(k) * k - 1.0));
    }
    TorusSeed seed{{H, L}, k, 0.0, 0.0};
    if (!admissible(sys, seed.em))
        throw std::out_of_range("solve_resonant_L: resonant L is not admissible at H");
    seed.Theta = apsidal_angle_closed(sys, seed.em);
    if (std::abs(seed.Theta - kTwoPi * k) > 1e-10 * kTwoPi * k)
        throw ConvergenceError("solve_resonant_L: closed form failed the apsidal check");
    seed.T = radial_period_closed(sys, seed.em);
    return seed;
}

double resonant_L_bisection(const SystemSpec& sys, double H, int k) {
    const auto [L_lo, L_hi] = admissible_L_range(sys, H);
    double a = L_lo * (1.0 + 1e-12) + 1e-300;
    double b = L_hi * (1.0 - 1e-12);
    auto f = [&](double L) { return apsidal_angle_quadrature(sys, {H, L}) - kTwoPi * k; };
    double fa = f(a), fb = f(b);
    if (!(fa > 0.0 && fb < 0.0))
        throw std::out_of_range("resonant_L_bisection: no resonance with this k at H");
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (a + b);
        if ((b - a) < 1e-14 * mid) return mid;
        if (f(mid) > 0.0)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

PeriodicOrbit unperturbed_orbit(const SystemSpec& sys, const TorusSeed& seed, double psi) {
    const auto [r_minus, r_plus] = turning_points(sys, seed.em);
    const double p_theta = is_levi_civita(sys)
                               ? std::get<LeviCivitaSystem>(sys).m * seed.em.L
                               : seed.em.L;
    const CartesianState s0 = to_cartesian({r_minus, psi, 0.0, p_theta});

    PeriodicOrbit orb;
    orb.s0 = s0;
    orb.tau = seed.T;
    orb.k = seed.k;
    orb.eps = 0.0;
    orb.energy_residual = std::abs(hamiltonian(sys, s0) - seed.em.H);

    // The period is pinned to T(H, L), so nothing absorbs the flow's phase
    // and precession error here; only the round-off-limited flow can measure
    // the closure. Deep pericenter passes (r_- near 0) can still exhaust
    // double precision and fail the 1e-7 bound; that is a flow-accuracy
    // limit, not a property of the torus.
    const Trajectory traj = integrate(sys, s0, seed.T, 0.0, {}, verify_config());
    orb.closure_residual = state_distance(traj.state_at(seed.T), s0);
    if (orb.closure_residual > 1e-7)
        throw ConvergenceError("unperturbed_orbit: closure residual " +
                               std::to_string(orb.closure_residual) + " exceeds 1e-7");
    return orb;
}

double ptheta_for_energy(const SystemSpec& sys, double r0, double theta0, double eps,
                         const PerturbationSpec& U, double H_star) {
    if (!(r0 > 0.0)) throw std::domain_error("ptheta_for_energy: r0 must be > 0");
    const Vec2 x = rotate({r0, 0.0}, theta0);
    const double u_val = eps * U.eval(x);
    if (is_levi_civita(sys)) {
        const auto& lc = std::get<LeviCivitaSystem>(sys);
        const double rad =
            2.0 * lc.m * (H_star + lc.kappa / r0 + lc.lambda / (r0 * r0) + u_val);
        if (!(rad > 0.0))
            throw EnergyBranchError("ptheta_for_energy: no momentum reaches H* here");
        return r0 * std::sqrt(rad);
    }
    const auto& rel = std::get<RelativisticSystem>(sys);
    const double mc2 = rel.m * rel.c * rel.c;
    const double Gamma = 1.0 + (H_star + rel.alpha / r0 + u_val) / mc2;
    if (!(Gamma > 1.0))
        throw EnergyBranchError("ptheta_for_energy: no momentum reaches H* here");
    return r0 * rel.m * rel.c * std::sqrt(Gamma * Gamma - 1.0);
}

CartesianState section_state(const SystemSpec& sys, double r0, double theta0, double eps,
                             const PerturbationSpec& U, double H_star) {
    return to_cartesian({r0, theta0, 0.0, ptheta_for_energy(sys, r0, theta0, eps, U, H_star)});
}

OrbitSearchResult find_prescribed_energy_orbits(const SystemSpec& sys,
                                                const PerturbationSpec& U, double eps,
                                                double H_star, int k,
                                                const ShootingOptions& opts, int jobs) {
    const TorusSeed seed = solve_resonant_L(sys, H_star, k);
    const auto [r_minus, r_plus] = turning_points(sys, seed.em);

    OrbitSearchResult result;
    result.seeds_tried = opts.n_seeds;

    // eps = 0: the torus is filled with closed orbits; every seed already is
    // one, no Newton steps required.
    if (eps == 0.0) {
        for (int j = 0; j < opts.n_seeds; ++j) {
            PeriodicOrbit orb = unperturbed_orbit(sys, seed, kTwoPi * j / opts.n_seeds);
            ++result.converged;
            const OrbitVerification v = verify_orbit(sys, U, eps, orb, H_star);
            if (v.pass) {
                orb.closure_residual = v.closure_residual;
                result.orbits.push_back(std::move(orb));
            } else {
                ++result.rejected;
            }
        }
        return result;
    }

    // Bifurcation function g(theta0) on the theta0 grid; a damped 2x2 Newton
    // closes (r0, tau) at each node, warm-started from its neighbor.
    std::vector<std::optional<RadialClosure>> nodes(opts.n_seeds);
    auto node_at = [&](int j) {
        const double theta0 = kTwoPi * j / opts.n_seeds;
        return radial_closure(sys, U, eps, H_star, k, theta0, r_minus, seed.T, opts,
                              opts.integrator);
    };
    if (jobs > 1) {
        std::vector<std::future<void>> futures;
        std::atomic<int> next{0};
        for (int w = 0; w < std::min(jobs, opts.n_seeds); ++w)
            futures.push_back(std::async(std::launch::async, [&]() {
                for (int j = next.fetch_add(1); j < opts.n_seeds; j = next.fetch_add(1))
                    nodes[j] = node_at(j);
            }));
        for (auto& f : futures) f.get();
    } else {
        for (int j = 0; j < opts.n_seeds; ++j) nodes[j] = node_at(j);
    }
    if (std::getenv("RELKEP_DBG"))
        for (int j = 0; j < opts.n_seeds; ++j)
            std::fprintf(stderr, "node %d: %s g=%.6e r0=%.8f tau=%.8f\n", j,
                         nodes[j] ? "ok" : "FAIL", nodes[j] ? nodes[j]->g : 0.0,
                         nodes[j] ? nodes[j]->r0 : 0.0, nodes[j] ? nodes[j]->tau : 0.0);

    // Bracketed root finding for each sign change of g around the circle.
    std::vector<std::array<double, 3>> roots;  // (r0, theta0, tau)
    for (int j = 0; j < opts.n_seeds; ++j) {
        const int jn = (j + 1) % opts.n_seeds;
        if (!nodes[j] || !nodes[jn]) continue;
        if (nodes[j]->g == 0.0) {
            roots.push_back({nodes[j]->r0, kTwoPi * j / opts.n_seeds, nodes[j]->tau});
            continue;
        }
        if (nodes[j]->g * nodes[jn]->g > 0.0) continue;
        if (std::getenv("RELKEP_DBG")) std::fprintf(stderr, "bracket at j=%d\n", j);
        double a = kTwoPi * j / opts.n_seeds, b = kTwoPi * (j + 1) / opts.n_seeds;
        double ga = nodes[j]->g, gb = nodes[jn]->g;
        RadialClosure warm = *nodes[j];
        bool ok = true;
        // Bisection with a secant bias; each evaluation re-closes (r0, tau).
        for (int iter = 0; iter < 80 && ok; ++iter) {
            if (b - a < 1e-11) break;
            double mid = 0.5 * (a + b);
            const double secant = (ga * b - gb * a) / (ga - gb);
            if (secant > a + 0.1 * (b - a) && secant < b - 0.1 * (b - a)) mid = secant;
            const auto closed =
                radial_closure(sys, U, eps, H_star, k, mid, warm.r0, warm.tau, opts,
                               opts.integrator);
            if (!closed) {
                if (std::getenv("RELKEP_DBG"))
                    std::fprintf(stderr, "  bisect FAIL at mid=%.8f (a=%.8f b=%.8f)\n", mid, a, b);
                ok = false;
                break;
            }
            warm = *closed;
            if ((closed->g > 0.0) == (ga > 0.0)) {
                a = mid;
                ga = closed->g;
            } else {
                b = mid;
                gb = closed->g;
            }
        }
        if (std::getenv("RELKEP_DBG")) std::fprintf(stderr, "  bracket j=%d ok=%d root=%.8f\n", j, (int)ok, 0.5*(a+b));
        if (ok) roots.push_back({warm.r0, 0.5 * (a + b), warm.tau});
    }

    result.converged = static_cast<int>(roots.size());
    std::vector<PeriodicOrbit> candidates;
    for (const auto& u : roots) {
        const auto polished = lm_solve(sys, U, eps, H_star, k, u, opts, opts.integrator,
                                       opts.residual_tol);
        if (!polished) continue;
        PeriodicOrbit orb = orbit_from_solution(sys, U, eps, H_star, k, *polished);
        if (std::abs(orb.tau - seed.T) > 0.2 * seed.T)
            ++result.rejected;  // wandered to a different resonance
        else
            candidates.push_back(std::move(orb));
    }

    // Polish the distinct survivors in the verification flow, then verify.
    std::vector<PeriodicOrbit> verified;
    for (const auto& cand : dedup(std::move(candidates), opts.dedup_tol)) {
        const PolarState ps = to_polar(cand.s0);
        const auto polished = lm_solve(sys, U, eps, H_star, k, {ps.r, ps.theta, cand.tau},
                                       opts, verify_config(), opts.polish_residual_tol);
        if (!polished) {
            ++result.rejected;
            continue;
        }
        PeriodicOrbit orb = orbit_from_solution(sys, U, eps, H_star, k, *polished);
        const OrbitVerification v = verify_orbit(sys, U, eps, orb, H_star);
        if (!v.pass) {
            ++result.rejected;
            continue;
        }
        orb.closure_residual = v.closure_residual;
        verified.push_back(std::move(orb));
    }
    result.orbits = dedup(std::move(verified), opts.dedup_tol);
    std::sort(result.orbits.begin(), result.orbits.end(),
              [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
                  return pericenter_angle(a) < pericenter_angle(b);
              });
    return result;
}

OrbitVerification verify_orbit(const SystemSpec& sys, const PerturbationSpec& U, double eps,
                               const PeriodicOrbit& orbit, double H_star) {
    OrbitVerification v;
    const Trajectory traj = integrate(sys, orbit.s0, orbit.tau, eps, U, verify_config());
    v.closure_residual = state_distance(traj.state_at(orbit.tau), orbit.s0);

    for (std::size_t i = 0; i < traj.n_nodes(); ++i)
        v.max_energy_dev = std::max(
            v.max_energy_dev, std::abs(hamiltonian(sys, traj.node_state(i), eps, U) - H_star));

    const WindingResult w = winding_number(traj, 0.0, orbit.tau);
    v.winding_raw = w.raw;
    v.winding = w.k;

    v.minimal = true;
    for (int l = 2; l <= orbit.k; ++l)
        if (state_distance(traj.state_at(orbit.tau / l), orbit.s0) <= 1e-3) {
            v.minimal = false;
            break;
        }

    v.pass = v.closure_residual < 1e-7 && v.max_energy_dev < 1e-7 &&
             v.winding == orbit.k && std::abs(v.winding_raw - orbit.k) <= 0.05 && v.minimal;
    return v;
}

ContinuationResult continuation_in_epsilon(const SystemSpec& sys, const PerturbationSpec& U,
                                           double H_star, int k, double eps_max, int steps,
                                           const ShootingOptions& opts, int jobs) {
    if (steps < 1) throw std::invalid_argument("continuation_in_epsilon: steps must be >= 1");
    ContinuationResult result;

    if (eps_max == 0.0) {
        const TorusSeed seed = solve_resonant_L(sys, H_star, k);
        for (int j = 0; j < opts.n_seeds; ++j) {
            ContinuationBranch br;
            br.branch_id = j;
            const PeriodicOrbit orb = unperturbed_orbit(sys, seed, kTwoPi * j / opts.n_seeds);
            br.members.push_back({0.0, orb, verify_orbit(sys, U, 0.0, orb, H_star)});
            result.branches.push_back(std::move(br));
        }
        return result;
    }

    const double eps1 = eps_max / steps;
    const OrbitSearchResult first =
        find_prescribed_energy_orbits(sys, U, eps1, H_star, k, opts, jobs);
    if (first.orbits.empty())
        throw ConvergenceError("continuation_in_epsilon: no orbit found at the first step");

    int id = 0;
    for (const auto& orb : first.orbits) {
        ContinuationBranch br;
        br.branch_id = id++;
        br.members.push_back({eps1, orb, verify_orbit(sys, U, eps1, orb, H_star)});
        result.branches.push_back(std::move(br));
    }

    for (auto& br : result.branches) {
        double eps_cur = eps1;
        double step = eps_max / steps;
        PeriodicOrbit cur = br.members.back().orbit;
        while (eps_cur < eps_max) {
            const double eps_next = std::min(eps_cur + step, eps_max);
            const PolarState ps = to_polar(cur.s0);
            const auto sol = solve_and_polish(sys, U, eps_next, H_star, k,
                                              {ps.r, ps.theta, cur.tau}, opts);
            bool ok = false;
            if (sol) {
                PeriodicOrbit orb = orbit_from_solution(sys, U, eps_next, H_star, k, *sol);
                const OrbitVerification v = verify_orbit(sys, U, eps_next, orb, H_star);
                if (v.pass) {
                    orb.closure_residual = v.closure_residual;
                    br.members.push_back({eps_next, orb, v});
                    cur = orb;
                    eps_cur = eps_next;
                    ok = true;
                }
            }
            if (!ok) {
                step *= 0.5;
                if (step < 1e-8) {
                    br.stalled = true;
                    result.stalled = true;
                    break;
                }
            }
        }
        result.eps_reached = std::max(result.eps_reached, eps_cur);
    }
    return result;
}

LeviCivitaSystem levi_civita_physical(double G, double M, double m, double c, double E) {
    if (!(G > 0.0 && M > 0.0 && m > 0.0 && c > 0.0))
        throw std::invalid_argument("levi_civita_physical: G, M, m, c must be > 0");
    const double mc2 = m * c * c;
    if (!(E > -0.25 * mc2 && E < 0.0))
        throw std::out_of_range("levi_civita_physical: E must lie in (-mc^2/4, 0)");
    LeviCivitaSystem sys;
    sys.m = m;
    sys.kappa = m * G * M + 4.0 * E * G * M / (c * c);
    sys.lambda = 3.0 * G * G * M * M / (c * c);
    return sys;
}

}  // namespace relkep
