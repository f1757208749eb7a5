#include "relkep/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "relkep/dopri5.hpp"
#include "relkep/format.hpp"
#include "relkep/radial.hpp"

namespace relkep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec2 position_of(const std::array<double, 4>& y) { return {y[0], y[1]}; }

CartesianState state_of(const std::array<double, 4>& y) {
    return {{y[0], y[1]}, {y[2], y[3]}};
}

double signed_rotation(const Vec2& a, const Vec2& b) {
    return std::atan2(a.x * b.y - a.y * b.x, dot(a, b));
}

// Angle swept by the position vector between two dense-output times of one
// step. Subdivides until every sub-rotation is safely below pi.
double theta_increment(const detail::DenseBlock<4>& blk, double ta, double tb) {
    int n = 4;
    for (;;) {
        double acc = 0.0;
        bool ok = true;
        Vec2 prev = position_of(blk.eval(ta));
        for (int i = 1; i <= n; ++i) {
            const Vec2 cur = position_of(blk.eval(ta + (tb - ta) * i / n));
            const double d = signed_rotation(prev, cur);
            if (std::abs(d) > 1.0 && n < 4096) {
                ok = false;
                break;
            }
            acc += d;
            prev = cur;
        }
        if (ok) return acc;
        n *= 2;
    }
}

double radial_momentum_of(const std::array<double, 4>& y) {
    const CartesianState s = state_of(y);
    return dot(s.x, s.p) / norm(s.x);
}

// Brent's method on [a, b] with f(a) f(b) <= 0; converges to a few ulps.
template <typename F>
double brent(F&& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a, fc = fa, d = b - a, e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b, b = c, c = a;
            fa = fb, fb = fc, fc = fa;
        }
        const double tol = 2.0 * 1.11e-16 * std::abs(b) + 1e-18;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol || fb == 0.0) return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (xm > 0.0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2) || !(abs_tol > 0.0 && abs_tol <= 1e-2))
        throw std::invalid_argument("IntegratorConfig: tolerances must lie in (0, 1e-2]");
    if (!(max_step > 0.0)) throw std::invalid_argument("IntegratorConfig: max_step must be > 0");
    if (!(r_floor >= 0.0)) throw std::invalid_argument("IntegratorConfig: r_floor must be >= 0");
}

CartesianState Trajectory::node_state(std::size_t i) const {
    return state_of(sol_.states[i]);
}

CartesianState Trajectory::state_at(double t) const { return state_of(sol_.at(t)); }

double Trajectory::theta_at(double t) const {
    if (t == sol_.times.front()) return theta_.front();
    if (t == sol_.times.back()) return theta_.back();
    const std::size_t i = sol_.block_index(t);
    return theta_[i] + theta_increment(sol_.blocks[i], sol_.times[i], t);
}

double Trajectory::radial_momentum_at(double t) const {
    return radial_momentum_of(sol_.at(t));
}

Trajectory integrate(const SystemSpec& sys, const CartesianState& s0, double t_end,
                     double eps, const PerturbationSpec& U, const IntegratorConfig& cfg) {
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be > 0");
    const std::array<double, 4> y0{s0.x.x, s0.x.y, s0.p.x, s0.p.y};

    auto rhs = [&](double t, const std::array<double, 4>& y, std::array<double, 4>& dy) {
        const CartesianState s = state_of(y);
        const double r = norm(s.x);
        if (r < cfg.r_floor) throw CollisionError(t, r);
        const PhaseVelocity f = vector_field(sys, s, eps, U, 0.0);
        dy = {f.xdot.x, f.xdot.y, f.pdot.x, f.pdot.y};
    };

    Trajectory traj;
    traj.sol_ = detail::dopri5<4>(rhs, y0, 0.0, t_end, cfg);

    traj.theta_.resize(traj.sol_.times.size());
    traj.theta_[0] = std::atan2(s0.x.y, s0.x.x);
    for (std::size_t i = 0; i + 1 < traj.sol_.times.size(); ++i)
        traj.theta_[i + 1] =
            traj.theta_[i] + theta_increment(traj.sol_.blocks[i], traj.sol_.times[i],
                                             traj.sol_.times[i + 1]);
    return traj;
}

double refine_pericenter_time(const Trajectory& traj, double t_lo, double t_hi) {
    auto g = [&](double t) { return traj.radial_momentum_at(t); };
    const double ga = g(t_lo), gb = g(t_hi);
    if (ga * gb > 0.0)
        throw SectionError("refine_pericenter_time: no sign change over the bracket");
    return brent(g, t_lo, t_hi, ga, gb);
}

std::vector<SectionCrossing> section_crossings(const Trajectory& traj, int count) {
    if (count < 1) throw std::invalid_argument("section_crossings: count must be >= 1");

    double g_max = 0.0, p_scale = 0.0;
    for (std::size_t i = 0; i < traj.n_nodes(); ++i) {
        const CartesianState s = traj.node_state(i);
        g_max = std::max(g_max, std::abs(dot(s.x, s.p)) / norm(s.x));
        p_scale = std::max(p_scale, norm(s.p));
    }
    if (g_max < 1e-8 * std::max(1.0, p_scale))
        throw SectionError("section_crossings: p_r vanishes along the trajectory "
                           "(circular orbit, no transversal section)");

    std::vector<SectionCrossing> out;
    const auto& times = traj.times();
    constexpr int kSub = 4;
    double t_prev = times.front();
    double g_prev = traj.radial_momentum_at(t_prev);
    for (std::size_t i = 0; i + 1 < times.size() && out.size() < static_cast<std::size_t>(count); ++i) {
        for (int j = 1; j <= kSub; ++j) {
            const double t = times[i] + (times[i + 1] - times[i]) * j / kSub;
            const double gv = traj.radial_momentum_at(t);
            if (g_prev <= 0.0 && gv > 0.0) {
                const double tc = (g_prev == 0.0) ? t_prev : brent(
                    [&](double tt) { return traj.radial_momentum_at(tt); }, t_prev, t, g_prev, gv);
                if (out.empty() || tc - out.back().t > 1e-9 * (traj.t_end() - traj.t_begin()))
                    out.push_back({tc, traj.state_at(tc)});
                if (out.size() == static_cast<std::size_t>(count)) break;
            }
            t_prev = t;
            g_prev = gv;
        }
    }
    if (out.size() < static_cast<std::size_t>(count))
        throw SectionError("section_crossings: only " + std::to_string(out.size()) +
                           " of " + std::to_string(count) + " pericenter passages found");
    return out;
}

WindingResult winding_number(const Trajectory& traj, double t0, double t1,
                             bool assert_periodic) {
    if (!(t0 < t1)) throw std::invalid_argument("winding_number: need t0 < t1");
    const double raw = (traj.theta_at(t1) - traj.theta_at(t0)) / kTwoPi;
    const long k = std::lround(raw);
    if (assert_periodic && std::abs(raw - static_cast<double>(k)) > 0.05)
        throw ConvergenceError("winding_number: " + std::to_string(raw) +
                               " is not within 0.05 of an integer");
    return {raw, k};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const SystemSpec& sys, double eps, const PerturbationSpec& U) {
    os << "t,x1,x2,p1,p2,r,theta_unwrapped,H,L\n";
    for (std::size_t i = 0; i < traj.n_nodes(); ++i) {
        const CartesianState s = traj.node_state(i);
        const double H = hamiltonian(sys, s, eps, U);
        const double L = is_levi_civita(sys)
                             ? angular_momentum(s) / std::get<LeviCivitaSystem>(sys).m
                             : angular_momentum(s);
        os << format_double(traj.times()[i]) << ',' << format_double(s.x.x) << ','
           << format_double(s.x.y) << ',' << format_double(s.p.x) << ','
           << format_double(s.p.y) << ',' << format_double(norm(s.x)) << ','
           << format_double(traj.node_theta(i)) << ',' << format_double(H) << ','
           << format_double(L) << '\n';
    }
}

}  // namespace relkep
