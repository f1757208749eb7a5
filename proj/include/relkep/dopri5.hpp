#pragma once

// Dormand-Prince 5(4) stepper with PI step-size control and dense output.
// Tableau, error weights, dense coefficients and the controller constants
// follow Hairer-Norsett-Wanner's DOPRI5.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>

#include "relkep/flow.hpp"

namespace relkep::detail {

template <std::size_t N>
std::size_t OdeSolution<N>::block_index(double t) const {
    const double lo = times.front(), hi = times.back();
    const double slack = 1e-9 * (std::abs(hi - lo) + std::abs(hi));
    if (t < lo - slack || t > hi + slack)
        throw std::out_of_range("dense evaluation outside the integrated span");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = (it == times.begin()) ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    return std::min(i, blocks.size() - 1);
}

template <std::size_t N>
std::array<double, N> OdeSolution<N>::at(double t) const {
    if (t == times.front()) return states.front();
    if (t == times.back()) return states.back();
    return blocks[block_index(t)].eval(t);
}

template <std::size_t N, typename RHS>
OdeSolution<N> dopri5(RHS&& rhs, const std::array<double, N>& y0, double t0,
                      double t1, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0)) throw std::invalid_argument("dopri5: t1 must exceed t0");

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;

    using V = std::array<double, N>;
    auto axpy = [](V& out, const V& base, double h,
                   std::initializer_list<std::pair<double, const V*>> terms) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (const auto& [coef, k] : terms) acc += coef * (*k)[i];
            out[i] = base[i] + h * acc;
        }
    };

    OdeSolution<N> sol;
    V y = y0;
    double t = t0;
    V k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    rhs(t, y, k1);

    auto sc_norm = [&](const V& v, const V& yref) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(yref[i]);
            const double q = v[i] / sc;
            s += q * q;
        }
        return std::sqrt(s / N);
    };
    double h;
    {
        const double d0 = sc_norm(y, y), dn1 = sc_norm(k1, y);
        double h0 = (d0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * d0 / dn1;
        h0 = std::min(h0, t1 - t0);
        axpy(ytmp, y, h0, {{1.0, &k1}});
        rhs(t + h0, ytmp, k2);
        V df;
        for (std::size_t i = 0; i < N; ++i) df[i] = k2[i] - k1[i];
        const double d2 = sc_norm(df, y) / h0;
        double h1;
        if (std::max(dn1, d2) <= 1e-15)
            h1 = std::max(1e-6, h0 * 1e-3);
        else
            h1 = std::pow(0.01 / std::max(dn1, d2), 0.2);
        h = std::min({100.0 * h0, h1, t1 - t0, cfg.max_step});
    }

    sol.times.push_back(t);
    sol.states.push_back(y);

    double facold = 1e-4;
    bool rejected = false;
    bool last = false;
    const double expo1 = 0.2 - 0.04 * 0.75;
    constexpr std::size_t kMaxSteps = 100'000'000;

    for (std::size_t step = 0; step < kMaxSteps;) {
        if (t + 1.01 * h >= t1) {
            h = t1 - t;
            last = true;
            if (!(h > 0.0)) return sol;
        }
        if (!(h > std::abs(t) * 1e-14 + 1e-300))
            throw StepUnderflowError("dopri5: step size underflow at t = " + std::to_string(t));

        axpy(ytmp, y, h, {{a21, &k1}});
        rhs(t + c2 * h, ytmp, k2);
        axpy(ytmp, y, h, {{a31, &k1}, {a32, &k2}});
        rhs(t + c3 * h, ytmp, k3);
        axpy(ytmp, y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        rhs(t + c4 * h, ytmp, k4);
        axpy(ytmp, y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        rhs(t + c5 * h, ytmp, k5);
        axpy(ytmp, y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        rhs(t + h, ytmp, k6);
        axpy(ynew, y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        rhs(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / N);

        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, 0.04);
        fac = std::max(0.1, std::min(5.0, fac / 0.9));
        double hnew = h / fac;

        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            DenseBlock<N> blk;
            blk.t0 = t;
            blk.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                blk.rcont[0][i] = y[i];
                blk.rcont[1][i] = ydiff;
                blk.rcont[2][i] = bspl;
                blk.rcont[3][i] = ydiff - h * k7[i] - bspl;
                blk.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] +
                                       d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            sol.blocks.push_back(blk);
            t = last ? t1 : t + h;
            y = ynew;
            k1 = k7;  // first-same-as-last
            sol.times.push_back(t);
            sol.states.push_back(y);
            ++step;
            if (last) return sol;
            if (rejected) hnew = std::min(hnew, h);
            rejected = false;
        } else {
            hnew = h / std::min(10.0, fac11 / 0.9);
            rejected = true;
            last = false;
        }
        h = std::min(hnew, cfg.max_step);
    }
    throw ConvergenceError("dopri5: step budget exhausted");
}

}  // namespace relkep::detail
