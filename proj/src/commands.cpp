#include "relkep/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <vector>

#include "relkep/actionangle.hpp"
#include "relkep/format.hpp"
#include "relkep/orbits.hpp"
#include "relkep/radial.hpp"

namespace relkep {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("RELKEP_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "quiet" || v == "error") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[relkep] " << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[relkep:debug] " << msg << '\n';
}

struct Resolved {
    fs::path out_dir;
    double tol;
    int jobs;
};

Resolved resolve(const ExperimentConfig& cfg, const CommandOptions& opts) {
    Resolved r;
    r.out_dir = opts.out_dir.value_or(cfg.out_dir);
    r.tol = opts.tol.value_or(cfg.tol);
    r.jobs = std::max(1, opts.jobs);
    fs::create_directories(r.out_dir);
    return r;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path.string());
    return os;
}

std::vector<EnergyMomentum> build_grid(const SystemSpec& sys, const GridSpec& g) {
    std::vector<EnergyMomentum> cells;
    for (int i = 0; i < g.n_H; ++i) {
        const double H = g.n_H == 1
                             ? g.H_min
                             : g.H_min + (g.H_max - g.H_min) * i / (g.n_H - 1);
        const auto [L_lo, L_hi] = admissible_L_range(sys, H);
        for (int jj = 0; jj < g.n_L; ++jj) {
            const double t =
                g.n_L == 1 ? 0.5 : g.margin + (1.0 - 2.0 * g.margin) * jj / (g.n_L - 1);
            cells.push_back({H, L_lo + (L_hi - L_lo) * t});
        }
    }
    return cells;
}

double rel_err(double closed, double quad) {
    return std::abs(closed - quad) / std::max(std::abs(quad), 1e-300);
}

int resolved_k(const ExperimentConfig& cfg, const SystemSpec& sys, double H_star) {
    if (cfg.k) return *cfg.k;
    return winding_floor(sys, H_star) + 1;
}

double require_H_star(const ExperimentConfig& cfg) {
    if (!cfg.H_star) throw std::invalid_argument("config field 'H_star': missing");
    return *cfg.H_star;
}

json orbit_record(const SystemSpec& sys, double H_star, const PeriodicOrbit& orb,
                  const OrbitVerification& v) {
    return json{{"family", family_name(sys)},
                {"H_star", H_star},
                {"k", orb.k},
                {"eps", orb.eps},
                {"tau", orb.tau},
                {"winding", v.winding},
                {"s0", {orb.s0.x.x, orb.s0.x.y, orb.s0.p.x, orb.s0.p.y}},
                {"residuals", {{"closure", v.closure_residual}, {"energy", v.max_energy_dev}}},
                {"minimal", v.minimal}};
}

}  // namespace

int cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opts) {
    const Resolved r = resolve(cfg, opts);
    const auto cells = build_grid(cfg.system, cfg.grid);
    const bool lc = is_levi_civita(cfg.system);

    std::ostringstream csv;
    csv << "family,H,L,T_closed,T_quad,Theta_closed,Theta_quad,A_closed,A_quad,rel_err_max\n";
    double worst = 0.0;
    for (const auto& em : cells) {
        const double Tc = radial_period_closed(cfg.system, em);
        const double Tq = radial_period_quadrature(cfg.system, em);
        const double Hc = apsidal_angle_closed(cfg.system, em);
        const double Hq = apsidal_angle_quadrature(cfg.system, em);
        const double Aq = area_quadrature(cfg.system, em);
        double err = std::max(rel_err(Tc, Tq), rel_err(Hc, Hq));
        std::string a_closed = "nan";
        if (lc) {
            const double Ac = area_closed(std::get<LeviCivitaSystem>(cfg.system), em);
            err = std::max(err, rel_err(Ac, Aq));
            a_closed = format_double(Ac);
        }
        worst = std::max(worst, err);
        csv << family_name(cfg.system) << ',' << format_double(em.H) << ','
            << format_double(em.L) << ',' << format_double(Tc) << ',' << format_double(Tq)
            << ',' << format_double(Hc) << ',' << format_double(Hq) << ',' << a_closed << ','
            << format_double(Aq) << ',' << format_double(err) << '\n';
    }

    const fs::path out = r.out_dir / "verify.csv";
    open_out(out) << csv.str();
    log_info("verify: " + std::to_string(cells.size()) + " cells, max rel err " +
             format_double(worst) + " -> " + out.string());

    int status = worst <= r.tol ? 0 : 1;
    if (cfg.golden) {
        std::ifstream g(*cfg.golden, std::ios::binary);
        if (!g) throw std::runtime_error("cannot open golden file: " + *cfg.golden);
        std::ostringstream gs;
        gs << g.rdbuf();
        if (gs.str() != csv.str()) {
            log_info("verify: output differs from golden file " + *cfg.golden);
            status = 1;
        }
    }
    return status;
}

int cmd_nondeg(const ExperimentConfig& cfg, const CommandOptions& opts) {
    const Resolved r = resolve(cfg, opts);
    const auto cells = build_grid(cfg.system, cfg.grid);

    std::ostringstream csv;
    csv << "family,H,L,I1,I2,grad1,grad2,det_hess,trace_hess,bordered_det,quadratic_form,"
           "fd_error\n";
    bool degenerate = false;
    double qf_sign = 0.0;
    for (const auto& em : cells) {
        const ActionPair I = actions_from_hl(cfg.system, em);
        const NondegeneracyReport rep = isoenergetic_nondegeneracy(cfg.system, I);
        if (std::abs(rep.quadratic_form) <= 1e3 * rep.fd_error) degenerate = true;
        if (qf_sign == 0.0)
            qf_sign = rep.quadratic_form > 0.0 ? 1.0 : -1.0;
        else if (qf_sign * rep.quadratic_form <= 0.0)
            degenerate = true;  // sign change across the grid
        csv << family_name(cfg.system) << ',' << format_double(em.H) << ','
            << format_double(em.L) << ',' << format_double(I.I1) << ',' << format_double(I.I2)
            << ',' << format_double(rep.grad1) << ',' << format_double(rep.grad2) << ','
            << format_double(rep.hessian.det()) << ',' << format_double(rep.hessian.trace())
            << ',' << format_double(rep.bordered_det) << ','
            << format_double(rep.quadratic_form) << ',' << format_double(rep.fd_error) << '\n';
    }

    const fs::path out = r.out_dir / "nondeg.csv";
    open_out(out) << csv.str();
    log_info(std::string("nondeg: ") + (degenerate ? "NEAR-DEGENERATE cells found" : "nondegenerate") +
             " on " + std::to_string(cells.size()) + " cells -> " + out.string());
    return degenerate ? 1 : 0;
}

int cmd_resonance(const ExperimentConfig& cfg, const CommandOptions& opts) {
    const Resolved r = resolve(cfg, opts);
    const double H_star = require_H_star(cfg);
    const int N = cfg.N.value_or(cfg.k ? 0 : 1);
    const int floor_k = winding_floor(cfg.system, H_star);

    std::vector<int> ks;
    if (cfg.k) ks.push_back(*cfg.k);
    for (int j = 1; j <= N; ++j) ks.push_back(floor_k + j);

    std::ostringstream csv;
    csv << "family,H_star,j,k,L,Theta_over_2pi,T,I1,I2\n";
    for (std::size_t idx = 0; idx < ks.size(); ++idx) {
        const TorusSeed seed = solve_resonant_L(cfg.system, H_star, ks[idx]);
        const ActionPair I = actions_from_hl(cfg.system, seed.em);
        csv << family_name(cfg.system) << ',' << format_double(H_star) << ',' << idx + 1 << ','
            << seed.k << ',' << format_double(seed.em.L) << ','
            << format_double(seed.Theta / (2.0 * std::numbers::pi)) << ','
            << format_double(seed.T) << ',' << format_double(I.I1) << ','
            << format_double(I.I2) << '\n';
    }
    const fs::path out = r.out_dir / "resonance.csv";
    open_out(out) << csv.str();
    log_info("resonance: " + std::to_string(ks.size()) + " classes -> " + out.string());
    return 0;
}

int cmd_find_orbits(const ExperimentConfig& cfg, const CommandOptions& opts) {
    const Resolved r = resolve(cfg, opts);
    const double H_star = require_H_star(cfg);
    if (!cfg.eps) throw std::invalid_argument("config field 'eps': missing");
    const int floor_k = winding_floor(cfg.system, H_star);

    std::vector<int> ks;
    if (cfg.N) {
        for (int j = 1; j <= *cfg.N; ++j) ks.push_back(floor_k + j);  // N = 0 -> empty run
    } else if (cfg.k) {
        ks.push_back(*cfg.k);
    } else {
        throw std::invalid_argument("config field 'N' or 'k': one is required for find-orbits");
    }

    ShootingOptions sopts;
    sopts.n_seeds = cfg.n_seeds;

    json records = json::array();
    bool enough_everywhere = true;
    for (int k : ks) {
        const OrbitSearchResult res = find_prescribed_energy_orbits(
            cfg.system, cfg.perturbation, *cfg.eps, H_star, k, sopts, r.jobs);
        log_debug("k=" + std::to_string(k) + ": " + std::to_string(res.converged) +
                  " converged, " + std::to_string(res.orbits.size()) + " verified distinct");
        if (res.orbits.size() < 2) enough_everywhere = false;
        int idx = 0;
        for (const auto& orb : res.orbits) {
            const OrbitVerification v =
                verify_orbit(cfg.system, cfg.perturbation, orb.eps, orb, H_star);
            records.push_back(orbit_record(cfg.system, H_star, orb, v));
            if (cfg.emit_trajectories) {
                const Trajectory traj =
                    integrate(cfg.system, orb.s0, orb.tau, orb.eps, cfg.perturbation);
                auto os = open_out(r.out_dir / ("orbit_k" + std::to_string(k) + "_" +
                                                std::to_string(idx) + ".csv"));
                write_trajectory_csv(os, traj, cfg.system, orb.eps, cfg.perturbation);
            }
            ++idx;
        }
    }

    const fs::path out = r.out_dir / "orbits.json";
    open_out(out) << records.dump(2) << '\n';
    log_info("find-orbits: " + std::to_string(records.size()) + " orbits -> " + out.string());
    return enough_everywhere ? 0 : 1;
}

int cmd_continue(const ExperimentConfig& cfg, const CommandOptions& opts) {
    const Resolved r = resolve(cfg, opts);
    const double H_star = require_H_star(cfg);
    if (!cfg.eps_max) throw std::invalid_argument("config field 'eps_max': missing");
    const int k = resolved_k(cfg, cfg.system, H_star);

    ShootingOptions sopts;
    sopts.n_seeds = cfg.n_seeds;

    const ContinuationResult res = continuation_in_epsilon(
        cfg.system, cfg.perturbation, H_star, k, *cfg.eps_max, cfg.steps, sopts, r.jobs);

    std::ostringstream csv;
    csv << "eps,tau,branch_id\n";
    json branches = json::array();
    for (const auto& br : res.branches) {
        json members = json::array();
        for (const auto& mem : br.members) {
            csv << format_double(mem.eps) << ',' << format_double(mem.orbit.tau) << ','
                << br.branch_id << '\n';
            json rec = orbit_record(cfg.system, H_star, mem.orbit, mem.verification);
            members.push_back(std::move(rec));
        }
        branches.push_back(json{{"branch_id", br.branch_id},
                                {"stalled", br.stalled},
                                {"members", std::move(members)}});
    }
    const json doc{{"schema", 1},
                   {"family", family_name(cfg.system)},
                   {"H_star", H_star},
                   {"k", k},
                   {"eps_max", *cfg.eps_max},
                   {"steps", cfg.steps},
                   {"eps_reached", res.eps_reached},
                   {"stalled", res.stalled},
                   {"branches", std::move(branches)}};

    open_out(r.out_dir / "continue.csv") << csv.str();
    open_out(r.out_dir / "continue.json") << doc.dump(2) << '\n';
    log_info("continue: " + std::to_string(res.branches.size()) + " branches to eps " +
             format_double(res.eps_reached) + (res.stalled ? " (stalled)" : ""));
    return res.stalled ? 1 : 0;
}

}  // namespace relkep
