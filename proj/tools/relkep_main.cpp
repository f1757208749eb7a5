#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "relkep/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"relkep: periodic-orbit toolkit for two relativistic Kepler systems"};
    app.require_subcommand(1);

    std::string config_path;
    relkep::CommandOptions opts;
    std::string out_dir;
    double tol = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON, schema 1)")
            ->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--tol", tol, "tolerance override for configured assertions");
        sub->add_option("--jobs", opts.jobs, "worker threads for seeds/grid cells")
            ->check(CLI::PositiveNumber);
        return sub;
    };

    using Cmd = std::function<int(const relkep::ExperimentConfig&, const relkep::CommandOptions&)>;
    struct Entry {
        CLI::App* sub;
        Cmd run;
    };
    std::vector<Entry> entries{
        {add_common(app.add_subcommand("verify", "closed forms vs quadrature oracles")),
         relkep::cmd_verify},
        {add_common(app.add_subcommand("nondeg", "isoenergetic non-degeneracy scan")),
         relkep::cmd_nondeg},
        {add_common(app.add_subcommand("resonance", "resonant tori for the requested winding classes")),
         relkep::cmd_resonance},
        {add_common(app.add_subcommand("find-orbits", "prescribed-energy periodic orbit search")),
         relkep::cmd_find_orbits},
        {add_common(app.add_subcommand("continue", "continuation of orbit branches in eps")),
         relkep::cmd_continue},
    };

    CLI11_PARSE(app, argc, argv);

    try {
        const relkep::ExperimentConfig cfg = relkep::load_config(config_path);
        if (!out_dir.empty()) opts.out_dir = out_dir;
        if (tol > 0.0) opts.tol = tol;
        for (const auto& e : entries)
            if (e.sub->parsed()) return e.run(cfg, opts);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "relkep: " << e.what() << '\n';
        return 2;
    }
}
