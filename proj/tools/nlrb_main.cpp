// nlrb: command-line harness for the nonlocal / fractional-Laplace reduced
// basis studies.
//
// Usage:
//   nlrb <subcommand> [--config cfg.json] [--out dir] [--seed u64] [--mesh-exp k]
//
// Subcommands:
//   snapshots     solution curves over delta (fixed s) and over s (infinite range)
//   affine-delta  pointwise/max errors of the affine-in-delta surrogate vs K
//   affine-s      max error of the regularized Chebyshev surrogate vs M
//   rb            greedy reduced-basis convergence for both parameters
//   validate      run the library property checks (nonzero exit on failure)
//
// Exit codes: 0 ok, 1 check failure, 2 configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "nlrb/study.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nonlocal / fractional-Laplace reduced basis studies"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string anchors_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int mesh_exp = 0;
    bool mesh_exp_set = false;

    app.add_option("--config", config_path, "study configuration (JSON)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides config)");
    auto* mesh_opt =
        app.add_option("--mesh-exp", mesh_exp, "use n_el = 2^k elements (overrides config)");

    auto* sub_snap = app.add_subcommand("snapshots", "solution snapshots");
    auto* sub_ad = app.add_subcommand("affine-delta", "affine-in-delta convergence study");
    auto* sub_as = app.add_subcommand("affine-s", "affine-in-s convergence study");
    auto* sub_rb = app.add_subcommand("rb", "reduced-basis convergence study");
    auto* sub_val = app.add_subcommand("validate", "run property checks");
    sub_val->add_option("--anchors", anchors_dir, "verify an existing anchor cache directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    seed_set = seed_opt->count() > 0;
    mesh_exp_set = mesh_opt->count() > 0;

    try {
        nlrb::StudyConfig cfg = nlrb::load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!anchors_dir.empty()) cfg.anchors_dir = anchors_dir;
        if (seed_set) cfg.seed = seed;
        if (mesh_exp_set) {
            if (mesh_exp < 1 || mesh_exp > 14) throw nlrb::ConfigError("--mesh-exp out of range");
            cfg.n_el = 1 << mesh_exp;
            if (mesh_exp > 7)
                std::cerr << "warning: n_el = 2^" << mesh_exp
                          << " is beyond the desk-scale default; studies will be slow\n";
        }
        cfg.validate();

        if (*sub_snap) return nlrb::cmd_snapshots(cfg);
        if (*sub_ad) return nlrb::cmd_affine_delta_study(cfg);
        if (*sub_as) return nlrb::cmd_affine_s_study(cfg);
        if (*sub_rb) return nlrb::cmd_rb_study(cfg);
        if (*sub_val) return nlrb::cmd_validate(cfg);
        return 2;
    } catch (const nlrb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
