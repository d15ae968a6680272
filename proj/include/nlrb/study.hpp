#ifndef NLRB_STUDY_HPP
#define NLRB_STUDY_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlrb/rb.hpp"

namespace nlrb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Declarative study configuration (JSON on disk; see README for the schema).
struct StudyConfig {
    // mesh
    double a = 0.0;
    double b = 1.0;
    int n_el = 128;

    // kernel / parameter domains
    double s_fixed = 0.5;       ///< fixed s for delta studies
    double delta_fixed = 0.25;  ///< fixed delta for s studies
    double delta_min = 0.0625;
    double delta_max = 1.0;
    double delta_prime = 1.0;  ///< splitting radius for infinite-range solves
    double s_min = 1.0 / 3.0;
    double s_max = 0.5;

    // affine approximation studies
    std::vector<int> K_list{5, 9, 16, 31, 61};
    std::vector<int> M_list{2, 4, 8, 16};
    double eps = 0.0;
    RhoRule rho_rule = RhoRule::sigma_scaled;
    std::optional<double> rho_override;

    // training / test sets
    int train_delta_count = 121;
    int train_s_count = 50;
    int test_delta_count = 100;
    int test_s_count = 30;
    std::uint64_t seed = 20250809;

    // greedy
    int N_max = 20;
    double tol = 1e-10;
    GreedyCriterion criterion = GreedyCriterion::true_error;
    DeltaCase rb_case = DeltaCase::case2;
    std::vector<int> rb_K_list{5, 16, 61};
    std::vector<int> rb_M_list{4, 8, 16, 64};
    bool save_models = true;
    bool use_discrete_eta = false;  ///< flagged surrogate in reports

    // snapshots command
    std::vector<double> snapshot_deltas{0.0625, 0.25, 1.0};
    std::vector<double> snapshot_s{0.2, 0.35, 0.5, 0.8};
    std::string snapshot_load = "chi_right_half";
    std::string study_load = "minus_one";

    std::string out_dir = "out";
    std::string anchors_dir;  ///< validate: verify this offline cache instead of writing one

    QuadratureConfig quad;

    Mesh1D mesh() const { return build_mesh(a, b, n_el); }
    void validate() const;
};

StudyConfig load_config(const std::string& path);
std::string config_echo(const StudyConfig& cfg);

/// Seeded generator with a portable uniform mapping, so identical seeds give
/// byte-identical CSVs everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double lo, double hi) {
        const std::uint64_t x = eng_();
        return lo + (hi - lo) * ((x >> 11) * 0x1.0p-53);
    }

private:
    std::mt19937_64 eng_;
};

struct RunReport {
    std::string command;
    std::string config;
    std::vector<std::pair<std::string, int>> files;   // path, row count
    std::vector<std::pair<std::string, bool>> checks;  // name, passed
    std::vector<std::pair<std::string, double>> timings;
    std::vector<std::string> notes;

    bool all_passed() const;
    void add_file(const std::string& path, int rows) { files.emplace_back(path, rows); }
    void write(const std::string& path) const;
};

/// Load families for the data term F.
struct LoadSpec {
    std::function<double(double)> f;
    std::vector<double> jumps;
};
LoadSpec make_load(const std::string& name);

// Subcommands. Each writes CSVs plus a run report under cfg.out_dir and
// returns 0 on success, 1 when a check fails.
int cmd_snapshots(const StudyConfig& cfg);
int cmd_affine_delta_study(const StudyConfig& cfg);
int cmd_affine_s_study(const StudyConfig& cfg);
int cmd_rb_study(const StudyConfig& cfg);
int cmd_validate(const StudyConfig& cfg);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nlrb

#endif
