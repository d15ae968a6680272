#include "nlrb/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "nlrb/io.hpp"
#include "nlrb/nonlocal.hpp"

namespace nlrb {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

template <typename F>
void parallel_for(int n, F&& body) {
    std::exception_ptr err;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::vector<double> uniform_grid(double lo, double hi, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
    return g;
}

std::string out_path(const StudyConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void finish_report(const StudyConfig& cfg, RunReport& rep, const std::string& name) {
    rep.config = config_echo(cfg);
    rep.write(out_path(cfg, name));
}

}  // namespace

void StudyConfig::validate() const {
    if (!(a < b)) throw ConfigError("config: mesh requires a < b");
    if (n_el < 2) throw ConfigError("config: n_el must be >= 2");
    if (!(s_fixed > 0.0 && s_fixed < 1.0)) throw ConfigError("config: s_fixed outside (0,1)");
    if (!(0.0 < s_min && s_min < s_max && s_max < 1.0))
        throw ConfigError("config: need 0 < s_min < s_max < 1");
    if (!(0.0 < delta_min && delta_min < delta_max))
        throw ConfigError("config: need 0 < delta_min < delta_max");
    if (!(delta_fixed > 0.0)) throw ConfigError("config: delta_fixed must be positive");
    if (delta_prime < b - a) throw ConfigError("config: delta_prime must be >= diam(Omega)");
    if (train_delta_count < 2 || train_s_count < 2 || test_delta_count < 1 || test_s_count < 1)
        throw ConfigError("config: training/test counts too small");
    if (N_max < 1) throw ConfigError("config: greedy N_max must be >= 1");
    for (int k : K_list)
        if (k < 1) throw ConfigError("config: K values must be >= 1");
    for (int m : M_list)
        if (m < 1) throw ConfigError("config: M values must be >= 1");
    quad.validate();
}

LoadSpec make_load(const std::string& name) {
    if (name == "minus_one") return {[](double) { return -1.0; }, {}};
    if (name == "one") return {[](double) { return 1.0; }, {}};
    if (name == "chi_right_half") return {[](double x) { return x >= 0.5 ? 1.0 : 0.0; }, {0.5}};
    throw ConfigError("config: unknown load '" + name + "'");
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

StudyConfig load_config(const std::string& path) {
    StudyConfig cfg;
    if (path.empty()) {
        cfg.validate();
        return cfg;
    }
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    try {
        if (j.contains("mesh")) {
            maybe(j["mesh"], "a", cfg.a);
            maybe(j["mesh"], "b", cfg.b);
            maybe(j["mesh"], "n_el", cfg.n_el);
        }
        if (j.contains("kernel")) {
            const json& k = j["kernel"];
            maybe(k, "s_fixed", cfg.s_fixed);
            maybe(k, "delta_fixed", cfg.delta_fixed);
            maybe(k, "delta_min", cfg.delta_min);
            maybe(k, "delta_max", cfg.delta_max);
            maybe(k, "delta_prime", cfg.delta_prime);
            maybe(k, "s_min", cfg.s_min);
            maybe(k, "s_max", cfg.s_max);
        }
        if (j.contains("partition")) maybe(j["partition"], "K_list", cfg.K_list);
        if (j.contains("sgrid")) {
            const json& s = j["sgrid"];
            maybe(s, "M_list", cfg.M_list);
            maybe(s, "eps", cfg.eps);
            if (s.contains("rho_rule")) {
                const std::string r = s["rho_rule"].get<std::string>();
                if (r == "sigma")
                    cfg.rho_rule = RhoRule::sigma_scaled;
                else if (r == "plain")
                    cfg.rho_rule = RhoRule::plain;
                else
                    throw ConfigError("config: rho_rule must be 'sigma' or 'plain'");
            }
            if (s.contains("rho_override")) cfg.rho_override = s["rho_override"].get<double>();
        }
        if (j.contains("training")) {
            maybe(j["training"], "delta_count", cfg.train_delta_count);
            maybe(j["training"], "s_count", cfg.train_s_count);
        }
        if (j.contains("test")) {
            maybe(j["test"], "delta_count", cfg.test_delta_count);
            maybe(j["test"], "s_count", cfg.test_s_count);
            maybe(j["test"], "seed", cfg.seed);
        }
        if (j.contains("greedy")) {
            const json& g = j["greedy"];
            maybe(g, "N_max", cfg.N_max);
            maybe(g, "tol", cfg.tol);
            if (g.contains("criterion")) {
                const std::string c = g["criterion"].get<std::string>();
                if (c == "true_error")
                    cfg.criterion = GreedyCriterion::true_error;
                else if (c == "estimator")
                    cfg.criterion = GreedyCriterion::estimator;
                else
                    throw ConfigError("config: criterion must be 'true_error' or 'estimator'");
            }
            if (g.contains("case")) {
                const std::string c = g["case"].get<std::string>();
                if (c == "case1")
                    cfg.rb_case = DeltaCase::case1;
                else if (c == "case2")
                    cfg.rb_case = DeltaCase::case2;
                else
                    throw ConfigError("config: case must be 'case1' or 'case2'");
            }
            maybe(g, "K_list", cfg.rb_K_list);
            maybe(g, "M_list", cfg.rb_M_list);
            maybe(g, "save_models", cfg.save_models);
            maybe(g, "discrete_eta", cfg.use_discrete_eta);
        }
        if (j.contains("snapshots")) {
            maybe(j["snapshots"], "deltas", cfg.snapshot_deltas);
            maybe(j["snapshots"], "s_values", cfg.snapshot_s);
            maybe(j["snapshots"], "load", cfg.snapshot_load);
        }
        maybe(j, "study_load", cfg.study_load);
        if (j.contains("output")) maybe(j["output"], "dir", cfg.out_dir);
        if (j.contains("quadrature")) {
            maybe(j["quadrature"], "outer_order", cfg.quad.outer_order);
            maybe(j["quadrature"], "singular_split_levels", cfg.quad.singular_split_levels);
            maybe(j["quadrature"], "oracle_tol", cfg.quad.oracle_tol);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string config_echo(const StudyConfig& cfg) {
    json j;
    j["mesh"] = {{"a", cfg.a}, {"b", cfg.b}, {"n_el", cfg.n_el}};
    j["kernel"] = {{"s_fixed", cfg.s_fixed},       {"delta_fixed", cfg.delta_fixed},
                   {"delta_min", cfg.delta_min},   {"delta_max", cfg.delta_max},
                   {"delta_prime", cfg.delta_prime}, {"s_min", cfg.s_min},
                   {"s_max", cfg.s_max}};
    j["partition"] = {{"K_list", cfg.K_list}};
    j["sgrid"] = {{"M_list", cfg.M_list},
                  {"eps", cfg.eps},
                  {"rho_rule", cfg.rho_rule == RhoRule::sigma_scaled ? "sigma" : "plain"}};
    if (cfg.rho_override) j["sgrid"]["rho_override"] = *cfg.rho_override;
    j["training"] = {{"delta_count", cfg.train_delta_count}, {"s_count", cfg.train_s_count}};
    j["test"] = {{"delta_count", cfg.test_delta_count},
                 {"s_count", cfg.test_s_count},
                 {"seed", cfg.seed}};
    j["greedy"] = {{"N_max", cfg.N_max},
                   {"tol", cfg.tol},
                   {"criterion", cfg.criterion == GreedyCriterion::true_error ? "true_error"
                                                                              : "estimator"},
                   {"case", cfg.rb_case == DeltaCase::case1 ? "case1" : "case2"},
                   {"K_list", cfg.rb_K_list},
                   {"M_list", cfg.rb_M_list},
                   {"save_models", cfg.save_models},
                   {"discrete_eta", cfg.use_discrete_eta}};
    j["snapshots"] = {{"deltas", cfg.snapshot_deltas},
                      {"s_values", cfg.snapshot_s},
                      {"load", cfg.snapshot_load}};
    j["study_load"] = cfg.study_load;
    j["output"] = {{"dir", cfg.out_dir}};
    j["quadrature"] = {{"outer_order", cfg.quad.outer_order},
                       {"singular_split_levels", cfg.quad.singular_split_levels},
                       {"oracle_tol", cfg.quad.oracle_tol}};
    return j.dump(2);
}

bool RunReport::all_passed() const {
    for (const auto& [name, ok] : checks)
        if (!ok) return false;
    return true;
}

void RunReport::write(const std::string& path) const {
    std::ofstream os(path);
    os << "command: " << command << "\n\n";
    os << "files:\n";
    for (const auto& [f, rows] : files) os << "  " << f << "  (" << rows << " rows)\n";
    if (!checks.empty()) {
        os << "\nchecks:\n";
        for (const auto& [name, ok] : checks) os << "  " << (ok ? "PASS " : "FAIL ") << name << '\n';
    }
    if (!timings.empty()) {
        os << "\ntimings (s):\n";
        for (const auto& [name, t] : timings) os << "  " << name << ": " << t << '\n';
    }
    if (!notes.empty()) {
        os << "\nnotes:\n";
        for (const auto& n : notes) os << "  " << n << '\n';
    }
    os << "\nconfig:\n" << config << '\n';
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope: need at least two points");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- snapshots ---------------------------------------------------------------

int cmd_snapshots(const StudyConfig& cfg) {
    if (cfg.snapshot_deltas.empty() || cfg.snapshot_s.empty())
        throw ConfigError("snapshots: empty parameter list");
    Timer timer;
    const Mesh1D mesh = cfg.mesh();
    const LoadSpec load = make_load(cfg.snapshot_load);
    const Vector f_vec = assemble_load(mesh, load.f, load.jumps);
    RunReport rep;
    rep.command = "snapshots";

    auto write_curves = [&](const std::string& file, const std::string& param_name,
                            const std::vector<double>& params,
                            const std::vector<Vector>& sols) {
        CsvWriter csv(out_path(cfg, file), {param_name, "x", "u"},
                      "solution snapshots over " + param_name);
        for (size_t p = 0; p < params.size(); ++p) {
            csv.row({params[p], mesh.a, 0.0});
            for (int i = 0; i < mesh.n_interior(); ++i)
                csv.row({params[p], mesh.node(i + 1), sols[p][i]});
            csv.row({params[p], mesh.b, 0.0});
        }
        rep.add_file(file, csv.rows_written());
    };

    // delta sweep at fixed s
    {
        std::vector<double> deltas;
        for (double d : cfg.snapshot_deltas) deltas.push_back(snap_to_grid(mesh, d));
        std::vector<Vector> sols(deltas.size());
        parallel_for(static_cast<int>(deltas.size()), [&](int i) {
            SymMatrix a =
                assemble_nonlocal(mesh, KernelSpec::fractional(cfg.s_fixed, deltas[i]), cfg.quad);
            CholeskyFactor chol(a, "snapshot system");
            sols[i] = chol.solve(rhs_scale(f_vec, cfg.s_fixed));
        });
        write_curves("snapshots_delta.csv", "delta", deltas, sols);
    }
    // s sweep at infinite range (through the splitting radius)
    {
        std::vector<Vector> sols(cfg.snapshot_s.size());
        parallel_for(static_cast<int>(cfg.snapshot_s.size()), [&](int i) {
            SymMatrix a = assemble_fractional_laplace(mesh, cfg.snapshot_s[i], cfg.delta_prime,
                                                      cfg.quad);
            CholeskyFactor chol(a, "snapshot system");
            sols[i] = chol.solve(rhs_scale(f_vec, cfg.snapshot_s[i]));
        });
        write_curves("snapshots_s.csv", "s", cfg.snapshot_s, sols);
    }
    rep.timings.emplace_back("total", timer.seconds());
    finish_report(cfg, rep, "snapshots_report.txt");
    return 0;
}

// --- affine-delta study ------------------------------------------------------

int cmd_affine_delta_study(const StudyConfig& cfg) {
    if (cfg.K_list.empty()) throw ConfigError("affine-delta: K list is empty");
    Timer timer;
    const Mesh1D mesh = cfg.mesh();
    const LoadSpec load = make_load(cfg.study_load);
    RunReport rep;
    rep.command = "affine-delta";

    // base model: pivot Gram, constants, load (the affine part is rebuilt per K)
    DetailedModelDelta base =
        build_delta_model(mesh, cfg.s_fixed,
                          make_partition(cfg.delta_min, cfg.delta_max, cfg.K_list.front(),
                                         PartitionKind::uniform),
                          DeltaCase::case2, load.f, load.jumps, 0.5, cfg.quad);

    std::vector<double> train = uniform_grid(cfg.delta_min, cfg.delta_max, cfg.train_delta_count);
    for (double& d : train) d = base.snap(d);
    const int T = static_cast<int>(train.size());

    std::vector<Solution> truth(T);
    std::vector<double> truth_l2(T), truth_h1(T);
    parallel_for(T, [&](int i) {
        truth[i] = solve_exact_delta(base, train[i]);
        truth_l2[i] = gram_norm(base.mass, truth[i].coeffs);
        truth_h1[i] = gram_norm(base.h1_gram, truth[i].coeffs);
    });
    rep.timings.emplace_back("truth_sweep", timer.seconds());

    struct CaseDef {
        std::string label;
        DeltaCase approx_case;
        PartitionKind kind;
    };
    const std::vector<CaseDef> cases = {{"case1_uniform", DeltaCase::case1, PartitionKind::uniform},
                                        {"case2_uniform", DeltaCase::case2, PartitionKind::uniform},
                                        {"case2_graded", DeltaCase::case2, PartitionKind::graded}};

    CsvWriter pw(out_path(cfg, "affine_delta_pointwise.csv"),
                 {"case", "K", "delta", "error", "bound_exactnorm"},
                 "pointwise solution error of the affine-in-delta surrogate (pivot norm); the "
                 "bound column uses the exact solution's norms");
    CsvWriter conv(out_path(cfg, "affine_delta_convergence.csv"),
                   {"case", "K", "max_step", "max_error"},
                   "max-over-training-grid error vs anchor count");

    const DeltaConstants& C = base.constants;
    std::vector<std::string> slope_notes;
    std::map<std::string, double> max_err_by_case_k;

    for (const CaseDef& cd : cases) {
        std::vector<double> log_steps, log_errs;
        for (int K : cfg.K_list) {
            AffineDecompositionDelta dec = build_affine_delta(
                mesh, base.kernel, make_partition(cfg.delta_min, cfg.delta_max, K, cd.kind),
                cd.approx_case, cfg.quad);
            std::vector<double> err(T), bound(T);
            parallel_for(T, [&](int i) {
                SymMatrix a = affine_matrix_eval(dec, train[i]);
                CholeskyFactor chol(a, "affine-delta system");
                Vector u = chol.solve(base.load);
                err[i] = gram_norm(base.pivot_gram, u - truth[i].coeffs);
                const double step = dec.partition.local_step(train[i]);
                bound[i] = (cd.approx_case == DeltaCase::case1)
                               ? (C.C_P / C.alpha_a) * C.C_a * step * truth_l2[i]
                               : (C.C_P / C.alpha_a) * C.L_aprime * step * step * truth_h1[i];
            });
            double max_err = 0.0;
            for (int i = 0; i < T; ++i) {
                pw.row_with_label(cd.label, {static_cast<double>(K), train[i], err[i], bound[i]});
                max_err = std::max(max_err, err[i]);
            }
            conv.row_with_label(cd.label,
                                {static_cast<double>(K), dec.partition.max_step(), max_err});
            log_steps.push_back(std::log(dec.partition.max_step()));
            log_errs.push_back(std::log(max_err));
            max_err_by_case_k[cd.label + "_" + std::to_string(K)] = max_err;
        }
        const double slope = fit_slope(log_steps, log_errs);
        slope_notes.push_back(cd.label + " slope vs max_step: " + std::to_string(slope));
    }
    for (const std::string& n : slope_notes) rep.notes.push_back(n);
    for (int K : cfg.K_list) {
        const double gu = max_err_by_case_k["case2_graded_" + std::to_string(K)];
        const double uu = max_err_by_case_k["case2_uniform_" + std::to_string(K)];
        rep.notes.push_back("graded/uniform max-error ratio at K=" + std::to_string(K) + ": " +
                            std::to_string(gu / uu));
    }

    rep.add_file("affine_delta_pointwise.csv", pw.rows_written());
    rep.add_file("affine_delta_convergence.csv", conv.rows_written());
    rep.timings.emplace_back("total", timer.seconds());
    finish_report(cfg, rep, "affine_delta_report.txt");
    return 0;
}

// --- affine-s study ----------------------------------------------------------

int cmd_affine_s_study(const StudyConfig& cfg) {
    if (cfg.M_list.empty()) throw ConfigError("affine-s: M list is empty");
    Timer timer;
    const Mesh1D mesh = cfg.mesh();
    const LoadSpec load = make_load(cfg.study_load);
    RunReport rep;
    rep.command = "affine-s";

    Rng rng(cfg.seed);
    std::vector<double> test(cfg.test_s_count);
    for (double& s : test) s = rng.uniform(cfg.s_min, cfg.s_max);
    std::sort(test.begin(), test.end());
    const int T = static_cast<int>(test.size());

    std::vector<DetailedModelS> models;
    models.reserve(cfg.M_list.size());
    for (int M : cfg.M_list)
        models.push_back(build_s_model(mesh, cfg.delta_fixed,
                                       chebyshev_nodes(cfg.s_min, cfg.s_max, M), cfg.eps, load.f,
                                       load.jumps, cfg.rho_rule, cfg.rho_override, cfg.quad));
    const DetailedModelS& ref = models.front();
    for (double s : test) ref.vs_gram(s);  // warm the cache serially

    std::vector<Solution> truth(T);
    parallel_for(T, [&](int i) { truth[i] = solve_exact_s(ref, test[i]); });

    CsvWriter pw(out_path(cfg, "affine_s_pointwise.csv"), {"M", "s", "error"},
                 "pointwise V_s-norm error of the regularized Chebyshev surrogate");
    CsvWriter conv(out_path(cfg, "affine_s_convergence.csv"),
                   {"M", "rho", "theory_ref", "max_error"},
                   "max-over-test-set error vs Chebyshev degree, with the C(delta) sigma^{M+1} "
                   "reference");

    std::vector<double> fit_m, fit_loge;
    for (size_t mi = 0; mi < models.size(); ++mi) {
        const DetailedModelS& model = models[mi];
        const int M = cfg.M_list[mi];
        std::vector<double> err(T);
        parallel_for(T, [&](int i) {
            Solution u_rho = solve_regularized_s(model, test[i]);
            err[i] = gram_norm(ref.vs_gram(test[i]), u_rho.coeffs - truth[i].coeffs);
        });
        double max_err = 0.0;
        for (int i = 0; i < T; ++i) {
            pw.row({static_cast<double>(M), test[i], err[i]});
            max_err = std::max(max_err, err[i]);
        }
        const double theory =
            model.affine.reg.C_delta * std::pow(model.affine.reg.sigma, M + 1);
        conv.row({static_cast<double>(M), model.affine.reg.rho, theory, max_err});
        if (max_err > 1e-12) {
            fit_m.push_back(static_cast<double>(M));
            fit_loge.push_back(std::log(max_err));
        }
    }
    if (fit_m.size() >= 2)
        rep.notes.push_back("exponential decay rate (-dlog(err)/dM): " +
                            std::to_string(-fit_slope(fit_m, fit_loge)));
    rep.notes.push_back("sigma = " + std::to_string(models.front().affine.reg.sigma) +
                        ", s_hat = " + std::to_string(models.front().affine.reg.shat.s_hat));

    rep.add_file("affine_s_pointwise.csv", pw.rows_written());
    rep.add_file("affine_s_convergence.csv", conv.rows_written());
    rep.timings.emplace_back("total", timer.seconds());
    finish_report(cfg, rep, "affine_s_report.txt");
    return 0;
}

// --- rb study ----------------------------------------------------------------

namespace {

ReducedBasis basis_prefix(const ReducedBasis& b, int n) {
    ReducedBasis p;
    p.vectors.assign(b.vectors.begin(), b.vectors.begin() + n);
    p.chosen_params.assign(b.chosen_params.begin(),
                           b.chosen_params.begin() + std::min<size_t>(n, b.chosen_params.size()));
    return p;
}

void write_trace(const StudyConfig& cfg, RunReport& rep, const std::string& file,
                 const GreedyResult& gr) {
    CsvWriter csv(out_path(cfg, file), {"basis_size", "selected_param", "max_criterion"},
                  "greedy training trace");
    for (const GreedyTraceEntry& e : gr.trace)
        csv.row({static_cast<double>(e.basis_size), e.param, e.max_err});
    rep.add_file(file, csv.rows_written());
}

}  // namespace

int cmd_rb_study(const StudyConfig& cfg) {
    Timer timer;
    const Mesh1D mesh = cfg.mesh();
    const LoadSpec load = make_load(cfg.study_load);
    RunReport rep;
    rep.command = "rb";
    Rng rng(cfg.seed);

    GreedyOptions gopts;
    gopts.N_max = cfg.N_max;
    gopts.tol = cfg.tol;
    gopts.criterion = cfg.criterion;

    // ---- delta variant ----
    {
        std::vector<double> train =
            uniform_grid(cfg.delta_min, cfg.delta_max, cfg.train_delta_count);
        std::vector<double> test(cfg.test_delta_count);
        for (double& d : test) d = rng.uniform(cfg.delta_min, cfg.delta_max);
        std::sort(test.begin(), test.end());

        CsvWriter conv(out_path(cfg, "rb_delta_convergence.csv"),
                       {"K", "N", "max_test_error", "max_test_estimator", "affine_floor"},
                       "reduced-basis max test error vs basis size (pivot norm); floor = max "
                       "affine-approximation error on the test set");

        bool truth_done = false;
        std::vector<Solution> truth;
        std::vector<double> test_snapped;

        for (int K : cfg.rb_K_list) {
            DetailedModelDelta model = build_delta_model(
                mesh, cfg.s_fixed, make_partition(cfg.delta_min, cfg.delta_max, K,
                                                  PartitionKind::uniform),
                cfg.rb_case, load.f, load.jumps, 0.5, cfg.quad);
            if (!truth_done) {
                test_snapped = test;
                for (double& d : test_snapped) d = model.snap(d);
                truth.resize(test_snapped.size());
                parallel_for(static_cast<int>(test_snapped.size()),
                             [&](int i) { truth[i] = solve_exact_delta(model, test_snapped[i]); });
                truth_done = true;
            }
            const int TT = static_cast<int>(test_snapped.size());

            // affine floor on the test set
            std::vector<double> floor_err(TT);
            parallel_for(TT, [&](int i) {
                Solution ua = solve_affine_delta(model, test_snapped[i]);
                floor_err[i] = error_norm(model, ua, truth[i], NormKind::V_pivot);
            });
            const double floor = *std::max_element(floor_err.begin(), floor_err.end());

            GreedyResult gr = greedy_train(model, train, gopts);
            write_trace(cfg, rep, "rb_delta_trace_K" + std::to_string(K) + ".csv", gr);
            EstimatorData ed = make_estimator_data(model);

            for (int N = 0; N <= gr.basis.size(); ++N) {
                ReducedModel rm = project_reduced(model, basis_prefix(gr.basis, N));
                std::vector<double> err(TT), est(TT);
                parallel_for(TT, [&](int i) {
                    ReducedSolution rs = solve_reduced(rm, test_snapped[i]);
                    Solution lifted;
                    lifted.coeffs = rm.N ? rm.lift(rs.c) : Vector::Zero(rm.n_detailed);
                    err[i] = gram_norm(model.pivot_gram, lifted.coeffs - truth[i].coeffs);
                    est[i] = estimator_delta(rm, ed, test_snapped[i], rs.c);
                });
                conv.row({static_cast<double>(K), static_cast<double>(N),
                          *std::max_element(err.begin(), err.end()),
                          *std::max_element(est.begin(), est.end()), floor});
            }
            if (cfg.save_models)
                save_reduced_model(out_path(cfg, "rb_delta_K" + std::to_string(K) + ".rbm"),
                                   gr.rm);
            if (gr.stagnated)
                rep.notes.push_back("delta greedy stagnated at K=" + std::to_string(K) +
                                    " with basis size " + std::to_string(gr.basis.size()));
        }
        rep.add_file("rb_delta_convergence.csv", conv.rows_written());
        rep.timings.emplace_back("delta_variant", timer.seconds());
    }

    // ---- s variant ----
    {
        Timer s_timer;
        std::vector<double> train = uniform_grid(cfg.s_min, cfg.s_max, cfg.train_s_count);
        std::vector<double> test(cfg.test_s_count);
        for (double& s : test) s = rng.uniform(cfg.s_min, cfg.s_max);
        std::sort(test.begin(), test.end());
        const int TT = static_cast<int>(test.size());

        CsvWriter conv(out_path(cfg, "rb_s_convergence.csv"),
                       {"M", "N", "max_rel_error", "max_abs_error", "max_test_estimator",
                        "affine_floor"},
                       "reduced-basis max test error vs basis size (V_s norm, relative and "
                       "absolute); floor = max regularized-surrogate error on the test set");

        bool truth_done = false;
        std::vector<Solution> truth;

        for (int M : cfg.rb_M_list) {
            DetailedModelS model = build_s_model(mesh, cfg.delta_fixed,
                                                 chebyshev_nodes(cfg.s_min, cfg.s_max, M),
                                                 cfg.eps, load.f, load.jumps, cfg.rho_rule,
                                                 cfg.rho_override, cfg.quad);
            for (double s : test) model.vs_gram(s);  // warm serially
            if (!truth_done) {
                truth.resize(TT);
                parallel_for(TT, [&](int i) { truth[i] = solve_exact_s(model, test[i]); });
                truth_done = true;
            }

            std::vector<double> floor_err(TT);
            parallel_for(TT, [&](int i) {
                Solution ur = solve_regularized_s(model, test[i]);
                floor_err[i] = gram_norm(model.vs_gram(test[i]), ur.coeffs - truth[i].coeffs);
            });
            const double floor = *std::max_element(floor_err.begin(), floor_err.end());

            GreedyResult gr = greedy_train(model, train, gopts);
            write_trace(cfg, rep, "rb_s_trace_M" + std::to_string(M) + ".csv", gr);
            EstimatorData ed = make_estimator_data(model);

            for (int N = 0; N <= gr.basis.size(); ++N) {
                ReducedModel rm = project_reduced(model, basis_prefix(gr.basis, N));
                std::vector<double> rel(TT), abse(TT), est(TT);
                parallel_for(TT, [&](int i) {
                    ReducedSolution rs = solve_reduced(rm, test[i]);
                    Vector lifted = rm.N ? rm.lift(rs.c) : Vector::Zero(rm.n_detailed);
                    const SymMatrix& g = model.vs_gram(test[i]);
                    abse[i] = gram_norm(g, lifted - truth[i].coeffs);
                    const double denom = gram_norm(g, lifted);
                    rel[i] = denom > 0.0 ? abse[i] / denom : abse[i];
                    const double eta =
                        cfg.use_discrete_eta ? discrete_eta(model, test[i]) : 1.0;
                    est[i] = estimator_s(rm, ed, test[i], rs.c, eta);
                });
                conv.row({static_cast<double>(M), static_cast<double>(N),
                          *std::max_element(rel.begin(), rel.end()),
                          *std::max_element(abse.begin(), abse.end()),
                          *std::max_element(est.begin(), est.end()), floor});
            }
            if (cfg.save_models)
                save_reduced_model(out_path(cfg, "rb_s_M" + std::to_string(M) + ".rbm"), gr.rm);
            if (gr.stagnated)
                rep.notes.push_back("s greedy stagnated at M=" + std::to_string(M) +
                                    " with basis size " + std::to_string(gr.basis.size()));
        }
        if (cfg.use_discrete_eta)
            rep.notes.push_back(
                "estimator column uses the discrete eta surrogate (generalized eigenvalue)");
        rep.add_file("rb_s_convergence.csv", conv.rows_written());
        rep.timings.emplace_back("s_variant", s_timer.seconds());
    }

    rep.timings.emplace_back("total", timer.seconds());
    finish_report(cfg, rep, "rb_report.txt");
    return 0;
}

// --- validate ----------------------------------------------------------------

int cmd_validate(const StudyConfig& cfg) {
    Timer timer;
    RunReport rep;
    rep.command = "validate";
    const Mesh1D mesh = build_mesh(cfg.a, cfg.b, std::min(cfg.n_el, 64));
    Rng rng(cfg.seed);

    auto check = [&](const std::string& name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string msg;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            msg = e.what();
            ok = false;
        }
        rep.checks.emplace_back(name + (msg.empty() ? "" : " (" + msg + ")"), ok);
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    };

    check("mass matrix analytic entries", [&] {
        SymMatrix m = assemble_mass(mesh);
        const double h = mesh.h;
        for (int i = 0; i < m.n(); ++i) {
            if (std::abs(m(i, i) - 2.0 * h / 3.0) > 1e-15) return false;
            if (i + 1 < m.n() && std::abs(m(i, i + 1) - h / 6.0) > 1e-15) return false;
        }
        return true;
    });

    check("h1 gram analytic entries", [&] {
        SymMatrix g = assemble_h1_gram(mesh);
        const double h = mesh.h;
        for (int i = 0; i < g.n(); ++i) {
            if (std::abs(g(i, i) - 2.0 / h) > 1e-12) return false;
            if (i + 1 < g.n() && std::abs(g(i, i + 1) + 1.0 / h) > 1e-12) return false;
        }
        return true;
    });

    check("nodal exactness of the delta surrogate", [&] {
        DeltaPartition p = make_partition(cfg.delta_min, cfg.delta_max, 4, PartitionKind::graded);
        for (DeltaCase c : {DeltaCase::case1, DeltaCase::case2}) {
            AffineDecompositionDelta dec =
                build_affine_delta(mesh, KernelSpec::fractional(cfg.s_fixed, cfg.delta_max), p, c,
                                   cfg.quad);
            for (size_t k = 0; k < dec.partition.anchors.size(); ++k) {
                SymMatrix a = affine_matrix_eval(dec, dec.partition.anchors[k]);
                if ((a.mat() - dec.matrices[k].mat()).cwiseAbs().maxCoeff() != 0.0) return false;
            }
        }
        return true;
    });

    check("nodal exactness of the s surrogate (rho = 0)", [&] {
        AffineDecompositionS dec = build_affine_s(
            mesh, cfg.delta_fixed, chebyshev_nodes(cfg.s_min, cfg.s_max, 4), cfg.eps,
            cfg.rho_rule, cfg.rho_override, cfg.quad);
        for (size_t m = 0; m < dec.grid.nodes.size(); ++m) {
            SymMatrix a = regularized_matrix_eval(dec, dec.grid.nodes[m], 0.0);
            if ((a.mat() - dec.matrices[m].mat()).cwiseAbs().maxCoeff() != 0.0) return false;
        }
        return true;
    });

    check("partition of unity (both cases, 1000 random deltas)", [&] {
        DeltaPartition p = make_partition(cfg.delta_min, cfg.delta_max, 7, PartitionKind::uniform);
        KernelSpec kern = KernelSpec::fractional(cfg.s_fixed, cfg.delta_max);
        for (int t = 0; t < 1000; ++t) {
            const double d = rng.uniform(cfg.delta_min, cfg.delta_max);
            double s1 = 0.0, s2 = 0.0;
            for (double v : coeffs_case1(d, p, kern)) {
                if (v < 0.0) return false;
                s1 += v;
            }
            for (double v : coeffs_case2(d, p)) {
                if (v < -1e-15) return false;
                s2 += v;
            }
            if (std::abs(s1 - 1.0) > 1e-12 || std::abs(s2 - 1.0) > 1e-12) return false;
        }
        return true;
    });

    check("lagrange polynomial reproduction (p <= M <= 12)", [&] {
        for (int M : {3, 7, 12}) {
            SGrid g = chebyshev_nodes(cfg.s_min, cfg.s_max, M);
            for (int t = 0; t < 333; ++t) {
                const double s = rng.uniform(cfg.s_min, cfg.s_max);
                const std::vector<double> th = lagrange_coefficients(s, g);
                for (int p = 0; p <= M; ++p) {
                    double acc = 0.0;
                    for (int m = 0; m <= M; ++m) acc += th[m] * std::pow(g.nodes[m], p);
                    if (std::abs(acc - std::pow(s, p)) > 1e-10) return false;
                }
            }
        }
        return true;
    });

    check("splitting invariance across delta'", [&] {
        const Mesh1D m32 = build_mesh(cfg.a, cfg.b, 32);
        for (double s : {1.0 / 3.0, 0.5}) {
            SymMatrix ref = assemble_fractional_laplace(m32, s, 1.0, cfg.quad);
            const double scale = ref.mat().cwiseAbs().maxCoeff();
            for (double dp : {1.5, 2.0}) {
                SymMatrix other = assemble_fractional_laplace(m32, s, dp, cfg.quad);
                if ((ref.mat() - other.mat()).cwiseAbs().maxCoeff() > 1e-8 * scale) return false;
            }
        }
        return true;
    });

    check("strip monotonicity in delta (100 random vectors)", [&] {
        const Mesh1D m32 = build_mesh(cfg.a, cfg.b, 32);
        SymMatrix a1 = assemble_nonlocal(m32, KernelSpec::fractional(0.5, 0.25), cfg.quad);
        SymMatrix a2 = assemble_nonlocal(m32, KernelSpec::fractional(0.5, 0.5), cfg.quad);
        for (int t = 0; t < 100; ++t) {
            Vector v(a1.n());
            for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
            if (a1.quad(v) > a2.quad(v) * (1.0 + 1e-12)) return false;
        }
        return true;
    });

    check("assembly agrees with the adaptive oracle (8 spot entries)", [&] {
        const Mesh1D m32 = build_mesh(cfg.a, cfg.b, 32);
        for (double s : {1.0 / 3.0, 0.5}) {
            KernelSpec k = KernelSpec::fractional(s, 0.25);
            SymMatrix a = assemble_nonlocal(m32, k, cfg.quad);
            const int picks[4][2] = {{3, 3}, {7, 8}, {10, 14}, {0, 5}};
            for (auto& pk : picks) {
                const double o = oracle_entry(m32, k, pk[0], pk[1], cfg.quad);
                const double scale = std::max(std::abs(o), 1e-14);
                if (std::abs(a(pk[0], pk[1]) - o) > 1e-6 * scale) return false;
            }
        }
        return true;
    });

    check("basis orthonormality and snapshot reproduction", [&] {
        LoadSpec load = make_load(cfg.study_load);
        DetailedModelDelta model = build_delta_model(
            mesh, cfg.s_fixed,
            make_partition(cfg.delta_min, cfg.delta_max, 6, PartitionKind::uniform),
            DeltaCase::case2, load.f, load.jumps, 0.5, cfg.quad);
        GreedyOptions opts;
        opts.N_max = 6;
        opts.tol = 0.0;
        GreedyResult gr = greedy_train(model, uniform_grid(cfg.delta_min, cfg.delta_max, 41),
                                       opts);
        // orthonormality audit
        for (int i = 0; i < gr.basis.size(); ++i)
            for (int j = 0; j <= i; ++j) {
                const double g =
                    gr.basis.vectors[i].dot(model.pivot_gram.apply(gr.basis.vectors[j]));
                if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-10) return false;
            }
        // Galerkin reproduction at snapshot parameters
        for (double p : gr.basis.chosen_params) {
            ReducedSolution rs = solve_reduced(gr.rm, p);
            Solution ua = solve_affine_delta(model, p);
            if (gram_norm(model.pivot_gram, gr.rm.lift(rs.c) - ua.coeffs) > 1e-10) return false;
        }
        return true;
    });

    check("online residual norms match the full-space route", [&] {
        LoadSpec load = make_load(cfg.study_load);
        DetailedModelDelta model = build_delta_model(
            mesh, cfg.s_fixed,
            make_partition(cfg.delta_min, cfg.delta_max, 5, PartitionKind::uniform),
            DeltaCase::case2, load.f, load.jumps, 0.5, cfg.quad);
        GreedyOptions opts;
        opts.N_max = 4;
        opts.tol = 0.0;
        GreedyResult gr =
            greedy_train(model, uniform_grid(cfg.delta_min, cfg.delta_max, 21), opts);
        EstimatorData ed = make_estimator_data(model);
        for (int t = 0; t < 10; ++t) {
            const double d = model.snap(rng.uniform(cfg.delta_min, cfg.delta_max));
            ReducedSolution rs = solve_reduced(gr.rm, d);
            const double on = online_residual_norm(gr.rm, d, rs.c);
            const double full = full_residual_norm(model, ed, gr.rm, d, rs.c);
            if (std::abs(on - full) > 1e-8 * std::max(full, 1e-14)) return false;
        }
        return true;
    });

    check("log-sup bound dominates the numeric maximum (20 random tuples)", [&] {
        for (int t = 0; t < 20; ++t) {
            const double alpha = rng.uniform(0.05, 2.0);
            const int k = 1 + static_cast<int>(rng.uniform(0.0, 6.0));
            const double delta = rng.uniform(0.1, 3.0);
            const double bound = log_sup_bound(alpha, k, delta);
            double sup = 0.0;
            for (int i = 0; i <= 100000; ++i) {
                const double xi = delta * std::pow(10.0, -60.0 * (1.0 - i / 100000.0));
                sup = std::max(sup, std::pow(xi, alpha) * std::pow(std::abs(std::log(xi)), k));
            }
            if (sup > bound * (1.0 + 1e-12)) return false;
        }
        return true;
    });

    check("sigma >= 1 configuration is rejected with a message", [&] {
        try {
            // wide interval: inadmissible for the regularized surrogate
            compute_shat(0.3, 0.52, 0.0);
            return false;
        } catch (const std::invalid_argument& e) {
            return std::string(e.what()).find("subdivide") != std::string::npos;
        }
    });

    check("offline anchor cache integrity", [&] {
        DeltaPartition p = make_partition(cfg.delta_min, cfg.delta_max, 4, PartitionKind::graded);
        AffineDecompositionDelta dec = build_affine_delta(
            mesh, KernelSpec::fractional(cfg.s_fixed, cfg.delta_max), p, DeltaCase::case2,
            cfg.quad);
        fs::path dir;
        if (cfg.anchors_dir.empty()) {
            dir = fs::path(cfg.out_dir) / "anchors";
            fs::create_directories(dir);
            for (size_t k = 0; k < dec.matrices.size(); ++k)
                save_matrix_binary((dir / ("anchor_" + std::to_string(k) + ".bin")).string(),
                                   dec.matrices[k]);
        } else {
            dir = cfg.anchors_dir;
        }
        for (size_t k = 0; k < dec.matrices.size(); ++k) {
            SymMatrix cached =
                load_matrix_binary((dir / ("anchor_" + std::to_string(k) + ".bin")).string());
            if (cached.n() != dec.matrices[k].n()) return false;
            if ((cached.mat() - dec.matrices[k].mat()).cwiseAbs().maxCoeff() != 0.0) return false;
        }
        return true;
    });

    rep.timings.emplace_back("total", timer.seconds());
    finish_report(cfg, rep, "validate_report.txt");
    return rep.all_passed() ? 0 : 1;
}

}  // namespace nlrb
