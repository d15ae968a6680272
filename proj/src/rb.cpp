#include "nlrb/rb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>

namespace nlrb {

Eigen::MatrixXd ReducedBasis::as_matrix() const {
    if (vectors.empty()) return Eigen::MatrixXd();
    Eigen::MatrixXd b(vectors.front().size(), vectors.size());
    for (size_t j = 0; j < vectors.size(); ++j) b.col(j) = vectors[j];
    return b;
}

bool orthonormalize_append(ReducedBasis& basis, Vector v, const SymMatrix& pivot_gram) {
    const double norm0 = gram_norm(pivot_gram, v);
    if (norm0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& b : basis.vectors) {
            const double proj = b.dot(pivot_gram.apply(v));
            v -= proj * b;
        }
    }
    const double norm = gram_norm(pivot_gram, v);
    if (norm <= 1e-12 * norm0) return false;
    basis.vectors.push_back(v / norm);
    return true;
}

std::vector<double> ReducedModel::theta(double param) const {
    if (variant == Variant::delta_param) {
        if (approx_case == DeltaCase::case1) return coeffs_case1(param, partition, kernel);
        return coeffs_case2(param, partition);
    }
    std::vector<double> t = lagrange_coefficients(param, grid);
    t.push_back(reg.rho);  // regularization Gram is the appended anchor
    return t;
}

double ReducedModel::theta_f(double param) const {
    if (variant == Variant::delta_param) return 1.0;
    return 2.0 / scaling_constant(1, param);
}

namespace {

struct ProjectionInput {
    Variant variant;
    const std::vector<SymMatrix>* anchors;     // Q_base matrices
    const SymMatrix* reg_gram = nullptr;       // appended for the s variant
    const Vector* load;
    const SymMatrix* dual_gram;
    const SymMatrix* mass;
    const SymMatrix* h1;
    const SymMatrix* s2 = nullptr;
};

void project_common(const ProjectionInput& in, const ReducedBasis& basis, ReducedModel& rm) {
    const Eigen::MatrixXd b = basis.as_matrix();
    const int n = in.load->size();
    const int N = basis.size();
    rm.N = N;
    rm.n_detailed = n;
    rm.basis = N == 0 ? Eigen::MatrixXd(n, 0) : b;

    std::vector<const SymMatrix*> all;
    for (const SymMatrix& a : *in.anchors) all.push_back(&a);
    if (in.reg_gram) all.push_back(in.reg_gram);
    const int Q = static_cast<int>(all.size());

    std::vector<Eigen::MatrixXd> ab(Q);  // A_q B
    rm.red_anchors.resize(Q);
    for (int q = 0; q < Q; ++q) {
        ab[q] = N == 0 ? Eigen::MatrixXd(n, 0) : Eigen::MatrixXd(all[q]->mat() * rm.basis);
        rm.red_anchors[q] = rm.basis.transpose() * ab[q];
    }
    rm.red_load = rm.basis.transpose() * (*in.load);
    rm.red_mass = rm.basis.transpose() * in.mass->mat() * rm.basis;
    rm.red_h1 = rm.basis.transpose() * in.h1->mat() * rm.basis;
    if (in.s2) rm.red_s2 = rm.basis.transpose() * in.s2->mat() * rm.basis;

    CholeskyFactor dual(*in.dual_gram, "residual dual Gram");
    std::vector<Eigen::MatrixXd> w(Q);
    for (int q = 0; q < Q; ++q) w[q] = dual.solve_matrix(ab[q]);
    const Vector wf = dual.solve(*in.load);

    rm.riesz_aa.assign(Q, std::vector<Eigen::MatrixXd>(Q));
    rm.riesz_af.assign(Q, Vector());
    for (int q = 0; q < Q; ++q) {
        for (int p = 0; p < Q; ++p) rm.riesz_aa[q][p] = ab[q].transpose() * w[p];
        rm.riesz_af[q] = ab[q].transpose() * wf;
    }
    rm.riesz_ff = in.load->dot(wf);
}

}  // namespace

ReducedModel project_reduced(const DetailedModelDelta& model, const ReducedBasis& basis) {
    ReducedModel rm;
    rm.variant = Variant::delta_param;
    rm.partition = model.affine.partition;
    rm.approx_case = model.affine.approx_case;
    rm.kernel = model.kernel;
    ProjectionInput in;
    in.variant = rm.variant;
    in.anchors = &model.affine.matrices;
    in.load = &model.load;
    in.dual_gram = &model.pivot_gram;
    in.mass = &model.mass;
    in.h1 = &model.h1_gram;
    project_common(in, basis, rm);
    return rm;
}

ReducedModel project_reduced(const DetailedModelS& model, const ReducedBasis& basis) {
    ReducedModel rm;
    rm.variant = Variant::s_param;
    rm.grid = model.affine.grid;
    rm.reg = model.affine.reg;
    ProjectionInput in;
    in.variant = rm.variant;
    in.anchors = &model.affine.matrices;
    in.reg_gram = &model.affine.reg_gram;
    in.load = &model.F_vec;
    in.dual_gram = &model.dual_gram;
    in.mass = &model.mass;
    in.h1 = &model.h1_gram;
    in.s2 = &model.s2_gram;
    project_common(in, basis, rm);
    return rm;
}

EstimatorData make_estimator_data(const DetailedModelDelta& model) {
    EstimatorData ed;
    ed.delta_constants = model.constants;
    ed.dual_gram_factor = std::make_shared<CholeskyFactor>(model.pivot_gram, "pivot Gram");
    return ed;
}

EstimatorData make_estimator_data(const DetailedModelS& model) {
    EstimatorData ed;
    ed.reg = model.affine.reg;
    ed.dual_gram_factor = std::make_shared<CholeskyFactor>(model.dual_gram, "dual Gram");
    return ed;
}

ReducedSolution solve_reduced(const ReducedModel& rm, double param) {
    ReducedSolution sol;
    sol.param = param;
    if (rm.N == 0) {
        sol.c = Vector();
        return sol;
    }
    const std::vector<double> th = rm.theta(param);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rm.N, rm.N);
    for (size_t q = 0; q < th.size(); ++q)
        if (th[q] != 0.0) a += th[q] * rm.red_anchors[q];
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_reduced: singular reduced system");
    sol.c = llt.solve(rm.theta_f(param) * rm.red_load);
    return sol;
}

double online_residual_norm(const ReducedModel& rm, double param, const Vector& c) {
    const std::vector<double> th = rm.theta(param);
    const double tf = rm.theta_f(param);
    const int Q = static_cast<int>(th.size());
    double sq = tf * tf * rm.riesz_ff;
    for (int q = 0; q < Q; ++q) {
        if (th[q] == 0.0) continue;
        if (rm.N > 0) {
            sq -= 2.0 * th[q] * tf * c.dot(rm.riesz_af[q]);
            for (int p = 0; p < Q; ++p) {
                if (th[p] == 0.0) continue;
                sq += th[q] * th[p] * c.dot(rm.riesz_aa[q][p] * c);
            }
        }
    }
    return std::sqrt(std::max(sq, 0.0));
}

namespace {

double dual_norm_of_residual(const EstimatorData& ed, const Vector& r) {
    const Vector w = ed.dual_gram_factor->solve(r);
    return std::sqrt(std::max(0.0, r.dot(w)));
}

}  // namespace

double full_residual_norm(const DetailedModelDelta& model, const EstimatorData& ed,
                          const ReducedModel& rm, double param, const Vector& c) {
    const Vector u = rm.N ? rm.lift(c) : Vector::Zero(rm.n_detailed);
    const std::vector<double> th = rm.theta(param);
    Vector r = -rm.theta_f(param) * model.load;
    for (size_t q = 0; q < th.size(); ++q)
        if (th[q] != 0.0) r += th[q] * model.affine.matrices[q].apply(u);
    return dual_norm_of_residual(ed, r);
}

double full_residual_norm(const DetailedModelS& model, const EstimatorData& ed,
                          const ReducedModel& rm, double param, const Vector& c) {
    const Vector u = rm.N ? rm.lift(c) : Vector::Zero(rm.n_detailed);
    const std::vector<double> th = rm.theta(param);
    Vector r = -rm.theta_f(param) * model.F_vec;
    const size_t m_anchors = model.affine.matrices.size();
    for (size_t q = 0; q < th.size(); ++q) {
        if (th[q] == 0.0) continue;
        const SymMatrix& a = q < m_anchors ? model.affine.matrices[q] : model.affine.reg_gram;
        r += th[q] * a.apply(u);
    }
    return dual_norm_of_residual(ed, r);
}

double estimator_delta(const ReducedModel& rm, const EstimatorData& ed, double delta,
                       const Vector& c) {
    if (!ed.delta_constants) throw std::invalid_argument("estimator_delta: wrong EstimatorData");
    const DeltaConstants& k = *ed.delta_constants;
    const double res = online_residual_norm(rm, delta, c);
    const double step = rm.partition.local_step(delta);
    double approx_term;
    if (rm.approx_case == DeltaCase::case1) {
        const double l2 = rm.N ? std::sqrt(std::max(0.0, c.dot(rm.red_mass * c))) : 0.0;
        approx_term = k.C_a * step * l2;
    } else {
        const double h1 = rm.N ? std::sqrt(std::max(0.0, c.dot(rm.red_h1 * c))) : 0.0;
        approx_term = k.L_aprime * step * step * h1;
    }
    return res / k.alpha_a + (k.C_P / k.alpha_a) * approx_term;
}

double estimator_s(const ReducedModel& rm, const EstimatorData& ed, double s, const Vector& c,
                   double eta) {
    if (!ed.reg) throw std::invalid_argument("estimator_s: wrong EstimatorData");
    const RegularizationSpec& reg = *ed.reg;
    const double res = online_residual_norm(rm, s, c);
    const double s2norm = rm.N ? std::sqrt(std::max(0.0, c.dot(rm.red_s2 * c))) : 0.0;
    const double amp = reg.rho + reg.C_delta * std::pow(reg.sigma, rm.grid.M() + 1);
    return eta * (res + amp * s2norm);
}

double discrete_eta(const DetailedModelS& model, double s) {
    return std::sqrt(generalized_eig_max(model.dual_gram, model.vs_gram(s)));
}

namespace {

struct GreedyHooks {
    std::function<Solution(double)> solve_detailed;           // affine/regularized snapshot
    std::function<Solution(double)> solve_truth;              // exact-kernel reference
    std::function<double(const Solution&, const Solution&)> err_norm;  // variant norm
    std::function<ReducedModel(const ReducedBasis&)> project;
    std::function<double(const ReducedModel&, double, const Vector&)> estimate;
    const SymMatrix* pivot_gram;
};

GreedyResult greedy_common(std::vector<double> training, const GreedyOptions& opts,
                           const GreedyHooks& hooks) {
    if (training.empty()) throw std::invalid_argument("greedy_train: empty training set");
    if (opts.N_max < 1) throw std::invalid_argument("greedy_train: N_max must be >= 1");
    std::sort(training.begin(), training.end());
    training.erase(std::unique(training.begin(), training.end()), training.end());
    const int T = static_cast<int>(training.size());

    std::vector<Solution> truth(T);
    if (opts.criterion == GreedyCriterion::true_error) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int i = 0; i < T; ++i) truth[i] = hooks.solve_truth(training[i]);
    }

    GreedyResult out;
    const int mid = (T - 1) / 2;

    while (true) {
        ReducedModel rm = hooks.project(out.basis);
        std::vector<double> err(T);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (int i = 0; i < T; ++i) {
            ReducedSolution red = solve_reduced(rm, training[i]);
            if (opts.criterion == GreedyCriterion::true_error) {
                Solution lifted;
                lifted.coeffs = rm.N ? rm.lift(red.c) : Vector::Zero(rm.n_detailed);
                lifted.param = training[i];
                err[i] = hooks.err_norm(lifted, truth[i]);
            } else {
                err[i] = hooks.estimate(rm, training[i], red.c);
            }
        }
        int arg = 0;
        for (int i = 1; i < T; ++i)
            if (err[i] > err[arg]) arg = i;  // ties keep the smaller parameter

        const int pick = out.basis.size() == 0 ? mid : arg;  // first snapshot: midpoint
        out.trace.push_back({training[pick], err[arg], out.basis.size()});
        out.rm = std::move(rm);

        if (err[arg] <= opts.tol) break;
        if (out.basis.size() >= opts.N_max) break;
        const double p = training[pick];
        if (std::find(out.basis.chosen_params.begin(), out.basis.chosen_params.end(), p) !=
            out.basis.chosen_params.end()) {
            out.stagnated = true;  // argmax repeats with error above tol
            break;
        }
        Solution snap = hooks.solve_detailed(p);
        if (!orthonormalize_append(out.basis, snap.coeffs, *hooks.pivot_gram)) {
            out.stagnated = true;  // snapshot adds no information
            break;
        }
        out.basis.chosen_params.push_back(p);
    }
    // re-project so the returned model matches the final basis
    if (out.rm.N != out.basis.size()) out.rm = hooks.project(out.basis);
    return out;
}

}  // namespace

GreedyResult greedy_train(const DetailedModelDelta& model, std::vector<double> training,
                          const GreedyOptions& opts) {
    for (double& d : training) d = model.snap(d);
    GreedyHooks hooks;
    hooks.solve_detailed = [&](double d) { return solve_affine_delta(model, d); };
    hooks.solve_truth = [&](double d) { return solve_exact_delta(model, d); };
    hooks.err_norm = [&](const Solution& a, const Solution& b) {
        return error_norm(model, a, b, NormKind::V_pivot);
    };
    hooks.project = [&](const ReducedBasis& b) { return project_reduced(model, b); };
    EstimatorData ed = make_estimator_data(model);
    hooks.estimate = [&model, ed](const ReducedModel& rm, double d, const Vector& c) {
        return estimator_delta(rm, ed, d, c);
    };
    hooks.pivot_gram = &model.pivot_gram;
    return greedy_common(std::move(training), opts, hooks);
}

GreedyResult greedy_train(const DetailedModelS& model, std::vector<double> training,
                          const GreedyOptions& opts) {
    // warm the V_s Gram cache serially; the parallel sweeps then only read
    for (double s : training) model.vs_gram(s);
    GreedyHooks hooks;
    hooks.solve_detailed = [&](double s) { return solve_regularized_s(model, s); };
    hooks.solve_truth = [&](double s) { return solve_exact_s(model, s); };
    hooks.err_norm = [&](const Solution& a, const Solution& b) {
        return error_norm(model, a, b, NormKind::V_s, a.param);
    };
    hooks.project = [&](const ReducedBasis& b) { return project_reduced(model, b); };
    EstimatorData ed = make_estimator_data(model);
    hooks.estimate = [&model, ed](const ReducedModel& rm, double s, const Vector& c) {
        return estimator_s(rm, ed, s, c);
    };
    hooks.pivot_gram = &model.dual_gram;
    return greedy_common(std::move(training), opts, hooks);
}

// --- serialization ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'N', 'L', 'R', 'B', '-', 'R', 'M', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }
std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::istream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
void put_mat(std::ostream& os, const Eigen::MatrixXd& m) {
    put_u32(os, static_cast<std::uint32_t>(m.rows()));
    put_u32(os, static_cast<std::uint32_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
}
Eigen::MatrixXd get_mat(std::istream& is) {
    const std::uint32_t r = get_u32(is), c = get_u32(is);
    Eigen::MatrixXd m(r, c);
    is.read(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    return m;
}
void put_vec(std::ostream& os, const Vector& v) {
    put_u32(os, static_cast<std::uint32_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
}
Vector get_vec(std::istream& is) {
    const std::uint32_t n = get_u32(is);
    Vector v(n);
    is.read(reinterpret_cast<char*>(v.data()), sizeof(double) * n);
    return v;
}
void put_dvec(std::ostream& os, const std::vector<double>& v) {
    put_u32(os, static_cast<std::uint32_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size());
}
std::vector<double> get_dvec(std::istream& is) {
    std::vector<double> v(get_u32(is));
    is.read(reinterpret_cast<char*>(v.data()), sizeof(double) * v.size());
    return v;
}

}  // namespace

void save_reduced_model(const std::string& path, const ReducedModel& rm) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_reduced_model: cannot open " + path);
    os.write(kMagic, 8);
    put_u32(os, kVersion);
    put_u32(os, rm.variant == Variant::delta_param ? 0 : 1);
    put_u32(os, static_cast<std::uint32_t>(rm.N));
    put_u32(os, static_cast<std::uint32_t>(rm.n_detailed));

    if (rm.variant == Variant::delta_param) {
        put_dvec(os, rm.partition.anchors);
        put_u32(os, rm.partition.kind == PartitionKind::uniform ? 0 : 1);
        put_u32(os, rm.approx_case == DeltaCase::case1 ? 1 : 2);
        put_f64(os, rm.kernel.s);
    } else {
        put_f64(os, rm.grid.s_min);
        put_f64(os, rm.grid.s_max);
        put_dvec(os, rm.grid.nodes);
        put_f64(os, rm.reg.shat.s_hat);
        put_f64(os, rm.reg.shat.s1);
        put_f64(os, rm.reg.shat.s2);
        put_f64(os, rm.reg.sigma);
        put_f64(os, rm.reg.C_delta);
        put_f64(os, rm.reg.rho);
        put_f64(os, rm.reg.eps);
    }
    put_u32(os, static_cast<std::uint32_t>(rm.red_anchors.size()));
    for (const auto& m : rm.red_anchors) put_mat(os, m);
    put_vec(os, rm.red_load);
    put_mat(os, rm.red_mass);
    put_mat(os, rm.red_h1);
    put_mat(os, rm.red_s2);
    for (const auto& row : rm.riesz_aa)
        for (const auto& m : row) put_mat(os, m);
    for (const auto& v : rm.riesz_af) put_vec(os, v);
    put_f64(os, rm.riesz_ff);
    put_mat(os, rm.basis);
    if (!os) throw std::runtime_error("save_reduced_model: write failed");
}

ReducedModel load_reduced_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_reduced_model: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_reduced_model: bad magic");
    if (get_u32(is) != kVersion) throw std::runtime_error("load_reduced_model: bad version");
    ReducedModel rm;
    rm.variant = get_u32(is) == 0 ? Variant::delta_param : Variant::s_param;
    rm.N = static_cast<int>(get_u32(is));
    rm.n_detailed = static_cast<int>(get_u32(is));

    if (rm.variant == Variant::delta_param) {
        rm.partition.anchors = get_dvec(is);
        rm.partition.kind = get_u32(is) == 0 ? PartitionKind::uniform : PartitionKind::graded;
        rm.approx_case = get_u32(is) == 1 ? DeltaCase::case1 : DeltaCase::case2;
        const double s = get_f64(is);
        rm.kernel = KernelSpec::fractional(s, rm.partition.anchors.back());
    } else {
        rm.grid.s_min = get_f64(is);
        rm.grid.s_max = get_f64(is);
        rm.grid.nodes = get_dvec(is);
        rm.reg.shat.s_hat = get_f64(is);
        rm.reg.shat.s1 = get_f64(is);
        rm.reg.shat.s2 = get_f64(is);
        rm.reg.sigma = get_f64(is);
        rm.reg.C_delta = get_f64(is);
        rm.reg.rho = get_f64(is);
        rm.reg.eps = get_f64(is);
    }
    const std::uint32_t q = get_u32(is);
    rm.red_anchors.resize(q);
    for (auto& m : rm.red_anchors) m = get_mat(is);
    rm.red_load = get_vec(is);
    rm.red_mass = get_mat(is);
    rm.red_h1 = get_mat(is);
    rm.red_s2 = get_mat(is);
    rm.riesz_aa.assign(q, std::vector<Eigen::MatrixXd>(q));
    for (auto& row : rm.riesz_aa)
        for (auto& m : row) m = get_mat(is);
    rm.riesz_af.resize(q);
    for (auto& v : rm.riesz_af) v = get_vec(is);
    rm.riesz_ff = get_f64(is);
    rm.basis = get_mat(is);
    if (!is) throw std::runtime_error("load_reduced_model: truncated file");
    return rm;
}

}  // namespace nlrb
