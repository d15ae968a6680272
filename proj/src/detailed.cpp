#include "nlrb/detailed.hpp"

#include <cmath>

namespace nlrb {

namespace {

Solution direct_solve(const SymMatrix& a, const Vector& rhs, double param, Variant variant,
                      const char* what) {
    CholeskyFactor chol(a, what);
    Vector u = chol.solve(rhs);
    const double rhs_norm = rhs.norm();
    double res = (a.apply(u) - rhs).norm();
    if (rhs_norm > 0.0 && res > 1e-12 * rhs_norm) {
        u += chol.solve(rhs - a.apply(u));  // one refinement pass
        res = (a.apply(u) - rhs).norm();
    }
    Solution sol;
    sol.coeffs = std::move(u);
    sol.param = param;
    sol.variant = variant;
    sol.solver_residual = rhs_norm > 0.0 ? res / rhs_norm : res;
    return sol;
}

}  // namespace

DetailedModelDelta build_delta_model(const Mesh1D& mesh, double s, const DeltaPartition& partition,
                                     DeltaCase approx_case,
                                     const std::function<double(double)>& F,
                                     const std::vector<double>& jumps, double delta_star,
                                     const QuadratureConfig& cfg) {
    DetailedModelDelta m;
    m.mesh = mesh;
    m.kernel = KernelSpec::fractional(s, delta_star);
    m.quad = cfg;
    m.affine = build_affine_delta(mesh, m.kernel, partition, approx_case, cfg);
    m.delta_star = snap_to_grid(mesh, delta_star);
    m.pivot_gram = assemble_nonlocal(mesh, KernelSpec::fractional(s, m.delta_star), cfg);
    m.mass = assemble_mass(mesh);
    m.h1_gram = assemble_h1_gram(mesh);
    m.load = rhs_scale(assemble_load(mesh, F, jumps), s);
    m.constants = compute_delta_constants(m.kernel, m.affine.partition, m.mass, m.pivot_gram);
    return m;
}

const SymMatrix& DetailedModelS::vs_gram(double s) const {
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    auto it = vs_cache_.find(s);
    if (it == vs_cache_.end()) {
        SymMatrix g = assemble_nonlocal(mesh, KernelSpec::fractional(s, delta), quad);
        if (infinite_range) g.axpy(splitting_constant(delta, 1, s, mesh.diameter()), mass);
        it = vs_cache_.emplace(s, std::make_unique<SymMatrix>(std::move(g))).first;
    }
    return *it->second;
}

DetailedModelS build_s_model(const Mesh1D& mesh, double delta, const SGrid& grid, double eps,
                             const std::function<double(double)>& F,
                             const std::vector<double>& jumps, RhoRule rho_rule,
                             std::optional<double> rho_override, const QuadratureConfig& cfg) {
    DetailedModelS m;
    m.mesh = mesh;
    m.quad = cfg;
    m.infinite_range = std::isinf(delta);
    m.affine = build_affine_s(mesh, delta, grid, eps, rho_rule, rho_override, cfg);
    m.delta = m.affine.delta;
    m.mass = assemble_mass(mesh);
    m.h1_gram = assemble_h1_gram(mesh);
    m.F_vec = assemble_load(mesh, F, jumps);

    auto energy_gram = [&](double s) {
        SymMatrix g = assemble_nonlocal(mesh, KernelSpec::fractional(s, m.delta), cfg);
        if (m.infinite_range) g.axpy(splitting_constant(m.delta, 1, s, mesh.diameter()), m.mass);
        return g;
    };
    m.dual_gram = energy_gram(grid.s_min);
    m.s2_gram = energy_gram(m.affine.reg.shat.s2);
    return m;
}

Solution solve_exact_delta(const DetailedModelDelta& model, double delta) {
    const double d = model.snap(delta);
    SymMatrix a =
        assemble_nonlocal(model.mesh, [&] {
            KernelSpec k = model.kernel;
            k.delta = d;
            return k;
        }(), model.quad);
    return direct_solve(a, model.load, d, Variant::delta_param, "exact-delta system");
}

Solution solve_affine_delta(const DetailedModelDelta& model, double delta) {
    const double d = model.snap(delta);
    SymMatrix a = affine_matrix_eval(model.affine, d);
    return direct_solve(a, model.load, d, Variant::delta_param, "affine-delta system");
}

Solution solve_exact_s(const DetailedModelS& model, double s) {
    const SymMatrix& a = model.vs_gram(s);
    return direct_solve(a, rhs_scale(model.F_vec, s), s, Variant::s_param, "exact-s system");
}

Solution solve_regularized_s(const DetailedModelS& model, double s,
                             std::optional<double> rho_override) {
    SymMatrix a = regularized_matrix_eval(model.affine, s, rho_override);
    return direct_solve(a, rhs_scale(model.F_vec, s), s, Variant::s_param,
                        "regularized-s system (sigma >= 1 or rho too small?)");
}

namespace {

double diff_norm(const SymMatrix& g, const Solution& u1, const Solution& u2) {
    if (u1.coeffs.size() != u2.coeffs.size())
        throw std::invalid_argument("error_norm: dimension mismatch");
    return gram_norm(g, u1.coeffs - u2.coeffs);
}

}  // namespace

double error_norm(const DetailedModelDelta& model, const Solution& u1, const Solution& u2,
                  NormKind norm) {
    switch (norm) {
        case NormKind::V_pivot: return diff_norm(model.pivot_gram, u1, u2);
        case NormKind::L2: return diff_norm(model.mass, u1, u2);
        case NormKind::H1: return diff_norm(model.h1_gram, u1, u2);
        default: throw std::invalid_argument("error_norm: V_s norm needs the s-model");
    }
}

double error_norm(const DetailedModelS& model, const Solution& u1, const Solution& u2,
                  NormKind norm, double s) {
    switch (norm) {
        case NormKind::V_s: return diff_norm(model.vs_gram(s), u1, u2);
        case NormKind::V_pivot: return diff_norm(model.dual_gram, u1, u2);
        case NormKind::L2: return diff_norm(model.mass, u1, u2);
        case NormKind::H1: return diff_norm(model.h1_gram, u1, u2);
    }
    throw std::invalid_argument("error_norm: unknown norm tag");
}

}  // namespace nlrb
