#ifndef NLRB_DETAILED_HPP
#define NLRB_DETAILED_HPP

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "nlrb/affine_delta.hpp"
#include "nlrb/affine_s.hpp"
#include "nlrb/fem.hpp"

namespace nlrb {

enum class Variant { delta_param, s_param };
enum class NormKind { V_pivot, V_s, L2, H1 };

struct Solution {
    Vector coeffs;
    double param = 0.0;
    Variant variant = Variant::delta_param;
    double solver_residual = 0.0;
};

/// Assembled data for the delta-parametrized family at fixed s. The pivot
/// Gram A(delta*) defines the reference energy norm used for errors, basis
/// orthonormalization and residual dual norms.
struct DetailedModelDelta {
    Mesh1D mesh;
    KernelSpec kernel;  ///< family and s; delta varies per query
    AffineDecompositionDelta affine;
    SymMatrix pivot_gram;
    double delta_star = 0.5;
    SymMatrix mass;
    SymMatrix h1_gram;
    Vector load;  ///< includes the 2/c_{1,s} data scaling at the fixed s
    DeltaConstants constants;
    QuadratureConfig quad;

    double snap(double delta) const { return snap_to_grid(mesh, delta); }
};

DetailedModelDelta build_delta_model(const Mesh1D& mesh, double s, const DeltaPartition& partition,
                                     DeltaCase approx_case,
                                     const std::function<double(double)>& F,
                                     const std::vector<double>& jumps = {},
                                     double delta_star = 0.5, const QuadratureConfig& cfg = {});

/// Assembled data for the s-parametrized family at fixed delta (finite, or
/// infinite through the splitting radius). Dual norms are taken w.r.t.
/// A(s_min, delta); the s2 Gram feeds the online estimator.
struct DetailedModelS {
    Mesh1D mesh;
    double delta = 0.25;  ///< effective finite radius (delta' when infinite)
    bool infinite_range = false;
    AffineDecompositionS affine;
    SymMatrix dual_gram;
    SymMatrix s2_gram;
    SymMatrix mass;
    SymMatrix h1_gram;
    Vector F_vec;  ///< unscaled data; solves apply rhs_scale(s)
    QuadratureConfig quad;

    /// Energy Gram of a(.,.;s,delta), cached by s (delta is fixed).
    const SymMatrix& vs_gram(double s) const;

  private:
    mutable std::map<double, std::unique_ptr<SymMatrix>> vs_cache_;
    mutable std::unique_ptr<std::mutex> cache_mutex_ = std::make_unique<std::mutex>();
};

DetailedModelS build_s_model(const Mesh1D& mesh, double delta, const SGrid& grid, double eps,
                             const std::function<double(double)>& F,
                             const std::vector<double>& jumps = {},
                             RhoRule rho_rule = RhoRule::sigma_scaled,
                             std::optional<double> rho_override = std::nullopt,
                             const QuadratureConfig& cfg = {});

/// Truth solve at the (snapped) delta: fresh exact-kernel assembly.
Solution solve_exact_delta(const DetailedModelDelta& model, double delta);

/// Solve with the affine surrogate matrix at delta.
Solution solve_affine_delta(const DetailedModelDelta& model, double delta);

/// Truth solve at s: fresh assembly of a(.,.;s,delta) (splitting assembly
/// when the model is infinite-range); rhs is rhs_scale(F, s).
Solution solve_exact_s(const DetailedModelS& model, double s);

/// Solve the regularized Chebyshev surrogate at s.
Solution solve_regularized_s(const DetailedModelS& model, double s,
                             std::optional<double> rho_override = std::nullopt);

double error_norm(const DetailedModelDelta& model, const Solution& u1, const Solution& u2,
                  NormKind norm);
/// For the s-model, NormKind::V_s evaluates in the energy norm at `s`.
double error_norm(const DetailedModelS& model, const Solution& u1, const Solution& u2,
                  NormKind norm, double s = 0.0);

}  // namespace nlrb

#endif
