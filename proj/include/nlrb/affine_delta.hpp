#ifndef NLRB_AFFINE_DELTA_HPP
#define NLRB_AFFINE_DELTA_HPP

#include <vector>

#include "nlrb/kernel.hpp"
#include "nlrb/linalg.hpp"
#include "nlrb/mesh.hpp"
#include "nlrb/nonlocal.hpp"

namespace nlrb {

enum class PartitionKind { uniform, graded };
enum class DeltaCase { case1, case2 };

/// Anchor grid delta_0 < ... < delta_K in [delta_min, delta_max].
struct DeltaPartition {
    std::vector<double> anchors;
    PartitionKind kind = PartitionKind::uniform;

    int K() const { return static_cast<int>(anchors.size()) - 1; }
    double front() const { return anchors.front(); }
    double back() const { return anchors.back(); }

    /// Largest subinterval length.
    double max_step() const;
    /// Length of the subinterval [delta_{k-1}, delta_k] bracketing delta
    /// (clamped to the first/last subinterval at the ends).
    double local_step(double delta) const;
    /// Index of the subinterval bracketing delta: delta in (a_{k-1}, a_k].
    int bracket(double delta) const;
};

/// uniform: delta_k = delta_min + k (delta_max - delta_min)/K
/// graded:  delta_k = delta_min (delta_max/delta_min)^{k/K}
DeltaPartition make_partition(double delta_min, double delta_max, int K, PartitionKind kind);

/// Snap every anchor to the nearest multiple of h; anchors that would
/// collide after snapping are bumped to the next free multiple so the grid
/// stays strictly increasing with all K+1 anchors distinct.
DeltaPartition snap_partition(const DeltaPartition& p, const Mesh1D& mesh);

/// Case 1 coefficients: indicator of the anchor with the smaller kernel-mass
/// distance (piecewise constant; ties go to the left anchor).
std::vector<double> coeffs_case1(double delta, const DeltaPartition& p, const KernelSpec& spec);

/// Case 2 coefficients: hat-function weights on the anchor grid (at most two
/// nonzeros, nonnegative, summing to one).
std::vector<double> coeffs_case2(double delta, const DeltaPartition& p);

/// The constants bundle feeding the affine-approximation error bounds and
/// the online estimator. All quantities with a Poincare dependency use the
/// discrete surrogate C_P = sqrt(lambda_max(M, pivot Gram)).
struct DeltaConstants {
    double C_P = 0.0;       ///< discrete Poincare constant
    double C_gamma = 0.0;   ///< H3 sup bound of r^{n-1} gamma_hat
    double C_gamma1 = 0.0;  ///< H2 integral omega_{n-1} \int r^{n-1} gamma_hat
    double C_a = 0.0;       ///< 4 omega_{n-1} C_gamma
    double L_a = 0.0;       ///< 4 C_P^2 C_gamma
    double L_aprime = 0.0;  ///< Lipschitz constant of the form derivative
    double alpha_a = 0.0;   ///< coercivity vs the pivot norm
    double gamma_a = 0.0;   ///< continuity vs the pivot norm
};

DeltaConstants compute_delta_constants(const KernelSpec& spec, const DeltaPartition& p,
                                       const SymMatrix& mass, const SymMatrix& pivot_gram);

/// Anchor matrices A(delta_k) plus the coefficient rule; the offline object
/// of the delta-parametrized problem.
struct AffineDecompositionDelta {
    DeltaPartition partition;  ///< snapped to the mesh
    std::vector<SymMatrix> matrices;
    DeltaCase approx_case = DeltaCase::case2;
    KernelSpec kernel;  ///< family/s; delta field is per-anchor

    std::vector<double> coefficients(double delta) const;
};

AffineDecompositionDelta build_affine_delta(const Mesh1D& mesh, const KernelSpec& spec,
                                            const DeltaPartition& p, DeltaCase approx_case,
                                            const QuadratureConfig& cfg = {});

/// sum_k Theta_k(delta) A(delta_k). Evaluation at an anchor returns that
/// anchor matrix bitwise.
SymMatrix affine_matrix_eval(const AffineDecompositionDelta& dec, double delta);

}  // namespace nlrb

#endif
