#ifndef NLRB_RB_HPP
#define NLRB_RB_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlrb/detailed.hpp"

namespace nlrb {

/// Snapshot basis, orthonormal in the pivot inner product.
struct ReducedBasis {
    std::vector<Vector> vectors;
    std::vector<double> chosen_params;

    int size() const { return static_cast<int>(vectors.size()); }
    Eigen::MatrixXd as_matrix() const;
};

/// Stabilized Gram-Schmidt append in the given inner product, with an
/// unconditional re-orthogonalization pass. Returns false (rejection) when
/// the projection residual falls below 1e-12 of the input norm; the vector
/// adds no information then.
bool orthonormalize_append(ReducedBasis& basis, Vector v, const SymMatrix& pivot_gram);

/// Offline output: projected anchors/loads, reduced Gram matrices for the
/// estimator norms, and the pairwise Riesz-representer blocks that make the
/// online residual dual norm independent of the detailed dimension.
struct ReducedModel {
    Variant variant = Variant::delta_param;
    int N = 0;
    int n_detailed = 0;

    // coefficient machinery (copies, so the model is self-contained online)
    DeltaPartition partition;
    DeltaCase approx_case = DeltaCase::case2;
    KernelSpec kernel;       // delta variant: family + fixed s
    SGrid grid;              // s variant
    RegularizationSpec reg;  // s variant

    // anchors: delta variant Q = K+1; s variant Q = M+2 with the
    // regularization Gram appended last (online coefficient rho)
    std::vector<Eigen::MatrixXd> red_anchors;
    Vector red_load;
    Eigen::MatrixXd red_mass;
    Eigen::MatrixXd red_h1;
    Eigen::MatrixXd red_s2;

    std::vector<std::vector<Eigen::MatrixXd>> riesz_aa;
    std::vector<Vector> riesz_af;
    double riesz_ff = 0.0;

    Eigen::MatrixXd basis;  // n x N, for lifting

    std::vector<double> theta(double param) const;
    double theta_f(double param) const;
    Vector lift(const Vector& c) const { return basis * c; }
};

struct ReducedSolution {
    Vector c;
    double param = 0.0;
};

struct EstimatorData {
    std::optional<DeltaConstants> delta_constants;
    std::optional<RegularizationSpec> reg;
    std::shared_ptr<CholeskyFactor> dual_gram_factor;
};

EstimatorData make_estimator_data(const DetailedModelDelta& model);
EstimatorData make_estimator_data(const DetailedModelS& model);

ReducedModel project_reduced(const DetailedModelDelta& model, const ReducedBasis& basis);
ReducedModel project_reduced(const DetailedModelS& model, const ReducedBasis& basis);

/// Assemble and solve the N x N system at the given parameter.
ReducedSolution solve_reduced(const ReducedModel& rm, double param);

/// Residual dual norm from the precomputed Riesz blocks (online cost
/// independent of the detailed dimension).
double online_residual_norm(const ReducedModel& rm, double param, const Vector& c);

/// Same residual dual norm through the full-space route (assemble the
/// residual vector, solve one dual-Gram system); the offline consistency
/// oracle for the online blocks.
double full_residual_norm(const DetailedModelDelta& model, const EstimatorData& ed,
                          const ReducedModel& rm, double param, const Vector& c);
double full_residual_norm(const DetailedModelS& model, const EstimatorData& ed,
                          const ReducedModel& rm, double param, const Vector& c);

/// A posteriori bound for the delta variant: residual term over alpha_a plus
/// the kernel-approximation term with the local bracketing step.
double estimator_delta(const ReducedModel& rm, const EstimatorData& ed, double delta,
                       const Vector& c);

/// A posteriori bound for the s variant; eta = 1 is the eta-free variant,
/// a discrete surrogate can be passed instead.
double estimator_s(const ReducedModel& rm, const EstimatorData& ed, double s, const Vector& c,
                   double eta = 1.0);

/// Discrete surrogate for the embedding constant eta_{s_min, s}:
/// sqrt(lambda_max(A(s_min), A(s))). Flagged as a surrogate in reports.
double discrete_eta(const DetailedModelS& model, double s);

enum class GreedyCriterion { true_error, estimator };

struct GreedyOptions {
    int N_max = 20;
    double tol = 1e-10;
    GreedyCriterion criterion = GreedyCriterion::true_error;
};

struct GreedyTraceEntry {
    double param = 0.0;   ///< selected parameter
    double max_err = 0.0; ///< max criterion value over the training set
    int basis_size = 0;   ///< basis size the sweep was run with
};

struct GreedyResult {
    ReducedBasis basis;
    ReducedModel rm;
    std::vector<GreedyTraceEntry> trace;
    bool stagnated = false;
};

/// Iterative greedy training. true_error mode measures against freshly
/// assembled exact-kernel solutions (pivot norm for delta, V_s(s) norm for
/// s); snapshots appended to the basis are detailed-affine solutions. The
/// first snapshot is taken at the middle element of the sorted training set;
/// argmax ties break toward the smaller parameter.
GreedyResult greedy_train(const DetailedModelDelta& model, std::vector<double> training,
                          const GreedyOptions& opts);
GreedyResult greedy_train(const DetailedModelS& model, std::vector<double> training,
                          const GreedyOptions& opts);

/// Versioned binary container for reuse across CLI runs.
void save_reduced_model(const std::string& path, const ReducedModel& rm);
ReducedModel load_reduced_model(const std::string& path);

}  // namespace nlrb

#endif
