#include "nlrb/affine_delta.hpp"

#include <algorithm>
#include <cmath>

#include "nlrb/quadrature.hpp"

namespace nlrb {

double DeltaPartition::max_step() const {
    double m = 0.0;
    for (size_t i = 1; i < anchors.size(); ++i) m = std::max(m, anchors[i] - anchors[i - 1]);
    return m;
}

int DeltaPartition::bracket(double delta) const {
    const int K = this->K();
    if (delta <= anchors.front()) return 1;
    for (int k = 1; k <= K; ++k)
        if (delta <= anchors[k]) return k;
    return K;
}

double DeltaPartition::local_step(double delta) const {
    const int k = bracket(delta);
    return anchors[k] - anchors[k - 1];
}

DeltaPartition make_partition(double delta_min, double delta_max, int K, PartitionKind kind) {
    if (!(delta_min > 0.0) || !(delta_min < delta_max))
        throw std::invalid_argument("make_partition: need 0 < delta_min < delta_max");
    if (K < 1) throw std::invalid_argument("make_partition: K must be >= 1");
    DeltaPartition p;
    p.kind = kind;
    p.anchors.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        if (kind == PartitionKind::uniform)
            p.anchors[k] = delta_min + k * (delta_max - delta_min) / K;
        else
            p.anchors[k] = delta_min * std::pow(delta_max / delta_min, static_cast<double>(k) / K);
    }
    p.anchors.front() = delta_min;
    p.anchors.back() = delta_max;
    return p;
}

DeltaPartition snap_partition(const DeltaPartition& p, const Mesh1D& mesh) {
    DeltaPartition s;
    s.kind = p.kind;
    s.anchors.reserve(p.anchors.size());
    for (double d : p.anchors) {
        double snapped = snap_to_grid(mesh, d);
        if (snapped < mesh.h) snapped = mesh.h;
        if (!s.anchors.empty() && snapped <= s.anchors.back())
            snapped = s.anchors.back() + mesh.h;  // keep anchors distinct
        s.anchors.push_back(snapped);
    }
    return s;
}

namespace {

// kernel mass \int_a^b rho^{n-1} gamma_hat(rho) drho (n = 1)
double kernel_mass(const KernelSpec& spec, double a, double b) {
    if (b <= a) return 0.0;
    if (spec.family == KernelFamily::fractional_truncated) {
        // (a^{-2s} - b^{-2s}) / (2s)
        return pow_int(a, b, -1.0 - 2.0 * spec.s);
    }
    return adaptive_integrate([&](double r) { return spec.radial_profile(r); }, a, b, 1e-12);
}

}  // namespace

std::vector<double> coeffs_case1(double delta, const DeltaPartition& p, const KernelSpec& spec) {
    const int K = p.K();
    if (delta < p.front() - 1e-12 || delta > p.back() + 1e-12)
        throw std::invalid_argument("coeffs_case1: delta outside the partition range");
    std::vector<double> theta(K + 1, 0.0);
    for (int k = 0; k <= K; ++k)
        if (delta == p.anchors[k]) {
            theta[k] = 1.0;
            return theta;
        }
    const int k = p.bracket(delta);  // delta in (a_{k-1}, a_k)
    const double alpha_left = kernel_mass(spec, p.anchors[k - 1], delta);  // mass to the left anchor
    const double beta_right = kernel_mass(spec, delta, p.anchors[k]);     // mass to the right anchor
    // right anchor wins only with strictly smaller mass distance
    theta[alpha_left > beta_right ? k : k - 1] = 1.0;
    return theta;
}

std::vector<double> coeffs_case2(double delta, const DeltaPartition& p) {
    const int K = p.K();
    if (delta < p.front() - 1e-12 || delta > p.back() + 1e-12)
        throw std::invalid_argument("coeffs_case2: delta outside the partition range");
    std::vector<double> theta(K + 1, 0.0);
    for (int k = 0; k <= K; ++k)
        if (delta == p.anchors[k]) {
            theta[k] = 1.0;
            return theta;
        }
    const int k = p.bracket(delta);
    const double w = (delta - p.anchors[k - 1]) / (p.anchors[k] - p.anchors[k - 1]);
    theta[k] = w;
    theta[k - 1] = 1.0 - w;
    return theta;
}

DeltaConstants compute_delta_constants(const KernelSpec& spec, const DeltaPartition& p,
                                       const SymMatrix& mass, const SymMatrix& pivot_gram) {
    const double dmin = p.front(), dmax = p.back();
    DeltaConstants c;
    c.C_P = std::sqrt(generalized_eig_max(mass, pivot_gram));

    const double omega0 = 2.0;  // surface measure of S^0
    double gamma_at_min, gamma_at_max, L_gamma;
    if (spec.family == KernelFamily::fractional_truncated) {
        const double s = spec.s;
        c.C_gamma = std::pow(dmin, -1.0 - 2.0 * s);
        c.C_gamma1 = (std::pow(dmin, -2.0 * s) - std::pow(dmax, -2.0 * s)) / s;
        gamma_at_min = std::pow(dmin, -1.0 - 2.0 * s);
        gamma_at_max = std::pow(dmax, -1.0 - 2.0 * s);
        L_gamma = (1.0 + 2.0 * s) * std::pow(dmin, -2.0 - 2.0 * s);
    } else {
        // numeric sup / integral / Lipschitz estimate on a fine grid
        const int grid = 10000;
        double sup = 0.0, lip = 0.0;
        double prev = spec.radial_profile(dmin);
        for (int i = 1; i <= grid; ++i) {
            const double r = dmin + (dmax - dmin) * i / grid;
            const double v = spec.radial_profile(r);
            sup = std::max(sup, v);
            lip = std::max(lip, std::abs(v - prev) / ((dmax - dmin) / grid));
            prev = v;
        }
        c.C_gamma = sup;
        c.C_gamma1 = omega0 * kernel_mass(spec, dmin, dmax);
        gamma_at_min = spec.radial_profile(dmin);
        gamma_at_max = spec.radial_profile(dmax);
        L_gamma = lip;
    }
    (void)gamma_at_min;  // enters L_aprime only through the (n-1) term, zero for n = 1

    c.C_a = 4.0 * omega0 * c.C_gamma;
    c.L_a = 4.0 * c.C_P * c.C_P * c.C_gamma;
    c.L_aprime = 2.0 * omega0 * (2.0 * c.C_P * L_gamma + gamma_at_max);
    c.gamma_a = 1.0 + 4.0 * c.C_P * c.C_P * c.C_gamma1;
    c.alpha_a = 1.0 / c.gamma_a;
    return c;
}

std::vector<double> AffineDecompositionDelta::coefficients(double delta) const {
    if (approx_case == DeltaCase::case1) return coeffs_case1(delta, partition, kernel);
    return coeffs_case2(delta, partition);
}

AffineDecompositionDelta build_affine_delta(const Mesh1D& mesh, const KernelSpec& spec,
                                            const DeltaPartition& p, DeltaCase approx_case,
                                            const QuadratureConfig& cfg) {
    AffineDecompositionDelta dec;
    dec.partition = snap_partition(p, mesh);
    dec.approx_case = approx_case;
    dec.kernel = spec;
    dec.matrices.reserve(dec.partition.anchors.size());
    for (double dk : dec.partition.anchors) {
        KernelSpec anchor = spec;
        anchor.delta = dk;
        dec.matrices.push_back(assemble_nonlocal(mesh, anchor, cfg));
    }
    return dec;
}

SymMatrix affine_matrix_eval(const AffineDecompositionDelta& dec, double delta) {
    const std::vector<double> theta = dec.coefficients(delta);
    // single-anchor combinations reproduce the anchor bitwise
    int nonzero = -1, count = 0;
    for (size_t k = 0; k < theta.size(); ++k)
        if (theta[k] != 0.0) {
            nonzero = static_cast<int>(k);
            ++count;
        }
    if (count == 1 && theta[nonzero] == 1.0) return dec.matrices[nonzero];

    SymMatrix out(dec.matrices.front().n());
    for (size_t k = 0; k < theta.size(); ++k)
        if (theta[k] != 0.0) out.axpy(theta[k], dec.matrices[k]);
    return out;
}

}  // namespace nlrb
