#ifndef NLRB_LINALG_HPP
#define NLRB_LINALG_HPP

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>

namespace nlrb {

using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Symmetry is enforced on write: every store goes
/// through set()/add(), which mirror across the diagonal, so stored entries
/// are symmetric to 0 ulp.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : m_(Eigen::MatrixXd::Zero(n, n)) {}

    int n() const { return static_cast<int>(m_.rows()); }

    double operator()(int i, int j) const { return m_(i, j); }

    void set(int i, int j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }
    void add(int i, int j, double v) {
        m_(i, j) += v;
        if (i != j) m_(j, i) += v;
    }

    const Eigen::MatrixXd& mat() const { return m_; }

    Vector apply(const Vector& v) const { return m_.selfadjointView<Eigen::Lower>() * v; }

    /// v^T A v, clamping tiny negative round-off to zero.
    double quad(const Vector& v) const {
        double q = v.dot(apply(v));
        return q < 0.0 ? 0.0 : q;
    }

    SymMatrix& axpy(double alpha, const SymMatrix& other) {
        m_ += alpha * other.m_;
        return *this;
    }
    SymMatrix& scale(double alpha) {
        m_ *= alpha;
        return *this;
    }

private:
    Eigen::MatrixXd m_;
};

/// Cholesky factorization of an SPD SymMatrix. Construction throws if the
/// matrix is not positive definite (which downstream signals broken assembly
/// or a violated coercivity condition).
class CholeskyFactor {
public:
    explicit CholeskyFactor(const SymMatrix& a, const std::string& what = "matrix")
        : llt_(a.mat()) {
        if (llt_.info() != Eigen::Success)
            throw std::runtime_error("Cholesky factorization failed for " + what);
    }

    Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }
    Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// sqrt(v^T G v) with non-negative clamp; G must be positive semidefinite.
double gram_norm(const SymMatrix& g, const Vector& v);

/// Largest eigenvalue of the pencil A x = lambda B x with A symmetric and
/// B SPD. Used for the discrete Poincare constant and the discrete eta
/// surrogate.
double generalized_eig_max(const SymMatrix& a, const SymMatrix& b);

}  // namespace nlrb

#endif
