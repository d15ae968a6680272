#include "nlrb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace nlrb {

double gram_norm(const SymMatrix& g, const Vector& v) {
    if (g.n() != v.size()) throw std::invalid_argument("gram_norm: dimension mismatch");
    return std::sqrt(g.quad(v));
}

double generalized_eig_max(const SymMatrix& a, const SymMatrix& b) {
    if (a.n() != b.n()) throw std::invalid_argument("generalized_eig_max: dimension mismatch");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat(), b.mat());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("generalized eigenvalue solver failed");
    return es.eigenvalues().maxCoeff();
}

}  // namespace nlrb
