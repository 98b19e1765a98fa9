#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gaussian_fisher.hpp"
#include "visibility.hpp"

namespace qsense {

struct CfiReport {
    std::vector<std::string> labels;
    RealMatrix heterodyne;
};

/// Heterodyne outcomes are zero-mean circular complex Gaussians with covariance
/// C = I + Xi, so F_ij = Tr[C^-1 dC_i C^-1 dC_j].
inline CfiReport heterodyne_cfi(const VisibilitySet& vis) {
    const Eigen::Index n = vis.Xi.rows();
    const Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(n, n) + Eigen::MatrixXcd(vis.Xi);
    Eigen::LLT<Eigen::MatrixXcd> llt(c);
    if (llt.info() != Eigen::Success)
        throw SingularMatrix(0, "heterodyne_cfi: outcome covariance I + Xi not positive definite");
    std::vector<Eigen::MatrixXcd> w;
    for (const auto& d : vis.dXi) w.push_back(llt.solve(Eigen::MatrixXcd(d)));
    CfiReport r;
    r.labels = vis.labels;
    const Eigen::Index m = static_cast<Eigen::Index>(w.size());
    r.heterodyne.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            r.heterodyne(i, j) = (w[i] * w[j]).trace().real();
    r.heterodyne = 0.5 * (r.heterodyne + r.heterodyne.transpose()).eval();
    return r;
}

/// Fisher information of photon counting in the detection modes. Requires the
/// state to be a product of thermal states in that basis.
inline double photon_counting_cfi(const DetectionModes& modes, const VisibilitySet& vis,
                                  const ComplexMatrix& dxi, double tol = 1e-8) {
    const ComplexMatrix& v = modes.V;
    const ComplexMatrix occ = v * vis.Xi.transpose() * v.adjoint();
    const double scale = std::max(max_abs(vis.Xi), 1e-300);
    for (Eigen::Index i = 0; i < occ.rows(); ++i)
        for (Eigen::Index j = 0; j < occ.cols(); ++j)
            if (i != j && std::abs(occ(i, j)) > tol * scale)
                throw NotProductState(
                    "photon_counting_cfi: detection modes do not diagonalise the state");
    const ComplexMatrix dn = v * dxi.transpose() * v.adjoint();
    const double dscale = max_abs(dxi);
    double f = 0.0;
    for (Eigen::Index l = 0; l < occ.rows(); ++l) {
        const double nu = occ(l, l).real();
        const double dnu = dn(l, l).real();
        if (std::abs(dnu) <= 1e-14 * dscale) continue;   // empty or insensitive mode
        f += dnu * dnu / (nu * (nu + 1.0));
    }
    return f;
}

} // namespace qsense
