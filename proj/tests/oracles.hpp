#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include <qsense/numerics.hpp>
#include <qsense/validation.hpp>

namespace oracle {

using qsense::cd;
using qsense::ComplexMatrix;
using qsense::RealMatrix;

/// J_n(x) from the power series in long double. Good to ~1e-15 for |x| <= 12.
inline double bessel_ld(int n, double xd) {
    const long double x = xd, h = x / 2.0L;
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= h / k;
    long double sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= -h * h / ((long double)k * (k + n));
        sum += term;
        if (std::fabs((double)term) < 1e-22) break;
    }
    return (double)sum;
}

struct BesselRow {
    double x, j0, j1, j2;
};

/// Reference values computed with mpmath at 30 digits.
inline const std::vector<BesselRow>& bessel_table() {
    static const std::vector<BesselRow> t = {
        {0.5, .93846980724081290423, .24226845767487388638, .030604023458682641307},
        {2.0, .22389077914123566805, .5767248077568733872, .35283402861563771915},
        {7.9, .19436184484127823969, .21917939992175120327, -.1388733891648855325},
        {8.0, .17165080713755390609, .23463634685391462438, -.11299172042407525},
        {8.1, .1475174540443776703, .24760776698159287663, -.086379733802009056103},
        {12.5, .14688405470042110231, -.16548380461475971846, -.17336146343878265726},
        {25, .096266783275958116174, -.12535024958028990465, -.10629480324238130855},
        {33.3, .063338485947521251681, .12386214790148009055, -.055899317905390314677},
        {49.9, .045788625467906904725, -.1027969573688854436, -.049908743999725960698},
        {50, .055812327669251815005, -.097511828125175137661, -.059712800794258820511},
        {-3.7, -.39923020337119111533, -.053833987745461790513, .42832965620657586556},
        {120, .071823415829156127576, -.011805211433001891117, -.072020169353039492428},
        {1500, -.016085852188690328857, -.012876202473191770333, .016068683918726073163},
    };
    return t;
}

/// Thermal-state QFI in the eigenbasis of the occupation matrix N:
/// F_ij = sum_kl 2 Re[(dN_i)_kl (dN_j)_lk] / (nu_k + nu_l + 2 nu_k nu_l).
inline RealMatrix eigen_qfi(const ComplexMatrix& n, const std::vector<ComplexMatrix>& dn) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(n)};
    const Eigen::MatrixXcd u = es.eigenvectors();
    const Eigen::VectorXd nu = es.eigenvalues();
    std::vector<Eigen::MatrixXcd> d;
    for (const auto& x : dn) d.push_back(u.adjoint() * x * u);
    const Eigen::Index m = static_cast<Eigen::Index>(dn.size());
    RealMatrix f = RealMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index k = 0; k < nu.size(); ++k)
                for (Eigen::Index l = 0; l < nu.size(); ++l)
                    f(i, j) += 2.0 * (d[i](k, l) * d[j](l, k)).real() / (nu(k) + nu(l) + 2.0 * nu(k) * nu(l));
    return f;
}

/// Haar-ish random unitary from the QR of a complex Gaussian matrix (Box-Muller).
inline ComplexMatrix random_unitary(qsense::Rng& rng, Eigen::Index n) {
    auto gauss = [&] {
        const double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * qsense::pi * u2);
    };
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = cd(gauss(), gauss());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

/// Random Hermitian positive definite N = U diag(nu) U^dagger.
inline ComplexMatrix random_occupations(qsense::Rng& rng, Eigen::Index n, double lo, double hi) {
    const ComplexMatrix u = random_unitary(rng, n);
    Eigen::VectorXd nu(n);
    for (Eigen::Index i = 0; i < n; ++i) nu(i) = rng.log_uniform(lo, hi);
    ComplexMatrix m = u * nu.cast<cd>().asDiagonal() * u.adjoint();
    return (0.5 * (m + m.adjoint())).eval();
}

inline ComplexMatrix random_hermitian(qsense::Rng& rng, Eigen::Index n) {
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cd(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return (0.5 * (m + m.adjoint())).eval();
}

} // namespace oracle
