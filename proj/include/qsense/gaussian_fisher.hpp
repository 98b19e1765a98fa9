#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "numerics.hpp"
#include "visibility.hpp"

namespace qsense {

/// How the 4n^2 x 4n^2 system is solved. `block` uses the exact decoupling of
/// the system into the two mixed creation/annihilation slot blocks; `dense`
/// factorises the full matrix.
enum class SolveStrategy { block, dense };

struct FisherOptions {
    std::size_t max_modes = 24;
    SolveStrategy strategy = SolveStrategy::block;
    /// Test hook: flips the sign of the Omega (x) Omega term.
    bool flip_pairing = false;
};

struct QfiMatrix {
    std::vector<std::string> labels;
    RealMatrix F;
    double imag_residue = 0.0;   // max |Im F_ij| / max |F_ij| before realification
};

struct SldMatrix {
    std::string label;
    ComplexMatrix M;
    double asymmetry = 0.0;   // max |M - M^H| before Hermitisation
};

struct DetectionModes {
    std::string label;
    ComplexMatrix V;             // rows: detection modes over receiver modes
    RealVector D;                // SLD eigenvalues, descending
    RealVector occupations;      // mean photon number per detection mode
};

struct FisherSolution {
    QfiMatrix qfi;
    std::vector<ComplexMatrix> A;   // unflattened solutions, one per parameter
};

/// Omega = direct sum of [[0, 1], [-1, 0]].
inline RealMatrix omega_matrix(std::size_t n) {
    RealMatrix o = RealMatrix::Zero(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        o(2 * i, 2 * i + 1) = 1.0;
        o(2 * i + 1, 2 * i) = -1.0;
    }
    return o;
}

/// The full matrix Sigma (x) Sigma + 1/4 Omega (x) Omega, row index alpha*2n + beta.
inline ComplexMatrix kron_system(const ComplexMatrix& sigma, bool flip_pairing = false) {
    const Eigen::Index m = sigma.rows();
    const RealMatrix om = omega_matrix(static_cast<std::size_t>(m / 2));
    const double q = flip_pairing ? -0.25 : 0.25;
    ComplexMatrix big(m * m, m * m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            for (Eigen::Index c = 0; c < m; ++c)
                for (Eigen::Index d = 0; d < m; ++d)
                    big(a * m + b, c * m + d) = sigma(a, c) * sigma(b, d) + q * om(a, c) * om(b, d);
    return big;
}

namespace detail {

inline void check_state(const CovarianceState& st, const FisherOptions& opt) {
    const std::size_t n = st.n_modes();
    if (n == 0 || st.Sigma.rows() != st.Sigma.cols())
        throw InvalidInput("qfi_matrix: empty or non-square covariance");
    if (st.dSigma.empty()) throw InvalidInput("qfi_matrix: no parameter derivatives");
    if (n > opt.max_modes)
        throw CapExceeded("qfi_matrix: " + std::to_string(n) + " modes exceed the cap of " +
                          std::to_string(opt.max_modes) + " (raise it with --max-modes)");
    if (n > 32) {
        const double dim = 4.0 * double(n) * double(n);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%zu modes: full system is %.0f x %.0f (%.1f GB dense), block solve %.0f x %.0f",
                      n, dim, dim, dim * dim * 16.0 / 1e9, dim / 4.0, dim / 4.0);
        diagnostic(buf);
    }
}

[[noreturn]] inline void degenerate(const SingularMatrix& e) {
    throw DegenerateState("qfi_matrix: singular system at pivot " + std::to_string(e.pivot) +
                          " (vacuum or rank-deficient state)");
}

inline std::vector<ComplexMatrix> solve_dense(const CovarianceState& st, bool flip) {
    const Eigen::Index m = st.Sigma.rows();
    const ComplexMatrix big = kron_system(st.Sigma, flip);
    Eigen::MatrixXcd rhs(m * m, static_cast<Eigen::Index>(st.dSigma.size()));
    for (std::size_t k = 0; k < st.dSigma.size(); ++k)
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b) rhs(a * m + b, k) = st.dSigma[k](a, b);
    Eigen::MatrixXcd x;
    try {
        LinearSolver lu(big);
        x = lu.solve(rhs);
    } catch (const SingularMatrix& e) {
        degenerate(e);
    }
    std::vector<ComplexMatrix> out;
    for (std::size_t k = 0; k < st.dSigma.size(); ++k) {
        ComplexMatrix a(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) a(i, j) = x(i * m + j, k);
        out.push_back(a);
    }
    return out;
}

// Sigma and Omega only connect annihilation with creation slots, so the rows
// (ann, cre) couple exclusively to the columns (cre, ann) and vice versa. Both
// blocks are extracted from the full matrix element formula and solved
// separately; the (ann, ann) and (cre, cre) unknowns have zero right-hand side.
inline std::vector<ComplexMatrix> solve_block(const CovarianceState& st, bool flip) {
    const Eigen::Index n = static_cast<Eigen::Index>(st.n_modes());
    const Eigen::Index m = 2 * n;
    const RealMatrix om = omega_matrix(static_cast<std::size_t>(n));
    const double q = flip ? -0.25 : 0.25;
    const auto& S = st.Sigma;
    auto element = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c, Eigen::Index d) {
        return S(a, c) * S(b, d) + q * om(a, c) * om(b, d);
    };
    const std::size_t np = st.dSigma.size();
    for (const auto& d : st.dSigma)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (d(2 * i, 2 * j) != cd(0.0) || d(2 * i + 1, 2 * j + 1) != cd(0.0))
                    return solve_dense(st, flip);

    std::vector<ComplexMatrix> out(np, ComplexMatrix::Zero(m, m));
    // rows (first_row_type) -> unknowns of the opposite type pattern
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::Index ra = pass == 0 ? 0 : 1;   // slot offset of alpha in the rows
        const Eigen::Index rb = 1 - ra;
        const Eigen::Index ca = rb, cb = ra;          // unknown slots
        Eigen::MatrixXcd blk(n * n, n * n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index k = 0; k < n; ++k)
                    for (Eigen::Index l = 0; l < n; ++l)
                        blk(i * n + j, k * n + l) =
                            element(2 * i + ra, 2 * j + rb, 2 * k + ca, 2 * l + cb);
        Eigen::MatrixXcd rhs(n * n, static_cast<Eigen::Index>(np));
        for (std::size_t p = 0; p < np; ++p)
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    rhs(i * n + j, p) = st.dSigma[p](2 * i + ra, 2 * j + rb);
        Eigen::MatrixXcd x;
        try {
            LinearSolver lu(blk);
            x = lu.solve(rhs);
        } catch (const SingularMatrix& e) {
            degenerate(e);
        }
        for (std::size_t p = 0; p < np; ++p)
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index l = 0; l < n; ++l) out[p](2 * k + ca, 2 * l + cb) = x(k * n + l, p);
    }
    return out;
}

} // namespace detail

/// Solves the QFI system for every parameter of the state.
inline FisherSolution fisher_solve(const CovarianceState& st, const FisherOptions& opt = {}) {
    detail::check_state(st, opt);
    FisherSolution sol;
    sol.A = opt.strategy == SolveStrategy::dense ? detail::solve_dense(st, opt.flip_pairing)
                                                 : detail::solve_block(st, opt.flip_pairing);
    const std::size_t np = st.dSigma.size();
    ComplexMatrix f(np, np);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j)
            f(i, j) = 0.5 * (st.dSigma[j].array() * sol.A[i].array()).sum();
    const double big = max_abs(f);
    double im = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) im = std::max(im, std::abs(f.data()[i].imag()));
    sol.qfi.labels = st.labels;
    sol.qfi.imag_residue = big > 0.0 ? im / big : im;
    if (sol.qfi.imag_residue > 1e-9) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "QFI imaginary residue %.3e above 1e-9", sol.qfi.imag_residue);
        diagnostic(buf);
    }
    RealMatrix re = f.real();
    sol.qfi.F = 0.5 * (re + re.transpose());
    return sol;
}

inline QfiMatrix qfi_matrix(const CovarianceState& st, const FisherOptions& opt = {}) {
    return fisher_solve(st, opt).qfi;
}

/// M[j][k] = A[cre_j][ann_k], Hermitised.
inline SldMatrix sld_from_solution(const ComplexMatrix& a, const std::string& label) {
    const Eigen::Index n = a.rows() / 2;
    SldMatrix s;
    s.label = label;
    s.M.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) s.M(j, k) = a(2 * j + 1, 2 * k);
    s.asymmetry = max_abs(ComplexMatrix(s.M - s.M.adjoint()));
    if (s.asymmetry > 1e-8 * std::max(1.0, max_abs(s.M))) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "SLD matrix for %s asymmetric by %.3e before symmetrisation",
                      label.c_str(), s.asymmetry);
        diagnostic(buf);
    }
    s.M = (0.5 * (s.M + s.M.adjoint())).eval();
    return s;
}

inline SldMatrix sld_matrix(const CovarianceState& st, const std::string& label,
                            const FisherOptions& opt = {}) {
    for (std::size_t k = 0; k < st.labels.size(); ++k) {
        if (st.labels[k] != label) continue;
        CovarianceState one;
        one.Sigma = st.Sigma;
        one.labels = {label};
        one.dSigma = {st.dSigma[k]};
        return sld_from_solution(fisher_solve(one, opt).A[0], label);
    }
    throw InvalidParameter("sld_matrix: no derivative for parameter '" + label + "'");
}

/// Eigenmodes of the SLD. Occupations are <d_l^dagger d_l> for d = V b, i.e.
/// the diagonal of V Xi^T V^dagger with Xi(i, j) = <b_i^dagger b_j>.
inline DetectionModes detection_modes(const SldMatrix& sld, const VisibilitySet& vis) {
    const EigenResult e = hermitian_eig(sld.M);
    DetectionModes d;
    d.label = sld.label;
    d.D = e.values;
    d.V = e.vectors.adjoint();
    const ComplexMatrix occ = d.V * vis.Xi.transpose() * d.V.adjoint();
    d.occupations = occ.diagonal().real();
    return d;
}

struct CrbResult {
    std::vector<std::string> labels;
    std::vector<double> std_dev;   // per parameter
    RealMatrix covariance;         // (N F)^-1
};

/// Relative eigenvalue threshold below which the QFI is treated as singular.
inline constexpr double crb_null_threshold = 1e-12;

/// Quantum Cramer-Rao bound for N independent samples.
inline CrbResult qcrb(const QfiMatrix& q, double samples) {
    if (!(samples >= 1.0)) throw InvalidInput("qcrb: samples must be >= 1");
    const Eigen::Index m = q.F.rows();
    if (m == 0) throw InvalidInput("qcrb: empty QFI");
    CrbResult r;
    r.labels = q.labels;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(q.F) * samples);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < m; ++k) {
        if (!(top > 0.0) || ev(k) <= crb_null_threshold * top) {
            std::string dir;
            for (Eigen::Index i = 0; i < m; ++i) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%s%+.4f*%s", i ? " " : "", es.eigenvectors()(i, k),
                              q.labels[static_cast<std::size_t>(i)].c_str());
                dir += buf;
            }
            throw UnidentifiableParameter("qcrb: QFI singular along direction (" + dir + ")");
        }
    }
    const Eigen::MatrixXd& u = es.eigenvectors();
    r.covariance = u * ev.cwiseInverse().asDiagonal() * u.transpose();
    for (Eigen::Index i = 0; i < m; ++i) r.std_dev.push_back(std::sqrt(r.covariance(i, i)));
    return r;
}

} // namespace qsense
