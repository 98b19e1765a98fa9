#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace qsense {

using cd = std::complex<double>;

/// Dense complex matrix, row-major storage.
using ComplexMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<cd, Eigen::Dynamic, 1>;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

/// max_ij |m_ij|, zero for empty matrices
template <class M>
double max_abs(const M& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace detail {

// Power series, used for |x| < 8 where cancellation stays below ~1e-14.
inline double bessel_series(int order, double x) {
    const double h = 0.5 * x;
    const double h2 = h * h;
    double term = 1.0;
    for (int k = 1; k <= order; ++k) term *= h / k;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -h2 / (double(k) * double(k + order));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) && k > 2) break;
    }
    return sum;
}

// Miller backward recurrence normalised by J0 + 2 sum J_2k = 1. x > 0.
inline double bessel_miller(int order, double x) {
    int start = static_cast<int>(std::max<double>(order, 1.5 * x)) + 40;
    start += start % 2;
    double jp = 0.0;     // J_{k+1}
    double jk = 1e-30;   // J_k
    double norm = 0.0;
    double saved = (order == start) ? jk : 0.0;
    for (int k = start; k >= 1; --k) {
        const double jm = (2.0 * k / x) * jk - jp;   // J_{k-1}
        jp = jk;
        jk = jm;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * jk;
        if (k - 1 == order) saved = jk;
        if (std::abs(jk) > 1e200) {
            jk *= 1e-200;
            jp *= 1e-200;
            norm *= 1e-200;
            saved *= 1e-200;
        }
    }
    norm += jk;   // J_0
    return saved / norm;
}

// Hankel expansion, |x| large.
inline double bessel_asymptotic(int order, double x) {
    const double mu = 4.0 * order * order;
    const double z = 8.0 * x;
    double p = 1.0, q = 0.0;
    double a = 1.0;
    for (int k = 1; k < 30; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = a * (mu - odd * odd) / (k * z);
        if (std::abs(next) > std::abs(a)) break;
        a = next;
        switch (k % 4) {
        case 1: q += a; break;
        case 2: p -= a; break;
        case 3: q -= a; break;
        default: p += a; break;
        }
        if (std::abs(a) < 1e-17) break;
    }
    const double chi = x - (0.5 * order + 0.25) * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

/// Integer-order J_n, n >= 0. Only J0 and J1 are part of the public surface.
inline double bessel_jn(int order, double x) {
    if (!std::isfinite(x)) throw InvalidInput("bessel_j: argument must be finite");
    const double sign = (x < 0 && order % 2 == 1) ? -1.0 : 1.0;
    const double ax = std::abs(x);
    if (ax < 8.0) return sign * bessel_series(order, ax);
    if (ax > 1000.0 && order <= 2) return sign * bessel_asymptotic(order, ax);
    return sign * bessel_miller(order, ax);
}

} // namespace detail

/// Bessel function of the first kind J0 or J1.
inline double bessel_j(int order, double x) {
    if (order != 0 && order != 1)
        throw InvalidInput("bessel_j: order must be 0 or 1");
    return detail::bessel_jn(order, x);
}

/// 2 J1(u)/u, equal to 1 at u = 0.
inline double jinc(double u) {
    if (std::abs(u) < 8.0) {
        const double h2 = 0.25 * u * u;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 60; ++k) {
            term *= -h2 / (double(k) * double(k + 1));
            sum += term;
            if (std::abs(term) < 1e-18) break;
        }
        return sum;
    }
    return 2.0 * bessel_j(1, u) / u;
}

/// d/du of jinc(u).
inline double jinc_prime(double u) {
    if (std::abs(u) < 8.0) {
        // sum_k (-1)^k k (u/2)^(2k-1) / (k! (k+1)!)
        const double h = 0.5 * u;
        const double h2 = h * h;
        double c = 1.0 / 2.0;   // 1/(1! 2!)
        double hp = h;          // h^(2k-1)
        double sum = -c * hp;
        for (int k = 2; k < 60; ++k) {
            c /= double(k) * double(k + 1);
            hp *= h2;
            const double t = ((k % 2) ? -1.0 : 1.0) * k * c * hp;
            sum += t;
            if (std::abs(t) < 1e-18) break;
        }
        return sum;
    }
    return 2.0 * (u * bessel_j(0, u) - 2.0 * bessel_j(1, u)) / (u * u);
}

struct EigenResult {
    RealVector values;       // descending
    ComplexMatrix vectors;   // columns
};

/// Eigendecomposition of a Hermitian matrix with deterministic ordering and phases.
inline EigenResult hermitian_eig(const ComplexMatrix& m, double herm_tol = 1e-10) {
    if (m.rows() == 0 || m.rows() != m.cols())
        throw InvalidInput("hermitian_eig: matrix must be square and non-empty");
    if (!m.allFinite()) throw InvalidInput("hermitian_eig: non-finite entry");
    const double asym = max_abs(ComplexMatrix(m - m.adjoint()));
    if (asym > herm_tol)
        throw InvalidInput("hermitian_eig: matrix is not Hermitian (max |M - M^H| = " +
                           std::to_string(asym) + ")");

    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw InvalidInput("hermitian_eig: no convergence");

    const Eigen::Index n = m.rows();
    EigenResult r;
    r.values.resize(n);
    r.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = n - 1 - k;
        r.values(k) = es.eigenvalues()(src);
        ComplexVector v = es.eigenvectors().col(src);
        double big = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) big = std::max(big, std::abs(v(i)));
        Eigen::Index pick = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(v(i)) >= big * (1.0 - 1e-9)) { pick = i; break; }
        }
        const cd ph = std::conj(v(pick)) / std::abs(v(pick));
        v *= ph;
        v(pick) = cd(v(pick).real(), 0.0);
        r.vectors.col(k) = v;
    }
    return r;
}

/// LU factorisation with an explicit singularity check on the U pivots.
class LinearSolver {
public:
    explicit LinearSolver(const ComplexMatrix& a, double rel_pivot_tol = 1e-14) {
        if (a.rows() == 0 || a.rows() != a.cols())
            throw InvalidInput("solve_linear: matrix must be square and non-empty");
        scale_ = max_abs(a);
        if (!(scale_ > 0.0)) throw SingularMatrix(0, "solve_linear: zero matrix (pivot 0)");
        lu_.compute(Eigen::MatrixXcd(a));
        const auto& lu = lu_.matrixLU();
        for (Eigen::Index k = 0; k < lu.rows(); ++k) {
            if (!(std::abs(lu(k, k)) >= rel_pivot_tol * scale_))
                throw SingularMatrix(static_cast<std::size_t>(k),
                                     "solve_linear: pivot " + std::to_string(k) +
                                         " below threshold");
        }
    }

    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& b) const {
        if (b.rows() != lu_.rows()) throw InvalidInput("solve_linear: size mismatch");
        return lu_.solve(b);
    }

    double scale() const { return scale_; }

private:
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    double scale_ = 0.0;
};

inline ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b) {
    LinearSolver s(a);
    return s.solve(b);
}

/// Rectangular brightness grid. Row 0 is the northern (largest y) row;
/// origin is the south-west corner of the grid.
struct PixelMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double pixel_size = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<double> values;   // row-major, K

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double center_x(std::size_t c) const { return origin_x + (double(c) + 0.5) * pixel_size; }
    double center_y(std::size_t r) const {
        return origin_y + (double(rows - 1 - r) + 0.5) * pixel_size;
    }
};

/// Midpoint rule sum_pixels T(p) kernel(x_p, y_p) dA.
template <class Kernel>
cd integrate_pixels(const PixelMap& map, Kernel&& kernel) {
    if (map.rows == 0 || map.cols == 0 || map.values.size() != map.rows * map.cols)
        throw InvalidInput("integrate_pixels: empty or inconsistent map");
    const double area = map.pixel_size * map.pixel_size;
    cd total = 0.0;
    for (std::size_t r = 0; r < map.rows; ++r) {
        const double y = map.center_y(r);
        cd row = 0.0;
        for (std::size_t c = 0; c < map.cols; ++c) {
            const double t = map.at(r, c);
            if (t == 0.0) continue;
            row += t * cd(kernel(map.center_x(c), y));
        }
        total += row;
    }
    return total * area;
}

} // namespace qsense
