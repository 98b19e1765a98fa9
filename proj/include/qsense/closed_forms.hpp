#pragma once

// Analytic QFI/CFI expressions for one and two receivers. Where the published
// expressions disagree with the tensor engine, the engine-consistent form is
// the plain field and the published form carries a `_printed` suffix.

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace qsense::closed_forms {

namespace detail {
inline double guard(double den, double scale, const char* id) {
    if (!std::isfinite(den) || std::abs(den) <= 1e-12 * std::abs(scale))
        throw SingularFormula(id, "denominator vanishes");
    return den;
}
inline double sq(double x) { return x * x; }
} // namespace detail

struct SingleReceiver {
    double F_a, F_T, F_aT;
    double F_a_het, F_T_het;
    double sld_a, sld_T;   // L = sld * b^dagger b
};

inline SingleReceiver single_receiver(double a, double T, double R, double kappa) {
    if (!(T > 0.0)) throw InvalidInput("single_receiver: temperature must be positive");
    if (!(a >= 0.0)) throw InvalidInput("single_receiver: radius must be non-negative");
    const double P = R * R + a * a * pi * T * kappa;
    SingleReceiver r;
    r.F_a = 4.0 * pi * T * kappa / P;
    r.F_T = pi * a * a * kappa / (T * P);
    r.F_aT = 2.0 * a * pi * kappa / P;
    r.F_a_het = 4.0 * a * a * pi * pi * T * T * kappa * kappa / (P * P);
    r.F_T_het = pi * pi * std::pow(a, 4) * kappa * kappa / (P * P);
    r.sld_a = a > 0.0 ? 2.0 * R * R / (a * P) : INFINITY;
    r.sld_T = R * R / (T * P);
    return r;
}

struct TwoModeDisc {
    double u, J0, J1;
    double F_a, F_a_printed;
    double F_T, F_aT;
    double F_x0x0, F_y0y0, F_x0y0;                      // location block
    double F_x0x0_main, F_y0y0_main, F_x0y0_main;      // Delta r^2 numerator variant
    double F_a_het, F_T_het;
    double F_a_het_printed, F_T_het_printed;
    // SLD matrix elements M = [[g1, g2], [conj(g2), g1]]
    double g1_a, g1_a_printed;
    cd g2_a, g2_a_printed;
    double g1_T;
    cd g2_T, g2_T_printed;
    double g1_x0;
    cd g2_x0, g2_y0, g2_x0_printed, g2_y0_printed;
    double phase;           // 2 pi (v_x x0 + v_y y0)
    double phase_printed;   // v_x x0 + v_y y0
    // limits
    double F_a_dr0, F_a_a0, F_T_dr0;
};

/// Receivers at 0 and dr (cos phi, sin phi); disc of radius a centred at (x0, y0).
inline TwoModeDisc two_mode_disc(double a, double T, double x0, double y0, double R,
                                 double kappa, double lambda, double dr, double phi) {
    using detail::guard;
    using detail::sq;
    if (!(dr > 0.0)) throw InvalidInput("two_mode_disc: baseline must be positive");
    if (!(T > 0.0) || !(a > 0.0)) throw InvalidInput("two_mode_disc: a and T must be positive");
    TwoModeDisc r;
    const double k = kappa, L = lambda;
    r.u = 2.0 * a * dr * pi / (R * L);
    if (!std::isfinite(r.u)) throw InvalidInput("two_mode_disc: non-finite Bessel argument");
    const double J0 = r.J0 = bessel_j(0, r.u);
    const double J1 = r.J1 = bessel_j(1, r.u);
    const double P = pi * a * a * k * T + R * R;
    const double Q = 2.0 * pi * a * a * k * T + R * R;
    const double f1 = guard(pi * pi * a * a * dr * dr - L * L * R * R * J1 * J1,
                            pi * pi * a * a * dr * dr, "two_mode_disc.D_a");
    const double E = guard(dr * dr * P * P - a * a * k * k * L * L * R * R * T * T * J1 * J1,
                           dr * dr * P * P, "two_mode_disc.E");
    const double Ep = guard(dr * dr * P * P - k * k * L * L * R * R * T * T * J1 * J1,
                            dr * dr * P * P, "two_mode_disc.D_a_printed");
    const double Da = f1 * E;
    const double Da_printed = f1 * Ep;
    const double br = pi * a * dr * dr * P * (J0 * J0 + 1.0) - 2.0 * dr * L * R * Q * J0 * J1 +
                      a * k * L * L * R * R * T * (J0 * J0 + 1.0) * J1 * J1;
    r.F_a = 8.0 * pi * pi * a * dr * dr * k * T / Da * br;
    r.F_a_printed = 8.0 * pi * pi * a * dr * dr * k * T / Da_printed * br;
    r.F_T = 2.0 * k * a * a * (pi * dr * dr * P - k * L * L * R * R * T * J1 * J1) / (T * E);
    r.F_aT = 4.0 * pi * a * dr * k * (dr * P - a * k * L * R * T * J0 * J1) / E;

    const double vx = dr * std::cos(phi) / (L * R);
    const double vy = dr * std::sin(phi) / (L * R);
    const double den = guard(pi * dr * dr * P - k * L * L * R * R * T * J1 * J1, pi * dr * dr * P,
                             "two_mode_disc.location");
    const double c_app = 8.0 * pi * pi * R * R * L * L * k * T * J1 * J1 / den;
    const double c_main = 8.0 * pi * pi * dr * dr * k * T * J1 * J1 / den;
    r.F_x0x0 = c_app * vx * vx;
    r.F_y0y0 = c_app * vy * vy;
    r.F_x0y0 = c_app * vx * vy;
    r.F_x0x0_main = c_main * vx * vx;
    r.F_y0y0_main = c_main * vy * vy;
    r.F_x0y0_main = c_main * vx * vy;

    // heterodyne: C = I + Xi has eigenvalues p +- q
    const double X = dr * P;
    const double Y = a * k * L * R * T * J1;
    const double XY = guard(X * X - Y * Y, X * X, "two_mode_disc.het");
    r.F_a_het = 8.0 * pi * pi * a * a * k * k * T * T * dr * dr *
                ((1.0 + J0 * J0) * (X * X + Y * Y) - 4.0 * J0 * X * Y) / (XY * XY);
    {
        const double n = pi * a * a * k * T / (R * R);
        const double q = Y / (R * R * dr);
        const double p = P / (R * R);
        r.F_T_het = sq(n + q) / (T * T * sq(p + q)) + sq(n - q) / (T * T * sq(p - q));
    }
    {
        const double E4 = std::pow(E, 4);
        const double a2 = a * a, a4 = a2 * a2;
        r.F_a_het_printed =
            8.0 * pi * pi * a2 * k * k * T * T * std::pow(dr, 3) * P / E4 *
            (4.0 * std::pow(a, 5) * std::pow(k * L * R * T, 5) * J0 * std::pow(J1, 5) -
             2.0 * a2 * std::pow(dr, 3) * sq(k * L * R * T) * std::pow(P, 3) * (J0 * J0 + 1.0) *
                 J1 * J1 +
             std::pow(dr, 5) * std::pow(P, 5) * (J0 * J0 + 1.0) -
             4.0 * a * std::pow(dr, 4) * k * L * R * T * std::pow(P, 4) * J0 * J1 -
             7.0 * a4 * dr * std::pow(k * L * R * T, 4) * P * (J0 * J0 + 1.0) * std::pow(J1, 4) +
             16.0 * std::pow(a, 3) * dr * dr * std::pow(k * L * R * T, 3) * P * P * J0 *
                 std::pow(J1, 3));
        r.F_T_het_printed =
            2.0 * a2 * dr * dr * k * k * P / E4 *
            (pi * pi * a2 * std::pow(dr, 6) * std::pow(P, 5) -
             a4 * std::pow(k, 4) * std::pow(L, 6) * std::pow(R, 6) * std::pow(T, 4) *
                 (3.0 * pi * a2 * k * T + 7.0 * R * R) * std::pow(J1, 6) +
             std::pow(dr, 4) * L * L * R * R * std::pow(P, 3) *
                 (-5.0 * pi * pi * a4 * k * k * T * T - 2.0 * pi * a2 * k * R * R * T +
                  std::pow(R, 4)) *
                 J1 * J1 +
             a2 * dr * dr * k * k * std::pow(L, 4) * std::pow(R, 4) * T * T *
                 (7.0 * std::pow(pi, 3) * std::pow(a, 6) * std::pow(k * T, 3) +
                  19.0 * pi * pi * a4 * k * k * R * R * T * T + 10.0 * pi * a2 * k * std::pow(R, 4) * T -
                  2.0 * std::pow(R, 6)) *
                 std::pow(J1, 4));
    }

    r.phase_printed = vx * x0 + vy * y0;
    r.phase = 2.0 * pi * r.phase_printed;
    const cd e = std::polar(1.0, -r.phase);
    const cd e_pr = std::polar(1.0, -r.phase_printed);
    const double ga = 2.0 * pi * dr * dr * R * R;
    const double g1a_num = pi * a * dr * dr * P + L * R * J1 * (a * k * L * R * T * J1 - dr * Q * J0);
    const double g2a_num = a * J0 * (pi * dr * dr * P + k * L * L * R * R * T * J1 * J1) - dr * L * R * Q * J1;
    r.g1_a = ga / Da * g1a_num;
    r.g1_a_printed = ga / Da_printed * g1a_num;
    r.g2_a = ga / Da * g2a_num * e;
    r.g2_a_printed = ga / Da_printed * g2a_num * e_pr;
    r.g1_T = dr * dr * R * R * P / (T * E);
    const double gT = a * dr * k * L * std::pow(R, 3) * J1;
    r.g2_T = -gT * e / E;
    r.g2_T_printed = -gT * e_pr / (a * a * k * k * L * L * R * R * T * T * J1 * J1 - dr * dr * P * P);
    r.g1_x0 = 0.0;
    const double gx = -2.0 * pi * dr * dr * R * R * J1 / (a * den);
    const cd ex = std::polar(1.0, -r.phase + pi / 2.0);
    const cd ex_pr = std::polar(1.0, -r.phase_printed + pi / 2.0);
    r.g2_x0 = gx * ex * std::cos(phi);
    r.g2_y0 = gx * ex * std::sin(phi);
    r.g2_x0_printed = gx * ex_pr * std::cos(phi);
    r.g2_y0_printed = gx * ex_pr * std::sin(phi);

    const double eta = pi * a * a / (R * R);
    r.F_a_dr0 = 8.0 * pi * k * T / (R * R + 2.0 * pi * a * a * k * T);
    r.F_a_a0 = 8.0 * pi * k * T / (R * R);
    r.F_T_dr0 = 2.0 * eta * k / (T * (1.0 + 2.0 * eta * k * T));
    return r;
}

/// Matrices over (s_x, s_y) and (t_x, t_y); row/column 0 is x, 1 is y.
using Mat2 = Eigen::Matrix2d;

struct TwoPointSources {
    double phase_sv;   // s . v
    Mat2 F_ss;
    Mat2 F_tt, F_tt_printed;
    Mat2 F_st, F_st_printed;   // (s_i, t_j)
    Mat2 F_ss_limit;           // s -> 0, Delta T = 0
    Mat2 F_tt_limit, F_tt_limit_printed;
    // heterodyne, Delta T = 0 only (NaN otherwise)
    Mat2 F_s_het, F_s_het_printed, F_t_het, F_t_het_printed;
    // SLD elements, Delta T = 0 only; index 0 -> x component, 1 -> y component
    double g1_s[2];
    cd g2_s[2];
    double g1_t[2];
    cd g2_t[2];
    double delta_s, delta_t;
    // exact envelope eta2 via the general two-mode expression, order (s_x, s_y, t_x, t_y)
    RealMatrix F_exact;
};

struct GeneralTwoMode {
    RealMatrix F, F_printed;
    std::vector<double> g1;        // published normalisation
    std::vector<cd> g2;
    std::vector<double> m11;       // SLD matrix entries M[0][0] = 2 g1
    std::vector<cd> m12;           // M[0][1] = 2 g2
    double D, D_printed;
};

/// General two-mode QFI from chi = 1/2 + nbar, xi = <b2^dagger b1> and their derivatives.
inline GeneralTwoMode two_mode_general_qfi(double chi, cd xi, const std::vector<double>& dchi,
                                           const std::vector<cd>& dxi) {
    using detail::guard;
    if (!(4.0 * chi * chi - 1.0 > 0.0))
        throw InvalidInput("two_mode_general_qfi: requires 4 chi^2 - 1 > 0");
    if (dchi.size() != dxi.size()) throw InvalidInput("two_mode_general_qfi: size mismatch");
    const double c2 = chi * chi;
    const double x2 = std::norm(xi);
    const double f1 = -1.0 + 4.0 * c2 - 4.0 * x2;
    const double D = guard(f1 * (16.0 * c2 * c2 + (1.0 - 4.0 * x2) * (1.0 - 4.0 * x2) -
                                 8.0 * c2 * (1.0 + 4.0 * x2)),
                           std::pow(4.0 * c2 + 1.0, 3), "two_mode_general.D");
    const double Dp = guard(f1 * (16.0 * c2 * c2 + (1.0 - 4.0 * x2) * (1.0 - 4.0 * x2) -
                                  8.0 * c2 * (1.0 + x2)),
                            std::pow(4.0 * c2 + 1.0, 3), "two_mode_general.D_printed");
    const cd xc = std::conj(xi);
    const std::size_t m = dchi.size();
    GeneralTwoMode g;
    g.D = D;
    g.D_printed = Dp;
    g.F.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    g.F_printed.resizeLike(g.F);
    const double w = (1.0 - 4.0 * c2) * (1.0 - 4.0 * c2) - 4.0 * (1.0 + 4.0 * c2) * x2;
    const double a1 = 1.0 + 4.0 * c2 - 4.0 * x2;
    const double a2 = 1.0 - 4.0 * c2 + 4.0 * x2;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const cd di = dxi[i], dj = dxi[j];
            const double ci = dchi[i], cj = dchi[j];
            const cd common = std::conj(di) * dj * w + di * std::conj(dj) * w +
                              4.0 * xi * std::conj(di) * (xi * std::conj(dj) * a1 + 2.0 * chi * cj * a2) +
                              2.0 * ci * f1 *
                                  (-4.0 * chi * (xi * std::conj(dj) + xc * dj) +
                                   cj * (-1.0 + 4.0 * c2 + 4.0 * x2));
            const cd t = common + 4.0 * xc * di * (xc * dj * a1 + 2.0 * chi * cj * a2);
            const cd tp = common + 4.0 * xc * di * (xi * std::conj(dj) * a1 + 2.0 * chi * cj * a2);
            g.F(i, j) = (4.0 / D * t).real();
            g.F_printed(i, j) = (8.0 / Dp * tp).real();
        }
    const double dg1 = guard(16.0 * c2 * c2 - 8.0 * c2 * (4.0 * x2 + 1.0) + (1.0 - 4.0 * x2) * (1.0 - 4.0 * x2),
                             std::pow(4.0 * c2 + 1.0, 2), "two_mode_general.g1");
    for (std::size_t i = 0; i < m; ++i) {
        const cd dx = dxi[i];
        const double dc = dchi[i];
        const cd g1 = 2.0 * (4.0 * dc * x2 + 4.0 * dc * c2 - 4.0 * dx * xc * chi -
                             4.0 * std::conj(dx) * xi * chi - dc) / dg1;
        const cd g2 = 2.0 / D *
                      (-dx * (16.0 * x2 * c2 + 4.0 * x2 - 16.0 * c2 * c2 + 8.0 * c2 - 1.0) -
                       std::conj(dx) * (4.0 * xi * xi * (4.0 * x2 - 1.0) - 16.0 * xi * xi * c2) -
                       dc * (32.0 * xi * c2 * chi - 8.0 * xi * chi * (4.0 * x2 + 1.0)));
        g.g1.push_back(g1.real());
        g.g2.push_back(g2);
        g.m11.push_back(2.0 * g1.real());
        g.m12.push_back(2.0 * g2);
    }
    return g;
}

/// Two sources of flux eta*kappa*T_k each, separation s, centroid t, seen by a
/// two-receiver interferometer with spatial frequency v. The published forms
/// assume a point-like envelope (eta2 = 1); `F_exact` keeps eta2.
inline TwoPointSources two_point_sources(double Tm, double dT, double sx, double sy, double tx,
                                         double ty, double vx, double vy, double eta, double eta2,
                                         double kappa) {
    using detail::guard;
    using detail::sq;
    if (!(Tm > 0.0)) throw InvalidInput("two_point_sources: mean temperature must be positive");
    if (!(std::abs(dT) <= 2.0 * Tm)) throw InvalidInput("two_point_sources: |dT| must be <= 2 T");
    if (!(eta > 0.0)) throw InvalidInput("two_point_sources: eta must be positive");
    if (!(std::abs(eta2) <= 1.0)) throw InvalidInput("two_point_sources: |eta2| must not exceed 1");

    TwoPointSources r;
    const double e = eta, k = kappa, T = Tm;
    const double ek = e * k;
    const double ph = sx * vx + sy * vy;
    r.phase_sv = ph;
    const double c2 = std::cos(2.0 * pi * ph), c4 = std::cos(4.0 * pi * ph);
    const double v[2] = {vx, vy};
    const double A = 4.0 * T * T - dT * dT;

    const double Dss = guard(ek * A * (ek * ek * (-A) * c4 + 4.0 * (ek * (-dT * dT * ek + 4.0 * ek * T * T + 6.0 * T) + 1.0) * c2) -
                                 3.0 * std::pow(ek, 3) * A * A + 24.0 * ek * ek * T * (-A) +
                                 4.0 * ek * (dT * dT - 20.0 * T * T) - 16.0 * T,
                             16.0 * T, "two_point_sources.D_ss");
    const double num = ek * ek * A * (A * c4 + 16.0 * T * T * c2) -
                       ek * ek * (std::pow(dT, 4) - 24.0 * dT * dT * T * T + 80.0 * std::pow(T, 4)) -
                       128.0 * ek * std::pow(T, 3) - 32.0 * T * T;
    const double Dt = guard(4.0 * T + 4.0 * ek * T * T - dT * dT * ek - ek * A * c2, 4.0 * T,
                            "two_point_sources.D_t");
    const double Dst = guard(dT * dT * ek + ek * A * c2 - 4.0 * ek * T * T - 4.0 * T, 4.0 * T,
                             "two_point_sources.D_st");
    const double x = ek * T;
    const double den = 1.0 + 4.0 * x + 2.0 * x * x - 2.0 * x * x * c2;
    const double sn = std::sin(pi * ph), cs = std::cos(pi * ph);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double vv = v[i] * v[j];
            r.F_ss(i, j) = 2.0 * pi * pi * ek * vv / Dss * num;
            const double tt = vv * ek / Dt * (A * c2 + dT * dT + 4.0 * T * T);
            r.F_tt(i, j) = 8.0 * pi * pi * tt;
            r.F_tt_printed(i, j) = 16.0 * pi * pi * tt;
            const double st = dT * ek * T * vv / Dst;
            r.F_st(i, j) = 16.0 * pi * pi * st;
            r.F_st_printed(i, j) = 32.0 * pi * pi * st;
            r.F_ss_limit(i, j) = 4.0 * pi * pi * vv * ek * T;
            r.F_tt_limit(i, j) = 16.0 * pi * pi * vv * ek * T;
            r.F_tt_limit_printed(i, j) = 32.0 * pi * pi * vv * ek * T;
            if (dT == 0.0) {
                r.F_s_het(i, j) = 8.0 * pi * pi * x * x * vv * sn * sn *
                                  (sq(1.0 + 2.0 * x) + 2.0 * x * x * (1.0 + c2)) / (den * den);
                r.F_t_het(i, j) = 32.0 * pi * pi * vv * x * x * cs * cs / den;
                r.F_s_het_printed(i, j) =
                    8.0 * pi * pi * x * x * vv * sn * sn * sq(2.0 * x + 1.0) *
                    (1.0 - 14.0 * std::pow(x, 4) * c4 - 4.0 * x * x * c2 * (2.0 * x * (9.0 * x + 2.0) + 1.0) -
                     2.0 * x * (x * (x * (21.0 * x - 8.0) - 10.0) - 4.0)) /
                    std::pow(den, 4);
                r.F_t_het_printed(i, j) = 32.0 * pi * pi * x * x * vv * sq(2.0 * x + 1.0) * cs * cs /
                                          sq(-2.0 * x * x * c2 + 2.0 * x * (x + 2.0) + 1.0);
            } else {
                r.F_s_het(i, j) = r.F_t_het(i, j) = nan;
                r.F_s_het_printed(i, j) = r.F_t_het_printed(i, j) = nan;
            }
        }
    r.delta_s = 2.0 * pi * (tx * vx + ty * vy) - pi;
    r.delta_t = 2.0 * pi * (tx * vx + ty * vy) + pi / 2.0;
    for (int i = 0; i < 2; ++i) {
        if (dT == 0.0 && sn != 0.0) {
            r.g1_s[i] = pi * v[i] * (4.0 * x + 1.0) * cs / sn / den;
            r.g2_s[i] = pi * v[i] * (x * c2 + 3.0 * x + 1.0) / sn * std::polar(1.0, -r.delta_s) / den;
        } else {
            r.g1_s[i] = nan;
            r.g2_s[i] = nan;
        }
        r.g1_t[i] = dT == 0.0 ? 0.0 : nan;
        r.g2_t[i] = dT == 0.0 ? 2.0 * pi * v[i] * cs * std::polar(1.0, -r.delta_t) / (1.0 + x - x * c2)
                              : cd(nan, nan);
    }

    // exact path: xi_B = <b2^dagger b1> is the conjugate of <b1^dagger b2>
    const double x1 = tx + 0.5 * sx, y1 = ty + 0.5 * sy, x2 = tx - 0.5 * sx, y2 = ty - 0.5 * sy;
    const cd e1 = std::polar(1.0, 2.0 * pi * (vx * x1 + vy * y1));
    const cd e2 = std::polar(1.0, 2.0 * pi * (vx * x2 + vy * y2));
    const double h = 0.5 * k * e * eta2;
    const double w1 = 2.0 * T - dT, w2 = 2.0 * T + dT;
    const cd xiD = h * (w1 * e1 + w2 * e2);
    std::vector<cd> dxi;
    for (int i = 0; i < 2; ++i) dxi.push_back(std::conj(h * cd(0.0, pi * v[i]) * (w1 * e1 - w2 * e2)));
    for (int i = 0; i < 2; ++i) dxi.push_back(std::conj(cd(0.0, 2.0 * pi * v[i]) * xiD));
    const double chi = 0.5 + 2.0 * e * k * T;
    // NaN where the state is pure in one mode (|xi| = nbar), e.g. coincident point sources
    try {
        r.F_exact = two_mode_general_qfi(chi, std::conj(xiD), {0.0, 0.0, 0.0, 0.0}, dxi).F;
    } catch (const SingularFormula&) {
        r.F_exact = RealMatrix::Constant(4, 4, nan);
    }
    return r;
}

} // namespace qsense::closed_forms
