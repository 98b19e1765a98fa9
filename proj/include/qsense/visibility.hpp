#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "scenario.hpp"

namespace qsense {

enum class DerivativeMode { analytic, finite_difference };

/// Second moments of the receiver modes. Xi(i, j) = <b_i^dagger b_j>.
struct VisibilitySet {
    std::size_t n_modes = 0;
    double nbar = 0.0;
    ComplexMatrix Xi;
    std::vector<std::string> labels;     // parameter ids, aligned with dXi
    std::vector<ComplexMatrix> dXi;

    const ComplexMatrix& d(const std::string& label) const {
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] == label) return dXi[k];
        throw InvalidParameter("no derivative for parameter '" + label + "'");
    }
};

/// Covariance in the ordering (b1, b1^dagger, b2, b2^dagger, ...).
struct CovarianceState {
    ComplexMatrix Sigma;
    std::vector<std::string> labels;
    std::vector<ComplexMatrix> dSigma;

    std::size_t n_modes() const { return static_cast<std::size_t>(Sigma.rows() / 2); }
};

/// Spatial frequency (v_x, v_y) between receivers i and j: (r_j - r_i) / (lambda R).
inline std::array<double, 2> spatial_frequency(const Scenario& s, std::size_t i, std::size_t j) {
    const auto& p = s.array.positions;
    const double lr = s.physics.wavelength * s.physics.platform_height;
    return {(p[j][0] - p[i][0]) / lr, (p[j][1] - p[i][1]) / lr};
}

/// Sigma assembled from Xi; `vacuum` adds the 1/2 on the diagonal pairing slots.
inline ComplexMatrix sigma_from_xi(const ComplexMatrix& xi, bool vacuum) {
    const Eigen::Index n = xi.rows();
    ComplexMatrix s = ComplexMatrix::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = (vacuum && i == j) ? 0.5 : 0.0;
            s(2 * i, 2 * j + 1) = d + xi(j, i);
            s(2 * i + 1, 2 * j) = d + xi(i, j);
        }
    return s;
}

namespace detail {

inline double flux_factor(const Scenario& s) {
    const double R = s.physics.platform_height;
    return s.physics.kappa / (R * R);
}

// Xi entry for one uniform disc at center (cx, cy) with temperature t.
// `envelope` false gives the point-source limit.
inline cd disc_entry(const Scenario& s, double a, double t, double cx, double cy, double vx,
                     double vy, bool envelope) {
    const double nb = pi * a * a * t * flux_factor(s);
    const double vr = std::hypot(vx, vy);
    const double env = envelope ? jinc(2.0 * pi * a * vr) : 1.0;
    return nb * env * std::polar(1.0, 2.0 * pi * (cx * vx + cy * vy));
}

inline ComplexMatrix pixel_visibility(const Scenario& s, const PixelMap& m) {
    const std::size_t n = s.n_modes();
    const double k = flux_factor(s);
    ComplexMatrix xi(n, n);
    const double nbar = k * integrate_pixels(m, [](double, double) { return 1.0; }).real();
    for (std::size_t i = 0; i < n; ++i) {
        xi(i, i) = nbar;
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto v = spatial_frequency(s, i, j);
            const cd val = k * integrate_pixels(m, [&](double x, double y) {
                return std::polar(1.0, 2.0 * pi * (v[0] * x + v[1] * y));
            });
            xi(i, j) = val;
            xi(j, i) = std::conj(val);
        }
    }
    return xi;
}

} // namespace detail

/// n-bar = (kappa/R^2) * integral of T_eff.
inline double mean_photon_number(const Scenario& s) {
    const double k = detail::flux_factor(s);
    if (auto* d = std::get_if<UniformDisc>(&s.source))
        return pi * d->radius * d->radius * d->temperature * k;
    if (auto* t = std::get_if<TwoDiscs>(&s.source))
        return pi * t->radius * t->radius * (t->t1 + t->t2) * k;
    const auto& m = std::get<PixelSource>(s.source).map;
    return k * integrate_pixels(m, [](double, double) { return 1.0; }).real();
}

/// Xi without derivatives.
inline ComplexMatrix visibility_xi(const Scenario& s) {
    const std::size_t n = s.n_modes();
    if (auto* m = std::get_if<PixelSource>(&s.source)) return detail::pixel_visibility(s, m->map);
    ComplexMatrix xi(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto v = spatial_frequency(s, i, j);
            if (auto* d = std::get_if<UniformDisc>(&s.source)) {
                xi(i, j) = detail::disc_entry(s, d->radius, d->temperature, d->x0, d->y0, v[0],
                                              v[1], true);
            } else {
                const auto& t = std::get<TwoDiscs>(s.source);
                const bool env = !t.point_source;
                xi(i, j) = detail::disc_entry(s, t.radius, t.t1, t.x1, t.y1, v[0], v[1], env) +
                           detail::disc_entry(s, t.radius, t.t2, t.x2, t.y2, v[0], v[1], env);
            }
        }
    return xi;
}

namespace detail {

inline ComplexMatrix analytic_dxi(const Scenario& s, Param p) {
    const std::size_t n = s.n_modes();
    const double k = flux_factor(s);
    ComplexMatrix out(n, n);

    if (auto* m = std::get_if<PixelSource>(&s.source)) {
        const ComplexMatrix xi = pixel_visibility(s, m->map);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const auto v = spatial_frequency(s, i, j);
                const double vc = (p == Param::x0) ? v[0] : v[1];
                out(i, j) = cd(0.0, 2.0 * pi * vc) * xi(i, j);
            }
        return out;
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto v = spatial_frequency(s, i, j);
            const double vr = std::hypot(v[0], v[1]);
            if (auto* d = std::get_if<UniformDisc>(&s.source)) {
                const double a = d->radius;
                const double u = 2.0 * pi * a * vr;
                const cd ph = std::polar(1.0, 2.0 * pi * (d->x0 * v[0] + d->y0 * v[1]));
                const double area = pi * a * a;
                switch (p) {
                case Param::a:
                    out(i, j) = k * d->temperature * ph *
                                (2.0 * pi * a * jinc(u) + area * jinc_prime(u) * 2.0 * pi * vr);
                    break;
                case Param::T: out(i, j) = k * area * jinc(u) * ph; break;
                case Param::x0:
                case Param::y0: {
                    const double vc = (p == Param::x0) ? v[0] : v[1];
                    out(i, j) = cd(0.0, 2.0 * pi * vc) * k * area * d->temperature * jinc(u) * ph;
                    break;
                }
                default: throw InvalidParameter("parameter not applicable to disc");
                }
            } else {
                const auto& t = std::get<TwoDiscs>(s.source);
                const double a = t.radius;
                const double u = 2.0 * pi * a * vr;
                const double env = t.point_source ? 1.0 : jinc(u);
                const double denv = t.point_source ? 0.0 : jinc_prime(u) * 2.0 * pi * vr;
                const double area = pi * a * a;
                const cd e1 = std::polar(1.0, 2.0 * pi * (t.x1 * v[0] + t.y1 * v[1]));
                const cd e2 = std::polar(1.0, 2.0 * pi * (t.x2 * v[0] + t.y2 * v[1]));
                const cd w = t.t1 * e1 + t.t2 * e2;
                switch (p) {
                case Param::a: out(i, j) = k * w * (2.0 * pi * a * env + area * denv); break;
                case Param::T: out(i, j) = k * area * env * (e1 + e2); break;
                case Param::T1: out(i, j) = k * area * env * e1; break;
                case Param::T2: out(i, j) = k * area * env * e2; break;
                case Param::s_x:
                case Param::s_y: {
                    const double vc = (p == Param::s_x) ? v[0] : v[1];
                    out(i, j) = k * area * env * cd(0.0, pi * vc) * (t.t1 * e1 - t.t2 * e2);
                    break;
                }
                case Param::t_x:
                case Param::t_y: {
                    const double vc = (p == Param::t_x) ? v[0] : v[1];
                    out(i, j) = k * area * env * cd(0.0, 2.0 * pi * vc) * w;
                    break;
                }
                default: throw InvalidParameter("parameter not applicable to two discs");
                }
            }
        }
    return out;
}

} // namespace detail

/// Finite-difference step: h = max(1e-6 |theta|, 1e-9 scale(theta)).
inline double fd_step(const Scenario& s, Param p) {
    const double h = std::max(1e-6 * std::abs(param_value(s, p)), 1e-9 * param_scale(s, p));
    return h > 0.0 ? h : 1e-9;
}

/// d Xi / d theta and d Sigma / d theta for one parameter.
struct ParamDerivative {
    ComplexMatrix dXi;
    ComplexMatrix dSigma;
};

inline ParamDerivative d_covariance(const Scenario& s, Param p,
                                   DerivativeMode mode = DerivativeMode::analytic) {
    if (!param_applicable(s.source, p))
        throw InvalidParameter("parameter '" + std::string(param_name(p)) +
                               "' does not apply to source type " +
                               std::string(source_kind(s.source)));
    ParamDerivative r;
    if (mode == DerivativeMode::analytic) {
        r.dXi = detail::analytic_dxi(s, p);
    } else {
        const double th = param_value(s, p);
        const double h = fd_step(s, p);
        const ComplexMatrix up = visibility_xi(with_param(s, p, th + h));
        const ComplexMatrix dn = visibility_xi(with_param(s, p, th - h));
        r.dXi = (up - dn) / (2.0 * h);
    }
    r.dSigma = sigma_from_xi(r.dXi, false);
    return r;
}

/// Visibility set with derivatives for the scenario's parameter list.
inline VisibilitySet visibility_matrix(const Scenario& s,
                                       DerivativeMode mode = DerivativeMode::analytic) {
    VisibilitySet v;
    v.n_modes = s.n_modes();
    v.Xi = visibility_xi(s);
    v.nbar = mean_photon_number(s);
    for (Param p : s.parameters) {
        v.labels.emplace_back(param_name(p));
        v.dXi.push_back(d_covariance(s, p, mode).dXi);
    }
    return v;
}

inline CovarianceState covariance(const VisibilitySet& v) {
    CovarianceState c;
    c.Sigma = sigma_from_xi(v.Xi, true);
    c.labels = v.labels;
    for (const auto& d : v.dXi) c.dSigma.push_back(sigma_from_xi(d, false));
    return c;
}

/// Reads the plain-text grid: header "rows cols pixel_size origin_x origin_y",
/// then rows*cols temperatures, row-major, north row first.
inline PixelMap read_pixel_map(std::istream& in) {
    PixelMap m;
    long long rows = 0, cols = 0;
    if (!(in >> rows >> cols >> m.pixel_size >> m.origin_x >> m.origin_y))
        throw ValidationError("source.file", "malformed pixel map header");
    if (rows <= 0 || cols <= 0)
        throw ValidationError("source.file", "pixel map must have positive rows and cols");
    m.rows = static_cast<std::size_t>(rows);
    m.cols = static_cast<std::size_t>(cols);
    m.values.reserve(m.rows * m.cols);
    double v = 0.0;
    while (m.values.size() < m.rows * m.cols && in >> v) m.values.push_back(v);
    if (m.values.size() != m.rows * m.cols)
        throw ValidationError("source.file", "pixel map has fewer values than rows*cols");
    std::string extra;
    if (in >> extra) throw ValidationError("source.file", "pixel map has trailing data");
    return m;
}

inline PixelMap read_pixel_map_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("source.file", "cannot open pixel map '" + path + "'");
    return read_pixel_map(f);
}

} // namespace qsense
