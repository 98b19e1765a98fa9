#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "classical_fisher.hpp"
#include "config.hpp"
#include "gaussian_fisher.hpp"
#include "visibility.hpp"

#ifndef QSENSE_VERSION
#define QSENSE_VERSION "0.0.0"
#endif

namespace qsense {

inline constexpr const char* version = QSENSE_VERSION;

inline std::string fmt_num(double v, int digits = 10) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;   // no negative zero in output
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*e", digits, v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string scenario_hash(const RunConfig& rc) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(serialize_config(rc))));
    return buf;
}

/// Everything computed for one scenario.
struct PointResult {
    double nbar = 0.0;
    ComplexMatrix Xi;
    std::vector<std::string> labels;
    std::vector<bool> length_param;
    RealMatrix qfi;
    RealMatrix het;
    std::vector<double> pc;              // NaN where the product-state condition fails
    std::vector<DetectionModes> modes;
    std::vector<double> crb_single;      // 1/sqrt(N F_ii), N = 1
    std::vector<double> crb_multi;       // sqrt of diag (F^-1), NaN if unidentifiable
    std::string unidentifiable;          // message when crb_multi is NaN
};

inline PointResult evaluate(const Scenario& s, DerivativeMode mode, const FisherOptions& fo) {
    PointResult r;
    const VisibilitySet vis = visibility_matrix(s, mode);
    const CovarianceState cov = covariance(vis);
    const FisherSolution sol = fisher_solve(cov, fo);
    r.nbar = vis.nbar;
    r.Xi = vis.Xi;
    r.labels = vis.labels;
    for (Param p : s.parameters) r.length_param.push_back(is_length(p));
    r.qfi = sol.qfi.F;
    r.het = heterodyne_cfi(vis).heterodyne;
    for (std::size_t k = 0; k < vis.labels.size(); ++k) {
        const SldMatrix sld = sld_from_solution(sol.A[k], vis.labels[k]);
        DetectionModes dm = detection_modes(sld, vis);
        double pc = std::numeric_limits<double>::quiet_NaN();
        try {
            pc = photon_counting_cfi(dm, vis, vis.dXi[k]);
        } catch (const NotProductState&) {
        }
        r.pc.push_back(pc);
        r.modes.push_back(std::move(dm));
        const double f = r.qfi(k, k);
        r.crb_single.push_back(f > 0.0 ? 1.0 / std::sqrt(f) : INFINITY);
    }
    try {
        r.crb_multi = qcrb(sol.qfi, 1.0).std_dev;
    } catch (const UnidentifiableParameter& e) {
        r.crb_multi.assign(vis.labels.size(), std::numeric_limits<double>::quiet_NaN());
        r.unidentifiable = e.what();
    }
    return r;
}

inline FisherOptions fisher_options(const RunConfig& rc) {
    FisherOptions fo;
    fo.max_modes = rc.max_modes;
    return fo;
}

inline double fisher_scale(bool km, bool len_i, bool len_j) {
    if (!km) return 1.0;
    return (len_i ? 1e3 : 1.0) * (len_j ? 1e3 : 1.0);
}

inline std::string unit_label(bool km, bool len) {
    if (!len) return "K";
    return km ? "km" : "m";
}

struct AnalyzeOutput {
    std::string text;
    std::string csv;
    bool numerical_failure = false;   // unidentifiable multiparameter bound
};

inline AnalyzeOutput analyze(const RunConfig& rc) {
    const Scenario& s = rc.scenario;
    const bool km = rc.report_km;
    const PointResult r = evaluate(s, rc.derivative, fisher_options(rc));
    std::ostringstream o;
    const std::size_t n = s.n_modes();
    const std::size_t m = r.labels.size();
    o << "qsense analyze (version " << version << ")\n";
    for (const auto& w : s.warnings) o << "warning: " << w << "\n";
    o << "receivers          " << n << "\n";
    o << "source             " << source_kind(s.source) << "\n";
    o << "kappa [1/K]        " << fmt_num(s.physics.kappa, 6) << "\n";
    o << "wavelength [m]     " << fmt_num(s.physics.wavelength, 6) << "\n";
    o << "nbar               " << fmt_num(r.nbar, 6) << "\n";
    if (n <= 8) {
        o << "|Xi| / nbar\n";
        for (std::size_t i = 0; i < n; ++i) {
            o << "  ";
            for (std::size_t j = 0; j < n; ++j)
                o << " " << fmt_num(r.nbar > 0 ? std::abs(r.Xi(i, j)) / r.nbar : 0.0, 4);
            o << "\n";
        }
    } else {
        double lo = INFINITY, hi = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) {
                    lo = std::min(lo, std::abs(r.Xi(i, j)));
                    hi = std::max(hi, std::abs(r.Xi(i, j)));
                }
        o << "|Xi_ij| off-diagonal range " << fmt_num(lo, 4) << " .. " << fmt_num(hi, 4) << "\n";
    }
    auto matrix = [&](const char* title, const RealMatrix& f) {
        o << title << (km ? " (lengths in km)" : " (SI)") << "\n";
        for (std::size_t i = 0; i < m; ++i) {
            o << "  " << r.labels[i];
            for (std::size_t j = 0; j < m; ++j)
                o << " " << fmt_num(f(i, j) * fisher_scale(km, r.length_param[i], r.length_param[j]), 6);
            o << "\n";
        }
    };
    matrix("QFI matrix", r.qfi);
    matrix("heterodyne CFI matrix", r.het);
    o << "photon counting CFI in detection modes\n";
    for (std::size_t k = 0; k < m; ++k) {
        const double sc = fisher_scale(km, r.length_param[k], r.length_param[k]);
        o << "  " << r.labels[k] << " "
          << (std::isnan(r.pc[k]) ? std::string("n/a (modes do not diagonalise the state)")
                                  : fmt_num(r.pc[k] * sc, 6))
          << "\n";
    }
    std::vector<double> samples{1.0};
    if (s.sample_length)
        samples.push_back(double(sample_size(*s.sample_length, s.physics.bandwidth, s.physics.platform_speed)));
    for (double N : samples) {
        o << "Cramer-Rao standard deviations, N = " << fmt_num(N, 6) << "\n";
        for (std::size_t k = 0; k < m; ++k) {
            const double u = (km && r.length_param[k]) ? 1e-3 : 1.0;
            o << "  " << r.labels[k] << " [" << unit_label(km, r.length_param[k]) << "]  single "
              << fmt_num(r.crb_single[k] * u / std::sqrt(N), 6) << "  joint "
              << fmt_num(r.crb_multi[k] * u / std::sqrt(N), 6) << "\n";
        }
    }
    if (!r.unidentifiable.empty()) o << "joint bound: " << r.unidentifiable << "\n";
    for (const auto& dm : r.modes) {
        o << "detection modes for " << dm.label << " (rows: mode, |V| phase(V) per receiver)\n";
        for (Eigen::Index l = 0; l < dm.V.rows(); ++l) {
            o << "  mode " << l << " eig " << fmt_num(dm.D(l), 6) << " occ " << fmt_num(dm.occupations(l), 6)
              << " :";
            if (n <= 8)
                for (Eigen::Index c = 0; c < dm.V.cols(); ++c)
                    o << " " << fmt_num(std::abs(dm.V(l, c)), 4) << "/" << fmt_num(std::arg(dm.V(l, c)), 4);
            o << "\n";
        }
    }

    std::ostringstream c;
    c << "parameter,qfi,cfi_het,cfi_pc,crb_std_single,crb_std_joint\n";
    for (std::size_t k = 0; k < m; ++k) {
        const double sc = fisher_scale(km, r.length_param[k], r.length_param[k]);
        const double u = (km && r.length_param[k]) ? 1e-3 : 1.0;
        c << r.labels[k] << "," << fmt_num(r.qfi(k, k) * sc) << "," << fmt_num(r.het(k, k) * sc) << ","
          << fmt_num(r.pc[k] * sc) << "," << fmt_num(r.crb_single[k] * u) << ","
          << fmt_num(r.crb_multi[k] * u) << "\n";
    }
    c << "# scenario_hash=" << scenario_hash(rc) << " version=" << version << "\n";
    return {o.str(), c.str(), !r.unidentifiable.empty()};
}

/// Sweep grid in ascending order.
inline std::vector<double> sweep_values(const SweepSpec& w) {
    if (w.steps < 2) throw ValidationError("sweep.steps", "steps must be at least 2");
    if (!(w.from < w.to)) throw ValidationError("sweep.from", "from must be below to");
    if (w.log_scale && !(w.from > 0.0)) throw ValidationError("sweep.from", "log scale needs from > 0");
    std::vector<double> v(w.steps);
    for (std::size_t i = 0; i < w.steps; ++i) {
        const double t = double(i) / double(w.steps - 1);
        v[i] = w.log_scale ? std::exp(std::log(w.from) + t * (std::log(w.to) - std::log(w.from)))
                           : w.from + t * (w.to - w.from);
    }
    v.back() = w.to;
    return v;
}

/// Reference spatial frequency for the sv knob.
inline double sv_reference(const Scenario& s, bool use_spacing) {
    const auto& p = s.array.positions;
    double best = use_spacing ? INFINITY : 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const double d = std::hypot(p[j][0] - p[i][0], p[j][1] - p[i][1]);
            best = use_spacing ? std::min(best, d) : std::max(best, d);
        }
    return best / (s.physics.wavelength * s.physics.platform_height);
}

/// Scenario with the sweep knob set to `value`.
inline RunConfig apply_knob(const RunConfig& base, const SweepSpec& w, double value) {
    RunConfig rc = base;
    Scenario& s = rc.scenario;
    auto need_linear = [&]() -> LinearLayout& {
        if (!rc.linear) throw ValidationError("sweep.knob", w.knob_name() + " needs a linear array");
        return *rc.linear;
    };
    switch (w.kind) {
    case KnobKind::parameter:
        if (!param_applicable(s.source, w.param))
            throw ValidationError("sweep.knob", "parameter does not apply to the source");
        s = with_param(s, w.param, value);
        break;
    case KnobKind::dr: {
        auto& L = need_linear();
        L.spacing = value;
        L.max_baseline.reset();
        s.array.positions = L.positions();
        break;
    }
    case KnobKind::max_baseline: {
        auto& L = need_linear();
        L.max_baseline = value;
        L.spacing.reset();
        s.array.positions = L.positions();
        break;
    }
    case KnobKind::n_receivers: {
        auto& L = need_linear();
        const double r = std::round(value);
        if (!(r >= 1.0)) throw ValidationError("sweep.from", "receiver count must be >= 1");
        L.n = static_cast<std::size_t>(r);
        s.array.positions = L.positions();
        break;
    }
    case KnobKind::sv: {
        auto* t = std::get_if<TwoDiscs>(&s.source);
        if (!t) throw ValidationError("sweep.knob", "sv needs a two_discs source");
        if (s.n_modes() < 2) throw ValidationError("sweep.knob", "sv needs at least two receivers");
        // separation along the longest baseline
        const auto& p = s.array.positions;
        std::size_t bi = 0, bj = 1;
        double best = -1.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j) {
                const double d = std::hypot(p[j][0] - p[i][0], p[j][1] - p[i][1]);
                if (d > best) { best = d; bi = i; bj = j; }
            }
        const double ux = (p[bj][0] - p[bi][0]) / best, uy = (p[bj][1] - p[bi][1]) / best;
        const double sep = value / sv_reference(s, w.sv_reference_spacing);
        t->set_geometry(sep * ux, sep * uy, t->t_x(), t->t_y());
        break;
    }
    }
    rc.sweep.reset();
    rc.scenario = validate_scenario(std::move(s));
    return rc;
}

/// Runs `fn(i)` for i in [0, count) on `threads` workers; exceptions are
/// rethrown for the lowest failing index.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    std::vector<std::exception_ptr> errs(count);
    auto work = [&](std::size_t t, std::size_t nt) {
        for (std::size_t i = t; i < count; i += nt) {
            try {
                fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    const std::size_t nt = std::max<std::size_t>(1, std::min(threads, count));
    if (nt == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

/// CSV for a sweep; `threads` overrides the config value when nonzero.
inline std::string sweep(const RunConfig& rc, std::size_t threads = 0) {
    if (!rc.sweep) throw ValidationError("sweep", "config has no [sweep] section");
    const SweepSpec& w = *rc.sweep;
    const auto values = sweep_values(w);
    if (w.kind == KnobKind::n_receivers)
        for (std::size_t i = 1; i < values.size(); ++i)
            if (std::round(values[i]) == std::round(values[i - 1]))
                throw ValidationError("sweep.steps", "n_receivers grid repeats a receiver count");
    std::vector<RunConfig> cfgs;
    for (double v : values) cfgs.push_back(apply_knob(rc, w, v));
    std::vector<PointResult> res(values.size());
    std::vector<char> degenerate(values.size(), 0);
    const FisherOptions fo = fisher_options(rc);
    parallel_for(values.size(), threads ? threads : w.threads, [&](std::size_t i) {
        try {
            res[i] = evaluate(cfgs[i].scenario, rc.derivative, fo);
        } catch (const DegenerateState&) {
            degenerate[i] = 1;   // e.g. sources in phase at integer sv: row of NaN
        }
    });
    std::size_t first_ok = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!degenerate[i] && first_ok == values.size()) first_ok = i;
        if (degenerate[i]) diagnostic("sweep: state rank-deficient at " + w.knob_name() + " = " + fmt_num(values[i], 6) + ", row left as nan");
    }
    if (first_ok == values.size())
        throw DegenerateState("sweep: state rank-deficient at every grid point");
    const std::vector<std::string>& labels = res[first_ok].labels;

    const bool km = rc.report_km;
    std::ostringstream c;
    c << "knob,value";
    for (const auto& l : labels) {
        if (w.wants("qfi")) c << ",qfi_" << l;
        if (w.wants("cfi_het")) c << ",cfi_het_" << l;
        if (w.wants("cfi_pc")) c << ",cfi_pc_" << l;
        if (w.wants("crb")) c << ",crb_std_" << l;
        if (w.wants("modes")) c << ",sld_eig_max_" << l << ",sld_eig_min_" << l;
    }
    c << "\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& r = res[i];
        c << w.knob_name() << "," << fmt_num(w.kind == KnobKind::n_receivers ? std::round(values[i]) : values[i]);
        if (degenerate[i]) {
            std::size_t cols = 0;
            for (const char* o : {"qfi", "cfi_het", "cfi_pc", "crb"}) cols += w.wants(o);
            cols += 2 * w.wants("modes");
            for (std::size_t k = 0; k < cols * labels.size(); ++k) c << ",nan";
            c << "\n";
            continue;
        }
        for (std::size_t k = 0; k < r.labels.size(); ++k) {
            const double sc = fisher_scale(km, r.length_param[k], r.length_param[k]);
            const double u = (km && r.length_param[k]) ? 1e-3 : 1.0;
            if (w.wants("qfi")) c << "," << fmt_num(r.qfi(k, k) * sc);
            if (w.wants("cfi_het")) c << "," << fmt_num(r.het(k, k) * sc);
            if (w.wants("cfi_pc")) c << "," << fmt_num(r.pc[k] * sc);
            if (w.wants("crb")) c << "," << fmt_num(r.crb_multi[k] * u);
            if (w.wants("modes")) {
                const auto& D = r.modes[k].D;
                c << "," << fmt_num(D(0)) << "," << fmt_num(D(D.size() - 1));
            }
        }
        c << "\n";
    }
    c << "# scenario_hash=" << scenario_hash(rc) << " version=" << version << "\n";
    return c.str();
}

struct ModesOutput {
    std::string text;
    std::string csv;
};

/// Analytic phase of the two-mode detection modes for this parameter, if one exists.
inline std::optional<double> analytic_mode_phase(const Scenario& s, Param p) {
    if (s.n_modes() != 2) return std::nullopt;
    const auto v = spatial_frequency(s, 0, 1);
    if (auto* t = std::get_if<TwoDiscs>(&s.source)) {
        const double base = 2.0 * pi * (t->t_x() * v[0] + t->t_y() * v[1]);
        if (p == Param::s_x || p == Param::s_y) return base - pi;
        if (p == Param::t_x || p == Param::t_y) return base + pi / 2.0;
        return std::nullopt;
    }
    if (auto* d = std::get_if<UniformDisc>(&s.source)) {
        const double base = 2.0 * pi * (d->x0 * v[0] + d->y0 * v[1]);
        if (p == Param::x0 || p == Param::y0) return base - pi / 2.0;
        return base;
    }
    return std::nullopt;
}

/// Wraps into [0, pi): the mode pair (1, +e^{i d}), (1, -e^{i d}) fixes d only modulo pi.
inline double wrap_pi(double x) {
    double r = std::fmod(x, pi);
    if (r < 0) r += pi;
    if (r >= pi - 1e-12 || r == 0.0) r = 0.0;   // also clears -0
    return r;
}

inline ModesOutput modes(const RunConfig& rc, Param p) {
    RunConfig one = rc;
    one.scenario.parameters = {p};
    one.scenario = validate_scenario(one.scenario);
    const Scenario& s = one.scenario;
    const PointResult r = evaluate(s, rc.derivative, fisher_options(rc));
    const DetectionModes& dm = r.modes[0];
    const std::size_t n = s.n_modes();
    std::ostringstream o, c;
    o << "detection modes for parameter " << param_name(p) << " (" << n << " receivers)\n";
    o << "QFI " << fmt_num(r.qfi(0, 0), 6) << "  photon counting CFI "
      << (std::isnan(r.pc[0]) ? std::string("n/a") : fmt_num(r.pc[0], 6)) << "\n";
    c << "mode,eigenvalue,occupation";
    for (std::size_t m = 0; m < n; ++m) c << ",abs_v" << m << ",arg_v" << m;
    c << "\n";
    for (Eigen::Index l = 0; l < dm.V.rows(); ++l) {
        o << "mode " << l << "  eigenvalue " << fmt_num(dm.D(l), 6) << "  occupation "
          << fmt_num(dm.occupations(l), 6) << "\n";
        c << l << "," << fmt_num(dm.D(l)) << "," << fmt_num(dm.occupations(l));
        for (Eigen::Index m = 0; m < dm.V.cols(); ++m) {
            o << "    receiver " << m << "  |V| " << fmt_num(std::abs(dm.V(l, m)), 6) << "  arg "
              << fmt_num(std::arg(dm.V(l, m)), 6) << "\n";
            c << "," << fmt_num(std::abs(dm.V(l, m))) << "," << fmt_num(std::arg(dm.V(l, m)));
        }
        c << "\n";
    }
    if (n == 2) {
        // eigenvector (column of V^dagger) relative phase arg(u1/u0)
        const cd u0 = std::conj(dm.V(0, 0)), u1 = std::conj(dm.V(0, 1));
        // undefined when the modes do not mix the receivers (SLD zero, e.g. y0 with an x baseline)
        const bool mixed = std::abs(u0) > 1e-6 && std::abs(u1) > 1e-6 && std::isfinite(std::abs(u1 / u0));
        const double rec = mixed ? wrap_pi(std::arg(u1 / u0)) : std::nan("");
        o << "mode phase (mod pi): recovered " << (std::isnan(rec) ? std::string("n/a") : fmt_num(rec, 6));
        c << "# recovered_phase_mod_pi=" << fmt_num(rec);
        if (auto an = analytic_mode_phase(s, p)) {
            o << "  analytic " << fmt_num(wrap_pi(*an), 6);
            c << " analytic_phase_mod_pi=" << fmt_num(wrap_pi(*an));
        }
        o << "\n";
        c << "\n";
    }
    c << "# scenario_hash=" << scenario_hash(one) << " version=" << version << "\n";
    return {o.str(), c.str()};
}

} // namespace qsense
