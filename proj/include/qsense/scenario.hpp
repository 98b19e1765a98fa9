#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace qsense {

namespace constants {
inline constexpr double k_B = 1.380649e-23;        // J/K
inline constexpr double hbar = 1.054571817e-34;    // J s
inline constexpr double c = 299792458.0;           // m/s
} // namespace constants

/// kappa = 2 k_B / (pi hbar omega0), omega0 = 2 pi f0. Units 1/K.
inline double kappa_from_frequency(double f0) {
    if (!std::isfinite(f0) || !(f0 > 0.0))
        throw InvalidInput("kappa_from_frequency: frequency must be positive and finite");
    return 2.0 * constants::k_B / (pi * constants::hbar * (2.0 * pi * f0));
}

/// Number of independent detection intervals in a track of length L: floor(L B / v), at least 1.
inline std::uint64_t sample_size(double length, double bandwidth, double speed) {
    for (double x : {length, bandwidth, speed})
        if (!std::isfinite(x) || !(x > 0.0))
            throw InvalidInput("sample_size: inputs must be positive and finite");
    // tiny relative guard so that L = v/B gives exactly one sample
    const double n = std::floor(length * bandwidth / speed * (1.0 + 1e-12));
    return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

enum class Param { a, T, T1, T2, x0, y0, s_x, s_y, t_x, t_y };

inline constexpr std::array<Param, 10> all_params = {Param::a,  Param::T,   Param::T1, Param::T2,
                                                     Param::x0, Param::y0,  Param::s_x, Param::s_y,
                                                     Param::t_x, Param::t_y};

inline std::string_view param_name(Param p) {
    switch (p) {
    case Param::a: return "a";
    case Param::T: return "T";
    case Param::T1: return "T1";
    case Param::T2: return "T2";
    case Param::x0: return "x0";
    case Param::y0: return "y0";
    case Param::s_x: return "s_x";
    case Param::s_y: return "s_y";
    case Param::t_x: return "t_x";
    case Param::t_y: return "t_y";
    }
    return "?";
}

inline std::optional<Param> parse_param(std::string_view s) {
    for (Param p : all_params)
        if (param_name(p) == s) return p;
    return std::nullopt;
}

/// Lengths are m, temperatures K.
inline bool is_length(Param p) { return !(p == Param::T || p == Param::T1 || p == Param::T2); }

struct PhysicsConfig {
    double center_frequency = 0.0;   // Hz
    double bandwidth = 0.0;          // Hz
    double platform_height = 0.0;    // m
    double platform_speed = 0.0;     // m/s
    std::optional<double> kappa_override;   // 1/K
    // derived
    double wavelength = 0.0;         // m
    double kappa = 0.0;              // 1/K
};

struct ReceiverArray {
    std::vector<std::array<double, 2>> positions;
    char polarization = 'x';
};

struct UniformDisc {
    double radius = 0.0;
    double temperature = 0.0;
    double x0 = 0.0, y0 = 0.0;
};

/// Two equal discs. With point_source set the visibility uses the point-source
/// limit (envelope 2 J1(u)/u replaced by 1) while the flux stays that of the discs.
struct TwoDiscs {
    double radius = 0.0;
    double t1 = 0.0, t2 = 0.0;
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
    bool point_source = false;

    double mean_temperature() const { return 0.5 * (t1 + t2); }
    double delta_temperature() const { return t2 - t1; }
    double s_x() const { return x1 - x2; }
    double s_y() const { return y1 - y2; }
    double t_x() const { return 0.5 * (x1 + x2); }
    double t_y() const { return 0.5 * (y1 + y2); }

    void set_temperatures(double mean, double delta) {
        t1 = mean - 0.5 * delta;
        t2 = mean + 0.5 * delta;
    }
    void set_geometry(double sx, double sy, double tx, double ty) {
        x1 = tx + 0.5 * sx;
        x2 = tx - 0.5 * sx;
        y1 = ty + 0.5 * sy;
        y2 = ty - 0.5 * sy;
    }
};

struct PixelSource {
    PixelMap map;
    std::string path;   // informational, as given in the config
};

using SourceModel = std::variant<UniformDisc, TwoDiscs, PixelSource>;

struct Scenario {
    PhysicsConfig physics;
    ReceiverArray array;
    SourceModel source;
    std::vector<Param> parameters;
    std::optional<double> sample_length;   // m, for N = L B / v
    std::vector<std::string> warnings;

    std::size_t n_modes() const { return array.positions.size(); }
};

inline bool param_applicable(const SourceModel& s, Param p) {
    if (std::holds_alternative<UniformDisc>(s))
        return p == Param::a || p == Param::T || p == Param::x0 || p == Param::y0;
    if (std::holds_alternative<TwoDiscs>(s))
        return p == Param::a || p == Param::T || p == Param::T1 || p == Param::T2 ||
               p == Param::s_x || p == Param::s_y || p == Param::t_x || p == Param::t_y;
    return p == Param::x0 || p == Param::y0;
}

inline std::string_view source_kind(const SourceModel& s) {
    if (std::holds_alternative<UniformDisc>(s)) return "disc";
    if (std::holds_alternative<TwoDiscs>(s)) return "two_discs";
    return "pixel_map";
}

namespace detail {
inline void require(bool ok, const char* field, const char* constraint) {
    if (!ok) throw ValidationError(field, constraint);
}
inline bool finite(double x) { return std::isfinite(x); }
} // namespace detail

/// Check every invariant and fill derived fields. Idempotent.
inline Scenario validate_scenario(Scenario s) {
    using detail::finite;
    using detail::require;
    auto& ph = s.physics;
    require(finite(ph.center_frequency) && ph.center_frequency > 0.0, "physics.center_frequency",
            "center frequency must be positive");
    require(finite(ph.bandwidth) && ph.bandwidth > 0.0, "physics.bandwidth",
            "bandwidth must be positive");
    require(ph.bandwidth <= ph.center_frequency / 10.0, "physics.bandwidth",
            "bandwidth must not exceed center_frequency/10 (narrow-band assumption)");
    require(finite(ph.platform_height) && ph.platform_height > 0.0, "physics.platform_height",
            "platform height must be positive");
    require(finite(ph.platform_speed) && ph.platform_speed > 0.0, "physics.platform_speed",
            "platform speed must be positive");
    if (ph.kappa_override)
        require(finite(*ph.kappa_override) && *ph.kappa_override > 0.0, "physics.kappa",
                "kappa must be positive");
    ph.wavelength = constants::c / ph.center_frequency;
    ph.kappa = ph.kappa_override ? *ph.kappa_override : kappa_from_frequency(ph.center_frequency);

    auto& pos = s.array.positions;
    require(!pos.empty(), "array.positions", "at least one receiver is required");
    for (const auto& p : pos)
        require(finite(p[0]) && finite(p[1]), "array.positions", "positions must be finite");
    require(s.array.polarization == 'x' || s.array.polarization == 'y', "array.polarization",
            "polarization must be x or y");
    s.warnings.clear();
    for (std::size_t i = 0; i < pos.size(); ++i)
        for (std::size_t j = i + 1; j < pos.size(); ++j) {
            const double d = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
            require(d > 0.0, "array.positions", "receiver positions must be pairwise distinct");
            if (d < ph.wavelength)
                s.warnings.push_back("receivers " + std::to_string(i) + " and " +
                                     std::to_string(j) + " are closer than one wavelength");
        }

    const double R = ph.platform_height;
    if (auto* d = std::get_if<UniformDisc>(&s.source)) {
        require(finite(d->radius) && d->radius > 0.0, "source.radius", "radius must be positive");
        require(d->radius <= R / 10.0, "source.radius",
                "radius must be small against platform_height (a <= R/10)");
        require(finite(d->temperature) && d->temperature >= 0.0, "source.temperature",
                "temperature must be non-negative");
        require(finite(d->x0) && finite(d->y0), "source.center", "center must be finite");
    } else if (auto* t = std::get_if<TwoDiscs>(&s.source)) {
        require(finite(t->radius) && t->radius > 0.0, "source.radius", "radius must be positive");
        require(t->radius <= R / 10.0, "source.radius",
                "radius must be small against platform_height (a <= R/10)");
        require(finite(t->t1) && t->t1 >= 0.0, "source.temperature1",
                "temperature must be non-negative");
        require(finite(t->t2) && t->t2 >= 0.0, "source.temperature2",
                "temperature must be non-negative");
        require(finite(t->x1) && finite(t->y1) && finite(t->x2) && finite(t->y2),
                "source.center", "centers must be finite");
    } else {
        const auto& m = std::get<PixelSource>(s.source).map;
        require(m.rows > 0 && m.cols > 0 && m.values.size() == m.rows * m.cols, "source.file",
                "pixel map must be a non-empty rows x cols grid");
        require(finite(m.pixel_size) && m.pixel_size > 0.0, "source.file",
                "pixel size must be positive");
        require(finite(m.origin_x) && finite(m.origin_y), "source.file", "origin must be finite");
        for (double v : m.values)
            require(finite(v) && v >= 0.0, "source.file",
                    "pixel temperatures must be finite and non-negative");
    }

    for (Param p : s.parameters)
        if (!param_applicable(s.source, p))
            throw ValidationError("estimate.parameters",
                                  "parameter '" + std::string(param_name(p)) +
                                      "' does not apply to source type " +
                                      std::string(source_kind(s.source)));
    if (s.sample_length)
        require(finite(*s.sample_length) && *s.sample_length > 0.0, "estimate.sample_length",
                "sample length must be positive");
    return s;
}

/// Current value of a parameter in the scenario.
inline double param_value(const Scenario& s, Param p) {
    if (auto* d = std::get_if<UniformDisc>(&s.source)) {
        switch (p) {
        case Param::a: return d->radius;
        case Param::T: return d->temperature;
        case Param::x0: return d->x0;
        case Param::y0: return d->y0;
        default: break;
        }
    } else if (auto* t = std::get_if<TwoDiscs>(&s.source)) {
        switch (p) {
        case Param::a: return t->radius;
        case Param::T: return t->mean_temperature();
        case Param::T1: return t->t1;
        case Param::T2: return t->t2;
        case Param::s_x: return t->s_x();
        case Param::s_y: return t->s_y();
        case Param::t_x: return t->t_x();
        case Param::t_y: return t->t_y();
        default: break;
        }
    } else {
        const auto& m = std::get<PixelSource>(s.source).map;
        if (p == Param::x0) return m.origin_x;
        if (p == Param::y0) return m.origin_y;
    }
    throw InvalidParameter("parameter '" + std::string(param_name(p)) +
                           "' does not apply to source type " + std::string(source_kind(s.source)));
}

/// Copy of the scenario with one parameter replaced (others held fixed).
inline Scenario with_param(Scenario s, Param p, double v) {
    if (auto* d = std::get_if<UniformDisc>(&s.source)) {
        switch (p) {
        case Param::a: d->radius = v; return s;
        case Param::T: d->temperature = v; return s;
        case Param::x0: d->x0 = v; return s;
        case Param::y0: d->y0 = v; return s;
        default: break;
        }
    } else if (auto* t = std::get_if<TwoDiscs>(&s.source)) {
        switch (p) {
        case Param::a: t->radius = v; return s;
        case Param::T: t->set_temperatures(v, t->delta_temperature()); return s;
        case Param::T1: t->t1 = v; return s;
        case Param::T2: t->t2 = v; return s;
        case Param::s_x: t->set_geometry(v, t->s_y(), t->t_x(), t->t_y()); return s;
        case Param::s_y: t->set_geometry(t->s_x(), v, t->t_x(), t->t_y()); return s;
        case Param::t_x: t->set_geometry(t->s_x(), t->s_y(), v, t->t_y()); return s;
        case Param::t_y: t->set_geometry(t->s_x(), t->s_y(), t->t_x(), v); return s;
        default: break;
        }
    } else {
        auto& m = std::get<PixelSource>(s.source).map;
        if (p == Param::x0) { m.origin_x = v; return s; }
        if (p == Param::y0) { m.origin_y = v; return s; }
    }
    throw InvalidParameter("parameter '" + std::string(param_name(p)) +
                           "' does not apply to source type " + std::string(source_kind(s.source)));
}

/// Characteristic scale used by the finite-difference step rule.
inline double param_scale(const Scenario& s, Param p) {
    if (auto* d = std::get_if<UniformDisc>(&s.source))
        return is_length(p) ? d->radius : d->temperature;
    if (auto* t = std::get_if<TwoDiscs>(&s.source))
        return is_length(p) ? t->radius : t->mean_temperature();
    const auto& m = std::get<PixelSource>(s.source).map;
    return 0.5 * m.pixel_size * double(std::max(m.rows, m.cols));
}

} // namespace qsense
