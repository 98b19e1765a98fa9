#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "visibility.hpp"

namespace qsense {

/// `linear = n` with either `spacing` or `max_baseline`: receivers on the x axis from 0.
struct LinearLayout {
    std::size_t n = 0;
    std::optional<double> spacing;
    std::optional<double> max_baseline;

    double step() const {
        if (spacing) return *spacing;
        return n > 1 ? *max_baseline / double(n - 1) : 0.0;
    }
    std::vector<std::array<double, 2>> positions() const {
        std::vector<std::array<double, 2>> p;
        for (std::size_t i = 0; i < n; ++i) p.push_back({double(i) * step(), 0.0});
        return p;
    }
};

enum class KnobKind { parameter, dr, n_receivers, max_baseline, sv };

struct SweepSpec {
    KnobKind kind = KnobKind::parameter;
    Param param = Param::a;
    double from = 0.0, to = 0.0;
    std::size_t steps = 0;
    bool log_scale = false;
    std::set<std::string> outputs{"qfi", "cfi_het", "cfi_pc", "crb"};
    bool sv_reference_spacing = false;   // v from the receiver spacing instead of the max baseline
    std::size_t threads = 1;

    std::string knob_name() const {
        switch (kind) {
        case KnobKind::parameter: return std::string(param_name(param));
        case KnobKind::dr: return "dr";
        case KnobKind::n_receivers: return "n_receivers";
        case KnobKind::max_baseline: return "max_baseline";
        case KnobKind::sv: return "sv";
        }
        return "?";
    }
    bool wants(const std::string& o) const { return outputs.count(o) != 0; }
};

struct RunConfig {
    Scenario scenario;
    std::optional<LinearLayout> linear;
    std::optional<SweepSpec> sweep;
    DerivativeMode derivative = DerivativeMode::analytic;
    std::size_t max_modes = 24;
    bool report_km = false;
    std::optional<std::string> csv;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

inline double number(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ValidationError(field, "expected a number, got '" + t + "'");
    return v;
}

inline std::size_t count(const std::string& field, const std::string& text) {
    const double v = number(field, text);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9)
        throw ValidationError(field, "expected a non-negative integer, got '" + trim(text) + "'");
    return static_cast<std::size_t>(v);
}

inline bool boolean(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ValidationError(field, "expected true or false, got '" + t + "'");
}

inline std::array<double, 2> pair(const std::string& field, const std::string& text) {
    const auto w = words(text);
    if (w.size() != 2) throw ValidationError(field, "expected two numbers 'x y'");
    return {number(field, w[0]), number(field, w[1])};
}

inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"physics",
         {"center_frequency", "wavelength", "bandwidth", "platform_height", "platform_speed", "kappa"}},
        {"array", {"positions", "linear", "spacing", "max_baseline", "polarization"}},
        {"source",
         {"type", "radius", "temperature", "center", "temperature1", "temperature2", "center1",
          "center2", "mean_temperature", "delta_temperature", "separation", "centroid",
          "point_source", "file"}},
        {"estimate", {"parameters", "sample_length", "derivative", "max_modes"}},
        {"sweep", {"knob", "from", "to", "steps", "scale", "outputs", "sv_reference", "threads"}},
        {"output", {"report_km", "csv"}},
    };
    return s;
}

} // namespace config_detail

/// Key reference printed by `--help`.
inline const char* config_help() {
    return R"(Configuration file: sections in [brackets], one `key = value` per line, '#' comments.
Unknown sections or keys are errors. Units are SI (m, s, Hz, K).
[physics]   center_frequency (Hz) | wavelength (m, converted to frequency); bandwidth (Hz);
            platform_height (m); platform_speed (m/s); kappa (1/K, optional override)
[array]     positions = x1 y1; x2 y2; ...   or   linear = n  with  spacing = d | max_baseline = L
            polarization = x | y
[source]    type = disc | two_discs | pixel_map
            disc:      radius, temperature, center = x y
            two_discs: radius, temperature1, temperature2, center1 = x y, center2 = x y
                       (or mean_temperature, delta_temperature, separation = sx sy, centroid = tx ty)
                       point_source = true|false
            pixel_map: file = path (relative to the config file)
[estimate]  parameters = a, T, T1, T2, x0, y0, s_x, s_y, t_x, t_y (as applicable);
            sample_length (m, N = L B / v); derivative = analytic | fd; max_modes (default 24)
[sweep]     knob = <parameter> | dr | n_receivers | max_baseline | sv; from; to; steps;
            scale = linear | log; outputs = qfi, cfi_het, cfi_pc, crb, modes;
            sv_reference = max_baseline | spacing; threads
[output]    report_km = true | false; csv = path
)";
}

/// Parses configuration text. `base_dir` resolves relative pixel map paths.
inline RunConfig parse_config(const std::string& text, const std::string& base_dir = ".") {
    using namespace config_detail;
    std::map<std::string, std::map<std::string, std::string>> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("line " + std::to_string(lineno), "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                throw ValidationError(section, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ValidationError(key, "key outside of any section");
        if (!schema().at(section).count(key))
            throw ValidationError(section + "." + key, "unknown key");
        if (kv[section].count(key))
            throw ValidationError(section + "." + key, "duplicate key");
        kv[section][key] = value;
    }

    auto get = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
        auto s = kv.find(sec);
        if (s == kv.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    };
    auto need = [&](const std::string& sec, const std::string& key) {
        auto v = get(sec, key);
        if (!v) throw ValidationError(sec + "." + key, "required key missing");
        return *v;
    };
    auto num = [&](const std::string& sec, const std::string& key) {
        return number(sec + "." + key, need(sec, key));
    };

    RunConfig rc;
    Scenario& s = rc.scenario;

    // physics
    const auto f0 = get("physics", "center_frequency");
    const auto wl = get("physics", "wavelength");
    if (f0 && wl)
        throw ValidationError("physics.wavelength", "give center_frequency or wavelength, not both");
    if (f0) {
        s.physics.center_frequency = number("physics.center_frequency", *f0);
    } else if (wl) {
        const double l = number("physics.wavelength", *wl);
        if (!(l > 0.0)) throw ValidationError("physics.wavelength", "wavelength must be positive");
        s.physics.center_frequency = constants::c / l;
    } else {
        throw ValidationError("physics.center_frequency", "required key missing");
    }
    s.physics.bandwidth = num("physics", "bandwidth");
    s.physics.platform_height = num("physics", "platform_height");
    s.physics.platform_speed = num("physics", "platform_speed");
    if (auto k = get("physics", "kappa")) s.physics.kappa_override = number("physics.kappa", *k);

    // array
    const auto pos = get("array", "positions");
    const auto lin = get("array", "linear");
    if (pos && lin) throw ValidationError("array.linear", "give positions or linear, not both");
    if (pos) {
        if (get("array", "spacing") || get("array", "max_baseline"))
            throw ValidationError("array.spacing", "spacing/max_baseline only apply with linear");
        for (const auto& item : split(*pos, ';'))
            if (!item.empty()) s.array.positions.push_back(pair("array.positions", item));
    } else if (lin) {
        LinearLayout L;
        L.n = count("array.linear", *lin);
        if (L.n == 0) throw ValidationError("array.linear", "at least one receiver is required");
        const auto sp = get("array", "spacing");
        const auto mb = get("array", "max_baseline");
        if (sp && mb)
            throw ValidationError("array.max_baseline", "give spacing or max_baseline, not both");
        if (sp) L.spacing = number("array.spacing", *sp);
        if (mb) L.max_baseline = number("array.max_baseline", *mb);
        if (L.n > 1 && !sp && !mb)
            throw ValidationError("array.spacing", "linear arrays need spacing or max_baseline");
        if (!sp && !mb) L.spacing = 0.0;
        if ((L.spacing && !(*L.spacing > 0.0) && L.n > 1) ||
            (L.max_baseline && !(*L.max_baseline > 0.0)))
            throw ValidationError("array.spacing", "spacing must be positive");
        s.array.positions = L.positions();
        rc.linear = L;
    } else {
        throw ValidationError("array.positions", "required key missing");
    }
    if (auto p = get("array", "polarization")) {
        if (*p != "x" && *p != "y") throw ValidationError("array.polarization", "must be x or y");
        s.array.polarization = (*p)[0];
    }

    // source
    const std::string type = need("source", "type");
    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (get("source", k))
                throw ValidationError(std::string("source.") + k,
                                      "key does not apply to source type " + type);
    };
    if (type == "disc") {
        forbid({"temperature1", "temperature2", "center1", "center2", "mean_temperature",
                "delta_temperature", "separation", "centroid", "point_source", "file"});
        UniformDisc d;
        d.radius = num("source", "radius");
        d.temperature = num("source", "temperature");
        if (auto c = get("source", "center")) {
            const auto xy = pair("source.center", *c);
            d.x0 = xy[0];
            d.y0 = xy[1];
        }
        s.source = d;
    } else if (type == "two_discs") {
        forbid({"temperature", "center", "file"});
        TwoDiscs t;
        t.radius = num("source", "radius");
        const bool explicit_t = get("source", "temperature1") || get("source", "temperature2");
        const bool derived_t = get("source", "mean_temperature") || get("source", "delta_temperature");
        if (explicit_t && derived_t)
            throw ValidationError("source.mean_temperature",
                                  "give temperature1/2 or mean/delta_temperature, not both");
        if (derived_t) {
            t.set_temperatures(num("source", "mean_temperature"),
                               get("source", "delta_temperature")
                                   ? number("source.delta_temperature", *get("source", "delta_temperature"))
                                   : 0.0);
        } else {
            t.t1 = num("source", "temperature1");
            t.t2 = num("source", "temperature2");
        }
        const bool explicit_c = get("source", "center1") || get("source", "center2");
        const bool derived_c = get("source", "separation") || get("source", "centroid");
        if (explicit_c && derived_c)
            throw ValidationError("source.separation",
                                  "give center1/2 or separation/centroid, not both");
        if (derived_c) {
            const auto sep = pair("source.separation", need("source", "separation"));
            std::array<double, 2> cen{0.0, 0.0};
            if (auto c = get("source", "centroid")) cen = pair("source.centroid", *c);
            t.set_geometry(sep[0], sep[1], cen[0], cen[1]);
        } else {
            const auto c1 = pair("source.center1", need("source", "center1"));
            const auto c2 = pair("source.center2", need("source", "center2"));
            t.x1 = c1[0];
            t.y1 = c1[1];
            t.x2 = c2[0];
            t.y2 = c2[1];
        }
        if (auto ps = get("source", "point_source")) t.point_source = boolean("source.point_source", *ps);
        s.source = t;
    } else if (type == "pixel_map") {
        forbid({"radius", "temperature", "center", "temperature1", "temperature2", "center1",
                "center2", "mean_temperature", "delta_temperature", "separation", "centroid",
                "point_source"});
        PixelSource px;
        px.path = need("source", "file");
        std::filesystem::path p(px.path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        px.map = read_pixel_map_file(p.string());
        s.source = px;
    } else {
        throw ValidationError("source.type", "must be disc, two_discs or pixel_map");
    }

    // estimate
    if (auto ps = get("estimate", "parameters")) {
        for (const auto& item : split(*ps, ',')) {
            if (item.empty()) continue;
            const auto p = parse_param(item);
            if (!p) throw ValidationError("estimate.parameters", "unknown parameter '" + item + "'");
            s.parameters.push_back(*p);
        }
    }
    if (s.parameters.empty())
        throw ValidationError("estimate.parameters", "at least one parameter is required");
    if (auto l = get("estimate", "sample_length")) s.sample_length = number("estimate.sample_length", *l);
    if (auto d = get("estimate", "derivative")) {
        if (*d == "analytic") rc.derivative = DerivativeMode::analytic;
        else if (*d == "fd") rc.derivative = DerivativeMode::finite_difference;
        else throw ValidationError("estimate.derivative", "must be analytic or fd");
    }
    if (auto m = get("estimate", "max_modes")) rc.max_modes = count("estimate.max_modes", *m);

    // sweep
    if (kv.count("sweep")) {
        SweepSpec sw;
        const std::string knob = need("sweep", "knob");
        if (knob == "dr") sw.kind = KnobKind::dr;
        else if (knob == "n_receivers") sw.kind = KnobKind::n_receivers;
        else if (knob == "max_baseline") sw.kind = KnobKind::max_baseline;
        else if (knob == "sv") sw.kind = KnobKind::sv;
        else if (auto p = parse_param(knob)) { sw.kind = KnobKind::parameter; sw.param = *p; }
        else throw ValidationError("sweep.knob", "unknown knob '" + knob + "'");
        sw.from = num("sweep", "from");
        sw.to = num("sweep", "to");
        sw.steps = count("sweep.steps", need("sweep", "steps"));
        if (auto sc = get("sweep", "scale")) {
            if (*sc == "log") sw.log_scale = true;
            else if (*sc != "linear") throw ValidationError("sweep.scale", "must be linear or log");
        }
        if (auto o = get("sweep", "outputs")) {
            sw.outputs.clear();
            for (const auto& item : split(*o, ',')) {
                if (item.empty()) continue;
                static const std::set<std::string> known{"qfi", "cfi_het", "cfi_pc", "crb", "modes"};
                if (!known.count(item)) throw ValidationError("sweep.outputs", "unknown output '" + item + "'");
                sw.outputs.insert(item);
            }
        }
        if (auto r = get("sweep", "sv_reference")) {
            if (*r == "spacing") sw.sv_reference_spacing = true;
            else if (*r != "max_baseline")
                throw ValidationError("sweep.sv_reference", "must be max_baseline or spacing");
        }
        if (auto t = get("sweep", "threads")) sw.threads = count("sweep.threads", *t);
        rc.sweep = sw;
    }

    // output
    if (auto r = get("output", "report_km")) rc.report_km = boolean("output.report_km", *r);
    if (auto c = get("output", "csv")) rc.csv = *c;

    rc.scenario = validate_scenario(std::move(rc.scenario));
    return rc;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("--config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

namespace config_detail {
inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace config_detail

/// Canonical text form; parse_config(serialize_config(c)) reproduces c. Pixel maps
/// are written by path, so the map file must stay reachable.
inline std::string serialize_config(const RunConfig& rc) {
    using config_detail::g17;
    const Scenario& s = rc.scenario;
    std::ostringstream o;
    o << "[physics]\n";
    o << "center_frequency = " << g17(s.physics.center_frequency) << "\n";
    o << "bandwidth = " << g17(s.physics.bandwidth) << "\n";
    o << "platform_height = " << g17(s.physics.platform_height) << "\n";
    o << "platform_speed = " << g17(s.physics.platform_speed) << "\n";
    if (s.physics.kappa_override) o << "kappa = " << g17(*s.physics.kappa_override) << "\n";
    o << "\n[array]\n";
    if (rc.linear) {
        o << "linear = " << rc.linear->n << "\n";
        if (rc.linear->spacing) o << "spacing = " << g17(*rc.linear->spacing) << "\n";
        if (rc.linear->max_baseline) o << "max_baseline = " << g17(*rc.linear->max_baseline) << "\n";
    } else {
        o << "positions = ";
        for (std::size_t i = 0; i < s.array.positions.size(); ++i)
            o << (i ? "; " : "") << g17(s.array.positions[i][0]) << " " << g17(s.array.positions[i][1]);
        o << "\n";
    }
    o << "polarization = " << s.array.polarization << "\n";
    o << "\n[source]\n";
    if (auto* d = std::get_if<UniformDisc>(&s.source)) {
        o << "type = disc\nradius = " << g17(d->radius) << "\ntemperature = " << g17(d->temperature)
          << "\ncenter = " << g17(d->x0) << " " << g17(d->y0) << "\n";
    } else if (auto* t = std::get_if<TwoDiscs>(&s.source)) {
        o << "type = two_discs\nradius = " << g17(t->radius) << "\ntemperature1 = " << g17(t->t1)
          << "\ntemperature2 = " << g17(t->t2) << "\ncenter1 = " << g17(t->x1) << " " << g17(t->y1)
          << "\ncenter2 = " << g17(t->x2) << " " << g17(t->y2)
          << "\npoint_source = " << (t->point_source ? "true" : "false") << "\n";
    } else {
        o << "type = pixel_map\nfile = " << std::get<PixelSource>(s.source).path << "\n";
    }
    o << "\n[estimate]\nparameters = ";
    for (std::size_t i = 0; i < s.parameters.size(); ++i) o << (i ? ", " : "") << param_name(s.parameters[i]);
    o << "\n";
    if (s.sample_length) o << "sample_length = " << g17(*s.sample_length) << "\n";
    o << "derivative = " << (rc.derivative == DerivativeMode::analytic ? "analytic" : "fd") << "\n";
    o << "max_modes = " << rc.max_modes << "\n";
    if (rc.sweep) {
        const auto& w = *rc.sweep;
        o << "\n[sweep]\nknob = " << w.knob_name() << "\nfrom = " << g17(w.from) << "\nto = " << g17(w.to)
          << "\nsteps = " << w.steps << "\nscale = " << (w.log_scale ? "log" : "linear") << "\noutputs = ";
        bool first = true;
        for (const auto& out : w.outputs) {
            o << (first ? "" : ", ") << out;
            first = false;
        }
        o << "\nsv_reference = " << (w.sv_reference_spacing ? "spacing" : "max_baseline")
          << "\nthreads = " << w.threads << "\n";
    }
    o << "\n[output]\nreport_km = " << (rc.report_km ? "true" : "false") << "\n";
    if (rc.csv) o << "csv = " << *rc.csv << "\n";
    return o.str();
}

} // namespace qsense
