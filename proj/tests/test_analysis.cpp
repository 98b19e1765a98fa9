#include <gtest/gtest.h>

#include <sstream>

#include <qsense/analysis.hpp>

using namespace qsense;

namespace {

RunConfig cfg(const std::string& name) { return load_config(std::string(QSENSE_CONFIGS) + "/" + name); }

std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> r;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) r.push_back(cell);
        out.push_back(r);
    }
    return out;
}

} // namespace

TEST(Format, Numbers) {
    EXPECT_EQ(fmt_num(-0.0), fmt_num(0.0));
    EXPECT_EQ(fmt_num(std::nan("")), "nan");
    EXPECT_EQ(fmt_num(1.5, 2), "1.50e+00");
}

TEST(Analyze, CsvShape) {
    const auto out = analyze(cfg("two_mode_disc.cfg"));
    EXPECT_FALSE(out.numerical_failure);
    const auto r = rows(out.csv);
    ASSERT_EQ(r.size(), 4u);   // header + a, T, x0
    EXPECT_EQ(r[0][0], "parameter");
    EXPECT_EQ(r[0].size(), 6u);
    EXPECT_NE(out.csv.find("# scenario_hash="), std::string::npos);
    EXPECT_NE(out.text.find("QFI"), std::string::npos);
}

TEST(Analyze, KilometreScaling) {
    RunConfig rc = cfg("two_mode_disc.cfg");
    rc.report_km = false;
    const auto m = rows(analyze(rc).csv);
    rc.report_km = true;
    const auto k = rows(analyze(rc).csv);
    EXPECT_NEAR(std::stod(k[1][1]), std::stod(m[1][1]) * 1e6, 1e-8 * std::stod(k[1][1]));   // a
    EXPECT_NEAR(std::stod(k[2][1]), std::stod(m[2][1]), 1e-8 * std::stod(k[2][1]));         // T
}

TEST(Analyze, SmosRadiusBound) {
    const auto out = analyze(cfg("smos_single.cfg"));
    const auto r = rows(out.csv);
    EXPECT_EQ(r[1][0], "a");
    const double k = kappa_from_frequency(1.4235e9);
    const double want = 4.0 * pi * k * 300.0 / (758.0 * 758.0);   // km^-2
    EXPECT_NEAR(std::stod(r[1][1]), want, 1e-6 * want);
    EXPECT_NEAR(std::stod(r[1][4]), 4.04, 0.01);   // km
}

TEST(Sweep, RowMatchesSubstitutedAnalyze) {
    RunConfig rc = cfg("two_discs_sv.cfg");
    rc.sweep->steps = 7;
    const auto sw = rows(sweep(rc, 1));
    const auto values = sweep_values(*rc.sweep);
    ASSERT_EQ(sw.size(), values.size() + 1);
    for (std::size_t i : {std::size_t(1), std::size_t(4)}) {
        const RunConfig one = apply_knob(rc, *rc.sweep, values[i]);
        const PointResult p = evaluate(one.scenario, one.derivative, fisher_options(one));
        EXPECT_NEAR(std::stod(sw[i + 1][2]), p.qfi(0, 0) * 1e6, 1e-8 * p.qfi(0, 0) * 1e6);
    }
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
    RunConfig rc = cfg("two_discs_sv.cfg");
    rc.sweep->steps = 12;
    EXPECT_EQ(sweep(rc, 1), sweep(rc, 4));
}

TEST(Sweep, DegeneratePointsBecomeNan) {
    RunConfig rc = cfg("two_discs_sv.cfg");
    std::get<TwoDiscs>(rc.scenario.source).point_source = true;
        rc.scenario = validate_scenario(rc.scenario);
    rc.sweep->from = 0.5;
    rc.sweep->to = 1.5;
    rc.sweep->steps = 3;
    const auto r = rows(sweep(rc, 1));
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[2][2], "nan");   // sources in phase at sv = 1
    EXPECT_NE(r[1][2], "nan");
}

TEST(Sweep, KnobErrors) {
    RunConfig rc = cfg("two_mode_disc.cfg");
    SweepSpec w;
    w.kind = KnobKind::dr;
    EXPECT_THROW(apply_knob(rc, w, 2.0), ValidationError);
    w.kind = KnobKind::sv;
    EXPECT_THROW(apply_knob(rc, w, 0.5), ValidationError);
    w.kind = KnobKind::parameter;
    w.param = Param::s_x;
    EXPECT_THROW(apply_knob(rc, w, 1.0), ValidationError);
    w.from = 1.0;
    w.to = 1.0;
    w.steps = 5;
    EXPECT_THROW(sweep_values(w), ValidationError);
    w.from = -1.0;
    w.log_scale = true;
    EXPECT_THROW(sweep_values(w), ValidationError);
    EXPECT_THROW(sweep(rc), ValidationError);
}

TEST(Sweep, LinearArrayKnobs) {
    RunConfig rc = cfg("linear20.cfg");
    const RunConfig two = apply_knob(rc, *rc.sweep, 0.5);
    EXPECT_DOUBLE_EQ(two.scenario.array.positions[19][0], 9.5);
    SweepSpec n;
    n.kind = KnobKind::n_receivers;
    EXPECT_EQ(apply_knob(rc, n, 7.2).scenario.n_modes(), 7u);
}

TEST(Modes, RecoveredPhaseMatchesAnalytic) {
    const RunConfig rc = cfg("two_mode_disc.cfg");
    for (Param p : {Param::a, Param::T, Param::x0}) {
        const auto out = modes(rc, p);
        const auto pos = out.csv.find("recovered_phase_mod_pi=");
        const auto pa = out.csv.find("analytic_phase_mod_pi=");
        ASSERT_NE(pos, std::string::npos);
        ASSERT_NE(pa, std::string::npos);
        const double rec = std::stod(out.csv.substr(pos + 23));
        const double an = std::stod(out.csv.substr(pa + 22));
        const double d = std::abs(rec - an);
        EXPECT_LT(std::min(d, pi - d), 1e-6) << param_name(p);
    }
    RunConfig sv = cfg("two_discs_sv.cfg");
    for (Param p : {Param::s_x, Param::t_x}) {
        const auto out = modes(sv, p);
        const double rec = std::stod(out.csv.substr(out.csv.find("recovered_phase_mod_pi=") + 23));
        const double an = std::stod(out.csv.substr(out.csv.find("analytic_phase_mod_pi=") + 22));
        const double d = std::abs(rec - an);
        EXPECT_LT(std::min(d, pi - d), 1e-6) << param_name(p);
    }
}

TEST(Parallel, LowestIndexExceptionWins) {
    try {
        parallel_for(20, 4, [](std::size_t i) {
            if (i == 13 || i == 5) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "5");
    }
}
