#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <qsense/qsense.hpp>

namespace {

struct Common {
    std::string config;
    std::string csv;
    bool report_km = false;
    std::optional<std::size_t> max_modes;
    std::string derivative;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "scenario config file");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    app->add_option("--csv", c.csv, "write results as CSV to this path");
    app->add_flag("--report-km", c.report_km, "report lengths in km (Fisher entries in km^-2)");
    app->add_option("--max-modes", c.max_modes, "refuse arrays with more receivers than this");
    app->add_option("--derivative", c.derivative, "parameter derivatives")
        ->check(CLI::IsMember({"analytic", "fd"}));
}

qsense::RunConfig load(const Common& c) {
    qsense::RunConfig rc = qsense::load_config(c.config);
    if (c.report_km) rc.report_km = true;
    if (c.max_modes) rc.max_modes = *c.max_modes;
    if (c.derivative == "fd") rc.derivative = qsense::DerivativeMode::finite_difference;
    if (c.derivative == "analytic") rc.derivative = qsense::DerivativeMode::analytic;
    if (!c.csv.empty()) rc.csv = c.csv;
    return rc;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qsense::InvalidInput("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw qsense::InvalidInput("failed writing '" + path + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum Fisher information for passive microwave interferometry"};
    app.set_version_flag("--version", std::string(qsense::version));
    app.require_subcommand(1);
    app.footer(qsense::config_help());

    Common an, sw, mo;
    auto* analyze = app.add_subcommand("analyze", "QFI, classical Fisher information and bounds for one scenario");
    add_common(analyze, an, true);

    auto* sweep = app.add_subcommand("sweep", "evaluate the scenario over the [sweep] grid, CSV output");
    add_common(sweep, sw, true);
    std::size_t threads = 0;
    sweep->add_option("--threads", threads, "worker threads (default: config value)");

    auto* modes = app.add_subcommand("modes", "optimal detection modes for one parameter");
    add_common(modes, mo, true);
    std::string param;
    modes->add_option("--param", param, "parameter (default: first in the config)");

    auto* validate = app.add_subcommand("validate", "cross-check the engine against closed forms");
    std::uint64_t seed = qsense::ValidationOptions{}.seed;
    std::string vcsv;
    bool fault = false;
    validate->add_option("--seed", seed, "random seed");
    validate->add_option("--csv", vcsv, "write the check table to this path");
    validate->add_flag("--inject-pairing-fault", fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*analyze) {
            const auto rc = load(an);
            const auto out = qsense::analyze(rc);
            std::cout << out.text;
            if (rc.csv) write_file(*rc.csv, out.csv);
            return out.numerical_failure ? 3 : 0;
        }
        if (*sweep) {
            const auto rc = load(sw);
            const std::string csv = qsense::sweep(rc, threads);
            if (rc.csv)
                write_file(*rc.csv, csv);
            else
                std::cout << csv;
            return 0;
        }
        if (*modes) {
            const auto rc = load(mo);
            qsense::Param p;
            if (param.empty()) {
                if (rc.scenario.parameters.empty())
                    throw qsense::ValidationError("estimate.parameters", "no parameter to analyse");
                p = rc.scenario.parameters.front();
            } else {
                auto q = qsense::parse_param(param);
                if (!q) throw qsense::InvalidParameter("unknown parameter '" + param + "'");
                p = *q;
            }
            const auto out = qsense::modes(rc, p);
            std::cout << out.text;
            if (rc.csv) write_file(*rc.csv, out.csv);
            return 0;
        }
        if (*validate) {
            qsense::ValidationOptions opt;
            opt.seed = seed;
            opt.inject_pairing_fault = fault;
            const auto rep = qsense::run_validation(opt);
            const std::string csv = rep.csv();
            std::cout << csv;
            if (!vcsv.empty()) write_file(vcsv, csv);
            if (!rep.ok()) {
                std::cerr << "qsense: validation failed\n";
                return 1;
            }
            return 0;
        }
    } catch (const qsense::Error& e) {
        std::cerr << "qsense: " << e.name() << ": " << e.what() << "\n";
        return e.kind() == qsense::ErrorKind::input ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "qsense: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
