// Command-line front end: simulate, sweep, verify-algebra, verify-ansatz,
// neutrino and convert. Exit codes: 0 ok, 2 config, 3 numerical, 4 I/O.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tsusy/runner.hpp"

namespace {

using namespace tsusy;

struct Flags {
    std::string output;
    std::string format;
    std::string svg;
    std::size_t parallelism = 1;
};

void emit(const std::string& text, const std::string& path, const std::string& summary) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        if (!summary.empty()) std::cerr << summary << "\n";
        if (!std::cout) throw Error(ErrorKind::Io, "write to stdout failed");
    } else {
        io::write_text(path, text);
        if (!summary.empty()) std::cout << summary << "\n";
    }
}

void finish_scenario(RunConfig rc, const Flags& flags) {
    if (!flags.output.empty()) rc.output = flags.output;
    if (!flags.format.empty()) rc.format = parse_format(flags.format);
    if (!flags.svg.empty()) rc.svg = flags.svg;
    const auto result = run_scenario(rc);
    const std::string text = render(result, rc.format);
    emit(text, rc.output, result.summary());
    if (!rc.svg.empty())
        io::write_text(rc.svg, io::svg_line_chart(result.times, result.oscillation.probability,
                                                  rc.scenario + ": transition probability", "t (1/eV)", "P(t)"));
}

int simulate(const std::string& path, const Flags& flags) {
    finish_scenario(run_config_from(ConfigFile::load(path)), flags);
    return exit_code::ok;
}

int sweep(const std::string& path, Flags flags) {
    const auto cfg = ConfigFile::load(path);
    if (flags.output.empty()) flags.output = cfg.entries().count("output") ? cfg.entries().at("output") : "";
    std::string format = flags.format;
    if (format.empty()) format = cfg.entries().count("format") ? cfg.entries().at("format") : "csv";
    const auto fmt = parse_format(format);
    const auto plan = plan_sweep(cfg);
    const auto result = run_sweep(plan, flags.parallelism);
    const std::string text = fmt == OutputFormat::Csv ? sweep_csv(result) : sweep_json(result).dump(2) + "\n";
    std::size_t ok = 0;
    for (const auto& r : result.rows) ok += r.status == "ok";
    emit(text, flags.output,
         "sweep: " + std::to_string(ok) + " of " + std::to_string(result.rows.size()) + " rows succeeded");
    return result.any_success() ? exit_code::ok : exit_code::numerical;
}

int verify_algebra(const std::string& path, const Flags& flags) {
    const auto report = algebra_report(algebra_config_from(ConfigFile::load(path)));
    emit(report.dump(2) + "\n", flags.output, "");
    return exit_code::ok;
}

int verify_ansatz(const std::string& path, const Flags& flags) {
    const auto report = ansatz_report(ansatz_config_from(ConfigFile::load(path)));
    emit(report.dump(2) + "\n", flags.output, "");
    return exit_code::ok;
}

int neutrino(double sin2_2theta, const std::string& mode, std::size_t samples, const Flags& flags) {
    NeutrinoPreset preset;
    preset.sin2_2theta = sin2_2theta;
    ClosedFormMode m;
    if (mode == "reduced") m = ClosedFormMode::URReduced;
    else if (mode == "full") m = ClosedFormMode::URFull;
    else throw Error(ErrorKind::Config, "--mode must be reduced or full");
    auto rc = neutrino_run_config(preset, m, samples);
    rc.params().validate();
    if (!flags.output.empty()) rc.output = flags.output;
    if (!flags.format.empty()) rc.format = parse_format(flags.format);
    if (!flags.svg.empty()) rc.svg = flags.svg;
    const auto result = run_scenario(rc);
    emit(render(result, rc.format), rc.output, neutrino_summary(preset, result));
    if (!rc.svg.empty())
        io::write_text(rc.svg, io::svg_line_chart(result.times, result.oscillation.probability,
                                                  "neutrino preset: transition probability", "t (1/eV)", "P(t)"));
    return exit_code::ok;
}

int convert(const std::string& value, const std::string& from, const std::string& to) {
    const double x = detail::parse_double(value, "value");
    std::printf("%.17g\n", units::convert(x, from, to));
    return exit_code::ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-domain supersymmetric Dirac modes with time-dependent mass"};
    app.require_subcommand(1);
    app.fallthrough();

    Flags flags;
    app.add_option("--output", flags.output, "Output file (default: stdout)");
    app.add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--svg", flags.svg, "Also write an SVG chart of P(t)");
    app.add_option("--parallelism", flags.parallelism, "Sweep worker count")->check(CLI::Range(1, 1024));

    std::string config, value, from, to, mode = "reduced";
    double sin2_2theta = 1.0;
    std::size_t samples = 1001;

    auto* sim = app.add_subcommand("simulate", "Run one scenario");
    sim->add_option("config", config, "Scenario config")->required();
    auto* swp = app.add_subcommand("sweep", "Cartesian parameter sweep");
    swp->add_option("config", config, "Sweep config")->required();
    auto* alg = app.add_subcommand("verify-algebra", "Super-algebra residual report");
    alg->add_option("config", config, "Grid and profile config")->required();
    auto* ans = app.add_subcommand("verify-ansatz", "Spatial ansatz residual report");
    ans->add_option("config", config, "Ansatz config")->required();
    auto* neu = app.add_subcommand("neutrino", "Closed-form MeV neutrino preset");
    neu->add_option("--sin2-2theta", sin2_2theta, "Mixing strength sin^2(2 theta)");
    neu->add_option("--mode", mode, "reduced or full");
    neu->add_option("--samples", samples, "Number of time samples")->check(CLI::Range(3, 10000000));
    auto* cnv = app.add_subcommand("convert", "Natural-unit conversion (eV, eV^-1, s, m, km, eV^2)");
    cnv->add_option("value", value)->required();
    cnv->add_option("from", from)->required();
    cnv->add_option("to", to)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::config;
    }

    try {
        if (*sim) return simulate(config, flags);
        if (*swp) return sweep(config, flags);
        if (*alg) return verify_algebra(config, flags);
        if (*ans) return verify_ansatz(config, flags);
        if (*neu) return neutrino(sin2_2theta, mode, samples, flags);
        if (*cnv) return convert(value, from, to);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::numerical;
    }
    return exit_code::config;
}
