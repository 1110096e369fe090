#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "tsusy/runner.hpp"

using namespace tsusy;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "tsusy_cli_tests";
    fs::create_directories(dir);
    return dir;
}

RunConfig config_from_text(const std::string& text) { return run_config_from(ConfigFile::parse(text)); }

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

} // namespace

TEST(Config, SectionsCommentsAndLists) {
    const auto cfg = ConfigFile::parse(
        "# comment\n"
        "scenario = demo   # trailing\n"
        "theta = [0.1, 0.2]\n"
        "profile = [constant(1), sinusoidal(1, 0.5)]\n"
        "\n"
        "[region]\n"
        "n = 32\n");
    EXPECT_EQ(cfg.get("scenario"), "demo");
    EXPECT_EQ(cfg.get("region.n"), "32");
    EXPECT_EQ(cfg.list_keys(), (std::vector<std::string>{"profile", "theta"}));
    EXPECT_EQ(ConfigFile::list_items(*cfg.get("profile")),
              (std::vector<std::string>{"constant(1)", "sinusoidal(1, 0.5)"}));
    EXPECT_EQ(ConfigFile::list_items("1, 2, 3").size(), 3u);
}

TEST(Config, MalformedInputIsConfigError) {
    EXPECT_EQ(kind_of([] { ConfigFile::parse("just words\n"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { ConfigFile::parse("a = 1\na = 2\n"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { ConfigFile::parse("[]\n"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { ConfigFile::list_items("[1, , 2]"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { ConfigFile::load("/definitely/not/here.conf"); }), ErrorKind::Config);
}

TEST(Config, ScenarioDefaultsAndValidation) {
    const auto rc = config_from_text("profile = sinusoidal(1, 0.5)\nk = 2\n");
    EXPECT_EQ(rc.t0, 0.0);
    EXPECT_DOUBLE_EQ(rc.t1, std::numbers::pi / 0.5);
    EXPECT_EQ(rc.samples, 1001u);
    EXPECT_FALSE(rc.closed_form.has_value());

    const auto section = config_from_text("k = 1\nt1 = 2\n[profile]\nkind = constant\nm = 3\n");
    EXPECT_EQ(section.profile_spec, "constant(3)");
    EXPECT_EQ(section.profile.m0(), 3.0);

    EXPECT_EQ(kind_of([] { config_from_text("profile = constant(1)\nk = 1\n"); }), ErrorKind::Config);   // no t1
    EXPECT_EQ(kind_of([] { config_from_text("profile = constant(1)\nk = 1\nt1 = 1\nrel_tol = 1e-2\n"); }),
              ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config_from_text("profile = constant(1)\nk = 1\nt1 = 1\ncolour = red\n"); }),
              ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config_from_text("profile = sinusoidal(1, 1)\nk = 1\nt1 = 4\n"); }), ErrorKind::Domain);
    EXPECT_EQ(kind_of([] { config_from_text("profile = constant(1)\nk = 1\nt1 = 1\nprobability_source = closed_form(ur_full)\n"); }),
              ErrorKind::Config);
    EXPECT_EQ(kind_of([] { config_from_text("profile = constant(1)\nk = 1\nt1 = 1\ntheta = 0.1\nsin2_2theta = 0.5\n"); }),
              ErrorKind::Config);
    // True neutrino hierarchy through the pipeline is rejected before any work.
    EXPECT_EQ(kind_of([] { config_from_text("profile = sinusoidal(0.1, 1e-10)\nk = 1e6\n"); }), ErrorKind::Hierarchy);
    EXPECT_EQ(exit_code_for(Error(ErrorKind::Hierarchy, "")), exit_code::config);
    EXPECT_EQ(exit_code_for(Error(ErrorKind::Tolerance, "")), exit_code::numerical);
    EXPECT_EQ(exit_code_for(Error(ErrorKind::Io, "")), exit_code::io);
}

TEST(Runner, MasslessScenarioHasNoOscillation) {
    const auto r = run_scenario(config_from_text("profile = constant(0)\nk = 3\nt1 = 10\nsamples = 501\n"));
    for (double p : r.oscillation.probability) EXPECT_LE(std::abs(p), 1e-10);
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        EXPECT_NEAR(r.E_plus[i].real(), 3.0, 1e-8);
        EXPECT_NEAR(r.E_minus[i].real(), 3.0, 1e-8);
    }
}

TEST(Runner, TwoLevelPeak) {
    const auto r = run_scenario(config_from_text(
        "profile = constant(3)\nk = 4\ntheta = 0.78539816339744828\nt1 = 1.2566370614359172\nsamples = 1001\n"));
    EXPECT_NEAR(r.peak_probability, 0.36, 1e-6);
    EXPECT_NEAR(r.peak_time, std::numbers::pi / 10, 1e-6);
    EXPECT_LE(r.norm_drift, 1e-8);
    EXPECT_EQ(r.producer, "coupled");
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        const double s = std::sin(5 * r.times[i]);
        EXPECT_NEAR(r.oscillation.probability[i], 0.36 * s * s, 1e-7);
    }
}

TEST(Runner, RoutesAgreeOnProbability) {
    const std::string base = "profile = sinusoidal(1, 0.5)\nk = 2\nsamples = 801\n";
    const auto a = run_scenario(config_from_text(base + "route = coupled\n"));
    const auto b = run_scenario(config_from_text(base + "route = riccati\n"));
    const auto c = run_scenario(config_from_text(base + "route = second_order\n"));
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        EXPECT_NEAR(b.oscillation.probability[i], a.oscillation.probability[i], 1e-6);
        EXPECT_NEAR(c.oscillation.probability[i], a.oscillation.probability[i], 1e-6);
    }
}

TEST(Runner, NeutrinoPreset) {
    NeutrinoPreset n;
    EXPECT_DOUBLE_EQ(n.lambda(), 1e-10);
    const auto r = run_scenario(neutrino_run_config(n));
    EXPECT_EQ(r.peak_probability, 0.1 * 0.1 / (4 * 1e12));
    EXPECT_NEAR(r.peak_time * n.lambda(), std::numbers::pi / 2, 1e-12);
    EXPECT_EQ(r.frame, EnergyFrame::Oscillation);
    EXPECT_TRUE(r.oscillation.applicable);
    EXPECT_FALSE(r.oscillation.validity.empty());

    n.sin2_2theta = 0.5;
    const auto half = run_scenario(neutrino_run_config(n, ClosedFormMode::URFull));
    EXPECT_NEAR(half.peak_probability / 0.5, 2.5e-15, 1e-6 * 2.5e-15);
}

TEST(Runner, MassiveClosedFormExample) {
    // theta = pi/6, m = 2, t = pi/4: sin^2(pi/3) sin^2(pi/2) = 0.75
    const auto r = run_scenario(config_from_text(
        "profile = constant(2)\nk = 0\ntheta = 0.52359877559829887\nt1 = 0.78539816339744828\nsamples = 3\n"
        "probability_source = closed_form(massive)\n"));
    EXPECT_NEAR(r.oscillation.probability.back(), 0.75, 1e-15);
    EXPECT_EQ(r.oscillation.probability.front(), 0.0);
}

TEST(Runner, CsvRoundTripIsBitExact) {
    const auto r = run_scenario(config_from_text("profile = sinusoidal(1, 0.5)\nk = 2\nsamples = 301\n"));
    const auto path = (scratch_dir() / "round_trip.csv").string();
    io::write_text(path, render(r, OutputFormat::Csv));
    const auto back = io::read_csv(path);
    const auto table = r.table();
    EXPECT_EQ(back.header, ScenarioResult::columns());
    ASSERT_EQ(back.rows.size(), table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        for (std::size_t j = 0; j < table.header.size(); ++j)
            EXPECT_TRUE(same_bits(back.rows[i][j], table.rows[i][j])) << i << "," << j;
}

TEST(Runner, RandomDoublesSurviveText) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> bits;
    io::Table t{{"x"}, {}};
    while (t.rows.size() < 5000) {
        const std::uint64_t b = bits(rng);
        double x;
        std::memcpy(&x, &b, sizeof x);
        if (std::isfinite(x)) t.rows.push_back({x});
    }
    t.rows.push_back({-0.0});
    t.rows.push_back({5e-324});
    const auto back = io::parse_csv(io::to_csv(t));
    for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_TRUE(same_bits(back.rows[i][0], t.rows[i][0]));
    EXPECT_TRUE(std::isnan(io::parse_csv("x\nnan\n").rows[0][0]));
}

TEST(Runner, JsonCarriesMetadata) {
    const auto r = run_scenario(config_from_text("scenario = j\nprofile = constant(3)\nk = 4\nt1 = 1\nsamples = 11\n"));
    const auto j = r.to_json();
    EXPECT_EQ(j["metadata"]["scenario"], "j");
    EXPECT_EQ(j["metadata"]["producer"], "coupled");
    EXPECT_EQ(j["metadata"]["energy_frame"], "physical");
    EXPECT_EQ(j["series"]["P"].size(), 11u);
    EXPECT_TRUE(j["metadata"]["diagnostics"].contains("norm_drift"));
}

TEST(Runner, FailedWriteLeavesNothing) {
    const auto dir = scratch_dir() / "missing_subdir";
    fs::remove_all(dir);
    EXPECT_EQ(kind_of([&] { io::write_text((dir / "x.csv").string(), "data"); }), ErrorKind::Io);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Runner, SvgGeometry) {
    const auto svg = io::svg_line_chart({0, 1, 2}, {0, 0.5, 0.2}, "t<itle>", "x", "y");
    EXPECT_NE(svg.find("width=\"800\" height=\"500\""), std::string::npos);
    EXPECT_NE(svg.find("t&lt;itle&gt;"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Sweep, LexicographicRowsAndDeterminism) {
    const auto cfg = ConfigFile::parse(
        "profile = [constant(0.5), constant(1), constant(2)]\nk = 4\ntheta = [0.3, 0.7]\nt1 = 3\nsamples = 101\n");
    const auto plan = plan_sweep(cfg);
    EXPECT_EQ(plan.rows, 6u);
    const auto one = run_sweep(plan, 1);
    const auto eight = run_sweep(plan, 8);
    ASSERT_EQ(one.rows.size(), 6u);
    EXPECT_EQ(one.axes, (std::vector<std::string>{"profile", "theta"}));
    EXPECT_EQ(one.rows[0].values, (std::vector<std::string>{"constant(0.5)", "0.3"}));
    EXPECT_EQ(one.rows[1].values, (std::vector<std::string>{"constant(0.5)", "0.7"}));
    EXPECT_EQ(one.rows[5].values, (std::vector<std::string>{"constant(2)", "0.7"}));
    EXPECT_EQ(sweep_csv(one), sweep_csv(eight));
    EXPECT_EQ(sweep_json(one).dump(), sweep_json(eight).dump());
    for (const auto& r : one.rows) EXPECT_EQ(r.status, "ok");
    // Quoted profile specs keep the CSV rectangular.
    EXPECT_NE(sweep_csv(one).find("index,profile,theta,status"), std::string::npos);
}

TEST(Sweep, InvalidRowIsRecorded) {
    const auto cfg = ConfigFile::parse(
        "profile = [constant(1), sinusoidal(1, -1), sinusoidal(1, 1)]\nk = 2\nt1 = 3\nsamples = 101\n");
    const auto s = run_sweep(plan_sweep(cfg), 2);
    EXPECT_EQ(s.rows[0].status, "ok");
    EXPECT_EQ(s.rows[1].status, "config_error");
    EXPECT_EQ(s.rows[2].status, "ok");
    EXPECT_TRUE(s.any_success());
    EXPECT_NE(sweep_csv(s).find("\"sinusoidal(1, -1)\""), std::string::npos);

    const auto bad = ConfigFile::parse("profile = [constant(1), constant(2)]\nk = 2\nsamples = 11\n");
    const auto all_fail = run_sweep(plan_sweep(bad), 1);   // constant profiles need t1
    EXPECT_FALSE(all_fail.any_success());
    EXPECT_EQ(kind_of([] { plan_sweep(ConfigFile::parse("output = [a, b]\n")); }), ErrorKind::Config);
}

TEST(Units, ConversionExamples) {
    EXPECT_DOUBLE_EQ(units::convert(1.0, "eV^-1", "s"), 6.582119569e-16);
    EXPECT_EQ(units::convert(2.5, "eV", "eV"), 2.5);
    EXPECT_NEAR(units::max_travel_distance_m(1e-10), 6.199e3, 1.0);
    EXPECT_LT(units::max_travel_distance_m(1e-10), 1e6);
    EXPECT_NEAR(units::convert(1.0, "km", "m"), 1e3, 1e-9);
    EXPECT_EQ(kind_of([] { units::convert(1.0, "eV", "m"); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { units::convert(1.0, "eV", "furlong"); }), ErrorKind::Config);
}

TEST(Reports, AlgebraAndAnsatz) {
    const auto alg = algebra_report(algebra_config_from(ConfigFile::parse("profile = sinusoidal(2, 3)\n")));
    EXPECT_TRUE(alg["algebra_pass"].get<bool>());
    EXPECT_TRUE(alg["consistency"]["pass"].get<bool>());
    EXPECT_GE(alg["consistency"]["observed_order"].get<double>(), 1.95);

    const auto ans = ansatz_report(ansatz_config_from(ConfigFile::parse("k1 = 1\nk2 = 0\nrefine = [16, 32]\n[region]\nn = 64\n")));
    EXPECT_TRUE(ans["identity_pass"].get<bool>());
    EXPECT_EQ(ans["refinement"]["samples"].size(), 2u);
    const auto transverse = ansatz_report(ansatz_config_from(ConfigFile::parse("k1 = 1\nk2 = 1\n[region]\nn = 24\n")));
    EXPECT_TRUE(transverse["identity_pass"].is_null());
    EXPECT_GT(transverse["residual_plus"].get<double>(), 1.0);
    EXPECT_EQ(kind_of([] { ansatz_config_from(ConfigFile::parse("f = cubic(2)\n")); }), ErrorKind::Config);
    EXPECT_EQ(kind_of([] { ansatz_config_from(ConfigFile::parse("[region]\nn = 8\n")); }), ErrorKind::Config);
}
