#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "weakflow/cli.hpp"
#include "weakflow/expression.hpp"

using namespace weakflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::string tmpl = (fs::temp_directory_path() / "weakflow_cli_XXXXXX").string();
        if (!mkdtemp(tmpl.data())) {
            throw std::runtime_error("mkdtemp failed");
        }
        path = tmpl;
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::map<std::string, std::string> key_values(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(' '));
            s.erase(s.find_last_not_of(' ') + 1);
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

bool same_value(const std::string& a, const std::string& b)
{
    if (a == b) {
        return true;
    }
    // Numbers, or comma pairs of numbers, compared by value.
    std::istringstream sa(a);
    std::istringstream sb(b);
    std::string ta;
    std::string tb;
    while (std::getline(sa, ta, ',')) {
        if (!std::getline(sb, tb, ',')) {
            return false;
        }
        char* ea = nullptr;
        char* eb = nullptr;
        const double va = std::strtod(ta.c_str(), &ea);
        const double vb = std::strtod(tb.c_str(), &eb);
        if (*ea != '\0' || *eb != '\0' || ea == ta.c_str() || va != vb) {
            return false;
        }
    }
    return !std::getline(sb, tb, ',');
}

cli::Scenario small_isothermal()
{
    cli::Scenario s;
    s.name = "small";
    s.system = "isothermal";
    s.cells = 64;
    s.K = 1.0;
    s.alpha = 0.1;
    s.beta = 0.5;
    s.rho = "1 + 0.2*sin(x)";
    s.u = "0.3*cos(x)";
    s.dt = 1e-3;
    s.t_final = 0.02;
    s.snapshots = {0.01};
    s.monitor_every = 5;
    return s;
}

}  // namespace

TEST_CASE("expressions evaluate the documented grammar")
{
    CHECK(Expression::parse("1 + 2*3 - 4/2")(0.0) == 5.0);
    CHECK(Expression::parse("-x*-2")(1.5) == 3.0);
    CHECK(Expression::parse("pi")(0.0) == std::numbers::pi);
    CHECK(Expression::parse("sin(x) + cos(y)")(0.3, 0.7) == doctest::Approx(std::sin(0.3) + std::cos(0.7)));
    CHECK(Expression::parse("exp(abs(x))")(-1.0) == doctest::Approx(std::exp(1.0)));
    CHECK(Expression::parse("pw(x, 1, 0.1)")(-0.01) == 1.0);
    CHECK(Expression::parse("pw(x, 1, 0.1)")(0.0) == 0.1);
    CHECK(Expression::parse("2e-3*x")(1.0) == 2e-3);
    CHECK(Expression::parse("(1 + x) / (2)")(3.0) == 2.0);
    CHECK(Expression::parse("3").is_constant());
    CHECK_FALSE(Expression::parse("0*x + 1").is_constant());

    for (const char* bad : {"", "1 +", "sin x", "foo(1)", "pw(x, 1)", "(1", "1 2", "x $ 2"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(Expression::parse(bad), std::invalid_argument);
    }
}

TEST_CASE("symbolic derivatives")
{
    const Expression e = Expression::parse("0.1*sin(2*x) * exp(-y) + abs(x - 1) + pw(x, x*x, 3)");
    for (double x : {-1.3, -0.2, 0.4, 2.1}) {
        for (double y : {-0.5, 0.8}) {
            const double h = 1e-6;
            const double fx = (e(x + h, y) - e(x - h, y)) / (2 * h);
            const double fy = (e(x, y + h) - e(x, y - h)) / (2 * h);
            CHECK(e.derivative(0)(x, y) == doctest::Approx(fx).epsilon(1e-7).scale(1.0));
            CHECK(e.derivative(1)(x, y) == doctest::Approx(fy).epsilon(1e-7).scale(1.0));
        }
    }
    CHECK(Expression::parse("x / (1 + y*y)").derivative(1)(2.0, 1.0) == doctest::Approx(-1.0));
    CHECK(Expression::parse("7").derivative(0).is_constant());
    CHECK_THROWS_AS(e.derivative(2), std::invalid_argument);
}

TEST_CASE("scenario text round-trips and rejects bad input")
{
    const cli::Scenario s = small_isothermal();
    std::istringstream in(s.to_text());
    const cli::Scenario back = cli::parse_scenario(in);
    CHECK(back.to_text() == s.to_text());

    std::istringstream commented("# comment\nsystem = shallow   # trailing\n\ncells = 12\n");
    const cli::Scenario c = cli::parse_scenario(commented);
    CHECK(c.system == "shallow");
    CHECK(c.cells == 12);

    cli::Scenario t = s;
    cli::apply_override(t, "scheme.delta=0.25");
    CHECK(t.delta == 0.25);
    cli::apply_override(t, "run.snapshots = 0.005, 0.015");
    CHECK(t.snapshots == std::vector<double>{0.005, 0.015});
    CHECK_THROWS_AS(cli::apply_override(t, "scheme.delta"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(t, "scheme.colour=red"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(t, "cells=many"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(t, "system=plasma"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(t, "ic.rho=sqrt(x)"), std::invalid_argument);
    CHECK_THROWS_AS(cli::apply_override(t, "run.method=leapfrog"), std::invalid_argument);

    std::istringstream broken("system isothermal\n");
    CHECK_THROWS_AS(cli::parse_scenario(broken), std::invalid_argument);
}

TEST_CASE("presets carry the published parameters")
{
    const std::string golden = slurp(fs::path(WEAKFLOW_TEST_DATA) / "presets.cfg");
    std::istringstream in(golden);
    std::string line;
    std::string current;
    std::map<std::string, std::map<std::string, std::string>> table;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line[0] == '[') {
            current = line.substr(1, line.find(']') - 1);
            continue;
        }
        const auto kv = key_values(line);
        table[current].insert(kv.begin(), kv.end());
    }
    CHECK(table.size() == cli::preset_names().size());
    for (const auto& [name, expected] : table) {
        CAPTURE(name);
        REQUIRE(cli::is_preset(name));
        const cli::Scenario s = cli::preset(name);
        const auto actual = key_values(s.to_text());
        for (const auto& [key, value] : expected) {
            CAPTURE(key);
            REQUIRE(actual.count(key) == 1);
            CHECK_MESSAGE(same_value(actual.at(key), value), actual.at(key) << " != " << value);
        }
        CHECK_NOTHROW(s.validate());
    }
    CHECK_THROWS_AS(cli::preset("sod"), std::invalid_argument);
}

TEST_CASE("constraint violations name the constraint")
{
    cli::Scenario s = cli::preset("jeans-1d");
    s.alpha = 0.2;
    try {
        s.validate();
        FAIL("expected a constraint error");
    } catch (const ConstraintError& e) {
        CHECK(std::string(e.what()) == "α < 1/6 required for selfgravity, got 0.2");
    }

    cli::Scenario iso = small_isothermal();
    iso.alpha = 0.2;
    try {
        iso.validate();
        FAIL("expected a constraint error");
    } catch (const ConstraintError& e) {
        CHECK(std::string(e.what()) == "α < 1/6 required for isothermal, got 0.2");
    }

    cli::Scenario vac = cli::preset("bouchut-vacuum");
    vac.rho_min = 0.0;
    CHECK_THROWS_AS(vac.validate(), std::invalid_argument);
    vac.rho_min = 1e-6;
    vac.constraints = ConstraintMode::strict;
    CHECK_THROWS_AS(vac.validate(), ConstraintError);

    cli::Scenario bad_dt = small_isothermal();
    bad_dt.dt = 0.003;
    CHECK_THROWS_AS(bad_dt.validate(), std::invalid_argument);
}

TEST_CASE("initial states from Riemann data, floors and smoothing")
{
    cli::Scenario s = cli::preset("toro-swe-3");
    s.cells = 10;
    s.smoothing = 0.0;
    const FlowState raw = s.initial_state();
    CHECK(raw.rho[0] == 1.0);
    CHECK(raw.rho[4] == 1.0);
    CHECK(raw.rho[5] == 1e-10);
    CHECK(raw.rho[9] == 1e-10);

    s.smoothing = 0.1;
    const FlowState sm = s.initial_state();
    CHECK(sm.rho[4] == doctest::Approx(0.9 + 0.1e-10));
    CHECK(sm.rho[5] == doctest::Approx(0.1 + 0.9e-10));
    CHECK(sm.rho[9] == doctest::Approx(0.1 + 0.9e-10));  // periodic image of the jump
    CHECK(sm.mass() == doctest::Approx(raw.mass()).epsilon(1e-14));

    const cli::Scenario t1 = cli::preset("toro-swe-1");
    const FlowState a = t1.initial_state();
    CHECK(a.momentum[0][0] == 2.5);
    CHECK(a.momentum[0][499] == 0.0);
    REQUIRE(t1.oracle() != nullptr);
    CHECK(t1.oracle()->left_state().u == 2.5);
    CHECK(cli::preset("jeans-1d").oracle() == nullptr);
}

TEST_CASE("field dumps")
{
    const Torus t(1, 4);
    const FlowState s = FlowState::make(PeriodicField(t, std::vector<double>{1.0, 0.1, 1.0 / 3.0, 2.0}),
                                        {PeriodicField(t, std::vector<double>{0.1, -0.7, 1e-17, 2.0 / 3.0})});
    std::stringstream io;
    cli::dump_fields(s, io);
    const std::string text = io.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(text.rfind("x,rho,u\n", 0) == 0);
    const FlowState back = cli::read_fields(io);
    const FlowState canon = cli::canonical_state(s);
    CHECK(back.rho == canon.rho);
    CHECK(back.momentum[0] == canon.momentum[0]);
    // Canonical states are fixed points.
    CHECK(cli::canonical_state(canon).momentum[0] == canon.momentum[0]);

    const Torus t2(2, 3);
    const FlowState s2 = FlowState::make(
        PeriodicField::sample(t2, [](double x, double y) { return 2.0 + std::sin(x) * std::cos(y); }),
        {PeriodicField::sample(t2, [](double x, double) { return x; }),
         PeriodicField::sample(t2, [](double, double y) { return -y; })});
    std::stringstream io2;
    cli::dump_fields(s2, io2);
    CHECK(io2.str().rfind("x,y,rho,u,v\n", 0) == 0);
    const FlowState back2 = cli::read_fields(io2);
    CHECK(back2.torus() == t2);
    CHECK(back2.rho == s2.rho);

    std::stringstream bad("x,rho\n1,2\n");
    CHECK_THROWS_AS(cli::read_fields(bad), std::runtime_error);
    CHECK_THROWS_AS(cli::read_fields(fs::path("/nonexistent/snap.csv")), std::runtime_error);
}

TEST_CASE("simulate writes a reproducible run directory that verifies")
{
    TempDir tmp;
    const cli::Scenario s = small_isothermal();
    std::ostringstream log;
    const cli::SimulationResult r = cli::simulate(s, tmp.path / "a", log);
    for (const char* f : {"scenario.cfg", "snapshots.csv", "snap_000.csv", "snap_001.csv", "snap_002.csv",
                          "monitor.csv", "residuals.csv", "summary.txt"}) {
        CHECK(fs::exists(tmp.path / "a" / f));
    }
    CHECK(r.trajectory.snapshots.size() == 3);
    CHECK(r.residuals.records().size() == 3 * 3 * 3);

    cli::simulate(s, tmp.path / "b", log);
    for (const auto& entry : fs::directory_iterator(tmp.path / "a")) {
        CAPTURE(entry.path().filename().string());
        CHECK(slurp(entry.path()) == slurp(tmp.path / "b" / entry.path().filename()));
    }

    std::ostringstream report;
    CHECK(cli::verify(tmp.path / "a", report));
    CHECK(report.str().find("FAIL") == std::string::npos);
    CHECK(report.str().find("27 recomputed, 0 differ") != std::string::npos);

    // A perturbed snapshot no longer reproduces the stored residuals.
    {
        FlowState snap = cli::read_fields(tmp.path / "b" / "snap_002.csv");
        snap.rho[3] *= 1.0 + 1e-9;
        cli::dump_fields(snap, tmp.path / "b" / "snap_002.csv");
    }
    std::ostringstream tampered;
    CHECK_FALSE(cli::verify(tmp.path / "b", tampered));
    CHECK(tampered.str().find("FAIL residuals") != std::string::npos);

    const fs::path script = cli::write_plot_script(tmp.path / "a");
    const std::string gp = slurp(script);
    CHECK(gp.find("snap_002.csv") != std::string::npos);
    CHECK(gp.find("multiplot layout 1,2") != std::string::npos);
}

TEST_CASE("sweeps run members in parallel and certify decay")
{
    TempDir tmp;
    cli::Scenario s = small_isothermal();
    s.snapshots.clear();
    std::ostringstream log;
    cli::sweep(s, cli::SweepParam::eps, {two_pi / 64, two_pi / 128, two_pi / 256}, tmp.path, log);
    CHECK(fs::exists(tmp.path / "sweep.csv"));
    CHECK(fs::exists(tmp.path / "eps_2" / "snap_001.csv"));
    std::istringstream cfg(slurp(tmp.path / "eps_2" / "scenario.cfg"));
    CHECK(cli::parse_scenario(cfg).cells == 256);
    std::ostringstream report;
    cli::verify(tmp.path, report);
    CHECK(report.str().find("decay continuity") != std::string::npos);
    CHECK(report.str().find("theoretical floor 0.5") != std::string::npos);

    TempDir tmp2;
    cli::Scenario v = cli::preset("toro-swe-1");
    v.t_final = 0.01;
    v.snapshots.clear();
    cli::sweep(v, cli::SweepParam::delta, {0.0, 0.5}, tmp2.path, log);
    const std::string table = slurp(tmp2.path / "sweep.csv");
    CHECK(table.find("delta,0.5,500") != std::string::npos);
    CHECK(slurp(cli::write_plot_script(tmp2.path)).find("delta_1/snap_001.csv") != std::string::npos);

    CHECK_THROWS_AS(cli::parse_sweep_param("cfl"), std::invalid_argument);
    CHECK_THROWS_AS(cli::sweep(s, cli::SweepParam::eps, {}, tmp.path, log), std::invalid_argument);
}

TEST_CASE("oracle specifications")
{
    const auto o = cli::parse_oracle_spec("shallow:hl=1,ul=0,hr=0,ur=0,g=9.8");
    CHECK(o->sample(0.0).rho == doctest::Approx(4.0 / 9.0));
    const auto iso = cli::parse_oracle_spec("isothermal:rhol=0,ul=0,rhor=1,ur=0,K=0.04");
    CHECK(iso->right_state().rho == 1.0);
    CHECK(cli::parse_oracle_spec("toro-swe-1")->left_state().u == 2.5);
    CHECK_THROWS_AS(cli::parse_oracle_spec("shallow:hl=1,ul=0"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_oracle_spec("euler:rhol=1"), std::invalid_argument);
    CHECK_THROWS_AS(cli::parse_oracle_spec("jeans-1d"), std::invalid_argument);

    std::ostringstream initial;
    cli::write_oracle_samples(*o, 0.0, 4, initial);
    CHECK(initial.str() == "x,rho,u\n-2.3561944901923448,1,0\n-0.78539816339744828,1,0\n"
                           "0.78539816339744828,0,0\n2.3561944901923448,0,0\n");
    std::ostringstream later;
    cli::write_oracle_samples(*o, 0.1, 200, later);
    const std::string text = later.str();
    const auto rows = std::count(text.begin(), text.end(), '\n') - 1;
    CHECK(rows > 0);
    CHECK(rows < 200);
}

TEST_CASE("default output root")
{
    setenv("WEAKFLOW_OUT", "/data/out", 1);
    CHECK(cli::default_output("toro-swe-1") == fs::path("/data/out/toro-swe-1"));
    unsetenv("WEAKFLOW_OUT");
    CHECK(cli::default_output("toro-swe-1") == fs::path("runs/toro-swe-1"));
}
