#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "weakflow/integrate.hpp"

using namespace weakflow;

namespace {

constexpr double machine_eps = std::numeric_limits<double>::epsilon();

FlowState smooth_state(const Torus& t, double amplitude = 0.1)
{
    PeriodicField rho = PeriodicField::sample(t, [&](double x, double) { return 1.0 + amplitude * std::sin(x); });
    PeriodicField mom = PeriodicField::sample(t, [&](double x, double) {
        return (1.0 + amplitude * std::sin(x)) * 0.3 * std::cos(x);
    });
    return FlowState::make(std::move(rho), {std::move(mom)});
}

double max_difference(const FlowState& a, const FlowState& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i) {
        d = std::max(d, std::abs(a.rho[i] - b.rho[i]));
        d = std::max(d, std::abs(a.momentum[0][i] - b.momentum[0][i]));
    }
    return d;
}

FlowState integrate(const FlowState& s, const StateLaw& law, SplitConfig split, double dt, double T, Method m)
{
    Integrator integrator(law, split, s.torus(), s.torus().cell_width());
    FlowState x = s;
    const std::size_t n = step_count(dt, T);
    for (std::size_t k = 0; k < n; ++k) {
        x = integrator.step(x, dt, m, static_cast<double>(k) * dt);
    }
    return x;
}

}  // namespace

TEST_CASE("equilibrium states do not move")
{
    const Torus t(1, 64);
    const double eps = t.cell_width();
    const FlowState rest = FlowState::make(PeriodicField(t, 1.4), {PeriodicField(t, 0.0)});

    const StateLaw swe{Shallow{9.8, {}}, MollifierShape::three_cell(0.1), 0.0, 0.0};
    for (Method m : {Method::euler, Method::rk4}) {
        const FlowState next = step(rest, swe, {0.0}, eps, 1e-3, m);
        CHECK(next.rho == rest.rho);
        CHECK(next.momentum[0] == rest.momentum[0]);
    }

    const StateLaw ise{Isentropic{1.0, 1.4}, MollifierShape::smooth_bump(), 0.1, 0.0};
    const FlowState next = step(rest, ise, {0.0}, eps, 1e-3, Method::rk4);
    CHECK(max_difference(next, rest) <= 1e-15);
}

TEST_CASE("Euler mass increment")
{
    for (int dim : {1, 2}) {
        const Torus t(dim, dim == 1 ? 400 : 32);
        const double eps = t.cell_width();
        const StateLaw law{Isothermal{0.5, 2.0}, MollifierShape::smooth_bump(), 0.1, 0.5};
        AxisFields mom;
        for (int a = 0; a < dim; ++a) {
            mom.push_back(PeriodicField::sample(t, [](double x, double y) { return 0.2 * std::sin(x + 2 * y); }));
        }
        const FlowState s = FlowState::make(
            PeriodicField::sample(t, [](double x, double y) { return 1.0 + 0.3 * std::cos(x - y); }), std::move(mom));
        const double dt = 1e-3;
        const FlowState next = step(s, law, {0.1}, eps, dt, Method::euler);
        CHECK(std::abs((next.mass() - s.mass()) - dt * t.measure() * std::pow(eps, 0.5)) <=
              100.0 * machine_eps * static_cast<double>(t.cells_per_axis()));
    }
}

TEST_CASE("temporal order of Euler and RK4")
{
    const Torus t(1, 64);
    const StateLaw law{Isothermal{1.0, 2.0}, MollifierShape::smooth_bump(), 0.1, 0.5};
    const SplitConfig split{0.5};
    const FlowState s = smooth_state(t);
    const double T = 0.08;

    const auto ratio = [&](Method m) {
        const FlowState a = integrate(s, law, split, 0.004, T, m);
        const FlowState b = integrate(s, law, split, 0.002, T, m);
        const FlowState c = integrate(s, law, split, 0.001, T, m);
        return max_difference(a, b) / max_difference(b, c);
    };
    const double euler = ratio(Method::euler);
    const double rk4 = ratio(Method::rk4);
    CHECK(euler == doctest::Approx(2.0).epsilon(0.15));
    CHECK(rk4 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("step counts")
{
    CHECK(step_count(2e-5, 0.5) == 25000);
    CHECK(step_count(8e-6, 0.5) == 62500);
    CHECK(step_count(0.1, 0.0) == 0);
    CHECK_THROWS_AS(step_count(0.3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(step_count(0.0, 1.0), std::invalid_argument);
    CHECK(parse_method("rk4") == Method::rk4);
    CHECK_THROWS_AS(parse_method("midpoint"), std::invalid_argument);
}

TEST_CASE("runs capture snapshots and monitors")
{
    const Torus t(1, 128);
    const double eps = t.cell_width();
    const StateLaw law{Isothermal{1.0, 2.0}, MollifierShape::smooth_bump(), 0.1, 0.5};
    const FlowState s = smooth_state(t);

    RunConfig zero{1e-3, 0.0, Method::euler, {}, 1};
    const Trajectory empty = run(s, law, {0.0}, eps, zero);
    REQUIRE(empty.snapshots.size() == 1);
    CHECK(empty.snapshots[0].t == 0.0);
    CHECK(empty.snapshots[0].state.rho == s.rho);

    RunConfig cfg{1e-3, 0.1, Method::rk4, {0.05, 0.02, 0.05}, 10};
    const Trajectory a = run(s, law, {0.0}, eps, cfg);
    REQUIRE(a.snapshots.size() == 4);
    CHECK(a.snapshots[1].step == 20);
    CHECK(a.snapshots[2].step == 50);
    CHECK(a.snapshots[3].step == 100);
    CHECK(a.snapshots[3].t == doctest::Approx(0.1));
    CHECK(a.monitor_log.size() == 11);
    for (const auto& r : a.monitor_log) {
        CHECK(std::abs(r.mass_error()) <= 1e-12);
        CHECK(r.min_rho > 0.0);
    }

    const Trajectory b = run(s, law, {0.0}, eps, cfg);
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        CHECK(a.snapshots[k].state.rho == b.snapshots[k].state.rho);
        CHECK(a.snapshots[k].state.momentum[0] == b.snapshots[k].state.momentum[0]);
    }
    for (std::size_t k = 0; k < a.monitor_log.size(); ++k) {
        CHECK(a.monitor_log[k].mass == b.monitor_log[k].mass);
        CHECK(a.monitor_log[k].max_abs_u == b.monitor_log[k].max_abs_u);
    }

    RunConfig outside{1e-3, 0.1, Method::euler, {0.2}, 1};
    CHECK_THROWS_AS(run(s, law, {0.0}, eps, outside), std::invalid_argument);
}

TEST_CASE("constraint handling at run setup")
{
    const Torus t(1, 64);
    const double eps = t.cell_width();
    const StateLaw law{Isothermal{0.04, 2.0}, MollifierShape::three_cell(0.3), 0.0, 10.0};
    const FlowState s = smooth_state(t);
    RunConfig cfg{1e-3, 0.002, Method::euler, {}, 1};
    CHECK_THROWS_AS(run(s, law, {0.0}, eps, cfg, ConstraintMode::strict), ConstraintError);
    const Trajectory tr = run(s, law, {0.0}, eps, cfg, ConstraintMode::relaxed);
    REQUIRE_FALSE(tr.warnings.empty());
    CHECK(tr.warnings.front().find("3α + β < N − 1") == 0);
}

TEST_CASE("inadmissible time steps warn, positivity breaches stop the run")
{
    const Torus t(1, 64);
    const double eps = t.cell_width();
    const StateLaw law{Shallow{1.0, {}}, MollifierShape::three_cell(0.1), 0.0, 0.0};
    PeriodicField rho = PeriodicField::sample(t, [](double x, double) { return x < 0.0 ? 1.0 : 0.01; });
    PeriodicField mom = PeriodicField::sample(t, [](double x, double) { return x < 0.0 ? 1.0 : 0.0; });
    const FlowState s = FlowState::make(rho, {mom});

    RunConfig mild{0.4 * eps, 0.4 * eps * 3, Method::euler, {}, 1};
    const Trajectory tr = run(s, law, {0.0}, eps, mild);
    for (const auto& w : tr.warnings) {
        CHECK_MESSAGE(w.find("not admissible") == std::string::npos, w);
    }

    RunConfig bold{3.0 * eps, 3.0 * eps * 5, Method::euler, {}, 1};
    try {
        run(s, law, {0.0}, eps, bold);
        FAIL("expected a positivity breach");
    } catch (const PositivityError& e) {
        CHECK(e.method() == "euler");
        CHECK(std::isfinite(e.time()));
        CHECK(e.value() <= 0.0);
    }

    RunConfig risky{1.2 * eps, 1.2 * eps, Method::rk4, {}, 1};
    try {
        const Trajectory r = run(s, law, {0.0}, eps, risky);
        bool warned = false;
        for (const auto& w : r.warnings) {
            warned = warned || w.find("not admissible") != std::string::npos;
        }
        CHECK(warned);
    } catch (const PositivityError& e) {
        CHECK(e.method() == "rk4");
    }
}

TEST_CASE("lake at rest drifts no faster than the mollification imbalance")
{
    // Same grid and step as the first dam-break preset; longer horizons see acoustic growth.
    const Torus t(1, 500);
    const double eps = t.cell_width();
    const double g = 9.8;
    const Bottom bottom = Bottom::analytic([](double x, double) { return 0.1 * std::sin(x); },
                                           [](double x, double) { return 0.1 * std::cos(x); });
    const StateLaw law{Shallow{g, bottom}, MollifierShape::three_cell(0.1), 0.0, 0.0};
    const PeriodicField h = PeriodicField::sample(t, [](double x, double) { return 1.0 - 0.1 * std::sin(x); });
    const FlowState s = FlowState::make(h, {PeriodicField(t, 0.0)});

    // Imbalance of the discrete state law at rest: the spurious acceleration.
    PotentialOperator op(law, t, eps);
    const double imbalance = op.gradient(h)[0].max_abs();
    CHECK(imbalance > 0.0);

    const double dt = 1e-4;
    RunConfig cfg{dt, 1000 * dt, Method::euler, {}, 100};
    const Trajectory tr = run(s, law, {0.0}, eps, cfg);
    const double drift = tr.monitor_log.back().max_abs_u;
    CHECK(drift <= imbalance * cfg.t_final);
}
