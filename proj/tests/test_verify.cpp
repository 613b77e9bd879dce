#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "support/reference.hpp"
#include "weakflow/integrate.hpp"
#include "weakflow/verify.hpp"

using namespace weakflow;

namespace {

PeriodicField sample_oracle(const Torus& t, const RiemannOracle& o, double time, OracleField which)
{
    return PeriodicField::sample(t, [&](double x, double) {
        const RiemannSample s = o.sample(x / time);
        return which == OracleField::density ? s.rho : s.u;
    });
}

void check_rankine_hugoniot(const RiemannOracle& o)
{
    for (const auto& s : o.shocks()) {
        const auto [fl0, fl1] = o.flux(s.left);
        const auto [fr0, fr1] = o.flux(s.right);
        const double mass_jump = s.speed * (s.right.rho - s.left.rho) - (fr0 - fl0);
        const double mom_jump = s.speed * (s.right.rho * s.right.u - s.left.rho * s.left.u) - (fr1 - fl1);
        const double scale0 = std::max({std::abs(fl0), std::abs(fr0), std::abs(s.speed * s.left.rho), 1e-300});
        const double scale1 = std::max({std::abs(fl1), std::abs(fr1), 1e-300});
        CHECK(std::abs(mass_jump) <= 1e-10 * scale0);
        CHECK(std::abs(mom_jump) <= 1e-10 * scale1);
    }
}

double l1_against_reference(const reference::RusanovResult& ref, const RiemannOracle& o, double t, bool density)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < ref.x.size(); ++i) {
        const RiemannSample s = o.sample(ref.x[i] / t);
        sum += std::abs((density ? ref.rho[i] : ref.u[i]) - (density ? s.rho : s.u));
    }
    return sum / static_cast<double>(ref.x.size());
}

}  // namespace

TEST_CASE("test functions")
{
    const Torus t(1, 512);
    for (const TestFunction& psi : {TestFunction::bump(0.5, 0.3), TestFunction::trig(3), TestFunction::bump(-2.0, 1.0)}) {
        CAPTURE(psi.id());
        CHECK(psi.derivatives(t)[0].integral() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        for (double x : {-3.0, -0.4, 0.5, 2.2}) {
            const double fd = (psi.value(x + 1e-6) - psi.value(x - 1e-6)) / 2e-6;
            CHECK(psi.derivative(0, x) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        }
        CHECK(psi.values(t)[0] == psi.value(t.center(0)));
    }
    CHECK(TestFunction::trig(1).id() == "cos:k=1");
    CHECK(TestFunction::bump(0.5, 0.3).id() == "bump:c=0.5:w=0.3");
    // Integral of exp((cos x - 1)/w^2) over a period is 2 pi exp(-1/w^2) I0(1/w^2).
    const double w = 0.7;
    const double exact = two_pi * std::exp(-1.0 / (w * w)) * std::cyl_bessel_i(0.0, 1.0 / (w * w));
    CHECK(TestFunction::bump(1.0, w).values(t).integral() == doctest::Approx(exact).epsilon(1e-13));
    CHECK_THROWS_AS(TestFunction::bump(0.0, 0.0), std::invalid_argument);

    const Torus t2(2, 64);
    const TestFunction psi2 = TestFunction::trig(1, 2);
    CHECK(psi2.derivative(1, 0.3, 0.4) == doctest::Approx(-2.0 * std::sin(0.3 + 0.8)));
    CHECK(psi2.derivatives(t2)[1].integral() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("weak residuals of equilibria and uniform states")
{
    const Torus t(1, 256);
    const double eps = t.cell_width();
    const FlowState rest = FlowState::make(PeriodicField(t, 2.0), {PeriodicField(t, 0.0)});
    const TestFunction psi = TestFunction::bump(0.3, 0.5);

    const StateLaw swe{Shallow{9.8, {}}, MollifierShape::three_cell(0.2), 0.0, 0.0};
    Integrator a(swe, {0.0}, t, eps);
    const WeakResiduals ra = weak_residual(rest, a.rates(rest), a.potential(), psi);
    CHECK(ra.continuity == 0.0);
    CHECK(ra.momentum[0] == 0.0);
    CHECK(std::abs(ra.state_law) <= 1e-13);

    // A uniform isothermal state only sees the density source eps^beta.
    const double beta = 0.5;
    const StateLaw iso{Isothermal{1.0, 2.0}, MollifierShape::smooth_bump(), 0.1, beta};
    Integrator b(iso, {0.0}, t, eps);
    const WeakResiduals rb = weak_residual(rest, b.rates(rest), b.potential(), psi);
    const double w = 0.5;
    const double psi_integral = two_pi * std::exp(-1.0 / (w * w)) * std::cyl_bessel_i(0.0, 1.0 / (w * w));
    CHECK(rb.continuity == doctest::Approx(std::pow(eps, beta) * psi_integral).epsilon(1e-12));
    CHECK(std::abs(rb.momentum[0]) <= 1e-12);
}

TEST_CASE("residual reports round-trip through CSV")
{
    ResidualReport r;
    r.add(0.1, 0.5, "cos:k=1", WeakResiduals{1.0 / 3.0, {-2.5e-17}, 7.0});
    r.add(0.05, 0.5, "cos:k=1", WeakResiduals{std::nextafter(0.2, 1.0), {1e300}, -0.0});
    std::stringstream io;
    r.write_csv(io);
    CHECK(io.str().rfind("eps,t,psi_id,equation,value\n", 0) == 0);
    const ResidualReport back = ResidualReport::read_csv(io);
    CHECK(back == r);
    CHECK(back.records().size() == 6);

    CHECK_THROWS_AS(r.add(ResidualRecord{0.1, 0.5, "cos:k=1", "continuity", 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(r.add(ResidualRecord{0.1, 0.5, "a,b", "continuity", 1.0}), std::invalid_argument);
    std::stringstream bad("eps,t,psi\n");
    CHECK_THROWS_AS(ResidualReport::read_csv(bad), std::runtime_error);
}

TEST_CASE("decay certification")
{
    const auto synthetic = [](auto value) {
        ResidualReport r;
        for (double e : {0.1, 0.05, 0.025, 0.0125}) {
            r.add(ResidualRecord{e, 1.0, "cos:k=1", "continuity", value(e)});
        }
        return r;
    };
    const auto linear = certify_decay(synthetic([](double e) { return e; }), 0.4);
    REQUIRE(linear.size() == 1);
    CHECK(linear[0].slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(linear[0].pass);
    CHECK(linear[0].theoretical_floor == 0.4);

    const auto flat = certify_decay(synthetic([](double) { return 3.0; }));
    CHECK(flat[0].slope == doctest::Approx(0.0).scale(1.0));
    CHECK_FALSE(flat[0].pass);

    const auto zero = certify_decay(synthetic([](double) { return 0.0; }));
    CHECK(zero[0].pass);

    ResidualReport two;
    two.add(ResidualRecord{0.1, 1.0, "cos:k=1", "continuity", 1.0});
    two.add(ResidualRecord{0.05, 1.0, "cos:k=1", "continuity", 0.5});
    CHECK_THROWS_AS(certify_decay(two), std::invalid_argument);
}

TEST_CASE("shallow-water oracle examples")
{
    const double g = 9.8;
    const ShallowRiemann same(1.3, 0.4, 1.3, 0.4, g);
    for (double xi : {-10.0, 0.0, 3.0}) {
        CHECK(same.sample(xi).rho == doctest::Approx(1.3));
        CHECK(same.sample(xi).u == doctest::Approx(0.4));
    }

    const ShallowRiemann dam(1.0, 0.0, 0.0, 0.0, g);
    const double front = 2.0 * std::sqrt(g);
    CHECK(dam.has_dry_region());
    CHECK(dam.sample(front * 0.999).rho > 0.0);
    CHECK(dam.sample(front * 1.001).rho == 0.0);
    CHECK(dam.sample(front * 1.001).u == 0.0);
    CHECK(dam.extent(1e-6).second == doctest::Approx(front));
    CHECK(dam.extent(1e-6).first == doctest::Approx(-std::sqrt(g)));
    // Ritter solution inside the fan.
    const double xi = 0.5;
    const double c = (2.0 * std::sqrt(g) - xi) / 3.0;
    CHECK(dam.sample(xi).rho == doctest::Approx(c * c / g).epsilon(1e-12));
    CHECK(dam.sample(xi).u == doctest::Approx(2.0 * (xi + std::sqrt(g)) / 3.0).epsilon(1e-12));

    const ShallowRiemann spread(1.0, -1.0, 1.0, 1.0, g);
    CHECK(spread.sample(0.0).u == doctest::Approx(0.0).scale(1.0));
    for (double x : {0.3, 1.1, 2.5, 5.0}) {
        CHECK(spread.sample(x).rho == doctest::Approx(spread.sample(-x).rho).epsilon(1e-12));
        CHECK(spread.sample(x).u == doctest::Approx(-spread.sample(-x).u).epsilon(1e-12).scale(1.0));
    }
    const ShallowRiemann apart(1.0, -10.0, 1.0, 10.0, g);
    CHECK(apart.has_dry_region());
    CHECK(apart.sample(0.0).rho == 0.0);

    // Toro test 1: left rarefaction, right shock.
    const ShallowRiemann toro1(1.0, 2.5, 0.1, 0.0, g);
    CHECK_FALSE(toro1.has_dry_region());
    CHECK(toro1.shocks().size() == 1);
    check_rankine_hugoniot(toro1);
    const ShallowRiemann shocks(1.0, 3.0, 1.0, -3.0, g);
    CHECK(shocks.shocks().size() == 2);
    check_rankine_hugoniot(shocks);
    CHECK(shocks.sample(0.0).u == doctest::Approx(0.0).scale(1.0));

    CHECK_THROWS_AS(ShallowRiemann(0.0, 0.0, 0.0, 0.0, g), std::invalid_argument);
    CHECK_THROWS_AS(ShallowRiemann(-1.0, 0.0, 1.0, 0.0, g), std::invalid_argument);
}

TEST_CASE("oracles are reflection symmetric")
{
    const ShallowRiemann a(1.0, 2.5, 0.1, 0.0, 9.8);
    const ShallowRiemann b(0.1, 0.0, 1.0, -2.5, 9.8);
    const IsothermalRiemann c(2.0, 0.5, 0.3, -1.0, 0.7);
    const IsothermalRiemann d(0.3, 1.0, 2.0, -0.5, 0.7);
    for (double xi : {-4.0, -1.3, -0.2, 0.0, 0.6, 2.9}) {
        CHECK(a.sample(xi).rho == doctest::Approx(b.sample(-xi).rho).epsilon(1e-10));
        CHECK(a.sample(xi).u == doctest::Approx(-b.sample(-xi).u).epsilon(1e-10).scale(1.0));
        CHECK(c.sample(xi).rho == doctest::Approx(d.sample(-xi).rho).epsilon(1e-10));
        CHECK(c.sample(xi).u == doctest::Approx(-d.sample(-xi).u).epsilon(1e-10).scale(1.0));
    }
    const auto s = a.swapped();
    CHECK(s->left_state().rho == 0.1);
    CHECK(s->right_state().rho == 1.0);
}

TEST_CASE("isothermal oracle examples")
{
    const double K = 0.04;
    const double c = std::sqrt(K);

    const IsothermalRiemann same(0.7, -0.2, 0.7, -0.2, K);
    CHECK(same.sample(0.1).rho == doctest::Approx(0.7));

    // Vacuum on the left: a right-family fan with exponential tail, u = xi - c.
    const IsothermalRiemann vac(0.0, 0.0, 1.0, 0.0, K);
    CHECK(vac.sample(c * 1.001).rho == doctest::Approx(1.0));
    const double xi = -0.3;
    CHECK(vac.sample(xi).rho == doctest::Approx(std::exp((xi - c) / c)).epsilon(1e-10));
    CHECK(vac.sample(xi).u == doctest::Approx(xi - c).epsilon(1e-10));
    const double tol = 1e-6;
    CHECK(vac.extent(tol).first == doctest::Approx(c + c * std::log(tol)).epsilon(1e-9));
    CHECK(vac.extent(tol).second == doctest::Approx(c));
    CHECK_THROWS_AS(vac.extent(0.0), std::invalid_argument);

    const IsothermalRiemann collide(1.0, 1.0, 1.0, -1.0, K);
    CHECK(collide.shocks().size() == 2);
    CHECK(collide.star_velocity() == doctest::Approx(0.0).scale(1.0));
    // Isothermal shock relation u_L - u* = c (rho* - rho_L) / sqrt(rho* rho_L).
    const double rs = collide.star_density();
    CHECK(1.0 == doctest::Approx(c * (rs - 1.0) / std::sqrt(rs)).epsilon(1e-10));
    check_rankine_hugoniot(collide);
    check_rankine_hugoniot(IsothermalRiemann(3.0, 0.0, 1.0, 0.0, K));
    check_rankine_hugoniot(IsothermalRiemann(0.2, 0.5, 1.5, -0.1, 2.0));

    CHECK_THROWS_AS(IsothermalRiemann(0.0, 0.0, 0.0, 0.0, K), std::invalid_argument);
    CHECK_THROWS_AS(IsothermalRiemann(1.0, 0.0, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("oracles agree with a fine-grid Rusanov reference")
{
    const std::size_t cells = 20000;
    {
        const double t = 0.4;
        const ShallowRiemann o(1.0, 2.5, 0.1, 0.0, 9.8);
        const auto coarse = reference::rusanov_riemann(reference::System::shallow, 1.0, 2.5, 0.1, 0.0, 9.8,
                                                       std::numbers::pi, cells / 4, t);
        const auto fine = reference::rusanov_riemann(reference::System::shallow, 1.0, 2.5, 0.1, 0.0, 9.8,
                                                     std::numbers::pi, cells, t);
        const double ec = l1_against_reference(coarse, o, t, true);
        const double ef = l1_against_reference(fine, o, t, true);
        CHECK(ef < ec);
        CHECK(ef < 2e-3);
        CHECK(l1_against_reference(fine, o, t, false) < 5e-3);
    }
    {
        const double t = 0.5;
        const IsothermalRiemann o(2.0, 0.5, 0.5, -0.3, 0.5);
        const auto coarse = reference::rusanov_riemann(reference::System::isothermal, 2.0, 0.5, 0.5, -0.3, 0.5,
                                                       std::numbers::pi, cells / 4, t);
        const auto fine = reference::rusanov_riemann(reference::System::isothermal, 2.0, 0.5, 0.5, -0.3, 0.5,
                                                     std::numbers::pi, cells, t);
        const double ec = l1_against_reference(coarse, o, t, true);
        const double ef = l1_against_reference(fine, o, t, true);
        CHECK(ef < ec);
        CHECK(ef < 2e-3);
        CHECK(l1_against_reference(fine, o, t, false) < 2e-3);
    }
}

TEST_CASE("oracle comparison window and norms")
{
    const Torus torus(1, 1000);
    const ShallowRiemann o(1.0, 2.5, 0.1, 0.0, 9.8);
    const double t = 0.4;
    const OracleWindow w = oracle_window(o, t);
    CHECK(w.lo < 0.0);
    CHECK(w.hi > 0.0);
    CHECK(w.hi - w.lo < two_pi);

    const PeriodicField exact = sample_oracle(torus, o, t, OracleField::density);
    const OracleError e = compare_to_oracle(exact, t, o, 0.0, OracleField::density);
    CHECK(e.l1 == 0.0);
    CHECK(e.linf_away == 0.0);
    CHECK(e.cells > 0);
    CHECK(e.cells < torus.size());

    PeriodicField off = exact;
    for (std::size_t i = 0; i < off.size(); ++i) {
        off[i] += 0.01;
    }
    const OracleError f = compare_to_oracle(off, t, o, 0.0, OracleField::density);
    CHECK(f.l1 == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(f.linf_away == doctest::Approx(0.01).epsilon(1e-9));

    CHECK_THROWS_AS(oracle_window(o, 2.0), std::domain_error);
    CHECK_THROWS_AS(oracle_window(o, 0.0), std::invalid_argument);

    const PeriodicField ramp = PeriodicField::sample(torus, [](double x, double) { return x; });
    CHECK(level_crossing(ramp, 0.5, -1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::isnan(level_crossing(ramp, 5.0, -1.0, 1.0)));
    CHECK(front_width(ramp, 1.0, -1.0, 1.0) == doctest::Approx(0.8).epsilon(1e-12));
}
