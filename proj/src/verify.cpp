#include "weakflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace weakflow {

namespace {

std::string short_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string full_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Neumaier-compensated running sum.
class Accumulator {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        carry_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

const char* axis_equation(std::size_t axis) { return axis == 0 ? "momentum_x" : "momentum_y"; }

/// Smallest root of an increasing function on (lo, hi) by bisection to
/// machine resolution.
template <class F>
double bisect(F&& f, double lo, double hi)
{
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------- test functions

TestFunction TestFunction::bump(double cx, double width, double cy)
{
    if (!(width > 0.0) || !std::isfinite(width) || !std::isfinite(cx) || !std::isfinite(cy)) {
        throw std::invalid_argument("bump test function needs a positive width and finite center");
    }
    TestFunction psi;
    psi.kind_ = Kind::bump;
    psi.cx_ = cx;
    psi.cy_ = cy;
    psi.width_ = width;
    psi.id_ = "bump:c=" + short_number(cx) + (cy != 0.0 ? ":cy=" + short_number(cy) : "") +
              ":w=" + short_number(width);
    return psi;
}

TestFunction TestFunction::trig(int kx, int ky)
{
    TestFunction psi;
    psi.kind_ = Kind::trig;
    psi.kx_ = kx;
    psi.ky_ = ky;
    psi.id_ = "cos:k=" + std::to_string(kx) + (ky != 0 ? ":l=" + std::to_string(ky) : "");
    return psi;
}

double TestFunction::value(double x, double y) const
{
    if (kind_ == Kind::trig) {
        return std::cos(kx_ * x + ky_ * y);
    }
    const double w2 = width_ * width_;
    return std::exp((std::cos(x - cx_) - 1.0) / w2 + (std::cos(y - cy_) - 1.0) / w2);
}

double TestFunction::derivative(int axis, double x, double y) const
{
    if (kind_ == Kind::trig) {
        const double k = axis == 0 ? kx_ : ky_;
        return -k * std::sin(kx_ * x + ky_ * y);
    }
    const double w2 = width_ * width_;
    const double s = axis == 0 ? std::sin(x - cx_) : std::sin(y - cy_);
    return -s / w2 * value(x, y);
}

PeriodicField TestFunction::values(const Torus& torus) const
{
    return PeriodicField::sample(torus, [this](double x, double y) { return value(x, y); });
}

AxisFields TestFunction::derivatives(const Torus& torus) const
{
    AxisFields out;
    for (int axis = 0; axis < torus.dim(); ++axis) {
        out.push_back(PeriodicField::sample(torus, [this, axis](double x, double y) { return derivative(axis, x, y); }));
    }
    return out;
}

// ---------------------------------------------------------------- weak residuals

WeakResiduals weak_residual(const FlowState& state, const FlowRates& rates, PotentialOperator& potential,
                            const TestFunction& psi)
{
    const Torus& torus = state.torus();
    require_same_torus(state.rho, rates.rho, "weak_residual");
    if (!(potential.mollifier().torus() == torus)) {
        throw std::invalid_argument("weak_residual: state law set up on a different torus");
    }
    const std::size_t dim = static_cast<std::size_t>(torus.dim());
    const PeriodicField p = psi.values(torus);
    const AxisFields dp = psi.derivatives(torus);
    const AxisFields u = recover_velocity(state);
    const AxisFields grad_phi = potential.gradient(state.rho);
    const PeriodicField phi = potential.potential(state.rho);
    const PeriodicField phi_exact = potential.exact_potential(state.rho);
    const double vol = torus.cell_volume();

    WeakResiduals r;
    Accumulator cont;
    Accumulator law;
    std::vector<Accumulator> mom(dim);
    for (std::size_t i = 0; i < state.rho.size(); ++i) {
        double c = rates.rho[i] * p[i];
        for (std::size_t a = 0; a < dim; ++a) {
            c -= state.momentum[a][i] * dp[a][i];
        }
        cont.add(c);
        for (std::size_t k = 0; k < dim; ++k) {
            double m = rates.momentum[k][i] * p[i] + state.rho[i] * grad_phi[k][i] * p[i];
            for (std::size_t a = 0; a < dim; ++a) {
                m -= state.momentum[k][i] * u[a][i] * dp[a][i];
            }
            mom[k].add(m);
        }
        law.add((phi[i] - phi_exact[i]) * p[i]);
    }
    r.continuity = cont.value() * vol;
    for (auto& m : mom) {
        r.momentum.push_back(m.value() * vol);
    }
    r.state_law = law.value() * vol;
    return r;
}

void ResidualReport::add(double eps, double t, const std::string& psi_id, const WeakResiduals& r)
{
    add({eps, t, psi_id, "continuity", r.continuity});
    for (std::size_t k = 0; k < r.momentum.size(); ++k) {
        add({eps, t, psi_id, axis_equation(k), r.momentum[k]});
    }
    add({eps, t, psi_id, "state_law", r.state_law});
}

void ResidualReport::add(ResidualRecord record)
{
    if (!std::isfinite(record.value)) {
        throw std::domain_error("residual report: non-finite value for " + record.equation + " / " + record.psi_id);
    }
    if (record.psi_id.find(',') != std::string::npos || record.equation.find(',') != std::string::npos) {
        throw std::invalid_argument("residual report: identifiers must not contain commas");
    }
    for (const auto& r : records_) {
        if (r.eps == record.eps && r.t == record.t && r.psi_id == record.psi_id && r.equation == record.equation) {
            throw std::invalid_argument("residual report: duplicate record for " + record.equation + " / " +
                                        record.psi_id);
        }
    }
    records_.push_back(std::move(record));
}

void ResidualReport::append(const ResidualReport& other)
{
    for (const auto& r : other.records_) {
        add(r);
    }
}

void ResidualReport::write_csv(std::ostream& out) const
{
    out << header << '\n';
    for (const auto& r : records_) {
        out << full_number(r.eps) << ',' << full_number(r.t) << ',' << r.psi_id << ',' << r.equation << ','
            << full_number(r.value) << '\n';
    }
}

ResidualReport ResidualReport::read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw std::runtime_error(std::string("residual report: expected header '") + header + "'");
    }
    ResidualReport report;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) {
            cols.push_back(col);
        }
        if (cols.size() != 5) {
            throw std::runtime_error("residual report line " + std::to_string(lineno) + ": expected 5 columns");
        }
        try {
            report.add({std::stod(cols[0]), std::stod(cols[1]), cols[2], cols[3], std::stod(cols[4])});
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("residual report line " + std::to_string(lineno) + ": malformed record");
        }
    }
    return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("loglog_slope needs at least two matching points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        num += dx * (std::log(y[i]) - my);
        den += dx * dx;
    }
    if (den == 0.0) {
        throw std::invalid_argument("loglog_slope needs distinct abscissae");
    }
    return num / den;
}

std::vector<DecayVerdict> certify_decay(const ResidualReport& report, std::optional<double> theoretical_floor)
{
    struct Group {
        std::string equation;
        std::string psi_id;
        double t;
        std::map<double, double> by_eps;
    };
    std::vector<Group> groups;
    for (const auto& r : report.records()) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.equation == r.equation && g.psi_id == r.psi_id && g.t == r.t;
        });
        if (it == groups.end()) {
            groups.push_back({r.equation, r.psi_id, r.t, {}});
            it = std::prev(groups.end());
        }
        it->by_eps[r.eps] = std::abs(r.value);
    }

    std::vector<DecayVerdict> out;
    for (const auto& g : groups) {
        if (g.by_eps.size() < 3) {
            throw std::invalid_argument("certify_decay: " + g.equation + " / " + g.psi_id + " at t = " +
                                        short_number(g.t) + " has fewer than 3 eps values");
        }
        std::vector<double> eps;
        std::vector<double> val;
        bool all_zero = true;
        for (const auto& [e, v] : g.by_eps) {
            eps.push_back(e);
            val.push_back(std::max(v, std::numeric_limits<double>::min()));
            all_zero = all_zero && v == 0.0;
        }
        DecayVerdict v{g.equation, g.psi_id, g.t, g.by_eps.size(), 0.0, theoretical_floor, false};
        if (all_zero) {
            v.slope = std::numeric_limits<double>::infinity();
        } else {
            v.slope = loglog_slope(eps, val);
        }
        v.pass = v.slope > 0.0;
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------- shallow water oracle

namespace {

/// Depth function of a shallow-water wave joining state (hK, aK) to depth h.
double swe_wave(double h, double hK, double aK, double g)
{
    if (h <= hK) {
        return 2.0 * (std::sqrt(g * h) - aK);
    }
    return (h - hK) * std::sqrt(0.5 * g * (h + hK) / (h * hK));
}

}  // namespace

ShallowRiemann::ShallowRiemann(double h_left, double u_left, double h_right, double u_right, double g) : g_(g)
{
    for (double v : {h_left, u_left, h_right, u_right, g}) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("shallow-water Riemann data must be finite");
        }
    }
    if (h_left < 0.0 || h_right < 0.0) {
        throw std::invalid_argument("shallow-water depths must be nonnegative");
    }
    if (h_left == 0.0 && h_right == 0.0) {
        throw std::invalid_argument("shallow-water Riemann problem with both states dry");
    }
    if (!(g > 0.0)) {
        throw std::invalid_argument("gravity g must be positive");
    }
    left_ = {h_left, u_left};
    right_ = {h_right, u_right};
    const double aL = std::sqrt(g * h_left);
    const double aR = std::sqrt(g * h_right);

    if (h_left == 0.0) {
        pattern_ = Pattern::dry_left;
        return;
    }
    if (h_right == 0.0) {
        pattern_ = Pattern::dry_right;
        return;
    }
    if (2.0 * (aL + aR) <= u_right - u_left) {
        pattern_ = Pattern::dry_middle;
        return;
    }
    const auto F = [&](double h) {
        return swe_wave(h, h_left, aL, g) + swe_wave(h, h_right, aR, g) + u_right - u_left;
    };
    double hi = std::max(h_left, h_right);
    while (F(hi) < 0.0) {
        hi *= 2.0;
    }
    h_star_ = bisect(F, 0.0, hi);
    u_star_ = 0.5 * (u_left + u_right) +
              0.5 * (swe_wave(h_star_, h_right, aR, g) - swe_wave(h_star_, h_left, aL, g));
}

RiemannSample ShallowRiemann::sample(double xi) const
{
    const double g = g_;
    const auto [hL, uL] = left_;
    const auto [hR, uR] = right_;
    const double aL = std::sqrt(g * hL);
    const double aR = std::sqrt(g * hR);
    const auto left_fan = [&](double x) {
        const double a = (uL + 2.0 * aL - x) / 3.0;
        return RiemannSample{a * a / g, (uL + 2.0 * aL + 2.0 * x) / 3.0};
    };
    const auto right_fan = [&](double x) {
        const double a = (-uR + 2.0 * aR + x) / 3.0;
        return RiemannSample{a * a / g, (uR - 2.0 * aR + 2.0 * x) / 3.0};
    };
    const RiemannSample dry{0.0, 0.0};

    switch (pattern_) {
    case Pattern::dry_right:
        if (xi <= uL - aL) return left_;
        if (xi < uL + 2.0 * aL) return left_fan(xi);
        return dry;
    case Pattern::dry_left:
        if (xi >= uR + aR) return right_;
        if (xi > uR - 2.0 * aR) return right_fan(xi);
        return dry;
    case Pattern::dry_middle:
        if (xi <= uL - aL) return left_;
        if (xi < uL + 2.0 * aL) return left_fan(xi);
        if (xi >= uR + aR) return right_;
        if (xi > uR - 2.0 * aR) return right_fan(xi);
        return dry;
    case Pattern::wet:
        break;
    }

    const RiemannSample star{h_star_, u_star_};
    const double a_star = std::sqrt(g * h_star_);
    if (xi <= u_star_) {
        if (h_star_ > hL) {
            const double s = uL - aL * std::sqrt(0.5 * (h_star_ + hL) * h_star_ / (hL * hL));
            return xi < s ? left_ : star;
        }
        if (xi <= uL - aL) return left_;
        if (xi >= u_star_ - a_star) return star;
        return left_fan(xi);
    }
    if (h_star_ > hR) {
        const double s = uR + aR * std::sqrt(0.5 * (h_star_ + hR) * h_star_ / (hR * hR));
        return xi > s ? right_ : star;
    }
    if (xi >= uR + aR) return right_;
    if (xi <= u_star_ + a_star) return star;
    return right_fan(xi);
}

std::pair<double, double> ShallowRiemann::extent(double) const
{
    const auto [hL, uL] = left_;
    const auto [hR, uR] = right_;
    const double aL = std::sqrt(g_ * hL);
    const double aR = std::sqrt(g_ * hR);
    switch (pattern_) {
    case Pattern::dry_right:
        return {uL - aL, uL + 2.0 * aL};
    case Pattern::dry_left:
        return {uR - 2.0 * aR, uR + aR};
    case Pattern::dry_middle:
        return {uL - aL, uR + aR};
    case Pattern::wet:
        break;
    }
    const double lo =
        h_star_ > hL ? uL - aL * std::sqrt(0.5 * (h_star_ + hL) * h_star_ / (hL * hL)) : uL - aL;
    const double hi =
        h_star_ > hR ? uR + aR * std::sqrt(0.5 * (h_star_ + hR) * h_star_ / (hR * hR)) : uR + aR;
    return {lo, hi};
}

std::vector<ShockWave> ShallowRiemann::shocks() const
{
    std::vector<ShockWave> out;
    if (pattern_ != Pattern::wet) {
        return out;
    }
    const RiemannSample star{h_star_, u_star_};
    const auto [lo, hi] = extent(0.0);
    if (h_star_ > left_.rho) {
        out.push_back({lo, left_, star});
    }
    if (h_star_ > right_.rho) {
        out.push_back({hi, star, right_});
    }
    return out;
}

std::pair<double, double> ShallowRiemann::flux(const RiemannSample& s) const
{
    return {s.rho * s.u, s.rho * s.u * s.u + 0.5 * g_ * s.rho * s.rho};
}

std::unique_ptr<RiemannOracle> ShallowRiemann::swapped() const
{
    return std::make_unique<ShallowRiemann>(right_.rho, right_.u, left_.rho, left_.u, g_);
}

// ---------------------------------------------------------------- isothermal oracle

namespace {

double iso_wave(double rho, double rhoK, double c)
{
    if (rho <= rhoK) {
        return c * std::log(rho / rhoK);
    }
    return c * (rho - rhoK) / std::sqrt(rho * rhoK);
}

}  // namespace

IsothermalRiemann::IsothermalRiemann(double rho_left, double u_left, double rho_right, double u_right, double K)
    : K_(K), c_(std::sqrt(K))
{
    for (double v : {rho_left, u_left, rho_right, u_right, K}) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("isothermal Riemann data must be finite");
        }
    }
    if (rho_left < 0.0 || rho_right < 0.0) {
        throw std::invalid_argument("isothermal densities must be nonnegative");
    }
    if (rho_left == 0.0 && rho_right == 0.0) {
        throw std::invalid_argument("isothermal Riemann problem with both states vacuum");
    }
    if (!(K > 0.0)) {
        throw std::invalid_argument("isothermal K must be positive");
    }
    left_ = {rho_left, u_left};
    right_ = {rho_right, u_right};
    if (rho_left == 0.0 || rho_right == 0.0) {
        return;
    }
    // The log-density rarefaction curve never reaches vacuum, so a star state always exists.
    const auto F = [&](double s) {
        const double rho = std::exp(s);
        return iso_wave(rho, rho_left, c_) + iso_wave(rho, rho_right, c_) + u_right - u_left;
    };
    double lo = std::log(std::min(rho_left, rho_right)) - 1.0;
    double hi = std::log(std::max(rho_left, rho_right)) + 1.0;
    while (F(lo) > 0.0) lo -= 2.0 * (hi - lo);
    while (F(hi) < 0.0) hi += 2.0 * (hi - lo);
    rho_star_ = std::exp(bisect(F, lo, hi));
    u_star_ = 0.5 * (u_left + u_right) + 0.5 * (iso_wave(rho_star_, rho_right, c_) - iso_wave(rho_star_, rho_left, c_));
}

RiemannSample IsothermalRiemann::sample(double xi) const
{
    const double c = c_;
    const auto [rL, uL] = left_;
    const auto [rR, uR] = right_;
    // 1-fan: u = xi + c, rho = rhoL exp(-(u - uL)/c); 2-fan: u = xi - c, rho = rhoR exp((u - uR)/c).
    const auto left_fan = [&](double x) { return RiemannSample{rL * std::exp(-(x + c - uL) / c), x + c}; };
    const auto right_fan = [&](double x) { return RiemannSample{rR * std::exp((x - c - uR) / c), x - c}; };

    if (rL == 0.0) {
        return xi >= uR + c ? right_ : right_fan(xi);
    }
    if (rR == 0.0) {
        return xi <= uL - c ? left_ : left_fan(xi);
    }
    const RiemannSample star{rho_star_, u_star_};
    if (xi <= u_star_) {
        if (rho_star_ > rL) {
            const double s = uL - c * std::sqrt(rho_star_ / rL);
            return xi < s ? left_ : star;
        }
        if (xi <= uL - c) return left_;
        if (xi >= u_star_ - c) return star;
        return left_fan(xi);
    }
    if (rho_star_ > rR) {
        const double s = uR + c * std::sqrt(rho_star_ / rR);
        return xi > s ? right_ : star;
    }
    if (xi >= uR + c) return right_;
    if (xi <= u_star_ + c) return star;
    return right_fan(xi);
}

std::pair<double, double> IsothermalRiemann::extent(double tol) const
{
    const double c = c_;
    const auto [rL, uL] = left_;
    const auto [rR, uR] = right_;
    if (rL == 0.0 || rR == 0.0) {
        if (!(tol > 0.0 && tol < 1.0)) {
            throw std::invalid_argument("vacuum fan cut-off tolerance must lie in (0, 1)");
        }
        if (rL == 0.0) {
            return {uR + c + c * std::log(tol), uR + c};
        }
        return {uL - c, uL - c - c * std::log(tol)};
    }
    const double lo = rho_star_ > rL ? uL - c * std::sqrt(rho_star_ / rL) : uL - c;
    const double hi = rho_star_ > rR ? uR + c * std::sqrt(rho_star_ / rR) : uR + c;
    return {lo, hi};
}

std::vector<ShockWave> IsothermalRiemann::shocks() const
{
    std::vector<ShockWave> out;
    if (left_.rho == 0.0 || right_.rho == 0.0) {
        return out;
    }
    const RiemannSample star{rho_star_, u_star_};
    const auto [lo, hi] = extent(0.5);
    if (rho_star_ > left_.rho) {
        out.push_back({lo, left_, star});
    }
    if (rho_star_ > right_.rho) {
        out.push_back({hi, star, right_});
    }
    return out;
}

std::pair<double, double> IsothermalRiemann::flux(const RiemannSample& s) const
{
    return {s.rho * s.u, s.rho * s.u * s.u + K_ * s.rho};
}

std::unique_ptr<RiemannOracle> IsothermalRiemann::swapped() const
{
    return std::make_unique<IsothermalRiemann>(right_.rho, right_.u, left_.rho, left_.u, K_);
}

// ---------------------------------------------------------------- comparison

OracleWindow oracle_window(const RiemannOracle& oracle, double t, double tol)
{
    if (!(t > 0.0)) {
        throw std::invalid_argument("oracle comparison needs t > 0");
    }
    const auto [a, b] = oracle.extent(tol);
    const auto [a2, b2] = oracle.swapped()->extent(tol);
    const double pi = std::numbers::pi;
    const double right_gap = pi + (a2 - b) * t;
    const double left_gap = pi + (a - b2) * t;
    if (!(right_gap > 0.0 && left_gap > 0.0)) {
        std::ostringstream msg;
        msg << "oracle window invalid at t = " << t << ": waves have reached the periodic boundary";
        throw std::domain_error(msg.str());
    }
    return {0.5 * (-pi + (a + b2) * t), 0.5 * (pi + (b + a2) * t)};
}

OracleError compare_to_oracle(const PeriodicField& field, double t, const RiemannOracle& oracle, double x0,
                              OracleField which, double tol)
{
    const Torus& torus = field.torus();
    if (torus.dim() != 1) {
        throw std::invalid_argument("oracle comparison is one-dimensional");
    }
    const OracleWindow w = oracle_window(oracle, t, tol);
    const double h = torus.cell_width();
    std::vector<double> fronts;
    for (const auto& s : oracle.shocks()) {
        fronts.push_back(s.speed * t);
    }

    OracleError err{0.0, 0.0, w, 0};
    Accumulator l1;
    for (std::size_t i = 0; i < field.size(); ++i) {
        double d = std::remainder(torus.center(i) - x0 - w.lo, two_pi);
        if (d < 0.0) {
            d += two_pi;
        }
        d += w.lo;
        if (d > w.hi) {
            continue;
        }
        const RiemannSample ex = oracle.sample(d / t);
        const double e = std::abs(field[i] - (which == OracleField::density ? ex.rho : ex.u));
        l1.add(e);
        ++err.cells;
        const bool near_front =
            std::any_of(fronts.begin(), fronts.end(), [&](double f) { return std::abs(d - f) <= 5.5 * h; });
        if (!near_front) {
            err.linf_away = std::max(err.linf_away, e);
        }
    }
    if (err.cells == 0) {
        throw std::domain_error("oracle window contains no cells");
    }
    err.l1 = l1.value() / static_cast<double>(err.cells);
    return err;
}

OracleError compare_to_oracle(const FlowState& state, double t, const RiemannOracle& oracle, double x0,
                              OracleField which, double tol)
{
    if (which == OracleField::density) {
        return compare_to_oracle(state.rho, t, oracle, x0, which, tol);
    }
    return compare_to_oracle(recover_velocity(state).front(), t, oracle, x0, which, tol);
}

double level_crossing(const PeriodicField& f, double level, double lo, double hi)
{
    const Torus& torus = f.torus();
    if (torus.dim() != 1) {
        throw std::invalid_argument("level_crossing is one-dimensional");
    }
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double x0 = torus.center(i);
        const double x1 = torus.center(i + 1);
        if (x0 < lo || x1 > hi) {
            continue;
        }
        const double a = f[i] - level;
        const double b = f[i + 1] - level;
        if (a == 0.0) {
            return x0;
        }
        if ((a < 0.0) != (b < 0.0)) {
            return x0 + (x1 - x0) * a / (a - b);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double front_width(const PeriodicField& f, double reference, double lo, double hi)
{
    return level_crossing(f, 0.9 * reference, lo, hi) - level_crossing(f, 0.1 * reference, lo, hi);
}

}  // namespace weakflow
