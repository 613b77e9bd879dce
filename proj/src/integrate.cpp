#include "weakflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace weakflow {

namespace {

/// a + s * b, fieldwise.
PeriodicField axpy(const PeriodicField& a, double s, const PeriodicField& b)
{
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] + s * b[i];
    }
    return PeriodicField(a.torus(), std::move(out));
}

FlowState advance(const FlowState& x, double s, const FlowRates& r)
{
    FlowState out{axpy(x.rho, s, r.rho), {}};
    for (std::size_t c = 0; c < x.momentum.size(); ++c) {
        out.momentum.push_back(axpy(x.momentum[c], s, r.momentum[c]));
    }
    return out;
}

/// x + dt/6 (k1 + 2 k2 + 2 k3 + k4), fieldwise.
PeriodicField rk4_combine(const PeriodicField& x, double dt, const PeriodicField& k1, const PeriodicField& k2,
                          const PeriodicField& k3, const PeriodicField& k4)
{
    std::vector<double> out(x.size());
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return PeriodicField(x.torus(), std::move(out));
}

void require_positive(const FlowState& s, double t, Method method)
{
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        if (!(s.rho[i] > 0.0)) {
            throw PositivityError(i, s.rho[i], t, method_name(method));
        }
    }
}

double envelope_exponent(const StateLaw& law)
{
    if (law.mollifier.kind == MollifierKind::three_cell) {
        return 0.0;
    }
    const bool log_law =
        std::holds_alternative<Isothermal>(law.system) || std::holds_alternative<SelfGravity>(law.system);
    return (log_law ? 3.0 : 2.0) * law.alpha;
}

MonitorRecord monitor(const FlowState& s, std::size_t step, double t, double m0, double source_rate, double dt,
                      double eps, SplitConfig split)
{
    MonitorRecord r{};
    r.step = step;
    r.t = t;
    r.mass = s.mass();
    r.mass_expected = m0 + static_cast<double>(step) * dt * source_rate;
    r.min_rho = s.rho.min();
    const AxisFields u = recover_velocity(s);
    double max_u = 0.0;
    for (const auto& f : u) {
        max_u = std::max(max_u, f.max_abs());
    }
    r.max_abs_u = max_u;
    r.transfer_rate = dt * max_transfer_rate(s, split) / eps;
    return r;
}

void fit_envelope(Trajectory& tr, double eps, double exponent)
{
    auto& env = tr.envelope;
    const auto& log = tr.monitor_log;
    env.exponent = exponent;
    if (log.empty()) {
        return;
    }
    env.initial = log.front().max_abs_u;
    const double scale = std::pow(eps, exponent);

    // C from the first half of the records, checked against all of them.
    const std::size_t half = std::max<std::size_t>(1, log.size() / 2);
    for (std::size_t k = 0; k < half; ++k) {
        if (log[k].t > 0.0) {
            env.constant = std::max(env.constant, (log[k].max_abs_u - env.initial) * scale / log[k].t);
        }
    }
    for (const auto& r : log) {
        const double bound = env.initial + env.constant * r.t / scale;
        if (r.max_abs_u > bound * (1.0 + 1e-12)) {
            ++env.exceedances;
        }
    }
    if (env.exceedances > 0) {
        std::ostringstream msg;
        msg << "velocity envelope |u0| + C t/eps^" << exponent << " with C = " << env.constant << " exceeded in "
            << env.exceedances << " of " << log.size() << " monitor records";
        tr.warnings.push_back(msg.str());
    }

    if (log.size() >= 2) {
        double st = 0.0;
        double su = 0.0;
        for (const auto& r : log) {
            st += r.t;
            su += r.max_abs_u;
        }
        const double n = static_cast<double>(log.size());
        const double mt = st / n;
        const double mu = su / n;
        double num = 0.0;
        double den = 0.0;
        for (const auto& r : log) {
            num += (r.t - mt) * (r.max_abs_u - mu);
            den += (r.t - mt) * (r.t - mt);
        }
        env.growth_slope = den > 0.0 ? num / den : 0.0;
    }
}

}  // namespace

std::string method_name(Method m) { return m == Method::euler ? "euler" : "rk4"; }

Method parse_method(const std::string& name)
{
    if (name == "euler") {
        return Method::euler;
    }
    if (name == "rk4") {
        return Method::rk4;
    }
    throw std::invalid_argument("unknown time integration method '" + name + "' (expected euler or rk4)");
}

Integrator::Integrator(StateLaw law, SplitConfig split, const Torus& torus, double eps)
    : potential_(std::move(law), torus, eps), split_(split), eps_(eps)
{
    if (!(split.delta >= 0.0) || !std::isfinite(split.delta)) {
        throw std::invalid_argument("δ ≥ 0 required");
    }
}

FlowRates Integrator::rates(const FlowState& state)
{
    const AxisFields grad = potential_.gradient(state.rho);
    return flow_rates(state, split_, eps_, beta_term(potential_.law(), eps_), grad);
}

FlowState Integrator::step(const FlowState& state, double dt, Method method, double t)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
    try {
        if (method == Method::euler) {
            FlowState next = advance(state, dt, rates(state));
            require_positive(next, t + dt, method);
            return next;
        }
        const FlowRates k1 = rates(state);
        const FlowRates k2 = rates(advance(state, 0.5 * dt, k1));
        const FlowRates k3 = rates(advance(state, 0.5 * dt, k2));
        const FlowRates k4 = rates(advance(state, dt, k3));
        FlowState next{rk4_combine(state.rho, dt, k1.rho, k2.rho, k3.rho, k4.rho), {}};
        for (std::size_t c = 0; c < state.momentum.size(); ++c) {
            next.momentum.push_back(rk4_combine(state.momentum[c], dt, k1.momentum[c], k2.momentum[c],
                                                k3.momentum[c], k4.momentum[c]));
        }
        require_positive(next, t + dt, method);
        return next;
    } catch (const PositivityError& e) {
        if (std::isnan(e.time())) {
            throw e.with_context(t, method_name(method));
        }
        throw;
    }
}

FlowState step(const FlowState& state, const StateLaw& law, SplitConfig split, double eps, double dt, Method method)
{
    Integrator integrator(law, split, state.torus(), eps);
    return integrator.step(state, dt, method);
}

std::size_t step_count(double dt, double t_final)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("time step must be positive");
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw std::invalid_argument("final time must be nonnegative");
    }
    const double ratio = t_final / dt;
    const double n = std::round(ratio);
    if (std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream msg;
        msg << "final time " << t_final << " is not an integer multiple of dt = " << dt;
        throw std::invalid_argument(msg.str());
    }
    return static_cast<std::size_t>(n);
}

Trajectory run(const FlowState& initial, const StateLaw& law, SplitConfig split, double eps, const RunConfig& cfg,
               ConstraintMode mode, const StepObserver& observer)
{
    Trajectory tr;
    tr.warnings = validate(law, mode);
    initial.validate();
    if (cfg.monitor_every == 0) {
        throw std::invalid_argument("monitor_every must be at least 1");
    }
    const std::size_t total = step_count(cfg.dt, cfg.t_final);

    std::vector<std::size_t> snap_steps{0, total};
    for (double ts : cfg.snapshot_times) {
        if (!(ts >= 0.0 && ts <= cfg.t_final * (1.0 + 1e-12))) {
            std::ostringstream msg;
            msg << "snapshot time " << ts << " outside [0, " << cfg.t_final << "]";
            throw std::invalid_argument(msg.str());
        }
        snap_steps.push_back(step_count(cfg.dt, ts));
    }
    std::sort(snap_steps.begin(), snap_steps.end());
    snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

    Integrator integrator(law, split, initial.torus(), eps);
    const double m0 = initial.mass();
    const double source_rate = initial.torus().measure() * beta_term(law, eps);
    const auto time_of = [&](std::size_t k) { return static_cast<double>(k) * cfg.dt; };

    bool warned_rate = false;
    auto record = [&](const FlowState& s, std::size_t k) {
        tr.monitor_log.push_back(monitor(s, k, time_of(k), m0, source_rate, cfg.dt, eps, split));
        const auto& r = tr.monitor_log.back();
        if (!warned_rate && r.transfer_rate > 1.0) {
            std::ostringstream msg;
            msg << "time step not admissible at t = " << r.t << ": dt·max v(u)/ε = " << r.transfer_rate << " > 1";
            tr.warnings.push_back(msg.str());
            warned_rate = true;
        }
    };

    FlowState state = initial;
    std::size_t next_snap = 0;
    if (snap_steps[next_snap] == 0) {
        tr.snapshots.push_back({0, 0.0, state});
        ++next_snap;
    }
    record(state, 0);

    for (std::size_t k = 1; k <= total; ++k) {
        state = integrator.step(state, cfg.dt, cfg.method, time_of(k - 1));
        if (observer) {
            observer(k, time_of(k), state);
        }
        if (k % cfg.monitor_every == 0 || k == total) {
            record(state, k);
        }
        if (next_snap < snap_steps.size() && snap_steps[next_snap] == k) {
            tr.snapshots.push_back({k, time_of(k), state});
            ++next_snap;
        }
    }
    fit_envelope(tr, eps, envelope_exponent(law));
    return tr;
}

}  // namespace weakflow
