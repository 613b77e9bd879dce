#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "weakflow/scheme.hpp"
#include "weakflow/statelaw.hpp"

namespace weakflow {

enum class Method { euler, rk4 };

std::string method_name(Method m);
/// Accepts "euler" or "rk4".
Method parse_method(const std::string& name);

struct RunConfig {
    double dt = 1e-3;
    double t_final = 0.0;
    Method method = Method::euler;
    std::vector<double> snapshot_times;  // the initial and final states are always captured
    std::size_t monitor_every = 1;
};

struct MonitorRecord {
    std::size_t step;
    double t;
    double mass;
    double mass_expected;  // initial mass + t (2 pi)^dim eps^beta
    double min_rho;
    double max_abs_u;      // max over axes and cells
    double transfer_rate;  // dt * max sum_axes v(u) / eps; <= 1 is admissible

    double mass_error() const noexcept { return mass - mass_expected; }
};

struct Snapshot {
    std::size_t step;
    double t;
    FlowState state;
};

struct VelocityEnvelope {
    double initial = 0.0;   // max |u0|
    double constant = 0.0;  // C in |u|_inf <= |u0|_inf + C t / eps^exponent
    double exponent = 0.0;  // 3 alpha for log laws, 2 alpha otherwise, 0 for three-cell
    double growth_slope = 0.0;  // least-squares slope of max|u| against t
    std::size_t exceedances = 0;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    std::vector<MonitorRecord> monitor_log;
    std::vector<std::string> warnings;
    VelocityEnvelope envelope;
};

/// Called after every completed step with the step index, time and new state.
using StepObserver = std::function<void(std::size_t, double, const FlowState&)>;

/// Right-hand side evaluation and time stepping for one law on one grid.
/// Not safe for concurrent use (it owns FFT workspaces); one per thread.
class Integrator {
public:
    Integrator(StateLaw law, SplitConfig split, const Torus& torus, double eps);

    const StateLaw& law() const noexcept { return potential_.law(); }
    SplitConfig split() const noexcept { return split_; }
    double eps() const noexcept { return eps_; }
    PotentialOperator& potential() noexcept { return potential_; }

    FlowRates rates(const FlowState& state);

    /// One step from time t. A positivity breach in any stage raises
    /// PositivityError carrying t and the method name.
    FlowState step(const FlowState& state, double dt, Method method, double t = 0.0);

private:
    PotentialOperator potential_;
    SplitConfig split_;
    double eps_;
};

FlowState step(const FlowState& state, const StateLaw& law, SplitConfig split, double eps, double dt, Method method);

/// Number of steps dt fits into t_final; throws unless t_final is an
/// integer multiple of dt to 1e-9 relative.
std::size_t step_count(double dt, double t_final);

/// Integrates from 0 to cfg.t_final. Law constraints are checked first
/// (ConstraintError in strict mode, warnings in relaxed mode).
Trajectory run(const FlowState& initial, const StateLaw& law, SplitConfig split, double eps, const RunConfig& cfg,
               ConstraintMode mode = ConstraintMode::strict, const StepObserver& observer = nullptr);

}  // namespace weakflow
