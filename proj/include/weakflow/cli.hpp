#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weakflow/integrate.hpp"
#include "weakflow/verify.hpp"

namespace weakflow::cli {

/// Piecewise-constant data with the jump at x = 0 (and its periodic image
/// at x = pi).
struct RiemannData {
    double rho_left = 1.0;
    double u_left = 0.0;
    double rho_right = 1.0;
    double u_right = 0.0;
};

/// A complete run description. Text form is one `key = value` per line
/// with dotted keys; `#` starts a comment.
struct Scenario {
    std::string name = "custom";
    std::string system = "isothermal";  // isothermal, isentropic, shallow, selfgravity
    int dim = 1;
    std::size_t cells = 256;

    double K = 1.0;
    double N = 2.0;
    double gamma = 2.0;
    double g = 9.8;
    double G = 1.0;

    std::string mollifier = "smooth-bump";  // or three-cell
    double weight = 0.3;                    // three-cell side weight w
    double alpha = 0.1;
    double beta = 1.0;
    double delta = 0.0;
    double rho_min = 0.0;  // floor applied to the initial density
    ConstraintMode constraints = ConstraintMode::strict;

    std::string rho;  // empty: taken from riemann data
    std::string u;
    std::string v = "0";
    std::string bottom = "0";
    double smoothing = 0.0;  // three-cell side weight for averaging the initial data; 0 = none
    std::optional<RiemannData> riemann;

    double dt = 1e-3;
    double t_final = 0.0;
    Method method = Method::euler;
    std::vector<double> snapshots;
    std::size_t monitor_every = 1;

    /// Assigns one key; throws std::invalid_argument for unknown keys or
    /// malformed values.
    void set(const std::string& key, const std::string& value);

    /// Canonical text, every key in a fixed order.
    std::string to_text() const;

    /// Cell width 2 pi / cells.
    double eps() const;
    Torus torus() const;
    StateLaw law() const;
    SplitConfig split() const;
    RunConfig run_config() const;

    /// Re-validates everything a run needs. Throws ConstraintError for law
    /// constraints (strict hypotheses included) and std::invalid_argument
    /// for other problems; returns relaxed-mode warnings.
    std::vector<std::string> validate() const;

    FlowState initial_state() const;

    /// Exact solution for 1-D isothermal or shallow Riemann data, else null.
    std::unique_ptr<RiemannOracle> oracle() const;
};

Scenario parse_scenario(std::istream& in, const std::string& name = "custom");

/// Preset name, or path to a scenario file.
Scenario load_scenario(const std::string& name_or_path);

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
Scenario preset(const std::string& name);

/// Applies `key=value`.
void apply_override(Scenario& s, const std::string& assignment);

/// Test functions used for residual records.
std::vector<TestFunction> residual_test_functions(int dim);

/// rho and rho * fl(m / rho): the state a field dump describes exactly.
FlowState canonical_state(const FlowState& s);

WeakResiduals canonical_residual(Integrator& integrator, const FlowState& canonical, const TestFunction& psi);

/// Header `x,rho,u` or `x,y,rho,u,v`, one row per cell, %.17g.
void dump_fields(const FlowState& s, std::ostream& out);
void dump_fields(const FlowState& s, const std::filesystem::path& path);

/// Inverse of dump_fields; the grid is inferred from the rows.
FlowState read_fields(std::istream& in);
FlowState read_fields(const std::filesystem::path& path);

struct SimulationResult {
    Trajectory trajectory;
    ResidualReport residuals;
    std::vector<std::string> warnings;
};

/// Runs a scenario and writes scenario.cfg, snapshots.csv, snap_NNN.csv,
/// monitor.csv, residuals.csv, summary.txt (and oracle_NNN.csv for
/// Riemann data) into `out`.
SimulationResult simulate(const Scenario& s, const std::filesystem::path& out, std::ostream& log);

enum class SweepParam { eps, delta };
SweepParam parse_sweep_param(const std::string& name);

/// Runs one member per value concurrently into out/<param>_<index>, then
/// writes out/sweep.csv.
void sweep(const Scenario& s, SweepParam param, const std::vector<double>& values,
           const std::filesystem::path& out, std::ostream& log);

/// Recomputes residuals from the dumps and checks them against the stored
/// records and the a-priori bounds. Handles single runs and sweeps.
/// Returns true when every check passes.
bool verify(const std::filesystem::path& dir, std::ostream& out);

/// `shallow:hl=..,ul=..,hr=..,ur=..,g=..`, `isothermal:rhol=..,ul=..,rhor=..,ur=..,K=..`,
/// or a preset / scenario file with Riemann data.
std::unique_ptr<RiemannOracle> parse_oracle_spec(const std::string& spec);

/// Writes `x,rho,u` samples at the cell centers of an M-cell torus that lie
/// in the oracle's validity window at time t.
void write_oracle_samples(const RiemannOracle& oracle, double t, std::size_t cells, std::ostream& out);

/// Writes plot.gp into a run or sweep directory and returns its path.
std::filesystem::path write_plot_script(const std::filesystem::path& dir);

/// Output directory when --out is not given: $WEAKFLOW_OUT/<name>, or
/// runs/<name>.
std::filesystem::path default_output(const std::string& name);

}  // namespace weakflow::cli
