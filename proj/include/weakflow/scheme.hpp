#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "weakflow/grid.hpp"

namespace weakflow {

/// Conserved variables at one instant: density (or water height) and one
/// momentum component per axis.
struct FlowState {
    PeriodicField rho;
    AxisFields momentum;

    /// Validates shape, finiteness and rho > 0; throws PositivityError or
    /// std::invalid_argument.
    static FlowState make(PeriodicField rho, AxisFields momentum);

    const Torus& torus() const noexcept { return rho.torus(); }
    int dim() const noexcept { return rho.torus().dim(); }
    double mass() const noexcept { return rho.integral(); }

    void validate() const;
};

/// Raised when a cell with rho <= 0 is met where division by rho is needed.
class PositivityError : public std::runtime_error {
public:
    PositivityError(std::size_t cell, double value, double time = std::numeric_limits<double>::quiet_NaN(),
                    std::string method = {});

    std::size_t cell() const noexcept { return cell_; }
    double value() const noexcept { return value_; }
    double time() const noexcept { return time_; }
    const std::string& method() const noexcept { return method_; }

    PositivityError with_context(double time, std::string method) const;

private:
    std::size_t cell_;
    double value_;
    double time_;
    std::string method_;
};

/// delta = 0 selects the sharp split u+ = max(u,0), u- = max(-u,0);
/// delta > 0 uses v(u) = sqrt(u^2 + delta^2) with u+ + u- = v(u).
struct SplitConfig {
    double delta = 0.0;
};

struct VelocitySplit {
    double plus;
    double minus;
    double speed() const noexcept { return plus + minus; }
};

/// Both parts are nonnegative. plus - minus == u holds bitwise for delta = 0
/// and whenever v(u) <= 3|u|; for smaller |u| it holds to rounding.
VelocitySplit split_velocity(double u, SplitConfig cfg) noexcept;

/// D(u) = (v(u) - |u|) / 2, the excess of the regularized split over the sharp one.
double split_excess(double u, SplitConfig cfg) noexcept;

/// u = (rho u) / rho per axis. Throws PositivityError naming the first cell with rho <= 0.
AxisFields recover_velocity(const FlowState& state);

/// d rho / dt: upwind transfer from the neighbours plus the constant beta_term
/// (the value eps^beta, or 0 for systems without it). eps must equal the cell width.
PeriodicField continuity_rhs(const FlowState& state, SplitConfig cfg, double eps, double beta_term);

/// d (rho u_axis) / dt: upwind transport of each momentum component minus rho * grad_phi[axis].
AxisFields momentum_rhs(const FlowState& state, SplitConfig cfg, double eps, const AxisFields& grad_phi);

struct ViscositySplit {
    PeriodicField sharp;    // continuity RHS with delta = 0, no beta term
    PeriodicField viscous;  // (1/eps) * discrete Laplacian of rho D(u)
};

/// Writes the regularized continuity RHS as the sharp RHS plus a viscous term.
/// Requires cfg.delta > 0.
ViscositySplit viscosity_decomposition(const FlowState& state, SplitConfig cfg, double eps);

/// Time derivatives of every conserved field.
struct FlowRates {
    PeriodicField rho;
    AxisFields momentum;
};

/// Continuity and momentum RHS sharing one velocity recovery.
FlowRates flow_rates(const FlowState& state, SplitConfig cfg, double eps, double beta_term,
                     const AxisFields& grad_phi);

/// max over cells of sum over axes of v(u_axis); an Euler step with
/// dt * rate <= eps keeps the update a convex combination.
double max_transfer_rate(const FlowState& state, SplitConfig cfg);

/// Throws std::invalid_argument unless eps matches the torus cell width.
void require_cell_width(const Torus& torus, double eps, const char* context);

}  // namespace weakflow
