#include "weakflow/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace weakflow {

namespace {

std::string positivity_message(std::size_t cell, double value, double time, const std::string& method)
{
    std::ostringstream msg;
    msg << "positivity violated: rho = " << value << " in cell " << cell;
    if (!std::isnan(time)) {
        msg << " at t = " << time;
    }
    if (!method.empty()) {
        msg << " (" << method << ")";
    }
    return msg.str();
}

/// Per-axis split velocities for every cell.
struct Splits {
    std::vector<std::vector<double>> plus;
    std::vector<std::vector<double>> minus;
};

Splits compute_splits(const AxisFields& velocity, SplitConfig cfg)
{
    Splits s;
    for (const auto& u : velocity) {
        std::vector<double> p(u.size());
        std::vector<double> m(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const auto split = split_velocity(u[i], cfg);
            p[i] = split.plus;
            m[i] = split.minus;
        }
        s.plus.push_back(std::move(p));
        s.minus.push_back(std::move(m));
    }
    return s;
}

/// out(i) += (G(i-1/2) - G(i+1/2)) / eps with interface flux
/// G(i+1/2) = q(i) u+(i) - q(i+1) u-(i+1) along `axis`.
void add_transport(std::vector<double>& out, const PeriodicField& q, const std::vector<double>& plus,
                   const std::vector<double>& minus, int axis, double eps)
{
    const Torus& torus = q.torus();
    const std::size_t m = torus.cells_per_axis();
    const std::size_t n = q.size();
    const double inv = 1.0 / eps;

    std::vector<double> forward(n);
    std::vector<double> backward(n);
    for (std::size_t i = 0; i < n; ++i) {
        forward[i] = q[i] * plus[i];
        backward[i] = q[i] * minus[i];
    }

    const std::size_t stride = axis == 0 ? 1 : m;
    const std::size_t lines = torus.dim() == 1 ? 1 : m;
    std::vector<double> flux(m);
    for (std::size_t line = 0; line < lines; ++line) {
        // Cells along the line: start + j * stride.
        const std::size_t start = axis == 0 ? line * m : line;
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t here = start + j * stride;
            const std::size_t next = start + ((j + 1) % m) * stride;
            flux[j] = forward[here] - backward[next];
        }
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t here = start + j * stride;
            const double left = flux[(j + m - 1) % m];
            out[here] += (left - flux[j]) * inv;
        }
    }
}

PeriodicField continuity_from_splits(const FlowState& state, const Splits& s, double eps, double beta_term)
{
    std::vector<double> out(state.rho.size(), beta_term);
    for (int axis = 0; axis < state.dim(); ++axis) {
        add_transport(out, state.rho, s.plus[static_cast<std::size_t>(axis)], s.minus[static_cast<std::size_t>(axis)],
                      axis, eps);
    }
    PeriodicField result(state.torus(), std::move(out));
    return result;
}

AxisFields momentum_from_splits(const FlowState& state, const Splits& s, double eps, const AxisFields& grad_phi)
{
    AxisFields result;
    for (int c = 0; c < state.dim(); ++c) {
        const PeriodicField& q = state.momentum[static_cast<std::size_t>(c)];
        const PeriodicField& g = grad_phi[static_cast<std::size_t>(c)];
        std::vector<double> out(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) {
            out[i] = -state.rho[i] * g[i];
        }
        for (int axis = 0; axis < state.dim(); ++axis) {
            add_transport(out, q, s.plus[static_cast<std::size_t>(axis)], s.minus[static_cast<std::size_t>(axis)], axis,
                          eps);
        }
        result.emplace_back(state.torus(), std::move(out));
    }
    return result;
}

void require_gradient_shape(const FlowState& state, const AxisFields& grad_phi)
{
    if (grad_phi.size() != static_cast<std::size_t>(state.dim())) {
        throw std::invalid_argument("momentum_rhs: potential gradient needs one field per axis");
    }
    for (const auto& g : grad_phi) {
        require_same_torus(state.rho, g, "momentum_rhs");
    }
}

}  // namespace

PositivityError::PositivityError(std::size_t cell, double value, double time, std::string method)
    : std::runtime_error(positivity_message(cell, value, time, method)), cell_(cell), value_(value), time_(time),
      method_(std::move(method))
{
}

PositivityError PositivityError::with_context(double time, std::string method) const
{
    return PositivityError(cell_, value_, time, std::move(method));
}

FlowState FlowState::make(PeriodicField rho, AxisFields momentum)
{
    FlowState s{std::move(rho), std::move(momentum)};
    s.validate();
    return s;
}

void FlowState::validate() const
{
    if (momentum.size() != static_cast<std::size_t>(dim())) {
        throw std::invalid_argument("flow state needs one momentum component per axis");
    }
    for (const auto& m : momentum) {
        require_same_torus(rho, m, "flow state");
        m.require_finite("flow state momentum");
    }
    rho.require_finite("flow state density");
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(rho[i] > 0.0)) {
            throw PositivityError(i, rho[i]);
        }
    }
}

VelocitySplit split_velocity(double u, SplitConfig cfg) noexcept
{
    if (cfg.delta == 0.0) {
        return {std::max(u, 0.0), std::max(-u, 0.0)};
    }
    const double a = std::abs(u);
    const double v = std::hypot(u, cfg.delta);
    double big = 0.0;
    double small = 0.0;
    if (v <= 3.0 * a) {
        // a <= big <= 2a, so big - a is exact and big - small reproduces |u| bitwise.
        big = 0.5 * (v + a);
        small = big - a;
    } else {
        // delta^2 / (2 (v + |u|)) avoids cancellation in (v - |u|) / 2.
        small = 0.5 * cfg.delta * cfg.delta / (v + a);
        big = small + a;
    }
    return u >= 0.0 ? VelocitySplit{big, small} : VelocitySplit{small, big};
}

double split_excess(double u, SplitConfig cfg) noexcept
{
    if (cfg.delta == 0.0) {
        return 0.0;
    }
    const auto s = split_velocity(u, cfg);
    return std::min(s.plus, s.minus);
}

void require_cell_width(const Torus& torus, double eps, const char* context)
{
    const double h = torus.cell_width();
    if (!(std::abs(eps - h) <= 1e-12 * h)) {
        std::ostringstream msg;
        msg << context << ": eps = " << eps << " must equal the cell width " << h;
        throw std::invalid_argument(msg.str());
    }
}

AxisFields recover_velocity(const FlowState& state)
{
    AxisFields velocity;
    for (std::size_t i = 0; i < state.rho.size(); ++i) {
        if (!(state.rho[i] > 0.0)) {
            throw PositivityError(i, state.rho[i]);
        }
    }
    for (const auto& m : state.momentum) {
        std::vector<double> u(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            u[i] = m[i] / state.rho[i];
        }
        velocity.emplace_back(state.torus(), std::move(u));
    }
    return velocity;
}

PeriodicField continuity_rhs(const FlowState& state, SplitConfig cfg, double eps, double beta_term)
{
    require_cell_width(state.torus(), eps, "continuity_rhs");
    const Splits s = compute_splits(recover_velocity(state), cfg);
    auto out = continuity_from_splits(state, s, eps, beta_term);
    out.require_finite("continuity_rhs");
    return out;
}

AxisFields momentum_rhs(const FlowState& state, SplitConfig cfg, double eps, const AxisFields& grad_phi)
{
    require_cell_width(state.torus(), eps, "momentum_rhs");
    require_gradient_shape(state, grad_phi);
    const Splits s = compute_splits(recover_velocity(state), cfg);
    auto out = momentum_from_splits(state, s, eps, grad_phi);
    for (const auto& f : out) {
        f.require_finite("momentum_rhs");
    }
    return out;
}

FlowRates flow_rates(const FlowState& state, SplitConfig cfg, double eps, double beta_term,
                     const AxisFields& grad_phi)
{
    require_cell_width(state.torus(), eps, "flow_rates");
    require_gradient_shape(state, grad_phi);
    const Splits s = compute_splits(recover_velocity(state), cfg);
    FlowRates rates{continuity_from_splits(state, s, eps, beta_term), momentum_from_splits(state, s, eps, grad_phi)};
    rates.rho.require_finite("continuity rate");
    for (const auto& f : rates.momentum) {
        f.require_finite("momentum rate");
    }
    return rates;
}

ViscositySplit viscosity_decomposition(const FlowState& state, SplitConfig cfg, double eps)
{
    if (!(cfg.delta > 0.0)) {
        throw std::invalid_argument("viscosity_decomposition requires delta > 0");
    }
    require_cell_width(state.torus(), eps, "viscosity_decomposition");
    const AxisFields velocity = recover_velocity(state);
    const Splits sharp_splits = compute_splits(velocity, SplitConfig{0.0});
    PeriodicField sharp = continuity_from_splits(state, sharp_splits, eps, 0.0);

    const Torus& torus = state.torus();
    const std::size_t m = torus.cells_per_axis();
    std::vector<double> viscous(state.rho.size(), 0.0);
    for (int axis = 0; axis < state.dim(); ++axis) {
        const auto& u = velocity[static_cast<std::size_t>(axis)];
        std::vector<double> q(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            q[i] = state.rho[i] * split_excess(u[i], cfg);
        }
        for (std::size_t i = 0; i < q.size(); ++i) {
            std::size_t lo = 0;
            std::size_t hi = 0;
            if (axis == 0) {
                const std::size_t ix = torus.dim() == 1 ? i : torus.ix(i);
                const std::size_t row = i - ix;
                lo = row + (ix + m - 1) % m;
                hi = row + (ix + 1) % m;
            } else {
                const std::size_t ix = torus.ix(i);
                const std::size_t iy = torus.iy(i);
                lo = torus.index(ix, (iy + m - 1) % m);
                hi = torus.index(ix, (iy + 1) % m);
            }
            viscous[i] += (q[lo] - 2.0 * q[i] + q[hi]) / eps;
        }
    }
    return {std::move(sharp), PeriodicField(torus, std::move(viscous))};
}

double max_transfer_rate(const FlowState& state, SplitConfig cfg)
{
    const AxisFields velocity = recover_velocity(state);
    double rate = 0.0;
    for (std::size_t i = 0; i < state.rho.size(); ++i) {
        double r = 0.0;
        for (const auto& u : velocity) {
            r += split_velocity(u[i], cfg).speed();
        }
        rate = std::max(rate, r);
    }
    return rate;
}

}  // namespace weakflow
