#include "weakflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace weakflow {

Torus::Torus(int dim, std::size_t cells_per_axis) : dim_(dim), cells_(cells_per_axis)
{
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("torus dimension must be 1 or 2, got " + std::to_string(dim));
    }
    if (cells_per_axis < 3) {
        throw std::invalid_argument("torus needs at least 3 cells per axis, got " + std::to_string(cells_per_axis));
    }
}

double Torus::cell_volume() const noexcept
{
    const double h = cell_width();
    return dim_ == 1 ? h : h * h;
}

double Torus::measure() const noexcept
{
    return dim_ == 1 ? two_pi : two_pi * two_pi;
}

double Torus::center(std::size_t i) const noexcept
{
    return -std::numbers::pi + (static_cast<double>(i) + 0.5) * cell_width();
}

std::size_t Torus::wrap(std::ptrdiff_t i) const noexcept
{
    const auto m = static_cast<std::ptrdiff_t>(cells_);
    auto r = i % m;
    if (r < 0) {
        r += m;
    }
    return static_cast<std::size_t>(r);
}

PeriodicField::PeriodicField(Torus torus, double value) : torus_(torus), values_(torus.size(), value) {}

PeriodicField::PeriodicField(Torus torus, std::vector<double> values) : torus_(torus), values_(std::move(values))
{
    if (values_.size() != torus_.size()) {
        throw std::invalid_argument("field has " + std::to_string(values_.size()) + " values, torus expects " +
                                    std::to_string(torus_.size()));
    }
    require_finite("PeriodicField construction");
}

PeriodicField PeriodicField::sample(const Torus& torus, const std::function<double(double, double)>& f)
{
    std::vector<double> values(torus.size());
    const std::size_t m = torus.cells_per_axis();
    if (torus.dim() == 1) {
        for (std::size_t i = 0; i < m; ++i) {
            values[i] = f(torus.center(i), 0.0);
        }
    } else {
        for (std::size_t iy = 0; iy < m; ++iy) {
            for (std::size_t ix = 0; ix < m; ++ix) {
                values[torus.index(ix, iy)] = f(torus.center(ix), torus.center(iy));
            }
        }
    }
    return PeriodicField(torus, std::move(values));
}

double PeriodicField::sum() const noexcept
{
    // Neumaier compensated summation.
    double total = 0.0;
    double carry = 0.0;
    for (double v : values_) {
        const double t = total + v;
        if (std::abs(total) >= std::abs(v)) {
            carry += (total - t) + v;
        } else {
            carry += (v - t) + total;
        }
        total = t;
    }
    return total + carry;
}

double PeriodicField::integral() const noexcept
{
    return sum() * torus_.cell_volume();
}

double PeriodicField::min() const noexcept
{
    return *std::min_element(values_.begin(), values_.end());
}

double PeriodicField::max() const noexcept
{
    return *std::max_element(values_.begin(), values_.end());
}

double PeriodicField::max_abs() const noexcept
{
    double r = 0.0;
    for (double v : values_) {
        r = std::max(r, std::abs(v));
    }
    return r;
}

void PeriodicField::require_finite(std::string_view context) const
{
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            std::ostringstream msg;
            msg << context << ": non-finite value " << values_[i] << " in cell " << i;
            throw std::domain_error(msg.str());
        }
    }
}

void require_same_torus(const PeriodicField& a, const PeriodicField& b, std::string_view context)
{
    if (!(a.torus() == b.torus())) {
        throw std::invalid_argument(std::string(context) + ": fields live on different tori");
    }
}

Mollifier::Mollifier(Torus torus, MollifierKind kind, double width, int radius, std::vector<double> weights,
                     std::vector<double> derivative)
    : torus_(torus), kind_(kind), width_(width), radius_(radius), weights_(std::move(weights)),
      derivative_(std::move(derivative))
{
}

double bump_profile(double s) noexcept
{
    if (std::abs(s) >= 1.0) {
        return 0.0;
    }
    return std::exp(-1.0 / (1.0 - s * s));
}

namespace {

double bump_profile_derivative(double s) noexcept
{
    if (std::abs(s) >= 1.0) {
        return 0.0;
    }
    const double q = 1.0 - s * s;
    return bump_profile(s) * (-2.0 * s / (q * q));
}

/// Sets the central weight so that the symmetric pairs and the center add up to 1.
void renormalize_symmetric(std::vector<double>& w, int radius)
{
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) {
        v /= total;
    }
    double off_center = 0.0;
    for (int k = radius; k >= 1; --k) {
        const double pair = w[static_cast<std::size_t>(radius + k)];
        w[static_cast<std::size_t>(radius - k)] = pair;
        off_center += 2.0 * pair;
    }
    w[static_cast<std::size_t>(radius)] = 1.0 - off_center;
}

/// out(i) = sum_k w_k f(i - k) along one axis.
PeriodicField apply_stencil(const PeriodicField& f, std::span<const double> w, int radius, int axis)
{
    const Torus& torus = f.torus();
    const std::size_t m = torus.cells_per_axis();
    std::vector<double> out(f.size(), 0.0);
    const auto in = f.values();
    const std::size_t lines = torus.dim() == 1 ? 1 : m;

    for (int k = -radius; k <= radius; ++k) {
        const double wk = w[static_cast<std::size_t>(k + radius)];
        if (wk == 0.0) {
            continue;
        }
        if (axis == 0) {
            for (std::size_t line = 0; line < lines; ++line) {
                const std::size_t base = line * m;
                for (std::size_t i = 0; i < m; ++i) {
                    out[base + i] += wk * in[base + torus.wrap(static_cast<std::ptrdiff_t>(i) - k)];
                }
            }
        } else {
            for (std::size_t iy = 0; iy < m; ++iy) {
                const std::size_t src = torus.wrap(static_cast<std::ptrdiff_t>(iy) - k) * m;
                for (std::size_t ix = 0; ix < m; ++ix) {
                    out[iy * m + ix] += wk * in[src + ix];
                }
            }
        }
    }
    return PeriodicField(torus, std::move(out));
}

void require_axis(const Torus& torus, int axis)
{
    if (axis < 0 || axis >= torus.dim()) {
        throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for a " +
                                    std::to_string(torus.dim()) + "-D torus");
    }
}

}  // namespace

Mollifier make_mollifier(double width, const Torus& torus, MollifierShape shape)
{
    const double h = torus.cell_width();
    if (shape.kind == MollifierKind::three_cell) {
        const double w = shape.weight;
        if (!(w > 0.0 && w < 0.5)) {
            std::ostringstream msg;
            msg << "three-cell mollifier weight must lie in (0, 1/2), got " << w;
            throw std::invalid_argument(msg.str());
        }
        return Mollifier(torus, MollifierKind::three_cell, h, 1, {w, 1.0 - 2.0 * w, w}, {});
    }

    if (!(width >= h)) {
        std::ostringstream msg;
        msg << "smooth-bump mollifier width " << width << " is below the cell width " << h;
        throw std::invalid_argument(msg.str());
    }
    if (width >= std::numbers::pi) {
        std::ostringstream msg;
        msg << "smooth-bump mollifier width " << width << " exceeds half the period";
        throw std::invalid_argument(msg.str());
    }
    // Sample points strictly inside the support (-width, width).
    int radius = static_cast<int>(std::ceil(width / h)) - 1;
    if (static_cast<double>(radius + 1) * h < width) {
        ++radius;
    }
    radius = std::max(radius, 0);

    const auto n = static_cast<std::size_t>(2 * radius + 1);
    std::vector<double> weights(n);
    std::vector<double> derivative(n);
    for (int k = -radius; k <= radius; ++k) {
        weights[static_cast<std::size_t>(k + radius)] = bump_profile(k * h / width);
    }
    const double raw_total = std::accumulate(weights.begin(), weights.end(), 0.0);
    // d_k = h phi'_mu(k h), scaled by the same normalization as the weights.
    for (int k = 1; k <= radius; ++k) {
        const double d = bump_profile_derivative(k * h / width) / (width * raw_total);
        derivative[static_cast<std::size_t>(radius + k)] = d;
        derivative[static_cast<std::size_t>(radius - k)] = -d;
    }
    renormalize_symmetric(weights, radius);
    return Mollifier(torus, MollifierKind::smooth_bump, width, radius, std::move(weights), std::move(derivative));
}

PeriodicField convolve(const PeriodicField& f, const Mollifier& m)
{
    if (!(f.torus() == m.torus())) {
        throw std::invalid_argument("convolve: field and mollifier live on different tori");
    }
    PeriodicField out = apply_stencil(f, m.weights(), m.radius(), 0);
    if (f.torus().dim() == 2) {
        out = apply_stencil(out, m.weights(), m.radius(), 1);
    }
    out.require_finite("convolve");
    return out;
}

PeriodicField convolve_derivative(const PeriodicField& f, const Mollifier& m, int axis)
{
    if (!(f.torus() == m.torus())) {
        throw std::invalid_argument("convolve_derivative: field and mollifier live on different tori");
    }
    if (!m.has_derivative()) {
        throw std::invalid_argument("convolve_derivative: three-cell mollifier has no derivative kernel");
    }
    require_axis(f.torus(), axis);
    PeriodicField out = apply_stencil(f, m.derivative_weights(), m.radius(), axis);
    if (f.torus().dim() == 2) {
        out = apply_stencil(out, m.weights(), m.radius(), 1 - axis);
    }
    out.require_finite("convolve_derivative");
    return out;
}

PeriodicField shift(const PeriodicField& f, std::array<std::ptrdiff_t, 2> offset)
{
    const Torus& torus = f.torus();
    const std::size_t m = torus.cells_per_axis();
    std::vector<double> out(f.size());
    if (torus.dim() == 1) {
        for (std::size_t i = 0; i < m; ++i) {
            out[i] = f[torus.wrap(static_cast<std::ptrdiff_t>(i) - offset[0])];
        }
    } else {
        for (std::size_t iy = 0; iy < m; ++iy) {
            const std::size_t sy = torus.wrap(static_cast<std::ptrdiff_t>(iy) - offset[1]);
            for (std::size_t ix = 0; ix < m; ++ix) {
                out[torus.index(ix, iy)] = f[torus.index(torus.wrap(static_cast<std::ptrdiff_t>(ix) - offset[0]), sy)];
            }
        }
    }
    return PeriodicField(torus, std::move(out));
}

PeriodicField centered_difference(const PeriodicField& f, int axis)
{
    require_axis(f.torus(), axis);
    const double inv = 1.0 / (2.0 * f.torus().cell_width());
    // out(i) = sum_k w_k f(i - k): k = -1 picks f(i+1), k = +1 picks f(i-1).
    const std::array<double, 3> w{inv, 0.0, -inv};
    PeriodicField out = apply_stencil(f, w, 1, axis);
    out.require_finite("centered_difference");
    return out;
}

}  // namespace weakflow
