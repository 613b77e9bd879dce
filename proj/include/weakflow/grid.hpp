#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace weakflow {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on [-pi, pi)^dim, dim = 1 or 2, M cells per axis.
class Torus {
public:
    Torus(int dim, std::size_t cells_per_axis);

    int dim() const noexcept { return dim_; }
    std::size_t cells_per_axis() const noexcept { return cells_; }
    std::size_t size() const noexcept { return dim_ == 1 ? cells_ : cells_ * cells_; }
    double cell_width() const noexcept { return two_pi / static_cast<double>(cells_); }
    double cell_volume() const noexcept;
    /// (2 pi)^dim
    double measure() const noexcept;

    /// Cell-center coordinate along one axis.
    double center(std::size_t i) const noexcept;
    std::size_t wrap(std::ptrdiff_t i) const noexcept;

    // x runs fastest in 2-D storage.
    std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return iy * cells_ + ix; }
    std::size_t ix(std::size_t flat) const noexcept { return flat % cells_; }
    std::size_t iy(std::size_t flat) const noexcept { return flat / cells_; }

    friend bool operator==(const Torus&, const Torus&) = default;

private:
    int dim_;
    std::size_t cells_;
};

/// Piecewise-constant scalar field, one value per cell.
class PeriodicField {
public:
    explicit PeriodicField(Torus torus, double value = 0.0);
    PeriodicField(Torus torus, std::vector<double> values);

    /// Samples f(x, y) at cell centers (y = 0 in 1-D).
    static PeriodicField sample(const Torus& torus, const std::function<double(double, double)>& f);

    const Torus& torus() const noexcept { return torus_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    double sum() const noexcept;
    /// Midpoint quadrature: sum of values times cell volume.
    double integral() const noexcept;
    double min() const noexcept;
    double max() const noexcept;
    double max_abs() const noexcept;

    /// Throws std::domain_error naming `context` if any value is NaN or infinite.
    void require_finite(std::string_view context) const;

    friend bool operator==(const PeriodicField&, const PeriodicField&) = default;

private:
    Torus torus_;
    std::vector<double> values_;
};

/// Fields indexed by axis (size = torus dim).
using AxisFields = std::vector<PeriodicField>;

void require_same_torus(const PeriodicField& a, const PeriodicField& b, std::string_view context);

enum class MollifierKind { smooth_bump, three_cell };

struct MollifierShape {
    MollifierKind kind = MollifierKind::smooth_bump;
    double weight = 0.0;  // three-cell side weight w; stencil (w, 1-2w, w)

    static MollifierShape smooth_bump() { return {MollifierKind::smooth_bump, 0.0}; }
    static MollifierShape three_cell(double w) { return {MollifierKind::three_cell, w}; }
};

/// Discrete even mollifier on a torus. Weights are indexed by offset in
/// [-radius, radius]; they are nonnegative and sum to 1. Smooth-bump kernels
/// also carry derivative weights (antisymmetric, summing to 0).
class Mollifier {
public:
    const Torus& torus() const noexcept { return torus_; }
    MollifierKind kind() const noexcept { return kind_; }
    double width() const noexcept { return width_; }
    int radius() const noexcept { return radius_; }
    bool has_derivative() const noexcept { return !derivative_.empty(); }

    double weight(int offset) const noexcept { return weights_[static_cast<std::size_t>(offset + radius_)]; }
    double derivative_weight(int offset) const noexcept
    {
        return derivative_[static_cast<std::size_t>(offset + radius_)];
    }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> derivative_weights() const noexcept { return derivative_; }

private:
    friend Mollifier make_mollifier(double width, const Torus& torus, MollifierShape shape);
    Mollifier(Torus torus, MollifierKind kind, double width, int radius, std::vector<double> weights,
              std::vector<double> derivative);

    Torus torus_;
    MollifierKind kind_;
    double width_;
    int radius_;
    std::vector<double> weights_;
    std::vector<double> derivative_;
};

/// Smooth-bump profile exp(-1/(1-s^2)) on (-1, 1), unnormalized.
double bump_profile(double s) noexcept;

/// `width` is the support half-width for smooth-bump kernels and is ignored
/// for three-cell kernels. Throws std::invalid_argument when the smooth bump
/// does not cover a neighbouring cell center or w is outside (0, 1/2).
Mollifier make_mollifier(double width, const Torus& torus, MollifierShape shape);

/// Periodic discrete convolution (tensor product in 2-D).
PeriodicField convolve(const PeriodicField& f, const Mollifier& m);

/// f * phi'_mu along `axis`, i.e. the derivative of the mollified field.
/// Throws std::invalid_argument for three-cell mollifiers.
PeriodicField convolve_derivative(const PeriodicField& f, const Mollifier& m, int axis = 0);

/// result(i) = f(i - offset) per axis: a positive offset translates the
/// field towards +x, so shift(f, {1}) evaluates f(x - h).
PeriodicField shift(const PeriodicField& f, std::array<std::ptrdiff_t, 2> offset);

/// (f(x+h) - f(x-h)) / 2h along `axis`.
PeriodicField centered_difference(const PeriodicField& f, int axis = 0);

}  // namespace weakflow
