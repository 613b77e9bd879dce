#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "weakflow/grid.hpp"

namespace weakflow {

/// Bottom elevation a(x, y) for shallow water: either an expression with its
/// exact partial derivatives, or sampled values differentiated by centered
/// differences.
class Bottom {
public:
    using Function = std::function<double(double, double)>;

    /// a = 0.
    Bottom() = default;

    static Bottom analytic(Function a, Function da_dx, Function da_dy = nullptr);
    static Bottom sampled(PeriodicField a);

    bool is_flat() const noexcept;
    PeriodicField elevation(const Torus& torus) const;
    AxisFields slope(const Torus& torus) const;

private:
    Function value_;
    Function dx_;
    Function dy_;
    std::optional<PeriodicField> samples_;
};

struct Isothermal {
    double K = 1.0;
    double N = 2.0;  // floor exponent: log(rho + eps^N)
};

struct Isentropic {
    double K = 1.0;
    double gamma = 2.0;
};

struct Shallow {
    double g = 9.8;
    Bottom bottom;
};

struct SelfGravity {
    double K = 1.0;
    double N = 2.0;
    double G = 1.0;
};

using LawVariant = std::variant<Isothermal, Isentropic, Shallow, SelfGravity>;

/// A physical system together with the scheme exponents that shape its
/// mollified potential and its continuity source.
struct StateLaw {
    LawVariant system;
    MollifierShape mollifier = MollifierShape::smooth_bump();
    double alpha = 0.1;  // smooth-bump width eps^alpha
    double beta = 1.0;   // continuity source eps^beta (isothermal and selfgravity only)
};

/// "isothermal", "isentropic", "shallow" or "selfgravity".
std::string system_name(const StateLaw& law);

/// eps^beta for the systems that carry the source term, 0 otherwise.
double beta_term(const StateLaw& law, double eps);

/// Mollifier width eps^alpha for smooth-bump kernels; eps for three-cell.
double mollifier_width(const StateLaw& law, double eps);

enum class ConstraintMode { strict, relaxed };

class ConstraintError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Convergence hypotheses of the method that `law` violates, one message
/// each, e.g. "α < 1/6 required for isothermal, got 0.2".
std::vector<std::string> hypothesis_violations(const StateLaw& law);

/// Throws ConstraintError for parameters the formulas cannot use (gamma
/// outside (1, 2], nonpositive g, ...) and, in strict mode, for the first
/// hypothesis violation. In relaxed mode returns the violations as warnings.
std::vector<std::string> validate(const StateLaw& law, ConstraintMode mode);

/// Factor c in Laplacian(Phi_grav) = c G (rho - mean rho); 2 pi matches the
/// two-dimensional logarithmic kernel.
inline constexpr double gravity_source_factor = two_pi;

/// Periodic Poisson solver backed by FFTW. Plans are made once per torus.
/// An instance is not safe for concurrent use; give each thread its own.
class GravitySolver {
public:
    explicit GravitySolver(const Torus& torus);
    ~GravitySolver();
    GravitySolver(GravitySolver&&) noexcept;
    GravitySolver& operator=(GravitySolver&&) noexcept;
    GravitySolver(const GravitySolver&) = delete;
    GravitySolver& operator=(const GravitySolver&) = delete;

    const Torus& torus() const noexcept;

    /// Zero-mean Phi with Laplacian(Phi) = c G (rho - mean rho).
    PeriodicField potential(const PeriodicField& rho, double G);

    /// Spectral gradient of potential(rho, G), one field per axis.
    AxisFields gradient(const PeriodicField& rho, double G);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper building a one-off solver.
PeriodicField gravity_potential(const PeriodicField& rho, double G);

/// Evaluates Phi and grad Phi for one law on one grid, caching the
/// mollifier, bottom data and gravity plans.
class PotentialOperator {
public:
    PotentialOperator(StateLaw law, const Torus& torus, double eps);

    const StateLaw& law() const noexcept { return law_; }
    const Mollifier& mollifier() const noexcept { return mollifier_; }
    double eps() const noexcept { return eps_; }

    PeriodicField potential(const PeriodicField& rho);
    AxisFields gradient(const PeriodicField& rho);

    /// The unmollified law evaluated pointwise (floor kept for log laws,
    /// exact gravity potential kept for selfgravity).
    PeriodicField exact_potential(const PeriodicField& rho);

private:
    /// Pointwise pressure potential before mollification.
    PeriodicField pressure_density(const PeriodicField& rho) const;

    StateLaw law_;
    Torus torus_;
    double eps_;
    Mollifier mollifier_;
    std::optional<PeriodicField> bottom_;
    AxisFields bottom_slope_;
    std::optional<GravitySolver> gravity_;
};

PeriodicField potential(const StateLaw& law, const PeriodicField& rho, double eps);
AxisFields potential_gradient(const StateLaw& law, const PeriodicField& rho, double eps);

}  // namespace weakflow
