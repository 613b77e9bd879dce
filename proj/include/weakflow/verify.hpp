#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weakflow/scheme.hpp"
#include "weakflow/statelaw.hpp"

namespace weakflow {

// ---------------------------------------------------------------- residuals

/// Smooth periodic test function psi with exact partial derivatives.
class TestFunction {
public:
    /// exp((cos(x - cx) - 1) / w^2) (times the same factor in y on a 2-D torus).
    static TestFunction bump(double cx, double width, double cy = 0.0);
    /// cos(kx x + ky y).
    static TestFunction trig(int kx, int ky = 0);

    /// Identifier used in residual reports, e.g. "bump:c=0.5:w=0.3" or "cos:k=1".
    const std::string& id() const noexcept { return id_; }

    double value(double x, double y = 0.0) const;
    double derivative(int axis, double x, double y = 0.0) const;

    PeriodicField values(const Torus& torus) const;
    AxisFields derivatives(const Torus& torus) const;

private:
    enum class Kind { bump, trig };
    Kind kind_ = Kind::bump;
    double cx_ = 0.0;
    double cy_ = 0.0;
    double width_ = 1.0;
    int kx_ = 0;
    int ky_ = 0;
    std::string id_;
};

/// Midpoint-rule values of the weak form at one instant.
struct WeakResiduals {
    double continuity = 0.0;        // int rho_t psi - int rho u . grad psi
    std::vector<double> momentum;   // int (rho u_c)_t psi - int rho u_c u . grad psi + int rho d_c Phi psi
    double state_law = 0.0;         // int (Phi - Phi_exact) psi
};

/// `rates` must be the scheme's time derivatives of `state` and `potential`
/// the operator used to produce them.
WeakResiduals weak_residual(const FlowState& state, const FlowRates& rates, PotentialOperator& potential,
                            const TestFunction& psi);

struct ResidualRecord {
    double eps;
    double t;
    std::string psi_id;
    std::string equation;  // continuity, momentum_x, momentum_y, state_law
    double value;

    friend bool operator==(const ResidualRecord&, const ResidualRecord&) = default;
};

class ResidualReport {
public:
    static constexpr const char* header = "eps,t,psi_id,equation,value";

    void add(double eps, double t, const std::string& psi_id, const WeakResiduals& r);
    void add(ResidualRecord record);
    void append(const ResidualReport& other);

    const std::vector<ResidualRecord>& records() const noexcept { return records_; }
    bool empty() const noexcept { return records_.empty(); }

    /// Header line then one record per line, numbers at full precision.
    void write_csv(std::ostream& out) const;
    static ResidualReport read_csv(std::istream& in);

    friend bool operator==(const ResidualReport&, const ResidualReport&) = default;

private:
    std::vector<ResidualRecord> records_;
};

struct DecayVerdict {
    std::string equation;
    std::string psi_id;
    double t;
    std::size_t points;
    double slope;  // d log|r| / d log eps; positive means the residual decays
    std::optional<double> theoretical_floor;
    bool pass;
};

/// Least-squares log-log slope per (equation, test function, time). Throws
/// std::invalid_argument when a group has fewer than three distinct eps.
std::vector<DecayVerdict> certify_decay(const ResidualReport& report,
                                        std::optional<double> theoretical_floor = std::nullopt);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------- oracles

struct RiemannSample {
    double rho;
    double u;
};

struct ShockWave {
    double speed;
    RiemannSample left;
    RiemannSample right;
};

/// Exact similarity solution of a 1-D Riemann problem, sampled at x/t.
class RiemannOracle {
public:
    virtual ~RiemannOracle() = default;

    virtual RiemannSample sample(double xi) const = 0;

    /// Slowest and fastest signal speeds. Fans that decay into vacuum without
    /// a finite edge are cut where density falls below tol * max density.
    virtual std::pair<double, double> extent(double tol) const = 0;

    virtual std::vector<ShockWave> shocks() const = 0;

    /// Mass and momentum fluxes at a state.
    virtual std::pair<double, double> flux(const RiemannSample& s) const = 0;

    /// The problem with the two states exchanged (left data on the right).
    virtual std::unique_ptr<RiemannOracle> swapped() const = 0;

    RiemannSample left_state() const noexcept { return left_; }
    RiemannSample right_state() const noexcept { return right_; }

protected:
    RiemannSample left_{};
    RiemannSample right_{};
};

/// Shallow water, including dry-bed states (h = 0).
class ShallowRiemann final : public RiemannOracle {
public:
    ShallowRiemann(double h_left, double u_left, double h_right, double u_right, double g);

    RiemannSample sample(double xi) const override;
    std::pair<double, double> extent(double tol) const override;
    std::vector<ShockWave> shocks() const override;
    std::pair<double, double> flux(const RiemannSample& s) const override;
    std::unique_ptr<RiemannOracle> swapped() const override;

    double star_depth() const noexcept { return h_star_; }
    double star_velocity() const noexcept { return u_star_; }
    /// True when the solution contains a dry region.
    bool has_dry_region() const noexcept { return pattern_ != Pattern::wet; }

private:
    enum class Pattern { wet, dry_left, dry_right, dry_middle };
    double g_;
    Pattern pattern_ = Pattern::wet;
    double h_star_ = 0.0;
    double u_star_ = 0.0;
};

/// Isothermal gas with sound speed sqrt(K), including vacuum states.
class IsothermalRiemann final : public RiemannOracle {
public:
    IsothermalRiemann(double rho_left, double u_left, double rho_right, double u_right, double K);

    RiemannSample sample(double xi) const override;
    std::pair<double, double> extent(double tol) const override;
    std::vector<ShockWave> shocks() const override;
    std::pair<double, double> flux(const RiemannSample& s) const override;
    std::unique_ptr<RiemannOracle> swapped() const override;

    double star_density() const noexcept { return rho_star_; }
    double star_velocity() const noexcept { return u_star_; }

private:
    double K_;
    double c_;
    double rho_star_ = 0.0;
    double u_star_ = 0.0;
};

enum class OracleField { density, velocity };

struct OracleWindow {
    double lo;  // offsets from the jump position x0
    double hi;
};

/// Part of the torus around x0 where the single Riemann solution is valid at
/// time t, given the wrap-around jump at x0 + pi. Throws std::domain_error
/// when the waves of the two problems have met.
OracleWindow oracle_window(const RiemannOracle& oracle, double t, double tol = 1e-6);

struct OracleError {
    double l1;                 // mean absolute error over the window
    double linf_away;          // max error excluding 5 cells around each shock
    OracleWindow window;
    std::size_t cells;
};

OracleError compare_to_oracle(const PeriodicField& field, double t, const RiemannOracle& oracle, double x0,
                              OracleField which, double tol = 1e-6);
OracleError compare_to_oracle(const FlowState& state, double t, const RiemannOracle& oracle, double x0,
                              OracleField which, double tol = 1e-6);

/// First x in [lo, hi] (scanning left to right) where f crosses `level`,
/// linearly interpolated between cell centers; NaN when there is none.
double level_crossing(const PeriodicField& f, double level, double lo, double hi);

/// Distance between the crossings of 10% and 90% of `reference` in [lo, hi].
double front_width(const PeriodicField& f, double reference, double lo, double hi);

}  // namespace weakflow
