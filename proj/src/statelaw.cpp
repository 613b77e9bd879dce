#include "weakflow/statelaw.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include "weakflow/scheme.hpp"

namespace weakflow {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string format_number(double v)
{
    std::ostringstream out;
    out << v;
    return out.str();
}

void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw ConstraintError(message);
    }
}

bool is_finite(double v) { return std::isfinite(v); }

void check_floor_law(const char* name, double K, double N, double beta)
{
    require(is_finite(K) && K >= 0.0, std::string("K ≥ 0 required for ") + name + ", got " + format_number(K));
    require(is_finite(N) && N > 0.0, std::string("N > 0 required for ") + name + ", got " + format_number(N));
    require(is_finite(beta) && beta >= 0.0,
            std::string("β ≥ 0 required for ") + name + ", got " + format_number(beta));
}

PeriodicField scaled_sum(const PeriodicField& a, double s, const PeriodicField& b)
{
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] + s * b[i];
    }
    return PeriodicField(a.torus(), std::move(out));
}

}  // namespace

// ---------------------------------------------------------------- Bottom

Bottom Bottom::analytic(Function a, Function da_dx, Function da_dy)
{
    if (!a || !da_dx) {
        throw std::invalid_argument("analytic bottom needs a value and an x-derivative");
    }
    Bottom b;
    b.value_ = std::move(a);
    b.dx_ = std::move(da_dx);
    b.dy_ = std::move(da_dy);
    return b;
}

Bottom Bottom::sampled(PeriodicField a)
{
    Bottom b;
    b.samples_ = std::move(a);
    return b;
}

bool Bottom::is_flat() const noexcept { return !value_ && !samples_; }

PeriodicField Bottom::elevation(const Torus& torus) const
{
    if (samples_) {
        if (!(samples_->torus() == torus)) {
            throw std::invalid_argument("sampled bottom lives on a different torus");
        }
        return *samples_;
    }
    if (value_) {
        return PeriodicField::sample(torus, value_);
    }
    return PeriodicField(torus, 0.0);
}

AxisFields Bottom::slope(const Torus& torus) const
{
    AxisFields out;
    if (samples_) {
        const PeriodicField a = elevation(torus);
        for (int axis = 0; axis < torus.dim(); ++axis) {
            out.push_back(centered_difference(a, axis));
        }
        return out;
    }
    if (value_) {
        out.push_back(PeriodicField::sample(torus, dx_));
        if (torus.dim() == 2) {
            if (!dy_) {
                throw std::invalid_argument("analytic bottom on a 2-D torus needs a y-derivative");
            }
            out.push_back(PeriodicField::sample(torus, dy_));
        }
        return out;
    }
    for (int axis = 0; axis < torus.dim(); ++axis) {
        out.emplace_back(torus, 0.0);
    }
    return out;
}

// ---------------------------------------------------------------- law metadata

std::string system_name(const StateLaw& law)
{
    return std::visit(overloaded{[](const Isothermal&) { return std::string("isothermal"); },
                                 [](const Isentropic&) { return std::string("isentropic"); },
                                 [](const Shallow&) { return std::string("shallow"); },
                                 [](const SelfGravity&) { return std::string("selfgravity"); }},
                      law.system);
}

double beta_term(const StateLaw& law, double eps)
{
    const bool has_source =
        std::holds_alternative<Isothermal>(law.system) || std::holds_alternative<SelfGravity>(law.system);
    return has_source ? std::pow(eps, law.beta) : 0.0;
}

double mollifier_width(const StateLaw& law, double eps)
{
    if (law.mollifier.kind == MollifierKind::three_cell) {
        return eps;
    }
    return std::pow(eps, law.alpha);
}

std::vector<std::string> hypothesis_violations(const StateLaw& law)
{
    std::vector<std::string> out;
    const std::string name = system_name(law);
    const bool smooth = law.mollifier.kind == MollifierKind::smooth_bump;
    const bool log_law =
        std::holds_alternative<Isothermal>(law.system) || std::holds_alternative<SelfGravity>(law.system);

    if (smooth) {
        if (log_law && !(law.alpha < 1.0 / 6.0)) {
            out.push_back("α < 1/6 required for " + name + ", got " + format_number(law.alpha));
        }
        if (!log_law && !(law.alpha < 0.25)) {
            out.push_back("α < 1/4 required for " + name + ", got " + format_number(law.alpha));
        }
    }
    if (log_law) {
        const double N = std::holds_alternative<Isothermal>(law.system) ? std::get<Isothermal>(law.system).N
                                                                        : std::get<SelfGravity>(law.system).N;
        // A three-cell average has fixed width, so it contributes no eps^-alpha growth.
        const double a = smooth ? law.alpha : 0.0;
        if (!(3.0 * a + law.beta < N - 1.0)) {
            out.push_back("3α + β < N − 1 required for " + name + ", got 3·" + format_number(a) + " + " +
                          format_number(law.beta) + " = " + format_number(3.0 * a + law.beta) + " with N − 1 = " +
                          format_number(N - 1.0));
        }
    }
    return out;
}

std::vector<std::string> validate(const StateLaw& law, ConstraintMode mode)
{
    std::visit(overloaded{[&](const Isothermal& p) { check_floor_law("isothermal", p.K, p.N, law.beta); },
                          [&](const Isentropic& p) {
                              require(is_finite(p.K) && p.K >= 0.0,
                                      "K ≥ 0 required for isentropic, got " + format_number(p.K));
                              require(p.gamma > 1.0 && p.gamma <= 2.0,
                                      "γ ∈ (1, 2] required for isentropic, got " + format_number(p.gamma));
                          },
                          [&](const Shallow& p) {
                              require(is_finite(p.g) && p.g > 0.0,
                                      "g > 0 required for shallow, got " + format_number(p.g));
                          },
                          [&](const SelfGravity& p) {
                              check_floor_law("selfgravity", p.K, p.N, law.beta);
                              require(is_finite(p.G) && p.G >= 0.0,
                                      "G ≥ 0 required for selfgravity, got " + format_number(p.G));
                          }},
               law.system);

    if (law.mollifier.kind == MollifierKind::smooth_bump) {
        require(law.alpha > 0.0 && law.alpha < 1.0,
                "α ∈ (0, 1) required for a smooth-bump mollifier, got " + format_number(law.alpha));
    } else {
        require(law.mollifier.weight > 0.0 && law.mollifier.weight < 0.5,
                "three-cell weight in (0, 1/2) required, got " + format_number(law.mollifier.weight));
    }

    auto violations = hypothesis_violations(law);
    if (mode == ConstraintMode::strict && !violations.empty()) {
        throw ConstraintError(violations.front());
    }
    return violations;
}

// ---------------------------------------------------------------- gravity

struct GravitySolver::Impl {
    Torus torus;
    std::size_t n = 0;
    std::size_t n_complex = 0;
    double* real = nullptr;
    fftw_complex* spectrum = nullptr;
    fftw_complex* work = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    explicit Impl(const Torus& t) : torus(t)
    {
        const std::size_t m = torus.cells_per_axis();
        n = torus.size();
        n_complex = (torus.dim() == 1 ? 1 : m) * (m / 2 + 1);
        const int mi = static_cast<int>(m);

        std::lock_guard lock(fftw_planner_mutex());
        real = fftw_alloc_real(n);
        spectrum = fftw_alloc_complex(n_complex);
        work = fftw_alloc_complex(n_complex);
        if (!real || !spectrum || !work) {
            release();
            throw std::bad_alloc();
        }
        if (torus.dim() == 1) {
            forward = fftw_plan_dft_r2c_1d(mi, real, spectrum, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r_1d(mi, work, real, FFTW_ESTIMATE);
        } else {
            forward = fftw_plan_dft_r2c_2d(mi, mi, real, spectrum, FFTW_ESTIMATE);
            backward = fftw_plan_dft_c2r_2d(mi, mi, work, real, FFTW_ESTIMATE);
        }
        if (!forward || !backward) {
            release();
            throw std::runtime_error("FFTW could not create a plan");
        }
    }

    ~Impl()
    {
        std::lock_guard lock(fftw_planner_mutex());
        release();
    }

    Impl(const Impl&) = delete;
    Impl& operator=(const Impl&) = delete;

    void release() noexcept
    {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        fftw_free(real);
        fftw_free(spectrum);
        fftw_free(work);
        forward = backward = nullptr;
        real = nullptr;
        spectrum = work = nullptr;
    }

    /// Signed integer wavenumbers of complex slot j.
    std::pair<double, double> wavenumber(std::size_t j) const
    {
        const std::size_t m = torus.cells_per_axis();
        const std::size_t half = m / 2 + 1;
        const auto kx = static_cast<double>(j % half);
        if (torus.dim() == 1) {
            return {kx, 0.0};
        }
        const std::size_t row = j / half;
        const double ky = row <= m / 2 ? static_cast<double>(row) : static_cast<double>(row) - static_cast<double>(m);
        return {kx, ky};
    }

    bool is_nyquist(double k) const
    {
        const std::size_t m = torus.cells_per_axis();
        return m % 2 == 0 && std::abs(k) == static_cast<double>(m / 2);
    }

    /// Fills `spectrum` with the transform of Phi_grav.
    void transform_potential(const PeriodicField& rho, double G)
    {
        if (!(rho.torus() == torus)) {
            throw std::invalid_argument("gravity solve: density lives on a different torus");
        }
        const auto v = rho.values();
        std::copy(v.begin(), v.end(), real);
        fftw_execute(forward);
        const double scale = -gravity_source_factor * G / static_cast<double>(n);
        for (std::size_t j = 0; j < n_complex; ++j) {
            const auto [kx, ky] = wavenumber(j);
            const double k2 = kx * kx + ky * ky;
            const double f = k2 == 0.0 ? 0.0 : scale / k2;
            spectrum[j][0] *= f;
            spectrum[j][1] *= f;
        }
    }

    PeriodicField inverse_from_work()
    {
        fftw_execute(backward);
        PeriodicField out(torus, std::vector<double>(real, real + n));
        return out;
    }
};

GravitySolver::GravitySolver(const Torus& torus) : impl_(std::make_unique<Impl>(torus)) {}
GravitySolver::~GravitySolver() = default;
GravitySolver::GravitySolver(GravitySolver&&) noexcept = default;
GravitySolver& GravitySolver::operator=(GravitySolver&&) noexcept = default;

const Torus& GravitySolver::torus() const noexcept { return impl_->torus; }

PeriodicField GravitySolver::potential(const PeriodicField& rho, double G)
{
    impl_->transform_potential(rho, G);
    std::copy(&impl_->spectrum[0][0], &impl_->spectrum[0][0] + 2 * impl_->n_complex, &impl_->work[0][0]);
    return impl_->inverse_from_work();
}

AxisFields GravitySolver::gradient(const PeriodicField& rho, double G)
{
    impl_->transform_potential(rho, G);
    AxisFields out;
    for (int axis = 0; axis < impl_->torus.dim(); ++axis) {
        for (std::size_t j = 0; j < impl_->n_complex; ++j) {
            const auto [kx, ky] = impl_->wavenumber(j);
            const double k = axis == 0 ? kx : ky;
            // Multiply by i k; the Nyquist mode has no real derivative and is dropped.
            const double f = impl_->is_nyquist(k) ? 0.0 : k;
            impl_->work[j][0] = -f * impl_->spectrum[j][1];
            impl_->work[j][1] = f * impl_->spectrum[j][0];
        }
        out.push_back(impl_->inverse_from_work());
    }
    return out;
}

PeriodicField gravity_potential(const PeriodicField& rho, double G)
{
    GravitySolver solver(rho.torus());
    return solver.potential(rho, G);
}

// ---------------------------------------------------------------- potentials

PotentialOperator::PotentialOperator(StateLaw law, const Torus& torus, double eps)
    : law_(std::move(law)), torus_(torus), eps_(eps),
      mollifier_(make_mollifier(mollifier_width(law_, eps), torus, law_.mollifier))
{
    require_cell_width(torus, eps, "state law");
    validate(law_, ConstraintMode::relaxed);
    if (const auto* s = std::get_if<Shallow>(&law_.system)) {
        if (!s->bottom.is_flat()) {
            bottom_ = s->bottom.elevation(torus);
            bottom_slope_ = s->bottom.slope(torus);
        }
    }
    if (std::holds_alternative<SelfGravity>(law_.system)) {
        gravity_.emplace(torus);
    }
}

PeriodicField PotentialOperator::pressure_density(const PeriodicField& rho) const
{
    if (!(rho.torus() == torus_)) {
        throw std::invalid_argument("state law: density lives on a different torus");
    }
    std::vector<double> out(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < 0.0) {
            throw PositivityError(i, rho[i]);
        }
    }
    std::visit(overloaded{[&](const Isothermal& p) {
                              const double floor = std::pow(eps_, p.N);
                              for (std::size_t i = 0; i < rho.size(); ++i) out[i] = p.K * std::log(rho[i] + floor);
                          },
                          [&](const SelfGravity& p) {
                              const double floor = std::pow(eps_, p.N);
                              for (std::size_t i = 0; i < rho.size(); ++i) out[i] = p.K * std::log(rho[i] + floor);
                          },
                          [&](const Isentropic& p) {
                              const double c = p.K * p.gamma / (p.gamma - 1.0);
                              for (std::size_t i = 0; i < rho.size(); ++i) {
                                  out[i] = c * std::pow(rho[i], p.gamma - 1.0);
                              }
                          },
                          [&](const Shallow& p) {
                              for (std::size_t i = 0; i < rho.size(); ++i) out[i] = p.g * rho[i];
                          }},
               law_.system);
    return PeriodicField(torus_, std::move(out));
}

PeriodicField PotentialOperator::potential(const PeriodicField& rho)
{
    PeriodicField phi = convolve(pressure_density(rho), mollifier_);
    if (const auto* s = std::get_if<Shallow>(&law_.system); s && bottom_) {
        phi = scaled_sum(phi, s->g, *bottom_);
    }
    if (const auto* sg = std::get_if<SelfGravity>(&law_.system)) {
        phi = scaled_sum(phi, 1.0, convolve(gravity_->potential(rho, sg->G), mollifier_));
    }
    phi.require_finite("potential");
    return phi;
}

AxisFields PotentialOperator::gradient(const PeriodicField& rho)
{
    const PeriodicField p = pressure_density(rho);
    AxisFields grad;
    if (mollifier_.has_derivative()) {
        for (int axis = 0; axis < torus_.dim(); ++axis) {
            grad.push_back(convolve_derivative(p, mollifier_, axis));
        }
    } else {
        const PeriodicField smoothed = convolve(p, mollifier_);
        for (int axis = 0; axis < torus_.dim(); ++axis) {
            grad.push_back(centered_difference(smoothed, axis));
        }
    }
    if (const auto* s = std::get_if<Shallow>(&law_.system); s && bottom_) {
        for (std::size_t axis = 0; axis < grad.size(); ++axis) {
            grad[axis] = scaled_sum(grad[axis], s->g, bottom_slope_[axis]);
        }
    }
    if (const auto* sg = std::get_if<SelfGravity>(&law_.system)) {
        const AxisFields field = gravity_->gradient(rho, sg->G);
        for (std::size_t axis = 0; axis < grad.size(); ++axis) {
            grad[axis] = scaled_sum(grad[axis], 1.0, convolve(field[axis], mollifier_));
        }
    }
    for (const auto& g : grad) {
        g.require_finite("potential gradient");
    }
    return grad;
}

PeriodicField PotentialOperator::exact_potential(const PeriodicField& rho)
{
    PeriodicField phi = pressure_density(rho);
    if (const auto* s = std::get_if<Shallow>(&law_.system); s && bottom_) {
        phi = scaled_sum(phi, s->g, *bottom_);
    }
    if (const auto* sg = std::get_if<SelfGravity>(&law_.system)) {
        phi = scaled_sum(phi, 1.0, gravity_->potential(rho, sg->G));
    }
    return phi;
}

PeriodicField potential(const StateLaw& law, const PeriodicField& rho, double eps)
{
    PotentialOperator op(law, rho.torus(), eps);
    return op.potential(rho);
}

AxisFields potential_gradient(const StateLaw& law, const PeriodicField& rho, double eps)
{
    PotentialOperator op(law, rho.torus(), eps);
    return op.gradient(rho);
}

}  // namespace weakflow
