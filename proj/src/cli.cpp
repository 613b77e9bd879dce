#include "weakflow/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "weakflow/expression.hpp"

namespace weakflow::cli {

namespace fs = std::filesystem;

namespace {

constexpr double machine_eps = std::numeric_limits<double>::epsilon();

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        out.push_back(trim(cur));
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

/// Shortest text that reads back to the same double.
std::string num(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Fixed %.17g form used in data files.
std::string full(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& text, const std::string& what)
{
    const std::string t = trim(text);
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (!t.empty() && *begin == '+') {
        ++begin;
    }
    const auto r = std::from_chars(begin, end, v);
    if (t.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) {
        throw std::invalid_argument(what + ": expected a finite number, got '" + t + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& what)
{
    const std::string t = trim(text);
    std::size_t v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
        throw std::invalid_argument(what + ": expected a nonnegative integer, got '" + t + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const auto& item : split(text, ',')) {
        out.push_back(parse_double(item, what));
    }
    return out;
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + num(v[i]);
    }
    return s;
}

RiemannSample parse_pair(const std::string& text, const std::string& what)
{
    const auto parts = split(text, ',');
    if (parts.size() != 2) {
        throw std::invalid_argument(what + ": expected 'density,velocity', got '" + text + "'");
    }
    return {parse_double(parts[0], what), parse_double(parts[1], what)};
}

/// Times in summary keys are step * dt; ten digits hide the rounding.
std::string format_time(double t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", t);
    return buf;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return f;
}

std::ifstream open_in(const fs::path& path)
{
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot read " + path.string());
    }
    return f;
}

std::string snapshot_file(std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%03zu.csv", k);
    return buf;
}

std::string oracle_file(std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "oracle_%03zu.csv", k);
    return buf;
}

bool is_log_law(const std::string& system)
{
    return system == "isothermal" || system == "selfgravity";
}

}  // namespace

// ---------------------------------------------------------------- scenario

void Scenario::set(const std::string& raw_key, const std::string& raw_value)
{
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    const auto expression = [&](std::string& target) {
        Expression::parse(value);
        target = value;
    };
    if (key == "name") {
        name = value;
    } else if (key == "system") {
        if (value != "isothermal" && value != "isentropic" && value != "shallow" && value != "selfgravity") {
            throw std::invalid_argument("system must be isothermal, isentropic, shallow or selfgravity, got '" +
                                        value + "'");
        }
        system = value;
    } else if (key == "dim") {
        const std::size_t d = parse_count(value, key);
        if (d != 1 && d != 2) {
            throw std::invalid_argument("dim must be 1 or 2, got " + value);
        }
        dim = static_cast<int>(d);
    } else if (key == "cells") {
        cells = parse_count(value, key);
    } else if (key == "law.K") {
        K = parse_double(value, key);
    } else if (key == "law.N") {
        N = parse_double(value, key);
    } else if (key == "law.gamma") {
        gamma = parse_double(value, key);
    } else if (key == "law.g") {
        g = parse_double(value, key);
    } else if (key == "law.G") {
        G = parse_double(value, key);
    } else if (key == "scheme.mollifier") {
        if (value != "smooth-bump" && value != "three-cell") {
            throw std::invalid_argument("scheme.mollifier must be smooth-bump or three-cell, got '" + value + "'");
        }
        mollifier = value;
    } else if (key == "scheme.weight") {
        weight = parse_double(value, key);
    } else if (key == "scheme.alpha") {
        alpha = parse_double(value, key);
    } else if (key == "scheme.beta") {
        beta = parse_double(value, key);
    } else if (key == "scheme.delta") {
        delta = parse_double(value, key);
    } else if (key == "scheme.rho_min") {
        rho_min = parse_double(value, key);
    } else if (key == "scheme.constraints") {
        if (value == "strict") {
            constraints = ConstraintMode::strict;
        } else if (value == "relaxed") {
            constraints = ConstraintMode::relaxed;
        } else {
            throw std::invalid_argument("scheme.constraints must be strict or relaxed, got '" + value + "'");
        }
    } else if (key == "ic.rho") {
        expression(rho);
    } else if (key == "ic.u") {
        expression(u);
    } else if (key == "ic.v") {
        expression(v);
    } else if (key == "ic.smoothing") {
        smoothing = parse_double(value, key);
    } else if (key == "bottom") {
        expression(bottom);
    } else if (key == "riemann.left" || key == "riemann.right") {
        const RiemannSample p = parse_pair(value, key);
        RiemannData d = riemann.value_or(RiemannData{});
        if (key == "riemann.left") {
            d.rho_left = p.rho;
            d.u_left = p.u;
        } else {
            d.rho_right = p.rho;
            d.u_right = p.u;
        }
        riemann = d;
    } else if (key == "run.dt") {
        dt = parse_double(value, key);
    } else if (key == "run.t_final") {
        t_final = parse_double(value, key);
    } else if (key == "run.method") {
        method = parse_method(value);
    } else if (key == "run.snapshots") {
        snapshots = parse_list(value, key);
    } else if (key == "run.monitor_every") {
        monitor_every = parse_count(value, key);
    } else {
        throw std::invalid_argument("unknown scenario key '" + key + "'");
    }
}

std::string Scenario::to_text() const
{
    std::ostringstream o;
    o << "name = " << name << '\n';
    o << "system = " << system << '\n';
    o << "dim = " << dim << '\n';
    o << "cells = " << cells << '\n';
    o << "law.K = " << num(K) << '\n';
    o << "law.N = " << num(N) << '\n';
    o << "law.gamma = " << num(gamma) << '\n';
    o << "law.g = " << num(g) << '\n';
    o << "law.G = " << num(G) << '\n';
    o << "scheme.mollifier = " << mollifier << '\n';
    o << "scheme.weight = " << num(weight) << '\n';
    o << "scheme.alpha = " << num(alpha) << '\n';
    o << "scheme.beta = " << num(beta) << '\n';
    o << "scheme.delta = " << num(delta) << '\n';
    o << "scheme.rho_min = " << num(rho_min) << '\n';
    o << "scheme.constraints = " << (constraints == ConstraintMode::strict ? "strict" : "relaxed") << '\n';
    if (riemann) {
        o << "riemann.left = " << num(riemann->rho_left) << ',' << num(riemann->u_left) << '\n';
        o << "riemann.right = " << num(riemann->rho_right) << ',' << num(riemann->u_right) << '\n';
    }
    if (!rho.empty()) {
        o << "ic.rho = " << rho << '\n';
    }
    if (!u.empty()) {
        o << "ic.u = " << u << '\n';
    }
    o << "ic.v = " << v << '\n';
    o << "ic.smoothing = " << num(smoothing) << '\n';
    o << "bottom = " << bottom << '\n';
    o << "run.dt = " << num(dt) << '\n';
    o << "run.t_final = " << num(t_final) << '\n';
    o << "run.method = " << method_name(method) << '\n';
    o << "run.snapshots = " << join(snapshots) << '\n';
    o << "run.monitor_every = " << monitor_every << '\n';
    return o.str();
}

double Scenario::eps() const
{
    return two_pi / static_cast<double>(cells);
}

Torus Scenario::torus() const
{
    return Torus(dim, cells);
}

StateLaw Scenario::law() const
{
    StateLaw law;
    if (system == "isothermal") {
        law.system = Isothermal{K, N};
    } else if (system == "isentropic") {
        law.system = Isentropic{K, gamma};
    } else if (system == "shallow") {
        const Expression a = Expression::parse(bottom);
        Bottom b;
        if (!(a.is_constant() && a(0.0, 0.0) == 0.0)) {
            const Expression ax = a.derivative(0);
            const Expression ay = a.derivative(1);
            b = Bottom::analytic([a](double x, double y) { return a(x, y); },
                                 [ax](double x, double y) { return ax(x, y); },
                                 [ay](double x, double y) { return ay(x, y); });
        }
        law.system = Shallow{g, b};
    } else {
        law.system = SelfGravity{K, N, G};
    }
    law.mollifier = mollifier == "three-cell" ? MollifierShape::three_cell(weight) : MollifierShape::smooth_bump();
    law.alpha = alpha;
    law.beta = beta;
    return law;
}

SplitConfig Scenario::split() const
{
    return SplitConfig{delta};
}

RunConfig Scenario::run_config() const
{
    return RunConfig{dt, t_final, method, snapshots, monitor_every};
}

std::vector<std::string> Scenario::validate() const
{
    const Torus t = torus();
    const StateLaw l = law();
    std::vector<std::string> warnings = weakflow::validate(l, constraints);
    make_mollifier(mollifier_width(l, eps()), t, l.mollifier);
    if (!(delta >= 0.0)) {
        throw std::invalid_argument("scheme.delta ≥ 0 required, got " + num(delta));
    }
    if (!(rho_min >= 0.0)) {
        throw std::invalid_argument("scheme.rho_min ≥ 0 required, got " + num(rho_min));
    }
    if (!(smoothing >= 0.0 && smoothing < 0.5)) {
        throw std::invalid_argument("ic.smoothing ∈ [0, 1/2) required, got " + num(smoothing));
    }
    if (rho.empty() && !riemann) {
        throw std::invalid_argument("initial density missing: set ic.rho or riemann.left/riemann.right");
    }
    if (riemann && dim != 1) {
        throw std::invalid_argument("riemann data requires dim = 1");
    }
    if (system != "shallow" && bottom != "0") {
        throw std::invalid_argument("bottom elevation only applies to system = shallow");
    }
    if (monitor_every == 0) {
        throw std::invalid_argument("run.monitor_every ≥ 1 required");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("run.dt > 0 required, got " + num(dt));
    }
    step_count(dt, t_final);
    for (double ts : snapshots) {
        if (!(ts >= 0.0 && ts <= t_final)) {
            throw std::invalid_argument("snapshot time " + num(ts) + " outside [0, " + num(t_final) + "]");
        }
        step_count(dt, ts);
    }
    initial_state();
    return warnings;
}

FlowState Scenario::initial_state() const
{
    const Torus t = torus();
    std::string rho_text = rho;
    std::string u_text = u;
    if (riemann) {
        if (rho_text.empty()) {
            rho_text = "pw(x, " + num(riemann->rho_left) + ", " + num(riemann->rho_right) + ")";
        }
        if (u_text.empty()) {
            u_text = "pw(x, " + num(riemann->u_left) + ", " + num(riemann->u_right) + ")";
        }
    }
    if (u_text.empty()) {
        u_text = "0";
    }
    const Expression er = Expression::parse(rho_text);
    const Expression eu = Expression::parse(u_text);
    const Expression ev = Expression::parse(v);

    PeriodicField r = PeriodicField::sample(t, [&](double x, double y) { return std::max(er(x, y), rho_min); });
    AxisFields vel{PeriodicField::sample(t, [&](double x, double y) { return eu(x, y); })};
    if (dim == 2) {
        vel.push_back(PeriodicField::sample(t, [&](double x, double y) { return ev(x, y); }));
    }
    if (smoothing > 0.0) {
        const Mollifier m = make_mollifier(0.0, t, MollifierShape::three_cell(smoothing));
        r = convolve(r, m);
        for (auto& f : vel) {
            f = convolve(f, m);
        }
    }
    if (!(r.min() > 0.0)) {
        throw std::invalid_argument("initial density must be positive in every cell, minimum is " + num(r.min()) +
                                    " (raise scheme.rho_min)");
    }
    AxisFields mom;
    for (const auto& f : vel) {
        PeriodicField m(t, 0.0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            m[i] = r[i] * f[i];
        }
        mom.push_back(std::move(m));
    }
    return FlowState::make(std::move(r), std::move(mom));
}

std::unique_ptr<RiemannOracle> Scenario::oracle() const
{
    if (!riemann || dim != 1) {
        return nullptr;
    }
    const RiemannData& d = *riemann;
    if (system == "shallow" && Expression::parse(bottom).is_constant()) {
        return std::make_unique<ShallowRiemann>(d.rho_left, d.u_left, d.rho_right, d.u_right, g);
    }
    if (system == "isothermal") {
        return std::make_unique<IsothermalRiemann>(d.rho_left, d.u_left, d.rho_right, d.u_right, K);
    }
    return nullptr;
}

Scenario parse_scenario(std::istream& in, const std::string& name)
{
    Scenario s;
    s.name = name;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            s.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return s;
}

// ---------------------------------------------------------------- presets

namespace {

struct PresetEntry {
    const char* name;
    const char* text;
};

// Parameters are those of the published figures; see the README for the
// choices made where the figures leave a value open.
const PresetEntry preset_table[] = {
    {"bouchut-vacuum",
     "system = isothermal\n"
     "cells = 2000\n"
     "law.K = 0.04\n"
     "law.N = 2\n"
     "scheme.mollifier = three-cell\n"
     "scheme.weight = 0.3\n"
     "scheme.beta = 10\n"
     "scheme.delta = 0\n"
     "scheme.rho_min = 1e-6\n"
     "scheme.constraints = relaxed\n"
     "riemann.left = 0,0\n"
     "riemann.right = 1,0\n"
     "run.dt = 2e-5\n"
     "run.t_final = 0.5\n"
     "run.snapshots = 0.25\n"
     "run.monitor_every = 250\n"},
    {"toro-swe-1",
     "system = shallow\n"
     "cells = 500\n"
     "law.g = 9.8\n"
     "scheme.mollifier = three-cell\n"
     "scheme.weight = 0.1\n"
     "scheme.delta = 0\n"
     "scheme.beta = 0\n"
     "riemann.left = 1,2.5\n"
     "riemann.right = 0.1,0\n"
     "run.dt = 1e-4\n"
     "run.t_final = 0.4\n"
     "run.snapshots = 0.2\n"
     "run.monitor_every = 40\n"},
    {"toro-swe-2",
     "system = shallow\n"
     "cells = 2000\n"
     "law.g = 9.8\n"
     "scheme.mollifier = three-cell\n"
     "scheme.weight = 0.1\n"
     "scheme.delta = 1\n"
     "scheme.beta = 0\n"
     "ic.smoothing = 0.1\n"
     "riemann.left = 1,-5\n"
     "riemann.right = 1,5\n"
     "run.dt = 4e-5\n"
     "run.t_final = 0.25\n"
     "run.snapshots = 0.1\n"
     "run.monitor_every = 125\n"},
    {"toro-swe-3",
     "system = shallow\n"
     "cells = 5000\n"
     "law.g = 9.8\n"
     "scheme.mollifier = three-cell\n"
     "scheme.weight = 0.1\n"
     "scheme.delta = 0.5\n"
     "scheme.beta = 0\n"
     "scheme.rho_min = 1e-10\n"
     "ic.smoothing = 0.1\n"
     "riemann.left = 1,0\n"
     "riemann.right = 0,0\n"
     "run.dt = 8e-6\n"
     "run.t_final = 0.5\n"
     "run.snapshots = 0.2\n"
     "run.monitor_every = 625\n"},
    {"jeans-1d",
     "system = selfgravity\n"
     "cells = 512\n"
     "law.K = 1\n"
     "law.N = 2\n"
     "law.G = 0.5\n"
     "scheme.mollifier = smooth-bump\n"
     "scheme.alpha = 0.1\n"
     "scheme.beta = 0.5\n"
     "scheme.delta = 0\n"
     "scheme.constraints = strict\n"
     "ic.rho = 1 + 0.01*cos(x)\n"
     "ic.u = 0\n"
     "run.dt = 1e-3\n"
     "run.t_final = 2\n"
     "run.snapshots = 1\n"
     "run.monitor_every = 20\n"},
};

}  // namespace

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& p : preset_table) {
            n.emplace_back(p.name);
        }
        return n;
    }();
    return names;
}

bool is_preset(const std::string& name)
{
    const auto& n = preset_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

Scenario preset(const std::string& name)
{
    for (const auto& p : preset_table) {
        if (name == p.name) {
            std::istringstream in(p.text);
            return parse_scenario(in, name);
        }
    }
    std::string known;
    for (const auto& n : preset_names()) {
        known += (known.empty() ? "" : ", ") + n;
    }
    throw std::invalid_argument("unknown preset '" + name + "' (known: " + known + ")");
}

Scenario load_scenario(const std::string& name_or_path)
{
    if (is_preset(name_or_path)) {
        return preset(name_or_path);
    }
    const fs::path p(name_or_path);
    if (!fs::exists(p)) {
        throw std::invalid_argument("'" + name_or_path + "' is neither a preset nor a scenario file");
    }
    std::ifstream in = open_in(p);
    return parse_scenario(in, p.stem().string());
}

void apply_override(Scenario& s, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("override '" + assignment + "' must have the form key=value");
    }
    s.set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

// ---------------------------------------------------------------- fields

std::vector<TestFunction> residual_test_functions(int dim)
{
    if (dim == 1) {
        return {TestFunction::bump(-1.0, 0.5), TestFunction::bump(1.5, 0.8), TestFunction::trig(1)};
    }
    return {TestFunction::bump(-1.0, 0.5, 0.5), TestFunction::bump(1.5, 0.8, -1.0), TestFunction::trig(1, 1)};
}

FlowState canonical_state(const FlowState& s)
{
    const AxisFields u = recover_velocity(s);
    AxisFields mom;
    for (const auto& f : u) {
        PeriodicField m(s.torus(), 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) {
            m[i] = s.rho[i] * f[i];
        }
        mom.push_back(std::move(m));
    }
    return FlowState::make(s.rho, std::move(mom));
}

WeakResiduals canonical_residual(Integrator& integrator, const FlowState& canonical, const TestFunction& psi)
{
    return weak_residual(canonical, integrator.rates(canonical), integrator.potential(), psi);
}

void dump_fields(const FlowState& s, std::ostream& out)
{
    const Torus& t = s.torus();
    const AxisFields u = recover_velocity(s);
    out << (t.dim() == 1 ? "x,rho,u\n" : "x,y,rho,u,v\n");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.dim() == 1) {
            out << full(t.center(i)) << ',' << full(s.rho[i]) << ',' << full(u[0][i]) << '\n';
        } else {
            out << full(t.center(t.ix(i))) << ',' << full(t.center(t.iy(i))) << ',' << full(s.rho[i]) << ','
                << full(u[0][i]) << ',' << full(u[1][i]) << '\n';
        }
    }
}

void dump_fields(const FlowState& s, const fs::path& path)
{
    std::ofstream f = open_out(path);
    dump_fields(s, f);
    if (!f) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

FlowState read_fields(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header)) {
        throw std::runtime_error("field dump is empty");
    }
    header = trim(header);
    int dim = 0;
    if (header == "x,rho,u") {
        dim = 1;
    } else if (header == "x,y,rho,u,v") {
        dim = 2;
    } else {
        throw std::runtime_error("field dump header must be 'x,rho,u' or 'x,y,rho,u,v', got '" + header + "'");
    }
    const std::size_t cols = dim == 1 ? 3 : 5;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != cols) {
            throw std::runtime_error("field dump row " + std::to_string(rows.size() + 2) + ": expected " +
                                     std::to_string(cols) + " columns");
        }
        std::vector<double> r;
        for (const auto& p : parts) {
            r.push_back(parse_double(p, "field dump row " + std::to_string(rows.size() + 2)));
        }
        rows.push_back(std::move(r));
    }
    std::size_t m = rows.size();
    if (dim == 2) {
        m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows.size()))));
        if (m * m != rows.size()) {
            throw std::runtime_error("2-D field dump row count is not a square");
        }
    }
    const Torus t(dim, m);
    PeriodicField rho(t, 0.0);
    AxisFields mom(static_cast<std::size_t>(dim), PeriodicField(t, 0.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const std::size_t off = dim == 1 ? 1 : 2;
        rho[i] = r[off];
        for (int a = 0; a < dim; ++a) {
            mom[static_cast<std::size_t>(a)][i] = r[off] * r[off + 1 + static_cast<std::size_t>(a)];
        }
    }
    return FlowState::make(std::move(rho), std::move(mom));
}

FlowState read_fields(const fs::path& path)
{
    std::ifstream f = open_in(path);
    try {
        return read_fields(f);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- simulate

namespace {

struct SnapshotIndex {
    std::size_t index;
    std::size_t step;
    double t;
    std::string file;
};

std::vector<SnapshotIndex> read_snapshot_index(const fs::path& dir)
{
    std::ifstream in = open_in(dir / "snapshots.csv");
    std::string line;
    std::getline(in, line);
    if (trim(line) != "index,step,t,file") {
        throw std::runtime_error((dir / "snapshots.csv").string() + ": unexpected header");
    }
    std::vector<SnapshotIndex> out;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto p = split(line, ',');
        if (p.size() != 4) {
            throw std::runtime_error((dir / "snapshots.csv").string() + ": malformed row");
        }
        out.push_back({parse_count(p[0], "index"), parse_count(p[1], "step"), parse_double(p[2], "t"), p[3]});
    }
    return out;
}

ResidualReport residual_report(const Scenario& s, const std::vector<std::pair<double, FlowState>>& states)
{
    Integrator integrator(s.law(), s.split(), s.torus(), s.eps());
    const auto psis = residual_test_functions(s.dim);
    ResidualReport report;
    for (const auto& [t, state] : states) {
        const FlowRates rates = integrator.rates(state);
        for (const auto& psi : psis) {
            report.add(s.eps(), t, psi.id(), weak_residual(state, rates, integrator.potential(), psi));
        }
    }
    return report;
}

struct OracleSummary {
    double t;
    OracleError density;
    OracleError velocity;
};

}  // namespace

SimulationResult simulate(const Scenario& s, const fs::path& out, std::ostream& log)
{
    s.validate();
    const FlowState init = s.initial_state();
    SimulationResult result;
    result.trajectory = run(init, s.law(), s.split(), s.eps(), s.run_config(), s.constraints);
    const Trajectory& tr = result.trajectory;
    result.warnings = tr.warnings;

    fs::create_directories(out);
    {
        std::ofstream f = open_out(out / "scenario.cfg");
        f << s.to_text();
    }

    std::vector<std::pair<double, FlowState>> canonical;
    {
        std::ofstream idx = open_out(out / "snapshots.csv");
        idx << "index,step,t,file\n";
        for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
            const Snapshot& snap = tr.snapshots[k];
            FlowState c = canonical_state(snap.state);
            dump_fields(c, out / snapshot_file(k));
            idx << k << ',' << snap.step << ',' << full(snap.t) << ',' << snapshot_file(k) << '\n';
            canonical.emplace_back(snap.t, std::move(c));
        }
    }

    result.residuals = residual_report(s, canonical);
    {
        std::ofstream f = open_out(out / "residuals.csv");
        result.residuals.write_csv(f);
    }

    {
        std::ofstream f = open_out(out / "monitor.csv");
        f << "step,t,mass,mass_expected,mass_error,min_rho,max_abs_u,transfer_rate\n";
        for (const auto& r : tr.monitor_log) {
            f << r.step << ',' << full(r.t) << ',' << full(r.mass) << ',' << full(r.mass_expected) << ','
              << full(r.mass_error()) << ',' << full(r.min_rho) << ',' << full(r.max_abs_u) << ','
              << full(r.transfer_rate) << '\n';
        }
    }

    std::vector<OracleSummary> oracle_errors;
    if (const auto oracle = s.oracle()) {
        for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
            const double t = tr.snapshots[k].t;
            if (t <= 0.0) {
                continue;
            }
            try {
                OracleSummary o{t, compare_to_oracle(tr.snapshots[k].state, t, *oracle, 0.0, OracleField::density),
                                compare_to_oracle(tr.snapshots[k].state, t, *oracle, 0.0, OracleField::velocity)};
                std::ofstream f = open_out(out / oracle_file(k));
                write_oracle_samples(*oracle, t, s.cells, f);
                oracle_errors.push_back(o);
            } catch (const std::domain_error&) {
                // Waves have met across the periodic boundary; no exact solution.
            }
        }
    }

    double max_mass_error = 0.0;
    double min_rho = std::numeric_limits<double>::infinity();
    double max_u = 0.0;
    double max_rate = 0.0;
    for (const auto& r : tr.monitor_log) {
        max_mass_error = std::max(max_mass_error, std::abs(r.mass_error()));
        min_rho = std::min(min_rho, r.min_rho);
        max_u = std::max(max_u, r.max_abs_u);
        max_rate = std::max(max_rate, r.transfer_rate);
    }
    const MonitorRecord& last = tr.monitor_log.back();

    std::ostringstream sum;
    sum << "scenario = " << s.name << '\n';
    sum << "system = " << s.system << '\n';
    sum << "cells = " << s.cells << '\n';
    sum << "eps = " << full(s.eps()) << '\n';
    sum << "steps = " << last.step << '\n';
    sum << "t_final = " << full(last.t) << '\n';
    sum << "final_mass = " << full(last.mass) << '\n';
    sum << "max_mass_error = " << full(max_mass_error) << '\n';
    sum << "min_rho = " << full(min_rho) << '\n';
    sum << "max_abs_u = " << full(max_u) << '\n';
    sum << "max_transfer_rate = " << full(max_rate) << '\n';
    sum << "envelope_constant = " << full(tr.envelope.constant) << '\n';
    sum << "envelope_exponent = " << full(tr.envelope.exponent) << '\n';
    sum << "envelope_exceedances = " << tr.envelope.exceedances << '\n';
    for (const auto& o : oracle_errors) {
        sum << "oracle_l1_rho@" << format_time(o.t) << " = " << full(o.density.l1) << '\n';
        sum << "oracle_l1_u@" << format_time(o.t) << " = " << full(o.velocity.l1) << '\n';
        sum << "oracle_window@" << format_time(o.t) << " = " << full(o.density.window.lo) << ','
            << full(o.density.window.hi) << '\n';
    }
    sum << "warnings = " << tr.warnings.size() << '\n';
    for (const auto& w : tr.warnings) {
        sum << "warning = " << w << '\n';
    }
    {
        std::ofstream f = open_out(out / "summary.txt");
        f << sum.str();
    }
    log << sum.str();
    return result;
}

// ---------------------------------------------------------------- sweep

SweepParam parse_sweep_param(const std::string& name)
{
    if (name == "eps") {
        return SweepParam::eps;
    }
    if (name == "delta") {
        return SweepParam::delta;
    }
    throw std::invalid_argument("sweep parameter must be eps or delta, got '" + name + "'");
}

void sweep(const Scenario& base, SweepParam param, const std::vector<double>& values, const fs::path& out,
           std::ostream& log)
{
    if (values.empty()) {
        throw std::invalid_argument("sweep needs at least one value");
    }
    const std::string pname = param == SweepParam::eps ? "eps" : "delta";
    std::vector<Scenario> members;
    for (std::size_t k = 0; k < values.size(); ++k) {
        Scenario s = base;
        const double v = values[k];
        if (param == SweepParam::eps) {
            if (!(v > 0.0 && v < 2.0)) {
                throw std::invalid_argument("sweep eps values must lie in (0, 2), got " + num(v));
            }
            s.cells = static_cast<std::size_t>(std::llround(two_pi / v));
        } else {
            s.delta = v;
        }
        s.name = base.name + " " + pname + "=" + num(v);
        s.validate();
        members.push_back(std::move(s));
    }

    fs::create_directories(out);
    std::vector<std::string> logs(members.size());
    std::vector<std::exception_ptr> errors(members.size());
    std::vector<std::string> rows(members.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < members.size(); k = next++) {
            try {
                const fs::path dir = out / (pname + "_" + std::to_string(k));
                std::ostringstream member_log;
                const SimulationResult r = simulate(members[k], dir, member_log);
                logs[k] = member_log.str();
                const Trajectory& tr = r.trajectory;
                double min_rho = std::numeric_limits<double>::infinity();
                for (const auto& m : tr.monitor_log) {
                    min_rho = std::min(min_rho, m.min_rho);
                }
                std::string width;
                std::string l1;
                if (const auto oracle = members[k].oracle()) {
                    const Snapshot& last = tr.snapshots.back();
                    const RiemannData& d = *members[k].riemann;
                    try {
                        const OracleWindow w = oracle_window(*oracle, last.t);
                        width = full(front_width(last.state.rho, std::max(d.rho_left, d.rho_right), w.lo, w.hi));
                        l1 = full(compare_to_oracle(last.state, last.t, *oracle, 0.0, OracleField::density).l1);
                    } catch (const std::exception&) {
                    }
                }
                std::ostringstream row;
                row << pname << ',' << full(values[k]) << ',' << members[k].cells << ',' << full(members[k].eps())
                    << ',' << full(members[k].delta) << ',' << dir.filename().string() << ','
                    << tr.monitor_log.back().step << ',' << full(min_rho) << ',' << full(tr.monitor_log.back().mass)
                    << ',' << width << ',' << l1;
                rows[k] = row.str();
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(members.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::ofstream f = open_out(out / "sweep.csv");
    f << "param,value,cells,eps,delta,dir,steps,min_rho,final_mass,front_width,oracle_l1_rho\n";
    for (std::size_t k = 0; k < members.size(); ++k) {
        f << rows[k] << '\n';
        log << "[" << pname << " = " << num(values[k]) << "]\n" << logs[k];
    }
}

// ---------------------------------------------------------------- verify

namespace {

struct MemberCheck {
    bool ok = true;
    ResidualReport residuals;
    Scenario scenario;
};

void report_line(std::ostream& out, bool pass, const std::string& what)
{
    out << (pass ? "PASS " : "FAIL ") << what << '\n';
}

MemberCheck verify_run(const fs::path& dir, std::ostream& out)
{
    MemberCheck mc;
    {
        std::ifstream in = open_in(dir / "scenario.cfg");
        mc.scenario = parse_scenario(in, dir.filename().string());
    }
    const Scenario& s = mc.scenario;
    out << "run " << dir.string() << " (" << s.name << ")\n";

    std::vector<std::pair<double, FlowState>> states;
    double snap_min = std::numeric_limits<double>::infinity();
    for (const auto& idx : read_snapshot_index(dir)) {
        FlowState st = read_fields(dir / idx.file);
        if (!(st.torus() == s.torus())) {
            throw std::runtime_error((dir / idx.file).string() + ": grid does not match scenario.cfg");
        }
        snap_min = std::min(snap_min, st.rho.min());
        states.emplace_back(idx.t, std::move(st));
    }
    mc.residuals = residual_report(s, states);
    ResidualReport stored;
    {
        std::ifstream in = open_in(dir / "residuals.csv");
        stored = ResidualReport::read_csv(in);
    }
    std::size_t mismatched = 0;
    const auto& a = mc.residuals.records();
    const auto& b = stored.records();
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
        if (i >= a.size() || i >= b.size() || !(a[i] == b[i])) {
            ++mismatched;
        }
    }
    const bool residuals_ok = mismatched == 0;
    report_line(out, residuals_ok,
                "residuals: " + std::to_string(a.size()) + " recomputed, " + std::to_string(mismatched) +
                    " differ from residuals.csv");

    // Monitor log: mass law and positivity.
    std::ifstream mon = open_in(dir / "monitor.csv");
    std::string line;
    std::getline(mon, line);
    double max_err = 0.0;
    double max_mass = 0.0;
    double mon_min = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> speeds;
    while (std::getline(mon, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto p = split(line, ',');
        if (p.size() != 8) {
            throw std::runtime_error((dir / "monitor.csv").string() + ": malformed row");
        }
        max_mass = std::max(max_mass, std::abs(parse_double(p[3], "mass_expected")));
        max_err = std::max(max_err, std::abs(parse_double(p[4], "mass_error")));
        mon_min = std::min(mon_min, parse_double(p[5], "min_rho"));
        speeds.emplace_back(parse_double(p[1], "t"), parse_double(p[6], "max_abs_u"));
    }
    const double cells = static_cast<double>(s.torus().size());
    const double tol = 100.0 * machine_eps * cells * std::max(1.0, max_mass);
    const bool mass_ok = max_err <= tol;
    report_line(out, mass_ok, "mass law: max |mass - expected| = " + full(max_err) + " (tolerance " + full(tol) + ")");
    const bool positive = mon_min > 0.0 && snap_min > 0.0;
    report_line(out, positive, "positivity: min rho = " + full(std::min(mon_min, snap_min)));

    // Velocity envelope: growth rate of max|u| in units of eps^-exponent.
    if (speeds.size() >= 2 && speeds.back().first > 0.0) {
        const double exponent = s.mollifier == "three-cell" ? 0.0 : (is_log_law(s.system) ? 3.0 : 2.0) * s.alpha;
        double c = 0.0;
        for (const auto& [t, u] : speeds) {
            if (t > 0.0) {
                c = std::max(c, (u - speeds.front().second) / t * std::pow(s.eps(), exponent));
            }
        }
        out << "INFO velocity envelope: max|u| <= |u0| + C t / eps^" << num(exponent) << " holds with C = " << full(c)
            << '\n';
    }
    mc.ok = residuals_ok && mass_ok && positive;
    return mc;
}

}  // namespace

bool verify(const fs::path& dir, std::ostream& out)
{
    if (!fs::exists(dir / "sweep.csv")) {
        return verify_run(dir, out).ok;
    }
    std::ifstream in = open_in(dir / "sweep.csv");
    std::string line;
    std::getline(in, line);
    bool ok = true;
    std::string pname;
    ResidualReport combined;
    std::optional<double> floor;
    std::size_t members = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto p = split(line, ',');
        if (p.size() < 6) {
            throw std::runtime_error((dir / "sweep.csv").string() + ": malformed row");
        }
        pname = p[0];
        MemberCheck mc = verify_run(dir / p[5], out);
        ok = ok && mc.ok;
        combined.append(mc.residuals);
        ++members;
        if (mc.scenario.system == "isothermal") {
            const double a = mc.scenario.mollifier == "three-cell" ? 0.0 : mc.scenario.alpha;
            floor = std::min(1.0 - 3.0 * a, mc.scenario.beta);
        }
    }
    if (pname == "eps") {
        if (members < 3) {
            out << "INFO decay certificate needs at least 3 eps values, sweep has " << members << '\n';
        } else {
            for (const auto& v : certify_decay(combined, floor)) {
                std::ostringstream what;
                what << "decay " << v.equation << " / " << v.psi_id << " at t = " << num(v.t) << ": slope "
                     << num(v.slope);
                if (v.theoretical_floor) {
                    what << " (theoretical floor " << num(*v.theoretical_floor) << ")";
                }
                report_line(out, v.pass, what.str());
                ok = ok && v.pass;
            }
        }
    }
    return ok;
}

// ---------------------------------------------------------------- oracle

std::unique_ptr<RiemannOracle> parse_oracle_spec(const std::string& spec)
{
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        const Scenario s = load_scenario(spec);
        auto o = s.oracle();
        if (!o) {
            throw std::invalid_argument("scenario '" + spec + "' has no 1-D isothermal or shallow Riemann data");
        }
        return o;
    }
    const std::string system = trim(spec.substr(0, colon));
    std::map<std::string, double> kv;
    for (const auto& item : split(spec.substr(colon + 1), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("oracle spec item '" + item + "' must be key=value");
        }
        kv[trim(item.substr(0, eq))] = parse_double(item.substr(eq + 1), "oracle spec " + item);
    }
    const auto get = [&](const std::string& k) {
        const auto it = kv.find(k);
        if (it == kv.end()) {
            throw std::invalid_argument("oracle spec for " + system + " needs " + k);
        }
        return it->second;
    };
    if (system == "shallow") {
        return std::make_unique<ShallowRiemann>(get("hl"), get("ul"), get("hr"), get("ur"), get("g"));
    }
    if (system == "isothermal") {
        return std::make_unique<IsothermalRiemann>(get("rhol"), get("ul"), get("rhor"), get("ur"), get("K"));
    }
    throw std::invalid_argument("oracle system must be shallow or isothermal, got '" + system + "'");
}

void write_oracle_samples(const RiemannOracle& oracle, double t, std::size_t cells, std::ostream& out)
{
    const Torus torus(1, cells);
    out << "x,rho,u\n";
    if (t == 0.0) {
        for (std::size_t i = 0; i < cells; ++i) {
            const double x = torus.center(i);
            const RiemannSample s = x < 0.0 ? oracle.left_state() : oracle.right_state();
            out << full(x) << ',' << full(s.rho) << ',' << full(s.u) << '\n';
        }
        return;
    }
    const OracleWindow w = oracle_window(oracle, t);
    for (std::size_t i = 0; i < cells; ++i) {
        const double x = torus.center(i);
        if (x < w.lo || x > w.hi) {
            continue;
        }
        const RiemannSample s = oracle.sample(x / t);
        out << full(x) << ',' << full(s.rho) << ',' << full(s.u) << '\n';
    }
}

// ---------------------------------------------------------------- plot

namespace {

std::string quote(const std::string& s)
{
    return "'" + s + "'";
}

void plot_panels(std::ostream& g, const fs::path& dir, const std::string& prefix, int dim, bool all_snapshots)
{
    const auto idx = read_snapshot_index(dir);
    std::vector<SnapshotIndex> shown;
    if (all_snapshots) {
        shown = idx;
    } else {
        shown.push_back(idx.back());
    }
    if (dim == 2) {
        const std::string file = quote(prefix + shown.back().file);
        g << "set view map\nunset key\n";
        g << "set title 'density, t = " << num(shown.back().t) << "'\n";
        g << "splot " << file << " skip 1 using 1:2:3 with image\n";
        g << "set title 'velocity x, t = " << num(shown.back().t) << "'\n";
        g << "splot " << file << " skip 1 using 1:2:4 with image\n";
        return;
    }
    for (int col : {2, 3}) {
        g << "set title '" << (col == 2 ? "density" : "velocity") << "'\n";
        g << "plot ";
        bool first = true;
        for (const auto& s : shown) {
            g << (first ? "" : ", \\\n     ") << quote(prefix + s.file) << " skip 1 using 1:" << col
              << " with lines title 't = " << num(s.t) << "'";
            first = false;
            const std::string oracle = oracle_file(s.index);
            if (fs::exists(dir / oracle)) {
                g << ", \\\n     " << quote(prefix + oracle) << " skip 1 using 1:" << col
                  << " with lines dashtype 2 title 'exact t = " << num(s.t) << "'";
            }
        }
        g << '\n';
    }
}

}  // namespace

fs::path write_plot_script(const fs::path& dir)
{
    std::ostringstream g;
    g << "set datafile separator ','\n";
    g << "set terminal png size 1200,";
    if (fs::exists(dir / "sweep.csv")) {
        std::ifstream in = open_in(dir / "sweep.csv");
        std::string line;
        std::getline(in, line);
        std::vector<std::pair<std::string, std::string>> members;
        while (std::getline(in, line)) {
            const auto p = split(line, ',');
            if (p.size() >= 6) {
                members.emplace_back(p[0] + " = " + p[1], p[5]);
            }
        }
        if (members.empty()) {
            throw std::runtime_error((dir / "sweep.csv").string() + " lists no runs");
        }
        Scenario s;
        {
            std::ifstream sc = open_in(dir / members.front().second / "scenario.cfg");
            s = parse_scenario(sc);
        }
        g << 300 * members.size() << "\nset output 'figure.png'\n";
        g << "set multiplot layout " << members.size() << ",2\n";
        for (const auto& [label, sub] : members) {
            g << "# " << label << '\n';
            std::ostringstream panel;
            plot_panels(panel, dir / sub, sub + "/", s.dim, false);
            std::string text = panel.str();
            for (std::size_t pos = 0; (pos = text.find("set title '", pos)) != std::string::npos;) {
                pos += 11;
                text.insert(pos, label + ", ");
            }
            g << text;
        }
    } else {
        Scenario s;
        {
            std::ifstream sc = open_in(dir / "scenario.cfg");
            s = parse_scenario(sc);
        }
        g << "500\nset output 'figure.png'\n";
        g << "set multiplot layout 1,2 title " << quote(s.name) << '\n';
        plot_panels(g, dir, "", s.dim, true);
    }
    g << "unset multiplot\n";
    const fs::path path = dir / "plot.gp";
    std::ofstream f = open_out(path);
    f << g.str();
    return path;
}

fs::path default_output(const std::string& name)
{
    const char* root = std::getenv("WEAKFLOW_OUT");
    return fs::path(root && *root ? root : "runs") / name;
}

}  // namespace weakflow::cli
