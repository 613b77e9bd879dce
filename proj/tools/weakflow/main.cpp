#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "weakflow/cli.hpp"

namespace fs = std::filesystem;
using namespace weakflow;

namespace {

enum Exit { ok = 0, failed_checks = 1, config_error = 2, run_error = 3 };

cli::Scenario configured(const std::string& name, const std::vector<std::string>& overrides)
{
    cli::Scenario s = cli::load_scenario(name);
    for (const auto& o : overrides) {
        cli::apply_override(s, o);
    }
    return s;
}

std::string one_line(std::string msg)
{
    for (char& c : msg) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return msg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weak asymptotic ODE solver for isothermal, isentropic, shallow-water and self-gravitating gas on "
                 "the periodic torus."};
    app.require_subcommand(1);

    std::string scenario;
    std::vector<std::string> overrides;
    std::string out;

    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its run directory");
    simulate->add_option("scenario", scenario, "Preset name or scenario file")->required();
    simulate->add_option("--override", overrides, "key=value assignment applied after loading");
    simulate->add_option("--out", out, "Output directory (default $WEAKFLOW_OUT/<name> or runs/<name>)");

    std::string param;
    std::vector<double> values;
    auto* sweep = app.add_subcommand("sweep", "Run one scenario over several eps or delta values in parallel");
    sweep->add_option("--param", param, "eps or delta")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("scenario", scenario, "Preset name or scenario file")->required();
    sweep->add_option("--override", overrides, "key=value assignment applied after loading");
    sweep->add_option("--out", out, "Output directory");

    std::string run_dir;
    auto* verify = app.add_subcommand("verify", "Recompute residuals and a-priori bound checks from a run directory");
    verify->add_option("run-dir", run_dir, "Run or sweep directory")->required();

    std::string spec;
    std::optional<double> time;
    std::size_t cells = 1000;
    auto* oracle = app.add_subcommand("oracle", "Print exact Riemann solution samples as x,rho,u");
    oracle->add_option("spec", spec,
                       "shallow:hl=..,ul=..,hr=..,ur=..,g=.. | isothermal:rhol=..,ul=..,rhor=..,ur=..,K=.. | scenario")
        ->required();
    oracle->add_option("--t", time, "Time (default: the scenario's final time)");
    oracle->add_option("--cells", cells, "Cells on the torus (default: the scenario's, else 1000)");
    oracle->add_option("--out", out, "Write to a file instead of stdout");

    auto* plot = app.add_subcommand("plot", "Write a gnuplot script rendering density and velocity panels");
    plot->add_option("run-dir", run_dir, "Run or sweep directory")->required();

    auto* show = app.add_subcommand("show", "Print the canonical scenario text");
    show->add_option("scenario", scenario, "Preset name or scenario file")->required();
    show->add_option("--override", overrides, "key=value assignment applied after loading");

    app.add_subcommand("presets", "List built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const cli::Scenario s = configured(scenario, overrides);
            const fs::path dir = out.empty() ? cli::default_output(s.name) : fs::path(out);
            cli::simulate(s, dir, std::cout);
            std::cout << "wrote " << dir.string() << '\n';
        } else if (sweep->parsed()) {
            const cli::Scenario s = configured(scenario, overrides);
            const fs::path dir = out.empty() ? cli::default_output(s.name + "-" + param + "-sweep") : fs::path(out);
            cli::sweep(s, cli::parse_sweep_param(param), values, dir, std::cout);
            std::cout << "wrote " << dir.string() << '\n';
        } else if (verify->parsed()) {
            return cli::verify(run_dir, std::cout) ? ok : failed_checks;
        } else if (oracle->parsed()) {
            const auto o = cli::parse_oracle_spec(spec);
            double t = 0.0;
            if (time) {
                t = *time;
            } else if (spec.find(':') == std::string::npos) {
                t = cli::load_scenario(spec).t_final;
            } else {
                throw std::invalid_argument("oracle needs --t for an inline spec");
            }
            if (spec.find(':') == std::string::npos && oracle->count("--cells") == 0) {
                cells = cli::load_scenario(spec).cells;
            }
            if (out.empty()) {
                cli::write_oracle_samples(*o, t, cells, std::cout);
            } else {
                std::ofstream f(out);
                if (!f) {
                    throw std::runtime_error("cannot write " + out);
                }
                cli::write_oracle_samples(*o, t, cells, f);
            }
        } else if (plot->parsed()) {
            const fs::path script = cli::write_plot_script(run_dir);
            std::cout << "wrote " << script.string() << " (run: cd " << fs::path(run_dir).string()
                      << " && gnuplot plot.gp)\n";
        } else if (show->parsed()) {
            const cli::Scenario s = configured(scenario, overrides);
            s.validate();
            std::cout << s.to_text();
        } else {
            for (const auto& n : cli::preset_names()) {
                std::cout << n << '\n';
            }
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "weakflow: " << one_line(e.what()) << '\n';
        return config_error;
    } catch (const std::domain_error& e) {
        std::cerr << "weakflow: " << one_line(e.what()) << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "weakflow: " << one_line(e.what()) << '\n';
        return run_error;
    }
    return ok;
}
