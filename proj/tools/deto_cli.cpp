// Experiment driver: run sweeps from a JSON config, report persisted
// results, emit plot tables, and inspect benchmark instances.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "deto/experiment.hpp"
#include "deto/metrics.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    deto::ExperimentConfig cfg = deto::load_config(config_path);
    const deto::ExperimentResult res = deto::run_experiment(cfg);
    std::cout << "completed " << res.completed << " runs";
    if (res.failures > 0) std::cout << ", " << res.failures << " failed (see failures.txt)";
    std::cout << "\nresults in " << res.output_dir << "\n";
    return res.failures == 0 ? 0 : 1;
}

int cmd_report(const std::string& results_dir) {
    deto::write_report(results_dir, std::cout);
    return 0;
}

int cmd_plotdata(const std::string& results_dir, const std::string& kind) {
    const std::string path = deto::emit_plot_data(results_dir, kind);
    std::cout << path << "\n";
    return 0;
}

deto::MPBState make_instance(const std::string& shape, int n, int m, std::uint64_t seed,
                             int steps, double h_sev, double s_sev) {
    deto::MPBConfig cfg = deto::MPBConfig::standard(
        n, m, shape == "gaussian" ? deto::PeakShape::Gaussian : deto::PeakShape::Cone,
        h_sev, s_sev);
    deto::Rng rng(seed);
    deto::MPBState state = deto::MPBState::init(cfg, rng);
    for (int t = 1; t < steps; ++t) state = state.advanced(rng);
    return state;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-driven transfer optimization for expensive dynamic problems"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute an experiment sweep from a JSON config");
    run->add_option("config", config_path, "config file")->required();

    std::string results_dir;
    auto* report = app.add_subcommand("report", "print summary and statistics tables");
    report->add_option("results", results_dir, "results directory")->required();

    std::string plot_dir, plot_kind = "trajectory";
    auto* plot = app.add_subcommand("plotdata", "emit plot tables from run records");
    plot->add_option("results", plot_dir, "results directory")->required();
    plot->add_option("--kind", plot_kind, "trajectory, bars or rho");

    auto* bench = app.add_subcommand("bench", "inspect benchmark instances");
    bench->require_subcommand(1);
    std::string shape = "cone", eval_x, instance_file;
    int n = 3, m = 5, steps = 1;
    std::uint64_t seed = 1;
    double h_sev = 1.0, s_sev = 1.0;

    auto* dump = bench->add_subcommand("dump", "print an instance (one peak per line)");
    dump->add_option("--shape", shape, "cone or gaussian");
    dump->add_option("--n", n, "dimension");
    dump->add_option("--m", m, "peak count");
    dump->add_option("--seed", seed, "instance seed");
    dump->add_option("--steps", steps, "environment changes to apply + 1");
    dump->add_option("--height-severity", h_sev, "height change scale");
    dump->add_option("--shift-severity", s_sev, "center shift length");

    auto* ev = bench->add_subcommand("eval", "evaluate a point on an instance");
    ev->add_option("--shape", shape, "cone or gaussian");
    ev->add_option("--n", n, "dimension");
    ev->add_option("--m", m, "peak count");
    ev->add_option("--seed", seed, "instance seed");
    ev->add_option("--steps", steps, "environment changes to apply + 1");
    ev->add_option("--height-severity", h_sev, "height change scale");
    ev->add_option("--shift-severity", s_sev, "center shift length");
    ev->add_option("--instance", instance_file, "read a dumped instance instead");
    ev->add_option("--x", eval_x, "comma-separated coordinates")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path);
        if (*report) return cmd_report(results_dir);
        if (*plot) return cmd_plotdata(plot_dir, plot_kind);
        if (*dump) {
            make_instance(shape, n, m, seed, steps, h_sev, s_sev).dump(std::cout);
            return 0;
        }
        if (*ev) {
            deto::MPBState state = [&]() {
                if (!instance_file.empty()) {
                    std::ifstream in(instance_file);
                    if (!in) throw std::runtime_error("cannot open " + instance_file);
                    return deto::MPBState::parse(in);
                }
                return make_instance(shape, n, m, seed, steps, h_sev, s_sev);
            }();
            deto::Vector x(state.bounds().dim());
            std::istringstream xs(eval_x);
            std::string cell;
            int d = 0;
            while (std::getline(xs, cell, ',') && d < x.size()) x[d++] = std::stod(cell);
            if (d != x.size()) throw std::runtime_error("expected " +
                                                        std::to_string(x.size()) +
                                                        " coordinates");
            const auto [opt_x, opt_f] = state.true_optimum();
            std::cout.precision(17);
            std::cout << "f " << state.eval(x) << "\noptimum " << opt_f << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
