#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gradkit/bench.hpp"
#include "gradkit/experiment.hpp"
#include "gradkit/prediction.hpp"

namespace {

void emit_error(const std::string& command, const std::string& message) {
    nlohmann::json j;
    j["command"] = command;
    j["error"] = message;
    std::cerr << j.dump() << "\n";
}

int run_bench(const std::string& problem_name, std::size_t dim, const std::string& optimizer,
              double lr, bool lr_set, long steps, double tol, bool trace,
              const std::string& out_dir) {
    gradkit::OptimConfig cfg;
    cfg.variant = gradkit::variant_from_name(optimizer);
    if (lr_set) cfg.lr = lr;
    const gradkit::BenchProblem problem = gradkit::make_problem(problem_name, dim);
    const gradkit::BenchResult res = gradkit::bench_run(problem, cfg, steps, tol);
    if (trace) {
        for (const gradkit::BenchRecord& r : res.trajectory) {
            std::cout << "t=" << r.t << " f=" << gradkit::format_g17(r.f)
                      << " grad_norm=" << gradkit::format_g17(r.grad_norm)
                      << " xi=[" << gradkit::format_g17(r.xi_min) << ", "
                      << gradkit::format_g17(r.xi_max) << "]\n";
        }
    }
    std::cout << "problem=" << problem.name << " optimizer=" << optimizer
              << " lr=" << gradkit::format_g17(cfg.lr)
              << " converged=" << (res.converged ? "yes" : "no") << " steps=" << res.steps
              << " final_f=" << gradkit::format_g17(res.final_f) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::string path = out_dir + "/bench-" + problem.name + "-" + optimizer + ".csv";
        std::ofstream csv(path);
        if (!csv) throw std::runtime_error("cannot write " + path);
        csv << "t,f,grad_norm,xi_min,xi_max\n";
        for (const gradkit::BenchRecord& r : res.trajectory) {
            csv << r.t << ',' << gradkit::format_g17(r.f) << ','
                << gradkit::format_g17(r.grad_norm) << ',' << gradkit::format_g17(r.xi_min) << ','
                << gradkit::format_g17(r.xi_max) << "\n";
        }
    }
    return 0;
}

gradkit::ExperimentConfig load_cfg(const std::string& config_path, const std::string& out_dir) {
    gradkit::ExperimentConfig cfg = gradkit::load_experiment_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    return cfg;
}

/// Restrict the config to one optimizer entry and/or one seed. Ensembles
/// whose members no longer exist are dropped.
void filter_cfg(gradkit::ExperimentConfig& cfg, const std::string& optimizer, bool seed_set,
                std::uint64_t seed) {
    if (!optimizer.empty()) {
        std::vector<gradkit::OptimizerEntry> kept;
        for (const gradkit::OptimizerEntry& e : cfg.optimizers) {
            if (e.label == optimizer ||
                gradkit::variant_name(e.optim.variant) == optimizer) {
                kept.push_back(e);
            }
        }
        if (kept.empty()) {
            throw std::invalid_argument("no optimizer entry matches \"" + optimizer + "\"");
        }
        cfg.optimizers = std::move(kept);
    }
    if (seed_set) {
        for (gradkit::OptimizerEntry& e : cfg.optimizers) {
            e.seeds = {seed};
        }
    }
    if (!optimizer.empty() || seed_set) {
        std::set<std::string> ids;
        for (const gradkit::OptimizerEntry& e : cfg.optimizers) {
            for (std::uint64_t s : e.seeds) ids.insert(gradkit::run_id(e.label, s));
        }
        std::vector<gradkit::EnsembleSpec> kept;
        for (const gradkit::EnsembleSpec& g : cfg.ensembles) {
            bool all = true;
            for (const std::string& m : g.members) {
                if (ids.count(m) == 0) {
                    all = false;
                    break;
                }
            }
            if (all) kept.push_back(g);
        }
        cfg.ensembles = std::move(kept);
    }
    cfg.validate();
}

void write_report_files(const gradkit::ExperimentConfig& cfg,
                        const gradkit::ExperimentResult& res, bool with_manifest) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::vector<gradkit::ReportRow> rows = gradkit::flatten_reports(res);
    gradkit::write_csv(cfg.out_dir + "/report.csv", rows);
    std::ofstream txt(cfg.out_dir + "/report.txt");
    if (!txt) throw std::runtime_error("cannot write " + cfg.out_dir + "/report.txt");
    gradkit::write_text_table(txt, rows);
    if (with_manifest) gradkit::write_manifest(cfg.out_dir + "/manifest.json", res);
    gradkit::write_text_table(std::cout, rows);
}

int run_train(const std::string& config_path, const std::string& out_dir,
              const std::string& optimizer, bool seed_set, std::uint64_t seed, bool trace) {
    gradkit::ExperimentConfig cfg = load_cfg(config_path, out_dir);
    filter_cfg(cfg, optimizer, seed_set, seed);
    const gradkit::ExperimentResult res = gradkit::experiment_run(cfg);
    if (trace) {
        for (const gradkit::RunOutcome& r : res.runs) {
            std::cout << r.id << " fold=" << r.fold << (r.ok ? " ok" : " FAILED: " + r.error)
                      << "\n";
        }
    }
    write_report_files(cfg, res, true);
    if (res.partial) {
        std::size_t failed = 0;
        for (const gradkit::RunOutcome& r : res.runs) {
            if (!r.ok) ++failed;
        }
        emit_error("train", std::to_string(failed) + " of " + std::to_string(res.runs.size()) +
                                " runs failed; report marked partial");
        return 2;
    }
    return 0;
}

int run_fuse(const std::string& config_path, const std::string& out_dir) {
    gradkit::ExperimentConfig cfg = load_cfg(config_path, out_dir);
    if (cfg.ensembles.empty()) {
        throw std::invalid_argument("config defines no ensembles to fuse");
    }
    const std::vector<gradkit::EvalReport> reports = gradkit::fuse_saved(cfg, true);
    gradkit::ExperimentResult shell;
    shell.ensembles = reports;
    const std::vector<gradkit::ReportRow> rows = gradkit::flatten_reports(shell);
    gradkit::write_csv(cfg.out_dir + "/fuse_report.csv", rows);
    gradkit::write_text_table(std::cout, rows);
    return 0;
}

int run_report(const std::string& config_path, const std::string& out_dir) {
    gradkit::ExperimentConfig cfg = load_cfg(config_path, out_dir);
    const gradkit::ExperimentResult res = gradkit::report_saved(cfg);
    write_report_files(cfg, res, false);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-gradient optimizer toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string optimizer;
    std::uint64_t seed = 0;
    bool trace = false;

    CLI::App* bench = app.add_subcommand("bench", "run an analytic benchmark problem");
    std::string problem = "quadratic";
    std::size_t dim = 10;
    double lr = 0.0;
    long steps = 10000;
    double tol = 1e-6;
    bench->add_option("--problem", problem, "quadratic or rosenbrock");
    bench->add_option("--dim", dim, "quadratic dimension");
    CLI::Option* bench_opt = bench->add_option("--optimizer", optimizer, "optimizer variant");
    bench_opt->required();
    CLI::Option* lr_opt = bench->add_option("--lr", lr, "learning rate");
    bench->add_option("--steps", steps, "step budget");
    bench->add_option("--tol", tol, "objective tolerance");
    bench->add_flag("--trace", trace, "print every step");
    bench->add_option("--out", out_dir, "directory for the trajectory CSV");

    CLI::App* train = app.add_subcommand("train", "run the configured experiment");
    train->add_option("--config", config_path, "experiment config (JSON)")->required();
    train->add_option("--out", out_dir, "output directory override");
    train->add_option("--optimizer", optimizer, "restrict to one optimizer entry");
    CLI::Option* seed_opt = train->add_option("--seed", seed, "restrict every entry to one seed");
    train->add_flag("--trace", trace, "print one line per finished run");

    CLI::App* fuse = app.add_subcommand("fuse", "fuse saved prediction files per config");
    fuse->add_option("--config", config_path, "experiment config (JSON)")->required();
    fuse->add_option("--out", out_dir, "output directory override");

    CLI::App* report = app.add_subcommand("report", "rebuild reports from saved prediction files");
    report->add_option("--config", config_path, "experiment config (JSON)")->required();
    report->add_option("--out", out_dir, "output directory override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("parse", e.what());
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (bench->parsed()) {
            return run_bench(problem, dim, optimizer, lr, lr_opt->count() > 0, steps, tol, trace,
                             out_dir);
        }
        if (train->parsed()) {
            return run_train(config_path, out_dir, optimizer, seed_opt->count() > 0, seed, trace);
        }
        if (fuse->parsed()) return run_fuse(config_path, out_dir);
        if (report->parsed()) return run_report(config_path, out_dir);
        throw std::logic_error("no subcommand dispatched");
    } catch (const std::exception& e) {
        emit_error(cmd, e.what());
        return 1;
    }
}
