#include "gradkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "gradkit/dataset.hpp"
#include "gradkit/prediction.hpp"

namespace gradkit {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw std::invalid_argument(where + ": unknown key \"" + key + "\"");
    }
}

void no_whitespace(const std::string& s, const std::string& what) {
    if (s.empty() || s.find_first_of(" \t\n") != std::string::npos) {
        throw std::invalid_argument(what + " must be non-empty and free of whitespace: \"" + s +
                                    "\"");
    }
}

OptimizerEntry parse_optimizer_entry(const json& j, std::size_t index) {
    const std::string where = "optimizers[" + std::to_string(index) + "]";
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    check_keys(j,
               {"variant", "seeds", "name", "lr", "rho1", "rho2", "eps", "momentum",
                "eps_inside_sqrt", "dgrad_avg_uses_m", "schedule"},
               where);
    if (!j.contains("variant")) throw std::invalid_argument(where + ": missing \"variant\"");
    OptimizerEntry e;
    e.optim.variant = variant_from_name(j.at("variant").get<std::string>());
    e.label = j.value("name", std::string(variant_name(e.optim.variant)));
    no_whitespace(e.label, where + " name");
    if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
        throw std::invalid_argument(where + ": \"seeds\" must be a non-empty array");
    }
    for (const json& s : j.at("seeds")) {
        if (!s.is_number_unsigned()) {
            throw std::invalid_argument(where + ": seeds must be non-negative integers");
        }
        e.seeds.push_back(s.get<std::uint64_t>());
    }
    e.optim.lr = j.value("lr", e.optim.lr);
    e.optim.rho1 = j.value("rho1", e.optim.rho1);
    e.optim.rho2 = j.value("rho2", e.optim.rho2);
    e.optim.eps = j.value("eps", e.optim.eps);
    e.optim.momentum = j.value("momentum", e.optim.momentum);
    e.optim.eps_inside_sqrt = j.value("eps_inside_sqrt", e.optim.eps_inside_sqrt);
    e.optim.dgrad_avg_uses_m = j.value("dgrad_avg_uses_m", e.optim.dgrad_avg_uses_m);
    if (j.contains("schedule")) {
        const json& s = j.at("schedule");
        check_keys(s, {"steps", "decay", "zero_floor"}, where + ".schedule");
        e.optim.schedule.steps = s.value("steps", e.optim.schedule.steps);
        e.optim.schedule.decay = s.value("decay", e.optim.schedule.decay);
        e.optim.schedule.zero_floor = s.value("zero_floor", e.optim.schedule.zero_floor);
    }
    return e;
}

}  // namespace

std::string run_id(const std::string& label, std::uint64_t seed) {
    return label + "-s" + std::to_string(seed);
}

std::string prediction_filename(const std::string& id, int fold) {
    return id + "-f" + std::to_string(fold) + ".pred.txt";
}

void ExperimentConfig::validate() const {
    if (dataset_path.empty()) throw std::invalid_argument("dataset path is empty");
    if (folds < 2) throw std::invalid_argument("fold count must be at least 2");
    if (train.epochs < 1) throw std::invalid_argument("experiments need at least one epoch");
    if (out_dir.empty()) throw std::invalid_argument("output directory is empty");
    model.validate();
    train.validate();
    if (optimizers.empty()) throw std::invalid_argument("need at least one optimizer entry");
    std::set<std::string> ids;
    for (const OptimizerEntry& e : optimizers) {
        e.optim.validate();
        no_whitespace(e.label, "optimizer name");
        if (e.seeds.empty()) throw std::invalid_argument("optimizer \"" + e.label +
                                                         "\" has no seeds");
        std::set<std::uint64_t> seen;
        for (std::uint64_t s : e.seeds) {
            if (!seen.insert(s).second) {
                throw std::invalid_argument("duplicate seed " + std::to_string(s) +
                                            " for optimizer \"" + e.label + "\"");
            }
            if (!ids.insert(run_id(e.label, s)).second) {
                throw std::invalid_argument("run id collision: " + run_id(e.label, s));
            }
        }
    }
    std::set<std::string> names;
    for (const EnsembleSpec& g : ensembles) {
        no_whitespace(g.name, "ensemble name");
        if (!names.insert(g.name).second) {
            throw std::invalid_argument("duplicate ensemble name \"" + g.name + "\"");
        }
        if (ids.count(g.name) != 0) {
            throw std::invalid_argument("ensemble name \"" + g.name + "\" collides with a run id");
        }
        if (g.members.empty()) {
            throw std::invalid_argument("ensemble \"" + g.name + "\" has no members");
        }
        for (const std::string& m : g.members) {
            if (ids.count(m) == 0) {
                throw std::invalid_argument("ensemble \"" + g.name +
                                            "\" references unknown run id \"" + m + "\"");
            }
        }
    }
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument(origin + ": config must be a JSON object");
    check_keys(j,
               {"dataset", "scale", "model", "train", "folds", "fold_seed", "out_dir",
                "fuse_inputs", "optimizers", "ensembles"},
               origin);
    ExperimentConfig cfg;
    if (!j.contains("dataset")) throw std::invalid_argument(origin + ": missing \"dataset\"");
    cfg.dataset_path = j.at("dataset").get<std::string>();
    cfg.feature_scale = j.value("scale", cfg.feature_scale);
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, {"layers", "activation"}, origin + ".model");
        if (m.contains("layers")) {
            cfg.model.layer_sizes.clear();
            for (const json& v : m.at("layers")) {
                if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
                    throw std::invalid_argument(origin + ": layer sizes must be positive integers");
                }
                cfg.model.layer_sizes.push_back(v.get<std::size_t>());
            }
        }
        if (m.contains("activation")) {
            cfg.model.activation = activation_from_name(m.at("activation").get<std::string>());
        }
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, {"batch_size", "epochs", "augment"}, origin + ".train");
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        if (t.contains("augment")) {
            const json& a = t.at("augment");
            check_keys(a, {"enabled", "reflect", "scale_lo", "scale_hi"}, origin + ".train.augment");
            cfg.train.augment.enabled = a.value("enabled", cfg.train.augment.enabled);
            cfg.train.augment.reflect = a.value("reflect", cfg.train.augment.reflect);
            cfg.train.augment.scale_lo = a.value("scale_lo", cfg.train.augment.scale_lo);
            cfg.train.augment.scale_hi = a.value("scale_hi", cfg.train.augment.scale_hi);
        }
    }
    cfg.folds = j.value("folds", cfg.folds);
    cfg.fold_seed = j.value("fold_seed", cfg.fold_seed);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("fuse_inputs")) {
        const std::string mode = j.at("fuse_inputs").get<std::string>();
        if (mode == "probabilities") {
            cfg.fuse_logits = false;
        } else if (mode == "logits") {
            cfg.fuse_logits = true;
        } else {
            throw std::invalid_argument(origin +
                                        ": fuse_inputs must be probabilities or logits, got \"" +
                                        mode + "\"");
        }
    }
    if (!j.contains("optimizers")) throw std::invalid_argument(origin + ": missing \"optimizers\"");
    const json& opts = j.at("optimizers");
    if (!opts.is_array()) throw std::invalid_argument(origin + ": \"optimizers\" must be an array");
    for (std::size_t i = 0; i < opts.size(); ++i) {
        cfg.optimizers.push_back(parse_optimizer_entry(opts[i], i));
    }
    if (j.contains("ensembles")) {
        for (const json& g : j.at("ensembles")) {
            check_keys(g, {"name", "members"}, origin + ".ensembles");
            EnsembleSpec spec;
            if (!g.contains("name") || !g.contains("members")) {
                throw std::invalid_argument(origin + ": ensembles need \"name\" and \"members\"");
            }
            spec.name = g.at("name").get<std::string>();
            for (const json& m : g.at("members")) {
                spec.members.push_back(m.get<std::string>());
            }
            cfg.ensembles.push_back(std::move(spec));
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str(), path);
}

unsigned resolve_workers(unsigned requested) {
    if (const char* env = std::getenv("GRADKIT_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 1024) {
            throw std::invalid_argument("GRADKIT_WORKERS must be an integer in [1, 1024], got \"" +
                                        std::string(env) + "\"");
        }
        return static_cast<unsigned>(v);
    }
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

namespace {

struct Job {
    std::size_t entry = 0;
    std::size_t seed_idx = 0;
    int fold = 0;
};

struct RunData {
    PredictionSet probs;
    Tensor logits;
};

void run_one(const ExperimentConfig& cfg, const Dataset& data, const Job& job, RunOutcome& out,
             RunData& rd) {
    const OptimizerEntry& entry = cfg.optimizers[job.entry];
    const std::uint64_t seed = entry.seeds[job.seed_idx];
    ModelSpec spec = cfg.model;
    spec.seed = seed;
    TrainConfig tcfg = cfg.train;
    tcfg.seed = mix_seed(seed, static_cast<std::uint64_t>(job.fold));
    TrainResult tr = train(spec, data, job.fold, entry.optim, tcfg);

    const Dataset held = subset(data, fold_indices(data.folds, job.fold));
    Forward f = forward(spec, tr.params, held.x);
    rd.probs.probs = std::move(f.probs);
    rd.probs.labels = held.labels;
    rd.probs.run_id = out.id;
    rd.probs.variant = std::string(variant_name(entry.optim.variant));
    rd.probs.seed = seed;
    rd.probs.fold = job.fold;
    if (cfg.fuse_logits) rd.logits = std::move(f.logits);
    save_predictions(rd.probs, out.file);
}

double sample_std(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

PredictionSet with_rows(const PredictionSet& base, const Tensor& rows) {
    PredictionSet p = base;
    p.probs = rows;
    return p;
}

}  // namespace

ExperimentResult experiment_run(const ExperimentConfig& cfg, unsigned workers) {
    cfg.validate();
    Dataset data = load_dataset(cfg.dataset_path, cfg.feature_scale);
    if (data.classes != cfg.model.class_count()) {
        throw std::invalid_argument("dataset has " + std::to_string(data.classes) +
                                    " classes, model outputs " +
                                    std::to_string(cfg.model.class_count()));
    }
    data.split_folds(cfg.folds, cfg.fold_seed);
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<Job> jobs;
    for (std::size_t e = 0; e < cfg.optimizers.size(); ++e) {
        for (std::size_t s = 0; s < cfg.optimizers[e].seeds.size(); ++s) {
            for (int f = 0; f < cfg.folds; ++f) {
                jobs.push_back({e, s, f});
            }
        }
    }

    ExperimentResult res;
    res.runs.resize(jobs.size());
    std::vector<RunData> rundata(jobs.size());
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const OptimizerEntry& entry = cfg.optimizers[jobs[j].entry];
        RunOutcome& out = res.runs[j];
        out.label = entry.label;
        out.seed = entry.seeds[jobs[j].seed_idx];
        out.fold = jobs[j].fold;
        out.id = run_id(out.label, out.seed);
        out.file = (std::filesystem::path(cfg.out_dir) /
                    prediction_filename(out.id, out.fold)).string();
    }

    const unsigned nw = std::min<unsigned>(resolve_workers(workers),
                                           static_cast<unsigned>(jobs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            RunOutcome& out = res.runs[j];
            try {
                run_one(cfg, data, jobs[j], out, rundata[j]);
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = e.what();
            } catch (...) {
                out.error = "unknown error";
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < nw; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    for (const RunOutcome& out : res.runs) {
        if (!out.ok) res.partial = true;
    }

    // Index completed runs by id for the report phase.
    const auto fold_sets = [&](const std::string& id, bool want_logits,
                               std::vector<PredictionSet>& sets) {
        sets.clear();
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            if (res.runs[j].id != id) continue;
            if (!res.runs[j].ok) return false;
            const RunData& rd = rundata[j];
            sets.push_back(want_logits ? with_rows(rd.probs, rd.logits) : rd.probs);
        }
        return sets.size() == static_cast<std::size_t>(cfg.folds);
    };

    for (const OptimizerEntry& entry : cfg.optimizers) {
        std::vector<double> accs;
        std::vector<double> fms;
        for (std::uint64_t seed : entry.seeds) {
            const std::string id = run_id(entry.label, seed);
            std::vector<PredictionSet> sets;
            if (!fold_sets(id, false, sets)) continue;
            EvalReport rep = pooled_report(sets, id, 1);
            accs.push_back(rep.accuracy);
            fms.push_back(rep.f_measure);
            res.standalone.push_back(std::move(rep));
        }
        if (!accs.empty()) {
            SummaryRow row;
            row.label = entry.label;
            row.seed_count = accs.size();
            for (double a : accs) row.acc_avg += a;
            row.acc_avg /= static_cast<double>(accs.size());
            for (double f : fms) row.f_avg += f;
            row.f_avg /= static_cast<double>(fms.size());
            row.acc_std = sample_std(accs, row.acc_avg);
            row.f_std = sample_std(fms, row.f_avg);
            res.summaries.push_back(row);
        }
    }

    for (const EnsembleSpec& group : cfg.ensembles) {
        std::vector<std::vector<PredictionSet>> member_sets;  // [member][fold]
        bool complete = true;
        for (const std::string& id : group.members) {
            std::vector<PredictionSet> sets;
            if (!fold_sets(id, cfg.fuse_logits, sets)) {
                complete = false;
                break;
            }
            member_sets.push_back(std::move(sets));
        }
        if (!complete) {
            res.skipped.push_back(group.name);
            res.partial = true;
            continue;
        }
        std::vector<PredictionSet> fused_folds;
        for (int f = 0; f < cfg.folds; ++f) {
            std::vector<PredictionSet> members;
            for (const auto& sets : member_sets) {
                members.push_back(sets[static_cast<std::size_t>(f)]);
            }
            fused_folds.push_back(fuse_sum(members));
        }
        res.ensembles.push_back(pooled_report(fused_folds, group.name, group.members.size()));
    }
    return res;
}

namespace {

std::vector<PredictionSet> load_fold_sets(const ExperimentConfig& cfg, const std::string& id) {
    std::vector<PredictionSet> sets;
    for (int f = 0; f < cfg.folds; ++f) {
        const std::string path =
            (std::filesystem::path(cfg.out_dir) / prediction_filename(id, f)).string();
        PredictionSet p = load_predictions(path);
        if (p.fold != f) {
            throw std::runtime_error(path + ": holds fold " + std::to_string(p.fold) +
                                     ", expected " + std::to_string(f));
        }
        sets.push_back(std::move(p));
    }
    return sets;
}

std::vector<EvalReport> fuse_groups_from_files(const ExperimentConfig& cfg,
                                               bool write_fused_files) {
    std::vector<EvalReport> reports;
    for (const EnsembleSpec& group : cfg.ensembles) {
        std::vector<std::vector<PredictionSet>> member_sets;
        for (const std::string& id : group.members) {
            member_sets.push_back(load_fold_sets(cfg, id));
        }
        std::vector<PredictionSet> fused_folds;
        for (int f = 0; f < cfg.folds; ++f) {
            std::vector<PredictionSet> members;
            for (const auto& sets : member_sets) {
                members.push_back(sets[static_cast<std::size_t>(f)]);
            }
            PredictionSet fused = fuse_sum(members);
            if (write_fused_files) {
                PredictionSet named = fused;
                named.run_id = group.name;
                const std::string path =
                    (std::filesystem::path(cfg.out_dir) / prediction_filename(group.name, f))
                        .string();
                save_predictions(named, path);
            }
            fused_folds.push_back(std::move(fused));
        }
        reports.push_back(pooled_report(fused_folds, group.name, group.members.size()));
    }
    return reports;
}

}  // namespace

std::vector<EvalReport> fuse_saved(const ExperimentConfig& cfg, bool write_fused_files) {
    cfg.validate();
    return fuse_groups_from_files(cfg, write_fused_files);
}

ExperimentResult report_saved(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    for (const OptimizerEntry& entry : cfg.optimizers) {
        std::vector<double> accs;
        std::vector<double> fms;
        for (std::uint64_t seed : entry.seeds) {
            const std::string id = run_id(entry.label, seed);
            EvalReport rep = pooled_report(load_fold_sets(cfg, id), id, 1);
            accs.push_back(rep.accuracy);
            fms.push_back(rep.f_measure);
            res.standalone.push_back(std::move(rep));
        }
        SummaryRow row;
        row.label = entry.label;
        row.seed_count = accs.size();
        for (double a : accs) row.acc_avg += a;
        row.acc_avg /= static_cast<double>(accs.size());
        for (double f : fms) row.f_avg += f;
        row.f_avg /= static_cast<double>(fms.size());
        row.acc_std = sample_std(accs, row.acc_avg);
        row.f_std = sample_std(fms, row.f_avg);
        res.summaries.push_back(row);
    }
    res.ensembles = fuse_groups_from_files(cfg, false);
    return res;
}

std::vector<ReportRow> flatten_reports(const ExperimentResult& res) {
    std::vector<ReportRow> rows;
    const auto emit_report = [&rows](const EvalReport& rep) {
        for (const FoldMetrics& fm : rep.folds) {
            rows.push_back(
                {rep.method, rep.members, std::to_string(fm.fold), fm.accuracy, fm.f_measure});
        }
        rows.push_back({rep.method, rep.members, "pooled", rep.accuracy, rep.f_measure});
    };
    for (const EvalReport& rep : res.standalone) emit_report(rep);
    for (const SummaryRow& s : res.summaries) {
        rows.push_back({s.label, 1, "pooled-avg", s.acc_avg, s.f_avg});
        rows.push_back({s.label, 1, "pooled-std", s.acc_std, s.f_std});
    }
    for (const EvalReport& rep : res.ensembles) emit_report(rep);
    return rows;
}

void write_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << "method,members,fold,accuracy,f_measure\n";
    char buf[64];
    for (const ReportRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", r.accuracy, r.f_measure);
        out << r.method << ',' << r.members << ',' << r.fold << ',' << buf << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_text_table(std::ostream& out, const std::vector<ReportRow>& rows) {
    std::size_t method_w = 6;
    std::size_t fold_w = 4;
    for (const ReportRow& r : rows) {
        method_w = std::max(method_w, r.method.size());
        fold_w = std::max(fold_w, r.fold.size());
    }
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %7s  %-*s  %9s  %9s\n", static_cast<int>(method_w),
                  "method", "members", static_cast<int>(fold_w), "fold", "accuracy", "f_measure");
    out << line;
    for (const ReportRow& r : rows) {
        std::snprintf(line, sizeof(line), "%-*s  %7zu  %-*s  %9.6f  %9.6f\n",
                      static_cast<int>(method_w), r.method.c_str(), r.members,
                      static_cast<int>(fold_w), r.fold.c_str(), r.accuracy, r.f_measure);
        out << line;
    }
}

void write_manifest(const std::string& path, const ExperimentResult& res) {
    json j;
    j["partial"] = res.partial;
    j["runs"] = json::array();
    for (const RunOutcome& r : res.runs) {
        json e;
        e["id"] = r.id;
        e["label"] = r.label;
        e["seed"] = r.seed;
        e["fold"] = r.fold;
        e["file"] = r.file;
        e["ok"] = r.ok;
        if (!r.ok) e["error"] = r.error;
        j["runs"].push_back(std::move(e));
    }
    j["skipped_ensembles"] = res.skipped;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gradkit
