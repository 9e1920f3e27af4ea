#include "gradkit/prediction.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gradkit {

namespace {

constexpr char kMagic[] = "gradkit-predictions";
constexpr double kRowSumTol = 1e-9;

std::string expect_kv(std::istringstream& in, const std::string& key, const std::string& path) {
    std::string tok;
    if (!(in >> tok) || tok.rfind(key + "=", 0) != 0) {
        throw std::runtime_error(path + ": header is missing " + key + "=");
    }
    return tok.substr(key.size() + 1);
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_predictions(const PredictionSet& p, const std::string& path) {
    p.validate();
    if (p.run_id.empty() || p.run_id.find_first_of(" \t\n") != std::string::npos) {
        throw std::invalid_argument("run id must be non-empty and free of whitespace: \"" +
                                    p.run_id + "\"");
    }
    if (p.variant.empty() || p.variant.find_first_of(" \t\n") != std::string::npos) {
        throw std::invalid_argument("variant label must be non-empty and free of whitespace");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write prediction file: " + path);
    out << kMagic << " run=" << p.run_id << " variant=" << p.variant << " seed=" << p.seed
        << " fold=" << p.fold << " classes=" << p.classes() << "\n";
    for (std::size_t r = 0; r < p.samples(); ++r) {
        out << p.labels[r];
        for (std::size_t c = 0; c < p.classes(); ++c) {
            out << ' ' << format_g17(p.probs.at(r, c));
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

PredictionSet load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prediction file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path + ": empty file");
    std::istringstream hs(header);
    std::string magic;
    hs >> magic;
    if (magic != kMagic) throw std::runtime_error(path + ": not a prediction file");

    PredictionSet p;
    p.run_id = expect_kv(hs, "run", path);
    p.variant = expect_kv(hs, "variant", path);
    std::size_t classes = 0;
    try {
        p.seed = std::stoull(expect_kv(hs, "seed", path));
        p.fold = std::stoi(expect_kv(hs, "fold", path));
        classes = std::stoul(expect_kv(hs, "classes", path));
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": malformed header numbers");
    }
    if (classes == 0) throw std::runtime_error(path + ": class count must be positive");

    std::vector<double> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int label = 0;
        if (!(ls >> label)) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad label");
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            double v = 0.0;
            if (!(ls >> v)) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                         std::to_string(classes) + " probabilities");
            }
            rows.push_back(v);
            sum += v;
        }
        double extra;
        if (ls >> extra) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": trailing values");
        }
        if (std::fabs(sum - 1.0) > kRowSumTol) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": probability row sums to " + format_g17(sum));
        }
        labels.push_back(label);
    }
    if (labels.empty()) throw std::runtime_error(path + ": no sample rows");
    p.probs = Tensor(std::move(rows), {labels.size(), classes});
    p.labels = std::move(labels);
    p.validate();
    return p;
}

}  // namespace gradkit
