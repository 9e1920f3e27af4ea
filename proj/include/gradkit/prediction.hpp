#pragma once

#include <string>

#include "gradkit/ensemble.hpp"

namespace gradkit {

/// Decimal text with 17 significant digits; round-trips IEEE doubles exactly.
std::string format_g17(double v);

/// One header line (run id, variant, seed, fold, class count), then one line
/// per sample: label followed by the score row. Loader enforces that each
/// row sums to 1 within 1e-9, since files always carry probabilities.
void save_predictions(const PredictionSet& p, const std::string& path);
PredictionSet load_predictions(const std::string& path);

}  // namespace gradkit
