#pragma once

#include <cstdint>

#include "noisecal/metrics.hpp"
#include "noisecal/models.hpp"

namespace noisecal {

// Shuffled k-fold cross-validation (fold sizes differ by at most one). With
// temporal_blocks the folds are contiguous index ranges instead of a random
// partition. Per-fold metrics plus pooled metrics over the concatenated
// held-out predictions.
EvalReport cross_validate(const Dataset& d, const FitSpec& spec, int folds, std::uint64_t seed,
                          bool temporal_blocks = false);

// Applies a model fitted elsewhere to a new dataset.
EvalReport transfer_evaluate(const Model& m, const Dataset& target);

}  // namespace noisecal
