#pragma once

#include <utility>

#include "lito/data.hpp"
#include "lito/lm.hpp"
#include "lito/sweep.hpp"

namespace lito {

// Synthetic planted benchmark: a byte-level corpus plus a toy LM overfit so
// that each answerable question is answered correctly exactly when the
// intervention intensity falls inside the item's planted window. The window
// is encoded in the question's code byte; correctness at grid index r emits
// byte 'A'+r-1 inside the window and a disjoint wrong byte outside, so the
// exact-match oracle recovers the planted windows with no further machinery.
//
// The steering channel is discovered through the real pipeline: probes are
// trained on correct/incorrect answer suffixes, the top head's probe weight
// becomes the direction, and the LM is then fine-tuned with that exact
// intervention active until the probe -> direction -> behavior loop reaches a
// fixed point and a 100% self-check passes.

struct SyntheticGenConfig {
    std::uint64_t seed = 2024;
    std::size_t n_items = 500;
    double unanswerable_fraction = 0.1;
    std::size_t n_grid = 5;           // intensity grid {5, 10, ..., 5*n_grid}
    std::size_t n_extra_regions = 1;  // extra trained region(s) past the grid (for k sweeps)
    double train_fraction = 0.6;      // item split: train vs test
    std::size_t probe_pairs_per_code = 10;
    std::uint64_t probe_seed = 7;
    std::size_t top_k = 1;
    std::size_t max_rounds = 4;
    std::size_t epochs_per_round = 300;
    double learning_rate = 3e-3;
};

struct SyntheticBenchmark {
    ModelConfig config;
    ModelWeights weights;
    std::vector<QAItem> items;
    // Per-item planted window as 1-based grid indices [lo, hi]; lo > hi means
    // unanswerable (no grid intensity yields the correct answer).
    std::vector<std::pair<int, int>> windows;
    std::vector<ProbePair> probe_pairs;
    IntensitySchedule grid;      // {5, ..., 5*n_grid}
    IntensitySchedule grid_ext;  // grid plus the extra trained regions
    std::uint64_t seed = 0;
    std::uint64_t probe_seed = 0;
    std::size_t top_k = 1;
};

// Bare desk-scale prompt form used by the synthetic benchmark.
std::string synthetic_prompt(const std::string& question);
inline constexpr int kSyntheticStopToken = '\n';

// Probe prompts in the bare form: prompt + " " + answer, labeled 1/0.
std::vector<LabeledPrompt> probe_prompts_bare(const std::vector<ProbePair>& pairs);

// Expected generation for a window at grid region r (1-based; r outside
// [1, n_grid + extras] is region 0 = unintervened).
std::string synthetic_expected_text(std::pair<int, int> window, std::size_t region);

SyntheticBenchmark generate_synthetic_benchmark(const SyntheticGenConfig& cfg);

// Reruns the real probe pipeline on the benchmark's weights and returns the
// direction set the pipeline would produce.
DirectionSet synthetic_pipeline_directions(const SyntheticBenchmark& bench);

// Fraction of (item, region) cells whose sweep output matches the planted
// window, over regions 0..n_grid+extras. 1.0 for a released benchmark.
double verify_benchmark(const SyntheticBenchmark& bench, const DirectionSet& directions);

}  // namespace lito
