#pragma once

#include <functional>

#include "lito/lm.hpp"

namespace lito {

// One teacher-forced training sequence. Tokens at positions >= loss_start are
// predicted (each from its prefix); earlier positions are context only. The
// intervention, if any, is active during the forward pass exactly as it would
// be at inference time.
struct TrainExample {
    std::vector<int> tokens;
    std::size_t loss_start = 1;
    InterventionSet intervention;
};

struct LmTrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 1.0;  // global-norm clip; 0 disables
    // Indices into the for_each_tensor order whose tensors are held fixed.
    std::vector<std::size_t> frozen_tensors;
};

struct LmTrainReport {
    std::vector<double> epoch_losses;  // mean cross-entropy per predicted token
};

// Mean cross-entropy over the example's predicted tokens plus gradient
// accumulation into `grad` (same shape as `w`). Returns (summed loss, count).
std::pair<double, std::size_t> lm_loss_and_grad(const ModelWeights& w,
                                                const TrainExample& example,
                                                ModelWeights& grad);

// Deterministic full-batch Adam. Examples are visited in order every epoch.
LmTrainReport train_lm(ModelWeights& w, const std::vector<TrainExample>& examples,
                       const LmTrainConfig& cfg,
                       const std::function<void(std::size_t, double)>& log = nullptr);

}  // namespace lito
