#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lito/numerics.hpp"
#include "lito/sweep.hpp"

namespace lito {

inline constexpr const char* kRefusalString = "I have no comment.";

enum class SelectorVariant { recurrent, mlp };

// 1-layer LSTM over the sweep's aggregated hidden states h_1..h_k plus a
// sigmoid linear head producing a per-response factuality probability.
// The mlp variant replaces the cell with one affine map + ReLU per step.
struct SelectorModel {
    SelectorVariant variant = SelectorVariant::recurrent;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;  // max(4, input_dim / 8)

    // Recurrent: wx is 4H x D, wh is 4H x H, b is 4H (gate order i, f, g, o).
    // MLP: wx is H x D, b is H, wh unused.
    Matrix wx, wh;
    Vector b;
    Vector head_w;  // hidden_dim
    double head_b = 0.0;

    static std::size_t hidden_for_input(std::size_t input_dim) {
        return std::max<std::size_t>(4, input_dim / 8);
    }
    static SelectorModel zeros(std::size_t input_dim, SelectorVariant variant);
    static SelectorModel random_init(std::size_t input_dim, SelectorVariant variant,
                                     SeededRng& rng, double scale = 0.1);

    template <typename Fn>
    void for_each_param(Fn&& fn) {
        fn(wx.storage());
        if (variant == SelectorVariant::recurrent) fn(wh.storage());
        fn(b);
        fn(head_w);
    }
};

// Per-step factuality probabilities, sigmoid(<w, h_{r,i}> + b).
std::vector<double> selector_forward(const SelectorModel& model,
                                     const std::vector<Vector>& hidden_seq);

// Mean per-step binary cross-entropy + l2_coeff * squared norm of all
// parameters; gradients by backpropagation through time.
struct SelectorBackward {
    double loss = 0.0;
    SelectorModel grads;  // same shapes as the model; head_b grad in grads.head_b
};
SelectorBackward selector_backward(const SelectorModel& model,
                                   const std::vector<Vector>& hidden_seq,
                                   const std::vector<int>& labels, double l2_coeff);

struct SequenceExample {
    std::vector<Vector> hidden_seq;
    std::vector<int> labels;  // per-step 0/1
};

struct SelectorTrainConfig {
    double l2_coeff = 0.001;
    std::size_t max_epochs = 50;
    std::size_t patience = 10;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
    bool upsample_minority = true;
    SelectorVariant variant = SelectorVariant::recurrent;
};

struct SelectorTrainReport {
    std::vector<double> epoch_losses;
    std::vector<double> epoch_val_f1;
    double best_f1 = 0.0;
    std::size_t best_epoch = 0;
    std::size_t epochs_ran = 0;
};

struct SelectorTraining {
    SelectorModel model;  // checkpoint with the best validation F1
    SelectorTrainReport report;
};

// Full-batch gradient descent with a seeded 20% validation holdout,
// minority-step-label upsampling, early stopping (patience epochs without a
// validation F1 improvement, at most max_epochs), best-F1 checkpointing.
SelectorTraining train_selector(const std::vector<SequenceExample>& dataset,
                                const SelectorTrainConfig& cfg);

// Step-level F1 of thresholded predictions against labels (positive class 1).
double step_f1(const std::vector<std::vector<double>>& probs,
               const std::vector<std::vector<int>>& labels, double threshold = 0.5);

struct SelectorDecision {
    std::optional<std::size_t> chosen_index;
    std::string output_text;
    bool refused = false;
    std::vector<double> probabilities;
    std::vector<int> predicted_labels;
};

// Among responses predicted accurate, output the one with the highest
// confidence (ties -> lowest intensity); refuse when none qualifies.
SelectorDecision decide(const SelectorModel& model, const SweepResult& sweep,
                        double threshold = 0.5);

nlohmann::ordered_json selector_to_json(const SelectorModel& m,
                                        const SelectorTrainReport* report = nullptr);
SelectorModel selector_from_json(const nlohmann::ordered_json& j);
void save_selector(const SelectorModel& m, const std::string& path,
                   const SelectorTrainReport* report = nullptr);
SelectorModel load_selector(const std::string& path);

}  // namespace lito
