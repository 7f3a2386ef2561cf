#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lito/lm.hpp"
#include "lito/numerics.hpp"

namespace lito {

struct ProbeItem {
    Vector activation;
    int label = 0;  // 1 = correct-answer prompt, 0 = incorrect-answer prompt
};

struct ProbeDataset {
    std::vector<ProbeItem> items;
};

struct ProbeResult {
    HeadAddress address;
    Vector weight;
    double bias = 0.0;
    double validation_accuracy = 0.0;
};

enum class DirectionMode { head_level, layer_level };
enum class DirectionProvenance { iti, repe };

struct DirectionEntry {
    HeadAddress address;  // head meaningful only in head-level mode
    Vector direction;     // unit norm
};

struct DirectionSet {
    DirectionMode mode = DirectionMode::head_level;
    DirectionProvenance provenance = DirectionProvenance::iti;
    std::vector<DirectionEntry> entries;
    nlohmann::ordered_json metadata;  // validation accuracies, selected K / layer

    // Intervention with every direction at one uniform intensity.
    InterventionSet at_intensity(double alpha) const;
};

nlohmann::ordered_json direction_set_to_json(const DirectionSet& ds);
DirectionSet direction_set_from_json(const nlohmann::ordered_json& j);
void save_direction_set(const DirectionSet& ds, const std::string& path);
DirectionSet load_direction_set(const std::string& path);

// A prompt whose final token is an answer's last token, plus its label.
using LabeledPrompt = std::pair<std::string, int>;

// One activation per prompt, captured at the prompt's last token.
ProbeDataset collect_probe_data(const ModelWeights& w,
                                const std::vector<LabeledPrompt>& qa_pairs,
                                HeadAddress address);

struct ProbeTrainTrace {
    std::vector<double> losses;  // full-batch loss per gradient step
};

// Logistic regression: full-batch gradient descent, lr 0.05, 2000 steps,
// L2 1e-4 on the weights, zero init. Validation on a seeded 20% holdout.
ProbeResult train_probe(const ProbeDataset& data, std::uint64_t seed,
                        double train_fraction = 0.8, ProbeTrainTrace* trace = nullptr);

// Train one probe per head; head h of layer l uses seed base_seed + l*H + h so
// parallel and serial execution agree.
std::vector<ProbeResult> train_all_probes(const ModelWeights& w,
                                          const std::vector<LabeledPrompt>& qa_pairs,
                                          std::uint64_t base_seed);

// Top-k probes by validation accuracy (ties by ascending (layer, head));
// weights are unit-normalized into directions.
DirectionSet select_heads(const std::vector<ProbeResult>& results, std::size_t top_k);

// Per-layer first principal component of last-token hidden-state differences
// (truthful minus untruthful) over counterfactual pairs.
std::vector<Vector> repe_directions(const ModelWeights& w,
                                    const std::vector<std::pair<std::string, std::string>>& pairs);

// Scores each layer by sign-of-centered-projection accuracy on labeled
// validation prompts; returns a single-entry layer-level DirectionSet.
DirectionSet select_repe_layer(const ModelWeights& w, const std::vector<Vector>& candidates,
                               const std::vector<LabeledPrompt>& validation_prompts);

}  // namespace lito
