#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lito/directions.hpp"
#include "lito/lm.hpp"

namespace lito {

struct IntensitySchedule {
    std::vector<double> values;  // strictly increasing, all >= 0

    static IntensitySchedule head_level_default() { return {{5, 10, 15, 20, 25}}; }
    static IntensitySchedule layer_level_default() { return {{1, 2, 3, 4, 5}}; }

    std::size_t k() const { return values.size(); }
    void validate() const;
};

struct ResponseRecord {
    double intensity = 0.0;
    std::string text;          // detokenized, stop token and surrounding whitespace trimmed
    std::size_t token_count = 0;
    Vector agg_hidden;         // mean last-layer hidden over generated tokens; zero if empty
    double confidence = 0.0;   // geometric mean of token probabilities; 0 if empty
};

struct SweepResult {
    std::string prompt_id;
    std::string prompt;
    std::vector<ResponseRecord> records;  // one per schedule value, in schedule order
};

// Geometric mean of token probabilities, computed as exp(mean of logs).
// Empty input -> 0 by convention.
double confidence(const Vector& per_token_prob);

// Mean of the trace's generated-token hidden states; zero vector when empty.
Vector aggregate_hidden(const GenerationTrace& trace);

ResponseRecord response_from_trace(const GenerationTrace& trace, double intensity);

SweepResult run_sweep(const ModelWeights& w, const DirectionSet& directions,
                      const IntensitySchedule& schedule, const std::string& prompt_id,
                      const std::string& prompt, std::size_t max_new_tokens, int stop_token);

// JSON-lines interchange between the sweep and selector stages.
nlohmann::ordered_json sweep_to_json(const SweepResult& s);
SweepResult sweep_from_json(const nlohmann::ordered_json& j);
void save_sweeps_jsonl(const std::vector<SweepResult>& sweeps, const std::string& path);
std::vector<SweepResult> load_sweeps_jsonl(const std::string& path);

}  // namespace lito
