#include "lito/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "lito/errors.hpp"
#include "lito/lm_train.hpp"

namespace lito {
namespace {

constexpr char kUnanswerableReference[] = "no known answer";

// Answerable window codes enumerate the 1-based sub-ranges [lo, hi] of the
// grid; the code after the last range marks an unanswerable question.
std::vector<std::pair<int, int>> enumerate_windows(std::size_t n_grid) {
    std::vector<std::pair<int, int>> out;
    for (int lo = 1; lo <= static_cast<int>(n_grid); ++lo)
        for (int hi = lo; hi <= static_cast<int>(n_grid); ++hi) out.push_back({lo, hi});
    return out;
}

std::string question_for_code(std::size_t code) {
    return std::string("code ") + static_cast<char>('a' + code) + "?";
}

char right_byte(std::size_t region) { return static_cast<char>('A' + region - 1); }
char wrong_byte(std::size_t region) { return static_cast<char>('S' + region); }

bool in_window(std::pair<int, int> window, std::size_t region) {
    return static_cast<int>(region) >= window.first && static_cast<int>(region) <= window.second;
}

char expected_byte(std::pair<int, int> window, std::size_t region) {
    return in_window(window, region) ? right_byte(region) : wrong_byte(region);
}

std::vector<double> extended_alphas(const SyntheticBenchmark& bench) {
    std::vector<double> alphas{0.0};
    for (double a : bench.grid_ext.values) alphas.push_back(a);
    return alphas;
}

// One teacher-forced sequence per (window code, intensity region), with the
// intervention active exactly as it will be at inference time. Each sequence
// carries a trailing grade line ("G: +" for a correct answer byte, "G: -"
// otherwise) so the model is forced to represent answer correctness; greedy
// decoding stops at the newline before it. Loss starts right after "A:".
std::vector<TrainExample> build_corpus(const SyntheticBenchmark& bench, const DirectionSet& ds) {
    auto windows = enumerate_windows(bench.grid.k());
    windows.push_back({1, 0});  // unanswerable
    const auto alphas = extended_alphas(bench);
    std::vector<TrainExample> corpus;
    for (std::size_t code = 0; code < windows.size(); ++code) {
        for (std::size_t r = 0; r < alphas.size(); ++r) {
            const char grade = in_window(windows[code], r) ? '+' : '-';
            const std::string tail =
                std::string(" ") + expected_byte(windows[code], r) + "\nG: " + grade + "\n";
            TrainExample ex;
            ex.tokens = encode_bytes(synthetic_prompt(question_for_code(code)) + tail);
            ex.loss_start = ex.tokens.size() - tail.size();
            ex.intervention = ds.at_intensity(alphas[r]);
            corpus.push_back(std::move(ex));
        }
    }
    return corpus;
}

// Representation pretraining: the model grades every (question, answer byte)
// pair, so answer correctness becomes linearly decodable from attention-head
// activations at the answer byte. No interventions are active here.
std::vector<TrainExample> build_grade_corpus(const SyntheticBenchmark& bench) {
    auto windows = enumerate_windows(bench.grid.k());
    windows.push_back({1, 0});
    const std::size_t n_regions = bench.grid_ext.k() + 1;
    std::vector<TrainExample> corpus;
    for (std::size_t code = 0; code < windows.size(); ++code) {
        auto add = [&](char byte, bool correct) {
            const std::string tail =
                std::string(" ") + byte + "\nG: " + (correct ? '+' : '-') + "\n";
            TrainExample ex;
            ex.tokens = encode_bytes(synthetic_prompt(question_for_code(code)) + tail);
            ex.loss_start = ex.tokens.size() - 5;  // the "G: x\n" grade line
            corpus.push_back(std::move(ex));
        };
        for (std::size_t r = 1; r <= bench.grid.k(); ++r)
            add(right_byte(r), in_window(windows[code], r));
        for (std::size_t r = 0; r < n_regions; ++r) add(wrong_byte(r), false);
    }
    return corpus;
}

// Everything a probe can observe must stay fixed during behavioral
// fine-tuning. Head activations are captured before the output projection, so
// the last layer's output projection and MLP, the final layer norm, and the
// unembedding are the only tensors that can move without perturbing any
// probe's input. Indices follow the for_each_tensor order.
std::vector<std::size_t> frozen_for_behavior_tuning(std::uint32_t n_layers) {
    std::vector<std::size_t> frozen;
    const std::size_t last_wo = 2 + (n_layers - 1) * 16 + 8;
    for (std::size_t idx = 0; idx < last_wo; ++idx) frozen.push_back(idx);
    return frozen;
}

bool directions_stable(const DirectionSet& a, const DirectionSet& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        if (a.entries[i].address.layer != b.entries[i].address.layer ||
            a.entries[i].address.head != b.entries[i].address.head)
            return false;
        if (cosine(a.entries[i].direction, b.entries[i].direction) < 0.999) return false;
    }
    return true;
}

}  // namespace

std::string synthetic_prompt(const std::string& question) {
    return "Q: " + question + "\nA:";
}

std::vector<LabeledPrompt> probe_prompts_bare(const std::vector<ProbePair>& pairs) {
    std::vector<LabeledPrompt> out;
    out.reserve(pairs.size() * 2);
    for (const auto& p : pairs) {
        const std::string base = synthetic_prompt(p.question) + " ";
        out.push_back({base + p.correct_answer, 1});
        out.push_back({base + p.incorrect_answer, 0});
    }
    return out;
}

std::string synthetic_expected_text(std::pair<int, int> window, std::size_t region) {
    return std::string(1, expected_byte(window, region));
}

DirectionSet synthetic_pipeline_directions(const SyntheticBenchmark& bench) {
    auto prompts = probe_prompts_bare(bench.probe_pairs);
    auto probes = train_all_probes(bench.weights, prompts, bench.probe_seed);
    return select_heads(probes, bench.top_k);
}

double verify_benchmark(const SyntheticBenchmark& bench, const DirectionSet& directions) {
    const auto alphas = extended_alphas(bench);
    std::size_t hits = 0, cells = 0;
    for (std::size_t i = 0; i < bench.items.size(); ++i) {
        const std::string prompt = synthetic_prompt(bench.items[i].question);
        for (std::size_t r = 0; r < alphas.size(); ++r) {
            GenerationTrace t = generate(bench.weights, encode_bytes(prompt),
                                         directions.at_intensity(alphas[r]), 8,
                                         kSyntheticStopToken);
            ++cells;
            if (response_from_trace(t, alphas[r]).text ==
                synthetic_expected_text(bench.windows[i], r))
                ++hits;
        }
    }
    if (cells == 0) throw data_error("verify_benchmark: no items");
    return static_cast<double>(hits) / static_cast<double>(cells);
}

SyntheticBenchmark generate_synthetic_benchmark(const SyntheticGenConfig& cfg) {
    if (cfg.n_items == 0) throw config_error("synthetic: n_items must be positive");
    if (cfg.unanswerable_fraction < 0.0 || cfg.unanswerable_fraction >= 1.0)
        throw config_error("synthetic: unanswerable_fraction must be in [0, 1)");
    if (cfg.n_grid < 2) throw config_error("synthetic: need at least two grid intensities");

    SyntheticBenchmark bench;
    bench.config = ModelConfig{2, 2, 32, 16, 128, 64};
    bench.seed = cfg.seed;
    bench.probe_seed = cfg.probe_seed;
    bench.top_k = cfg.top_k;
    for (std::size_t r = 1; r <= cfg.n_grid; ++r) bench.grid.values.push_back(5.0 * r);
    bench.grid_ext = bench.grid;
    for (std::size_t e = 0; e < cfg.n_extra_regions; ++e)
        bench.grid_ext.values.push_back(5.0 * (cfg.n_grid + e + 1));

    const auto windows = enumerate_windows(cfg.n_grid);
    const std::size_t unanswerable_code = windows.size();

    // Items: sampled window codes, shared question text per code.
    SeededRng rng(cfg.seed);
    const std::size_t n_unanswerable =
        static_cast<std::size_t>(std::lround(cfg.unanswerable_fraction * cfg.n_items));
    for (std::size_t i = 0; i < cfg.n_items; ++i) {
        const bool unanswerable = i < n_unanswerable;
        const std::size_t code = unanswerable ? unanswerable_code : rng.uniform_index(windows.size());
        QAItem item;
        char id[16];
        std::snprintf(id, sizeof id, "synth-%04zu", i);
        item.id = id;
        item.question = question_for_code(code);
        if (unanswerable) {
            item.references = {kUnanswerableReference};
            bench.windows.push_back({1, 0});
        } else {
            for (int r = windows[code].first; r <= windows[code].second; ++r)
                item.references.push_back(std::string(1, right_byte(r)));
            bench.windows.push_back(windows[code]);
        }
        bench.items.push_back(std::move(item));
    }
    // Deterministic shuffle so the train/test split is not confounded with the
    // unanswerable block, then split by position.
    std::vector<std::size_t> order(cfg.n_items);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const std::size_t n_train =
        std::max<std::size_t>(1, static_cast<std::size_t>(cfg.train_fraction * cfg.n_items));
    std::vector<QAItem> items;
    std::vector<std::pair<int, int>> wins;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        QAItem item = bench.items[order[pos]];
        item.split = pos < n_train ? "train" : "test";
        items.push_back(std::move(item));
        wins.push_back(bench.windows[order[pos]]);
    }
    bench.items = std::move(items);
    bench.windows = std::move(wins);

    // Probe pairs: region-matched correct/incorrect answer bytes per code.
    for (std::size_t code = 0; code < windows.size(); ++code) {
        for (std::size_t rep = 0; rep < cfg.probe_pairs_per_code; ++rep) {
            const std::size_t r =
                windows[code].first + rng.uniform_index(windows[code].second - windows[code].first + 1);
            ProbePair pair;
            pair.question = question_for_code(code);
            pair.correct_answer = std::string(1, right_byte(r));
            pair.incorrect_answer = std::string(1, wrong_byte(r));
            bench.probe_pairs.push_back(std::move(pair));
        }
    }

    // Phase 1: grade pretraining, then run the real probe pipeline over the
    // pretrained weights to obtain the steering direction.
    bench.weights = init_model(bench.config, cfg.seed);
    LmTrainConfig train_cfg;
    train_cfg.epochs = cfg.epochs_per_round;
    train_cfg.learning_rate = cfg.learning_rate;
    train_lm(bench.weights, build_grade_corpus(bench), train_cfg);
    DirectionSet ds = synthetic_pipeline_directions(bench);
    const auto& accs = ds.metadata.at("selected");
    for (std::size_t i = 0; i < ds.entries.size(); ++i) {
        if (accs[i].at("validation_accuracy").get<double>() < 0.9)
            throw data_error("synthetic: probes did not separate the planted classes; "
                             "adjust epochs_per_round");
    }

    // Phase 2: teach the intensity -> answer mapping with the intervention
    // active, freezing everything the probes observe. Probe activations are
    // then bit-identical afterwards, so rerunning the pipeline reproduces the
    // direction exactly: the probe -> direction -> behavior loop is closed by
    // construction rather than by iteration.
    train_cfg.frozen_tensors = frozen_for_behavior_tuning(bench.config.n_layers);
    for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
        train_lm(bench.weights, build_corpus(bench, ds), train_cfg);
        DirectionSet replayed = synthetic_pipeline_directions(bench);
        if (directions_stable(ds, replayed) && verify_benchmark(bench, replayed) == 1.0)
            return bench;
    }
    throw data_error("synthetic: generator did not reach the planted behavior; "
                     "raise epochs_per_round or max_rounds");
}

}  // namespace lito
