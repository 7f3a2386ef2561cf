#include "lito/directions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lito/io_util.hpp"

namespace lito {

InterventionSet DirectionSet::at_intensity(double alpha) const {
    InterventionSet set;
    set.mode = mode == DirectionMode::head_level ? InterventionMode::head_level
                                                 : InterventionMode::layer_level;
    for (const auto& e : entries) {
        set.entries.push_back({e.address, e.direction, alpha});
    }
    return set;
}

nlohmann::ordered_json direction_set_to_json(const DirectionSet& ds) {
    nlohmann::ordered_json j;
    j["mode"] = ds.mode == DirectionMode::head_level ? "head-level" : "layer-level";
    j["provenance"] = ds.provenance == DirectionProvenance::iti ? "ITI" : "RepE";
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : ds.entries) {
        nlohmann::ordered_json je;
        je["layer"] = e.address.layer;
        if (ds.mode == DirectionMode::head_level) je["head"] = e.address.head;
        je["direction"] = e.direction;
        j["entries"].push_back(je);
    }
    j["metadata"] = ds.metadata.is_null() ? nlohmann::ordered_json::object() : ds.metadata;
    return j;
}

DirectionSet direction_set_from_json(const nlohmann::ordered_json& j) {
    DirectionSet ds;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "head-level") {
        ds.mode = DirectionMode::head_level;
    } else if (mode == "layer-level") {
        ds.mode = DirectionMode::layer_level;
    } else {
        throw data_error("DirectionSet: unknown mode '" + mode + "'");
    }
    const std::string prov = j.at("provenance").get<std::string>();
    if (prov == "ITI") {
        ds.provenance = DirectionProvenance::iti;
    } else if (prov == "RepE") {
        ds.provenance = DirectionProvenance::repe;
    } else {
        throw data_error("DirectionSet: unknown provenance '" + prov + "'");
    }
    for (const auto& je : j.at("entries")) {
        DirectionEntry e;
        e.address.layer = je.at("layer").get<std::uint32_t>();
        if (ds.mode == DirectionMode::head_level) e.address.head = je.at("head").get<std::uint32_t>();
        e.direction = je.at("direction").get<Vector>();
        ds.entries.push_back(std::move(e));
    }
    if (ds.entries.empty()) {
        throw data_error("DirectionSet: entries must be nonempty");
    }
    if (j.contains("metadata")) ds.metadata = j.at("metadata");
    return ds;
}

void save_direction_set(const DirectionSet& ds, const std::string& path) {
    atomic_write_text(path, direction_set_to_json(ds).dump(2) + "\n");
}

DirectionSet load_direction_set(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("load_direction_set: cannot open " + path);
    nlohmann::ordered_json j;
    is >> j;
    return direction_set_from_json(j);
}

ProbeDataset collect_probe_data(const ModelWeights& w,
                                const std::vector<LabeledPrompt>& qa_pairs,
                                HeadAddress address) {
    if (qa_pairs.empty()) {
        throw contract_error("collect_probe_data: empty input");
    }
    bool has0 = false, has1 = false;
    for (const auto& [_, label] : qa_pairs) {
        (label == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) {
        throw data_error("collect_probe_data: both labels must be present");
    }
    ProbeDataset ds;
    ds.items.reserve(qa_pairs.size());
    for (const auto& [prompt, label] : qa_pairs) {
        ds.items.push_back({capture_head_activation(w, encode_bytes(prompt), address), label});
    }
    return ds;
}

ProbeResult train_probe(const ProbeDataset& data, std::uint64_t seed, double train_fraction,
                        ProbeTrainTrace* trace) {
    const std::size_t n = data.items.size();
    if (n < 10) {
        throw data_error("train_probe: need >= 10 items");
    }
    const std::size_t dim = data.items[0].activation.size();
    for (const auto& it : data.items) {
        if (it.activation.size() != dim) {
            throw contract_error("train_probe: inconsistent activation dimensions");
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng(seed);
    rng.shuffle(order);
    const std::size_t n_train =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                     static_cast<double>(n) * train_fraction)));
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                                     order.end());
    if (val_idx.empty()) {
        throw data_error("train_probe: empty validation split");
    }
    bool has0 = false, has1 = false;
    for (std::size_t i : train_idx) {
        (data.items[i].label == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) {
        throw data_error("train_probe: train split is single-class");
    }

    const double lr = 0.05;
    const int steps = 2000;
    const double l2 = 1e-4;
    Vector weight(dim, 0.0);
    double bias = 0.0;
    const double inv_m = 1.0 / static_cast<double>(train_idx.size());

    for (int step = 0; step < steps; ++step) {
        Vector gw(dim, 0.0);
        double gb = 0.0;
        double loss = 0.0;
        for (std::size_t i : train_idx) {
            const auto& it = data.items[i];
            const double z = dot(weight, it.activation) + bias;
            const double p = sigmoid(z);
            const double y = static_cast<double>(it.label);
            const double err = p - y;
            for (std::size_t c = 0; c < dim; ++c) gw[c] += err * it.activation[c];
            gb += err;
            // BCE via the numerically stable log(1+exp) form.
            loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        }
        if (trace) {
            double reg = 0.0;
            for (double wv : weight) reg += wv * wv;
            trace->losses.push_back(loss * inv_m + l2 * reg);
        }
        for (std::size_t c = 0; c < dim; ++c) {
            weight[c] -= lr * (gw[c] * inv_m + 2.0 * l2 * weight[c]);
        }
        bias -= lr * gb * inv_m;
    }

    std::size_t correct = 0;
    for (std::size_t i : val_idx) {
        const auto& it = data.items[i];
        const bool pred = sigmoid(dot(weight, it.activation) + bias) > 0.5;
        if (pred == (it.label == 1)) ++correct;
    }

    ProbeResult res;
    res.weight = std::move(weight);
    res.bias = bias;
    res.validation_accuracy = static_cast<double>(correct) / static_cast<double>(val_idx.size());
    return res;
}

std::vector<ProbeResult> train_all_probes(const ModelWeights& w,
                                          const std::vector<LabeledPrompt>& qa_pairs,
                                          std::uint64_t base_seed) {
    std::vector<ProbeResult> results;
    results.reserve(w.config.n_layers * w.config.n_heads);
    for (std::uint32_t l = 0; l < w.config.n_layers; ++l) {
        for (std::uint32_t h = 0; h < w.config.n_heads; ++h) {
            HeadAddress addr{l, h};
            ProbeDataset data = collect_probe_data(w, qa_pairs, addr);
            ProbeResult res =
                train_probe(data, base_seed + l * w.config.n_heads + h);
            res.address = addr;
            results.push_back(std::move(res));
        }
    }
    return results;
}

DirectionSet select_heads(const std::vector<ProbeResult>& results, std::size_t top_k) {
    if (top_k < 1 || top_k > results.size()) {
        throw contract_error("select_heads: top_k must be in [1, results.size()]");
    }
    std::vector<const ProbeResult*> sorted;
    sorted.reserve(results.size());
    for (const auto& r : results) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const ProbeResult* a, const ProbeResult* b) {
        if (a->validation_accuracy != b->validation_accuracy) {
            return a->validation_accuracy > b->validation_accuracy;
        }
        return a->address < b->address;
    });

    DirectionSet ds;
    ds.mode = DirectionMode::head_level;
    ds.provenance = DirectionProvenance::iti;
    nlohmann::ordered_json accs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < top_k; ++i) {
        const ProbeResult* r = sorted[i];
        ds.entries.push_back({r->address, normalized(r->weight)});
        nlohmann::ordered_json ja;
        ja["layer"] = r->address.layer;
        ja["head"] = r->address.head;
        ja["validation_accuracy"] = r->validation_accuracy;
        accs.push_back(ja);
    }
    ds.metadata["top_k"] = top_k;
    ds.metadata["selected"] = accs;
    return ds;
}

std::vector<Vector> repe_directions(const ModelWeights& w,
                                    const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.size() < 2) {
        throw contract_error("repe_directions: need >= 2 counterfactual pairs");
    }
    const std::size_t L = w.config.n_layers;
    std::vector<Matrix> diffs(L, Matrix(pairs.size(), w.config.d_model));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto truthful = capture_layer_hidden(w, encode_bytes(pairs[p].first));
        auto untruthful = capture_layer_hidden(w, encode_bytes(pairs[p].second));
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t c = 0; c < w.config.d_model; ++c) {
                diffs[l](p, c) = truthful[l][c] - untruthful[l][c];
            }
        }
    }
    std::vector<Vector> out;
    out.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        out.push_back(pca_first_component(diffs[l]));
    }
    return out;
}

DirectionSet select_repe_layer(const ModelWeights& w, const std::vector<Vector>& candidates,
                               const std::vector<LabeledPrompt>& validation_prompts) {
    if (candidates.empty()) {
        throw contract_error("select_repe_layer: no candidate directions");
    }
    bool has0 = false, has1 = false;
    for (const auto& [_, label] : validation_prompts) {
        (label == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) {
        throw data_error("select_repe_layer: validation set must contain both labels");
    }

    const std::size_t L = candidates.size();
    const std::size_t n = validation_prompts.size();
    // hidden[i][l] = last-token hidden state of prompt i at layer l.
    std::vector<std::vector<Vector>> hidden(n);
    for (std::size_t i = 0; i < n; ++i) {
        hidden[i] = capture_layer_hidden(w, encode_bytes(validation_prompts[i].first));
    }

    std::vector<double> scores(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        Vector mean(w.config.d_model, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += hidden[i][l][c];
        }
        for (double& x : mean) x /= static_cast<double>(n);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            Vector centered(mean.size());
            for (std::size_t c = 0; c < mean.size(); ++c) {
                centered[c] = hidden[i][l][c] - mean[c];
            }
            const bool pred = dot(candidates[l], centered) > 0.0;
            if (pred == (validation_prompts[i].second == 1)) ++correct;
        }
        scores[l] = static_cast<double>(correct) / static_cast<double>(n);
    }

    std::size_t best = 0;
    for (std::size_t l = 1; l < L; ++l) {
        if (scores[l] > scores[best]) best = l;
    }

    DirectionSet ds;
    ds.mode = DirectionMode::layer_level;
    ds.provenance = DirectionProvenance::repe;
    ds.entries.push_back({HeadAddress{static_cast<std::uint32_t>(best), 0},
                          normalized(candidates[best])});
    ds.metadata["selected_layer"] = best;
    ds.metadata["layer_scores"] = scores;
    return ds;
}

}  // namespace lito
