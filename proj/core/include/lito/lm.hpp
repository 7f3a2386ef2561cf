#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lito/numerics.hpp"

namespace lito {

struct ModelConfig {
    std::uint32_t n_layers = 4;
    std::uint32_t n_heads = 4;
    std::uint32_t d_model = 64;
    std::uint32_t d_head = 16;
    std::uint32_t vocab_size = 256;
    std::uint32_t max_seq_len = 256;

    std::uint32_t d_ff() const { return 4 * d_model; }
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct LayerWeights {
    Vector ln1_g, ln1_b;
    Matrix wq, wk, wv;  // d_model x d_model; head h owns columns [h*d_head, (h+1)*d_head)
    Vector bq, bk, bv;
    Matrix wo;  // d_model x d_model, applied to the concatenated head outputs
    Vector bo;
    Vector ln2_g, ln2_b;
    Matrix mlp_w1;  // d_model x d_ff
    Vector mlp_b1;
    Matrix mlp_w2;  // d_ff x d_model
    Vector mlp_b2;

    bool operator==(const LayerWeights&) const = default;
};

struct ModelWeights {
    ModelConfig config;
    Matrix tok_emb;  // vocab x d_model
    Matrix pos_emb;  // max_seq_len x d_model
    std::vector<LayerWeights> layers;
    Vector lnf_g, lnf_b;
    Matrix unembed;  // d_model x vocab

    static ModelWeights zeros(const ModelConfig& cfg);
    bool all_finite() const;
    bool operator==(const ModelWeights&) const = default;

    // Iterate all parameter tensors in serialization order. Used by the
    // optimizer, the gradient container, and the weight file writer so the
    // order is defined in exactly one place.
    template <typename Fn>
    void for_each_tensor(Fn&& fn) {
        fn(tok_emb.storage());
        fn(pos_emb.storage());
        for (auto& l : layers) {
            fn(l.ln1_g); fn(l.ln1_b);
            fn(l.wq.storage()); fn(l.bq);
            fn(l.wk.storage()); fn(l.bk);
            fn(l.wv.storage()); fn(l.bv);
            fn(l.wo.storage()); fn(l.bo);
            fn(l.ln2_g); fn(l.ln2_b);
            fn(l.mlp_w1.storage()); fn(l.mlp_b1);
            fn(l.mlp_w2.storage()); fn(l.mlp_b2);
        }
        fn(lnf_g); fn(lnf_b);
        fn(unembed.storage());
    }
    template <typename Fn>
    void for_each_tensor(Fn&& fn) const {
        const_cast<ModelWeights*>(this)->for_each_tensor(
            [&fn](auto& t) { fn(const_cast<const std::vector<double>&>(t)); });
    }
};

// Small random initialization for training from scratch.
ModelWeights init_model(const ModelConfig& cfg, std::uint64_t seed, double scale = 0.05);

// Binary weight file, little-endian: magic "STLM", version u32, the six
// ModelConfig fields as u32, then every tensor as f64 in for_each_tensor order.
void save_weights(const ModelWeights& w, const std::string& path);
ModelWeights load_weights(const std::string& path);

struct HeadAddress {
    std::uint32_t layer = 0;
    std::uint32_t head = 0;
    bool operator==(const HeadAddress&) const = default;
    auto operator<=>(const HeadAddress&) const = default;
};

enum class InterventionMode { head_level, layer_level };

struct InterventionEntry {
    HeadAddress address;  // head ignored in layer-level mode
    Vector direction;     // d_head (head-level) or d_model (layer-level)
    double intensity = 0.0;
};

struct InterventionSet {
    InterventionMode mode = InterventionMode::head_level;
    std::vector<InterventionEntry> entries;

    static InterventionSet none() { return {}; }
    bool empty() const { return entries.empty(); }
    void validate(const ModelConfig& cfg) const;
};

struct StepOutput {
    Vector probs;             // vocab_size, softmax of last-position logits
    Vector last_hidden;       // d_model, after the final layer norm
    Matrix head_activations;  // (n_layers*n_heads) x d_head, post-intervention head outputs at the final position

    const double* head(const ModelConfig& cfg, HeadAddress a) const {
        return head_activations.data() + (a.layer * cfg.n_heads + a.head) * cfg.d_head;
    }
};

struct GenerationTrace {
    std::vector<int> prompt_token_ids;
    std::vector<int> generated_token_ids;  // stop token excluded
    Vector per_token_prob;                 // probability of each generated token
    Matrix last_hidden;                    // N x d_model, state at the step that produced each token

    std::size_t n_generated() const { return generated_token_ids.size(); }
};

// One full-recompute forward pass over the context; returns the next-token
// distribution and capture points at the final position.
StepOutput forward_step(const ModelWeights& w, const std::vector<int>& context,
                        const InterventionSet& intervention);

// Greedy decoding with the intervention applied at every step. Stops at
// stop_token (not recorded) or after max_new_tokens.
GenerationTrace generate(const ModelWeights& w, const std::vector<int>& prompt,
                         const InterventionSet& intervention, std::size_t max_new_tokens,
                         int stop_token);

// The addressed head's output at the final prompt position, unintervened.
Vector capture_head_activation(const ModelWeights& w, const std::vector<int>& prompt,
                               HeadAddress address);

// Final-position hidden state after every layer (index l = output of layer l,
// pre final layer norm), unintervened. Used by the RepE direction extractor.
std::vector<Vector> capture_layer_hidden(const ModelWeights& w, const std::vector<int>& prompt);

// Byte-level tokenizer: tokens are raw bytes of UTF-8 text.
std::vector<int> encode_bytes(const std::string& text);
std::string decode_bytes(const std::vector<int>& tokens);

}  // namespace lito
