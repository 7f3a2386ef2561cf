#pragma once

// Forward-pass internals shared between inference (lm.cpp) and the training
// loop (lm_train.cpp), which needs the per-position caches for backprop.

#include "lito/lm.hpp"

namespace lito::detail {

struct LayerCache {
    Matrix x_in;                // T x d_model, residual stream entering the layer
    Matrix xn1;                 // LN1 output
    Vector mu1, inv_std1;       // per-position LN1 stats
    Matrix q, k, v;             // T x d_model
    std::vector<Matrix> attn;   // per head: T x T attention probabilities
    Matrix heads;               // T x d_model, concatenated head outputs (post-intervention)
    Matrix x_mid;               // T x d_model, after attention residual add
    Matrix xn2;                 // LN2 output
    Vector mu2, inv_std2;
    Matrix z1;                  // T x d_ff, MLP pre-activation
    Matrix a1;                  // T x d_ff, ReLU output
};

struct ForwardCache {
    Matrix emb;                 // T x d_model, token + position embedding
    std::vector<LayerCache> layers;
    Matrix x_final;             // T x d_model, pre final-LN residual stream
    Matrix hf;                  // T x d_model, after final LN
    Vector muf, inv_stdf;
};

constexpr double kLayerNormEps = 1e-5;

// Runs the full causal forward pass over `context`. Returns the post-final-LN
// hidden states (T x d_model). When `cache` is non-null every intermediate is
// recorded; when `head_acts_last` is non-null it receives the post-intervention
// per-head outputs at the final position ((L*H) x d_head).
Matrix forward_full(const ModelWeights& w, const std::vector<int>& context,
                    const InterventionSet& intervention, ForwardCache* cache,
                    Matrix* head_acts_last);

// Per-layer residual-stream snapshots at the final position (output of each
// layer, pre final LN).
std::vector<Vector> forward_layer_snapshots(const ModelWeights& w,
                                            const std::vector<int>& context);

Vector logits_at(const ModelWeights& w, const Matrix& hf, std::size_t pos);

}  // namespace lito::detail
