#include "lito/lm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "lito/lm_internal.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts are unsupported");

namespace lito {

void ModelConfig::validate() const {
    if (n_layers < 1 || n_heads < 1 || d_model < 1 || d_head < 1 || vocab_size < 1 ||
        max_seq_len < 1) {
        throw contract_error("ModelConfig: all counts must be >= 1");
    }
    if (d_model != n_heads * d_head) {
        throw contract_error("ModelConfig: d_model must equal n_heads * d_head");
    }
}

ModelWeights ModelWeights::zeros(const ModelConfig& cfg) {
    cfg.validate();
    ModelWeights w;
    w.config = cfg;
    w.tok_emb = Matrix(cfg.vocab_size, cfg.d_model);
    w.pos_emb = Matrix(cfg.max_seq_len, cfg.d_model);
    w.layers.resize(cfg.n_layers);
    for (auto& l : w.layers) {
        l.ln1_g.assign(cfg.d_model, 0.0);
        l.ln1_b.assign(cfg.d_model, 0.0);
        l.wq = Matrix(cfg.d_model, cfg.d_model);
        l.wk = Matrix(cfg.d_model, cfg.d_model);
        l.wv = Matrix(cfg.d_model, cfg.d_model);
        l.bq.assign(cfg.d_model, 0.0);
        l.bk.assign(cfg.d_model, 0.0);
        l.bv.assign(cfg.d_model, 0.0);
        l.wo = Matrix(cfg.d_model, cfg.d_model);
        l.bo.assign(cfg.d_model, 0.0);
        l.ln2_g.assign(cfg.d_model, 0.0);
        l.ln2_b.assign(cfg.d_model, 0.0);
        l.mlp_w1 = Matrix(cfg.d_model, cfg.d_ff());
        l.mlp_b1.assign(cfg.d_ff(), 0.0);
        l.mlp_w2 = Matrix(cfg.d_ff(), cfg.d_model);
        l.mlp_b2.assign(cfg.d_model, 0.0);
    }
    w.lnf_g.assign(cfg.d_model, 0.0);
    w.lnf_b.assign(cfg.d_model, 0.0);
    w.unembed = Matrix(cfg.d_model, cfg.vocab_size);
    return w;
}

bool ModelWeights::all_finite() const {
    bool ok = true;
    for_each_tensor([&ok](const std::vector<double>& t) {
        for (double x : t) {
            if (!std::isfinite(x)) ok = false;
        }
    });
    return ok;
}

ModelWeights init_model(const ModelConfig& cfg, std::uint64_t seed, double scale) {
    ModelWeights w = ModelWeights::zeros(cfg);
    SeededRng rng(seed);
    auto fill_normal = [&rng, scale](std::vector<double>& t) {
        for (double& x : t) x = scale * rng.normal();
    };
    fill_normal(w.tok_emb.storage());
    fill_normal(w.pos_emb.storage());
    for (auto& l : w.layers) {
        l.ln1_g.assign(cfg.d_model, 1.0);
        l.ln2_g.assign(cfg.d_model, 1.0);
        fill_normal(l.wq.storage());
        fill_normal(l.wk.storage());
        fill_normal(l.wv.storage());
        fill_normal(l.wo.storage());
        fill_normal(l.mlp_w1.storage());
        fill_normal(l.mlp_w2.storage());
    }
    w.lnf_g.assign(cfg.d_model, 1.0);
    fill_normal(w.unembed.storage());
    return w;
}

namespace {

constexpr char kMagic[4] = {'S', 'T', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void save_weights(const ModelWeights& w, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw data_error("save_weights: cannot open " + path);
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, w.config.n_layers);
    write_u32(os, w.config.n_heads);
    write_u32(os, w.config.d_model);
    write_u32(os, w.config.d_head);
    write_u32(os, w.config.vocab_size);
    write_u32(os, w.config.max_seq_len);
    w.for_each_tensor([&os](const std::vector<double>& t) {
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)));
    });
    if (!os) throw data_error("save_weights: write failed for " + path);
}

ModelWeights load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("load_weights: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw data_error("load_weights: bad magic in " + path);
    }
    std::uint32_t version = read_u32(is);
    if (version != kVersion) {
        throw data_error("load_weights: unsupported version in " + path);
    }
    ModelConfig cfg;
    cfg.n_layers = read_u32(is);
    cfg.n_heads = read_u32(is);
    cfg.d_model = read_u32(is);
    cfg.d_head = read_u32(is);
    cfg.vocab_size = read_u32(is);
    cfg.max_seq_len = read_u32(is);
    cfg.validate();
    ModelWeights w = ModelWeights::zeros(cfg);
    w.for_each_tensor([&is](std::vector<double>& t) {
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
    });
    if (!is) throw data_error("load_weights: truncated file " + path);
    return w;
}

void InterventionSet::validate(const ModelConfig& cfg) const {
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& e : entries) {
        if (e.address.layer >= cfg.n_layers) {
            throw contract_error("InterventionSet: layer out of bounds");
        }
        if (mode == InterventionMode::head_level) {
            if (e.address.head >= cfg.n_heads) {
                throw contract_error("InterventionSet: head out of bounds");
            }
            if (e.direction.size() != cfg.d_head) {
                throw contract_error("InterventionSet: head-level direction must have d_head entries");
            }
        } else {
            if (e.direction.size() != cfg.d_model) {
                throw contract_error("InterventionSet: layer-level direction must have d_model entries");
            }
        }
        if (!(e.intensity >= 0.0)) {
            throw contract_error("InterventionSet: intensity must be >= 0");
        }
        auto key = std::make_pair(e.address.layer,
                                  mode == InterventionMode::head_level ? e.address.head : 0u);
        if (!seen.insert(key).second) {
            throw contract_error("InterventionSet: duplicate entry for one address");
        }
    }
}

namespace detail {

namespace {

// y = g * (x - mu) / sqrt(var + eps) + b, row-wise.
void layer_norm_row(const double* x, std::size_t d, const Vector& g, const Vector& b,
                    double* out, double* mu_out, double* inv_std_out) {
    double mu = 0.0;
    for (std::size_t i = 0; i < d; ++i) mu += x[i];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double c = x[i] - mu;
        var += c * c;
    }
    var /= static_cast<double>(d);
    double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = g[i] * (x[i] - mu) * inv_std + b[i];
    }
    if (mu_out) *mu_out = mu;
    if (inv_std_out) *inv_std_out = inv_std;
}

// out = x * wT + b for a T x d input, row-major.
Matrix affine(const Matrix& x, const Matrix& w, const Vector& b) {
    Matrix out = matmul(x, w);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b[c];
    }
    return out;
}

}  // namespace

Matrix forward_full(const ModelWeights& w, const std::vector<int>& context,
                    const InterventionSet& intervention, ForwardCache* cache,
                    Matrix* head_acts_last) {
    const ModelConfig& cfg = w.config;
    cfg.validate();
    if (context.empty()) {
        throw contract_error("forward: empty context");
    }
    if (context.size() > cfg.max_seq_len) {
        throw data_error("forward: context length exceeds max_seq_len");
    }
    intervention.validate(cfg);

    const std::size_t T = context.size();
    const std::size_t D = cfg.d_model;
    const std::size_t H = cfg.n_heads;
    const std::size_t Dh = cfg.d_head;
    const double scale = 1.0 / std::sqrt(static_cast<double>(Dh));

    Matrix x(T, D);
    for (std::size_t t = 0; t < T; ++t) {
        int tok = context[t];
        if (tok < 0 || static_cast<std::uint32_t>(tok) >= cfg.vocab_size) {
            throw contract_error("forward: token id out of vocabulary");
        }
        for (std::size_t i = 0; i < D; ++i) {
            x(t, i) = w.tok_emb(static_cast<std::size_t>(tok), i) + w.pos_emb(t, i);
        }
    }
    if (cache) {
        cache->emb = x;
        cache->layers.assign(cfg.n_layers, LayerCache{});
    }
    if (head_acts_last) {
        *head_acts_last = Matrix(cfg.n_layers * H, Dh);
    }

    for (std::uint32_t li = 0; li < cfg.n_layers; ++li) {
        const LayerWeights& L = w.layers[li];
        LayerCache* lc = cache ? &cache->layers[li] : nullptr;
        if (lc) lc->x_in = x;

        Matrix xn1(T, D);
        Vector mu1(T), is1(T);
        for (std::size_t t = 0; t < T; ++t) {
            layer_norm_row(x.data() + t * D, D, L.ln1_g, L.ln1_b, xn1.data() + t * D,
                           &mu1[t], &is1[t]);
        }

        Matrix q = affine(xn1, L.wq, L.bq);
        Matrix k = affine(xn1, L.wk, L.bk);
        Matrix v = affine(xn1, L.wv, L.bv);

        Matrix heads(T, D);
        std::vector<Matrix> attn_probs;
        if (lc) attn_probs.assign(H, Matrix());
        for (std::size_t h = 0; h < H; ++h) {
            const std::size_t off = h * Dh;
            Matrix probs(T, T);
            for (std::size_t i = 0; i < T; ++i) {
                Vector scores(i + 1);
                for (std::size_t j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < Dh; ++c) {
                        s += q(i, off + c) * k(j, off + c);
                    }
                    scores[j] = s * scale;
                }
                Vector p = softmax(scores);
                for (std::size_t j = 0; j <= i; ++j) {
                    probs(i, j) = p[j];
                    for (std::size_t c = 0; c < Dh; ++c) {
                        heads(i, off + c) += p[j] * v(j, off + c);
                    }
                }
            }
            if (lc) attn_probs[h] = std::move(probs);
        }

        if (intervention.mode == InterventionMode::head_level) {
            for (const auto& e : intervention.entries) {
                if (e.address.layer != li || e.intensity == 0.0) continue;
                const std::size_t off = e.address.head * Dh;
                for (std::size_t t = 0; t < T; ++t) {
                    for (std::size_t c = 0; c < Dh; ++c) {
                        heads(t, off + c) += e.intensity * e.direction[c];
                    }
                }
            }
        }

        if (head_acts_last) {
            for (std::size_t h = 0; h < H; ++h) {
                for (std::size_t c = 0; c < Dh; ++c) {
                    (*head_acts_last)(li * H + h, c) = heads(T - 1, h * Dh + c);
                }
            }
        }

        Matrix attn_out = affine(heads, L.wo, L.bo);
        Matrix x_mid(T, D);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x_mid.storage()[i] = x.storage()[i] + attn_out.storage()[i];
        }

        Matrix xn2(T, D);
        Vector mu2(T), is2(T);
        for (std::size_t t = 0; t < T; ++t) {
            layer_norm_row(x_mid.data() + t * D, D, L.ln2_g, L.ln2_b, xn2.data() + t * D,
                           &mu2[t], &is2[t]);
        }

        Matrix z1 = affine(xn2, L.mlp_w1, L.mlp_b1);
        Matrix a1 = z1;
        for (double& e : a1.storage()) e = std::max(e, 0.0);
        Matrix mlp_out = affine(a1, L.mlp_w2, L.mlp_b2);

        Matrix x_out(T, D);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x_out.storage()[i] = x_mid.storage()[i] + mlp_out.storage()[i];
        }

        if (intervention.mode == InterventionMode::layer_level) {
            for (const auto& e : intervention.entries) {
                if (e.address.layer != li || e.intensity == 0.0) continue;
                for (std::size_t t = 0; t < T; ++t) {
                    for (std::size_t c = 0; c < D; ++c) {
                        x_out(t, c) += e.intensity * e.direction[c];
                    }
                }
            }
        }

        if (lc) {
            lc->xn1 = std::move(xn1);
            lc->mu1 = std::move(mu1);
            lc->inv_std1 = std::move(is1);
            lc->q = std::move(q);
            lc->k = std::move(k);
            lc->v = std::move(v);
            lc->attn = std::move(attn_probs);
            lc->heads = std::move(heads);
            lc->x_mid = std::move(x_mid);
            lc->xn2 = std::move(xn2);
            lc->mu2 = std::move(mu2);
            lc->inv_std2 = std::move(is2);
            lc->z1 = std::move(z1);
            lc->a1 = std::move(a1);
        }
        x = std::move(x_out);
    }

    Matrix hf(T, D);
    Vector muf(T), isf(T);
    for (std::size_t t = 0; t < T; ++t) {
        layer_norm_row(x.data() + t * D, D, w.lnf_g, w.lnf_b, hf.data() + t * D, &muf[t],
                       &isf[t]);
    }
    if (cache) {
        cache->x_final = std::move(x);
        cache->hf = hf;
        cache->muf = std::move(muf);
        cache->inv_stdf = std::move(isf);
    }
    return hf;
}

std::vector<Vector> forward_layer_snapshots(const ModelWeights& w,
                                            const std::vector<int>& context) {
    ForwardCache cache;
    forward_full(w, context, InterventionSet::none(), &cache, nullptr);
    std::vector<Vector> out;
    out.reserve(w.config.n_layers);
    const std::size_t last = context.size() - 1;
    for (std::uint32_t li = 0; li + 1 < w.config.n_layers; ++li) {
        out.push_back(cache.layers[li + 1].x_in.row(last));
    }
    out.push_back(cache.x_final.row(last));
    return out;
}

Vector logits_at(const ModelWeights& w, const Matrix& hf, std::size_t pos) {
    const std::size_t D = w.config.d_model;
    const std::size_t V = w.config.vocab_size;
    Vector logits(V, 0.0);
    for (std::size_t i = 0; i < D; ++i) {
        const double hi = hf(pos, i);
        if (hi == 0.0) continue;
        const double* urow = w.unembed.data() + i * V;
        for (std::size_t j = 0; j < V; ++j) logits[j] += hi * urow[j];
    }
    return logits;
}

}  // namespace detail

StepOutput forward_step(const ModelWeights& w, const std::vector<int>& context,
                        const InterventionSet& intervention) {
    StepOutput out;
    Matrix hf = detail::forward_full(w, context, intervention, nullptr, &out.head_activations);
    const std::size_t last = context.size() - 1;
    out.last_hidden = hf.row(last);
    out.probs = softmax(detail::logits_at(w, hf, last));
    return out;
}

GenerationTrace generate(const ModelWeights& w, const std::vector<int>& prompt,
                         const InterventionSet& intervention, std::size_t max_new_tokens,
                         int stop_token) {
    if (max_new_tokens < 1) {
        throw contract_error("generate: max_new_tokens must be >= 1");
    }
    GenerationTrace trace;
    trace.prompt_token_ids = prompt;
    trace.last_hidden = Matrix(0, w.config.d_model);

    std::vector<int> context = prompt;
    std::vector<Vector> hidden_rows;
    for (std::size_t step = 0; step < max_new_tokens; ++step) {
        if (context.size() >= w.config.max_seq_len) break;
        StepOutput so = forward_step(w, context, intervention);
        std::size_t best = 0;
        for (std::size_t i = 1; i < so.probs.size(); ++i) {
            if (so.probs[i] > so.probs[best]) best = i;
        }
        if (static_cast<int>(best) == stop_token) break;
        trace.generated_token_ids.push_back(static_cast<int>(best));
        trace.per_token_prob.push_back(so.probs[best]);
        hidden_rows.push_back(so.last_hidden);
        context.push_back(static_cast<int>(best));
    }
    trace.last_hidden = Matrix(hidden_rows.size(), w.config.d_model);
    for (std::size_t r = 0; r < hidden_rows.size(); ++r) {
        for (std::size_t c = 0; c < w.config.d_model; ++c) {
            trace.last_hidden(r, c) = hidden_rows[r][c];
        }
    }
    return trace;
}

Vector capture_head_activation(const ModelWeights& w, const std::vector<int>& prompt,
                               HeadAddress address) {
    if (address.layer >= w.config.n_layers || address.head >= w.config.n_heads) {
        throw contract_error("capture_head_activation: address out of bounds");
    }
    StepOutput so = forward_step(w, prompt, InterventionSet::none());
    const double* p = so.head(w.config, address);
    return Vector(p, p + w.config.d_head);
}

std::vector<Vector> capture_layer_hidden(const ModelWeights& w,
                                         const std::vector<int>& prompt) {
    if (prompt.empty()) {
        throw contract_error("capture_layer_hidden: empty prompt");
    }
    return detail::forward_layer_snapshots(w, prompt);
}

std::vector<int> encode_bytes(const std::string& text) {
    std::vector<int> out;
    out.reserve(text.size());
    for (unsigned char c : text) out.push_back(static_cast<int>(c));
    return out;
}

std::string decode_bytes(const std::vector<int>& tokens) {
    std::string out;
    out.reserve(tokens.size());
    for (int t : tokens) out.push_back(static_cast<char>(static_cast<unsigned char>(t)));
    return out;
}

}  // namespace lito
