#include "lito/lm_train.hpp"

#include <algorithm>
#include <cmath>

#include "lito/lm_internal.hpp"

namespace lito {

namespace {

using detail::ForwardCache;
using detail::LayerCache;

// dx += dy * w^T, dw += x^T * dy, db += column sums of dy.
void affine_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& dx,
                     Matrix& dw, Vector& db) {
    const std::size_t T = x.rows();
    const std::size_t In = w.rows();
    const std::size_t Out = w.cols();
    for (std::size_t t = 0; t < T; ++t) {
        const double* dyr = dy.data() + t * Out;
        double* dxr = dx.data() + t * In;
        const double* xr = x.data() + t * In;
        for (std::size_t i = 0; i < In; ++i) {
            const double* wrow = w.data() + i * Out;
            double* dwrow = dw.data() + i * Out;
            double acc = 0.0;
            const double xi = xr[i];
            for (std::size_t o = 0; o < Out; ++o) {
                acc += dyr[o] * wrow[o];
                dwrow[o] += xi * dyr[o];
            }
            dxr[i] += acc;
        }
        for (std::size_t o = 0; o < Out; ++o) db[o] += dyr[o];
    }
}

// Backward of y = g * (x - mu) * inv_std + b for one row.
void layer_norm_backward_row(const double* x, const double* dy, double mu, double inv_std,
                             const Vector& g, std::size_t d, double* dx, Vector& dg,
                             Vector& db) {
    double sum_dxhat = 0.0;
    double sum_dxhat_xhat = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double xhat = (x[i] - mu) * inv_std;
        double dxhat = dy[i] * g[i];
        dg[i] += dy[i] * xhat;
        db[i] += dy[i];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
    }
    const double inv_d = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) {
        double xhat = (x[i] - mu) * inv_std;
        double dxhat = dy[i] * g[i];
        dx[i] += inv_std * (dxhat - inv_d * sum_dxhat - xhat * inv_d * sum_dxhat_xhat);
    }
}

}  // namespace

std::pair<double, std::size_t> lm_loss_and_grad(const ModelWeights& w,
                                                const TrainExample& example,
                                                ModelWeights& grad) {
    const ModelConfig& cfg = w.config;
    const std::vector<int>& toks = example.tokens;
    if (toks.size() < 2 || example.loss_start < 1 || example.loss_start >= toks.size()) {
        throw contract_error("lm_loss_and_grad: need >= 2 tokens and 1 <= loss_start < length");
    }

    ForwardCache cache;
    detail::forward_full(w, toks, example.intervention, &cache, nullptr);
    const std::size_t T = toks.size();
    const std::size_t D = cfg.d_model;
    const std::size_t V = cfg.vocab_size;

    // Cross-entropy at positions predicting toks[loss_start..T-1].
    double loss_sum = 0.0;
    std::size_t n_pred = T - example.loss_start;
    Matrix dhf(T, D);
    for (std::size_t tgt = example.loss_start; tgt < T; ++tgt) {
        const std::size_t pos = tgt - 1;
        Vector logits = detail::logits_at(w, cache.hf, pos);
        Vector probs = softmax(logits);
        loss_sum += -std::log(std::max(probs[static_cast<std::size_t>(toks[tgt])], 1e-300));
        // dlogits = probs - onehot(target); project through the unembedding.
        probs[static_cast<std::size_t>(toks[tgt])] -= 1.0;
        for (std::size_t i = 0; i < D; ++i) {
            const double hi = cache.hf(pos, i);
            double* gurow = grad.unembed.data() + i * V;
            const double* urow = w.unembed.data() + i * V;
            double acc = 0.0;
            for (std::size_t jv = 0; jv < V; ++jv) {
                acc += probs[jv] * urow[jv];
                gurow[jv] += hi * probs[jv];
            }
            dhf(pos, i) += acc;
        }
    }

    // Final layer norm.
    Matrix dx(T, D);
    for (std::size_t t = 0; t < T; ++t) {
        layer_norm_backward_row(cache.x_final.data() + t * D, dhf.data() + t * D,
                                cache.muf[t], cache.inv_stdf[t], w.lnf_g, D,
                                dx.data() + t * D, grad.lnf_g, grad.lnf_b);
    }

    const std::size_t H = cfg.n_heads;
    const std::size_t Dh = cfg.d_head;
    const double scale = 1.0 / std::sqrt(static_cast<double>(Dh));

    for (std::uint32_t li = cfg.n_layers; li-- > 0;) {
        const LayerWeights& L = w.layers[li];
        LayerWeights& G = grad.layers[li];
        const LayerCache& lc = cache.layers[li];

        // Layer-level interventions are additive constants: gradient passes.
        Matrix dx_mid = dx;  // residual branch
        const Matrix& dmlp_out = dx;

        // MLP backward.
        Matrix da1(T, cfg.d_ff());
        affine_backward(lc.a1, L.mlp_w2, dmlp_out, da1, G.mlp_w2, G.mlp_b2);
        for (std::size_t i = 0; i < da1.size(); ++i) {
            if (lc.z1.storage()[i] <= 0.0) da1.storage()[i] = 0.0;
        }
        Matrix dxn2(T, D);
        affine_backward(lc.xn2, L.mlp_w1, da1, dxn2, G.mlp_w1, G.mlp_b1);
        for (std::size_t t = 0; t < T; ++t) {
            layer_norm_backward_row(lc.x_mid.data() + t * D, dxn2.data() + t * D, lc.mu2[t],
                                    lc.inv_std2[t], L.ln2_g, D, dx_mid.data() + t * D,
                                    G.ln2_g, G.ln2_b);
        }

        Matrix dx_in = dx_mid;  // residual into the attention block
        const Matrix& dattn_out = dx_mid;

        Matrix dheads(T, D);
        affine_backward(lc.heads, L.wo, dattn_out, dheads, G.wo, G.bo);

        // Head-level interventions are additive: gradient passes to attn·v.
        Matrix dq(T, D), dk(T, D), dv(T, D);
        for (std::size_t h = 0; h < H; ++h) {
            const std::size_t off = h * Dh;
            const Matrix& probs = lc.attn[h];
            for (std::size_t i = 0; i < T; ++i) {
                // dv and dp from heads(i) = sum_j p_ij v_j.
                Vector dp(i + 1, 0.0);
                for (std::size_t j = 0; j <= i; ++j) {
                    const double pij = probs(i, j);
                    double acc = 0.0;
                    for (std::size_t c = 0; c < Dh; ++c) {
                        acc += dheads(i, off + c) * lc.v(j, off + c);
                        dv(j, off + c) += pij * dheads(i, off + c);
                    }
                    dp[j] = acc;
                }
                // Softmax backward.
                double dot_pp = 0.0;
                for (std::size_t j = 0; j <= i; ++j) dot_pp += probs(i, j) * dp[j];
                for (std::size_t j = 0; j <= i; ++j) {
                    const double ds = probs(i, j) * (dp[j] - dot_pp) * scale;
                    if (ds == 0.0) continue;
                    for (std::size_t c = 0; c < Dh; ++c) {
                        dq(i, off + c) += ds * lc.k(j, off + c);
                        dk(j, off + c) += ds * lc.q(i, off + c);
                    }
                }
            }
        }

        Matrix dxn1(T, D);
        affine_backward(lc.xn1, L.wq, dq, dxn1, G.wq, G.bq);
        affine_backward(lc.xn1, L.wk, dk, dxn1, G.wk, G.bk);
        affine_backward(lc.xn1, L.wv, dv, dxn1, G.wv, G.bv);
        for (std::size_t t = 0; t < T; ++t) {
            layer_norm_backward_row(lc.x_in.data() + t * D, dxn1.data() + t * D, lc.mu1[t],
                                    lc.inv_std1[t], L.ln1_g, D, dx_in.data() + t * D,
                                    G.ln1_g, G.ln1_b);
        }
        dx = std::move(dx_in);
    }

    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t tok = static_cast<std::size_t>(toks[t]);
        for (std::size_t i = 0; i < D; ++i) {
            grad.tok_emb(tok, i) += dx(t, i);
            grad.pos_emb(t, i) += dx(t, i);
        }
    }
    return {loss_sum, n_pred};
}

LmTrainReport train_lm(ModelWeights& w, const std::vector<TrainExample>& examples,
                       const LmTrainConfig& cfg,
                       const std::function<void(std::size_t, double)>& log) {
    if (examples.empty()) {
        throw data_error("train_lm: no training examples");
    }
    LmTrainReport report;
    ModelWeights m = ModelWeights::zeros(w.config);
    ModelWeights v = ModelWeights::zeros(w.config);
    double b1t = 1.0, b2t = 1.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        ModelWeights grad = ModelWeights::zeros(w.config);
        double loss_sum = 0.0;
        std::size_t n_pred = 0;
        for (const auto& ex : examples) {
            auto [l, n] = lm_loss_and_grad(w, ex, grad);
            loss_sum += l;
            n_pred += n;
        }
        const double inv_n = 1.0 / static_cast<double>(n_pred);
        grad.for_each_tensor([inv_n](std::vector<double>& t) {
            for (double& x : t) x *= inv_n;
        });
        if (!cfg.frozen_tensors.empty()) {
            std::size_t idx = 0;
            grad.for_each_tensor([&](std::vector<double>& t) {
                if (std::find(cfg.frozen_tensors.begin(), cfg.frozen_tensors.end(), idx++) !=
                    cfg.frozen_tensors.end())
                    std::fill(t.begin(), t.end(), 0.0);
            });
        }

        if (cfg.grad_clip > 0.0) {
            double sq = 0.0;
            grad.for_each_tensor([&sq](const std::vector<double>& t) {
                for (double x : t) sq += x * x;
            });
            const double gn = std::sqrt(sq);
            if (gn > cfg.grad_clip) {
                const double s = cfg.grad_clip / gn;
                grad.for_each_tensor([s](std::vector<double>& t) {
                    for (double& x : t) x *= s;
                });
            }
        }

        b1t *= cfg.beta1;
        b2t *= cfg.beta2;
        const double corr = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
        // Tensors are walked in identical order in all four containers.
        std::vector<std::vector<double>*> gt, mt, vt, wt;
        grad.for_each_tensor([&gt](std::vector<double>& t) { gt.push_back(&t); });
        m.for_each_tensor([&mt](std::vector<double>& t) { mt.push_back(&t); });
        v.for_each_tensor([&vt](std::vector<double>& t) { vt.push_back(&t); });
        w.for_each_tensor([&wt](std::vector<double>& t) { wt.push_back(&t); });
        for (std::size_t ti = 0; ti < gt.size(); ++ti) {
            auto& g = *gt[ti];
            auto& mm = *mt[ti];
            auto& vv = *vt[ti];
            auto& ww = *wt[ti];
            for (std::size_t i = 0; i < g.size(); ++i) {
                mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * g[i];
                vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                ww[i] -= corr * mm[i] / (std::sqrt(vv[i]) + cfg.adam_eps);
            }
        }

        const double mean_loss = loss_sum * inv_n;
        report.epoch_losses.push_back(mean_loss);
        if (log) log(epoch, mean_loss);
    }
    return report;
}

}  // namespace lito
