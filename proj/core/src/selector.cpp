#include "lito/selector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lito/io_util.hpp"

namespace lito {

SelectorModel SelectorModel::zeros(std::size_t input_dim, SelectorVariant variant) {
    SelectorModel m;
    m.variant = variant;
    m.input_dim = input_dim;
    m.hidden_dim = hidden_for_input(input_dim);
    const std::size_t H = m.hidden_dim;
    if (variant == SelectorVariant::recurrent) {
        m.wx = Matrix(4 * H, input_dim);
        m.wh = Matrix(4 * H, H);
        m.b.assign(4 * H, 0.0);
    } else {
        m.wx = Matrix(H, input_dim);
        m.b.assign(H, 0.0);
    }
    m.head_w.assign(H, 0.0);
    return m;
}

SelectorModel SelectorModel::random_init(std::size_t input_dim, SelectorVariant variant,
                                         SeededRng& rng, double scale) {
    SelectorModel m = zeros(input_dim, variant);
    m.for_each_param([&rng, scale](std::vector<double>& t) {
        for (double& x : t) x = scale * rng.normal();
    });
    m.head_b = scale * rng.normal();
    return m;
}

namespace {

struct ForwardCache {
    // Per step: gates and states (recurrent) or pre/post activation (mlp).
    std::vector<Vector> i, f, g, o, c, tanh_c, h;
    std::vector<double> probs;
};

void forward_impl(const SelectorModel& m, const std::vector<Vector>& seq, ForwardCache& fc) {
    if (seq.empty()) {
        throw contract_error("selector_forward: empty sequence");
    }
    const std::size_t H = m.hidden_dim;
    const std::size_t D = m.input_dim;
    for (const auto& x : seq) {
        if (x.size() != D) {
            throw contract_error("selector_forward: input dimension mismatch");
        }
    }
    const std::size_t k = seq.size();
    fc.h.assign(k, Vector(H, 0.0));
    fc.probs.assign(k, 0.0);
    if (m.variant == SelectorVariant::mlp) {
        fc.i.assign(k, Vector(H, 0.0));  // reused as the pre-activation cache
        for (std::size_t t = 0; t < k; ++t) {
            for (std::size_t r = 0; r < H; ++r) {
                double z = m.b[r];
                const double* wr = m.wx.data() + r * D;
                for (std::size_t cix = 0; cix < D; ++cix) z += wr[cix] * seq[t][cix];
                fc.i[t][r] = z;
                fc.h[t][r] = std::max(z, 0.0);
            }
            fc.probs[t] = sigmoid(dot(m.head_w, fc.h[t]) + m.head_b);
        }
        return;
    }

    fc.i.assign(k, Vector(H, 0.0));
    fc.f.assign(k, Vector(H, 0.0));
    fc.g.assign(k, Vector(H, 0.0));
    fc.o.assign(k, Vector(H, 0.0));
    fc.c.assign(k, Vector(H, 0.0));
    fc.tanh_c.assign(k, Vector(H, 0.0));
    Vector h_prev(H, 0.0), c_prev(H, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t r = 0; r < H; ++r) {
            double zi = m.b[r], zf = m.b[H + r], zg = m.b[2 * H + r], zo = m.b[3 * H + r];
            const double* wxi = m.wx.data() + r * D;
            const double* wxf = m.wx.data() + (H + r) * D;
            const double* wxg = m.wx.data() + (2 * H + r) * D;
            const double* wxo = m.wx.data() + (3 * H + r) * D;
            for (std::size_t cix = 0; cix < D; ++cix) {
                const double x = seq[t][cix];
                zi += wxi[cix] * x;
                zf += wxf[cix] * x;
                zg += wxg[cix] * x;
                zo += wxo[cix] * x;
            }
            const double* whi = m.wh.data() + r * H;
            const double* whf = m.wh.data() + (H + r) * H;
            const double* whg = m.wh.data() + (2 * H + r) * H;
            const double* who = m.wh.data() + (3 * H + r) * H;
            for (std::size_t cix = 0; cix < H; ++cix) {
                const double hp = h_prev[cix];
                zi += whi[cix] * hp;
                zf += whf[cix] * hp;
                zg += whg[cix] * hp;
                zo += who[cix] * hp;
            }
            const double iv = sigmoid(zi);
            const double fv = sigmoid(zf);
            const double gv = std::tanh(zg);
            const double ov = sigmoid(zo);
            const double cv = fv * c_prev[r] + iv * gv;
            fc.i[t][r] = iv;
            fc.f[t][r] = fv;
            fc.g[t][r] = gv;
            fc.o[t][r] = ov;
            fc.c[t][r] = cv;
            fc.tanh_c[t][r] = std::tanh(cv);
            fc.h[t][r] = ov * fc.tanh_c[t][r];
        }
        fc.probs[t] = sigmoid(dot(m.head_w, fc.h[t]) + m.head_b);
        h_prev = fc.h[t];
        c_prev = fc.c[t];
    }
}

double bce(double p, int y) {
    const double eps = 1e-300;
    return y == 1 ? -std::log(std::max(p, eps)) : -std::log(std::max(1.0 - p, eps));
}

}  // namespace

std::vector<double> selector_forward(const SelectorModel& m, const std::vector<Vector>& seq) {
    ForwardCache fc;
    forward_impl(m, seq, fc);
    return fc.probs;
}

SelectorBackward selector_backward(const SelectorModel& m, const std::vector<Vector>& seq,
                                   const std::vector<int>& labels, double l2_coeff) {
    if (labels.size() != seq.size()) {
        throw contract_error("selector_backward: labels length must match sequence length");
    }
    ForwardCache fc;
    forward_impl(m, seq, fc);
    const std::size_t k = seq.size();
    const std::size_t H = m.hidden_dim;
    const std::size_t D = m.input_dim;
    const double inv_k = 1.0 / static_cast<double>(k);

    SelectorBackward out;
    out.grads = SelectorModel::zeros(D, m.variant);

    double data_loss = 0.0;
    std::vector<Vector> dh(k, Vector(H, 0.0));
    for (std::size_t t = 0; t < k; ++t) {
        data_loss += bce(fc.probs[t], labels[t]);
        const double dz = (fc.probs[t] - static_cast<double>(labels[t])) * inv_k;
        for (std::size_t r = 0; r < H; ++r) {
            out.grads.head_w[r] += dz * fc.h[t][r];
            dh[t][r] += dz * m.head_w[r];
        }
        out.grads.head_b += dz;
    }
    out.loss = data_loss * inv_k;

    if (m.variant == SelectorVariant::mlp) {
        for (std::size_t t = 0; t < k; ++t) {
            for (std::size_t r = 0; r < H; ++r) {
                if (fc.i[t][r] <= 0.0) continue;  // ReLU gate
                const double dz = dh[t][r];
                double* gw = out.grads.wx.data() + r * D;
                for (std::size_t cix = 0; cix < D; ++cix) gw[cix] += dz * seq[t][cix];
                out.grads.b[r] += dz;
            }
        }
    } else {
        Vector dh_carry(H, 0.0), dc_carry(H, 0.0);
        for (std::size_t t = k; t-- > 0;) {
            Vector dz(4 * H, 0.0);
            const Vector& c_prev = t > 0 ? fc.c[t - 1] : Vector(H, 0.0);
            const Vector& h_prev = t > 0 ? fc.h[t - 1] : Vector(H, 0.0);
            for (std::size_t r = 0; r < H; ++r) {
                const double dht = dh[t][r] + dh_carry[r];
                const double iv = fc.i[t][r], fv = fc.f[t][r], gv = fc.g[t][r],
                             ov = fc.o[t][r], tc = fc.tanh_c[t][r];
                const double dov = dht * tc;
                double dcv = dht * ov * (1.0 - tc * tc) + dc_carry[r];
                const double div = dcv * gv;
                const double dgv = dcv * iv;
                const double dfv = dcv * c_prev[r];
                dc_carry[r] = dcv * fv;
                dz[r] = div * iv * (1.0 - iv);
                dz[H + r] = dfv * fv * (1.0 - fv);
                dz[2 * H + r] = dgv * (1.0 - gv * gv);
                dz[3 * H + r] = dov * ov * (1.0 - ov);
            }
            std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
            for (std::size_t rz = 0; rz < 4 * H; ++rz) {
                const double d = dz[rz];
                if (d == 0.0) continue;
                double* gwx = out.grads.wx.data() + rz * D;
                for (std::size_t cix = 0; cix < D; ++cix) gwx[cix] += d * seq[t][cix];
                double* gwh = out.grads.wh.data() + rz * H;
                const double* whr = m.wh.data() + rz * H;
                for (std::size_t cix = 0; cix < H; ++cix) {
                    gwh[cix] += d * h_prev[cix];
                    dh_carry[cix] += d * whr[cix];
                }
                out.grads.b[rz] += d;
            }
        }
    }

    if (l2_coeff != 0.0) {
        double sq = m.head_b * m.head_b;
        const SelectorModel& cm = m;
        const_cast<SelectorModel&>(cm).for_each_param([&sq](std::vector<double>& t) {
            for (double x : t) sq += x * x;
        });
        out.loss += l2_coeff * sq;
        std::vector<std::vector<double>*> mp, gp;
        const_cast<SelectorModel&>(cm).for_each_param(
            [&mp](std::vector<double>& t) { mp.push_back(&t); });
        out.grads.for_each_param([&gp](std::vector<double>& t) { gp.push_back(&t); });
        for (std::size_t ti = 0; ti < mp.size(); ++ti) {
            for (std::size_t idx = 0; idx < mp[ti]->size(); ++idx) {
                (*gp[ti])[idx] += 2.0 * l2_coeff * (*mp[ti])[idx];
            }
        }
        out.grads.head_b += 2.0 * l2_coeff * m.head_b;
    }
    return out;
}

double step_f1(const std::vector<std::vector<double>>& probs,
               const std::vector<std::vector<int>>& labels, double threshold) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t s = 0; s < probs.size(); ++s) {
        for (std::size_t t = 0; t < probs[s].size(); ++t) {
            const bool pred = probs[s][t] > threshold;
            const bool truth = labels[s][t] == 1;
            if (pred && truth) ++tp;
            else if (pred && !truth) ++fp;
            else if (!pred && truth) ++fn;
        }
    }
    if (tp == 0) return 0.0;
    const double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double rec = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * prec * rec / (prec + rec);
}

namespace {

std::pair<std::size_t, std::size_t> step_label_counts(
    const std::vector<const SequenceExample*>& seqs) {
    std::size_t n0 = 0, n1 = 0;
    for (const auto* s : seqs) {
        for (int y : s->labels) (y == 1 ? n1 : n0)++;
    }
    return {n0, n1};
}

}  // namespace

SelectorTraining train_selector(const std::vector<SequenceExample>& dataset,
                                const SelectorTrainConfig& cfg) {
    if (dataset.empty()) {
        throw data_error("train_selector: empty dataset");
    }
    for (const auto& s : dataset) {
        if (s.hidden_seq.empty() || s.hidden_seq.size() != s.labels.size()) {
            throw data_error("train_selector: malformed sequence example");
        }
    }
    {
        bool has0 = false, has1 = false;
        for (const auto& s : dataset) {
            for (int y : s.labels) (y == 1 ? has1 : has0) = true;
        }
        if (!has0 || !has1) {
            throw data_error("train_selector: dataset must contain both step labels");
        }
    }
    const std::size_t D = dataset[0].hidden_seq[0].size();

    SeededRng rng(cfg.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t n_val = std::max<std::size_t>(1, dataset.size() / 5);
    const std::size_t n_train = dataset.size() - n_val;
    if (n_train == 0) {
        throw data_error("train_selector: dataset too small for a train/validation split");
    }
    std::vector<const SequenceExample*> train, val;
    for (std::size_t idx = 0; idx < n_train; ++idx) train.push_back(&dataset[order[idx]]);
    for (std::size_t idx = n_train; idx < dataset.size(); ++idx) val.push_back(&dataset[order[idx]]);

    // Upsample the minority step label by duplicating (seeded, with
    // replacement) sequences that shift the balance toward it.
    if (cfg.upsample_minority) {
        auto [n0, n1] = step_label_counts(train);
        const int minority = n1 < n0 ? 1 : 0;
        std::vector<const SequenceExample*> candidates;
        for (const auto* s : train) {
            std::size_t c0 = 0, c1 = 0;
            for (int y : s->labels) (y == 1 ? c1 : c0)++;
            const std::size_t cmin = minority == 1 ? c1 : c0;
            const std::size_t cmaj = minority == 1 ? c0 : c1;
            if (cmin > cmaj) candidates.push_back(s);
        }
        while (!candidates.empty()) {
            auto [m0, m1] = step_label_counts(train);
            const std::size_t gap = minority == 1 ? (m0 > m1 ? m0 - m1 : 0)
                                                  : (m1 > m0 ? m1 - m0 : 0);
            if (gap <= 1) break;
            const auto* pick = candidates[rng.uniform_index(candidates.size())];
            std::size_t c0 = 0, c1 = 0;
            for (int y : pick->labels) (y == 1 ? c1 : c0)++;
            const std::size_t net = minority == 1 ? c1 - c0 : c0 - c1;
            if (net > gap && net - gap >= gap) break;  // would overshoot past the current gap
            train.push_back(pick);
        }
    }

    SelectorModel model = SelectorModel::random_init(D, cfg.variant, rng);
    SelectorModel best = model;
    SelectorTrainReport report;
    report.best_f1 = -1.0;
    std::size_t since_best = 0;

    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        SelectorModel grads = SelectorModel::zeros(D, cfg.variant);
        double loss = 0.0;
        for (const auto* s : train) {
            SelectorBackward bw = selector_backward(model, s->hidden_seq, s->labels, cfg.l2_coeff);
            loss += bw.loss;
            std::vector<std::vector<double>*> gp, bp;
            grads.for_each_param([&gp](std::vector<double>& t) { gp.push_back(&t); });
            bw.grads.for_each_param([&bp](std::vector<double>& t) { bp.push_back(&t); });
            for (std::size_t ti = 0; ti < gp.size(); ++ti) {
                for (std::size_t idx = 0; idx < gp[ti]->size(); ++idx) {
                    (*gp[ti])[idx] += (*bp[ti])[idx];
                }
            }
            grads.head_b += bw.grads.head_b;
        }
        std::vector<std::vector<double>*> mp, gp;
        model.for_each_param([&mp](std::vector<double>& t) { mp.push_back(&t); });
        grads.for_each_param([&gp](std::vector<double>& t) { gp.push_back(&t); });
        for (std::size_t ti = 0; ti < mp.size(); ++ti) {
            for (std::size_t idx = 0; idx < mp[ti]->size(); ++idx) {
                (*mp[ti])[idx] -= cfg.learning_rate * (*gp[ti])[idx] * inv_n;
            }
        }
        model.head_b -= cfg.learning_rate * grads.head_b * inv_n;
        report.epoch_losses.push_back(loss * inv_n);

        std::vector<std::vector<double>> val_probs;
        std::vector<std::vector<int>> val_labels;
        for (const auto* s : val) {
            val_probs.push_back(selector_forward(model, s->hidden_seq));
            val_labels.push_back(s->labels);
        }
        const double f1 = step_f1(val_probs, val_labels);
        report.epoch_val_f1.push_back(f1);
        report.epochs_ran = epoch + 1;

        if (f1 > report.best_f1) {
            report.best_f1 = f1;
            report.best_epoch = epoch;
            best = model;
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }
    return {best, report};
}

SelectorDecision decide(const SelectorModel& model, const SweepResult& sweep, double threshold) {
    if (sweep.records.empty()) {
        throw contract_error("decide: sweep has no records");
    }
    std::vector<Vector> seq;
    seq.reserve(sweep.records.size());
    for (const auto& r : sweep.records) seq.push_back(r.agg_hidden);

    SelectorDecision d;
    d.probabilities = selector_forward(model, seq);
    d.predicted_labels.resize(d.probabilities.size());
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < d.probabilities.size(); ++i) {
        d.predicted_labels[i] = d.probabilities[i] > threshold ? 1 : 0;
        if (d.predicted_labels[i] == 1) {
            if (!best || sweep.records[i].confidence > sweep.records[*best].confidence) {
                best = i;
            }
        }
    }
    if (!best) {
        d.refused = true;
        d.output_text = kRefusalString;
    } else {
        d.refused = false;
        d.chosen_index = best;
        d.output_text = sweep.records[*best].text;
    }
    return d;
}

nlohmann::ordered_json selector_to_json(const SelectorModel& m,
                                        const SelectorTrainReport* report) {
    nlohmann::ordered_json j;
    j["variant"] = m.variant == SelectorVariant::recurrent ? "recurrent" : "mlp";
    j["input_dim"] = m.input_dim;
    j["hidden_dim"] = m.hidden_dim;
    j["wx"] = m.wx.storage();
    if (m.variant == SelectorVariant::recurrent) j["wh"] = m.wh.storage();
    j["b"] = m.b;
    j["head_w"] = m.head_w;
    j["head_b"] = m.head_b;
    if (report) {
        nlohmann::ordered_json jr;
        jr["best_f1"] = report->best_f1;
        jr["best_epoch"] = report->best_epoch;
        jr["epochs_ran"] = report->epochs_ran;
        jr["epoch_losses"] = report->epoch_losses;
        jr["epoch_val_f1"] = report->epoch_val_f1;
        j["training"] = jr;
    }
    return j;
}

SelectorModel selector_from_json(const nlohmann::ordered_json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    SelectorModel m = SelectorModel::zeros(
        j.at("input_dim").get<std::size_t>(),
        variant == "mlp" ? SelectorVariant::mlp : SelectorVariant::recurrent);
    m.wx.storage() = j.at("wx").get<Vector>();
    if (m.variant == SelectorVariant::recurrent) m.wh.storage() = j.at("wh").get<Vector>();
    m.b = j.at("b").get<Vector>();
    m.head_w = j.at("head_w").get<Vector>();
    m.head_b = j.at("head_b").get<double>();
    if (m.wx.storage().size() != m.wx.rows() * m.wx.cols() || m.head_w.size() != m.hidden_dim) {
        throw data_error("selector_from_json: inconsistent parameter shapes");
    }
    return m;
}

void save_selector(const SelectorModel& m, const std::string& path,
                   const SelectorTrainReport* report) {
    atomic_write_text(path, selector_to_json(m, report).dump(2) + "\n");
}

SelectorModel load_selector(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("load_selector: cannot open " + path);
    nlohmann::ordered_json j;
    is >> j;
    return selector_from_json(j);
}

}  // namespace lito
