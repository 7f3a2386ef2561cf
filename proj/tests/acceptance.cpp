// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. The planted benchmark built here feeds several criteria,
// so it is constructed once up front.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lito/data.hpp"
#include "lito/eval.hpp"
#include "lito/synthetic.hpp"

using namespace lito;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", criterion, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// --- criterion 1: selector gradient fidelity --------------------------------

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    const double eps = 1e-5;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SeededRng rng(seed);
        SelectorModel m = SelectorModel::random_init(16, SelectorVariant::recurrent, rng, 0.3);
        std::vector<Vector> seq(5, Vector(16));
        std::vector<int> labels;
        for (auto& h : seq) {
            for (auto& x : h) x = rng.normal();
            labels.push_back(static_cast<int>(rng.uniform_index(2)));
        }
        const double l2 = 0.001;
        SelectorBackward bw = selector_backward(m, seq, labels, l2);

        auto check_param = [&](std::vector<double>& p, const std::vector<double>& g) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                double saved = p[i];
                p[i] = saved + eps;
                double up = selector_backward(m, seq, labels, l2).loss;
                p[i] = saved - eps;
                double down = selector_backward(m, seq, labels, l2).loss;
                p[i] = saved;
                double fd = (up - down) / (2.0 * eps);
                double scale = std::max({std::abs(fd), std::abs(g[i]), 1e-8});
                worst = std::max(worst, std::abs(fd - g[i]) / scale);
            }
        };
        check_param(m.wx.storage(), bw.grads.wx.storage());
        check_param(m.wh.storage(), bw.grads.wh.storage());
        check_param(m.b, bw.grads.b);
        check_param(m.head_w, bw.grads.head_w);
        {
            double saved = m.head_b;
            m.head_b = saved + eps;
            double up = selector_backward(m, seq, labels, l2).loss;
            m.head_b = saved - eps;
            double down = selector_backward(m, seq, labels, l2).loss;
            m.head_b = saved;
            double fd = (up - down) / (2.0 * eps);
            double scale = std::max({std::abs(fd), std::abs(bw.grads.head_b), 1e-8});
            worst = std::max(worst, std::abs(fd - bw.grads.head_b) / scale);
        }
    }
    double secs = seconds_since(t0);
    report(1, worst <= 1e-4 && secs < 30.0,
           fmt("selector BPTT vs finite differences: max rel err %.2e over 5 seeds (%.1fs)",
               worst, secs));
}

// --- criterion 2: probe recovery --------------------------------------------

void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    double min_acc = 1.0, min_cos = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SeededRng rng(5000 + seed);
        Vector axis(64);
        for (auto& x : axis) x = rng.normal();
        axis = normalized(axis);
        ProbeDataset data;
        for (int i = 0; i < 2000; ++i) {
            Vector a(64);
            for (auto& x : a) x = rng.normal();
            data.items.push_back({a, dot(axis, a) > 0.0 ? 1 : 0});
        }
        ProbeResult r = train_probe(data, seed);
        min_acc = std::min(min_acc, r.validation_accuracy);
        min_cos = std::min(min_cos, cosine(r.weight, axis));
    }
    double secs = seconds_since(t0);
    report(2, min_acc >= 0.97 && min_cos >= 0.98 && secs < 30.0,
           fmt("probe recovers a planted separator: min val acc %.3f, min cos %.3f (%.1fs)",
               min_acc, min_cos, secs));
}

// --- criterion 3: PCA recovery ----------------------------------------------

void criterion_3() {
    double min_cos = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SeededRng rng(2000 + seed);
        for (int layer = 0; layer < 4; ++layer) {
            Vector axis(32);
            for (auto& x : axis) x = rng.normal();
            axis = normalized(axis);
            std::vector<std::vector<double>> rows;
            for (int i = 0; i < 300; ++i) {
                double s = rng.normal() + 0.3;
                std::vector<double> r(32);
                for (std::size_t d = 0; d < 32; ++d)
                    r[d] = s * axis[d] + 0.05 * rng.normal();
                rows.push_back(r);
            }
            Vector pc = pca_first_component(Matrix::from_rows(rows));
            min_cos = std::min(min_cos, std::abs(cosine(pc, axis)));
        }
    }
    report(3, min_cos >= 0.99,
           fmt("PCA recovers planted difference axes: min |cos| %.4f over 5 seeds x 4 layers",
               min_cos));
}

// --- criterion 4: intervention identity and additivity ----------------------

void criterion_4() {
    ModelConfig cfg{2, 2, 8, 4, 128, 64};
    ModelWeights w = init_model(cfg, 7);
    DirectionSet ds;
    SeededRng rng(3);
    Vector dir(4);
    for (auto& x : dir) x = rng.normal();
    ds.entries.push_back({{1, 0}, normalized(dir)});

    std::vector<int> prompt = encode_bytes("Q: which?\nA:");
    bool identity = true;
    GenerationTrace plain = generate(w, prompt, InterventionSet::none(), 8, '\n');
    GenerationTrace zeroed = generate(w, prompt, ds.at_intensity(0.0), 8, '\n');
    identity = plain.generated_token_ids == zeroed.generated_token_ids &&
               plain.per_token_prob == zeroed.per_token_prob &&
               plain.last_hidden == zeroed.last_hidden;

    // Additivity at the injection site: the captured head output under
    // alpha1 + alpha2 equals base + (alpha1 + alpha2) * d.
    double worst = 0.0;
    StepOutput base = forward_step(w, prompt, InterventionSet::none());
    for (auto [a1, a2] : {std::pair{5.0, 10.0}, {2.5, 7.25}, {0.0, 25.0}}) {
        StepOutput both = forward_step(w, prompt, ds.at_intensity(a1 + a2));
        const double* hb = base.head(cfg, ds.entries[0].address);
        const double* hw = both.head(cfg, ds.entries[0].address);
        for (std::size_t i = 0; i < 4; ++i) {
            double expect = hb[i] + (a1 + a2) * ds.entries[0].direction[i];
            worst = std::max(worst, std::abs(hw[i] - expect));
        }
    }
    report(4, identity && worst <= 1e-9,
           fmt("alpha=0 is bit-identical to no intervention; additivity dev %.1e", worst));
}

// --- criterion 9 helper used by criterion 5 too -----------------------------

struct BenchmarkRun {
    SyntheticBenchmark bench;
    DirectionSet directions;
    std::vector<EvalItem> train_items, test_items, all_items_ext;
    SelectorTraining lstm, mlp;
    std::vector<MethodResult> methods;  // every non-lito baseline
    MethodResult lito;
    double gen_secs = 0.0, total_secs = 0.0;
};

BenchmarkRun build_benchmark() {
    BenchmarkRun out;
    auto t0 = std::chrono::steady_clock::now();
    SyntheticGenConfig cfg;  // 500 items, 10% unanswerable, seed 2024
    out.bench = generate_synthetic_benchmark(cfg);
    out.directions = synthetic_pipeline_directions(out.bench);
    out.gen_secs = seconds_since(t0);

    const ModelWeights& w = out.bench.weights;
    std::map<std::string, const QAItem*> by_id;
    for (const auto& it : out.bench.items) by_id[it.id] = &it;

    auto make_items = [&](const std::string& split, const IntensitySchedule& sched,
                          bool with_baseline) {
        std::vector<EvalItem> items;
        for (const auto& it : out.bench.items) {
            if (!split.empty() && it.split != split) continue;
            EvalItem ei;
            ei.prompt_id = it.id;
            ei.references = it.references;
            std::string prompt = synthetic_prompt(it.question);
            ei.sweep = run_sweep(w, out.directions, sched, it.id, prompt, 8, kSyntheticStopToken);
            if (with_baseline) {
                GenerationTrace t =
                    generate(w, encode_bytes(prompt), InterventionSet::none(), 8,
                             kSyntheticStopToken);
                ei.baseline_zero = response_from_trace(t, 0.0);
            }
            items.push_back(std::move(ei));
        }
        return items;
    };
    out.train_items = make_items("train", out.bench.grid, false);
    out.test_items = make_items("test", out.bench.grid, true);
    out.all_items_ext = make_items("", out.bench.grid_ext, false);

    LabelOracle oracle;
    auto seqs = sequences_from_items(out.train_items, oracle);
    SelectorTrainConfig sc;
    sc.seed = 11;
    sc.learning_rate = 1.0;  // the library default 0.01 is tuned for larger inputs
    out.lstm = train_selector(seqs, sc);
    sc.variant = SelectorVariant::mlp;
    out.mlp = train_selector(seqs, sc);

    std::vector<MethodSpec> specs = {{"original-lm"},
                                     {"majority-vote"},
                                     {"max-confidence"},
                                     {"max-confidence-threshold"},
                                     {"always-refuse"}};
    for (std::size_t a = 0; a < out.bench.grid.k(); ++a) {
        MethodSpec s;
        s.name = "fixed-alpha-" + std::to_string(static_cast<int>(out.bench.grid.values[a]));
        s.fixed_alpha_index = a;
        specs.push_back(s);
    }
    for (const auto& s : specs) out.methods.push_back(evaluate_method(s, out.test_items, oracle));

    MethodSpec lito_spec;
    lito_spec.name = "lito";
    lito_spec.selector = &out.lstm.model;
    out.lito = evaluate_method(lito_spec, out.test_items, oracle);
    out.total_secs = seconds_since(t0);
    return out;
}

void criterion_5(const BenchmarkRun& run) {
    bool exact = std::abs(confidence({0.8, 0.2}) - 0.4) <= 1e-12 &&
                 std::abs(ta_score(0.64, 0.25) - 0.4) <= 1e-12;
    bool dominance = run.lito.aggregate.truthfulness >= run.lito.aggregate.accuracy;
    for (const auto& m : run.methods)
        dominance = dominance && m.aggregate.truthfulness >= m.aggregate.accuracy;
    report(5, exact && dominance,
           fmt("confidence/ta_score exact at 1e-12; truthfulness >= accuracy on all %zu methods",
               run.methods.size() + 1));
}

void criterion_6(const BenchmarkRun& run) {
    double lito_ta = run.lito.aggregate.ta;
    double margin = 1.0;
    std::string closest;
    for (const auto& m : run.methods) {
        if (m.method == "always-refuse") continue;  // covered by criterion 9
        if (lito_ta - m.aggregate.ta < margin) {
            margin = lito_ta - m.aggregate.ta;
            closest = m.method;
        }
    }
    std::size_t unanswerable = 0, refused = 0;
    for (std::size_t i = 0; i < run.test_items.size(); ++i) {
        if (run.test_items[i].references == std::vector<std::string>{"no known answer"}) {
            ++unanswerable;
            if (run.lito.items[i].outcome == Outcome::refused) ++refused;
        }
    }
    double refusal_rate =
        unanswerable == 0 ? 0.0 : static_cast<double>(refused) / static_cast<double>(unanswerable);
    report(6,
           margin >= 0.02 && refusal_rate >= 0.70 && unanswerable > 0 && run.total_secs < 600.0,
           fmt("planted benchmark: adaptive TA %.3f beats %s by %.3f; refuses %zu/%zu "
               "unanswerable (%.0fs total)",
               lito_ta, closest.c_str(), margin, refused, unanswerable, run.total_secs));
}

void criterion_7(const BenchmarkRun& run) {
    report(7, run.lstm.report.best_f1 >= run.mlp.report.best_f1,
           fmt("selector ablation: recurrent F1 %.3f >= mlp F1 %.3f", run.lstm.report.best_f1,
               run.mlp.report.best_f1));
}

void criterion_8(const BenchmarkRun& run) {
    LabelOracle oracle;
    SelectorTrainConfig kc;
    kc.seed = 11;
    kc.learning_rate = 1.0;
    std::vector<KSweepRow> rows = k_sweep_report(run.all_items_ext, oracle, kc, {1, 2, 3, 4, 5, 6});
    std::string csv = "k,mean_ta\n";
    for (const auto& r : rows) csv += fmt("%zu,%.4f\n", r.k, r.mean_ta);
    bool all_k = rows.size() == 6;
    for (std::size_t i = 0; i < rows.size(); ++i) all_k = all_k && rows[i].k == i + 1;
    double ta2 = rows.size() > 1 ? rows[1].mean_ta : 0.0;
    double ta5 = rows.size() > 4 ? rows[4].mean_ta : 0.0;
    report(8, all_k && ta5 > ta2,
           fmt("k sweep: mean TA(5) %.3f > TA(2) %.3f; CSV covers k=1..6", ta5, ta2));
}

void criterion_9(const BenchmarkRun& run) {
    const MethodResult* refuse = nullptr;
    for (const auto& m : run.methods)
        if (m.method == "always-refuse") refuse = &m;
    bool ok = refuse != nullptr && refuse->aggregate.truthfulness == 1.0 &&
              refuse->aggregate.accuracy == 0.0 && refuse->aggregate.ta == 0.0;
    report(9, ok, "always-refuse scores exactly truthfulness 1.0, accuracy 0.0, TA 0.0");
}

// --- criterion 10: CLI determinism ------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void criterion_10() {
    fs::path dir = fs::temp_directory_path() / "lito_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path out = dir / "out";
    {
        std::ofstream os(dir / "run.toml");
        os << "[run]\nseed = 2024\nout_dir = \"" << out.string() << "\"\n"
           << "[lm_train]\nmode = \"synthetic\"\n"
           << "[synthetic]\nn_items = 60\n"
           << "[intervention]\ntop_k = 1\nschedule = [5, 10, 15, 20, 25, 30]\n"
           << "[selector]\nlearning_rate = 1.0\n"
           << "[evaluate]\nsplit = \"test\"\ndataset_name = \"synthetic\"\n";
    }
    const std::string base =
        std::string(LITO_TOOL_PATH) + " %s --config " + (dir / "run.toml").string() +
        " >/dev/null 2>&1";
    auto run_stage = [&](const std::string& stage) {
        std::string cmd = fmt(base.c_str(), stage.c_str());
        return WEXITSTATUS(std::system(cmd.c_str())) == 0;
    };
    const std::vector<std::string> stages = {"train-lm",        "train-probes", "extract-repe",
                                             "sweep",           "train-selector",
                                             "evaluate",        "report"};
    bool ok = true;
    std::string detail = "every CLI stage rerun is byte-identical";
    for (const auto& s : stages) ok = ok && run_stage(s);
    if (!ok) detail = "a pipeline stage failed";

    // Snapshot all artifacts, rerun every stage, compare bytes.
    std::map<std::string, std::string> before;
    if (ok)
        for (const auto& e : fs::directory_iterator(out))
            before[e.path().filename().string()] = slurp(e.path());
    for (const auto& s : stages) ok = ok && run_stage(s);
    if (ok) {
        for (const auto& [name, text] : before) {
            if (slurp(out / name) != text) {
                ok = false;
                detail = "artifact changed on rerun: " + name;
                break;
            }
        }
    }
    report(10, ok, detail + fmt(" (%zu artifacts)", before.size()));
    fs::remove_all(dir);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    BenchmarkRun run = build_benchmark();
    criterion_5(run);
    criterion_6(run);
    criterion_7(run);
    criterion_8(run);
    criterion_9(run);
    criterion_10();
    if (failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", failures);
    return 1;
}
