// lito: stage-oriented pipeline driver.
//
// Every subcommand reads one TOML config (plus a few flag overrides), writes
// its artifacts into the run directory with atomic renames, and drops a
// manifest (resolved config, seed, input/output content hashes) next to them
// so any stage can be reproduced bit-exactly.

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lito/data.hpp"
#include "lito/directions.hpp"
#include "lito/errors.hpp"
#include "lito/eval.hpp"
#include "lito/io_util.hpp"
#include "lito/lm.hpp"
#include "lito/lm_train.hpp"
#include "lito/selector.hpp"
#include "lito/svg.hpp"
#include "lito/sweep.hpp"
#include "lito/synthetic.hpp"
#include "lito/toml.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace lito;

json default_config() {
    json c;
    c["run"]["seed"] = 2024;
    c["run"]["out_dir"] = "runs/default";
    c["model"]["n_layers"] = 4;
    c["model"]["n_heads"] = 4;
    c["model"]["d_model"] = 64;
    c["model"]["d_head"] = 16;
    c["model"]["vocab_size"] = 256;
    c["model"]["max_seq_len"] = 256;
    c["lm_train"]["mode"] = "corpus";
    c["lm_train"]["corpus"] = "";
    c["lm_train"]["epochs"] = 200;
    c["lm_train"]["learning_rate"] = 0.01;
    c["synthetic"]["n_items"] = 500;
    c["synthetic"]["unanswerable_fraction"] = 0.1;
    c["synthetic"]["epochs_per_round"] = 300;
    c["synthetic"]["learning_rate"] = 0.003;
    c["synthetic"]["max_rounds"] = 4;
    c["dataset"]["qa"] = "";
    c["dataset"]["format"] = "jsonl";
    c["dataset"]["prompt_style"] = "bare";
    c["dataset"]["template"] = "";
    c["dataset"]["probe_pairs"] = "";
    c["intervention"]["use"] = "iti";
    c["intervention"]["schedule"] = json::array({5, 10, 15, 20, 25});
    c["intervention"]["repe_schedule"] = json::array({1, 2, 3, 4, 5});
    c["intervention"]["top_k"] = 8;
    c["intervention"]["probe_seed"] = 7;
    c["sweep"]["max_new_tokens"] = 8;
    c["sweep"]["stop_token"] = 10;
    c["selector"]["variant"] = "recurrent";
    c["selector"]["learning_rate"] = 0.01;
    c["selector"]["l2_coeff"] = 0.001;
    c["selector"]["max_epochs"] = 50;
    c["selector"]["patience"] = 10;
    c["selector"]["threshold"] = 0.5;
    c["selector"]["upsample_minority"] = true;
    c["selector"]["split"] = "train";
    c["evaluate"]["methods"] = json::array({"original-lm", "fixed-alpha", "majority-vote",
                                            "max-confidence", "max-confidence-threshold",
                                            "lito", "always-refuse"});
    c["evaluate"]["confidence_threshold"] = 0.6;
    c["evaluate"]["oracle"] = "exact-match";
    c["evaluate"]["split"] = "";
    c["evaluate"]["dataset_name"] = "dataset";
    c["evaluate"]["model_name"] = "toy";
    c["report"]["k_values"] = json::array({1, 2, 3, 4, 5, 6});
    c["report"]["sweeps"] = "";
    return c;
}

void deep_merge(json& base, const json& over) {
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
            deep_merge(base[it.key()], *it);
        else
            base[it.key()] = *it;
    }
}

struct Ctx {
    json cfg;
    std::string out_dir;

    std::string art(const std::string& name) const { return out_dir + "/" + name; }
    // Config paths default to run-directory artifacts when left empty.
    std::string path_or_art(const json& v, const std::string& fallback) const {
        std::string p = v.get<std::string>();
        return p.empty() ? art(fallback) : p;
    }
    std::uint64_t seed() const { return cfg["run"]["seed"].get<std::uint64_t>(); }
};

IntensitySchedule schedule_from(const json& arr) {
    IntensitySchedule s;
    for (const auto& v : arr) s.values.push_back(v.get<double>());
    s.validate();
    return s;
}

void write_manifest(const Ctx& ctx, const std::string& stage,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json m;
    m["stage"] = stage;
    m["seed"] = ctx.cfg["run"]["seed"];
    m["config"] = ctx.cfg;
    m["inputs"] = json::object();
    for (const auto& p : inputs) m["inputs"][p] = hash_file_hex(p);
    m["outputs"] = json::object();
    for (const auto& p : outputs) m["outputs"][p] = hash_file_hex(p);
    atomic_write_text(ctx.art(stage + "_manifest.json"), m.dump(2) + "\n");
}

std::optional<PromptTemplate> maybe_template(const Ctx& ctx) {
    if (ctx.cfg["dataset"]["prompt_style"].get<std::string>() != "template") return std::nullopt;
    std::string path = ctx.cfg["dataset"]["template"].get<std::string>();
    if (path.empty()) throw config_error("dataset.template required for prompt_style=template");
    return load_prompt_template(path);
}

std::string render(const std::optional<PromptTemplate>& tmpl, const std::string& question) {
    return tmpl ? render_prompt(*tmpl, question) : synthetic_prompt(question);
}

std::vector<QAItem> load_dataset(const Ctx& ctx) {
    const std::string qa = ctx.path_or_art(ctx.cfg["dataset"]["qa"], "qa.jsonl");
    const std::string fmt = ctx.cfg["dataset"]["format"].get<std::string>();
    if (fmt != "jsonl" && fmt != "csv") throw config_error("dataset.format must be jsonl or csv");
    return load_qa(qa, fmt == "jsonl" ? QaFormat::jsonl : QaFormat::csv);
}

std::vector<LabeledPrompt> labeled_probe_prompts(const Ctx& ctx,
                                                 const std::vector<ProbePair>& pairs) {
    auto tmpl = maybe_template(ctx);
    if (tmpl) return build_probe_prompts(pairs, *tmpl);
    return probe_prompts_bare(pairs);
}

std::string directions_path(const Ctx& ctx) {
    const std::string use = ctx.cfg["intervention"]["use"].get<std::string>();
    if (use == "iti") return ctx.art("directions.json");
    if (use == "repe") return ctx.art("repe_directions.json");
    throw config_error("intervention.use must be iti or repe");
}

LabelOracle oracle_from(const Ctx& ctx) {
    const std::string kind = ctx.cfg["evaluate"]["oracle"].get<std::string>();
    LabelOracle o;
    if (kind == "exact-match") o.kind = LabelOracle::Kind::exact_match;
    else if (kind == "alias-match") o.kind = LabelOracle::Kind::alias_match;
    else throw config_error("evaluate.oracle must be exact-match or alias-match");
    return o;
}

SelectorTrainConfig selector_cfg(const Ctx& ctx) {
    const json& s = ctx.cfg["selector"];
    SelectorTrainConfig c;
    c.l2_coeff = s["l2_coeff"].get<double>();
    c.max_epochs = s["max_epochs"].get<std::size_t>();
    c.patience = s["patience"].get<std::size_t>();
    c.learning_rate = s["learning_rate"].get<double>();
    c.seed = ctx.seed();
    c.upsample_minority = s["upsample_minority"].get<bool>();
    const std::string variant = s["variant"].get<std::string>();
    if (variant == "recurrent") c.variant = SelectorVariant::recurrent;
    else if (variant == "mlp") c.variant = SelectorVariant::mlp;
    else throw config_error("selector.variant must be recurrent or mlp");
    return c;
}

// EvalItems joined from sweeps, references, and optional alpha-0 baselines.
std::vector<EvalItem> eval_items(const Ctx& ctx, const std::vector<SweepResult>& sweeps,
                                 const std::string& split, bool with_baseline) {
    auto items = load_dataset(ctx);
    std::map<std::string, const QAItem*> by_id;
    for (const auto& it : items) by_id[it.id] = &it;
    std::map<std::string, ResponseRecord> baselines;
    if (with_baseline) {
        for (const auto& s : load_sweeps_jsonl(ctx.art("baseline.jsonl"))) {
            if (s.records.size() != 1)
                throw data_error("baseline.jsonl: expected exactly one record per item");
            baselines[s.prompt_id] = s.records[0];
        }
    }
    std::vector<EvalItem> out;
    for (const auto& s : sweeps) {
        auto it = by_id.find(s.prompt_id);
        if (it == by_id.end())
            throw data_error("sweep prompt_id '" + s.prompt_id + "' not present in the dataset");
        if (!split.empty() && it->second->split != split) continue;
        EvalItem ei;
        ei.prompt_id = s.prompt_id;
        ei.references = it->second->references;
        ei.sweep = s;
        if (with_baseline) {
            auto b = baselines.find(s.prompt_id);
            if (b == baselines.end())
                throw data_error("no baseline record for prompt_id '" + s.prompt_id + "'");
            ei.baseline_zero = b->second;
        }
        out.push_back(std::move(ei));
    }
    if (out.empty()) throw data_error("no items left after split filter '" + split + "'");
    return out;
}

// ---------------------------------------------------------------------------

int cmd_train_lm(const Ctx& ctx) {
    const std::string mode = ctx.cfg["lm_train"]["mode"].get<std::string>();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    if (mode == "synthetic") {
        const json& s = ctx.cfg["synthetic"];
        SyntheticGenConfig gen;
        gen.seed = ctx.seed();
        gen.n_items = s["n_items"].get<std::size_t>();
        gen.unanswerable_fraction = s["unanswerable_fraction"].get<double>();
        gen.epochs_per_round = s["epochs_per_round"].get<std::size_t>();
        gen.learning_rate = s["learning_rate"].get<double>();
        gen.max_rounds = s["max_rounds"].get<std::size_t>();
        gen.probe_seed = ctx.cfg["intervention"]["probe_seed"].get<std::uint64_t>();
        gen.top_k = ctx.cfg["intervention"]["top_k"].get<std::size_t>();
        auto bench = generate_synthetic_benchmark(gen);
        save_weights(bench.weights, ctx.art("model.bin"));
        save_qa_jsonl(bench.items, ctx.art("qa.jsonl"));
        save_probe_pairs_jsonl(bench.probe_pairs, ctx.art("probe_pairs.jsonl"));
        outputs = {ctx.art("model.bin"), ctx.art("qa.jsonl"), ctx.art("probe_pairs.jsonl")};
    } else if (mode == "corpus") {
        const std::string corpus_path = ctx.cfg["lm_train"]["corpus"].get<std::string>();
        if (corpus_path.empty()) throw config_error("lm_train.corpus required for mode=corpus");
        const json& m = ctx.cfg["model"];
        ModelConfig mc{m["n_layers"].get<std::uint32_t>(), m["n_heads"].get<std::uint32_t>(),
                       m["d_model"].get<std::uint32_t>(), m["d_head"].get<std::uint32_t>(),
                       m["vocab_size"].get<std::uint32_t>(), m["max_seq_len"].get<std::uint32_t>()};
        mc.validate();
        std::vector<TrainExample> examples;
        std::istringstream is(read_text_file(corpus_path));
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            TrainExample ex;
            ex.tokens = encode_bytes(line + "\n");
            ex.loss_start = 1;
            examples.push_back(std::move(ex));
        }
        if (examples.empty()) throw data_error("corpus '" + corpus_path + "' has no sequences");
        ModelWeights w = init_model(mc, ctx.seed());
        LmTrainConfig tc;
        tc.epochs = ctx.cfg["lm_train"]["epochs"].get<std::size_t>();
        tc.learning_rate = ctx.cfg["lm_train"]["learning_rate"].get<double>();
        auto report = train_lm(w, examples, tc);
        save_weights(w, ctx.art("model.bin"));
        json log;
        log["epoch_losses"] = report.epoch_losses;
        atomic_write_text(ctx.art("train_log.json"), log.dump(2) + "\n");
        inputs = {corpus_path};
        outputs = {ctx.art("model.bin"), ctx.art("train_log.json")};
    } else {
        throw config_error("lm_train.mode must be corpus or synthetic");
    }
    write_manifest(ctx, "train-lm", inputs, outputs);
    return 0;
}

int cmd_train_probes(const Ctx& ctx) {
    const std::string weights_path = ctx.art("model.bin");
    const std::string pairs_path = ctx.path_or_art(ctx.cfg["dataset"]["probe_pairs"], "probe_pairs.jsonl");
    auto w = load_weights(weights_path);
    auto pairs = load_probe_pairs_jsonl(pairs_path);
    auto prompts = labeled_probe_prompts(ctx, pairs);
    const std::size_t top_k = ctx.cfg["intervention"]["top_k"].get<std::size_t>();
    if (top_k == 0 || top_k > static_cast<std::size_t>(w.config.n_layers) * w.config.n_heads)
        throw config_error("intervention.top_k out of range for this model");
    auto probes = train_all_probes(w, prompts, ctx.cfg["intervention"]["probe_seed"].get<std::uint64_t>());
    auto ds = select_heads(probes, top_k);
    json table = json::array();
    for (const auto& p : probes) {
        json row;
        row["layer"] = p.address.layer;
        row["head"] = p.address.head;
        row["validation_accuracy"] = p.validation_accuracy;
        table.push_back(row);
    }
    ds.metadata["all_heads"] = table;
    save_direction_set(ds, ctx.art("directions.json"));
    write_manifest(ctx, "train-probes", {weights_path, pairs_path},
                   {ctx.art("directions.json")});
    return 0;
}

int cmd_extract_repe(const Ctx& ctx) {
    const std::string weights_path = ctx.art("model.bin");
    const std::string pairs_path = ctx.path_or_art(ctx.cfg["dataset"]["probe_pairs"], "probe_pairs.jsonl");
    auto w = load_weights(weights_path);
    auto pairs = load_probe_pairs_jsonl(pairs_path);
    auto tmpl = maybe_template(ctx);
    std::vector<std::pair<std::string, std::string>> counterfactuals;
    for (const auto& p : pairs) {
        const std::string base = render(tmpl, p.question) + " ";
        counterfactuals.push_back({base + p.correct_answer, base + p.incorrect_answer});
    }
    auto candidates = repe_directions(w, counterfactuals);
    auto validation = labeled_probe_prompts(ctx, pairs);
    auto ds = select_repe_layer(w, candidates, validation);
    save_direction_set(ds, ctx.art("repe_directions.json"));
    write_manifest(ctx, "extract-repe", {weights_path, pairs_path},
                   {ctx.art("repe_directions.json")});
    return 0;
}

int cmd_sweep(const Ctx& ctx) {
    const std::string weights_path = ctx.art("model.bin");
    const std::string dirs_path = directions_path(ctx);
    auto w = load_weights(weights_path);
    auto ds = load_direction_set(dirs_path);
    auto items = load_dataset(ctx);
    auto tmpl = maybe_template(ctx);
    const auto schedule = schedule_from(
        ctx.cfg["intervention"][ds.mode == DirectionMode::head_level ? "schedule" : "repe_schedule"]);
    const std::size_t max_new = ctx.cfg["sweep"]["max_new_tokens"].get<std::size_t>();
    const int stop = ctx.cfg["sweep"]["stop_token"].get<int>();
    std::vector<SweepResult> sweeps, baselines;
    for (const auto& it : items) {
        const std::string prompt = render(tmpl, it.question);
        sweeps.push_back(run_sweep(w, ds, schedule, it.id, prompt, max_new, stop));
        auto t = generate(w, encode_bytes(prompt), InterventionSet{}, max_new, stop);
        SweepResult zero;
        zero.prompt_id = it.id;
        zero.prompt = prompt;
        zero.records.push_back(response_from_trace(t, 0.0));
        baselines.push_back(std::move(zero));
    }
    save_sweeps_jsonl(sweeps, ctx.art("sweeps.jsonl"));
    save_sweeps_jsonl(baselines, ctx.art("baseline.jsonl"));
    const std::string qa = ctx.path_or_art(ctx.cfg["dataset"]["qa"], "qa.jsonl");
    write_manifest(ctx, "sweep", {weights_path, dirs_path, qa},
                   {ctx.art("sweeps.jsonl"), ctx.art("baseline.jsonl")});
    return 0;
}

int cmd_train_selector(const Ctx& ctx) {
    auto sweeps = load_sweeps_jsonl(ctx.art("sweeps.jsonl"));
    auto items = eval_items(ctx, sweeps, ctx.cfg["selector"]["split"].get<std::string>(), false);
    auto oracle = oracle_from(ctx);
    auto seqs = sequences_from_items(items, oracle);
    auto training = train_selector(seqs, selector_cfg(ctx));
    save_selector(training.model, ctx.art("selector.json"), &training.report);
    const std::string qa = ctx.path_or_art(ctx.cfg["dataset"]["qa"], "qa.jsonl");
    write_manifest(ctx, "train-selector", {ctx.art("sweeps.jsonl"), qa},
                   {ctx.art("selector.json")});
    return 0;
}

int cmd_evaluate(const Ctx& ctx) {
    auto sweeps = load_sweeps_jsonl(ctx.art("sweeps.jsonl"));
    auto items = eval_items(ctx, sweeps, ctx.cfg["evaluate"]["split"].get<std::string>(), true);
    auto oracle = oracle_from(ctx);
    const auto schedule = schedule_from(ctx.cfg["intervention"]["schedule"]);

    SelectorModel selector;
    bool have_selector = false;
    std::vector<MethodSpec> specs;
    for (const auto& mj : ctx.cfg["evaluate"]["methods"]) {
        const std::string name = mj.get<std::string>();
        if (name == "fixed-alpha") {
            for (std::size_t a = 0; a < items[0].sweep.records.size(); ++a) {
                MethodSpec s;
                char buf[32];
                std::snprintf(buf, sizeof buf, "%g", items[0].sweep.records[a].intensity);
                s.name = std::string("fixed-alpha-") + buf;
                s.fixed_alpha_index = a;
                specs.push_back(s);
            }
            continue;
        }
        MethodSpec s;
        s.name = name;
        s.confidence_threshold = ctx.cfg["evaluate"]["confidence_threshold"].get<double>();
        if (name == "lito") {
            if (!have_selector) {
                selector = load_selector(ctx.art("selector.json"));
                have_selector = true;
            }
            s.selector = &selector;
            s.selector_threshold = ctx.cfg["selector"]["threshold"].get<double>();
        }
        specs.push_back(s);
    }

    const std::string dataset_name = ctx.cfg["evaluate"]["dataset_name"].get<std::string>();
    const std::string model_name = ctx.cfg["evaluate"]["model_name"].get<std::string>();
    std::string csv = results_csv_header() + "\n";
    std::string per_item;
    std::vector<std::string> method_labels;
    Series ta_series{"ta", {}};
    for (const auto& s : specs) {
        auto r = evaluate_method(s, items, oracle);
        csv += results_csv_row(s.name, dataset_name, model_name, schedule.k(), r.aggregate) + "\n";
        for (const auto& pi : r.items) per_item += per_item_json(s.name, pi).dump() + "\n";
        method_labels.push_back(s.name);
        ta_series.ys.push_back(r.aggregate.ta);
    }
    atomic_write_text(ctx.art("results.csv"), csv);
    atomic_write_text(ctx.art("per_item.jsonl"), per_item);
    atomic_write_text(ctx.art("results.svg"),
                      svg_bar_chart("TA by method: " + dataset_name, method_labels, {ta_series},
                                    "TA score"));
    const std::string qa = ctx.path_or_art(ctx.cfg["dataset"]["qa"], "qa.jsonl");
    std::vector<std::string> inputs = {ctx.art("sweeps.jsonl"), ctx.art("baseline.jsonl"), qa};
    if (have_selector) inputs.push_back(ctx.art("selector.json"));
    write_manifest(ctx, "evaluate", inputs,
                   {ctx.art("results.csv"), ctx.art("per_item.jsonl"), ctx.art("results.svg")});
    return 0;
}

int cmd_report(const Ctx& ctx) {
    const std::string sweeps_path = ctx.path_or_art(ctx.cfg["report"]["sweeps"], "sweeps.jsonl");
    auto sweeps = load_sweeps_jsonl(sweeps_path);
    auto items = eval_items(ctx, sweeps, "", false);
    auto oracle = oracle_from(ctx);
    std::vector<std::size_t> k_values;
    for (const auto& v : ctx.cfg["report"]["k_values"]) k_values.push_back(v.get<std::size_t>());
    auto rows = k_sweep_report(items, oracle, selector_cfg(ctx), k_values);
    std::string csv = "k,mean_ta";
    for (std::size_t f = 0; f < rows[0].fold_ta.size(); ++f) csv += ",fold" + std::to_string(f + 1);
    csv += "\n";
    std::vector<std::string> labels;
    Series mean{"mean TA", {}};
    for (const auto& r : rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%zu,%.4f", r.k, r.mean_ta);
        csv += buf;
        for (double f : r.fold_ta) {
            std::snprintf(buf, sizeof buf, ",%.4f", f);
            csv += buf;
        }
        csv += "\n";
        labels.push_back(std::to_string(r.k));
        mean.ys.push_back(r.mean_ta);
    }
    atomic_write_text(ctx.art("ksweep.csv"), csv);
    atomic_write_text(ctx.art("ksweep.svg"),
                      svg_line_chart("TA vs number of intensities", labels, {mean}, "mean TA"));
    const std::string qa = ctx.path_or_art(ctx.cfg["dataset"]["qa"], "qa.jsonl");
    write_manifest(ctx, "report", {sweeps_path, qa}, {ctx.art("ksweep.csv"), ctx.art("ksweep.svg")});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive intervention-intensity pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // allow the shared flags after the subcommand name
    std::string config_path, out_dir, methods;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k_override;
    app.add_option("--config", config_path, "TOML config file");
    app.add_option("--seed", seed, "Override run.seed");
    app.add_option("--out", out_dir, "Override run.out_dir");
    app.add_option("--methods", methods, "Comma-separated evaluate method list");
    app.add_option("--k", k_override, "Truncate the intensity schedule to its first k values");

    const std::vector<std::pair<std::string, int (*)(const Ctx&)>> stages = {
        {"train-lm", cmd_train_lm},       {"train-probes", cmd_train_probes},
        {"extract-repe", cmd_extract_repe}, {"sweep", cmd_sweep},
        {"train-selector", cmd_train_selector}, {"evaluate", cmd_evaluate},
        {"report", cmd_report}};
    for (const auto& [name, fn] : stages) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        Ctx ctx;
        ctx.cfg = default_config();
        if (!config_path.empty()) deep_merge(ctx.cfg, load_toml_file(config_path));
        if (seed) ctx.cfg["run"]["seed"] = *seed;
        if (!out_dir.empty()) ctx.cfg["run"]["out_dir"] = out_dir;
        if (!methods.empty()) {
            json list = json::array();
            std::istringstream is(methods);
            std::string m;
            while (std::getline(is, m, ','))
                if (!m.empty()) list.push_back(m);
            ctx.cfg["evaluate"]["methods"] = list;
        }
        if (k_override) {
            json& sched = ctx.cfg["intervention"]["schedule"];
            if (*k_override == 0 || *k_override > sched.size())
                throw config_error("--k must be in [1, schedule length]");
            json cut = json::array();
            for (std::size_t i = 0; i < *k_override; ++i) cut.push_back(sched[i]);
            sched = cut;
        }
        ctx.out_dir = ctx.cfg["run"]["out_dir"].get<std::string>();
        std::filesystem::create_directories(ctx.out_dir);

        for (const auto& [name, fn] : stages)
            if (app.get_subcommand(name)->parsed()) return fn(ctx);
        throw contract_error("no subcommand dispatched");
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
