#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lito/errors.hpp"
#include "lito/eval.hpp"

using namespace lito;

namespace {

SweepResult make_sweep(const std::string& id,
                       const std::vector<std::pair<std::string, double>>& text_conf) {
    SweepResult s;
    s.prompt_id = id;
    double alpha = 0.0;
    for (const auto& [text, conf] : text_conf) {
        s.records.push_back({alpha, text, text.size(), {0.0, 0.0}, conf});
        alpha += 5.0;
    }
    return s;
}

EvalItem make_item(const std::string& id, const std::vector<std::string>& refs,
                   const std::vector<std::pair<std::string, double>>& text_conf) {
    EvalItem item;
    item.prompt_id = id;
    item.references = refs;
    item.sweep = make_sweep(id, text_conf);
    return item;
}

}  // namespace

TEST_CASE("normalize_answer canonicalizes text") {
    CHECK(normalize_answer("  Paris. ") == "paris");
    CHECK(normalize_answer("The   Blue\tWhale!") == "the blue whale");
    CHECK(normalize_answer("YES") == "yes");
    CHECK(normalize_answer("a b?") == "a b");
    CHECK(normalize_answer("") == "");
}

TEST_CASE("is_refusal is case- and period-insensitive") {
    CHECK(is_refusal("I have no comment."));
    CHECK(is_refusal("i have no comment"));
    CHECK(is_refusal("  I HAVE NO COMMENT.  "));
    CHECK_FALSE(is_refusal("I have a comment."));
    CHECK_FALSE(is_refusal("no comment"));
}

TEST_CASE("label distinguishes accurate, inaccurate, and refused") {
    LabelOracle oracle;
    CHECK(label(oracle, "Paris.", {"paris"}) == Outcome::accurate);
    CHECK(label(oracle, "london", {"paris"}) == Outcome::inaccurate);
    CHECK(label(oracle, "I have no comment.", {"paris"}) == Outcome::refused);
    CHECK(label(oracle, "Paris", {"rome", "paris"}) == Outcome::accurate);

    LabelOracle alias;
    alias.kind = LabelOracle::Kind::alias_match;
    alias.aliases["paris"] = {"city of light"};
    CHECK(label(alias, "City of Light", {"paris"}) == Outcome::accurate);
    CHECK(label(alias, "city of light", {"rome"}) == Outcome::inaccurate);
}

TEST_CASE("ta_score is the geometric mean with domain checks") {
    CHECK(ta_score(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(ta_score(0.9, 0.4) == doctest::Approx(std::sqrt(0.36)).epsilon(1e-12));
    CHECK(ta_score(0.5, 0.0) == 0.0);
    CHECK_THROWS_AS(ta_score(-0.1, 0.5), contract_error);
    CHECK_THROWS_AS(ta_score(0.5, 1.5), contract_error);
}

TEST_CASE("aggregate_outcomes computes truthfulness and accuracy") {
    std::vector<Outcome> outcomes = {Outcome::accurate, Outcome::accurate, Outcome::refused,
                                     Outcome::inaccurate, Outcome::refused};
    EvalOutcome o = aggregate_outcomes(outcomes);
    CHECK(o.n_items == 5);
    CHECK(o.n_accurate == 2);
    CHECK(o.n_refused == 2);
    CHECK(o.n_inaccurate == 1);
    CHECK(o.truthfulness == doctest::Approx(0.8));
    CHECK(o.accuracy == doctest::Approx(0.4));
    CHECK(o.ta == doctest::Approx(std::sqrt(0.32)).epsilon(1e-12));
}

TEST_CASE("majority_vote counts normalized answers and breaks ties by confidence") {
    // Winning group {Paris., paris}; the group's highest-confidence member's
    // original text is returned.
    SweepResult s = make_sweep("m", {{"Paris.", 0.2}, {"paris", 0.3}, {"Rome", 0.9}});
    CHECK(majority_vote(s) == "paris");
    // 2-2 tie: the group containing the single highest-confidence record wins.
    SweepResult t = make_sweep(
        "t", {{"Paris", 0.4}, {"paris", 0.45}, {"Rome", 0.9}, {"rome.", 0.1}});
    CHECK(majority_vote(t) == "Rome");
}

TEST_CASE("max_confidence and its thresholded variant") {
    SweepResult s = make_sweep("c", {{"a", 0.5}, {"b", 0.8}, {"c", 0.3}});
    CHECK(max_confidence(s) == "b");
    CHECK(max_confidence_threshold(s, 0.6) == "b");
    // Strict inequality: max *equal* to T refuses.
    CHECK(max_confidence_threshold(s, 0.8) == kRefusalString);
    CHECK(max_confidence_threshold(s, 0.79) == "b");
}

TEST_CASE("oracle_best_of_k picks the best TA with lowest-index ties") {
    std::vector<EvalOutcome> per_alpha(3);
    per_alpha[0].ta = 0.4;
    per_alpha[1].ta = 0.7;
    per_alpha[2].ta = 0.7;
    CHECK(oracle_best_of_k(per_alpha) == 1);
}

TEST_CASE("evaluate_method covers every built-in method") {
    LabelOracle oracle;
    std::vector<EvalItem> items;
    // Item 1: right answer appears only at alpha=5 (index 1).
    items.push_back(make_item("i1", {"alpha"}, {{"wrong", 0.9}, {"alpha", 0.8}, {"zzz", 0.1}}));
    // Item 2: right everywhere.
    items.push_back(make_item("i2", {"beta"}, {{"beta", 0.5}, {"beta", 0.6}, {"beta", 0.7}}));
    // Item 3: never right.
    items.push_back(make_item("i3", {"gamma"}, {{"nope", 0.2}, {"nah", 0.3}, {"no", 0.4}}));
    for (auto& item : items) {
        item.baseline_zero = item.sweep.records[0];
        item.baseline_zero->intensity = 0.0;
    }

    MethodSpec fixed;
    fixed.name = "fixed-alpha-5";
    fixed.fixed_alpha_index = 1;
    MethodResult fr = evaluate_method(fixed, items, oracle);
    CHECK(fr.aggregate.n_accurate == 2);  // i1 and i2 right at index 1
    CHECK(fr.items.size() == 3);
    CHECK(fr.items[0].outcome == Outcome::accurate);
    CHECK(fr.items[0].chosen_alpha == 5.0);

    MethodSpec orig;
    orig.name = "original-lm";
    MethodResult ores = evaluate_method(orig, items, oracle);
    CHECK(ores.aggregate.n_accurate == 1);  // only i2 right at alpha=0

    MethodSpec maj;
    maj.name = "majority-vote";
    CHECK(evaluate_method(maj, items, oracle).aggregate.n_accurate == 1);  // i2

    MethodSpec mc;
    mc.name = "max-confidence";
    MethodResult mres = evaluate_method(mc, items, oracle);
    CHECK(mres.items[0].outcome == Outcome::inaccurate);  // picks "wrong" at 0.9
    CHECK(mres.items[1].outcome == Outcome::accurate);

    MethodSpec thr;
    thr.name = "max-confidence-threshold";
    thr.confidence_threshold = 0.6;
    MethodResult tres = evaluate_method(thr, items, oracle);
    CHECK(tres.items[2].outcome == Outcome::refused);  // max conf 0.4 <= 0.6

    MethodSpec refuse;
    refuse.name = "always-refuse";
    MethodResult rres = evaluate_method(refuse, items, oracle);
    CHECK(rres.aggregate.truthfulness == doctest::Approx(1.0));
    CHECK(rres.aggregate.accuracy == 0.0);
    CHECK(rres.aggregate.ta == 0.0);

    MethodSpec unknown;
    unknown.name = "telepathy";
    CHECK_THROWS_AS(evaluate_method(unknown, items, oracle), config_error);

    MethodSpec lito_spec;
    lito_spec.name = "lito";
    CHECK_THROWS_AS(evaluate_method(lito_spec, items, oracle), contract_error);  // no selector

    // original-lm requires the alpha-0 baseline.
    std::vector<EvalItem> no_base = items;
    for (auto& item : no_base) item.baseline_zero.reset();
    CHECK_THROWS_AS(evaluate_method(orig, no_base, oracle), data_error);

    std::vector<MethodResult> per_alpha = evaluate_fixed_alphas(items, oracle);
    REQUIRE(per_alpha.size() == 3);
    CHECK(per_alpha[0].method == "fixed-alpha-0");
    CHECK(per_alpha[1].aggregate.n_accurate == 2);

    CHECK(best_of_k_upper_bound(items, oracle) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("lito method with a hand-built selector") {
    LabelOracle oracle;
    // Selector reads label from agg_hidden[0] sign, as in the selector tests.
    SelectorModel m = SelectorModel::zeros(2, SelectorVariant::mlp);
    m.wx(0, 0) = 5.0;
    m.head_w[0] = 2.0;
    m.head_b = -1.0;

    std::vector<EvalItem> items;
    EvalItem a = make_item("a", {"yes"}, {{"no", 0.9}, {"yes", 0.5}});
    a.sweep.records[0].agg_hidden = {-1.0, 0.0};
    a.sweep.records[1].agg_hidden = {1.0, 0.0};
    EvalItem b = make_item("b", {"yes"}, {{"no", 0.9}, {"no", 0.8}});
    b.sweep.records[0].agg_hidden = {-1.0, 0.0};
    b.sweep.records[1].agg_hidden = {-1.0, 0.0};
    items.push_back(a);
    items.push_back(b);

    MethodSpec spec;
    spec.name = "lito";
    spec.selector = &m;
    MethodResult r = evaluate_method(spec, items, oracle);
    CHECK(r.items[0].outcome == Outcome::accurate);
    CHECK(r.items[0].chosen_alpha == 5.0);
    CHECK(r.items[1].outcome == Outcome::refused);
    CHECK_FALSE(r.items[1].chosen_alpha.has_value());
    CHECK(r.aggregate.truthfulness == doctest::Approx(1.0));
    CHECK(r.aggregate.accuracy == doctest::Approx(0.5));
}

TEST_CASE("sequences_from_items labels steps and honors truncation") {
    LabelOracle oracle;
    std::vector<EvalItem> items;
    items.push_back(make_item("s1", {"alpha"}, {{"wrong", 0.9}, {"alpha", 0.8}, {"zzz", 0.1}}));
    std::vector<SequenceExample> seqs = sequences_from_items(items, oracle);
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].labels == std::vector<int>({0, 1, 0}));
    CHECK(seqs[0].hidden_seq.size() == 3);
    std::vector<SequenceExample> cut = sequences_from_items(items, oracle, 2);
    CHECK(cut[0].labels == std::vector<int>({0, 1}));
    CHECK(cut[0].hidden_seq.size() == 2);
}

TEST_CASE("results CSV formatting uses one-decimal percentages") {
    EvalOutcome o;
    o.n_items = 8;
    o.n_accurate = 5;
    o.n_refused = 1;
    o.n_inaccurate = 2;
    o.truthfulness = 0.75;
    o.accuracy = 0.625;
    o.ta = ta_score(0.75, 0.625);
    std::string header = results_csv_header();
    CHECK(header.find("method") != std::string::npos);
    CHECK(header.find("ta") != std::string::npos);
    std::string row = results_csv_row("lito", "synthetic", "toy", 5, o);
    CHECK(row.find("lito") != std::string::npos);
    CHECK(row.find("75.0") != std::string::npos);
    CHECK(row.find("62.5") != std::string::npos);
    CHECK(row.find("68.5") != std::string::npos);  // sqrt(0.75*0.625) = 68.47%
}

TEST_CASE("relative_transfer_score") {
    CHECK(relative_transfer_score(0.55, 0.5) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(relative_transfer_score(0.45, 0.5) == doctest::Approx(-10.0).epsilon(1e-9));
    CHECK_THROWS_AS(relative_transfer_score(0.5, 0.0), data_error);
}

TEST_CASE("k_sweep_report requires enough items and reports per-fold TA") {
    LabelOracle oracle;
    std::vector<EvalItem> few;
    for (int i = 0; i < 5; ++i) few.push_back(make_item("f" + std::to_string(i), {"x"}, {{"x", 0.5}, {"y", 0.4}}));
    SelectorTrainConfig cfg;
    CHECK_THROWS_AS(k_sweep_report(few, oracle, cfg, {1, 2}), data_error);

    // A learnable dataset: agg_hidden[0] encodes correctness. A quarter of
    // the items are right at the first intensity, half at the second, and the
    // rest never, so longer sweeps genuinely help.
    std::vector<EvalItem> items;
    SeededRng rng(5);
    for (int i = 0; i < 40; ++i) {
        bool right0 = i % 4 == 0;
        bool right1 = i % 2 == 0;
        EvalItem item = make_item(
            "k" + std::to_string(i), {"yes"},
            {{right0 ? "yes" : "no", 0.2 + 0.01 * (i % 7)},
             {right1 ? "yes" : "no", 0.6},
             {"no", 0.3}});
        for (std::size_t r = 0; r < 3; ++r) {
            bool right = (r == 0 && right0) || (r == 1 && right1);
            item.sweep.records[r].agg_hidden = {(right ? 1.0 : -1.0) + 0.1 * rng.normal(), 0.0};
        }
        items.push_back(item);
    }
    SelectorTrainConfig kcfg;
    kcfg.learning_rate = 1.0;
    std::vector<KSweepRow> rows = k_sweep_report(items, oracle, kcfg, {1, 2, 3});
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rows[i].k == i + 1);
        CHECK(rows[i].fold_ta.size() == 5);
        double mean = 0.0;
        for (double f : rows[i].fold_ta) mean += f;
        CHECK(rows[i].mean_ta == doctest::Approx(mean / 5.0).epsilon(1e-12));
    }
    // k=1 sweeps only see the (usually wrong) first intensity; k>=2 can find
    // the planted right answer, so TA must improve.
    CHECK(rows[1].mean_ta > rows[0].mean_ta);
}

TEST_CASE("transfer_eval fills the full train-by-test grid") {
    LabelOracle oracle;
    SeededRng rng(8);
    auto make_ds = [&](const std::string& tag, double flip) {
        std::vector<EvalItem> items;
        for (int i = 0; i < 30; ++i) {
            bool has_right = rng.uniform() > flip;
            EvalItem item = make_item(
                tag + std::to_string(i), {"yes"},
                {{"no", 0.3}, {has_right ? "yes" : "no", 0.6}});
            item.sweep.records[0].agg_hidden = {-1.0 + 0.05 * rng.normal(), 0.0};
            item.sweep.records[1].agg_hidden = {(has_right ? 1.0 : -1.0) + 0.05 * rng.normal(), 0.0};
            items.push_back(item);
        }
        return items;
    };
    std::vector<std::pair<std::string, std::vector<EvalItem>>> datasets;
    datasets.push_back({"d1", make_ds("a", 0.4)});
    datasets.push_back({"d2", make_ds("b", 0.6)});
    SelectorTrainConfig cfg;
    cfg.learning_rate = 5.0;  // 30-item datasets need a hot step to converge in 50 epochs
    std::vector<TransferCell> cells = transfer_eval(datasets, oracle, cfg);
    REQUIRE(cells.size() == 4);
    for (const auto& c : cells) {
        if (c.train_dataset == c.test_dataset) {
            CHECK(c.relative == doctest::Approx(0.0));
        }
        CHECK(c.ta >= 0.0);
        CHECK(c.ta <= 1.0);
    }
}

TEST_CASE("per_item_json carries the method and outcome") {
    PerItemResult r;
    r.prompt_id = "p1";
    r.output = "yes";
    r.outcome = Outcome::accurate;
    r.chosen_alpha = 15.0;
    auto j = per_item_json("lito", r);
    CHECK(j.at("method") == "lito");
    CHECK(j.at("prompt_id") == "p1");
    CHECK(j.at("output") == "yes");
    CHECK(j.at("outcome") == "accurate");
    CHECK(j.at("chosen_alpha") == 15.0);
    PerItemResult refusal;
    refusal.outcome = Outcome::refused;
    auto jr = per_item_json("lito", refusal);
    CHECK(jr.at("outcome") == "refused");
    CHECK_FALSE(jr.contains("chosen_alpha"));
}
