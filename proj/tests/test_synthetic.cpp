#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "lito/errors.hpp"
#include "lito/synthetic.hpp"

using namespace lito;

namespace {

// Generation trains the underlying model, which dominates the runtime, so
// every test case shares one benchmark.
const SyntheticBenchmark& bench() {
    static SyntheticBenchmark b = [] {
        SyntheticGenConfig cfg;
        cfg.n_items = 80;
        return generate_synthetic_benchmark(cfg);
    }();
    return b;
}

const DirectionSet& directions() {
    static DirectionSet ds = synthetic_pipeline_directions(bench());
    return ds;
}

}  // namespace

TEST_CASE("prompt form and expected text helpers") {
    CHECK(synthetic_prompt("code a?") == "Q: code a?\nA:");
    CHECK(kSyntheticStopToken == '\n');
    // Region 3 inside window [2, 4]: correct byte 'A' + 2.
    CHECK(synthetic_expected_text({2, 4}, 3) == "C");
    // Region outside the window: disjoint wrong byte.
    std::string outside = synthetic_expected_text({2, 4}, 0);
    CHECK(outside.size() == 1);
    CHECK(outside[0] >= 'S');
    CHECK(outside[0] <= 'Y');
    // Unanswerable windows never produce a correct byte.
    std::string un = synthetic_expected_text({2, 1}, 2);
    CHECK(un[0] >= 'S');
    CHECK(un[0] <= 'Y');
}

TEST_CASE("benchmark structure is consistent") {
    const SyntheticBenchmark& b = bench();
    CHECK(b.items.size() == 80);
    CHECK(b.windows.size() == b.items.size());
    CHECK(b.grid.values == Vector({5, 10, 15, 20, 25}));
    CHECK(b.grid_ext.values == Vector({5, 10, 15, 20, 25, 30}));
    CHECK(b.weights.config == b.config);
    CHECK(b.weights.all_finite());
    CHECK(b.top_k == 1);

    std::set<std::string> ids;
    std::size_t unanswerable = 0;
    std::size_t train = 0;
    for (std::size_t i = 0; i < b.items.size(); ++i) {
        const QAItem& item = b.items[i];
        CHECK(ids.insert(item.id).second);
        CHECK(item.question.rfind("code ", 0) == 0);
        REQUIRE(item.references.size() >= 1);
        auto [lo, hi] = b.windows[i];
        if (lo > hi) {
            ++unanswerable;
            CHECK(item.references == std::vector<std::string>({"no known answer"}));
        } else {
            CHECK(lo >= 1);
            CHECK(hi <= 5 + 1);
            // The references are exactly the correct bytes for grid regions
            // inside the window.
            std::set<std::string> refs(item.references.begin(), item.references.end());
            for (int r = lo; r <= hi && r <= 5; ++r) {
                CHECK(refs.count(synthetic_expected_text({lo, hi}, r)) == 1);
            }
        }
        if (item.split == "train") ++train;
        else CHECK(item.split == "test");
    }
    // Roughly 10% unanswerable, 60/40 split.
    CHECK(unanswerable >= 4);
    CHECK(unanswerable <= 16);
    CHECK(train > 35);
    CHECK(train < 60);
    CHECK_FALSE(b.probe_pairs.empty());
}

TEST_CASE("pipeline directions replay is stable and verification is perfect") {
    const DirectionSet& ds = directions();
    CHECK(ds.mode == DirectionMode::head_level);
    REQUIRE(ds.entries.size() == 1);
    CHECK(norm(ds.entries[0].direction) == doctest::Approx(1.0).epsilon(1e-9));

    // The released benchmark reproduces every planted cell.
    CHECK(verify_benchmark(bench(), ds) == 1.0);

    // Rerunning the probe pipeline gives the identical direction.
    DirectionSet again = synthetic_pipeline_directions(bench());
    REQUIRE(again.entries.size() == 1);
    CHECK(again.entries[0].address == ds.entries[0].address);
    CHECK(again.entries[0].direction == ds.entries[0].direction);
}

TEST_CASE("probe pairs are answerable-question counterfactuals") {
    for (const ProbePair& p : bench().probe_pairs) {
        CHECK(p.question.rfind("code ", 0) == 0);
        CHECK(p.correct_answer.size() == 1);
        CHECK(p.incorrect_answer.size() == 1);
        CHECK(p.correct_answer != p.incorrect_answer);
    }
    std::vector<LabeledPrompt> prompts = probe_prompts_bare(bench().probe_pairs);
    CHECK(prompts.size() == 2 * bench().probe_pairs.size());
    CHECK(prompts[0].second == 1);
    CHECK(prompts[1].second == 0);
    CHECK(prompts[0].first.rfind("Q: ", 0) == 0);
}

TEST_CASE("generation config is validated") {
    SyntheticGenConfig bad;
    bad.n_items = 0;
    CHECK_THROWS_AS(generate_synthetic_benchmark(bad), config_error);
    SyntheticGenConfig bad_frac;
    bad_frac.unanswerable_fraction = 1.5;
    CHECK_THROWS_AS(generate_synthetic_benchmark(bad_frac), config_error);
}
