#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lito/selector.hpp"
#include "lito/sweep.hpp"

namespace lito {

enum class Outcome { accurate, inaccurate, refused };

// Lowercase, trim, collapse internal whitespace, strip terminal punctuation.
std::string normalize_answer(const std::string& s);

// Period- and case-insensitive refusal check.
bool is_refusal(const std::string& s);

struct LabelOracle {
    enum class Kind { exact_match, alias_match };
    Kind kind = Kind::exact_match;
    // canonical (normalized) answer -> additional accepted strings
    std::map<std::string, std::vector<std::string>> aliases;
};

Outcome label(const LabelOracle& oracle, const std::string& response_text,
              const std::vector<std::string>& references);

struct EvalOutcome {
    std::size_t n_items = 0;
    std::size_t n_accurate = 0;
    std::size_t n_inaccurate = 0;
    std::size_t n_refused = 0;
    double truthfulness = 0.0;  // (accurate + refused) / items
    double accuracy = 0.0;      // accurate / items
    double ta = 0.0;            // sqrt(truthfulness * accuracy)
};

double ta_score(double truthfulness, double accuracy);

// Most repeated normalized answer; ties resolved by the tied group containing
// the highest-confidence record, returning that record's original text.
std::string majority_vote(const SweepResult& sweep);

std::string max_confidence(const SweepResult& sweep);

// Returns the refusal string unless the maximum confidence is strictly > T.
std::string max_confidence_threshold(const SweepResult& sweep, double T = 0.6);

// Dataset-level oracle over per-intensity evaluations: index of the maximum
// TA (ties -> lowest intensity index).
std::size_t oracle_best_of_k(const std::vector<EvalOutcome>& per_alpha);

// One benchmark item ready for evaluation: the k-record sweep, the references,
// and optionally a separate unintervened (alpha = 0) generation.
struct EvalItem {
    std::string prompt_id;
    std::vector<std::string> references;
    SweepResult sweep;
    std::optional<ResponseRecord> baseline_zero;
};

struct PerItemResult {
    std::string prompt_id;
    std::string output;
    Outcome outcome = Outcome::inaccurate;
    std::optional<double> chosen_alpha;
};

struct MethodResult {
    std::string method;
    EvalOutcome aggregate;
    std::vector<PerItemResult> items;
};

// A method maps one item's sweep to an output string (plus the chosen alpha,
// when meaningful). Built-in names:
//   original-lm, fixed-alpha-<a>, majority-vote, max-confidence,
//   max-confidence-threshold, lito, always-refuse
struct MethodSpec {
    std::string name;
    const SelectorModel* selector = nullptr;  // lito only
    double selector_threshold = 0.5;
    double confidence_threshold = 0.6;        // max-confidence-threshold only
    std::optional<std::size_t> fixed_alpha_index;
};

MethodResult evaluate_method(const MethodSpec& method, const std::vector<EvalItem>& items,
                             const LabelOracle& oracle);

// Per-intensity fixed-alpha evaluations for every schedule slot, in order.
std::vector<MethodResult> evaluate_fixed_alphas(const std::vector<EvalItem>& items,
                                                const LabelOracle& oracle);

EvalOutcome aggregate_outcomes(const std::vector<Outcome>& outcomes);

// Fraction of items with at least one accurate record in the sweep: the
// per-item upper bound no aggregation method can exceed.
double best_of_k_upper_bound(const std::vector<EvalItem>& items, const LabelOracle& oracle);

struct KSweepRow {
    std::size_t k = 0;
    double mean_ta = 0.0;
    std::vector<double> fold_ta;
};

// Retrains the selector on length-k truncated sequences with 5-fold
// cross-validation and reports the mean TA per k.
std::vector<KSweepRow> k_sweep_report(const std::vector<EvalItem>& items,
                                      const LabelOracle& oracle,
                                      const SelectorTrainConfig& cfg,
                                      const std::vector<std::size_t>& k_values);

double relative_transfer_score(double ood, double id);

struct TransferCell {
    std::string train_dataset;
    std::string test_dataset;
    double ta = 0.0;
    double relative = 0.0;  // 100 * (ood - id) / id
};

// Cross-evaluation over dataset pairs: train the selector on each X, evaluate
// TA on each Y, and report relative scores against the in-domain diagonal.
std::vector<TransferCell> transfer_eval(
    const std::vector<std::pair<std::string, std::vector<EvalItem>>>& datasets,
    const LabelOracle& oracle, const SelectorTrainConfig& cfg);

// Results CSV row formatting: percentages with one decimal.
std::string results_csv_header();
std::string results_csv_row(const std::string& method, const std::string& dataset,
                            const std::string& model, std::size_t k, const EvalOutcome& o);

nlohmann::ordered_json per_item_json(const std::string& method, const PerItemResult& r);

// Selector training data from labeled sweeps: step label 1 iff the record is
// labeled accurate.
std::vector<SequenceExample> sequences_from_items(const std::vector<EvalItem>& items,
                                                  const LabelOracle& oracle,
                                                  std::size_t truncate_k = 0);

}  // namespace lito
