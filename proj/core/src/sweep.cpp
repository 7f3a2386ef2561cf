#include "lito/sweep.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lito/io_util.hpp"

namespace lito {

void IntensitySchedule::validate() const {
    if (values.empty()) {
        throw contract_error("IntensitySchedule: must be nonempty");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0)) {
            throw contract_error("IntensitySchedule: intensities must be >= 0");
        }
        if (i > 0 && !(values[i] > values[i - 1])) {
            throw contract_error("IntensitySchedule: values must be strictly increasing");
        }
    }
}

double confidence(const Vector& per_token_prob) {
    if (per_token_prob.empty()) return 0.0;
    double log_sum = 0.0;
    for (double p : per_token_prob) {
        if (!(p > 0.0) || p > 1.0) {
            throw contract_error("confidence: probabilities must lie in (0, 1]");
        }
        log_sum += std::log(p);
    }
    return std::exp(log_sum / static_cast<double>(per_token_prob.size()));
}

Vector aggregate_hidden(const GenerationTrace& trace) {
    const std::size_t d = trace.last_hidden.cols();
    Vector out(d, 0.0);
    const std::size_t n = trace.n_generated();
    if (n == 0) return out;
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t c = 0; c < d; ++c) out[c] += trace.last_hidden(t, c);
    }
    for (double& x : out) x /= static_cast<double>(n);
    return out;
}

namespace {

std::string trim_whitespace(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ResponseRecord response_from_trace(const GenerationTrace& trace, double intensity) {
    ResponseRecord rec;
    rec.intensity = intensity;
    rec.token_count = trace.n_generated();
    rec.text = trim_whitespace(decode_bytes(trace.generated_token_ids));
    rec.agg_hidden = aggregate_hidden(trace);
    rec.confidence = confidence(trace.per_token_prob);
    return rec;
}

SweepResult run_sweep(const ModelWeights& w, const DirectionSet& directions,
                      const IntensitySchedule& schedule, const std::string& prompt_id,
                      const std::string& prompt, std::size_t max_new_tokens, int stop_token) {
    schedule.validate();
    SweepResult result;
    result.prompt_id = prompt_id;
    result.prompt = prompt;
    const std::vector<int> prompt_tokens = encode_bytes(prompt);
    for (double alpha : schedule.values) {
        GenerationTrace trace =
            generate(w, prompt_tokens, directions.at_intensity(alpha), max_new_tokens, stop_token);
        result.records.push_back(response_from_trace(trace, alpha));
    }
    return result;
}

nlohmann::ordered_json sweep_to_json(const SweepResult& s) {
    nlohmann::ordered_json j;
    j["prompt_id"] = s.prompt_id;
    j["prompt"] = s.prompt;
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : s.records) {
        nlohmann::ordered_json jr;
        jr["alpha"] = r.intensity;
        jr["text"] = r.text;
        jr["n_tokens"] = r.token_count;
        jr["confidence"] = r.confidence;
        jr["agg_hidden"] = r.agg_hidden;
        j["records"].push_back(jr);
    }
    return j;
}

SweepResult sweep_from_json(const nlohmann::ordered_json& j) {
    SweepResult s;
    s.prompt_id = j.at("prompt_id").get<std::string>();
    s.prompt = j.at("prompt").get<std::string>();
    for (const auto& jr : j.at("records")) {
        ResponseRecord r;
        r.intensity = jr.at("alpha").get<double>();
        r.text = jr.at("text").get<std::string>();
        r.token_count = jr.at("n_tokens").get<std::size_t>();
        r.confidence = jr.at("confidence").get<double>();
        r.agg_hidden = jr.at("agg_hidden").get<Vector>();
        s.records.push_back(std::move(r));
    }
    return s;
}

void save_sweeps_jsonl(const std::vector<SweepResult>& sweeps, const std::string& path) {
    std::ostringstream ss;
    for (const auto& s : sweeps) {
        ss << sweep_to_json(s).dump() << "\n";
    }
    atomic_write_text(path, ss.str());
}

std::vector<SweepResult> load_sweeps_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("load_sweeps_jsonl: cannot open " + path);
    std::vector<SweepResult> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(sweep_from_json(nlohmann::ordered_json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw data_error("load_sweeps_jsonl: parse error at line " +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace lito
