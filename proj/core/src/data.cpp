#include "lito/data.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lito/io_util.hpp"

namespace lito {

void PromptTemplate::validate() const {
    if (instruction.empty()) {
        throw data_error("PromptTemplate: instruction must be nonempty");
    }
    if (shots.size() != 5) {
        throw data_error("PromptTemplate: exactly 5 in-context shots required");
    }
}

namespace {

QAItem qa_from_json(const nlohmann::ordered_json& j, std::size_t line_no) {
    QAItem item;
    try {
        item.id = j.at("id").get<std::string>();
        item.question = j.at("question").get<std::string>();
        item.references = j.at("references").get<std::vector<std::string>>();
        if (j.contains("split")) item.split = j.at("split").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw data_error("load_qa: line " + std::to_string(line_no) + ": " + e.what());
    }
    if (item.question.empty()) {
        throw data_error("load_qa: line " + std::to_string(line_no) + ": empty question");
    }
    if (item.references.empty()) {
        throw data_error("load_qa: line " + std::to_string(line_no) + ": empty references");
    }
    if (item.split != "train" && item.split != "validation" && item.split != "test") {
        throw data_error("load_qa: line " + std::to_string(line_no) + ": unknown split '" +
                         item.split + "'");
    }
    return item;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<QAItem> load_qa(const std::string& path, QaFormat format) {
    std::ifstream is(path);
    if (!is) throw data_error("load_qa: cannot open " + path);
    std::vector<QAItem> items;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    bool csv_header_skipped = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        QAItem item;
        if (format == QaFormat::jsonl) {
            nlohmann::ordered_json j;
            try {
                j = nlohmann::ordered_json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw data_error("load_qa: parse error at line " + std::to_string(line_no) +
                                 ": " + e.what());
            }
            item = qa_from_json(j, line_no);
        } else {
            if (!csv_header_skipped && line.rfind("id,", 0) == 0) {
                csv_header_skipped = true;
                continue;
            }
            auto fields = split_on(line, ',');
            if (fields.size() < 3) {
                throw data_error("load_qa: line " + std::to_string(line_no) +
                                 ": expected id,question,references");
            }
            item.id = fields[0];
            item.question = fields[1];
            item.references = split_on(fields[2], '|');
            if (item.question.empty() || item.references.empty() ||
                item.references[0].empty()) {
                throw data_error("load_qa: line " + std::to_string(line_no) +
                                 ": empty question or references");
            }
        }
        if (!ids.insert(item.id).second) {
            throw data_error("load_qa: duplicate id '" + item.id + "' at line " +
                             std::to_string(line_no));
        }
        items.push_back(std::move(item));
    }
    return items;
}

void save_qa_jsonl(const std::vector<QAItem>& items, const std::string& path) {
    std::ostringstream ss;
    for (const auto& item : items) {
        nlohmann::ordered_json j;
        j["id"] = item.id;
        j["question"] = item.question;
        j["references"] = item.references;
        j["split"] = item.split;
        ss << j.dump() << "\n";
    }
    atomic_write_text(path, ss.str());
}

std::vector<ProbePair> load_probe_pairs_jsonl(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("load_probe_pairs_jsonl: cannot open " + path);
    std::vector<ProbePair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::ordered_json::parse(line);
            ProbePair p;
            p.question = j.at("question").get<std::string>();
            p.correct_answer = j.at("correct_answer").get<std::string>();
            p.incorrect_answer = j.at("incorrect_answer").get<std::string>();
            if (p.correct_answer.empty() || p.incorrect_answer.empty() ||
                p.correct_answer == p.incorrect_answer) {
                throw data_error("answers must be nonempty and distinct");
            }
            pairs.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw data_error("load_probe_pairs_jsonl: parse error at line " +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return pairs;
}

void save_probe_pairs_jsonl(const std::vector<ProbePair>& pairs, const std::string& path) {
    std::ostringstream ss;
    for (const auto& p : pairs) {
        nlohmann::ordered_json j;
        j["question"] = p.question;
        j["correct_answer"] = p.correct_answer;
        j["incorrect_answer"] = p.incorrect_answer;
        ss << j.dump() << "\n";
    }
    atomic_write_text(path, ss.str());
}

PromptTemplate load_prompt_template(const std::string& path) {
    const std::string text = read_text_file(path);
    PromptTemplate tmpl;
    std::istringstream is(text);
    std::string line;
    // Instruction: everything up to the first blank line, newline-joined.
    while (std::getline(is, line)) {
        if (line.empty()) break;
        if (!tmpl.instruction.empty()) tmpl.instruction += "\n";
        tmpl.instruction += line;
    }
    std::string q, a;
    auto flush_shot = [&]() {
        if (!q.empty() && !a.empty()) tmpl.shots.emplace_back(q, a);
        q.clear();
        a.clear();
    };
    while (std::getline(is, line)) {
        if (line.rfind("Q: ", 0) == 0) {
            flush_shot();
            q = line.substr(3);
        } else if (line.rfind("A: ", 0) == 0) {
            a = line.substr(3);
        } else if (line.empty()) {
            flush_shot();
        } else if (!a.empty()) {
            a += "\n" + line;  // multi-line answer continuation
        } else if (!q.empty()) {
            q += "\n" + line;
        }
    }
    flush_shot();
    tmpl.validate();
    return tmpl;
}

std::string render_prompt(const PromptTemplate& tmpl, const std::string& question) {
    tmpl.validate();
    if (question.empty()) {
        throw data_error("render_prompt: question must be nonempty");
    }
    std::string out = tmpl.instruction;
    out += "\n\n";
    for (const auto& [q, a] : tmpl.shots) {
        out += "Q: " + q + "\nA: " + a + "\n\n";
    }
    out += "Q: " + question + "\nA:";
    return out;
}

std::vector<LabeledPrompt> build_probe_prompts(const std::vector<ProbePair>& pairs,
                                               const PromptTemplate& tmpl) {
    if (pairs.empty()) {
        throw contract_error("build_probe_prompts: empty input");
    }
    std::vector<LabeledPrompt> out;
    out.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
        const std::string base = render_prompt(tmpl, p.question);
        out.emplace_back(base + " " + p.correct_answer, 1);
        out.emplace_back(base + " " + p.incorrect_answer, 0);
    }
    return out;
}

}  // namespace lito
