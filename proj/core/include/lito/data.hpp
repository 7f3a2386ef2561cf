#pragma once

#include <string>
#include <vector>

#include "lito/directions.hpp"

namespace lito {

struct QAItem {
    std::string id;
    std::string question;
    std::vector<std::string> references;  // accepted answers, >= 1
    std::string split = "train";          // train | validation | test
};

struct ProbePair {
    std::string question;
    std::string correct_answer;
    std::string incorrect_answer;
};

struct PromptTemplate {
    std::string instruction;
    std::vector<std::pair<std::string, std::string>> shots;  // exactly 5 (question, answer)
    void validate() const;
};

enum class QaFormat { jsonl, csv };

// JSONL: {"id", "question", "references": [...], "split"?} per line.
// CSV fallback: id,question,references with references '|'-separated.
std::vector<QAItem> load_qa(const std::string& path, QaFormat format);
void save_qa_jsonl(const std::vector<QAItem>& items, const std::string& path);

std::vector<ProbePair> load_probe_pairs_jsonl(const std::string& path);
void save_probe_pairs_jsonl(const std::vector<ProbePair>& pairs, const std::string& path);

// Parses a shipped template file: instruction paragraph, blank line, then
// five "Q: ...\nA: ...\n" blocks.
PromptTemplate load_prompt_template(const std::string& path);

// instruction + blank line + 5 shots + "Q: {question}\nA:". Byte-stable.
std::string render_prompt(const PromptTemplate& tmpl, const std::string& question);

// Two labeled prompts per pair: the rendered prompt with the correct answer
// appended (label 1) and with the incorrect answer appended (label 0).
std::vector<LabeledPrompt> build_probe_prompts(const std::vector<ProbePair>& pairs,
                                               const PromptTemplate& tmpl);

}  // namespace lito
