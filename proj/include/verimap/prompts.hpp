#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "verimap/errors.hpp"

namespace verimap {

enum class AgentRole { Generator, Verifier, Judge, Labeler };

inline const std::string& role_name(AgentRole r) {
    static const std::string names[] = {"generator", "verifier", "judge", "labeler"};
    return names[static_cast<int>(r)];
}

// Three-way verifier verdict. parse_clean is false whenever the verdict had
// to be recovered from output that does not follow the requested format.
struct Verdict {
    enum class Label { CORRECT, INCORRECT, UNCERTAIN };
    Label label = Label::UNCERTAIN;
    std::optional<double> confidence;
    std::string explanation;
    bool parse_clean = true;
};

inline const std::string& verdict_name(Verdict::Label l) {
    static const std::string names[] = {"CORRECT", "INCORRECT", "UNCERTAIN"};
    return names[static_cast<int>(l)];
}

namespace prompts {

inline constexpr const char* kGenerator =
    "You are a medical imaging expert. Look at the image carefully and answer the following question concisely.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Answer:";

inline constexpr const char* kVerifier =
    "You are a medical imaging verification expert. Determine whether the proposed answer to the medical imaging question is CORRECT, INCORRECT, or UNCERTAIN.\n"
    "\n"
    "Question: {question}\n"
    "Proposed Answer: {answer}\n"
    "\n"
    "Respond in the following format:\n"
    "Verdict: [CORRECT or INCORRECT or UNCERTAIN]\n"
    "Confidence: [0.0 to 1.0]\n"
    "Explanation: [brief justification]";

inline constexpr const char* kFeedback =
    "You are a medical imaging expert. You previously answered a medical imaging question, but a verifier assessed your answer as {verdict}.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Your previous answer: {prev_answer}\n"
    "Verifier's explanation: {explanation}\n"
    "\n"
    "Please look at the image again carefully, reconsider, and provide a corrected answer.\n"
    "\n"
    "Answer:";

inline constexpr const char* kJudge =
    "You are evaluating medical visual question answering outputs. Given the question, the reference answer, and the model answer, decide whether the model answer should be counted as correct.\n"
    "\n"
    "Rules:\n"
    "Return CORRECT only if the model answer semantically matches the reference answer.\n"
    "Be strict for yes/no questions.\n"
    "Accept clear synonyms or equivalent medical phrasing.\n"
    "No partial credit.\n"
    "Return only CORRECT or INCORRECT.\n"
    "\n"
    "Question: {question}\n"
    "Reference Answer: {reference_answer}\n"
    "Model Answer: {model_answer}";

inline constexpr const char* kLabeler =
    "You are classifying medical visual question answering items into task categories. Choose exactly one category for the question below.\n"
    "\n"
    "Categories:\n"
    "modality_recognition: the imaging modality or acquisition type\n"
    "anatomical_identification: the depicted organ, structure, or anatomical region\n"
    "disease_classification: the presence of a pathology, finding, or diagnostic category\n"
    "spatial_localization: location, orientation, laterality, or relative position\n"
    "quantitative_measurement: counting, size estimation, or other numeric judgment\n"
    "differential_diagnosis: distinguishing among multiple plausible conditions\n"
    "causal_explanation: connecting imaging evidence to a mechanism, cause, or clinical implication\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Respond with only the category name.";

}  // namespace prompts

inline const std::string& prompt_template(const std::string& template_id) {
    static const std::map<std::string, std::string> templates = {
        {"generator", prompts::kGenerator}, {"verifier", prompts::kVerifier},
        {"feedback", prompts::kFeedback},   {"judge", prompts::kJudge},
        {"labeler", prompts::kLabeler},
    };
    auto it = templates.find(template_id);
    if (it == templates.end()) throw Error("UnknownTemplate", template_id);
    return it->second;
}

namespace detail {

inline std::string to_upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

/// Substitutes {slot} placeholders. Rendering is byte-exact slot substitution
/// with one documented transform: the feedback template upper-cases the
/// verdict slot, matching how that prompt addresses the generator.
inline std::string render_prompt(AgentRole role, const std::string& template_id,
                                 const std::map<std::string, std::string>& slots) {
    (void)role;
    const std::string& tmpl = prompt_template(template_id);
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t close = tmpl.find('}', i);
            if (close == std::string::npos) {
                out.push_back(tmpl[i++]);
                continue;
            }
            std::string name = tmpl.substr(i + 1, close - i - 1);
            auto it = slots.find(name);
            if (it == slots.end()) throw MissingSlotError(name);
            if (template_id == "feedback" && name == "verdict")
                out += detail::to_upper(it->second);
            else
                out += it->second;
            i = close + 1;
        } else {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

namespace detail {

// Strips surrounding [ ] plus whitespace and trailing ./, noise, to fixpoint.
inline std::string strip_brackets(std::string s) {
    for (;;) {
        std::string before = s;
        s = trim(s);
        while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
        if (!s.empty() && s.front() == '[') s.erase(s.begin());
        if (!s.empty() && s.back() == ']') s.pop_back();
        if (s == before) return s;
    }
}

inline std::optional<std::string> after_marker(const std::string& line, const char* marker) {
    std::string lower = to_lower(line);
    std::size_t pos = lower.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    return line.substr(pos + std::string(marker).size());
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

}  // namespace detail

/// Total parser for verifier output. Never throws; unparseable output comes
/// back as UNCERTAIN with parse_clean=false and the raw text as explanation.
inline Verdict parse_verdict(const std::string& raw) {
    Verdict v;
    bool verdict_seen = false, confidence_seen = false, explanation_seen = false;
    bool confidence_dirty = false;

    for (const std::string& line : detail::split_lines(raw)) {
        if (!verdict_seen) {
            if (auto rest = detail::after_marker(line, "verdict:")) {
                std::string token = detail::to_upper(detail::strip_brackets(*rest));
                if (token == "CORRECT") {
                    v.label = Verdict::Label::CORRECT;
                    verdict_seen = true;
                } else if (token == "INCORRECT") {
                    v.label = Verdict::Label::INCORRECT;
                    verdict_seen = true;
                } else if (token == "UNCERTAIN") {
                    v.label = Verdict::Label::UNCERTAIN;
                    verdict_seen = true;
                }
                if (verdict_seen) continue;
            }
        }
        if (!confidence_seen) {
            if (auto rest = detail::after_marker(line, "confidence:")) {
                std::string token = detail::strip_brackets(*rest);
                char* end = nullptr;
                double val = std::strtod(token.c_str(), &end);
                if (end != token.c_str() && token.size() > 0) {
                    if (val < 0.0 || val > 1.0) {
                        val = std::clamp(val, 0.0, 1.0);
                        confidence_dirty = true;
                    }
                    v.confidence = val;
                } else if (!token.empty()) {
                    confidence_dirty = true;
                }
                confidence_seen = true;
                continue;
            }
        }
        if (!explanation_seen) {
            if (auto rest = detail::after_marker(line, "explanation:")) {
                v.explanation = detail::trim(detail::strip_brackets(*rest));
                explanation_seen = true;
            }
        }
    }

    if (!verdict_seen) {
        v.label = Verdict::Label::UNCERTAIN;
        v.parse_clean = false;
        if (!explanation_seen) v.explanation = raw;
    } else {
        v.parse_clean = !confidence_dirty;
    }
    return v;
}

/// Oracle-judge output parser: 1 iff the first CORRECT/INCORRECT token is
/// CORRECT. Whole-token match, so the CORRECT inside INCORRECT cannot hit.
inline int parse_judge(const std::string& raw) {
    std::string token;
    auto flush = [&]() -> std::optional<int> {
        if (token.empty()) return std::nullopt;
        std::string t = detail::to_lower(token);
        token.clear();
        if (t == "correct") return 1;
        if (t == "incorrect") return 0;
        return std::nullopt;
    };
    for (char c : raw) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            token.push_back(c);
        } else {
            if (auto r = flush()) return *r;
        }
    }
    if (auto r = flush()) return *r;
    throw JudgeParseError(raw);
}

}  // namespace verimap
