#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "verimap/errors.hpp"

namespace verimap {

using json = nlohmann::json;

// The seven-task taxonomy. Enumerators are declared in byte-wise slug order
// so the enum order is the tie-break order.
enum class TaskLabel : int {
    anatomical_identification = 0,
    causal_explanation,
    differential_diagnosis,
    disease_classification,
    modality_recognition,
    quantitative_measurement,
    spatial_localization,
};

inline constexpr int kNumTasks = 7;

inline const std::array<TaskLabel, kNumTasks>& all_task_labels() {
    static const std::array<TaskLabel, kNumTasks> labels = {
        TaskLabel::anatomical_identification, TaskLabel::causal_explanation,
        TaskLabel::differential_diagnosis,    TaskLabel::disease_classification,
        TaskLabel::modality_recognition,      TaskLabel::quantitative_measurement,
        TaskLabel::spatial_localization,
    };
    return labels;
}

inline const std::string& task_slug(TaskLabel t) {
    static const std::array<std::string, kNumTasks> slugs = {
        "anatomical_identification", "causal_explanation",  "differential_diagnosis",
        "disease_classification",    "modality_recognition", "quantitative_measurement",
        "spatial_localization",
    };
    return slugs[static_cast<int>(t)];
}

namespace detail {

// lowercase, trim, collapse runs of [space - _] into single underscores.
inline std::string normalize_label(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (char ch : raw) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c) || c == '-' || c == '_') {
            if (!out.empty()) pending_sep = true;
            continue;
        }
        if (pending_sep) {
            out.push_back('_');
            pending_sep = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

// Canonical slugs plus the fixed synonym table. Anything else is an error.
inline const std::unordered_map<std::string, TaskLabel>& label_table() {
    static const std::unordered_map<std::string, TaskLabel> table = {
        {"anatomical_identification", TaskLabel::anatomical_identification},
        {"causal_explanation", TaskLabel::causal_explanation},
        {"differential_diagnosis", TaskLabel::differential_diagnosis},
        {"disease_classification", TaskLabel::disease_classification},
        {"modality_recognition", TaskLabel::modality_recognition},
        {"quantitative_measurement", TaskLabel::quantitative_measurement},
        {"spatial_localization", TaskLabel::spatial_localization},
        // synonyms seen in the wild
        {"causal_reasoning", TaskLabel::causal_explanation},
        {"spatial_reasoning", TaskLabel::spatial_localization},
        {"spatial_cognition", TaskLabel::spatial_localization},
    };
    return table;
}

}  // namespace detail

/// Case-insensitive, whitespace-tolerant parse against the canonical slugs
/// and the fixed synonym table. Throws UnknownLabelError on no match.
inline TaskLabel parse_task_label(const std::string& raw) {
    const auto& table = detail::label_table();
    auto it = table.find(detail::normalize_label(raw));
    if (it == table.end()) throw UnknownLabelError(raw);
    return it->second;
}

/// Majority vote over exactly three labels; a full three-way split resolves
/// to the byte-wise smallest slug.
inline TaskLabel majority_vote(const std::vector<TaskLabel>& votes) {
    if (votes.size() != 3) throw ArityError(votes.size());
    if (votes[0] == votes[1] || votes[0] == votes[2]) return votes[0];
    if (votes[1] == votes[2]) return votes[1];
    return std::min({votes[0], votes[1], votes[2]});
}

// One audit item: houses the image/question/reference tuple plus its task.
// task is empty until the labeling pipeline has run.
struct QueryExample {
    std::string id;
    std::string image_ref;
    std::string question;
    std::string reference_answer;
    std::optional<TaskLabel> task;
    std::string dataset_id;
};

struct LabelVote {
    std::string example_id;
    std::string annotator_id;
    std::string raw_label;
    std::optional<TaskLabel> parsed;  // empty on parse failure
};

struct CorpusLoadOptions {
    // When set, image_ref must resolve to a readable file at load time.
    // Off by default so metadata-only corpora remain loadable; backends that
    // actually need the image still fail at call time.
    bool require_image_files = false;
};

inline std::vector<QueryExample> load_corpus(const std::string& path,
                                             const CorpusLoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotReadable", path);

    std::vector<QueryExample> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw SchemaError(line_no, "not a JSON object");

        auto need_string = [&](const char* key) -> std::string {
            if (!j.contains(key) || !j[key].is_string())
                throw SchemaError(line_no, std::string("missing or non-string field \"") + key + "\"");
            return j[key].get<std::string>();
        };

        QueryExample ex;
        ex.id = need_string("id");
        ex.image_ref = need_string("image");
        ex.question = need_string("question");
        ex.reference_answer = need_string("reference_answer");
        ex.dataset_id = need_string("dataset");
        if (ex.question.empty()) throw SchemaError(line_no, "empty question");
        if (ex.reference_answer.empty()) throw SchemaError(line_no, "empty reference_answer");
        if (!j.contains("task")) throw SchemaError(line_no, "missing field \"task\"");
        if (!j["task"].is_null()) {
            if (!j["task"].is_string()) throw SchemaError(line_no, "task must be string or null");
            try {
                ex.task = parse_task_label(j["task"].get<std::string>());
            } catch (const UnknownLabelError&) {
                throw SchemaError(line_no, "unknown task label \"" + j["task"].get<std::string>() + "\"");
            }
        }
        if (!seen_ids.insert(ex.id).second) throw DuplicateIdError(ex.id);
        if (opts.require_image_files && !std::filesystem::exists(ex.image_ref))
            throw SchemaError(line_no, "image file not readable: " + ex.image_ref);
        out.push_back(std::move(ex));
    }
    return out;
}

inline json example_to_json(const QueryExample& ex) {
    json j{{"id", ex.id},
           {"image", ex.image_ref},
           {"question", ex.question},
           {"reference_answer", ex.reference_answer},
           {"dataset", ex.dataset_id}};
    if (ex.task) j["task"] = task_slug(*ex.task);
    else j["task"] = nullptr;
    return j;
}

inline void save_corpus(const std::string& path, const std::vector<QueryExample>& examples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("FileNotWritable", path);
    for (const auto& ex : examples) out << example_to_json(ex).dump() << "\n";
}

}  // namespace verimap
