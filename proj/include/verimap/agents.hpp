#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "verimap/corpus.hpp"
#include "verimap/digest.hpp"
#include "verimap/errors.hpp"
#include "verimap/prompts.hpp"
#include "verimap/rng.hpp"

namespace verimap {

// Deterministic stand-in for a model backend. Behavior is a pure function of
// (seed, example id, turn, role), so outputs are reproducible under any call
// order or parallelism.
struct SyntheticSpec {
    std::uint64_t seed = 0;

    // Generator: per-task probability of emitting the reference answer.
    double default_accuracy = 0.5;
    std::map<std::string, double> task_accuracy;  // keyed by task slug

    // Verifier conditional error rates.
    double verifier_fpr = 0.5;  // P(verdict CORRECT   | answer wrong)
    double verifier_fnr = 0.0;  // P(verdict INCORRECT | answer right)
    // Added to the log-odds of acceptance when the answer under verification
    // is wrong; gives exact control of the verifier-error odds ratio.
    double coupling_shift = 0.0;
    double uncertain_prob = 0.0;  // P(verdict UNCERTAIN), drawn first

    // Scripted generator: when set, the generator is correct iff turn >= value
    // and task_accuracy is ignored.
    std::optional<int> correct_from_turn;

    // Labeler behavior: "unanimous" hashes the example id to one label (all
    // labelers agree), "split" offsets that hash by label_offset (distinct
    // offsets force a three-way split), "echo" returns the example's task.
    std::string label_mode = "unanimous";
    int label_offset = 0;

    double generator_accuracy(const std::optional<TaskLabel>& task) const {
        if (!task) return default_accuracy;
        auto it = task_accuracy.find(task_slug(*task));
        return it == task_accuracy.end() ? default_accuracy : it->second;
    }
};

struct BackendConfig {
    std::string backend_id;
    std::string kind = "synthetic";  // "http_chat" | "synthetic"
    std::string endpoint;            // http_chat: base URL, e.g. http://host:port
    std::string model_name;
    std::string api_key_env;
    double request_timeout_s = 60.0;
    int max_retries = 3;
    int retry_backoff_ms = 250;
    double temperature = 0.0;
    int max_tokens = 512;
    SyntheticSpec synthetic;
};

struct GeneratedAnswer {
    std::string example_id;
    std::string backend_id;
    int turn = 0;
    std::string answer_text;
};

// Per-call context the pipeline supplies. HTTP backends use only the image;
// synthetic backends key their deterministic draws off it.
struct CallContext {
    std::string example_id;
    int turn = 0;
    std::optional<TaskLabel> task;
    std::string reference_answer;
    // Oracle correctness of the answer under verification; required by
    // synthetic verifiers, ignored elsewhere.
    std::optional<bool> answer_correct;
};

// ---------------------------------------------------------------------------
// Response cache: one file per key under cache_dir, filename = key digest,
// payload = raw response bytes, plus a JSON sidecar with provenance and the
// payload digest used for corruption checks. Stores are idempotent and
// crash-safe (write-to-temp then rename).
// ---------------------------------------------------------------------------
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    static std::string make_key(const std::string& backend_id, AgentRole role,
                                const std::string& prompt, const std::string& image_digest) {
        std::string material = backend_id;
        material.push_back('\x1f');
        material += role_name(role);
        material.push_back('\x1f');
        material += prompt;
        material.push_back('\x1f');
        material += image_digest;
        return sha256_hex(material);
    }

    std::optional<std::string> lookup(const std::string& key) const {
        auto payload_path = dir_ / key;
        if (!std::filesystem::exists(payload_path)) return std::nullopt;
        std::string payload = read_file_bytes(payload_path.string());
        auto sidecar_path = dir_ / (key + ".json");
        if (std::filesystem::exists(sidecar_path)) {
            json sidecar = json::parse(read_file_bytes(sidecar_path.string()), nullptr, false);
            if (sidecar.is_object() && sidecar.contains("payload_sha256") &&
                sidecar["payload_sha256"].get<std::string>() != sha256_hex(payload)) {
                throw CacheCorruptionError(key);
            }
        }
        return payload;
    }

    void store(const std::string& key, const std::string& payload,
               const std::string& backend_id) const {
        auto payload_path = dir_ / key;
        if (std::filesystem::exists(payload_path)) return;  // idempotent
        auto tmp = dir_ / (key + ".tmp." + std::to_string(
                               std::hash<std::thread::id>{}(std::this_thread::get_id())));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << payload;
        }
        std::filesystem::rename(tmp, payload_path);

        json sidecar{{"backend_id", backend_id},
                     {"payload_sha256", sha256_hex(payload)},
                     {"stored_at", std::chrono::duration_cast<std::chrono::seconds>(
                                       std::chrono::system_clock::now().time_since_epoch())
                                       .count()}};
        auto sidecar_tmp = dir_ / (key + ".json.tmp." + std::to_string(
                                       std::hash<std::thread::id>{}(std::this_thread::get_id())));
        {
            std::ofstream out(sidecar_tmp, std::ios::binary | std::ios::trunc);
            out << sidecar.dump();
        }
        std::filesystem::rename(sidecar_tmp, dir_ / (key + ".json"));
    }

private:
    std::filesystem::path dir_;
};

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double shifted_prob(double base, double shift) {
    if (base <= 0.0) return 0.0;
    if (base >= 1.0) return 1.0;
    if (shift == 0.0) return base;
    return sigmoid(std::log(base / (1.0 - base)) + shift);
}

// One uniform draw keyed by (seed, example id, turn, stream tag); independent
// of call order.
inline double keyed_uniform(const SyntheticSpec& spec, const CallContext& ctx,
                            const char* stream) {
    std::uint64_t h = splitmix64(spec.seed);
    h = stable_hash(ctx.example_id, h);
    h = splitmix64(h ^ static_cast<std::uint64_t>(ctx.turn + 1));
    h = stable_hash(stream, h);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::string keyed_token(const SyntheticSpec& spec, const CallContext& ctx,
                               const char* stream) {
    std::uint64_t h = splitmix64(spec.seed);
    h = stable_hash(ctx.example_id, h);
    h = splitmix64(h ^ static_cast<std::uint64_t>(ctx.turn + 1));
    h = stable_hash(stream, h);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string extract_line_after(const std::string& text, const std::string& marker) {
    std::size_t pos = text.find(marker);
    if (pos == std::string::npos) return {};
    std::size_t start = pos + marker.size();
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    return trim(text.substr(start, end - start));
}

inline std::string synthetic_generator_response(const SyntheticSpec& spec,
                                                const CallContext& ctx) {
    bool correct;
    if (spec.correct_from_turn) {
        correct = ctx.turn >= *spec.correct_from_turn;
    } else {
        correct = keyed_uniform(spec, ctx, "gen") < spec.generator_accuracy(ctx.task);
    }
    if (correct) return ctx.reference_answer;
    return "plausible but wrong finding " + keyed_token(spec, ctx, "gen-alt");
}

inline std::string synthetic_verifier_response(const SyntheticSpec& spec,
                                               const CallContext& ctx) {
    if (!ctx.answer_correct)
        throw ConfigError("synthetic verifier needs the oracle label in the call context");
    if (spec.uncertain_prob > 0.0 &&
        keyed_uniform(spec, ctx, "ver-unc") < spec.uncertain_prob) {
        return "Verdict: UNCERTAIN\nConfidence: 0.3\nExplanation: the evidence is ambiguous";
    }
    double p_accept = *ctx.answer_correct
                          ? 1.0 - spec.verifier_fnr
                          : shifted_prob(spec.verifier_fpr, spec.coupling_shift);
    bool accept = keyed_uniform(spec, ctx, "ver") < p_accept;
    if (accept)
        return "Verdict: CORRECT\nConfidence: 0.9\nExplanation: consistent with the image findings";
    return "Verdict: INCORRECT\nConfidence: 0.8\nExplanation: contradicts the image findings";
}

inline std::string synthetic_judge_response(const std::string& prompt) {
    std::string ref = to_lower(extract_line_after(prompt, "Reference Answer: "));
    std::string ans = to_lower(extract_line_after(prompt, "Model Answer: "));
    return (!ref.empty() && ref == ans) ? "CORRECT" : "INCORRECT";
}

inline std::string synthetic_labeler_response(const SyntheticSpec& spec,
                                              const CallContext& ctx) {
    if (spec.label_mode == "echo") {
        if (!ctx.task) throw ConfigError("echo labeler needs a task in the call context");
        return task_slug(*ctx.task);
    }
    std::uint64_t h = stable_hash(ctx.example_id, splitmix64(spec.seed ^ 0x1abe1));
    int idx = static_cast<int>(h % kNumTasks);
    if (spec.label_mode == "split") idx = (idx + spec.label_offset) % kNumTasks;
    return task_slug(all_task_labels()[static_cast<std::size_t>(idx)]);
}

inline std::string http_chat_call(const BackendConfig& backend, const std::string& prompt,
                                  const std::optional<std::string>& image_path) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    if (image_path) {
        std::string bytes = read_file_bytes(*image_path);
        content.push_back(
            {{"type", "image_url"},
             {"image_url", {{"url", "data:image/png;base64," + base64_encode(bytes)}}}});
    }
    json body{{"model", backend.model_name},
              {"messages", json::array({{{"role", "user"}, {"content", content}}})},
              {"temperature", backend.temperature},
              {"max_tokens", backend.max_tokens}};

    httplib::Headers headers;
    if (!backend.api_key_env.empty()) {
        if (const char* key = std::getenv(backend.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    bool rate_limited = false;
    for (int attempt = 0; attempt <= backend.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                backend.retry_backoff_ms * (1 << (attempt - 1))));
        }
        httplib::Client client(backend.endpoint);
        client.set_connection_timeout(std::chrono::duration<double>(backend.request_timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(backend.request_timeout_s));
        auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            rate_limited = false;
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            rate_limited = res->status == 429;
            continue;
        }
        if (res->status != 200)
            throw TransportError(backend.backend_id + ": HTTP " + std::to_string(res->status));
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty())
            throw BackendRefusalError(backend.backend_id + ": malformed completion body");
        const json& msg = reply["choices"][0]["message"];
        std::string text = msg.value("content", std::string{});
        if (trim(text).empty())
            throw BackendRefusalError(backend.backend_id + ": empty completion");
        return text;
    }
    if (rate_limited)
        throw RateLimitedError(backend.backend_id + ": still rate limited after " +
                               std::to_string(backend.max_retries) + " retries");
    throw TransportError(backend.backend_id + ": " + last_error + " after " +
                         std::to_string(backend.max_retries) + " retries");
}

}  // namespace detail

/// Issues one backend call through the cache. Synthetic backends answer
/// deterministically from their spec; http_chat backends issue one
/// OpenAI-style chat completion with retry/backoff.
inline std::string call(const BackendConfig& backend, AgentRole role, const std::string& prompt,
                        const std::optional<std::string>& image_path, const CallContext& ctx,
                        const ResponseCache& cache) {
    std::string image_digest = "-";
    if (image_path) image_digest = sha256_file_hex(*image_path);
    std::string key = ResponseCache::make_key(backend.backend_id, role, prompt, image_digest);
    if (auto hit = cache.lookup(key)) return *hit;

    std::string response;
    if (backend.kind == "synthetic") {
        switch (role) {
            case AgentRole::Generator:
                response = detail::synthetic_generator_response(backend.synthetic, ctx);
                break;
            case AgentRole::Verifier:
                response = detail::synthetic_verifier_response(backend.synthetic, ctx);
                break;
            case AgentRole::Judge:
                response = detail::synthetic_judge_response(prompt);
                break;
            case AgentRole::Labeler:
                response = detail::synthetic_labeler_response(backend.synthetic, ctx);
                break;
        }
    } else if (backend.kind == "http_chat") {
        response = detail::http_chat_call(backend, prompt, image_path);
    } else {
        throw ConfigError("unknown backend kind: " + backend.kind);
    }
    if (detail::trim(response).empty())
        throw BackendRefusalError(backend.backend_id + ": empty response body");
    cache.store(key, response, backend.backend_id);
    return response;
}

}  // namespace verimap
