#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>
#include <vector>

#include "verimap/agents.hpp"

using namespace verimap;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "verimap_agent_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

BackendConfig synthetic_backend(const std::string& id, SyntheticSpec spec) {
    BackendConfig b;
    b.backend_id = id;
    b.kind = "synthetic";
    b.synthetic = spec;
    return b;
}

}  // namespace

TEST_CASE("cache store/lookup round-trip and idempotence") {
    ResponseCache cache(fresh_dir("cache_basic"));
    auto key = ResponseCache::make_key("b1", AgentRole::Generator, "prompt", "-");
    CHECK(!cache.lookup(key).has_value());
    cache.store(key, "payload bytes", "b1");
    auto hit = cache.lookup(key);
    REQUIRE(hit.has_value());
    CHECK(*hit == "payload bytes");
    cache.store(key, "payload bytes", "b1");  // second store is a no-op
    CHECK(*cache.lookup(key) == "payload bytes");
}

TEST_CASE("cache detects corrupted payloads") {
    auto dir = fresh_dir("cache_corrupt");
    ResponseCache cache(dir);
    auto key = ResponseCache::make_key("b1", AgentRole::Judge, "p", "-");
    cache.store(key, "original", "b1");
    {
        std::ofstream tamper(dir / key, std::ios::binary | std::ios::trunc);
        tamper << "tampered";
    }
    CHECK_THROWS_AS(cache.lookup(key), CacheCorruptionError);
}

TEST_CASE("cache keys separate backends, roles, prompts and images") {
    auto k = ResponseCache::make_key("b1", AgentRole::Generator, "p", "-");
    CHECK(k != ResponseCache::make_key("b2", AgentRole::Generator, "p", "-"));
    CHECK(k != ResponseCache::make_key("b1", AgentRole::Verifier, "p", "-"));
    CHECK(k != ResponseCache::make_key("b1", AgentRole::Generator, "q", "-"));
    CHECK(k != ResponseCache::make_key("b1", AgentRole::Generator, "p", "abc"));
}

TEST_CASE("cache is safe under concurrent writers") {
    ResponseCache cache(fresh_dir("cache_mt"));
    std::vector<std::thread> threads;
    std::atomic<int> failures{0};
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&cache, &failures] {
            for (int i = 0; i < 50; ++i) {
                auto key = ResponseCache::make_key("b", AgentRole::Generator,
                                                   "prompt" + std::to_string(i % 10), "-");
                try {
                    cache.store(key, "payload" + std::to_string(i % 10), "b");
                    auto hit = cache.lookup(key);
                    if (!hit || *hit != "payload" + std::to_string(i % 10)) ++failures;
                } catch (...) {
                    ++failures;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(failures == 0);
}

TEST_CASE("accuracy-1 synthetic generator echoes the reference answer") {
    SyntheticSpec spec;
    spec.seed = 11;
    spec.default_accuracy = 1.0;
    auto backend = synthetic_backend("gen", spec);
    ResponseCache cache(fresh_dir("agent_gen1"));
    CallContext ctx{.example_id = "e1",
                    .turn = 0,
                    .task = TaskLabel::modality_recognition,
                    .reference_answer = "CT scan"};
    CHECK(call(backend, AgentRole::Generator, "ignored prompt", std::nullopt, ctx, cache) ==
          "CT scan");
}

TEST_CASE("accuracy-0 synthetic generator never echoes the reference") {
    SyntheticSpec spec;
    spec.seed = 11;
    spec.default_accuracy = 0.0;
    auto backend = synthetic_backend("gen", spec);
    ResponseCache cache(fresh_dir("agent_gen0"));
    for (int i = 0; i < 20; ++i) {
        CallContext ctx{.example_id = "e" + std::to_string(i),
                        .turn = 0,
                        .task = std::nullopt,
                        .reference_answer = "yes"};
        auto out = call(backend, AgentRole::Generator, "p" + std::to_string(i), std::nullopt,
                        ctx, cache);
        CHECK(out != "yes");
        CHECK(!out.empty());
    }
}

TEST_CASE("always-accept synthetic verifier returns CORRECT for wrong answers") {
    SyntheticSpec spec;
    spec.seed = 3;
    spec.verifier_fpr = 1.0;
    auto backend = synthetic_backend("ver", spec);
    ResponseCache cache(fresh_dir("agent_ver"));
    for (int i = 0; i < 10; ++i) {
        CallContext ctx{.example_id = "e" + std::to_string(i),
                        .turn = 0,
                        .task = std::nullopt,
                        .reference_answer = "r",
                        .answer_correct = false};
        auto out = call(backend, AgentRole::Verifier, "p" + std::to_string(i), std::nullopt,
                        ctx, cache);
        CHECK(parse_verdict(out).label == Verdict::Label::CORRECT);
    }
}

TEST_CASE("synthetic verifier error rates track the configured probabilities") {
    SyntheticSpec spec;
    spec.seed = 17;
    spec.verifier_fpr = 0.3;
    spec.verifier_fnr = 0.1;
    auto backend = synthetic_backend("ver", spec);
    ResponseCache cache(fresh_dir("agent_ver_rates"));
    int accept_wrong = 0, reject_right = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        CallContext wrong{.example_id = "w" + std::to_string(i),
                          .turn = 0,
                          .task = std::nullopt,
                          .reference_answer = "r",
                          .answer_correct = false};
        CallContext right{.example_id = "r" + std::to_string(i),
                          .turn = 0,
                          .task = std::nullopt,
                          .reference_answer = "r",
                          .answer_correct = true};
        if (parse_verdict(call(backend, AgentRole::Verifier, "pw" + std::to_string(i),
                               std::nullopt, wrong, cache))
                .label == Verdict::Label::CORRECT)
            ++accept_wrong;
        if (parse_verdict(call(backend, AgentRole::Verifier, "pr" + std::to_string(i),
                               std::nullopt, right, cache))
                .label != Verdict::Label::CORRECT)
            ++reject_right;
    }
    CHECK(accept_wrong / static_cast<double>(n) == doctest::Approx(0.3).epsilon(0.1));
    CHECK(reject_right / static_cast<double>(n) == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("synthetic outputs are independent of call order") {
    SyntheticSpec spec;
    spec.seed = 5;
    spec.default_accuracy = 0.5;
    auto backend = synthetic_backend("gen", spec);

    auto run = [&](bool reversed) {
        ResponseCache cache(fresh_dir(reversed ? "order_rev" : "order_fwd"));
        std::vector<std::string> out(10);
        for (int k = 0; k < 10; ++k) {
            int i = reversed ? 9 - k : k;
            CallContext ctx{.example_id = "e" + std::to_string(i),
                            .turn = i % 3,
                            .task = std::nullopt,
                            .reference_answer = "ref"};
            out[static_cast<std::size_t>(i)] =
                call(backend, AgentRole::Generator,
                     "p" + std::to_string(i) + "t" + std::to_string(i % 3), std::nullopt, ctx,
                     cache);
        }
        return out;
    };
    CHECK(run(false) == run(true));
}

TEST_CASE("synthetic judge compares reference and model answers") {
    SyntheticSpec spec;
    auto backend = synthetic_backend("judge", spec);
    ResponseCache cache(fresh_dir("agent_judge"));
    CallContext ctx{.example_id = "e", .turn = 0};
    auto match = render_prompt(AgentRole::Judge, "judge",
                               {{"question", "Q"},
                                {"reference_answer", "Liver"},
                                {"model_answer", "liver"}});
    CHECK(parse_judge(call(backend, AgentRole::Judge, match, std::nullopt, ctx, cache)) == 1);
    auto mismatch = render_prompt(AgentRole::Judge, "judge",
                                  {{"question", "Q"},
                                   {"reference_answer", "Liver"},
                                   {"model_answer", "spleen"}});
    CHECK(parse_judge(call(backend, AgentRole::Judge, mismatch, std::nullopt, ctx, cache)) == 0);
}

TEST_CASE("scripted generator becomes correct at the configured turn") {
    SyntheticSpec spec;
    spec.correct_from_turn = 2;
    auto backend = synthetic_backend("gen", spec);
    ResponseCache cache(fresh_dir("agent_script"));
    for (int turn = 0; turn < 4; ++turn) {
        CallContext ctx{.example_id = "e1",
                        .turn = turn,
                        .task = std::nullopt,
                        .reference_answer = "target"};
        auto out = call(backend, AgentRole::Generator, "prompt turn " + std::to_string(turn),
                        std::nullopt, ctx, cache);
        if (turn >= 2) CHECK(out == "target");
        else CHECK(out != "target");
    }
}

TEST_CASE("split labelers force a three-way disagreement") {
    ResponseCache cache(fresh_dir("agent_label"));
    CallContext ctx{.example_id = "ex42", .turn = 0};
    std::vector<std::string> labels;
    for (int offset = 0; offset < 3; ++offset) {
        SyntheticSpec spec;
        spec.seed = 9;
        spec.label_mode = "split";
        spec.label_offset = offset;
        auto backend = synthetic_backend("lab" + std::to_string(offset), spec);
        labels.push_back(
            call(backend, AgentRole::Labeler, "label prompt", std::nullopt, ctx, cache));
    }
    CHECK(labels[0] != labels[1]);
    CHECK(labels[1] != labels[2]);
    CHECK(labels[0] != labels[2]);
    // unanimous labelers all agree
    std::vector<std::string> agree;
    for (int i = 0; i < 3; ++i) {
        SyntheticSpec spec;
        spec.seed = 9;
        spec.label_mode = "unanimous";
        auto backend = synthetic_backend("ulab" + std::to_string(i), spec);
        agree.push_back(
            call(backend, AgentRole::Labeler, "label prompt", std::nullopt, ctx, cache));
    }
    CHECK(agree[0] == agree[1]);
    CHECK(agree[1] == agree[2]);
}

TEST_CASE("http backend surfaces transport errors after retries") {
    BackendConfig b;
    b.backend_id = "dead";
    b.kind = "http_chat";
    b.endpoint = "http://127.0.0.1:1";  // nothing listens here
    b.model_name = "m";
    b.max_retries = 1;
    b.retry_backoff_ms = 1;
    b.request_timeout_s = 1.0;
    ResponseCache cache(fresh_dir("agent_http_dead"));
    CallContext ctx{.example_id = "e", .turn = 0};
    CHECK_THROWS_AS(call(b, AgentRole::Generator, "p", std::nullopt, ctx, cache),
                    TransportError);
}
