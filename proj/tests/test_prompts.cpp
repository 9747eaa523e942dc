#include <doctest.h>

#include <set>

#include "verimap/prompts.hpp"
#include "verimap/rng.hpp"

using namespace verimap;

TEST_CASE("verifier prompt renders question and answer verbatim") {
    auto text = render_prompt(AgentRole::Verifier, "verifier",
                              {{"question", "Q"}, {"answer", "A"}});
    CHECK(text.find("Question: Q\nProposed Answer: A") != std::string::npos);
    CHECK(text.find("Verdict: [CORRECT or INCORRECT or UNCERTAIN]") != std::string::npos);
    CHECK(text.find("Confidence: [0.0 to 1.0]") != std::string::npos);
}

TEST_CASE("feedback prompt upper-cases the verdict slot") {
    auto text = render_prompt(AgentRole::Generator, "feedback",
                              {{"question", "Q"},
                               {"verdict", "incorrect"},
                               {"prev_answer", "the spleen"},
                               {"explanation", "wrong organ"}});
    CHECK(text.find("assessed your answer as INCORRECT") != std::string::npos);
    CHECK(text.find("Your previous answer: the spleen") != std::string::npos);
    CHECK(text.find("Verifier's explanation: wrong organ") != std::string::npos);
}

TEST_CASE("missing slot raises MissingSlot") {
    CHECK_THROWS_AS(render_prompt(AgentRole::Generator, "generator", {}), MissingSlotError);
    try {
        render_prompt(AgentRole::Generator, "generator", {});
    } catch (const MissingSlotError& e) {
        CHECK(std::string(e.what()).find("question") != std::string::npos);
    }
}

TEST_CASE("judge prompt carries all three slots") {
    auto text = render_prompt(AgentRole::Judge, "judge",
                              {{"question", "Q1"},
                               {"reference_answer", "CT"},
                               {"model_answer", "MRI"}});
    CHECK(text.find("Question: Q1\nReference Answer: CT\nModel Answer: MRI") !=
          std::string::npos);
    CHECK(text.find("Return only CORRECT or INCORRECT.") != std::string::npos);
}

TEST_CASE("rendered prompts are injective in their slots") {
    // fuzz distinct (question, answer) pairs; rendered text must never collide
    Rng rng(123);
    std::set<std::string> rendered;
    std::set<std::pair<std::string, std::string>> used;
    for (int i = 0; i < 300; ++i) {
        std::string q = "q" + std::to_string(rng.next_u64() % 1000);
        std::string a = "a" + std::to_string(rng.next_u64() % 1000);
        if (!used.insert({q, a}).second) continue;
        auto text = render_prompt(AgentRole::Verifier, "verifier",
                                  {{"question", q}, {"answer", a}});
        CHECK(rendered.insert(text).second);
    }
}

TEST_CASE("parse_verdict handles the documented formats") {
    auto v1 = parse_verdict("Verdict: CORRECT\nConfidence: 0.9\nExplanation: consistent with CT");
    CHECK(v1.label == Verdict::Label::CORRECT);
    CHECK(v1.confidence == 0.9);
    CHECK(v1.explanation == "consistent with CT");
    CHECK(v1.parse_clean);

    auto v2 = parse_verdict("verdict: [incorrect]\nconfidence: 1\nexplanation: wrong organ");
    CHECK(v2.label == Verdict::Label::INCORRECT);
    CHECK(v2.confidence == 1.0);
    CHECK(v2.explanation == "wrong organ");
    CHECK(v2.parse_clean);

    auto v3 = parse_verdict("The answer seems plausible.");
    CHECK(v3.label == Verdict::Label::UNCERTAIN);
    CHECK(!v3.confidence.has_value());
    CHECK(v3.explanation == "The answer seems plausible.");
    CHECK(!v3.parse_clean);
}

TEST_CASE("parse_verdict edge cases") {
    // first match wins
    auto v = parse_verdict("Verdict: INCORRECT\nVerdict: CORRECT");
    CHECK(v.label == Verdict::Label::INCORRECT);

    // missing confidence stays absent
    auto v2 = parse_verdict("Verdict: UNCERTAIN\nExplanation: unsure");
    CHECK(v2.label == Verdict::Label::UNCERTAIN);
    CHECK(!v2.confidence.has_value());
    CHECK(v2.parse_clean);

    // out-of-range confidence clamps and dirties the parse
    auto v3 = parse_verdict("Verdict: CORRECT\nConfidence: 1.7");
    CHECK(v3.confidence == 1.0);
    CHECK(!v3.parse_clean);
    auto v4 = parse_verdict("Verdict: CORRECT\nConfidence: -0.2");
    CHECK(v4.confidence == 0.0);
    CHECK(!v4.parse_clean);

    // a verdict word inside prose without the marker is not a match
    auto v5 = parse_verdict("It is probably correct I think");
    CHECK(v5.label == Verdict::Label::UNCERTAIN);
    CHECK(!v5.parse_clean);

    // bracketed verdict with trailing period
    auto v6 = parse_verdict("Verdict: [CORRECT].\nConfidence: [0.75]\nExplanation: [fine]");
    CHECK(v6.label == Verdict::Label::CORRECT);
    CHECK(v6.confidence == 0.75);
    CHECK(v6.explanation == "fine");
}

TEST_CASE("parse_verdict is total") {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        std::string s;
        auto len = rng.next_u64() % 60;
        for (std::uint64_t j = 0; j < len; ++j)
            s.push_back(static_cast<char>(32 + rng.next_u64() % 95));
        auto v = parse_verdict(s);  // must not throw
        if (v.confidence) CHECK((*v.confidence >= 0.0 && *v.confidence <= 1.0));
    }
}

TEST_CASE("parse_judge") {
    CHECK(parse_judge("CORRECT") == 1);
    CHECK(parse_judge("incorrect") == 0);
    CHECK(parse_judge("The answer is INCORRECT because...") == 0);
    CHECK(parse_judge("Well... correct!") == 1);
    CHECK_THROWS_AS(parse_judge("maybe"), JudgeParseError);
    CHECK_THROWS_AS(parse_judge(""), JudgeParseError);
}
