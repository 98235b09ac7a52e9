#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "diarkit/io.hpp"
#include "diarkit/synth.hpp"
#include "test_helpers.hpp"

using namespace diar;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "diarkit_io_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const fs::path path = temp_dir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kThreeSegments = R"({
  "schema": "diar-segments/1",
  "session_id": "s1",
  "embedding_dim": 2,
  "segments": [
    {"id": 1, "start_s": 0.0, "end_s": 1.0, "embedding": [1.0, 0.0],
     "words": [{"token": "hello", "start_s": 0.0, "end_s": 0.5}]},
    {"id": 2, "start_s": 1.0, "end_s": 2.0, "embedding": [0.0, 1.0],
     "words": [{"token": "world", "start_s": 1.1, "end_s": 1.4}]},
    {"id": 3, "start_s": 2.0, "end_s": 3.0, "embedding": [3.0, 4.0],
     "words": [{"token": "again", "start_s": 2.0, "end_s": 2.2}]}
  ]
})";

}  // namespace

TEST_CASE("load_session accepts a well-formed file and normalizes embeddings") {
    const auto path = write_file("ok.json", kThreeSegments);
    const Session session = load_session(path);
    CHECK(session.size() == 3);
    CHECK(session.session_id == "s1");
    // (3,4) normalized to (0.6, 0.8).
    CHECK(session.segment(3).embedding[0] == doctest::Approx(0.6));
    CHECK(session.segment(3).embedding[1] == doctest::Approx(0.8));
}

TEST_CASE("load_session rejects NaN embeddings as a schema error") {
    std::string bad = kThreeSegments;
    const auto pos = bad.find("[1.0, 0.0]");
    bad.replace(pos, 10, "[NaN, 0.0]");
    const auto path = write_file("nan.json", bad);
    CHECK_THROWS_AS(load_session(path), SchemaError);
}

TEST_CASE("load_session rejects overlapping segments with the record index") {
    std::string bad = kThreeSegments;
    const auto pos = bad.find("\"id\": 2, \"start_s\": 1.0");
    bad.replace(pos, 23, "\"id\": 2, \"start_s\": 0.5");
    const auto path = write_file("overlap.json", bad);
    CHECK_THROWS_AS(load_session(path), ValidationError);
    try {
        load_session(path);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("segments[1]") != std::string::npos);
    }
}

TEST_CASE("load_session names missing fields") {
    std::string bad = kThreeSegments;
    const auto pos = bad.find("\"end_s\": 2.0, ");
    bad.replace(pos, 14, "");
    const auto path = write_file("missing.json", bad);
    try {
        load_session(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("end_s") != std::string::npos);
        CHECK(msg.find("segments[1]") != std::string::npos);
    }
}

TEST_CASE("load_session rejects dimension mismatches") {
    std::string bad = kThreeSegments;
    const auto pos = bad.find("[0.0, 1.0]");
    bad.replace(pos, 10, "[0.0, 1.0, 0.0]");
    const auto path = write_file("dim.json", bad);
    CHECK_THROWS_AS(load_session(path), ValidationError);
}

TEST_CASE("session write/load round-trip is exact") {
    const auto path = write_file("roundtrip_src.json", kThreeSegments);
    const Session session = load_session(path);
    const auto out = (temp_dir() / "roundtrip_out.json").string();
    write_session(session, out);
    const Session back = load_session(out);
    CHECK(back.session_id == session.session_id);
    CHECK(back.embedding_dim == session.embedding_dim);
    REQUIRE(back.size() == session.size());
    for (int i = 1; i <= session.size(); ++i) {
        CHECK(back.segment(i).start_s == session.segment(i).start_s);
        CHECK(back.segment(i).end_s == session.segment(i).end_s);
        CHECK(back.segment(i).embedding == session.segment(i).embedding);  // bit-exact
        REQUIRE(back.segment(i).words.size() == session.segment(i).words.size());
        for (size_t w = 0; w < back.segment(i).words.size(); ++w) {
            CHECK(back.segment(i).words[w].token == session.segment(i).words[w].token);
            CHECK(back.segment(i).words[w].start_s == session.segment(i).words[w].start_s);
            CHECK(back.segment(i).words[w].end_s == session.segment(i).words[w].end_s);
        }
    }
    // Writing the reloaded session reproduces the bytes.
    const auto out2 = (temp_dir() / "roundtrip_out2.json").string();
    write_session(back, out2);
    CHECK(read_file(out) == read_file(out2));
}

TEST_CASE("round-trip identity on generated sessions") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        SynthConfig config;
        config.n_segments = 25;
        config.n_speakers = 3;
        config.embedding_dim = 8;
        config.acoustic_noise = 0.4;
        config.seed = seed;
        const SynthOutput data = generate_session(config);
        const auto p1 = (temp_dir() / "synth_rt1.json").string();
        const auto p2 = (temp_dir() / "synth_rt2.json").string();
        write_session(data.session, p1);
        write_session(load_session(p1), p2);
        CHECK(read_file(p1) == read_file(p2));
    }
}

TEST_CASE("load_semantic_scores validates references and ranges") {
    const auto spath = write_file("scores_session.json", kThreeSegments);
    const Session session = load_session(spath);

    const char* good = R"({
      "schema": "diar-scores/1",
      "session_id": "s1",
      "dialogue_windows": [
        {"first_segment": 1, "last_segment": 3, "p_s": 0.8, "z_semantic": 1}
      ],
      "turn_probabilities": [{"after_segment": 2, "p": 0.9}]
    })";
    const SemanticScores scores = load_semantic_scores(write_file("scores_ok.json", good), session);
    CHECK(scores.dialogue_windows.size() == 1);
    CHECK(scores.turn_probabilities.size() == 1);

    // No boundary after the last segment: n must satisfy 1 <= n < N.
    std::string bad = good;
    bad.replace(bad.find("\"after_segment\": 2"), 18, "\"after_segment\": 3");
    CHECK_THROWS_AS(load_semantic_scores(write_file("scores_n.json", bad), session),
                    ValidationError);

    // Out-of-range probabilities are errors, never clamped.
    bad = good;
    bad.replace(bad.find("\"p\": 0.9"), 8, "\"p\": 1.5");
    CHECK_THROWS_AS(load_semantic_scores(write_file("scores_p.json", bad), session),
                    ValidationError);

    // Windows must cover the session when any window is given.
    bad = good;
    bad.replace(bad.find("\"last_segment\": 3"), 17, "\"last_segment\": 2");
    CHECK_THROWS_AS(load_semantic_scores(write_file("scores_cover.json", bad), session),
                    ValidationError);

    // Duplicate boundary.
    bad = good;
    bad.replace(bad.find("[{\"after_segment\": 2, \"p\": 0.9}]"), 32,
                "[{\"after_segment\": 2, \"p\": 0.9}, {\"after_segment\": 2, \"p\": 0.1}]");
    CHECK_THROWS_AS(load_semantic_scores(write_file("scores_dup.json", bad), session),
                    ValidationError);

    // Fully empty scores load fine (the pipeline rejects them per mode).
    const char* empty = R"({
      "schema": "diar-scores/1", "session_id": "s1",
      "dialogue_windows": [], "turn_probabilities": []
    })";
    CHECK(load_semantic_scores(write_file("scores_empty.json", empty), session).empty());
}

TEST_CASE("load_reference basics") {
    const char* doc = R"({
      "schema": "diar-words/1",
      "session_id": "s1",
      "words": [
        {"token": "a", "speaker": "A"}, {"token": "b", "speaker": "A"},
        {"token": "c", "speaker": "B"}, {"token": "d", "speaker": "B"},
        {"token": "e", "speaker": "A"}
      ]
    })";
    const ReferenceTranscript ref = load_reference(write_file("ref.json", doc));
    CHECK(ref.words.size() == 5);
    CHECK(ref.words[2].speaker == "B");

    CHECK_THROWS_AS(load_reference(write_file("ref_empty.json", "")), SchemaError);
    const char* no_words = R"({"schema": "diar-words/1", "session_id": "s1", "words": []})";
    CHECK_THROWS_AS(load_reference(write_file("ref_nowords.json", no_words)), ValidationError);
}

TEST_CASE("RTTM reference pairing labels words by enclosing turn") {
    // Hand-labeled 10-word fixture: three turns A[0,2) B[2,5) A[5,8).
    const char* rttm =
        "SPEAKER s1 1 0.000000000 2.000000000 <NA> <NA> A <NA> <NA>\n"
        "SPEAKER s1 1 2.000000000 3.000000000 <NA> <NA> B <NA> <NA>\n"
        "SPEAKER s1 1 5.000000000 3.000000000 <NA> <NA> A <NA> <NA>\n";
    std::ostringstream words;
    words << R"({"schema": "diar-timedwords/1", "session_id": "s1", "words": [)";
    // 10 words of 0.7s starting at 0.05, 0.85, 1.65, 2.45, ... (midpoints
    // 0.4, 1.2, 2.0, 2.8, 3.6, 4.4, 5.2, 6.0, 6.8, 7.6).
    for (int i = 0; i < 10; ++i) {
        const double start = 0.05 + 0.8 * i;
        if (i > 0) words << ",";
        words << "{\"token\": \"w" << i << "\", \"start_s\": " << start
              << ", \"end_s\": " << start + 0.7 << "}";
    }
    words << "]}";
    const ReferenceTranscript ref = load_reference_rttm(
        write_file("turns.rttm", rttm), write_file("timed_words.json", words.str()));
    const std::vector<std::string> expected = {"A", "A", "A", "B", "B",
                                               "B", "A", "A", "A", "A"};
    REQUIRE(ref.words.size() == 10);
    for (size_t i = 0; i < 10; ++i) CHECK(ref.words[i].speaker == expected[i]);
}

TEST_CASE("RTTM parser reports the offending line") {
    const char* rttm =
        "SPEAKER s1 1 0.0 2.0 <NA> <NA> A <NA> <NA>\n"
        "garbage line here\n";
    try {
        load_reference_rttm(write_file("bad.rttm", rttm),
                            write_file("unused_words.json",
                                       R"({"schema": "diar-timedwords/1", "session_id": "s1",
                                           "words": [{"token": "a", "start_s": 0.1, "end_s": 0.2}]})"));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("write_hypothesis merges adjacent same-label segments in RTTM") {
    const Session session = diar::testing::make_session({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
    const auto json_path = (temp_dir() / "hyp.json").string();
    const auto rttm_path = (temp_dir() / "hyp.rttm").string();

    write_hypothesis({"test", {1, 1, 2}}, session, json_path, rttm_path);
    std::string rttm = read_file(rttm_path);
    CHECK(std::count(rttm.begin(), rttm.end(), '\n') == 2);
    CHECK(rttm.find("spk1") != std::string::npos);
    CHECK(rttm.find("spk2") != std::string::npos);

    write_hypothesis({"test", {1, 2, 1}}, session, json_path, rttm_path);
    rttm = read_file(rttm_path);
    CHECK(std::count(rttm.begin(), rttm.end(), '\n') == 3);

    const Session single = diar::testing::make_session({{1.0, 0.0}});
    write_hypothesis({"test", {1}}, single, json_path, rttm_path);
    rttm = read_file(rttm_path);
    CHECK(std::count(rttm.begin(), rttm.end(), '\n') == 1);

    // The words side is loadable as a reference.
    const ReferenceTranscript hyp_words = load_reference(json_path);
    CHECK(hyp_words.words.size() == 1);
    CHECK(hyp_words.words[0].speaker == "spk1");
}

TEST_CASE("params file round-trip and validation") {
    ParamsFile params;
    params.fusion.alpha1 = 0.15;
    params.fusion.beta2 = 0.35;
    params.turn_threshold = 0.45;
    params.dialogue_f1 = 0.9;
    const auto path = (temp_dir() / "params.json").string();
    write_params(params, path);
    const ParamsFile back = load_params(path);
    CHECK(back.fusion.alpha1 == 0.15);
    CHECK(back.fusion.beta2 == 0.35);
    CHECK(back.turn_threshold == 0.45);
    CHECK(back.dialogue_f1.value() == 0.9);

    const char* bad = R"({"schema": "diar-params/1", "alpha1": 0, "alpha2": 0,
                          "beta1": 0, "beta2": 0, "theta": 0.5, "turn_threshold": 0.5})";
    CHECK_THROWS_AS(load_params(write_file("params_bad.json", bad)), ValidationError);
}
