#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "diarkit/synth.hpp"
#include "test_helpers.hpp"

using namespace diar;

TEST_CASE("generate_session is reproducible given the seed") {
    SynthConfig config;
    config.n_segments = 50;
    config.seed = 123;
    const SynthOutput a = generate_session(config);
    const SynthOutput b = generate_session(config);
    CHECK(a.true_speakers == b.true_speakers);
    REQUIRE(a.session.size() == b.session.size());
    for (int i = 1; i <= a.session.size(); ++i) {
        CHECK(a.session.segment(i).embedding == b.session.segment(i).embedding);
        CHECK(a.session.segment(i).start_s == b.session.segment(i).start_s);
    }
    REQUIRE(a.scores.turn_probabilities.size() == b.scores.turn_probabilities.size());
    for (size_t i = 0; i < a.scores.turn_probabilities.size(); ++i) {
        CHECK(a.scores.turn_probabilities[i].p == b.scores.turn_probabilities[i].p);
    }

    config.seed = 124;
    const SynthOutput c = generate_session(config);
    CHECK(a.session.segment(1).embedding != c.session.segment(1).embedding);
}

TEST_CASE("generate_session validates its config") {
    SynthConfig config;
    config.n_speakers = 0;
    CHECK_THROWS_AS(generate_session(config), ValidationError);
    config = SynthConfig{};
    config.embedding_dim = 1;
    CHECK_THROWS_AS(generate_session(config), ValidationError);
    config = SynthConfig{};
    config.semantic_turn_accuracy = 0.4;
    CHECK_THROWS_AS(generate_session(config), ValidationError);
}

TEST_CASE("semantic turn accuracy is calibrated") {
    SynthConfig config;
    config.n_segments = 10001;  // 10^4 boundaries
    config.n_speakers = 4;
    config.turn_rate = 0.3;
    config.semantic_turn_accuracy = 0.9;
    config.seed = 77;
    const SynthOutput data = generate_session(config);
    REQUIRE(data.scores.turn_probabilities.size() == 10000);
    long correct = 0;
    for (const auto& t : data.scores.turn_probabilities) {
        const int truth = data.true_speakers[static_cast<size_t>(t.after_segment)] !=
                                  data.true_speakers[static_cast<size_t>(t.after_segment - 1)]
                              ? 1
                              : 0;
        const int predicted = t.p > 0.5 ? 1 : 0;
        if (truth == predicted) ++correct;
    }
    const double accuracy = static_cast<double>(correct) / 10000.0;
    CHECK(accuracy == doctest::Approx(0.9).epsilon(0.0223));  // within +-0.02
}

TEST_CASE("generated sessions satisfy all invariants and cover windows") {
    SynthConfig config;
    config.n_segments = 150;
    config.window_len = 64;
    config.window_shift = 16;
    config.seed = 9;
    SynthOutput data = generate_session(config);
    CHECK_NOTHROW(validate_session(data.session));

    std::vector<char> covered(static_cast<size_t>(config.n_segments), 0);
    for (const auto& w : data.scores.dialogue_windows) {
        CHECK(w.last_segment - w.first_segment + 1 <= 64);
        for (int id = w.first_segment; id <= w.last_segment; ++id) {
            covered[static_cast<size_t>(id - 1)] = 1;
        }
    }
    for (char c : covered) CHECK(c == 1);

    // Reference words mirror the session tokens when substitution is off.
    size_t pos = 0;
    for (const Segment& seg : data.session.segments) {
        for (const Word& w : seg.words) {
            CHECK(w.token == data.reference.words[pos].token);
            ++pos;
        }
    }
    CHECK(pos == data.reference.words.size());
}

TEST_CASE("substitution noise touches only the session side") {
    SynthConfig config;
    config.n_segments = 60;
    config.substitution_rate = 0.3;
    config.seed = 13;
    const SynthOutput data = generate_session(config);
    size_t pos = 0, subs = 0;
    for (const Segment& seg : data.session.segments) {
        for (const Word& w : seg.words) {
            if (w.token != data.reference.words[pos].token) {
                ++subs;
                CHECK(w.token[0] == 'x');
            }
            ++pos;
        }
    }
    CHECK(subs > 0);
}

TEST_CASE("noiseless limit is exact in every mode") {
    SynthConfig config;
    config.n_segments = 60;
    config.n_speakers = 3;
    config.embedding_dim = 8;
    config.acoustic_noise = 0.0;
    config.semantic_turn_accuracy = 1.0;
    config.dialogue_accuracy = 1.0;
    config.seed = 21;
    const SynthOutput data = generate_session(config);
    for (const Mode mode : {Mode::kAcoustic, Mode::kSemantic, Mode::kMultimodal}) {
        PipelineParams params;
        params.mode = mode;
        params.cluster.seed = 21;
        const DiarizationHypothesis hyp = run_pipeline(data.session, &data.scores, params);
        const MetricsReport report = evaluate(reference_words(data.reference),
                                              hypothesis_words(hyp, data.session));
        CHECK(report.e_cp_matched == 0.0);
        CHECK(report.e_cp_all == 0.0);
        CHECK(report.e_speaker_wer == 0.0);
    }
}

TEST_CASE("sweep aggregates per mode and config group") {
    std::vector<SynthConfig> configs;
    for (uint64_t seed = 1; seed <= 3; ++seed) {
        SynthConfig c;
        c.n_segments = 30;
        c.n_speakers = 2;
        c.embedding_dim = 8;
        c.acoustic_noise = 0.0;
        c.semantic_turn_accuracy = 1.0;
        c.dialogue_accuracy = 1.0;
        c.seed = seed;
        configs.push_back(c);
    }
    const SweepResult result =
        sweep(configs, {Mode::kAcoustic, Mode::kMultimodal}, PipelineParams{}, 2);
    REQUIRE(result.rows.size() == 2);
    for (const SweepRow& row : result.rows) {
        CHECK(row.n_seeds == 3);
        CHECK(row.mean_cp_matched == 0.0);  // degenerate sigma=0 config: all modes tie at 0
        CHECK(row.std_cp_matched == 0.0);
    }
    const std::string table = sweep_table(result);
    CHECK(table.find("acoustic") != std::string::npos);
    CHECK(table.find("multimodal") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);  // header + 2 rows
}
