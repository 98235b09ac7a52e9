#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "diarkit_cli_tests";
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path log = work_dir() / "out.log";
    const std::string cmd = std::string(DIARKIT_BIN) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    return result;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fixture_dir() {
    static std::string dir;
    if (dir.empty()) {
        const fs::path d = work_dir() / "fixture";
        fs::create_directories(d);
        const RunResult r = run("--seed 7 --output-dir " + d.string() +
                                " synth --n-speakers 3 --n-segments 40 --dim 8 --sigma 0.0"
                                " --turn-accuracy 1.0 --dialogue-accuracy 1.0"
                                " --session-id fix");
        REQUIRE(r.exit_code == 0);
        dir = d.string();
    }
    return dir;
}

}  // namespace

TEST_CASE("help output lists every flag with defaults") {
    const RunResult top = run("--help");
    CHECK(top.exit_code == 0);
    for (const char* flag : {"--seed", "--jobs", "--output-dir", "cluster", "diarize", "eval",
                             "synth", "fit", "sweep"}) {
        CHECK(top.output.find(flag) != std::string::npos);
    }

    const RunResult diarize = run("diarize --help");
    CHECK(diarize.exit_code == 0);
    for (const char* flag :
         {"--scores", "--mode", "--params", "--alpha1", "--alpha2", "--beta1", "--beta2",
          "--theta", "--turn-threshold", "--tau-split", "--tau-merge", "--max-shift",
          "--q-window", "--p-percentile", "--k-max", "--k-fixed", "--min-segment",
          "--granularity", "--turn-probs"}) {
        CHECK(diarize.output.find(flag) != std::string::npos);
    }
    // capture_default_str renders defaults inline.
    CHECK(diarize.output.find("auto") != std::string::npos);  // p-percentile default
    CHECK(diarize.output.find("0.4") != std::string::npos);   // tau-split default
    CHECK(diarize.output.find("multimodal") != std::string::npos);
}

TEST_CASE("cluster writes a hypothesis and fails cleanly on bad input") {
    const std::string fix = fixture_dir();
    const fs::path out = work_dir() / "cluster_out";
    fs::create_directories(out);
    const RunResult ok = run("--output-dir " + out.string() + " cluster " + fix +
                             "/fix.segments.json");
    CHECK(ok.exit_code == 0);
    CHECK(fs::exists(out / "fix.hyp.json"));
    CHECK(fs::exists(out / "fix.rttm"));

    const RunResult missing = run("cluster /nonexistent/file.json");
    CHECK(missing.exit_code == 2);

    const RunResult fixed = run("--output-dir " + out.string() + " cluster " + fix +
                                "/fix.segments.json --k-fixed 3 -o " +
                                (out / "k3.hyp.json").string());
    CHECK(fixed.exit_code == 0);
    const std::string hyp = read_file(out / "k3.hyp.json");
    CHECK(hyp.find("spk1") != std::string::npos);
    CHECK(hyp.find("spk2") != std::string::npos);
    CHECK(hyp.find("spk3") != std::string::npos);
    CHECK(hyp.find("spk4") == std::string::npos);
}

TEST_CASE("diarize is deterministic and validates its mode") {
    const std::string fix = fixture_dir();
    const fs::path out = work_dir() / "diarize_out";
    fs::create_directories(out);

    const std::string base_cmd = "--seed 3 diarize " + fix + "/fix.segments.json --scores " +
                                 fix + "/fix.scores.json --mode multimodal -o ";
    const RunResult first = run(base_cmd + (out / "a.hyp.json").string());
    CHECK(first.exit_code == 0);
    const RunResult second = run(base_cmd + (out / "b.hyp.json").string());
    CHECK(second.exit_code == 0);
    CHECK(read_file(out / "a.hyp.json") == read_file(out / "b.hyp.json"));
    CHECK(read_file(out / "a.rttm") == read_file(out / "b.rttm"));

    // Semantic mode without a scores file is a configuration error.
    const RunResult no_scores =
        run("diarize " + fix + "/fix.segments.json --mode semantic");
    CHECK(no_scores.exit_code == 3);

    // Unknown mode.
    const RunResult bad_mode = run("diarize " + fix + "/fix.segments.json --scores " + fix +
                                   "/fix.scores.json --mode banana");
    CHECK(bad_mode.exit_code == 3);
}

TEST_CASE("diarize reflects a params file in its report header") {
    const std::string fix = fixture_dir();
    const fs::path params = work_dir() / "params.json";
    std::ofstream(params) << R"({"schema": "diar-params/1", "alpha1": 0.85, "alpha2": 0.1,
        "beta1": 0.65, "beta2": 0.35, "theta": 0.4, "turn_threshold": 0.45})";
    const fs::path out = work_dir() / "params_out.hyp.json";
    const RunResult r = run("diarize " + fix + "/fix.segments.json --scores " + fix +
                            "/fix.scores.json --params " + params.string() + " -o " +
                            out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("alpha1=0.85") != std::string::npos);
    CHECK(r.output.find("beta1=0.65") != std::string::npos);
    CHECK(r.output.find("turn_threshold=0.45") != std::string::npos);
    CHECK(r.output.find("params=file:") != std::string::npos);
}

TEST_CASE("eval scores hypotheses and aggregates sessions") {
    const std::string fix = fixture_dir();
    const fs::path out = work_dir() / "eval_out";
    fs::create_directories(out);

    // Evaluate the reference against itself: all metrics 0.
    const RunResult self = run("eval --reference " + fix + "/fix.reference.json --hypothesis " +
                               fix + "/fix.reference.json -o " + (out / "self.json").string());
    CHECK(self.exit_code == 0);
    CHECK(self.output.find("\"e_cp_matched\": 0.0") != std::string::npos);
    CHECK(self.output.find("\"e_speaker_wer\": 0.0") != std::string::npos);

    // Noiseless multimodal output scores 0 and cp_all >= cp_matched holds.
    const RunResult d = run("--seed 7 diarize " + fix + "/fix.segments.json --scores " + fix +
                            "/fix.scores.json -o " + (out / "hyp.json").string());
    REQUIRE(d.exit_code == 0);
    const RunResult ev = run("eval --reference " + fix + "/fix.reference.json --hypothesis " +
                             (out / "hyp.json").string());
    CHECK(ev.exit_code == 0);
    CHECK(ev.output.find("\"e_cp_matched\": 0.0") != std::string::npos);
    CHECK(ev.output.find("\"e_cp_all\": 0.0") != std::string::npos);

    // Aggregate two identical sessions through a manifest.
    const fs::path manifest = work_dir() / "eval_manifest.json";
    std::ofstream(manifest) << R"({"schema": "diar-manifest/1", "entries": [
        {"reference": ")" << fix << R"(/fix.reference.json", "hypothesis": ")"
                            << (out / "hyp.json").string() << R"("},
        {"reference": ")" << fix << R"(/fix.reference.json", "hypothesis": ")"
                            << (out / "hyp.json").string() << R"("}]})";
    const RunResult agg = run("eval --manifest " + manifest.string() + " --aggregate");
    CHECK(agg.exit_code == 0);
    CHECK(agg.output.find("\"session_id\": \"aggregate\"") != std::string::npos);

    const RunResult parse_error = run("eval --reference " + fix +
                                      "/fix.scores.json --hypothesis " + fix +
                                      "/fix.reference.json");
    CHECK(parse_error.exit_code == 2);
}

TEST_CASE("synth outputs are byte-identical across runs and feed diarize") {
    const fs::path out1 = work_dir() / "synth1";
    const fs::path out2 = work_dir() / "synth2";
    fs::create_directories(out1);
    fs::create_directories(out2);
    const std::string flags = " synth --n-speakers 2 --n-segments 25 --dim 8 --session-id twin";
    CHECK(run("--seed 5 --output-dir " + out1.string() + flags).exit_code == 0);
    CHECK(run("--seed 5 --output-dir " + out2.string() + flags).exit_code == 0);
    for (const char* name : {"twin.segments.json", "twin.scores.json", "twin.reference.json"}) {
        CHECK(read_file(out1 / name) == read_file(out2 / name));
    }

    const RunResult bad = run("synth --n-speakers 0");
    CHECK(bad.exit_code == 2);

    const RunResult d = run("diarize " + (out1 / "twin.segments.json").string() + " --scores " +
                            (out1 / "twin.scores.json").string() + " -o " +
                            (out1 / "twin.hyp.json").string());
    CHECK(d.exit_code == 0);
}

TEST_CASE("fit writes parameters achieving perfect dev F1 on a clean set") {
    const std::string fix = fixture_dir();
    const fs::path manifest = work_dir() / "fit_manifest.json";
    std::ofstream(manifest) << R"({"schema": "diar-manifest/1", "entries": [
        {"segments": ")" << fix << R"(/fix.segments.json",
         "scores": ")" << fix << R"(/fix.scores.json",
         "reference": ")" << fix << R"(/fix.reference.json"}]})";
    const fs::path params = work_dir() / "fitted.json";
    const RunResult r = run("--seed 7 fit --manifest " + manifest.string() + " -o " +
                            params.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("turn_f1=1.000000") != std::string::npos);
    const std::string fitted = read_file(params);
    CHECK(fitted.find("turn_threshold") != std::string::npos);

    // Manifest pointing at a missing file.
    const fs::path broken = work_dir() / "fit_broken.json";
    std::ofstream(broken) << R"({"schema": "diar-manifest/1", "entries": [
        {"segments": "missing.json", "scores": "x.json", "reference": "y.json"}]})";
    CHECK(run("fit --manifest " + broken.string()).exit_code == 2);

    // Empty manifest.
    const fs::path empty = work_dir() / "fit_empty.json";
    std::ofstream(empty) << R"({"schema": "diar-manifest/1", "entries": []})";
    CHECK(run("fit --manifest " + empty.string()).exit_code == 2);
}

TEST_CASE("sweep emits one row per mode") {
    const RunResult r = run("--jobs 2 sweep --n-speakers 2 --n-segments 25 --dim 8 --sigma 0.0"
                            " --turn-accuracy 1.0 --dialogue-accuracy 1.0 --seeds 3"
                            " --modes acoustic,multimodal");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("acoustic\t") != std::string::npos);
    CHECK(r.output.find("multimodal\t") != std::string::npos);
}
