#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diarkit/fit.hpp"
#include "diarkit/io.hpp"
#include "diarkit/refine.hpp"
#include "diarkit/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;   // input/validation errors
constexpr int kExitConfig = 3;  // mode/configuration mismatch

struct CommonFlags {
    uint64_t seed = 1;
    std::string params_path;
    std::string mode = "multimodal";
    int jobs = 1;
    std::string output_dir = ".";
};

struct PipelineFlags {
    diar::PipelineParams params;
    std::string granularity = "span";
    std::string turn_probs_path;
};

void add_cluster_flags(CLI::App* cmd, diar::ClusterParams* params) {
    cmd->add_option("--p-percentile", params->p_percentile,
                    "Row percentile below which affinities are damped")
        ->default_str("auto: max(0.5, min(0.95, 1 - 12/N))");
    cmd->add_option("--k-max", params->k_max, "Eigen-gap search cap")->capture_default_str();
    cmd->add_option("--k-fixed", params->k_fixed, "Fixed speaker count (skips estimation)");
    cmd->add_option("--min-segment", params->min_segment_s,
                    "Segments shorter than this are excluded from clustering (s)")
        ->capture_default_str();
}

void add_fusion_flags(CLI::App* cmd, diar::FusionParams* fusion, diar::RefineParams* refine,
                      diar::PipelineParams* pipeline) {
    cmd->add_option("--alpha1", fusion->alpha1, "Weight of D_p in the dialogue fusion score")
        ->capture_default_str();
    cmd->add_option("--alpha2", fusion->alpha2, "Weight of D_q in the dialogue fusion score")
        ->capture_default_str();
    cmd->add_option("--beta1", fusion->beta1, "Semantic weight in turn fusion")
        ->capture_default_str();
    cmd->add_option("--beta2", fusion->beta2, "Acoustic weight in turn fusion")
        ->capture_default_str();
    cmd->add_option("--theta", fusion->theta, "Dialogue decision threshold")
        ->capture_default_str();
    cmd->add_option("--turn-threshold", refine->turn_threshold,
                    "Fused turn probability cutoff (strict >)")
        ->capture_default_str();
    cmd->add_option("--tau-split", refine->tau_split, "Split distance threshold")
        ->capture_default_str();
    cmd->add_option("--tau-merge", refine->tau_merge, "Merge cost threshold")
        ->capture_default_str();
    cmd->add_option("--max-shift", pipeline->max_shift_s,
                    "Boundary correction search radius (s)")
        ->capture_default_str();
    cmd->add_option("--q-window", pipeline->q_window_s,
                    "Window around a boundary for external turn probabilities (s)")
        ->capture_default_str();
}

std::string hyp_json_path(const CommonFlags& common, const std::string& output,
                          const std::string& session_id) {
    if (!output.empty()) return output;
    return (fs::path(common.output_dir) / (session_id + ".hyp.json")).string();
}

std::string hyp_rttm_path(const std::string& rttm, const std::string& json_path) {
    if (!rttm.empty()) return rttm;
    fs::path p(json_path);
    // foo.hyp.json -> foo.rttm
    std::string stem = p.filename().string();
    const std::string suffix = ".hyp.json";
    if (stem.size() > suffix.size() && stem.substr(stem.size() - suffix.size()) == suffix) {
        stem = stem.substr(0, stem.size() - suffix.size());
    } else {
        stem = p.stem().string();
    }
    return (p.parent_path() / (stem + ".rttm")).string();
}

diar::SynthConfig synth_config_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw diar::ValidationError("cannot open file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw diar::SchemaError(path + ": " + std::string(e.what()));
    }
    if (doc.value("schema", "") != "diar-synth/1") {
        throw diar::SchemaError(path + ": expected schema 'diar-synth/1'");
    }
    diar::SynthConfig config;
    config.n_speakers = doc.value("n_speakers", config.n_speakers);
    config.n_segments = doc.value("n_segments", config.n_segments);
    config.embedding_dim = doc.value("embedding_dim", config.embedding_dim);
    config.acoustic_noise = doc.value("acoustic_noise", config.acoustic_noise);
    config.semantic_turn_accuracy =
        doc.value("semantic_turn_accuracy", config.semantic_turn_accuracy);
    config.dialogue_accuracy = doc.value("dialogue_accuracy", config.dialogue_accuracy);
    config.turn_rate = doc.value("turn_rate", config.turn_rate);
    config.words_min = doc.value("words_min", config.words_min);
    config.words_max = doc.value("words_max", config.words_max);
    config.token_overlap = doc.value("token_overlap", config.token_overlap);
    config.substitution_rate = doc.value("substitution_rate", config.substitution_rate);
    config.window_len = doc.value("window_len", config.window_len);
    config.window_shift = doc.value("window_shift", config.window_shift);
    config.seed = doc.value("seed", config.seed);
    config.session_id = doc.value("session_id", config.session_id);
    return config;
}

struct ManifestEntry {
    std::string segments;
    std::string scores;
    std::string reference;
    std::string hypothesis;
};

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw diar::ValidationError("cannot open file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw diar::SchemaError(path + ": " + std::string(e.what()));
    }
    if (doc.value("schema", "") != "diar-manifest/1") {
        throw diar::SchemaError(path + ": expected schema 'diar-manifest/1'");
    }
    if (!doc.contains("entries") || !doc["entries"].is_array()) {
        throw diar::SchemaError(path + ": missing field 'entries'");
    }
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };
    std::vector<ManifestEntry> entries;
    for (const json& e : doc["entries"]) {
        ManifestEntry entry;
        entry.segments = resolve(e.value("segments", ""));
        entry.scores = resolve(e.value("scores", ""));
        entry.reference = resolve(e.value("reference", ""));
        entry.hypothesis = resolve(e.value("hypothesis", ""));
        entries.push_back(std::move(entry));
    }
    return entries;
}

void print_params_header(const diar::PipelineParams& params, const std::string& source,
                         uint64_t seed, const std::string& mode) {
    std::printf(
        "# mode=%s seed=%llu params=%s alpha1=%g alpha2=%g beta1=%g beta2=%g theta=%g "
        "turn_threshold=%g tau_split=%g tau_merge=%g p_percentile=%s\n",
        mode.c_str(), static_cast<unsigned long long>(seed), source.c_str(),
        params.fusion.alpha1, params.fusion.alpha2, params.fusion.beta1, params.fusion.beta2,
        params.fusion.theta, params.refine.turn_threshold, params.refine.tau_split,
        params.refine.tau_merge,
        params.cluster.p_percentile ? std::to_string(*params.cluster.p_percentile).c_str()
                                    : "auto");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic-acoustic speaker diarization toolkit"};
    app.require_subcommand(1);

    CommonFlags common;
    app.add_option("--seed", common.seed, "Deterministic seed")->capture_default_str();
    app.add_option("--jobs", common.jobs, "Parallel sessions")->capture_default_str();
    app.add_option("--output-dir", common.output_dir, "Directory for derived output names")
        ->capture_default_str();

    // --- cluster ---
    auto* cluster_cmd =
        app.add_subcommand("cluster", "Acoustic-only diarization of a segments file");
    std::string cluster_input, cluster_output, cluster_rttm;
    diar::ClusterParams cluster_params;
    cluster_cmd->add_option("segments", cluster_input, "Segments file")->required();
    cluster_cmd->add_option("-o,--output", cluster_output, "Hypothesis JSON path");
    cluster_cmd->add_option("--rttm", cluster_rttm, "RTTM output path");
    add_cluster_flags(cluster_cmd, &cluster_params);

    // --- diarize ---
    auto* diarize_cmd = app.add_subcommand("diarize", "Full pipeline in the requested mode");
    std::string diarize_input, diarize_scores, diarize_output, diarize_rttm;
    PipelineFlags pf;
    diarize_cmd->add_option("segments", diarize_input, "Segments file")->required();
    diarize_cmd->add_option("--scores", diarize_scores, "Semantic scores file");
    diarize_cmd->add_option("--mode", common.mode, "acoustic|semantic|multimodal")
        ->capture_default_str();
    diarize_cmd->add_option("--params", common.params_path,
                            "Parameters file overriding fusion defaults");
    diarize_cmd->add_option("-o,--output", diarize_output, "Hypothesis JSON path");
    diarize_cmd->add_option("--rttm", diarize_rttm, "RTTM output path");
    diarize_cmd->add_option("--granularity", pf.granularity, "Split granularity: span|segment")
        ->capture_default_str();
    diarize_cmd->add_option("--turn-probs", pf.turn_probs_path,
                            "External acoustic turn-probability file");
    add_cluster_flags(diarize_cmd, &pf.params.cluster);
    add_fusion_flags(diarize_cmd, &pf.params.fusion, &pf.params.refine, &pf.params);

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Score a hypothesis against a reference");
    std::string eval_ref, eval_hyp, eval_ref_rttm, eval_ref_words, eval_output, eval_manifest;
    bool eval_aggregate = false;
    eval_cmd->add_option("--reference", eval_ref, "Reference words file");
    eval_cmd->add_option("--hypothesis", eval_hyp, "Hypothesis words file");
    eval_cmd->add_option("--ref-rttm", eval_ref_rttm, "Reference RTTM (with --ref-words)");
    eval_cmd->add_option("--ref-words", eval_ref_words, "Timed word list paired with --ref-rttm");
    eval_cmd->add_option("--manifest", eval_manifest, "Manifest of reference/hypothesis pairs");
    eval_cmd->add_flag("--aggregate", eval_aggregate,
                       "Merge manifest sessions into one corpus row");
    eval_cmd->add_option("-o,--output", eval_output, "Report JSON path");

    // --- synth ---
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic session fixture");
    diar::SynthConfig synth_config;
    std::string synth_config_path;
    synth_cmd->add_option("--config", synth_config_path, "Synth config JSON (diar-synth/1)");
    auto add_synth_flags = [](CLI::App* cmd, diar::SynthConfig* config) {
        cmd->add_option("--n-speakers", config->n_speakers, "Speakers")->capture_default_str();
        cmd->add_option("--n-segments", config->n_segments, "Segments")->capture_default_str();
        cmd->add_option("--dim", config->embedding_dim, "Embedding dimension")
            ->capture_default_str();
        cmd->add_option("--sigma", config->acoustic_noise, "Acoustic noise sigma")
            ->capture_default_str();
        cmd->add_option("--turn-accuracy", config->semantic_turn_accuracy,
                        "Semantic turn accuracy")
            ->capture_default_str();
        cmd->add_option("--dialogue-accuracy", config->dialogue_accuracy,
                        "Semantic dialogue accuracy")
            ->capture_default_str();
        cmd->add_option("--turn-rate", config->turn_rate, "True boundary change rate")
            ->capture_default_str();
        cmd->add_option("--words-min", config->words_min, "Min words per segment")
            ->capture_default_str();
        cmd->add_option("--words-max", config->words_max, "Max words per segment")
            ->capture_default_str();
        cmd->add_option("--token-overlap", config->token_overlap,
                        "Fraction of tokens from a shared pool")
            ->capture_default_str();
        cmd->add_option("--substitution-rate", config->substitution_rate,
                        "ASR-style token substitution rate")
            ->capture_default_str();
        cmd->add_option("--window-len", config->window_len, "Dialogue window length")
            ->capture_default_str();
        cmd->add_option("--window-shift", config->window_shift, "Dialogue window shift")
            ->capture_default_str();
        cmd->add_option("--session-id", config->session_id, "Session id")->capture_default_str();
    };
    add_synth_flags(synth_cmd, &synth_config);

    // --- fit ---
    auto* fit_cmd = app.add_subcommand("fit", "Grid-search fusion parameters on a dev set");
    std::string fit_manifest, fit_output = "params.json";
    diar::ClusterParams fit_cluster;
    double fit_q_window = 2.0;
    fit_cmd->add_option("--manifest", fit_manifest,
                        "Manifest of segments/scores/reference triples")
        ->required();
    fit_cmd->add_option("-o,--output", fit_output, "Fitted parameters path")
        ->capture_default_str();
    fit_cmd->add_option("--q-window", fit_q_window, "External turn-probability window (s)")
        ->capture_default_str();
    add_cluster_flags(fit_cmd, &fit_cluster);

    // --- sweep ---
    auto* sweep_cmd = app.add_subcommand("sweep", "Benchmark pipeline modes over synthetic seeds");
    diar::SynthConfig sweep_config;
    int sweep_seeds = 10;
    std::string sweep_modes = "acoustic,multimodal";
    std::string sweep_output;
    PipelineFlags sweep_pf;
    add_synth_flags(sweep_cmd, &sweep_config);
    sweep_cmd->add_option("--seeds", sweep_seeds, "Number of seeds (1..N)")->capture_default_str();
    sweep_cmd->add_option("--modes", sweep_modes, "Comma-separated mode list")
        ->capture_default_str();
    sweep_cmd->add_option("-o,--output", sweep_output, "Table output path (TSV)");
    add_cluster_flags(sweep_cmd, &sweep_pf.params.cluster);
    add_fusion_flags(sweep_cmd, &sweep_pf.params.fusion, &sweep_pf.params.refine, &sweep_pf.params);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (cluster_cmd->parsed()) {
            cluster_params.seed = common.seed;
            const diar::Session session = diar::load_session(cluster_input);
            const diar::ClusteringResult result =
                diar::assign_outliers(diar::spectral_cluster(session, cluster_params), session);
            const diar::DiarizationHypothesis hyp = diar::canonicalize_labels(
                diar::DiarizationHypothesis{session.session_id, result.labels});
            const std::string out_json = hyp_json_path(common, cluster_output, session.session_id);
            const std::string out_rttm = hyp_rttm_path(cluster_rttm, out_json);
            diar::write_hypothesis(hyp, session, out_json, out_rttm);
            std::printf("# mode=acoustic seed=%llu k=%d segments=%d\n",
                        static_cast<unsigned long long>(common.seed), result.k, session.size());
            std::printf("wrote %s\nwrote %s\n", out_json.c_str(), out_rttm.c_str());
        } else if (diarize_cmd->parsed()) {
            pf.params.cluster.seed = common.seed;
            pf.params.mode = diar::mode_from_name(common.mode);
            if (pf.granularity == "span") {
                pf.params.granularity = diar::SplitGranularity::kSpan;
            } else if (pf.granularity == "segment") {
                pf.params.granularity = diar::SplitGranularity::kSegment;
            } else {
                throw diar::ConfigError("unknown granularity '" + pf.granularity + "'");
            }
            std::string params_source = "defaults+flags";
            if (!common.params_path.empty()) {
                const diar::ParamsFile file = diar::load_params(common.params_path);
                pf.params.fusion = file.fusion;
                pf.params.refine.turn_threshold = file.turn_threshold;
                params_source = "file:" + common.params_path;
            }
            const diar::Session session = diar::load_session(diarize_input);
            std::optional<diar::SemanticScores> scores;
            if (!diarize_scores.empty()) {
                scores = diar::load_semantic_scores(diarize_scores, session);
            } else if (pf.params.mode != diar::Mode::kAcoustic) {
                throw diar::ConfigError("mode '" + common.mode +
                                        "' requires --scores; use --mode acoustic without them");
            }
            diar::TurnProbFile turn_probs;
            if (!pf.turn_probs_path.empty()) {
                turn_probs = diar::load_turn_probs(pf.turn_probs_path);
                pf.params.external_turn_probs = &turn_probs;
            }
            print_params_header(pf.params, params_source, common.seed, common.mode);
            const diar::DiarizationHypothesis hyp =
                diar::run_pipeline(session, scores ? &*scores : nullptr, pf.params);
            const std::string out_json = hyp_json_path(common, diarize_output, session.session_id);
            const std::string out_rttm = hyp_rttm_path(diarize_rttm, out_json);
            diar::write_hypothesis(hyp, session, out_json, out_rttm);
            std::printf("wrote %s\nwrote %s\n", out_json.c_str(), out_rttm.c_str());
        } else if (eval_cmd->parsed()) {
            std::vector<diar::MetricsReport> reports;
            if (!eval_manifest.empty()) {
                const auto entries = load_manifest(eval_manifest);
                if (entries.empty()) {
                    throw diar::ValidationError(eval_manifest + ": manifest has no entries");
                }
                for (const auto& entry : entries) {
                    const diar::ReferenceTranscript ref = diar::load_reference(entry.reference);
                    const diar::ReferenceTranscript hyp = diar::load_reference(entry.hypothesis);
                    reports.push_back(diar::evaluate(diar::reference_words(ref),
                                                     diar::reference_words(hyp), ref.session_id));
                }
            } else {
                diar::ReferenceTranscript ref;
                if (!eval_ref_rttm.empty() || !eval_ref_words.empty()) {
                    if (eval_ref_rttm.empty() || eval_ref_words.empty()) {
                        throw diar::ConfigError(
                            "--ref-rttm and --ref-words must be given together");
                    }
                    ref = diar::load_reference_rttm(eval_ref_rttm, eval_ref_words);
                } else if (!eval_ref.empty()) {
                    ref = diar::load_reference(eval_ref);
                } else {
                    throw diar::ConfigError("eval needs --reference (or --ref-rttm/--ref-words)");
                }
                if (eval_hyp.empty()) {
                    throw diar::ConfigError("eval needs --hypothesis");
                }
                const diar::ReferenceTranscript hyp = diar::load_reference(eval_hyp);
                reports.push_back(diar::evaluate(diar::reference_words(ref),
                                                 diar::reference_words(hyp), ref.session_id));
            }
            diar::MetricsReport final_report;
            if (reports.size() > 1 || eval_aggregate) {
                final_report = diar::aggregate_reports(reports);
            } else {
                final_report = reports.front();
            }
            std::fputs(diar::report_to_json(final_report).c_str(), stdout);
            if (!eval_output.empty()) diar::write_report(final_report, eval_output);
        } else if (synth_cmd->parsed()) {
            diar::SynthConfig config = synth_config;
            if (!synth_config_path.empty()) {
                config = synth_config_from_json(synth_config_path);
            }
            config.seed = common.seed;
            const diar::SynthOutput out = diar::generate_session(config);
            const fs::path dir(common.output_dir);
            if (!dir.empty()) fs::create_directories(dir);
            const std::string base = (dir / config.session_id).string();
            diar::write_session(out.session, base + ".segments.json");
            diar::write_semantic_scores(out.scores, base + ".scores.json");
            diar::write_reference(out.reference, base + ".reference.json");
            std::printf("wrote %s.segments.json\nwrote %s.scores.json\nwrote %s.reference.json\n",
                        base.c_str(), base.c_str(), base.c_str());
        } else if (fit_cmd->parsed()) {
            fit_cluster.seed = common.seed;
            const auto entries = load_manifest(fit_manifest);
            if (entries.empty()) {
                throw diar::ValidationError(fit_manifest + ": manifest has no entries");
            }
            std::vector<diar::DevExample> examples;
            for (const auto& entry : entries) {
                diar::DevExample ex;
                ex.session = diar::load_session(entry.segments);
                ex.scores = diar::load_semantic_scores(entry.scores, ex.session);
                ex.reference = diar::load_reference(entry.reference);
                examples.push_back(std::move(ex));
            }
            const diar::FitResult fitted = diar::fit_params(examples, fit_cluster, fit_q_window);
            diar::ParamsFile file;
            file.fusion = fitted.fusion;
            file.turn_threshold = fitted.turn_threshold;
            file.dialogue_f1 = fitted.dialogue_f1;
            file.turn_f1 = fitted.turn_f1;
            diar::write_params(file, fit_output);
            std::printf(
                "# fitted alpha1=%g alpha2=%g theta=%g beta1=%g beta2=%g turn_threshold=%g "
                "dialogue_f1=%.6f turn_f1=%.6f\nwrote %s\n",
                fitted.fusion.alpha1, fitted.fusion.alpha2, fitted.fusion.theta,
                fitted.fusion.beta1, fitted.fusion.beta2, fitted.turn_threshold,
                fitted.dialogue_f1, fitted.turn_f1, fit_output.c_str());
        } else if (sweep_cmd->parsed()) {
            std::vector<diar::SynthConfig> configs;
            for (int s = 1; s <= sweep_seeds; ++s) {
                diar::SynthConfig c = sweep_config;
                c.seed = static_cast<uint64_t>(s);
                c.session_id = sweep_config.session_id + std::to_string(s);
                configs.push_back(c);
            }
            std::vector<diar::Mode> modes;
            std::stringstream ms(sweep_modes);
            std::string mode_token;
            while (std::getline(ms, mode_token, ',')) {
                if (!mode_token.empty()) modes.push_back(diar::mode_from_name(mode_token));
            }
            const diar::SweepResult result =
                diar::sweep(configs, modes, sweep_pf.params, common.jobs);
            const std::string table = diar::sweep_table(result);
            std::fputs(table.c_str(), stdout);
            if (!sweep_output.empty()) {
                std::ofstream out(sweep_output);
                if (!out) {
                    throw diar::ValidationError("cannot open file for writing: " + sweep_output);
                }
                out << table;
            }
        }
        return kExitOk;
    } catch (const diar::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const diar::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
}
