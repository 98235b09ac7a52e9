#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diarkit/io.hpp"
#include "diarkit/metrics.hpp"
#include "diarkit/refine.hpp"
#include "diarkit/types.hpp"

namespace diar {

struct SynthConfig {
    int n_speakers = 4;
    int n_segments = 200;
    int embedding_dim = 16;
    double acoustic_noise = 0.3;         // per-coordinate Gaussian sigma before renormalization
    double semantic_turn_accuracy = 0.9; // fraction of boundaries classified correctly at 0.5
    double dialogue_accuracy = 0.9;
    double turn_rate = 0.2;              // probability a boundary is a true speaker change
    int words_min = 4;
    int words_max = 9;
    double token_overlap = 0.0;          // fraction of words drawn from a shared pool
    double substitution_rate = 0.0;      // ASR-style token noise on the session side
    int window_len = 64;
    int window_shift = 16;
    uint64_t seed = 1;
    std::string session_id = "synth";

    void validate() const;
};

struct SynthOutput {
    Session session;
    SemanticScores scores;
    ReferenceTranscript reference;
    std::vector<int> true_speakers;  // per segment, 1..n_speakers
};

// Deterministic per seed. Speaker prototypes are random unit vectors,
// orthonormalized when embedding_dim >= n_speakers; the speaker sequence is a
// Markov chain with change probability turn_rate; semantic scores land on the
// correct side of 0.5 with the configured accuracy.
SynthOutput generate_session(const SynthConfig& config);

struct SweepRow {
    std::string mode;
    SynthConfig config;     // representative config (first seed)
    int n_seeds = 0;
    double mean_cp_matched = 0.0, std_cp_matched = 0.0;
    double mean_cp_all = 0.0, std_cp_all = 0.0;
    double mean_speaker_wer = 0.0, std_speaker_wer = 0.0;
    double mean_wer = 0.0;
    std::vector<MetricsReport> reports;  // per seed, in config order
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

// Runs run_pipeline per (config, mode) and aggregates metric mean/stddev over
// seeds within each config group (configs identical up to seed). `jobs`
// parallelizes across (config, mode) cells.
SweepResult sweep(const std::vector<SynthConfig>& configs, const std::vector<Mode>& modes,
                  const PipelineParams& base_params, int jobs = 1);

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

// Tab-separated sweep table with one row per (config group, mode).
std::string sweep_table(const SweepResult& result);

}  // namespace diar
