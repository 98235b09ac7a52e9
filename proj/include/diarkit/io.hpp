#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diarkit/metrics.hpp"
#include "diarkit/types.hpp"

namespace diar {

struct DialogueWindowScore {
    int first_segment = 0;
    int last_segment = 0;
    double p_s = 0.0;
    int z_semantic = 0;
};

struct TurnProbability {
    int after_segment = 0;
    double p = 0.0;
};

// Transport format for the two semantic sub-tasks' outputs.
struct SemanticScores {
    std::string session_id;
    std::vector<DialogueWindowScore> dialogue_windows;
    std::vector<TurnProbability> turn_probabilities;

    bool empty() const { return dialogue_windows.empty() && turn_probabilities.empty(); }
};

struct RefWord {
    std::string token;
    std::string speaker;
    std::optional<double> start_s;
    std::optional<double> end_s;
};

struct ReferenceTranscript {
    std::string session_id;
    std::vector<RefWord> words;
};

struct TurnProbPoint {
    double time_s = 0.0;
    double p = 0.0;
};

// Optional per-boundary acoustic change probabilities from an external model.
struct TurnProbFile {
    std::string session_id;
    std::vector<TurnProbPoint> probs;
};

// Checks every Session invariant and normalizes embeddings in place.
void validate_session(Session& session);

// --- segments file ---------------------------------------------------------
// {"schema": "diar-segments/1", "session_id", "embedding_dim",
//  "segments": [{"id", "start_s", "end_s", "embedding": [..],
//                "words": [{"token", "start_s", "end_s"}]}]}
Session load_session(const std::string& path);
void write_session(const Session& session, const std::string& path);

// --- semantic scores file ---------------------------------------------------
// {"schema": "diar-scores/1", "session_id",
//  "dialogue_windows": [{"first_segment", "last_segment", "p_s", "z_semantic"}],
//  "turn_probabilities": [{"after_segment", "p"}]}
SemanticScores load_semantic_scores(const std::string& path, const Session& session);
void write_semantic_scores(const SemanticScores& scores, const std::string& path);

// --- speaker-attributed word files ------------------------------------------
// {"schema": "diar-words/1", "session_id",
//  "words": [{"token", "speaker", "start_s"?, "end_s"?}]}
ReferenceTranscript load_reference(const std::string& path);
void write_reference(const ReferenceTranscript& transcript, const std::string& path);

// RTTM speaker turns paired with a timed word list ("diar-timedwords/1",
// words carrying token/start_s/end_s). Words are labeled by the turn
// enclosing their midpoint.
ReferenceTranscript load_reference_rttm(const std::string& rttm_path,
                                        const std::string& words_path);
void write_timed_words(const std::vector<Word>& words, const std::string& session_id,
                       const std::string& path);

// --- hypothesis output --------------------------------------------------
// Emits the speaker-attributed word list (diar-words/1, speakers "spk<k>")
// and RTTM turns derived by merging adjacent same-label segments.
void write_hypothesis(const DiarizationHypothesis& hypothesis, const Session& session,
                      const std::string& words_path, const std::string& rttm_path);

// In-memory view of the hypothesis as speaker-attributed words.
std::vector<SpeakerWord> hypothesis_words(const DiarizationHypothesis& hypothesis,
                                          const Session& session);
std::vector<SpeakerWord> reference_words(const ReferenceTranscript& transcript);

// --- external acoustic turn probabilities -----------------------------------
// {"schema": "diar-turnprobs/1", "session_id", "probs": [{"time_s", "p"}]}
TurnProbFile load_turn_probs(const std::string& path);

// Parameters file {"schema": "diar-params/1", alpha1, alpha2, beta1, beta2,
// theta, turn_threshold, ...}. Fit metadata fields are preserved on write.
struct ParamsFile {
    FusionParams fusion;
    double turn_threshold = 0.5;
    std::optional<double> dialogue_f1;
    std::optional<double> turn_f1;
};
ParamsFile load_params(const std::string& path);
void write_params(const ParamsFile& params, const std::string& path);

// Metrics report document ("diar-report/1").
void write_report(const MetricsReport& report, const std::string& path);
std::string report_to_json(const MetricsReport& report);

}  // namespace diar
