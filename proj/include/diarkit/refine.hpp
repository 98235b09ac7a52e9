#pragma once

#include <utility>
#include <vector>

#include "diarkit/fusion.hpp"
#include "diarkit/types.hpp"

namespace diar {

// Maximal runs of segments between consecutive turn points, with the
// unit-renormalized mean embedding of each run.
struct SpanSequence {
    std::vector<std::pair<int, int>> spans;  // [first_segment, last_segment], in order
    std::vector<std::vector<double>> mean_embeddings;

    int size() const { return static_cast<int>(spans.size()); }
};

// Splits the session at p_i = 1 boundaries; p_stp has one entry per internal
// boundary (index i -> boundary after segment i+1).
SpanSequence build_spans(const Session& session, const std::vector<int>& p_stp);

// One span per segment, for the segment-level split mode.
SpanSequence build_singleton_spans(const Session& session);

enum class SplitGranularity { kSpan, kSegment };

// Sequential split: spans are assigned to running speakers by cosine distance
// against per-speaker mean embeddings; a span opens a new speaker when its
// minimum distance is >= tau_split. In span mode every span boundary is a
// turn point by construction; in segment mode non-turn boundaries inherit the
// previous label.
std::vector<int> semantic_split(const SpanSequence& spans, const std::vector<int>& p_stp,
                                const RefineParams& params,
                                SplitGranularity granularity = SplitGranularity::kSpan);

// Semantic merge cost between speakers i and j: mean of (p_fused - 0.5) over
// adjacent span pairs labeled {i, j}; 0 when no such adjacency exists.
// p_tilde holds the fused turn probability per internal boundary.
double merge_score_semantic(int speaker_i, int speaker_j, const SpanSequence& spans,
                            const std::vector<int>& labels,
                            const std::vector<double>& p_tilde);

struct MergeStep {
    int into = 0;
    int from = 0;
    double cost_sim = 0.0;
    double cost_dd = 0.0;
    double cost_all = 0.0;
    int speakers_after = 0;
};

// Greedy merge loop: repeatedly merges the argmin cost_all = cost_sim +
// cost_dd pair while the minimum stays below tau_merge. Ties break toward the
// lexicographically smallest (i, j). Label values are preserved (the merged
// pair keeps the smaller id); canonicalization happens at the pipeline end.
std::vector<int> semantic_merge(const SpanSequence& spans, std::vector<int> labels,
                                const std::vector<double>& p_tilde, const RefineParams& params,
                                std::vector<MergeStep>* trace = nullptr);

// Moves each label-change boundary to a nearby segment boundary of strictly
// higher fused turn probability within max_shift_s, never past an adjacent
// label change.
DiarizationHypothesis correct_boundaries(const DiarizationHypothesis& hypothesis,
                                         const Session& session,
                                         const std::vector<double>& p_tilde,
                                         double max_shift_s);

enum class Mode { kAcoustic, kSemantic, kMultimodal };

struct PipelineParams {
    Mode mode = Mode::kMultimodal;
    ClusterParams cluster;
    FusionParams fusion;
    RefineParams refine;
    SplitGranularity granularity = SplitGranularity::kSpan;
    double max_shift_s = 1.0;
    double q_window_s = 2.0;
    const TurnProbFile* external_turn_probs = nullptr;
};

struct PipelineResult {
    DiarizationHypothesis hypothesis;
    ClusteringResult clustering;          // post outlier assignment, pre readjustment
    ClusteringResult adjusted_clustering; // post readjustment (modes with semantics)
    FusedSession fused;
    SpanSequence spans;
    std::vector<int> span_labels;
};

// Full backend: acoustic clustering, evidence, fusion, window readjustment,
// split, merge, boundary correction, canonicalization. `scores` may be null
// in acoustic mode only.
PipelineResult run_pipeline_detailed(const Session& session, const SemanticScores* scores,
                                     const PipelineParams& params);
DiarizationHypothesis run_pipeline(const Session& session, const SemanticScores* scores,
                                   const PipelineParams& params);

}  // namespace diar
