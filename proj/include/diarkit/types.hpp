#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diarkit/error.hpp"

namespace diar {

struct Word {
    std::string token;
    double start_s = 0.0;
    double end_s = 0.0;
};

// One ASR sentence with its speaker embedding. Ids are 1-based and contiguous
// within a session; embeddings are stored unit-normalized.
struct Segment {
    int id = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    std::vector<double> embedding;
    std::vector<Word> words;

    double duration() const { return end_s - start_s; }
};

struct Session {
    std::string session_id;
    int embedding_dim = 0;
    std::vector<Segment> segments;

    int size() const { return static_cast<int>(segments.size()); }
    const Segment& segment(int id) const { return segments.at(static_cast<size_t>(id - 1)); }
};

// Weights of the dialogue fusion score and the turn-probability fusion,
// plus the dialogue decision threshold.
struct FusionParams {
    double alpha1 = 0.5;
    double alpha2 = 0.5;
    double beta1 = 0.5;
    double beta2 = 0.5;
    double theta = 0.5;

    void validate() const;
};

struct RefineParams {
    double tau_split = 0.4;       // cosine-distance threshold opening a new speaker
    double tau_merge = 0.3;       // combined-cost threshold below which speakers merge
    double turn_threshold = 0.5;  // fused turn probability cutoff (strict >)
    double min_segment_s = 0.5;   // segments shorter than this are excluded from clustering

    void validate() const;
};

// Per-window dialogue-detection evidence: semantic and acoustic verdicts,
// the semantic score, cluster-dispersion terms, and the fused outcome.
struct DialogueEvidence {
    int first_segment = 0;
    int last_segment = 0;
    int z_semantic = 0;
    int z_acoustic = 0;
    double p_s = 0.0;
    double d_p = 0.0;
    double d_q = 0.0;
    double s_hat = 0.0;
    int z_fused = 0;
};

// Per-boundary speaker-change evidence. Boundary n sits between segments
// n and n+1, 1 <= n < N.
struct TurnEvidence {
    int boundary_after_segment = 0;
    double p_semantic = 0.0;
    double q_acoustic = 0.0;
    double p_fused = 0.0;
};

struct DiarizationHypothesis {
    std::string session_id;
    std::vector<int> labels;  // one per segment, positive integers
};

// 1 - cos(a, b), in [0, 2]. Throws ValidationError on zero-norm or
// dimension-mismatched input.
double cosine_distance(std::span<const double> a, std::span<const double> b);

// Renumbers labels to 1..K in order of first appearance.
std::vector<int> canonicalize_labels(const std::vector<int>& labels);
DiarizationHypothesis canonicalize_labels(const DiarizationHypothesis& hypothesis);

// L2-normalizes in place; throws ValidationError on zero norm. Vectors whose
// norm is already within 1e-9 of 1 are left untouched so that load/write
// round-trips are bit-exact.
void normalize_embedding(std::vector<double>& v);

}  // namespace diar
