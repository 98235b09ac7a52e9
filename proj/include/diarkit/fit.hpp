#pragma once

#include <string>
#include <vector>

#include "diarkit/io.hpp"
#include "diarkit/refine.hpp"
#include "diarkit/synth.hpp"

namespace diar {

struct DevExample {
    Session session;
    SemanticScores scores;
    ReferenceTranscript reference;
};

struct FitResult {
    FusionParams fusion;
    double turn_threshold = 0.5;
    double dialogue_f1 = 0.0;
    double turn_f1 = 0.0;
};

// Grid search over {0, 0.05, ..., 1.0}: (alpha1, alpha2, theta) maximize
// window-classification F1 of the fused dialogue verdict, then
// (beta1, beta2, turn_threshold) maximize boundary F1 of the binarized fused
// turn sequence, with the q_n surrogate computed after window readjustment
// under the fitted dialogue parameters. Ties keep the lexicographically first
// grid point; beta1 = beta2 = 0 is skipped and the threshold grid stays
// inside (0, 1).
FitResult fit_params(const std::vector<DevExample>& examples, const ClusterParams& cluster,
                     double q_window_s = 2.0);

// True speaker id (1..K, by first appearance) per segment, derived from the
// reference words: by time midpoint when the reference is timed, by word
// order when reference and session have the same word count.
std::vector<int> true_segment_speakers(const Session& session,
                                       const ReferenceTranscript& reference);

}  // namespace diar
