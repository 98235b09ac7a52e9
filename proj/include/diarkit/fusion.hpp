#pragma once

#include <vector>

#include "diarkit/acoustic.hpp"
#include "diarkit/io.hpp"
#include "diarkit/types.hpp"

namespace diar {

struct FuseDialogueResult {
    double s_hat = 0.0;
    int z_fused = 0;
};

// Fusion score
//   s = z_a * z_s + z_a * (p_s + alpha1 * d_p) + z_s * (p_s + alpha2 * d_q)
// with the decision z_fused = 1 iff s > theta (strict).
FuseDialogueResult fuse_dialogue(int z_semantic, int z_acoustic, double p_s, double d_p,
                                 double d_q, const FusionParams& params);

// beta1 * p + beta2 * q, exactly.
double fuse_turn(double p_semantic, double q_acoustic, const FusionParams& params);

// Binary turn sequence over internal boundaries 1..N-1:
// p_i = 1 iff fused probability > turn_threshold (strict).
std::vector<int> binarize_turns(const std::vector<TurnEvidence>& turns,
                                const RefineParams& params);

// Relabels each fused-single-speaker window with heterogeneous labels to the
// window's majority label (ties resolved toward the label appearing earliest
// in the window). Windows are processed in ascending first-segment order and
// later windows see earlier relabelings.
ClusteringResult readjust_windows(const ClusteringResult& result,
                                  const std::vector<DialogueEvidence>& evidence,
                                  const Session& session);

// Per-session fused evidence plus the binarized turn sequence.
struct FusedSession {
    std::vector<DialogueEvidence> dialogue;
    std::vector<TurnEvidence> turns;   // one per internal boundary, ascending
    std::vector<int> p_stp;            // binary, index i -> boundary after segment i+1
};

}  // namespace diar
