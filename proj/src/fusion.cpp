#include "diarkit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace diar {

FuseDialogueResult fuse_dialogue(int z_semantic, int z_acoustic, double p_s, double d_p,
                                 double d_q, const FusionParams& params) {
    if ((z_semantic != 0 && z_semantic != 1) || (z_acoustic != 0 && z_acoustic != 1)) {
        throw ValidationError("fuse_dialogue: z values must be binary");
    }
    if (!std::isfinite(p_s) || !std::isfinite(d_p) || !std::isfinite(d_q)) {
        throw ValidationError("fuse_dialogue: inputs must be finite");
    }
    const double za = static_cast<double>(z_acoustic);
    const double zs = static_cast<double>(z_semantic);
    FuseDialogueResult out;
    out.s_hat = za * zs + za * (p_s + params.alpha1 * d_p) + zs * (p_s + params.alpha2 * d_q);
    out.z_fused = out.s_hat > params.theta ? 1 : 0;
    return out;
}

double fuse_turn(double p_semantic, double q_acoustic, const FusionParams& params) {
    if (p_semantic < 0.0 || p_semantic > 1.0 || q_acoustic < 0.0 || q_acoustic > 1.0) {
        throw ValidationError("fuse_turn: probabilities must be in [0, 1]");
    }
    return params.beta1 * p_semantic + params.beta2 * q_acoustic;
}

std::vector<int> binarize_turns(const std::vector<TurnEvidence>& turns,
                                const RefineParams& params) {
    std::vector<int> out(turns.size(), 0);
    for (size_t i = 0; i < turns.size(); ++i) {
        out[i] = turns[i].p_fused > params.turn_threshold ? 1 : 0;
    }
    return out;
}

ClusteringResult readjust_windows(const ClusteringResult& result,
                                  const std::vector<DialogueEvidence>& evidence,
                                  const Session& session) {
    ClusteringResult out = result;
    std::vector<const DialogueEvidence*> windows;
    windows.reserve(evidence.size());
    for (const auto& e : evidence) windows.push_back(&e);
    std::stable_sort(windows.begin(), windows.end(),
                     [](const DialogueEvidence* a, const DialogueEvidence* b) {
                         return a->first_segment < b->first_segment;
                     });

    for (const DialogueEvidence* w : windows) {
        if (w->z_fused != 0) continue;
        if (w->first_segment < 1 || w->last_segment > session.size() ||
            w->first_segment > w->last_segment) {
            throw ValidationError("readjust_windows: window out of range");
        }
        // Majority label over the window under the current labels.
        std::map<int, int> counts;
        for (int id = w->first_segment; id <= w->last_segment; ++id) {
            ++counts[out.labels[static_cast<size_t>(id - 1)]];
        }
        if (counts.size() <= 1) continue;  // already homogeneous
        int best_count = 0;
        for (const auto& [label, count] : counts) best_count = std::max(best_count, count);
        int majority = 0;
        for (int id = w->first_segment; id <= w->last_segment && majority == 0; ++id) {
            const int label = out.labels[static_cast<size_t>(id - 1)];
            if (counts[label] == best_count) majority = label;
        }
        for (int id = w->first_segment; id <= w->last_segment; ++id) {
            out.labels[static_cast<size_t>(id - 1)] = majority;
        }
    }
    return out;
}

}  // namespace diar
