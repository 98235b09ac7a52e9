#include "diarkit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace diar {

std::vector<int> true_segment_speakers(const Session& session,
                                       const ReferenceTranscript& reference) {
    const int n = session.size();
    std::vector<std::map<std::string, int>> votes(static_cast<size_t>(n));

    size_t session_words = 0;
    for (const Segment& seg : session.segments) session_words += seg.words.size();

    bool timed = true;
    for (const auto& w : reference.words) {
        if (!w.start_s || !w.end_s) {
            timed = false;
            break;
        }
    }

    if (timed) {
        for (const auto& w : reference.words) {
            const double mid = (*w.start_s + *w.end_s) / 2.0;
            for (int i = 0; i < n; ++i) {
                const Segment& seg = session.segments[static_cast<size_t>(i)];
                if (mid >= seg.start_s && mid <= seg.end_s) {
                    ++votes[static_cast<size_t>(i)][w.speaker];
                    break;
                }
            }
        }
    } else if (reference.words.size() == session_words) {
        size_t pos = 0;
        for (int i = 0; i < n; ++i) {
            for (size_t w = 0; w < session.segments[static_cast<size_t>(i)].words.size(); ++w) {
                ++votes[static_cast<size_t>(i)][reference.words[pos].speaker];
                ++pos;
            }
        }
    } else {
        throw ValidationError(
            "cannot align reference to session: reference words are untimed and counts differ");
    }

    // Majority vote per segment; speaker names mapped to ids by first appearance.
    std::map<std::string, int> ids;
    std::vector<int> out(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const auto& v = votes[static_cast<size_t>(i)];
        if (v.empty()) {
            throw ValidationError("segment " + std::to_string(i + 1) +
                                  " has no reference words to vote with");
        }
        int best_count = 0;
        for (const auto& [spk, count] : v) best_count = std::max(best_count, count);
        std::string winner;
        // Order of first appearance in the reference decides ties.
        for (const auto& w : reference.words) {
            auto it = v.find(w.speaker);
            if (it != v.end() && it->second == best_count) {
                winner = w.speaker;
                break;
            }
        }
        auto [it, inserted] = ids.try_emplace(winner, static_cast<int>(ids.size()) + 1);
        out[static_cast<size_t>(i)] = it->second;
    }
    return out;
}

namespace {

double f1_score(long long tp, long long fp, long long fn) {
    const long long denom = 2 * tp + fp + fn;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

struct WindowTerms {
    int z_semantic = 0;
    int z_acoustic = 0;
    double p_s = 0.0;
    double d_p = 0.0;
    double d_q = 0.0;
    int truth = 0;
};

struct BoundaryTerms {
    double p = 0.0;
    double q = 0.0;
    int truth = 0;
};

constexpr int kGridSteps = 20;  // {0, 0.05, ..., 1.0}

double grid_value(int i) { return static_cast<double>(i) * 0.05; }

}  // namespace

FitResult fit_params(const std::vector<DevExample>& examples, const ClusterParams& cluster,
                     double q_window_s) {
    if (examples.empty()) {
        throw ValidationError("fit: empty dev set");
    }

    struct Prepared {
        ClusteringResult clustering;
        std::vector<WindowTerms> windows;
        std::vector<int> true_spk;
    };
    std::vector<Prepared> prepared;
    for (const DevExample& ex : examples) {
        Prepared p;
        p.clustering = assign_outliers(spectral_cluster(ex.session, cluster), ex.session);
        p.true_spk = true_segment_speakers(ex.session, ex.reference);
        for (const auto& w : ex.scores.dialogue_windows) {
            WindowTerms terms;
            terms.z_semantic = w.z_semantic;
            terms.p_s = w.p_s;
            terms.z_acoustic = acoustic_dialogue_flag(p.clustering, w.first_segment, w.last_segment);
            const DispersionStats stats =
                dispersion_stats(p.clustering, ex.session, w.first_segment, w.last_segment);
            terms.d_p = stats.d_p;
            terms.d_q = stats.d_q;
            int distinct = 0;
            for (int id = w.first_segment + 1; id <= w.last_segment && distinct == 0; ++id) {
                if (p.true_spk[static_cast<size_t>(id - 1)] !=
                    p.true_spk[static_cast<size_t>(w.first_segment - 1)]) {
                    distinct = 1;
                }
            }
            terms.truth = distinct;
            p.windows.push_back(terms);
        }
        prepared.push_back(std::move(p));
    }

    FitResult result;

    // Stage 1: (alpha1, alpha2, theta) by window-classification F1.
    double best_f1 = -1.0;
    for (int a1 = 0; a1 <= kGridSteps; ++a1) {
        for (int a2 = 0; a2 <= kGridSteps; ++a2) {
            for (int th = 0; th <= kGridSteps; ++th) {
                const double alpha1 = grid_value(a1), alpha2 = grid_value(a2), theta = grid_value(th);
                long long tp = 0, fp = 0, fn = 0;
                for (const Prepared& p : prepared) {
                    for (const WindowTerms& w : p.windows) {
                        const double za = static_cast<double>(w.z_acoustic);
                        const double zs = static_cast<double>(w.z_semantic);
                        const double s = za * zs + za * (w.p_s + alpha1 * w.d_p) +
                                         zs * (w.p_s + alpha2 * w.d_q);
                        const int pred = s > theta ? 1 : 0;
                        if (pred == 1 && w.truth == 1) ++tp;
                        if (pred == 1 && w.truth == 0) ++fp;
                        if (pred == 0 && w.truth == 1) ++fn;
                    }
                }
                const double f1 = f1_score(tp, fp, fn);
                if (f1 > best_f1) {
                    best_f1 = f1;
                    result.fusion.alpha1 = alpha1;
                    result.fusion.alpha2 = alpha2;
                    result.fusion.theta = theta;
                }
            }
        }
    }
    result.dialogue_f1 = best_f1;

    // Stage 2: readjust with the fitted dialogue parameters, then collect
    // boundary terms with the q surrogate on the adjusted labels.
    std::vector<BoundaryTerms> boundaries;
    for (size_t e = 0; e < examples.size(); ++e) {
        const DevExample& ex = examples[e];
        Prepared& p = prepared[e];
        std::vector<DialogueEvidence> evidence;
        for (size_t wi = 0; wi < ex.scores.dialogue_windows.size(); ++wi) {
            const auto& w = ex.scores.dialogue_windows[wi];
            const WindowTerms& terms = p.windows[wi];
            DialogueEvidence ev;
            ev.first_segment = w.first_segment;
            ev.last_segment = w.last_segment;
            ev.z_semantic = terms.z_semantic;
            ev.z_acoustic = terms.z_acoustic;
            ev.p_s = terms.p_s;
            ev.d_p = terms.d_p;
            ev.d_q = terms.d_q;
            const FuseDialogueResult fused = fuse_dialogue(terms.z_semantic, terms.z_acoustic,
                                                           terms.p_s, terms.d_p, terms.d_q,
                                                           result.fusion);
            ev.s_hat = fused.s_hat;
            ev.z_fused = fused.z_fused;
            evidence.push_back(ev);
        }
        const ClusteringResult adjusted = readjust_windows(p.clustering, evidence, ex.session);

        std::vector<double> p_sem(static_cast<size_t>(std::max(0, ex.session.size() - 1)), 0.0);
        for (const auto& t : ex.scores.turn_probabilities) {
            p_sem[static_cast<size_t>(t.after_segment - 1)] = t.p;
        }
        for (int b = 1; b < ex.session.size(); ++b) {
            BoundaryTerms terms;
            terms.p = p_sem[static_cast<size_t>(b - 1)];
            terms.q = acoustic_turn_prob(adjusted, ex.session, b, q_window_s);
            terms.truth = p.true_spk[static_cast<size_t>(b)] != p.true_spk[static_cast<size_t>(b - 1)] ? 1 : 0;
            boundaries.push_back(terms);
        }
    }

    // Stage 3: (beta1, beta2, turn_threshold) by boundary F1. The threshold
    // grid stays strictly inside (0, 1).
    best_f1 = -1.0;
    for (int b1 = 0; b1 <= kGridSteps; ++b1) {
        for (int b2 = 0; b2 <= kGridSteps; ++b2) {
            if (b1 == 0 && b2 == 0) continue;
            for (int th = 1; th < kGridSteps; ++th) {
                const double beta1 = grid_value(b1), beta2 = grid_value(b2);
                const double threshold = grid_value(th);
                long long tp = 0, fp = 0, fn = 0;
                for (const BoundaryTerms& t : boundaries) {
                    const int pred = beta1 * t.p + beta2 * t.q > threshold ? 1 : 0;
                    if (pred == 1 && t.truth == 1) ++tp;
                    if (pred == 1 && t.truth == 0) ++fp;
                    if (pred == 0 && t.truth == 1) ++fn;
                }
                const double f1 = f1_score(tp, fp, fn);
                if (f1 > best_f1) {
                    best_f1 = f1;
                    result.fusion.beta1 = beta1;
                    result.fusion.beta2 = beta2;
                    result.turn_threshold = threshold;
                }
            }
        }
    }
    result.turn_f1 = best_f1;
    return result;
}

}  // namespace diar
