#include "diarkit/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace diar {

namespace {

std::vector<double> normalized_mean(const std::vector<const std::vector<double>*>& members) {
    std::vector<double> mean(members.front()->size(), 0.0);
    for (const auto* m : members) {
        for (size_t d = 0; d < mean.size(); ++d) mean[d] += (*m)[d];
    }
    for (double& x : mean) x /= static_cast<double>(members.size());
    normalize_embedding(mean);
    return mean;
}

}  // namespace

SpanSequence build_spans(const Session& session, const std::vector<int>& p_stp) {
    const int n = session.size();
    if (static_cast<int>(p_stp.size()) != std::max(0, n - 1)) {
        throw ValidationError("build_spans: p_stp must have one entry per internal boundary");
    }
    SpanSequence out;
    int first = 1;
    for (int i = 1; i <= n; ++i) {
        const bool turn_after = i < n && p_stp[static_cast<size_t>(i - 1)] == 1;
        if (i == n || turn_after) {
            out.spans.emplace_back(first, i);
            first = i + 1;
        }
    }
    for (const auto& [a, b] : out.spans) {
        std::vector<const std::vector<double>*> members;
        for (int id = a; id <= b; ++id) members.push_back(&session.segment(id).embedding);
        out.mean_embeddings.push_back(normalized_mean(members));
    }
    return out;
}

SpanSequence build_singleton_spans(const Session& session) {
    SpanSequence out;
    for (const Segment& seg : session.segments) {
        out.spans.emplace_back(seg.id, seg.id);
        std::vector<double> emb = seg.embedding;
        normalize_embedding(emb);
        out.mean_embeddings.push_back(std::move(emb));
    }
    return out;
}

std::vector<int> semantic_split(const SpanSequence& spans, const std::vector<int>& p_stp,
                                const RefineParams& params, SplitGranularity granularity) {
    const int m = spans.size();
    if (m == 0) {
        throw ValidationError("semantic_split: no spans");
    }

    // Turn flag per internal span boundary. Span boundaries exist exactly at
    // turn points in span mode; in segment mode the flags come from p_stp.
    std::vector<int> turn_flags(static_cast<size_t>(std::max(0, m - 1)), 1);
    if (granularity == SplitGranularity::kSegment) {
        if (static_cast<int>(p_stp.size()) != m - 1) {
            throw ValidationError("semantic_split: segment mode expects singleton spans");
        }
        turn_flags = p_stp;
    }

    std::vector<int> labels(static_cast<size_t>(m), 0);
    labels[0] = 1;
    // Per-speaker running sums over member span embeddings.
    const size_t dim = spans.mean_embeddings.front().size();
    std::vector<std::vector<double>> sums = {spans.mean_embeddings.front()};
    std::vector<int> counts = {1};

    auto speaker_mean = [&](size_t spk) {
        std::vector<double> mean = sums[spk];
        for (double& x : mean) x /= static_cast<double>(counts[spk]);
        normalize_embedding(mean);
        return mean;
    };

    for (int i = 1; i < m; ++i) {
        const auto& e = spans.mean_embeddings[static_cast<size_t>(i)];
        int label;
        if (turn_flags[static_cast<size_t>(i - 1)] == 1) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 1;
            for (size_t spk = 0; spk < sums.size(); ++spk) {
                const double d = cosine_distance(e, speaker_mean(spk));
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(spk) + 1;
                }
            }
            if (best < params.tau_split) {
                label = arg;
            } else {
                sums.emplace_back(dim, 0.0);
                counts.push_back(0);
                label = static_cast<int>(sums.size());
            }
        } else {
            label = labels[static_cast<size_t>(i - 1)];
        }
        labels[static_cast<size_t>(i)] = label;
        auto& sum = sums[static_cast<size_t>(label - 1)];
        for (size_t d = 0; d < dim; ++d) sum[d] += e[d];
        ++counts[static_cast<size_t>(label - 1)];
    }
    return labels;
}

double merge_score_semantic(int speaker_i, int speaker_j, const SpanSequence& spans,
                            const std::vector<int>& labels, const std::vector<double>& p_tilde) {
    if (speaker_i == speaker_j) {
        throw ValidationError("merge_score_semantic: speakers must differ");
    }
    double sum = 0.0;
    int count = 0;
    for (int a = 0; a + 1 < spans.size(); ++a) {
        const int la = labels[static_cast<size_t>(a)];
        const int lb = labels[static_cast<size_t>(a + 1)];
        if ((la == speaker_i && lb == speaker_j) || (la == speaker_j && lb == speaker_i)) {
            const int boundary = spans.spans[static_cast<size_t>(a)].second;  // after this segment
            if (boundary - 1 < 0 || boundary - 1 >= static_cast<int>(p_tilde.size())) {
                throw ValidationError("merge_score_semantic: boundary without fused probability");
            }
            sum += p_tilde[static_cast<size_t>(boundary - 1)] - 0.5;
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

std::vector<int> semantic_merge(const SpanSequence& spans, std::vector<int> labels,
                                const std::vector<double>& p_tilde, const RefineParams& params,
                                std::vector<MergeStep>* trace) {
    if (static_cast<int>(labels.size()) != spans.size()) {
        throw ValidationError("semantic_merge: labels must cover all spans");
    }
    while (true) {
        std::set<int> present(labels.begin(), labels.end());
        if (present.size() <= 1) break;

        // Current per-speaker mean embeddings over member spans.
        std::map<int, std::vector<const std::vector<double>*>> members;
        for (int s = 0; s < spans.size(); ++s) {
            members[labels[static_cast<size_t>(s)]].push_back(
                &spans.mean_embeddings[static_cast<size_t>(s)]);
        }
        std::map<int, std::vector<double>> means;
        for (const auto& [spk, vecs] : members) means[spk] = normalized_mean(vecs);

        bool found = false;
        MergeStep best;
        for (auto it = present.begin(); it != present.end(); ++it) {
            for (auto jt = std::next(it); jt != present.end(); ++jt) {
                const double cost_sim = cosine_distance(means[*it], means[*jt]);
                const double cost_dd = merge_score_semantic(*it, *jt, spans, labels, p_tilde);
                const double cost_all = cost_sim + cost_dd;
                if (!found || cost_all < best.cost_all) {
                    best = MergeStep{*it, *jt, cost_sim, cost_dd, cost_all, 0};
                    found = true;
                }
            }
        }
        if (!found || best.cost_all >= params.tau_merge) break;

        for (int& label : labels) {
            if (label == best.from) label = best.into;
        }
        best.speakers_after = static_cast<int>(present.size()) - 1;
        if (trace != nullptr) trace->push_back(best);
    }
    return labels;
}

DiarizationHypothesis correct_boundaries(const DiarizationHypothesis& hypothesis,
                                         const Session& session,
                                         const std::vector<double>& p_tilde,
                                         double max_shift_s) {
    const int n = session.size();
    if (static_cast<int>(hypothesis.labels.size()) != n) {
        throw ValidationError("correct_boundaries: hypothesis does not cover the session");
    }
    if (static_cast<int>(p_tilde.size()) != std::max(0, n - 1)) {
        throw ValidationError("correct_boundaries: need one fused probability per boundary");
    }
    DiarizationHypothesis out = hypothesis;
    auto boundary_time = [&](int b) {
        return (session.segment(b).end_s + session.segment(b + 1).start_s) / 2.0;
    };
    auto is_change = [&](int b) {
        return out.labels[static_cast<size_t>(b - 1)] != out.labels[static_cast<size_t>(b)];
    };

    std::vector<int> original_changes;
    for (int b = 1; b < n; ++b) {
        if (hypothesis.labels[static_cast<size_t>(b - 1)] != hypothesis.labels[static_cast<size_t>(b)]) {
            original_changes.push_back(b);
        }
    }

    for (int b : original_changes) {
        if (!is_change(b)) continue;
        int prev_change = 0, next_change = n;
        for (int m = b - 1; m >= 1; --m) {
            if (is_change(m)) {
                prev_change = m;
                break;
            }
        }
        for (int m = b + 1; m < n; ++m) {
            if (is_change(m)) {
                next_change = m;
                break;
            }
        }
        const double t = boundary_time(b);
        int best = -1;
        for (int m = prev_change + 1; m < next_change; ++m) {
            if (m == b || m < 1 || m >= n) continue;
            if (std::abs(boundary_time(m) - t) > max_shift_s) continue;
            if (!(p_tilde[static_cast<size_t>(m - 1)] > p_tilde[static_cast<size_t>(b - 1)])) continue;
            if (best < 0) {
                best = m;
                continue;
            }
            const double pm = p_tilde[static_cast<size_t>(m - 1)];
            const double pb = p_tilde[static_cast<size_t>(best - 1)];
            if (pm > pb || (pm == pb && (std::abs(m - b) < std::abs(best - b) ||
                                         (std::abs(m - b) == std::abs(best - b) && m < best)))) {
                best = m;
            }
        }
        if (best < 0) continue;
        const int left_label = out.labels[static_cast<size_t>(b - 1)];
        const int right_label = out.labels[static_cast<size_t>(b)];
        if (best > b) {
            for (int id = b + 1; id <= best; ++id) out.labels[static_cast<size_t>(id - 1)] = left_label;
        } else {
            for (int id = best + 1; id <= b; ++id) out.labels[static_cast<size_t>(id - 1)] = right_label;
        }
    }
    return out;
}

namespace {

std::vector<double> semantic_turn_probs(const SemanticScores& scores, int n) {
    std::vector<double> p(static_cast<size_t>(std::max(0, n - 1)), 0.0);
    for (const auto& t : scores.turn_probabilities) {
        p[static_cast<size_t>(t.after_segment - 1)] = t.p;
    }
    return p;
}

}  // namespace

PipelineResult run_pipeline_detailed(const Session& session, const SemanticScores* scores,
                                     const PipelineParams& params) {
    params.fusion.validate();
    params.refine.validate();

    PipelineResult result;
    result.clustering = assign_outliers(spectral_cluster(session, params.cluster), session);

    if (params.mode == Mode::kAcoustic) {
        result.adjusted_clustering = result.clustering;
        result.hypothesis =
            canonicalize_labels(DiarizationHypothesis{session.session_id, result.clustering.labels});
        return result;
    }

    if (scores == nullptr || scores->dialogue_windows.empty() ||
        (session.size() > 1 && scores->turn_probabilities.empty())) {
        throw ConfigError("semantic scores are empty or missing; use acoustic-only mode");
    }

    // Dialogue evidence from the clustered labels.
    for (const auto& w : scores->dialogue_windows) {
        DialogueEvidence e;
        e.first_segment = w.first_segment;
        e.last_segment = w.last_segment;
        e.z_semantic = w.z_semantic;
        e.p_s = w.p_s;
        e.z_acoustic = acoustic_dialogue_flag(result.clustering, w.first_segment, w.last_segment);
        const DispersionStats stats =
            dispersion_stats(result.clustering, session, w.first_segment, w.last_segment);
        e.d_p = stats.d_p;
        e.d_q = stats.d_q;
        if (params.mode == Mode::kMultimodal) {
            const FuseDialogueResult fused =
                fuse_dialogue(e.z_semantic, e.z_acoustic, e.p_s, e.d_p, e.d_q, params.fusion);
            e.s_hat = fused.s_hat;
            e.z_fused = fused.z_fused;
        } else {
            // Semantic mode: the sub-task verdict is the semantic one.
            e.s_hat = e.p_s;
            e.z_fused = e.z_semantic;
        }
        result.fused.dialogue.push_back(e);
    }

    result.adjusted_clustering = readjust_windows(result.clustering, result.fused.dialogue, session);

    // Turn evidence; the q_n surrogate reads the readjusted labels so window
    // corrections propagate into the fused turn sequence.
    FusionParams turn_params = params.fusion;
    if (params.mode == Mode::kSemantic) {
        turn_params.beta1 = 1.0;
        turn_params.beta2 = 0.0;
    }
    const std::vector<double> p_sem = semantic_turn_probs(*scores, session.size());
    std::vector<double> p_tilde(p_sem.size(), 0.0);
    for (int b = 1; b < session.size(); ++b) {
        TurnEvidence t;
        t.boundary_after_segment = b;
        t.p_semantic = p_sem[static_cast<size_t>(b - 1)];
        t.q_acoustic = acoustic_turn_prob(result.adjusted_clustering, session, b,
                                          params.q_window_s, params.external_turn_probs);
        t.p_fused = fuse_turn(t.p_semantic, t.q_acoustic, turn_params);
        p_tilde[static_cast<size_t>(b - 1)] = t.p_fused;
        result.fused.turns.push_back(t);
    }
    result.fused.p_stp = binarize_turns(result.fused.turns, params.refine);

    if (params.granularity == SplitGranularity::kSpan) {
        result.spans = build_spans(session, result.fused.p_stp);
    } else {
        result.spans = build_singleton_spans(session);
    }
    result.span_labels =
        semantic_split(result.spans, result.fused.p_stp, params.refine, params.granularity);
    result.span_labels =
        semantic_merge(result.spans, result.span_labels, p_tilde, params.refine);

    std::vector<int> segment_labels(static_cast<size_t>(session.size()), 0);
    for (int s = 0; s < result.spans.size(); ++s) {
        const auto& [first, last] = result.spans.spans[static_cast<size_t>(s)];
        for (int id = first; id <= last; ++id) {
            segment_labels[static_cast<size_t>(id - 1)] = result.span_labels[static_cast<size_t>(s)];
        }
    }
    DiarizationHypothesis hyp{session.session_id, segment_labels};
    hyp = correct_boundaries(hyp, session, p_tilde, params.max_shift_s);
    result.hypothesis = canonicalize_labels(hyp);
    return result;
}

DiarizationHypothesis run_pipeline(const Session& session, const SemanticScores* scores,
                                   const PipelineParams& params) {
    return run_pipeline_detailed(session, scores, params).hypothesis;
}

}  // namespace diar
