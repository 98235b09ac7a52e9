#include "diarkit/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>

namespace diar {

namespace {

enum Op : uint8_t { kOpNone = 0, kOpDiag, kOpDel, kOpIns };

// Full Levenshtein DP keeping the op table for traceback. Tie preference at
// each cell: deletion > insertion > diagonal.
AlignmentCounts align_tokens(const std::vector<std::string>& ref,
                             const std::vector<std::string>& hyp) {
    const size_t R = ref.size(), H = hyp.size();
    std::vector<long long> prev(H + 1), cur(H + 1);
    std::vector<uint8_t> ops((R + 1) * (H + 1), kOpNone);
    auto op_at = [&](size_t i, size_t j) -> uint8_t& { return ops[i * (H + 1) + j]; };

    for (size_t j = 1; j <= H; ++j) {
        prev[j] = static_cast<long long>(j);
        op_at(0, j) = kOpIns;
    }
    for (size_t i = 1; i <= R; ++i) {
        cur[0] = static_cast<long long>(i);
        op_at(i, 0) = kOpDel;
        for (size_t j = 1; j <= H; ++j) {
            const long long del = prev[j] + 1;
            const long long ins = cur[j - 1] + 1;
            const long long diag = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            const long long best = std::min({del, ins, diag});
            cur[j] = best;
            if (del == best) {
                op_at(i, j) = kOpDel;
            } else if (ins == best) {
                op_at(i, j) = kOpIns;
            } else {
                op_at(i, j) = kOpDiag;
            }
        }
        std::swap(prev, cur);
    }

    AlignmentCounts counts;
    counts.n_total = static_cast<long long>(R);
    size_t i = R, j = H;
    while (i > 0 || j > 0) {
        switch (op_at(i, j)) {
            case kOpDel:
                ++counts.n_del;
                --i;
                break;
            case kOpIns:
                ++counts.n_ins;
                --j;
                break;
            default:
                if (ref[i - 1] != hyp[j - 1]) ++counts.n_subs;
                --i;
                --j;
                break;
        }
    }
    return counts;
}

// Distance-only two-row DP used for pairwise cost matrices.
long long token_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<long long> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0LL);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<long long>(i);
        for (size_t j = 1; j <= m; ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

struct SpeakerGroups {
    std::vector<std::string> speakers;  // order of first appearance
    std::vector<std::vector<std::string>> tokens;
    long long total_words = 0;

    int index_of(const std::string& spk) const {
        for (size_t i = 0; i < speakers.size(); ++i) {
            if (speakers[i] == spk) return static_cast<int>(i);
        }
        return -1;
    }
};

SpeakerGroups group_by_speaker(const std::vector<SpeakerWord>& words) {
    SpeakerGroups g;
    for (const auto& w : words) {
        int idx = g.index_of(w.speaker);
        if (idx < 0) {
            idx = static_cast<int>(g.speakers.size());
            g.speakers.push_back(w.speaker);
            g.tokens.emplace_back();
        }
        g.tokens[static_cast<size_t>(idx)].push_back(w.token);
        ++g.total_words;
    }
    return g;
}

// Enumerates every injective map from {0..n_small-1} into {0..n_large-1} in
// lexicographic order of the target vector.
void for_each_injective(int n_small, int n_large,
                        const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> map(static_cast<size_t>(n_small), -1);
    std::vector<char> used(static_cast<size_t>(n_large), 0);
    std::function<void(int)> rec = [&](int pos) {
        if (pos == n_small) {
            fn(map);
            return;
        }
        for (int t = 0; t < n_large; ++t) {
            if (used[static_cast<size_t>(t)]) continue;
            used[static_cast<size_t>(t)] = 1;
            map[static_cast<size_t>(pos)] = t;
            rec(pos + 1);
            used[static_cast<size_t>(t)] = 0;
        }
    };
    rec(0);
}

// Min-cost assignment (Kuhn-Munkres with potentials) on an n x m matrix,
// n <= m. Returns row -> column.
std::vector<int> hungarian_assign(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(a[0].size());
    const double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(m) + 1, 0), way(static_cast<size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(m) + 1, kInf);
        std::vector<char> used(static_cast<size_t>(m) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            int i0 = p[static_cast<size_t>(j0)], j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                double curc = a[static_cast<size_t>(i0) - 1][static_cast<size_t>(j) - 1] -
                              u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (curc < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = curc;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (p[static_cast<size_t>(j)] > 0) {
            row_to_col[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
        }
    }
    return row_to_col;
}

// (hyp index, ref index) pairs of one candidate speaker mapping.
using Pairs = std::vector<std::pair<int, int>>;

// Candidate mappings between hypothesis and reference speakers: exhaustive
// over injective maps of the smaller side up to 8 speakers, Hungarian on the
// pairwise concatenated-distance matrix above.
std::vector<Pairs> candidate_mappings(const SpeakerGroups& rg, const SpeakerGroups& hg,
                                      const std::vector<std::vector<long long>>& dist,
                                      bool* approximate) {
    const int R = static_cast<int>(rg.speakers.size());
    const int H = static_cast<int>(hg.speakers.size());
    std::vector<Pairs> out;
    *approximate = std::max(R, H) > 8;
    if (!*approximate) {
        if (H <= R) {
            for_each_injective(H, R, [&](const std::vector<int>& map) {
                Pairs pairs;
                for (int h = 0; h < H; ++h) pairs.emplace_back(h, map[static_cast<size_t>(h)]);
                out.push_back(std::move(pairs));
            });
        } else {
            for_each_injective(R, H, [&](const std::vector<int>& map) {
                Pairs pairs;
                for (int r = 0; r < R; ++r) pairs.emplace_back(map[static_cast<size_t>(r)], r);
                out.push_back(std::move(pairs));
            });
        }
        return out;
    }
    // Hungarian regime: one mapping minimizing summed pair distances.
    Pairs pairs;
    if (H <= R) {
        std::vector<std::vector<double>> cost(static_cast<size_t>(H),
                                              std::vector<double>(static_cast<size_t>(R)));
        for (int h = 0; h < H; ++h)
            for (int r = 0; r < R; ++r)
                cost[static_cast<size_t>(h)][static_cast<size_t>(r)] =
                    static_cast<double>(dist[static_cast<size_t>(h)][static_cast<size_t>(r)]);
        auto assign = hungarian_assign(cost);
        for (int h = 0; h < H; ++h) pairs.emplace_back(h, assign[static_cast<size_t>(h)]);
    } else {
        std::vector<std::vector<double>> cost(static_cast<size_t>(R),
                                              std::vector<double>(static_cast<size_t>(H)));
        for (int r = 0; r < R; ++r)
            for (int h = 0; h < H; ++h)
                cost[static_cast<size_t>(r)][static_cast<size_t>(h)] =
                    static_cast<double>(dist[static_cast<size_t>(h)][static_cast<size_t>(r)]);
        auto assign = hungarian_assign(cost);
        for (int r = 0; r < R; ++r) pairs.emplace_back(assign[static_cast<size_t>(r)], r);
    }
    out.push_back(std::move(pairs));
    return out;
}

struct MappingScore {
    long long err = 0;
    long long n_total = 0;
    double e = 0.0;
};

MappingScore score_mapping(const Pairs& pairs, const SpeakerGroups& rg, const SpeakerGroups& hg,
                           const std::vector<std::vector<long long>>& dist, CpVariant variant) {
    const int R = static_cast<int>(rg.speakers.size());
    const int H = static_cast<int>(hg.speakers.size());
    std::vector<char> ref_matched(static_cast<size_t>(R), 0), hyp_matched(static_cast<size_t>(H), 0);
    MappingScore s;
    for (auto [h, r] : pairs) {
        s.err += dist[static_cast<size_t>(h)][static_cast<size_t>(r)];
        ref_matched[static_cast<size_t>(r)] = 1;
        hyp_matched[static_cast<size_t>(h)] = 1;
    }
    if (variant == CpVariant::kMatched) {
        for (int r = 0; r < R; ++r) {
            if (ref_matched[static_cast<size_t>(r)]) {
                s.n_total += static_cast<long long>(rg.tokens[static_cast<size_t>(r)].size());
            }
        }
        s.e = s.n_total > 0 ? static_cast<double>(s.err) / static_cast<double>(s.n_total) : 0.0;
    } else {
        for (int r = 0; r < R; ++r) {
            if (!ref_matched[static_cast<size_t>(r)]) {
                s.err += static_cast<long long>(rg.tokens[static_cast<size_t>(r)].size());
            }
        }
        for (int h = 0; h < H; ++h) {
            if (!hyp_matched[static_cast<size_t>(h)]) {
                s.err += static_cast<long long>(hg.tokens[static_cast<size_t>(h)].size());
            }
        }
        s.n_total = rg.total_words;
        s.e = static_cast<double>(s.err) / static_cast<double>(s.n_total);
    }
    return s;
}

}  // namespace

WerResult wer(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis) {
    if (reference.empty()) {
        throw ValidationError("wer: empty reference");
    }
    WerResult out;
    out.counts = align_tokens(reference, hypothesis);
    out.e_wer = static_cast<double>(out.counts.edits()) / static_cast<double>(out.counts.n_total);
    return out;
}

CpwerResult cpwer(const std::vector<SpeakerWord>& reference,
                  const std::vector<SpeakerWord>& hypothesis, CpVariant variant) {
    if (reference.empty()) {
        throw ValidationError("cpwer: empty reference");
    }
    const SpeakerGroups rg = group_by_speaker(reference);
    const SpeakerGroups hg = group_by_speaker(hypothesis);
    const int R = static_cast<int>(rg.speakers.size());
    const int H = static_cast<int>(hg.speakers.size());

    CpwerResult out;
    if (H == 0) {
        // Empty hypothesis: nothing to match. All reference words count as
        // deletions in the `all` variant; the matched variant has an empty
        // denominator and reports 0 by convention.
        out.counts.n_total = variant == CpVariant::kAll ? rg.total_words : 0;
        out.counts.n_del = variant == CpVariant::kAll ? rg.total_words : 0;
        out.e = variant == CpVariant::kAll ? 1.0 : 0.0;
        return out;
    }

    std::vector<std::vector<long long>> dist(static_cast<size_t>(H),
                                             std::vector<long long>(static_cast<size_t>(R)));
    for (int h = 0; h < H; ++h) {
        for (int r = 0; r < R; ++r) {
            dist[static_cast<size_t>(h)][static_cast<size_t>(r)] =
                token_distance(rg.tokens[static_cast<size_t>(r)], hg.tokens[static_cast<size_t>(h)]);
        }
    }

    const auto mappings = candidate_mappings(rg, hg, dist, &out.approximate);
    const Pairs* best = nullptr;
    MappingScore best_score;
    for (const auto& pairs : mappings) {
        MappingScore s = score_mapping(pairs, rg, hg, dist, variant);
        if (best == nullptr || s.e < best_score.e) {
            best = &pairs;
            best_score = s;
        }
    }

    out.e = best_score.e;
    for (auto [h, r] : *best) {
        out.mapping[hg.speakers[static_cast<size_t>(h)]] = rg.speakers[static_cast<size_t>(r)];
    }

    // Detailed counts for the winning mapping.
    std::vector<char> ref_matched(static_cast<size_t>(R), 0), hyp_matched(static_cast<size_t>(H), 0);
    for (auto [h, r] : *best) {
        AlignmentCounts c = align_tokens(rg.tokens[static_cast<size_t>(r)], hg.tokens[static_cast<size_t>(h)]);
        out.counts.n_ins += c.n_ins;
        out.counts.n_subs += c.n_subs;
        out.counts.n_del += c.n_del;
        ref_matched[static_cast<size_t>(r)] = 1;
        hyp_matched[static_cast<size_t>(h)] = 1;
    }
    if (variant == CpVariant::kMatched) {
        out.counts.n_total = best_score.n_total;
    } else {
        for (int r = 0; r < R; ++r) {
            if (!ref_matched[static_cast<size_t>(r)]) {
                out.counts.n_del += static_cast<long long>(rg.tokens[static_cast<size_t>(r)].size());
            }
        }
        for (int h = 0; h < H; ++h) {
            if (!hyp_matched[static_cast<size_t>(h)]) {
                out.counts.n_ins += static_cast<long long>(hg.tokens[static_cast<size_t>(h)].size());
            }
        }
        out.counts.n_total = rg.total_words;
    }
    return out;
}

SpeakerWerResult speaker_wer(const std::vector<SpeakerWord>& reference,
                             const std::vector<SpeakerWord>& hypothesis) {
    if (reference.empty()) {
        throw ValidationError("speaker_wer: empty reference");
    }
    const SpeakerGroups rg = group_by_speaker(reference);
    const SpeakerGroups hg = group_by_speaker(hypothesis);
    const int R = static_cast<int>(rg.speakers.size());
    const int H = static_cast<int>(hg.speakers.size());
    const size_t RW = reference.size(), HW = hypothesis.size();

    SpeakerWerResult out;
    out.n_total = static_cast<long long>(RW);
    if (HW == 0) {
        return out;  // all deletions, no speaker-modify operations
    }

    std::vector<int> ref_spk(RW);
    for (size_t i = 0; i < RW; ++i) ref_spk[i] = rg.index_of(reference[i].speaker);
    std::vector<int> hyp_spk(HW);
    for (size_t j = 0; j < HW; ++j) hyp_spk[j] = hg.index_of(hypothesis[j].speaker);

    // Lexicographic (token edits, speaker mods) encoded into one integer.
    const long long K = static_cast<long long>(RW + HW + 1);
    auto run_dp = [&](const std::vector<int>& hyp_to_ref) -> long long {
        std::vector<long long> prev(HW + 1), cur(HW + 1);
        for (size_t j = 0; j <= HW; ++j) prev[j] = static_cast<long long>(j) * K;
        for (size_t i = 1; i <= RW; ++i) {
            cur[0] = static_cast<long long>(i) * K;
            const int rs = ref_spk[i - 1];
            const std::string& rt = reference[i - 1].token;
            for (size_t j = 1; j <= HW; ++j) {
                long long diag = prev[j - 1];
                if (rt != hypothesis[j - 1].token) {
                    diag += K;  // substitution
                } else if (hyp_to_ref[static_cast<size_t>(hyp_spk[j - 1])] != rs) {
                    diag += 1;  // speaker-modify
                }
                cur[j] = std::min({prev[j] + K, cur[j - 1] + K, diag});
            }
            std::swap(prev, cur);
        }
        return prev[HW];
    };

    long long best = -1;
    std::vector<int> best_map;
    auto consider = [&](const std::vector<int>& hyp_to_ref) {
        long long c = run_dp(hyp_to_ref);
        if (best < 0 || c < best) {
            best = c;
            best_map = hyp_to_ref;
        }
    };

    out.approximate = std::max(R, H) > 8;
    if (!out.approximate) {
        if (H <= R) {
            for_each_injective(H, R, [&](const std::vector<int>& map) { consider(map); });
        } else {
            for_each_injective(R, H, [&](const std::vector<int>& map) {
                std::vector<int> hyp_to_ref(static_cast<size_t>(H), -1);
                for (int r = 0; r < R; ++r) hyp_to_ref[static_cast<size_t>(map[static_cast<size_t>(r)])] = r;
                consider(hyp_to_ref);
            });
        }
    } else {
        // Reuse the cpwer pairing as the single candidate mapping.
        std::vector<std::vector<long long>> dist(static_cast<size_t>(H),
                                                 std::vector<long long>(static_cast<size_t>(R)));
        for (int h = 0; h < H; ++h)
            for (int r = 0; r < R; ++r)
                dist[static_cast<size_t>(h)][static_cast<size_t>(r)] = token_distance(
                    rg.tokens[static_cast<size_t>(r)], hg.tokens[static_cast<size_t>(h)]);
        bool approx = false;
        auto mappings = candidate_mappings(rg, hg, dist, &approx);
        std::vector<int> hyp_to_ref(static_cast<size_t>(H), -1);
        for (auto [h, r] : mappings.front()) hyp_to_ref[static_cast<size_t>(h)] = r;
        consider(hyp_to_ref);
    }

    out.n_spk_cost = best % K;
    out.e = static_cast<double>(out.n_spk_cost) / static_cast<double>(out.n_total);
    for (int h = 0; h < H; ++h) {
        int r = best_map[static_cast<size_t>(h)];
        if (r >= 0) {
            out.mapping[hg.speakers[static_cast<size_t>(h)]] = rg.speakers[static_cast<size_t>(r)];
        }
    }
    return out;
}

double brute_force_cpwer_oracle(const std::vector<SpeakerWord>& reference,
                                const std::vector<SpeakerWord>& hypothesis, CpVariant variant) {
    if (reference.empty()) {
        throw ValidationError("oracle: empty reference");
    }
    if (reference.size() > 30 || hypothesis.size() > 30) {
        throw ValidationError("oracle: word limit exceeded (<= 30 per side)");
    }
    // Independent grouping pass.
    std::vector<std::string> rspk, hspk;
    std::vector<std::vector<std::string>> rtok, htok;
    auto add = [](std::vector<std::string>& spk, std::vector<std::vector<std::string>>& tok,
                  const SpeakerWord& w) {
        for (size_t i = 0; i < spk.size(); ++i) {
            if (spk[i] == w.speaker) {
                tok[i].push_back(w.token);
                return;
            }
        }
        spk.push_back(w.speaker);
        tok.push_back({w.token});
    };
    for (const auto& w : reference) add(rspk, rtok, w);
    for (const auto& w : hypothesis) add(hspk, htok, w);
    if (rspk.size() > 5 || hspk.size() > 5) {
        throw ValidationError("oracle: speaker limit exceeded (<= 5 per side)");
    }

    // Plain recursive edit distance with memoization, written apart from the
    // production DP on purpose.
    std::function<long long(const std::vector<std::string>&, const std::vector<std::string>&,
                            size_t, size_t, std::vector<long long>&)>
        ed = [&](const std::vector<std::string>& a, const std::vector<std::string>& b, size_t i,
                 size_t j, std::vector<long long>& memo) -> long long {
        if (i == a.size()) return static_cast<long long>(b.size() - j);
        if (j == b.size()) return static_cast<long long>(a.size() - i);
        long long& slot = memo[i * (b.size() + 1) + j];
        if (slot >= 0) return slot;
        long long r = ed(a, b, i + 1, j, memo) + 1;
        r = std::min(r, ed(a, b, i, j + 1, memo) + 1);
        r = std::min(r, ed(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1));
        slot = r;
        return r;
    };
    auto edit_distance = [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        std::vector<long long> memo((a.size() + 1) * (b.size() + 1), -1);
        return ed(a, b, 0, 0, memo);
    };

    long long total_ref = 0;
    for (const auto& t : rtok) total_ref += static_cast<long long>(t.size());

    double best = -1.0;
    auto evaluate_map = [&](const std::vector<int>& hyp_to_ref) {
        long long err = 0;
        long long matched_total = 0;
        std::vector<char> ref_used(rspk.size(), 0);
        for (size_t h = 0; h < hspk.size(); ++h) {
            int r = hyp_to_ref[h];
            if (r < 0) {
                if (variant == CpVariant::kAll) err += static_cast<long long>(htok[h].size());
                continue;
            }
            err += edit_distance(rtok[static_cast<size_t>(r)], htok[h]);
            ref_used[static_cast<size_t>(r)] = 1;
            matched_total += static_cast<long long>(rtok[static_cast<size_t>(r)].size());
        }
        for (size_t r = 0; r < rspk.size(); ++r) {
            if (!ref_used[r] && variant == CpVariant::kAll) {
                err += static_cast<long long>(rtok[r].size());
            }
        }
        double e;
        if (variant == CpVariant::kMatched) {
            e = matched_total > 0 ? static_cast<double>(err) / static_cast<double>(matched_total) : 0.0;
        } else {
            e = static_cast<double>(err) / static_cast<double>(total_ref);
        }
        if (best < 0.0 || e < best) best = e;
    };

    const size_t Hn = hspk.size(), Rn = rspk.size();
    if (Hn == 0) {
        return variant == CpVariant::kAll ? 1.0 : 0.0;
    }
    // Permutation-based enumeration of maximal injective maps.
    if (Hn <= Rn) {
        std::vector<int> idx(Rn);
        std::iota(idx.begin(), idx.end(), 0);
        do {
            std::vector<int> hyp_to_ref(Hn);
            for (size_t h = 0; h < Hn; ++h) hyp_to_ref[h] = idx[h];
            evaluate_map(hyp_to_ref);
        } while (std::next_permutation(idx.begin(), idx.end()));
    } else {
        std::vector<int> idx(Hn);
        std::iota(idx.begin(), idx.end(), 0);
        do {
            std::vector<int> hyp_to_ref(Hn, -1);
            for (size_t r = 0; r < Rn; ++r) hyp_to_ref[static_cast<size_t>(idx[r])] = static_cast<int>(r);
            evaluate_map(hyp_to_ref);
        } while (std::next_permutation(idx.begin(), idx.end()));
    }
    return best;
}

MetricsReport evaluate(const std::vector<SpeakerWord>& reference,
                       const std::vector<SpeakerWord>& hypothesis, const std::string& session_id) {
    MetricsReport report;
    report.session_id = session_id;

    std::vector<std::string> ref_tokens, hyp_tokens;
    ref_tokens.reserve(reference.size());
    hyp_tokens.reserve(hypothesis.size());
    for (const auto& w : reference) ref_tokens.push_back(w.token);
    for (const auto& w : hypothesis) hyp_tokens.push_back(w.token);

    WerResult w = wer(ref_tokens, hyp_tokens);
    report.e_wer = w.e_wer;
    report.wer_counts = w.counts;

    CpwerResult matched = cpwer(reference, hypothesis, CpVariant::kMatched);
    CpwerResult all = cpwer(reference, hypothesis, CpVariant::kAll);
    report.e_cp_matched = matched.e;
    report.e_cp_all = all.e;
    report.cp_matched_counts = matched.counts;
    report.cp_all_counts = all.counts;
    report.best_permutation = matched.mapping;

    SpeakerWerResult s = speaker_wer(reference, hypothesis);
    report.e_speaker_wer = s.e;
    report.n_spk_cost = s.n_spk_cost;
    report.spk_n_total = s.n_total;
    report.approximate = matched.approximate || all.approximate || s.approximate;
    return report;
}

MetricsReport aggregate_reports(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) {
        throw ValidationError("aggregate: no reports");
    }
    MetricsReport agg;
    agg.session_id = "aggregate";
    for (const auto& r : reports) {
        agg.wer_counts.n_ins += r.wer_counts.n_ins;
        agg.wer_counts.n_subs += r.wer_counts.n_subs;
        agg.wer_counts.n_del += r.wer_counts.n_del;
        agg.wer_counts.n_total += r.wer_counts.n_total;
        agg.cp_matched_counts.n_ins += r.cp_matched_counts.n_ins;
        agg.cp_matched_counts.n_subs += r.cp_matched_counts.n_subs;
        agg.cp_matched_counts.n_del += r.cp_matched_counts.n_del;
        agg.cp_matched_counts.n_total += r.cp_matched_counts.n_total;
        agg.cp_all_counts.n_ins += r.cp_all_counts.n_ins;
        agg.cp_all_counts.n_subs += r.cp_all_counts.n_subs;
        agg.cp_all_counts.n_del += r.cp_all_counts.n_del;
        agg.cp_all_counts.n_total += r.cp_all_counts.n_total;
        agg.n_spk_cost += r.n_spk_cost;
        agg.spk_n_total += r.spk_n_total;
        agg.approximate = agg.approximate || r.approximate;
    }
    auto ratio = [](long long err, long long total) {
        return total > 0 ? static_cast<double>(err) / static_cast<double>(total) : 0.0;
    };
    agg.e_wer = ratio(agg.wer_counts.edits(), agg.wer_counts.n_total);
    agg.e_cp_matched = ratio(agg.cp_matched_counts.edits(), agg.cp_matched_counts.n_total);
    agg.e_cp_all = ratio(agg.cp_all_counts.edits(), agg.cp_all_counts.n_total);
    agg.e_speaker_wer = ratio(agg.n_spk_cost, agg.spk_n_total);
    return agg;
}

}  // namespace diar
