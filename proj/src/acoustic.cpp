#include "diarkit/acoustic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rng.hpp"

namespace diar {

namespace {

constexpr double kDamping = 0.01;

double pair_affinity(const std::vector<double>& a, const std::vector<double>& b) {
    const double cos = 1.0 - cosine_distance(a, b);
    return (1.0 + cos) / 2.0;
}

// Linear-interpolation percentile (numpy convention) over all row entries.
double row_percentile(std::vector<double> row, double q) {
    std::sort(row.begin(), row.end());
    const double rank = q * static_cast<double>(row.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(rank));
    if (lo + 1 >= row.size()) return row.back();
    const double frac = rank - static_cast<double>(lo);
    return row[lo] + frac * (row[lo + 1] - row[lo]);
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd deg = a.rowwise().sum();
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        inv_sqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
    }
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n) -
                        inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
    // Keep the eigensolver input exactly symmetric.
    return (l + l.transpose()) / 2.0;
}

struct KmeansResult {
    std::vector<int> assign;
    double inertia = std::numeric_limits<double>::infinity();
};

double sq_dist(const Eigen::MatrixXd& x, Eigen::Index row, const Eigen::RowVectorXd& c) {
    return (x.row(row) - c).squaredNorm();
}

KmeansResult kmeans_once(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd centers(k, x.cols());

    // k-means++ seeding.
    std::vector<double> d2(static_cast<size_t>(n), 0.0);
    const Eigen::Index first = rng.uniform_int(0, static_cast<int>(n) - 1);
    centers.row(0) = x.row(first);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int cc = 0; cc < c; ++cc) {
                best = std::min(best, sq_dist(x, i, centers.row(cc)));
            }
            d2[static_cast<size_t>(i)] = best;
            total += best;
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        } else {
            pick = rng.uniform_int(0, static_cast<int>(n) - 1);
        }
        centers.row(c) = x.row(pick);
    }

    KmeansResult res;
    res.assign.assign(static_cast<size_t>(n), 0);
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 300; ++iter) {
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(x, i, centers.row(c));
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            res.assign[static_cast<size_t>(i)] = arg;
            inertia += best;
        }

        // Repair empty clusters with the point farthest from its center.
        std::vector<int> counts(static_cast<size_t>(k), 0);
        for (int a : res.assign) ++counts[static_cast<size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) continue;
            Eigen::Index far = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[static_cast<size_t>(res.assign[static_cast<size_t>(i)])] <= 1) continue;
                const double d = sq_dist(x, i, centers.row(res.assign[static_cast<size_t>(i)]));
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[static_cast<size_t>(res.assign[static_cast<size_t>(far)])];
            res.assign[static_cast<size_t>(far)] = c;
            ++counts[static_cast<size_t>(c)];
        }

        centers.setZero();
        std::vector<int> sizes(static_cast<size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            centers.row(res.assign[static_cast<size_t>(i)]) += x.row(i);
            ++sizes[static_cast<size_t>(res.assign[static_cast<size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<size_t>(c)] > 0) {
                centers.row(c) /= static_cast<double>(sizes[static_cast<size_t>(c)]);
            }
        }

        res.inertia = inertia;
        if (prev_inertia < std::numeric_limits<double>::infinity()) {
            const double rel = std::abs(prev_inertia - inertia) /
                               std::max(prev_inertia, std::numeric_limits<double>::min());
            if (rel < 1e-6) break;
        }
        prev_inertia = inertia;
    }
    return res;
}

std::vector<int> kmeans(const Eigen::MatrixXd& x, int k, uint64_t seed) {
    Rng rng(seed);
    KmeansResult best;
    for (int restart = 0; restart < 50; ++restart) {
        KmeansResult r = kmeans_once(x, k, rng);
        if (r.inertia < best.inertia) best = std::move(r);
        if (best.inertia < 1e-15) break;
    }
    return best.assign;
}

}  // namespace

double ClusterParams::resolved_p_percentile(int n_clusterable) const {
    if (p_percentile) return *p_percentile;
    if (n_clusterable <= 1) return 0.5;
    // Keep roughly a dozen strong neighbors per row, fewer on tiny sessions.
    const int keep = std::min(12, std::max(2, n_clusterable / 3));
    const double auto_p = 1.0 - static_cast<double>(keep) / static_cast<double>(n_clusterable);
    return std::clamp(auto_p, 0.5, 0.95);
}

AffinityMatrix build_affinity(const Session& session, double min_segment_s) {
    AffinityMatrix out;
    for (const Segment& seg : session.segments) {
        if (seg.duration() >= min_segment_s) {
            out.segment_ids.push_back(seg.id);
        }
    }
    if (out.segment_ids.empty()) {
        throw ValidationError("build_affinity: no segment of duration >= " +
                              std::to_string(min_segment_s) + "s");
    }
    const int n = out.size();
    out.values.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        const auto& ei = session.segment(out.segment_ids[static_cast<size_t>(i)]).embedding;
        for (int j = i + 1; j < n; ++j) {
            const auto& ej = session.segment(out.segment_ids[static_cast<size_t>(j)]).embedding;
            const double a = pair_affinity(ei, ej);
            out.values(i, j) = a;
            out.values(j, i) = a;
        }
    }
    return out;
}

AffinityMatrix refine_affinity(const AffinityMatrix& a, double p_percentile) {
    if (!(p_percentile > 0.0 && p_percentile < 1.0)) {
        throw ValidationError("refine_affinity: p_percentile must be in (0, 1)");
    }
    const int n = a.size();
    Eigen::MatrixXd m = a.values;
    for (int i = 0; i < n; ++i) {
        std::vector<double> row(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = a.values(i, j);
        const double thr = row_percentile(row, p_percentile);
        for (int j = 0; j < n; ++j) {
            if (a.values(i, j) < thr) m(i, j) *= kDamping;
        }
    }
    AffinityMatrix out;
    out.segment_ids = a.segment_ids;
    out.values = (m + m.transpose()) / 2.0;
    for (int i = 0; i < n; ++i) out.values(i, i) = 1.0;
    return out;
}

int estimate_speaker_count(const AffinityMatrix& a, int k_max) {
    const int n = a.size();
    if (n < 1 || k_max < 1 || k_max > n) {
        throw ValidationError("estimate_speaker_count: need 1 <= k_max <= N");
    }
    if (n == 1) return 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normalized_laplacian(a.values));
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    int best_i = 1;
    double best_gap = -1.0;
    for (int i = 1; i < std::min(k_max, n); ++i) {
        const double gap = ev(i) - ev(i - 1);  // lambda_{i+1} - lambda_i, 1-based
        if (gap > best_gap) {
            best_gap = gap;
            best_i = i;
        }
    }
    return best_i;
}

ClusteringResult spectral_cluster(const Session& session, const ClusterParams& params) {
    AffinityMatrix affinity = build_affinity(session, params.min_segment_s);
    const int n = affinity.size();
    AffinityMatrix refined = n > 1 ? refine_affinity(affinity, params.resolved_p_percentile(n))
                                   : affinity;

    int k;
    if (params.k_fixed) {
        k = *params.k_fixed;
        if (k < 1 || k > n) {
            throw ValidationError("spectral_cluster: k_fixed must be in [1, N]");
        }
    } else {
        k = estimate_speaker_count(refined, std::min(params.k_max, n));
    }

    std::vector<int> cluster_labels(static_cast<size_t>(n), 1);
    if (k > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normalized_laplacian(refined.values));
        Eigen::MatrixXd embed = es.eigenvectors().leftCols(k);
        for (int i = 0; i < n; ++i) {
            const double norm = embed.row(i).norm();
            if (norm > 1e-12) embed.row(i) /= norm;
        }
        const std::vector<int> assign = kmeans(embed, k, params.seed);
        for (int i = 0; i < n; ++i) cluster_labels[static_cast<size_t>(i)] = assign[static_cast<size_t>(i)] + 1;
        cluster_labels = canonicalize_labels(cluster_labels);
    }

    ClusteringResult out;
    out.k = k;
    out.labels.assign(static_cast<size_t>(session.size()), 0);
    for (int i = 0; i < n; ++i) {
        out.labels[static_cast<size_t>(affinity.segment_ids[static_cast<size_t>(i)] - 1)] =
            cluster_labels[static_cast<size_t>(i)];
    }
    for (const Segment& seg : session.segments) {
        if (out.labels[static_cast<size_t>(seg.id - 1)] == 0) {
            out.excluded.push_back(seg.id);
        }
    }

    // Centroids over the clusterable members, in the original embedding space.
    out.centroids.assign(static_cast<size_t>(k), std::vector<double>(
                             static_cast<size_t>(session.embedding_dim), 0.0));
    std::vector<int> sizes(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
        const int label = cluster_labels[static_cast<size_t>(i)];
        const auto& emb = session.segment(affinity.segment_ids[static_cast<size_t>(i)]).embedding;
        auto& c = out.centroids[static_cast<size_t>(label - 1)];
        for (size_t d = 0; d < c.size(); ++d) c[d] += emb[d];
        ++sizes[static_cast<size_t>(label - 1)];
    }
    for (int c = 0; c < k; ++c) {
        auto& centroid = out.centroids[static_cast<size_t>(c)];
        if (sizes[static_cast<size_t>(c)] > 0) {
            for (double& x : centroid) x /= static_cast<double>(sizes[static_cast<size_t>(c)]);
        }
        normalize_embedding(centroid);
    }
    return out;
}

ClusteringResult assign_outliers(const ClusteringResult& result, const Session& session) {
    if (result.centroids.empty()) {
        throw ValidationError("assign_outliers: no centroids");
    }
    ClusteringResult out = result;
    for (int id : out.excluded) {
        const auto& emb = session.segment(id).embedding;
        int best_label = 1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < out.centroids.size(); ++c) {
            const double d = cosine_distance(emb, out.centroids[c]);
            if (d < best_dist) {  // strict: ties stay with the lower-numbered cluster
                best_dist = d;
                best_label = static_cast<int>(c) + 1;
            }
        }
        out.labels[static_cast<size_t>(id - 1)] = best_label;
    }
    return out;
}

DispersionStats dispersion_stats(const ClusteringResult& result, const Session& session,
                                 int first_segment, int last_segment) {
    if (first_segment < 1 || last_segment > session.size() || first_segment > last_segment) {
        throw ValidationError("dispersion_stats: invalid window");
    }
    DispersionStats stats;

    // Cluster presence and the largest cluster in the window.
    std::map<int, int> counts;
    for (int id = first_segment; id <= last_segment; ++id) {
        const int label = result.labels[static_cast<size_t>(id - 1)];
        if (label <= 0) {
            throw ValidationError("dispersion_stats: window contains an unassigned segment");
        }
        ++counts[label];
    }
    int largest = counts.begin()->first;
    for (const auto& [label, count] : counts) {
        if (count > counts[largest]) largest = label;  // ties -> smallest label (map order)
    }
    const auto& largest_centroid = result.centroids[static_cast<size_t>(largest - 1)];
    for (const auto& [label, count] : counts) {
        stats.d_p = std::max(stats.d_p, cosine_distance(largest_centroid,
                                                        result.centroids[static_cast<size_t>(label - 1)]));
    }

    // Population std of pairwise cosine distances among window embeddings.
    std::vector<double> dists;
    for (int i = first_segment; i <= last_segment; ++i) {
        for (int j = i + 1; j <= last_segment; ++j) {
            dists.push_back(cosine_distance(session.segment(i).embedding,
                                            session.segment(j).embedding));
        }
    }
    if (!dists.empty()) {
        const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) /
                            static_cast<double>(dists.size());
        double var = 0.0;
        for (double d : dists) var += (d - mean) * (d - mean);
        stats.d_q = std::sqrt(var / static_cast<double>(dists.size()));
    }
    return stats;
}

int acoustic_dialogue_flag(const ClusteringResult& result, int first_segment, int last_segment) {
    if (first_segment > last_segment || first_segment < 1 ||
        last_segment > static_cast<int>(result.labels.size())) {
        throw ValidationError("acoustic_dialogue_flag: invalid window");
    }
    const int first_label = result.labels[static_cast<size_t>(first_segment - 1)];
    for (int id = first_segment + 1; id <= last_segment; ++id) {
        if (result.labels[static_cast<size_t>(id - 1)] != first_label) return 1;
    }
    return 0;
}

double acoustic_turn_prob(const ClusteringResult& result, const Session& session,
                          int boundary_after_segment, double window_s,
                          const TurnProbFile* external) {
    const int n = boundary_after_segment;
    if (n < 1 || n >= session.size()) {
        throw ValidationError("acoustic_turn_prob: boundary must satisfy 1 <= n < N");
    }
    if (external != nullptr) {
        const double t = (session.segment(n).end_s + session.segment(n + 1).start_s) / 2.0;
        double best = 0.0;
        for (const auto& point : external->probs) {
            if (std::abs(point.time_s - t) <= window_s) best = std::max(best, point.p);
        }
        return best;
    }
    const int left = result.labels[static_cast<size_t>(n - 1)];
    const int right = result.labels[static_cast<size_t>(n)];
    if (left > 0 && right > 0 && left != right) return 1.0;
    return 1.0 - pair_affinity(session.segment(n).embedding, session.segment(n + 1).embedding);
}

}  // namespace diar
