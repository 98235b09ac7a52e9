#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "diarkit/io.hpp"
#include "diarkit/types.hpp"

namespace diar {

// Pairwise segment affinity (1 + cos) / 2 over clusterable segments.
// Symmetric with unit diagonal, entries in [0, 1].
struct AffinityMatrix {
    Eigen::MatrixXd values;
    std::vector<int> segment_ids;  // session segment ids backing each row/col

    int size() const { return static_cast<int>(segment_ids.size()); }
};

struct ClusteringResult {
    std::vector<int> labels;  // per session segment, 1..k; 0 = excluded, not yet assigned
    int k = 0;
    std::vector<std::vector<double>> centroids;  // unit-normalized mean per speaker, index label-1
    std::vector<int> excluded;                   // segment ids left out for short duration
};

struct ClusterParams {
    // Affinity percentile; unset means auto: keep about min(12, N/3) strong
    // neighbors per row, i.e. p = clamp(1 - keep/N, 0.5, 0.95).
    std::optional<double> p_percentile;
    int k_max = 10;
    std::optional<int> k_fixed;
    double min_segment_s = 0.5;
    uint64_t seed = 1;

    double resolved_p_percentile(int n_clusterable) const;
};

AffinityMatrix build_affinity(const Session& session, double min_segment_s);

// Row-wise p-percentile refinement: entries below the row percentile are
// damped by 0.01, the result symmetrized as (M + M^T) / 2, diagonal reset to 1.
AffinityMatrix refine_affinity(const AffinityMatrix& a, double p_percentile);

// Largest eigen-gap of the symmetric normalized Laplacian, searched over
// 1 <= i < min(k_max, N); ties resolved toward the smaller count.
int estimate_speaker_count(const AffinityMatrix& a, int k_max);

// Full acoustic backend: affinity, percentile refinement, eigen-gap count
// estimation (unless k_fixed), spectral embedding, seeded k-means.
// Labels over clusterable segments are canonicalized; excluded segments stay
// unassigned until assign_outliers.
ClusteringResult spectral_cluster(const Session& session, const ClusterParams& params);

// Assigns every excluded segment to the nearest centroid (cosine distance,
// ties toward the lower-numbered cluster). Centroids are not recomputed.
ClusteringResult assign_outliers(const ClusteringResult& result, const Session& session);

struct DispersionStats {
    double d_p = 0.0;  // distance from the window's largest cluster to its furthest cluster
    double d_q = 0.0;  // std of pairwise cosine distances among window embeddings
};

DispersionStats dispersion_stats(const ClusteringResult& result, const Session& session,
                                 int first_segment, int last_segment);

// 1 if the window contains at least two distinct labels.
int acoustic_dialogue_flag(const ClusteringResult& result, int first_segment, int last_segment);

// Speaker-change probability at boundary n (between segments n and n+1):
// 1.0 when labels differ, otherwise 1 - affinity of the two embeddings.
// When an external probability file is supplied, returns the maximum supplied
// probability within +-window_s of the boundary time instead (0 if none).
double acoustic_turn_prob(const ClusteringResult& result, const Session& session,
                          int boundary_after_segment, double window_s,
                          const TurnProbFile* external = nullptr);

}  // namespace diar
