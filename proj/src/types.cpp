#include "diarkit/types.hpp"

#include <cmath>
#include <unordered_map>

namespace diar {

void FusionParams::validate() const {
    if (!(beta1 + beta2 > 0.0)) {
        throw ValidationError("fusion params: beta1 + beta2 must be > 0");
    }
    if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || !std::isfinite(beta1) ||
        !std::isfinite(beta2) || !std::isfinite(theta)) {
        throw ValidationError("fusion params: weights and theta must be finite");
    }
}

void RefineParams::validate() const {
    if (tau_split < 0.0 || tau_split > 2.0) {
        throw ValidationError("refine params: tau_split must be in [0, 2]");
    }
    if (!(turn_threshold > 0.0 && turn_threshold < 1.0)) {
        throw ValidationError("refine params: turn_threshold must be in (0, 1)");
    }
    if (min_segment_s < 0.0) {
        throw ValidationError("refine params: min_segment_s must be >= 0");
    }
    if (!std::isfinite(tau_merge)) {
        throw ValidationError("refine params: tau_merge must be finite");
    }
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine_distance: dimension mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) {
        throw ValidationError("cosine_distance: zero-norm embedding");
    }
    double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    if (cos > 1.0) cos = 1.0;
    if (cos < -1.0) cos = -1.0;
    return 1.0 - cos;
}

std::vector<int> canonicalize_labels(const std::vector<int>& labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    int next = 1;
    for (int label : labels) {
        if (label <= 0) {
            throw ValidationError("canonicalize_labels: labels must be positive");
        }
        auto [it, inserted] = remap.try_emplace(label, next);
        if (inserted) ++next;
        out.push_back(it->second);
    }
    return out;
}

DiarizationHypothesis canonicalize_labels(const DiarizationHypothesis& hypothesis) {
    return DiarizationHypothesis{hypothesis.session_id, canonicalize_labels(hypothesis.labels)};
}

void normalize_embedding(std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    double norm = std::sqrt(sq);
    if (norm <= 0.0) {
        throw ValidationError("embedding has zero norm");
    }
    if (std::abs(norm - 1.0) <= 1e-9) return;
    for (double& x : v) x /= norm;
}

}  // namespace diar
