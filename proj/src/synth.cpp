#include "diarkit/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "rng.hpp"

namespace diar {

void SynthConfig::validate() const {
    if (n_speakers < 1) throw ValidationError("synth: n_speakers must be >= 1");
    if (n_segments < 1) throw ValidationError("synth: n_segments must be >= 1");
    if (embedding_dim < 2) throw ValidationError("synth: embedding_dim must be >= 2");
    if (acoustic_noise < 0.0) throw ValidationError("synth: acoustic_noise must be >= 0");
    if (semantic_turn_accuracy < 0.5 || semantic_turn_accuracy > 1.0) {
        throw ValidationError("synth: semantic_turn_accuracy must be in [0.5, 1]");
    }
    if (dialogue_accuracy < 0.5 || dialogue_accuracy > 1.0) {
        throw ValidationError("synth: dialogue_accuracy must be in [0.5, 1]");
    }
    if (turn_rate < 0.0 || turn_rate > 1.0) {
        throw ValidationError("synth: turn_rate must be in [0, 1]");
    }
    if (words_min < 1 || words_max < words_min) {
        throw ValidationError("synth: words_per_segment range invalid");
    }
    if (token_overlap < 0.0 || token_overlap > 1.0) {
        throw ValidationError("synth: token_overlap must be in [0, 1]");
    }
    if (substitution_rate < 0.0 || substitution_rate > 1.0) {
        throw ValidationError("synth: substitution_rate must be in [0, 1]");
    }
    if (window_len < 1 || window_shift < 1) {
        throw ValidationError("synth: window_len and window_shift must be >= 1");
    }
    if (session_id.empty()) throw ValidationError("synth: session_id must be non-empty");
}

namespace {

constexpr int kTokensPerSpeaker = 40;

std::vector<std::vector<double>> draw_prototypes(int k, int dim, Rng& rng) {
    std::vector<std::vector<double>> protos;
    for (int s = 0; s < k; ++s) {
        std::vector<double> v(static_cast<size_t>(dim));
        for (double& x : v) x = rng.normal();
        if (dim >= k) {
            // Gram-Schmidt against the earlier prototypes.
            for (const auto& p : protos) {
                double dot = 0.0;
                for (int d = 0; d < dim; ++d) dot += v[static_cast<size_t>(d)] * p[static_cast<size_t>(d)];
                for (int d = 0; d < dim; ++d) v[static_cast<size_t>(d)] -= dot * p[static_cast<size_t>(d)];
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        if (norm < 1e-12) {
            // Degenerate draw; fall back to a coordinate direction.
            std::fill(v.begin(), v.end(), 0.0);
            v[static_cast<size_t>(s % dim)] = 1.0;
        }
        normalize_embedding(v);
        protos.push_back(std::move(v));
    }
    return protos;
}

// Draws strictly inside (0.5, 1] when side is 1, [0, 0.5) when side is 0;
// intervals are open at 0.5 so the strict > 0.5 decision is never ambiguous.
double side_score(int side, Rng& rng) {
    const double u = rng.uniform_open();  // (0, 1)
    return side == 1 ? 0.5 + 0.5 * u : 0.5 - 0.5 * u;
}

}  // namespace

SynthOutput generate_session(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    SynthOutput out;

    const auto protos = draw_prototypes(config.n_speakers, config.embedding_dim, rng);

    // Speaker sequence: Markov chain with change probability turn_rate.
    out.true_speakers.resize(static_cast<size_t>(config.n_segments));
    out.true_speakers[0] = rng.uniform_int(1, config.n_speakers);
    for (int i = 1; i < config.n_segments; ++i) {
        const int prev = out.true_speakers[static_cast<size_t>(i - 1)];
        int cur = prev;
        if (config.n_speakers > 1 && rng.uniform() < config.turn_rate) {
            int offset = rng.uniform_int(1, config.n_speakers - 1);
            cur = ((prev - 1 + offset) % config.n_speakers) + 1;
        }
        out.true_speakers[static_cast<size_t>(i)] = cur;
    }

    out.session.session_id = config.session_id;
    out.session.embedding_dim = config.embedding_dim;
    out.reference.session_id = config.session_id;

    double t = 0.0;
    int substitution_counter = 0;
    for (int i = 0; i < config.n_segments; ++i) {
        const int spk = out.true_speakers[static_cast<size_t>(i)];
        Segment seg;
        seg.id = i + 1;
        seg.start_s = t;

        const int n_words = rng.uniform_int(config.words_min, config.words_max);
        for (int w = 0; w < n_words; ++w) {
            const double dur = rng.uniform(0.2, 0.4);
            std::string token;
            if (config.token_overlap > 0.0 && rng.uniform() < config.token_overlap) {
                token = "w" + std::to_string(rng.uniform_int(0, kTokensPerSpeaker - 1));
            } else {
                token = "s" + std::to_string(spk) + "w" +
                        std::to_string(rng.uniform_int(0, kTokensPerSpeaker - 1));
            }
            out.reference.words.push_back({token, "S" + std::to_string(spk), t, t + dur});
            // ASR-style substitution noise affects the session side only; the
            // replacement token is unique so it collides with nothing.
            if (config.substitution_rate > 0.0 && rng.uniform() < config.substitution_rate) {
                token = "x" + std::to_string(substitution_counter++) + "_" + token;
            }
            seg.words.push_back({token, t, t + dur});
            t += dur;
        }
        seg.end_s = t;
        t += rng.uniform(0.05, 0.15);

        seg.embedding = protos[static_cast<size_t>(spk - 1)];
        if (config.acoustic_noise > 0.0) {
            for (double& x : seg.embedding) x += config.acoustic_noise * rng.normal();
            double norm = 0.0;
            for (double x : seg.embedding) norm += x * x;
            if (norm < 1e-12) seg.embedding = protos[static_cast<size_t>(spk - 1)];
        }
        normalize_embedding(seg.embedding);
        out.session.segments.push_back(std::move(seg));
    }
    validate_session(out.session);

    // Semantic turn probabilities, correct at threshold 0.5 with probability
    // semantic_turn_accuracy.
    out.scores.session_id = config.session_id;
    for (int b = 1; b < config.n_segments; ++b) {
        const int truth =
            out.true_speakers[static_cast<size_t>(b)] != out.true_speakers[static_cast<size_t>(b - 1)] ? 1 : 0;
        const bool correct = rng.uniform() < config.semantic_turn_accuracy;
        const int side = correct ? truth : 1 - truth;
        out.scores.turn_probabilities.push_back({b, side_score(side, rng)});
    }

    // Dialogue windows: sliding with the configured length/shift, truncated at
    // the session end.
    for (int start = 1; start <= config.n_segments; start += config.window_shift) {
        const int last = std::min(start + config.window_len - 1, config.n_segments);
        int truth = 0;
        for (int id = start + 1; id <= last; ++id) {
            if (out.true_speakers[static_cast<size_t>(id - 1)] !=
                out.true_speakers[static_cast<size_t>(start - 1)]) {
                truth = 1;
                break;
            }
        }
        const bool correct = rng.uniform() < config.dialogue_accuracy;
        const int z = correct ? truth : 1 - truth;
        out.scores.dialogue_windows.push_back({start, last, side_score(z, rng), z});
        if (last == config.n_segments) break;
    }
    return out;
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::kAcoustic: return "acoustic";
        case Mode::kSemantic: return "semantic";
        case Mode::kMultimodal: return "multimodal";
    }
    return "unknown";
}

Mode mode_from_name(const std::string& name) {
    if (name == "acoustic") return Mode::kAcoustic;
    if (name == "semantic") return Mode::kSemantic;
    if (name == "multimodal") return Mode::kMultimodal;
    throw ConfigError("unknown mode '" + name + "' (expected acoustic|semantic|multimodal)");
}

namespace {

std::string config_group_key(const SynthConfig& c) {
    std::ostringstream key;
    key << c.n_speakers << "|" << c.n_segments << "|" << c.embedding_dim << "|"
        << c.acoustic_noise << "|" << c.semantic_turn_accuracy << "|" << c.dialogue_accuracy
        << "|" << c.turn_rate << "|" << c.words_min << "|" << c.words_max << "|"
        << c.token_overlap << "|" << c.substitution_rate << "|" << c.window_len << "|"
        << c.window_shift;
    return key.str();
}

void mean_std(const std::vector<double>& xs, double* mean, double* sd) {
    *mean = 0.0;
    for (double x : xs) *mean += x;
    *mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - *mean) * (x - *mean);
    *sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace

SweepResult sweep(const std::vector<SynthConfig>& configs, const std::vector<Mode>& modes,
                  const PipelineParams& base_params, int jobs) {
    if (configs.empty()) throw ValidationError("sweep: need at least one config");
    if (modes.empty()) throw ValidationError("sweep: need at least one mode");
    jobs = std::max(1, jobs);

    struct Cell {
        size_t config_idx;
        size_t mode_idx;
        MetricsReport report;
    };
    std::vector<Cell> cells;
    for (size_t ci = 0; ci < configs.size(); ++ci) {
        for (size_t mi = 0; mi < modes.size(); ++mi) {
            cells.push_back({ci, mi, {}});
        }
    }

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) break;
            try {
                Cell& cell = cells[idx];
                const SynthConfig& config = configs[cell.config_idx];
                SynthOutput data = generate_session(config);
                PipelineParams params = base_params;
                params.mode = modes[cell.mode_idx];
                params.cluster.seed = config.seed;
                const DiarizationHypothesis hyp =
                    run_pipeline(data.session, &data.scores, params);
                cell.report = evaluate(reference_words(data.reference),
                                       hypothesis_words(hyp, data.session), config.session_id);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    // Group by (mode, config-without-seed), preserving first-seen order.
    SweepResult result;
    std::vector<std::string> keys;
    for (const Cell& cell : cells) {
        const std::string key = mode_name(modes[cell.mode_idx]) + "@" +
                                config_group_key(configs[cell.config_idx]);
        size_t row_idx = keys.size();
        for (size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == key) {
                row_idx = i;
                break;
            }
        }
        if (row_idx == keys.size()) {
            keys.push_back(key);
            SweepRow row;
            row.mode = mode_name(modes[cell.mode_idx]);
            row.config = configs[cell.config_idx];
            result.rows.push_back(row);
        }
        result.rows[row_idx].reports.push_back(cell.report);
    }
    for (SweepRow& row : result.rows) {
        row.n_seeds = static_cast<int>(row.reports.size());
        std::vector<double> matched, all, spk, werr;
        for (const auto& r : row.reports) {
            matched.push_back(r.e_cp_matched);
            all.push_back(r.e_cp_all);
            spk.push_back(r.e_speaker_wer);
            werr.push_back(r.e_wer);
        }
        double sd;
        mean_std(matched, &row.mean_cp_matched, &row.std_cp_matched);
        mean_std(all, &row.mean_cp_all, &row.std_cp_all);
        mean_std(spk, &row.mean_speaker_wer, &row.std_speaker_wer);
        mean_std(werr, &row.mean_wer, &sd);
    }
    return result;
}

std::string sweep_table(const SweepResult& result) {
    std::ostringstream out;
    out << "mode\tn_speakers\tn_segments\tsigma\tturn_acc\tseeds\t"
        << "cp_matched_mean\tcp_matched_std\tcp_all_mean\tcp_all_std\t"
        << "speaker_wer_mean\tspeaker_wer_std\twer_mean\n";
    char buf[64];
    auto fmt = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.6f", x);
        return std::string(buf);
    };
    for (const SweepRow& row : result.rows) {
        out << row.mode << "\t" << row.config.n_speakers << "\t" << row.config.n_segments << "\t"
            << fmt(row.config.acoustic_noise) << "\t" << fmt(row.config.semantic_turn_accuracy)
            << "\t" << row.n_seeds << "\t" << fmt(row.mean_cp_matched) << "\t"
            << fmt(row.std_cp_matched) << "\t" << fmt(row.mean_cp_all) << "\t"
            << fmt(row.std_cp_all) << "\t" << fmt(row.mean_speaker_wer) << "\t"
            << fmt(row.std_speaker_wer) << "\t" << fmt(row.mean_wer) << "\n";
    }
    return out.str();
}

}  // namespace diar
