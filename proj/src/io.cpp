#include "diarkit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace diar {

using nlohmann::json;

namespace {

constexpr const char* kSegmentsSchema = "diar-segments/1";
constexpr const char* kScoresSchema = "diar-scores/1";
constexpr const char* kWordsSchema = "diar-words/1";
constexpr const char* kTimedWordsSchema = "diar-timedwords/1";
constexpr const char* kTurnProbsSchema = "diar-turnprobs/1";
constexpr const char* kParamsSchema = "diar-params/1";
constexpr const char* kReportSchema = "diar-report/1";

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open file: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot open file for writing: " + path);
    }
    out << text;
    if (!out) {
        throw ValidationError("write failed: " + path);
    }
}

const json& get_field(const json& j, const char* key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw SchemaError(ctx + ": missing field '" + key + "'");
    }
    return *it;
}

double get_finite(const json& j, const char* key, const std::string& ctx) {
    const json& v = get_field(j, key, ctx);
    if (!v.is_number()) {
        throw SchemaError(ctx + ": field '" + key + "' must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw SchemaError(ctx + ": field '" + key + "' must be finite");
    }
    return d;
}

long long get_integer(const json& j, const char* key, const std::string& ctx) {
    const json& v = get_field(j, key, ctx);
    if (!v.is_number_integer()) {
        throw SchemaError(ctx + ": field '" + key + "' must be an integer");
    }
    return v.get<long long>();
}

std::string get_string(const json& j, const char* key, const std::string& ctx) {
    const json& v = get_field(j, key, ctx);
    if (!v.is_string()) {
        throw SchemaError(ctx + ": field '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

const json& get_array(const json& j, const char* key, const std::string& ctx) {
    const json& v = get_field(j, key, ctx);
    if (!v.is_array()) {
        throw SchemaError(ctx + ": field '" + key + "' must be an array");
    }
    return v;
}

void check_schema(const json& j, const char* expected, const std::string& path) {
    const std::string schema = get_string(j, "schema", path);
    if (schema != expected) {
        throw SchemaError(path + ": schema '" + schema + "' does not match '" + expected + "'");
    }
}

}  // namespace

void validate_session(Session& session) {
    if (session.session_id.empty()) {
        throw ValidationError("session_id must be non-empty");
    }
    if (session.embedding_dim < 1) {
        throw ValidationError("embedding_dim must be >= 1");
    }
    const int n = session.size();
    for (int i = 0; i < n; ++i) {
        Segment& seg = session.segments[static_cast<size_t>(i)];
        const std::string ctx = "segments[" + std::to_string(i) + "]";
        if (seg.id != i + 1) {
            throw ValidationError(ctx + ": ids must be contiguous 1..N, got " +
                                  std::to_string(seg.id));
        }
        if (!(seg.end_s >= seg.start_s)) {
            throw ValidationError(ctx + ": end_s must be >= start_s");
        }
        if (i > 0 && seg.start_s < session.segments[static_cast<size_t>(i - 1)].end_s) {
            throw ValidationError(ctx + ": starts before segment " + std::to_string(i) +
                                  " ends (segments must be non-overlapping and time-ordered)");
        }
        if (static_cast<int>(seg.embedding.size()) != session.embedding_dim) {
            throw ValidationError(ctx + ": embedding dimension " +
                                  std::to_string(seg.embedding.size()) + " does not match " +
                                  std::to_string(session.embedding_dim));
        }
        for (double x : seg.embedding) {
            if (!std::isfinite(x)) {
                throw SchemaError(ctx + ": embedding contains a non-finite value");
            }
        }
        try {
            normalize_embedding(seg.embedding);
        } catch (const ValidationError&) {
            throw ValidationError(ctx + ": embedding has zero norm");
        }
        for (size_t w = 0; w < seg.words.size(); ++w) {
            const Word& word = seg.words[w];
            const std::string wctx = ctx + ".words[" + std::to_string(w) + "]";
            if (word.token.empty()) {
                throw ValidationError(wctx + ": token must be non-empty");
            }
            if (!(word.end_s >= word.start_s)) {
                throw ValidationError(wctx + ": end_s must be >= start_s");
            }
            if (word.start_s < seg.start_s || word.end_s > seg.end_s) {
                throw ValidationError(wctx + ": word not contained in segment time range");
            }
            if (w > 0 && word.start_s < seg.words[w - 1].end_s) {
                throw ValidationError(wctx + ": words must be time-ordered");
            }
        }
    }
}

Session load_session(const std::string& path) {
    const json doc = parse_file(path);
    check_schema(doc, kSegmentsSchema, path);
    Session session;
    session.session_id = get_string(doc, "session_id", path);
    session.embedding_dim = static_cast<int>(get_integer(doc, "embedding_dim", path));
    const json& segs = get_array(doc, "segments", path);
    for (size_t i = 0; i < segs.size(); ++i) {
        const json& js = segs[i];
        const std::string ctx = path + ": segments[" + std::to_string(i) + "]";
        Segment seg;
        seg.id = static_cast<int>(get_integer(js, "id", ctx));
        seg.start_s = get_finite(js, "start_s", ctx);
        seg.end_s = get_finite(js, "end_s", ctx);
        const json& emb = get_array(js, "embedding", ctx);
        for (const json& x : emb) {
            if (!x.is_number()) {
                throw SchemaError(ctx + ": embedding entries must be numbers");
            }
            seg.embedding.push_back(x.get<double>());
        }
        const json& words = get_array(js, "words", ctx);
        for (size_t w = 0; w < words.size(); ++w) {
            const std::string wctx = ctx + ".words[" + std::to_string(w) + "]";
            Word word;
            word.token = get_string(words[w], "token", wctx);
            word.start_s = get_finite(words[w], "start_s", wctx);
            word.end_s = get_finite(words[w], "end_s", wctx);
            seg.words.push_back(std::move(word));
        }
        session.segments.push_back(std::move(seg));
    }
    validate_session(session);
    return session;
}

void write_session(const Session& session, const std::string& path) {
    Session copy = session;
    validate_session(copy);
    json doc;
    doc["schema"] = kSegmentsSchema;
    doc["session_id"] = copy.session_id;
    doc["embedding_dim"] = copy.embedding_dim;
    json segs = json::array();
    for (const Segment& seg : copy.segments) {
        json js;
        js["id"] = seg.id;
        js["start_s"] = seg.start_s;
        js["end_s"] = seg.end_s;
        js["embedding"] = seg.embedding;
        json words = json::array();
        for (const Word& w : seg.words) {
            words.push_back({{"token", w.token}, {"start_s", w.start_s}, {"end_s", w.end_s}});
        }
        js["words"] = std::move(words);
        segs.push_back(std::move(js));
    }
    doc["segments"] = std::move(segs);
    write_text(path, doc.dump(2) + "\n");
}

SemanticScores load_semantic_scores(const std::string& path, const Session& session) {
    const json doc = parse_file(path);
    check_schema(doc, kScoresSchema, path);
    SemanticScores scores;
    scores.session_id = get_string(doc, "session_id", path);
    if (scores.session_id != session.session_id) {
        throw ValidationError(path + ": session_id '" + scores.session_id +
                              "' does not match session '" + session.session_id + "'");
    }
    const int n = session.size();
    const json& windows = get_array(doc, "dialogue_windows", path);
    std::vector<char> covered(static_cast<size_t>(n), 0);
    for (size_t i = 0; i < windows.size(); ++i) {
        const std::string ctx = path + ": dialogue_windows[" + std::to_string(i) + "]";
        DialogueWindowScore w;
        w.first_segment = static_cast<int>(get_integer(windows[i], "first_segment", ctx));
        w.last_segment = static_cast<int>(get_integer(windows[i], "last_segment", ctx));
        w.p_s = get_finite(windows[i], "p_s", ctx);
        w.z_semantic = static_cast<int>(get_integer(windows[i], "z_semantic", ctx));
        if (w.first_segment < 1 || w.last_segment > n || w.first_segment > w.last_segment) {
            throw ValidationError(ctx + ": segment range [" + std::to_string(w.first_segment) +
                                  ", " + std::to_string(w.last_segment) +
                                  "] invalid for session of size " + std::to_string(n));
        }
        if (w.p_s < 0.0 || w.p_s > 1.0) {
            throw ValidationError(ctx + ": p_s out of range [0, 1]");
        }
        if (w.z_semantic != 0 && w.z_semantic != 1) {
            throw ValidationError(ctx + ": z_semantic must be 0 or 1");
        }
        for (int s = w.first_segment; s <= w.last_segment; ++s) {
            covered[static_cast<size_t>(s - 1)] = 1;
        }
        scores.dialogue_windows.push_back(w);
    }
    if (!scores.dialogue_windows.empty()) {
        for (int s = 0; s < n; ++s) {
            if (!covered[static_cast<size_t>(s)]) {
                throw ValidationError(path + ": dialogue windows do not cover segment " +
                                      std::to_string(s + 1));
            }
        }
    }
    const json& turns = get_array(doc, "turn_probabilities", path);
    std::vector<char> seen(static_cast<size_t>(n) + 1, 0);
    for (size_t i = 0; i < turns.size(); ++i) {
        const std::string ctx = path + ": turn_probabilities[" + std::to_string(i) + "]";
        TurnProbability t;
        t.after_segment = static_cast<int>(get_integer(turns[i], "after_segment", ctx));
        t.p = get_finite(turns[i], "p", ctx);
        if (t.after_segment < 1 || t.after_segment >= n) {
            throw ValidationError(ctx + ": after_segment " + std::to_string(t.after_segment) +
                                  " must satisfy 1 <= n < N (N=" + std::to_string(n) + ")");
        }
        if (t.p < 0.0 || t.p > 1.0) {
            throw ValidationError(ctx + ": p out of range [0, 1]");
        }
        if (seen[static_cast<size_t>(t.after_segment)]) {
            throw ValidationError(ctx + ": duplicate boundary " + std::to_string(t.after_segment));
        }
        seen[static_cast<size_t>(t.after_segment)] = 1;
        scores.turn_probabilities.push_back(t);
    }
    return scores;
}

void write_semantic_scores(const SemanticScores& scores, const std::string& path) {
    json doc;
    doc["schema"] = kScoresSchema;
    doc["session_id"] = scores.session_id;
    json windows = json::array();
    for (const auto& w : scores.dialogue_windows) {
        windows.push_back({{"first_segment", w.first_segment},
                           {"last_segment", w.last_segment},
                           {"p_s", w.p_s},
                           {"z_semantic", w.z_semantic}});
    }
    doc["dialogue_windows"] = std::move(windows);
    json turns = json::array();
    for (const auto& t : scores.turn_probabilities) {
        turns.push_back({{"after_segment", t.after_segment}, {"p", t.p}});
    }
    doc["turn_probabilities"] = std::move(turns);
    write_text(path, doc.dump(2) + "\n");
}

namespace {

ReferenceTranscript parse_words_doc(const json& doc, const std::string& path) {
    ReferenceTranscript out;
    out.session_id = get_string(doc, "session_id", path);
    const json& words = get_array(doc, "words", path);
    if (words.empty()) {
        throw ValidationError(path + ": words list is empty");
    }
    for (size_t i = 0; i < words.size(); ++i) {
        const std::string ctx = path + ": words[" + std::to_string(i) + "]";
        RefWord w;
        w.token = get_string(words[i], "token", ctx);
        w.speaker = get_string(words[i], "speaker", ctx);
        if (w.token.empty()) {
            throw ValidationError(ctx + ": token must be non-empty");
        }
        if (w.speaker.empty()) {
            throw ValidationError(ctx + ": speaker must be non-empty");
        }
        if (words[i].contains("start_s")) w.start_s = get_finite(words[i], "start_s", ctx);
        if (words[i].contains("end_s")) w.end_s = get_finite(words[i], "end_s", ctx);
        out.words.push_back(std::move(w));
    }
    return out;
}

}  // namespace

ReferenceTranscript load_reference(const std::string& path) {
    const json doc = parse_file(path);
    check_schema(doc, kWordsSchema, path);
    return parse_words_doc(doc, path);
}

void write_reference(const ReferenceTranscript& transcript, const std::string& path) {
    json doc;
    doc["schema"] = kWordsSchema;
    doc["session_id"] = transcript.session_id;
    json words = json::array();
    for (const auto& w : transcript.words) {
        json jw = {{"token", w.token}, {"speaker", w.speaker}};
        if (w.start_s) jw["start_s"] = *w.start_s;
        if (w.end_s) jw["end_s"] = *w.end_s;
        words.push_back(std::move(jw));
    }
    doc["words"] = std::move(words);
    write_text(path, doc.dump(2) + "\n");
}

namespace {

struct RttmTurn {
    double tbeg = 0.0;
    double tdur = 0.0;
    std::string speaker;
    std::string session;
};

std::vector<RttmTurn> parse_rttm(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open file: " + path);
    }
    std::vector<RttmTurn> turns;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string type, sess, chan, tbeg, tdur, f6, f7, spk;
        if (!(ls >> type >> sess >> chan >> tbeg >> tdur >> f6 >> f7 >> spk) || type != "SPEAKER") {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": unparseable RTTM line");
        }
        RttmTurn turn;
        turn.session = sess;
        try {
            turn.tbeg = std::stod(tbeg);
            turn.tdur = std::stod(tdur);
        } catch (const std::exception&) {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": bad time field");
        }
        if (!std::isfinite(turn.tbeg) || !std::isfinite(turn.tdur) || turn.tdur < 0.0) {
            throw SchemaError(path + ":" + std::to_string(lineno) + ": bad time field");
        }
        turn.speaker = spk;
        turns.push_back(std::move(turn));
    }
    if (turns.empty()) {
        throw ValidationError(path + ": no RTTM speaker turns found");
    }
    return turns;
}

}  // namespace

ReferenceTranscript load_reference_rttm(const std::string& rttm_path, const std::string& words_path) {
    const auto turns = parse_rttm(rttm_path);
    const json doc = parse_file(words_path);
    check_schema(doc, kTimedWordsSchema, words_path);
    ReferenceTranscript out;
    out.session_id = get_string(doc, "session_id", words_path);
    const json& words = get_array(doc, "words", words_path);
    if (words.empty()) {
        throw ValidationError(words_path + ": words list is empty");
    }
    for (size_t i = 0; i < words.size(); ++i) {
        const std::string ctx = words_path + ": words[" + std::to_string(i) + "]";
        RefWord w;
        w.token = get_string(words[i], "token", ctx);
        w.start_s = get_finite(words[i], "start_s", ctx);
        w.end_s = get_finite(words[i], "end_s", ctx);
        const double mid = (*w.start_s + *w.end_s) / 2.0;
        const RttmTurn* enclosing = nullptr;
        for (const auto& turn : turns) {
            if (mid >= turn.tbeg && mid <= turn.tbeg + turn.tdur) {
                enclosing = &turn;
                break;  // earliest turn in file order wins on overlap
            }
        }
        if (enclosing == nullptr) {
            throw ValidationError(ctx + ": no RTTM turn encloses word midpoint " +
                                  std::to_string(mid));
        }
        w.speaker = enclosing->speaker;
        out.words.push_back(std::move(w));
    }
    return out;
}

void write_timed_words(const std::vector<Word>& words, const std::string& session_id,
                       const std::string& path) {
    json doc;
    doc["schema"] = kTimedWordsSchema;
    doc["session_id"] = session_id;
    json jwords = json::array();
    for (const auto& w : words) {
        jwords.push_back({{"token", w.token}, {"start_s", w.start_s}, {"end_s", w.end_s}});
    }
    doc["words"] = std::move(jwords);
    write_text(path, doc.dump(2) + "\n");
}

std::vector<SpeakerWord> hypothesis_words(const DiarizationHypothesis& hypothesis,
                                          const Session& session) {
    if (static_cast<int>(hypothesis.labels.size()) != session.size()) {
        throw ValidationError("hypothesis labels do not cover all segments");
    }
    std::vector<SpeakerWord> out;
    for (int i = 0; i < session.size(); ++i) {
        const std::string spk = "spk" + std::to_string(hypothesis.labels[static_cast<size_t>(i)]);
        for (const Word& w : session.segments[static_cast<size_t>(i)].words) {
            out.push_back({w.token, spk});
        }
    }
    return out;
}

std::vector<SpeakerWord> reference_words(const ReferenceTranscript& transcript) {
    std::vector<SpeakerWord> out;
    out.reserve(transcript.words.size());
    for (const auto& w : transcript.words) {
        out.push_back({w.token, w.speaker});
    }
    return out;
}

void write_hypothesis(const DiarizationHypothesis& hypothesis, const Session& session,
                      const std::string& words_path, const std::string& rttm_path) {
    if (static_cast<int>(hypothesis.labels.size()) != session.size()) {
        throw ValidationError("hypothesis labels do not cover all segments");
    }
    for (int label : hypothesis.labels) {
        if (label <= 0) {
            throw ValidationError("hypothesis labels must be positive");
        }
    }

    ReferenceTranscript words;
    words.session_id = hypothesis.session_id;
    for (int i = 0; i < session.size(); ++i) {
        const Segment& seg = session.segments[static_cast<size_t>(i)];
        const std::string spk = "spk" + std::to_string(hypothesis.labels[static_cast<size_t>(i)]);
        for (const Word& w : seg.words) {
            words.words.push_back({w.token, spk, w.start_s, w.end_s});
        }
    }
    if (!words.words.empty()) {
        write_reference(words, words_path);
    } else {
        // Degenerate sessions without words still get a valid (empty-words) doc.
        json doc;
        doc["schema"] = kWordsSchema;
        doc["session_id"] = hypothesis.session_id;
        doc["words"] = json::array();
        write_text(words_path, doc.dump(2) + "\n");
    }

    // RTTM: merge adjacent same-label segments into speaker turns.
    std::string rttm;
    int i = 0;
    char buf[256];
    while (i < session.size()) {
        int j = i;
        while (j + 1 < session.size() &&
               hypothesis.labels[static_cast<size_t>(j + 1)] == hypothesis.labels[static_cast<size_t>(i)]) {
            ++j;
        }
        const double tbeg = session.segments[static_cast<size_t>(i)].start_s;
        const double tend = session.segments[static_cast<size_t>(j)].end_s;
        std::snprintf(buf, sizeof(buf), "SPEAKER %s 1 %.9f %.9f <NA> <NA> spk%d <NA> <NA>\n",
                      hypothesis.session_id.c_str(), tbeg, tend - tbeg,
                      hypothesis.labels[static_cast<size_t>(i)]);
        rttm += buf;
        i = j + 1;
    }
    write_text(rttm_path, rttm);
}

TurnProbFile load_turn_probs(const std::string& path) {
    const json doc = parse_file(path);
    check_schema(doc, kTurnProbsSchema, path);
    TurnProbFile out;
    out.session_id = get_string(doc, "session_id", path);
    const json& probs = get_array(doc, "probs", path);
    for (size_t i = 0; i < probs.size(); ++i) {
        const std::string ctx = path + ": probs[" + std::to_string(i) + "]";
        TurnProbPoint p;
        p.time_s = get_finite(probs[i], "time_s", ctx);
        p.p = get_finite(probs[i], "p", ctx);
        if (p.p < 0.0 || p.p > 1.0) {
            throw ValidationError(ctx + ": p out of range [0, 1]");
        }
        out.probs.push_back(p);
    }
    return out;
}

ParamsFile load_params(const std::string& path) {
    const json doc = parse_file(path);
    check_schema(doc, kParamsSchema, path);
    ParamsFile out;
    out.fusion.alpha1 = get_finite(doc, "alpha1", path);
    out.fusion.alpha2 = get_finite(doc, "alpha2", path);
    out.fusion.beta1 = get_finite(doc, "beta1", path);
    out.fusion.beta2 = get_finite(doc, "beta2", path);
    out.fusion.theta = get_finite(doc, "theta", path);
    out.turn_threshold = get_finite(doc, "turn_threshold", path);
    out.fusion.validate();
    if (!(out.turn_threshold > 0.0 && out.turn_threshold < 1.0)) {
        throw ValidationError(path + ": turn_threshold must be in (0, 1)");
    }
    if (doc.contains("dialogue_f1")) out.dialogue_f1 = get_finite(doc, "dialogue_f1", path);
    if (doc.contains("turn_f1")) out.turn_f1 = get_finite(doc, "turn_f1", path);
    return out;
}

void write_params(const ParamsFile& params, const std::string& path) {
    json doc;
    doc["schema"] = kParamsSchema;
    doc["alpha1"] = params.fusion.alpha1;
    doc["alpha2"] = params.fusion.alpha2;
    doc["beta1"] = params.fusion.beta1;
    doc["beta2"] = params.fusion.beta2;
    doc["theta"] = params.fusion.theta;
    doc["turn_threshold"] = params.turn_threshold;
    if (params.dialogue_f1) doc["dialogue_f1"] = *params.dialogue_f1;
    if (params.turn_f1) doc["turn_f1"] = *params.turn_f1;
    write_text(path, doc.dump(2) + "\n");
}

std::string report_to_json(const MetricsReport& report) {
    json doc;
    doc["schema"] = kReportSchema;
    doc["session_id"] = report.session_id;
    doc["e_wer"] = report.e_wer;
    doc["e_cp_matched"] = report.e_cp_matched;
    doc["e_cp_all"] = report.e_cp_all;
    doc["e_speaker_wer"] = report.e_speaker_wer;
    doc["best_permutation"] = report.best_permutation;
    auto counts_json = [](const AlignmentCounts& c) {
        return json{{"n_ins", c.n_ins}, {"n_subs", c.n_subs}, {"n_del", c.n_del},
                    {"n_total", c.n_total}};
    };
    doc["counts"] = {{"wer", counts_json(report.wer_counts)},
                     {"cp_matched", counts_json(report.cp_matched_counts)},
                     {"cp_all", counts_json(report.cp_all_counts)},
                     {"speaker", {{"n_spk_cost", report.n_spk_cost},
                                  {"n_total", report.spk_n_total}}}};
    doc["approximate"] = report.approximate;
    return doc.dump(2) + "\n";
}

void write_report(const MetricsReport& report, const std::string& path) {
    write_text(path, report_to_json(report));
}

}  // namespace diar
