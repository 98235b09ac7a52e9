#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diarkit/fit.hpp"
#include "diarkit/io.hpp"
#include "diarkit/refine.hpp"
#include "diarkit/synth.hpp"

namespace py = pybind11;
using namespace diar;

namespace {

PipelineParams make_params(const std::string& mode, const FusionParams& fusion,
                           const RefineParams& refine, const ClusterParams& cluster,
                           const std::string& granularity, double max_shift_s,
                           double q_window_s) {
    PipelineParams params;
    params.mode = mode_from_name(mode);
    params.fusion = fusion;
    params.refine = refine;
    params.cluster = cluster;
    params.granularity =
        granularity == "segment" ? SplitGranularity::kSegment : SplitGranularity::kSpan;
    params.max_shift_s = max_shift_s;
    params.q_window_s = q_window_s;
    return params;
}

}  // namespace

PYBIND11_MODULE(_diarkit, m) {
    m.doc() = "Semantic-acoustic speaker diarization backend";

    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<ConfigError>(m, "ConfigError");

    py::class_<Word>(m, "Word")
        .def(py::init<>())
        .def_readwrite("token", &Word::token)
        .def_readwrite("start_s", &Word::start_s)
        .def_readwrite("end_s", &Word::end_s);

    py::class_<Segment>(m, "Segment")
        .def(py::init<>())
        .def_readwrite("id", &Segment::id)
        .def_readwrite("start_s", &Segment::start_s)
        .def_readwrite("end_s", &Segment::end_s)
        .def_readwrite("embedding", &Segment::embedding)
        .def_readwrite("words", &Segment::words)
        .def("duration", &Segment::duration);

    py::class_<Session>(m, "Session")
        .def(py::init<>())
        .def_readwrite("session_id", &Session::session_id)
        .def_readwrite("embedding_dim", &Session::embedding_dim)
        .def_readwrite("segments", &Session::segments)
        .def("size", &Session::size);

    py::class_<FusionParams>(m, "FusionParams")
        .def(py::init<>())
        .def_readwrite("alpha1", &FusionParams::alpha1)
        .def_readwrite("alpha2", &FusionParams::alpha2)
        .def_readwrite("beta1", &FusionParams::beta1)
        .def_readwrite("beta2", &FusionParams::beta2)
        .def_readwrite("theta", &FusionParams::theta);

    py::class_<RefineParams>(m, "RefineParams")
        .def(py::init<>())
        .def_readwrite("tau_split", &RefineParams::tau_split)
        .def_readwrite("tau_merge", &RefineParams::tau_merge)
        .def_readwrite("turn_threshold", &RefineParams::turn_threshold)
        .def_readwrite("min_segment_s", &RefineParams::min_segment_s);

    py::class_<ClusterParams>(m, "ClusterParams")
        .def(py::init<>())
        .def_readwrite("p_percentile", &ClusterParams::p_percentile)
        .def_readwrite("k_max", &ClusterParams::k_max)
        .def_readwrite("k_fixed", &ClusterParams::k_fixed)
        .def_readwrite("min_segment_s", &ClusterParams::min_segment_s)
        .def_readwrite("seed", &ClusterParams::seed);

    py::class_<DiarizationHypothesis>(m, "DiarizationHypothesis")
        .def(py::init<>())
        .def_readwrite("session_id", &DiarizationHypothesis::session_id)
        .def_readwrite("labels", &DiarizationHypothesis::labels);

    py::class_<ClusteringResult>(m, "ClusteringResult")
        .def_readonly("labels", &ClusteringResult::labels)
        .def_readonly("k", &ClusteringResult::k)
        .def_readonly("centroids", &ClusteringResult::centroids)
        .def_readonly("excluded", &ClusteringResult::excluded);

    py::class_<SemanticScores>(m, "SemanticScores")
        .def(py::init<>())
        .def_readwrite("session_id", &SemanticScores::session_id);

    py::class_<ReferenceTranscript>(m, "ReferenceTranscript")
        .def(py::init<>())
        .def_readwrite("session_id", &ReferenceTranscript::session_id)
        .def("__len__", [](const ReferenceTranscript& t) { return t.words.size(); });

    py::class_<SpeakerWord>(m, "SpeakerWord")
        .def(py::init<>())
        .def(py::init([](const std::string& token, const std::string& speaker) {
                 return SpeakerWord{token, speaker};
             }),
             py::arg("token"), py::arg("speaker"))
        .def_readwrite("token", &SpeakerWord::token)
        .def_readwrite("speaker", &SpeakerWord::speaker);

    py::class_<MetricsReport>(m, "MetricsReport")
        .def_readonly("session_id", &MetricsReport::session_id)
        .def_readonly("e_wer", &MetricsReport::e_wer)
        .def_readonly("e_cp_matched", &MetricsReport::e_cp_matched)
        .def_readonly("e_cp_all", &MetricsReport::e_cp_all)
        .def_readonly("e_speaker_wer", &MetricsReport::e_speaker_wer)
        .def_readonly("best_permutation", &MetricsReport::best_permutation)
        .def_readonly("approximate", &MetricsReport::approximate);

    py::class_<SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("n_speakers", &SynthConfig::n_speakers)
        .def_readwrite("n_segments", &SynthConfig::n_segments)
        .def_readwrite("embedding_dim", &SynthConfig::embedding_dim)
        .def_readwrite("acoustic_noise", &SynthConfig::acoustic_noise)
        .def_readwrite("semantic_turn_accuracy", &SynthConfig::semantic_turn_accuracy)
        .def_readwrite("dialogue_accuracy", &SynthConfig::dialogue_accuracy)
        .def_readwrite("turn_rate", &SynthConfig::turn_rate)
        .def_readwrite("words_min", &SynthConfig::words_min)
        .def_readwrite("words_max", &SynthConfig::words_max)
        .def_readwrite("token_overlap", &SynthConfig::token_overlap)
        .def_readwrite("substitution_rate", &SynthConfig::substitution_rate)
        .def_readwrite("seed", &SynthConfig::seed)
        .def_readwrite("session_id", &SynthConfig::session_id);

    py::class_<SynthOutput>(m, "SynthOutput")
        .def_readonly("session", &SynthOutput::session)
        .def_readonly("scores", &SynthOutput::scores)
        .def_readonly("reference", &SynthOutput::reference)
        .def_readonly("true_speakers", &SynthOutput::true_speakers);

    m.def("cosine_distance",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              return cosine_distance(a, b);
          },
          py::arg("a"), py::arg("b"));
    m.def("canonicalize_labels",
          py::overload_cast<const std::vector<int>&>(&canonicalize_labels), py::arg("labels"));

    m.def("load_session", &load_session, py::arg("path"));
    m.def("write_session", &write_session, py::arg("session"), py::arg("path"));
    m.def("load_semantic_scores", &load_semantic_scores, py::arg("path"), py::arg("session"));
    m.def("write_semantic_scores", &write_semantic_scores, py::arg("scores"), py::arg("path"));
    m.def("load_reference", &load_reference, py::arg("path"));
    m.def("write_reference", &write_reference, py::arg("transcript"), py::arg("path"));
    m.def("write_hypothesis", &write_hypothesis, py::arg("hypothesis"), py::arg("session"),
          py::arg("words_path"), py::arg("rttm_path"));
    m.def("hypothesis_words", &hypothesis_words, py::arg("hypothesis"), py::arg("session"));
    m.def("reference_words", &reference_words, py::arg("transcript"));

    m.def("spectral_cluster", &spectral_cluster, py::arg("session"), py::arg("params"));
    m.def("assign_outliers", &assign_outliers, py::arg("result"), py::arg("session"));

    m.def("fuse_dialogue",
          [](int z_semantic, int z_acoustic, double p_s, double d_p, double d_q,
             const FusionParams& params) {
              const FuseDialogueResult r =
                  fuse_dialogue(z_semantic, z_acoustic, p_s, d_p, d_q, params);
              return py::make_tuple(r.s_hat, r.z_fused);
          },
          py::arg("z_semantic"), py::arg("z_acoustic"), py::arg("p_s"), py::arg("d_p"),
          py::arg("d_q"), py::arg("params"));
    m.def("fuse_turn", &fuse_turn, py::arg("p_semantic"), py::arg("q_acoustic"),
          py::arg("params"));

    m.def("run_pipeline",
          [](const Session& session, const SemanticScores* scores, const std::string& mode,
             const FusionParams& fusion, const RefineParams& refine, const ClusterParams& cluster,
             const std::string& granularity, double max_shift_s, double q_window_s) {
              const PipelineParams params = make_params(mode, fusion, refine, cluster,
                                                        granularity, max_shift_s, q_window_s);
              return run_pipeline(session, scores, params);
          },
          py::arg("session"), py::arg("scores") = nullptr, py::arg("mode") = "multimodal",
          py::arg("fusion") = FusionParams{}, py::arg("refine") = RefineParams{},
          py::arg("cluster") = ClusterParams{}, py::arg("granularity") = "span",
          py::arg("max_shift_s") = 1.0, py::arg("q_window_s") = 2.0);

    m.def("wer",
          [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
              const WerResult r = wer(ref, hyp);
              return py::make_tuple(r.e_wer, r.counts.n_ins, r.counts.n_subs, r.counts.n_del);
          },
          py::arg("reference"), py::arg("hypothesis"));
    m.def("cpwer",
          [](const std::vector<SpeakerWord>& ref, const std::vector<SpeakerWord>& hyp,
             const std::string& variant) {
              const CpwerResult r =
                  cpwer(ref, hyp, variant == "all" ? CpVariant::kAll : CpVariant::kMatched);
              return py::make_tuple(r.e, r.mapping, r.approximate);
          },
          py::arg("reference"), py::arg("hypothesis"), py::arg("variant") = "matched");
    m.def("speaker_wer",
          [](const std::vector<SpeakerWord>& ref, const std::vector<SpeakerWord>& hyp) {
              const SpeakerWerResult r = speaker_wer(ref, hyp);
              return py::make_tuple(r.e, r.n_spk_cost);
          },
          py::arg("reference"), py::arg("hypothesis"));
    m.def("brute_force_cpwer_oracle",
          [](const std::vector<SpeakerWord>& ref, const std::vector<SpeakerWord>& hyp,
             const std::string& variant) {
              return brute_force_cpwer_oracle(
                  ref, hyp, variant == "all" ? CpVariant::kAll : CpVariant::kMatched);
          },
          py::arg("reference"), py::arg("hypothesis"), py::arg("variant") = "matched");
    m.def("evaluate", &evaluate, py::arg("reference"), py::arg("hypothesis"),
          py::arg("session_id") = "");

    m.def("generate_session", &generate_session, py::arg("config"));
}
