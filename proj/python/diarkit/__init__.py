"""Semantic-acoustic speaker diarization toolkit."""

from ._diarkit import (  # noqa: F401
    ClusteringResult,
    ClusterParams,
    ConfigError,
    DiarizationHypothesis,
    FusionParams,
    MetricsReport,
    ReferenceTranscript,
    RefineParams,
    SchemaError,
    Segment,
    SemanticScores,
    Session,
    SpeakerWord,
    SynthConfig,
    SynthOutput,
    ValidationError,
    Word,
    assign_outliers,
    brute_force_cpwer_oracle,
    canonicalize_labels,
    cosine_distance,
    cpwer,
    evaluate,
    fuse_dialogue,
    fuse_turn,
    generate_session,
    hypothesis_words,
    load_reference,
    load_semantic_scores,
    load_session,
    reference_words,
    run_pipeline,
    speaker_wer,
    spectral_cluster,
    wer,
    write_hypothesis,
    write_reference,
    write_semantic_scores,
    write_session,
)

__all__ = [name for name in dir() if not name.startswith("_")]
