#pragma once

#include <map>
#include <string>
#include <vector>

#include "diarkit/error.hpp"

namespace diar {

struct AlignmentCounts {
    long long n_ins = 0;
    long long n_subs = 0;
    long long n_del = 0;
    long long n_total = 0;     // reference words in the denominator
    long long n_spk_cost = 0;  // speaker-ID modification operations

    long long edits() const { return n_ins + n_subs + n_del; }
};

struct WerResult {
    double e_wer = 0.0;
    AlignmentCounts counts;
};

// Levenshtein alignment with unit costs. Traceback tie preference:
// deletion > insertion > substitution.
WerResult wer(const std::vector<std::string>& reference, const std::vector<std::string>& hypothesis);

struct SpeakerWord {
    std::string token;
    std::string speaker;
};

enum class CpVariant { kMatched, kAll };

struct CpwerResult {
    double e = 0.0;
    AlignmentCounts counts;
    std::map<std::string, std::string> mapping;  // hypothesis speaker -> reference speaker
    bool approximate = false;                    // Hungarian regime (> 8 speakers on a side)
};

// Concatenated minimum-permutation WER. `kMatched` drops unmatched speakers'
// words from both numerator and denominator; `kAll` charges unmatched
// reference words as deletions and unmatched hypothesis words as insertions
// over the full reference count.
CpwerResult cpwer(const std::vector<SpeakerWord>& reference,
                  const std::vector<SpeakerWord>& hypothesis, CpVariant variant);

struct SpeakerWerResult {
    double e = 0.0;
    long long n_spk_cost = 0;
    long long n_total = 0;
    std::map<std::string, std::string> mapping;
    bool approximate = false;
};

// Extended edit distance over the full (token, speaker) sequences: insertion,
// deletion, substitution on token mismatch, and a speaker-modify operation on
// token match with mapped-speaker mismatch. Token-edit count is the primary
// cost and the speaker-modify count secondary, so the text alignment always
// matches plain WER; the speaker cost is then minimized over permutations.
SpeakerWerResult speaker_wer(const std::vector<SpeakerWord>& reference,
                             const std::vector<SpeakerWord>& hypothesis);

// Exact reference for cpwer: enumerates every injective speaker mapping and
// applies the matched/all conventions explicitly, with its own edit distance.
// Limits: <= 5 speakers per side, <= 30 words per side.
double brute_force_cpwer_oracle(const std::vector<SpeakerWord>& reference,
                                const std::vector<SpeakerWord>& hypothesis, CpVariant variant);

struct MetricsReport {
    std::string session_id;
    double e_wer = 0.0;
    double e_cp_matched = 0.0;
    double e_cp_all = 0.0;
    double e_speaker_wer = 0.0;
    std::map<std::string, std::string> best_permutation;  // from the matched variant
    AlignmentCounts wer_counts;
    AlignmentCounts cp_matched_counts;
    AlignmentCounts cp_all_counts;
    long long n_spk_cost = 0;
    long long spk_n_total = 0;
    bool approximate = false;
};

// Runs all metrics of the report on speaker-attributed word sequences.
MetricsReport evaluate(const std::vector<SpeakerWord>& reference,
                       const std::vector<SpeakerWord>& hypothesis,
                       const std::string& session_id = "");

// Corpus-level report: summed error counts over summed totals, not averaged
// ratios.
MetricsReport aggregate_reports(const std::vector<MetricsReport>& reports);

}  // namespace diar
