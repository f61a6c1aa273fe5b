#pragma once

// Corpus metrics for NL->CNL translation: cumulative BLEU, METEOR (exact
// matching only), syntactic accuracy and token-level precision/recall.

#include <cnlasp/cnl.h>

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cnlasp::metrics {

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class EmptyCorpus : public MetricError {
public:
    using MetricError::MetricError;
};

/// Lowercased; runs of letters, digits, '_' and '\'' form a token, every
/// other non-space character is a token of its own.
std::vector<std::string> tokenize(std::string_view text);

inline constexpr std::string_view kTokenization = "whitespace+punctuation, lowercased";

struct EvalPair {
    std::string              hypothesis;
    std::vector<std::string> references;  // at least one
};

struct MetricConfig {
    int    bleu_max_n = 4;
    bool   bleu_smoothing = false;  // add-one on orders >= 2
    double meteor_alpha = 0.9;
    double meteor_beta = 3.0;
    double meteor_gamma = 0.5;

    /// Throws MetricError when a parameter is out of range.
    void validate() const;
};

/// BLEU-1..BLEU-max_n, cumulative, from corpus-level clipped counts.
std::vector<double> corpusBleu(const std::vector<EvalPair>& pairs, const MetricConfig& cfg = {});

struct MeteorStats {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;
    double      score = 0;
};

/// Exact-match alignment of one hypothesis against one reference.
MeteorStats meteor(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                   const MetricConfig& cfg = {});

/// Mean over pairs of the best score against any reference.
double corpusMeteor(const std::vector<EvalPair>& pairs, const MetricConfig& cfg = {});

struct SyntaxReport {
    std::size_t                     total = 0;
    std::size_t                     accepted = 0;
    double                          accuracy = 0;
    std::vector<cnl::SyntaxVerdict> verdicts;
};

SyntaxReport syntacticAccuracy(const std::vector<std::string>& cnlSentences);

struct Prf {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double exact_match_accuracy = 0;
};

/// Per-pair token multiset overlap, macro-averaged; F1 is the harmonic mean
/// of the averaged precision and recall.
Prf tokenPrf(const std::vector<EvalPair>& pairs);

struct EvalReport {
    std::vector<double>         bleu;  // bleu[k-1] = BLEU-k
    double                      meteor = 0;
    Prf                         prf;
    std::optional<SyntaxReport> syntax;
    MetricConfig                config;
};

/// All metrics; syntactic accuracy only when `cnlSyntax` is set (hypotheses
/// are then CNL sentences).
EvalReport evaluate(const std::vector<EvalPair>& pairs, const MetricConfig& cfg = {}, bool cnlSyntax = false);

nlohmann::json toJson(const EvalReport& r);
std::string    table(const EvalReport& r);

}  // namespace cnlasp::metrics
