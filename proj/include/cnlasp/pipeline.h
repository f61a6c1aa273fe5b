#pragma once

// NL -> CNL -> ASP orchestration: translators, compilation with per-sentence
// diagnostics, bounded equivalence against a gold program, and run reports.

#include <cnlasp/asp.h>
#include <cnlasp/cnl.h>
#include <cnlasp/dataset.h>
#include <cnlasp/metrics.h>
#include <cnlasp/plugin.h>
#include <cnlasp/solver.h>

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cnlasp::pipeline {

struct Candidate {
    std::string                  nl;
    std::optional<std::string>   cnl;
    std::optional<std::string>   error;   // "no-match", "timeout", plugin message
    std::optional<std::string>   source;  // template id for retrieval
    bool                         accepted = false;
    std::optional<cnl::Category> category;
    std::string                  reason;  // why check_syntax rejected it
};

class Translator {
public:
    virtual ~Translator() = default;
    /// One candidate per input, same order. Failures are recorded per
    /// candidate, never thrown.
    virtual std::vector<Candidate> translate(const std::vector<std::string>& nl) = 0;
    virtual nlohmann::json         describe() const = 0;
};

/// Template retrieval: an NL sentence that matches an NL template yields the
/// paired CNL template filled with the captured slots. Among several matches
/// the first whose CNL passes check_syntax wins, ranked by the number of
/// literal tokens in the NL template.
class RetrievalTranslator : public Translator {
public:
    explicit RetrievalTranslator(std::vector<dataset::TemplatePair> templates);

    struct Match {
        std::string cnl;
        std::string template_id;
    };
    std::optional<Match> retrieve(std::string_view nl) const;

    std::vector<Candidate> translate(const std::vector<std::string>& nl) override;
    nlohmann::json         describe() const override;

private:
    std::vector<dataset::TemplatePair> templates_;
    std::vector<std::size_t>           order_;
};

class ExternalTranslator : public Translator {
public:
    /// Throws plugin::TranslatorUnavailable when the handshake fails.
    ExternalTranslator(std::string command, plugin::Millis timeout, std::size_t window);

    std::vector<Candidate> translate(const std::vector<std::string>& nl) override;
    nlohmann::json         describe() const override;

    const plugin::ExchangeStats& stats() const { return stats_; }

private:
    std::string           command_;
    plugin::Millis        timeout_;
    std::size_t           window_;
    plugin::PluginProcess proc_;
    std::int64_t          next_ = 1;
    plugin::ExchangeStats stats_;
};

struct TranslatorSpec {
    enum class Kind { Retrieval, External };
    Kind                  kind = Kind::Retrieval;
    std::string           command;
    plugin::Millis        timeout{5000};
    std::size_t           window = 8;
    std::filesystem::path templates;  // empty: bundled templates

    /// {"kind": "retrieval"|"external", "command", "timeout_ms", "window", "templates"}
    static TranslatorSpec fromJson(const nlohmann::json& j);
};

std::unique_ptr<Translator> makeTranslator(const TranslatorSpec& spec);

/// Bounds for the equivalence check of a run.
struct EquivalenceSetup {
    std::vector<solver::Signature> signature;
    std::vector<asp::Term>         universe;
    solver::Sample                 sample;
    solver::EquivalenceOptions     options;

    /// {"signature": ["node/1"], "universe": ["1","red"], "projection": [...],
    ///  "sample": "exhaustive" | {"random": N, "seed": S}, "max_atoms": N,
    ///  "optimal_only": bool}
    static EquivalenceSetup fromJson(const nlohmann::json& j);
};

/// "42" -> integer, "red" -> constant.
asp::Term parseTerm(std::string_view text);

struct Diagnostic {
    std::size_t input = 0;  // index into the run's inputs
    std::string kind;       // CnlError / CompileError kind name
    std::string message;
    std::optional<std::size_t> column;
};

struct CompileResult {
    std::optional<asp::Program> program;
    std::vector<Diagnostic>     diagnostics;
};

/// Parses the accepted candidates as one document and compiles each
/// proposition on its own; the program is their ordered concatenation and is
/// absent if any accepted candidate failed.
CompileResult compileCandidates(const std::vector<Candidate>& candidates);

enum class EquivalenceStatus { Absent, Skipped, Equivalent, Different, Failed };
std::string_view toString(EquivalenceStatus s);

struct PipelineRun {
    std::vector<std::string>                  inputs;
    std::vector<Candidate>                    candidates;
    std::optional<asp::Program>               program;
    std::vector<Diagnostic>                   diagnostics;
    std::optional<asp::Program>               gold;
    metrics::SyntaxReport                     syntax;
    std::optional<metrics::EvalReport>        metrics;  // when reference CNL was given
    EquivalenceStatus                         equivalence = EquivalenceStatus::Absent;
    std::optional<solver::EquivalenceVerdict> verdict;
    std::string                               note;
    nlohmann::json                            translator;
};

struct RunOptions {
    std::optional<asp::Program>             gold;
    std::optional<EquivalenceSetup>         setup;
    std::optional<std::vector<std::string>> reference_cnl;  // aligned with inputs
    metrics::MetricConfig                   metric_config;
};

PipelineRun runPipeline(const std::vector<std::string>& inputs, Translator& translator, const RunOptions& opts = {});

nlohmann::json toJson(const PipelineRun& run);
std::string    summary(const PipelineRun& run);

/// Recompiles the persisted candidates of a run report; the printed program
/// equals the report's "asp_program" for an unmodified report.
CompileResult replay(const nlohmann::json& report);

/// Non-empty, non-comment ('#' or '%') lines.
std::vector<std::string> readLines(const std::filesystem::path& file);

/// A bundled problem directory: spec.nl, spec.cnl, gold.lp, problem.json and
/// instance files.
struct Problem {
    std::string                                          name;
    std::filesystem::path                                dir;
    std::vector<std::string>                             nl;
    std::vector<std::string>                             cnl;
    asp::Program                                         gold;
    std::vector<std::pair<std::string, asp::Program>>    instances;
    EquivalenceSetup                                     setup;
};

Problem              loadProblem(const std::filesystem::path& dir);
std::vector<Problem> loadProblems(const std::filesystem::path& root);

std::filesystem::path dataDir();

}  // namespace cnlasp::pipeline
