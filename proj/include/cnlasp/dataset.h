#pragma once

// Template-driven NL/CNL pair generation, paraphrase expansion and dataset
// accounting.

#include <cnlasp/cnl.h>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnlasp::dataset {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Template placeholders:
///   noun_N Noun_N verb_N var_N num_N color_N PID_N
///   num_range(LO to HI)   num_choice(COUNT[, or|and])
/// A capitalized Noun_N shares its slot with noun_N and capitalizes the fill.
struct Placeholder {
    enum class Kind : std::uint8_t { Num, Verb, Noun, Var, Color, Pid, NumRange, NumChoice };

    Kind         kind = Kind::Num;
    int          index = 0;  // 0 for range/choice
    bool         capitalized = false;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    int          count = 0;
    std::string  connector;  // "", "or", "and"
    std::size_t  begin = 0;  // byte span in the template
    std::size_t  end = 0;
};

std::string_view toString(Placeholder::Kind k);

/// Placeholders of `text` in order of occurrence. Throws DatasetError on a
/// malformed numeric placeholder.
std::vector<Placeholder> placeholders(std::string_view text);

struct TemplatePair {
    std::string   id;
    cnl::Category category = cnl::Category::DefinitionConstCompound;
    std::string   cnl;
    std::string   nl;
};

/// Throws PlaceholderMismatch when the two sides do not carry the same slots.
void validate(const TemplatePair& t);

class PlaceholderMismatch : public DatasetError {
public:
    using DatasetError::DatasetError;
};

/// Template files: blocks of
///   [category-id]
///   CNL: ...
///   NL: ...
/// separated by blank lines. A header applies to all following pairs until
/// the next header. Lines starting with '#' are comments.
std::vector<TemplatePair> parseTemplates(std::string_view text, const std::string& idPrefix = "t");
std::vector<TemplatePair> loadTemplates(const std::filesystem::path& dirOrFile);

struct BagOfWords {
    std::vector<std::string> pids;
    std::vector<std::string> nouns;
    std::vector<std::string> verbs;
    std::vector<std::string> colors;

    /// Reads pids.txt, nouns.txt, verbs.txt, colors.txt (one entry per line).
    static BagOfWords load(const std::filesystem::path& dir);
};

/// Violations of the bag-of-words invariants (empty, duplicates).
std::vector<std::string> checkBagOfWords(const BagOfWords& bow);

class EmptyBagCategory : public DatasetError {
public:
    using DatasetError::DatasetError;
};

/// Fill values for a template pair. Indexed slots are keyed by (kind, index);
/// range and choice slots are filled by order of occurrence.
struct SlotAssignment {
    std::map<std::pair<Placeholder::Kind, int>, std::string> values;
    std::vector<std::string>                                 ranges;
    std::vector<std::string>                                 choices;

    friend bool operator==(const SlotAssignment&, const SlotAssignment&) = default;
};

/// "2 or 5", "1, 2, and 5".
std::string renderChoice(const std::vector<std::int64_t>& values, const std::string& connector);

std::string render(std::string_view text, const SlotAssignment& slots);

/// Seeded draw of every slot of `t`.
SlotAssignment drawSlots(const TemplatePair& t, const BagOfWords& bow, std::uint64_t seed);

enum class Origin : std::uint8_t { Source, Generated, Rephrased };
std::string_view      toString(Origin o);
std::optional<Origin> originFromString(std::string_view s);

struct DatasetRecord {
    std::string                id;
    std::string                nl;
    std::string                cnl;
    cnl::Category              category = cnl::Category::DefinitionConstCompound;
    Origin                     origin = Origin::Generated;
    std::optional<std::string> parent_id;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

nlohmann::json toJson(const DatasetRecord& r);
DatasetRecord  recordFromJson(const nlohmann::json& j);
std::string    toJsonl(const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> parseJsonl(std::string_view text);

DatasetRecord instantiateWith(const TemplatePair& t, const SlotAssignment& slots, std::string id = {});
DatasetRecord instantiate(const TemplatePair& t, const BagOfWords& bow, std::uint64_t seed, std::string id = {});

/// Placeholder-aware match of `sentence` against `text`: literals compare
/// case-insensitively with "a" and "an" interchangeable; PID slots take the
/// shortest word span that lets the rest match.
std::optional<SlotAssignment> matchTemplate(std::string_view text, std::string_view sentence);

struct CategoryCounts {
    std::int64_t source = 0;
    std::int64_t generated = 0;
    std::int64_t rephrased = 0;
    std::int64_t total = 0;

    friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

struct DatasetManifest {
    std::map<cnl::Category, CategoryCounts> rows;
    CategoryCounts                          grand;
    std::optional<std::int64_t>             rephrase_factor;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Counts records per category and origin; totals and grand totals are
/// computed, not copied.
DatasetManifest manifestOf(const std::vector<DatasetRecord>& records, std::optional<std::int64_t> k = std::nullopt);

nlohmann::json  toJson(const DatasetManifest& m);
DatasetManifest manifestFromJson(const nlohmann::json& j);

struct Violation {
    std::string  where;     // category id or "grand"
    std::string  identity;  // which equation failed
    std::int64_t expected = 0;
    std::int64_t actual = 0;
};

std::vector<Violation> auditManifest(const DatasetManifest& m);

class RetryExhausted : public DatasetError {
public:
    RetryExhausted(cnl::Category c, std::string templateId, const std::string& why);
    [[nodiscard]] cnl::Category      category() const { return category_; }
    [[nodiscard]] const std::string& templateId() const { return template_; }

private:
    cnl::Category category_;
    std::string   template_;
};

struct Generated {
    std::vector<DatasetRecord> records;
    DatasetManifest            manifest;
};

using Targets = std::map<cnl::Category, std::int64_t>;

/// Produces exactly targets[c] generated records per category, cycling over
/// the category's templates. Draws whose CNL fails check_syntax are retried
/// up to `retries` times.
Generated generateBalanced(const std::vector<TemplatePair>& templates, const BagOfWords& bow, const Targets& targets,
                           std::uint64_t seed, int retries = 32);

/// Generated counts that bring every category up to the largest source
/// count (or `floor`, when larger).
Targets equalizingTargets(const Targets& source, std::int64_t floor = 0);

/// Paraphrases NL text; CNL is never paraphrased.
class ParaphraseProvider {
public:
    virtual ~ParaphraseProvider() = default;
    /// `variant` counts from 0 to k-1 for one parent record.
    virtual std::string paraphrase(const DatasetRecord& parent, int variant) = 0;
};

class ProviderError : public DatasetError {
public:
    ProviderError(std::string recordId, std::size_t cursor, const std::string& why);
    [[nodiscard]] const std::string& recordId() const { return record_; }
    /// Number of parents fully expanded before the failure.
    [[nodiscard]] std::size_t        cursor() const { return cursor_; }

private:
    std::string record_;
    std::size_t cursor_;
};

class IdentityProvider : public ParaphraseProvider {
public:
    std::string paraphrase(const DatasetRecord& parent, int) override { return parent.nl; }
};

/// Word-level substitution; variant v uses the (v mod n)-th synonym of each
/// listed word, rotating by word position.
class SynonymTableProvider : public ParaphraseProvider {
public:
    explicit SynonymTableProvider(std::map<std::string, std::vector<std::string>> table) : table_(std::move(table)) {}
    /// One line per entry: "word: syn1, syn2".
    static SynonymTableProvider load(const std::filesystem::path& file);
    std::string paraphrase(const DatasetRecord& parent, int variant) override;

private:
    std::map<std::string, std::vector<std::string>> table_;
};

/// Settings recorded for hosted paraphrasing engines. Only forwarded to
/// external processes.
struct ParaphraseConfig {
    std::string engine = "text-davinci-003";
    double      temperature = 0.6;
    int         max_tokens = 1000;
    std::string prompt = "Rephrase the following sentence without changing its meaning: {nl}";
};

nlohmann::json toJson(const ParaphraseConfig& c);

struct RephraseOptions {
    int                                  k = 5;
    /// JSONL file receiving every completed parent's children; rerunning with
    /// the same file resumes after the last completed parent.
    std::optional<std::filesystem::path> checkpoint;
};

/// Adds k rephrased children for every source or generated record.
/// Returns the children only.
std::vector<DatasetRecord> rephraseExpand(const std::vector<DatasetRecord>& records, ParaphraseProvider& provider,
                                          const RephraseOptions& opts = {});

}  // namespace cnlasp::dataset
