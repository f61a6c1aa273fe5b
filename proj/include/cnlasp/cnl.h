#pragma once

// Controlled natural language front end. The accepted grammar is written
// down in docs/grammar.md; this header exposes the AST, the document parser,
// and the single-sentence syntax checker.

#include <cnlasp/asp.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cnlasp::cnl {

enum class Category : std::uint8_t {
    DefinitionConstCompound,
    DefinitionWhen,
    DefinitionWhenever,
    NegativeConstraint,
    PositiveConstraint,
    QuantifiedChoice,
    WeakConstraint,
};

inline constexpr Category kAllCategories[] = {
    Category::DefinitionConstCompound, Category::DefinitionWhen,     Category::DefinitionWhenever,
    Category::NegativeConstraint,      Category::PositiveConstraint, Category::QuantifiedChoice,
    Category::WeakConstraint,
};

/// Machine identifier, e.g. "negative-constraint".
std::string_view         toString(Category c);
/// Row label used in dataset accounting tables, e.g. "Neg. Constraint".
std::string_view         tableLabel(Category c);
std::optional<Category> categoryFromString(std::string_view s);

struct EntityDef {
    std::string              name;
    std::vector<std::string> key_attrs;
    std::vector<std::string> value_attrs;
    bool                     implicit = false;  // introduced by first use in a head

    [[nodiscard]] std::size_t                arity() const { return key_attrs.size() + value_attrs.size(); }
    [[nodiscard]] std::optional<std::size_t> position(std::string_view attr) const;

    friend bool operator==(const EntityDef&, const EntityDef&) = default;
};

/// `attribute` empty means a positional binding ("a node X") of the first key.
struct Binding {
    std::string attribute;
    asp::Term   value;

    friend bool operator==(const Binding&, const Binding&) = default;
};

struct EntityRef {
    std::string          entity;
    std::vector<Binding> bindings;

    friend bool operator==(const EntityRef&, const EntityRef&) = default;
};

struct RefCondition {
    EntityRef ref;
    bool      negated = false;

    friend bool operator==(const RefCondition&, const RefCondition&) = default;
};

using Condition = std::variant<RefCondition, asp::Comparison>;

struct Definition {
    EntityDef entity;
};

/// Covers both the "holds when" and the "Whenever ... then we must have" forms.
struct DerivedDefinition {
    EntityRef              head;
    std::vector<Condition> conditions;
};

/// Prohibitions and requirements.
struct Constraint {
    Condition              assertion;
    std::vector<Condition> conditions;
};

struct Choice {
    std::vector<Condition>      conditions;
    std::vector<EntityRef>      alternatives;
    bool                        bounded = false;
    std::optional<std::int64_t> lower;
    std::optional<std::int64_t> upper;
    std::vector<RefCondition>   element_conditions;
};

struct Preference {
    Condition              assertion;
    std::vector<Condition> conditions;
    asp::Term              weight = asp::Term::integer(1);
    std::int64_t           level = 1;
};

using Payload = std::variant<Definition, DerivedDefinition, Constraint, Choice, Preference>;

struct Proposition {
    Category    category;
    Payload     payload;
    std::size_t sentence = 0;
    std::string text;
};

class SymbolTable {
public:
    [[nodiscard]] const EntityDef* find(std::string_view name) const;
    [[nodiscard]] bool             contains(std::string_view name) const { return find(name) != nullptr; }
    [[nodiscard]] std::size_t      size() const { return defs_.size(); }
    [[nodiscard]] const std::map<std::string, EntityDef, std::less<>>& entries() const { return defs_; }

    void insert(EntityDef def) { defs_.insert_or_assign(def.name, std::move(def)); }
    /// Copies every entry of `other` that is not already present.
    void merge(const SymbolTable& other);

private:
    std::map<std::string, EntityDef, std::less<>> defs_;
};

struct Document {
    std::vector<Proposition> propositions;
    SymbolTable              symbols;
};

class CnlError : public std::runtime_error {
public:
    enum class Kind : std::uint8_t { Syntax, UnknownEntity, UnknownAttribute, DuplicateBinding, Redefinition };

    CnlError(Kind kind, std::size_t sentence, std::size_t position, std::string message,
             std::vector<std::string> expected = {}, std::string name = {});

    [[nodiscard]] Kind                            kind() const { return kind_; }
    [[nodiscard]] std::size_t                     sentence() const { return sentence_; }
    /// 1-based character column inside the offending sentence.
    [[nodiscard]] std::size_t                     position() const { return position_; }
    [[nodiscard]] const std::vector<std::string>& expected() const { return expected_; }
    /// Entity or attribute name for resolution errors.
    [[nodiscard]] const std::string&              name() const { return name_; }
    [[nodiscard]] const std::string&              message() const { return message_; }

private:
    Kind                     kind_;
    std::size_t              sentence_;
    std::size_t              position_;
    std::string              message_;
    std::vector<std::string> expected_;
    std::string              name_;
};

std::string_view toString(CnlError::Kind k);

struct SentenceSpan {
    std::string text;
    std::size_t offset = 0;  // byte offset in the source text
};

/// Splits on '.' followed by whitespace or end of input. Lines whose first
/// non-blank character is '%' are comments.
std::vector<SentenceSpan> splitSentences(std::string_view text);

struct ParseOptions {
    /// Definitions visible to the document in addition to its own.
    const SymbolTable* ambient = nullptr;
    /// When false, entity references are not resolved (grammar check only).
    bool resolve = true;
};

Document parseCnl(std::string_view text, const ParseOptions& opts = {});

/// Parses a single sentence (the trailing '.' is required).
Proposition parseSentence(std::string_view sentence, std::size_t index = 0);

struct SyntaxVerdict {
    bool                    accepted = false;
    std::string             reason;
    std::optional<Category> category;
};

/// Accepted iff parseCnl(sentence) succeeds. With an ambient table, entity
/// references are resolved against it; without one, only the grammar is
/// checked.
SyntaxVerdict checkSyntax(std::string_view sentence, const SymbolTable* ambient = nullptr);

Category categorize(const Proposition& p);

/// Resolves references of `doc` against its own definitions and `ambient`,
/// introducing entities first used in heads. Throws CnlError.
void resolve(Document& doc, const SymbolTable* ambient = nullptr);

}  // namespace cnlasp::cnl
