#pragma once

// Desk-scale grounding, stable-model enumeration and bounded uniform
// equivalence. Meant as an oracle for cross-checking small programs, not as
// a competitive solver.

#include <cnlasp/asp.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnlasp::solver {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GroundingBlowup : public SolverError {
public:
    using SolverError::SolverError;
};

class UniverseTooLarge : public SolverError {
public:
    using SolverError::SolverError;
};

struct GroundElement {
    std::size_t              atom = 0;
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
};

struct GroundRule {
    enum class Kind : std::uint8_t { Disjunctive, Choice, Weak };

    Kind                        kind = Kind::Disjunctive;
    std::vector<std::size_t>    head;  // empty for constraints
    std::vector<GroundElement>  elements;
    std::optional<std::int64_t> lower;
    std::optional<std::int64_t> upper;
    std::vector<std::size_t>    pos;
    std::vector<std::size_t>    neg;
    std::int64_t                weight = 0;
    std::int64_t                level = 0;
    std::vector<asp::Term>      terms;
};

class GroundProgram {
public:
    [[nodiscard]] const std::vector<asp::Atom>&  atoms() const { return atoms_; }
    [[nodiscard]] const std::vector<GroundRule>& rules() const { return rules_; }
    [[nodiscard]] std::optional<std::size_t>     find(const asp::Atom& a) const;

    std::size_t intern(const asp::Atom& a);
    void        add(GroundRule r) { rules_.push_back(std::move(r)); }
    void        addFact(const asp::Atom& a);

    /// The ground rules as a printable program.
    [[nodiscard]] asp::Program toProgram() const;

private:
    std::vector<asp::Atom>             atoms_;
    std::map<asp::Atom, std::size_t>   index_;
    std::vector<GroundRule>            rules_;
};

struct GroundOptions {
    std::size_t max_instantiations = 1'000'000;
};

/// Instantiates every rule over `universe` plus the constants of `p`.
/// Comparisons are evaluated; a rule with a false comparison is dropped.
GroundProgram ground(const asp::Program& p, const std::vector<asp::Term>& universe, const GroundOptions& opts = {});

struct AnswerSet {
    std::vector<asp::Atom>             atoms;  // sorted
    std::map<std::int64_t, std::int64_t> costs;  // level -> summed weight

    friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

struct SolveOptions {
    /// Bound on atoms left undecided after simplification.
    std::size_t max_atoms = 22;
    /// Keep only answer sets with optimal cost (highest level first).
    bool        optimal_only = false;
};

/// All stable models of `g`, sorted by atom list.
std::vector<AnswerSet> answerSets(const GroundProgram& g, const SolveOptions& opts = {});

/// ground() over the program's own constants, then answerSets().
std::vector<AnswerSet> solve(const asp::Program& p, const SolveOptions& sopts = {}, const GroundOptions& gopts = {});

struct Signature {
    std::string predicate;
    std::size_t arity = 0;

    friend auto operator<=>(const Signature&, const Signature&) = default;
};

/// Parses "pred/arity".
Signature parseSignature(std::string_view text);

using Family = std::vector<std::vector<asp::Atom>>;

/// Sorted, duplicate-free family of atom sets restricted to `keep` (all atoms
/// when empty).
Family family(const std::vector<AnswerSet>& sets, const std::vector<Signature>& keep = {});

struct Sample {
    bool          exhaustive = true;
    std::size_t   count = 0;
    std::uint64_t seed = 0;

    static Sample all() { return {}; }
    static Sample random(std::size_t n, std::uint64_t seed) { return {false, n, seed}; }
};

struct Counterexample {
    std::vector<asp::Atom> facts;
    Family                 first;
    Family                 second;
};

struct EquivalenceVerdict {
    bool                          equivalent = true;
    std::optional<Counterexample> counterexample;
    std::size_t                   tested = 0;
};

struct EquivalenceOptions {
    GroundOptions          ground;
    SolveOptions           solve;
    std::vector<Signature> projection;
    /// Exhaustive mode refuses more candidate fact atoms than this.
    std::size_t            max_fact_atoms = 24;
};

/// Raised when solving P ∪ F fails; carries F.
class EquivalenceError : public SolverError {
public:
    EquivalenceError(const std::string& what, std::vector<asp::Atom> facts)
        : SolverError(what), facts_(std::move(facts)) {}
    [[nodiscard]] const std::vector<asp::Atom>& facts() const { return facts_; }

private:
    std::vector<asp::Atom> facts_;
};

/// All ground atoms over `sig` and `universe`, in a fixed order.
std::vector<asp::Atom> factAtoms(const std::vector<Signature>& sig, const std::vector<asp::Term>& universe);

/// Families of P ∪ F for a given fact set.
Family familyWith(const asp::Program& p, const std::vector<asp::Atom>& facts, const std::vector<asp::Term>& universe,
                  const EquivalenceOptions& opts = {});

EquivalenceVerdict checkUniformEquivalence(const asp::Program& p1, const asp::Program& p2,
                                           const std::vector<Signature>& sig, const std::vector<asp::Term>& universe,
                                           const Sample& sample = Sample::all(), const EquivalenceOptions& opts = {});

}  // namespace cnlasp::solver
