#include <cnlasp/solver.h>

#include <algorithm>
#include <charconv>
#include <random>
#include <set>

namespace cnlasp::solver {

Signature parseSignature(std::string_view text) {
    auto slash = text.rfind('/');
    if (slash == std::string_view::npos || slash == 0) throw SolverError("bad signature '" + std::string(text) + "'");
    Signature s{std::string(text.substr(0, slash)), 0};
    auto      rest = text.substr(slash + 1);
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), s.arity);
    if (ec != std::errc() || p != rest.data() + rest.size())
        throw SolverError("bad signature '" + std::string(text) + "'");
    return s;
}

Family family(const std::vector<AnswerSet>& sets, const std::vector<Signature>& keep) {
    std::set<std::vector<asp::Atom>> out;
    for (const auto& s : sets) {
        std::vector<asp::Atom> atoms;
        for (const auto& a : s.atoms) {
            if (keep.empty() || std::find(keep.begin(), keep.end(), Signature{a.predicate, a.arity()}) != keep.end())
                atoms.push_back(a);
        }
        out.insert(std::move(atoms));
    }
    return {out.begin(), out.end()};
}

std::vector<asp::Atom> factAtoms(const std::vector<Signature>& sig, const std::vector<asp::Term>& universe) {
    std::vector<asp::Atom> out;
    for (const auto& s : sig) {
        std::vector<std::size_t> idx(s.arity, 0);
        if (universe.empty() && s.arity > 0) continue;
        for (;;) {
            asp::Atom a{s.predicate, {}};
            for (auto i : idx) a.args.push_back(universe[i]);
            out.push_back(std::move(a));
            std::size_t k = s.arity;
            while (k > 0 && ++idx[k - 1] == universe.size()) idx[--k] = 0;
            if (k == 0) break;
        }
    }
    return out;
}

namespace {

std::string describe(const std::vector<asp::Atom>& facts) {
    std::string out = "{";
    for (std::size_t i = 0; i < facts.size(); ++i) out += (i ? ", " : "") + asp::toString(facts[i]);
    return out + "}";
}

Family familyOf(GroundProgram g, const std::vector<asp::Atom>& facts, const EquivalenceOptions& opts) {
    for (const auto& f : facts) g.addFact(f);
    return family(answerSets(g, opts.solve), opts.projection);
}

}  // namespace

Family familyWith(const asp::Program& p, const std::vector<asp::Atom>& facts, const std::vector<asp::Term>& universe,
                  const EquivalenceOptions& opts) {
    return familyOf(ground(p, universe, opts.ground), facts, opts);
}

EquivalenceVerdict checkUniformEquivalence(const asp::Program& p1, const asp::Program& p2,
                                           const std::vector<Signature>& sig, const std::vector<asp::Term>& universe,
                                           const Sample& sample, const EquivalenceOptions& opts) {
    auto candidates = factAtoms(sig, universe);
    if (sample.exhaustive && candidates.size() > opts.max_fact_atoms) {
        throw SolverError(std::to_string(candidates.size()) + " candidate fact atoms exceed the exhaustive bound of " +
                          std::to_string(opts.max_fact_atoms));
    }
    // Fact constants all come from the universe, so one grounding serves every F.
    GroundProgram g1 = ground(p1, universe, opts.ground);
    GroundProgram g2 = ground(p2, universe, opts.ground);

    EquivalenceVerdict verdict;
    auto test = [&](const std::vector<asp::Atom>& facts) {
        ++verdict.tested;
        Family a;
        Family b;
        try {
            a = familyOf(g1, facts, opts);
            b = familyOf(g2, facts, opts);
        }
        catch (const SolverError& e) {
            throw EquivalenceError(std::string(e.what()) + " with facts " + describe(facts), facts);
        }
        if (a == b) return true;
        verdict.equivalent = false;
        verdict.counterexample = Counterexample{facts, std::move(a), std::move(b)};
        return false;
    };

    if (sample.exhaustive) {
        const std::uint64_t total = std::uint64_t{1} << candidates.size();
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            std::vector<asp::Atom> facts;
            for (std::size_t i = 0; i < candidates.size(); ++i)
                if (mask >> i & 1) facts.push_back(candidates[i]);
            if (!test(facts)) break;
        }
    }
    else {
        std::mt19937_64 rng(sample.seed);
        for (std::size_t n = 0; n < sample.count; ++n) {
            std::vector<asp::Atom> facts;
            for (const auto& c : candidates)
                if (rng() >> 63) facts.push_back(c);
            if (!test(facts)) break;
        }
    }
    return verdict;
}

}  // namespace cnlasp::solver
