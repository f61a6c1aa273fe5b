#include <cnlasp/solver.h>

#include <algorithm>
#include <set>

namespace cnlasp::solver {

namespace {

enum : std::int8_t { False = 0, True = 1, Unknown = 2 };

// Satisfiability of a small CNF; literals are 2*var (+1 when negative).
class Dpll {
public:
    Dpll(std::size_t vars, std::vector<std::vector<std::size_t>> clauses)
        : value_(vars, Unknown), clauses_(std::move(clauses)) {}

    bool satisfiable() { return search(); }

private:
    bool litTrue(std::size_t l) const {
        auto v = value_[l / 2];
        return v != Unknown && (v == True) != (l & 1);
    }
    bool litFalse(std::size_t l) const {
        auto v = value_[l / 2];
        return v != Unknown && (v == True) == static_cast<bool>(l & 1);
    }

    // false on conflict
    bool propagate(std::vector<std::size_t>& trail) {
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& c : clauses_) {
                std::size_t open = 0;
                std::size_t last = 0;
                bool        sat = false;
                for (auto l : c) {
                    if (litTrue(l)) {
                        sat = true;
                        break;
                    }
                    if (!litFalse(l)) {
                        ++open;
                        last = l;
                    }
                }
                if (sat) continue;
                if (open == 0) return false;
                if (open == 1) {
                    value_[last / 2] = (last & 1) ? False : True;
                    trail.push_back(last / 2);
                    changed = true;
                }
            }
        }
        return true;
    }

    bool search() {
        std::vector<std::size_t> trail;
        if (!propagate(trail)) {
            for (auto v : trail) value_[v] = Unknown;
            return false;
        }
        auto it = std::find(value_.begin(), value_.end(), Unknown);
        if (it == value_.end()) return true;
        auto var = static_cast<std::size_t>(it - value_.begin());
        for (std::int8_t choice : {False, True}) {
            value_[var] = choice;
            if (search()) return true;
        }
        value_[var] = Unknown;
        for (auto v : trail) value_[v] = Unknown;
        return false;
    }

    std::vector<std::int8_t>              value_;
    std::vector<std::vector<std::size_t>> clauses_;
};

class Enumerator {
public:
    Enumerator(const GroundProgram& g, const SolveOptions& opts) : g_(g), opts_(opts) {}

    std::vector<AnswerSet> run() {
        simplify();
        if (open_.size() > opts_.max_atoms) {
            throw UniverseTooLarge(std::to_string(open_.size()) + " undecided atoms exceed the bound of " +
                                   std::to_string(opts_.max_atoms));
        }
        clauses();
        if (conflict_) return {};
        // Unit clauses over the open atoms.
        for (const auto& c : clauses_) {
            if (c.size() != 1 || litTrue(c[0])) continue;
            if (!litOpen(c[0]) || !assign(c[0] / 2, (c[0] & 1) ? False : True)) return {};
        }
        if (!propagate(trail_.size())) return {};
        search(0);
        std::sort(out_.begin(), out_.end(), [](const AnswerSet& a, const AnswerSet& b) { return a.atoms < b.atoms; });
        return std::move(out_);
    }

private:
    // Possible atoms ignore negation; certain atoms follow from facts and
    // negation-free single-head rules. Everything else stays open.
    void simplify() {
        const auto n = g_.atoms().size();
        std::vector<char> possible(n, 0);
        std::vector<char> certain(n, 0);
        auto all = [](const std::vector<std::size_t>& xs, const std::vector<char>& set) {
            return std::all_of(xs.begin(), xs.end(), [&](std::size_t x) { return set[x] != 0; });
        };
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& r : g_.rules()) {
                if (r.kind == GroundRule::Kind::Weak || !all(r.pos, possible)) continue;
                auto mark = [&](std::size_t a) {
                    if (!possible[a]) possible[a] = changed = true;
                };
                for (auto a : r.head) mark(a);
                for (const auto& e : r.elements)
                    if (all(e.pos, possible)) mark(e.atom);
            }
        }
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& r : g_.rules()) {
                if (r.kind != GroundRule::Kind::Disjunctive || r.head.size() != 1 || certain[r.head[0]]) continue;
                bool negFree = std::none_of(r.neg.begin(), r.neg.end(), [&](std::size_t a) { return possible[a]; });
                if (negFree && all(r.pos, certain)) certain[r.head[0]] = changed = true;
            }
        }
        value_.assign(n, False);
        for (std::size_t a = 0; a < n; ++a) {
            if (certain[a]) value_[a] = True;
            else if (possible[a]) {
                value_[a] = Unknown;
                open_.push_back(a);
            }
        }
        for (const auto& r : g_.rules()) {
            if (all(r.pos, possible)) rules_.push_back(&r);
        }
    }

    // Disjunctive rules and constraints become clauses over the open atoms;
    // choice rules are checked once every atom is decided.
    void clauses() {
        std::vector<long> var(g_.atoms().size(), -1);
        for (std::size_t i = 0; i < open_.size(); ++i) var[open_[i]] = static_cast<long>(i);
        occurs_.assign(open_.size(), {});
        supports_.assign(g_.atoms().size(), {});
        for (const auto* r : rules_) {
            for (auto h : r->head) supports_[h].emplace_back(r, -1);
            for (std::size_t e = 0; e < r->elements.size(); ++e)
                supports_[r->elements[e].atom].emplace_back(r, static_cast<long>(e));
        }
        for (const auto* r : rules_) {
            if (r->kind == GroundRule::Kind::Weak) continue;
            if (r->kind == GroundRule::Kind::Choice) {
                choices_.push_back(r);
                continue;
            }
            std::vector<std::size_t> lits;
            bool                     sat = false;
            auto add = [&](std::size_t atom, bool positive) {
                if (var[atom] < 0) {
                    sat = sat || (value_[atom] == True) == positive;
                    return;
                }
                lits.push_back(2 * static_cast<std::size_t>(var[atom]) + (positive ? 0 : 1));
            };
            for (auto a : r->head) add(a, true);
            for (auto a : r->pos) add(a, false);
            for (auto a : r->neg) add(a, true);
            std::sort(lits.begin(), lits.end());
            lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
            for (std::size_t i = 1; i < lits.size(); ++i) sat = sat || (lits[i] ^ 1) == lits[i - 1];
            if (sat) continue;
            if (lits.empty()) {
                conflict_ = true;
                return;
            }
            for (auto l : lits) occurs_[l / 2].push_back(clauses_.size());
            clauses_.push_back(std::move(lits));
        }
    }

    bool litTrue(std::size_t l) const {
        auto v = value_[open_[l / 2]];
        return v != Unknown && (v == True) != static_cast<bool>(l & 1);
    }
    bool litOpen(std::size_t l) const { return value_[open_[l / 2]] == Unknown; }

    // Assigns and propagates; every assigned var lands on the trail.
    bool assign(std::size_t v, std::int8_t val) {
        value_[open_[v]] = val;
        trail_.push_back(v);
        return propagate(trail_.size() - 1);
    }

    bool propagate(std::size_t head) {
        for (;;) {
            while (head < trail_.size()) {
                auto x = trail_[head++];
                for (auto ci : occurs_[x]) {
                    const auto& c = clauses_[ci];
                    std::size_t open = 0;
                    std::size_t last = 0;
                    bool        sat = false;
                    for (auto l : c) {
                        if (litTrue(l)) {
                            sat = true;
                            break;
                        }
                        if (litOpen(l)) {
                            ++open;
                            last = l;
                        }
                    }
                    if (sat) continue;
                    if (open == 0) return false;
                    if (open == 1) {
                        value_[open_[last / 2]] = (last & 1) ? False : True;
                        trail_.push_back(last / 2);
                    }
                }
            }
            // Atoms left without any applicable rule cannot be true.
            bool changed = false;
            for (std::size_t v = 0; v < open_.size(); ++v) {
                auto a = open_[v];
                if (value_[a] == False || supported(a)) continue;
                if (value_[a] == True) return false;
                value_[a] = False;
                trail_.push_back(v);
                changed = true;
            }
            if (!changed) return true;
        }
    }

    bool supported(std::size_t a) const {
        auto none = [&](const std::vector<std::size_t>& xs, std::int8_t bad) {
            return std::none_of(xs.begin(), xs.end(), [&](std::size_t x) { return value_[x] == bad; });
        };
        for (const auto& [r, e] : supports_[a]) {
            if (!none(r->pos, False) || !none(r->neg, True)) continue;
            if (e >= 0) {
                const auto& el = r->elements[static_cast<std::size_t>(e)];
                if (none(el.pos, False) && none(el.neg, True)) return true;
                continue;
            }
            if (std::all_of(r->head.begin(), r->head.end(), [&](std::size_t h) { return h == a || value_[h] != True; }))
                return true;
        }
        return false;
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            value_[open_[trail_.back()]] = Unknown;
            trail_.pop_back();
        }
    }

    bool holds(std::size_t a) const { return value_[a] == True; }
    bool allTrue(const std::vector<std::size_t>& xs) const {
        return std::all_of(xs.begin(), xs.end(), [&](std::size_t x) { return holds(x); });
    }
    bool noneTrue(const std::vector<std::size_t>& xs) const {
        return std::none_of(xs.begin(), xs.end(), [&](std::size_t x) { return holds(x); });
    }

    bool satisfied(const GroundRule& r) const {
        if (!allTrue(r.pos) || !noneTrue(r.neg)) return true;
        if (r.kind == GroundRule::Kind::Choice) {
            std::set<std::size_t> chosen;
            for (const auto& e : r.elements)
                if (holds(e.atom) && allTrue(e.pos) && noneTrue(e.neg)) chosen.insert(e.atom);
            auto k = static_cast<std::int64_t>(chosen.size());
            return (!r.lower || k >= *r.lower) && (!r.upper || k <= *r.upper);
        }
        return std::any_of(r.head.begin(), r.head.end(), [&](std::size_t a) { return holds(a); });
    }

    void search(std::size_t from) {
        while (from < open_.size() && value_[open_[from]] != Unknown) ++from;
        if (from == open_.size()) {
            if (std::all_of(choices_.begin(), choices_.end(), [&](const GroundRule* r) { return satisfied(*r); }) &&
                stable())
                record();
            return;
        }
        for (std::int8_t v : {False, True}) {
            auto mark = trail_.size();
            if (assign(from, v)) search(from + 1);
            undo(mark);
        }
    }

    // Whether the current model is a minimal model of its reduct.
    bool stable() const {
        struct Clause {
            std::vector<std::size_t> head;
            std::vector<std::size_t> body;
        };
        std::vector<Clause> reduct;
        bool                disjunctive = false;
        for (const auto* r : rules_) {
            if (r->kind == GroundRule::Kind::Weak || !noneTrue(r->neg) || !allTrue(r->pos)) continue;
            if (r->kind == GroundRule::Kind::Choice) {
                for (const auto& e : r->elements) {
                    if (!holds(e.atom) || !noneTrue(e.neg) || !allTrue(e.pos)) continue;
                    Clause c{{e.atom}, r->pos};
                    c.body.insert(c.body.end(), e.pos.begin(), e.pos.end());
                    reduct.push_back(std::move(c));
                }
                continue;
            }
            if (r->head.empty()) continue;
            Clause c{{}, r->pos};
            for (auto a : r->head)
                if (holds(a)) c.head.push_back(a);
            std::sort(c.head.begin(), c.head.end());
            c.head.erase(std::unique(c.head.begin(), c.head.end()), c.head.end());
            disjunctive = disjunctive || c.head.size() > 1;
            reduct.push_back(std::move(c));
        }

        if (!disjunctive) {
            std::vector<char> least(g_.atoms().size(), 0);
            for (bool changed = true; changed;) {
                changed = false;
                for (const auto& c : reduct) {
                    if (least[c.head[0]]) continue;
                    if (std::all_of(c.body.begin(), c.body.end(), [&](std::size_t a) { return least[a] != 0; }))
                        least[c.head[0]] = changed = true;
                }
            }
            for (std::size_t a = 0; a < least.size(); ++a)
                if (holds(a) != static_cast<bool>(least[a])) return false;
            return true;
        }

        // Look for a strictly smaller model J of the reduct inside I.
        std::vector<long>        var(g_.atoms().size(), -1);
        std::vector<std::size_t> members;
        for (std::size_t a = 0; a < var.size(); ++a) {
            if (holds(a)) {
                var[a] = static_cast<long>(members.size());
                members.push_back(a);
            }
        }
        std::vector<std::vector<std::size_t>> cnf;
        for (const auto& c : reduct) {
            std::vector<std::size_t> clause;
            for (auto h : c.head) clause.push_back(2 * static_cast<std::size_t>(var[h]));
            for (auto b : c.body) clause.push_back(2 * static_cast<std::size_t>(var[b]) + 1);
            cnf.push_back(std::move(clause));
        }
        std::vector<std::size_t> smaller;
        for (std::size_t i = 0; i < members.size(); ++i) smaller.push_back(2 * i + 1);
        cnf.push_back(std::move(smaller));
        return !Dpll(members.size(), std::move(cnf)).satisfiable();
    }

    void record() {
        AnswerSet s;
        for (std::size_t a = 0; a < value_.size(); ++a)
            if (holds(a)) s.atoms.push_back(g_.atoms()[a]);
        std::sort(s.atoms.begin(), s.atoms.end());
        std::set<std::tuple<std::int64_t, std::int64_t, std::vector<asp::Term>>> violated;
        for (const auto* r : rules_) {
            if (r->kind == GroundRule::Kind::Weak && allTrue(r->pos) && noneTrue(r->neg))
                violated.emplace(r->weight, r->level, r->terms);
        }
        for (const auto& [w, l, t] : violated) s.costs[l] += w;
        out_.push_back(std::move(s));
    }

    const GroundProgram&                         g_;
    const SolveOptions&                          opts_;
    std::vector<std::int8_t>                     value_;
    std::vector<std::size_t>                     open_;
    std::vector<const GroundRule*>               rules_;
    std::vector<const GroundRule*>               choices_;
    std::vector<std::vector<std::size_t>>        clauses_;
    std::vector<std::vector<std::size_t>>        occurs_;
    std::vector<std::size_t>                     trail_;
    std::vector<std::vector<std::pair<const GroundRule*, long>>> supports_;
    bool                                         conflict_ = false;
    std::vector<AnswerSet>                       out_;
};

// Cost vectors compared from the highest level down.
bool cheaper(const std::map<std::int64_t, std::int64_t>& a, const std::map<std::int64_t, std::int64_t>& b) {
    std::set<std::int64_t> levels;
    for (const auto& [l, _] : a) levels.insert(l);
    for (const auto& [l, _] : b) levels.insert(l);
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        auto x = a.contains(*it) ? a.at(*it) : 0;
        auto y = b.contains(*it) ? b.at(*it) : 0;
        if (x != y) return x < y;
    }
    return false;
}

}  // namespace

std::vector<AnswerSet> answerSets(const GroundProgram& g, const SolveOptions& opts) {
    auto sets = Enumerator(g, opts).run();
    if (!opts.optimal_only || sets.empty()) return sets;
    auto best = sets.front().costs;
    for (const auto& s : sets)
        if (cheaper(s.costs, best)) best = s.costs;
    std::erase_if(sets, [&](const AnswerSet& s) { return cheaper(best, s.costs); });
    return sets;
}

std::vector<AnswerSet> solve(const asp::Program& p, const SolveOptions& sopts, const GroundOptions& gopts) {
    return answerSets(ground(p, {}, gopts), sopts);
}

}  // namespace cnlasp::solver
