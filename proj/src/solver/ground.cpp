#include <cnlasp/solver.h>

#include <algorithm>
#include <set>

namespace cnlasp::solver {

std::optional<std::size_t> GroundProgram::find(const asp::Atom& a) const {
    auto it = index_.find(a);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t GroundProgram::intern(const asp::Atom& a) {
    auto [it, fresh] = index_.try_emplace(a, atoms_.size());
    if (fresh) atoms_.push_back(a);
    return it->second;
}

void GroundProgram::addFact(const asp::Atom& a) {
    GroundRule r;
    r.head.push_back(intern(a));
    rules_.push_back(std::move(r));
}

asp::Program GroundProgram::toProgram() const {
    asp::Program p;
    auto lits = [&](const std::vector<std::size_t>& pos, const std::vector<std::size_t>& neg) {
        std::vector<asp::BodyItem> out;
        for (auto i : pos) out.emplace_back(asp::Literal{atoms_[i], false});
        for (auto i : neg) out.emplace_back(asp::Literal{atoms_[i], true});
        return out;
    };
    for (const auto& g : rules_) {
        asp::Rule r;
        r.body = lits(g.pos, g.neg);
        if (g.kind == GroundRule::Kind::Choice) {
            asp::ChoiceHead h{{}, g.lower, g.upper};
            for (const auto& e : g.elements) {
                asp::ChoiceElement ce{atoms_[e.atom], {}};
                for (auto i : e.pos) ce.condition.push_back({atoms_[i], false});
                for (auto i : e.neg) ce.condition.push_back({atoms_[i], true});
                h.elements.push_back(std::move(ce));
            }
            r.head = std::move(h);
        }
        else {
            asp::Disjunction d;
            for (auto i : g.head) d.atoms.push_back(atoms_[i]);
            r.head = std::move(d);
            if (g.kind == GroundRule::Kind::Weak) r.weak = asp::WeakSpec{asp::Term::integer(g.weight), g.level, g.terms};
        }
        p.rules.push_back(std::move(r));
    }
    return p;
}

namespace {

using Subst = std::map<std::string, asp::Term>;

asp::Term substitute(const asp::Term& t, const Subst& s) {
    if (!t.isVariable()) return t;
    auto it = s.find(t.text);
    return it == s.end() ? t : it->second;
}

asp::Atom substitute(const asp::Atom& a, const Subst& s) {
    asp::Atom out{a.predicate, {}};
    out.args.reserve(a.args.size());
    for (const auto& t : a.args) out.args.push_back(substitute(t, s));
    return out;
}

void varsOf(const asp::Term& t, std::vector<std::string>& out) {
    if (t.isVariable() && std::find(out.begin(), out.end(), t.text) == out.end()) out.push_back(t.text);
}
void varsOf(const asp::Atom& a, std::vector<std::string>& out) {
    for (const auto& t : a.args) varsOf(t, out);
}

// Gives every "_" its own name so that occurrences range independently.
asp::Rule renameAnonymous(asp::Rule r) {
    int  n = 0;
    auto fix = [&](asp::Atom& a) {
        for (auto& t : a.args)
            if (t.isAnonymous()) t = asp::Term::variable("_" + std::to_string(n++));
    };
    if (auto* d = std::get_if<asp::Disjunction>(&r.head)) {
        for (auto& a : d->atoms) fix(a);
    }
    else {
        for (auto& e : std::get<asp::ChoiceHead>(r.head).elements) {
            fix(e.atom);
            for (auto& l : e.condition) fix(l.atom);
        }
    }
    for (auto& b : r.body) {
        if (auto* l = std::get_if<asp::Literal>(&b)) fix(l->atom);
        else {
            auto& c = std::get<asp::Comparison>(b);
            if (c.left.isAnonymous()) c.left = asp::Term::variable("_" + std::to_string(n++));
            if (c.right.isAnonymous()) c.right = asp::Term::variable("_" + std::to_string(n++));
        }
    }
    return r;
}

class Grounder {
public:
    Grounder(const std::vector<asp::Term>& universe, const GroundOptions& opts) : universe_(universe), opts_(opts) {}

    void rule(const asp::Rule& original) {
        rule_ = renameAnonymous(original);
        std::vector<std::string> vars;
        for (const auto& b : rule_.body) {
            if (const auto* l = std::get_if<asp::Literal>(&b)) varsOf(l->atom, vars);
            else {
                varsOf(std::get<asp::Comparison>(b).left, vars);
                varsOf(std::get<asp::Comparison>(b).right, vars);
            }
        }
        if (const auto* d = std::get_if<asp::Disjunction>(&rule_.head)) {
            for (const auto& a : d->atoms) varsOf(a, vars);
        }
        if (rule_.weak) {
            varsOf(rule_.weak->weight, vars);
            for (const auto& t : rule_.weak->terms) varsOf(t, vars);
        }
        globals_ = vars;
        Subst s;
        assign(0, s);
    }

    GroundProgram take() { return std::move(out_); }

private:
    void count() {
        if (++instantiations_ > opts_.max_instantiations) {
            throw GroundingBlowup("grounding exceeds " + std::to_string(opts_.max_instantiations) +
                                  " instantiations");
        }
    }

    // True when every comparison whose variables are all bound holds.
    bool comparisonsHold(const Subst& s) const {
        for (const auto& b : rule_.body) {
            const auto* c = std::get_if<asp::Comparison>(&b);
            if (!c) continue;
            auto l = substitute(c->left, s);
            auto r = substitute(c->right, s);
            if (l.isVariable() || r.isVariable()) continue;
            if (!asp::evaluate(c->op, l, r)) return false;
        }
        return true;
    }

    void assign(std::size_t i, Subst& s) {
        if (i == globals_.size()) {
            if (!comparisonsHold(s)) return;
            count();
            emit(s);
            return;
        }
        for (const auto& c : universe_) {
            s[globals_[i]] = c;
            if (comparisonsHold(s)) assign(i + 1, s);
        }
        s.erase(globals_[i]);
    }

    void elementInstances(const asp::ChoiceElement& e, std::vector<std::string>& locals, std::size_t i, Subst& s,
                          std::vector<GroundElement>& out) {
        if (i == locals.size()) {
            count();
            GroundElement g;
            g.atom = out_.intern(substitute(e.atom, s));
            for (const auto& l : e.condition) (l.negated ? g.neg : g.pos).push_back(out_.intern(substitute(l.atom, s)));
            out.push_back(std::move(g));
            return;
        }
        for (const auto& c : universe_) {
            s[locals[i]] = c;
            elementInstances(e, locals, i + 1, s, out);
        }
        s.erase(locals[i]);
    }

    void emit(Subst& s) {
        GroundRule g;
        for (const auto& b : rule_.body) {
            if (const auto* l = std::get_if<asp::Literal>(&b))
                (l->negated ? g.neg : g.pos).push_back(out_.intern(substitute(l->atom, s)));
        }
        if (const auto* d = std::get_if<asp::Disjunction>(&rule_.head)) {
            for (const auto& a : d->atoms) g.head.push_back(out_.intern(substitute(a, s)));
            if (rule_.weak) {
                g.kind = GroundRule::Kind::Weak;
                auto w = substitute(rule_.weak->weight, s);
                if (w.kind != asp::Term::Kind::Integer)
                    throw SolverError("weak constraint weight '" + asp::toString(w) + "' is not an integer");
                g.weight = w.value;
                g.level = rule_.weak->level;
                for (const auto& t : rule_.weak->terms) g.terms.push_back(substitute(t, s));
            }
        }
        else {
            const auto& h = std::get<asp::ChoiceHead>(rule_.head);
            g.kind = GroundRule::Kind::Choice;
            g.lower = h.lower;
            g.upper = h.upper;
            for (const auto& e : h.elements) {
                std::vector<std::string> vars;
                varsOf(e.atom, vars);
                for (const auto& l : e.condition) varsOf(l.atom, vars);
                std::vector<std::string> locals;
                for (const auto& v : vars)
                    if (!s.contains(v)) locals.push_back(v);
                elementInstances(e, locals, 0, s, g.elements);
            }
        }
        out_.add(std::move(g));
    }

    const std::vector<asp::Term>& universe_;
    const GroundOptions&          opts_;
    asp::Rule                     rule_;
    std::vector<std::string>      globals_;
    std::size_t                   instantiations_ = 0;
    GroundProgram                 out_;
};

}  // namespace

GroundProgram ground(const asp::Program& p, const std::vector<asp::Term>& universe, const GroundOptions& opts) {
    std::set<asp::Term> herbrand(universe.begin(), universe.end());
    for (const auto& c : asp::constants(p)) herbrand.insert(c);
    std::vector<asp::Term> u(herbrand.begin(), herbrand.end());
    Grounder               g(u, opts);
    for (const auto& r : p.rules) g.rule(r);
    return g.take();
}

}  // namespace cnlasp::solver
