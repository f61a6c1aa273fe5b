#include <cnlasp/pipeline.h>

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <fstream>

using namespace cnlasp;
using namespace cnlasp::pipeline;
using nlohmann::json;

namespace {

const std::filesystem::path kData = CNLASP_DATA_DIR;
const std::string           kEcho = ECHO_PLUGIN_PATH;

RetrievalTranslator& bundledRetrieval() {
    static RetrievalTranslator t(dataset::loadTemplates(kData / "templates"));
    return t;
}

const std::vector<Problem>& problems() {
    static const auto p = loadProblems(kData / "problems");
    return p;
}

asp::Program withFacts(asp::Program p, const asp::Program& facts) {
    p.rules.insert(p.rules.end(), facts.rules.begin(), facts.rules.end());
    return p;
}

// Stands in for a model: returns a fixed CNL per input.
class FixedTranslator : public Translator {
public:
    explicit FixedTranslator(std::vector<std::optional<std::string>> out) : out_(std::move(out)) {}
    std::vector<Candidate> translate(const std::vector<std::string>& nl) override {
        std::vector<Candidate> cs;
        for (std::size_t i = 0; i < nl.size(); ++i) {
            Candidate c;
            c.nl = nl[i];
            c.cnl = out_[i];
            if (!c.cnl) c.error = "no-match";
            cs.push_back(std::move(c));
        }
        return cs;
    }
    json describe() const override { return {{"kind", "fixed"}}; }

private:
    std::vector<std::optional<std::string>> out_;
};

CompileResult compiledSpec(const Problem& p) {
    FixedTranslator t({p.cnl.begin(), p.cnl.end()});
    auto            run = runPipeline(p.cnl, t);
    return {run.program, run.diagnostics};
}

}  // namespace

TEST_CASE("retrieval fills the paired CNL template") {
    RetrievalTranslator t({{"w", cnl::Category::DefinitionConstCompound,
                            "A noun_1 is identified by an id.", "Every noun_1 has an id that identifies it."}});
    auto m = t.retrieve("Every  planet has an id that identifies it. ");
    REQUIRE(m);
    CHECK(m->cnl == "A planet is identified by an id.");
    CHECK(m->template_id == "w");
    CHECK_FALSE(t.retrieve("The weather is nice today."));
}

TEST_CASE("retrieval inverts the worked template example") {
    RetrievalTranslator t({{"worked", cnl::Category::DefinitionConstCompound,
                            "Noun_1 num_1 have an verb_1 noun_1 var_1, where var_1 is one of num_2, num_3.",
                            "There is noun_1 num_1 has an verb_1 to noun_1 var_1, where var_1 is one of the numbers "
                            "num_2 or num_3."}});
    auto m = t.retrieve("There is node 1 has an edge to node X, where X is one of the numbers 2 or 5.");
    REQUIRE(m);
    CHECK(m->cnl == "Node 1 have an edge node X, where X is one of 2, 5.");
}

TEST_CASE("unmatched sentences become no-match candidates, never exceptions") {
    auto cs = bundledRetrieval().translate({"Colorless green ideas sleep furiously."});
    REQUIRE(cs.size() == 1);
    CHECK_FALSE(cs[0].cnl);
    CHECK(cs[0].error == "no-match");
}

TEST_CASE("retrieval recovers the CNL of generated records") {
    auto templates = dataset::loadTemplates(kData / "templates");
    auto bow = dataset::BagOfWords::load(kData / "bow");
    std::size_t exact = 0, total = 0;
    for (const auto& t : templates)
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto r = dataset::instantiate(t, bow, seed);
            auto m = bundledRetrieval().retrieve(r.nl);
            REQUIRE(m);
            CHECK(cnl::checkSyntax(m->cnl).accepted);
            ++total;
            if (m->cnl == r.cnl) ++exact;
        }
    // Different templates may share an NL shape; all candidates still parse.
    CHECK(static_cast<double>(exact) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("bundled problem specifications translate completely") {
    REQUIRE(problems().size() == 7);
    for (const auto& p : problems()) {
        INFO(p.name);
        auto run = runPipeline(p.nl, bundledRetrieval());
        CHECK(run.syntax.accepted == p.nl.size());
        CHECK(run.diagnostics.empty());
        // Templates keep their literal articles ("a assign"), so compare the
        // compiled programs rather than the sentences.
        auto reference = compiledSpec(p);
        REQUIRE(run.program);
        REQUIRE(reference.program);
        CHECK(asp::printProgram(*run.program) == asp::printProgram(*reference.program));
    }
}

TEST_CASE("empty input gives an empty run") {
    auto run = runPipeline({}, bundledRetrieval());
    CHECK(run.candidates.empty());
    CHECK(run.syntax.total == 0);
    REQUIRE(run.program);
    CHECK(run.program->rules.empty());
    CHECK(run.equivalence == EquivalenceStatus::Absent);
}

TEST_CASE("a run without gold reports equivalence absent") {
    const auto& p = problems().front();
    auto        run = runPipeline(p.nl, bundledRetrieval());
    CHECK(run.equivalence == EquivalenceStatus::Absent);
    CHECK(toJson(run)["equivalence"]["status"] == "absent");
}

TEST_CASE("compiled specifications match the gold programs on every instance") {
    for (const auto& p : problems()) {
        auto compiled = compiledSpec(p);
        REQUIRE(compiled.program);
        for (const auto& [file, facts] : p.instances) {
            INFO(p.name << " / " << file);
            solver::SolveOptions so = p.setup.options.solve;
            auto a = solver::family(solver::solve(withFacts(*compiled.program, facts), so), p.setup.options.projection);
            auto b = solver::family(solver::solve(withFacts(p.gold, facts), so), p.setup.options.projection);
            CHECK_FALSE(a.empty());
            CHECK(a == b);
            so.optimal_only = true;
            auto oa = solver::family(solver::solve(withFacts(*compiled.program, facts), so), p.setup.options.projection);
            auto ob = solver::family(solver::solve(withFacts(p.gold, facts), so), p.setup.options.projection);
            CHECK(oa == ob);
        }
    }
}

TEST_CASE("compiled specifications are uniformly equivalent to gold within bounds") {
    for (const auto& p : problems()) {
        INFO(p.name);
        auto start = std::chrono::steady_clock::now();
        FixedTranslator t({p.cnl.begin(), p.cnl.end()});
        RunOptions      o;
        o.gold = p.gold;
        o.setup = p.setup;
        auto run = runPipeline(p.cnl, t, o);
        INFO(run.note);
        if (run.verdict && run.verdict->counterexample) INFO(toJson(run)["equivalence"].dump());
        CHECK(run.equivalence == EquivalenceStatus::Equivalent);
        CHECK(run.verdict->tested > 0);
        auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        CHECK(secs < 60.0);
    }
}

TEST_CASE("a wrong gold program is reported with a counterexample") {
    const auto& p = problems().front();
    FixedTranslator t({p.cnl.begin(), p.cnl.end()});
    RunOptions      o;
    o.gold = asp::parseProgram("selection(X) :- node(X).");
    o.setup = p.setup;
    auto run = runPipeline(p.cnl, t, o);
    CHECK(run.equivalence == EquivalenceStatus::Different);
    REQUIRE(run.verdict->counterexample);
    CHECK(toJson(run)["equivalence"].contains("counterexample"));
}

TEST_CASE("rejected candidates are reported and excluded from the program") {
    FixedTranslator t({"A node is identified by an id.", "Node is blue maybe.", std::nullopt,
                       "Whenever there is a node with id X then we can have a col with node X."});
    auto run = runPipeline({"a", "b", "c", "d"}, t);
    CHECK(run.syntax.accepted == 2);
    CHECK(run.syntax.accuracy == Catch::Approx(0.5));
    CHECK_FALSE(run.candidates[1].accepted);
    CHECK_FALSE(run.candidates[1].reason.empty());
    REQUIRE(run.program);
    CHECK(run.program->rules.size() == 1);
}

TEST_CASE("syntactic accuracy over 393 sentences with 4 rejects") {
    std::vector<std::optional<std::string>> out(393, std::string("A node is identified by an id."));
    for (int i : {5, 77, 200, 390}) out[i] = "node node node.";
    FixedTranslator t(out);
    auto run = runPipeline(std::vector<std::string>(393, "x"), t);
    CHECK(run.syntax.accepted == 389);
    CHECK(run.syntax.accuracy * 100 == Catch::Approx(98.98).margin(0.005));
}

TEST_CASE("compile errors point at the offending input") {
    FixedTranslator t({"A node is identified by an id.",
                       "Whenever there is a node with id X then we must have a col with node Y."});
    auto run = runPipeline({"a", "b"}, t);
    CHECK_FALSE(run.program);
    REQUIRE(run.diagnostics.size() == 1);
    CHECK(run.diagnostics[0].input == 1);
    RunOptions o;
    o.gold = asp::parseProgram("a.");
    o.setup = problems().front().setup;
    CHECK(runPipeline({"a", "b"}, t, o).equivalence == EquivalenceStatus::Skipped);
}

TEST_CASE("replaying a report reproduces the program byte for byte") {
    const auto& p = problems()[1];
    auto        report = toJson(runPipeline(p.nl, bundledRetrieval()));
    auto        again = replay(json::parse(report.dump()));
    REQUIRE(again.program);
    CHECK(asp::printProgram(*again.program) == report["asp_program"].get<std::string>());
}

TEST_CASE("reference CNL enables text metrics") {
    const auto& p = problems()[1];
    RunOptions  o;
    o.reference_cnl = p.cnl;
    auto run = runPipeline(p.nl, bundledRetrieval(), o);
    REQUIRE(run.metrics);
    CHECK(run.metrics->bleu[3] == Catch::Approx(1.0));
    CHECK(run.metrics->prf.exact_match_accuracy == Catch::Approx(1.0));
}

TEST_CASE("equivalence setup parses bounds") {
    auto s = EquivalenceSetup::fromJson(json::parse(
        R"({"signature":["node/1"],"universe":["1","red"],"sample":{"random":5,"seed":2},"max_atoms":30,"projection":["col/2"]})"));
    CHECK(s.universe[0] == asp::Term::integer(1));
    CHECK(s.universe[1] == asp::Term::constant("red"));
    CHECK(s.options.solve.max_atoms == 30);
    CHECK(s.options.projection.size() == 1);
    CHECK_THROWS(EquivalenceSetup::fromJson(json::parse(R"({"signature":[],"universe":[],"sample":"some"})")));
}

TEST_CASE("the echo plugin returns its input as CNL") {
    ExternalTranslator t(kEcho, plugin::Millis(2000), 4);
    std::vector<std::string> nl{"A node is identified by an id.", "second", "third", "fourth", "fifth"};
    auto                     cs = t.translate(nl);
    REQUIRE(cs.size() == nl.size());
    for (std::size_t i = 0; i < nl.size(); ++i) CHECK(cs[i].cnl == nl[i]);
    CHECK(t.describe()["handshake"]["name"] == "echo");
    CHECK(t.stats().answered == 5);
}

TEST_CASE("out-of-order responses are matched by id") {
    ExternalTranslator t(kEcho + " --reverse 3", plugin::Millis(2000), 3);
    auto               cs = t.translate({"a", "b", "c", "d", "e", "f"});
    for (std::size_t i = 0; i < 6; ++i) CHECK(cs[i].cnl == std::string(1, static_cast<char>('a' + i)));
}

TEST_CASE("a silent request times out without blocking the rest") {
    ExternalTranslator t(kEcho + " --silent-on hush", plugin::Millis(300), 4);
    auto               cs = t.translate({"one", "hush now", "three"});
    CHECK(cs[0].cnl == "one");
    CHECK_FALSE(cs[1].cnl);
    CHECK(cs[1].error == "timeout");
    CHECK(cs[2].cnl == "three");
}

TEST_CASE("late answers to timed-out ids are dropped") {
    ExternalTranslator t(kEcho + " --late-on slow --late-ms 500", plugin::Millis(300), 1);
    auto               first = t.translate({"slow one"});
    CHECK(first[0].error == "timeout");
    auto second = t.translate({"fresh"});
    CHECK(second[0].cnl == "fresh");
    CHECK(t.stats().stale >= 1);
}

TEST_CASE("plugin errors and exits are per-candidate") {
    ExternalTranslator t(kEcho + " --error-on bad --exit-after 2", plugin::Millis(1000), 1);
    auto               cs = t.translate({"bad input", "fine", "after exit"});
    CHECK(cs[0].error == "refused");
    CHECK(cs[1].cnl == "fine");
    CHECK(cs[2].error == "plugin exited");
}

TEST_CASE("a plugin with the wrong handshake is unavailable") {
    CHECK_THROWS_AS(ExternalTranslator(kEcho + " --handshake '{\"protocol\":2}'", plugin::Millis(1000), 1),
                    plugin::TranslatorUnavailable);
    CHECK_THROWS_AS(ExternalTranslator("exit 0", plugin::Millis(1000), 1), plugin::TranslatorUnavailable);
    CHECK_THROWS_AS(ExternalTranslator("sleep 2", plugin::Millis(200), 1), plugin::TranslatorUnavailable);
}

TEST_CASE("translator specs validate their fields") {
    CHECK(TranslatorSpec::fromJson(json::object()).kind == TranslatorSpec::Kind::Retrieval);
    CHECK_THROWS(TranslatorSpec::fromJson({{"kind", "external"}}));
    CHECK_THROWS(TranslatorSpec::fromJson({{"kind", "oracle"}}));
    CHECK_THROWS(TranslatorSpec::fromJson({{"timeout_ms", 0}}));
    auto t = makeTranslator(TranslatorSpec::fromJson({{"kind", "external"}, {"command", kEcho}}));
    CHECK(t->translate({"x"})[0].cnl == "x");
}

TEST_CASE("readLines skips blanks and comments") {
    auto f = std::filesystem::temp_directory_path() / "cnlasp_lines.txt";
    {
        std::ofstream out(f);
        out << "# header\n\n  first   line \n% note\nsecond\n";
    }
    CHECK(readLines(f) == std::vector<std::string>{"first line", "second"});
    std::filesystem::remove(f);
}
