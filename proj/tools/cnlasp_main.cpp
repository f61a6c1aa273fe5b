// cnlasp: command line front end.
//
// Structured records go to stdout (one JSON object per line), human-readable
// tables and summaries to stderr. Exit codes: 0 ok, 1 negative verdict or
// audit violations, 2 bad input or compile errors, 3 translator unavailable.

#include <cnlasp/codegen.h>
#include <cnlasp/pipeline.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace cnlasp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to `path`, or stdout when empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// Config file: {"translator": {...}, "equivalence": {...}, "metrics": {...},
// "seed": N, "paraphrase": {...}}.
json loadConfig(const std::string& flag) {
    std::string path = flag;
    if (path.empty())
        if (const char* env = std::getenv("CNLASP_CONFIG")) path = env;
    if (path.empty()) return json::object();
    return json::parse(slurp(path));
}

metrics::MetricConfig metricConfig(const json& cfg) {
    metrics::MetricConfig m;
    if (!cfg.contains("metrics")) return m;
    const auto& j = cfg["metrics"];
    m.bleu_max_n = j.value("bleu_max_n", m.bleu_max_n);
    m.bleu_smoothing = j.value("bleu_smoothing", m.bleu_smoothing);
    m.meteor_alpha = j.value("meteor_alpha", m.meteor_alpha);
    m.meteor_beta = j.value("meteor_beta", m.meteor_beta);
    m.meteor_gamma = j.value("meteor_gamma", m.meteor_gamma);
    m.validate();
    return m;
}

struct TranslatorFlags {
    std::string command;
    std::string templates;
    int         timeout_ms = 0;
    std::size_t window = 0;

    void attach(CLI::App* app) {
        app->add_option("--translator-cmd", command, "external translator plugin command");
        app->add_option("--templates", templates, "template directory for the retrieval translator");
        app->add_option("--timeout-ms", timeout_ms, "per-sentence timeout");
        app->add_option("--window", window, "outstanding plugin requests");
    }

    pipeline::TranslatorSpec spec(const json& cfg) const {
        auto j = cfg.value("translator", json::object());
        if (!command.empty()) {
            j["kind"] = "external";
            j["command"] = command;
        }
        if (!templates.empty()) j["templates"] = templates;
        if (timeout_ms != 0) j["timeout_ms"] = timeout_ms;
        if (window != 0) j["window"] = window;
        return pipeline::TranslatorSpec::fromJson(j);
    }
};

std::vector<solver::Signature> signatures(const std::vector<std::string>& texts) {
    std::vector<solver::Signature> out;
    for (const auto& t : texts) out.push_back(solver::parseSignature(t));
    return out;
}

std::vector<asp::Term> universeOf(const std::string& csv) {
    std::vector<asp::Term> out;
    std::stringstream      ss(csv);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(pipeline::parseTerm(item));
    return out;
}

json atomsJson(const std::vector<asp::Atom>& atoms) {
    json a = json::array();
    for (const auto& x : atoms) a.push_back(asp::toString(x));
    return a;
}

json diagnosticJson(const pipeline::Diagnostic& d) {
    json j{{"sentence", d.input}, {"kind", d.kind}, {"message", d.message}};
    if (d.column) j["column"] = *d.column;
    return j;
}

std::vector<pipeline::Candidate> sentencesAsCandidates(const std::string& text) {
    std::vector<pipeline::Candidate> out;
    for (auto& s : cnl::splitSentences(text)) {
        pipeline::Candidate c;
        c.nl = s.text;
        c.cnl = s.text;
        c.accepted = true;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<dataset::DatasetRecord> readDataset(const std::string& path) { return dataset::parseJsonl(slurp(path)); }

std::string manifestTable(const dataset::DatasetManifest& m) {
    std::ostringstream out;
    out << std::left << std::setw(28) << "category" << std::right << std::setw(8) << "source" << std::setw(8)
        << "gener." << std::setw(10) << "rephr." << std::setw(8) << "total" << "\n";
    auto row = [&](std::string_view name, const dataset::CategoryCounts& c) {
        out << std::left << std::setw(28) << name << std::right << std::setw(8) << c.source << std::setw(8)
            << c.generated << std::setw(10) << c.rephrased << std::setw(8) << c.total << "\n";
    };
    for (const auto& [cat, c] : m.rows) row(cnl::tableLabel(cat), c);
    row("total", m.grand);
    return out.str();
}

pipeline::EquivalenceSetup setupFrom(const json& cfg, const std::optional<pipeline::Problem>& problem) {
    if (cfg.contains("equivalence")) return pipeline::EquivalenceSetup::fromJson(cfg["equivalence"]);
    return problem->setup;
}

fs::path resolveProblem(const std::string& name) {
    if (fs::is_directory(name)) return name;
    auto bundled = pipeline::dataDir() / "problems" / name;
    if (fs::is_directory(bundled)) return bundled;
    throw std::runtime_error("no problem directory '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NL to CNL to ASP pipeline tools"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string configPath;
    bool        quiet = false;
    app.add_option("--config", configPath, "JSON config file (default: $CNLASP_CONFIG)");
    app.add_flag("-q,--quiet", quiet, "no human-readable output on stderr");
    auto human = [&](const std::string& text) {
        if (!quiet) std::cerr << text;
    };

    // translate
    auto*           cTranslate = app.add_subcommand("translate", "NL sentences to CNL candidates");
    std::string     nlFile;
    TranslatorFlags tFlags;
    cTranslate->add_option("nl", nlFile, "one NL sentence per line")->required();
    tFlags.attach(cTranslate);

    // compile
    auto*       cCompile = app.add_subcommand("compile", "CNL document to ASP");
    std::string cnlFile, outFile;
    cCompile->add_option("cnl", cnlFile)->required();
    cCompile->add_option("-o,--output", outFile);

    // run
    auto*           cRun = app.add_subcommand("run", "translate, compile and check against gold");
    std::string     runNl, runGold, runProblem, runReport, runRef;
    TranslatorFlags rFlags;
    cRun->add_option("nl", runNl, "NL file (default: the problem's spec.nl)");
    cRun->add_option("--problem", runProblem, "problem directory or bundled problem name");
    cRun->add_option("--gold", runGold, "gold ASP program");
    cRun->add_option("--reference", runRef, "reference CNL, line-aligned with the NL input");
    cRun->add_option("--report", runReport, "write the JSON report here instead of stdout");
    rFlags.attach(cRun);

    // eval
    auto*                    cEval = app.add_subcommand("eval", "BLEU, METEOR, PRF and syntactic accuracy");
    std::string              hypFile;
    std::vector<std::string> refFiles;
    bool                     cnlSyntax = false, smoothing = false;
    std::string              meteorStage = "exact";
    cEval->add_option("--hyp", hypFile)->required();
    cEval->add_option("--ref", refFiles, "line-aligned references; repeat for more")->required();
    cEval->add_flag("--cnl-syntax", cnlSyntax, "also report syntactic accuracy of the hypotheses");
    cEval->add_flag("--smoothing", smoothing, "add-one smoothing for BLEU orders >= 2");
    cEval->add_option("--meteor-stage", meteorStage)->check(CLI::IsMember({"exact"}));

    // solve
    auto*                    cSolve = app.add_subcommand("solve", "enumerate answer sets");
    std::string              aspFile;
    std::vector<std::string> factFiles, project;
    bool                     optimal = false;
    std::size_t              maxAtoms = 0;
    cSolve->add_option("asp", aspFile)->required();
    cSolve->add_option("--facts", factFiles);
    cSolve->add_option("--project", project, "pred/arity");
    cSolve->add_flag("--optimal", optimal, "only optimal answer sets");
    cSolve->add_option("--max-atoms", maxAtoms);

    // equiv
    auto*                    cEquiv = app.add_subcommand("equiv", "bounded uniform equivalence");
    std::string              p1File, p2File, universe;
    std::vector<std::string> sig, eqProject;
    std::size_t              sampleN = 0, eqMaxAtoms = 0;
    std::uint64_t            sampleSeed = 0;
    cEquiv->add_option("p1", p1File)->required();
    cEquiv->add_option("p2", p2File)->required();
    cEquiv->add_option("--sig", sig, "input signature pred/arity")->required();
    cEquiv->add_option("--universe", universe, "c1,c2,...")->required();
    cEquiv->add_option("--sample", sampleN, "random fact sets instead of all");
    cEquiv->add_option("--seed", sampleSeed);
    cEquiv->add_option("--project", eqProject);
    cEquiv->add_option("--max-atoms", eqMaxAtoms);

    // gen-dataset
    auto*         cGen = app.add_subcommand("gen-dataset", "balanced synthetic records from templates");
    std::string   genTemplates, genBow, genTargets, genEqualize, genOut;
    std::uint64_t genSeed = 0;
    bool          genSeedSet = false;
    cGen->add_option("--templates", genTemplates);
    cGen->add_option("--bow", genBow);
    cGen->add_option("--targets", genTargets, "JSON {category-id: count}");
    cGen->add_option("--equalize", genEqualize, "source JSONL; generate up to the largest category");
    cGen->add_option("--seed", genSeed)->each([&](const std::string&) { genSeedSet = true; });
    cGen->add_option("-o,--output", genOut);

    // rephrase
    auto*       cRephrase = app.add_subcommand("rephrase", "k paraphrases per record");
    std::string rpIn, rpProvider, rpSynonyms, rpCheckpoint, rpOut;
    int         rpK = 5, rpTimeout = 30000;
    cRephrase->add_option("dataset", rpIn)->required();
    cRephrase->add_option("--provider", rpProvider, "plugin command");
    cRephrase->add_option("--synonyms", rpSynonyms, "synonym table (offline provider)");
    cRephrase->add_option("--k", rpK);
    cRephrase->add_option("--timeout-ms", rpTimeout);
    cRephrase->add_option("--checkpoint", rpCheckpoint);
    cRephrase->add_option("-o,--output", rpOut);

    // audit
    auto*       cAudit = app.add_subcommand("audit", "check dataset accounting");
    std::string auditIn;
    bool        auditIsManifest = false;
    int         auditK = 0;
    cAudit->add_option("dataset", auditIn, "JSONL dataset, or a manifest with --manifest")->required();
    cAudit->add_flag("--manifest", auditIsManifest);
    cAudit->add_option("--k", auditK, "expected rephrase factor");

    // check-syntax
    auto*       cCheck = app.add_subcommand("check-syntax", "per-sentence CNL grammar verdicts");
    std::string checkFile;
    cCheck->add_option("cnl", checkFile)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = loadConfig(configPath);

        if (*cTranslate) {
            auto t = pipeline::makeTranslator(tFlags.spec(cfg));
            auto in = pipeline::readLines(nlFile);
            auto run = pipeline::runPipeline(in, *t);
            auto j = pipeline::toJson(run);
            for (const auto& o : j["cnl_outputs"]) std::cout << o.dump() << "\n";
            human(pipeline::summary(run));
            return 0;
        }

        if (*cCompile) {
            auto r = pipeline::compileCandidates(sentencesAsCandidates(slurp(cnlFile)));
            if (!r.program) {
                for (const auto& d : r.diagnostics) std::cerr << diagnosticJson(d).dump() << "\n";
                return 2;
            }
            emit(outFile, asp::printProgram(*r.program));
            return 0;
        }

        if (*cRun) {
            std::optional<pipeline::Problem> problem;
            if (!runProblem.empty()) problem = pipeline::loadProblem(resolveProblem(runProblem));
            if (runNl.empty() && !problem) throw std::runtime_error("run needs an NL file or --problem");
            auto                 inputs = runNl.empty() ? problem->nl : pipeline::readLines(runNl);
            pipeline::RunOptions opts;
            opts.metric_config = metricConfig(cfg);
            if (!runGold.empty()) opts.gold = asp::parseProgram(slurp(runGold));
            else if (problem) opts.gold = problem->gold;
            if (opts.gold && (problem || cfg.contains("equivalence"))) opts.setup = setupFrom(cfg, problem);
            if (!runRef.empty()) opts.reference_cnl = pipeline::readLines(runRef);
            else if (problem && runNl.empty()) opts.reference_cnl = problem->cnl;

            auto t = pipeline::makeTranslator(rFlags.spec(cfg));
            auto run = pipeline::runPipeline(inputs, *t, opts);
            emit(runReport, pipeline::toJson(run).dump() + "\n");
            human(pipeline::summary(run));
            if (!run.program) return 2;
            return run.equivalence == pipeline::EquivalenceStatus::Different ||
                           run.equivalence == pipeline::EquivalenceStatus::Failed
                       ? 1
                       : 0;
        }

        if (*cEval) {
            auto                                  hyps = pipeline::readLines(hypFile);
            std::vector<std::vector<std::string>> refs;
            for (const auto& f : refFiles) refs.push_back(pipeline::readLines(f));
            std::vector<metrics::EvalPair> pairs;
            for (std::size_t i = 0; i < hyps.size(); ++i) {
                metrics::EvalPair p{hyps[i], {}};
                for (const auto& r : refs) {
                    if (r.size() != hyps.size()) throw std::runtime_error("reference and hypothesis line counts differ");
                    p.references.push_back(r[i]);
                }
                pairs.push_back(std::move(p));
            }
            auto mc = metricConfig(cfg);
            if (smoothing) mc.bleu_smoothing = true;
            auto report = metrics::evaluate(pairs, mc, cnlSyntax);
            std::cout << metrics::toJson(report).dump() << "\n";
            human(metrics::table(report));
            return 0;
        }

        if (*cSolve) {
            auto prog = asp::parseProgram(slurp(aspFile));
            for (const auto& f : factFiles) {
                auto facts = asp::parseProgram(slurp(f));
                prog.rules.insert(prog.rules.end(), facts.rules.begin(), facts.rules.end());
            }
            solver::SolveOptions so;
            so.optimal_only = optimal;
            if (maxAtoms) so.max_atoms = maxAtoms;
            auto sets = solver::solve(prog, so);
            auto keep = signatures(project);
            for (const auto& s : sets) {
                auto atoms = keep.empty() ? s.atoms : solver::family({s}, keep).front();
                json j{{"atoms", atomsJson(atoms)}};
                if (!s.costs.empty()) {
                    json c = json::object();
                    for (const auto& [level, w] : s.costs) c[std::to_string(level)] = w;
                    j["costs"] = c;
                }
                std::cout << j.dump() << "\n";
            }
            human(std::to_string(sets.size()) + " answer set(s)\n");
            return 0;
        }

        if (*cEquiv) {
            auto                       p1 = asp::parseProgram(slurp(p1File));
            auto                       p2 = asp::parseProgram(slurp(p2File));
            solver::EquivalenceOptions eo;
            eo.projection = signatures(eqProject);
            if (eqMaxAtoms) eo.solve.max_atoms = eqMaxAtoms;
            auto sample = sampleN ? solver::Sample::random(sampleN, sampleSeed) : solver::Sample::all();
            auto v = solver::checkUniformEquivalence(p1, p2, signatures(sig), universeOf(universe), sample, eo);
            json j{{"equivalent", v.equivalent}, {"tested", v.tested}};
            if (v.counterexample) {
                json first = json::array(), second = json::array();
                for (const auto& s : v.counterexample->first) first.push_back(atomsJson(s));
                for (const auto& s : v.counterexample->second) second.push_back(atomsJson(s));
                j["counterexample"] = {{"facts", atomsJson(v.counterexample->facts)}, {"p1", first}, {"p2", second}};
            }
            std::cout << j.dump() << "\n";
            human(std::string(v.equivalent ? "equivalent" : "NOT equivalent") + " over " + std::to_string(v.tested) +
                  " fact set(s)\n");
            return v.equivalent ? 0 : 1;
        }

        if (*cGen) {
            auto templates = dataset::loadTemplates(genTemplates.empty() ? pipeline::dataDir() / "templates"
                                                                         : fs::path(genTemplates));
            auto bow = dataset::BagOfWords::load(genBow.empty() ? pipeline::dataDir() / "bow" : fs::path(genBow));
            dataset::Targets targets;
            if (!genTargets.empty()) {
                auto spec = json::parse(slurp(genTargets));
                for (const auto& [k, v] : spec.items()) {
                    auto c = cnl::categoryFromString(k);
                    if (!c) throw std::runtime_error("unknown category '" + k + "'");
                    targets[*c] = v.get<std::int64_t>();
                }
            }
            else if (!genEqualize.empty()) {
                dataset::Targets source;
                for (const auto& r : readDataset(genEqualize)) ++source[r.category];
                targets = dataset::equalizingTargets(source);
            }
            else {
                throw std::runtime_error("gen-dataset needs --targets or --equalize");
            }
            auto seed = genSeedSet ? genSeed : cfg.value("seed", std::uint64_t{0});
            auto g = dataset::generateBalanced(templates, bow, targets, seed);
            emit(genOut, dataset::toJsonl(g.records));
            human(manifestTable(g.manifest));
            return 0;
        }

        if (*cRephrase) {
            auto records = readDataset(rpIn);
            std::unique_ptr<dataset::ParaphraseProvider> provider;
            if (!rpProvider.empty()) {
                dataset::ParaphraseConfig pc;
                if (cfg.contains("paraphrase")) {
                    const auto& j = cfg["paraphrase"];
                    pc.engine = j.value("engine", pc.engine);
                    pc.temperature = j.value("temperature", pc.temperature);
                    pc.max_tokens = j.value("max_tokens", pc.max_tokens);
                    pc.prompt = j.value("prompt", pc.prompt);
                }
                provider = std::make_unique<plugin::ExternalProcessProvider>(rpProvider, pc, plugin::Millis(rpTimeout));
            }
            else if (!rpSynonyms.empty()) {
                provider = std::make_unique<dataset::SynonymTableProvider>(dataset::SynonymTableProvider::load(rpSynonyms));
            }
            else {
                provider = std::make_unique<dataset::IdentityProvider>();
            }
            dataset::RephraseOptions ro;
            ro.k = rpK;
            if (!rpCheckpoint.empty()) ro.checkpoint = rpCheckpoint;
            auto children = dataset::rephraseExpand(records, *provider, ro);
            records.insert(records.end(), children.begin(), children.end());
            emit(rpOut, dataset::toJsonl(records));
            human(manifestTable(dataset::manifestOf(records, rpK)));
            return 0;
        }

        if (*cAudit) {
            auto m = auditIsManifest ? dataset::manifestFromJson(json::parse(slurp(auditIn)))
                                     : dataset::manifestOf(readDataset(auditIn),
                                                           auditK ? std::optional<std::int64_t>(auditK) : std::nullopt);
            auto violations = dataset::auditManifest(m);
            for (const auto& v : violations)
                std::cout << json{{"where", v.where}, {"identity", v.identity}, {"expected", v.expected},
                                  {"actual", v.actual}}
                                 .dump()
                          << "\n";
            human(manifestTable(m));
            human(violations.empty() ? "manifest consistent\n" : std::to_string(violations.size()) + " violation(s)\n");
            return violations.empty() ? 0 : 1;
        }

        if (*cCheck) {
            std::size_t i = 0, ok = 0;
            auto        sentences = cnl::splitSentences(slurp(checkFile));
            for (const auto& s : sentences) {
                auto v = cnl::checkSyntax(s.text);
                json j{{"index", i++}, {"sentence", s.text}, {"accepted", v.accepted}};
                if (v.category) j["category"] = std::string(cnl::toString(*v.category));
                if (!v.accepted) j["reason"] = v.reason;
                if (v.accepted) ++ok;
                std::cout << j.dump() << "\n";
            }
            human(std::to_string(ok) + "/" + std::to_string(sentences.size()) + " sentences accepted\n");
            return ok == sentences.size() ? 0 : 1;
        }
    }
    catch (const plugin::TranslatorUnavailable& e) {
        std::cerr << json{{"error", "translator-unavailable"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
    catch (const std::exception& e) {
        std::cerr << json{{"error", "failed"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
    return 0;
}
