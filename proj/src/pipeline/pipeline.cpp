#include <cnlasp/codegen.h>
#include <cnlasp/pipeline.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cnlasp::pipeline {

using nlohmann::json;

std::filesystem::path dataDir() {
    if (const char* env = std::getenv("CNLASP_DATA")) return env;
    return CNLASP_DATA_DIR;
}

namespace {

std::string normalize(std::string_view s) {
    std::string out;
    bool        space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
            continue;
        }
        if (space) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

std::size_t literalWords(const std::string& text) {
    std::string rest;
    std::size_t at = 0;
    for (const auto& p : dataset::placeholders(text)) {
        rest.append(text, at, p.begin - at);
        rest += ' ';
        at = p.end;
    }
    rest.append(text, at);
    std::istringstream in(rest);
    std::size_t        n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

void check(Candidate& c) {
    if (!c.cnl) return;
    auto v = cnl::checkSyntax(*c.cnl);
    c.accepted = v.accepted;
    c.category = v.category;
    c.reason = v.reason;
}

std::string readFile(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

RetrievalTranslator::RetrievalTranslator(std::vector<dataset::TemplatePair> templates)
    : templates_(std::move(templates)) {
    std::vector<std::size_t> weight;
    for (std::size_t i = 0; i < templates_.size(); ++i) {
        order_.push_back(i);
        weight.push_back(literalWords(templates_[i].nl));
    }
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
}

std::optional<RetrievalTranslator::Match> RetrievalTranslator::retrieve(std::string_view nl) const {
    auto                 sentence = normalize(nl);
    std::optional<Match> fallback;
    for (auto i : order_) {
        const auto& t = templates_[i];
        auto        slots = dataset::matchTemplate(t.nl, sentence);
        if (!slots) continue;
        Match m{dataset::render(t.cnl, *slots), t.id};
        if (cnl::checkSyntax(m.cnl).accepted) return m;
        if (!fallback) fallback = std::move(m);
    }
    return fallback;
}

std::vector<Candidate> RetrievalTranslator::translate(const std::vector<std::string>& nl) {
    std::vector<Candidate> out;
    for (const auto& s : nl) {
        Candidate c;
        c.nl = s;
        if (auto m = retrieve(s)) {
            c.cnl = m->cnl;
            c.source = m->template_id;
        }
        else {
            c.error = "no-match";
        }
        out.push_back(std::move(c));
    }
    return out;
}

json RetrievalTranslator::describe() const {
    return {{"kind", "retrieval"}, {"templates", templates_.size()}};
}

ExternalTranslator::ExternalTranslator(std::string command, plugin::Millis timeout, std::size_t window)
    : command_(std::move(command)), timeout_(timeout), window_(window), proc_(command_, timeout) {}

std::vector<Candidate> ExternalTranslator::translate(const std::vector<std::string>& nl) {
    std::vector<json> requests;
    for (const auto& s : nl) requests.push_back({{"nl", s}});
    auto                   replies = plugin::exchange(proc_, requests, timeout_, window_, next_, &stats_);
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < nl.size(); ++i) {
        Candidate c;
        c.nl = nl[i];
        c.cnl = replies[i].text;
        c.error = replies[i].error;
        out.push_back(std::move(c));
    }
    return out;
}

json ExternalTranslator::describe() const {
    return {{"kind", "external"},
            {"command", command_},
            {"timeout_ms", timeout_.count()},
            {"window", window_},
            {"handshake", proc_.handshake()}};
}

TranslatorSpec TranslatorSpec::fromJson(const json& j) {
    TranslatorSpec s;
    auto           kind = j.value("kind", std::string("retrieval"));
    if (kind == "external") s.kind = Kind::External;
    else if (kind != "retrieval") throw std::invalid_argument("unknown translator kind '" + kind + "'");
    s.command = j.value("command", std::string());
    s.timeout = plugin::Millis(j.value("timeout_ms", 5000));
    s.window = j.value("window", std::size_t{8});
    s.templates = j.value("templates", std::string());
    if (s.timeout.count() <= 0) throw std::invalid_argument("translator timeout must be positive");
    if (s.kind == Kind::External && s.command.empty()) throw std::invalid_argument("external translator needs a command");
    return s;
}

std::unique_ptr<Translator> makeTranslator(const TranslatorSpec& spec) {
    if (spec.kind == TranslatorSpec::Kind::External)
        return std::make_unique<ExternalTranslator>(spec.command, spec.timeout, spec.window);
    auto dir = spec.templates.empty() ? dataDir() / "templates" : spec.templates;
    return std::make_unique<RetrievalTranslator>(dataset::loadTemplates(dir));
}

asp::Term parseTerm(std::string_view text) {
    std::string s(text);
    bool        number = !s.empty() && std::all_of(s.begin() + (s[0] == '-' ? 1 : 0), s.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
    }) && s != "-";
    return number ? asp::Term::integer(std::stoll(s)) : asp::Term::constant(s);
}

EquivalenceSetup EquivalenceSetup::fromJson(const json& j) {
    EquivalenceSetup s;
    for (const auto& sig : j.at("signature")) s.signature.push_back(solver::parseSignature(sig.get<std::string>()));
    for (const auto& t : j.at("universe")) s.universe.push_back(parseTerm(t.is_string() ? t.get<std::string>() : t.dump()));
    if (j.contains("projection"))
        for (const auto& sig : j["projection"]) s.options.projection.push_back(solver::parseSignature(sig.get<std::string>()));
    if (j.contains("sample")) {
        const auto& smp = j["sample"];
        if (smp.is_string() && smp.get<std::string>() == "exhaustive") s.sample = solver::Sample::all();
        else if (smp.is_object())
            s.sample = solver::Sample::random(smp.at("random").get<std::size_t>(), smp.value("seed", std::uint64_t{0}));
        else throw std::invalid_argument("sample must be \"exhaustive\" or {\"random\": N, \"seed\": S}");
    }
    if (j.contains("max_atoms")) s.options.solve.max_atoms = j["max_atoms"].get<std::size_t>();
    if (j.contains("optimal_only")) s.options.solve.optimal_only = j["optimal_only"].get<bool>();
    return s;
}

CompileResult compileCandidates(const std::vector<Candidate>& candidates) {
    CompileResult            out;
    std::vector<std::size_t> origin;
    std::string              text;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!candidates[i].accepted || !candidates[i].cnl) continue;
        origin.push_back(i);
        text += *candidates[i].cnl + "\n";
    }
    cnl::Document doc;
    try {
        doc = cnl::parseCnl(text);
    }
    catch (const cnl::CnlError& e) {
        auto at = e.sentence() < origin.size() ? origin[e.sentence()] : 0;
        out.diagnostics.push_back({at, std::string(cnl::toString(e.kind())), e.message(), e.position()});
        return out;
    }
    asp::Program program;
    for (std::size_t k = 0; k < doc.propositions.size(); ++k) {
        try {
            auto rules = codegen::compileSentence(doc.propositions[k], doc.symbols);
            program.rules.insert(program.rules.end(), rules.begin(), rules.end());
        }
        catch (const codegen::CompileError& e) {
            out.diagnostics.push_back({origin[k], std::string(codegen::toString(e.kind())), e.what(), std::nullopt});
        }
    }
    if (out.diagnostics.empty()) out.program = std::move(program);
    return out;
}

std::string_view toString(EquivalenceStatus s) {
    switch (s) {
        case EquivalenceStatus::Absent: return "absent";
        case EquivalenceStatus::Skipped: return "skipped";
        case EquivalenceStatus::Equivalent: return "equivalent";
        case EquivalenceStatus::Different: return "different";
        case EquivalenceStatus::Failed: return "failed";
    }
    return "?";
}

PipelineRun runPipeline(const std::vector<std::string>& inputs, Translator& translator, const RunOptions& opts) {
    PipelineRun run;
    run.inputs = inputs;
    run.translator = translator.describe();
    run.candidates = translator.translate(inputs);
    if (run.candidates.size() != inputs.size())
        throw std::logic_error("translator returned " + std::to_string(run.candidates.size()) + " candidates for " +
                               std::to_string(inputs.size()) + " inputs");
    for (auto& c : run.candidates) check(c);

    run.syntax.total = inputs.size();
    for (const auto& c : run.candidates) {
        run.syntax.verdicts.push_back({c.accepted, c.cnl ? c.reason : c.error.value_or("no candidate"), c.category});
        if (c.accepted) ++run.syntax.accepted;
    }
    if (run.syntax.total > 0)
        run.syntax.accuracy = static_cast<double>(run.syntax.accepted) / static_cast<double>(run.syntax.total);

    auto compiled = compileCandidates(run.candidates);
    run.program = std::move(compiled.program);
    run.diagnostics = std::move(compiled.diagnostics);

    if (opts.reference_cnl && opts.reference_cnl->size() == inputs.size()) {
        std::vector<metrics::EvalPair> pairs;
        for (std::size_t i = 0; i < inputs.size(); ++i)
            if (run.candidates[i].cnl && !metrics::tokenize(*run.candidates[i].cnl).empty())
                pairs.push_back({*run.candidates[i].cnl, {(*opts.reference_cnl)[i]}});
        if (!pairs.empty()) run.metrics = metrics::evaluate(pairs, opts.metric_config, true);
    }

    run.gold = opts.gold;
    if (!opts.gold) return run;
    if (!run.program) {
        run.equivalence = EquivalenceStatus::Skipped;
        run.note = "compilation incomplete";
        return run;
    }
    if (!opts.setup) {
        run.equivalence = EquivalenceStatus::Skipped;
        run.note = "no equivalence bounds configured";
        return run;
    }
    try {
        run.verdict = solver::checkUniformEquivalence(*run.program, *opts.gold, opts.setup->signature,
                                                      opts.setup->universe, opts.setup->sample, opts.setup->options);
        run.equivalence = run.verdict->equivalent ? EquivalenceStatus::Equivalent : EquivalenceStatus::Different;
    }
    catch (const std::exception& e) {
        run.equivalence = EquivalenceStatus::Failed;
        run.note = e.what();
    }
    return run;
}

namespace {

json atomsJson(const std::vector<asp::Atom>& atoms) {
    json a = json::array();
    for (const auto& x : atoms) a.push_back(asp::toString(x));
    return a;
}

json familyJson(const solver::Family& f) {
    json out = json::array();
    for (const auto& s : f) out.push_back(atomsJson(s));
    return out;
}

}  // namespace

json toJson(const PipelineRun& run) {
    json j;
    j["inputs"] = run.inputs;
    j["translator"] = run.translator;
    json outs = json::array();
    for (std::size_t i = 0; i < run.candidates.size(); ++i) {
        const auto& c = run.candidates[i];
        json        o{{"index", i}, {"nl", c.nl}, {"accepted", c.accepted}};
        o["cnl"] = c.cnl ? json(*c.cnl) : json(nullptr);
        o["error"] = c.error ? json(*c.error) : json(nullptr);
        o["source"] = c.source ? json(*c.source) : json(nullptr);
        o["category"] = c.category ? json(std::string(cnl::toString(*c.category))) : json(nullptr);
        if (!c.reason.empty()) o["reason"] = c.reason;
        outs.push_back(std::move(o));
    }
    j["cnl_outputs"] = outs;
    j["syntax"] = {{"total", run.syntax.total},
                   {"syntactically_correct", run.syntax.accepted},
                   {"syntactic_accuracy", run.syntax.accuracy}};
    j["asp_program"] = run.program ? json(asp::printProgram(*run.program)) : json(nullptr);
    json diags = json::array();
    for (const auto& d : run.diagnostics) {
        json x{{"input", d.input}, {"kind", d.kind}, {"message", d.message}};
        if (d.column) x["column"] = *d.column;
        diags.push_back(std::move(x));
    }
    j["diagnostics"] = diags;
    j["gold"] = run.gold ? json(asp::printProgram(*run.gold)) : json(nullptr);
    json eq{{"status", std::string(toString(run.equivalence))}};
    if (run.verdict) {
        eq["tested"] = run.verdict->tested;
        if (run.verdict->counterexample) {
            const auto& cx = *run.verdict->counterexample;
            eq["counterexample"] = {
                {"facts", atomsJson(cx.facts)}, {"compiled", familyJson(cx.first)}, {"gold", familyJson(cx.second)}};
        }
    }
    if (!run.note.empty()) eq["note"] = run.note;
    j["equivalence"] = eq;
    j["metrics"] = run.metrics ? metrics::toJson(*run.metrics) : json(nullptr);
    return j;
}

std::string summary(const PipelineRun& run) {
    std::ostringstream out;
    out << "sentences: " << run.inputs.size() << ", syntactically correct: " << run.syntax.accepted << " ("
        << run.syntax.accuracy * 100 << "%)\n";
    for (std::size_t i = 0; i < run.candidates.size(); ++i) {
        const auto& c = run.candidates[i];
        if (c.accepted) continue;
        out << "  [" << i << "] " << (c.cnl ? "rejected: " + c.reason : "no candidate: " + c.error.value_or("?"))
            << "\n";
    }
    for (const auto& d : run.diagnostics) out << "  [" << d.input << "] " << d.kind << ": " << d.message << "\n";
    out << "program: " << (run.program ? std::to_string(run.program->rules.size()) + " rules" : "incomplete") << "\n";
    out << "equivalence: " << toString(run.equivalence);
    if (run.verdict) out << " (" << run.verdict->tested << " fact sets)";
    if (!run.note.empty()) out << " - " << run.note;
    out << "\n";
    return out.str();
}

CompileResult replay(const json& report) {
    std::vector<Candidate> cs;
    for (const auto& o : report.at("cnl_outputs")) {
        Candidate c;
        c.nl = o.value("nl", std::string());
        if (o.contains("cnl") && o["cnl"].is_string()) c.cnl = o["cnl"].get<std::string>();
        c.accepted = o.value("accepted", false);
        cs.push_back(std::move(c));
    }
    return compileCandidates(cs);
}

std::vector<std::string> readLines(const std::filesystem::path& file) {
    std::istringstream       in(readFile(file));
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        auto n = normalize(line);
        if (n.empty() || n[0] == '#' || n[0] == '%') continue;
        out.push_back(n);
    }
    return out;
}

Problem loadProblem(const std::filesystem::path& dir) {
    Problem p;
    p.dir = dir;
    auto meta = json::parse(readFile(dir / "problem.json"));
    p.name = meta.value("name", dir.filename().string());
    p.nl = readLines(dir / "spec.nl");
    p.cnl = readLines(dir / "spec.cnl");
    p.gold = asp::parseProgram(readFile(dir / "gold.lp"));
    for (const auto& f : meta.value("instances", std::vector<std::string>{}))
        p.instances.emplace_back(f, asp::parseProgram(readFile(dir / f)));
    p.setup = EquivalenceSetup::fromJson(meta);
    if (p.nl.size() != p.cnl.size())
        throw std::runtime_error(dir.string() + ": spec.nl and spec.cnl have different sentence counts");
    return p;
}

std::vector<Problem> loadProblems(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> dirs;
    for (const auto& e : std::filesystem::directory_iterator(root))
        if (e.is_directory() && std::filesystem::exists(e.path() / "problem.json")) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<Problem> out;
    for (const auto& d : dirs) out.push_back(loadProblem(d));
    return out;
}

}  // namespace cnlasp::pipeline
