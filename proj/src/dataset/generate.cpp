#include <cnlasp/dataset.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace cnlasp::dataset {

RetryExhausted::RetryExhausted(cnl::Category c, std::string templateId, const std::string& why)
    : DatasetError("template " + templateId + " (" + std::string(cnl::toString(c)) + "): " + why)
    , category_(c)
    , template_(std::move(templateId)) {}

ProviderError::ProviderError(std::string recordId, std::size_t cursor, const std::string& why)
    : DatasetError("paraphrasing record " + recordId + " failed: " + why), record_(std::move(recordId)), cursor_(cursor) {}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix(splitmix(splitmix(seed ^ a) ^ b) ^ c);
}

std::string padded(std::int64_t n) {
    std::ostringstream s;
    s << std::setw(5) << std::setfill('0') << n;
    return s.str();
}

}  // namespace

Generated generateBalanced(const std::vector<TemplatePair>& templates, const BagOfWords& bow, const Targets& targets,
                           std::uint64_t seed, int retries) {
    for (const auto& t : templates) validate(t);
    Generated out;
    for (auto c : cnl::kAllCategories) {
        auto it = targets.find(c);
        auto want = it == targets.end() ? 0 : it->second;
        if (want <= 0) continue;
        std::vector<const TemplatePair*> pool;
        for (const auto& t : templates)
            if (t.category == c) pool.push_back(&t);
        if (pool.empty()) throw DatasetError("no template for category " + std::string(cnl::toString(c)));

        for (std::int64_t i = 0; i < want; ++i) {
            const auto& t = *pool[static_cast<std::size_t>(i) % pool.size()];
            std::string why = "no attempt made";
            bool        done = false;
            for (int attempt = 0; attempt <= retries && !done; ++attempt) {
                auto r = instantiate(t, bow, mix(seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i),
                                                 static_cast<std::uint64_t>(attempt)),
                                     "gen-" + std::string(cnl::toString(c)) + "-" + padded(i));
                auto v = cnl::checkSyntax(r.cnl);
                if (!v.accepted) why = "CNL rejected: " + v.reason + " in '" + r.cnl + "'";
                else if (v.category != c) why = "CNL parses as " + std::string(cnl::toString(*v.category));
                else {
                    out.records.push_back(std::move(r));
                    done = true;
                }
            }
            if (!done) throw RetryExhausted(c, t.id, why);
        }
    }
    out.manifest = manifestOf(out.records);
    return out;
}

Targets equalizingTargets(const Targets& source, std::int64_t floor) {
    std::int64_t top = floor;
    for (const auto& [c, n] : source) top = std::max(top, n);
    Targets out;
    for (auto c : cnl::kAllCategories) {
        auto it = source.find(c);
        out[c] = top - (it == source.end() ? 0 : it->second);
    }
    return out;
}

SynonymTableProvider SynonymTableProvider::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DatasetError("cannot read " + file.string());
    std::map<std::string, std::vector<std::string>> table;
    for (std::string line; std::getline(in, line);) {
        auto colon = line.find(':');
        if (line.empty() || line[0] == '#' || colon == std::string::npos) continue;
        auto               word = line.substr(0, colon);
        std::istringstream rest(line.substr(colon + 1));
        for (std::string syn; std::getline(rest, syn, ',');) {
            auto b = syn.find_first_not_of(' ');
            auto e = syn.find_last_not_of(' ');
            if (b != std::string::npos) table[word].push_back(syn.substr(b, e - b + 1));
        }
    }
    return SynonymTableProvider(std::move(table));
}

std::string SynonymTableProvider::paraphrase(const DatasetRecord& parent, int variant) {
    std::istringstream in(parent.nl);
    std::string        out;
    std::size_t        position = 0;
    for (std::string word; in >> word; ++position) {
        std::size_t cut = word.size();
        while (cut > 0 && std::ispunct(static_cast<unsigned char>(word[cut - 1]))) --cut;
        std::string core = word.substr(0, cut);
        std::string tail = word.substr(cut);
        bool        capital = !core.empty() && std::isupper(static_cast<unsigned char>(core[0]));
        std::string key = core;
        if (capital) key[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(key[0])));
        if (auto it = table_.find(key); it != table_.end() && !it->second.empty()) {
            const auto& syns = it->second;
            core = syns[(static_cast<std::size_t>(variant) + position) % syns.size()];
            if (capital && !core.empty()) core[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(core[0])));
        }
        if (!out.empty()) out += ' ';
        out += core + tail;
    }
    return out;
}

nlohmann::json toJson(const ParaphraseConfig& c) {
    return nlohmann::json{
        {"engine", c.engine}, {"temperature", c.temperature}, {"max_tokens", c.max_tokens}, {"prompt", c.prompt}};
}

std::vector<DatasetRecord> rephraseExpand(const std::vector<DatasetRecord>& records, ParaphraseProvider& provider,
                                          const RephraseOptions& opts) {
    if (opts.k < 0) throw DatasetError("k must be non-negative");
    std::map<std::string, std::vector<DatasetRecord>> done;
    if (opts.checkpoint && std::filesystem::exists(*opts.checkpoint)) {
        std::ifstream     in(*opts.checkpoint);
        std::stringstream ss;
        ss << in.rdbuf();
        for (auto& r : parseJsonl(ss.str()))
            if (r.parent_id) done[*r.parent_id].push_back(std::move(r));
    }
    std::ofstream log;
    if (opts.checkpoint) {
        log.open(*opts.checkpoint, std::ios::app);
        if (!log) throw DatasetError("cannot write " + opts.checkpoint->string());
    }

    std::vector<DatasetRecord> out;
    std::size_t                cursor = 0;
    for (const auto& parent : records) {
        if (parent.origin == Origin::Rephrased) continue;
        if (auto it = done.find(parent.id);
            it != done.end() && it->second.size() == static_cast<std::size_t>(opts.k)) {
            out.insert(out.end(), it->second.begin(), it->second.end());
            ++cursor;
            continue;
        }
        std::vector<DatasetRecord> children;
        for (int v = 0; v < opts.k; ++v) {
            DatasetRecord child;
            try {
                child.nl = provider.paraphrase(parent, v);
            }
            catch (const std::exception& e) {
                throw ProviderError(parent.id, cursor, e.what());
            }
            child.id = parent.id + "-r" + std::to_string(v + 1);
            child.cnl = parent.cnl;
            child.category = parent.category;
            child.origin = Origin::Rephrased;
            child.parent_id = parent.id;
            children.push_back(std::move(child));
        }
        if (log.is_open()) {
            log << toJsonl(children);
            log.flush();
        }
        out.insert(out.end(), children.begin(), children.end());
        ++cursor;
    }
    return out;
}

}  // namespace cnlasp::dataset
