#include "cdcr/lemma_heuristic.hpp"

#include <json.hpp>

#include "cdcr/errors.hpp"
#include "cdcr/io.hpp"

namespace cdcr {

using nlohmann::json;

void LemmaPairCache::add(const std::string& lemma_a, const std::string& lemma_b,
                         bool coreferent) {
    Counts& c = counts_[make_key(lemma_a, lemma_b)];
    c.total += 1;
    if (coreferent) c.coreferent += 1;
}

double LemmaPairCache::score(const std::string& lemma_a, const std::string& lemma_b) const {
    auto it = counts_.find(make_key(lemma_a, lemma_b));
    if (it != counts_.end()) {
        return static_cast<double>(it->second.coreferent) /
               static_cast<double>(it->second.total);
    }
    return lemma_a == lemma_b ? 1.0 : 0.0;
}

// The cache file is exactly the map "lemma_a|lemma_b" -> {coref, total};
// build provenance travels in the stage manifest instead.
std::string LemmaPairCache::to_json() const {
    json j = json::object();
    for (const auto& [key, c] : counts_) {
        j[key.first + "|" + key.second] = {{"coref", c.coreferent}, {"total", c.total}};
    }
    return j.dump(2);
}

LemmaPairCache LemmaPairCache::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("lemma cache: ") + e.what());
    }
    LemmaPairCache cache;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        auto bar = k.find('|');
        if (bar == std::string::npos) throw ParseError("lemma cache: bad key '" + k + "'");
        Counts c;
        c.coreferent = it.value().at("coref").get<std::uint64_t>();
        c.total = it.value().at("total").get<std::uint64_t>();
        if (c.total == 0 || c.coreferent > c.total) {
            throw ValidationError("lemma cache: inconsistent counts for '" + k + "'");
        }
        cache.counts_[make_key(k.substr(0, bar), k.substr(bar + 1))] = c;
    }
    return cache;
}

void LemmaPairCache::save(const std::filesystem::path& path) const {
    io::atomic_write(path, to_json() + "\n");
}

LemmaPairCache LemmaPairCache::load(const std::filesystem::path& path) {
    return from_json(io::read_file(path));
}

LemmaPairCache build_cache(const CorpusSplit& train_split) {
    LemmaPairCache cache;
    cache.set_built_from(train_split.name());
    for (const MentionPair& p : enumerate_pairs(train_split, PairScope::All)) {
        cache.add(p.m1->trigger_lemma, p.m2->trigger_lemma, p.label == 1);
    }
    return cache;
}

double pair_score(const LemmaPairCache& cache, const MentionPair& pair) {
    return cache.score(pair.m1->trigger_lemma, pair.m2->trigger_lemma);
}

std::vector<MentionPair> retrieve_candidates(const LemmaPairCache& cache,
                                             const std::vector<MentionPair>& pairs,
                                             double threshold) {
    if (threshold < 0.0 || threshold > 1.0) {
        throw ValidationError("retrieve_candidates: threshold must be in [0, 1]");
    }
    std::vector<MentionPair> kept;
    for (const MentionPair& p : pairs) {
        if (pair_score(cache, p) >= threshold) kept.push_back(p);
    }
    return kept;
}

}  // namespace cdcr
