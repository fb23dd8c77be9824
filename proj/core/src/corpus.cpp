#include "cdcr/corpus.hpp"

#include <json.hpp>

#include "cdcr/errors.hpp"
#include "cdcr/io.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

using nlohmann::json;

std::string make_pair_id(const std::string& a, const std::string& b) {
    return a < b ? a + "|" + b : b + "|" + a;
}

CorpusSplit::CorpusSplit(std::string name, std::vector<Mention> mentions)
    : name_(std::move(name)), mentions_(std::move(mentions)) {
    validate_and_index();
}

void CorpusSplit::validate_and_index() {
    for (std::size_t i = 0; i < mentions_.size(); ++i) {
        const Mention& m = mentions_[i];
        if (m.mention_id.empty()) throw ValidationError("mention with empty mention_id");
        if (!index_.emplace(m.mention_id, i).second) {
            throw ValidationError("duplicate mention_id: " + m.mention_id);
        }
        std::size_t len = text::utf8_length(m.sentence);
        if (!(m.trigger_start < m.trigger_end && m.trigger_end <= len)) {
            throw ValidationError("trigger span out of range for mention " + m.mention_id);
        }
        if (m.trigger_lemma.empty()) {
            throw ValidationError("empty trigger_lemma for mention " + m.mention_id);
        }
        for (char c : m.trigger_lemma) {
            if (c >= 'A' && c <= 'Z') {
                throw ValidationError("trigger_lemma not lowercase for mention " + m.mention_id);
            }
        }
        if (m.gold_cluster_id.empty()) {
            throw ValidationError("empty gold_cluster_id for mention " + m.mention_id);
        }
        clusters_[m.gold_cluster_id].insert(m.mention_id);
    }
}

const Mention& CorpusSplit::mention(const std::string& mention_id) const {
    auto it = index_.find(mention_id);
    if (it == index_.end()) throw ValidationError("unknown mention_id: " + mention_id);
    return mentions_[it->second];
}

bool CorpusSplit::has_mention(const std::string& mention_id) const {
    return index_.count(mention_id) > 0;
}

namespace {

Mention parse_mention_line(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object");
    }
    static const char* required[] = {"mention_id",    "doc_id",        "topic_id",
                                     "sentence",      "trigger_start", "trigger_end",
                                     "trigger_lemma", "gold_cluster_id"};
    for (const char* key : required) {
        if (!j.contains(key)) {
            throw ParseError("line " + std::to_string(line_no) + ": missing key '" + key + "'");
        }
    }
    Mention m;
    try {
        m.mention_id = j.at("mention_id").get<std::string>();
        m.doc_id = j.at("doc_id").get<std::string>();
        if (!j.at("topic_id").is_null()) m.topic_id = j.at("topic_id").get<std::string>();
        m.sentence = j.at("sentence").get<std::string>();
        m.trigger_start = j.at("trigger_start").get<std::size_t>();
        m.trigger_end = j.at("trigger_end").get<std::size_t>();
        m.trigger_lemma = j.at("trigger_lemma").get<std::string>();
        m.gold_cluster_id = j.at("gold_cluster_id").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    return m;
}

}  // namespace

CorpusSplit load_corpus(const std::filesystem::path& path, CorpusFormat format,
                        const std::string& split_name) {
    if (format != CorpusFormat::Jsonl) throw ValidationError("unsupported corpus format");
    std::vector<Mention> mentions;
    auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        mentions.push_back(parse_mention_line(lines[i], i + 1));
    }
    std::string name = split_name.empty() ? path.stem().string() : split_name;
    return CorpusSplit(std::move(name), std::move(mentions));
}

MentionPair make_pair(const Mention& a, const Mention& b) {
    if (a.mention_id == b.mention_id) throw ValidationError("pair of a mention with itself");
    MentionPair p;
    const Mention* first = &a;
    const Mention* second = &b;
    if (second->mention_id < first->mention_id) std::swap(first, second);
    p.m1 = first;
    p.m2 = second;
    p.pair_id = make_pair_id(a.mention_id, b.mention_id);
    p.label = (a.gold_cluster_id == b.gold_cluster_id) ? 1 : 0;
    return p;
}

std::vector<MentionPair> enumerate_pairs(const CorpusSplit& split, PairScope scope) {
    const auto& ms = split.mentions();
    std::vector<MentionPair> pairs;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            if (scope == PairScope::WithinTopic && ms[i].topic_id != ms[j].topic_id) continue;
            pairs.push_back(make_pair(ms[i], ms[j]));
        }
    }
    return pairs;
}

std::vector<MentionPair> positive_pairs(const CorpusSplit& split) {
    const auto& ms = split.mentions();
    std::vector<MentionPair> pairs;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            if (ms[i].gold_cluster_id != ms[j].gold_cluster_id) continue;
            pairs.push_back(make_pair(ms[i], ms[j]));
        }
    }
    return pairs;
}

}  // namespace cdcr
