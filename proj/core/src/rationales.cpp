#include "cdcr/rationales.hpp"

#include <atomic>
#include <cctype>
#include <set>
#include <thread>

#include <json.hpp>

#include "cdcr/errors.hpp"
#include "cdcr/io.hpp"

namespace cdcr {

using nlohmann::json;

void RationaleStore::insert(Rationale r) {
    if (r.text.empty()) throw ValidationError("rationale text empty for pair " + r.pair_id);
    if (by_pair_.count(r.pair_id)) {
        throw ValidationError("duplicate rationale for pair " + r.pair_id);
    }
    order_.push_back(r.pair_id);
    by_pair_.emplace(r.pair_id, std::move(r));
}

const Rationale* RationaleStore::find(const std::string& pair_id) const {
    auto it = by_pair_.find(pair_id);
    return it == by_pair_.end() ? nullptr : &it->second;
}

std::vector<const Rationale*> RationaleStore::all() const {
    std::vector<const Rationale*> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(&by_pair_.at(id));
    return out;
}

void RationaleStore::save(const std::filesystem::path& path) const {
    std::string buf;
    for (const Rationale* r : all()) {
        json j = {{"pair_id", r->pair_id},
                  {"text", r->text},
                  {"label_conditioned", r->gold_label_conditioned},
                  {"temperature", r->gen_params.temperature},
                  {"top_p", r->gen_params.top_p},
                  {"max_tokens", r->gen_params.max_tokens},
                  {"teacher_name", r->teacher_name}};
        buf += j.dump();
        buf += '\n';
    }
    io::atomic_write(path, buf);
}

RationaleStore RationaleStore::load(const std::filesystem::path& path) {
    RationaleStore store;
    auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw ParseError("rationale store line " + std::to_string(i + 1) + ": " + e.what());
        }
        Rationale r;
        try {
            r.pair_id = j.at("pair_id").get<std::string>();
            r.text = j.at("text").get<std::string>();
            r.gold_label_conditioned = j.at("label_conditioned").get<int>();
            r.gen_params.temperature = j.at("temperature").get<double>();
            r.gen_params.top_p = j.at("top_p").get<double>();
            r.gen_params.max_tokens = j.at("max_tokens").get<int>();
            r.teacher_name = j.at("teacher_name").get<std::string>();
        } catch (const json::exception& e) {
            throw ParseError("rationale store line " + std::to_string(i + 1) + ": " + e.what());
        }
        store.insert(std::move(r));
    }
    return store;
}

namespace {

struct PairOutcome {
    bool ok = false;
    std::string text;
    std::string error;
    int retries = 0;
};

PairOutcome generate_one(const MentionPair& pair, TeacherClient& client,
                         const GenParams& params, int max_retries) {
    PairOutcome out;
    PromptBundle prompt = build_ftr_prompt(pair);
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        out.retries = attempt;
        try {
            std::string text = client.generate(prompt, params);
            if (text.empty()) {
                out.error = "teacher returned empty text";
                continue;
            }
            auto tokens = client.tokenize(text);
            if (tokens.size() > static_cast<std::size_t>(params.max_tokens)) {
                out.error = "teacher exceeded max_tokens";
                continue;
            }
            out.ok = true;
            out.text = std::move(text);
            return out;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    }
    return out;
}

}  // namespace

GenerationReport generate_rationales(const std::vector<MentionPair>& pairs,
                                     TeacherClient& client, const GenParams& params,
                                     int parallelism, int max_retries) {
    {
        std::set<std::string> seen;
        for (const auto& p : pairs) {
            if (!seen.insert(p.pair_id).second) {
                throw ValidationError("duplicate pair_id in generation batch: " + p.pair_id);
            }
        }
    }

    std::vector<PairOutcome> outcomes(pairs.size());
    if (parallelism <= 1 || pairs.size() < 2) {
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            outcomes[i] = generate_one(pairs[i], client, params, max_retries);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= pairs.size()) return;
                outcomes[i] = generate_one(pairs[i], client, params, max_retries);
            }
        };
        std::vector<std::thread> threads;
        std::size_t n_threads = std::min<std::size_t>(parallelism, pairs.size());
        threads.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    GenerationReport report;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        PairOutcome& out = outcomes[i];
        if (out.ok) {
            Rationale r;
            r.pair_id = pairs[i].pair_id;
            r.text = std::move(out.text);
            r.gold_label_conditioned = pairs[i].label;
            r.gen_params = params;
            r.teacher_name = client.name();
            report.store.insert(std::move(r));
        } else {
            report.failures.push_back({pairs[i].pair_id, out.error, out.retries});
        }
    }
    return report;
}

ZeroShotLabel parse_zeroshot_response(const std::string& response) {
    std::string token;
    for (char ch : response) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalpha(c)) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else if (!token.empty()) {
            break;
        }
    }
    if (token == "yes" || token == "same") return ZeroShotLabel::Yes;
    if (token == "no" || token == "different") return ZeroShotLabel::No;
    return ZeroShotLabel::Refused;
}

std::map<std::string, ZeroShotLabel> zeroshot_labels(const std::vector<MentionPair>& pairs,
                                                     TeacherClient& client,
                                                     ZeroShotStyle style) {
    std::map<std::string, ZeroShotLabel> out;
    GenParams params;
    params.max_tokens = 16;  // single-word answers
    for (const auto& pair : pairs) {
        PromptBundle prompt = build_zeroshot_prompt(pair, style);
        ZeroShotLabel label;
        try {
            label = parse_zeroshot_response(client.generate(prompt, params));
        } catch (const std::exception&) {
            label = ZeroShotLabel::Refused;
        }
        out[pair.pair_id] = label;
    }
    return out;
}

}  // namespace cdcr
