#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cdcr/corpus.hpp"
#include "cdcr/encoding_types.hpp"
#include "cdcr/prompts.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

struct GenParams {
    double temperature = 0.7;
    double top_p = 0.9;
    int max_tokens = 512;
};

struct Rationale {
    std::string pair_id;
    std::string text;
    int gold_label_conditioned = 0;
    GenParams gen_params;
    std::string teacher_name;
};

// Access to the generative teacher. Implementations must be reproducible
// for identical prompt + seed + params when the backend supports seeding,
// and must honor params.max_tokens under their own tokenizer.
class TeacherClient {
public:
    virtual ~TeacherClient() = default;
    virtual std::string name() const = 0;
    virtual std::size_t hidden_dim() const = 0;   // D_T
    virtual std::size_t head_count() const = 0;   // H
    virtual std::string generate(const PromptBundle& prompt, const GenParams& params) = 0;
    virtual TeacherEncoding encode(const std::string& text) = 0;
    virtual std::vector<std::string> tokenize(const std::string& text) const {
        return text::word_tokenize(text);
    }
};

// One rationale per pair_id, strictly one-to-one.
class RationaleStore {
public:
    void insert(Rationale r);  // throws ValidationError on duplicate pair_id
    const Rationale* find(const std::string& pair_id) const;
    bool contains(const std::string& pair_id) const { return find(pair_id) != nullptr; }
    std::size_t size() const { return order_.size(); }

    // Insertion order, for deterministic serialization.
    std::vector<const Rationale*> all() const;

    void save(const std::filesystem::path& path) const;  // JSON lines
    static RationaleStore load(const std::filesystem::path& path);

private:
    std::map<std::string, Rationale> by_pair_;
    std::vector<std::string> order_;
};

struct GenerationFailure {
    std::string pair_id;
    std::string message;
    int retries = 0;
};

struct GenerationReport {
    RationaleStore store;
    std::vector<GenerationFailure> failures;
};

// Generates one rationale per pair via the FTR prompt. Failures are
// recorded per pair and never abort the batch. `parallelism` > 1 fans the
// client calls out over worker threads; results land in input order.
GenerationReport generate_rationales(const std::vector<MentionPair>& pairs,
                                     TeacherClient& client, const GenParams& params,
                                     int parallelism = 1, int max_retries = 2);

enum class ZeroShotLabel { No = 0, Yes = 1, Refused = 2 };

// First alphabetic token of the response, case-insensitive:
// yes/same -> Yes, no/different -> No, anything else -> Refused.
ZeroShotLabel parse_zeroshot_response(const std::string& response);

std::map<std::string, ZeroShotLabel> zeroshot_labels(
    const std::vector<MentionPair>& pairs, TeacherClient& client,
    ZeroShotStyle style = ZeroShotStyle::LlamaChat);

}  // namespace cdcr
