#include "cdcr/synthetic.hpp"

#include <array>
#include <sstream>

#include <json.hpp>

#include "cdcr/errors.hpp"
#include "cdcr/rng.hpp"

namespace cdcr {

namespace {

struct ActionFamily {
    const char* name;
    std::array<const char*, 2> verbs;    // surface form == lemma at desk scale
    const char* object;
};

const ActionFamily kFamilies[] = {
    {"violence", {"shot", "wounded"}, "a guard"},
    {"traffic", {"crashed", "collided"}, "a truck"},
    {"business", {"acquired", "bought"}, "a startup"},
    {"disaster", {"struck", "hit"}, "the coast"},
    {"protest", {"marched", "rallied"}, "the square"},
};
constexpr std::size_t kNumFamilies = sizeof(kFamilies) / sizeof(kFamilies[0]);

// Pools are small and cycled: a ten-cluster split covers every token, so
// held-out splits recombine seen tokens instead of introducing
// out-of-vocabulary names.
const char* kActors[] = {"Alvarez", "Bennett", "Castillo", "Dawson", "Emerson",
                         "Farrell", "Gallego", "Harmon",   "Ibarra", "Jackson"};
// One city per action family: clusters sharing a family also share the
// city, so hard negatives collide on both lemma and location and must be
// separated by actor and weekday.
const char* kCities[] = {"Dresden", "Fresno", "Galway", "Haifa", "Izmir"};
const char* kWeekdays[] = {"Monday", "Tuesday", "Wednesday", "Thursday",
                           "Friday", "Saturday", "Sunday"};

struct EventSpec {
    const ActionFamily* family;
    std::string actor;
    std::string city;
    std::string weekday;
};

// Sentence templates; {V} is the trigger verb.
std::string render_sentence(std::size_t variant, const EventSpec& ev, const std::string& verb,
                            std::size_t& trigger_start) {
    std::ostringstream s;
    switch (variant % 4) {
        case 0:
            s << ev.actor << " ";
            trigger_start = s.str().size();
            s << verb << " " << ev.family->object << " in " << ev.city << " on "
              << ev.weekday << " .";
            break;
        case 1:
            s << "Witnesses said " << ev.actor << " ";
            trigger_start = s.str().size();
            s << verb << " " << ev.family->object << " near " << ev.city << " on "
              << ev.weekday << " evening .";
            break;
        case 2:
            s << "On " << ev.weekday << " , " << ev.actor << " ";
            trigger_start = s.str().size();
            s << verb << " " << ev.family->object << " in downtown " << ev.city << " .";
            break;
        default:
            s << "Reports from " << ev.city << " say " << ev.actor << " ";
            trigger_start = s.str().size();
            s << verb << " " << ev.family->object << " this " << ev.weekday << " .";
            break;
    }
    return s.str();
}

std::string lower_copy(const char* s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

CorpusSplit make_synthetic_split(const SyntheticConfig& config) {
    std::size_t total_clusters = config.n_clusters + config.n_singletons;
    if (config.min_cluster_size < 2 || config.max_cluster_size < config.min_cluster_size) {
        throw ValidationError("synthetic: bad cluster size range");
    }
    if (config.n_families < 1 || config.n_families > kNumFamilies) {
        throw ValidationError("synthetic: n_families out of range");
    }
    std::size_t n_families = config.n_families;
    Rng rng(config.seed);
    Rng event_rng(config.event_seed ? config.event_seed : config.seed);

    // Cycle seeded permutations of each pool: all pool tokens appear once
    // the split is large enough, and clusters sharing a family always
    // differ in actor and weekday.
    constexpr std::size_t kNumActors = sizeof(kActors) / sizeof(kActors[0]);
    constexpr std::size_t kNumCities = sizeof(kCities) / sizeof(kCities[0]);
    constexpr std::size_t kNumDays = sizeof(kWeekdays) / sizeof(kWeekdays[0]);
    std::vector<std::size_t> actor_order = event_rng.sample_indices(kNumActors, kNumActors);
    std::vector<std::size_t> city_order = event_rng.sample_indices(kNumCities, kNumCities);
    std::vector<std::size_t> day_order = event_rng.sample_indices(kNumDays, kNumDays);

    std::vector<Mention> mentions;
    std::size_t mention_counter = 0;
    auto next_mention_id = [&]() {
        std::ostringstream id;
        id << config.split_name << "_m";
        std::string n = std::to_string(mention_counter++);
        for (std::size_t i = n.size(); i < 4; ++i) id << '0';
        id << n;
        return id.str();
    };

    auto emit_cluster = [&](std::size_t cluster_idx, std::size_t size, bool singleton) {
        EventSpec ev;
        ev.family = &kFamilies[cluster_idx % n_families];
        ev.actor = kActors[actor_order[cluster_idx % kNumActors]];
        ev.city = kCities[city_order[cluster_idx % n_families % kNumCities]];
        ev.weekday = kWeekdays[day_order[cluster_idx % kNumDays]];

        std::ostringstream cluster_id;
        cluster_id << config.split_name << (singleton ? "_s" : "_c") << cluster_idx;
        for (std::size_t k = 0; k < size; ++k) {
            const char* verb = ev.family->verbs[k % ev.family->verbs.size()];
            std::size_t trigger_start = 0;
            std::string sentence = render_sentence(rng.next_below(4), ev, verb, trigger_start);
            Mention m;
            m.mention_id = next_mention_id();
            m.doc_id = config.split_name + "_d" + std::to_string(cluster_idx) + "_" +
                       std::to_string(k % 3);
            m.topic_id = ev.family->name;
            m.sentence = std::move(sentence);
            m.trigger_start = trigger_start;
            m.trigger_end = trigger_start + std::string(verb).size();
            m.trigger_lemma = lower_copy(verb);
            m.gold_cluster_id = cluster_id.str();
            mentions.push_back(std::move(m));
        }
    };

    for (std::size_t c = 0; c < config.n_clusters; ++c) {
        std::size_t span = config.max_cluster_size - config.min_cluster_size + 1;
        std::size_t size = config.min_cluster_size + rng.next_below(span);
        emit_cluster(c, size, false);
    }
    for (std::size_t s = 0; s < config.n_singletons; ++s) {
        emit_cluster(config.n_clusters + s, 1, true);
    }

    return CorpusSplit(config.split_name, std::move(mentions));
}

std::string corpus_to_jsonl(const CorpusSplit& split) {
    std::string out;
    for (const auto& m : split.mentions()) {
        nlohmann::json j = {{"mention_id", m.mention_id},
                            {"doc_id", m.doc_id},
                            {"topic_id", m.topic_id ? nlohmann::json(*m.topic_id)
                                                    : nlohmann::json(nullptr)},
                            {"sentence", m.sentence},
                            {"trigger_start", m.trigger_start},
                            {"trigger_end", m.trigger_end},
                            {"trigger_lemma", m.trigger_lemma},
                            {"gold_cluster_id", m.gold_cluster_id}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace cdcr
