#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "cdcr/errors.hpp"
#include "cdcr/inference.hpp"
#include "cdcr/metrics.hpp"
#include "cdcr/rng.hpp"
#include "cdcr/survey.hpp"
#include "test_util.hpp"

using namespace cdcr;
using cdcr_test::make_mention;

namespace {

ChainAssignment chains_of(const std::vector<std::vector<std::string>>& groups) {
    ChainAssignment out;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        for (const auto& m : groups[c]) out.chain_of[m] = c;
    }
    return out;
}

std::vector<Mention> mentions_named(const std::vector<std::string>& ids) {
    std::vector<Mention> out;
    for (const auto& id : ids) out.push_back(make_mention(id, "c_" + id));
    return out;
}

}  // namespace

TEST_SUITE("affinity_graph") {
    TEST_CASE("isolated mentions stay representable") {
        auto ms = mentions_named({"a", "b", "c", "d", "e"});
        CorpusSplit split("t", ms);
        AffinityGraph g = build_graph(split.mentions(), {},
                                      [](const MentionPair&) { return 1.0; });
        CHECK(g.nodes.size() == 5);
        CHECK(g.edges.empty());
        ChainAssignment chains = connected_components(g, 0.5);
        CHECK(chains.num_chains() == 5);
    }

    TEST_CASE("one scored edge per candidate, none elsewhere") {
        auto ms = mentions_named({"a", "b", "c", "d"});
        CorpusSplit split("t", ms);
        std::vector<MentionPair> candidates = {
            make_pair(split.mention("a"), split.mention("b")),
            make_pair(split.mention("b"), split.mention("c")),
            make_pair(split.mention("c"), split.mention("d"))};
        AffinityGraph g = build_graph(split.mentions(), candidates,
                                      [](const MentionPair&) { return 0.7; });
        CHECK(g.edges.size() == 3);
        CHECK(g.edges.count("a|b") == 1);
        CHECK(g.edges.count("a|c") == 0);
    }

    TEST_CASE("scorer failure names the pair") {
        auto ms = mentions_named({"a", "b"});
        CorpusSplit split("t", ms);
        std::vector<MentionPair> candidates = {
            make_pair(split.mention("a"), split.mention("b"))};
        try {
            build_graph(split.mentions(), candidates,
                        [](const MentionPair&) -> double { throw Error("boom"); });
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("a|b") != std::string::npos);
        }
    }
}

namespace {

AffinityGraph graph_from(const std::vector<std::string>& nodes,
                         const std::map<std::pair<std::string, std::string>, double>& edges) {
    AffinityGraph g;
    for (const auto& n : nodes) g.nodes.insert(n);
    for (const auto& [pair, score] : edges) {
        std::string a = std::min(pair.first, pair.second);
        std::string b = std::max(pair.first, pair.second);
        g.edges[a + "|" + b] = AffinityGraph::Edge{a, b, score};
    }
    return g;
}

// Brute-force transitive closure over thresholded edges.
std::map<std::string, std::size_t> closure_partition(const AffinityGraph& g,
                                                     double threshold) {
    std::vector<std::string> ids(g.nodes.begin(), g.nodes.end());
    std::size_t n = ids.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
    for (const auto& [pid, e] : g.edges) {
        if (e.score < threshold) continue;
        std::size_t a = std::find(ids.begin(), ids.end(), e.a) - ids.begin();
        std::size_t b = std::find(ids.begin(), ids.end(), e.b) - ids.begin();
        reach[a][b] = reach[b][a] = true;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
            }
        }
    }
    std::map<std::string, std::size_t> part;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (part.count(ids[i])) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (reach[i][j]) part[ids[j]] = next;
        }
        ++next;
    }
    return part;
}

bool same_partition(const std::map<std::string, std::size_t>& a,
                    const std::map<std::string, std::size_t>& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [m1, c1] : a) {
        for (const auto& [m2, c2] : a) {
            bool together_a = c1 == c2;
            bool together_b = b.at(m1) == b.at(m2);
            if (together_a != together_b) return false;
        }
    }
    return true;
}

}  // namespace

TEST_SUITE("connected_components") {
    TEST_CASE("threshold cut worked example") {
        AffinityGraph g = graph_from({"a", "b", "c", "d"}, {{{"a", "b"}, 0.9},
                                                            {{"b", "c"}, 0.6},
                                                            {{"c", "d"}, 0.4}});
        ChainAssignment chains = connected_components(g, 0.5);
        CHECK(chains.chain_of.at("a") == chains.chain_of.at("b"));
        CHECK(chains.chain_of.at("b") == chains.chain_of.at("c"));
        CHECK(chains.chain_of.at("c") != chains.chain_of.at("d"));
        CHECK(chains.num_chains() == 2);
        // dense ids ordered by smallest contained mention id
        CHECK(chains.chain_of.at("a") == 0);
        CHECK(chains.chain_of.at("d") == 1);
    }

    TEST_CASE("all scores below threshold give singletons") {
        AffinityGraph g = graph_from({"a", "b", "c"}, {{{"a", "b"}, 0.2},
                                                       {{"b", "c"}, 0.49}});
        CHECK(connected_components(g, 0.5).num_chains() == 3);
    }

    TEST_CASE("inclusive threshold keeps the 0.5 midpoint linked") {
        AffinityGraph g = graph_from({"a", "b"}, {{{"a", "b"}, 0.5}});
        CHECK(connected_components(g, 0.5).num_chains() == 1);
    }

    TEST_CASE("matches brute-force transitive closure on 200 random graphs") {
        Rng rng(7);
        for (int trial = 0; trial < 200; ++trial) {
            std::size_t n = 2 + rng.next_below(11);  // up to 12 nodes
            std::vector<std::string> nodes;
            for (std::size_t i = 0; i < n; ++i) {
                nodes.push_back("m" + std::to_string(i));
            }
            std::map<std::pair<std::string, std::string>, double> edges;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (rng.next_double() < 0.4) {
                        edges[{nodes[i], nodes[j]}] = rng.next_double();
                    }
                }
            }
            AffinityGraph g = graph_from(nodes, edges);
            ChainAssignment got = connected_components(g, 0.5);
            auto want = closure_partition(g, 0.5);
            CHECK(same_partition(got.chain_of, want));
        }
    }

    TEST_CASE("monotone coarsening across thresholds") {
        Rng rng(8);
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t n = 3 + rng.next_below(9);
            std::vector<std::string> nodes;
            for (std::size_t i = 0; i < n; ++i) nodes.push_back("m" + std::to_string(i));
            std::map<std::pair<std::string, std::string>, double> edges;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (rng.next_double() < 0.5) {
                        edges[{nodes[i], nodes[j]}] = rng.next_double();
                    }
                }
            }
            AffinityGraph g = graph_from(nodes, edges);
            for (double t = 0.1; t < 0.85; t += 0.1) {
                ChainAssignment lo = connected_components(g, t);
                ChainAssignment hi = connected_components(g, t + 0.1);
                // the high-threshold partition refines the low-threshold one
                for (const auto& [m1, c1] : hi.chain_of) {
                    for (const auto& [m2, c2] : hi.chain_of) {
                        if (c1 == c2) {
                            CHECK(lo.chain_of.at(m1) == lo.chain_of.at(m2));
                        }
                    }
                }
            }
        }
    }

    TEST_CASE("independent of orientation and insertion order") {
        AffinityGraph g1 = graph_from({"x", "y", "z"}, {{{"x", "y"}, 0.8},
                                                        {{"y", "z"}, 0.9}});
        AffinityGraph g2 = graph_from({"x", "y", "z"}, {{{"z", "y"}, 0.9},
                                                        {{"y", "x"}, 0.8}});
        CHECK(connected_components(g1, 0.5).chain_of ==
              connected_components(g2, 0.5).chain_of);
    }

    TEST_CASE("extreme thresholds") {
        AffinityGraph g = graph_from({"a", "b", "c"}, {{{"a", "b"}, 0.3},
                                                       {{"a", "c"}, 0.2},
                                                       {{"b", "c"}, 0.6}});
        CHECK(connected_components(g, 0.0).num_chains() == 1);
        CHECK(connected_components(g, 0.7).num_chains() == 3);
    }

    TEST_CASE("gold chains and jsonl roundtrip") {
        std::vector<Mention> ms = {make_mention("b", "c1"), make_mention("a", "c1"),
                                   make_mention("z", "c2")};
        CorpusSplit split("t", std::move(ms));
        ChainAssignment gold = gold_chains(split);
        CHECK(gold.chain_of.at("a") == gold.chain_of.at("b"));
        CHECK(gold.chain_of.at("a") == 0);  // chain containing smallest id first
        CHECK(gold.chain_of.at("z") == 1);

        ChainAssignment loaded = chains_from_jsonl(chains_to_jsonl(gold));
        CHECK(loaded.chain_of == gold.chain_of);
    }
}

TEST_SUITE("metrics") {
    TEST_CASE("muc worked example") {
        ChainAssignment key = chains_of({{"a", "b", "c"}, {"d"}});
        ChainAssignment resp = chains_of({{"a", "b"}, {"c", "d"}});
        PRF p = muc(key, resp);
        CHECK(p.recall == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(p.precision == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(p.f1 == doctest::Approx(0.5).epsilon(1e-9));
    }

    TEST_CASE("identical partitions score 1 on all metrics") {
        ChainAssignment key = chains_of({{"a", "b"}, {"c", "d", "e"}, {"f"}});
        for (auto metric : {muc, b_cubed, ceaf_e}) {
            PRF p = metric(key, key);
            CHECK(p.recall == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(p.precision == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(p.f1 == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("muc degenerate all-singleton convention") {
        ChainAssignment key = chains_of({{"a"}, {"b"}, {"c"}});
        PRF p = muc(key, key);
        CHECK(p.recall == 0.0);
        CHECK(p.precision == 0.0);
        CHECK(p.f1 == 0.0);
        ScoreReport report = conll(key, key);
        CHECK(report.muc_degenerate_key);
        CHECK(report.muc_degenerate_response);
    }

    TEST_CASE("b_cubed worked example") {
        ChainAssignment key = chains_of({{"a", "b", "c"}, {"d"}});
        ChainAssignment resp = chains_of({{"a", "b"}, {"c", "d"}});
        PRF p = b_cubed(key, resp);
        CHECK(p.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
        CHECK(p.precision == doctest::Approx(0.75).epsilon(1e-9));
        CHECK(p.f1 == doctest::Approx(12.0 / 17.0).epsilon(1e-9));
    }

    TEST_CASE("b_cubed degenerate responses") {
        ChainAssignment key = chains_of({{"a", "b", "c", "d"}});
        ChainAssignment singletons = chains_of({{"a"}, {"b"}, {"c"}, {"d"}});
        PRF p = b_cubed(key, singletons);
        CHECK(p.precision == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p.recall == doctest::Approx(0.25).epsilon(1e-12));

        PRF q = b_cubed(singletons, key);
        CHECK(q.recall == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("universe mismatch is an error") {
        ChainAssignment key = chains_of({{"a", "b"}});
        ChainAssignment resp = chains_of({{"a", "x"}});
        CHECK_THROWS_AS(muc(key, resp), ValidationError);
        CHECK_THROWS_AS(b_cubed(key, resp), ValidationError);
        CHECK_THROWS_AS(ceaf_e(key, resp), ValidationError);
    }
}

namespace {

// Exhaustive best alignment between key and response chains (<= 7 a side).
double exhaustive_phi4(const std::vector<std::set<std::string>>& ks,
                       const std::vector<std::set<std::string>>& rs) {
    std::size_t n = ks.size(), m = rs.size();
    auto phi = [&](std::size_t i, std::size_t j) {
        std::size_t overlap = 0;
        for (const auto& x : ks[i]) overlap += rs[j].count(x);
        return 2.0 * static_cast<double>(overlap) /
               static_cast<double>(ks[i].size() + rs[j].size());
    };
    std::vector<std::size_t> cols(m);
    for (std::size_t j = 0; j < m; ++j) cols[j] = j;
    double best = 0.0;
    // permute the larger side, align prefix with the smaller side
    if (n <= m) {
        std::sort(cols.begin(), cols.end());
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += phi(i, cols[i]);
            best = std::max(best, total);
        } while (std::next_permutation(cols.begin(), cols.end()));
    } else {
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        do {
            double total = 0.0;
            for (std::size_t j = 0; j < m; ++j) total += phi(rows[j], j);
            best = std::max(best, total);
        } while (std::next_permutation(rows.begin(), rows.end()));
    }
    return best;
}

std::vector<std::set<std::string>> groups_of(const ChainAssignment& a) {
    std::vector<std::set<std::string>> out;
    for (const auto& [id, members] : a.chains()) out.push_back(members);
    return out;
}

ChainAssignment random_partition(Rng& rng, std::size_t n_mentions, std::size_t max_chains) {
    ChainAssignment out;
    for (std::size_t i = 0; i < n_mentions; ++i) {
        out.chain_of["m" + std::to_string(i)] = rng.next_below(max_chains);
    }
    // compact ids
    std::map<std::size_t, std::size_t> remap;
    for (auto& [m, c] : out.chain_of) {
        auto it = remap.find(c);
        if (it == remap.end()) it = remap.emplace(c, remap.size()).first;
        c = it->second;
    }
    return out;
}

}  // namespace

TEST_SUITE("ceaf_e") {
    TEST_CASE("hand example against exhaustive matching") {
        ChainAssignment key = chains_of({{"a", "b"}, {"c"}});
        ChainAssignment resp = chains_of({{"a"}, {"b"}, {"c"}});
        PRF p = ceaf_e(key, resp);
        double best = exhaustive_phi4(groups_of(key), groups_of(resp));
        CHECK(p.recall == doctest::Approx(best / 2.0).epsilon(1e-9));
        CHECK(p.precision == doctest::Approx(best / 3.0).epsilon(1e-9));
        // phi4({a,b},{a}) = 2/3; phi4({c},{c}) = 1 -> best = 5/3
        CHECK(best == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("hungarian equals exhaustive enumeration on random partitions") {
        Rng rng(17);
        for (int trial = 0; trial < 100; ++trial) {
            std::size_t n = 2 + rng.next_below(9);  // up to 10 mentions
            ChainAssignment key = random_partition(rng, n, 1 + rng.next_below(7));
            ChainAssignment resp = random_partition(rng, n, 1 + rng.next_below(7));
            auto ks = groups_of(key);
            auto rs = groups_of(resp);
            if (ks.size() > 7 || rs.size() > 7) continue;
            PRF p = ceaf_e(key, resp);
            double best = exhaustive_phi4(ks, rs);
            CHECK(p.recall ==
                  doctest::Approx(best / static_cast<double>(ks.size())).epsilon(1e-9));
            CHECK(p.precision ==
                  doctest::Approx(best / static_cast<double>(rs.size())).epsilon(1e-9));
        }
    }

    TEST_CASE("chain-id relabeling leaves every metric unchanged") {
        Rng rng(18);
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t n = 4 + rng.next_below(8);
            ChainAssignment key = random_partition(rng, n, 4);
            ChainAssignment resp = random_partition(rng, n, 4);
            ChainAssignment relabeled = resp;
            for (auto& [m, c] : relabeled.chain_of) c = c * 13 + 101;

            for (auto metric : {muc, b_cubed, ceaf_e}) {
                PRF a = metric(key, resp);
                PRF b = metric(key, relabeled);
                CHECK(a.recall == doctest::Approx(b.recall).epsilon(1e-12));
                CHECK(a.precision == doctest::Approx(b.precision).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("conll is the exact mean of the three F1s") {
        Rng rng(19);
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t n = 4 + rng.next_below(8);
            ChainAssignment key = random_partition(rng, n, 4);
            ChainAssignment resp = random_partition(rng, n, 4);
            ScoreReport report = conll(key, resp);
            double mean = (report.muc.f1 + report.b3.f1 + report.ceaf_e.f1) / 3.0;
            CHECK(std::abs(report.conll_f1 - mean) < 1e-12);
        }
        // fixed anchor: a perfect system scores 1.0
        ChainAssignment key = chains_of({{"a", "b"}, {"c"}});
        CHECK(conll(key, key).conll_f1 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_SUITE("compare_systems") {
    TEST_CASE("A right where B wrong on 10 positives and 5 negatives") {
        std::vector<std::pair<std::string, int>> gold;
        std::map<std::string, int> a, b;
        for (int i = 0; i < 10; ++i) {
            std::string id = "p" + std::to_string(i);
            gold.emplace_back(id, 1);
            a[id] = 1;
            b[id] = 0;
        }
        for (int i = 0; i < 5; ++i) {
            std::string id = "n" + std::to_string(i);
            gold.emplace_back(id, 0);
            a[id] = 0;
            b[id] = 1;
        }
        SystemComparison cmp = compare_systems(gold, a, b);
        CHECK(cmp.pos_a_only == 10);
        CHECK(cmp.neg_a_only == 5);
        CHECK(cmp.pos_b_only == 0);
        CHECK(cmp.neg_b_only == 0);
        CHECK(cmp.total_pos == 10);
        CHECK(cmp.total_neg == 5);
    }

    TEST_CASE("identical systems differ nowhere") {
        std::vector<std::pair<std::string, int>> gold = {{"p", 1}, {"n", 0}};
        std::map<std::string, int> a = {{"p", 1}, {"n", 1}};
        SystemComparison cmp = compare_systems(gold, a, a);
        CHECK(cmp.pos_a_only == 0);
        CHECK(cmp.pos_b_only == 0);
        CHECK(cmp.neg_a_only == 0);
        CHECK(cmp.neg_b_only == 0);
    }

    TEST_CASE("coverage mismatch is an error") {
        std::vector<std::pair<std::string, int>> gold = {{"p", 1}};
        std::map<std::string, int> a = {{"p", 1}};
        std::map<std::string, int> b;
        CHECK_THROWS_AS(compare_systems(gold, a, b), ValidationError);
    }
}

TEST_SUITE("cluster_size_profile") {
    TEST_CASE("perfect system fills every bucket") {
        ChainAssignment key = chains_of({{"a", "b", "c"}, {"d", "e"}, {"f"}});
        ClusterSizeProfile prof = cluster_size_profile(key, key);
        CHECK(prof.correct_by_size.at(3) == 3);
        CHECK(prof.correct_by_size.at(2) == 2);
        CHECK(prof.correct_by_size.at(1) == 1);
        CHECK(prof.correct_by_size == prof.total_by_size);
    }

    TEST_CASE("all-singleton response maps members back to their gold cluster") {
        ChainAssignment key = chains_of({{"a", "b", "c"}});
        ChainAssignment resp = chains_of({{"a"}, {"b"}, {"c"}});
        ClusterSizeProfile prof = cluster_size_profile(key, resp);
        // each singleton predicted chain overlaps only the gold cluster
        CHECK(prof.correct_by_size.at(3) == 3);
        CHECK(prof.total_by_size.at(3) == 3);
    }

    TEST_CASE("empty input gives an empty map") {
        ChainAssignment empty;
        ClusterSizeProfile prof = cluster_size_profile(empty, empty);
        CHECK(prof.correct_by_size.empty());
        CHECK(prof.total_by_size.empty());
    }

    TEST_CASE("mention absorbed into a larger wrong cluster is not correct") {
        // prediction merges d (gold singleton) into {a,b,c}
        ChainAssignment key = chains_of({{"a", "b", "c"}, {"d"}});
        ChainAssignment resp = chains_of({{"a", "b", "c", "d"}});
        ClusterSizeProfile prof = cluster_size_profile(key, resp);
        CHECK(prof.correct_by_size.at(3) == 3);
        CHECK(prof.correct_by_size.count(1) == 0);  // d maps to the size-3 cluster
        CHECK(prof.total_by_size.at(1) == 1);
    }
}

TEST_SUITE("survey") {
    TEST_CASE("answer mapping covers the scale") {
        CHECK(survey_answer_value("yes") == 1.0);
        CHECK(survey_answer_value("No") == -1.0);
        CHECK(survey_answer_value("generally true") == 1.0);
        CHECK(survey_answer_value("partially true") == 0.5);
        CHECK(survey_answer_value("generally false") == -1.0);
        CHECK(survey_answer_value("not enough information") == 0.0);
        CHECK(survey_answer_value("can't say") == 0.0);
        CHECK(survey_answer_value("more than enough") == 0.5);
        CHECK(survey_answer_value("high overlap") == 1.0);
        CHECK(survey_answer_value("0.5") == 0.5);
        CHECK(survey_answer_value("-1") == -1.0);
        CHECK_THROWS_AS(survey_answer_value("banana"), ValidationError);
    }

    TEST_CASE("perfect agreement scores alpha exactly 1") {
        std::vector<SurveyResponse> responses;
        for (int item = 0; item < 3; ++item) {
            for (const char* annotator : {"a1", "a2", "a3"}) {
                responses.push_back({annotator, "item" + std::to_string(item), "q1", "yes"});
                responses.push_back(
                    {annotator, "item" + std::to_string(item), "q2", "partially true"});
            }
        }
        SurveyReport report = score_survey(responses);
        CHECK(report.krippendorff_alpha == 1.0);
        CHECK(report.question_means.at("q1") == doctest::Approx(1.0));
        CHECK(report.question_means.at("q2") == doctest::Approx(0.5));
    }

    TEST_CASE("two-annotator antipodal fixture matches the hand calculation") {
        // items: i1 -> (1, -1), i2 -> (-1, 1).
        // Coincidence matrix (ordered): o(1,-1) = o(-1,1) = 2; marginals
        // n_1 = n_-1 = 2, n = 4. Interval delta(1,-1) = 4.
        // alpha = 1 - (n-1) * sum_o / sum_e = 1 - 3 * 16 / 32 = -0.5.
        std::vector<SurveyResponse> responses = {{"a1", "i1", "q", "yes"},
                                                 {"a2", "i1", "q", "no"},
                                                 {"a1", "i2", "q", "no"},
                                                 {"a2", "i2", "q", "yes"}};
        double alpha = krippendorff_alpha_interval(responses);
        CHECK(alpha == doctest::Approx(-0.5).epsilon(1e-9));
    }

    TEST_CASE("per-question means are plain averages") {
        std::vector<SurveyResponse> responses = {{"a1", "i1", "q", "yes"},
                                                 {"a2", "i1", "q", "no"},
                                                 {"a3", "i1", "q", "yes"}};
        SurveyReport report = score_survey(responses);
        CHECK(report.question_means.at("q") == doctest::Approx(1.0 / 3.0));
    }

    TEST_CASE("no pairable ratings is an error") {
        std::vector<SurveyResponse> responses = {{"a1", "i1", "q", "yes"},
                                                 {"a1", "i2", "q", "no"}};
        CHECK_THROWS_AS(krippendorff_alpha_interval(responses), ValidationError);
        CHECK_THROWS_AS(score_survey({}), ValidationError);
    }

    TEST_CASE("mixed-scale interval alpha stays within [-1, 1] here") {
        Rng rng(23);
        const char* answers[] = {"yes", "no", "partially true", "not enough information"};
        std::vector<SurveyResponse> responses;
        for (int item = 0; item < 6; ++item) {
            for (const char* annotator : {"a1", "a2", "a3"}) {
                responses.push_back({annotator, "i" + std::to_string(item), "q",
                                     answers[rng.next_below(4)]});
            }
        }
        double alpha = krippendorff_alpha_interval(responses);
        CHECK(alpha <= 1.0);
        CHECK(alpha >= -2.0);  // interval alpha can dip below -1 only in tiny samples
    }
}
