#include "cdcr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "cdcr/errors.hpp"

namespace cdcr {

PRF make_prf(double recall, double precision) {
    PRF p;
    p.recall = recall;
    p.precision = precision;
    p.f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return p;
}

namespace {

using Chains = std::map<std::size_t, std::set<std::string>>;

void check_universe(const ChainAssignment& key, const ChainAssignment& response) {
    if (key.chain_of.size() != response.chain_of.size()) {
        throw ValidationError("metrics: mention universes differ in size");
    }
    for (const auto& [m, c] : key.chain_of) {
        if (!response.chain_of.count(m)) {
            throw ValidationError("metrics: mention " + m + " missing from response");
        }
    }
}

// One direction of MUC: sum over `from` chains of (|k| - partitions(k))
// over sum of (|k| - 1).
double muc_direction(const Chains& from, const ChainAssignment& to, bool& degenerate) {
    double num = 0.0, den = 0.0;
    for (const auto& [id, members] : from) {
        if (members.size() < 2) continue;
        std::set<std::size_t> parts;
        for (const auto& m : members) parts.insert(to.chain_of.at(m));
        num += static_cast<double>(members.size() - parts.size());
        den += static_cast<double>(members.size() - 1);
    }
    if (den == 0.0) {
        degenerate = true;
        return 0.0;
    }
    return num / den;
}

}  // namespace

PRF muc(const ChainAssignment& key, const ChainAssignment& response) {
    check_universe(key, response);
    bool degenerate = false;
    double recall = muc_direction(key.chains(), response, degenerate);
    double precision = muc_direction(response.chains(), key, degenerate);
    return make_prf(recall, precision);
}

PRF b_cubed(const ChainAssignment& key, const ChainAssignment& response) {
    check_universe(key, response);
    Chains key_chains = key.chains();
    Chains resp_chains = response.chains();
    double recall_sum = 0.0, precision_sum = 0.0;
    std::size_t n = key.chain_of.size();
    if (n == 0) throw ValidationError("b_cubed: empty universe");
    for (const auto& [m, kc] : key.chain_of) {
        const auto& k_members = key_chains.at(kc);
        const auto& r_members = resp_chains.at(response.chain_of.at(m));
        std::size_t overlap = 0;
        const auto& small = k_members.size() < r_members.size() ? k_members : r_members;
        const auto& large = k_members.size() < r_members.size() ? r_members : k_members;
        for (const auto& x : small) overlap += large.count(x);
        recall_sum += static_cast<double>(overlap) / static_cast<double>(k_members.size());
        precision_sum += static_cast<double>(overlap) / static_cast<double>(r_members.size());
    }
    return make_prf(recall_sum / static_cast<double>(n), precision_sum / static_cast<double>(n));
}

double max_weight_matching(const std::vector<std::vector<double>>& weight) {
    if (weight.empty() || weight.front().empty()) return 0.0;
    std::size_t n = weight.size();
    std::size_t m = weight.front().size();
    for (const auto& row : weight) {
        if (row.size() != m) throw ValidationError("max_weight_matching: ragged matrix");
    }
    // Hungarian algorithm on negated weights, rows <= cols; square by
    // padding rows of zero weight (a row may stay effectively unmatched).
    bool transposed = n > m;
    std::size_t rows = transposed ? m : n;
    std::size_t cols = transposed ? n : m;
    auto cost = [&](std::size_t i, std::size_t j) -> double {
        if (i >= rows) return 0.0;
        return transposed ? -weight[j][i] : -weight[i][j];
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::size_t N = cols;  // pad rows to cols
    std::vector<double> u(N + 1, 0.0), v(cols + 1, 0.0);
    std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
    for (std::size_t i = 1; i <= N; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<bool> used(cols + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    double total = 0.0;
    for (std::size_t j = 1; j <= cols; ++j) {
        if (p[j] == 0) continue;
        std::size_t i = p[j] - 1;
        if (i < rows) total += transposed ? weight[j - 1][i] : weight[i][j - 1];
    }
    return total;
}

PRF ceaf_e(const ChainAssignment& key, const ChainAssignment& response) {
    check_universe(key, response);
    Chains key_chains = key.chains();
    Chains resp_chains = response.chains();
    std::vector<const std::set<std::string>*> ks, rs;
    for (const auto& [id, members] : key_chains) ks.push_back(&members);
    for (const auto& [id, members] : resp_chains) rs.push_back(&members);
    if (ks.empty() || rs.empty()) throw ValidationError("ceaf_e: empty partition");

    std::vector<std::vector<double>> phi(ks.size(), std::vector<double>(rs.size(), 0.0));
    for (std::size_t i = 0; i < ks.size(); ++i) {
        for (std::size_t j = 0; j < rs.size(); ++j) {
            std::size_t overlap = 0;
            const auto& small = ks[i]->size() < rs[j]->size() ? *ks[i] : *rs[j];
            const auto& large = ks[i]->size() < rs[j]->size() ? *rs[j] : *ks[i];
            for (const auto& x : small) overlap += large.count(x);
            phi[i][j] = 2.0 * static_cast<double>(overlap) /
                        static_cast<double>(ks[i]->size() + rs[j]->size());
        }
    }
    double best = max_weight_matching(phi);
    return make_prf(best / static_cast<double>(ks.size()),
                    best / static_cast<double>(rs.size()));
}

ScoreReport conll(const ChainAssignment& key, const ChainAssignment& response) {
    ScoreReport report;
    check_universe(key, response);
    bool deg_key = false, deg_resp = false;
    report.muc.recall = muc_direction(key.chains(), response, deg_key);
    report.muc.precision = muc_direction(response.chains(), key, deg_resp);
    report.muc = make_prf(report.muc.recall, report.muc.precision);
    report.muc_degenerate_key = deg_key;
    report.muc_degenerate_response = deg_resp;
    report.b3 = b_cubed(key, response);
    report.ceaf_e = ceaf_e(key, response);
    report.conll_f1 = (report.muc.f1 + report.b3.f1 + report.ceaf_e.f1) / 3.0;
    return report;
}

std::string render_score_report(const ScoreReport& report) {
    std::ostringstream out;
    auto row = [&](const char* name, const PRF& p) {
        out << "  " << name << "  R " << p.recall << "  P " << p.precision << "  F1 " << p.f1
            << "\n";
    };
    row("MUC   ", report.muc);
    row("B3    ", report.b3);
    row("CEAF_e", report.ceaf_e);
    out << "  CoNLL F1 " << report.conll_f1 << "\n";
    if (report.muc_degenerate_key || report.muc_degenerate_response) {
        out << "  note: MUC had a zero-link side; that component scored 0 by convention\n";
    }
    return out.str();
}

SystemComparison compare_systems(const std::vector<std::pair<std::string, int>>& gold_pairs,
                                 const std::map<std::string, int>& decisions_a,
                                 const std::map<std::string, int>& decisions_b) {
    SystemComparison out;
    for (const auto& [pair_id, gold] : gold_pairs) {
        auto ita = decisions_a.find(pair_id);
        auto itb = decisions_b.find(pair_id);
        if (ita == decisions_a.end() || itb == decisions_b.end()) {
            throw ValidationError("compare_systems: missing decision for pair " + pair_id);
        }
        bool a_right = ita->second == gold;
        bool b_right = itb->second == gold;
        if (gold == 1) {
            out.total_pos += 1;
            if (a_right && !b_right) out.pos_a_only += 1;
            if (b_right && !a_right) out.pos_b_only += 1;
        } else {
            out.total_neg += 1;
            if (a_right && !b_right) out.neg_a_only += 1;
            if (b_right && !a_right) out.neg_b_only += 1;
        }
    }
    return out;
}

ClusterSizeProfile cluster_size_profile(const ChainAssignment& key,
                                        const ChainAssignment& response) {
    check_universe(key, response);
    ClusterSizeProfile out;
    if (key.chain_of.empty()) return out;
    Chains key_chains = key.chains();
    Chains resp_chains = response.chains();
    for (const auto& [m, kc] : key.chain_of) {
        std::size_t gold_size = key_chains.at(kc).size();
        out.total_by_size[gold_size] += 1;
        const auto& predicted = resp_chains.at(response.chain_of.at(m));

        // Gold cluster with maximal overlap against the predicted chain;
        // ties by larger overlap ratio, then smaller cluster id.
        bool found = false;
        std::size_t best_id = 0, best_overlap = 0;
        double best_ratio = -1.0;
        for (const auto& [cid, members] : key_chains) {
            std::size_t overlap = 0;
            for (const auto& x : predicted) overlap += members.count(x);
            if (overlap == 0) continue;
            double ratio = static_cast<double>(overlap) / static_cast<double>(members.size());
            bool better = !found || overlap > best_overlap ||
                          (overlap == best_overlap && ratio > best_ratio) ||
                          (overlap == best_overlap && ratio == best_ratio && cid < best_id);
            if (better) {
                found = true;
                best_id = cid;
                best_overlap = overlap;
                best_ratio = ratio;
            }
        }
        if (found && best_id == kc) out.correct_by_size[gold_size] += 1;
    }
    return out;
}

}  // namespace cdcr
