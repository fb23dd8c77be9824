#include "cdcr/survey.hpp"

#include <cctype>
#include <cstdlib>

#include "cdcr/errors.hpp"

namespace cdcr {

namespace {

std::string canonicalize(const std::string& answer) {
    std::string out;
    for (char ch : answer) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (c == '\'') continue;
        if (std::isspace(c)) {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
            continue;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

double survey_answer_value(const std::string& answer) {
    static const std::map<std::string, double> table = {
        {"yes", 1.0},
        {"no", -1.0},
        {"generally true", 1.0},
        {"partially true", 0.5},
        {"sometimes true", 0.5},
        {"generally false", -1.0},
        {"not enough information", 0.0},
        {"need more information", 0.0},
        {"cant say", 0.0},
        {"neutral", 0.0},
        {"enough", 1.0},
        {"not enough", -1.0},
        {"more than enough", 0.5},
        {"high overlap", 1.0},
        {"some overlap", 0.5},
        {"minimal overlap", 0.0},
        {"no overlap", -1.0},
    };
    std::string key = canonicalize(answer);
    auto it = table.find(key);
    if (it != table.end()) return it->second;
    // Numeric answers pass through untouched.
    char* end = nullptr;
    double v = std::strtod(key.c_str(), &end);
    if (end && *end == '\0' && end != key.c_str()) return v;
    throw ValidationError("survey: unknown answer category '" + answer + "'");
}

double krippendorff_alpha_interval(const std::vector<SurveyResponse>& responses) {
    // Units are (item, question) cells; ratings within a unit are pairable.
    std::map<std::pair<std::string, std::string>, std::vector<double>> units;
    for (const auto& r : responses) {
        units[{r.item, r.question}].push_back(survey_answer_value(r.answer));
    }

    std::map<std::pair<double, double>, double> coincidence;  // ordered pairs
    std::map<double, double> marginals;
    double n_total = 0.0;
    for (const auto& [unit, values] : units) {
        if (values.size() < 2) continue;
        double w = 1.0 / static_cast<double>(values.size() - 1);
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (std::size_t j = 0; j < values.size(); ++j) {
                if (i == j) continue;
                coincidence[{values[i], values[j]}] += w;
            }
            marginals[values[i]] += 1.0;
            n_total += 1.0;
        }
    }
    if (n_total < 2.0) {
        throw ValidationError("krippendorff alpha: no item has two or more ratings");
    }

    auto delta = [](double a, double b) {
        double d = a - b;
        return d * d;
    };
    double observed = 0.0;
    for (const auto& [pair, o] : coincidence) observed += o * delta(pair.first, pair.second);
    double expected = 0.0;
    for (const auto& [va, na] : marginals) {
        for (const auto& [vb, nb] : marginals) expected += na * nb * delta(va, vb);
    }
    if (expected == 0.0) return 1.0;  // every rating identical
    return 1.0 - (n_total - 1.0) * observed / expected;
}

SurveyReport score_survey(const std::vector<SurveyResponse>& responses) {
    if (responses.empty()) throw ValidationError("score_survey: no responses");
    SurveyReport report;
    report.n_responses = responses.size();
    std::map<std::string, std::pair<double, std::size_t>> sums;
    for (const auto& r : responses) {
        auto& [sum, count] = sums[r.question];
        sum += survey_answer_value(r.answer);
        count += 1;
    }
    for (const auto& [question, sc] : sums) {
        report.question_means[question] = sc.first / static_cast<double>(sc.second);
    }
    report.krippendorff_alpha = krippendorff_alpha_interval(responses);
    return report;
}

}  // namespace cdcr
