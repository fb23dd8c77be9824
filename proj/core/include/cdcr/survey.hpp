#pragma once

#include <map>
#include <string>
#include <vector>

namespace cdcr {

struct SurveyResponse {
    std::string annotator;
    std::string item;
    std::string question;
    std::string answer;  // categorical, mapped to a numeric value
};

// Categorical answer -> numeric value: yes/no map to 1/-1; multiple-choice
// answers map to -1 (negative valence), 0 (uninformative/neutral),
// 0.5 (partially positive), or 1 (positive). Plain numeric strings pass
// through. Throws on unknown categories.
double survey_answer_value(const std::string& answer);

struct SurveyReport {
    std::map<std::string, double> question_means;
    double krippendorff_alpha = 0.0;
    std::size_t n_responses = 0;
};

// Interval-level Krippendorff's alpha over (item, question) units via the
// coincidence matrix; values are the mapped numeric answers. Throws when no
// unit has at least two ratings.
double krippendorff_alpha_interval(const std::vector<SurveyResponse>& responses);

SurveyReport score_survey(const std::vector<SurveyResponse>& responses);

}  // namespace cdcr
