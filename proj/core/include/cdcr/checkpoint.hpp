#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "cdcr/encoders.hpp"

namespace cdcr {

// Student checkpoints: encoder parameters plus any stage-specific heads
// (cluster head, classifier, projection) as named extra matrices, with a
// JSON manifest carrying config, vocab, seed, and parent checkpoint id.
struct StudentCheckpoint {
    StudentModel model;
    std::map<std::string, nn::Mat> extras;
    nlohmann::json meta;
};

void save_student_checkpoint(const std::filesystem::path& dir, const StudentModel& model,
                             const std::map<std::string, nn::Mat>& extras,
                             const nlohmann::json& meta);

StudentCheckpoint load_student_checkpoint(const std::filesystem::path& dir);

}  // namespace cdcr
