#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "cdcr/corpus.hpp"

namespace cdcr_test {

// Unique scratch directory per call, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("cdcr_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline cdcr::Mention make_mention(const std::string& id, const std::string& cluster,
                                  const std::string& lemma = "hit",
                                  const std::string& sentence = "A quake hit .") {
    cdcr::Mention m;
    m.mention_id = id;
    m.doc_id = "d_" + id;
    m.sentence = sentence;
    auto at = sentence.find(lemma);
    m.trigger_start = at == std::string::npos ? 0 : at;
    m.trigger_end = m.trigger_start +
                    (at == std::string::npos ? 1 : lemma.size());
    m.trigger_lemma = lemma;
    m.gold_cluster_id = cluster;
    return m;
}

}  // namespace cdcr_test
