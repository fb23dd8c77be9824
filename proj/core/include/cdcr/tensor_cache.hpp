#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdcr/encoding_types.hpp"
#include "cdcr/nn/mat.hpp"

namespace cdcr {

// Named tensors serialized as a JSON manifest plus one binary blob of
// little-endian floats in row-major order. dtype is "f32" (teacher cache)
// or "f64" (checkpoints).
class TensorBlobWriter {
public:
    explicit TensorBlobWriter(std::string dtype);

    void add(const std::string& name, const nn::Mat& m);

    // `meta` is merged into the manifest under "meta".
    void write(const std::filesystem::path& manifest_path,
               const std::filesystem::path& blob_path,
               const nlohmann::json& meta = nlohmann::json::object()) const;

private:
    struct Entry {
        std::string name;
        std::size_t rows, cols;
        std::size_t offset;  // bytes into the blob
    };
    std::string dtype_;
    std::size_t elem_size_;
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
    std::string blob_;

    void append_value(double v);
};

class TensorBlobReader {
public:
    static TensorBlobReader open(const std::filesystem::path& manifest_path,
                                 const std::filesystem::path& blob_path);

    bool has(const std::string& name) const { return index_.count(name) > 0; }
    nn::Mat mat(const std::string& name) const;
    std::vector<std::string> names() const;
    const nlohmann::json& meta() const { return meta_; }
    const std::string& dtype() const { return dtype_; }

private:
    struct Entry {
        std::size_t rows, cols, offset;
    };
    std::string dtype_;
    std::size_t elem_size_ = 4;
    std::map<std::string, Entry> index_;
    std::vector<std::string> order_;
    std::string blob_;
    nlohmann::json meta_;
};

// Frozen-teacher state cache: one AttentionSummary [H x K] and one pooled
// vector [1 x D_T] per pair_id, stored as f32.
class TeacherCacheBuilder {
public:
    void put(const std::string& pair_id, const AttentionSummary& summary,
             const nn::Mat& pooled);  // throws on duplicate pair_id
    std::size_t size() const { return ids_.size(); }
    void write(const std::filesystem::path& dir) const;

private:
    std::vector<std::string> ids_;
    TensorBlobWriter writer_{"f32"};
};

class TeacherCache {
public:
    struct Entry {
        AttentionSummary summary;
        nn::Mat pooled;  // 1 x D_T
    };

    static TeacherCache load(const std::filesystem::path& dir);

    bool has(const std::string& pair_id) const { return entries_.count(pair_id) > 0; }
    const Entry& get(const std::string& pair_id) const;  // throws naming the pair_id
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, Entry> entries_;
};

// Summarizes a teacher encoding (attention resampled to K, pooled vector)
// and stores it under pair_id.
void cache_teacher_states(TeacherCacheBuilder& builder, const std::string& pair_id,
                          const TeacherEncoding& encoding, std::size_t K);

}  // namespace cdcr
