#include "cdcr/tensor_cache.hpp"

#include <bit>
#include <cstring>

#include "cdcr/encoders.hpp"
#include "cdcr/errors.hpp"
#include "cdcr/io.hpp"

namespace cdcr {

using nlohmann::json;

namespace {

void append_le32(std::string& buf, std::uint32_t bits) {
    buf.push_back(static_cast<char>(bits & 0xFF));
    buf.push_back(static_cast<char>((bits >> 8) & 0xFF));
    buf.push_back(static_cast<char>((bits >> 16) & 0xFF));
    buf.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

void append_le64(std::string& buf, std::uint64_t bits) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t read_le32(const std::string& buf, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(buf[at + static_cast<std::size_t>(i)]);
    }
    return v;
}

std::uint64_t read_le64(const std::string& buf, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(buf[at + static_cast<std::size_t>(i)]);
    }
    return v;
}

}  // namespace

TensorBlobWriter::TensorBlobWriter(std::string dtype) : dtype_(std::move(dtype)) {
    if (dtype_ == "f32") elem_size_ = 4;
    else if (dtype_ == "f64") elem_size_ = 8;
    else throw ValidationError("tensor blob: unsupported dtype " + dtype_);
}

void TensorBlobWriter::append_value(double v) {
    if (elem_size_ == 4) {
        append_le32(blob_, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
        append_le64(blob_, std::bit_cast<std::uint64_t>(v));
    }
}

void TensorBlobWriter::add(const std::string& name, const nn::Mat& m) {
    if (index_.count(name)) throw ValidationError("tensor blob: duplicate name " + name);
    index_[name] = entries_.size();
    entries_.push_back({name, m.rows(), m.cols(), blob_.size()});
    for (double v : m.raw()) append_value(v);
}

void TensorBlobWriter::write(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& blob_path,
                             const json& meta) const {
    json entries = json::array();
    for (const auto& e : entries_) {
        entries.push_back({{"name", e.name},
                           {"shape", {e.rows, e.cols}},
                           {"dtype", dtype_},
                           {"offset", e.offset}});
    }
    json manifest = {{"dtype", dtype_},
                     {"blob", blob_path.filename().string()},
                     {"entries", entries},
                     {"meta", meta}};
    io::atomic_write(blob_path, blob_);
    io::atomic_write(manifest_path, manifest.dump(2) + "\n");
}

TensorBlobReader TensorBlobReader::open(const std::filesystem::path& manifest_path,
                                        const std::filesystem::path& blob_path) {
    TensorBlobReader r;
    json manifest;
    try {
        manifest = json::parse(io::read_file(manifest_path));
    } catch (const json::exception& e) {
        throw ParseError("tensor manifest: " + std::string(e.what()));
    }
    r.dtype_ = manifest.at("dtype").get<std::string>();
    if (r.dtype_ == "f32") r.elem_size_ = 4;
    else if (r.dtype_ == "f64") r.elem_size_ = 8;
    else throw ParseError("tensor manifest: unsupported dtype " + r.dtype_);
    r.meta_ = manifest.value("meta", json::object());
    r.blob_ = io::read_file(blob_path);
    for (const auto& e : manifest.at("entries")) {
        std::string name = e.at("name").get<std::string>();
        Entry entry;
        entry.rows = e.at("shape").at(0).get<std::size_t>();
        entry.cols = e.at("shape").at(1).get<std::size_t>();
        entry.offset = e.at("offset").get<std::size_t>();
        if (entry.offset + entry.rows * entry.cols * r.elem_size_ > r.blob_.size()) {
            throw ParseError("tensor blob: entry " + name + " exceeds blob size");
        }
        r.index_[name] = entry;
        r.order_.push_back(std::move(name));
    }
    return r;
}

nn::Mat TensorBlobReader::mat(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("tensor blob: missing entry " + name);
    const Entry& e = it->second;
    nn::Mat m(e.rows, e.cols);
    std::size_t at = e.offset;
    for (double& v : m.raw()) {
        if (elem_size_ == 4) {
            v = static_cast<double>(std::bit_cast<float>(read_le32(blob_, at)));
        } else {
            v = std::bit_cast<double>(read_le64(blob_, at));
        }
        at += elem_size_;
    }
    return m;
}

std::vector<std::string> TensorBlobReader::names() const { return order_; }

void TeacherCacheBuilder::put(const std::string& pair_id, const AttentionSummary& summary,
                              const nn::Mat& pooled) {
    if (pooled.rows() != 1) throw ValidationError("teacher cache: pooled must be 1 x D");
    writer_.add(pair_id + "/attention", summary.per_head);  // throws on duplicates
    writer_.add(pair_id + "/pooled", pooled);
    ids_.push_back(pair_id);
}

void TeacherCacheBuilder::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json meta = {{"kind", "teacher_state_cache"}, {"pairs", ids_}};
    writer_.write(dir / "manifest.json", dir / "blob.bin", meta);
}

TeacherCache TeacherCache::load(const std::filesystem::path& dir) {
    auto reader = TensorBlobReader::open(dir / "manifest.json", dir / "blob.bin");
    TeacherCache cache;
    for (const auto& pair_id : reader.meta().at("pairs")) {
        std::string id = pair_id.get<std::string>();
        Entry e;
        e.summary.per_head = reader.mat(id + "/attention");
        e.pooled = reader.mat(id + "/pooled");
        cache.entries_.emplace(std::move(id), std::move(e));
    }
    return cache;
}

const TeacherCache::Entry& TeacherCache::get(const std::string& pair_id) const {
    auto it = entries_.find(pair_id);
    if (it == entries_.end()) {
        throw ValidationError("teacher cache: no entry for pair " + pair_id);
    }
    return it->second;
}

void cache_teacher_states(TeacherCacheBuilder& builder, const std::string& pair_id,
                          const TeacherEncoding& encoding, std::size_t K) {
    builder.put(pair_id, summarize_attention(encoding.attention, K), encoding.pooled);
}

}  // namespace cdcr
