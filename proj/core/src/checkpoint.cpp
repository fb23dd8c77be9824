#include "cdcr/checkpoint.hpp"

#include "cdcr/errors.hpp"
#include "cdcr/tensor_cache.hpp"

namespace cdcr {

using nlohmann::json;

void save_student_checkpoint(const std::filesystem::path& dir, const StudentModel& model,
                             const std::map<std::string, nn::Mat>& extras,
                             const json& meta) {
    TensorBlobWriter writer("f64");
    auto names = model.net.parameter_names();
    auto params = model.net.parameters();
    for (std::size_t i = 0; i < names.size(); ++i) {
        writer.add("net/" + names[i], *params[i]);
    }
    json extra_names = json::array();
    for (const auto& [name, m] : extras) {
        writer.add("extra/" + name, m);
        extra_names.push_back(name);
    }
    const auto& cfg = model.net.config();
    json full = meta;
    full["kind"] = "student_checkpoint";
    full["config"] = {{"dim", cfg.dim},
                      {"heads", cfg.heads},
                      {"layers", cfg.layers},
                      {"max_len", cfg.max_len},
                      {"ff_mult", cfg.ff_mult}};
    full["vocab"] = model.vocab.tokens();
    full["extras"] = extra_names;
    std::filesystem::create_directories(dir);
    writer.write(dir / "manifest.json", dir / "params.bin", full);
}

StudentCheckpoint load_student_checkpoint(const std::filesystem::path& dir) {
    auto reader = TensorBlobReader::open(dir / "manifest.json", dir / "params.bin");
    const json& meta = reader.meta();
    if (meta.value("kind", "") != "student_checkpoint") {
        throw ParseError("checkpoint: wrong manifest kind in " + dir.string());
    }
    const json& cfg = meta.at("config");
    StudentCheckpoint ckpt;
    ckpt.meta = meta;
    ckpt.model = make_student_model(
        Vocab::from_tokens(meta.at("vocab").get<std::vector<std::string>>()),
        cfg.at("dim").get<std::size_t>(), cfg.at("heads").get<std::size_t>(),
        cfg.at("layers").get<std::size_t>(), cfg.at("max_len").get<std::size_t>(),
        /*seed=*/1);
    auto names = ckpt.model.net.parameter_names();
    auto params = ckpt.model.net.parameters();
    for (std::size_t i = 0; i < names.size(); ++i) {
        nn::Mat loaded = reader.mat("net/" + names[i]);
        if (!loaded.same_shape(*params[i])) {
            throw ParseError("checkpoint: shape mismatch for " + names[i]);
        }
        *params[i] = std::move(loaded);
    }
    for (const auto& name : meta.at("extras")) {
        std::string n = name.get<std::string>();
        ckpt.extras[n] = reader.mat("extra/" + n);
    }
    return ckpt;
}

}  // namespace cdcr
