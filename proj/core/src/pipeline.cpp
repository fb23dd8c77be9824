#include "cdcr/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "cdcr/checkpoint.hpp"
#include "cdcr/errors.hpp"
#include "cdcr/inference.hpp"
#include "cdcr/io.hpp"
#include "cdcr/lemma_heuristic.hpp"
#include "cdcr/metrics.hpp"
#include "cdcr/rationale_stats.hpp"
#include "cdcr/stub_teacher.hpp"
#include "cdcr/survey.hpp"
#include "cdcr/synthetic.hpp"
#include "cdcr/text.hpp"

namespace cdcr {

namespace fs = std::filesystem;
using nlohmann::json;

json run_config_to_json(const RunConfig& c) {
    return json{
        {"train_corpus", c.train_corpus.string()},
        {"dev_corpus", c.dev_corpus.string()},
        {"test_corpus", c.test_corpus.string()},
        {"work_dir", c.work_dir.string()},
        {"retrieval_threshold", c.retrieval_threshold},
        {"cluster_threshold", c.cluster_threshold},
        {"seed", c.seed},
        {"student",
         {{"dim", c.student_dim},
          {"heads", c.student_heads},
          {"layers", c.student_layers},
          {"max_len", c.student_max_len}}},
        {"teacher",
         {{"dim", c.teacher_dim}, {"heads", c.teacher_heads}, {"layers", c.teacher_layers}}},
        {"roec",
         {{"lambda", c.roec.lambda_rationale},
          {"batch_size", c.roec.batch_size},
          {"learning_rate", c.roec.learning_rate},
          {"epochs", c.roec.epochs},
          {"normalize_rationale_loss", c.roec.normalize_rationale_loss}}},
        {"kd",
         {{"lambda1", c.kd.lambda1},
          {"lambda2", c.kd.lambda2},
          {"batch_size", c.kd.batch_size},
          {"model_lr", c.kd.model_lr},
          {"classifier_lr", c.kd.classifier_lr},
          {"epochs", c.kd.epochs},
          {"attention_summary_len", c.kd.attention_summary_len},
          {"normalize_by_batch", c.kd.normalize_by_batch}}},
        {"ablation",
         {{"use_roec", c.use_roec},
          {"use_kd", c.use_kd},
          {"paired_baseline", c.paired_baseline}}},
        {"gen_parallelism", c.gen_parallelism},
    };
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.train_corpus = j.value("train_corpus", std::string{});
    c.dev_corpus = j.value("dev_corpus", std::string{});
    c.test_corpus = j.value("test_corpus", std::string{});
    c.work_dir = j.value("work_dir", std::string{"work"});
    c.retrieval_threshold = j.value("retrieval_threshold", 0.05);
    c.cluster_threshold = j.value("cluster_threshold", 0.5);
    c.seed = j.value("seed", 42ULL);
    if (j.contains("student")) {
        const json& s = j.at("student");
        c.student_dim = s.value("dim", c.student_dim);
        c.student_heads = s.value("heads", c.student_heads);
        c.student_layers = s.value("layers", c.student_layers);
        c.student_max_len = s.value("max_len", c.student_max_len);
    }
    if (j.contains("teacher")) {
        const json& t = j.at("teacher");
        c.teacher_dim = t.value("dim", c.teacher_dim);
        c.teacher_heads = t.value("heads", c.teacher_heads);
        c.teacher_layers = t.value("layers", c.teacher_layers);
    }
    if (j.contains("roec")) {
        const json& r = j.at("roec");
        c.roec.lambda_rationale = r.value("lambda", c.roec.lambda_rationale);
        c.roec.batch_size = r.value("batch_size", c.roec.batch_size);
        c.roec.learning_rate = r.value("learning_rate", c.roec.learning_rate);
        c.roec.epochs = r.value("epochs", c.roec.epochs);
        c.roec.normalize_rationale_loss =
            r.value("normalize_rationale_loss", c.roec.normalize_rationale_loss);
    }
    if (j.contains("kd")) {
        const json& k = j.at("kd");
        c.kd.lambda1 = k.value("lambda1", c.kd.lambda1);
        c.kd.lambda2 = k.value("lambda2", c.kd.lambda2);
        c.kd.batch_size = k.value("batch_size", c.kd.batch_size);
        c.kd.model_lr = k.value("model_lr", c.kd.model_lr);
        c.kd.classifier_lr = k.value("classifier_lr", c.kd.classifier_lr);
        c.kd.epochs = k.value("epochs", c.kd.epochs);
        c.kd.attention_summary_len =
            k.value("attention_summary_len", c.kd.attention_summary_len);
        c.kd.normalize_by_batch = k.value("normalize_by_batch", c.kd.normalize_by_batch);
    }
    if (j.contains("ablation")) {
        const json& a = j.at("ablation");
        c.use_roec = a.value("use_roec", c.use_roec);
        c.use_kd = a.value("use_kd", c.use_kd);
        c.paired_baseline = a.value("paired_baseline", c.paired_baseline);
    }
    c.gen_parallelism = j.value("gen_parallelism", 1);
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw ParseError("run config: " + std::string(e.what()));
    }
    return run_config_from_json(j);
}

namespace {

void require_exists(const fs::path& path, const char* what) {
    if (path.empty() || !fs::exists(path)) {
        throw IoError(std::string("missing input for ") + what + ": " +
                      (path.empty() ? "<unset path>" : path.string()));
    }
}

void write_stage_manifest(const RunConfig& config, const std::string& stage,
                          const std::vector<fs::path>& inputs,
                          const std::vector<fs::path>& outputs) {
    json cfg = run_config_to_json(config);
    json input_hashes = json::object();
    for (const auto& p : inputs) {
        fs::path target = fs::is_directory(p) ? p / "manifest.json" : p;
        input_hashes[p.string()] = io::hash_file_hex(target);
    }
    json outs = json::array();
    for (const auto& p : outputs) outs.push_back(p.string());
    json m = {{"stage", stage},
              {"seed", config.seed},
              {"config", cfg},
              {"config_hash", io::hash_hex(cfg.dump())},
              {"input_hashes", input_hashes},
              {"outputs", outs}};
    io::atomic_write(config.work_dir / "manifests" / (stage + ".manifest.json"),
                     m.dump(2) + "\n");
}

CorpusSplit load_split(const fs::path& path, const char* what, const std::string& name) {
    require_exists(path, what);
    return load_corpus(path, CorpusFormat::Jsonl, name);
}

// Positive pairs plus heuristic hard negatives, the training candidate set.
std::vector<MentionPair> training_pairs(const CorpusSplit& train, double threshold) {
    std::vector<MentionPair> pairs = positive_pairs(train);
    LemmaPairCache cache = build_cache(train);
    std::vector<MentionPair> label0;
    for (auto& p : enumerate_pairs(train, PairScope::All)) {
        if (p.label == 0) label0.push_back(std::move(p));
    }
    for (auto& p : retrieve_candidates(cache, label0, threshold)) {
        pairs.push_back(std::move(p));
    }
    return pairs;
}

Vocab build_student_vocab(const CorpusSplit& train, const RationaleStore& store) {
    std::vector<std::string> texts;
    for (const auto& m : train.mentions()) {
        texts.push_back(text::mark_trigger(m.sentence, m.trigger_start, m.trigger_end).text);
    }
    for (const Rationale* r : store.all()) texts.push_back(r->text);
    return Vocab::build(texts);
}

StudentModel fresh_student(const RunConfig& config, const CorpusSplit& train,
                           const RationaleStore& store) {
    return make_student_model(build_student_vocab(train, store), config.student_dim,
                              config.student_heads, config.student_layers,
                              config.student_max_len, config.seed);
}

// Teacher selection honors environment overrides: CDCR_TEACHER names the
// backend (only "stub" ships here; remote clients implement TeacherClient
// behind the same name switch) and CDCR_TEACHER_SEED overrides the seed.
StubTeacherClient make_teacher(const RunConfig& config, const CorpusSplit& train) {
    const char* backend = std::getenv("CDCR_TEACHER");
    if (backend && std::string(backend) != "stub") {
        throw ValidationError("unsupported CDCR_TEACHER backend: " + std::string(backend));
    }
    StubTeacherClient::Options opt;
    opt.dim = config.teacher_dim;
    opt.heads = config.teacher_heads;
    opt.layers = config.teacher_layers;
    opt.seed = config.seed;
    if (const char* seed_env = std::getenv("CDCR_TEACHER_SEED")) {
        opt.seed = std::strtoull(seed_env, nullptr, 10);
    }
    return StubTeacherClient(build_stub_teacher_vocab(train), opt);
}

void save_kd_result(const fs::path& dir, const KdResult& result, json meta) {
    std::map<std::string, nn::Mat> extras;
    extras["span_scorer"] = result.scorer.head.span_scorer;
    extras["w1"] = result.scorer.head.w1;
    extras["b1"] = result.scorer.head.b1;
    extras["w2"] = result.scorer.head.w2;
    extras["b2"] = result.scorer.head.b2;
    if (result.projection_w.size() > 0) extras["projection_w"] = result.projection_w;
    meta["skipped_pairs"] = result.skipped_pairs;
    save_student_checkpoint(dir, result.scorer.model, extras, meta);
}

PairwiseScorer load_kd_scorer(const fs::path& dir) {
    StudentCheckpoint ckpt = load_student_checkpoint(dir);
    PairwiseScorer scorer;
    scorer.model = std::move(ckpt.model);
    scorer.head.span_scorer = ckpt.extras.at("span_scorer");
    scorer.head.w1 = ckpt.extras.at("w1");
    scorer.head.b1 = ckpt.extras.at("b1");
    scorer.head.w2 = ckpt.extras.at("w2");
    scorer.head.b2 = ckpt.extras.at("b2");
    return scorer;
}

std::vector<MentionPair> inference_candidates(const CorpusSplit& test,
                                              const LemmaPairCache& cache,
                                              double threshold) {
    return retrieve_candidates(cache, enumerate_pairs(test, PairScope::All), threshold);
}

ScoreReport score_predictions(const CorpusSplit& test, const ChainAssignment& predicted) {
    return conll(gold_chains(test), predicted);
}

// In-memory variant runs used by the ablation suite.
struct VariantOutcome {
    std::string name;
    ScoreReport report;
};

ChainAssignment infer_chains(const RunConfig& config, const CorpusSplit& test,
                             const LemmaPairCache& cache, const PairwiseScorer& scorer) {
    auto candidates = inference_candidates(test, cache, config.retrieval_threshold);
    AffinityGraph graph = build_graph(
        test.mentions(), candidates,
        [&](const MentionPair& p) { return score_pair(scorer, p); });
    return connected_components(graph, config.cluster_threshold);
}

}  // namespace

void run_ingest(const RunConfig& config) {
    json report = json::object();
    std::vector<fs::path> inputs;
    auto add = [&](const fs::path& path, const char* name) {
        if (path.empty()) return;
        CorpusSplit split = load_split(path, name, name);
        json entry = {{"mentions", split.size()},
                      {"clusters", split.clusters().size()},
                      {"pairs_all", split.size() * (split.size() - 1) / 2},
                      {"positive_pairs", positive_pairs(split).size()}};
        report[name] = entry;
        inputs.push_back(path);
    };
    add(config.train_corpus, "train");
    add(config.dev_corpus, "dev");
    add(config.test_corpus, "test");
    if (inputs.empty()) throw IoError("ingest: no corpus paths configured");
    report["run_config"] = run_config_to_json(config);
    fs::path out = config.report_dir() / "ingest.json";
    io::atomic_write(out, report.dump(2) + "\n");
    write_stage_manifest(config, "ingest", inputs, {out});
}

void run_build_cache(const RunConfig& config) {
    CorpusSplit train = load_split(config.train_corpus, "build-cache", "train");
    LemmaPairCache cache = build_cache(train);
    cache.save(config.lemma_cache_path());
    write_stage_manifest(config, "build-cache", {config.train_corpus},
                         {config.lemma_cache_path()});
}

void run_gen_ftr(const RunConfig& config) {
    CorpusSplit train = load_split(config.train_corpus, "gen-ftr", "train");
    auto pairs = training_pairs(train, config.retrieval_threshold);
    StubTeacherClient teacher = make_teacher(config, train);
    GenerationReport report =
        generate_rationales(pairs, teacher, GenParams{}, config.gen_parallelism);
    report.store.save(config.rationale_store_path());
    std::string errors;
    for (const auto& f : report.failures) {
        json j = {{"pair_id", f.pair_id}, {"error", f.message}, {"retries", f.retries}};
        errors += j.dump();
        errors += '\n';
    }
    fs::path err_path = config.report_dir() / "gen_ftr_errors.jsonl";
    io::atomic_write(err_path, errors);
    write_stage_manifest(config, "gen-ftr", {config.train_corpus},
                         {config.rationale_store_path(), err_path});
}

void run_gen_zeroshot(const RunConfig& config) {
    CorpusSplit train = load_split(config.train_corpus, "gen-zeroshot", "train");
    CorpusSplit test = load_split(config.test_corpus, "gen-zeroshot", "test");
    LemmaPairCache cache = build_cache(train);
    auto candidates = inference_candidates(test, cache, config.retrieval_threshold);
    StubTeacherClient teacher = make_teacher(config, train);
    auto labels = zeroshot_labels(candidates, teacher, ZeroShotStyle::LlamaChat);
    std::string out;
    std::size_t refused = 0;
    for (const auto& [pair_id, label] : labels) {
        const char* text = label == ZeroShotLabel::Yes   ? "yes"
                           : label == ZeroShotLabel::No ? "no"
                                                        : "refused";
        if (label == ZeroShotLabel::Refused) ++refused;
        json j = {{"pair_id", pair_id}, {"label", text}};
        out += j.dump();
        out += '\n';
    }
    fs::path out_path = config.report_dir() / "zeroshot_labels.jsonl";
    io::atomic_write(out_path, out);
    json summary = {{"pairs", labels.size()},
                    {"refused", refused},
                    {"run_config", run_config_to_json(config)}};
    fs::path summary_path = config.report_dir() / "zeroshot_summary.json";
    io::atomic_write(summary_path, summary.dump(2) + "\n");
    write_stage_manifest(config, "gen-zeroshot", {config.train_corpus, config.test_corpus},
                         {out_path, summary_path});
}

void run_stats(const RunConfig& config) {
    require_exists(config.rationale_store_path(), "stats");
    RationaleStore store = RationaleStore::load(config.rationale_store_path());
    std::vector<std::string> texts;
    for (const Rationale* r : store.all()) texts.push_back(r->text);
    if (texts.empty()) throw ValidationError("stats: rationale store is empty");

    auto stats_for = [&](const std::vector<std::string>& t) {
        CorpusStats s = compute_stats(t);
        if (t.size() >= 2) {
            // 10% sampling per the reference procedure, floored so the
            // sample always has at least two texts.
            double fraction = std::max(0.10, 2.0 / static_cast<double>(t.size()));
            s.self_bleu = self_bleu(t, fraction, config.seed);
        }
        return s;
    };

    CorpusStats ftr_stats = stats_for(texts);
    json report = {{"ftr",
                    {{"n_pairs", ftr_stats.n_pairs},
                     {"total_tokens", ftr_stats.total_tokens},
                     {"unique_tokens", ftr_stats.unique_tokens},
                     {"avg_token_length", ftr_stats.avg_token_length},
                     {"avg_tokens_per_ftr", ftr_stats.avg_tokens_per_ftr},
                     {"self_bleu", ftr_stats.self_bleu}}}};
    std::string table = render_stats_table(ftr_stats, "FTR store");

    std::vector<fs::path> inputs = {config.rationale_store_path()};
    if (!config.train_corpus.empty() && fs::exists(config.train_corpus)) {
        CorpusSplit train = load_corpus(config.train_corpus, CorpusFormat::Jsonl, "train");
        std::vector<std::string> sentences;
        for (const auto& m : train.mentions()) sentences.push_back(m.sentence);
        CorpusStats gold = stats_for(sentences);
        report["gold_mentions"] = {{"n_pairs", gold.n_pairs},
                                   {"total_tokens", gold.total_tokens},
                                   {"unique_tokens", gold.unique_tokens},
                                   {"avg_token_length", gold.avg_token_length},
                                   {"avg_tokens_per_ftr", gold.avg_tokens_per_ftr},
                                   {"self_bleu", gold.self_bleu}};
        table += render_stats_table(gold, "Gold mention sentences");
        inputs.push_back(config.train_corpus);
    }

    report["run_config"] = run_config_to_json(config);
    fs::path json_path = config.report_dir() / "stats.json";
    fs::path table_path = config.report_dir() / "stats.txt";
    io::atomic_write(json_path, report.dump(2) + "\n");
    io::atomic_write(table_path, table);
    write_stage_manifest(config, "stats", inputs, {json_path, table_path});
}

void run_cache_teacher(const RunConfig& config) {
    CorpusSplit train = load_split(config.train_corpus, "cache-teacher", "train");
    require_exists(config.rationale_store_path(), "cache-teacher");
    RationaleStore store = RationaleStore::load(config.rationale_store_path());
    StubTeacherClient teacher = make_teacher(config, train);
    TeacherCacheBuilder builder;
    for (const Rationale* r : store.all()) {
        TeacherEncoding enc = teacher.encode(r->text);
        cache_teacher_states(builder, r->pair_id, enc, config.kd.attention_summary_len);
    }
    builder.write(config.teacher_cache_dir());
    write_stage_manifest(config, "cache-teacher",
                         {config.train_corpus, config.rationale_store_path()},
                         {config.teacher_cache_dir() / "manifest.json",
                          config.teacher_cache_dir() / "blob.bin"});
}

void run_train_roec(const RunConfig& config) {
    CorpusSplit train = load_split(config.train_corpus, "train-roec", "train");
    require_exists(config.rationale_store_path(), "train-roec");
    RationaleStore store = RationaleStore::load(config.rationale_store_path());

    RoecConfig rc = config.roec;
    rc.seed = config.seed;
    rc.negative_threshold = config.retrieval_threshold;
    StudentModel student = fresh_student(config, train, store);
    RoecResult result = train_roec(train, store, std::move(student), rc);

    std::map<std::string, nn::Mat> extras = {{"cluster_head_w", result.cluster_head_w},
                                             {"cluster_head_b", result.cluster_head_b}};
    json meta = {{"stage", "roec"},
                 {"seed", config.seed},
                 {"parent", nullptr},
                 {"run_config", run_config_to_json(config)},
                 {"skipped_pairs", result.skipped_pairs},
                 {"n_clusters", result.clusters.n_clusters}};
    save_student_checkpoint(config.roec_checkpoint_dir(), result.model, extras, meta);
    fs::path log_path = config.report_dir() / "roec_log.jsonl";
    io::atomic_write(log_path, train_log_to_jsonl(result.log));
    write_stage_manifest(config, "train-roec",
                         {config.train_corpus, config.rationale_store_path()},
                         {config.roec_checkpoint_dir() / "manifest.json", log_path});
}

void run_train_kd(const RunConfig& config,
                  const std::optional<fs::path>& roec_checkpoint) {
    if (config.paired_baseline && config.use_kd) {
        throw ValidationError("train-kd: paired_baseline conflicts with use_kd");
    }
    CorpusSplit train = load_split(config.train_corpus, "train-kd", "train");
    require_exists(config.rationale_store_path(), "train-kd");
    RationaleStore store = RationaleStore::load(config.rationale_store_path());

    KdConfig kc = config.kd;
    kc.seed = config.seed;
    kc.negative_threshold = config.retrieval_threshold;
    kc.paired_baseline = config.paired_baseline;
    if (!config.use_kd) {
        kc.lambda1 = 0.0;
        kc.lambda2 = 0.0;
    }

    StudentModel student;
    std::string parent;
    std::vector<fs::path> inputs = {config.train_corpus, config.rationale_store_path()};
    if (roec_checkpoint) {
        StudentCheckpoint ckpt = load_student_checkpoint(*roec_checkpoint);
        student = std::move(ckpt.model);
        parent = io::hash_file_hex(*roec_checkpoint / "manifest.json");
        inputs.push_back(*roec_checkpoint / "manifest.json");
    } else {
        student = fresh_student(config, train, store);
    }

    TeacherCache cache;
    const TeacherCache* cache_ptr = nullptr;
    if (kc.lambda1 != 0.0 || kc.lambda2 != 0.0) {
        require_exists(config.teacher_cache_dir() / "manifest.json", "train-kd");
        cache = TeacherCache::load(config.teacher_cache_dir());
        cache_ptr = &cache;
        inputs.push_back(config.teacher_cache_dir());
    }

    KdResult result = train_kd(train, store, cache_ptr, std::move(student), kc);

    json meta = {{"stage", "kd"},
                 {"seed", config.seed},
                 {"parent", parent.empty() ? json(nullptr) : json(parent)},
                 {"run_config", run_config_to_json(config)}};
    save_kd_result(config.kd_checkpoint_dir(), result, meta);
    fs::path log_path = config.report_dir() / "kd_log.jsonl";
    io::atomic_write(log_path, kd_log_to_jsonl(result.log));
    write_stage_manifest(config, "train-kd", inputs,
                         {config.kd_checkpoint_dir() / "manifest.json", log_path});
}

void run_infer(const RunConfig& config) {
    CorpusSplit test = load_split(config.test_corpus, "infer", "test");
    require_exists(config.kd_checkpoint_dir() / "manifest.json", "infer");
    PairwiseScorer scorer = load_kd_scorer(config.kd_checkpoint_dir());

    LemmaPairCache cache;
    std::vector<fs::path> inputs = {config.test_corpus,
                                    config.kd_checkpoint_dir() / "manifest.json"};
    if (fs::exists(config.lemma_cache_path())) {
        cache = LemmaPairCache::load(config.lemma_cache_path());
        inputs.push_back(config.lemma_cache_path());
    } else {
        CorpusSplit train = load_split(config.train_corpus, "infer", "train");
        cache = build_cache(train);
        inputs.push_back(config.train_corpus);
    }

    ChainAssignment predicted = infer_chains(config, test, cache, scorer);
    io::atomic_write(config.predictions_path(), chains_to_jsonl(predicted));
    write_stage_manifest(config, "infer", inputs, {config.predictions_path()});
}

namespace {

// Minimal CoNLL-style key/response emit: one token line per mention.
std::string to_conll(const ChainAssignment& chains, const std::string& doc_name) {
    std::string out = "#begin document (" + doc_name + ");\n";
    for (const auto& [mention_id, chain_id] : chains.chain_of) {
        out += mention_id + "\t(" + std::to_string(chain_id) + ")\n";
    }
    out += "#end document\n";
    return out;
}

}  // namespace

ScoreReport run_score(const RunConfig& config, bool emit_conll) {
    CorpusSplit test = load_split(config.test_corpus, "score", "test");
    require_exists(config.predictions_path(), "score");
    ChainAssignment predicted =
        chains_from_jsonl(io::read_file(config.predictions_path()));
    ChainAssignment gold = gold_chains(test);
    ScoreReport report = conll(gold, predicted);

    json j = {{"muc",
               {{"recall", report.muc.recall},
                {"precision", report.muc.precision},
                {"f1", report.muc.f1}}},
              {"b3",
               {{"recall", report.b3.recall},
                {"precision", report.b3.precision},
                {"f1", report.b3.f1}}},
              {"ceaf_e",
               {{"recall", report.ceaf_e.recall},
                {"precision", report.ceaf_e.precision},
                {"f1", report.ceaf_e.f1}}},
              {"conll_f1", report.conll_f1},
              {"muc_degenerate_key", report.muc_degenerate_key},
              {"muc_degenerate_response", report.muc_degenerate_response}};
    ClusterSizeProfile profile = cluster_size_profile(gold, predicted);
    json by_size = json::object();
    for (const auto& [size, total] : profile.total_by_size) {
        std::size_t correct = 0;
        auto it = profile.correct_by_size.find(size);
        if (it != profile.correct_by_size.end()) correct = it->second;
        by_size[std::to_string(size)] = {{"correct", correct}, {"total", total}};
    }
    j["cluster_size_profile"] = by_size;
    j["run_config"] = run_config_to_json(config);
    fs::path json_path = config.report_dir() / "score.json";
    fs::path text_path = config.report_dir() / "score.txt";
    io::atomic_write(json_path, j.dump(2) + "\n");
    io::atomic_write(text_path, render_score_report(report));
    std::vector<fs::path> outputs = {json_path, text_path};
    if (emit_conll) {
        fs::path key_path = config.report_dir() / "key.conll";
        fs::path resp_path = config.report_dir() / "response.conll";
        io::atomic_write(key_path, to_conll(gold, "key"));
        io::atomic_write(resp_path, to_conll(predicted, "response"));
        outputs.push_back(key_path);
        outputs.push_back(resp_path);
    }
    write_stage_manifest(config, "score", {config.test_corpus, config.predictions_path()},
                         outputs);
    return report;
}

namespace {

std::map<std::string, int> load_decisions(const fs::path& path) {
    std::map<std::string, int> out;
    auto lines = io::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw ParseError(path.string() + " line " + std::to_string(i + 1) + ": " +
                             e.what());
        }
        std::string pair_id = j.at("pair_id").get<std::string>();
        if (!out.emplace(pair_id, j.at("decision").get<int>()).second) {
            throw ValidationError("decisions: duplicate pair_id " + pair_id);
        }
    }
    return out;
}

// Splits a canonical pair id back into two known mention ids.
std::pair<std::string, std::string> split_pair_id(const CorpusSplit& split,
                                                  const std::string& pair_id) {
    for (std::size_t at = pair_id.find('|'); at != std::string::npos;
         at = pair_id.find('|', at + 1)) {
        std::string a = pair_id.substr(0, at);
        std::string b = pair_id.substr(at + 1);
        if (split.has_mention(a) && split.has_mention(b)) return {a, b};
    }
    throw ValidationError("compare: pair id did not resolve to known mentions: " + pair_id);
}

}  // namespace

void run_compare(const RunConfig& config, const fs::path& decisions_a,
                 const fs::path& decisions_b) {
    CorpusSplit test = load_split(config.test_corpus, "compare", "test");
    require_exists(decisions_a, "compare");
    require_exists(decisions_b, "compare");
    auto a = load_decisions(decisions_a);
    auto b = load_decisions(decisions_b);
    if (a.size() != b.size()) {
        throw ValidationError("compare: decision files cover different pair sets");
    }
    std::vector<std::pair<std::string, int>> gold;
    gold.reserve(a.size());
    for (const auto& [pair_id, decision] : a) {
        if (!b.count(pair_id)) {
            throw ValidationError("compare: pair " + pair_id + " missing from second file");
        }
        auto [m1, m2] = split_pair_id(test, pair_id);
        int label = test.mention(m1).gold_cluster_id == test.mention(m2).gold_cluster_id;
        gold.emplace_back(pair_id, label);
    }
    SystemComparison cmp = compare_systems(gold, a, b);
    json j = {{"pos_a_only", cmp.pos_a_only}, {"pos_b_only", cmp.pos_b_only},
              {"neg_a_only", cmp.neg_a_only}, {"neg_b_only", cmp.neg_b_only},
              {"total_pos", cmp.total_pos},   {"total_neg", cmp.total_neg},
              {"run_config", run_config_to_json(config)}};
    fs::path out = config.report_dir() / "compare.json";
    io::atomic_write(out, j.dump(2) + "\n");
    write_stage_manifest(config, "compare", {config.test_corpus, decisions_a, decisions_b},
                         {out});
}

void run_survey_score(const RunConfig& config, const fs::path& responses_path) {
    require_exists(responses_path, "survey-score");
    std::vector<SurveyResponse> responses;
    auto lines = io::read_lines(responses_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception& e) {
            throw ParseError("survey line " + std::to_string(i + 1) + ": " + e.what());
        }
        responses.push_back({j.at("annotator").get<std::string>(),
                             j.at("item").get<std::string>(),
                             j.at("question").get<std::string>(),
                             j.at("answer").get<std::string>()});
    }
    SurveyReport report = score_survey(responses);
    json means = json::object();
    for (const auto& [q, mean] : report.question_means) means[q] = mean;
    json j = {{"question_means", means},
              {"krippendorff_alpha", report.krippendorff_alpha},
              {"n_responses", report.n_responses},
              {"run_config", run_config_to_json(config)}};
    fs::path out = config.report_dir() / "survey.json";
    io::atomic_write(out, j.dump(2) + "\n");
    write_stage_manifest(config, "survey-score", {responses_path}, {out});
}

std::vector<AblationRow> run_ablation(const RunConfig& config) {
    CorpusSplit train = load_split(config.train_corpus, "ablation", "train");
    CorpusSplit test = load_split(config.test_corpus, "ablation", "test");
    require_exists(config.rationale_store_path(), "ablation");
    RationaleStore store = RationaleStore::load(config.rationale_store_path());
    require_exists(config.teacher_cache_dir() / "manifest.json", "ablation");
    TeacherCache teacher_cache = TeacherCache::load(config.teacher_cache_dir());
    LemmaPairCache lemma_cache = build_cache(train);

    StudentModel base = fresh_student(config, train, store);

    RoecConfig rc = config.roec;
    rc.seed = config.seed;
    rc.negative_threshold = config.retrieval_threshold;
    RoecResult roec = train_roec(train, store, base, rc);

    auto kd_config = [&](bool use_kd, bool paired) {
        KdConfig kc = config.kd;
        kc.seed = config.seed;
        kc.negative_threshold = config.retrieval_threshold;
        kc.paired_baseline = paired;
        if (!use_kd) {
            kc.lambda1 = 0.0;
            kc.lambda2 = 0.0;
        }
        return kc;
    };

    std::vector<AblationRow> rows;
    auto evaluate = [&](const std::string& name, StudentModel student, bool use_kd,
                        bool paired) {
        KdResult kd = train_kd(train, store, use_kd ? &teacher_cache : nullptr,
                               std::move(student), kd_config(use_kd, paired));
        ChainAssignment predicted = infer_chains(config, test, lemma_cache, kd.scorer);
        ScoreReport report = score_predictions(test, predicted);
        rows.push_back({name, report.b3.f1, report.conll_f1});
    };

    evaluate("paired", base, /*use_kd=*/false, /*paired=*/true);
    evaluate("+ROEC,-KD", roec.model, false, false);
    evaluate("-ROEC,+KD", base, true, false);
    evaluate("+ROEC,+KD", roec.model, true, false);

    std::ostringstream table;
    table << "variant      B3_F1    CoNLL_F1\n";
    json j = json::array();
    for (const auto& row : rows) {
        table << row.variant;
        for (std::size_t i = row.variant.size(); i < 13; ++i) table << ' ';
        table << row.b3_f1 << "  " << row.conll_f1 << "\n";
        j.push_back({{"variant", row.variant},
                     {"b3_f1", row.b3_f1},
                     {"conll_f1", row.conll_f1}});
    }
    json wrapped = {{"rows", j}, {"run_config", run_config_to_json(config)}};
    fs::path json_path = config.report_dir() / "ablation.json";
    fs::path text_path = config.report_dir() / "ablation.txt";
    io::atomic_write(json_path, wrapped.dump(2) + "\n");
    io::atomic_write(text_path, table.str());
    write_stage_manifest(config, "ablation",
                         {config.train_corpus, config.test_corpus,
                          config.rationale_store_path(), config.teacher_cache_dir()},
                         {json_path, text_path});
    return rows;
}

void run_make_synthetic(const RunConfig& config, std::size_t n_clusters,
                        std::size_t n_singletons) {
    // Splits share the event identities and differ in sentence realization:
    // held-out splits are new descriptions of the training-time events, the
    // cross-document setting the pipeline is built for.
    std::uint64_t event_seed = config.seed ^ 0x517CC1B727220A95ULL;
    auto emit = [&](const fs::path& path, const std::string& name, std::size_t clusters,
                    std::size_t min_size, std::size_t max_size, std::size_t singletons,
                    std::uint64_t seed) {
        if (path.empty()) throw IoError("make-synthetic: corpus path unset for " + name);
        SyntheticConfig sc;
        sc.n_clusters = clusters;
        sc.min_cluster_size = min_size;
        sc.max_cluster_size = max_size;
        sc.n_singletons = singletons;
        sc.seed = seed;
        sc.event_seed = event_seed;
        sc.split_name = name;
        io::atomic_write(path, corpus_to_jsonl(make_synthetic_split(sc)));
    };
    emit(config.train_corpus, "train", n_clusters, 8, 9, n_singletons, config.seed);
    emit(config.dev_corpus, "dev", n_clusters, 3, 4, n_singletons / 2, config.seed + 1);
    emit(config.test_corpus, "test", n_clusters, 3, 4, n_singletons / 2, config.seed + 2);
    write_stage_manifest(config, "make-synthetic", {},
                         {config.train_corpus, config.dev_corpus, config.test_corpus});
}

}  // namespace cdcr
