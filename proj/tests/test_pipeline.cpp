#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "cdcr/errors.hpp"
#include "cdcr/io.hpp"
#include "cdcr/lemma_heuristic.hpp"
#include "cdcr/pipeline.hpp"
#include "cdcr/synthetic.hpp"
#include "test_util.hpp"

using namespace cdcr;
using cdcr_test::TempDir;
namespace fs = std::filesystem;

namespace {

// A small but complete run configuration over a generated corpus.
RunConfig small_config(const TempDir& tmp, std::uint64_t seed = 42) {
    RunConfig c;
    c.train_corpus = tmp.path() / "train.jsonl";
    c.dev_corpus = tmp.path() / "dev.jsonl";
    c.test_corpus = tmp.path() / "test.jsonl";
    c.work_dir = tmp.path() / "work";
    c.seed = seed;
    c.student_dim = 8;
    c.student_heads = 2;
    c.student_layers = 1;
    c.student_max_len = 96;
    c.roec.epochs = 1;
    c.roec.batch_size = 16;
    c.kd.epochs = 1;
    c.kd.batch_size = 8;
    c.kd.attention_summary_len = 16;
    return c;
}

void write_synthetic(const RunConfig& c) {
    auto emit = [&](const fs::path& path, std::size_t clusters, std::uint64_t seed,
                    const std::string& name) {
        SyntheticConfig sc;
        sc.n_clusters = clusters;
        sc.min_cluster_size = 2;
        sc.max_cluster_size = 3;
        sc.seed = seed;
        sc.split_name = name;
        io::atomic_write(path, corpus_to_jsonl(make_synthetic_split(sc)));
    };
    emit(c.train_corpus, 4, c.seed, "train");
    emit(c.dev_corpus, 2, c.seed + 1, "dev");
    emit(c.test_corpus, 3, c.seed + 2, "test");
}

}  // namespace

TEST_SUITE("synthetic_corpus") {
    TEST_CASE("default acceptance shape: 10 clusters, >= 60 mentions") {
        SyntheticConfig sc;
        sc.seed = 5;
        CorpusSplit split = make_synthetic_split(sc);
        CHECK(split.clusters().size() == 10);
        CHECK(split.size() >= 60);
    }

    TEST_CASE("hard negatives and hard positives exist by construction") {
        SyntheticConfig sc;
        sc.seed = 6;
        CorpusSplit split = make_synthetic_split(sc);
        bool hard_negative = false;  // same lemma, different cluster
        bool hard_positive = false;  // different lemma, same cluster
        for (const auto& p : enumerate_pairs(split, PairScope::All)) {
            bool same_lemma = p.m1->trigger_lemma == p.m2->trigger_lemma;
            if (same_lemma && p.label == 0) hard_negative = true;
            if (!same_lemma && p.label == 1) hard_positive = true;
        }
        CHECK(hard_negative);
        CHECK(hard_positive);
    }

    TEST_CASE("every positive pair survives retrieval at threshold 0.05") {
        SyntheticConfig sc;
        sc.seed = 7;
        CorpusSplit split = make_synthetic_split(sc);
        LemmaPairCache cache = build_cache(split);
        auto positives = positive_pairs(split);
        auto kept = retrieve_candidates(cache, positives, 0.05);
        CHECK(kept.size() == positives.size());
    }

    TEST_CASE("jsonl roundtrip preserves the corpus") {
        TempDir tmp;
        SyntheticConfig sc;
        sc.n_clusters = 3;
        sc.min_cluster_size = 2;
        sc.max_cluster_size = 3;
        sc.seed = 8;
        CorpusSplit split = make_synthetic_split(sc);
        auto path = tmp.path() / "c.jsonl";
        io::atomic_write(path, corpus_to_jsonl(split));
        CorpusSplit loaded = load_corpus(path, CorpusFormat::Jsonl, split.name());
        REQUIRE(loaded.size() == split.size());
        for (std::size_t i = 0; i < split.size(); ++i) {
            CHECK(loaded.mentions()[i].mention_id == split.mentions()[i].mention_id);
            CHECK(loaded.mentions()[i].sentence == split.mentions()[i].sentence);
            CHECK(loaded.mentions()[i].trigger_start == split.mentions()[i].trigger_start);
        }
    }

    TEST_CASE("generation is deterministic in the seed") {
        SyntheticConfig sc;
        sc.seed = 9;
        CHECK(corpus_to_jsonl(make_synthetic_split(sc)) ==
              corpus_to_jsonl(make_synthetic_split(sc)));
    }
}

TEST_SUITE("pipeline_stages") {
    TEST_CASE("missing inputs fail with a named path") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        try {
            run_build_cache(c);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("train.jsonl") != std::string::npos);
        }
    }

    TEST_CASE("ingest, cache, and stats write reports plus manifests") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_ingest(c);
        CHECK(fs::exists(c.report_dir() / "ingest.json"));
        CHECK(fs::exists(c.work_dir / "manifests/ingest.manifest.json"));

        run_build_cache(c);
        CHECK(fs::exists(c.lemma_cache_path()));

        run_gen_ftr(c);
        CHECK(fs::exists(c.rationale_store_path()));

        run_stats(c);
        CHECK(fs::exists(c.report_dir() / "stats.json"));
        CHECK(fs::exists(c.report_dir() / "stats.txt"));

        // manifests embed the config hash and input hashes
        auto manifest = nlohmann::json::parse(
            io::read_file(c.work_dir / "manifests/stats.manifest.json"));
        CHECK(manifest.at("stage") == "stats");
        CHECK(manifest.at("seed") == c.seed);
        CHECK(manifest.at("input_hashes").size() >= 1);
    }

    TEST_CASE("training logs are byte-deterministic for a fixed seed") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_gen_ftr(c);
        run_cache_teacher(c);
        run_train_roec(c);
        auto roec_log = io::read_file(c.report_dir() / "roec_log.jsonl");
        auto roec_params = io::read_file(c.roec_checkpoint_dir() / "params.bin");
        run_train_kd(c, c.roec_checkpoint_dir());
        auto kd_log = io::read_file(c.report_dir() / "kd_log.jsonl");

        run_train_roec(c);
        CHECK(io::read_file(c.report_dir() / "roec_log.jsonl") == roec_log);
        CHECK(io::read_file(c.roec_checkpoint_dir() / "params.bin") == roec_params);
        run_train_kd(c, c.roec_checkpoint_dir());
        CHECK(io::read_file(c.report_dir() / "kd_log.jsonl") == kd_log);
    }

    TEST_CASE("pure stages are byte-deterministic across reruns") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_ingest(c);
        auto ingest1 = io::read_file(c.report_dir() / "ingest.json");
        run_gen_ftr(c);
        auto store1 = io::read_file(c.rationale_store_path());
        run_stats(c);
        auto stats1 = io::read_file(c.report_dir() / "stats.json");

        run_ingest(c);
        run_gen_ftr(c);
        run_stats(c);
        CHECK(io::read_file(c.report_dir() / "ingest.json") == ingest1);
        CHECK(io::read_file(c.rationale_store_path()) == store1);
        CHECK(io::read_file(c.report_dir() / "stats.json") == stats1);
    }

    TEST_CASE("full small pipeline runs end to end") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_build_cache(c);
        run_gen_ftr(c);
        run_cache_teacher(c);
        run_train_roec(c);
        CHECK(fs::exists(c.roec_checkpoint_dir() / "manifest.json"));
        CHECK(fs::exists(c.report_dir() / "roec_log.jsonl"));

        run_train_kd(c, c.roec_checkpoint_dir());
        CHECK(fs::exists(c.kd_checkpoint_dir() / "manifest.json"));
        // kd manifest records its roec parent
        auto kd_manifest = nlohmann::json::parse(
            io::read_file(c.kd_checkpoint_dir() / "manifest.json"));
        CHECK(!kd_manifest.at("meta").at("parent").is_null());

        run_infer(c);
        CHECK(fs::exists(c.predictions_path()));
        ScoreReport report = run_score(c, /*emit_conll=*/true);
        CHECK(report.b3.f1 >= 0.0);
        CHECK(report.b3.f1 <= 1.0);
        CHECK(fs::exists(c.report_dir() / "key.conll"));
        CHECK(fs::exists(c.report_dir() / "response.conll"));

        // score on gold-as-predictions gives CoNLL F1 = 1
        ChainAssignment gold = gold_chains(
            load_corpus(c.test_corpus, CorpusFormat::Jsonl, "test"));
        io::atomic_write(c.predictions_path(), chains_to_jsonl(gold));
        ScoreReport perfect = run_score(c);
        CHECK(perfect.conll_f1 == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("train-kd without roec runs from a raw student") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_gen_ftr(c);
        run_cache_teacher(c);
        run_train_kd(c, std::nullopt);
        auto kd_manifest = nlohmann::json::parse(
            io::read_file(c.kd_checkpoint_dir() / "manifest.json"));
        CHECK(kd_manifest.at("meta").at("parent").is_null());
    }

    TEST_CASE("paired baseline with use_kd is a config conflict") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        c.paired_baseline = true;
        c.use_kd = true;
        CHECK_THROWS_AS(run_train_kd(c, std::nullopt), ValidationError);
    }

    TEST_CASE("inference is byte-identical with and without the rationale store") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_gen_ftr(c);
        run_cache_teacher(c);
        run_train_roec(c);
        run_train_kd(c, c.roec_checkpoint_dir());
        run_build_cache(c);

        run_infer(c);
        auto with_store = io::read_file(c.predictions_path());

        fs::rename(c.rationale_store_path(), tmp.path() / "hidden.jsonl");
        run_infer(c);
        auto without_store = io::read_file(c.predictions_path());
        CHECK(with_store == without_store);
        fs::rename(tmp.path() / "hidden.jsonl", c.rationale_store_path());
    }

    TEST_CASE("inference ignores test-split gold labels") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_gen_ftr(c);
        run_cache_teacher(c);
        run_train_roec(c);
        run_train_kd(c, c.roec_checkpoint_dir());
        run_build_cache(c);
        run_infer(c);
        auto before = io::read_file(c.predictions_path());

        // permute every gold cluster id in the test corpus
        CorpusSplit test = load_corpus(c.test_corpus, CorpusFormat::Jsonl, "test");
        std::vector<Mention> relabeled = test.mentions();
        for (auto& m : relabeled) m.gold_cluster_id = "relabeled_" + m.gold_cluster_id;
        io::atomic_write(c.test_corpus, corpus_to_jsonl(CorpusSplit("test", relabeled)));

        run_infer(c);
        CHECK(io::read_file(c.predictions_path()) == before);
    }

    TEST_CASE("zero-shot stage writes labels and a summary") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        run_gen_zeroshot(c);
        CHECK(fs::exists(c.report_dir() / "zeroshot_labels.jsonl"));
        auto summary = nlohmann::json::parse(
            io::read_file(c.report_dir() / "zeroshot_summary.json"));
        CHECK(summary.at("pairs").get<std::size_t>() > 0);
    }

    TEST_CASE("compare stage consumes decision files") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        write_synthetic(c);
        CorpusSplit test = load_corpus(c.test_corpus, CorpusFormat::Jsonl, "test");
        auto pairs = enumerate_pairs(test, PairScope::All);
        std::string a_lines, b_lines;
        for (const auto& p : pairs) {
            a_lines += nlohmann::json{{"pair_id", p.pair_id}, {"decision", p.label}}.dump();
            a_lines += '\n';
            b_lines +=
                nlohmann::json{{"pair_id", p.pair_id}, {"decision", 1 - p.label}}.dump();
            b_lines += '\n';
        }
        io::atomic_write(tmp.path() / "a.jsonl", a_lines);
        io::atomic_write(tmp.path() / "b.jsonl", b_lines);
        run_compare(c, tmp.path() / "a.jsonl", tmp.path() / "b.jsonl");
        auto cmp = nlohmann::json::parse(io::read_file(c.report_dir() / "compare.json"));
        CHECK(cmp.at("pos_a_only").get<std::size_t>() ==
              cmp.at("total_pos").get<std::size_t>());
        CHECK(cmp.at("neg_a_only").get<std::size_t>() ==
              cmp.at("total_neg").get<std::size_t>());
        CHECK(cmp.at("pos_b_only") == 0);
    }

    TEST_CASE("survey stage scores a responses file") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        std::string lines;
        for (const char* annotator : {"a1", "a2"}) {
            lines += nlohmann::json{{"annotator", annotator},
                                    {"item", "i1"},
                                    {"question", "plausibility"},
                                    {"answer", "yes"}}
                         .dump();
            lines += '\n';
        }
        io::atomic_write(tmp.path() / "responses.jsonl", lines);
        run_survey_score(c, tmp.path() / "responses.jsonl");
        auto report = nlohmann::json::parse(io::read_file(c.report_dir() / "survey.json"));
        CHECK(report.at("krippendorff_alpha") == 1.0);
    }

    TEST_CASE("make-synthetic writes a loadable corpus triple") {
        TempDir tmp;
        RunConfig c = small_config(tmp);
        run_make_synthetic(c, 4, 1);
        CorpusSplit train = load_corpus(c.train_corpus, CorpusFormat::Jsonl, "train");
        CorpusSplit dev = load_corpus(c.dev_corpus, CorpusFormat::Jsonl, "dev");
        CorpusSplit test = load_corpus(c.test_corpus, CorpusFormat::Jsonl, "test");
        CHECK(train.clusters().size() >= 4);
        CHECK(dev.size() > 0);
        CHECK(test.size() > 0);
    }

    TEST_CASE("run config json roundtrip") {
        TempDir tmp;
        RunConfig c = small_config(tmp, 77);
        c.kd.lambda2 = 0.25;
        c.retrieval_threshold = 0.1;
        auto j = run_config_to_json(c);
        RunConfig back = run_config_from_json(j);
        CHECK(back.seed == 77);
        CHECK(back.kd.lambda2 == 0.25);
        CHECK(back.retrieval_threshold == 0.1);
        CHECK(back.train_corpus == c.train_corpus);
        CHECK(run_config_to_json(back) == j);
    }
}
