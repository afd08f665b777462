#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "roirank/config_file.hpp"
#include "roirank/report.hpp"
#include "roirank/synthetic.hpp"

using namespace roirank;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("roirank_harness_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Manifest small_dataset(std::uint64_t seed = 1, double effect = 3.0) {
    SyntheticSpec spec;
    spec.n_sites = 2;
    spec.subjects_per_site_per_class = 4;
    spec.n_rois = 4;
    spec.time_len = 20;
    spec.planted_rois = {1};
    spec.effect_strength = effect;
    spec.seed = seed;
    return gen_synthetic(spec);
}

TrainConfig fast_config() {
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.seed = 5;
    cfg.model.conv_channels = {4, 4, 6, 6};
    cfg.model.hidden_size = 4;
    cfg.model.fc_size = 4;
    cfg.model.attn_dim = 4;
    return cfg;
}

std::vector<const SubjectRecord*> all_records(const Manifest& m) {
    std::vector<const SubjectRecord*> out;
    for (const auto& r : m.records) out.push_back(&r);
    return out;
}

std::vector<std::size_t> all_rois(const Manifest& m) {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < m.records[0].n_rois(); ++r) out.push_back(r);
    return out;
}

}  // namespace

TEST_CASE("train config validation and echo") {
    TrainConfig cfg;
    cfg.validate();
    cfg.batch_size = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    auto echo = cfg.echo();
    CHECK(echo.at("variant") == "SCCNN_RNN");
    CHECK(echo.at("batch_size") == "32");
    CHECK(echo.count("learning_rate") == 1);
    CHECK(echo.count("seed") == 1);
}

TEST_CASE("zero epochs leave the model untouched") {
    Manifest m = small_dataset();
    TrainConfig cfg = fast_config();
    cfg.epochs = 0;
    Model model(cfg.model, 3);
    std::vector<double> before;
    for (const auto& p : model.params().params())
        for (double v : p.node->value.values()) before.push_back(v);
    TrainResult res = train(model, all_records(m), all_rois(m), cfg);
    CHECK(res.loss_trace.empty());
    std::vector<double> after;
    for (const auto& p : model.params().params())
        for (double v : p.node->value.values()) after.push_back(v);
    CHECK(before == after);
}

TEST_CASE("training is deterministic for a fixed seed") {
    Manifest m = small_dataset();
    TrainConfig cfg = fast_config();
    auto run = [&] {
        Model model(cfg.model, 3);
        return train(model, all_records(m), all_rois(m), cfg).loss_trace;
    };
    auto a = run();
    auto b = run();
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
    for (double loss : a) CHECK(std::isfinite(loss));
}

TEST_CASE("evaluate_fold measures argmax agreement") {
    Manifest m = small_dataset();
    TrainConfig cfg = fast_config();
    Model model(cfg.model, 3);
    double acc = evaluate_fold(model, all_records(m), all_rois(m));
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    // accuracy is a multiple of 1/n
    double scaled = acc * static_cast<double>(m.size());
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
}

TEST_CASE("label shuffling drives accuracy to chance") {
    // With labels detached from the data, held-out accuracy has mean 0.5.
    SyntheticSpec spec;
    spec.n_sites = 2;
    spec.subjects_per_site_per_class = 50;
    spec.n_rois = 2;
    spec.time_len = 20;
    spec.effect_strength = 0.0;
    spec.seed = 31;
    Manifest m = gen_synthetic(spec);
    Rng shuffle_rng(7);
    for (auto& r : m.records)
        r.label = shuffle_rng.below(2) ? ClassLabel::ADHD : ClassLabel::HC;

    TrainConfig cfg = fast_config();
    cfg.epochs = 1;
    Model model(cfg.model, 3);
    std::vector<const SubjectRecord*> train_half, test_half;
    for (const auto& r : m.records)
        (r.site == m.records[0].site ? train_half : test_half).push_back(&r);
    train(model, train_half, all_rois(m), cfg);
    double acc = evaluate_fold(model, test_half, all_rois(m));
    CHECK(acc > 0.3);
    CHECK(acc < 0.7);
}

TEST_CASE("loso report covers every site and averages correctly") {
    Manifest m = small_dataset();
    TrainConfig cfg = fast_config();
    cfg.epochs = 1;
    EvalReport rep = loso_accuracy(m, all_rois(m), cfg);
    REQUIRE(rep.per_site.size() == 2);
    CHECK(rep.per_site[0].first < rep.per_site[1].first);  // sorted by site
    CHECK(std::abs(rep.mean_accuracy - rep.recompute_mean()) < 1e-12);
    double mean = (rep.per_site[0].second + rep.per_site[1].second) / 2.0;
    CHECK(std::abs(rep.mean_accuracy - mean) < 1e-12);
    CHECK(rep.config_echo.count("variant") == 1);

    // same config, same numbers
    EvalReport rep2 = loso_accuracy(m, all_rois(m), cfg);
    CHECK(rep.per_site == rep2.per_site);
}

TEST_CASE("fold seeds differ by site but not by run") {
    TrainConfig cfg = fast_config();
    CHECK(fold_seed(cfg, "NYU") == fold_seed(cfg, "NYU"));
    CHECK(fold_seed(cfg, "NYU") != fold_seed(cfg, "KKI"));
    TrainConfig other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(fold_seed(cfg, "NYU") != fold_seed(other, "NYU"));
}

TEST_CASE("ranking orders rois by accuracy with index tie-break") {
    std::vector<std::pair<std::size_t, double>> per_roi = {
        {0, 0.5}, {1, 0.75}, {2, 0.5}, {3, 0.9}};
    auto order = RankingResult::derive_order(per_roi);
    CHECK(order == std::vector<std::size_t>{3, 1, 0, 2});
}

TEST_CASE("report export and parse round-trip losslessly") {
    TempDir dir;
    SUBCASE("eval report") {
        EvalReport rep;
        rep.per_site = {{"KKI", 1.0 / 3.0}, {"NYU", 0.7253951234567890123}};
        rep.mean_accuracy = rep.recompute_mean();
        rep.config_echo = {{"variant", "ASCRNN"}, {"seed", "5"}};
        std::string path = (dir.path / "eval.csv").string();
        export_report(rep, path, ReportFormat::Plotdata);
        Plotdata pd = parse_plotdata(path);
        REQUIRE(pd.rows.size() == 2);
        CHECK(pd.rows[0].second == rep.per_site[0].second);
        CHECK(pd.rows[1].second == rep.per_site[1].second);
        CHECK(pd.metadata.at("variant") == "ASCRNN");
        CHECK(pd.metadata.at("mean_accuracy") ==
              pd.metadata.at("mean_accuracy"));
    }
    SUBCASE("ranking report") {
        RankingResult ranking;
        ranking.per_roi_accuracy = {{5, 0.6}, {2, 1.0 / 7.0}, {9, 0.6}};
        ranking.rank_order = RankingResult::derive_order(ranking.per_roi_accuracy);
        std::string path = (dir.path / "ranking.csv").string();
        export_report(ranking, path, ReportFormat::Plotdata);
        RankingResult back = load_ranking(path);
        REQUIRE(back.per_roi_accuracy.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(back.per_roi_accuracy[i].first ==
                  ranking.per_roi_accuracy[i].first);
            CHECK(back.per_roi_accuracy[i].second ==
                  ranking.per_roi_accuracy[i].second);  // bit-exact
        }
        CHECK(back.rank_order == ranking.rank_order);
    }
    SUBCASE("sweep report") {
        SweepResult sweep;
        sweep.direction = SweepDirection::Reverse;
        for (std::size_t k = 1; k <= 3; ++k) {
            EvalReport rep;
            rep.per_site = {{"A", 0.1 * static_cast<double>(k)}};
            rep.mean_accuracy = rep.recompute_mean();
            sweep.points.emplace_back(k, rep);
        }
        std::string path = (dir.path / "sweep.csv").string();
        export_report(sweep, path, ReportFormat::Plotdata);
        Plotdata pd = parse_plotdata(path);
        REQUIRE(pd.rows.size() == 3);
        CHECK(pd.metadata.at("direction") == "reverse");
        for (std::size_t k = 1; k <= 3; ++k) {
            CHECK(pd.rows[k - 1].first == static_cast<double>(k));
            CHECK(pd.rows[k - 1].second == sweep.points[k - 1].second.mean_accuracy);
        }
    }
    SUBCASE("table format mentions the sites") {
        EvalReport rep;
        rep.per_site = {{"KKI", 0.5}, {"NYU", 0.75}};
        rep.mean_accuracy = rep.recompute_mean();
        std::string path = (dir.path / "eval.txt").string();
        export_report(rep, path, ReportFormat::Table);
        std::ifstream f(path);
        std::string all((std::istreambuf_iterator<char>(f)),
                        std::istreambuf_iterator<char>());
        CHECK(all.find("KKI") != std::string::npos);
        CHECK(all.find("NYU") != std::string::npos);
    }
    SUBCASE("wrong kind is rejected by load_ranking") {
        EvalReport rep;
        rep.per_site = {{"A", 0.5}};
        rep.mean_accuracy = 0.5;
        std::string path = (dir.path / "eval2.csv").string();
        export_report(rep, path, ReportFormat::Plotdata);
        CHECK_THROWS_AS(load_ranking(path), DataError);
    }
}

TEST_CASE("sweep best() prefers the smallest k on ties") {
    SweepResult sweep;
    for (std::size_t k = 1; k <= 4; ++k) {
        EvalReport rep;
        rep.mean_accuracy = (k == 2 || k == 3) ? 0.8 : 0.5;
        sweep.points.emplace_back(k, rep);
    }
    auto [k, acc] = sweep.best();
    CHECK(k == 2);
    CHECK(acc == 0.8);
}

TEST_CASE("single-roi ranking on a tiny planted dataset") {
    Manifest m = small_dataset(21, 4.0);
    TrainConfig cfg = fast_config();
    cfg.epochs = 1;
    RankingResult ranking = rank_single_roi(m, cfg);
    REQUIRE(ranking.per_roi_accuracy.size() == 4);
    REQUIRE(ranking.rank_order.size() == 4);
    REQUIRE(ranking.reports.size() == 4);
    // rank order is consistent with the accuracies
    for (std::size_t i = 1; i < ranking.rank_order.size(); ++i) {
        double prev = 0, cur = 0;
        for (const auto& [roi, acc] : ranking.per_roi_accuracy) {
            if (roi == ranking.rank_order[i - 1]) prev = acc;
            if (roi == ranking.rank_order[i]) cur = acc;
        }
        CHECK(prev >= cur);
    }
    // explicit candidate subsets restrict the ranking
    RankingResult sub = rank_single_roi(m, cfg, {0, 2});
    REQUIRE(sub.per_roi_accuracy.size() == 2);
    CHECK(sub.per_roi_accuracy[0].first == 0);
    CHECK(sub.per_roi_accuracy[1].first == 2);
}

TEST_CASE("topk sweep uses rank-order prefixes") {
    Manifest m = small_dataset(22);
    TrainConfig cfg = fast_config();
    cfg.epochs = 1;
    RankingResult ranking;
    ranking.per_roi_accuracy = {{0, 0.5}, {1, 0.9}, {2, 0.6}, {3, 0.4}};
    ranking.rank_order = RankingResult::derive_order(ranking.per_roi_accuracy);
    REQUIRE(ranking.rank_order == std::vector<std::size_t>{1, 2, 0, 3});

    SweepResult top = topk_sweep(m, ranking, 3, cfg, SweepDirection::Top);
    REQUIRE(top.points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(top.points[i].first == i + 1);
        // the evaluated subset is the first k of the rank order
        std::vector<std::size_t> expect(ranking.rank_order.begin(),
                                        ranking.rank_order.begin() + i + 1);
        CHECK(top.points[i].second.roi_subset == expect);
    }
    SweepResult rev = topk_sweep(m, ranking, 2, cfg, SweepDirection::Reverse);
    REQUIRE(rev.points.size() == 2);
    CHECK(rev.points[0].second.roi_subset == std::vector<std::size_t>{3});
    CHECK(rev.points[1].second.roi_subset == std::vector<std::size_t>{3, 0});

    CHECK_THROWS_AS(topk_sweep(m, ranking, 9, cfg, SweepDirection::Top),
                    ConfigError);
    CHECK_THROWS_AS(topk_sweep(m, ranking, 0, cfg, SweepDirection::Top),
                    ConfigError);
}

TEST_CASE("config files parse, override and reject unknown keys") {
    TempDir dir;
    std::string path = (dir.path / "exp.cfg").string();
    {
        std::ofstream f(path);
        f << "# experiment settings\n";
        f << "variant = ASDRNN\n";
        f << "learning_rate = 0.001\n";
        f << "epochs = 7\n";
        f << "\n";
        f << "seed = 42\n";
    }
    auto kv = parse_kv_file(path);
    CHECK(kv.at("variant") == "ASDRNN");
    CHECK(kv.at("epochs") == "7");

    apply_overrides(kv, {"epochs=9", "slice_length=6"});
    CHECK(kv.at("epochs") == "9");

    TrainConfig cfg = train_config_from_kv(kv);
    CHECK(cfg.model.variant == Variant::ASDRNN);
    CHECK(cfg.learning_rate == 0.001);
    CHECK(cfg.epochs == 9);
    CHECK(cfg.seed == 42);
    CHECK(cfg.model.slice_length == 6);
    // untouched keys keep their defaults
    CHECK(cfg.batch_size == 32);
    CHECK(cfg.l2_factor == 0.0005);

    {
        std::ofstream f(path);
        f << "momentum = 0.9\n";
    }
    CHECK_THROWS_AS(parse_kv_file(path), ConfigError);
    auto kv2 = std::map<std::string, std::string>{};
    CHECK_THROWS_AS(apply_overrides(kv2, {"nonsense=1"}), ConfigError);
    CHECK_THROWS_AS(apply_overrides(kv2, {"no_equals_sign"}), ConfigError);
    kv2 = {{"batch_size", "-3"}};
    CHECK_THROWS_AS(train_config_from_kv(kv2), ConfigError);
    kv2 = {{"variant", "LSTM"}};
    CHECK_THROWS_AS(train_config_from_kv(kv2), ConfigError);
}

TEST_CASE("training pool missing a class fails loudly under loso") {
    Manifest m = small_dataset();
    // strip ADHD from one site so its complement still has both classes but
    // the fold holding out the other site trains on a single class
    Manifest skew;
    for (const auto& r : m.records) {
        if (r.site == m.records[0].site && r.label == ClassLabel::HC) continue;
        skew.records.push_back(r);
    }
    // remove HC entirely from every training pool
    Manifest adhd_only;
    for (const auto& r : m.records)
        if (r.label == ClassLabel::ADHD) adhd_only.records.push_back(r);
    TrainConfig cfg = fast_config();
    cfg.epochs = 1;
    std::vector<std::size_t> rois = {0, 1};
    CHECK_THROWS_AS(loso_accuracy(adhd_only, rois, cfg), DataError);
}
