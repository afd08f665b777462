// roirank: ROI-ranking experiment CLI.
//
// Subcommands: gen-synthetic, validate, train, rank-roi, sweep, compare,
// report, flags. Exit codes: 0 ok, 1 usage/config, 2 data, 3 runtime.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "roirank/checkpoint.hpp"
#include "roirank/config_file.hpp"
#include "roirank/report.hpp"
#include "roirank/synthetic.hpp"
#include "roirank/thread_pool.hpp"

namespace fs = std::filesystem;
using namespace roirank;

namespace {

std::size_t resolve_jobs(std::size_t cli_jobs) {
    if (cli_jobs > 0) return cli_jobs;
    if (const char* env = std::getenv("ROIRANKNET_JOBS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return default_jobs();
}

std::vector<std::size_t> parse_index_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<std::size_t>(std::stoull(tok)));
    }
    return out;
}

TrainConfig load_train_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = parse_kv_file(config_path);
    apply_overrides(kv, overrides);
    return train_config_from_kv(kv);
}

std::vector<std::size_t> all_rois(const Manifest& m) {
    std::vector<std::size_t> rois(m.records.front().n_rois());
    for (std::size_t i = 0; i < rois.size(); ++i) rois[i] = i;
    return rois;
}

struct CommonOpts {
    std::string config_path;
    std::string manifest_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::size_t jobs = 0;
    std::string format = "plotdata";
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_manifest = true) {
    cmd->add_option("--config", opts.config_path,
                    "Experiment configuration file (key = value)");
    if (needs_manifest) {
        cmd->add_option("--manifest", opts.manifest_path, "Dataset manifest file")
            ->required();
    }
    cmd->add_option("--out-dir", opts.out_dir, "Output directory");
    cmd->add_option("--set", opts.overrides,
                    "Config override key=value (repeatable)");
    cmd->add_option("--jobs", opts.jobs,
                    "Worker threads (default: ROIRANKNET_JOBS or core count)");
    cmd->add_option("--format", opts.format, "Report format: table or plotdata")
        ->check(CLI::IsMember({"table", "plotdata"}));
}

int run(int argc, char** argv) {
    CLI::App app{"ROI-ranking classifiers for site-grouped ROI time series"};
    app.require_subcommand(1);

    // gen-synthetic
    auto* gen = app.add_subcommand(
        "gen-synthetic", "Generate a synthetic dataset with planted ROIs");
    SyntheticSpec spec;
    std::string planted_str, gen_out = ".";
    gen->add_option("--sites", spec.n_sites, "Number of sites");
    gen->add_option("--per-class", spec.subjects_per_site_per_class,
                    "Subjects per site per class");
    gen->add_option("--time-len", spec.time_len, "Series length T");
    gen->add_option("--atlas-size", spec.n_rois, "ROIs per record");
    gen->add_option("--planted", planted_str,
                    "Comma-separated planted ROI indices");
    gen->add_option("--effect", spec.effect_strength,
                    "Planted effect strength");
    gen->add_option("--site-shift", spec.site_shift_scale,
                    "Site amplitude/offset shift scale");
    gen->add_option("--seed", spec.seed, "Generator seed");
    gen->add_option("--out-dir", gen_out, "Output directory")->required();

    // validate
    auto* val = app.add_subcommand("validate", "Validate a dataset manifest");
    std::string val_manifest;
    val->add_option("--manifest", val_manifest, "Dataset manifest file")
        ->required();

    // train
    auto* tr = app.add_subcommand("train", "Train one model on a manifest");
    CommonOpts tr_opts;
    add_common(tr, tr_opts);
    std::string tr_subset, tr_save;
    tr->add_option("--roi-subset", tr_subset,
                   "Comma-separated ordered ROI indices (default: all)");
    tr->add_option("--save-model", tr_save, "Write a checkpoint to this path");

    // rank-roi
    auto* rank = app.add_subcommand(
        "rank-roi", "Rank ROIs by single-ROI LOSO accuracy");
    CommonOpts rank_opts;
    add_common(rank, rank_opts);
    std::size_t atlas_size = 0;
    std::string candidates_str;
    rank->add_option("--atlas-size", atlas_size,
                     "Reduced-atlas mode: rank only the first K ROIs");
    rank->add_option("--candidates", candidates_str,
                     "Comma-separated explicit candidate ROI indices");

    // sweep
    auto* sw = app.add_subcommand(
        "sweep", "Top-k / reverse-k sweep over a stored ranking");
    CommonOpts sw_opts;
    add_common(sw, sw_opts);
    std::string sw_ranking, sw_direction = "top";
    std::size_t sw_kmax = 20;
    sw->add_option("--ranking", sw_ranking, "Ranking plotdata file")->required();
    sw->add_option("--direction", sw_direction, "top or reverse")
        ->check(CLI::IsMember({"top", "reverse"}));
    sw->add_option("--k-max", sw_kmax, "Largest ROI subset size");

    // compare
    auto* cmp = app.add_subcommand(
        "compare", "Run top-k sweeps for several model variants");
    CommonOpts cmp_opts;
    add_common(cmp, cmp_opts);
    std::string cmp_ranking, cmp_variants = "SCCNN_RNN,ASCRNN,ASDRNN,ASSRNN";
    std::size_t cmp_kmax = 20;
    cmp->add_option("--ranking", cmp_ranking, "Ranking plotdata file")
        ->required();
    cmp->add_option("--variants", cmp_variants,
                    "Comma-separated variant names");
    cmp->add_option("--k-max", cmp_kmax, "Largest ROI subset size");

    // report
    auto* rep = app.add_subcommand(
        "report", "Re-render a stored plotdata report");
    std::string rep_in, rep_out, rep_format = "table";
    rep->add_option("--in", rep_in, "Input plotdata file")->required();
    rep->add_option("--out", rep_out, "Output file")->required();
    rep->add_option("--format", rep_format, "Output format: table or plotdata")
        ->check(CLI::IsMember({"table", "plotdata"}));

    // flags: machine-readable registry of every documented option
    auto* flags = app.add_subcommand(
        "flags", "List every subcommand's flags (the flag registry)");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        for (std::size_t r : parse_index_list(planted_str)) {
            spec.planted_rois.insert(r);
        }
        Manifest m = gen_synthetic(spec);
        save_manifest(m, gen_out);
        std::cout << "wrote " << m.size() << " subjects ("
                  << spec.n_rois << " ROIs, T=" << spec.time_len << ") to "
                  << gen_out << "\n";
        return 0;
    }

    if (val->parsed()) {
        Manifest m = load_manifest(val_manifest);
        ValidationReport report = validate_dataset(m);
        for (const auto& v : report.violations) {
            std::cout << "violation: " << v << "\n";
        }
        for (const auto& w : report.warnings) {
            std::cout << "warning: " << w << "\n";
        }
        std::cout << (report.clean() ? "ok: " : "failed: ") << m.size()
                  << " subjects, " << m.sites().size() << " sites\n";
        return report.clean() ? 0 : 2;
    }

    if (tr->parsed()) {
        TrainConfig cfg = load_train_config(tr_opts.config_path, tr_opts.overrides);
        Manifest m = load_manifest(tr_opts.manifest_path);
        std::vector<std::size_t> subset =
            tr_subset.empty() ? all_rois(m) : parse_index_list(tr_subset);
        std::vector<const SubjectRecord*> records;
        for (const auto& r : m.records) records.push_back(&r);
        Model model(cfg.model, mix_seed(cfg.seed, "train"));
        TrainResult result = train(model, records, subset, cfg);
        fs::create_directories(tr_opts.out_dir);
        std::ofstream os(fs::path(tr_opts.out_dir) / "loss_trace.csv");
        os << "# kind = loss_trace\nx,y\n";
        os.precision(17);
        for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
            os << i << "," << result.loss_trace[i] << "\n";
        }
        if (!tr_save.empty()) save_checkpoint(tr_save, model, subset);
        std::cout << "final_train_accuracy " << result.final_train_accuracy
                  << "\n";
        return 0;
    }

    if (rank->parsed()) {
        TrainConfig cfg =
            load_train_config(rank_opts.config_path, rank_opts.overrides);
        Manifest m = load_manifest(rank_opts.manifest_path);
        std::vector<std::size_t> candidates;
        if (!candidates_str.empty()) {
            candidates = parse_index_list(candidates_str);
        } else if (atlas_size > 0) {
            candidates.resize(atlas_size);
            for (std::size_t i = 0; i < atlas_size; ++i) candidates[i] = i;
        }
        RankingResult ranking = rank_single_roi(m, cfg, candidates,
                                                resolve_jobs(rank_opts.jobs));
        fs::create_directories(rank_opts.out_dir);
        export_report(ranking, (fs::path(rank_opts.out_dir) / "ranking.csv").string(),
                      format_from_name(rank_opts.format));
        std::cout << "ranked " << ranking.rank_order.size() << " ROIs; best roi "
                  << ranking.rank_order.front() << "\n";
        return 0;
    }

    if (sw->parsed()) {
        TrainConfig cfg = load_train_config(sw_opts.config_path, sw_opts.overrides);
        Manifest m = load_manifest(sw_opts.manifest_path);
        RankingResult ranking = load_ranking(sw_ranking);
        SweepResult result =
            topk_sweep(m, ranking, sw_kmax, cfg,
                       direction_from_name(sw_direction), resolve_jobs(sw_opts.jobs));
        fs::create_directories(sw_opts.out_dir);
        const std::string name = "sweep_" + sw_direction + ".csv";
        export_report(result, (fs::path(sw_opts.out_dir) / name).string(),
                      format_from_name(sw_opts.format));
        auto [bk, ba] = result.best();
        std::cout << "sweep " << sw_direction << " best k=" << bk
                  << " accuracy=" << ba << "\n";
        return 0;
    }

    if (cmp->parsed()) {
        TrainConfig cfg = load_train_config(cmp_opts.config_path, cmp_opts.overrides);
        Manifest m = load_manifest(cmp_opts.manifest_path);
        RankingResult ranking = load_ranking(cmp_ranking);
        std::vector<ModelConfig> variants;
        {
            std::istringstream ss(cmp_variants);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                ModelConfig mc = cfg.model;
                mc.variant = variant_from_name(tok);
                variants.push_back(mc);
            }
        }
        auto results = model_comparison(m, ranking, variants, cmp_kmax, cfg,
                                        resolve_jobs(cmp_opts.jobs));
        fs::create_directories(cmp_opts.out_dir);
        std::ofstream summary(fs::path(cmp_opts.out_dir) / "comparison.txt");
        summary << "variant  best_accuracy(best_k)\n";
        summary.precision(17);
        for (const auto& r : results) {
            const std::string name =
                "sweep_" + variant_name(r.variant) + ".csv";
            export_report(r.sweep, (fs::path(cmp_opts.out_dir) / name).string(),
                          format_from_name(cmp_opts.format));
            summary << variant_name(r.variant) << "  " << r.best_accuracy << "("
                    << r.best_k << ")\n";
            std::cout << variant_name(r.variant) << " best " << r.best_accuracy
                      << " at k=" << r.best_k << "\n";
        }
        return 0;
    }

    if (rep->parsed()) {
        Plotdata pd = parse_plotdata(rep_in);
        if (rep_format == "plotdata") {
            std::ofstream os(rep_out);
            if (!os) throw DataError("cannot write " + rep_out);
            for (const auto& [k, v] : pd.metadata) {
                os << "# " << k << " = " << v << "\n";
            }
            os << "x,y\n";
            os.precision(17);
            for (const auto& [x, y] : pd.rows) os << x << "," << y << "\n";
        } else {
            std::ofstream os(rep_out);
            if (!os) throw DataError("cannot write " + rep_out);
            os << "Report";
            if (pd.metadata.count("kind")) os << " (" << pd.metadata["kind"] << ")";
            os << "\n======\n";
            for (const auto& [k, v] : pd.metadata) os << k << ": " << v << "\n";
            os << "\nx  y\n";
            os.precision(17);
            for (const auto& [x, y] : pd.rows) os << x << "  " << y << "\n";
        }
        return 0;
    }

    if (flags->parsed()) {
        auto all = app.get_subcommands([](const CLI::App*) { return true; });
        for (const CLI::App* sub : all) {
            for (const CLI::Option* opt : sub->get_options()) {
                if (opt->get_name() == "--help") continue;
                std::cout << sub->get_name() << " " << opt->get_name() << "\n";
            }
        }
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
