// End-to-end CLI tests; drives the installed binary through a shell.
#include <doctest.h>

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "roirank/dataset.hpp"
#include "roirank/report.hpp"

using namespace roirank;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("ROIRANK_CLI");
    REQUIRE_MESSAGE(p != nullptr, "ROIRANK_CLI must point at the binary");
    return p;
}

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path log = scratch / "cli_output.log";
    const std::string cmd =
        "\"" + cli_path() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream f(log);
    r.output.assign(std::istreambuf_iterator<char>(f),
                    std::istreambuf_iterator<char>());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE_MESSAGE(f.good(), "missing file: " << p.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("roirank_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Small dataset shared by the workflow tests.
void gen_tiny(const TempDir& dir, const std::string& extra = "") {
    auto r = run_cli("gen-synthetic --sites 2 --per-class 3 --atlas-size 4 "
                     "--time-len 20 --planted 1 --effect 3 --seed 11 "
                     "--out-dir \"" + (dir.path / "data").string() + "\" " + extra,
                     dir.path);
    REQUIRE(r.exit_code == 0);
}

std::string tiny_manifest(const TempDir& dir) {
    return (dir.path / "data" / "manifest.csv").string();
}

const std::string kFastSets =
    " --set epochs=1 --set batch_size=4 --set seed=3";

}  // namespace

TEST_CASE("gen-synthetic writes the advertised number of subjects") {
    TempDir dir;
    auto r = run_cli("gen-synthetic --sites 3 --per-class 20 --atlas-size 8 "
                     "--time-len 20 --seed 1 --out-dir \"" +
                         (dir.path / "data").string() + "\"",
                     dir.path);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("120 subjects") != std::string::npos);
    Manifest m = load_manifest(tiny_manifest(dir));
    CHECK(m.size() == 120);
    CHECK(m.sites().size() == 3);

    auto v = run_cli("validate --manifest \"" + tiny_manifest(dir) + "\"",
                     dir.path);
    CHECK(v.exit_code == 0);
    CHECK(v.output.find("ok:") != std::string::npos);
}

TEST_CASE("validate reports violations with exit code 2") {
    TempDir dir;
    gen_tiny(dir);
    // corrupt one series file: wrong atlas size
    Manifest m = load_manifest(tiny_manifest(dir));
    std::ofstream f(dir.path / "data" / m.records[0].series_path);
    f << "2 20\n";
    for (int row = 0; row < 2; ++row) {
        for (int t = 0; t < 20; ++t) f << " 0.5";
        f << "\n";
    }
    f.close();
    auto r = run_cli("validate --manifest \"" + tiny_manifest(dir) + "\"",
                     dir.path);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("violation") != std::string::npos);
}

TEST_CASE("train writes a loss trace and an optional checkpoint") {
    TempDir dir;
    gen_tiny(dir);
    const std::string out = (dir.path / "run").string();
    auto r = run_cli("train --manifest \"" + tiny_manifest(dir) + "\"" +
                         kFastSets + " --out-dir \"" + out +
                         "\" --save-model \"" + out + "/model.bin\"",
                     dir.path);
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    CHECK(r.output.find("final_train_accuracy") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "loss_trace.csv"));
    CHECK(fs::exists(fs::path(out) / "model.bin"));
    std::string trace = slurp(fs::path(out) / "loss_trace.csv");
    CHECK(trace.find("x,y") != std::string::npos);
}

TEST_CASE("rank and sweep workflow produces consistent reports") {
    TempDir dir;
    gen_tiny(dir);
    const std::string out = (dir.path / "run").string();
    auto r = run_cli("rank-roi --manifest \"" + tiny_manifest(dir) + "\"" +
                         kFastSets + " --jobs 1 --out-dir \"" + out + "\"",
                     dir.path);
    REQUIRE_MESSAGE(r.exit_code == 0, r.output);
    const fs::path ranking_path = fs::path(out) / "ranking.csv";
    RankingResult ranking = load_ranking(ranking_path.string());
    CHECK(ranking.per_roi_accuracy.size() == 4);

    auto sw = run_cli("sweep --manifest \"" + tiny_manifest(dir) +
                          "\" --ranking \"" + ranking_path.string() + "\"" +
                          kFastSets + " --jobs 1 --k-max 2 --direction top "
                          "--out-dir \"" + out + "\"",
                      dir.path);
    REQUIRE_MESSAGE(sw.exit_code == 0, sw.output);
    Plotdata pd = parse_plotdata((fs::path(out) / "sweep_top.csv").string());
    CHECK(pd.rows.size() == 2);
    CHECK(pd.metadata.at("direction") == "top");

    // report re-render keeps the rows
    auto rep = run_cli("report --in \"" + (fs::path(out) / "sweep_top.csv").string() +
                           "\" --out \"" + (fs::path(out) / "sweep_top.txt").string() +
                           "\" --format table",
                       dir.path);
    CHECK(rep.exit_code == 0);
    CHECK(slurp(fs::path(out) / "sweep_top.txt").find("direction") !=
          std::string::npos);
}

TEST_CASE("reports are byte-identical across reruns and job counts") {
    TempDir dir;
    gen_tiny(dir);
    auto run_rank = [&](const std::string& out, const std::string& jobs) {
        auto r = run_cli("rank-roi --manifest \"" + tiny_manifest(dir) + "\"" +
                             kFastSets + " --jobs " + jobs + " --out-dir \"" +
                             (dir.path / out).string() + "\"",
                         dir.path);
        REQUIRE_MESSAGE(r.exit_code == 0, r.output);
        return slurp(dir.path / out / "ranking.csv");
    };
    std::string a = run_rank("run_a", "1");
    std::string b = run_rank("run_b", "1");
    std::string c = run_rank("run_c", "8");
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("flags registry names every documented option") {
    TempDir dir;
    auto r = run_cli("flags", dir.path);
    REQUIRE(r.exit_code == 0);
    for (const std::string& expect :
         {"gen-synthetic --planted", "validate --manifest", "train --roi-subset",
          "train --save-model", "rank-roi --candidates", "rank-roi --atlas-size",
          "sweep --direction", "sweep --k-max", "compare --variants",
          "report --in", "report --out"}) {
        CAPTURE(expect);
        CHECK(r.output.find(expect) != std::string::npos);
    }
}

TEST_CASE("help output and the flag registry agree exactly") {
    TempDir dir;
    auto registry = run_cli("flags", dir.path);
    REQUIRE(registry.exit_code == 0);
    std::map<std::string, std::set<std::string>> by_sub;
    {
        std::istringstream ss(registry.output);
        std::string sub, opt;
        while (ss >> sub >> opt) by_sub[sub].insert(opt);
    }
    REQUIRE(by_sub.size() == 7);  // `flags` itself takes no options
    for (const auto& [sub, opts] : by_sub) {
        auto help = run_cli(sub + " --help", dir.path);
        REQUIRE(help.exit_code == 0);
        // every --token in the help text, minus --help itself
        std::set<std::string> in_help;
        for (std::size_t pos = help.output.find("--"); pos != std::string::npos;
             pos = help.output.find("--", pos + 2)) {
            std::size_t end = pos + 2;
            while (end < help.output.size() &&
                   (std::isalnum(static_cast<unsigned char>(help.output[end])) ||
                    help.output[end] == '-'))
                ++end;
            std::string tok = help.output.substr(pos, end - pos);
            if (tok != "--" && tok != "--help") in_help.insert(tok);
            pos = end - 2;
        }
        CAPTURE(sub);
        CHECK(in_help == opts);
    }
}

TEST_CASE("exit codes separate usage, data and config errors") {
    TempDir dir;
    gen_tiny(dir);
    // unknown subcommand / missing required option -> usage error
    CHECK(run_cli("definitely-not-a-subcommand", dir.path).exit_code != 0);
    CHECK(run_cli("validate", dir.path).exit_code != 0);
    // missing manifest file -> data error
    CHECK(run_cli("validate --manifest /nonexistent/manifest.csv", dir.path)
              .exit_code == 2);
    // unknown config key -> config error
    CHECK(run_cli("train --manifest \"" + tiny_manifest(dir) +
                      "\" --set bogus_key=1",
                  dir.path)
              .exit_code == 1);
    // invalid config value -> config error
    CHECK(run_cli("train --manifest \"" + tiny_manifest(dir) +
                      "\" --set batch_size=7",
                  dir.path)
              .exit_code == 1);
}
