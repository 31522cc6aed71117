#include "rks/cli.hpp"
#include "rks/config.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace rks;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(# small hermite run
[kernel]
name = "hermite"
dim = 1
rank = 5

[lattice]
half_width = 30.0

[experiment]
R = 4.0
delta = 0.2
mu = 0.5
r = 64
trials = 10
functions_per_trial = 2
seed = 99
frame_trials = 20
truncation_eps = [0.1]
truncation_members = 3
diagnostic_members = 5
moment_pairs = 3
moment_draws = 2000
bernstein_trials = 500

[output]
truncation = true
)";

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("rks_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const fs::path p = dir / "run.toml";
    std::ofstream(p) << text;
    return p;
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "rks");
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("constants: keys, determinism and manifest")
{
    const fs::path dir = scratch("constants");
    const fs::path cfg = write_config(dir, kSmall);
    const Result a = run({"constants", "--config", cfg.string(), "--out-dir", (dir / "a").string()});
    REQUIRE(a.code == 0);
    const Result b = run({"constants", "--config", cfg.string(), "--out-dir", (dir / "b").string()});
    REQUIRE(b.code == 0);
    const std::string ja = slurp(dir / "a" / "constants.json");
    CHECK(ja == slurp(dir / "b" / "constants.json"));

    const auto j = nlohmann::json::parse(ja);
    for (const char* key : {"k", "D", "w_alpha", "C1", "covering", "c1", "c2", "log_a", "b", "min_sample_size",
                            "truncation_N", "success_bound", "config_digest", "gate_threshold"})
        CHECK_MESSAGE(j.contains(key), key);
    CHECK(j["covering"][0].contains("d_eps"));
    CHECK(j["covering"][0].contains("log_N"));

    const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(m["command"] == "constants");
    CHECK(m["tool_version"] == kToolVersion);
    CHECK(m["config_digest"] == j["config_digest"]);
    CHECK(m["outputs"][0] == "constants.json");
}

TEST_CASE("delta = 1 is a config error naming delta")
{
    const fs::path dir = scratch("delta");
    const fs::path cfg = write_config(dir, replace(kSmall, "delta = 0.2", "delta = 1.0"));
    const Result r = run({"constants", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("delta") != std::string::npos);
    CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("missing kernel name is a config error")
{
    const fs::path dir = scratch("name");
    const fs::path cfg = write_config(dir, replace(kSmall, "name = \"hermite\"\n", ""));
    const Result r = run({"verify", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("kernel.name") != std::string::npos);
}

TEST_CASE("malformed input is a config error")
{
    const fs::path dir = scratch("malformed");
    for (const std::string& text : {replace(kSmall, "rank = 5", "rank = five"), replace(kSmall, "rank = 5", "rnak = 5"),
                                    replace(kSmall, "rank = 5", "rank = 5\nrank = 6")}) {
        const fs::path cfg = write_config(dir, text);
        CHECK(run({"constants", "--config", cfg.string(), "--out-dir", dir.string()}).code == 2);
    }
    CHECK(run({"constants", "--config", (dir / "absent.toml").string()}).code == 2);
    CHECK(run({"constants"}).code == 2);
    CHECK(run({"bogus", "--config", "x"}).code == 2);
}

TEST_CASE("infeasible decay exponent exits 3")
{
    const fs::path dir = scratch("alpha");
    const fs::path cfg = write_config(dir, replace(kSmall, "rank = 5", "rank = 5\nalpha = 0.4"));
    CHECK(run({"constants", "--config", cfg.string(), "--out-dir", dir.string()}).code == 3);
}

TEST_CASE("verify passes, and fails on a halved decay constant")
{
    const fs::path dir = scratch("verify");
    const fs::path cfg = write_config(dir, kSmall);
    const Result ok = run({"constants", "--config", cfg.string(), "--out-dir", dir.string()});
    REQUIRE(ok.code == 0);
    const double C = nlohmann::json::parse(slurp(dir / "constants.json"))["C"].get<double>();

    const Result v = run({"verify", "--config", cfg.string(), "--out-dir", dir.string()});
    CHECK(v.code == 0);
    const std::string table = slurp(dir / "verify.txt");
    CHECK(table.find("FAIL") == std::string::npos);
    CHECK(table.find("decay_envelope") != std::string::npos);

    const fs::path bad = write_config(dir, replace(kSmall, "rank = 5", "rank = 5\ndecay_amplitude = " +
                                                                           format_double(C / 2)));
    const Result f = run({"verify", "--config", bad.string(), "--out-dir", dir.string()});
    CHECK(f.code == 1);
    CHECK(f.err.find("decay_envelope") != std::string::npos);
}

TEST_CASE("digest ignores ordering, spacing and comments")
{
    const std::string a = "[kernel]\nname = \"hermite\"\nrank = 5\n[experiment]\nR = 4.0\nseed = 7\n";
    const std::string b = "# reordered\n[experiment]\nseed=7\nR = 4.000\n\n[kernel]\nrank = 5 # five\nname = \"hermite\"\n";
    CHECK(ConfigDocument::parse(a).digest() == ConfigDocument::parse(b).digest());
    CHECK(ConfigDocument::parse(a).digest() != ConfigDocument::parse(replace(a, "seed = 7", "seed = 8")).digest());
    CHECK(ConfigDocument::parse(a).digest().size() == 64);
}

TEST_CASE("SHA-256 of a known string")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("seed override changes the digest")
{
    const fs::path dir = scratch("seed");
    const fs::path cfg = write_config(dir, kSmall);
    const LoadedConfig a = load_config(cfg);
    const LoadedConfig b = load_config(cfg, 100);
    CHECK(a.experiment.seed == 99);
    CHECK(b.experiment.seed == 100);
    CHECK(a.digest != b.digest);
}

TEST_CASE("sample writes one row per trial function and replays")
{
    const fs::path dir = scratch("sample");
    const fs::path cfg = write_config(dir, kSmall);
    const Result a = run({"sample", "--config", cfg.string(), "--out-dir", (dir / "a").string()});
    REQUIRE(a.code == 0);
    const Result b = run({"sample", "--config", cfg.string(), "--out-dir", (dir / "b").string(), "--threads", "3"});
    REQUIRE(b.code == 0);
    const std::string csv = slurp(dir / "a" / "trials.csv");
    CHECK(csv == slurp(dir / "b" / "trials.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 10 * 2);
    CHECK(csv.find("trial,func_seed,S,lower,upper,success\n") != std::string::npos);

    const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    CHECK(report["trials"]["trials"] == 10);
    CHECK(report["truncation"].size() == 1);
}

TEST_CASE("sweep mode writes one aggregate row per r")
{
    const fs::path dir = scratch("sweep");
    const fs::path cfg = write_config(dir, replace(replace(kSmall, "trials = 10", "trials = 4\nsweep_r = [32, 64, 128]"),
                                                   "truncation = true", "truncation = false"));
    REQUIRE(run({"sample", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const std::string csv = slurp(dir / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 3);
}
