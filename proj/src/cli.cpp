#include "rks/cli.hpp"

#include "rks/errors.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>

namespace rks {

namespace {

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    f << content;
    if (!f)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::optional<unsigned> env_threads()
{
    const char* raw = std::getenv("RKS_THREADS");
    if (!raw || !*raw)
        return std::nullopt;
    char* end = nullptr;
    const unsigned long v = std::strtoul(raw, &end, 10);
    if (*end != '\0' || v > 4096)
        throw ConfigError(0, "RKS_THREADS", std::string("expected a thread count, found '") + raw + "'");
    return static_cast<unsigned>(v);
}

struct Context {
    LoadedConfig config;
    std::filesystem::path out_dir;
};

Context load(const CliOptions& options)
{
    Context c{load_config(options.config, options.seed), {}};
    if (options.threads)
        c.config.experiment.threads = *options.threads;
    else if (auto t = env_threads())
        c.config.experiment.threads = *t;
    c.out_dir = options.out_dir.value_or(c.config.output.dir);
    return c;
}

void write_manifest(const Context& c, const std::string& command, std::vector<std::string> outputs)
{
    RunManifest m;
    m.command = command;
    m.config_digest = c.config.digest;
    m.timestamp = utc_timestamp();
    m.outputs = std::move(outputs);
    write_file(c.out_dir / "manifest.json", m.to_json().dump(2) + "\n");
}

template <class Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_infeasible;
    }
}

nlohmann::json setup_json(const ExperimentSetup& s)
{
    KernelParams kp = s.kernel.params();
    kp.decay_amplitude = s.kernel.decay_amplitude();
    nlohmann::json k = kernel_params_to_json(kp);
    k["family"] = std::string(to_string(s.kernel.family()));
    return {{"kernel", k},
            {"lattice", {{"gap", s.lattice.gap()}, {"half_width", s.lattice.half_width()}, {"nodes", s.lattice.size()}}},
            {"R", s.config.R},
            {"delta", s.config.delta},
            {"k", s.kc.k},
            {"k_grid_points_per_axis", s.kc.points_per_axis},
            {"B_emp", s.B_emp},
            {"B_emp_trials", s.config.frame_trials},
            {"B_emp_safety", s.config.frame_safety},
            {"N0", s.ctx.N0},
            {"generator", "gaussian-coefficients"}};
}

} // namespace

nlohmann::json RunManifest::to_json() const
{
    return {{"command", command},
            {"config_digest", config_digest},
            {"tool_version", tool_version},
            {"timestamp", timestamp},
            {"outputs", outputs}};
}

nlohmann::json constants_json(const ExperimentSetup& s, const std::string& digest)
{
    const BoundContext& ctx = s.ctx;
    const ChainingConstants cc = chaining_constants(ctx);
    nlohmann::json j;
    j["config_digest"] = digest;
    j["setup"] = setup_json(s);
    j["k"] = ctx.k;
    j["k_argmax"] = {s.kc.argmax[0], s.kc.argmax[1]};
    j["D"] = cc.D;
    j["C"] = ctx.C;
    j["alpha"] = ctx.alpha;
    j["w_alpha"] = w_alpha(ctx.alpha, ctx.p_conj(), ctx.n);
    j["C1"] = cc.C1;
    j["c1"] = cc.c1;
    j["c2"] = cc.c2;
    j["log_a"] = cc.log_a;
    j["b"] = cc.b;
    j["gate_threshold"] = gate_threshold(ctx.n);
    // The first chaining step suggests N(1/2) and 3/(4 k^p) in place of the
    // displayed N(1/(2D)) and 3/(4k); both readings are reported.
    j["variants"] = {{"log_a_with_N_half", cc.log_a_half}, {"b_with_k_pow_p", cc.b_kp}};

    nlohmann::json grid = nlohmann::json::array();
    for (double eps : {1.0, 0.5, 0.25, 0.1, 0.05, 0.01}) {
        nlohmann::json row = {{"eps", eps}, {"d_eps", covering_dimension(ctx, eps)}};
        if (eps < 8.0 * cc.D) {
            const CoveringCount n = covering_count(ctx, eps);
            row["log_N"] = n.log_value;
        } else {
            row["log_N"] = nullptr;
        }
        grid.push_back(row);
    }
    j["covering"] = grid;

    nlohmann::json trunc = nlohmann::json::array();
    for (double eps : s.config.truncation_eps)
        trunc.push_back({{"eps", eps}, {"N", truncation_N(ctx, eps, 1.0)}});
    j["truncation_N"] = trunc;

    std::vector<double> mus;
    for (int i = 1; i <= 9; ++i)
        if (0.1 * i < 1.0 - ctx.delta)
            mus.push_back(0.1 * i);
    mus.push_back(s.config.mu);
    std::sort(mus.begin(), mus.end());
    mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
    nlohmann::json minr = nlohmann::json::array();
    for (double mu : mus)
        minr.push_back({{"mu", mu}, {"min_r", min_sample_size(ctx, mu)}});
    j["min_sample_size"] = minr;
    j["success_bound"] = to_json(success_probability(ctx, s.config.r, s.config.mu));
    j["success_bound"]["r"] = s.config.r;
    j["success_bound"]["mu"] = s.config.mu;
    return j;
}

int cmd_constants(const CliOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const Context c = load(options);
        const ExperimentSetup s = prepare(c.config.experiment);
        const nlohmann::json j = constants_json(s, c.config.digest);
        const std::string name = c.config.output.constants_json;
        write_file(c.out_dir / name, j.dump(2) + "\n");
        write_manifest(c, "constants", {name});
        out << "k = " << format_double(j["k"].get<double>()) << ", D = " << format_double(j["D"].get<double>())
            << ", log a = " << format_double(j["log_a"].get<double>()) << ", b = " << format_double(j["b"].get<double>())
            << "\nwrote " << (c.out_dir / name).string() << "\n";
        return static_cast<int>(exit_ok);
    });
}

int cmd_verify(const CliOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const Context c = load(options);
        const ExperimentSetup s = prepare(c.config.experiment);
        const auto diags = run_diagnostics(s);

        std::string table = "# config_digest: " + c.config.digest + "\n";
        char line[256];
        std::snprintf(line, sizeof line, "%-26s %-6s %-24s %-10s\n", "check", "status", "value", "threshold");
        table += line;
        std::vector<std::string> failing;
        for (const Diagnostic& d : diags) {
            std::snprintf(line, sizeof line, "%-26s %-6s %-24s %-10s ", d.name.c_str(), d.passed ? "PASS" : "FAIL",
                          format_double(d.value).c_str(), format_double(d.threshold).c_str());
            table += line + d.detail + "\n";
            if (!d.passed)
                failing.push_back(d.name);
        }
        const std::string name = c.config.output.verify_txt;
        write_file(c.out_dir / name, table);
        write_manifest(c, "verify", {name});
        out << table;
        if (!failing.empty()) {
            err << "failing checks:";
            for (const auto& f : failing)
                err << " " << f;
            err << "\n";
            return static_cast<int>(exit_diagnostic_failure);
        }
        return static_cast<int>(exit_ok);
    });
}

int cmd_sample(const CliOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const Context c = load(options);
        const ExperimentConfig& cfg = c.config.experiment;
        const ExperimentSetup s = prepare(cfg);
        const std::string& digest = c.config.digest;

        nlohmann::json report;
        report["config_digest"] = digest;
        report["setup"] = setup_json(s);
        std::vector<std::string> outputs;

        if (!cfg.sweep_r.empty() || !cfg.sweep_mu.empty()) {
            std::vector<TrialReport> reports;
            for (int r : cfg.sweep_r)
                reports.push_back(failure_rate_experiment(s, r, cfg.mu));
            for (double mu : cfg.sweep_mu)
                reports.push_back(failure_rate_experiment(s, cfg.r, mu));
            nlohmann::json sweep = nlohmann::json::array();
            for (const TrialReport& r : reports) {
                sweep.push_back(to_json(r));
                out << "r = " << r.r << ", mu = " << format_double(r.mu) << ": failures " << r.failures << "/"
                    << r.trials << ", log bound " << format_double(r.bound.log_failure) << "\n";
            }
            report["sweep"] = sweep;
            write_file(c.out_dir / c.config.output.sweep_csv, sweep_csv(reports, digest));
            outputs.push_back(c.config.output.sweep_csv);
        } else {
            const TrialReport r = failure_rate_experiment(s);
            report["trials"] = to_json(r);
            write_file(c.out_dir / c.config.output.trials_csv, trial_csv(r, digest));
            outputs.push_back(c.config.output.trials_csv);
            out << "r = " << r.r << ", mu = " << format_double(r.mu) << ": failures " << r.failures << "/" << r.trials
                << " (Wilson 95% [" << format_double(r.wilson.lo) << ", " << format_double(r.wilson.hi)
                << "]), log bound " << format_double(r.bound.log_failure) << (r.bound.vacuous ? " (vacuous)" : "")
                << "\n";
        }

        if (c.config.output.truncation) {
            nlohmann::json trunc = nlohmann::json::array();
            for (double eps : cfg.truncation_eps) {
                const TruncationReport t = truncation_experiment(s, eps);
                trunc.push_back(to_json(t));
                out << "truncation eps = " << format_double(eps) << ": N = " << format_double(t.N)
                    << ", max error/eps = " << format_double(t.max_ratio) << "\n";
            }
            report["truncation"] = trunc;
        }

        write_file(c.out_dir / c.config.output.report_json, report.dump(2) + "\n");
        outputs.push_back(c.config.output.report_json);
        write_manifest(c, "sample", outputs);
        return static_cast<int>(exit_ok);
    });
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Random sampling in reproducing kernel spaces: constants, diagnostics and Monte Carlo runs", "rks"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CliOptions options;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir;
    std::vector<CLI::App*> subs;
    for (const char* name : {"constants", "verify", "sample"}) {
        const char* help = std::string_view(name) == "constants" ? "write every bound constant as JSON"
                           : std::string_view(name) == "verify"  ? "run the kernel and space diagnostics"
                                                                  : "run the Monte Carlo sampling experiment";
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", options.config, "experiment config file")->required();
        sub->add_option("--out-dir", out_dir, "output directory (overrides [output].dir)");
        sub->add_option("--seed", seed, "master seed (overrides [experiment].seed)");
        sub->add_option("--threads", threads, "worker threads; RKS_THREADS is the fallback");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? static_cast<int>(exit_ok) : static_cast<int>(exit_config_error);
    }

    CLI::App* chosen = app.get_subcommands().front();
    if (chosen->count("--out-dir"))
        options.out_dir = out_dir;
    if (chosen->count("--seed"))
        options.seed = seed;
    if (chosen->count("--threads"))
        options.threads = threads;

    const std::string name = chosen->get_name();
    if (name == "constants")
        return cmd_constants(options, out, err);
    if (name == "verify")
        return cmd_verify(options, out, err);
    return cmd_sample(options, out, err);
}

} // namespace rks
