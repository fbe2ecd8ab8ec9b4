// tailspectra command line: certify exponential tail decay from the analytic
// structure of a Laplace-Stieltjes transform, verify the extremal-function
// construction, and cross-validate against Monte Carlo and closed forms.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailspectra/runner.hpp"
#include "tailspectra/version.hpp"

namespace {

struct DistFlags {
    std::optional<double> rho, mu, p, mu1, mu2, q;
    std::optional<int> k;

    void attach(CLI::App* cmd) {
        cmd->add_option("--rho", rho, "traffic intensity (md1_sojourn, md1_queue_pgf)");
        cmd->add_option("--mu", mu, "rate (exponential, erlang)");
        cmd->add_option("--k", k, "shape (erlang)");
        cmd->add_option("--p", p, "mixing weight (hyperexponential)");
        cmd->add_option("--mu1", mu1, "first rate (hyperexponential)");
        cmd->add_option("--mu2", mu2, "second rate (hyperexponential)");
        cmd->add_option("--q", q, "success parameter (geometric)");
    }

    void fold_into(tailspectra::ParamMap& params) const {
        if (rho) params["rho"] = *rho;
        if (mu) params["mu"] = *mu;
        if (k) params["k"] = *k;
        if (p) params["p"] = *p;
        if (mu1) params["mu1"] = *mu1;
        if (mu2) params["mu2"] = *mu2;
        if (q) params["q"] = *q;
    }
};

}  // namespace

int main(int argc, char** argv) {
    using tailspectra::RunConfig;

    CLI::App app{"tailspectra: exponential tail-decay certification from transform poles"};
    app.set_version_flag("--version", std::string(tailspectra::kVersion));
    app.require_subcommand(1);
    app.fallthrough();  // lets --config appear after the subcommand name

    RunConfig config;
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file (flags override its fields)")
        ->check(CLI::ExistingFile);

    DistFlags dist_flags;
    std::string dist, spec_file, out_dir;
    std::optional<double> omega_single, lambda;
    std::vector<double> omega_list;
    bool emit_csv = false, dump_samples = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory for reports");
        cmd->add_flag("--csv", emit_csv, "also emit CSV curve files");
    };
    auto add_spec = [&](CLI::App* cmd) {
        cmd->add_option("--dist", dist,
                        "catalog name: exponential, erlang, hyperexponential, md1_sojourn, "
                        "md1_queue_pgf, geometric, deterministic");
        cmd->add_option("--spec-file", spec_file, "JSON TransformSpec/PgfSpec")
            ->check(CLI::ExistingFile);
        dist_flags.attach(cmd);
    };

    auto* analyze = app.add_subcommand("analyze", "full decay-rate certificate for one spec");
    add_spec(analyze);
    add_common(analyze);
    analyze->add_option("--omega", omega_single, "extremal-function parameter (default: smallest passing)");
    analyze->add_option("--lambda", lambda, "equivalent to --omega 2*pi/lambda");

    auto* verify = app.add_subcommand("verify", "grid-check the construction inequalities");
    add_common(verify);
    verify->add_option("--omega", omega_list, "omega values to check (repeatable)");
    verify->add_option("--K", config.K, "odd construction order (default 3)");

    auto* audit = app.add_subcommand("audit", "lattice-sum audit of the quartic closed form");
    add_common(audit);
    audit->add_option("--t", config.t, "audit point (non-integer)");
    audit->add_option("--K", config.K, "odd construction order (default 3)");
    audit->add_option("--N", config.N, "direct-sum truncation (>= 1e4)");

    auto* simulate = app.add_subcommand("simulate", "M/D/1 sojourn Monte Carlo + slope estimate");
    add_common(simulate);
    simulate->add_option("--rho", dist_flags.rho, "traffic intensity");
    simulate->add_option("--seed", config.seed, "RNG seed");
    simulate->add_option("--n", config.n_samples, "samples after warm-up");
    simulate->add_flag("--dump-samples", dump_samples, "write binary sample dump");

    auto* counter = app.add_subcommand("counterexample", "staircase tail with no decay limit");
    counter->set_help_flag("--help", "print help");  // frees -h / --h for the base
    add_common(counter);
    counter->add_option("--h", config.h, "base h >= 2");
    counter->add_option("--sigma0", config.sigma0, "decay parameter (< 0)");
    counter->add_option("--n-max", config.n_max, "steps of the c recursion");

    auto* polemap = app.add_subcommand("polemap", "pole locations over a rectangle (CSV)");
    add_spec(polemap);
    add_common(polemap);
    std::vector<double> rect;
    polemap->add_option("--rect", rect, "re_min re_max im_min im_max")->expected(4);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            config.apply_json(nlohmann::json::parse(in));
        }
    } catch (const std::exception& e) {
        std::cerr << "usage error: bad config file: " << e.what() << "\n";
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    config.command = sub->get_name();
    if (!dist.empty()) config.dist = dist;
    if (!spec_file.empty()) config.spec_file = spec_file;
    if (!out_dir.empty()) config.out_dir = out_dir;
    dist_flags.fold_into(config.dist_params);
    if (omega_single) config.omega = omega_single;
    if (lambda) config.lambda = lambda;
    if (!omega_list.empty()) config.omega_list = omega_list;
    if (emit_csv) config.emit_csv = true;
    if (dump_samples) config.dump_samples = true;
    if (config.command == "simulate" && config.dist.empty()) config.dist = "md1_sojourn";

    return tailspectra::run(config);
}
