#pragma once

// Orchestration shared by the CLI and tests: a RunConfig (flags or a JSON
// config file; flags win) drives one command and emits its artifacts.
// Exit status: 0 success; 2 when the input fails a theorem hypothesis
// (NotAPole, StripContaminated) -- with the diagnostic payload still written;
// 1 for usage or tool errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailspectra/reports.hpp"
#include "tailspectra/version.hpp"

namespace tailspectra {

struct RunConfig {
    std::string command;  // analyze | verify | audit | simulate | counterexample | polemap
    std::string dist;     // catalog name (transform or pgf)
    ParamMap dist_params;
    std::string spec_file;          // JSON TransformSpec/PgfSpec
    std::optional<double> omega;    // analyze
    std::optional<double> lambda;   // analyze (omega = 2 pi / lambda)
    std::vector<double> omega_list; // verify
    int K = 3;
    double t = 0.5;                 // audit
    long long N = 1000000;          // audit truncation
    std::uint64_t seed = 42;
    long long n_samples = 1000000;
    std::string out_dir = ".";
    bool emit_csv = false;
    bool dump_samples = false;
    // polemap rectangle
    double re_min = -20.0, re_max = 0.0, im_min = -40.0, im_max = 40.0;
    // counterexample
    int h = 2;
    double sigma0 = -1.0;
    int n_max = 4;

    json echo() const {
        json j;
        j["command"] = command;
        if (!dist.empty()) j["dist"] = dist;
        if (!dist_params.empty()) j["params"] = dist_params;
        if (!spec_file.empty()) j["spec_file"] = spec_file;
        if (omega) j["omega"] = *omega;
        if (lambda) j["lambda"] = *lambda;
        if (!omega_list.empty()) j["omega_list"] = omega_list;
        j["K"] = K;
        if (command == "audit") { j["t"] = t; j["N"] = N; }
        if (command == "simulate") { j["seed"] = seed; j["n"] = n_samples; }
        if (command == "polemap")
            j["rect"] = {re_min, re_max, im_min, im_max};
        if (command == "counterexample") { j["h"] = h; j["sigma0"] = sigma0; j["n_max"] = n_max; }
        j["csv"] = emit_csv;
        return j;
    }

    /// Fields present in the JSON object override the current values; used
    /// for --config files (flags are applied on top by the CLI).
    void apply_json(const json& j) {
        if (j.contains("command")) command = j.at("command").get<std::string>();
        if (j.contains("dist")) dist = j.at("dist").get<std::string>();
        if (j.contains("params")) dist_params = j.at("params").get<ParamMap>();
        for (const char* key : {"rho", "mu", "k", "p", "mu1", "mu2", "q"})
            if (j.contains(key)) dist_params[key] = j.at(key).get<double>();
        if (j.contains("spec_file")) spec_file = j.at("spec_file").get<std::string>();
        if (j.contains("omega")) {
            if (j.at("omega").is_array())
                omega_list = j.at("omega").get<std::vector<double>>();
            else
                omega = j.at("omega").get<double>();
        }
        if (j.contains("omega_list")) omega_list = j.at("omega_list").get<std::vector<double>>();
        if (j.contains("lambda")) lambda = j.at("lambda").get<double>();
        if (j.contains("K")) K = j.at("K").get<int>();
        if (j.contains("t")) t = j.at("t").get<double>();
        if (j.contains("N")) N = j.at("N").get<long long>();
        if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("n")) n_samples = j.at("n").get<long long>();
        if (j.contains("out")) out_dir = j.at("out").get<std::string>();
        if (j.contains("csv")) emit_csv = j.at("csv").get<bool>();
        if (j.contains("dump_samples")) dump_samples = j.at("dump_samples").get<bool>();
        if (j.contains("rect")) {
            auto r = j.at("rect");
            re_min = r.at(0).get<double>();
            re_max = r.at(1).get<double>();
            im_min = r.at(2).get<double>();
            im_max = r.at(3).get<double>();
        }
        if (j.contains("h")) h = j.at("h").get<int>();
        if (j.contains("sigma0")) sigma0 = j.at("sigma0").get<double>();
        if (j.contains("n_max")) n_max = j.at("n_max").get<int>();
    }
};

namespace detail {

inline json report_envelope(const RunConfig& config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kVersion;
    j["config"] = config.echo();
    return j;
}

struct ResolvedSpec {
    std::optional<TransformSpec> transform;
    std::optional<PgfSpec> pgf;
    std::string catalog_name;
};

inline ResolvedSpec resolve_spec(const RunConfig& config) {
    ResolvedSpec r;
    if (!config.spec_file.empty()) {
        std::ifstream in(config.spec_file);
        if (!in) throw BadParam("cannot read spec file: " + config.spec_file);
        json j = json::parse(in);
        std::string id = j.value("id", "custom");
        if (is_pgf_catalog_name(id) || j.contains("radius_bracket")) {
            r.pgf = pgf_from_json(j);
            r.catalog_name = r.pgf->id;
        } else {
            r.transform = transform_from_json(j);
            r.catalog_name = r.transform->id;
        }
        return r;
    }
    if (config.dist.empty()) throw BadParam("no --dist and no --spec-file given");
    if (is_pgf_catalog_name(config.dist)) {
        r.pgf = make_pgf_catalog(config.dist, config.dist_params);
    } else {
        r.transform = make_catalog(config.dist, config.dist_params);
    }
    r.catalog_name = config.dist;
    return r;
}

}  // namespace detail

/// Executes one command, writing artifacts under config.out_dir. Returns the
/// process exit status. Progress text goes to `out`, error text to `err`.
inline int run(const RunConfig& config, std::ostream& err = std::cerr,
               std::ostream& out = std::cout) {
    namespace fs = std::filesystem;
    try {
        fs::path dir(config.out_dir);
        if (!dir.empty()) fs::create_directories(dir);
        json envelope = detail::report_envelope(config);
        auto emit_json = [&](const std::string& base, const json& body) {
            json out = envelope;
            out["result"] = body;
            fs::path p = dir / (base + ".json");
            write_text_file(p, out.dump(2) + "\n");
            return p;
        };

        if (config.command == "analyze") {
            auto resolved = detail::resolve_spec(config);
            std::string base = report_basename("analyze", resolved.catalog_name, config.echo());
            std::optional<double> omega = config.omega;
            if (!omega && config.lambda) omega = 2.0 * kPi / *config.lambda;
            try {
                TailBoundReport rep = resolved.pgf ? discrete_decay(*resolved.pgf)
                                                   : analyze_tail(*resolved.transform, omega);
                emit_json(base, tail_report_to_json(rep));
                write_text_file(dir / (base + ".txt"), tail_report_to_text(rep));
                if (config.emit_csv) {
                    write_text_file(dir / (base + "-extremal.csv"),
                                    extremal_curve_csv(rep.omega, rep.K));
                    if (rep.spec_id == "exponential" || rep.spec_id == "erlang" ||
                        rep.spec_id == "hyperexponential") {
                        std::vector<double> grid;
                        for (double x = 0.0; x <= 60.0; x += 0.1) grid.push_back(x);
                        auto curve = closed_form_tail(rep.spec_id, rep.params, grid);
                        write_text_file(dir / (base + "-tail.csv"), curve_to_csv(curve));
                    }
                }
                out << tail_report_to_text(rep);
                return 0;
            } catch (const NotAPole& e) {
                json fail;
                fail["hypothesis_failure"] = "NotAPole";
                fail["message"] = e.what();
                emit_json(base, fail);
                err << "hypothesis failure (NotAPole): " << e.what() << "\n";
                return 2;
            } catch (const StripContaminated& e) {
                json fail;
                fail["hypothesis_failure"] = "StripContaminated";
                fail["message"] = e.what();
                emit_json(base, fail);
                err << "hypothesis failure (StripContaminated): " << e.what() << "\n";
                return 2;
            }
        }

        if (config.command == "verify") {
            std::vector<double> omegas = config.omega_list;
            if (omegas.empty() && config.omega) omegas.push_back(*config.omega);
            if (omegas.empty()) omegas.push_back(10.0);
            for (double omega : omegas) {
                json cfg = config.echo();
                cfg["omega_current"] = omega;
                std::string base = report_basename("verify", "K" + std::to_string(config.K), cfg);
                LemmaReport rep = verify_lemmas(omega, config.K);
                json doc = envelope;
                doc["result"] = lemma_report_to_json(rep);
                write_text_file(fs::path(config.out_dir) / (base + ".json"), doc.dump(2) + "\n");
                out << "omega=" << omega << " L1=" << rep.lemma1_pass
                          << " L2=" << rep.lemma2_pass << " L3=" << rep.lemma3_pass
                          << " L4=" << rep.lemma4_pass << " majorant=" << rep.majorant_pass
                          << " minorant=" << rep.minorant_pass
                          << " worst=" << rep.worst_violation << " (" << rep.worst_violation_check
                          << ")\n";
            }
            return 0;
        }

        if (config.command == "audit") {
            AuditRecord rec = lattice_sum_audit(config.t, config.K, config.N);
            std::string base = report_basename("audit", "K" + std::to_string(config.K),
                                               config.echo());
            emit_json(base, audit_to_json(rec));
            out << "t=" << rec.t << " direct_sum=" << rec.direct_sum
                      << " closed_form=" << rec.paper_rhs << " ratio=" << rec.ratio << "\n";
            return 0;
        }

        if (config.command == "simulate") {
            double rho = config.dist_params.count("rho") ? config.dist_params.at("rho") : 0.5;
            SampleSet samples =
                simulate_md1(rho, static_cast<std::size_t>(config.n_samples), config.seed);
            TailCurve curve = tail_curve_from_samples(samples);
            SlopeEstimate slope = estimate_decay_slope(curve);
            std::string base = report_basename("simulate", "md1_sojourn", config.echo());
            json body = slope_to_json(slope);
            body["model"] = samples.model;
            body["rho"] = rho;
            body["seed"] = samples.seed;
            body["count"] = samples.count();
            if (!samples.note.empty()) body["note"] = samples.note;
            emit_json(base, body);
            write_text_file(fs::path(config.out_dir) / (base + "-tail.csv"),
                            curve_to_csv(curve, 8192));
            if (config.dump_samples)
                write_sample_dump(fs::path(config.out_dir) / (base + ".samples"), samples);
            out << "slope=" << slope.slope << " stderr=" << slope.stderr_ << " ("
                      << slope.n_points << " points)\n";
            return 0;
        }

        if (config.command == "counterexample") {
            CounterexampleModel model =
                build_counterexample(config.h, config.sigma0, config.n_max);
            OscillationReport rep = counterexample_lim_points(model);
            std::string base = report_basename("counterexample", "h" + std::to_string(config.h),
                                               config.echo());
            emit_json(base, oscillation_to_json(rep));
            write_text_file(fs::path(config.out_dir) / (base + ".csv"), oscillation_to_csv(rep));
            out << "c_n:";
            for (auto c : model.c) out << " " << c;
            out << "\nvalue at steps -> " << (model.sigma0 - model.log_h())
                      << ", before steps -> " << model.sigma0 << "\n";
            return 0;
        }

        if (config.command == "polemap") {
            auto resolved = detail::resolve_spec(config);
            if (!resolved.transform)
                throw BadParam("polemap needs a transform (not a PGF)");
            PoleList list = locate_poles_rect(*resolved.transform,
                                              Complex(config.re_min, config.im_min),
                                              Complex(config.re_max, config.im_max));
            std::string base = report_basename("polemap", resolved.catalog_name, config.echo());
            emit_json(base, pole_list_to_json(list));
            write_text_file(fs::path(config.out_dir) / (base + ".csv"), pole_list_to_csv(list));
            out << list.poles.size() << " pole locations, net order " << list.net_count
                      << "\n";
            return 0;
        }

        throw BadParam("unknown command \"" + config.command + "\"");
    } catch (const BadParam& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        // malformed JSON, filesystem trouble, and similar
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace tailspectra
