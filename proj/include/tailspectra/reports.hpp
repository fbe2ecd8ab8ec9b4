#pragma once

// JSON and CSV renderings of the analysis artifacts. Reports carry no
// timestamps, so a fixed config reproduces byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailspectra/common.hpp"
#include "tailspectra/empirical.hpp"
#include "tailspectra/extremal.hpp"
#include "tailspectra/spectral.hpp"
#include "tailspectra/tail_bounds.hpp"

namespace tailspectra {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Round-trip double formatting for CSV cells.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json lemma_report_to_json(const LemmaReport& r) {
    json j;
    j["omega"] = r.omega;
    j["K"] = r.K;
    j["lemma1_pass"] = r.lemma1_pass;
    j["lemma2_pass"] = r.lemma2_pass;
    j["lemma3_pass"] = r.lemma3_pass;
    j["lemma4_pass"] = r.lemma4_pass;
    j["majorant_pass"] = r.majorant_pass;
    j["minorant_pass"] = r.minorant_pass;
    j["margins"] = {{"lemma1", r.lemma1_margin}, {"lemma2", r.lemma2_margin},
                    {"lemma3", r.lemma3_margin}, {"lemma4", r.lemma4_margin},
                    {"majorant", r.majorant_margin}, {"minorant", r.minorant_margin}};
    j["worst_violation"] = r.worst_violation;
    j["worst_violation_check"] = r.worst_violation_check;
    j["worst_violation_location"] = r.worst_violation_location;
    j["grids"] = r.grids;
    return j;
}

inline json audit_to_json(const AuditRecord& r) {
    json j;
    j["t"] = r.t;
    j["K"] = r.K;
    j["truncation_N"] = r.truncation_N;
    j["direct_sum"] = r.direct_sum;
    j["paper_rhs"] = r.paper_rhs;
    j["ratio"] = r.ratio;
    j["tail_bound"] = r.tail_bound;
    return j;
}

inline json pole_info_to_json(const PoleInfo& p) {
    json j;
    j["sigma0"] = p.sigma0;
    j["order"] = p.order;
    j["laurent"] = p.laurent;
    j["strip_halfwidth"] = p.strip_halfwidth;
    j["extra_poles_in_strip"] = p.extra_poles_in_strip;
    j["contour_radius"] = p.contour_radius;
    j["quadrature_nodes"] = p.quadrature_nodes;
    return j;
}

inline json pole_list_to_json(const PoleList& list) {
    json j;
    j["rectangle"] = {{"re_min", list.corner_lo.real()}, {"im_min", list.corner_lo.imag()},
                      {"re_max", list.corner_hi.real()}, {"im_max", list.corner_hi.imag()}};
    j["net_count"] = list.net_count;
    json poles = json::array();
    for (const auto& p : list.poles)
        poles.push_back({{"re", p.location.real()}, {"im", p.location.imag()}, {"order", p.order}});
    j["poles"] = poles;
    return j;
}

inline std::string pole_list_to_csv(const PoleList& list) {
    std::string out = "re,im,order\n";
    for (const auto& p : list.poles)
        out += csv_num(p.location.real()) + "," + csv_num(p.location.imag()) + "," +
               std::to_string(p.order) + "\n";
    return out;
}

inline json integrals_to_json(const ExtremalIntegrals& e) {
    json j;
    j["int_M"] = e.int_M;
    j["int_m"] = e.int_m;
    j["method"] = e.method;
    j["quad_int_M"] = e.quad_int_M;
    j["quad_int_m"] = e.quad_int_m;
    j["sin_power_constants"] = e.sin_power_constants;
    return j;
}

inline json tail_report_to_json(const TailBoundReport& r) {
    json j;
    j["spec"] = {{"id", r.spec_id}, {"params", r.params}};
    j["sigma0"] = r.sigma0;
    j["decay_rate"] = r.decay_rate;
    j["order"] = r.order;
    j["laurent"] = r.laurent;
    j["A_D"] = r.A_D;
    j["K"] = r.K;
    j["omega"] = r.omega;
    j["lambda"] = r.lambda;
    j["C1"] = r.C1;
    j["C2"] = r.C2;
    j["normalization_exponent"] = r.normalization_exponent;
    j["strip_certificate"] = {{"extra_poles_in_strip", r.strip_certificate},
                              {"strip_halfwidth", -2.0 * r.sigma0 * r.lambda}};
    j["contour_radius"] = r.contour_radius;
    j["lemma_report"] = lemma_report_to_json(r.lemma_report);
    j["integrals"] = integrals_to_json(r.integrals);
    j["certified"] = r.certified;
    j["sandwich_certified"] = r.sandwich_certified;
    j["caveats"] = r.caveats;
    if (r.radius) {
        j["radius"] = *r.radius;
        j["decay_rate_from_radius"] = -std::log(*r.radius);
    }
    return j;
}

/// Human-readable rendering: each hypothesis with its numeric verdict.
inline std::string tail_report_to_text(const TailBoundReport& r) {
    std::string s;
    auto line = [&](const std::string& t) { s += t + "\n"; };
    line("tail analysis of " + r.spec_id);
    line("  abscissa of convergence sigma0 = " + csv_num(r.sigma0) + " (< 0: " +
         (r.sigma0 < 0 ? "yes" : "NO") + ")");
    line("  pole order D = " + std::to_string(r.order) + ", A_D = " + csv_num(r.A_D));
    line("  strip segment half-width " + csv_num(-2.0 * r.sigma0 * r.lambda) +
         ": extra poles = " + std::to_string(r.strip_certificate) +
         (r.strip_certificate == 0 ? " (clean)" : " (CONTAMINATED)"));
    line("  construction checks at omega = " + csv_num(r.omega) + ": L1 " +
         (r.lemma_report.lemma1_pass ? "pass" : "FAIL") + ", L2 " +
         (r.lemma_report.lemma2_pass ? "pass" : "FAIL") + ", L3 " +
         (r.lemma_report.lemma3_pass ? "pass" : "FAIL") + ", L4 " +
         (r.lemma_report.lemma4_pass ? "pass" : "FAIL"));
    line("  majorant/minorant grids: " + std::string(r.lemma_report.majorant_pass ? "pass" : "FAIL") +
         "/" + std::string(r.lemma_report.minorant_pass ? "pass" : "FAIL") +
         " (worst " + csv_num(r.lemma_report.worst_violation) + " in " +
         r.lemma_report.worst_violation_check + ")");
    line("  decay rate = " + csv_num(r.decay_rate) + "; x^{-" +
         std::to_string(r.normalization_exponent) + "} e^{-sigma0 x} P(X>x) in [" +
         csv_num(r.C1) + ", " + csv_num(r.C2) + "]" +
         (r.sandwich_certified ? "" : " (diagnostic)"));
    for (const auto& c : r.caveats) line("  caveat: " + c);
    return s;
}

inline std::string curve_to_csv(const TailCurve& curve, std::size_t max_points = 0) {
    std::string out = "x,log_tail\n";
    std::size_t n = curve.x.size();
    std::size_t stride = 1;
    if (max_points > 0 && n > max_points) stride = (n + max_points - 1) / max_points;
    for (std::size_t i = 0; i < n; i += stride)
        out += csv_num(curve.x[i]) + "," + csv_num(curve.log_tail[i]) + "\n";
    return out;
}

/// t, M, m, E on a uniform grid: the plotting surface for the extremal pair.
inline std::string extremal_curve_csv(double omega, int K, double lo = -20.0, double hi = 20.0,
                                      double step = 0.01) {
    std::string out = "t,majorant,minorant,target\n";
    long n = std::lround((hi - lo) / step);
    for (long i = 0; i <= n; ++i) {
        double t = lo + i * step;
        double M = eval_majorant(t, omega, K);
        double m = eval_minorant(t, omega, K);
        double E = t >= 0.0 ? std::exp(-omega * t) : 0.0;
        out += csv_num(t) + "," + csv_num(M) + "," + csv_num(m) + "," + csv_num(E) + "\n";
    }
    return out;
}

inline json slope_to_json(const SlopeEstimate& est) {
    json j;
    j["slope"] = est.slope;
    j["stderr"] = est.stderr_;
    j["n_points"] = est.n_points;
    j["window_x"] = {est.window_lo, est.window_hi};
    return j;
}

inline json oscillation_to_json(const OscillationReport& rep) {
    json j;
    j["h"] = rep.model.h;
    j["sigma0"] = rep.model.sigma0;
    j["c"] = rep.model.c;
    j["x_at_step"] = rep.x_at_step;
    j["value_at_step"] = rep.value_at_step;
    j["x_before_next"] = rep.x_before_next;
    j["value_before_next"] = rep.value_before_next;
    j["limit_at_step"] = rep.model.sigma0 - rep.model.log_h();
    j["limsup"] = rep.model.sigma0;
    return j;
}

inline std::string oscillation_to_csv(const OscillationReport& rep) {
    std::string out = "x,log_tail,x_inv_log_tail,subsequence\n";
    for (std::size_t i = 0; i < rep.x_before_next.size(); ++i) {
        out += csv_num(rep.x_before_next[i]) + "," +
               csv_num(rep.model.log_tail(rep.x_before_next[i])) + "," +
               csv_num(rep.value_before_next[i]) + ",before_step\n";
        out += csv_num(rep.x_at_step[i]) + "," + csv_num(rep.model.log_tail(rep.x_at_step[i])) +
               "," + csv_num(rep.value_at_step[i]) + ",at_step\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// File emission
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

/// Binary sample dump: magic, version, model, seed, count, raw doubles.
inline void write_sample_dump(const std::filesystem::path& path, const SampleSet& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    const char magic[8] = {'T', 'S', 'P', 'S', 'A', 'M', 'P', '1'};
    out.write(magic, 8);
    std::uint32_t model_len = static_cast<std::uint32_t>(s.model.size());
    out.write(reinterpret_cast<const char*>(&model_len), 4);
    out.write(s.model.data(), model_len);
    out.write(reinterpret_cast<const char*>(&s.seed), 8);
    std::uint64_t count = s.values.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(s.values.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw Error("write failed: " + path.string());
}

/// Deterministic report name: <command>-<catalog>-<hash16>.<ext>, the hash
/// taken over the canonical config echo.
inline std::string report_basename(const std::string& command, const std::string& catalog,
                                   const json& config_echo) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_echo.dump())));
    std::string cat = catalog.empty() ? "none" : catalog;
    return command + "-" + cat + "-" + hex;
}

}  // namespace tailspectra
