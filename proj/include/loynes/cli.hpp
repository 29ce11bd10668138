#pragma once

// Command-line front end. This layer only parses flags, composes library
// calls, and serializes their results; no estimator math lives here.
//
// Exit codes: 0 success, 1 parameter/usage error, 2 data or I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "loynes/loynes.hpp"

namespace loynes::cli {

namespace detail {

inline std::vector<std::string> split(const std::string &text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::vector<double> parse_real_list(const std::string &text, const char *what) {
    std::vector<double> out;
    for (const auto &tok : split(text, ',')) {
        double v = 0.0;
        if (!parse_real(tok, v))
            throw parameter_error(std::string(what) + ": cannot parse '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string &text, const char *what) {
    std::vector<std::size_t> out;
    for (const auto &tok : split(text, ',')) {
        std::size_t v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw parameter_error(std::string(what) + ": cannot parse '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

// Rows separated by ';', entries by ','. Example: "0.9,0.1;0.2,0.8".
inline Mat parse_matrix(const std::string &text, const char *what) {
    Mat rows;
    for (const auto &row_text : split(text, ';'))
        rows.push_back(parse_real_list(row_text, what));
    return rows;
}

inline std::string join(const std::vector<std::string> &parts, const std::string &sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// --config file.json supplies defaults for any long flag of the invoked
// subcommand; flags given on the command line always win. Implemented by
// injecting "--key value" pairs (for keys absent from argv) right before the
// --config token, so they land in the same subcommand scope.
inline std::vector<std::string> apply_json_config(std::vector<std::string> args) {
    std::size_t config_pos = args.size();
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_pos = i;
            config_path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_pos = i;
            config_path = args[i].substr(9);
            break;
        }
    }
    if (config_pos == args.size()) return args;

    std::ifstream f(config_path);
    if (!f) throw io_error("cannot open config file: " + config_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception &e) {
        throw format_error("config file " + config_path + ": " + e.what());
    }
    if (!doc.is_object())
        throw format_error("config file " + config_path + ": top level must be an object");

    std::set<std::string> present;
    for (const auto &a : args) {
        if (a.rfind("--", 0) != 0) continue;
        const auto eq = a.find('=');
        present.insert(eq == std::string::npos ? a : a.substr(0, eq));
    }

    std::vector<std::string> injected;
    for (const auto &[key, value] : doc.items()) {
        const std::string flag = "--" + key;
        if (present.count(flag)) continue;
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_array()) {
            std::vector<std::string> parts;
            for (const auto &item : value)
                parts.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            text = join(parts, ",");
        } else {
            text = value.dump();
        }
        injected.push_back(flag);
        injected.push_back(text);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(config_pos), injected.begin(),
                injected.end());
    return args;
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

inline void emit_table(const CsvTable &table, const std::string &out_path, std::ostream &fallback) {
    if (out_path.empty()) {
        write_csv(table, fallback);
    } else {
        write_csv(table, std::filesystem::path(out_path));
    }
}

// Every run that writes files also drops a manifest: the argv echo, all
// resolved parameters, and the produced paths. Re-running the recorded
// command reproduces the outputs byte for byte.
struct Manifest {
    nlohmann::json doc;
    std::string out_path;      // primary --out, may be empty
    std::string manifest_path; // explicit --manifest override, may be empty

    Manifest(const std::vector<std::string> &args) {
        doc["artifact_version"] = LOYNES_VERSION;
        doc["command"] = args;
        doc["parameters"] = nlohmann::json::object();
        doc["details"] = nlohmann::json::object();
        doc["outputs"] = nlohmann::json::array();
    }

    void write() {
        std::string target = manifest_path;
        if (target.empty()) {
            if (out_path.empty()) return; // stdout-only run, nothing to anchor to
            target = out_path + ".manifest.json";
        }
        doc["outputs"].push_back(target);
        std::ofstream f(target, std::ios::binary);
        if (!f) throw io_error("cannot write manifest: " + target);
        f << doc.dump(2) << "\n";
    }
};

// ---------------------------------------------------------------------------
// Shared flag groups
// ---------------------------------------------------------------------------

struct ProcessFlags {
    std::string process;
    double alpha = 0.0;
    double beta = 0.0;
    std::string pi_text;
    std::string f_text;
    std::int64_t init = -1;

    void add_to(CLI::App *sub) {
        sub->add_option("--process", process, "Process family: two-state | finite-markov | dm1")
            ->required();
        sub->add_option("--alpha", alpha, "two-state: P(-1 -> +1); dm1: service rate");
        sub->add_option("--beta", beta, "two-state: P(+1 -> -1); dm1: arrival rate");
        sub->add_option("--pi", pi_text, "finite-markov transition matrix, rows ';'-separated");
        sub->add_option("--f", f_text, "finite-markov state values, comma-separated");
        sub->add_option("--init", init, "finite-markov initial state (default: stationary draw)");
    }

    ProcessSpec build() const {
        if (process == "two-state") {
            TwoStateSpec s;
            s.alpha = alpha;
            s.beta = beta;
            s.n = 1;
            return s;
        }
        if (process == "dm1") {
            Dm1Spec s;
            s.alpha = alpha;
            s.beta = beta;
            s.n = 1;
            return s;
        }
        if (process == "finite-markov") {
            FiniteMarkovSpec s;
            if (pi_text.empty() || f_text.empty())
                throw parameter_error("finite-markov process needs --pi and --f");
            s.pi = parse_matrix(pi_text, "--pi");
            s.f = parse_real_list(f_text, "--f");
            if (init >= 0) s.init = static_cast<std::size_t>(init);
            s.n = 1;
            return s;
        }
        throw parameter_error("unknown process '" + process +
                              "' (expected two-state, finite-markov, or dm1)");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["process"] = process;
        if (process == "finite-markov") {
            j["pi"] = pi_text;
            j["f"] = f_text;
            if (init >= 0) j["init"] = init;
        } else {
            j["alpha"] = alpha;
            j["beta"] = beta;
        }
        return j;
    }
};

struct EstimatorFlags {
    std::string name = "block";
    std::size_t block_size = 1;

    void add_to(CLI::App *sub) {
        sub->add_option("--estimator", name, "Estimator: block | markov | extremal")->required();
        sub->add_option("--B", block_size, "Block size for the block estimator")
            ->check(CLI::PositiveNumber);
    }

    EstimatorChoice build() const {
        if (name == "block") return {EstimatorKind::block, block_size};
        if (name == "markov") return {EstimatorKind::markov, 1};
        if (name == "extremal") return {EstimatorKind::extremal, 1};
        throw parameter_error("unknown estimator '" + name +
                              "' (expected block, markov, or extremal)");
    }
};

struct RootFlags {
    double tol = RootOpts{}.tol;
    double theta_cap = RootOpts{}.theta_cap;

    void add_to(CLI::App *sub) {
        sub->add_option("--tol", tol, "Root residual tolerance on lambda_hat");
        sub->add_option("--theta-cap", theta_cap, "Search ceiling for theta");
    }

    RootOpts build() const {
        RootOpts o;
        o.tol = tol;
        o.theta_cap = theta_cap;
        return o;
    }
};

// Grid export of an sCGF evaluator and of its Legendre transform.
struct CurveFlags {
    std::string scgf_out;
    double theta_min = -1.0, theta_max = 1.0;
    std::size_t theta_points = 101;
    std::string ihat_out;
    double x_min = -0.9, x_max = 0.9;
    std::size_t x_points = 91;

    void add_to(CLI::App *sub) {
        sub->add_option("--scgf-out", scgf_out, "Write theta,lambda_hat samples to this CSV");
        sub->add_option("--theta-min", theta_min, "sCGF grid start");
        sub->add_option("--theta-max", theta_max, "sCGF grid end");
        sub->add_option("--theta-points", theta_points, "sCGF grid size")
            ->check(CLI::PositiveNumber);
        sub->add_option("--ihat-out", ihat_out, "Write x,I_hat rate samples to this CSV");
        sub->add_option("--x-min", x_min, "Rate grid start");
        sub->add_option("--x-max", x_max, "Rate grid end");
        sub->add_option("--x-points", x_points, "Rate grid size")->check(CLI::PositiveNumber);
    }

    void emit(const ScgfEvaluator &scgf, Manifest &manifest) const {
        if (!scgf_out.empty()) {
            CsvTable t;
            t.header = {"theta", "lambda_hat"};
            for (std::size_t i = 0; i < theta_points; ++i) {
                const double theta =
                    theta_points == 1
                        ? theta_min
                        : theta_min + (theta_max - theta_min) * static_cast<double>(i) /
                              static_cast<double>(theta_points - 1);
                t.rows.push_back({theta, scgf(theta)});
            }
            write_csv(t, std::filesystem::path(scgf_out));
            manifest.doc["outputs"].push_back(scgf_out);
        }
        if (!ihat_out.empty()) {
            CsvTable t;
            t.header = {"x", "I_hat"};
            for (std::size_t i = 0; i < x_points; ++i) {
                const double x = x_points == 1
                                     ? x_min
                                     : x_min + (x_max - x_min) * static_cast<double>(i) /
                                           static_cast<double>(x_points - 1);
                t.rows.push_back({x, legendre_rate(scgf, x)});
            }
            write_csv(t, std::filesystem::path(ihat_out));
            manifest.doc["outputs"].push_back(ihat_out);
        }
    }
};

inline CsvTable exponent_table(const std::string &estimator, std::size_t n,
                               const ExponentEstimate &est,
                               const std::vector<std::string> &comments) {
    CsvTable t;
    t.comments = comments;
    t.header = {"estimator", "n", "value", "status", "residual"};
    t.rows.push_back({estimator, static_cast<std::uint64_t>(n), est.value,
                      std::string(to_string(est.status)), est.residual});
    return t;
}

} // namespace detail

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

inline int dispatch(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
    using namespace detail;
    namespace fs = std::filesystem;

    try {
        args = apply_json_config(std::move(args));

        CLI::App app{"Lindley waiting-process simulation and tail-exponent estimation"};
        app.set_version_flag("--version", std::string(LOYNES_VERSION));
        app.require_subcommand(1);

        Manifest manifest(args);
        auto add_common = [&](CLI::App *sub, std::string &out_path, std::string &manifest_path,
                              std::string &config) {
            sub->add_option("--out", out_path, "Write the primary CSV here (default: stdout)");
            sub->add_option("--manifest", manifest_path, "Write the run manifest here");
            sub->add_option("--config", config, "JSON file supplying defaults for these flags");
        };

        // ---- simulate ------------------------------------------------------
        auto *simulate = app.add_subcommand("simulate", "Generate an increment trace");
        simulate->require_subcommand(1);

        struct SimCommon {
            std::size_t n = 0;
            std::uint64_t seed = 0;
            std::string out_path, manifest_path, config;
        };

        SimCommon sim_two;
        double two_alpha = 0.0, two_beta = 0.0;
        auto *sim_two_cmd = simulate->add_subcommand("two-state", "Two-state +/-1 Markov chain");
        sim_two_cmd->add_option("--alpha", two_alpha, "P(-1 -> +1)")->required();
        sim_two_cmd->add_option("--beta", two_beta, "P(+1 -> -1)")->required();
        sim_two_cmd->add_option("--n", sim_two.n, "Sample count")->required();
        sim_two_cmd->add_option("--seed", sim_two.seed, "RNG seed")->required();
        add_common(sim_two_cmd, sim_two.out_path, sim_two.manifest_path, sim_two.config);
        sim_two_cmd->callback([&] {
            TwoStateSpec spec{two_alpha, two_beta, sim_two.n, sim_two.seed};
            const Trace trace = sample_two_state(spec);
            manifest.out_path = sim_two.out_path;
            manifest.manifest_path = sim_two.manifest_path;
            manifest.doc["parameters"] = {{"alpha", two_alpha},
                                          {"beta", two_beta},
                                          {"n", sim_two.n},
                                          {"seed", sim_two.seed}};
            manifest.doc["details"]["origin"] = trace.origin;
            if (!sim_two.out_path.empty()) manifest.doc["outputs"].push_back(sim_two.out_path);
            emit_table(trace_csv_table(trace), sim_two.out_path, out);
            manifest.write();
        });

        SimCommon sim_fm;
        std::string fm_pi, fm_f;
        std::int64_t fm_init = -1;
        auto *sim_fm_cmd = simulate->add_subcommand("finite-markov", "Finite Markov chain");
        sim_fm_cmd->add_option("--pi", fm_pi, "Transition matrix, rows ';'-separated")->required();
        sim_fm_cmd->add_option("--f", fm_f, "State values, comma-separated")->required();
        sim_fm_cmd->add_option("--init", fm_init, "Initial state (default: stationary draw)");
        sim_fm_cmd->add_option("--n", sim_fm.n, "Sample count")->required();
        sim_fm_cmd->add_option("--seed", sim_fm.seed, "RNG seed")->required();
        add_common(sim_fm_cmd, sim_fm.out_path, sim_fm.manifest_path, sim_fm.config);
        sim_fm_cmd->callback([&] {
            FiniteMarkovSpec spec;
            spec.pi = parse_matrix(fm_pi, "--pi");
            spec.f = parse_real_list(fm_f, "--f");
            if (fm_init >= 0) spec.init = static_cast<std::size_t>(fm_init);
            spec.n = sim_fm.n;
            spec.seed = sim_fm.seed;
            const Trace trace = sample_finite_markov(spec);
            manifest.out_path = sim_fm.out_path;
            manifest.manifest_path = sim_fm.manifest_path;
            manifest.doc["parameters"] = {{"pi", fm_pi},
                                          {"f", fm_f},
                                          {"n", sim_fm.n},
                                          {"seed", sim_fm.seed}};
            if (fm_init >= 0) manifest.doc["parameters"]["init"] = fm_init;
            manifest.doc["details"]["origin"] = trace.origin;
            if (!sim_fm.out_path.empty()) manifest.doc["outputs"].push_back(sim_fm.out_path);
            emit_table(trace_csv_table(trace), sim_fm.out_path, out);
            manifest.write();
        });

        SimCommon sim_dm;
        double dm_alpha = 0.0, dm_beta = 0.0;
        auto *sim_dm_cmd = simulate->add_subcommand("dm1", "D/M/1 increments Exp(alpha) - 1/beta");
        sim_dm_cmd->add_option("--alpha", dm_alpha, "Service rate")->required();
        sim_dm_cmd->add_option("--beta", dm_beta, "Arrival rate")->required();
        sim_dm_cmd->add_option("--n", sim_dm.n, "Sample count")->required();
        sim_dm_cmd->add_option("--seed", sim_dm.seed, "RNG seed")->required();
        add_common(sim_dm_cmd, sim_dm.out_path, sim_dm.manifest_path, sim_dm.config);
        sim_dm_cmd->callback([&] {
            Dm1Spec spec{dm_alpha, dm_beta, sim_dm.n, sim_dm.seed};
            const Trace trace = sample_dm1(spec);
            manifest.out_path = sim_dm.out_path;
            manifest.manifest_path = sim_dm.manifest_path;
            manifest.doc["parameters"] = {{"alpha", dm_alpha},
                                          {"beta", dm_beta},
                                          {"n", sim_dm.n},
                                          {"seed", sim_dm.seed}};
            manifest.doc["details"]["origin"] = trace.origin;
            if (!sim_dm.out_path.empty()) manifest.doc["outputs"].push_back(sim_dm.out_path);
            emit_table(trace_csv_table(trace), sim_dm.out_path, out);
            manifest.write();
        });

        // ---- estimate ------------------------------------------------------
        auto *estimate = app.add_subcommand("estimate", "Estimate the tail exponent from a trace");
        estimate->require_subcommand(1);

        std::string est_block_input, est_block_out, est_block_manifest, est_block_config;
        std::size_t est_block_B = 1;
        RootFlags est_block_root;
        CurveFlags est_block_curves;
        auto *est_block_cmd = estimate->add_subcommand("block", "Block sCGF estimator");
        est_block_cmd->add_option("--input", est_block_input, "Increment trace CSV")->required();
        est_block_cmd->add_option("--B", est_block_B, "Block size")->check(CLI::PositiveNumber);
        est_block_root.add_to(est_block_cmd);
        est_block_curves.add_to(est_block_cmd);
        add_common(est_block_cmd, est_block_out, est_block_manifest, est_block_config);
        est_block_cmd->callback([&] {
            const Trace trace = load_trace(est_block_input, TraceKind::increments);
            const BlockedTrace blocked = block_sums(trace, est_block_B);
            const auto scgf = ScgfEvaluator::from_blocks(blocked);
            const auto est = exponent_from_scgf(scgf, est_block_root.build());
            manifest.out_path = est_block_out;
            manifest.manifest_path = est_block_manifest;
            manifest.doc["parameters"] = {{"input", est_block_input},
                                          {"B", est_block_B},
                                          {"tol", est_block_root.tol},
                                          {"theta-cap", est_block_root.theta_cap}};
            manifest.doc["details"] = {{"n", trace.size()},
                                       {"blocks", blocked.blocks.size()},
                                       {"dropped", blocked.dropped}};
            if (!est_block_out.empty()) manifest.doc["outputs"].push_back(est_block_out);
            emit_table(exponent_table("block", trace.size(), est,
                                      {"B=" + std::to_string(est_block_B),
                                       "dropped=" + std::to_string(blocked.dropped)}),
                       est_block_out, out);
            est_block_curves.emit(scgf, manifest);
            manifest.write();
        });

        std::string est_mk_input, est_mk_states, est_mk_out, est_mk_manifest, est_mk_config;
        RootFlags est_mk_root;
        CurveFlags est_mk_curves;
        auto *est_mk_cmd = estimate->add_subcommand("markov", "Markov-chain MLE estimator");
        est_mk_cmd->add_option("--input", est_mk_input, "Increment trace CSV")->required();
        est_mk_cmd->add_option("--states", est_mk_states,
                               "State values, comma-separated (default: distinct trace values)");
        est_mk_root.add_to(est_mk_cmd);
        est_mk_curves.add_to(est_mk_cmd);
        add_common(est_mk_cmd, est_mk_out, est_mk_manifest, est_mk_config);
        est_mk_cmd->callback([&] {
            const Trace trace = load_trace(est_mk_input, TraceKind::increments);
            std::vector<double> states;
            if (est_mk_states.empty()) {
                std::set<double> distinct(trace.values.begin(), trace.values.end());
                states.assign(distinct.begin(), distinct.end());
            } else {
                states = parse_real_list(est_mk_states, "--states");
            }
            const auto mle = markov_mle(trace, states);
            const auto scgf = ScgfEvaluator::from_markov(mle, states);
            const auto est = exponent_from_scgf(scgf, est_mk_root.build());
            manifest.out_path = est_mk_out;
            manifest.manifest_path = est_mk_manifest;
            std::vector<std::string> state_text;
            for (double s : states) state_text.push_back(format_real(s));
            manifest.doc["parameters"] = {{"input", est_mk_input},
                                          {"states", join(state_text, ",")},
                                          {"tol", est_mk_root.tol},
                                          {"theta-cap", est_mk_root.theta_cap}};
            manifest.doc["details"] = {{"n", trace.size()}};
            if (!est_mk_out.empty()) manifest.doc["outputs"].push_back(est_mk_out);
            emit_table(exponent_table("markov", trace.size(), est,
                                      {"states=" + join(state_text, ",")}),
                       est_mk_out, out);
            est_mk_curves.emit(scgf, manifest);
            manifest.write();
        });

        std::string est_ex_input, est_ex_kind = "increments", est_ex_out, est_ex_manifest,
                    est_ex_config;
        double est_ex_w0 = 0.0;
        auto *est_ex_cmd = estimate->add_subcommand("extremal", "log(n)/max(1, W) estimator");
        est_ex_cmd->add_option("--input", est_ex_input, "Trace CSV")->required();
        est_ex_cmd->add_option("--kind", est_ex_kind, "Input kind: increments | waits");
        est_ex_cmd->add_option("--w0", est_ex_w0, "Initial waiting time when kind=increments");
        add_common(est_ex_cmd, est_ex_out, est_ex_manifest, est_ex_config);
        est_ex_cmd->callback([&] {
            Trace waits;
            if (est_ex_kind == "waits") {
                waits = load_trace(est_ex_input, TraceKind::waits);
            } else if (est_ex_kind == "increments") {
                waits = lindley_recursion(load_trace(est_ex_input, TraceKind::increments),
                                          est_ex_w0);
            } else {
                throw parameter_error("--kind must be 'increments' or 'waits'");
            }
            const double value = extremal_exponent(waits);
            manifest.out_path = est_ex_out;
            manifest.manifest_path = est_ex_manifest;
            manifest.doc["parameters"] = {{"input", est_ex_input},
                                          {"kind", est_ex_kind},
                                          {"w0", est_ex_w0}};
            manifest.doc["details"] = {{"n", waits.size()}};
            if (!est_ex_out.empty()) manifest.doc["outputs"].push_back(est_ex_out);
            emit_table(exponent_table("extremal", waits.size(),
                                      {value, ExponentStatus::root, 0.0},
                                      {"kind=" + est_ex_kind}),
                       est_ex_out, out);
            manifest.write();
        });

        // ---- analytic ------------------------------------------------------
        auto *analytic = app.add_subcommand("analytic", "Closed-form exponents");
        analytic->require_subcommand(1);

        double an_two_alpha = 0.0, an_two_beta = 0.0;
        std::string an_two_config, an_dm_config;
        auto *an_two_cmd = analytic->add_subcommand("two-state", "theta* = log((1-alpha)/(1-beta))");
        an_two_cmd->add_option("--alpha", an_two_alpha, "P(-1 -> +1)")->required();
        an_two_cmd->add_option("--beta", an_two_beta, "P(+1 -> -1)")->required();
        an_two_cmd->add_option("--config", an_two_config, "JSON file supplying defaults");
        an_two_cmd->callback([&] {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "theta_star = %.6f\n",
                          two_state_exponent(an_two_alpha, an_two_beta));
            out << buf;
        });

        double an_dm_alpha = 0.0, an_dm_beta = 0.0;
        auto *an_dm_cmd = analytic->add_subcommand("dm1", "Positive root of log(a/(a-t)) = t/b");
        an_dm_cmd->add_option("--alpha", an_dm_alpha, "Service rate")->required();
        an_dm_cmd->add_option("--beta", an_dm_beta, "Arrival rate")->required();
        an_dm_cmd->add_option("--config", an_dm_config, "JSON file supplying defaults");
        an_dm_cmd->callback([&] {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "theta_star = %.6f\n",
                          dm1_exponent(an_dm_alpha, an_dm_beta));
            out << buf;
        });

        // ---- rate-curve ----------------------------------------------------
        double rc_alpha = 0.0, rc_beta = 0.0, rc_x_min = 0.01, rc_x_max = 1.5;
        std::size_t rc_points = 150;
        std::string rc_out, rc_manifest, rc_config;
        auto *rc_cmd = app.add_subcommand("rate-curve", "Two-state rate function J(x) on a grid");
        rc_cmd->add_option("--alpha", rc_alpha, "P(-1 -> +1)")->required();
        rc_cmd->add_option("--beta", rc_beta, "P(+1 -> -1)")->required();
        rc_cmd->add_option("--x-min", rc_x_min, "Grid start");
        rc_cmd->add_option("--x-max", rc_x_max, "Grid end");
        rc_cmd->add_option("--points", rc_points, "Grid size")->check(CLI::PositiveNumber);
        add_common(rc_cmd, rc_out, rc_manifest, rc_config);
        rc_cmd->callback([&] {
            std::vector<double> grid;
            grid.reserve(rc_points);
            for (std::size_t i = 0; i < rc_points; ++i)
                grid.push_back(rc_points == 1 ? rc_x_min
                                              : rc_x_min + (rc_x_max - rc_x_min) *
                                                    static_cast<double>(i) /
                                                    static_cast<double>(rc_points - 1));
            const RateCurve curve = rate_curve_two_state(rc_alpha, rc_beta, grid);
            CsvTable t;
            t.comments = curve.meta;
            t.header = {"x", "J"};
            for (const auto &p : curve.points) t.rows.push_back({p.x, p.value});
            manifest.out_path = rc_out;
            manifest.manifest_path = rc_manifest;
            manifest.doc["parameters"] = {{"alpha", rc_alpha},
                                          {"beta", rc_beta},
                                          {"x-min", rc_x_min},
                                          {"x-max", rc_x_max},
                                          {"points", rc_points}};
            if (!rc_out.empty()) manifest.doc["outputs"].push_back(rc_out);
            emit_table(t, rc_out, out);
            manifest.write();
        });

        // ---- experiment ----------------------------------------------------
        auto *experiment = app.add_subcommand("experiment", "Monte Carlo harnesses");
        experiment->require_subcommand(1);

        ProcessFlags conv_process;
        EstimatorFlags conv_estimator;
        RootFlags conv_root;
        std::size_t conv_n_max = 0, conv_warmup = 0;
        std::string conv_checkpoints, conv_out, conv_manifest, conv_config;
        std::uint64_t conv_seed = 0;
        auto *conv_cmd =
            experiment->add_subcommand("convergence", "theta*(n) along one realization");
        conv_process.add_to(conv_cmd);
        conv_estimator.add_to(conv_cmd);
        conv_root.add_to(conv_cmd);
        conv_cmd->add_option("--n-max", conv_n_max, "Realization length")->required();
        conv_cmd->add_option("--checkpoints", conv_checkpoints,
                             "Comma-separated prefix lengths (default: n-max)");
        conv_cmd->add_option("--seed", conv_seed, "RNG seed")->required();
        conv_cmd->add_option("--warmup", conv_warmup, "Increments discarded up front");
        add_common(conv_cmd, conv_out, conv_manifest, conv_config);
        conv_cmd->callback([&] {
            ConvergenceConfig cfg;
            cfg.process = conv_process.build();
            cfg.estimator = conv_estimator.build();
            cfg.root = conv_root.build();
            cfg.n_max = conv_n_max;
            if (!conv_checkpoints.empty())
                cfg.checkpoints = parse_size_list(conv_checkpoints, "--checkpoints");
            cfg.seed = conv_seed;
            cfg.warmup = conv_warmup;
            const auto points = run_convergence(cfg);
            CsvTable t;
            t.comments = {"process=" + describe_family(cfg.process),
                          "estimator=" + std::string(to_string(cfg.estimator.kind)),
                          "B=" + std::to_string(cfg.estimator.block_size),
                          "seed=" + std::to_string(conv_seed),
                          "warmup=" + std::to_string(conv_warmup)};
            t.header = {"n", "estimate", "status"};
            for (const auto &p : points)
                t.rows.push_back({static_cast<std::uint64_t>(p.n), p.estimate.value,
                                  std::string(to_string(p.estimate.status))});
            manifest.out_path = conv_out;
            manifest.manifest_path = conv_manifest;
            manifest.doc["parameters"] = conv_process.to_json();
            manifest.doc["parameters"]["estimator"] = conv_estimator.name;
            manifest.doc["parameters"]["B"] = conv_estimator.block_size;
            manifest.doc["parameters"]["n-max"] = conv_n_max;
            manifest.doc["parameters"]["checkpoints"] = conv_checkpoints;
            manifest.doc["parameters"]["seed"] = conv_seed;
            manifest.doc["parameters"]["warmup"] = conv_warmup;
            if (!conv_out.empty()) manifest.doc["outputs"].push_back(conv_out);
            emit_table(t, conv_out, out);
            manifest.write();
        });

        ProcessFlags mc_process;
        EstimatorFlags mc_estimator;
        RootFlags mc_root;
        std::uint64_t mc_m = 10000, mc_seed = 0;
        std::size_t mc_warmup = 0;
        unsigned mc_workers = 1;
        std::string mc_n_list, mc_x_list, mc_out, mc_manifest, mc_config;
        double mc_theta_ref = std::numeric_limits<double>::quiet_NaN();
        auto *mc_cmd = experiment->add_subcommand(
            "mc-ldp", "Exceedance counts of theta*(n) - theta* > x over replicas");
        mc_process.add_to(mc_cmd);
        mc_estimator.add_to(mc_cmd);
        mc_root.add_to(mc_cmd);
        mc_cmd->add_option("--m", mc_m, "Replica count")->check(CLI::PositiveNumber);
        mc_cmd->add_option("--n-list", mc_n_list, "Comma-separated prefix lengths")->required();
        mc_cmd->add_option("--x-list", mc_x_list, "Comma-separated exceedance offsets")
            ->required();
        mc_cmd->add_option("--seed", mc_seed, "Base seed; replica r uses seed+r")->required();
        mc_cmd->add_option("--theta-star-ref", mc_theta_ref,
                           "Reference exponent (required for finite-markov)");
        mc_cmd->add_option("--workers", mc_workers, "Worker threads (cannot change results)")
            ->check(CLI::PositiveNumber);
        mc_cmd->add_option("--warmup", mc_warmup, "Increments discarded per replica");
        add_common(mc_cmd, mc_out, mc_manifest, mc_config);
        mc_cmd->callback([&] {
            McLdpConfig cfg;
            cfg.process = mc_process.build();
            cfg.estimator = mc_estimator.build();
            cfg.root = mc_root.build();
            cfg.replicas = mc_m;
            cfg.n_list = parse_size_list(mc_n_list, "--n-list");
            cfg.x_list = parse_real_list(mc_x_list, "--x-list");
            cfg.base_seed = mc_seed;
            cfg.warmup = mc_warmup;
            cfg.workers = mc_workers;
            if (!std::isnan(mc_theta_ref)) cfg.theta_star_ref = mc_theta_ref;
            const McLdpResult result = run_mc_ldp(cfg);
            CsvTable t;
            t.comments = {"process=" + describe_family(cfg.process),
                          "estimator=" + std::string(to_string(cfg.estimator.kind)),
                          "B=" + std::to_string(cfg.estimator.block_size),
                          "base_seed=" + std::to_string(mc_seed),
                          "theta_star_ref=" + format_real(result.theta_star_ref),
                          "warmup=" + std::to_string(mc_warmup)};
            t.header = {"n", "x", "count", "m", "rate"};
            for (const auto &cell : result.table)
                t.rows.push_back({static_cast<std::uint64_t>(cell.n), cell.x, cell.exceed_count,
                                  result.replicas, cell.rate});
            manifest.out_path = mc_out;
            manifest.manifest_path = mc_manifest;
            manifest.doc["parameters"] = mc_process.to_json();
            manifest.doc["parameters"]["estimator"] = mc_estimator.name;
            manifest.doc["parameters"]["B"] = mc_estimator.block_size;
            manifest.doc["parameters"]["m"] = mc_m;
            manifest.doc["parameters"]["n-list"] = mc_n_list;
            manifest.doc["parameters"]["x-list"] = mc_x_list;
            manifest.doc["parameters"]["seed"] = mc_seed;
            manifest.doc["parameters"]["warmup"] = mc_warmup;
            manifest.doc["parameters"]["workers"] = mc_workers;
            manifest.doc["details"]["theta_star_ref"] = result.theta_star_ref;
            if (!mc_out.empty()) manifest.doc["outputs"].push_back(mc_out);
            emit_table(t, mc_out, out);
            manifest.write();
        });

        // Build argv: CLI11 wants the program name first.
        std::vector<const char *> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("loynes");
        for (const auto &a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp &e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForAllHelp &e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForVersion &e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError &e) {
            err << "error: " << e.what() << "\n";
            err << "Run 'loynes --help' for usage.\n";
            return 1;
        }
        return 0;
    } catch (const parameter_error &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const data_error &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace loynes::cli
