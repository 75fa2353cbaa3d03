#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 input parse
// error, 3 dimension mismatch, 4 solver failure or budget exceeded (and, for
// experiment commands, a failed verdict).
//
// Precedence: command-line flags > JSON config file (--config) > defaults.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <projot/projot.hpp>

namespace projot::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_parse = 2;
inline constexpr int exit_dimension = 3;
inline constexpr int exit_solver = 4;

inline int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DimensionMismatch: return exit_dimension;
    case ErrorCode::SolverFailure:
    case ErrorCode::ProblemTooLarge:
    case ErrorCode::BudgetExceeded: return exit_solver;
    case ErrorCode::ParseError:
    case ErrorCode::EmptySupport:
    case ErrorCode::NegativeWeight:
    case ErrorCode::WeightSumOutOfRange:
    case ErrorCode::NonFiniteValue: return exit_parse;
    default: return exit_usage;
    }
}

/// Parses `quad:RES` or `mc:N`.
inline SlicedScheme parse_scheme(const std::string& text, std::uint64_t seed)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::InvalidSpec, "scheme must be quad:RES or mc:N");
    const std::string kind = text.substr(0, colon);
    std::size_t size = 0;
    try {
        size = std::stoul(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidSpec, "scheme size is not a number");
    }
    if (kind == "quad")
        return SlicedScheme::quadrature(size);
    if (kind == "mc")
        return SlicedScheme::monte_carlo(size, seed);
    throw Error(ErrorCode::InvalidSpec, "scheme must be quad:RES or mc:N");
}

inline std::string scheme_name(const SlicedScheme& s)
{
    return (s.kind == SchemeKind::quadrature ? "quad:" : "mc:") + std::to_string(s.size);
}

template <class T>
std::vector<T> parse_list(const std::string& text)
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof())
            throw Error(ErrorCode::InvalidSpec, "bad list element '" + item + "'");
        out.push_back(v);
    }
    return out;
}

struct Settings {
    // shared
    double p = 1.0;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    std::size_t starts = 8;
    std::size_t threads = 0;
    std::string out;
    std::string format = "json";
    std::string config;
    // dist
    std::string file_a, file_b;
    std::string metric = "all";
    bool normalized = false;
    std::string scheme;
    std::string dump_plan;
    // experiments
    std::size_t d = 3;
    std::string n_list = "64,128,256,512,1024";
    std::size_t reps = 20;
    std::string d_list = "2,3";
    std::string p_list = "1,2";
    std::size_t instances = 25;
};

/// Fills options the user did not pass on the command line from a JSON config.
inline void apply_config(const CLI::App& sub, Settings& s)
{
    if (s.config.empty())
        return;
    std::ifstream in(s.config);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open config " + s.config);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    auto take = [&](const char* key, auto& field) {
        if (!j.contains(key))
            return;
        const std::string flag = std::string("--") + key;
        bool given = false;
        try {
            given = sub.count(flag) > 0;
        } catch (const CLI::OptionNotFound&) {
            return;  // option not defined for this subcommand
        }
        if (given)
            return;
        try {
            if constexpr (std::is_same_v<std::decay_t<decltype(field)>, std::string>) {
                const auto& v = j.at(key);
                if (v.is_array()) {
                    std::string joined;
                    for (const auto& e : v)
                        joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
                    field = joined;
                } else {
                    field = v.is_string() ? v.get<std::string>() : v.dump();
                }
            } else {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("config key ") + key + ": " + e.what());
        }
    };
    take("p", s.p);
    take("seed", s.seed);
    take("tol", s.tol);
    take("starts", s.starts);
    take("threads", s.threads);
    take("out", s.out);
    take("format", s.format);
    take("metric", s.metric);
    take("normalized", s.normalized);
    take("scheme", s.scheme);
    take("d", s.d);
    take("n-list", s.n_list);
    take("reps", s.reps);
    take("d-list", s.d_list);
    take("p-list", s.p_list);
    take("instances", s.instances);
}

class Emitter {
public:
    Emitter(std::ostream& stdout_stream, const std::string& path) : stdout_(stdout_stream), path_(path) {}

    void emit(const std::string& text)
    {
        if (path_.empty()) {
            stdout_ << text;
            return;
        }
        std::ofstream f(path_);
        if (!f)
            throw Error(ErrorCode::ParseError, "cannot write " + path_);
        f << text;
    }

private:
    std::ostream& stdout_;
    std::string path_;
};

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw Error(ErrorCode::ParseError, "cannot write " + path);
    return f;
}

inline double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline int cmd_dist(const Settings& s, std::ostream& out)
{
    if (s.metric != "w" && s.metric != "sw" && s.metric != "maxsw" && s.metric != "all")
        throw Error(ErrorCode::InvalidSpec, "metric must be w, sw, maxsw or all");
    const auto mu = load_measure(s.file_a);
    const auto nu = load_measure(s.file_b);
    if (mu.dim() != nu.dim())
        throw Error(ErrorCode::DimensionMismatch, "inputs have dimensions " + std::to_string(mu.dim()) + " and " +
                                                      std::to_string(nu.dim()));
    const std::size_t d = mu.dim();
    const bool all = s.metric == "all";
    nlohmann::json metrics = nlohmann::json::object();
    nlohmann::json timings = nlohmann::json::object();
    int code = exit_ok;

    if (all || s.metric == "w") {
        const auto t0 = std::chrono::steady_clock::now();
        const auto plan = wasserstein_exact(mu, nu, s.p);
        nlohmann::json w = {{"value", plan.primal_value}, {"cost", plan.cost}, {"plan_entries", plan.entries.size()}};
        std::optional<DualCertificate> dual;
        if (s.p == 1.0) {
            dual = dual_potentials_w1(mu, nu);
            w["dual_value"] = dual->dual_value;
            w["duality_gap"] = std::abs(plan.primal_value - dual->dual_value);
        }
        if (!s.dump_plan.empty()) {
            auto f = open_output(s.dump_plan);
            write_plan_csv(f, plan, dual);
        }
        metrics["w"] = std::move(w);
        timings["w_ms"] = ms_since(t0);
    }
    if (all || s.metric == "sw") {
        const auto t0 = std::chrono::steady_clock::now();
        const auto scheme = s.scheme.empty() ? SlicedScheme::default_for(d, s.seed) : parse_scheme(s.scheme, s.seed);
        SlicedOptions opts{s.threads};
        const auto norm = sliced_wasserstein(mu, nu, s.p, scheme, true, opts);
        const double area = d == 1 ? 2.0 : surface_area(static_cast<int>(d));
        const double unnorm = std::pow(area, 1.0 / s.p) * norm.value;
        metrics["sw"] = {{"value", s.normalized ? norm.value : unnorm},
                         {"normalized", norm.value},
                         {"unnormalized", unnorm},
                         {"reported", s.normalized ? "normalized" : "unnormalized"},
                         {"scheme", scheme_name(scheme)},
                         {"stderr_normalized", norm.std_error},
                         {"error_bound_normalized", norm.error_bound}};
        timings["sw_ms"] = ms_since(t0);
    }
    if (all || s.metric == "maxsw") {
        const auto t0 = std::chrono::steady_clock::now();
        const bool certify = d <= 3;
        CertifiedOptions copts;
        copts.seed = s.seed;
        MaxSlicedOptions hopts;
        hopts.threads = s.threads;
        const auto r = certify ? max_sliced_certified(mu, nu, s.p, s.tol, copts)
                               : max_sliced(mu, nu, s.p, s.starts, s.seed, hopts);
        metrics["maxsw"] = {{"value", r.lower},
                            {"lower", r.lower},
                            {"upper", r.upper},
                            {"v_star", std::vector<double>(r.v_star.values().begin(), r.v_star.values().end())},
                            {"mode", r.mode == SearchMode::certified ? "certified" : "heuristic"},
                            {"evaluations", r.evaluations},
                            {"budget_exceeded", r.budget_exceeded}};
        timings["maxsw_ms"] = ms_since(t0);
        if (r.budget_exceeded)
            code = exit_solver;
    }

    std::ostringstream text;
    if (s.format == "csv") {
        text << std::setprecision(17) << "metric,value,lower,upper\n";
        for (const auto& [name, m] : metrics.items()) {
            const double v = m.at("value").get<double>();
            const double lo = m.contains("lower") ? m.at("lower").get<double>() : v;
            const double hi = m.contains("upper") ? m.at("upper").get<double>() : v;
            text << name << ',' << v << ',' << lo << ',' << hi << '\n';
        }
    } else if (s.format == "json") {
        nlohmann::json report = {{"schema", 1}, {"command", "dist"}, {"p", s.p},           {"dim", d},
                                 {"n_a", mu.size()}, {"n_b", nu.size()}, {"metrics", metrics}, {"timings", timings}};
        text << report.dump(2) << '\n';
    } else {
        throw Error(ErrorCode::InvalidSpec, "format must be json or csv");
    }
    Emitter(out, s.out).emit(text.str());
    return code;
}

inline std::string prefix_or(const Settings& s, const char* fallback) { return s.out.empty() ? fallback : s.out; }

inline int cmd_rates(const Settings& s, std::ostream& out)
{
    RateConfig cfg;
    cfg.d = s.d;
    cfg.p = s.p;
    cfg.n_list = parse_list<std::size_t>(s.n_list);
    cfg.reps = s.reps;
    cfg.seed = s.seed;
    cfg.maxsw_starts = s.starts;
    cfg.threads = s.threads;
    const auto rep = rate_experiment(cfg);
    const std::string prefix = prefix_or(s, "projot_rates");
    {
        auto f = open_output(prefix + ".jsonl");
        write_jsonl(f, rep.records);
    }
    {
        auto f = open_output(prefix + ".summary.json");
        f << summary_json(rep).dump(2) << '\n';
    }
    if (s.format == "csv") {
        auto f = open_output(prefix + ".csv");
        write_csv(f, rep.records);
    }
    out << std::setprecision(6) << std::fixed;
    out << "rates d=" << cfg.d << " p=" << cfg.p << " reps=" << cfg.reps << "\n";
    out << "       n      W_exact           SW        maxSW     W/SW\n";
    for (std::size_t i = 0; i < rep.means.size(); ++i)
        out << std::setw(8) << cfg.n_list[i] << ' ' << std::setw(12) << rep.means[i][0] << ' ' << std::setw(12)
            << rep.means[i][1] << ' ' << std::setw(12) << rep.means[i][2] << ' ' << std::setw(8) << rep.ratio_w_sw[i]
            << '\n';
    for (const auto& f : rep.fits)
        out << "slope " << to_string(f.estimator) << ": " << f.slope << '\n';
    auto verdict = [&](const char* what, bool ok) { out << (ok ? "PASS " : "FAIL ") << what << '\n'; };
    verdict("W mean strictly decreasing", rep.w_decreasing);
    if (!rep.trend_only) {
        verdict("W slope within window of -1/d", rep.w_slope_ok);
        verdict("SW slope within window of -1/2", rep.sw_slope_ok);
        verdict("W/SW ratio nondecreasing", rep.ratio_nondecreasing);
    } else {
        out << "note: d = 2 is trend-only\n";
    }
    out << (rep.passed ? "verdict: pass" : "verdict: fail") << '\n';
    return rep.passed ? exit_ok : exit_solver;
}

inline int cmd_audit(const Settings& s, std::ostream& out)
{
    AuditConfig cfg;
    cfg.d_list = parse_list<std::size_t>(s.d_list);
    cfg.p_list = parse_list<double>(s.p_list);
    cfg.instances_per_cell = s.instances;
    cfg.seed = s.seed;
    cfg.tol = s.tol;
    cfg.threads = s.threads;
    const auto rep = inequality_audit(cfg);
    const std::string prefix = prefix_or(s, "projot_audit");
    {
        auto f = open_output(prefix + ".jsonl");
        for (const auto& a : rep.instances)
            f << to_json(a).dump() << '\n';
    }
    {
        auto f = open_output(prefix + ".summary.json");
        f << summary_json(rep).dump(2) << '\n';
    }
    out << "audit instances: " << rep.instances.size() << '\n';
    out << std::setprecision(3) << std::scientific;
    out << "min margin SW/A^(1/p) <= maxSW: " << rep.min_margin_sliced << '\n';
    out << "min margin maxSW <= W:          " << rep.min_margin_max << '\n';
    if (std::isfinite(rep.min_margin_sqrt_d))
        out << "min margin W2 <= sqrt(d) maxSW2: " << rep.min_margin_sqrt_d << '\n';
    out << "violations: " << rep.violations << " (chain " << rep.chain_violations << ", sqrt(d) "
        << rep.sqrt_d_violations << ")\n";
    if (rep.budget_exceeded > 0)
        out << "budget exceeded on " << rep.budget_exceeded << " instances\n";
    return rep.passed() ? (rep.budget_exceeded ? exit_solver : exit_ok) : exit_solver;
}

inline int cmd_cdscan(const Settings& s, std::ostream& out)
{
    const auto res = cd_lower_bound_scan(s.d, s.p, s.instances, s.seed, s.tol, 8, s.threads);
    const std::string prefix = prefix_or(s, "projot_cdscan");
    {
        auto f = open_output(prefix + ".jsonl");
        for (double r : res.ratios)
            f << nlohmann::json{{"d", s.d}, {"p", s.p}, {"ratio", r}}.dump() << '\n';
    }
    {
        auto f = open_output(prefix + ".summary.json");
        f << summary_json(res, s.d, s.p).dump(2) << '\n';
    }
    out << std::setprecision(12);
    out << "cdscan d=" << s.d << " p=" << s.p << " instances=" << res.evaluated << " skipped=" << res.skipped << '\n';
    out << "C_d lower bound: " << res.bound << " (instance " << res.argmax << ")\n";
    const bool ok = res.bound >= 1.0 - 1e-9 && std::isfinite(res.bound);
    out << (ok ? "verdict: pass" : "verdict: fail") << '\n';
    return ok ? exit_ok : exit_solver;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Settings s;
    CLI::App app{"projot: Wasserstein, sliced and max-sliced distances between point clouds", "projot"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "projot 1.0 (output schema 1)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--p", s.p, "order p >= 1");
        sub->add_option("--seed", s.seed, "seed for every stochastic component");
        sub->add_option("--tol", s.tol, "certified maxSW bracket width");
        sub->add_option("--starts", s.starts, "random starts for heuristic maxSW");
        sub->add_option("--threads", s.threads, "worker threads (0 = all cores)");
        sub->add_option("--out", s.out, "output file (dist) or output prefix (experiments)");
        sub->add_option("--format", s.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--config", s.config, "JSON config; flags take precedence");
    };

    auto* dist = app.add_subcommand("dist", "distances between two point-cloud files");
    dist->add_option("file_a", s.file_a)->required();
    dist->add_option("file_b", s.file_b)->required();
    dist->add_option("--metric", s.metric, "w, sw, maxsw or all");
    dist->add_flag("--normalized", s.normalized, "report SW with the surface measure normalized to 1");
    dist->add_option("--scheme", s.scheme, "quad:RES or mc:N");
    dist->add_option("--dump-plan", s.dump_plan, "write the optimal plan as CSV");
    add_common(dist);

    auto* rates = app.add_subcommand("rates", "empirical convergence-rate experiment");
    rates->add_option("--d", s.d);
    rates->add_option("--n-list", s.n_list, "comma-separated ascending sample sizes");
    rates->add_option("--reps", s.reps);
    add_common(rates);

    auto* audit = app.add_subcommand("audit", "audit of SW/A^(1/p) <= maxSW <= W and W2 <= sqrt(d) maxSW2");
    audit->add_option("--d-list", s.d_list);
    audit->add_option("--p-list", s.p_list);
    audit->add_option("--instances", s.instances, "instances per (d, p) cell");
    add_common(audit);

    auto* cdscan = app.add_subcommand("cdscan", "empirical lower bound on C_d in W1 <= C_d maxSW1");
    cdscan->add_option("--d", s.d);
    cdscan->add_option("--instances", s.instances);
    add_common(cdscan);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config(*sub, s);
        detail::require_order(s.p);
        if (sub == dist)
            return cmd_dist(s, out);
        if (sub == rates)
            return cmd_rates(s, out);
        if (sub == audit)
            return cmd_audit(s, out);
        return cmd_cdscan(s, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

} // namespace projot::cli
