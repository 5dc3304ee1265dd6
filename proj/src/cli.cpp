#include "rotor/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rotor/acceptance.hpp"
#include "rotor/emit.hpp"
#include "rotor/errors.hpp"
#include "rotor/floquet.hpp"
#include "rotor/number_theory.hpp"
#include "rotor/perturbation.hpp"
#include "rotor/spectrum.hpp"

namespace rotor::app {

namespace {

using nlohmann::ordered_json;

const std::vector<std::pair<std::string, std::string>> kCommands{
    {"bands", "sweep the Bloch angle and report unwrapped eigenphases and band widths"},
    {"flatness", "flag bands narrower than --threshold"},
    {"detgd", "|det| of the leading block G^(d)"},
    {"coeffs", "path-sum coefficients s_j with exponents and oracle gap"},
    {"scaling", "log-log slope of the band derivative against mu"},
    {"gauss", "Gauss-type partial sum and its bound"},
    {"gamma", "maximize -2 (x - lambda)^2 + F(x)"},
    {"decay", "fit log|s_j| against q over a list of primes"},
    {"decomp-check", "compare full-lattice and fibre-wise propagation"},
    {"verify", "run every acceptance criterion"},
};

/// Parameter-level failures map to the usage exit code.
bool is_usage_error(const std::exception& e)
{
    return dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const NotAResonance*>(&e) ||
           dynamic_cast<const UnsupportedParams*>(&e) || dynamic_cast<const InvalidBand*>(&e) ||
           dynamic_cast<const GridMismatch*>(&e) || dynamic_cast<const InsufficientData*>(&e) ||
           dynamic_cast<const BudgetExceeded*>(&e);
}

std::string config_token(const nlohmann::json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    if (v.is_number_unsigned())
        return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float())
        return fmt::format("{:.17g}", v.get<double>());
    throw InvalidInput("unsupported config value " + v.dump());
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag)
{
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

/// Expands --config FILE into flag tokens for keys not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args)
{
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty())
        return args;

    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot read config file " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object())
        throw InvalidInput("config file must hold a JSON object");

    std::vector<std::string> extra;
    for (const auto& [key, value] : doc.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || has_flag(args, flag))
            continue;
        if (value.is_boolean()) {
            if (value.get<bool>())
                extra.push_back(flag);
        } else if (value.is_array()) {
            extra.push_back(flag);
            for (const auto& item : value)
                extra.push_back(config_token(item));
        } else {
            extra.push_back(flag);
            extra.push_back(config_token(value));
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

template <class T>
ordered_json opt(const std::optional<T>& v)
{
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json echo(const RunConfig& c)
{
    ordered_json cfg;
    cfg["command"] = c.command;
    cfg["P"] = opt(c.P);
    cfg["Q"] = opt(c.Q);
    cfg["p"] = opt(c.p);
    cfg["q"] = opt(c.q);
    cfg["beta"] = opt(c.beta);
    cfg["nu"] = opt(c.nu);
    cfg["mu"] = c.mu;
    cfg["grid"] = opt(c.grid);
    cfg["mu_list"] = c.mu_list;
    cfg["output_path"] = c.output_path;
    cfg["format"] = c.format;
    cfg["seed"] = c.seed;
    cfg["j"] = opt(c.j);
    cfg["N"] = c.N;
    cfg["T"] = opt(c.T);
    cfg["threshold"] = c.threshold;
    cfg["q_list"] = c.q_list;
    cfg["quadrature_points"] = c.quadrature_points;
    cfg["report"] = c.report;
    ordered_json meta;
    meta["artifact"] = "rotor-bands";
    meta["version"] = ROTOR_VERSION;
    meta["config"] = std::move(cfg);
    return meta;
}

/// (P, Q) from either parameterization; p/q imply P = p, Q = q.
std::pair<long, long> lengths(const RunConfig& c)
{
    const bool upper = c.P || c.Q;
    const bool lower = c.p || c.q;
    if (!upper && !lower)
        throw InvalidInput("resonance parameters missing: give --p/--q or --P/--Q");
    if (upper && !(c.P && c.Q))
        throw InvalidInput("--P and --Q must be given together");
    if (lower && !(c.p && c.q))
        throw InvalidInput("--p and --q must be given together");
    if (upper && lower && (*c.P != *c.p || *c.Q != *c.q))
        throw InvalidInput("--P/--Q conflict with --p/--q");
    return upper ? std::pair{*c.P, *c.Q} : std::pair{*c.p, *c.q};
}

ResonanceParams resolve(const RunConfig& c)
{
    const auto [P, Q] = lengths(c);
    long nu = c.nu.value_or(0);
    double beta = 0.0;
    if (c.beta) {
        beta = *c.beta;
        if (!c.nu) {
            if (P < 1 || Q < 1)
                throw InvalidInput("resonance requires P >= 1 and Q >= 1");
            const auto admissible = admissible_nu(P, Q, beta);
            if (admissible.empty())
                throw NotAResonance(fmt::format("beta={} is not resonant for P={}, Q={}: need beta = nu/P + Q/2 "
                                                "(mod 1)",
                                                beta, P, Q));
            nu = admissible.front();
        }
    } else {
        beta = resonant_beta(P, Q, nu);
    }
    return validate_resonance(P, Q, beta, nu).with_kick(c.mu);
}

std::string summarize_range(const std::vector<double>& v)
{
    if (v.empty())
        return "none";
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return fmt::format("min {:.6g}, max {:.6g}", *lo, *hi);
}

std::vector<Cell> doubles(const std::vector<double>& v)
{
    return {v.begin(), v.end()};
}

Result cmd_bands(const RunConfig& c)
{
    const auto params = resolve(c);
    SweepOptions options;
    options.threads = c.threads;
    const auto bands = sweep_bands(params, c.grid.value_or(256), options);
    Result r;
    r.columns.push_back("theta");
    for (std::size_t b = 0; b < bands.band_count(); ++b)
        r.columns.push_back(fmt::format("phase_{}", b + 1));
    for (std::size_t k = 0; k < bands.grid.size(); ++k) {
        std::vector<Cell> row{bands.grid[k]};
        for (const auto& ph : bands.phases)
            row.emplace_back(ph[k]);
        r.rows.push_back(std::move(row));
    }
    r.footers.emplace_back("widths", doubles(bands.widths));
    r.summary = fmt::format("bands: {} bands on {} points, widths {}", bands.band_count(), bands.grid.size(),
                            summarize_range(bands.widths));
    return r;
}

Result cmd_flatness(const RunConfig& c)
{
    const auto params = resolve(c);
    SweepOptions options;
    options.threads = c.threads;
    const auto bands = sweep_bands(params, c.grid.value_or(256), options);
    const auto flat = flatness_test(bands, c.threshold);
    Result r;
    r.columns = {"band", "width", "flat"};
    std::size_t count = 0;
    for (std::size_t b = 0; b < flat.size(); ++b) {
        r.rows.push_back({static_cast<long long>(b + 1), bands.widths[b], static_cast<bool>(flat[b])});
        count += flat[b] ? 1 : 0;
    }
    if (count == flat.size())
        r.summary = "flatness: all bands flat";
    else if (count == 0)
        r.summary = "flatness: no band flat";
    else
        r.summary = fmt::format("flatness: {} of {} bands flat", count, flat.size());
    r.summary += fmt::format(" (threshold {:g}, widths {})", c.threshold, summarize_range(bands.widths));
    return r;
}

Result cmd_detgd(const RunConfig& c)
{
    std::vector<ResonanceParams> cases;
    if (!c.q_list.empty()) {
        const long p = c.p.value_or(c.P.value_or(1));
        for (long q : c.q_list)
            cases.push_back(validate_resonance(p, q, resonant_beta(p, q, 0), 0));
    } else {
        cases.push_back(resolve(c));
    }
    Result r;
    r.columns = {"P", "Q", "d", "det_modulus"};
    std::vector<double> values;
    for (const auto& params : cases) {
        const double v = gd_determinant(params);
        values.push_back(v);
        r.rows.push_back({static_cast<long long>(params.P), static_cast<long long>(params.Q),
                          static_cast<long long>((params.Q + 1) / 2), v});
    }
    r.summary = fmt::format("detgd: {} case(s), |det G^(d)| {}", cases.size(), summarize_range(values));
    return r;
}

Result cmd_coeffs(const RunConfig& c)
{
    const auto params = resolve(c);
    PathSumOptions options;
    options.threads = c.threads;
    if (!c.mu_list.empty())
        options.oracle_mu = c.mu_list;
    std::vector<int> bands;
    if (c.j)
        bands.push_back(*c.j);
    else
        for (int j = 1; j <= (params.q + 1) / 2; ++j)
            bands.push_back(j);

    Result r;
    r.columns = {"j", "alpha", "s_re", "s_im", "s_abs", "enumeration_gap", "oracle_abs", "oracle_mu", "relative_gap"};
    double worst = 0.0;
    for (int j : bands) {
        const auto s = path_sum_coefficient(params, j, options);
        r.rows.push_back({static_cast<long long>(j), static_cast<long long>(s.alpha), s.s.real(), s.s.imag(),
                          std::abs(s.s), s.enumeration_gap, std::abs(s.oracle_estimate), s.oracle_mu,
                          s.relative_gap});
        if (!std::isnan(s.relative_gap))
            worst = std::max(worst, s.relative_gap);
    }
    r.summary = fmt::format("coeffs: {} band(s) of q={}, max oracle gap {:.3e}", bands.size(), params.q, worst);
    return r;
}

Result cmd_scaling(const RunConfig& c)
{
    const auto params = resolve(c);
    const int j = c.j.value_or(1);
    std::vector<double> mus = c.mu_list;
    if (mus.empty())
        mus = {1e-4, 2e-4, 5e-4, 1e-3};
    const auto fit = scaling_fit(params, j, mus, c.threads);
    double alpha = std::numeric_limits<double>::quiet_NaN();
    try {
        alpha = alpha_exponent(j, params.q);
    } catch (const Error&) {
    }
    Result r;
    r.columns = {"mu", "derivative"};
    for (std::size_t k = 0; k < fit.mu.size(); ++k)
        r.rows.push_back({fit.mu[k], fit.derivative[k]});
    r.footers.emplace_back("exponent", std::vector<Cell>{fit.exponent});
    r.footers.emplace_back("alpha", std::vector<Cell>{alpha});
    r.footers.emplace_back("residual_rms", std::vector<Cell>{fit.residual_rms});
    r.summary = fmt::format("scaling: fitted exponent {:.4f} for band {} (alpha_j = {})", fit.exponent, j, alpha);
    return r;
}

Result cmd_gauss(const RunConfig& c)
{
    const auto [p, q] = lengths(c);
    const long T = c.T.value_or(q);
    const int j = c.j.value_or(1);
    const auto g = gauss_partial_sum(p, q, c.beta.value_or(0.5), c.N, j, T);
    Result r;
    r.columns = {"value_re", "value_im", "magnitude_squared", "case", "bound", "satisfied"};
    r.rows.push_back({g.value.real(), g.value.imag(), g.magnitude_squared, std::string(to_string(g.gauss_case)),
                      g.bound, g.satisfied});
    r.summary = fmt::format("gauss: |S|^2 = {:.12g}, case {}, bound {:.6g}, {}", g.magnitude_squared,
                            to_string(g.gauss_case), g.bound, g.satisfied ? "satisfied" : "violated");
    return r;
}

Result cmd_gamma(const RunConfig& c)
{
    const auto g = gamma_bound(c.quadrature_points);
    Result r;
    r.columns = {"x_star", "lambda_star", "value", "quadrature_error"};
    r.rows.push_back({g.x_star, g.lambda_star, g.value, g.quadrature_error});
    r.summary = fmt::format("gamma: maximum {:.7f} at x={:.5f}, lambda={:.5f}", g.value, g.x_star, g.lambda_star);
    return r;
}

Result cmd_decay(const RunConfig& c)
{
    std::vector<long> qs = c.q_list;
    if (qs.empty())
        qs = {3, 5, 7, 11, 13};
    const long p = c.p.value_or(c.P.value_or(1));
    const int j = c.j.value_or(1);
    const auto fit = decay_fit([p](long) { return p; }, qs, [j](long) { return j; });
    Result r;
    r.columns = {"q", "p", "j", "s_abs", "log_s_abs"};
    for (std::size_t i = 0; i < fit.q.size(); ++i)
        r.rows.push_back({static_cast<long long>(fit.q[i]), static_cast<long long>(fit.p[i]),
                          static_cast<long long>(fit.j[i]), fit.magnitude[i], std::log(fit.magnitude[i])});
    r.footers.emplace_back("rate", std::vector<Cell>{fit.rate});
    r.footers.emplace_back("intercept", std::vector<Cell>{fit.intercept});
    r.summary = fmt::format("decay: slope of log|s_{}| against q = {:.4f} over {} primes", j, fit.rate, fit.q.size());
    return r;
}

Result cmd_decomp_check(const RunConfig& c, bool& failed)
{
    const auto params = resolve(c);
    const std::size_t n = c.grid.value_or(static_cast<std::size_t>(params.Q) * 64);
    const double error = verify_direct_integral(params, n, std::nullopt, c.seed);
    failed = !(error < 1e-10);
    Result r;
    r.columns = {"Q", "grid", "seed", "max_error"};
    r.rows.push_back({static_cast<long long>(params.Q), static_cast<long long>(n), static_cast<long long>(c.seed),
                      error});
    r.summary = fmt::format("decomp-check: max discrepancy {:.3e} on {} points ({})", error, n,
                            failed ? "FAILED" : "ok");
    return r;
}

Result cmd_verify(const RunConfig& c, std::ostream& human, bool& failed)
{
    Result r;
    r.columns = {"id", "title", "passed", "seconds", "limit_seconds", "detail"};
    std::size_t passed = 0;
    const auto ids = criterion_ids();
    for (int id : ids) {
        const auto res = run_criterion(id);
        human << format_criterion(res) << '\n' << std::flush;
        passed += res.passed() ? 1 : 0;
        r.rows.push_back({static_cast<long long>(id), res.title, res.passed(), res.seconds, res.limit_seconds,
                          res.detail});
    }
    if (c.report) {
        for (const auto& d : report_diagnostics()) {
            human << fmt::format("[INFO] {} = {:.6g}  ({})", d.name, d.value, d.note) << '\n';
            r.footers.emplace_back(d.name, std::vector<Cell>{d.value, d.note});
        }
    }
    failed = passed != ids.size();
    r.summary = fmt::format("verify: {} of {} criteria passed", passed, ids.size());
    return r;
}

} // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    CLI::App app{"Band structure of quantum kicked-rotor resonances", "rotor-bands"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", ROTOR_VERSION);

    app.add_option("--P", cfg.P, "resonance numerator P (tau = 2 pi P / Q)");
    app.add_option("--Q", cfg.Q, "resonance length Q");
    app.add_option("--p", cfg.p, "reduced numerator p (implies P = p)");
    app.add_option("--q", cfg.q, "resonance order q (implies Q = q)");
    app.add_option("--beta", cfg.beta, "quasi-momentum; defaults to nu/P + Q/2 mod 1");
    app.add_option("--nu", cfg.nu, "integer selecting the resonant beta");
    app.add_option("--mu", cfg.mu, "kick strength");
    app.add_option("--grid", cfg.grid, "Bloch-angle grid size (decomp-check: lattice size)");
    app.add_option("--mu-list", cfg.mu_list, "kick strengths (scaling fit, oracle)")->delimiter(',');
    app.add_option("--output", cfg.output_path, "output file; stdout when omitted");
    app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--j", cfg.j, "band index");
    app.add_option("--N", cfg.N, "Gauss-sum exponent");
    app.add_option("--T", cfg.T, "Gauss-sum length");
    app.add_option("--threshold", cfg.threshold, "flatness threshold");
    app.add_option("--q-list", cfg.q_list, "list of orders q")->delimiter(',');
    app.add_option("--quadrature-points", cfg.quadrature_points, "grid nodes for the gamma optimization");
    app.add_flag("--report", cfg.report, "verify: add diagnostic ratios");
    app.add_option("--config", cfg.config_path, "JSON file whose keys mirror the flags; flags win");
    app.add_option("--threads", cfg.threads, "worker threads (0: all, capped by ROTOR_BANDS_THREADS)");

    for (const auto& [name, help] : kCommands)
        app.add_subcommand(name, help);

    try {
        auto merged = merge_config(args_in);
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << ROTOR_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    const Format format = cfg.format == "json" ? Format::Json : Format::Csv;

    try {
        bool failed = false;
        Result result;
        const std::string& cmd = cfg.command;
        if (cmd == "bands")
            result = cmd_bands(cfg);
        else if (cmd == "flatness")
            result = cmd_flatness(cfg);
        else if (cmd == "detgd")
            result = cmd_detgd(cfg);
        else if (cmd == "coeffs")
            result = cmd_coeffs(cfg);
        else if (cmd == "scaling")
            result = cmd_scaling(cfg);
        else if (cmd == "gauss")
            result = cmd_gauss(cfg);
        else if (cmd == "gamma")
            result = cmd_gamma(cfg);
        else if (cmd == "decay")
            result = cmd_decay(cfg);
        else if (cmd == "decomp-check")
            result = cmd_decomp_check(cfg, failed);
        else
            result = cmd_verify(cfg, cfg.output_path.empty() ? err : out, failed);

        const auto meta = echo(cfg);
        if (cfg.output_path.empty()) {
            out << render(result, format, meta);
            err << result.summary << '\n';
        } else {
            emit(result, format, meta, cfg.output_path);
            out << result.summary << '\n';
        }
        return failed ? kExitFailure : kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return is_usage_error(e) ? kExitUsage : kExitFailure;
    }
}

} // namespace rotor::app
