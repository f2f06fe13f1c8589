#include "balance/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "balance/errors.hpp"
#include "balance/pipeline.hpp"

namespace balance {

namespace {

const CLI::Validator kUnitInterval(
    [](std::string& text) -> std::string {
        try {
            const double v = std::stod(text);
            if (v >= 0.0 && v < 1.0) return {};
        } catch (const std::exception&) {
        }
        return "value must lie in [0, 1), got " + text;
    },
    "[0,1)");

const CLI::Validator kWindowId(
    [](std::string& text) -> std::string {
        return is_window_id(text) ? std::string{} : "malformed window id '" + text + "' (expected win_<start_index>)";
    },
    "WINDOW_ID");

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Weighted balance-theory analysis of stock correlation networks"};
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    PipelineConfig cfg;
    std::string prices_path, missing = "strict", spacing = "log", init = "all_positive", zero_sign = "error";
    std::string window;
    double mf_mu = 0.0;

    app.add_option("--prices", prices_path, "wide price CSV: date,TICK1,TICK2,...");
    app.add_flag("--synth", cfg.synth, "generate a synthetic panel instead of reading --prices");
    app.add_option("--n", cfg.synth_spec.n_assets, "synthetic: number of assets")->check(CLI::Range(3, 100000));
    app.add_option("--days", cfg.synth_spec.n_days, "synthetic: number of trading days")->check(CLI::Range(2, 10000000));
    app.add_option("--rho", cfg.synth_spec.rho, "synthetic: pairwise return correlation")->check(kUnitInterval);
    app.add_option("--vol", cfg.synth_spec.daily_vol, "synthetic: daily log-return volatility")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "base seed for synthesis and simulation");
    app.add_option("--missing", missing, "missing-data policy")->check(CLI::IsMember({"strict", "forward_fill"}));
    app.add_option("--tau", cfg.tau, "window length in trading days")->check(CLI::Range(3, 1000000));
    app.add_option("--stride", cfg.stride, "spacing between window starts (default: tau)");
    app.add_option("--preset", cfg.presets, "named date window(s) instead of strided windows")
        ->check(CLI::IsMember({"off2005", "on2008", "off2019", "on2020"}));
    app.add_option("--t-lo", cfg.t_lo, "lowest temperature")->check(CLI::PositiveNumber);
    app.add_option("--t-hi", cfg.t_hi, "highest temperature")->check(CLI::PositiveNumber);
    app.add_option("--t-points", cfg.t_points, "temperature grid size")->check(CLI::Range(3, 100000));
    app.add_option("--t-spacing", spacing, "temperature grid spacing")->check(CLI::IsMember({"linear", "log"}));
    app.add_option("--replicas", cfg.replicas, "independent runs per temperature")->check(CLI::Range(1, 100000));
    app.add_option("--equil", cfg.equil_sweeps, "equilibration sweeps")->check(CLI::Range(1, 100000000));
    app.add_option("--measure", cfg.measure_sweeps, "measurement sweeps")->check(CLI::Range(1, 100000000));
    app.add_option("--init", init, "initial link signs")->check(CLI::IsMember({"random", "all_positive", "data_signs"}));
    app.add_flag("--anneal", cfg.anneal, "carry states up the temperature grid instead of re-initializing");
    app.add_option("--min-drop", cfg.min_drop, "smallest q_norm drop that counts as a transition")->check(CLI::NonNegativeNumber);
    app.add_option("--zero-sign", zero_sign, "handling of exactly-zero correlations")->check(CLI::IsMember({"error", "positive"}));
    app.add_option("--bins", cfg.bins, "energy landscape bins per axis")->check(CLI::Range(1, 100000));
    app.add_option("--cap", cfg.cap, "landscape display saturation count");
    app.add_option("--window", window, "restrict to one window id")->check(kWindowId);
    auto* mu_opt = app.add_option("--mf-mu", mf_mu, "mean-field: Gaussian weight mean (overrides empirical weights)");
    app.add_option("--mf-sigma", cfg.mf_sigma, "mean-field: Gaussian weight std")->check(CLI::NonNegativeNumber);
    app.add_option("--out", cfg.out, "output directory");
    app.add_option("--threads", cfg.threads, "worker cap (default: BALANCE_THREADS or all cores)");
    app.add_flag("--strict", cfg.strict, "abort instead of skipping windows with zero variance");

    auto* synth = app.add_subcommand("synth", "write a synthetic price panel to <out>/prices.csv");
    auto* corr = app.add_subcommand("corr", "windowed correlation matrices, Gaussian fits and cluster orders");
    auto* net = app.add_subcommand("net", "energy-energy landscape and cluster order per window");
    auto* sim = app.add_subcommand("sim", "Metropolis temperature sweeps and critical temperatures");
    auto* mf = app.add_subcommand("mf", "mean-field self-consistency per window");
    auto* report = app.add_subcommand("report", "aggregate per-window results into report.json");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!prices_path.empty()) cfg.prices_path = prices_path;
        cfg.missing = parse_missing_policy(missing);
        cfg.t_log = spacing == "log";
        cfg.init = parse_init_mode(init);
        cfg.zero_sign = zero_sign == "positive" ? ZeroSignPolicy::positive : ZeroSignPolicy::error;
        if (!window.empty()) cfg.window = window;
        if (mu_opt->count() > 0) cfg.mf_mu = mf_mu;
        cfg.synth_spec.seed = cfg.seed;
        if (*synth) cfg.synth = true;
        if (*corr) validate(cfg);
        else if (!(cfg.t_lo < cfg.t_hi)) throw std::invalid_argument("temperature grid needs t-lo < t-hi");
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        if (*synth) return cmd_synth(cfg);
        if (*corr) return cmd_corr(cfg);
        if (*net) return cmd_net(cfg);
        if (*sim) return cmd_sim(cfg);
        if (*mf) return cmd_mf(cfg);
        if (*report) return cmd_report(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace balance
