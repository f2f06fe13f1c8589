#include "balance/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "balance/errors.hpp"
#include "balance/meanfield.hpp"
#include "balance/parallel.hpp"

namespace balance {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

void write_json(const fs::path& path, const json& doc) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

std::size_t thread_count(const PipelineConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : default_thread_count();
}

std::vector<WindowRecord> selected_windows(const PipelineConfig& cfg, const Layout& layout) {
    auto windows = load_windows(layout);
    if (!cfg.window) return windows;
    for (const auto& w : windows)
        if (w.window_id == *cfg.window) return {w};
    throw Error("window " + *cfg.window + " not found in " + layout.fits().string());
}

json optional_number(const std::optional<double>& value) {
    return value ? json(*value) : json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<WindowPreset>& builtin_presets() {
    static const std::vector<WindowPreset> presets{
        {"off2005", "2005-07-28", "2005-10-06"},
        {"on2008", "2008-10-01", "2008-12-10"},
        {"off2019", "2018-11-15", "2019-01-30"},
        {"on2020", "2020-01-29", "2020-04-08"},
    };
    return presets;
}

const WindowPreset& find_preset(const std::string& name) {
    for (const auto& p : builtin_presets())
        if (p.name == name) return p;
    throw std::invalid_argument("unknown window preset '" + name + "'");
}

std::vector<double> PipelineConfig::grid() const { return temperature_grid(t_lo, t_hi, t_points, t_log); }

void validate(const PipelineConfig& cfg) {
    if (cfg.prices_path.has_value() == cfg.synth)
        throw std::invalid_argument("exactly one of --prices and --synth must be given");
    if (cfg.synth) validate(cfg.synth_spec);
    if (cfg.tau < 3) throw std::invalid_argument("tau must be >= 3");
    if (!(cfg.t_lo > 0.0 && cfg.t_lo < cfg.t_hi)) throw std::invalid_argument("temperature grid needs 0 < t-lo < t-hi");
    if (cfg.t_points < 3) throw std::invalid_argument("temperature grid needs at least 3 points");
    if (cfg.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (cfg.equil_sweeps < 1 || cfg.measure_sweeps < 1) throw std::invalid_argument("sweep counts must be >= 1");
    if (cfg.bins < 1) throw std::invalid_argument("bins must be >= 1");
    if (!(cfg.mf_sigma >= 0.0)) throw std::invalid_argument("mf-sigma must be >= 0");
    if (cfg.window && !is_window_id(*cfg.window)) throw std::invalid_argument("malformed window id '" + *cfg.window + "'");
    for (const auto& p : cfg.presets) find_preset(p);
}

std::string config_hash(const PipelineConfig& cfg) {
    std::ostringstream canon;
    canon << "tau=" << cfg.tau << "\nstride=" << cfg.effective_stride();
    for (const auto& p : cfg.presets) canon << "\npreset=" << p;
    canon << "\nt_lo=" << format_double(cfg.t_lo) << "\nt_hi=" << format_double(cfg.t_hi)
          << "\nt_points=" << cfg.t_points << "\nt_log=" << cfg.t_log << "\nreplicas=" << cfg.replicas
          << "\nequil=" << cfg.equil_sweeps << "\nmeasure=" << cfg.measure_sweeps << "\nseed=" << cfg.seed
          << "\ninit=" << to_string(cfg.init) << "\nanneal=" << cfg.anneal
          << "\nmin_drop=" << format_double(cfg.min_drop)
          << "\nzero_sign=" << (cfg.zero_sign == ZeroSignPolicy::error ? "error" : "positive") << '\n';
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string window_id(std::size_t start_index) { return "win_" + std::to_string(start_index); }

bool is_window_id(const std::string& text) {
    static const std::regex pattern("win_[0-9]+");
    return std::regex_match(text, pattern);
}

std::vector<WindowRecord> load_windows(const Layout& layout) {
    const json doc = read_json(layout.fits());
    std::vector<WindowRecord> out;
    try {
        for (const auto& w : doc.at("windows")) {
            WindowRecord r;
            r.window_id = w.at("window_id").get<std::string>();
            r.ordinal = w.at("ordinal").get<std::size_t>();
            r.start_index = w.at("start_index").get<std::size_t>();
            r.tau = w.at("tau").get<std::size_t>();
            r.start_date = w.at("start_date").get<std::string>();
            r.end_date = w.at("end_date").get<std::string>();
            const auto& fit = w.at("gaussian_fit");
            r.fit.mean = fit.at("mean").get<double>();
            r.fit.std = fit.at("std").get<double>();
            r.fit.count = fit.at("count").get<std::size_t>();
            out.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw Error("malformed window manifest " + layout.fits().string() + ": " + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_synth(const PipelineConfig& cfg) {
    validate(cfg.synth_spec);
    const Layout layout{cfg.out};
    fs::create_directories(layout.root);
    write_prices(layout.prices(), synthesize_market(cfg.synth_spec));
    std::cerr << "wrote " << layout.prices().string() << '\n';
    return 0;
}

int cmd_corr(const PipelineConfig& cfg) {
    validate(cfg);
    const Layout layout{cfg.out};
    fs::create_directories(layout.root / "corr");
    fs::create_directories(layout.root / "cluster");

    PriceTable prices;
    if (cfg.synth) {
        prices = synthesize_market(cfg.synth_spec);
        write_prices(layout.prices(), prices);
    } else {
        prices = load_prices(*cfg.prices_path, cfg.missing);
    }
    const ReturnMatrix returns = log_returns(prices);

    std::vector<WindowSpec> specs;
    if (cfg.presets.empty()) {
        for (auto start : window_starts(returns.rows(), cfg.tau, cfg.effective_stride()))
            specs.push_back({start, cfg.tau, cfg.effective_stride()});
        if (specs.empty())
            warn("tau = " + std::to_string(cfg.tau) + " exceeds the " + std::to_string(returns.rows()) +
                 " available return rows; no windows produced");
    } else {
        for (const auto& name : cfg.presets) {
            const auto& preset = find_preset(name);
            std::size_t first = returns.rows(), count = 0;
            for (std::size_t t = 0; t < returns.rows(); ++t)
                if (returns.dates[t] >= preset.start_date && returns.dates[t] <= preset.end_date) {
                    first = std::min(first, t);
                    ++count;
                }
            if (count < 3) {
                warn("preset " + name + " covers " + std::to_string(count) + " return rows; skipped");
                continue;
            }
            specs.push_back({first, count, count});
        }
    }

    json windows = json::array();
    json skipped = json::array();
    for (const auto& spec : specs) {
        const std::string id = window_id(spec.start_index);
        CorrelationMatrix corr;
        try {
            corr = correlation_matrix(returns, spec);
        } catch (const ZeroVariance& e) {
            if (cfg.strict) {
                std::cerr << "error: window " << id << ": " << e.what() << '\n';
                return 1;
            }
            warn("window " + id + " skipped: " + e.what());
            skipped.push_back({{"window_id", id}, {"error", e.what()}});
            continue;
        }
        write_correlation(layout.corr(id), corr);
        write_cluster_order(layout.cluster(id), corr, cluster_order(corr));
        const GaussianFit fit = fit_gaussian(corr);
        windows.push_back({{"window_id", id},
                           {"ordinal", windows.size()},
                           {"start_index", spec.start_index},
                           {"tau", spec.tau},
                           {"start_date", returns.dates[spec.start_index]},
                           {"end_date", returns.dates[spec.start_index + spec.tau - 1]},
                           {"gaussian_fit", {{"mean", fit.mean}, {"std", fit.std}, {"count", fit.count}}}});
    }
    write_json(layout.fits(), {{"tickers", prices.tickers}, {"windows", windows}, {"skipped", skipped}});
    std::cerr << "wrote " << windows.size() << " correlation windows to " << (layout.root / "corr").string() << '\n';
    return 0;
}

int cmd_net(const PipelineConfig& cfg) {
    const Layout layout{cfg.out};
    fs::create_directories(layout.root / "landscape");
    fs::create_directories(layout.root / "cluster");
    LandscapeOptions options;
    options.bins = cfg.bins;
    options.cap = cfg.cap;
    int status = 0;
    for (const auto& w : selected_windows(cfg, layout)) {
        try {
            const CorrelationMatrix corr = load_correlation(layout.corr(w.window_id));
            const SignedWeightedNetwork net = build_network(corr, cfg.zero_sign);
            const Histogram2D hist = energy_landscape(net, net.data_signs(), options);
            write_landscape(layout.landscape(w.window_id), hist);
            write_cluster_order(layout.cluster(w.window_id), corr, cluster_order(corr));
            const EnergyReport e = energy(net, net.data_signs());
            write_json(layout.net(w.window_id),
                       {{"window_id", w.window_id},
                        {"energy", {{"raw", e.raw}, {"normalized", e.normalized}, {"j_total", e.j_total}}},
                        {"q_norm_data", mean_two_star(net, net.data_signs())},
                        {"q_raw_data", mean_two_star_raw(net, net.data_signs())},
                        {"landscape", {{"bins", options.bins}, {"range", options.range},
                                       {"cap", options.cap}, {"total", hist.total()}}}});
        } catch (const Error& e) {
            std::cerr << "error: window " << w.window_id << ": " << e.what() << '\n';
            status = 1;
        }
    }
    return status;
}

int cmd_sim(const PipelineConfig& cfg) {
    const Layout layout{cfg.out};
    fs::create_directories(layout.root / "sweep");
    fs::create_directories(layout.root / "summary");
    const auto grid = cfg.grid();
    const std::string hash = config_hash(cfg);

    SimConfig base;
    base.init = cfg.init;
    base.equil_sweeps = cfg.equil_sweeps;
    base.measure_sweeps = cfg.measure_sweeps;
    base.seed = cfg.seed;

    for (const auto& w : selected_windows(cfg, layout)) {
        json summary{{"window_id", w.window_id},
                     {"start_date", w.start_date},
                     {"end_date", w.end_date},
                     {"gaussian_fit", {{"mean", w.fit.mean}, {"std", w.fit.std}}},
                     {"config_hash", hash}};
        try {
            const CorrelationMatrix corr = load_correlation(layout.corr(w.window_id));
            const SignedWeightedNetwork net = build_network(corr, cfg.zero_sign);
            SweepOptions options;
            options.window_index = w.ordinal;
            options.anneal = cfg.anneal;
            options.threads = thread_count(cfg);
            options.min_drop = cfg.min_drop;
            const SweepResult sweep = temperature_sweep(net, grid, cfg.replicas, base, options);
            write_sweep(layout.sweep(w.window_id), sweep);
            summary["t_c"] = sweep.t_c.value_or(0.0);
            summary["tc_detected"] = sweep.t_c.has_value();
            summary["q_norm_lowest_t"] = sweep.mean(0, &ObservableTrace::q_norm_mean);
            summary["sweep_csv"] = fs::relative(layout.sweep(w.window_id), layout.root).generic_string();
        } catch (const std::exception& e) {
            std::cerr << "error: window " << w.window_id << ": " << e.what() << '\n';
            summary["t_c"] = nullptr;
            summary["tc_detected"] = false;
            summary["error"] = e.what();
        }
        write_json(layout.summary(w.window_id), summary);
    }
    return cmd_report(cfg);
}

int cmd_mf(const PipelineConfig& cfg) {
    const Layout layout{cfg.out};
    fs::create_directories(layout.root / "meanfield");
    const auto grid = cfg.grid();

    for (const auto& w : selected_windows(cfg, layout)) {
        json doc{{"window_id", w.window_id}};
        try {
            const CorrelationMatrix corr = load_correlation(layout.corr(w.window_id));
            const SignedWeightedNetwork net = build_network(corr, cfg.zero_sign);
            const int n = static_cast<int>(net.size());

            WeightDistribution weights;
            json params{{"n", n}};
            if (cfg.mf_mu) {
                weights = GaussianWeights{*cfg.mf_mu, cfg.mf_sigma};
                params["weights"] = {{"kind", "gaussian"}, {"mu", *cfg.mf_mu}, {"sigma", cfg.mf_sigma}};
            } else {
                auto sample = triangle_weights(net, 1'000'000, cfg.seed);
                double mean = 0.0;
                for (double j : sample) mean += j;
                mean /= static_cast<double>(sample.size());
                params["weights"] = {{"kind", "empirical"}, {"sample_size", sample.size()}, {"sample_mean", mean}};
                weights = EmpiricalWeights{std::move(sample)};
            }
            params["t_lo"] = cfg.t_lo;
            doc["params"] = params;

            json curve = json::array();
            for (double t : grid) {
                json point{{"T", t}};
                try {
                    point["q_star"] = solve_fixed_point({n, 1.0 / t, weights}, positive_branch_init(n, weights)).q_star;
                } catch (const NoConvergence& e) {
                    point["q_star"] = nullptr;
                    point["error"] = e.what();
                }
                curve.push_back(point);
            }
            doc["branch_curve"] = curve;

            std::optional<double> t_c;
            if (positive_branch_exists(n, weights, cfg.t_lo)) {
                double t_hi = cfg.t_hi;
                for (int doubling = 0; positive_branch_exists(n, weights, t_hi); ++doubling) {
                    if (doubling == 60) throw Error("positive branch persists at every probed temperature");
                    t_hi *= 2.0;
                }
                t_c = critical_temperature_mf(n, weights, cfg.t_lo, t_hi);
            }
            doc["t_c"] = optional_number(t_c);
        } catch (const std::exception& e) {
            std::cerr << "error: window " << w.window_id << ": " << e.what() << '\n';
            if (!doc.contains("t_c")) doc["t_c"] = nullptr;
            doc["error"] = e.what();
        }
        if (fs::exists(layout.summary(w.window_id))) {
            const json summary = read_json(layout.summary(w.window_id));
            doc["t_c_mc"] = summary.value("tc_detected", false) ? summary.at("t_c") : json(nullptr);
        }
        write_json(layout.meanfield(w.window_id), doc);
    }
    return cmd_report(cfg);
}

int cmd_report(const PipelineConfig& cfg) {
    const Layout layout{cfg.out};
    const auto windows = load_windows(layout);
    json rows = json::array();
    std::ofstream timeline(layout.timeline());
    if (!timeline) throw Error("cannot write " + layout.timeline().string());
    timeline << "window_id,start_date,end_date,t_c,t_c_mf,fit_mean,fit_std\n";

    for (const auto& w : windows) {
        json row{{"window_id", w.window_id},
                 {"start_date", w.start_date},
                 {"end_date", w.end_date},
                 {"gaussian_fit", {{"mean", w.fit.mean}, {"std", w.fit.std}}},
                 {"t_c", nullptr},
                 {"tc_detected", false},
                 {"t_c_mf", nullptr}};
        if (fs::exists(layout.summary(w.window_id))) {
            const json summary = read_json(layout.summary(w.window_id));
            row["t_c"] = summary.at("t_c");
            row["tc_detected"] = summary.value("tc_detected", false);
            row["config_hash"] = summary.value("config_hash", "");
            if (summary.contains("error")) row["error"] = summary.at("error");
        }
        if (fs::exists(layout.meanfield(w.window_id))) {
            const json mf = read_json(layout.meanfield(w.window_id));
            row["t_c_mf"] = mf.at("t_c");
            if (mf.contains("error")) row["mf_error"] = mf.at("error");
        }
        const auto cell = [](const json& v) { return v.is_number() ? format_double(v.get<double>()) : std::string(); };
        timeline << w.window_id << ',' << w.start_date << ',' << w.end_date << ',' << cell(row["t_c"]) << ','
                 << cell(row["t_c_mf"]) << ',' << format_double(w.fit.mean) << ',' << format_double(w.fit.std)
                 << '\n';
        rows.push_back(std::move(row));
    }
    write_json(layout.report(), {{"windows", rows}, {"window_count", rows.size()}});
    return 0;
}

}  // namespace balance
