#include "balance/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "balance/errors.hpp"
#include "balance/parallel.hpp"

namespace balance {

InitMode parse_init_mode(const std::string& name) {
    if (name == "random") return InitMode::random;
    if (name == "all_positive") return InitMode::all_positive;
    if (name == "data_signs") return InitMode::data_signs;
    throw std::invalid_argument("unknown init mode '" + name + "'");
}

std::string to_string(InitMode mode) {
    switch (mode) {
        case InitMode::random: return "random";
        case InitMode::all_positive: return "all_positive";
        case InitMode::data_signs: return "data_signs";
    }
    return "unknown";
}

void validate(const SimConfig& cfg) {
    if (!(cfg.temperature > 0.0) || !std::isfinite(cfg.temperature))
        throw std::invalid_argument("temperature must be positive and finite");
    if (cfg.equil_sweeps < 1 || cfg.measure_sweeps < 1)
        throw std::invalid_argument("equil_sweeps and measure_sweeps must be >= 1");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t window, std::uint64_t temperature,
                          std::uint64_t replica) noexcept {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ window);
    h = splitmix64(h ^ temperature);
    return splitmix64(h ^ replica);
}

// ---------------------------------------------------------------------------

MetropolisChain::MetropolisChain(const SignedWeightedNetwork& net, const SignState& initial,
                                 double beta, std::uint64_t seed)
    : net_(net), signs_(initial), beta_(beta), rng_(seed), pick_link_(0, net.links() - 1) {
    const std::size_t n = net.size();
    if (initial.size() != n) throw std::invalid_argument("initial state size does not match network");
    const auto& w = net.weights();
    signed_ = w;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            signed_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *= initial(i, j);
    star_norm_ = w * w;
    link_table_.reserve(net.links());
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) link_table_.emplace_back(i, j);
    energy_raw_ = balance::energy(net, initial).raw;
}

double MetropolisChain::local_field(std::size_t i, std::size_t j) const {
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    return net_.weight(i, j) * signed_.col(ii).dot(signed_.col(jj));
}

bool MetropolisChain::step() {
    const auto [i, j] = link_table_[pick_link_(rng_)];
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    const double field = net_.weight(i, j) * signed_.col(ii).dot(signed_.col(jj));
    const double delta = 2.0 * signs_(i, j) * field;
    ++proposals_;
    if (delta > 0.0 && !(uniform_(rng_) < acceptance_probability(delta, beta_))) return false;
    signs_.flip(i, j);
    signed_(ii, jj) = -signed_(ii, jj);
    signed_(jj, ii) = signed_(ii, jj);
    energy_raw_ += delta;
    ++accepted_;
    return true;
}

void MetropolisChain::sweep() {
    for (std::size_t p = 0; p < link_table_.size(); ++p) step();
}

SignState MetropolisChain::state() const { return signs_; }

double MetropolisChain::resync_energy() {
    const double exact = measure().energy_raw;
    const double drift = energy_raw_ - exact;
    energy_raw_ = exact;
    return drift;
}

MetropolisChain::Snapshot MetropolisChain::measure() const {
    const Eigen::MatrixXd two_star = signed_ * signed_;
    const std::size_t n = net_.size();
    double q_norm = 0.0, q_raw = 0.0, e_raw = 0.0, links = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            const double w = net_.weight(i, j);
            const double m = two_star(ii, jj);
            const double norm = star_norm_(ii, jj);
            if (!(w > 0.0 && norm > 0.0)) throw ZeroWeightStar(i, j);
            q_norm += m / norm;
            q_raw += w * m;
            e_raw -= signed_(ii, jj) * m;
            links += signs_(i, j);
        }
    const double l = static_cast<double>(link_table_.size());
    Snapshot snap{};
    snap.q_norm = q_norm / l;
    snap.q_raw = q_raw / l;
    snap.energy_raw = e_raw / 3.0;  // each triangle is counted once per edge
    const double j_total = net_.total_triangle_weight();
    snap.energy_norm = j_total > 0.0 ? snap.energy_raw / j_total : 0.0;
    snap.link_mean = links / l;
    return snap;
}

// ---------------------------------------------------------------------------

SignState initial_state(const SignedWeightedNetwork& net, InitMode init, std::mt19937_64& rng) {
    switch (init) {
        case InitMode::random: return SignState::random(net.size(), rng);
        case InitMode::all_positive: return SignState::all_positive(net.size());
        case InitMode::data_signs: return net.data_signs();
    }
    throw std::invalid_argument("unknown init mode");
}

ObservableTrace metropolis_run_from(const SignedWeightedNetwork& net, SignState& state,
                                    const SimConfig& cfg) {
    validate(cfg);
    MetropolisChain chain(net, state, 1.0 / cfg.temperature, cfg.seed);
    for (std::size_t s = 0; s < cfg.equil_sweeps; ++s) chain.sweep();
    chain.reset_counters();

    double q_sum = 0.0, q_sq = 0.0, raw_sum = 0.0, e_sum = 0.0, e_sq = 0.0, link_sum = 0.0;
    for (std::size_t s = 0; s < cfg.measure_sweeps; ++s) {
        chain.sweep();
        const auto snap = chain.measure();
        q_sum += snap.q_norm;
        q_sq += snap.q_norm * snap.q_norm;
        raw_sum += snap.q_raw;
        e_sum += snap.energy_norm;
        e_sq += snap.energy_norm * snap.energy_norm;
        link_sum += snap.link_mean;
    }
    const double m = static_cast<double>(cfg.measure_sweeps);
    const auto spread = [m](double sum, double sq) {
        const double mean = sum / m;
        return std::sqrt(std::max(0.0, sq / m - mean * mean));
    };

    ObservableTrace trace;
    trace.q_norm_mean = q_sum / m;
    trace.q_norm_std = spread(q_sum, q_sq);
    trace.q_raw_mean = raw_sum / m;
    trace.energy_norm_mean = e_sum / m;
    trace.energy_norm_std = spread(e_sum, e_sq);
    trace.link_mean = link_sum / m;
    trace.acceptance_rate = chain.proposals() > 0
                                ? static_cast<double>(chain.accepted()) / static_cast<double>(chain.proposals())
                                : 0.0;
    state = chain.state();
    return trace;
}

ObservableTrace metropolis_run(const SignedWeightedNetwork& net, const SimConfig& cfg) {
    validate(cfg);
    std::mt19937_64 init_rng(splitmix64(cfg.seed ^ 0x5eedULL));
    SignState state = initial_state(net, cfg.init, init_rng);
    return metropolis_run_from(net, state, cfg);
}

// ---------------------------------------------------------------------------

ExactMeans exact_ensemble(const SignedWeightedNetwork& net, double beta) {
    const std::size_t n = net.size();
    const std::size_t links = net.links();
    if (links > kMaxEnumerationLinks) throw TooLarge(links, kMaxEnumerationLinks);
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");

    std::vector<std::pair<std::size_t, std::size_t>> table;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) table.emplace_back(i, j);

    Eigen::MatrixXd a = net.weights();  // start from all-positive signs
    const Eigen::MatrixXd norm = a * a;
    const double j_total = net.total_triangle_weight();
    for (const auto& [i, j] : table) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        if (!(net.weight(i, j) > 0.0 && norm(ii, jj) > 0.0)) throw ZeroWeightStar(i, j);
    }
    std::vector<int> sign(links, 1);

    // Boltzmann weights are taken relative to the ground-state bound E >= -j_total,
    // so every weight is <= 1 and the all-positive state contributes exactly 1.
    double z = 0.0;
    ExactMeans sums;
    const std::uint64_t states = std::uint64_t{1} << links;
    for (std::uint64_t g = 0; g < states; ++g) {
        if (g > 0) {
            const auto bit = static_cast<std::size_t>(std::countr_zero(g));  // Gray-code step
            const auto [i, j] = table[bit];
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            a(ii, jj) = -a(ii, jj);
            a(jj, ii) = -a(jj, ii);
            sign[bit] = -sign[bit];
        }
        const Eigen::MatrixXd m = a * a;
        double q_norm = 0.0, q_raw = 0.0, e_raw = 0.0, link_sum = 0.0;
        for (std::size_t l = 0; l < links; ++l) {
            const auto ii = static_cast<Eigen::Index>(table[l].first);
            const auto jj = static_cast<Eigen::Index>(table[l].second);
            q_norm += m(ii, jj) / norm(ii, jj);
            q_raw += net.weights()(ii, jj) * m(ii, jj);
            e_raw -= a(ii, jj) * m(ii, jj);
            link_sum += sign[l];
        }
        e_raw /= 3.0;
        const double weight = std::exp(-beta * (e_raw + j_total));
        z += weight;
        sums.q_norm += weight * q_norm / static_cast<double>(links);
        sums.q_raw += weight * q_raw / static_cast<double>(links);
        sums.energy_raw += weight * e_raw;
        sums.link_mean += weight * link_sum / static_cast<double>(links);
    }

    ExactMeans out;
    out.q_norm = sums.q_norm / z;
    out.q_raw = sums.q_raw / z;
    out.energy_raw = sums.energy_raw / z;
    out.energy_norm = j_total > 0.0 ? out.energy_raw / j_total : 0.0;
    out.link_mean = sums.link_mean / z;
    return out;
}

// ---------------------------------------------------------------------------

double SweepResult::mean(std::size_t t, double ObservableTrace::*field) const {
    const auto& row = traces.at(t);
    if (row.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& tr : row) sum += tr.*field;
    return sum / static_cast<double>(row.size());
}

std::vector<double> SweepResult::mean_curve(double ObservableTrace::*field) const {
    std::vector<double> out(temperatures.size());
    for (std::size_t t = 0; t < temperatures.size(); ++t) out[t] = mean(t, field);
    return out;
}

std::vector<double> temperature_grid(double lo, double hi, std::size_t points, bool log_spacing) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("temperature grid needs 0 < lo < hi");
    if (points < 2) throw std::invalid_argument("temperature grid needs at least 2 points");
    std::vector<double> grid(points);
    const double last = static_cast<double>(points - 1);
    for (std::size_t p = 0; p < points; ++p) {
        const double f = static_cast<double>(p) / last;
        grid[p] = log_spacing ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

SweepResult temperature_sweep(const SignedWeightedNetwork& net, const std::vector<double>& grid,
                              std::size_t replicas, const SimConfig& base,
                              const SweepOptions& options) {
    if (grid.empty()) throw std::invalid_argument("temperature grid is empty");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    for (std::size_t t = 1; t < grid.size(); ++t)
        if (!(grid[t] > grid[t - 1])) throw std::invalid_argument("temperature grid must be strictly ascending");

    SweepResult result;
    result.temperatures = grid;
    result.replicas = replicas;
    result.traces.assign(grid.size(), std::vector<ObservableTrace>(replicas));

    const auto config_at = [&](std::size_t t, std::size_t r) {
        SimConfig cfg = base;
        cfg.temperature = grid[t];
        cfg.seed = derive_seed(base.seed, options.window_index, t, r);
        return cfg;
    };

    if (!options.anneal) {
        parallel_for(grid.size() * replicas, options.threads, [&](std::size_t task) {
            const std::size_t t = task / replicas, r = task % replicas;
            result.traces[t][r] = metropolis_run(net, config_at(t, r));
        });
    } else {
        parallel_for(replicas, options.threads, [&](std::size_t r) {
            std::mt19937_64 init_rng(splitmix64(config_at(0, r).seed ^ 0x5eedULL));
            SignState state = initial_state(net, base.init, init_rng);
            for (std::size_t t = 0; t < grid.size(); ++t)
                result.traces[t][r] = metropolis_run_from(net, state, config_at(t, r));
        });
    }

    if (grid.size() >= 3) result.t_c = estimate_tc(result, options.min_drop);
    return result;
}

std::optional<double> estimate_tc(const std::vector<double>& temperatures,
                                  const std::vector<double>& q_norm, double min_drop) {
    if (temperatures.size() != q_norm.size())
        throw std::invalid_argument("temperature and q_norm curves differ in length");
    if (temperatures.size() < 3) throw std::invalid_argument("critical temperature needs >= 3 grid points");
    std::size_t best = 0;
    double best_drop = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < q_norm.size(); ++t) {
        const double drop = q_norm[t] - q_norm[t + 1];
        if (drop > best_drop) {
            best_drop = drop;
            best = t;
        }
    }
    if (best_drop < min_drop) return std::nullopt;
    return 0.5 * (temperatures[best] + temperatures[best + 1]);
}

std::optional<double> estimate_tc(const SweepResult& sweep, double min_drop) {
    return estimate_tc(sweep.temperatures, sweep.mean_curve(&ObservableTrace::q_norm_mean), min_drop);
}

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "T,q_norm_mean,q_norm_std,q_raw_mean,energy_norm_mean,energy_norm_std,link_mean,"
           "acceptance_rate,replicas\n";
    for (std::size_t t = 0; t < sweep.temperatures.size(); ++t) {
        out << format_double(sweep.temperatures[t]);
        for (auto field : {&ObservableTrace::q_norm_mean, &ObservableTrace::q_norm_std,
                           &ObservableTrace::q_raw_mean, &ObservableTrace::energy_norm_mean,
                           &ObservableTrace::energy_norm_std, &ObservableTrace::link_mean,
                           &ObservableTrace::acceptance_rate})
            out << ',' << format_double(sweep.mean(t, field));
        out << ',' << sweep.replicas << '\n';
    }
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace balance
