#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "balance/network.hpp"

namespace balance {

enum class InitMode { random, all_positive, data_signs };

InitMode parse_init_mode(const std::string& name);
std::string to_string(InitMode mode);

struct SimConfig {
    double temperature = 1.0;  // k_B = 1, beta = 1 / temperature
    InitMode init = InitMode::all_positive;
    std::size_t equil_sweeps = 2000;
    std::size_t measure_sweeps = 2000;
    std::uint64_t seed = 1;
};

void validate(const SimConfig& cfg);

/// Metropolis acceptance probability min(1, exp(-beta * delta)).
inline double acceptance_probability(double delta, double beta) {
    return delta <= 0.0 ? 1.0 : std::exp(-beta * delta);
}

/// Averages over the measurement sweeps of one Metropolis run.
struct ObservableTrace {
    double q_norm_mean = 0.0;
    double q_norm_std = 0.0;
    double q_raw_mean = 0.0;
    double energy_norm_mean = 0.0;
    double energy_norm_std = 0.0;
    double link_mean = 0.0;
    double acceptance_rate = 0.0;
};

/// Single-link-flip Metropolis chain over the signs of a fixed network.
///
/// Internally keeps A_ij = w_ij s_ij so that the local field on (i,j) is
/// w_ij * <A_i, A_j>, an O(N) dot product. The energy is tracked
/// incrementally from the accepted flips.
class MetropolisChain {
public:
    MetropolisChain(const SignedWeightedNetwork& net, const SignState& initial, double beta,
                    std::uint64_t seed);

    /// One proposal on a uniformly chosen link. Returns true if accepted.
    bool step();
    /// N(N-1)/2 proposals.
    void sweep();

    double local_field(std::size_t i, std::size_t j) const;
    SignState state() const;
    double tracked_energy_raw() const noexcept { return energy_raw_; }
    /// Replaces the tracked energy with a full recomputation and returns the drift removed.
    double resync_energy();

    std::size_t proposals() const noexcept { return proposals_; }
    std::size_t accepted() const noexcept { return accepted_; }
    void reset_counters() noexcept { proposals_ = accepted_ = 0; }

    struct Snapshot {
        double q_norm;
        double q_raw;
        double energy_raw;
        double energy_norm;
        double link_mean;
    };
    /// All observables from one O(N^3) product A*A.
    Snapshot measure() const;

private:
    const SignedWeightedNetwork& net_;
    SignState signs_;
    Eigen::MatrixXd signed_;       // A = w .* s
    Eigen::MatrixXd star_norm_;    // sum_k w_ik w_kj, the two-star normalizer without w_ij
    std::vector<std::pair<std::uint32_t, std::uint32_t>> link_table_;
    double beta_;
    double energy_raw_ = 0.0;
    std::mt19937_64 rng_;
    std::uniform_int_distribution<std::size_t> pick_link_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::size_t proposals_ = 0;
    std::size_t accepted_ = 0;
};

SignState initial_state(const SignedWeightedNetwork& net, InitMode init, std::mt19937_64& rng);

ObservableTrace metropolis_run(const SignedWeightedNetwork& net, const SimConfig& cfg);

/// Same as metropolis_run but starting from (and leaving behind) a caller-owned state.
ObservableTrace metropolis_run_from(const SignedWeightedNetwork& net, SignState& state,
                                    const SimConfig& cfg);

struct ExactMeans {
    double q_norm = 0.0;
    double q_raw = 0.0;
    double energy_norm = 0.0;
    double energy_raw = 0.0;
    double link_mean = 0.0;
};

inline constexpr std::size_t kMaxEnumerationLinks = 24;

/// Boltzmann averages by summing over all 2^L sign states.
ExactMeans exact_ensemble(const SignedWeightedNetwork& net, double beta);

struct SweepResult {
    std::vector<double> temperatures;
    std::vector<std::vector<ObservableTrace>> traces;  // [temperature][replica]
    std::size_t replicas = 0;
    std::optional<double> t_c;

    /// Replica average of one observable at grid index t.
    double mean(std::size_t t, double ObservableTrace::*field) const;
    std::vector<double> mean_curve(double ObservableTrace::*field) const;
};

struct SweepOptions {
    std::size_t window_index = 0;  // feeds seed derivation
    bool anneal = false;           // carry each replica's state up the temperature grid
    std::size_t threads = 1;
    double min_drop = 0.2;
};

SweepResult temperature_sweep(const SignedWeightedNetwork& net, const std::vector<double>& grid,
                              std::size_t replicas, const SimConfig& base,
                              const SweepOptions& options = {});

/// Midpoint of the adjacent grid pair with the largest drop of q_norm, or nullopt
/// when that drop is below min_drop.
std::optional<double> estimate_tc(const std::vector<double>& temperatures,
                                  const std::vector<double>& q_norm, double min_drop = 0.2);
std::optional<double> estimate_tc(const SweepResult& sweep, double min_drop = 0.2);

std::vector<double> temperature_grid(double lo, double hi, std::size_t points, bool log_spacing);

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for one (window, temperature, replica) run: each index is folded into
/// the running state and re-mixed, so neighbouring indices give unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t window, std::uint64_t temperature,
                          std::uint64_t replica) noexcept;

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep);

}  // namespace balance
