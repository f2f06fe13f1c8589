#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "balance/ingest.hpp"

namespace balance {

/// Symmetric matrix of link signs (+1/-1 off the diagonal, 0 on it).
/// These are the dynamical variables; weights stay fixed.
class SignState {
public:
    SignState() = default;
    explicit SignState(std::size_t n, std::int8_t fill = 1);

    static SignState all_positive(std::size_t n) { return SignState(n, 1); }
    static SignState random(std::size_t n, std::mt19937_64& rng);

    std::size_t size() const noexcept { return n_; }
    int operator()(std::size_t i, std::size_t j) const noexcept { return signs_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, int sign);
    void flip(std::size_t i, std::size_t j) noexcept {
        signs_[i * n_ + j] = static_cast<std::int8_t>(-signs_[i * n_ + j]);
        signs_[j * n_ + i] = static_cast<std::int8_t>(-signs_[j * n_ + i]);
    }

    bool operator==(const SignState&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::int8_t> signs_;
};

enum class ZeroSignPolicy { error, positive };

/// Complete signed network: weights |C_ij| and data signs sgn(C_ij).
/// Triangle weights J_ijk = w_ij w_jk w_ki are computed on demand.
class SignedWeightedNetwork {
public:
    SignedWeightedNetwork(Eigen::MatrixXd weights, SignState data_signs);

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.rows()); }
    std::size_t links() const noexcept { return size() * (size() - 1) / 2; }
    double weight(std::size_t i, std::size_t j) const noexcept {
        return weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    double triangle_weight(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return weight(i, j) * weight(j, k) * weight(k, i);
    }
    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    const SignState& data_signs() const noexcept { return data_signs_; }

    /// Sum of all triangle weights over i > j > k.
    double total_triangle_weight() const noexcept { return j_total_; }

private:
    Eigen::MatrixXd weights_;
    SignState data_signs_;
    double j_total_ = 0.0;
};

SignedWeightedNetwork build_network(const CorrelationMatrix& corr,
                                    ZeroSignPolicy zero_sign = ZeroSignPolicy::error);

struct EnergyReport {
    double raw = 0.0;
    double normalized = 0.0;  // raw / j_total, 0 when j_total vanishes
    double j_total = 0.0;
};

EnergyReport energy(const SignedWeightedNetwork& net, const SignState& state);

/// Weighted two-star sum on link (i,j): sum over k of J_ijk s_jk s_ki.
double local_field(const SignedWeightedNetwork& net, const SignState& state, std::size_t i,
                   std::size_t j);

/// Energy change from flipping s_ij.
double delta_energy(const SignedWeightedNetwork& net, const SignState& state, std::size_t i,
                    std::size_t j);

/// Link-averaged two-star, each link normalized by its own sum of J_ijk. In [-1, 1].
double mean_two_star(const SignedWeightedNetwork& net, const SignState& state);

/// Link-averaged unnormalized two-star (the mean field Q of the self-consistency equation).
double mean_two_star_raw(const SignedWeightedNetwork& net, const SignState& state);

/// Average of s_ij over links.
double link_mean(const SignState& state);

/// Energy-energy histogram of triangle pairs that share a link.
struct Histogram2D {
    std::vector<double> bin_edges_x;
    std::vector<double> bin_edges_y;
    std::vector<std::uint64_t> counts;  // row-major, x index major
    std::uint64_t cap = 300;

    std::size_t bins_x() const noexcept { return bin_edges_x.empty() ? 0 : bin_edges_x.size() - 1; }
    std::size_t bins_y() const noexcept { return bin_edges_y.empty() ? 0 : bin_edges_y.size() - 1; }
    std::uint64_t count(std::size_t ix, std::size_t iy) const { return counts[ix * bins_y() + iy]; }
    std::uint64_t total() const noexcept;
};

struct LandscapeOptions {
    std::size_t bins = 60;
    std::uint64_t cap = 300;
    double range = 1.0;  // grid spans [-range, +range] on both axes
};

Histogram2D energy_landscape(const SignedWeightedNetwork& net, const SignState& state,
                             const LandscapeOptions& options = {});

void write_landscape(const std::filesystem::path& path, const Histogram2D& hist);

/// Leaf order of an average-linkage dendrogram on d_ij = sqrt(2 (1 - C_ij)).
/// Ties are broken toward the lowest node index.
std::vector<std::size_t> cluster_order(const CorrelationMatrix& corr);

void write_cluster_order(const std::filesystem::path& path, const CorrelationMatrix& corr,
                         const std::vector<std::size_t>& order);

/// All N-choose-3 triangle weights, or a uniform random subsample of `max_samples`
/// triples when there are more.
std::vector<double> triangle_weights(const SignedWeightedNetwork& net,
                                     std::size_t max_samples = 1'000'000,
                                     std::uint64_t seed = 0);

}  // namespace balance
