#include "balance/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "balance/errors.hpp"

namespace balance {

SignState::SignState(std::size_t n, std::int8_t fill) : n_(n), signs_(n * n, fill) {
    if (fill != 1 && fill != -1) throw std::invalid_argument("sign fill must be +1 or -1");
    for (std::size_t i = 0; i < n; ++i) signs_[i * n + i] = 0;
}

SignState SignState::random(std::size_t n, std::mt19937_64& rng) {
    SignState s(n);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s.set(i, j, coin(rng) ? 1 : -1);
    return s;
}

void SignState::set(std::size_t i, std::size_t j, int sign) {
    if (i == j) throw std::invalid_argument("no self links");
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    signs_[i * n_ + j] = static_cast<std::int8_t>(sign);
    signs_[j * n_ + i] = static_cast<std::int8_t>(sign);
}

SignedWeightedNetwork::SignedWeightedNetwork(Eigen::MatrixXd weights, SignState data_signs)
    : weights_(std::move(weights)), data_signs_(std::move(data_signs)) {
    const auto n = weights_.rows();
    if (weights_.cols() != n) throw std::invalid_argument("weight matrix must be square");
    if (n < 3) throw std::invalid_argument("network needs at least 3 nodes");
    if (data_signs_.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("sign matrix size does not match weights");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (weights_(i, i) != 0.0) throw std::invalid_argument("weight diagonal must be zero");
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double w = weights_(i, j);
            if (w != weights_(j, i)) throw std::invalid_argument("weights must be symmetric");
            if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("weights must lie in [0, 1]");
        }
    }
    for (std::size_t i = 0; i < size(); ++i)
        for (std::size_t j = i + 1; j < size(); ++j)
            for (std::size_t k = j + 1; k < size(); ++k) j_total_ += triangle_weight(i, j, k);
}

SignedWeightedNetwork build_network(const CorrelationMatrix& corr, ZeroSignPolicy zero_sign) {
    const auto n = corr.values.rows();
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n);
    SignState signs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double c = corr.values(i, j);
            if (c == 0.0 && zero_sign == ZeroSignPolicy::error)
                throw ZeroCorrelation(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            weights(i, j) = weights(j, i) = std::min(std::abs(c), 1.0);
            signs.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), c < 0.0 ? -1 : 1);
        }
    }
    return SignedWeightedNetwork(std::move(weights), std::move(signs));
}

EnergyReport energy(const SignedWeightedNetwork& net, const SignState& state) {
    const std::size_t n = net.size();
    if (state.size() != n) throw std::invalid_argument("state size does not match network");
    EnergyReport report;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a_ij = net.weight(i, j) * state(i, j);
            for (std::size_t k = j + 1; k < n; ++k)
                report.raw -= a_ij * net.weight(j, k) * state(j, k) * net.weight(k, i) * state(k, i);
        }
    report.j_total = net.total_triangle_weight();
    report.normalized = report.j_total > 0.0 ? report.raw / report.j_total : 0.0;
    return report;
}

double local_field(const SignedWeightedNetwork& net, const SignState& state, std::size_t i,
                   std::size_t j) {
    if (i == j) throw std::invalid_argument("local_field needs i != j");
    double field = 0.0;
    for (std::size_t k = 0; k < net.size(); ++k) {
        if (k == i || k == j) continue;
        field += net.weight(j, k) * state(j, k) * net.weight(k, i) * state(k, i);
    }
    return net.weight(i, j) * field;
}

double delta_energy(const SignedWeightedNetwork& net, const SignState& state, std::size_t i,
                    std::size_t j) {
    return 2.0 * state(i, j) * local_field(net, state, i, j);
}

double mean_two_star(const SignedWeightedNetwork& net, const SignState& state) {
    const std::size_t n = net.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double norm = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i && k != j) norm += net.triangle_weight(i, j, k);
            if (!(norm > 0.0)) throw ZeroWeightStar(i, j);
            sum += local_field(net, state, i, j) / norm;
        }
    return sum / static_cast<double>(net.links());
}

double mean_two_star_raw(const SignedWeightedNetwork& net, const SignState& state) {
    const std::size_t n = net.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum += local_field(net, state, i, j);
    return sum / static_cast<double>(net.links());
}

double link_mean(const SignState& state) {
    const std::size_t n = state.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sum += state(i, j);
    return n < 2 ? 0.0 : sum / static_cast<double>(n * (n - 1) / 2);
}

std::uint64_t Histogram2D::total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

Histogram2D energy_landscape(const SignedWeightedNetwork& net, const SignState& state,
                             const LandscapeOptions& options) {
    if (options.bins == 0) throw std::invalid_argument("landscape needs at least one bin");
    if (!(options.range > 0.0)) throw std::invalid_argument("landscape range must be positive");

    Histogram2D hist;
    hist.cap = options.cap;
    const double width = 2.0 * options.range / static_cast<double>(options.bins);
    for (std::size_t b = 0; b <= options.bins; ++b)
        hist.bin_edges_x.push_back(-options.range + width * static_cast<double>(b));
    hist.bin_edges_y = hist.bin_edges_x;
    hist.counts.assign(options.bins * options.bins, 0);

    const auto bin_of = [&](double e) {
        const auto b = static_cast<long>(std::floor((e + options.range) / width));
        return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(options.bins) - 1));
    };

    const std::size_t n = net.size();
    std::vector<std::size_t> bins;
    bins.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            // Triangles through link (i,j) are {i,j,k}; any two of them share exactly this link.
            bins.clear();
            const double a_ij = net.weight(i, j) * state(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                const double e = -a_ij * net.weight(j, k) * state(j, k) * net.weight(k, i) * state(k, i);
                bins.push_back(bin_of(e));
            }
            for (std::size_t u = 0; u < bins.size(); ++u)
                for (std::size_t v = u + 1; v < bins.size(); ++v) {
                    ++hist.counts[bins[u] * options.bins + bins[v]];
                    ++hist.counts[bins[v] * options.bins + bins[u]];
                }
        }
    return hist;
}

void write_landscape(const std::filesystem::path& path, const Histogram2D& hist) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "bin_x_low,bin_y_low,count\n";
    for (std::size_t ix = 0; ix < hist.bins_x(); ++ix)
        for (std::size_t iy = 0; iy < hist.bins_y(); ++iy)
            out << format_double(hist.bin_edges_x[ix]) << ',' << format_double(hist.bin_edges_y[iy])
                << ',' << hist.count(ix, iy) << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

void write_cluster_order(const std::filesystem::path& path, const CorrelationMatrix& corr,
                         const std::vector<std::size_t>& order) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t p = 0; p < order.size(); ++p) out << (p ? "," : "") << corr.tickers.at(order[p]);
    out << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

std::vector<double> triangle_weights(const SignedWeightedNetwork& net, std::size_t max_samples,
                                     std::uint64_t seed) {
    const std::size_t n = net.size();
    const std::size_t total = n * (n - 1) * (n - 2) / 6;
    std::vector<double> out;
    if (total <= max_samples) {
        out.reserve(total);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k) out.push_back(net.triangle_weight(i, j, k));
        return out;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    out.reserve(max_samples);
    while (out.size() < max_samples) {
        const std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
        if (i == j || j == k || i == k) continue;
        out.push_back(net.triangle_weight(i, j, k));
    }
    return out;
}

}  // namespace balance
