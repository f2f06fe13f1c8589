#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "balance/errors.hpp"
#include "balance/network.hpp"
#include "oracles.hpp"

using namespace balance;

namespace {

CorrelationMatrix constant_corr(std::size_t n, double c) {
    CorrelationMatrix corr;
    for (std::size_t i = 0; i < n; ++i) corr.tickers.push_back("T" + std::to_string(i));
    corr.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), c);
    corr.values.diagonal().setOnes();
    return corr;
}

SignedWeightedNetwork unit_net(std::size_t n) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    w.diagonal().setZero();
    return SignedWeightedNetwork(w, SignState::all_positive(n));
}

SignedWeightedNetwork random_net(std::size_t n, std::mt19937_64& rng, double lo = 0.05) {
    std::uniform_real_distribution<double> u(lo, 1.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = i + 1; j < w.rows(); ++j) w(i, j) = w(j, i) = u(rng);
    return SignedWeightedNetwork(w, SignState::random(n, rng));
}

oracle::Dense dense_weights(const SignedWeightedNetwork& net) {
    oracle::Dense w(net.size(), std::vector<double>(net.size()));
    for (std::size_t i = 0; i < net.size(); ++i)
        for (std::size_t j = 0; j < net.size(); ++j) w[i][j] = net.weight(i, j);
    return w;
}

oracle::Dense dense_signs(const SignState& s) {
    oracle::Dense d(s.size(), std::vector<double>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) d[i][j] = s(i, j);
    return d;
}

}  // namespace

TEST_CASE("build_network maps magnitudes and signs") {
    auto corr = constant_corr(4, 0.5);
    auto net = build_network(corr);
    CHECK(net.weight(0, 1) == 0.5);
    CHECK(net.weight(2, 2) == 0.0);
    CHECK(net.data_signs() == SignState::all_positive(4));

    corr.values(1, 3) = corr.values(3, 1) = -0.3;
    net = build_network(corr);
    CHECK(net.weight(1, 3) == doctest::Approx(0.3));
    CHECK(net.data_signs()(1, 3) == -1);
    CHECK(net.data_signs()(3, 1) == -1);

    corr.values(0, 2) = corr.values(2, 0) = 0.0;
    CHECK_THROWS_AS(build_network(corr), ZeroCorrelation);
    net = build_network(corr, ZeroSignPolicy::positive);
    CHECK(net.data_signs()(0, 2) == 1);
    CHECK(net.weight(0, 2) == 0.0);
}

TEST_CASE("energy small cases") {
    auto report = energy(unit_net(3), SignState::all_positive(3));
    CHECK(report.raw == -1.0);
    CHECK(report.normalized == -1.0);

    const auto half = build_network(constant_corr(3, 0.5));
    CHECK(energy(half, half.data_signs()).raw == doctest::Approx(-0.125).epsilon(1e-14));
    CHECK(local_field(half, half.data_signs(), 0, 1) == doctest::Approx(0.125).epsilon(1e-14));

    CHECK(local_field(unit_net(4), SignState::all_positive(4), 0, 1) == 2.0);
    CHECK(delta_energy(unit_net(3), SignState::all_positive(3), 1, 2) == 2.0);

    // Only k = 2 closes link (0,1); flipping s_12 negates the field.
    auto s = SignState::all_positive(3);
    const double before = local_field(half, s, 0, 1);
    s.flip(1, 2);
    CHECK(local_field(half, s, 0, 1) == -before);
}

TEST_CASE("zero field gives zero energy change") {
    // N=4 unit weights: link (0,1) sees stars through 2 and 3; make them cancel.
    auto s = SignState::all_positive(4);
    s.flip(1, 2);
    CHECK(local_field(unit_net(4), s, 0, 1) == 0.0);
    CHECK(delta_energy(unit_net(4), s, 0, 1) == 0.0);
}

TEST_CASE("mean_two_star hand enumeration with one negative link") {
    auto s = SignState::all_positive(4);
    s.flip(0, 1);
    // Link (0,1) and (2,3) keep both stars positive, the four links touching
    // the negative one see one +1 and one -1 star.
    CHECK(mean_two_star(unit_net(4), s) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(mean_two_star(unit_net(4), SignState::all_positive(4)) == 1.0);
}

TEST_CASE("mean_two_star averages to zero over random signs") {
    std::mt19937_64 rng(11);
    double acc = 0.0;
    const int draws = 20000;
    for (int k = 0; k < draws; ++k) acc += mean_two_star(unit_net(4), SignState::random(4, rng));
    // per-draw std is at most 1
    CHECK(std::abs(acc / draws) < 4.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("mean_two_star rejects links with no weighted stars") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(4, 4);
    w.diagonal().setZero();
    w(0, 1) = w(1, 0) = 0.0;
    const SignedWeightedNetwork net(w, SignState::all_positive(4));
    CHECK_THROWS_AS(mean_two_star(net, SignState::all_positive(4)), ZeroWeightStar);
}

TEST_CASE("network constructor rejects bad weights") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(3, 3);
    CHECK_THROWS(SignedWeightedNetwork(w, SignState::all_positive(3)));  // diagonal
    w.diagonal().setZero();
    w(0, 1) = 0.4;
    CHECK_THROWS(SignedWeightedNetwork(w, SignState::all_positive(3)));  // asymmetric
    CHECK_THROWS(SignedWeightedNetwork(Eigen::MatrixXd::Zero(2, 2), SignState::all_positive(2)));
}

TEST_CASE("energy matches the brute-force triangle oracle on random networks") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial) % 8;
        const auto net = random_net(n, rng);
        const auto s = SignState::random(n, rng);
        const auto report = energy(net, s);
        const auto w = dense_weights(net);
        CHECK(std::abs(report.raw - oracle::energy(w, dense_signs(s))) < 1e-12);
        CHECK(std::abs(report.j_total + oracle::energy(w, dense_signs(SignState::all_positive(n)))) < 1e-12);
        CHECK(report.normalized >= -1.0 - 1e-12);
        CHECK(report.normalized <= 1.0 + 1e-12);
        CHECK(std::abs(mean_two_star(net, s) - oracle::q_norm(w, dense_signs(s))) < 1e-12);
    }
}

TEST_CASE("property: all-positive signs give normalized energy -1 and q_norm 1") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial) % 12;
        const auto net = random_net(n, rng);
        const auto s = SignState::all_positive(n);
        CHECK(std::abs(energy(net, s).normalized + 1.0) < 1e-12);
        CHECK(std::abs(mean_two_star(net, s) - 1.0) < 1e-12);
    }
}

TEST_CASE("property: balanced and fully frustrated extremes") {
    std::mt19937_64 rng(9);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial) % 9;
        const auto net = random_net(n, rng);
        // Two-faction state: every triangle has sign product +1.
        std::vector<int> side(n);
        for (auto& v : side) v = coin(rng) ? 1 : -1;
        SignState s(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s.set(i, j, side[i] * side[j]);
        CHECK(std::abs(energy(net, s).normalized + 1.0) < 1e-12);
        // All negative: every product is -1.
        SignState neg(n, -1);
        CHECK(std::abs(energy(net, neg).normalized - 1.0) < 1e-12);
    }
}

TEST_CASE("property: delta_energy equals recomputed energy difference") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial) % 10;
        const auto net = random_net(n, rng);
        auto s = SignState::random(n, rng);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::size_t i = pick(rng), j = pick(rng);
        while (j == i) j = pick(rng);
        const double before = energy(net, s).raw;
        const double de = delta_energy(net, s, i, j);
        CHECK(de == doctest::Approx(2.0 * s(i, j) * local_field(net, s, i, j)));
        s.flip(i, j);
        CHECK(std::abs(energy(net, s).raw - before - de) < 1e-12);
        CHECK(std::abs(delta_energy(net, s, i, j) + de) < 1e-12);
        s.flip(i, j);
        CHECK(std::abs(energy(net, s).raw - before) < 1e-12);
    }
}

TEST_CASE("property: sign symmetries and weight rescaling") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> scale(0.02, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial) % 10;
        const auto net = random_net(n, rng);
        const auto s = SignState::random(n, rng);

        // All links flipped: two-stars keep their sign, triangles change theirs.
        auto flipped = s;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) flipped.flip(i, j);
        CHECK(std::abs(energy(net, s).raw + energy(net, flipped).raw) < 1e-12);
        CHECK(std::abs(mean_two_star(net, s) - mean_two_star(net, flipped)) < 1e-12);

        // Node gauge s_ij -> g_i g_j s_ij keeps every triangle product.
        std::vector<int> g(n);
        for (auto& v : g) v = coin(rng) ? 1 : -1;
        auto gauged = s;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) gauged.set(i, j, g[i] * g[j] * s(i, j));
        CHECK(std::abs(energy(net, s).raw - energy(net, gauged).raw) < 1e-12);

        const SignedWeightedNetwork shrunk(net.weights() * scale(rng), net.data_signs());
        CHECK(std::abs(mean_two_star(net, s) - mean_two_star(shrunk, s)) < 1e-12);
        CHECK(std::abs(energy(net, s).normalized - energy(shrunk, s).normalized) < 1e-12);
    }
}

TEST_CASE("energy_landscape combinatorics") {
    CHECK(energy_landscape(unit_net(3), SignState::all_positive(3)).total() == 0);
    const auto k4 = energy_landscape(unit_net(4), SignState::all_positive(4));
    CHECK(k4.total() == 12);
    CHECK(k4.cap == 300);
    CHECK(k4.bins_x() == 60);
    CHECK(k4.bin_edges_x.front() == -1.0);
    CHECK(k4.bin_edges_x.back() == 1.0);

    std::mt19937_64 rng(13);
    for (std::size_t n = 3; n <= 12; ++n) {
        const auto net = random_net(n, rng);
        const auto h = energy_landscape(net, SignState::random(n, rng), {17, 300, 1.0});
        const std::uint64_t t = n - 2;
        CHECK(h.total() == 2 * net.links() * (t * (t - 1) / 2));
        for (std::size_t x = 0; x < h.bins_x(); ++x)
            for (std::size_t y = 0; y < h.bins_y(); ++y) CHECK(h.count(x, y) == h.count(y, x));
        CHECK(std::is_sorted(h.bin_edges_x.begin(), h.bin_edges_x.end()));
    }
}

TEST_CASE("energy_landscape places triangles at signed energies") {
    // Uniform weight 0.5: every triangle has |E| = 0.125.
    const auto net = build_network(constant_corr(5, 0.5));
    const auto h = energy_landscape(net, net.data_signs(), {8, 300, 1.0});
    // Bins of width 0.25; -0.125 falls in bin 3 ([-0.25, 0)).
    CHECK(h.count(3, 3) == h.total());
}

TEST_CASE("cluster_order") {
    // Two blocks, interleaved in the input order.
    CorrelationMatrix corr = constant_corr(6, 0.0);
    const std::vector<int> block{0, 1, 0, 1, 0, 1};
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j)
            if (i != j && block[i] == block[j]) corr.values(i, j) = 0.9;
    auto order = cluster_order(corr);
    REQUIRE(order.size() == 6);
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    // Each block occupies a contiguous range of positions.
    for (int b = 0; b < 2; ++b) {
        std::vector<std::size_t> pos;
        for (std::size_t p = 0; p < 6; ++p)
            if (block[order[p]] == b) pos.push_back(p);
        CHECK(pos.back() - pos.front() == 2);
    }

    CHECK(cluster_order(constant_corr(7, 0.3)) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});

    auto three = constant_corr(3, 0.1);
    three.values(0, 1) = three.values(1, 0) = 0.9;
    order = cluster_order(three);
    const auto p0 = std::find(order.begin(), order.end(), 0) - order.begin();
    const auto p1 = std::find(order.begin(), order.end(), 1) - order.begin();
    CHECK(std::abs(p0 - p1) == 1);
}

TEST_CASE("cluster_order returns a permutation on random matrices") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + static_cast<std::size_t>(trial);
        auto corr = constant_corr(n, 0.0);
        for (Eigen::Index i = 0; i < corr.values.rows(); ++i)
            for (Eigen::Index j = i + 1; j < corr.values.rows(); ++j) corr.values(i, j) = corr.values(j, i) = u(rng);
        auto order = cluster_order(corr);
        std::sort(order.begin(), order.end());
        for (std::size_t k = 0; k < n; ++k) CHECK(order[k] == k);
    }
}

TEST_CASE("triangle_weights") {
    const auto net = build_network(constant_corr(6, 0.5));
    const auto all = triangle_weights(net);
    CHECK(all.size() == 20);
    for (double v : all) CHECK(v == doctest::Approx(0.125));
    CHECK(triangle_weights(net, 7, 1).size() == 7);
}
