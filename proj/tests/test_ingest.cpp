#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "balance/errors.hpp"
#include "balance/ingest.hpp"
#include "oracles.hpp"

using namespace balance;

namespace {

PriceTable parse(const std::string& csv, MissingPolicy policy = MissingPolicy::strict) {
    std::istringstream in(csv);
    return parse_prices(in, policy);
}

ReturnMatrix returns_from_columns(const std::vector<std::vector<double>>& cols) {
    ReturnMatrix r;
    const auto rows = cols.front().size();
    r.returns.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        r.tickers.push_back("T" + std::to_string(c));
        for (std::size_t t = 0; t < rows; ++t) r.returns(t, c) = cols[c][t];
    }
    for (std::size_t t = 0; t < rows; ++t) r.dates.push_back("d" + std::to_string(t));
    return r;
}

}  // namespace

TEST_CASE("load_prices reads a clean panel") {
    const auto p = parse("date,A,B,C\n2020-01-02,1,2,3\n2020-01-03,1.5,2.5,3.5\n");
    CHECK(p.rows() == 2);
    CHECK(p.assets() == 3);
    CHECK(p.closes(1, 2) == 3.5);
    CHECK(p.dates[1] == "2020-01-03");
}

TEST_CASE("load_prices error paths") {
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,-2,3\n"), NonPositivePrice);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,0,3\n"), NonPositivePrice);
    CHECK_THROWS_AS(parse("date,A,B\n2020-01-02,1,2\n"), TooFewTickers);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-03,1,2,3\n2020-01-02,1,2,3\n"), UnorderedDates);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,2,3\n2020-01-02,1,2,3\n"), UnorderedDates);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,2\n"), MalformedCsv);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-13-02,1,2,3\n"), MalformedCsv);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,x,3\n"), MalformedCsv);
    CHECK_THROWS_AS(parse("when,A,B,C\n"), MalformedCsv);
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,2,3\n2020-01-03,1,,3\n"), MissingValue);
}

TEST_CASE("forward_fill copies the previous day's value") {
    const auto p = parse("date,A,B,C\n2020-01-02,1,2,3\n2020-01-03,1.1,,3.3\n2020-01-06,1.2,,3.4\n",
                         MissingPolicy::forward_fill);
    CHECK(p.closes(1, 1) == 2.0);
    CHECK(p.closes(2, 1) == 2.0);
    // A gap on the very first row has nothing to fill from.
    CHECK_THROWS_AS(parse("date,A,B,C\n2020-01-02,1,,3\n", MissingPolicy::forward_fill), MissingValue);
}

TEST_CASE("log_returns matches direct evaluation") {
    const auto p = parse("date,A,B,C\n2020-01-02,100,100,100\n2020-01-03,100,110,50\n");
    const auto r = log_returns(p);
    REQUIRE(r.rows() == 1);
    CHECK(r.returns(0, 0) == 0.0);
    CHECK(r.returns(0, 1) == doctest::Approx(0.0953101798043249).epsilon(1e-12));
    CHECK(r.returns(0, 2) == doctest::Approx(-0.6931471805599453).epsilon(1e-12));
    CHECK(r.dates[0] == "2020-01-03");
}

TEST_CASE("cumulative log-returns reconstruct log prices") {
    SynthSpec spec;
    spec.n_assets = 5;
    spec.n_days = 400;
    spec.rho = 0.3;
    spec.daily_vol = 0.03;
    spec.seed = 99;
    const auto p = synthesize_market(spec);
    const auto r = log_returns(p);
    REQUIRE(r.rows() == p.rows() - 1);
    for (Eigen::Index i = 0; i < 5; ++i) {
        double acc = std::log(p.closes(0, i));
        for (Eigen::Index t = 0; t < r.returns.rows(); ++t) {
            acc += r.returns(t, i);
            CHECK(std::abs(acc - std::log(p.closes(t + 1, i))) < 1e-10);
        }
    }
}

TEST_CASE("correlation_matrix basic identities") {
    std::vector<double> x{0.1, -0.2, 0.05, 0.3, -0.1, 0.02};
    std::vector<double> neg, other{0.2, 0.1, -0.3, 0.0, 0.4, -0.2};
    for (double v : x) neg.push_back(-v);
    const auto r = returns_from_columns({x, x, neg, other});
    const auto c = correlation_matrix(r, {0, 6, 6});
    CHECK(c.values(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c.values(0, 2) == doctest::Approx(-1.0).epsilon(1e-14));
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(c.values(i, i) == 1.0);
    CHECK(c.values == c.values.transpose());

    const auto flat = returns_from_columns({x, std::vector<double>(6, 0.01), other});
    CHECK_THROWS_AS(correlation_matrix(flat, {0, 6, 6}), ZeroVariance);
    try {
        correlation_matrix(flat, {0, 6, 6});
    } catch (const ZeroVariance& e) {
        CHECK(e.ticker() == "T1");
    }
    CHECK_THROWS_AS(correlation_matrix(r, {2, 6, 6}), InvalidWindow);
    CHECK_THROWS_AS(correlation_matrix(r, {0, 2, 2}), InvalidWindow);
}

TEST_CASE("correlation_matrix agrees with a textbook Pearson oracle") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> a(50), b(50), c(50);
    for (int t = 0; t < 50; ++t) {
        a[t] = z(rng);
        b[t] = z(rng);
        c[t] = 0.5 * a[t] + z(rng);
    }
    const auto corr = correlation_matrix(returns_from_columns({a, b, c}), {0, 50, 50});
    CHECK(std::abs(corr.values(0, 1) - oracle::pearson_textbook(a, b)) < 1e-12);
    CHECK(std::abs(corr.values(0, 2) - oracle::pearson_textbook(a, c)) < 1e-12);
    CHECK(std::abs(corr.values(1, 2) - oracle::pearson_textbook(b, c)) < 1e-12);
}

TEST_CASE("correlation_matrix properties on random panels") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0), shift(-5.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + trial % 6, rows = 10 + trial * 3;
        std::vector<std::vector<double>> cols(n, std::vector<double>(rows));
        for (auto& col : cols)
            for (auto& v : col) v = z(rng);
        const auto base = correlation_matrix(returns_from_columns(cols), {0, rows, rows});
        CHECK(base.values == base.values.transpose());
        for (std::size_t i = 0; i < n; ++i) CHECK(base.values(i, i) == 1.0);
        CHECK(base.values.maxCoeff() <= 1.0);
        CHECK(base.values.minCoeff() >= -1.0);

        const std::size_t victim = static_cast<std::size_t>(trial) % n;
        const double a = scale(rng), b = shift(rng);
        for (auto& v : cols[victim]) v = a * v + b;
        const auto moved = correlation_matrix(returns_from_columns(cols), {0, rows, rows});
        CHECK((moved.values - base.values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("fit_gaussian uses the upper-triangle sample moments") {
    CorrelationMatrix c;
    c.tickers = {"A", "B", "C", "D"};
    c.values = Eigen::MatrixXd::Constant(4, 4, 0.5);
    c.values.diagonal().setOnes();
    auto fit = fit_gaussian(c);
    CHECK(fit.mean == doctest::Approx(0.5));
    CHECK(fit.std == doctest::Approx(0.0));
    CHECK(fit.count == 6);

    c.values(0, 1) = c.values(1, 0) = 0.1;
    fit = fit_gaussian(c);
    // elements {0.1, 0.5 x5}
    CHECK(fit.mean == doctest::Approx((0.1 + 2.5) / 6.0));
    const double m = (0.1 + 2.5) / 6.0;
    CHECK(fit.std == doctest::Approx(std::sqrt(((0.1 - m) * (0.1 - m) + 5 * (0.5 - m) * (0.5 - m)) / 5.0)));
}

namespace {

GaussianFit synthetic_fit(double rho, std::size_t tau, std::uint64_t seed) {
    SynthSpec spec;
    spec.n_assets = 40;
    spec.n_days = tau + 1;
    spec.rho = rho;
    spec.seed = seed;
    const auto r = log_returns(synthesize_market(spec));
    return fit_gaussian(correlation_matrix(r, {0, tau, tau}));
}

}  // namespace

TEST_CASE("fit_gaussian separates calm and correlated synthetic panels") {
    CHECK(std::abs(synthetic_fit(0.0, 50, 1).mean) < 0.05);
    CHECK(synthetic_fit(0.6, 50, 1).mean > 0.4);

    // Brute-force expectation of the mean Pearson estimate for equicorrelated
    // Gaussian returns, from an independent Cholesky generator.
    std::mt19937_64 rng(5);
    double oracle_mean = 0.0;
    const int trials = 40;
    for (int k = 0; k < trials; ++k) {
        const auto rows = oracle::equicorrelated(40, 50, 0.6, rng);
        double sum = 0.0;
        for (std::size_t i = 0; i < 40; ++i)
            for (std::size_t j = i + 1; j < 40; ++j) {
                std::vector<double> x, y;
                for (const auto& row : rows) {
                    x.push_back(row[i]);
                    y.push_back(row[j]);
                }
                sum += oracle::pearson_textbook(x, y);
            }
        oracle_mean += sum / 780.0 / trials;
    }
    CHECK(oracle_mean > 0.4);
    double impl_mean = 0.0;
    for (int k = 0; k < trials; ++k) impl_mean += synthetic_fit(0.6, 50, 100 + k).mean / trials;
    CHECK(std::abs(impl_mean - oracle_mean) < 0.03);
}

TEST_CASE("fit_gaussian mean converges to rho for long windows") {
    for (double rho : {0.0, 0.3, 0.6}) {
        CAPTURE(rho);
        CHECK(std::abs(synthetic_fit(rho, 2000, 17).mean - rho) < 0.03);
    }
}

TEST_CASE("synthesize_market contract") {
    SynthSpec spec;
    spec.n_assets = 10;
    spec.n_days = 300;
    spec.rho = 0.9;
    spec.daily_vol = 0.05;
    spec.seed = 3;
    const auto p = synthesize_market(spec);
    CHECK(p.rows() == 300);
    CHECK(p.assets() == 10);
    CHECK(p.closes.minCoeff() > 0.0);
    CHECK_NOTHROW(validate(p));
    for (std::size_t t = 1; t < p.rows(); ++t) CHECK(p.dates[t - 1] < p.dates[t]);

    const auto again = synthesize_market(spec);
    CHECK(again.dates == p.dates);
    CHECK(again.closes == p.closes);

    spec.rho = 1.0;
    CHECK_THROWS_AS(synthesize_market(spec), std::invalid_argument);
    spec.rho = 0.2;
    spec.n_assets = 2;
    CHECK_THROWS_AS(synthesize_market(spec), std::invalid_argument);
}

TEST_CASE("window_starts") {
    CHECK(window_starts(3899, 50, 50).size() == 77);
    CHECK(window_starts(3900, 50, 50).size() == 78);
    CHECK(window_starts(10, 50, 50).empty());
    CHECK(window_starts(10, 3, 2) == std::vector<std::size_t>{0, 2, 4, 6});
    CHECK_THROWS_AS(window_starts(10, 2, 1), InvalidWindow);
}

TEST_CASE("CSV writers round-trip exactly") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "balance_ingest_roundtrip";
    fs::create_directories(dir);

    SynthSpec spec;
    spec.n_assets = 6;
    spec.n_days = 80;
    spec.rho = 0.4;
    spec.seed = 12;
    const auto prices = synthesize_market(spec);
    write_prices(dir / "p.csv", prices);
    const auto back = load_prices(dir / "p.csv");
    CHECK(back.closes == prices.closes);
    CHECK(back.dates == prices.dates);
    CHECK(back.tickers == prices.tickers);

    const auto corr = correlation_matrix(log_returns(prices), {5, 60, 60});
    write_correlation(dir / "c.csv", corr);
    const auto corr_back = load_correlation(dir / "c.csv");
    CHECK(corr_back.values == corr.values);
    CHECK(corr_back.tickers == corr.tickers);
    fs::remove_all(dir);
}
