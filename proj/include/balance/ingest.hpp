#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace balance {

/// Dated closing prices, one row per trading day and one column per ticker.
struct PriceTable {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;  // ISO 8601, strictly increasing
    Eigen::MatrixXd closes;          // dates.size() x tickers.size(), all > 0

    std::size_t rows() const { return dates.size(); }
    std::size_t assets() const { return tickers.size(); }
};

/// Daily log-returns; row t is the return from day t to day t+1 of the source prices.
struct ReturnMatrix {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;  // date of the later price of each pair
    Eigen::MatrixXd returns;

    std::size_t rows() const { return dates.size(); }
    std::size_t assets() const { return tickers.size(); }
};

struct WindowSpec {
    std::size_t start_index = 0;
    std::size_t tau = 50;
    std::size_t stride = 50;
};

struct CorrelationMatrix {
    std::vector<std::string> tickers;
    Eigen::MatrixXd values;
    WindowSpec window;

    std::size_t size() const { return tickers.size(); }
};

struct GaussianFit {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

struct SynthSpec {
    std::size_t n_assets = 40;
    std::size_t n_days = 3900;
    double rho = 0.0;
    double daily_vol = 0.01;
    std::uint64_t seed = 7;
};

enum class MissingPolicy { strict, forward_fill };

MissingPolicy parse_missing_policy(const std::string& name);

/// Reads a wide CSV (`date,TICK1,TICK2,...`). Empty cells are gaps; under
/// `forward_fill` they take the previous row's value.
PriceTable load_prices(const std::filesystem::path& path,
                       MissingPolicy policy = MissingPolicy::strict);
PriceTable parse_prices(std::istream& in, MissingPolicy policy = MissingPolicy::strict,
                        const std::string& source = "<stream>");
void write_prices(const std::filesystem::path& path, const PriceTable& prices);

/// Checks the PriceTable invariants, throwing the matching domain error.
void validate(const PriceTable& prices);

ReturnMatrix log_returns(const PriceTable& prices);

/// Window start offsets for successive windows of `tau` rows spaced by `stride`.
std::vector<std::size_t> window_starts(std::size_t return_rows, std::size_t tau,
                                       std::size_t stride);

/// Pearson correlation over rows [start_index, start_index + tau).
/// Throws ZeroVariance when a column is constant inside the window.
CorrelationMatrix correlation_matrix(const ReturnMatrix& returns, const WindowSpec& window);

/// Sample mean and standard deviation of the upper-triangle elements.
GaussianFit fit_gaussian(const CorrelationMatrix& corr);

/// One-factor equicorrelated geometric price paths.
PriceTable synthesize_market(const SynthSpec& spec);
void validate(const SynthSpec& spec);

void write_correlation(const std::filesystem::path& path, const CorrelationMatrix& corr);
CorrelationMatrix load_correlation(const std::filesystem::path& path);

/// `%.17g`, the round-trip format used by every CSV we write.
std::string format_double(double value);

bool is_iso_date(const std::string& text);

}  // namespace balance
