#include "balance/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "balance/errors.hpp"

namespace balance {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::optional<double> parse_number(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

std::chrono::year_month_day to_ymd(const std::string& iso) {
    int y = 0;
    unsigned m = 0, d = 0;
    std::sscanf(iso.c_str(), "%d-%u-%u", &y, &m, &d);
    return std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d};
}

std::string to_iso(std::chrono::year_month_day ymd) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

bool is_iso_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    return to_ymd(text).ok();
}

MissingPolicy parse_missing_policy(const std::string& name) {
    if (name == "strict") return MissingPolicy::strict;
    if (name == "forward_fill") return MissingPolicy::forward_fill;
    throw std::invalid_argument("unknown missing-data policy '" + name + "'");
}

void validate(const PriceTable& prices) {
    if (prices.assets() < 3) throw TooFewTickers(prices.assets());
    if (static_cast<std::size_t>(prices.closes.rows()) != prices.rows() ||
        static_cast<std::size_t>(prices.closes.cols()) != prices.assets())
        throw std::invalid_argument("price matrix shape does not match dates x tickers");
    for (std::size_t t = 0; t < prices.rows(); ++t) {
        if (t > 0 && prices.dates[t] <= prices.dates[t - 1])
            throw UnorderedDates(prices.dates[t - 1], prices.dates[t]);
        for (std::size_t i = 0; i < prices.assets(); ++i) {
            const double v = prices.closes(t, i);
            if (!(v > 0.0) || !std::isfinite(v))
                throw NonPositivePrice(prices.dates[t], prices.tickers[i], v);
        }
    }
}

PriceTable parse_prices(std::istream& in, MissingPolicy policy, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv(source, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    auto header = split_csv_line(line);
    if (header.empty() || trim(header[0]) != "date")
        throw MalformedCsv(source, "header must start with 'date'");

    PriceTable table;
    for (std::size_t c = 1; c < header.size(); ++c) {
        auto name = trim(header[c]);
        if (name.empty()) throw MalformedCsv(source, "empty ticker name in header");
        table.tickers.push_back(std::move(name));
    }
    if (table.tickers.size() < 3) throw TooFewTickers(table.tickers.size());
    const std::size_t n = table.tickers.size();

    std::vector<std::vector<std::optional<double>>> cells;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto row = split_csv_line(line);
        const std::string where = source + ":" + std::to_string(line_no);
        if (row.size() != n + 1)
            throw MalformedCsv(where, "expected " + std::to_string(n + 1) + " fields, got " +
                                          std::to_string(row.size()));
        auto date = trim(row[0]);
        if (!is_iso_date(date)) throw MalformedCsv(where, "bad date '" + date + "'");
        if (!table.dates.empty() && date <= table.dates.back())
            throw UnorderedDates(table.dates.back(), date);

        std::vector<std::optional<double>> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto text = trim(row[i + 1]);
            if (text.empty()) continue;
            auto v = parse_number(text);
            if (!v) throw MalformedCsv(where, "bad number '" + text + "'");
            if (!(*v > 0.0) || !std::isfinite(*v)) throw NonPositivePrice(date, table.tickers[i], *v);
            values[i] = *v;
        }
        table.dates.push_back(std::move(date));
        cells.push_back(std::move(values));
    }

    table.closes.resize(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < cells.size(); ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (cells[t][i]) {
                table.closes(t, i) = *cells[t][i];
            } else if (policy == MissingPolicy::forward_fill && t > 0) {
                table.closes(t, i) = table.closes(t - 1, i);
            } else {
                throw MissingValue(table.dates[t], table.tickers[i]);
            }
        }
    }
    return table;
}

PriceTable load_prices(const std::filesystem::path& path, MissingPolicy policy) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return parse_prices(in, policy, path.string());
}

void write_prices(const std::filesystem::path& path, const PriceTable& prices) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "date";
    for (const auto& t : prices.tickers) out << ',' << t;
    out << '\n';
    for (std::size_t t = 0; t < prices.rows(); ++t) {
        out << prices.dates[t];
        for (std::size_t i = 0; i < prices.assets(); ++i) out << ',' << format_double(prices.closes(t, i));
        out << '\n';
    }
    if (!out) throw Error("write failed for " + path.string());
}

ReturnMatrix log_returns(const PriceTable& prices) {
    ReturnMatrix r;
    r.tickers = prices.tickers;
    if (prices.rows() < 2) {
        r.returns.resize(0, static_cast<Eigen::Index>(prices.assets()));
        return r;
    }
    r.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    const Eigen::MatrixXd logs = prices.closes.array().log().matrix();
    const auto rows = logs.rows() - 1;
    r.returns = logs.bottomRows(rows) - logs.topRows(rows);
    return r;
}

std::vector<std::size_t> window_starts(std::size_t return_rows, std::size_t tau,
                                       std::size_t stride) {
    if (tau < 3) throw InvalidWindow("window length tau must be >= 3");
    if (stride < 1) throw InvalidWindow("window stride must be >= 1");
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + tau <= return_rows; s += stride) starts.push_back(s);
    return starts;
}

CorrelationMatrix correlation_matrix(const ReturnMatrix& returns, const WindowSpec& window) {
    if (window.tau < 3) throw InvalidWindow("window length tau must be >= 3");
    if (window.stride < 1) throw InvalidWindow("window stride must be >= 1");
    if (window.start_index + window.tau > returns.rows())
        throw InvalidWindow("window [" + std::to_string(window.start_index) + ", " +
                            std::to_string(window.start_index + window.tau) +
                            ") exceeds " + std::to_string(returns.rows()) + " return rows");

    const auto n = static_cast<Eigen::Index>(returns.assets());
    const auto tau = static_cast<Eigen::Index>(window.tau);
    const Eigen::MatrixXd block =
        returns.returns.middleRows(static_cast<Eigen::Index>(window.start_index), tau);

    for (Eigen::Index i = 0; i < n; ++i) {
        if (block.col(i).maxCoeff() == block.col(i).minCoeff())
            throw ZeroVariance(returns.tickers[static_cast<std::size_t>(i)]);
    }

    const Eigen::RowVectorXd mean = block.colwise().mean();
    const Eigen::MatrixXd centered = block.rowwise() - mean;
    const Eigen::VectorXd norm = centered.colwise().norm().transpose();

    CorrelationMatrix corr;
    corr.tickers = returns.tickers;
    corr.window = window;
    corr.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        corr.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double c = centered.col(i).dot(centered.col(j)) / (norm(i) * norm(j));
            c = std::clamp(c, -1.0, 1.0);
            corr.values(i, j) = c;
            corr.values(j, i) = c;
        }
    }
    return corr;
}

GaussianFit fit_gaussian(const CorrelationMatrix& corr) {
    const auto n = corr.values.rows();
    GaussianFit fit;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) sum += corr.values(i, j);
    fit.count = static_cast<std::size_t>(n * (n - 1) / 2);
    if (fit.count == 0) return fit;
    fit.mean = sum / static_cast<double>(fit.count);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = corr.values(i, j) - fit.mean;
            ss += d * d;
        }
    fit.std = fit.count > 1 ? std::sqrt(ss / static_cast<double>(fit.count - 1)) : 0.0;
    return fit;
}

void validate(const SynthSpec& spec) {
    if (spec.n_assets < 3) throw std::invalid_argument("n_assets must be >= 3");
    if (spec.n_days < 2) throw std::invalid_argument("n_days must be >= 2");
    if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
    if (!(spec.daily_vol > 0.0)) throw std::invalid_argument("daily_vol must be positive");
}

PriceTable synthesize_market(const SynthSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    PriceTable table;
    for (std::size_t i = 0; i < spec.n_assets; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "S%03zu", i + 1);
        table.tickers.emplace_back(buf);
    }

    // Business-day calendar starting on the first trading day of 2005.
    using namespace std::chrono;
    sys_days day = sys_days{year{2005} / January / 3};
    table.dates.reserve(spec.n_days);
    while (table.dates.size() < spec.n_days) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday) table.dates.push_back(to_iso(year_month_day{day}));
        day += days{1};
    }

    const auto n = static_cast<Eigen::Index>(spec.n_assets);
    const double common = std::sqrt(spec.rho);
    const double idio = std::sqrt(1.0 - spec.rho);
    table.closes.resize(static_cast<Eigen::Index>(spec.n_days), n);
    Eigen::VectorXd log_price = Eigen::VectorXd::Constant(n, std::log(100.0));
    table.closes.row(0) = log_price.array().exp().transpose();
    for (std::size_t t = 1; t < spec.n_days; ++t) {
        const double market = normal(rng);
        for (Eigen::Index i = 0; i < n; ++i)
            log_price(i) += spec.daily_vol * (common * market + idio * normal(rng));
        table.closes.row(static_cast<Eigen::Index>(t)) = log_price.array().exp().transpose();
    }
    return table;
}

void write_correlation(const std::filesystem::path& path, const CorrelationMatrix& corr) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "ticker";
    for (const auto& t : corr.tickers) out << ',' << t;
    out << '\n';
    for (std::size_t i = 0; i < corr.size(); ++i) {
        out << corr.tickers[i];
        for (std::size_t j = 0; j < corr.size(); ++j)
            out << ',' << format_double(corr.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
    if (!out) throw Error("write failed for " + path.string());
}

CorrelationMatrix load_correlation(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    const std::string source = path.string();
    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv(source, "empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2) throw MalformedCsv(source, "header has no tickers");

    CorrelationMatrix corr;
    corr.tickers.assign(header.begin() + 1, header.end());
    const auto n = static_cast<Eigen::Index>(corr.tickers.size());
    corr.values.resize(n, n);
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (row >= n || cells.size() != corr.tickers.size() + 1)
            throw MalformedCsv(source, "unexpected row shape at row " + std::to_string(row + 1));
        if (cells[0] != corr.tickers[static_cast<std::size_t>(row)])
            throw MalformedCsv(source, "row label '" + cells[0] + "' does not match header");
        for (Eigen::Index j = 0; j < n; ++j) {
            auto v = parse_number(trim(cells[static_cast<std::size_t>(j) + 1]));
            if (!v) throw MalformedCsv(source, "bad number in row " + std::to_string(row + 1));
            corr.values(row, j) = *v;
        }
        ++row;
    }
    if (row != n) throw MalformedCsv(source, "expected " + std::to_string(n) + " rows");
    return corr;
}

}  // namespace balance
