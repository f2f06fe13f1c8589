#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace balance {

/// Base class for every domain error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- ingest -------------------------------------------------------------

class MalformedCsv : public Error {
public:
    MalformedCsv(const std::string& where, const std::string& what)
        : Error("malformed CSV (" + where + "): " + what) {}
};

class NonPositivePrice : public Error {
public:
    NonPositivePrice(const std::string& date, const std::string& ticker, double value)
        : Error("non-positive price " + std::to_string(value) + " for " + ticker + " on " + date) {}
};

class UnorderedDates : public Error {
public:
    UnorderedDates(const std::string& prev, const std::string& next)
        : Error("dates not strictly increasing: " + prev + " followed by " + next) {}
};

class MissingValue : public Error {
public:
    MissingValue(const std::string& date, const std::string& ticker)
        : Error("missing price for " + ticker + " on " + date) {}
};

class TooFewTickers : public Error {
public:
    explicit TooFewTickers(std::size_t n)
        : Error("need at least 3 tickers, got " + std::to_string(n)) {}
};

class InvalidWindow : public Error {
public:
    using Error::Error;
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(std::string ticker)
        : Error("zero variance in window for " + ticker), ticker_(std::move(ticker)) {}
    const std::string& ticker() const noexcept { return ticker_; }

private:
    std::string ticker_;
};

// ---- network ------------------------------------------------------------

class ZeroCorrelation : public Error {
public:
    ZeroCorrelation(std::size_t i, std::size_t j)
        : Error("correlation is exactly zero between nodes " + std::to_string(i) + " and " +
                std::to_string(j) + "; link sign undefined"),
          i_(i), j_(j) {}
    std::size_t i() const noexcept { return i_; }
    std::size_t j() const noexcept { return j_; }

private:
    std::size_t i_, j_;
};

class ZeroWeightStar : public Error {
public:
    ZeroWeightStar(std::size_t i, std::size_t j)
        : Error("two-star weight sum vanishes on link (" + std::to_string(i) + "," +
                std::to_string(j) + ")") {}
};

// ---- simulate -----------------------------------------------------------

class TooLarge : public Error {
public:
    TooLarge(std::size_t links, std::size_t limit)
        : Error("exact enumeration over " + std::to_string(links) + " links exceeds limit of " +
                std::to_string(limit)) {}
};

// ---- meanfield ----------------------------------------------------------

class NoConvergence : public Error {
public:
    NoConvergence(double residual, int iterations)
        : Error("fixed-point iteration did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class QuadratureError : public Error {
public:
    explicit QuadratureError(double error_estimate)
        : Error("quadrature failed to reach tolerance (error estimate " +
                std::to_string(error_estimate) + ")") {}
};

class BadBracket : public Error {
public:
    using Error::Error;
};

}  // namespace balance
