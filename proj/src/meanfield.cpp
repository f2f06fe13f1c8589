#include "balance/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "balance/errors.hpp"

namespace balance {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr double kTruncationSigmas = 8.0;

}  // namespace

void validate(const MeanFieldParams& params) {
    if (params.n < 3) throw std::invalid_argument("mean-field node count must be >= 3");
    if (!(params.beta > 0.0) || !std::isfinite(params.beta))
        throw std::invalid_argument("beta must be positive and finite");
    if (const auto* g = std::get_if<GaussianWeights>(&params.weights)) {
        if (!(g->sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    } else if (std::get<EmpiricalWeights>(params.weights).sample.empty()) {
        throw std::invalid_argument("empirical weight sample is empty");
    }
}

double link_mean(double q_raw, double beta) { return std::tanh(beta * q_raw); }

double two_star_expectation(double q_raw, double j, double beta) {
    const double x = beta * q_raw;
    const double up = 2.0 * x;
    const double mixed = -2.0 * beta * j * std::tanh(x) + std::numbers::ln2;  // folds in the factor 2
    const double down = -2.0 * x;
    const double top = std::max({up, mixed, down});
    const double e_up = std::exp(up - top);
    const double e_mixed = std::exp(mixed - top);
    const double e_down = std::exp(down - top);
    return (e_up - e_mixed + e_down) / (e_up + e_mixed + e_down);
}

double self_consistency_rhs(double q_raw, const MeanFieldParams& params) {
    validate(params);
    const double stars = static_cast<double>(params.n - 2);
    const double beta = params.beta;

    if (const auto* emp = std::get_if<EmpiricalWeights>(&params.weights)) {
        double sum = 0.0;
        for (double j : emp->sample) sum += j * two_star_expectation(q_raw, j, beta);
        return stars * sum / static_cast<double>(emp->sample.size());
    }

    const auto& g = std::get<GaussianWeights>(params.weights);
    if (g.sigma == 0.0) return stars * g.mu * two_star_expectation(q_raw, g.mu, beta);

    const double norm = 1.0 / (g.sigma * std::sqrt(2.0 * std::numbers::pi));
    const auto integrand = [&](double j) {
        const double z = (j - g.mu) / g.sigma;
        return j * norm * std::exp(-0.5 * z * z) * two_star_expectation(q_raw, j, beta);
    };
    double error = 0.0, l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, g.mu - kTruncationSigmas * g.sigma, g.mu + kTruncationSigmas * g.sigma, 15,
        kQuadratureTolerance, &error, &l1);
    // relative to the L1 norm, absolute once the integrand is small
    if (error > kQuadratureTolerance * std::max(l1, 1.0)) throw QuadratureError(error);
    return stars * value;
}

FixedPointResult solve_fixed_point(const MeanFieldParams& params, double init,
                                   const FixedPointOptions& options) {
    validate(params);
    if (!(init >= 0.0)) throw std::invalid_argument("fixed-point init must be >= 0");

    FixedPointResult result;
    double q = init;
    double residual = 0.0;
    for (int it = 0; it < options.max_iterations; ++it) {
        const double f = self_consistency_rhs(q, params);
        residual = std::abs(q - f);
        result.iterations = it;
        if (residual < options.tolerance) {
            result.q_star = q;
            result.residual = residual;
            result.branch = std::abs(q) > options.branch_threshold ? Branch::positive : Branch::trivial;
            return result;
        }
        q = std::max(0.0, (1.0 - options.damping) * q + options.damping * f);
    }
    throw NoConvergence(residual, options.max_iterations);
}

double positive_branch_init(int n, const WeightDistribution&) { return static_cast<double>(n - 2); }

bool positive_branch_exists(int n, const WeightDistribution& weights, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("temperature must be positive");
    MeanFieldParams params{n, 1.0 / t, weights};
    return solve_fixed_point(params, positive_branch_init(n, weights)).branch == Branch::positive;
}

double critical_temperature_mf(int n, const WeightDistribution& weights, double t_lo, double t_hi,
                               double bracket_tolerance) {
    if (!(t_lo > 0.0 && t_hi > t_lo)) throw BadBracket("need 0 < t_lo < t_hi");
    if (!positive_branch_exists(n, weights, t_lo))
        throw BadBracket("no positive branch at t_lo = " + std::to_string(t_lo));
    if (positive_branch_exists(n, weights, t_hi))
        throw BadBracket("positive branch still present at t_hi = " + std::to_string(t_hi));
    double lo = t_lo, hi = t_hi;
    while (hi - lo >= bracket_tolerance) {
        const double mid = 0.5 * (lo + hi);
        (positive_branch_exists(n, weights, mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace balance
