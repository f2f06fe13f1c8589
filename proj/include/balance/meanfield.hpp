#pragma once

#include <optional>
#include <variant>
#include <vector>

namespace balance {

/// Triangle weights drawn from a normal distribution (point mass at mu when sigma = 0).
struct GaussianWeights {
    double mu = 0.0;
    double sigma = 0.0;
};

/// Triangle weights taken directly from a network.
struct EmpiricalWeights {
    std::vector<double> sample;
};

using WeightDistribution = std::variant<GaussianWeights, EmpiricalWeights>;

struct MeanFieldParams {
    int n = 40;
    double beta = 1.0;
    WeightDistribution weights = GaussianWeights{1.0, 0.0};
};

void validate(const MeanFieldParams& params);

enum class Branch { trivial, positive };

struct FixedPointResult {
    double q_star = 0.0;
    Branch branch = Branch::trivial;
    int iterations = 0;
    double residual = 0.0;
};

struct FixedPointOptions {
    double damping = 0.5;
    double tolerance = 1e-8;
    int max_iterations = 10'000;
    double branch_threshold = 1e-6;
};

/// Mean link sign given the mean field: tanh(beta * q_raw).
double link_mean(double q_raw, double beta);

/// Expected two-star product <s_jk s_ki> given mean field q_raw, triangle weight j
/// and inverse temperature beta. Exponents are shifted by their maximum so the
/// ratio stays finite for any |beta * q_raw|.
double two_star_expectation(double q_raw, double j, double beta);

/// Right-hand side f(Q) of the self-consistency equation Q = f(Q):
/// (N - 2) times the expectation of J q(Q, J, beta) under the weight distribution.
double self_consistency_rhs(double q_raw, const MeanFieldParams& params);

/// Damped iteration Q <- (1 - a) Q + a f(Q). Q is restricted to Q >= 0.
FixedPointResult solve_fixed_point(const MeanFieldParams& params, double init,
                                   const FixedPointOptions& options = {});

/// True when iterating from N - 2 lands on a non-trivial fixed point at temperature t.
/// N - 2 bounds Q from above for weights in [0, 1].
bool positive_branch_exists(int n, const WeightDistribution& weights, double t);

/// Starting point used to probe the positive branch.
double positive_branch_init(int n, const WeightDistribution& weights);

/// Bisection on T for the disappearance of the positive branch. Needs the
/// branch present at t_lo and absent at t_hi (BadBracket otherwise).
double critical_temperature_mf(int n, const WeightDistribution& weights, double t_lo, double t_hi,
                               double bracket_tolerance = 1e-3);

}  // namespace balance
