#pragma once

// Spherical-code exponents and the bound evaluators built on them.

#include "qortho/numeric.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qortho {

/// Kabatiansky-Levenshtein exponent (base-2 logs) for minimal angle theta in (0, pi/2].
Real kl_exponent(Real const & theta);

/// sqrt((1+t)(3-t))/2
Real chord_sine(Real const & t);
/// Natural-log KL expression at chord_sine(t); beta(1) = 0.
Real beta(Real const & t);

struct AlphaResult {
    Real value;
    Real argmin;
};
/// min over t in [0,1] of x t + beta(t); nullopt x means x = infinity.
AlphaResult alpha(std::optional<Real> const & x);

struct LambdaResult {
    Real value;
    std::vector<Real> iterates; // gamma_0 = 1/2, gamma_1, ...
    Real residual;              // |gamma - F(gamma)| at the returned value
};
/// Fixed point of gamma = 1/4 + (2 gamma / log 3) alpha(log 3 / (8 gamma)), iterated from 1/2.
LambdaResult solve_lambda(Real const & tol);

/// 2 lambda beta(0) / log 3
Real gamma_conductor(Real const & lambda);
Real gamma_conductor();
/// beta(0) / (2 log 2)
Real newcoeur_exponent();

struct AstarteParams {
    double h0 = 1;   // >= 1
    double t = 0;    // in [0, 1]
    long rank = 0;   // >= 0
    long places = 1; // s >= 1
    double eps = 0.1;
    double C = 1;
};
/// log of C^s eps^(-2(s+1)) s (1 + log h0)^2 exp(t h0 + (beta(t) + eps) r).
double astarte_log_bound(AstarteParams const & p);
double astarte_bound(AstarteParams const & p);
/// The same bound with t chosen optimally: exponent r alpha(h0 / r) + eps r.
double astarte_log_bound_optimized(AstarteParams const & p);

/// A + B omega(D) + 2 log_3 h3
double rank_upper(Integer const & d, long h3, double a, double b);

struct ExponentEntry {
    std::string name;
    double value = 0;
    double error = 0;          // |value(bits) - value(2 bits)|
    double reference = 0;      // published five-digit value
    double reference_tol = 0;  // agreed tolerance against the published value
    std::string provenance;    // "computed"
};

struct ExponentTable {
    unsigned precision_bits = kDefaultPrecisionBits;
    std::vector<ExponentEntry> entries; // kl_at_pi3, beta0, newcoeur, lambda, gamma_conductor
    std::vector<double> lambda_iterates;
    double lambda_residual = 0;
    double alpha_argmin_at_lambda = 0;

    ExponentEntry const & at(std::string const & name) const;
};

ExponentTable compute_exponent_table(unsigned bits = kDefaultPrecisionBits, Real const & lambda_tol = Real(1e-8));

}  // namespace qortho
