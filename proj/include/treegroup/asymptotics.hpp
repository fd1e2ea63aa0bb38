#pragma once

// Growth constants for orbit statistics: the p-part orbit measure of a
// label group, its generating function, and the displacement rate alpha
// obtained either from the defining root equation or by minimizing
// log mu_hat(e^lambda) / lambda.

#include <cstdint>
#include <vector>

#include "treegroup/perm_group.hpp"
#include "treegroup/rational.hpp"

namespace treegroup {

// expected orbit counts of a uniform element, bucketed by the p-adic
// valuation of the orbit length
struct PAdicOrbitMeasure {
    int prime = 2;
    // coeffs[k] = expected number of orbits whose length has p-part p^k
    std::vector<Rational> coeffs;
    // point_mass[k] = expected number of points lying on such orbits;
    // sums to the degree exactly
    std::vector<Rational> point_mass;

    double mu_hat(double z) const;      // sum coeffs[k] z^k
    Rational total_orbits() const;
    Rational total_points() const;
};

struct AlphaResult {
    enum class Method { closed_form_root, lambda_minimization };
    double alpha = 0.0;
    double lambda_star = 0.0;
    Method method = Method::lambda_minimization;
    bool degenerate = false; // no mass above valuation 0
};

// exact average over H of per-element orbit counts bucketed by p-part
PAdicOrbitMeasure orbit_measure(const PermGroup& H, int p);

// min over lambda > 0 of log mu_hat(e^lambda) / lambda, golden section
// plus a stationarity check f(l)/l = f'(l)
AlphaResult alpha_min(const PAdicOrbitMeasure& measure);

// unique root in (0,1) of alpha (1-alpha)^(1/alpha-1) = 1 - 1/p,
// bisection then Newton polish; cross-validated against the finite
// binomial form at n = 10^6
AlphaResult alpha_turan(int p);

// root in k of binom(n,k) = (p/(p-1))^k, divided by n
double alpha_discrete(int p, std::int64_t n);

// sum over primes p dividing |H| of alpha_p(H) * ln p; the limit of
// ln(order of a uniform element) / depth
double log_order_growth(const PermGroup& H);

} // namespace treegroup
