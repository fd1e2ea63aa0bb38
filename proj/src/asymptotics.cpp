#include "treegroup/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "treegroup/errors.hpp"

namespace treegroup {

namespace {

// log of mu_hat(e^lambda) evaluated stably through the largest term
double mu_hat_log(const std::vector<double>& c, double lambda) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k] > 0)
            m = std::max(m, std::log(c[k]) + static_cast<double>(k) * lambda);
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        if (c[k] > 0)
            s += std::exp(std::log(c[k]) + static_cast<double>(k) * lambda - m);
    return m + std::log(s);
}

} // namespace

double PAdicOrbitMeasure::mu_hat(double z) const {
    double acc = 0.0;
    double zk = 1.0;
    for (const Rational& c : coeffs) {
        acc += c.to_double() * zk;
        zk *= z;
    }
    return acc;
}

Rational PAdicOrbitMeasure::total_orbits() const {
    Rational s(0);
    for (const Rational& c : coeffs) s += c;
    return s;
}

Rational PAdicOrbitMeasure::total_points() const {
    Rational s(0);
    for (const Rational& c : point_mass) s += c;
    return s;
}

PAdicOrbitMeasure orbit_measure(const PermGroup& H, int p) {
    if (!is_prime(p)) throw domain_error("orbit measure: p must be prime");
    if (H.size() > 10'000'000)
        throw resource_error("orbit measure: group too large to enumerate");

    PAdicOrbitMeasure m;
    m.prime = p;
    for (int e = 0; e < H.size(); ++e) {
        for (const auto& cyc : H.cycles(e)) {
            std::size_t len = cyc.size();
            std::size_t k = 0;
            while (len % static_cast<std::size_t>(p) == 0) {
                len /= static_cast<std::size_t>(p);
                ++k;
            }
            if (m.coeffs.size() <= k) {
                m.coeffs.resize(k + 1, Rational(0));
                m.point_mass.resize(k + 1, Rational(0));
            }
            m.coeffs[k] += Rational(1, H.size());
            m.point_mass[k] +=
                Rational(static_cast<std::int64_t>(cyc.size()), H.size());
        }
    }
    return m;
}

AlphaResult alpha_min(const PAdicOrbitMeasure& measure) {
    std::vector<double> c;
    c.reserve(measure.coeffs.size());
    for (const Rational& r : measure.coeffs) c.push_back(r.to_double());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.empty()) throw domain_error("alpha: empty measure");

    AlphaResult res;
    res.method = AlphaResult::Method::lambda_minimization;
    if (c.size() == 1) {
        // all mass at valuation 0: orders stay bounded, rate is zero
        res.degenerate = true;
        return res;
    }

    int nonzero = 0;
    for (double v : c)
        if (v > 0) ++nonzero;
    if (nonzero == 1) {
        // pure power mu_hat(z) = c z^k: the objective is flat only for
        // c = 1; anything else is not an orbit measure of a group
        if (std::abs(c.back() - 1.0) > 1e-12)
            throw domain_error("alpha: measure has no interior minimum");
        res.alpha = static_cast<double>(c.size() - 1);
        res.lambda_star = 1.0;
        return res;
    }
    if (measure.total_orbits() < Rational(1))
        throw domain_error("alpha: expected orbit count below one");

    const auto g = [&](double l) { return mu_hat_log(c, l) / l; };
    double a = 1e-6, b = 50.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double g1 = g(x1), g2 = g(x2);
    // unimodality guard on the initial bracket
    if (std::min(g1, g2) > std::max(g(a), g(b)) + 1e-9)
        throw domain_error("alpha: objective not unimodal on bracket");
    while (b - a > 1e-11) {
        if (g1 <= g2) {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2);
        }
    }
    res.lambda_star = (a + b) / 2;
    res.alpha = g(res.lambda_star);
    return res;
}

AlphaResult alpha_turan(int p) {
    if (p < 2) throw domain_error("alpha: p must be at least 2");
    const double target = 1.0 - 1.0 / p;
    // F(x) = x (1-x)^(1/x - 1) - (1 - 1/p), increasing from -target to 1/p
    const auto F = [&](double x) {
        return x * std::exp((1.0 / x - 1.0) * std::log1p(-x)) - target;
    };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    for (int it = 0; it < 80; ++it) {
        const double mid = (lo + hi) / 2;
        (F(mid) < 0 ? lo : hi) = mid;
    }
    double x = (lo + hi) / 2;
    // Newton polish on ln(x) + (1/x - 1) ln(1-x) = ln(target)
    for (int it = 0; it < 6; ++it) {
        const double L = std::log(x) + (1.0 / x - 1.0) * std::log1p(-x) -
                         std::log(target);
        const double dL = 1.0 / x - std::log1p(-x) / (x * x) -
                          (1.0 / x - 1.0) / (1.0 - x);
        const double step = L / dL;
        if (!std::isfinite(step)) break;
        x -= step;
        if (x <= 0.0 || x >= 1.0) {
            x = (lo + hi) / 2;
            break;
        }
    }

    // cross-check against the finite binomial form
    const double discrete = alpha_discrete(p, 1'000'000);
    if (std::abs(discrete - x) > 1e-4)
        throw domain_error("alpha: closed form and binomial form disagree");

    AlphaResult res;
    res.method = AlphaResult::Method::closed_form_root;
    res.alpha = x;
    // minimizing lambda for the cyclic measure 1 + z (p-1)/p
    res.lambda_star =
        std::log(x / (1.0 - x)) - std::log((p - 1.0) / p);
    return res;
}

double alpha_discrete(int p, std::int64_t n) {
    if (p < 2) throw domain_error("alpha: p must be at least 2");
    if (n < 4) throw domain_error("alpha: n too small");
    const double nd = static_cast<double>(n);
    const double rate = std::log(static_cast<double>(p) / (p - 1.0));
    // ln binom(n,k) - k ln(p/(p-1)), continuous in k via lgamma;
    // positive at n/2, negative at n; the upper root is alpha * n
    const auto f = [&](double k) {
        return std::lgamma(nd + 1.0) - std::lgamma(k + 1.0) -
               std::lgamma(nd - k + 1.0) - k * rate;
    };
    double lo = nd / 2, hi = nd - 1e-6;
    if (f(lo) <= 0 || f(hi) >= 0)
        throw domain_error("alpha: binomial bracket failed");
    for (int it = 0; it < 80; ++it) {
        const double mid = (lo + hi) / 2;
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return ((lo + hi) / 2) / nd;
}

double log_order_growth(const PermGroup& H) {
    double sum = 0.0;
    for (int p : H.order_primes()) {
        const AlphaResult a = alpha_min(orbit_measure(H, p));
        if (!a.degenerate) sum += a.alpha * std::log(static_cast<double>(p));
    }
    return sum;
}

} // namespace treegroup
