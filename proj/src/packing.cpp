#include "qortho/packing.hpp"

#include <cmath>

namespace qortho {

namespace bm = boost::multiprecision;

namespace {

// a log a with 0 log 0 = 0
Real xlogx(Real const & a)
{
    if (a == 0)
        return Real(0);
    return a * bm::log(a);
}

// (1+s)/(2s) log((1+s)/(2s)) - (1-s)/(2s) log((1-s)/(2s)), natural log
Real kl_natural(Real const & s)
{
    Real a = (1 + s) / (2 * s);
    Real b = (1 - s) / (2 * s);
    if (b < 0)
        b = 0;
    return xlogx(a) - xlogx(b);
}

unsigned current_bits()
{
    return static_cast<unsigned>(std::ceil(Real::default_precision() * 3.3219280948873623));
}

}  // namespace

Real kl_exponent(Real const & theta)
{
    if (!(theta > 0) || theta > pi() / 2 + bm::pow(Real(2), -static_cast<long>(current_bits()) + 4))
        throw DomainError("kl_exponent: theta outside (0, pi/2]");
    Real s = bm::sin(theta);
    if (s > 1)
        s = 1;
    return kl_natural(s) / bm::log(Real(2));
}

Real chord_sine(Real const & t)
{
    return bm::sqrt((1 + t) * (3 - t)) / 2;
}

Real beta(Real const & t)
{
    if (t < 0 || t > 1)
        throw DomainError("beta: t outside [0, 1]");
    if (t == 1)
        return Real(0);
    Real f = chord_sine(t);
    if (f > 1)
        f = 1;
    return kl_natural(f);
}

AlphaResult alpha(std::optional<Real> const & x)
{
    if (!x)
        return {beta(Real(0)), Real(0)};
    if (*x < 0)
        throw DomainError("alpha: negative argument");
    auto g = [&](Real const & t) { return *x * t + beta(t); };

    // dense grid
    int const n = 1000;
    int best = 0;
    Real best_v = g(Real(0));
    for (int i = 1; i <= n; ++i) {
        Real v = g(Real(i) / n);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    // golden-section refinement on the bracketing cells
    Real lo = Real(std::max(0, best - 1)) / n, hi = Real(std::min(n, best + 1)) / n;
    Real const r = (bm::sqrt(Real(5)) - 1) / 2;
    Real c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    Real gc = g(c), gd = g(d);
    Real tol = bm::pow(Real(2), -static_cast<long>(current_bits()) / 2 - 4);
    while (hi - lo > tol) {
        if (gc <= gd) {
            hi = d;
            d = c;
            gd = gc;
            c = hi - r * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + r * (hi - lo);
            gd = g(d);
        }
    }
    Real t = (lo + hi) / 2;
    Real v = g(t);
    // the endpoints are feasible and may win outright
    for (Real e : {Real(0), Real(1)}) {
        Real ve = g(e);
        if (ve < v) {
            v = ve;
            t = e;
        }
    }
    return {v, t};
}

namespace {

Real lambda_map(Real const & g)
{
    Real l3 = bm::log(Real(3));
    return Real(1) / 4 + (2 * g / l3) * alpha(l3 / (8 * g)).value;
}

}  // namespace

LambdaResult solve_lambda(Real const & tol)
{
    if (!(tol > 0))
        throw DomainError("solve_lambda: tolerance must be positive");
    LambdaResult out;
    Real g = Real(1) / 2;
    out.iterates.push_back(g);
    for (int it = 0; it < 1000; ++it) {
        Real next = lambda_map(g);
        out.iterates.push_back(next);
        if (bm::abs(next - g) < tol) {
            out.value = next;
            out.residual = bm::abs(next - lambda_map(next));
            return out;
        }
        g = next;
    }
    throw PrecisionExhausted("solve_lambda: no convergence within 1000 iterations");
}

Real gamma_conductor(Real const & lambda)
{
    return 2 * lambda * beta(Real(0)) / bm::log(Real(3));
}

Real gamma_conductor()
{
    return gamma_conductor(solve_lambda(Real(1e-12)).value);
}

Real newcoeur_exponent()
{
    return beta(Real(0)) / (2 * bm::log(Real(2)));
}

namespace {

void check_astarte(AstarteParams const & p)
{
    if (!(p.h0 >= 1) || p.t < 0 || p.t > 1 || p.rank < 0 || p.places < 1 || !(p.eps > 0) || !(p.C > 0))
        throw DomainError("astarte bound: parameter outside its domain");
}

double prefactor_log(AstarteParams const & p)
{
    double s = static_cast<double>(p.places);
    double lh = 1 + std::log(p.h0);
    return s * std::log(p.C) - 2 * (s + 1) * std::log(p.eps) + std::log(s) + 2 * std::log(lh);
}

}  // namespace

double astarte_log_bound(AstarteParams const & p)
{
    check_astarte(p);
    PrecisionScope scope(64);
    double b = beta(Real(p.t)).convert_to<double>();
    return prefactor_log(p) + p.t * p.h0 + (b + p.eps) * static_cast<double>(p.rank);
}

double astarte_bound(AstarteParams const & p)
{
    return std::exp(astarte_log_bound(p));
}

double astarte_log_bound_optimized(AstarteParams const & p)
{
    check_astarte(p);
    if (p.rank == 0)
        return prefactor_log(p); // t = 0 minimises t h0
    PrecisionScope scope(64);
    double r = static_cast<double>(p.rank);
    double a = alpha(Real(p.h0 / r)).value.convert_to<double>();
    return prefactor_log(p) + r * a + p.eps * r;
}

double rank_upper(Integer const & d, long h3, double a, double b)
{
    if (d == 0 || h3 < 1)
        throw DomainError("rank_upper: need D != 0 and h3 >= 1");
    return a + b * omega(d) + 2 * std::log(static_cast<double>(h3)) / std::log(3.0);
}

ExponentEntry const & ExponentTable::at(std::string const & name) const
{
    for (auto const & e : entries)
        if (e.name == name)
            return e;
    throw DomainError("unknown exponent " + name);
}

namespace {

struct RawConstants {
    Real kl, beta0, newcoeur, lambda, gamma, residual, argmin;
    std::vector<Real> iterates;
};

RawConstants raw_constants(unsigned bits, Real const & tol)
{
    PrecisionScope scope(bits);
    RawConstants c;
    c.kl = kl_exponent(pi() / 3);
    c.beta0 = beta(Real(0));
    c.newcoeur = newcoeur_exponent();
    auto lam = solve_lambda(Real(tol));
    c.lambda = lam.value;
    c.residual = lam.residual;
    c.iterates = lam.iterates;
    c.gamma = gamma_conductor(c.lambda);
    c.argmin = alpha(bm::log(Real(3)) / (8 * c.lambda)).argmin;
    return c;
}

}  // namespace

ExponentTable compute_exponent_table(unsigned bits, Real const & lambda_tol)
{
    RawConstants a = raw_constants(bits, lambda_tol);
    RawConstants b = raw_constants(2 * bits, lambda_tol);
    auto entry = [](std::string name, Real const & v, Real const & w, double ref, double tol) {
        return ExponentEntry{std::move(name), v.convert_to<double>(), bm::abs(v - w).convert_to<double>(), ref, tol,
                             "computed"};
    };
    ExponentTable t;
    t.precision_bits = bits;
    t.entries = {entry("kl_at_pi3", a.kl, b.kl, 0.40141, 1e-4),
                 entry("beta0", a.beta0, b.beta0, 0.2782, 1e-4),
                 entry("newcoeur", a.newcoeur, b.newcoeur, 0.20070, 1e-4),
                 entry("lambda", a.lambda, b.lambda, 0.44178, 5e-5),
                 entry("gamma_conductor", a.gamma, b.gamma, 0.22377, 1e-4)};
    for (auto const & v : a.iterates)
        t.lambda_iterates.push_back(v.convert_to<double>());
    t.lambda_residual = a.residual.convert_to<double>();
    t.alpha_argmin_at_lambda = a.argmin.convert_to<double>();
    return t;
}

}  // namespace qortho
