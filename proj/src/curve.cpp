#include "qortho/curve.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace qortho {

// ---- CurvePoint ---------------------------------------------------------------

CurvePoint::CurvePoint(Rational x, Rational y)
    : origin_(false), x_(std::move(x)), y_(std::move(y))
{
    x_.canonicalize();
    y_.canonicalize();
}

Rational const & CurvePoint::x() const
{
    if (origin_)
        throw DomainError("x-coordinate of the origin");
    return x_;
}

Rational const & CurvePoint::y() const
{
    if (origin_)
        throw DomainError("y-coordinate of the origin");
    return y_;
}

bool operator==(CurvePoint const & a, CurvePoint const & b)
{
    if (a.origin_ || b.origin_)
        return a.origin_ == b.origin_;
    return a.x_ == b.x_ && a.y_ == b.y_;
}

bool operator<(CurvePoint const & a, CurvePoint const & b)
{
    if (a.origin_ || b.origin_)
        return a.origin_ && !b.origin_;
    if (a.x_ != b.x_)
        return a.x_ < b.x_;
    return a.y_ < b.y_;
}

std::ostream & operator<<(std::ostream & o, CurvePoint const & p)
{
    if (p.origin_)
        return o << "O";
    return o << "(" << p.x_.get_str() << "," << p.y_.get_str() << ")";
}

// ---- EllipticCurve ------------------------------------------------------------

EllipticCurve::EllipticCurve(Integer a1, Integer a2, Integer a3, Integer a4, Integer a6)
    : a_{std::move(a1), std::move(a2), std::move(a3), std::move(a4), std::move(a6)}
{
    auto const & [A1, A2, A3, A4, A6] = a_;
    b2_ = A1 * A1 + 4 * A2;
    b4_ = 2 * A4 + A1 * A3;
    b6_ = A3 * A3 + 4 * A6;
    b8_ = A1 * A1 * A6 + 4 * A2 * A6 - A1 * A3 * A4 + A2 * A3 * A3 - A4 * A4;
    c4_ = b2_ * b2_ - 24 * b4_;
    c6_ = -b2_ * b2_ * b2_ + 36 * b2_ * b4_ - 216 * b6_;
    disc_ = -b2_ * b2_ * b8_ - 8 * b4_ * b4_ * b4_ - 27 * b6_ * b6_ + 9 * b2_ * b4_ * b6_;
    if (disc_ == 0)
        throw DomainError("singular Weierstrass equation");
    j_ = Rational(c4_ * c4_ * c4_, disc_);
    j_.canonicalize();
}

bool EllipticCurve::contains(CurvePoint const & p) const
{
    if (p.is_origin())
        return true;
    Rational const & x = p.x();
    Rational const & y = p.y();
    Rational lhs = y * y + a1() * x * y + a3() * y;
    Rational rhs = ((x + a2()) * x + a4()) * x + a6();
    return lhs == rhs;
}

void EllipticCurve::require_on_curve(CurvePoint const & p) const
{
    if (!contains(p)) {
        std::ostringstream s;
        s << "point " << p << " is not on " << *this;
        throw DomainError(s.str());
    }
}

std::ostream & operator<<(std::ostream & o, EllipticCurve const & e)
{
    o << "[";
    for (std::size_t i = 0; i < 5; ++i)
        o << (i ? "," : "") << e.a_[i].get_str();
    return o << "]";
}

MordellCurve::MordellCurve(Integer d)
    : d_(d), curve_(0, 0, 0, 0, d)
{
}

// ---- PlaceSetQ ----------------------------------------------------------------

PlaceSetQ::PlaceSetQ(std::vector<Integer> primes, bool include_infinity)
    : primes_(std::move(primes)), infinity_(include_infinity)
{
    for (auto const & p : primes_)
        if (!is_prime(p))
            throw DomainError("place set contains a non-prime: " + p.get_str());
    std::sort(primes_.begin(), primes_.end());
    primes_.erase(std::unique(primes_.begin(), primes_.end()), primes_.end());
}

bool PlaceSetQ::contains(Integer const & p) const
{
    return std::binary_search(primes_.begin(), primes_.end(), p);
}

bool PlaceSetQ::supports(Integer const & n) const
{
    if (n == 0)
        return false;
    Integer m = abs(n);
    for (auto const & p : primes_)
        mpz_remove(m.get_mpz_t(), m.get_mpz_t(), p.get_mpz_t());
    return m == 1;
}

// ---- group law ----------------------------------------------------------------

CurvePoint negate(EllipticCurve const & e, CurvePoint const & p)
{
    if (p.is_origin())
        return p;
    return {p.x(), -p.y() - e.a1() * p.x() - e.a3()};
}

CurvePoint add(EllipticCurve const & e, CurvePoint const & p, CurvePoint const & q)
{
    if (p.is_origin())
        return q;
    if (q.is_origin())
        return p;
    Rational const &x1 = p.x(), &y1 = p.y(), &x2 = q.x(), &y2 = q.y();
    Rational lambda, nu;
    if (x1 == x2) {
        Rational denom = 2 * y1 + e.a1() * x1 + e.a3();
        if (y1 + y2 + e.a1() * x2 + e.a3() == 0)
            return CurvePoint::origin();
        lambda = (3 * x1 * x1 + 2 * e.a2() * x1 + e.a4() - e.a1() * y1) / denom;
        nu = (-x1 * x1 * x1 + e.a4() * x1 + 2 * e.a6() - e.a3() * y1) / denom;
    } else {
        lambda = (y2 - y1) / (x2 - x1);
        nu = (y1 * x2 - y2 * x1) / (x2 - x1);
    }
    Rational x3 = lambda * lambda + e.a1() * lambda - e.a2() - x1 - x2;
    Rational y3 = -(lambda + e.a1()) * x3 - nu - e.a3();
    return {x3, y3};
}

CurvePoint subtract(EllipticCurve const & e, CurvePoint const & p, CurvePoint const & q)
{
    return add(e, p, negate(e, q));
}

CurvePoint multiply(EllipticCurve const & e, CurvePoint const & p, long n)
{
    if (n < 0)
        return multiply(e, negate(e, p), -n);
    CurvePoint acc, base = p;
    while (n) {
        if (n & 1)
            acc = add(e, acc, base);
        n >>= 1;
        if (n)
            base = add(e, base, base);
    }
    return acc;
}

TorsionResult is_torsion(EllipticCurve const & e, CurvePoint const & p)
{
    e.require_on_curve(p);
    if (p.is_origin())
        return {true, 1};
    CurvePoint q = p;
    for (int k = 1; k <= kMazurBound; ++k) {
        if (q.is_origin())
            return {true, k};
        q = add(e, q, p);
    }
    return {false, 0};
}

// ---- reduction modulo p ---------------------------------------------------------

bool operator<(FpPoint const & a, FpPoint const & b)
{
    if (a.infinity || b.infinity)
        return a.infinity && !b.infinity;
    if (a.x != b.x)
        return a.x < b.x;
    return a.y < b.y;
}

namespace {

Integer mod(Integer const & a, Integer const & p)
{
    Integer r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
    return r;
}

Integer inverse_mod(Integer const & a, Integer const & p)
{
    Integer r;
    if (!mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t()))
        throw DomainError("non-invertible residue");
    return r;
}

Integer reduce_rational(Rational const & q, Integer const & p)
{
    return mod(q.get_num() * inverse_mod(q.get_den(), p), p);
}

}  // namespace

FpPoint reduce_mod_p(EllipticCurve const & e, CurvePoint const & pt, Integer const & prime)
{
    if (!is_prime(prime))
        throw DomainError("reduction modulus is not prime");
    if (e.discriminant() % prime == 0)
        throw BadReduction("bad reduction at " + prime.get_str());
    if (pt.is_origin())
        return {};
    if (pt.x().get_den() % prime == 0)
        return {}; // reduces to the origin
    return {false, reduce_rational(pt.x(), prime), reduce_rational(pt.y(), prime)};
}

FpPoint add_mod_p(EllipticCurve const & e, FpPoint const & p, FpPoint const & q, Integer const & prime)
{
    if (p.infinity)
        return q;
    if (q.infinity)
        return p;
    Integer a1 = mod(e.a1(), prime), a2 = mod(e.a2(), prime), a3 = mod(e.a3(), prime);
    Integer a4 = mod(e.a4(), prime), a6 = mod(e.a6(), prime);
    Integer lambda, nu;
    if (p.x == q.x) {
        if (mod(p.y + q.y + a1 * q.x + a3, prime) == 0)
            return {};
        Integer inv = inverse_mod(mod(2 * p.y + a1 * p.x + a3, prime), prime);
        lambda = mod((3 * p.x * p.x + 2 * a2 * p.x + a4 - a1 * p.y) * inv, prime);
        nu = mod((-p.x * p.x * p.x + a4 * p.x + 2 * a6 - a3 * p.y) * inv, prime);
    } else {
        Integer inv = inverse_mod(mod(q.x - p.x, prime), prime);
        lambda = mod((q.y - p.y) * inv, prime);
        nu = mod((p.y * q.x - q.y * p.x) * inv, prime);
    }
    Integer x3 = mod(lambda * lambda + a1 * lambda - a2 - p.x - q.x, prime);
    Integer y3 = mod(-(lambda + a1) * x3 - nu - a3, prime);
    return {false, x3, y3};
}

// ---- point searches -------------------------------------------------------------

namespace {

// Solutions b of b^2 + u b = w in integers, appended with the given denominators.
void push_roots(Integer const & u, Integer const & w, Rational const & x, Integer const & yden,
                std::vector<CurvePoint> & out)
{
    Integer disc = u * u + 4 * w;
    Integer s;
    if (!is_square(disc, &s))
        return;
    for (int sign : {-1, 1}) {
        Integer twice = -u + sign * s;
        if (twice % 2 != 0)
            continue;
        out.emplace_back(x, Rational(twice / 2, yden));
        if (s == 0)
            break;
    }
}

}  // namespace

std::vector<CurvePoint> integral_points_bounded(EllipticCurve const & e, Integer const & x_bound)
{
    if (x_bound < 0)
        throw DomainError("negative search bound");
    std::vector<CurvePoint> out;
    for (Integer x = -x_bound; x <= x_bound; ++x) {
        Integer u = e.a1() * x + e.a3();
        Integer w = ((x + e.a2()) * x + e.a4()) * x + e.a6();
        push_roots(u, w, Rational(x), 1, out);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Integer exp_height_floor(double h)
{
    if (h < 0)
        return 0;
    long double v = std::exp(static_cast<long double>(h));
    long double r = std::nearbyint(v);
    if (std::fabs(v - r) <= 1e-9L * std::max<long double>(1, r))
        v = r;
    Integer out;
    mpz_set_d(out.get_mpz_t(), static_cast<double>(std::floor(v)));
    return out;
}

std::vector<Integer> smooth_numbers(std::vector<Integer> const & primes, Integer const & limit)
{
    std::vector<Integer> out;
    if (limit < 1)
        return out;
    out.push_back(1);
    for (auto const & p : primes) {
        std::size_t n = out.size();
        for (std::size_t i = 0; i < n; ++i) {
            Integer v = out[i] * p;
            while (v <= limit) {
                out.push_back(v);
                v *= p;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CurvePoint> s_integral_points_bounded(EllipticCurve const & e, PlaceSetQ const & s,
                                                  double height_bound)
{
    Integer bound = exp_height_floor(height_bound);
    std::vector<CurvePoint> out;
    if (bound < 1)
        return out;
    // x = a / d^2 in lowest terms with d S-smooth; the height is log max(|a|, d^2).
    for (auto const & d : smooth_numbers(s.primes(), isqrt(bound))) {
        Integer d2 = d * d, d3 = d2 * d, d4 = d2 * d2, d6 = d3 * d3;
        for (Integer a = -bound; a <= bound; ++a) {
            if (d != 1 && gcd(a, d) != 1)
                continue;
            // b = y d^3 satisfies b^2 + (a1 a d + a3 d^3) b = a^3 + a2 a^2 d^2 + a4 a d^4 + a6 d^6.
            Integer u = e.a1() * a * d + e.a3() * d3;
            Integer w = a * a * a + e.a2() * a * a * d2 + e.a4() * a * d4 + e.a6() * d6;
            push_roots(u, w, Rational(a, d2), d3, out);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- models -------------------------------------------------------------------

namespace {

Integer mod_positive(Integer const & a, long m)
{
    Integer r = a % m;
    if (r < 0)
        r += m;
    return r;
}

}  // namespace

bool kraus_conditions(Integer const & c4, Integer const & c6)
{
    if (c4 == 0 && c6 == 0)
        return false;
    if (c4 * c4 * c4 - c6 * c6 == 0)
        return false;
    if ((c4 * c4 * c4 - c6 * c6) % 1728 != 0)
        return false;
    // p = 3
    if (valuation(c6, Integer(3)) == 2)
        return false;
    // p = 2
    Integer c6m4 = mod_positive(c6, 4);
    if (c6m4 == 3)
        return true;
    Integer c6m32 = mod_positive(c6, 32);
    return valuation(c4, Integer(2)) >= 4 && (c6m32 == 0 || c6m32 == 8);
}

std::optional<EllipticCurve> curve_from_c4c6(Integer const & c4, Integer const & c6)
{
    if (!kraus_conditions(c4, c6))
        return std::nullopt;
    Integer b2 = mod_positive(-c6, 12);
    if (b2 > 6)
        b2 -= 12;
    Integer b4 = b2 * b2 - c4;
    if (b4 % 24 != 0)
        return std::nullopt;
    b4 /= 24;
    Integer b6 = -b2 * b2 * b2 + 36 * b2 * b4 - c6;
    if (b6 % 216 != 0)
        return std::nullopt;
    b6 /= 216;
    Integer a1 = mod_positive(b2, 2);
    Integer a3 = mod_positive(b6, 2);
    Integer a2 = b2 - a1;
    Integer a4 = b4 - a1 * a3;
    Integer a6 = b6 - a3;
    if (a2 % 4 != 0 || a4 % 2 != 0 || a6 % 4 != 0)
        return std::nullopt;
    EllipticCurve e(a1, a2 / 4, a3, a4 / 2, a6 / 4);
    if (e.c4() != c4 || e.c6() != c6)
        return std::nullopt;
    return e;
}

MinimalModel minimal_model(EllipticCurve const & e)
{
    Integer c4 = e.c4(), c6 = e.c6(), u = 1;
    for (auto const & [p, ep] : factor(e.discriminant())) {
        long k = ep / 12;
        for (; k > 0; --k) {
            Integer pk = 1;
            mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(k));
            Integer p4 = pk * pk * pk * pk, p6 = p4 * pk * pk;
            if (c4 % p4 != 0 || c6 % p6 != 0)
                continue;
            if (p >= 5 || kraus_conditions(c4 / p4, c6 / p6))
                break;
        }
        if (k > 0) {
            Integer pk;
            mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(k));
            u *= pk;
            c4 /= pk * pk * pk * pk;
            c6 /= pk * pk * pk * pk * pk * pk;
        }
    }
    auto reduced = curve_from_c4c6(c4, c6);
    if (!reduced)
        throw DomainError("minimal model construction failed");
    EllipticCurve const & m = *reduced;
    Rational U(u);
    Rational s = (U * m.a1() - e.a1()) / 2;
    Rational r = (U * U * m.a2() - e.a2() + s * e.a1() + s * s) / 3;
    Rational t = (U * U * U * m.a3() - e.a3() - r * e.a1()) / 2;
    ModelChange change{U, r, s, t};
    return {m, change};
}

CurvePoint map_point(ModelChange const & c, CurvePoint const & p)
{
    if (p.is_origin())
        return p;
    Rational u2 = c.u * c.u;
    Rational x = (p.x() - c.r) / u2;
    Rational y = (p.y() - c.s * u2 * x - c.t) / (u2 * c.u);
    return {x, y};
}

ReductionType reduction_type(EllipticCurve const & e, Integer const & p)
{
    EllipticCurve m = minimal_model(e).curve;
    if (m.discriminant() % p != 0)
        return ReductionType::good;
    return m.c4() % p != 0 ? ReductionType::multiplicative : ReductionType::additive;
}

bool is_potentially_good(EllipticCurve const & e, Integer const & p)
{
    return valuation(e.j_invariant(), p) >= 0;
}

std::vector<Integer> bad_primes(EllipticCurve const & e)
{
    return prime_divisors(minimal_model(e).curve.discriminant());
}

}  // namespace qortho
