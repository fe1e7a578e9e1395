#include "qortho/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qortho {

unsigned bits_to_digits10(unsigned bits)
{
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

PrecisionScope::PrecisionScope(unsigned bits)
    : saved_digits10_(Real::default_precision())
{
    Real::default_precision(bits_to_digits10(bits));
}

PrecisionScope::~PrecisionScope()
{
    Real::default_precision(saved_digits10_);
}

Real to_real(Integer const & z)
{
    Real r;
    mpfr_set_z(r.backend().data(), z.get_mpz_t(), MPFR_RNDN);
    return r;
}

Real to_real(Rational const & q)
{
    Real r;
    mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
    return r;
}

Real pi()
{
    Real r;
    mpfr_const_pi(r.backend().data(), MPFR_RNDN);
    return r;
}

Real epsilon_for_bits(unsigned bits)
{
    Real r(1);
    mpfr_mul_2si(r.backend().data(), r.backend().data(), -static_cast<long>(bits), MPFR_RNDN);
    return r;
}

// ---- Complex --------------------------------------------------------------

Complex & Complex::operator+=(Complex const & o)
{
    re += o.re;
    im += o.im;
    return *this;
}

Complex & Complex::operator-=(Complex const & o)
{
    re -= o.re;
    im -= o.im;
    return *this;
}

Complex & Complex::operator*=(Complex const & o)
{
    Real r = re * o.re - im * o.im;
    Real i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
}

Complex & Complex::operator/=(Complex const & o)
{
    Real d = o.re * o.re + o.im * o.im;
    Real r = (re * o.re + im * o.im) / d;
    Real i = (im * o.re - re * o.im) / d;
    re = std::move(r);
    im = std::move(i);
    return *this;
}

Complex operator+(Complex a, Complex const & b) { return a += b; }
Complex operator-(Complex a, Complex const & b) { return a -= b; }
Complex operator*(Complex a, Complex const & b) { return a *= b; }
Complex operator/(Complex a, Complex const & b) { return a /= b; }

Complex operator*(Complex a, Real const & s)
{
    a.re *= s;
    a.im *= s;
    return a;
}

Real abs(Complex const & z)
{
    return boost::multiprecision::hypot(z.re, z.im);
}

Real norm(Complex const & z)
{
    return z.re * z.re + z.im * z.im;
}

Real arg(Complex const & z)
{
    return boost::multiprecision::atan2(z.im, z.re);
}

Complex conj(Complex const & z)
{
    return {z.re, -z.im};
}

Complex exp(Complex const & z)
{
    Real m = boost::multiprecision::exp(z.re);
    return {m * boost::multiprecision::cos(z.im), m * boost::multiprecision::sin(z.im)};
}

Complex log(Complex const & z)
{
    return {boost::multiprecision::log(abs(z)), arg(z)};
}

Complex sqrt(Complex const & z)
{
    if (z.re == 0 && z.im == 0)
        return {};
    Real m = abs(z);
    Real a = boost::multiprecision::sqrt((m + boost::multiprecision::abs(z.re)) / 2);
    if (z.re >= 0)
        return {a, z.im / (2 * a)};
    Real b = z.im >= 0 ? a : Real(-a);
    return {boost::multiprecision::abs(z.im) / (2 * a), b};
}

Complex pow_int(Complex z, long n)
{
    if (n < 0)
        return Complex(Real(1)) / pow_int(std::move(z), -n);
    Complex r(Real(1));
    while (n) {
        if (n & 1)
            r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

Complex exp2pii(Complex const & w)
{
    Real tp = 2 * pi();
    return exp(Complex(-tp * w.im, tp * w.re));
}

// ---- integers -------------------------------------------------------------

Integer isqrt(Integer const & n)
{
    if (n < 0)
        throw DomainError("isqrt of negative integer");
    Integer r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

bool is_square(Integer const & n, Integer * root)
{
    if (n < 0)
        return false;
    if (!mpz_perfect_square_p(n.get_mpz_t()))
        return false;
    if (root)
        mpz_sqrt(root->get_mpz_t(), n.get_mpz_t());
    return true;
}

bool is_perfect_power(Integer const & n, unsigned k, Integer * root)
{
    Integer r;
    int exact = mpz_root(r.get_mpz_t(), n.get_mpz_t(), k);
    if (exact && root)
        *root = r;
    return exact != 0;
}

long valuation(Integer const & n, Integer const & p)
{
    if (n == 0)
        return kInfiniteValuation;
    Integer m = n;
    return static_cast<long>(mpz_remove(m.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t()));
}

long valuation(Rational const & q, Integer const & p)
{
    if (q == 0)
        return kInfiniteValuation;
    return valuation(q.get_num(), p) - valuation(q.get_den(), p);
}

bool is_prime(Integer const & n)
{
    if (n < 2)
        return false;
    return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

bool is_prime(std::int64_t n)
{
    if (n < 2)
        return false;
    if (n < 4)
        return true;
    if (n % 2 == 0 || n % 3 == 0)
        return false;
    for (std::int64_t d = 5; d * d <= n; d += 6)
        if (n % d == 0 || n % (d + 2) == 0)
            return false;
    return true;
}

namespace {

Integer pollard_rho(Integer const & n)
{
    if (n % 2 == 0)
        return 2;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    for (;;) {
        Integer c = Integer(static_cast<unsigned long>(rng() % 1000 + 1));
        Integer x = 2, y = 2, d = 1;
        auto f = [&](Integer const & v) {
            Integer r = v * v + c;
            mpz_mod(r.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
            return r;
        };
        while (d == 1) {
            x = f(x);
            y = f(f(y));
            Integer diff = x - y;
            mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
        }
        if (d != n)
            return d;
    }
}

void factor_into(Integer n, std::map<Integer, long> & out)
{
    if (n == 1)
        return;
    if (is_prime(n)) {
        out[n] += 1;
        return;
    }
    Integer d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

}  // namespace

std::map<Integer, long> factor(Integer const & n)
{
    if (n == 0)
        throw DomainError("factor(0)");
    std::map<Integer, long> out;
    Integer m = abs(n);
    for (unsigned long p : {2UL, 3UL, 5UL, 7UL, 11UL, 13UL, 17UL, 19UL, 23UL, 29UL, 31UL, 37UL}) {
        if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            long e = static_cast<long>(mpz_remove(m.get_mpz_t(), m.get_mpz_t(), Integer(p).get_mpz_t()));
            out[Integer(p)] = e;
        }
    }
    for (unsigned long p = 41; p < 10000 && Integer(p) * p <= m; p += 2) {
        if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            long e = static_cast<long>(mpz_remove(m.get_mpz_t(), m.get_mpz_t(), Integer(p).get_mpz_t()));
            out[Integer(p)] = e;
        }
    }
    factor_into(m, out);
    return out;
}

std::vector<Integer> prime_divisors(Integer const & n)
{
    std::vector<Integer> ps;
    for (auto const & [p, e] : factor(n))
        ps.push_back(p);
    return ps;
}

int omega(Integer const & n)
{
    return static_cast<int>(factor(n).size());
}

std::vector<std::int64_t> primes_up_to(std::int64_t n)
{
    std::vector<std::int64_t> out;
    if (n < 2)
        return out;
    std::vector<bool> sieve(static_cast<std::size_t>(n + 1), true);
    for (std::int64_t i = 2; i <= n; ++i) {
        if (!sieve[i])
            continue;
        out.push_back(i);
        for (std::int64_t j = i * i; j <= n; j += i)
            sieve[j] = false;
    }
    return out;
}

Real naive_height(Rational const & x)
{
    Integer n = abs(x.get_num());
    Integer m = n > x.get_den() ? n : Integer(x.get_den());
    return boost::multiprecision::log(to_real(m));
}

bool is_fundamental_discriminant(Integer const & d)
{
    if (d == 0 || d == 1)
        return false;
    Integer r = d % 4;
    if (r < 0)
        r += 4;
    auto squarefree = [](Integer const & m) {
        for (auto const & [p, e] : factor(m))
            if (e > 1)
                return false;
        return true;
    };
    if (r == 1)
        return squarefree(d);
    if (r != 0)
        return false;
    Integer m = d / 4;
    Integer mr = m % 4;
    if (mr < 0)
        mr += 4;
    if (mr != 2 && mr != 3)
        return false;
    return squarefree(m);
}

std::string to_string(Rational const & q)
{
    return q.get_str();
}

}  // namespace qortho
