#pragma once

// Exact integers/rationals (GMP) and runtime-precision reals (MPFR through
// Boost.Multiprecision), plus the small amount of elementary number theory
// every other module leans on.

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qortho {

using Integer = mpz_class;
using Rational = mpq_class;
using Real = boost::multiprecision::mpfr_float;

/// Default working precision in bits.
inline constexpr unsigned kDefaultPrecisionBits = 128;

class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Thrown when a series or iteration cannot reach the requested accuracy.
class PrecisionExhausted : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Sets the (process-wide) MPFR working precision for its lifetime.
class PrecisionScope {
  public:
    explicit PrecisionScope(unsigned bits);
    ~PrecisionScope();
    PrecisionScope(PrecisionScope const &) = delete;
    PrecisionScope & operator=(PrecisionScope const &) = delete;

  private:
    unsigned saved_digits10_;
};

unsigned bits_to_digits10(unsigned bits);

Real to_real(Integer const & z);
Real to_real(Rational const & q);
Real pi();
Real epsilon_for_bits(unsigned bits); // 2^-bits

/// Minimal complex arithmetic over Real.
struct Complex {
    Real re;
    Real im;

    Complex() : re(0), im(0) {}
    Complex(Real r) : re(std::move(r)), im(0) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

    Complex & operator+=(Complex const & o);
    Complex & operator-=(Complex const & o);
    Complex & operator*=(Complex const & o);
    Complex & operator/=(Complex const & o);
    Complex operator-() const { return {-re, -im}; }
};

Complex operator+(Complex a, Complex const & b);
Complex operator-(Complex a, Complex const & b);
Complex operator*(Complex a, Complex const & b);
Complex operator/(Complex a, Complex const & b);
Complex operator*(Complex a, Real const & s);
Real abs(Complex const & z);
Real norm(Complex const & z); // |z|^2
Real arg(Complex const & z);
Complex conj(Complex const & z);
Complex exp(Complex const & z);
Complex log(Complex const & z);
Complex sqrt(Complex const & z);
Complex pow_int(Complex z, long n);
/// exp(2 pi i w)
Complex exp2pii(Complex const & w);

// ---- integer helpers ------------------------------------------------------

Integer isqrt(Integer const & n);
/// True iff n is a perfect square; writes the root when requested.
bool is_square(Integer const & n, Integer * root = nullptr);
/// Integer cube/k-th root test.
bool is_perfect_power(Integer const & n, unsigned k, Integer * root = nullptr);

/// p-adic valuation; v_p(0) is reported as a large sentinel.
inline constexpr long kInfiniteValuation = 1L << 40;
long valuation(Integer const & n, Integer const & p);
long valuation(Rational const & q, Integer const & p);

bool is_prime(Integer const & n);
bool is_prime(std::int64_t n);
/// Prime factorisation of |n| (n != 0), ascending.
std::map<Integer, long> factor(Integer const & n);
std::vector<Integer> prime_divisors(Integer const & n);
/// Number of distinct prime divisors.
int omega(Integer const & n);
std::vector<std::int64_t> primes_up_to(std::int64_t n);

/// log max(|numerator|, |denominator|)
Real naive_height(Rational const & x);

/// Fundamental discriminant test (for d of either sign).
bool is_fundamental_discriminant(Integer const & d);

std::string to_string(Rational const & q);

}  // namespace qortho
