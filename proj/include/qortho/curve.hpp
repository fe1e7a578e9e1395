#pragma once

// Exact elliptic curve arithmetic over Q.

#include "qortho/numeric.hpp"

#include <array>
#include <compare>
#include <optional>
#include <ostream>
#include <vector>

namespace qortho {

/// A rational point: either the origin or an affine pair.
class CurvePoint {
  public:
    CurvePoint() = default; // origin
    CurvePoint(Rational x, Rational y);

    static CurvePoint origin() { return {}; }

    bool is_origin() const { return origin_; }
    Rational const & x() const;
    Rational const & y() const;

    friend bool operator==(CurvePoint const & a, CurvePoint const & b);
    /// Origin first, then lexicographic by (x, y).
    friend bool operator<(CurvePoint const & a, CurvePoint const & b);
    friend std::ostream & operator<<(std::ostream & o, CurvePoint const & p);

  private:
    bool origin_ = true;
    Rational x_, y_;
};

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integral coefficients.
class EllipticCurve {
  public:
    EllipticCurve(Integer a1, Integer a2, Integer a3, Integer a4, Integer a6);

    Integer const & a1() const { return a_[0]; }
    Integer const & a2() const { return a_[1]; }
    Integer const & a3() const { return a_[2]; }
    Integer const & a4() const { return a_[3]; }
    Integer const & a6() const { return a_[4]; }
    std::array<Integer, 5> const & coefficients() const { return a_; }

    Integer const & b2() const { return b2_; }
    Integer const & b4() const { return b4_; }
    Integer const & b6() const { return b6_; }
    Integer const & b8() const { return b8_; }
    Integer const & c4() const { return c4_; }
    Integer const & c6() const { return c6_; }
    Integer const & discriminant() const { return disc_; }
    Rational const & j_invariant() const { return j_; }

    bool contains(CurvePoint const & p) const;
    /// Throws DomainError when p is not on the curve.
    void require_on_curve(CurvePoint const & p) const;

    friend bool operator==(EllipticCurve const & a, EllipticCurve const & b) { return a.a_ == b.a_; }
    friend std::ostream & operator<<(std::ostream & o, EllipticCurve const & e);

  private:
    std::array<Integer, 5> a_;
    Integer b2_, b4_, b6_, b8_, c4_, c6_, disc_;
    Rational j_;
};

/// y^2 = x^3 + D.
class MordellCurve {
  public:
    explicit MordellCurve(Integer d);
    Integer const & d() const { return d_; }
    EllipticCurve const & curve() const { return curve_; }

  private:
    Integer d_;
    EllipticCurve curve_;
};

/// A finite set of rational primes together with the infinite place.
class PlaceSetQ {
  public:
    PlaceSetQ() = default;
    explicit PlaceSetQ(std::vector<Integer> primes, bool include_infinity = true);

    std::vector<Integer> const & primes() const { return primes_; }
    bool has_infinity() const { return infinity_; }
    bool contains(Integer const & p) const;
    std::size_t size() const { return primes_.size() + (infinity_ ? 1 : 0); }
    /// True iff every prime factor of n lies in the finite part.
    bool supports(Integer const & n) const;

  private:
    std::vector<Integer> primes_;
    bool infinity_ = true;
};

// ---- group law --------------------------------------------------------------

CurvePoint negate(EllipticCurve const & e, CurvePoint const & p);
CurvePoint add(EllipticCurve const & e, CurvePoint const & p, CurvePoint const & q);
CurvePoint subtract(EllipticCurve const & e, CurvePoint const & p, CurvePoint const & q);
CurvePoint multiply(EllipticCurve const & e, CurvePoint const & p, long n);

struct TorsionResult {
    bool torsion = false;
    int order = 0; // 0 when non-torsion
};

/// Mazur: a rational torsion point has order at most 12.
inline constexpr int kMazurBound = 12;
TorsionResult is_torsion(EllipticCurve const & e, CurvePoint const & p);

// ---- reduction modulo p -----------------------------------------------------

class BadReduction : public DomainError {
  public:
    using DomainError::DomainError;
};

/// A point of E(F_p); coordinates in [0, p).
struct FpPoint {
    bool infinity = true;
    Integer x, y;
    friend bool operator==(FpPoint const &, FpPoint const &) = default;
    friend bool operator<(FpPoint const & a, FpPoint const & b);
};

FpPoint reduce_mod_p(EllipticCurve const & e, CurvePoint const & p, Integer const & prime);
FpPoint add_mod_p(EllipticCurve const & e, FpPoint const & p, FpPoint const & q, Integer const & prime);

// ---- point searches -----------------------------------------------------------

/// All integral points with |x| <= x_bound, sorted by (x, y).
std::vector<CurvePoint> integral_points_bounded(EllipticCurve const & e, Integer const & x_bound);

/// S-integral points with naive x-height at most height_bound.
std::vector<CurvePoint> s_integral_points_bounded(EllipticCurve const & e, PlaceSetQ const & s,
                                                  double height_bound);

/// Largest integer N with log N <= h, snapping values within 1e-9 of an integer.
Integer exp_height_floor(double h);

/// Positive integers <= limit whose prime factors all lie in primes (1 included), ascending.
std::vector<Integer> smooth_numbers(std::vector<Integer> const & primes, Integer const & limit);

// ---- models -------------------------------------------------------------------

/// Kraus conditions for (c4, c6) to be the invariants of an integral model.
bool kraus_conditions(Integer const & c4, Integer const & c6);

/// The reduced integral model (a1, a3 in {0,1}, a2 in {-1,0,1}) with the given invariants;
/// nullopt when the Kraus conditions fail.
std::optional<EllipticCurve> curve_from_c4c6(Integer const & c4, Integer const & c6);

/// (u, r, s, t) with x = u^2 x' + r, y = u^3 y' + s u^2 x' + t.
struct ModelChange {
    Rational u{1}, r{0}, s{0}, t{0};
};

struct MinimalModel {
    EllipticCurve curve;
    ModelChange change; // from the input model to `curve`
};

/// The global minimal model in reduced form.
MinimalModel minimal_model(EllipticCurve const & e);
/// Image of a point under the change of variables (input model -> target model).
CurvePoint map_point(ModelChange const & c, CurvePoint const & p);

enum class ReductionType { good, multiplicative, additive };
/// Reduction type at p of the minimal model.
ReductionType reduction_type(EllipticCurve const & e, Integer const & p);
/// v_p(j) >= 0 (j integral at p).
bool is_potentially_good(EllipticCurve const & e, Integer const & p);
/// Primes dividing the minimal discriminant.
std::vector<Integer> bad_primes(EllipticCurve const & e);

}  // namespace qortho
