#pragma once

// Partition and covering constructions: the B2 interval slicing of (0, 1/2],
// the archimedean slicing of E(C), the Tate-curve fraction at split
// multiplicative primes, and the l1 covering of a slab of the positive orthant.

#include "qortho/heights.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace qortho {

/// t^2 - t + 1/6, exact.
Rational b2(Rational const & t);
Real b2(Real const & t);

/// Upper bound of epsilon for every construction in this module.
inline constexpr double kMaxSliceEps = 2.0 / 15.0;

/// (0, 1/2] = U_0 u ... u U_m with U_0 = (0, eps/12],
/// U_j = ((3/2)^(j-1) eps/12, (3/2)^j eps/12] for 1 <= j < m, and U_m ending at 1/2.
class IntervalPartition {
  public:
    explicit IntervalPartition(double eps);

    double eps() const { return eps_; }
    int m() const { return m_; }
    /// Right endpoint of U_j (U_m ends at 1/2); the left endpoint is upper(j - 1), or 0.
    Rational upper(int j) const;
    Rational lower(int j) const;
    /// The j with t in U_j; t must lie in (0, 1/2].
    int index(Rational const & t) const;
    int index(Real const & t) const;

  private:
    double eps_;
    Rational eps_q_;
    int m_;
    std::vector<Rational> upper_;
};

int uj_index(Rational const & t, double eps);
int uj_index(Real const & t, double eps);

/// The constants of the archimedean slicing, each derived from its defining inequality.
struct ArchSliceConstants {
    double kappa0 = 0;     // radius factor of the region near z = 1
    double kappa1 = 0;     // |q|^(1/2) <= kappa1 eps keeps the q-product within exp(+-eps/18)
    double kappa2 = 0;     // |z| <= kappa2 eps keeps |z - 1| within exp(+-eps/18)
    double kappa = 0;      // min(kappa1, kappa2): radius factor of the region near z = 0
    double product_hi = 0; // sup log|prod| over the annulus, |q| <= exp(-pi sqrt 3)
    double product_lo = 0; // inf log|prod| over the same set
    double c = 0;          // side of the log-squares is c eps / 2
    double label_constant = 0; // #labels <= label_constant eps^-2 |log eps|^2
};
ArchSliceConstants const & arch_slice_constants();

enum class SliceRegion { near_one, near_zero, generic };

/// Label of the piece of E(C) containing P. Points with u2 < 0 are labelled
/// through -P and carry negated = true.
struct ArchSliceLabel {
    bool negated = false;
    int i = 0; // U-interval of |u2| (u2 = 0 is put in U_0)
    SliceRegion region = SliceRegion::generic;
    int k = -1; // near_one: 0..2, near_zero: 3..8, generic: -1
    std::int64_t square_re = 0, square_im = 0; // generic only: cell of log z
    bool boundary = false; // a coordinate landed within the working tolerance of a cut

    /// One of the six special slices W_0..W_5 (near z = 1, either orientation).
    bool special() const { return region == SliceRegion::near_one; }
    /// 0..5 for special slices, -1 otherwise.
    int special_index() const { return special() ? k + (negated ? 3 : 0) : -1; }

    bool operator==(ArchSliceLabel const & o) const;
    bool operator<(ArchSliceLabel const & o) const;
};
std::ostream & operator<<(std::ostream & os, ArchSliceLabel const & l);

/// Label of the torus point u1 + tau u2 (not a lattice point).
ArchSliceLabel arch_slice(Real const & u1, Real const & u2, ComplexLattice const & l, double eps);
ArchSliceLabel arch_slice(EllipticCurve const & e, CurvePoint const & p, ComplexLattice const & l, double eps);
ArchSliceLabel arch_slice(EllipticCurve const & e, CurvePoint const & p, double eps,
                          unsigned bits = kDefaultPrecisionBits);

/// Upper bound for the number of distinct labels at this eps, counted from the construction.
double arch_slice_label_count(double eps);

struct SliceInequalityReport {
    bool applicable = false; // both points carry the same label and differ
    ArchSliceLabel label;
    bool special = false;
    double lambda1 = 0, lambda2 = 0, lambda_diff = 0;
    double rhs = 0;    // special: (1 - 2 eps) min(l1, l2); otherwise (1 - eps) max(l1, l2)
    double margin = 0; // lambda_diff - rhs
    bool nonnegative = true; // special slices only: l1, l2 >= 0
    bool boundary = false;
    std::string note;
};
SliceInequalityReport slice_inequality_check(Real const & u1a, Real const & u2a, Real const & u1b, Real const & u2b,
                                             ComplexLattice const & l, double eps);
SliceInequalityReport slice_inequality_check(EllipticCurve const & e, CurvePoint const & p1, CurvePoint const & p2,
                                             double eps, unsigned bits = kDefaultPrecisionBits);

/// Split multiplicative reduction at p: the fraction v(t)/v(q) of the Tate
/// parameter of P, folded into [0, 1/2]. Throws unless the reduction is split multiplicative.
bool is_split_multiplicative(EllipticCurve const & e, Integer const & prime);
Rational tate_fraction(EllipticCurve const & e, CurvePoint const & p, Integer const & prime);
/// uj_index of the Tate fraction, or 0 when the fraction vanishes.
int tate_slice_index(EllipticCurve const & e, CurvePoint const & p, Integer const & prime, double eps);

/// Absolute constant of the bound #T <= C^n eps^-(n+1) (1 + log(c2/c1)).
inline constexpr double kSlabConstant = 15 * 2.718281828459045 / 2;

/// l1 covering of S = {x >= 0 : c1 <= |x|_1 < c2} by balls B(P, eps |P|_1), P in T.
/// T is kept implicit: shells m in [0, M) of scaled lattice points.
class SlabCover {
  public:
    SlabCover(int n, double c1, double c2, double eps);

    int n() const { return n_; }
    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double eps() const { return eps_; }
    long shells() const { return shells_; }
    /// Lattice scale of shell m: c1 e (1 + e)^m / n with e = eps / 2.
    double scale(long m) const;
    /// Range [lo, hi) of |y|_1 for the integer vectors y in each shell.
    std::int64_t norm_lo() const { return norm_lo_; }
    std::int64_t norm_hi() const { return norm_hi_; }

    double count() const;
    double upper_bound() const; // C^n eps^-(n+1) (1 + log(c2/c1))
    /// Membership test for P = scale(m) y.
    bool contains(long m, std::vector<std::int64_t> const & y) const;
    /// The member assigned to x by the construction; x must lie in S.
    std::pair<long, std::vector<std::int64_t>> assign(std::vector<double> const & x) const;
    std::vector<double> point(long m, std::vector<std::int64_t> const & y) const;
    /// Every member of T, shell by shell (intended for small instances).
    std::vector<std::vector<double>> enumerate() const;

  private:
    int n_;
    double c1_, c2_, eps_, half_;
    long shells_;
    std::int64_t norm_lo_, norm_hi_;
};

SlabCover cover_slab(int n, double c1, double c2, double eps);

double l1_norm(std::vector<double> const & x);
double l1_distance(std::vector<double> const & x, std::vector<double> const & y);

}  // namespace qortho
