#pragma once

// Quadratic class groups through binary quadratic forms: reduction,
// composition, group structure, 3-torsion, and the cubic identity
// N^3 = y^2 + D delta^2 attached to 3-torsion classes.

#include "qortho/numeric.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <vector>

namespace qortho {

/// a x^2 + b x y + c y^2
struct QuadraticForm {
    Integer a, b, c;

    QuadraticForm() = default;
    QuadraticForm(Integer a_, Integer b_, Integer c_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {}

    Integer discriminant() const { return b * b - 4 * a * c; }
    bool primitive() const;
    /// Definite case: |b| <= a <= c, b >= 0 when |b| = a or a = c.
    bool is_reduced() const;
    QuadraticForm inverse() const { return {a, -b, c}; }
    Integer evaluate(Integer const & x, Integer const & y) const { return a * x * x + b * x * y + c * y * y; }

    friend bool operator==(QuadraticForm const & f, QuadraticForm const & g)
    {
        return f.a == g.a && f.b == g.b && f.c == g.c;
    }
    friend bool operator<(QuadraticForm const & f, QuadraticForm const & g);
    friend std::ostream & operator<<(std::ostream & os, QuadraticForm const & f);
};

/// The reduced form of discriminant disc < 0 with a = 1.
QuadraticForm principal_form(Integer const & disc);
/// Unique reduced representative of a positive definite primitive form.
QuadraticForm reduce_form(QuadraticForm const & f);
/// Composite of two forms of the same discriminant (reduced when definite).
QuadraticForm compose(QuadraticForm const & f, QuadraticForm const & g);
QuadraticForm power(QuadraticForm const & f, long n);

/// All primitive reduced forms of discriminant disc < 0, sorted.
std::vector<QuadraticForm> reduced_forms(Integer const & disc);

struct ClassGroupStructure {
    Integer discriminant;
    std::vector<QuadraticForm> forms;          // reduced, sorted, principal first
    std::vector<long> invariants;              // d1 | d2 | ... with product h (empty for h = 1)
    std::vector<QuadraticForm> generators;     // greedy generating set, largest orders first
    long h() const { return static_cast<long>(forms.size()); }
    long order(QuadraticForm const & f) const;
};

/// Class group of disc < 0; non-fundamental discriminants require allow_nonfundamental.
ClassGroupStructure class_group(Integer const & disc, bool allow_nonfundamental = false);

/// Number of classes killed by 3, and its base-3 logarithm.
long h3(Integer const & disc, bool allow_nonfundamental = false);
long h3(ClassGroupStructure const & g);
int three_rank(Integer const & disc, bool allow_nonfundamental = false);

/// The reduced representative; its leading coefficient is the norm of a
/// small ideal of the class and satisfies a <= sqrt(|disc| / 3).
QuadraticForm minkowski_representative(QuadraticForm const & f);
bool within_minkowski_bound(QuadraticForm const & f);

/// Explicit multipliers of the implied constants in |x| << D^(1/2), |y| << D^(3/4), |delta| << D^(1/4).
struct FredCaps {
    double x_factor = 3;
    double y_factor = 3;
    double delta_factor = 3;
};

/// N^3 = y^2 + D delta^2 with y, delta in (1/2) Z; integrally (4N)^3 = (8y)^2 + D (8 delta)^2.
struct FredSolution {
    Integer n;
    Rational y, delta;
    Integer d;
    bool satisfies_identity() const;
    bool within(FredCaps const & caps) const;
};
bool operator==(FredSolution const & s, FredSolution const & t);
/// Equality up to (y, delta) -> (+-y, +-delta).
bool same_up_to_sign(FredSolution const & s, FredSolution const & t);

class RepresentationNotFound : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// For a class of order dividing 3 with reduced representative (N, b, c):
/// a generator y + delta sqrt(-D) of the cube of the ideal [N, (-b + sqrt(-D))/2].
FredSolution fred_from_class(QuadraticForm const & f, Integer const & d);

/// All solutions with 1 <= x <= x_factor sqrt(D), |y| <= y_factor D^(3/4),
/// |delta| <= delta_factor D^(1/4), listed with y, delta >= 0.
std::vector<FredSolution> fred_solutions_exhaustive(Integer const & d, FredCaps const & caps = {});

// ---- real quadratic side ---------------------------------------------------------------------

/// Narrow class group data of a positive non-square discriminant via cycles of reduced indefinite forms.
struct IndefiniteClassGroup {
    Integer discriminant;
    std::vector<QuadraticForm> reduced;          // all reduced forms
    std::vector<int> cycle_of;                   // cycle index of each reduced form
    std::vector<QuadraticForm> representatives;  // least form of each cycle
    long h_narrow() const { return static_cast<long>(representatives.size()); }
    /// Cycle index of an arbitrary form of this discriminant.
    int class_of(QuadraticForm const & f) const;
};
IndefiniteClassGroup indefinite_class_group(Integer const & disc);
/// One application of the reduction operator rho.
QuadraticForm rho(QuadraticForm const & f);
bool is_reduced_indefinite(QuadraticForm const & f);
int three_rank_real(Integer const & disc);

/// Fundamental discriminant of Q(sqrt(m)), m a nonzero non-square integer.
Integer field_discriminant(Integer const & m);

struct ScholzReport {
    Integer d;             // the imaginary field is Q(sqrt(-D))
    Integer real_disc;     // discriminant of Q(sqrt(3D))
    int r_minus = 0;
    int r_plus = 0;
    bool ok = false;       // r_plus <= r_minus <= r_plus + 1
};
ScholzReport scholz_check(Integer const & d);

}  // namespace qortho
