#pragma once

// Empirical checks that tie the modules together: fibers of the reduction map,
// the pairwise repulsion predicate, angle matrices, fiber counts against
// packing bounds, the conductor enumeration through Mordell curves, and the
// 3-torsion class-number pipeline.

#include "qortho/classgroup.hpp"
#include "qortho/curve.hpp"
#include "qortho/heights.hpp"
#include "qortho/partitions.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qortho {

/// Torsion factor used in fiber-count bounds (a rational torsion group has at most 16 points).
inline constexpr int kTorsionFactor = 16;

// ---- reduction fibers -----------------------------------------------------------------------------

struct FiberPartition {
    EllipticCurve curve;
    Integer prime;
    std::map<FpPoint, std::vector<CurvePoint>> fibers;
    std::size_t point_count() const;
    std::size_t largest() const;
};

/// Partition of points by their image in E(F_p); p must be a prime of good reduction for the model.
FiberPartition reduction_fibers(EllipticCurve const & e, std::vector<CurvePoint> const & points,
                                Integer const & prime);

// ---- repulsion ----------------------------------------------------------------------------------

struct RepulsionPair {
    CurvePoint p1, p2;
    Real h1, h2, h_diff;          // h^(P1), h^(P2), h^(P1 - P2)
    bool same_fiber = false;
    // (i) valuation claim, evaluated on same-fiber pairs
    long valuation = 0;           // v_p(x(P1 - P2))
    bool valuation_ok = false;    // v_p <= -2
    Real local_at_p;              // lambda_p(P1 - P2)
    bool local_ok = false;        // lambda_p >= log p
    // (ii) hypotheses
    ArchSliceLabel label1, label2;
    bool same_slice = false;      // archimedean label and potentially multiplicative indices agree
    bool balanced = false;        // the local-height balance condition on T
    bool hypotheses = false;
    // (iii) conclusion h^(P1-P2) >= (1-2 eps) max h^(Pj) + log p, margin >= 0 when it holds
    std::optional<Real> conclusion_margin;
    // without congruence: h^(P1-P2) >= (1-2 eps) max h^(Pj)
    std::optional<Real> spacing_margin;
    // angles (both points non-torsion)
    std::optional<double> angle_deg;
    bool same_shell = false;
    std::optional<double> angle_floor_deg; // set for hypothesis pairs in a common shell
};

struct RepulsionReport {
    EllipticCurve curve;
    Integer prime;
    double eps = 0;
    std::vector<Integer> places;          // finite part of S
    std::size_t pairs_examined = 0;
    std::size_t same_fiber_pairs = 0;
    std::size_t valuation_failures = 0;
    std::size_t local_failures = 0;
    std::size_t hypothesis_pairs = 0;     // all pairs (any fiber) satisfying the hypotheses
    std::size_t conclusion_checked = 0;
    std::size_t conclusion_failures = 0;  // margin < -1e-6
    std::size_t spacing_failures = 0;     // margin < -1e-6
    std::size_t angle_checked = 0;
    std::size_t angle_failures = 0;
    std::vector<RepulsionPair> pairs;
    bool ok() const;
};

/// Every unordered pair of distinct points is examined; (i) and (iii) apply to same-fiber pairs.
/// The points must be S-integral, S must contain the primes of bad reduction, p must not lie in S.
RepulsionReport repulsion_check(EllipticCurve const & e, PlaceSetQ const & s, Integer const & prime, double eps,
                                std::vector<CurvePoint> const & points, unsigned bits = kDefaultPrecisionBits);

/// The local-height balance condition: sum_T |l(P1) - l(P2)| <= eps max_j sum_T l(Pj),
/// T being the places where both local heights are nonnegative.
bool balance_condition(LocalHeightProfile const & a, LocalHeightProfile const & b, std::vector<Integer> const & places,
                       double eps);

/// Lower bound for the angle of two same-shell points satisfying
/// h^(P1-P2) >= (1-2 eps) max h^(Pj) with height ratio at least 1 - eps.
double angle_floor_deg(double eps);

/// Geometric height shell index: h in ((1-eps)^(k+1), (1-eps)^k].
long height_shell(Real const & h, double eps);

// ---- angles ---------------------------------------------------------------------------------------

/// Pairwise angles in degrees from cos = <Pi,Pj> / sqrt(h^(Pi) h^(Pj)), clamped.
std::vector<std::vector<double>> angle_matrix(EllipticCurve const & e, std::vector<CurvePoint> const & points,
                                              unsigned bits = kDefaultPrecisionBits);

// ---- fiber counts against packing bounds --------------------------------------------------------

struct FiberCountReport {
    double t = 0, eps = 0, h0 = 0;
    long rank_bound = 0;
    std::optional<Integer> prime;      // none for t = 0
    bool prime_in_window = true;       // X <= p <= 2X
    std::size_t shell_points = 0;
    std::vector<std::size_t> fiber_sizes; // descending
    double bound = 0;                  // exp((beta(t) + eps) r) * torsion factor
    double worst_margin = 0;           // bound - largest fiber
    bool ok() const { return worst_margin >= 0; }
};

/// Points with h^ in [(1-eps) h0, h0], split by reduction modulo the least good prime p >= e^(t h0)
/// outside S (no split when t = 0), compared with exp((beta(t) + eps) r) * 16.
FiberCountReport fiber_count_vs_kl(EllipticCurve const & e, PlaceSetQ const & s, std::vector<CurvePoint> const & points,
                                   double h0, double t, long rank_bound, double eps,
                                   unsigned bits = kDefaultPrecisionBits);

// ---- conductor enumeration ------------------------------------------------------------------------

/// S-integral points (x, y) on y^2 = x^3 + c with naive height max(|num x|, den x) <= height_cap.
std::vector<CurvePoint> mordell_s_integral_points(Integer const & c, std::vector<Integer> const & primes,
                                                  Integer const & height_cap);

struct Reconstruction {
    Integer twist;                        // squarefree S-unit d: (c4, c6) = (x d^2, y d^3) up to scaling
    Integer c4, c6;                       // scaled to an integral pair passing the Kraus conditions
    bool kraus = false;
    std::optional<EllipticCurve> curve;   // minimal model when kraus holds
    bool support_ok = false;              // bad primes of the curve inside S u {2,3}
};

struct ConductorCandidate {
    Integer c;
    CurvePoint point;
    bool kraus_direct = false;            // (c4, c6) = (x, y) itself passes the Kraus conditions
    std::vector<Reconstruction> reconstructions;
};

struct ConductorEnumeration {
    std::vector<Integer> primes;          // S u {2, 3}, ascending
    Integer height_cap;
    std::vector<Integer> c_values;        // every C searched, in search order
    std::vector<Integer> c_without_points; // "none within cap"
    std::vector<ConductorCandidate> candidates;
    /// Distinct reconstructed curves (minimal models) with support inside S u {2,3}.
    std::vector<EllipticCurve> curves() const;
    /// For each reconstructed curve, the number of (candidate, twist) pairs reaching it.
    std::map<std::array<Integer, 5>, long> multiplicity() const;
    /// Largest number of distinct curves reconstructed from one candidate point.
    long largest_point_fiber() const;
    long fiber_bound() const;             // 2^(#S + 3)
};

/// C = +-prod p^(a_p), 0 <= a_p <= 5 over p in S u {2,3}; points on y^2 = x^3 + C found within the cap.
ConductorEnumeration conductor_enumerate(std::vector<Integer> const & s, Integer const & height_cap, int jobs = 1);

/// The candidate point attached to a curve: (c4 / u^2, c6 / u^3) on y^2 = x^3 + C with
/// -1728 disc = C u^6, C free of sixth powers of primes in the set.
std::pair<Integer, CurvePoint> mordell_image(EllipticCurve const & e, std::vector<Integer> const & primes);

// ---- 3-torsion pipeline ---------------------------------------------------------------------------

struct ClassboundStratum {
    Rational delta;                       // delta >= 0
    std::vector<FredSolution> solutions;  // y >= 0
    std::vector<Real> heights;            // h^ of (4x, 8y) on Y^2 = X^3 - D (8 delta)^2; empty for delta = 0
};

struct ClassboundReport {
    Integer d;
    FredCaps caps;
    double height_slack = 5;              // c_h
    long h3 = 0;
    std::vector<ClassboundStratum> strata;
    std::size_t aggregate = 0;            // sum of stratum counts
    std::size_t max_nonsingular = 0;      // largest count over delta > 0
    double height_cap = 0;                // log(D)/4 + c_h
    std::size_t height_failures = 0;
    double bound_value = 0;               // D^(1/4) * max(1, largest count over all strata)
    bool h3_within = false;               // h3 <= bound_value and h3 <= 2 aggregate - 1
    double exponent = 0;                  // log(aggregate) / log(D)
    double exponent_nonsingular = 0;      // log(1 + sum of counts over delta > 0) / log(D)
};

ClassboundReport classbound_pipeline(Integer const & d, FredCaps const & caps = {}, double height_slack = 5,
                                     unsigned bits = kDefaultPrecisionBits);

}  // namespace qortho
