#pragma once

// Naive, local and canonical heights over Q.
//
// Normalisation: local heights are model independent and sum to the canonical
// height, which satisfies h^(P) = h(x(P))/2 + O(1).

#include "qortho/curve.hpp"

#include <complex>
#include <map>
#include <optional>

namespace qortho {

// ---- complex uniformisation -------------------------------------------------

/// Eisenstein series E4, E6 at q (|q| < 1).
struct Eisenstein {
    Complex e4, e6;
};
Eisenstein eisenstein_series(Complex const & q);
Complex j_from_tau(Complex const & tau);

/// E(C) = C / omega (Z + tau Z) with tau in the standard fundamental domain.
struct ComplexLattice {
    Complex tau;
    Complex q;     // exp(2 pi i tau)
    Complex omega; // E(C) ~ C / omega (Z + tau Z)
    unsigned precision_bits = kDefaultPrecisionBits;
};

/// Lattice of a curve: tau from j(E) by inversion along the boundary of the
/// fundamental domain, omega from the Eisenstein values and (c4, c6).
ComplexLattice tau_from_curve(EllipticCurve const & e, unsigned bits = kDefaultPrecisionBits);

/// Weierstrass p and p' for the lattice Z + tau Z (q-series).
Complex weierstrass_p(Complex const & z, ComplexLattice const & l);
Complex weierstrass_p_prime(Complex const & z, ComplexLattice const & l);

/// Coordinates (X, Y) of P on the Z + tau Z model: X = omega^2 (x + b2/12), Y = omega^3 (2y + a1 x + a3).
std::pair<Complex, Complex> lattice_coordinates(EllipticCurve const & e, CurvePoint const & p,
                                                ComplexLattice const & l);

/// u_P = u1 + tau u2 with (u1, u2) in (-1/2, 1/2]^2.
struct EllipticLog {
    Complex z;
    Real u1, u2;
};
EllipticLog elliptic_log(EllipticCurve const & e, CurvePoint const & p, ComplexLattice const & l);

/// exp(2 pi i u) for the log normalised to u2 in [0, 1/2] (using u ~ -u).
Complex tate_parameter(EllipticLog const & u, ComplexLattice const & l);

// ---- local heights ------------------------------------------------------------

/// B2(t) = t^2 - t + 1/6.
Real bernoulli2(Real const & t);

/// Archimedean local height from the q-product.
Real local_height_arch(EllipticCurve const & e, CurvePoint const & p, unsigned bits = kDefaultPrecisionBits);
Real local_height_arch(EllipticCurve const & e, CurvePoint const & p, ComplexLattice const & l);
/// The same function of u = u1 + tau u2 on C / (Z + tau Z); u must not be a lattice point.
Real local_height_arch(Real const & u1, Real const & u2, ComplexLattice const & l);

/// Local height at the prime p (evaluated on the minimal model).
Real local_height_finite(EllipticCurve const & e, CurvePoint const & p, Integer const & prime,
                         unsigned bits = kDefaultPrecisionBits);

/// Per-place contributions; entries omitted are zero.
struct LocalHeightProfile {
    Real archimedean;
    std::map<Integer, Real> finite;
    Real total() const;
};

enum class HeightMethod { local_sum, doubling_limit };

/// Caches the minimal model and lattice of one curve for repeated height evaluation.
class HeightEngine {
  public:
    explicit HeightEngine(EllipticCurve e, unsigned bits = kDefaultPrecisionBits);

    EllipticCurve const & curve() const { return curve_; }
    EllipticCurve const & minimal_curve() const { return minimal_.curve; }
    ComplexLattice const & lattice() const;
    unsigned precision_bits() const { return bits_; }

    Real arch(CurvePoint const & p) const;
    Real finite(CurvePoint const & p, Integer const & prime) const;
    LocalHeightProfile profile(CurvePoint const & p) const;
    Real canonical_height(CurvePoint const & p, HeightMethod method = HeightMethod::local_sum) const;
    Real pairing(CurvePoint const & p, CurvePoint const & q) const;

  private:
    EllipticCurve curve_;
    MinimalModel minimal_;
    std::vector<Integer> bad_;
    unsigned bits_;
    mutable std::optional<ComplexLattice> lattice_;
};

Real canonical_height(EllipticCurve const & e, CurvePoint const & p,
                      HeightMethod method = HeightMethod::local_sum, unsigned bits = kDefaultPrecisionBits);
/// <P,Q> = (h^(P+Q) - h^(P) - h^(Q)) / 2, with h^(O) = 0.
Real height_pairing(EllipticCurve const & e, CurvePoint const & p, CurvePoint const & q,
                    unsigned bits = kDefaultPrecisionBits);

// ---- height floor -------------------------------------------------------------

struct HeightFloorParams {
    double kappa = 1e-3; // in (0, 1)
    int multiplicative_places = 0;
};

/// kappa^(m+1) * max(1, h(j)).
double height_floor(HeightFloorParams const & params, double j_height);

}  // namespace qortho
