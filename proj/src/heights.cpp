#include "qortho/heights.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace qortho {

namespace bm = boost::multiprecision;

namespace {

// Number of q-series terms so that |q|^n * scale < 2^-bits.
long series_terms(Real const & abs_q, unsigned bits, double extra_scale_log2 = 0)
{
    double lq = -bm::log2(abs_q).convert_to<double>(); // > 0
    if (!(lq > 0))
        throw PrecisionExhausted("|q| >= 1 in q-series");
    return static_cast<long>(std::ceil((bits + 24 + extra_scale_log2) / lq)) + 2;
}

Real log_abs(Complex const & z)
{
    return bm::log(abs(z));
}

// Reduce to (-1/2, 1/2].
Real centered(Real const & x)
{
    return x - bm::ceil(x - Real(0.5));
}

}  // namespace

// ---- Eisenstein series, j -----------------------------------------------------

Eisenstein eisenstein_series(Complex const & q)
{
    Real aq = abs(q);
    unsigned bits = static_cast<unsigned>(std::ceil(Real::default_precision() * 3.3219280948873623));
    long terms = series_terms(aq, bits, 20);
    Complex s3, s5, qn(Real(1));
    for (long n = 1; n <= terms; ++n) {
        qn *= q;
        Complex frac = qn / (Complex(Real(1)) - qn);
        Real n3 = Real(n) * n * n;
        s3 += frac * n3;
        s5 += frac * (n3 * n * n);
    }
    return {Complex(Real(1)) + s3 * Real(240), Complex(Real(1)) - s5 * Real(504)};
}

Complex j_from_tau(Complex const & tau)
{
    auto [e4, e6] = eisenstein_series(exp2pii(tau));
    Complex e43 = e4 * e4 * e4;
    return e43 * Real(1728) / (e43 - e6 * e6);
}

// ---- lattice of a curve ---------------------------------------------------------

ComplexLattice tau_from_curve(EllipticCurve const & e, unsigned bits)
{
    unsigned work = 2 * bits + 64;
    PrecisionScope scope(work);
    Real j = to_real(e.j_invariant());
    Real const half(0.5);
    Real const sqrt3_2 = bm::sqrt(Real(3)) / 2;
    Complex tau;

    auto bisect = [&](auto param_to_tau, Real lo, Real hi, bool increasing) {
        for (unsigned it = 0; it < work + 8; ++it) {
            Real mid = (lo + hi) / 2;
            Real jm = j_from_tau(param_to_tau(mid)).re;
            if ((jm < j) == increasing)
                lo = mid;
            else
                hi = mid;
        }
        return param_to_tau((lo + hi) / 2);
    };
    auto y_cap = [&]() {
        Real y = bm::log(bm::abs(j) + 2000) / (2 * pi()) + 1;
        return y < 2 ? Real(2) : y;
    };

    if (e.j_invariant() == 0) {
        tau = Complex(half, sqrt3_2);
    } else if (e.j_invariant() == 1728) {
        tau = Complex(Real(0), Real(1));
    } else if (j > 1728) {
        tau = bisect([](Real const & y) { return Complex(Real(0), y); }, Real(1), y_cap(), true);
    } else if (j > 0) {
        tau = bisect([](Real const & th) { return Complex(bm::cos(th), bm::sin(th)); }, pi() / 3, pi() / 2, true);
    } else {
        tau = bisect([&](Real const & y) { return Complex(half, y); }, sqrt3_2, y_cap(), false);
    }

    Complex q = exp2pii(tau);
    auto [e4, e6] = eisenstein_series(q);
    Complex c4 = Complex(to_real(e.c4())), c6 = Complex(to_real(e.c6()));
    Complex s; // (2 pi / omega)^2
    if (e.c4() == 0) {
        Complex w = c6 / e6;
        s = exp(log(w) * (Real(1) / 3));
    } else if (e.c6() == 0) {
        s = sqrt(c4 / e4);
    } else {
        s = (c6 * e4) / (c4 * e6);
    }
    Complex s2 = s * s;
    Real tol = bm::pow(Real(2), -static_cast<long>(bits) - 8);
    auto rel = [&](Complex const & a, Complex const & b) {
        Real d = abs(a - b), m = abs(b);
        return m > 1 ? Real(d / m) : d;
    };
    if (rel(s2 * e4, c4) > tol || rel(s2 * s * e6, c6) > tol)
        throw PrecisionExhausted("lattice does not reproduce (c4, c6)");
    Complex omega = Complex(2 * pi()) / sqrt(s);
    return {tau, q, omega, bits};
}

// ---- Weierstrass functions --------------------------------------------------------

Complex weierstrass_p(Complex const & z, ComplexLattice const & l)
{
    Complex one(Real(1));
    Complex u = exp2pii(z);
    Complex ui = one / u;
    Real aq = abs(l.q);
    double spread = bm::abs(bm::log2(abs(u))).convert_to<double>();
    long terms = series_terms(aq, l.precision_bits + 32, spread);
    Complex s = Complex(Real(1) / 12) + u / ((one - u) * (one - u));
    Complex qn = one;
    for (long n = 1; n <= terms; ++n) {
        qn *= l.q;
        Complex a = qn * u, b = qn * ui;
        s += a / ((one - a) * (one - a)) + b / ((one - b) * (one - b)) - qn * Real(2) / ((one - qn) * (one - qn));
    }
    Real tp = 2 * pi();
    return s * Real(-tp * tp);
}

Complex weierstrass_p_prime(Complex const & z, ComplexLattice const & l)
{
    Complex one(Real(1));
    auto f = [&](Complex const & w) { return w * (one + w) / ((one - w) * (one - w) * (one - w)); };
    Complex u = exp2pii(z);
    Complex ui = one / u;
    Real aq = abs(l.q);
    double spread = bm::abs(bm::log2(abs(u))).convert_to<double>();
    long terms = series_terms(aq, l.precision_bits + 32, spread);
    Complex s = f(u), qn = one;
    for (long n = 1; n <= terms; ++n) {
        qn *= l.q;
        s += f(qn * u) - f(qn * ui);
    }
    Real tp = 2 * pi();
    return s * Complex(Real(0), -tp * tp * tp);
}

std::pair<Complex, Complex> lattice_coordinates(EllipticCurve const & e, CurvePoint const & p,
                                                ComplexLattice const & l)
{
    Rational x = p.x() + Rational(e.b2(), 12);
    Rational y = 2 * p.y() + e.a1() * p.x() + e.a3();
    Complex w2 = l.omega * l.omega;
    return {w2 * to_real(x), w2 * l.omega * to_real(y)};
}

namespace {

using cd = std::complex<double>;

cd to_cd(Complex const & z)
{
    return {z.re.convert_to<double>(), z.im.convert_to<double>()};
}

// Double-precision versions used only to locate starting points for Newton.
struct FastWp {
    cd q;
    cd tau;
    int terms;

    cd e2pi(cd z) const { return std::exp(cd(0, 2 * M_PI) * z); }

    cd wp(cd z) const
    {
        cd u = e2pi(z), ui = 1.0 / u, s = 1.0 / 12 + u / ((1.0 - u) * (1.0 - u)), qn = 1;
        for (int n = 1; n <= terms; ++n) {
            qn *= q;
            cd a = qn * u, b = qn * ui;
            s += a / ((1.0 - a) * (1.0 - a)) + b / ((1.0 - b) * (1.0 - b)) - 2.0 * qn / ((1.0 - qn) * (1.0 - qn));
        }
        return -4 * M_PI * M_PI * s;
    }

    cd wpp(cd z) const
    {
        auto f = [](cd w) { return w * (1.0 + w) / ((1.0 - w) * (1.0 - w) * (1.0 - w)); };
        cd u = e2pi(z), ui = 1.0 / u, s = f(u), qn = 1;
        for (int n = 1; n <= terms; ++n) {
            qn *= q;
            s += f(qn * u) - f(qn * ui);
        }
        return cd(0, -8 * M_PI * M_PI * M_PI) * s;
    }
};

// Express z in lattice coordinates, reduce into (-1/2, 1/2]^2.
EllipticLog normalise(Complex const & z, ComplexLattice const & l)
{
    Real u2 = centered(z.im / l.tau.im);
    Real u1 = centered(z.re - (z.im / l.tau.im) * l.tau.re);
    Complex zz = Complex(u1) + l.tau * u2;
    return {zz, u1, u2};
}

}  // namespace

EllipticLog elliptic_log(EllipticCurve const & e, CurvePoint const & p, ComplexLattice const & l)
{
    if (p.is_origin())
        throw DomainError("elliptic log of the origin");
    e.require_on_curve(p);
    PrecisionScope scope(l.precision_bits + 32);
    auto [X, Y] = lattice_coordinates(e, p, l);
    Real half(0.5);

    if (2 * p.y() + e.a1() * p.x() + e.a3() == 0) {
        std::array<std::pair<Real, Real>, 3> halves{{{half, Real(0)}, {Real(0), half}, {half, half}}};
        Real best = -1;
        EllipticLog out;
        for (auto const & [a, b] : halves) {
            Complex z = Complex(a) + l.tau * b;
            Real d = abs(weierstrass_p(z, l) - X);
            if (best < 0 || d < best) {
                best = d;
                out = {z, a, b};
            }
        }
        return out;
    }

    // Coarse search in double precision.
    FastWp fast{to_cd(l.q), to_cd(l.tau), 0};
    double aq = std::abs(fast.q);
    fast.terms = aq > 0 ? static_cast<int>(std::ceil(60 / -std::log2(aq))) + 3 : 1;
    cd Xd = to_cd(X), Yd = to_cd(Y);
    std::vector<cd> starts;
    if (std::abs(Xd) > 1e-300) {
        cd r = 1.0 / std::sqrt(Xd);
        starts.push_back(r);
        starts.push_back(-r);
    }
    int const grid = 24;
    for (int a = 0; a < grid; ++a)
        for (int b = 0; b < grid; ++b) {
            double s = -0.5 + (a + 0.5) / grid, t = -0.5 + (b + 0.5) / grid;
            starts.push_back(s + t * fast.tau);
        }
    cd best_z = 0;
    double best_score = INFINITY;
    for (cd z : starts) {
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
            cd d = fast.wpp(z);
            if (!std::isfinite(std::abs(d)) || std::abs(d) == 0)
                break;
            cd step = (fast.wp(z) - Xd) / d;
            z -= step;
            if (std::abs(step) < 1e-13 * (1 + std::abs(z))) {
                ok = true;
                break;
            }
        }
        if (!ok || !std::isfinite(std::abs(z)))
            continue;
        double score = std::abs(fast.wpp(z) - Yd) / (1 + std::abs(Yd));
        if (score < best_score) {
            best_score = score;
            best_z = z;
        }
        if (score < 1e-6)
            break;
    }
    if (!std::isfinite(best_score))
        throw PrecisionExhausted("elliptic log: no Newton start converged");

    // Newton at full precision.
    Complex z(Real(best_z.real()), Real(best_z.imag()));
    Real tol = bm::pow(Real(2), -static_cast<long>(l.precision_bits) - 16);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        Complex step = (weierstrass_p(z, l) - X) / weierstrass_p_prime(z, l);
        z -= step;
        if (abs(step) <= tol * (1 + abs(z))) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw PrecisionExhausted("elliptic log: Newton did not converge");
    Complex dp = weierstrass_p_prime(z, l);
    if (abs(dp - Y) > abs(dp + Y))
        z = -z;
    return normalise(z, l);
}

Complex tate_parameter(EllipticLog const & u, ComplexLattice const &)
{
    Complex z = u.u2 < 0 ? -u.z : u.z;
    return exp2pii(z);
}

// ---- local heights ----------------------------------------------------------------

Real bernoulli2(Real const & t)
{
    return t * t - t + Real(1) / 6;
}

Real local_height_arch(Real const & u1, Real const & u2, ComplexLattice const & l)
{
    PrecisionScope scope(l.precision_bits + 32);
    Real a = centered(u1), b = centered(u2);
    if (b < 0 || (b == 0 && a < 0)) {
        a = centered(-a);
        b = -b;
    }
    Complex qu = exp2pii(Complex(a) + l.tau * b);
    Complex one(Real(1));
    if (abs(one - qu) == 0)
        throw DomainError("archimedean local height at the origin");
    Real aq = abs(l.q);
    long terms = series_terms(aq, l.precision_bits + 32, 1);
    Real sum = -bernoulli2(b) * bm::log(aq) / 2 - log_abs(one - qu);
    Complex qn = one;
    Complex qui = one / qu;
    for (long n = 1; n <= terms; ++n) {
        qn *= l.q;
        sum -= log_abs(one - qn * qu) + log_abs(one - qn * qui);
    }
    return sum;
}

Real local_height_arch(EllipticCurve const & e, CurvePoint const & p, ComplexLattice const & l)
{
    PrecisionScope scope(l.precision_bits + 32);
    EllipticLog u = elliptic_log(e, p, l);
    return local_height_arch(u.u1, u.u2, l);
}

Real local_height_arch(EllipticCurve const & e, CurvePoint const & p, unsigned bits)
{
    return HeightEngine(e, bits).arch(p);
}

namespace {

// Local height at a prime on a model minimal at that prime.
Real finite_on_minimal(EllipticCurve const & m, CurvePoint const & p, Integer const & prime)
{
    Real logp = bm::log(to_real(prime));
    long n = valuation(m.discriminant(), prime);
    Rational const & x = p.x();
    Rational const & y = p.y();
    long vx = valuation(x, prime);
    Real base = Real(n) / 12;
    if (n == 0 || vx < 0)
        return (Real(std::max(0L, -vx)) / 2 + base) * logp;
    Rational psi2 = 2 * y + m.a1() * x + m.a3();
    Rational dfdx = 3 * x * x + 2 * m.a2() * x + m.a4() - m.a1() * y;
    long v2 = valuation(psi2, prime);
    bool singular = v2 > 0 && valuation(dfdx, prime) > 0;
    if (!singular)
        return base * logp;
    if (m.c4() % prime != 0) {
        Rational i = std::min(Rational(v2), Rational(n, 2));
        Rational corr = i * (n - i) / (2 * n);
        return (base - to_real(corr)) * logp;
    }
    Rational psi3 = 3 * x * x * x * x + m.b2() * x * x * x + 3 * m.b4() * x * x + 3 * m.b6() * x + m.b8();
    long v3 = valuation(psi3, prime);
    if (v3 >= 3 * v2)
        return (base - Real(v2) / 3) * logp;
    return (base - Real(v3) / 8) * logp;
}

std::vector<Integer> profile_primes(EllipticCurve const & m, CurvePoint const & p, std::vector<Integer> const & bad)
{
    std::vector<Integer> primes = bad;
    if (p.x().get_den() != 1)
        for (auto const & q : prime_divisors(p.x().get_den()))
            primes.push_back(q);
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    (void)m;
    return primes;
}

}  // namespace

Real local_height_finite(EllipticCurve const & e, CurvePoint const & p, Integer const & prime, unsigned bits)
{
    return HeightEngine(e, bits).finite(p, prime);
}

Real LocalHeightProfile::total() const
{
    Real s = archimedean;
    for (auto const & [p, v] : finite)
        s += v;
    return s;
}

// ---- HeightEngine ------------------------------------------------------------------

HeightEngine::HeightEngine(EllipticCurve e, unsigned bits)
    : curve_(std::move(e)), minimal_(minimal_model(curve_)), bits_(bits)
{
    if (bits_ < 32)
        throw DomainError("precision below 32 bits");
    bad_ = prime_divisors(minimal_.curve.discriminant());
}

ComplexLattice const & HeightEngine::lattice() const
{
    if (!lattice_)
        lattice_ = tau_from_curve(minimal_.curve, bits_);
    return *lattice_;
}

Real HeightEngine::arch(CurvePoint const & p) const
{
    return local_height_arch(minimal_.curve, map_point(minimal_.change, p), lattice());
}

Real HeightEngine::finite(CurvePoint const & p, Integer const & prime) const
{
    if (p.is_origin())
        throw DomainError("local height of the origin");
    curve_.require_on_curve(p);
    if (!is_prime(prime))
        throw DomainError("local height at a non-prime");
    PrecisionScope scope(bits_ + 32);
    return finite_on_minimal(minimal_.curve, map_point(minimal_.change, p), prime);
}

LocalHeightProfile HeightEngine::profile(CurvePoint const & p) const
{
    if (p.is_origin())
        throw DomainError("local heights of the origin");
    curve_.require_on_curve(p);
    PrecisionScope scope(bits_ + 32);
    CurvePoint pm = map_point(minimal_.change, p);
    LocalHeightProfile out;
    out.archimedean = local_height_arch(minimal_.curve, pm, lattice());
    for (auto const & q : profile_primes(minimal_.curve, pm, bad_)) {
        Real v = finite_on_minimal(minimal_.curve, pm, q);
        if (v != 0)
            out.finite.emplace(q, v);
    }
    return out;
}

namespace {

// Escape rates of the homogeneous doubling map (X, Z) -> (F, G).
Real doubling_limit(EllipticCurve const & e, CurvePoint const & p, unsigned bits)
{
    Integer X0 = p.x().get_num(), Z0 = p.x().get_den();
    long steps = static_cast<long>(bits) / 2 + 12;
    Integer const &b2 = e.b2(), &b4 = e.b4(), &b6 = e.b6(), &b8 = e.b8();

    // archimedean part
    Real rb2 = to_real(b2), rb4 = to_real(b4), rb6 = to_real(b6), rb8 = to_real(b8);
    Real X = to_real(X0), Z = to_real(Z0);
    Real m = bm::max(bm::abs(X), bm::abs(Z));
    Real total = bm::log(m);
    X /= m;
    Z /= m;
    Real w = 1;
    for (long n = 0; n < steps; ++n) {
        w /= 4;
        Real X2 = X * X, Z2 = Z * Z, XZ = X * Z;
        Real F = X2 * X2 - rb4 * X2 * Z2 - 2 * rb6 * XZ * Z2 - rb8 * Z2 * Z2;
        Real G = 4 * X2 * XZ + rb2 * X2 * Z2 + 2 * rb4 * XZ * Z2 + rb6 * Z2 * Z2;
        m = bm::max(bm::abs(F), bm::abs(G));
        if (m == 0)
            throw PrecisionExhausted("doubling map degenerated");
        total += w * bm::log(m);
        X = F / m;
        Z = G / m;
    }

    // non-archimedean parts, modulo a power of p large enough to absorb the lost digits
    std::vector<Integer> primes = prime_divisors(e.discriminant());
    for (Integer extra : {Integer(2), Integer(3)})
        if (std::find(primes.begin(), primes.end(), extra) == primes.end())
            primes.push_back(extra);
    for (auto const & prime : primes) {
        long vd = valuation(e.discriminant(), prime);
        long prec = steps * (2 * vd + 2) + 64;
        Integer modulus;
        mpz_pow_ui(modulus.get_mpz_t(), prime.get_mpz_t(), static_cast<unsigned long>(prec));
        Integer x = X0 % modulus, z = Z0 % modulus;
        Real wp = 1, acc = 0;
        long lost = 0;
        for (long n = 0; n < steps; ++n) {
            wp /= 4;
            Integer x2 = x * x, z2 = z * z, xz = x * z;
            Integer F = x2 * x2 - b4 * x2 * z2 - 2 * b6 * xz * z2 - b8 * z2 * z2;
            Integer G = 4 * x2 * xz + b2 * x2 * z2 + 2 * b4 * xz * z2 + b6 * z2 * z2;
            F %= modulus;
            G %= modulus;
            long ev = std::min(valuation(F, prime), valuation(G, prime));
            if (ev + lost >= prec)
                throw PrecisionExhausted("p-adic doubling iteration lost all digits");
            if (ev > 0) {
                Integer pe;
                mpz_pow_ui(pe.get_mpz_t(), prime.get_mpz_t(), static_cast<unsigned long>(ev));
                F /= pe;
                G /= pe;
                lost += ev;
                acc -= wp * ev;
            }
            x = F;
            z = G;
        }
        total += acc * bm::log(to_real(prime));
    }
    return total / 2;
}

}  // namespace

Real HeightEngine::canonical_height(CurvePoint const & p, HeightMethod method) const
{
    curve_.require_on_curve(p);
    if (p.is_origin())
        return Real(0);
    PrecisionScope scope(bits_ + 32);
    if (method == HeightMethod::doubling_limit)
        return doubling_limit(curve_, p, bits_);
    return profile(p).total();
}

Real HeightEngine::pairing(CurvePoint const & p, CurvePoint const & q) const
{
    PrecisionScope scope(bits_ + 32);
    CurvePoint s = add(curve_, p, q);
    return (canonical_height(s) - canonical_height(p) - canonical_height(q)) / 2;
}

Real canonical_height(EllipticCurve const & e, CurvePoint const & p, HeightMethod method, unsigned bits)
{
    if (method == HeightMethod::doubling_limit) {
        e.require_on_curve(p);
        if (p.is_origin())
            return Real(0);
        PrecisionScope scope(bits + 32);
        return doubling_limit(e, p, bits);
    }
    return HeightEngine(e, bits).canonical_height(p, method);
}

Real height_pairing(EllipticCurve const & e, CurvePoint const & p, CurvePoint const & q, unsigned bits)
{
    return HeightEngine(e, bits).pairing(p, q);
}

double height_floor(HeightFloorParams const & params, double j_height)
{
    if (!(params.kappa > 0 && params.kappa < 1))
        throw DomainError("kappa must lie in (0, 1)");
    if (params.multiplicative_places < 0 || j_height < 0)
        throw DomainError("invalid height floor input");
    return std::pow(params.kappa, params.multiplicative_places + 1) * std::max(1.0, j_height);
}

}  // namespace qortho
