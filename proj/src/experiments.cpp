#include "qortho/experiments.hpp"

#include "qortho/packing.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <numeric>
#include <cmath>
#include <set>
#include <thread>

namespace qortho {

namespace {

double to_double(Real const & r) { return r.convert_to<double>(); }

Real max_real(Real const & a, Real const & b) { return a < b ? b : a; }

void require_prime_outside(EllipticCurve const & e, PlaceSetQ const & s, Integer const & prime)
{
    if (!is_prime(prime))
        throw DomainError("not a prime");
    if (s.contains(prime))
        throw DomainError("the prime lies in S");
    if (e.discriminant() % prime == 0)
        throw BadReduction("prime of bad reduction for this model");
}

void require_s_setup(EllipticCurve const & e, PlaceSetQ const & s, std::vector<CurvePoint> const & points)
{
    for (auto const & q : prime_divisors(e.discriminant()))
        if (!s.contains(q))
            throw DomainError("S must contain every prime dividing the discriminant");
    for (auto const & p : points) {
        if (p.is_origin())
            throw DomainError("the origin is not an S-integral point");
        e.require_on_curve(p);
        if (!s.supports(Integer(p.x().get_den())))
            throw DomainError("point is not S-integral");
    }
}

}  // namespace

// ---- reduction fibers -----------------------------------------------------------------------------

std::size_t FiberPartition::point_count() const
{
    std::size_t n = 0;
    for (auto const & [k, v] : fibers)
        n += v.size();
    return n;
}

std::size_t FiberPartition::largest() const
{
    std::size_t n = 0;
    for (auto const & [k, v] : fibers)
        n = std::max(n, v.size());
    return n;
}

FiberPartition reduction_fibers(EllipticCurve const & e, std::vector<CurvePoint> const & points, Integer const & prime)
{
    if (!is_prime(prime))
        throw DomainError("reduction_fibers: not a prime");
    if (e.discriminant() % prime == 0)
        throw BadReduction("reduction_fibers: bad reduction at this prime");
    FiberPartition out{e, prime, {}};
    for (auto const & p : points)
        out.fibers[reduce_mod_p(e, p, prime)].push_back(p);
    return out;
}

// ---- repulsion ----------------------------------------------------------------------------------

bool RepulsionReport::ok() const
{
    return valuation_failures == 0 && local_failures == 0 && conclusion_failures == 0 && spacing_failures == 0 &&
           angle_failures == 0;
}

bool balance_condition(LocalHeightProfile const & a, LocalHeightProfile const & b, std::vector<Integer> const & places,
                       double eps)
{
    auto at = [](LocalHeightProfile const & p, Integer const & q) {
        auto it = p.finite.find(q);
        return it == p.finite.end() ? Real(0) : it->second;
    };
    Real diff = 0, sum_a = 0, sum_b = 0;
    auto add = [&](Real const & la, Real const & lb) {
        if (la < 0 || lb < 0)
            return;
        diff += abs(la - lb);
        sum_a += la;
        sum_b += lb;
    };
    add(a.archimedean, b.archimedean);
    for (auto const & q : places)
        add(at(a, q), at(b, q));
    return diff <= Real(eps) * max_real(sum_a, sum_b);
}

double angle_floor_deg(double eps)
{
    auto f = [eps](double r) { return (r + 2 * eps) / (2 * std::sqrt(r)); };
    double c = std::min(1.0, std::max(f(1 - eps), f(1)));
    return std::acos(c) * 180 / M_PI;
}

long height_shell(Real const & h, double eps)
{
    if (h <= 0)
        throw DomainError("height shells need a positive height");
    return static_cast<long>(std::floor(to_double(log(h)) / std::log1p(-eps)));
}

RepulsionReport repulsion_check(EllipticCurve const & e, PlaceSetQ const & s, Integer const & prime, double eps,
                                std::vector<CurvePoint> const & points, unsigned bits)
{
    if (!(eps > 0 && eps < kMaxSliceEps))
        throw DomainError("repulsion_check: eps out of range");
    require_prime_outside(e, s, prime);
    require_s_setup(e, s, points);

    PrecisionScope scope(bits + 32);
    HeightEngine engine(e, bits);
    ComplexLattice lattice = tau_from_curve(e, bits);
    std::vector<Integer> mult_places;
    for (auto const & q : s.primes())
        if (e.discriminant() % q == 0 && !is_potentially_good(e, q))
            mult_places.push_back(q);

    struct PointData {
        Real h;
        LocalHeightProfile profile;
        ArchSliceLabel label;
        std::vector<int> tate;
        bool torsion;
        FpPoint reduction;
    };
    std::vector<PointData> data;
    for (auto const & p : points) {
        PointData d;
        d.h = engine.canonical_height(p);
        d.profile = engine.profile(p);
        d.label = arch_slice(e, p, lattice, eps);
        for (auto const & q : mult_places)
            d.tate.push_back(tate_slice_index(e, p, q, eps));
        d.torsion = is_torsion(e, p).torsion;
        d.reduction = reduce_mod_p(e, p, prime);
        data.push_back(std::move(d));
    }

    RepulsionReport rep{e, prime, eps, s.primes()};
    Real log_p = log(Real(prime.get_str()));
    Real shrink = Real(1) - 2 * Real(eps);
    Real tol("1e-6");
    double floor_deg = angle_floor_deg(eps);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i] == points[j])
                continue;
            PointData const & a = data[i];
            PointData const & b = data[j];
            RepulsionPair pr;
            pr.p1 = points[i];
            pr.p2 = points[j];
            pr.h1 = a.h;
            pr.h2 = b.h;
            CurvePoint diff = subtract(e, points[i], points[j]);
            pr.h_diff = engine.canonical_height(diff);
            ++rep.pairs_examined;

            pr.same_fiber = a.reduction == b.reduction;
            if (pr.same_fiber) {
                ++rep.same_fiber_pairs;
                pr.valuation = valuation(diff.x(), prime);
                pr.valuation_ok = pr.valuation <= -2;
                pr.local_at_p = engine.finite(diff, prime);
                pr.local_ok = pr.local_at_p >= log_p * (1 - Real("1e-30"));
                if (!pr.valuation_ok)
                    ++rep.valuation_failures;
                if (!pr.local_ok)
                    ++rep.local_failures;
            }

            pr.label1 = a.label;
            pr.label2 = b.label;
            pr.same_slice = a.label == b.label && a.tate == b.tate;
            pr.balanced = balance_condition(a.profile, b.profile, s.primes(), eps);
            pr.hypotheses = pr.same_slice && pr.balanced;
            Real top = max_real(a.h, b.h);
            if (pr.hypotheses) {
                ++rep.hypothesis_pairs;
                pr.spacing_margin = pr.h_diff - shrink * top;
                if (*pr.spacing_margin < -tol)
                    ++rep.spacing_failures;
                if (pr.same_fiber) {
                    ++rep.conclusion_checked;
                    pr.conclusion_margin = pr.h_diff - (shrink * top + log_p);
                    if (*pr.conclusion_margin < -tol)
                        ++rep.conclusion_failures;
                }
            }

            if (!a.torsion && !b.torsion) {
                Real cosv = (a.h + b.h - pr.h_diff) / (2 * sqrt(a.h * b.h));
                double c = std::clamp(to_double(cosv), -1.0, 1.0);
                pr.angle_deg = std::acos(c) * 180 / M_PI;
                pr.same_shell = height_shell(a.h, eps) == height_shell(b.h, eps);
                if (pr.hypotheses && pr.same_shell) {
                    pr.angle_floor_deg = floor_deg;
                    ++rep.angle_checked;
                    if (*pr.angle_deg < floor_deg - 1e-6)
                        ++rep.angle_failures;
                }
            }
            rep.pairs.push_back(std::move(pr));
        }
    return rep;
}

// ---- angles ---------------------------------------------------------------------------------------

std::vector<std::vector<double>> angle_matrix(EllipticCurve const & e, std::vector<CurvePoint> const & points,
                                              unsigned bits)
{
    PrecisionScope scope(bits + 32);
    HeightEngine engine(e, bits);
    std::vector<Real> h;
    for (auto const & p : points) {
        if (p.is_origin() || is_torsion(e, p).torsion)
            throw DomainError("angle_matrix: torsion point");
        h.push_back(engine.canonical_height(p));
    }
    std::size_t n = points.size();
    std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Real hd = points[i] == points[j] ? Real(0) : engine.canonical_height(subtract(e, points[i], points[j]));
            Real cosv = (h[i] + h[j] - hd) / (2 * sqrt(h[i] * h[j]));
            double c = std::clamp(to_double(cosv), -1.0, 1.0);
            out[i][j] = out[j][i] = std::acos(c) * 180 / M_PI;
        }
    return out;
}

// ---- fiber counts -------------------------------------------------------------------------------

FiberCountReport fiber_count_vs_kl(EllipticCurve const & e, PlaceSetQ const & s, std::vector<CurvePoint> const & points,
                                   double h0, double t, long rank_bound, double eps, unsigned bits)
{
    if (!(t >= 0 && t <= 1))
        throw DomainError("fiber_count_vs_kl: t must lie in [0, 1]");
    if (!(eps > 0 && eps < 1) || h0 <= 0 || rank_bound < 0)
        throw DomainError("fiber_count_vs_kl: invalid parameters");
    PrecisionScope scope(bits + 32);
    HeightEngine engine(e, bits);

    FiberCountReport rep;
    rep.t = t;
    rep.eps = eps;
    rep.h0 = h0;
    rep.rank_bound = rank_bound;
    std::vector<CurvePoint> shell;
    double lo = (1 - eps) * h0;
    for (auto const & p : points) {
        double h = to_double(engine.canonical_height(p));
        if (h >= lo - 1e-12 && h <= h0 + 1e-12)
            shell.push_back(p);
    }
    rep.shell_points = shell.size();

    if (t > 0) {
        double x = std::exp(t * h0);
        Integer p;
        mpz_set_d(p.get_mpz_t(), std::ceil(std::max(2.0, x)));
        while (!is_prime(p) || s.contains(p) || e.discriminant() % p == 0)
            ++p;
        rep.prime = p;
        rep.prime_in_window = p.get_d() <= 2 * std::max(x, 1.0);
        for (auto const & [key, fiber] : reduction_fibers(e, shell, p).fibers)
            rep.fiber_sizes.push_back(fiber.size());
    } else if (!shell.empty()) {
        rep.fiber_sizes.push_back(shell.size());
    }
    std::sort(rep.fiber_sizes.rbegin(), rep.fiber_sizes.rend());
    rep.bound = std::exp((to_double(beta(Real(t))) + eps) * static_cast<double>(rank_bound)) * kTorsionFactor;
    rep.worst_margin = rep.bound - (rep.fiber_sizes.empty() ? 0.0 : static_cast<double>(rep.fiber_sizes.front()));
    return rep;
}

// ---- conductor enumeration ------------------------------------------------------------------------

namespace {

using i128 = __int128;

i128 to_i128(Integer const & n)
{
    if (abs(n) > Integer("85070591730234615865843651857942052864")) // 2^126
        throw DomainError("value exceeds 128-bit search arithmetic");
    Integer m = abs(n);
    i128 r = 0;
    for (std::size_t i = mpz_size(m.get_mpz_t()); i-- > 0;)
        r = (r << 64) | static_cast<i128>(mpz_getlimbn(m.get_mpz_t(), static_cast<mp_size_t>(i)));
    return n < 0 ? -r : r;
}

Integer from_i128(i128 v)
{
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    Integer hi(static_cast<unsigned long>(u >> 64)), lo(static_cast<unsigned long>(u & ~0UL));
    Integer r = (hi << 64) + lo;
    return neg ? Integer(-r) : r;
}

bool square_root_i128(i128 v, i128 & root)
{
    if (v < 0)
        return false;
    i128 r = static_cast<i128>(std::sqrt(static_cast<long double>(v)));
    while (r > 0 && r * r > v)
        --r;
    while ((r + 1) * (r + 1) <= v)
        ++r;
    root = r;
    return r * r == v;
}

struct SquareFilter {
    long m;
    std::vector<char> square;
    std::vector<long> cube;
    explicit SquareFilter(long modulus) : m(modulus), square(static_cast<std::size_t>(modulus), 0), cube(static_cast<std::size_t>(modulus))
    {
        for (long r = 0; r < m; ++r) {
            square[static_cast<std::size_t>(r * r % m)] = 1;
            cube[static_cast<std::size_t>(r)] = r * r % m * r % m;
        }
    }
};

long mod_of(i128 v, long m)
{
    long r = static_cast<long>(v % m);
    return r < 0 ? r + m : r;
}

std::vector<Integer> set_with_2_3(std::vector<Integer> s)
{
    s.push_back(2);
    s.push_back(3);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (auto const & p : s)
        if (!is_prime(p))
            throw DomainError("conductor_enumerate: S must consist of primes");
    return s;
}

Reconstruction reconstruct(Rational const & x, Rational const & y, Integer const & twist,
                           std::vector<Integer> const & primes)
{
    Reconstruction r;
    r.twist = twist;
    Rational c4 = x * twist * twist;
    Rational c6 = y * twist * twist * twist;
    // scale by lambda = prod p^k_p: (c4 lambda^4, c6 lambda^6), least integral exponents first
    Rational base4 = c4, base6 = c6;
    std::vector<long> kmin;
    for (auto const & p : primes) {
        long k = std::numeric_limits<long>::min();
        auto need = [&](Rational const & c, long w) {
            if (c == 0)
                return;
            long v = valuation(c, p);
            long kk = v >= 0 ? -(v / w) : (-v + w - 1) / w;
            k = std::max(k, kk);
        };
        need(c4, 4);
        need(c6, 6);
        if (k == std::numeric_limits<long>::min())
            k = 0;
        kmin.push_back(k);
    }
    auto scaled = [&](long extra2, long extra3, Integer & o4, Integer & o6) {
        Rational s4 = base4, s6 = base6;
        for (std::size_t i = 0; i < primes.size(); ++i) {
            long k = kmin[i] + (primes[i] == 2 ? extra2 : primes[i] == 3 ? extra3 : 0);
            Rational f4 = 1, f6 = 1;
            Integer p = primes[i];
            Integer pk;
            mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(std::labs(k)));
            Rational lam = k >= 0 ? Rational(pk) : Rational(Integer(1), pk);
            f4 = lam * lam * lam * lam;
            f6 = f4 * lam * lam;
            s4 *= f4;
            s6 *= f6;
        }
        s4.canonicalize();
        s6.canonicalize();
        o4 = s4.get_num();
        o6 = s6.get_num();
    };
    for (long total = 0; total <= 4 && !r.kraus; ++total)
        for (long e2 = 0; e2 <= total && !r.kraus; ++e2) {
            long e3 = total - e2;
            if (e2 > 2 || e3 > 2)
                continue;
            Integer a, b;
            scaled(e2, e3, a, b);
            if (kraus_conditions(a, b)) {
                r.kraus = true;
                r.c4 = a;
                r.c6 = b;
            }
        }
    if (!r.kraus) {
        scaled(0, 0, r.c4, r.c6);
        return r;
    }
    auto e = curve_from_c4c6(r.c4, r.c6);
    if (!e)
        return r;
    r.curve = minimal_model(*e).curve;
    r.support_ok = true;
    for (auto const & q : bad_primes(*r.curve))
        if (!std::binary_search(primes.begin(), primes.end(), q))
            r.support_ok = false;
    return r;
}

std::vector<Integer> twists(std::vector<Integer> const & primes)
{
    std::vector<Integer> out{1};
    for (auto const & p : primes) {
        std::size_t n = out.size();
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(out[i] * p);
    }
    std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(-out[i]);
    return out;
}

}  // namespace

std::vector<CurvePoint> mordell_s_integral_points(Integer const & c, std::vector<Integer> const & primes,
                                                  Integer const & height_cap)
{
    if (c == 0)
        throw DomainError("mordell_s_integral_points: singular curve");
    std::vector<CurvePoint> out;
    if (height_cap < 1)
        return out;
    if (height_cap > Integer("1000000000000"))
        throw DomainError("mordell_s_integral_points: height cap too large");
    static SquareFilter const f64(64), f63(63), f65(65), f11(11);
    long cap = height_cap.get_si();
    for (auto const & dd : smooth_numbers(primes, isqrt(height_cap))) {
        Integer d6 = dd * dd * dd * dd * dd * dd;
        i128 k = to_i128(c * d6);
        long d = dd.get_si();
        (void)to_i128(Integer(cap) * cap * cap + abs(c * d6)); // range guard
        long lo = -cap;
        if (k > 0) {
            long r = static_cast<long>(std::cbrt(static_cast<long double>(k)));
            lo = std::max(lo, -r - 2);
        }
        long k64 = mod_of(k, 64), k63 = mod_of(k, 63), k65 = mod_of(k, 65), k11 = mod_of(k, 11);
        long r63 = static_cast<long>(((lo % 63) + 63) % 63);
        long r65 = static_cast<long>(((lo % 65) + 65) % 65);
        long r11 = static_cast<long>(((lo % 11) + 11) % 11);
        for (long a = lo; a <= cap; ++a) {
            bool pass = f64.square[static_cast<std::size_t>((f64.cube[static_cast<std::size_t>(a & 63)] + k64) & 63)] &&
                        f63.square[static_cast<std::size_t>((f63.cube[static_cast<std::size_t>(r63)] + k63) % 63)] &&
                        f65.square[static_cast<std::size_t>((f65.cube[static_cast<std::size_t>(r65)] + k65) % 65)] &&
                        f11.square[static_cast<std::size_t>((f11.cube[static_cast<std::size_t>(r11)] + k11) % 11)];
            if (++r63 == 63)
                r63 = 0;
            if (++r65 == 65)
                r65 = 0;
            if (++r11 == 11)
                r11 = 0;
            if (!pass)
                continue;
            if (d != 1 && std::gcd(a, d) != 1)
                continue;
            i128 v = static_cast<i128>(a) * a * a + k;
            i128 b;
            if (!square_root_i128(v, b))
                continue;
            Rational x(Integer(a), dd * dd);
            Integer bi = from_i128(b);
            Integer d3 = dd * dd * dd;
            out.emplace_back(x, Rational(bi, d3));
            if (b != 0)
                out.emplace_back(x, Rational(Integer(-bi), d3));
        }
    }
    for (auto & p : out) {
        Rational x = p.x(), y = p.y();
        x.canonicalize();
        y.canonicalize();
        p = CurvePoint(x, y);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EllipticCurve> ConductorEnumeration::curves() const
{
    std::vector<EllipticCurve> out;
    std::set<std::array<Integer, 5>> seen;
    for (auto const & cand : candidates)
        for (auto const & r : cand.reconstructions)
            if (r.curve && r.support_ok && seen.insert(r.curve->coefficients()).second)
                out.push_back(*r.curve);
    return out;
}

std::map<std::array<Integer, 5>, long> ConductorEnumeration::multiplicity() const
{
    std::map<std::array<Integer, 5>, long> out;
    for (auto const & cand : candidates)
        for (auto const & r : cand.reconstructions)
            if (r.curve && r.support_ok)
                ++out[r.curve->coefficients()];
    return out;
}

long ConductorEnumeration::largest_point_fiber() const
{
    long best = 0;
    for (auto const & cand : candidates) {
        std::set<std::array<Integer, 5>> distinct;
        for (auto const & r : cand.reconstructions)
            if (r.curve && r.support_ok)
                distinct.insert(r.curve->coefficients());
        best = std::max(best, static_cast<long>(distinct.size()));
    }
    return best;
}

long ConductorEnumeration::fiber_bound() const
{
    std::size_t extra = 0;
    for (auto const & p : primes)
        if (p != 2 && p != 3)
            ++extra;
    return 1L << (extra + 3);
}

ConductorEnumeration conductor_enumerate(std::vector<Integer> const & s, Integer const & height_cap, int jobs)
{
    ConductorEnumeration out;
    out.primes = set_with_2_3(s);
    out.height_cap = height_cap;

    std::vector<Integer> cs{1};
    for (auto const & p : out.primes) {
        std::vector<Integer> next;
        for (auto const & c : cs) {
            Integer v = c;
            for (int a = 0; a <= 5; ++a, v *= p)
                next.push_back(v);
        }
        cs = std::move(next);
    }
    for (auto const & c : cs) {
        out.c_values.push_back(c);
        out.c_values.push_back(-c);
    }

    auto ts = twists(out.primes);
    std::vector<std::vector<ConductorCandidate>> found(out.c_values.size());
    auto work = [&](std::size_t i) {
        Integer const & c = out.c_values[i];
        for (auto const & p : mordell_s_integral_points(c, out.primes, height_cap)) {
            ConductorCandidate cand{c, p, false, {}};
            if (p.x().get_den() == 1 && p.y().get_den() == 1)
                cand.kraus_direct = kraus_conditions(p.x().get_num(), p.y().get_num());
            for (auto const & d : ts)
                cand.reconstructions.push_back(reconstruct(p.x(), p.y(), d, out.primes));
            found[i].push_back(std::move(cand));
        }
    };
    std::size_t n_jobs = static_cast<std::size_t>(std::max(1, jobs));
    if (n_jobs == 1) {
        for (std::size_t i = 0; i < out.c_values.size(); ++i)
            work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < out.c_values.size();)
                    work(i);
            });
        for (auto & th : pool)
            th.join();
    }
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (found[i].empty())
            out.c_without_points.push_back(out.c_values[i]);
        for (auto & cand : found[i])
            out.candidates.push_back(std::move(cand));
    }
    return out;
}

std::pair<Integer, CurvePoint> mordell_image(EllipticCurve const & e, std::vector<Integer> const & primes)
{
    Integer cp = -1728 * e.discriminant();
    Integer u = 1;
    for (auto const & p : primes) {
        long v = valuation(cp, p);
        for (long i = 0; i < v / 6; ++i)
            u *= p;
    }
    Integer u2 = u * u, u3 = u2 * u;
    Integer c = cp / (u3 * u3);
    Rational x(e.c4(), u2), y(e.c6(), u3);
    x.canonicalize();
    y.canonicalize();
    return {c, CurvePoint(x, y)};
}

// ---- 3-torsion pipeline ---------------------------------------------------------------------------

ClassboundReport classbound_pipeline(Integer const & d, FredCaps const & caps, double height_slack, unsigned bits)
{
    ClassboundReport rep;
    rep.d = d;
    rep.caps = caps;
    rep.height_slack = height_slack;
    rep.h3 = h3(Integer(-d));
    PrecisionScope scope(bits + 32);

    std::map<Rational, ClassboundStratum> strata;
    strata[Rational(0)].delta = 0;
    for (auto const & sol : fred_solutions_exhaustive(d, caps)) {
        auto & st = strata[sol.delta];
        st.delta = sol.delta;
        st.solutions.push_back(sol);
    }
    double log_d = std::log(d.get_d());
    rep.height_cap = log_d / 4 + height_slack;
    std::size_t largest = 0, nonsingular = 0;
    for (auto & [delta, st] : strata) {
        std::size_t n = st.solutions.size();
        rep.aggregate += n;
        largest = std::max(largest, n);
        if (delta == 0)
            continue;
        rep.max_nonsingular = std::max(rep.max_nonsingular, n);
        nonsingular += n;
        Integer z = Rational(8 * delta).get_num();
        EllipticCurve curve(0, 0, 0, 0, Integer(-d * z * z));
        HeightEngine engine(curve, bits);
        for (auto const & sol : st.solutions) {
            CurvePoint p(Rational(4 * sol.n), Rational(8 * sol.y));
            Real h = engine.canonical_height(p);
            if (h > Real(rep.height_cap))
                ++rep.height_failures;
            st.heights.push_back(h);
        }
        rep.strata.push_back(st);
    }
    rep.strata.insert(rep.strata.begin(), strata.at(Rational(0)));
    rep.bound_value = std::pow(d.get_d(), 0.25) * static_cast<double>(std::max<std::size_t>(1, largest));
    rep.h3_within = static_cast<double>(rep.h3) <= rep.bound_value &&
                    rep.h3 <= 2 * static_cast<long>(rep.aggregate) - 1;
    rep.exponent = std::log(static_cast<double>(std::max<std::size_t>(1, rep.aggregate))) / log_d;
    rep.exponent_nonsingular = std::log(static_cast<double>(1 + nonsingular)) / log_d;
    return rep;
}

}  // namespace qortho
