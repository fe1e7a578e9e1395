#include "doctest.h"
#include "oracle_conductor.hpp"
#include "test_support.hpp"

#include "qortho/experiments.hpp"
#include "qortho/packing.hpp"

#include <cmath>
#include <set>

using namespace qortho;

namespace {

EllipticCurve mordell(long k) { return EllipticCurve(0, 0, 0, 0, k); }

std::vector<CurvePoint> integral_points(long k) { return integral_points_bounded(mordell(k), Integer(10000)); }

PlaceSetQ bad_places(EllipticCurve const & e) { return PlaceSetQ(prime_divisors(e.discriminant())); }

// Chord-tangent difference on y^2 = x^3 + k, written out directly.
std::pair<Rational, Rational> difference_on_mordell(CurvePoint const & p, CurvePoint const & q)
{
    Rational x1 = p.x(), y1 = p.y(), x2 = q.x(), y2 = -q.y();
    Rational m;
    if (x1 == x2)
        m = 3 * x1 * x1 / (2 * y1); // only reached for p = -q (doubling p)
    else
        m = (y2 - y1) / (x2 - x1);
    m.canonicalize();
    Rational x3 = m * m - x1 - x2;
    Rational y3 = -(y1 + m * (x3 - x1));
    x3.canonicalize();
    y3.canonicalize();
    return {x3, y3};
}

long rational_valuation(Rational const & q, long p)
{
    long v = 0;
    Integer n = q.get_num(), d = q.get_den();
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    while (d % p == 0) {
        d /= p;
        --v;
    }
    return v;
}

}  // namespace

TEST_CASE("reduction fibers")
{
    auto e = mordell(17);
    auto pts = integral_points(17);
    REQUIRE(pts.size() == 16);

    auto single = reduction_fibers(e, {pts[0]}, Integer(5));
    CHECK(single.fibers.size() == 1);

    auto f5 = reduction_fibers(e, pts, Integer(5));
    CHECK(f5.point_count() == 16);
    // direct reduction of affine coordinates
    std::map<std::pair<long, long>, long> direct;
    for (auto const & p : pts) {
        long x = (p.x().get_num().get_si() % 5 + 5) % 5;
        long y = (p.y().get_num().get_si() % 5 + 5) % 5;
        ++direct[{x, y}];
    }
    std::vector<long> want, got;
    for (auto const & [k, n] : direct)
        want.push_back(n);
    for (auto const & [k, v] : f5.fibers)
        got.push_back(static_cast<long>(v.size()));
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(got == want);

    // a prime larger than every coordinate difference separates all points
    auto big = reduction_fibers(e, pts, Integer(1000003));
    CHECK(big.fibers.size() == pts.size());
    CHECK(big.largest() == 1);

    CHECK_THROWS_AS(reduction_fibers(e, pts, Integer(3)), BadReduction);
    CHECK_THROWS_AS(reduction_fibers(e, pts, Integer(17)), BadReduction);
    CHECK_THROWS_AS(reduction_fibers(e, pts, Integer(15)), DomainError);
}

TEST_CASE("repulsion on integral points")
{
    auto e = mordell(17);
    auto pts = integral_points(17);
    auto s = bad_places(e);
    auto rep = repulsion_check(e, s, Integer(7), 0.1, pts);
    CHECK(rep.pairs_examined == 120);
    CHECK(rep.same_fiber_pairs > 0);
    CHECK(rep.valuation_failures == 0);
    CHECK(rep.local_failures == 0);
    CHECK(rep.ok());
    double log7 = std::log(7.0);
    for (auto const & pr : rep.pairs) {
        if (!pr.same_fiber) {
            CHECK_FALSE(pr.conclusion_margin.has_value());
            continue;
        }
        auto [x, y] = difference_on_mordell(pr.p1, pr.p2);
        CHECK(x == subtract(e, pr.p1, pr.p2).x());
        CHECK(rational_valuation(x, 7) == pr.valuation);
        CHECK(pr.valuation <= -2);
        CHECK(pr.local_at_p.convert_to<double>() >= log7 - 1e-12);
        CHECK(pr.h_diff.convert_to<double>() >= log7 - 1e-9);
    }
    MESSAGE("y^2 = x^3 + 17, p = 7: same-fiber pairs " << rep.same_fiber_pairs << ", hypothesis pairs "
                                                       << rep.hypothesis_pairs);

    // (x, y) and (x, -y) reduce together only when 2P reduces to the origin; no such pair here
    for (auto const & pr : rep.pairs)
        if (pr.p1.x() == pr.p2.x())
            CHECK_FALSE(pr.same_fiber);

    for (long p : {5L, 11L, 13L}) {
        auto r = repulsion_check(e, s, Integer(p), 0.1, pts);
        CHECK(r.valuation_failures == 0);
        CHECK(r.local_failures == 0);
        CHECK(r.ok());
    }

    CHECK_THROWS_AS(repulsion_check(e, s, Integer(17), 0.1, pts), DomainError);
    CHECK_THROWS_AS(repulsion_check(e, PlaceSetQ({Integer(2)}), Integer(7), 0.1, pts), DomainError);
    CHECK_THROWS_AS(repulsion_check(e, s, Integer(7), 0.2, pts), DomainError);
}

TEST_CASE("balance condition and angle floor")
{
    LocalHeightProfile a, b;
    a.archimedean = 2;
    b.archimedean = Real("2.1");
    CHECK(balance_condition(a, b, {}, 0.1));
    CHECK_FALSE(balance_condition(a, b, {}, 0.01));
    a.finite[Integer(2)] = -1; // negative at 2: the place drops out of T
    b.finite[Integer(2)] = 5;
    CHECK(balance_condition(a, b, {Integer(2)}, 0.1));
    a.finite[Integer(2)] = 1;
    CHECK_FALSE(balance_condition(a, b, {Integer(2)}, 0.1));

    CHECK(angle_floor_deg(0) == doctest::Approx(60.0));
    double prev = 60;
    for (double eps : {0.01, 0.05, 0.1, 0.13}) {
        double f = angle_floor_deg(eps);
        CHECK(f < prev);
        prev = f;
        // same-height extreme: cos = (1 + 2 eps) / 2
        CHECK(std::cos(f * M_PI / 180) >= (1 + 2 * eps) / 2 - 1e-12);
    }

    CHECK(height_shell(Real(1), 0.1) == 0);
    CHECK(height_shell(Real("0.95"), 0.1) == 0);
    CHECK(height_shell(Real("0.85"), 0.1) == 1);
    CHECK_THROWS_AS(height_shell(Real(0), 0.1), DomainError);
}

TEST_CASE("angle matrix")
{
    auto e = mordell(17);
    auto pts = integral_points(17);
    auto m = angle_matrix(e, pts);
    auto m2 = angle_matrix(e, pts, 256);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(m[i][i] == 0);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            CHECK(m[i][j] == m[j][i]);
            CHECK(std::fabs(m[i][j] - m2[i][j]) * M_PI / 180 <= 1e-6);
            if (pts[i] == negate(e, pts[j]))
                CHECK(m[i][j] == doctest::Approx(180.0).epsilon(1e-9));
        }
    }
    // angles obey <P, Q> = |P||Q| cos: check against the pairing for one pair
    Real pq = height_pairing(e, pts[0], pts[5]);
    double c = (pq / sqrt(canonical_height(e, pts[0]) * canonical_height(e, pts[5]))).convert_to<double>();
    CHECK(std::cos(m[0][5] * M_PI / 180) == doctest::Approx(c).epsilon(1e-9));

    CHECK_THROWS_AS(angle_matrix(mordell(1), {CurvePoint(Rational(2), Rational(3))}), DomainError);
}

TEST_CASE("fiber counts against the packing bound")
{
    auto e = mordell(17);
    auto pts = integral_points(17);
    auto s = bad_places(e);
    auto empty = fiber_count_vs_kl(e, s, pts, 1e-6, 0.5, 2, 0.1);
    CHECK(empty.shell_points == 0);
    CHECK(empty.ok());

    double top = 0;
    for (auto const & p : pts)
        top = std::max(top, canonical_height(e, p).convert_to<double>());
    long r = 2;
    auto flat = fiber_count_vs_kl(e, s, pts, top, 0, r, 0.5);
    CHECK_FALSE(flat.prime.has_value());
    CHECK(flat.fiber_sizes.size() <= 1);
    CHECK(flat.ok());
    CHECK(flat.bound == doctest::Approx(std::exp((beta(Real(0)).convert_to<double>() + 0.5) * r) * 16));

    auto sliced = fiber_count_vs_kl(e, s, pts, top, 0.5, r, 0.5);
    REQUIRE(sliced.prime.has_value());
    CHECK(sliced.prime_in_window);
    CHECK(*sliced.prime >= Integer(static_cast<long>(std::ceil(std::exp(0.5 * top)))));
    std::size_t total = 0;
    for (auto n : sliced.fiber_sizes)
        total += n;
    CHECK(total == flat.shell_points);
    CHECK(sliced.ok());
}

TEST_CASE("S-integral points on Mordell curves")
{
    std::vector<Integer> primes{2, 3};
    for (long c : {17L, -2L, 1L, -432L, 24L}) {
        CAPTURE(c);
        auto fast = mordell_s_integral_points(Integer(c), primes, Integer(400));
        auto slow = s_integral_points_bounded(mordell(c), PlaceSetQ(primes), std::log(400.0));
        CHECK(fast == slow);
    }
    auto pts = mordell_s_integral_points(Integer(297), {2, 3, 11}, Integer(100000));
    CHECK(std::count(pts.begin(), pts.end(), CurvePoint(Rational(93844), Rational(28748141))) == 1);
    CHECK(std::count(pts.begin(), pts.end(), CurvePoint(Rational(4), Rational(19))) == 1);
    CHECK_THROWS_AS(mordell_s_integral_points(Integer(0), primes, Integer(10)), DomainError);
}

TEST_CASE("conductor enumeration, S empty")
{
    auto en = conductor_enumerate({}, Integer(10000), 2);
    CHECK(en.primes == std::vector<Integer>{2, 3});
    CHECK(en.c_values.size() == 72);
    // every curve with conductor 2^a 3^b: there are 752 such isomorphism classes
    auto curves = en.curves();
    CHECK(curves.size() == 752);
    std::set<std::array<Integer, 5>> got;
    for (auto const & c : curves)
        got.insert(c.coefficients());
    // the conductor-27 CM family
    for (auto const & a : std::vector<std::array<long, 5>>{{0, 0, 1, 0, -7}, {0, 0, 1, 0, 0}, {0, 0, 1, -270, -1708},
                                                            {0, 0, 1, -30, 63}})
        CHECK(got.count({Integer(a[0]), Integer(a[1]), Integer(a[2]), Integer(a[3]), Integer(a[4])}) == 1);

    auto scan = oracle::curves_with_support({}, 20);
    long missing = 0;
    for (auto const & a : scan)
        missing += got.count(a) == 0;
    CHECK(missing == 0);
    MESSAGE("brute-force scan: " << scan.size() << " curves, enumeration: " << curves.size());

    for (auto const & [curve, n] : en.multiplicity())
        CHECK(n <= en.fiber_bound());
    CHECK(en.largest_point_fiber() <= en.fiber_bound());
    CHECK(en.fiber_bound() == 8);
    for (auto const & cand : en.candidates) {
        CHECK(cand.point.y() * cand.point.y() == cand.point.x() * cand.point.x() * cand.point.x() + cand.c);
        CHECK(cand.reconstructions.size() == 8);
    }
    CHECK_FALSE(en.c_without_points.empty());

    // the candidate attached to each curve is found
    for (auto const & e : curves) {
        auto [c, p] = mordell_image(e, en.primes);
        bool found = std::any_of(en.candidates.begin(), en.candidates.end(),
                                 [&](ConductorCandidate const & k) { return k.c == c && k.point == p; });
        CHECK(found);
    }
}

TEST_CASE("3-torsion pipeline")
{
    auto r = classbound_pipeline(Integer(23));
    CHECK(r.h3 == 3);
    CHECK(r.aggregate >= 1);
    CHECK(r.height_failures == 0);
    CHECK(r.h3_within);
    bool seen = false;
    for (auto const & st : r.strata) {
        if (st.delta != Rational(1, 2))
            continue;
        for (auto const & sol : st.solutions)
            if (sol.n == 2 && sol.y == Rational(3, 2)) {
                seen = true;
                // integral form: (8, 12) on Y^2 = X^3 - 23 * 16
                CHECK(EllipticCurve(0, 0, 0, 0, -23 * 16).contains(CurvePoint(Rational(8), Rational(12))));
            }
        for (auto const & h : st.heights)
            CHECK(h.convert_to<double>() <= std::log(23.0) / 4 + 5);
    }
    CHECK(seen);
    CHECK(r.strata.front().delta == 0);

    auto r4 = classbound_pipeline(Integer(4));
    CHECK(r4.h3 == 1);
    CHECK(r4.strata.front().solutions.size() >= 1);
    CHECK(r4.aggregate >= 1);

    for (long d : {31L, 59L, 83L, 107L, 139L, 211L, 283L, 307L}) {
        auto rep = classbound_pipeline(Integer(d));
        CHECK(rep.height_failures == 0);
        CHECK(rep.h3_within);
    }
    CHECK_THROWS_AS(classbound_pipeline(Integer(92)), DomainError);
}
