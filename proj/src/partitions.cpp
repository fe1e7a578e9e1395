#include "qortho/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <tuple>

namespace qortho {

namespace bm = boost::multiprecision;

Rational b2(Rational const & t)
{
    return t * t - t + Rational(1, 6);
}

Real b2(Real const & t)
{
    return t * t - t + Real(1) / 6;
}

// ---- U_j intervals ---------------------------------------------------------------

namespace {

void check_eps(double eps)
{
    if (!(eps > 0) || !(eps < kMaxSliceEps))
        throw DomainError("eps must lie in (0, 2/15)");
}

// Tolerance for boundary hits: coordinates carry about bits - 24 correct bits.
Real boundary_tolerance(unsigned bits)
{
    return bm::pow(Real(2), -static_cast<long>(bits) + 24);
}

}  // namespace

IntervalPartition::IntervalPartition(double eps) : eps_(eps)
{
    check_eps(eps);
    eps_q_ = Rational(eps); // exact binary value of the double
    m_ = static_cast<int>(std::ceil(std::log(6 / eps) / std::log(1.5)));
    // guard the ceiling against rounding: m is the least integer with (3/2)^m eps/12 >= 1/2
    auto reaches = [&](int k) {
        Rational p(1);
        for (int i = 0; i < k; ++i)
            p *= Rational(3, 2);
        return p * eps_q_ / 12 >= Rational(1, 2);
    };
    while (m_ > 0 && reaches(m_ - 1))
        --m_;
    while (!reaches(m_))
        ++m_;
    Rational p(1);
    for (int j = 0; j < m_; ++j) {
        upper_.push_back(p * eps_q_ / 12);
        p *= Rational(3, 2);
    }
    upper_.push_back(Rational(1, 2));
}

Rational IntervalPartition::upper(int j) const
{
    if (j < 0 || j > m_)
        throw DomainError("interval index out of range");
    return upper_[static_cast<std::size_t>(j)];
}

Rational IntervalPartition::lower(int j) const
{
    return j == 0 ? Rational(0) : upper(j - 1);
}

int IntervalPartition::index(Rational const & t) const
{
    if (t <= 0 || t > Rational(1, 2))
        throw DomainError("uj_index: t outside (0, 1/2]");
    auto it = std::lower_bound(upper_.begin(), upper_.end(), t);
    return static_cast<int>(it - upper_.begin());
}

int IntervalPartition::index(Real const & t) const
{
    if (!(t > 0) || t > Real(0.5))
        throw DomainError("uj_index: t outside (0, 1/2]");
    for (int j = 0; j < m_; ++j)
        if (t <= to_real(upper_[static_cast<std::size_t>(j)]))
            return j;
    return m_;
}

int uj_index(Rational const & t, double eps)
{
    return IntervalPartition(eps).index(t);
}

int uj_index(Real const & t, double eps)
{
    return IntervalPartition(eps).index(t);
}

// ---- constants of the archimedean slicing ----------------------------------------------

namespace {

double const kPi = 3.141592653589793;
double const kQmax = std::exp(-kPi * std::sqrt(3.0)); // |q| on the fundamental domain

// Sum over k >= 1 of f(x^k), to double accuracy.
double power_sum(double x, std::function<double(double)> const & f)
{
    double s = 0, p = x;
    for (int k = 1; k < 400 && p > 1e-300; ++k, p *= x)
        s += f(p);
    return s;
}

// For q in the fundamental domain and z in the annulus |q|^(1/2) <= |z| <= 1,
// |q^n z| <= r^(2n) and |q^n / z| <= r^(2n-1) with r = |q|^(1/2), so
// sum_k log(1 - r^k) <= log|prod| <= sum_k log(1 + r^k).
double product_log_hi(double r)
{
    return power_sum(r, [](double a) { return std::log1p(a); });
}

double product_log_lo(double r)
{
    return power_sum(r, [](double a) { return std::log1p(-a); });
}

// Largest |log|prod(z)| - log|prod(1)|| over |z - 1| <= rho, any admissible q.
double product_deviation(double rho)
{
    double rho_inv = rho / (1 - rho); // bound on |1/z - 1|
    double s = 0;
    for (int n = 1; n < 60; ++n) {
        double a = std::pow(kQmax, n);
        if (a < 1e-300)
            break;
        // |log|1 - a w| - log|1 - a|| <= -log(1 - a |w - 1| / (1 - a))
        s += -std::log1p(-a * rho / (1 - a)) - std::log1p(-a * rho_inv / (1 - a));
    }
    return s;
}

// Error term of the comparison near z = 1 when |delta_j| <= eta.
double near_one_error(double eta)
{
    return -std::log1p(-eta) + product_deviation(eta / (1 - eta)) + product_deviation(eta);
}

// Grid of eps values used to verify conditions that must hold for all eps in (0, 2/15).
std::vector<double> eps_grid()
{
    std::vector<double> g;
    for (int i = 0; i <= 400; ++i)
        g.push_back(kMaxSliceEps * std::pow(10.0, -8.0 * i / 400));
    return g;
}

// Largest k/denominator in (0, 1) with ok(k/denominator); ok must be monotone (true below a threshold).
double largest_admissible(std::function<bool(double)> const & ok, int denominator)
{
    int lo = 0, hi = denominator; // ok(lo / d) holds or lo = 0, ok(hi / d) fails
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (ok(static_cast<double>(mid) / denominator))
            lo = mid;
        else
            hi = mid;
    }
    if (lo == 0)
        throw DomainError("no admissible constant");
    return static_cast<double>(lo) / denominator;
}

// Squares of log z: cell index ceil(x / side) - 1, so cut points go to the lower cell.
std::int64_t square_cell(double x, double side)
{
    return static_cast<std::int64_t>(std::ceil(x / side)) - 1;
}

// Both orientations; three sectors near z = 1 (U_0 only); for every U_j six
// sectors near z = 0 and the squares covering [log(kappa eps), 0] x (-pi, pi].
double label_count(double eps, ArchSliceConstants const & c)
{
    double side = c.c * eps / 2;
    double m = IntervalPartition(eps).m();
    double re_cells = static_cast<double>(-square_cell(std::log(c.kappa * eps), side)) + 1;
    double im_cells = static_cast<double>(square_cell(2 * kPi, side)) + 2;
    return 2 * (3 + (m + 1) * (6 + re_cells * im_cells));
}

ArchSliceConstants make_constants()
{
    ArchSliceConstants c;
    double r = std::sqrt(kQmax);
    auto grid = eps_grid();

    // (a) comparison error below eps/6, (b) the u2 range stays inside U_0,
    // (c) -log|g0(1 + delta)| >= 0; all for |delta| <= kappa0 eps.
    c.kappa0 = largest_admissible(
        [&](double k) {
            for (double e : grid) {
                double eta = k * e;
                if (eta > 0.125)
                    return false;
                if (!(near_one_error(eta) < e / 6))
                    return false;
                if (std::fabs(std::log1p(-eta)) / (kPi * std::sqrt(3.0)) > e / 12)
                    return false;
                double hi = product_log_hi(r) + product_deviation(eta);
                if (-std::log(eta) - hi < 0)
                    return false;
            }
            return true;
        },
        1000);

    // |q|^(1/2) = x <= kappa1 eps forces |log|prod|| <= sum_k -log(1 - x^k) <= eps/18.
    c.kappa1 = largest_admissible(
        [&](double k) {
            for (double e : grid)
                if (-product_log_lo(k * e) > e / 18)
                    return false;
            return true;
        },
        10000);

    // |z| <= kappa2 eps forces exp(-eps/18) <= |z - 1| <= exp(eps/18).
    c.kappa2 = largest_admissible(
        [&](double k) {
            for (double e : grid)
                if (-std::log1p(-k * e) > e / 18 || std::log1p(k * e) > e / 18)
                    return false;
            return true;
        },
        10000);
    c.kappa = std::min(c.kappa1, c.kappa2);

    c.product_hi = product_log_hi(r);
    c.product_lo = product_log_lo(r);
    // -log|g0| >= -log(c eps) - product_hi when |z - 1| <= c eps, and
    // -log|g0| <= -log eps - log kappa0 - product_lo on the remaining region.
    double lower_const = -c.product_hi;
    double upper_const = -std::log(c.kappa0) - c.product_lo;
    c.c = std::exp(-(upper_const - lower_const));

    // sup over eps of #labels / (eps^-2 |log eps|^2), rounded up to two digits
    double worst = 0;
    for (double e : grid) {
        if (e >= kMaxSliceEps)
            continue;
        double l = std::log(e);
        worst = std::max(worst, label_count(e, c) * e * e / (l * l));
    }
    double scale = std::pow(10.0, std::floor(std::log10(worst)) - 1);
    c.label_constant = std::ceil(worst * 1.01 / scale) * scale;
    return c;
}

}  // namespace

ArchSliceConstants const & arch_slice_constants()
{
    static ArchSliceConstants const c = make_constants();
    return c;
}

double arch_slice_label_count(double eps)
{
    check_eps(eps);
    return label_count(eps, arch_slice_constants());
}

// ---- archimedean labels ------------------------------------------------------------------

namespace {

Real centered(Real const & x)
{
    return x - bm::ceil(x - Real(0.5));
}

int region_rank(SliceRegion r)
{
    return static_cast<int>(r);
}

}  // namespace

bool ArchSliceLabel::operator==(ArchSliceLabel const & o) const
{
    return negated == o.negated && i == o.i && region == o.region && k == o.k && square_re == o.square_re &&
           square_im == o.square_im;
}

bool ArchSliceLabel::operator<(ArchSliceLabel const & o) const
{
    return std::make_tuple(negated, i, region_rank(region), k, square_re, square_im) <
           std::make_tuple(o.negated, o.i, region_rank(o.region), o.k, o.square_re, o.square_im);
}

std::ostream & operator<<(std::ostream & os, ArchSliceLabel const & l)
{
    os << (l.negated ? "-" : "+") << "U" << l.i;
    switch (l.region) {
    case SliceRegion::near_one:
        os << "/one" << l.k;
        break;
    case SliceRegion::near_zero:
        os << "/zero" << l.k;
        break;
    case SliceRegion::generic:
        os << "/sq(" << l.square_re << "," << l.square_im << ")";
        break;
    }
    if (l.boundary)
        os << "*";
    return os;
}

ArchSliceLabel arch_slice(Real const & u1, Real const & u2, ComplexLattice const & l, double eps)
{
    check_eps(eps);
    ArchSliceConstants const & C = arch_slice_constants();
    PrecisionScope scope(l.precision_bits + 32);
    Real const tol = boundary_tolerance(l.precision_bits);
    Real const pi_r = pi();

    ArchSliceLabel out;
    Real a = centered(u1), b = centered(u2);
    if (b < 0) {
        out.negated = true;
        a = centered(-a);
        b = -b;
    }
    if (b != 0 && b <= tol)
        out.boundary = true;

    IntervalPartition part(eps);
    out.i = part.m();
    if (b == 0) {
        out.i = 0;
    } else {
        for (int j = 0; j < part.m(); ++j) {
            Real cut = to_real(part.upper(j));
            if (bm::abs(b - cut) <= tol)
                out.boundary = true;
            if (b <= cut + tol) {
                out.i = j;
                break;
            }
        }
    }

    Complex z = exp2pii(Complex(a) + l.tau * b);
    Complex w = Complex(Real(1)) - z;
    Real e(eps);

    // smallest index whose upper cut is not exceeded (cuts given in increasing order)
    auto sector = [&](Real const & v, std::vector<Real> const & cuts) {
        int k = 0;
        for (auto const & c : cuts) {
            if (bm::abs(v - c) <= tol)
                out.boundary = true;
            if (v <= c + tol)
                return k;
            ++k;
        }
        return k;
    };

    Real one_radius = Real(C.kappa0) * e;
    Real abs_w = abs(w);
    if (bm::abs(abs_w - one_radius) <= tol)
        out.boundary = true;
    if (abs_w <= one_radius + tol) {
        out.region = SliceRegion::near_one;
        Real theta = arg(w);
        out.k = sector(theta, {-pi_r / 2 + pi_r / 3, -pi_r / 2 + 2 * pi_r / 3});
        return out;
    }

    Real zero_radius = Real(C.kappa) * e;
    Real abs_z = abs(z);
    if (bm::abs(abs_z - zero_radius) <= tol)
        out.boundary = true;
    if (abs_z <= zero_radius + tol) {
        out.region = SliceRegion::near_zero;
        Real phi = arg(z);
        if (phi < 0)
            phi += 2 * pi_r;
        if (phi <= tol || 2 * pi_r - phi <= tol)
            out.boundary = true;
        std::vector<Real> cuts;
        for (int k = 1; k < 6; ++k)
            cuts.push_back(pi_r * k / 3);
        out.k = 3 + sector(phi, cuts);
        return out;
    }

    out.region = SliceRegion::generic;
    Real side = Real(C.c) * e / 2;
    auto cell = [&](Real const & x) {
        Real t = x / side;
        Real nearest = bm::round(t);
        if (bm::abs(t - nearest) * side <= tol)
            out.boundary = true;
        return static_cast<std::int64_t>(bm::ceil(t - tol / side).convert_to<long long>()) - 1;
    };
    out.square_re = cell(bm::log(abs_z));
    out.square_im = cell(arg(z) + pi_r);
    return out;
}

ArchSliceLabel arch_slice(EllipticCurve const & e, CurvePoint const & p, ComplexLattice const & l, double eps)
{
    if (p.is_origin())
        throw DomainError("arch_slice: P must be affine");
    PrecisionScope scope(l.precision_bits + 32);
    EllipticLog u = elliptic_log(e, p, l);
    return arch_slice(u.u1, u.u2, l, eps);
}

ArchSliceLabel arch_slice(EllipticCurve const & e, CurvePoint const & p, double eps, unsigned bits)
{
    return arch_slice(e, p, tau_from_curve(e, bits), eps);
}

// ---- inequality check -------------------------------------------------------------------

namespace {

void fill_report(SliceInequalityReport & r, Real const & l1, Real const & l2, Real const & ld, double eps)
{
    r.lambda1 = l1.convert_to<double>();
    r.lambda2 = l2.convert_to<double>();
    r.lambda_diff = ld.convert_to<double>();
    Real e(eps);
    Real rhs;
    if (r.special) {
        rhs = (1 - e) * bm::min(l1, l2);
        r.nonnegative = l1 >= 0 && l2 >= 0;
    } else {
        Real mx = bm::max(l1, l2);
        rhs = bm::max((1 - e) * mx, (1 - 2 * e) * mx);
    }
    r.rhs = rhs.convert_to<double>();
    r.margin = Real(ld - rhs).convert_to<double>();
    if (r.boundary)
        r.note = "boundary tie-break applied";
}

SliceInequalityReport start_report(ArchSliceLabel const & a, ArchSliceLabel const & b)
{
    SliceInequalityReport r;
    r.label = a;
    r.boundary = a.boundary || b.boundary;
    if (!(a == b)) {
        r.note = "labels differ";
        return r;
    }
    r.applicable = true;
    r.special = a.special();
    return r;
}

}  // namespace

SliceInequalityReport slice_inequality_check(Real const & u1a, Real const & u2a, Real const & u1b, Real const & u2b,
                                             ComplexLattice const & l, double eps)
{
    PrecisionScope scope(l.precision_bits + 32);
    Real d1 = centered(u1a - u1b), d2 = centered(u2a - u2b);
    if (d1 == 0 && d2 == 0) {
        SliceInequalityReport r;
        r.note = "identical points";
        return r;
    }
    auto r = start_report(arch_slice(u1a, u2a, l, eps), arch_slice(u1b, u2b, l, eps));
    if (!r.applicable)
        return r;
    fill_report(r, local_height_arch(u1a, u2a, l), local_height_arch(u1b, u2b, l), local_height_arch(d1, d2, l), eps);
    return r;
}

SliceInequalityReport slice_inequality_check(EllipticCurve const & e, CurvePoint const & p1, CurvePoint const & p2,
                                             double eps, unsigned bits)
{
    if (p1.is_origin() || p2.is_origin())
        throw DomainError("slice_inequality_check: points must be affine");
    if (p1 == p2) {
        SliceInequalityReport r;
        r.note = "identical points";
        return r;
    }
    ComplexLattice l = tau_from_curve(e, bits);
    PrecisionScope scope(l.precision_bits + 32);
    EllipticLog ua = elliptic_log(e, p1, l), ub = elliptic_log(e, p2, l);
    auto r = start_report(arch_slice(ua.u1, ua.u2, l, eps), arch_slice(ub.u1, ub.u2, l, eps));
    if (!r.applicable)
        return r;
    CurvePoint d = subtract(e, p1, p2);
    fill_report(r, local_height_arch(ua.u1, ua.u2, l), local_height_arch(ub.u1, ub.u2, l),
                local_height_arch(e, d, l), eps);
    return r;
}

// ---- split multiplicative primes ----------------------------------------------------------

bool is_split_multiplicative(EllipticCurve const & e, Integer const & prime)
{
    if (reduction_type(e, prime) != ReductionType::multiplicative)
        return false;
    EllipticCurve m = minimal_model(e).curve;
    if (prime >= 5) {
        Integer c = -m.c6();
        return mpz_legendre(Integer(((c % prime) + prime) % prime).get_mpz_t(), prime.get_mpz_t()) == 1;
    }
    // p = 2, 3: locate the node and test whether its tangent cone splits
    long p = prime.get_si();
    auto red = [&](Rational const & a) {
        Integer r = a.get_num() % prime;
        return ((r.get_si() % p) + p) % p;
    };
    long a1 = red(m.a1()), a2 = red(m.a2()), a3 = red(m.a3()), a4 = red(m.a4()), a6 = red(m.a6());
    for (long x = 0; x < p; ++x)
        for (long y = 0; y < p; ++y) {
            long f = y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6;
            long fx = a1 * y - 3 * x * x - 2 * a2 * x - a4;
            long fy = 2 * y + a1 * x + a3;
            if (f % p != 0 || fx % p != 0 || fy % p != 0)
                continue;
            for (long t = 0; t < p; ++t)
                if ((t * t + a1 * t - 3 * x - a2) % p == 0)
                    return true;
            return false;
        }
    throw DomainError("no singular point found for multiplicative reduction");
}

Rational tate_fraction(EllipticCurve const & e, CurvePoint const & p, Integer const & prime)
{
    if (!is_split_multiplicative(e, prime))
        throw DomainError("tate_fraction: reduction is not split multiplicative");
    if (p.is_origin())
        return Rational(0);
    MinimalModel mm = minimal_model(e);
    EllipticCurve const & m = mm.curve;
    CurvePoint q = map_point(mm.change, p);
    long n = valuation(m.discriminant(), prime);
    Rational const & x = q.x();
    Rational const & y = q.y();
    if (valuation(x, prime) < 0)
        return Rational(0);
    Rational psi2 = 2 * y + m.a1() * x + m.a3();
    Rational dfdx = 3 * x * x + 2 * m.a2() * x + m.a4() - m.a1() * y;
    long v2 = valuation(psi2, prime);
    if (v2 == 0 || valuation(dfdx, prime) == 0)
        return Rational(0);
    Rational i = std::min(Rational(v2), Rational(n, 2));
    Rational f = i / n;
    f.canonicalize();
    return f;
}

int tate_slice_index(EllipticCurve const & e, CurvePoint const & p, Integer const & prime, double eps)
{
    Rational f = tate_fraction(e, p, prime);
    return f == 0 ? 0 : IntervalPartition(eps).index(f);
}

// ---- l1 slab covering --------------------------------------------------------------------

double l1_norm(std::vector<double> const & x)
{
    double s = 0;
    for (double v : x)
        s += std::fabs(v);
    return s;
}

double l1_distance(std::vector<double> const & x, std::vector<double> const & y)
{
    if (x.size() != y.size())
        throw DomainError("l1_distance: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += std::fabs(x[i] - y[i]);
    return s;
}

SlabCover::SlabCover(int n, double c1, double c2, double eps) : n_(n), c1_(c1), c2_(c2), eps_(eps), half_(eps / 2)
{
    if (n < 1 || !(c1 > 0) || !(c2 >= c1) || !(eps > 0) || !(eps < 0.5) || !std::isfinite(c2))
        throw DomainError("cover_slab: need n >= 1, 0 < c1 <= c2, 0 < eps < 1/2");
    // covering radius 2 e |P|_1 with e = eps / 2
    double big_m = std::log(c2 / c1) / std::log1p(half_);
    shells_ = static_cast<long>(std::ceil(big_m));
    // exact integer range: n (1/e - 1) <= |y|_1 < n (1 + 1/e)
    Rational inv = Rational(2) / Rational(eps);
    Rational lo = n * (inv - 1), hi = n * (inv + 1);
    Integer l = lo.get_num() / lo.get_den();
    if (l * lo.get_den() < lo.get_num())
        l += 1;
    Integer h = hi.get_num() / hi.get_den();
    if (h * hi.get_den() < hi.get_num())
        h += 1;
    norm_lo_ = l.get_si();
    norm_hi_ = h.get_si();
}

double SlabCover::scale(long m) const
{
    return c1_ * half_ * std::pow(1 + half_, static_cast<double>(m)) / n_;
}

double SlabCover::count() const
{
    // #{y >= 0 : |y|_1 = k} = binomial(k + n - 1, n - 1)
    Integer per_shell = 0;
    for (std::int64_t k = norm_lo_; k < norm_hi_; ++k) {
        Integer b;
        mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(k + n_ - 1), static_cast<unsigned long>(n_ - 1));
        per_shell += b;
    }
    return per_shell.get_d() * static_cast<double>(shells_);
}

double SlabCover::upper_bound() const
{
    return std::pow(kSlabConstant, n_) * std::pow(eps_, -(n_ + 1)) * (1 + std::log(c2_ / c1_));
}

bool SlabCover::contains(long m, std::vector<std::int64_t> const & y) const
{
    if (m < 0 || m >= shells_ || static_cast<int>(y.size()) != n_)
        return false;
    std::int64_t s = 0;
    for (auto v : y) {
        if (v < 0)
            return false;
        s += v;
    }
    return s >= norm_lo_ && s < norm_hi_;
}

std::pair<long, std::vector<std::int64_t>> SlabCover::assign(std::vector<double> const & x) const
{
    if (static_cast<int>(x.size()) != n_)
        throw DomainError("assign: dimension mismatch");
    long double norm = 0;
    for (double v : x) {
        if (v < 0)
            throw DomainError("assign: point outside the orthant");
        norm += v;
    }
    long double step = std::log1p(static_cast<long double>(half_));
    long m = static_cast<long>(std::floor(std::log(norm / c1_) / step));
    // repair rounding so that c1 (1 + e)^m <= |x| < c1 (1 + e)^(m + 1)
    while (m > 0 && c1_ * std::pow(1.0L + half_, m) > norm)
        --m;
    while (c1_ * std::pow(1.0L + half_, m + 1) <= norm)
        ++m;
    long double unit = c1_ * static_cast<long double>(half_) * std::pow(1.0L + half_, m);
    std::vector<std::int64_t> y;
    for (double v : x)
        y.push_back(static_cast<std::int64_t>(std::floor(n_ * static_cast<long double>(v) / unit)));
    return {m, y};
}

std::vector<double> SlabCover::point(long m, std::vector<std::int64_t> const & y) const
{
    double s = scale(m);
    std::vector<double> p;
    for (auto v : y)
        p.push_back(s * static_cast<double>(v));
    return p;
}

std::vector<std::vector<double>> SlabCover::enumerate() const
{
    std::vector<std::vector<double>> out;
    std::vector<std::int64_t> y(static_cast<std::size_t>(n_), 0);
    // all y >= 0 with |y|_1 < norm_hi, filtered by the lower bound
    std::function<void(int, std::int64_t)> rec = [&](int i, std::int64_t left) {
        if (i == n_ - 1) {
            for (std::int64_t v = 0; v < left; ++v) {
                y[static_cast<std::size_t>(i)] = v;
                std::int64_t s = 0;
                for (auto t : y)
                    s += t;
                if (s >= norm_lo_)
                    for (long m = 0; m < shells_; ++m)
                        out.push_back(point(m, y));
            }
            return;
        }
        for (std::int64_t v = 0; v < left; ++v) {
            y[static_cast<std::size_t>(i)] = v;
            rec(i + 1, left - v);
        }
    };
    rec(0, norm_hi_);
    return out;
}

SlabCover cover_slab(int n, double c1, double c2, double eps)
{
    return SlabCover(n, c1, c2, eps);
}

}  // namespace qortho
