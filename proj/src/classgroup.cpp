#include "qortho/classgroup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>

namespace qortho {

namespace {

Integer gcd3(Integer const & a, Integer const & b, Integer const & c)
{
    Integer g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    return g;
}

// Floor division and non-negative remainder.
Integer fdiv(Integer const & a, Integer const & b)
{
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

Integer fmod(Integer const & a, Integer const & m)
{
    Integer r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()); // 0 <= r < |m|
    return r;
}

void gcdext(Integer const & a, Integer const & b, Integer & g, Integer & u, Integer & v)
{
    mpz_gcdext(g.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
}

void check_discriminant(Integer const & disc)
{
    Integer r = fmod(disc, 4);
    if (disc == 0 || (r != 0 && r != 1))
        throw DomainError("discriminant must be nonzero and 0 or 1 mod 4");
}

}  // namespace

bool QuadraticForm::primitive() const
{
    return gcd3(a, b, c) == 1;
}

bool QuadraticForm::is_reduced() const
{
    if (!(a > 0) || discriminant() >= 0)
        return false;
    Integer ab = abs(b);
    if (ab > a || a > c)
        return false;
    if ((ab == a || a == c) && b < 0)
        return false;
    return true;
}

bool operator<(QuadraticForm const & f, QuadraticForm const & g)
{
    if (f.a != g.a)
        return f.a < g.a;
    if (f.b != g.b)
        return f.b < g.b;
    return f.c < g.c;
}

std::ostream & operator<<(std::ostream & os, QuadraticForm const & f)
{
    return os << "(" << f.a << ", " << f.b << ", " << f.c << ")";
}

QuadraticForm principal_form(Integer const & disc)
{
    check_discriminant(disc);
    Integer b = fmod(disc, 2);
    Integer c = (b * b - disc) / 4;
    return {Integer(1), b, c};
}

QuadraticForm reduce_form(QuadraticForm const & f)
{
    Integer disc = f.discriminant();
    if (disc >= 0 || !(f.a > 0))
        throw DomainError("reduce_form: form is not positive definite");
    if (!f.primitive())
        throw DomainError("reduce_form: form is not primitive");
    Integer a = f.a, b = f.b, c = f.c;
    for (;;) {
        // b into (-a, a]
        Integer k = fdiv(a - b, 2 * a);
        b += 2 * a * k;
        c = (b * b - disc) / (4 * a);
        if (a > c) {
            std::swap(a, c);
            b = -b;
            continue;
        }
        break;
    }
    if (a == c && b < 0)
        b = -b;
    return {a, b, c};
}

namespace {

// Dirichlet composition for forms with positive leading coefficients; not reduced.
QuadraticForm compose_raw(QuadraticForm f, QuadraticForm g)
{
    if (f.a > g.a)
        std::swap(f, g);
    Integer const & a1 = f.a;
    Integer const & a2 = g.a;
    Integer s = (f.b + g.b) / 2;
    Integer n = g.b - s;
    Integer y1, d;
    if (fmod(a2, a1) == 0) {
        y1 = 0;
        d = a1;
    } else {
        Integer u, v;
        gcdext(a2, a1, d, u, v);
        y1 = u;
    }
    Integer x2, y2, d1;
    if (fmod(s, d) == 0) {
        y2 = -1;
        x2 = 0;
        d1 = d;
    } else {
        Integer u, v;
        gcdext(s, d, d1, u, v);
        x2 = u;
        y2 = -v;
    }
    Integer v1 = a1 / d1, v2 = a2 / d1;
    Integer r = fmod(y1 * y2 * n - x2 * g.c, v1);
    Integer b3 = g.b + 2 * v2 * r;
    Integer a3 = v1 * v2;
    Integer c3 = (g.c * d1 + r * (g.b + v2 * r)) / v1;
    QuadraticForm out{a3, b3, c3};
    if (out.discriminant() != f.discriminant())
        throw std::logic_error("composition produced the wrong discriminant");
    return out;
}

bool lt_sqrt(Integer const & x, Integer const & disc) // x < sqrt(disc), disc > 0 non-square
{
    return x < 0 || x * x < disc;
}

// An equivalent indefinite form with a > 0.
QuadraticForm positive_leading(QuadraticForm f)
{
    for (int guard = 0; !(f.a > 0); ++guard) {
        if (guard > 100000)
            throw std::logic_error("no positive leading coefficient found");
        f = rho(f);
    }
    return f;
}

}  // namespace

QuadraticForm compose(QuadraticForm const & f, QuadraticForm const & g)
{
    Integer disc = f.discriminant();
    if (disc != g.discriminant())
        throw DomainError("compose: discriminant mismatch");
    if (!f.primitive() || !g.primitive())
        throw DomainError("compose: forms must be primitive");
    if (disc < 0)
        return reduce_form(compose_raw(f, g));
    return compose_raw(positive_leading(f), positive_leading(g));
}

QuadraticForm power(QuadraticForm const & f, long n)
{
    Integer disc = f.discriminant();
    QuadraticForm base = n < 0 ? f.inverse() : f;
    unsigned long e = static_cast<unsigned long>(n < 0 ? -n : n);
    QuadraticForm acc = principal_form(disc);
    if (disc < 0)
        base = reduce_form(base);
    while (e) {
        if (e & 1)
            acc = compose(acc, base);
        e >>= 1;
        if (e)
            base = compose(base, base);
    }
    return acc;
}

std::vector<QuadraticForm> reduced_forms(Integer const & disc)
{
    check_discriminant(disc);
    if (disc >= 0)
        throw DomainError("reduced_forms: discriminant must be negative");
    Integer ad = -disc;
    std::vector<QuadraticForm> out;
    for (Integer a = 1; 3 * a * a <= ad; ++a)
        for (Integer b = -a + 1; b <= a; ++b) {
            if (fmod(b - disc, 2) != 0)
                continue;
            Integer num = b * b - disc;
            if (fmod(num, 4 * a) != 0)
                continue;
            Integer c = num / (4 * a);
            if (c < a || (c == a && b < 0))
                continue;
            QuadraticForm f{a, b, c};
            if (f.primitive())
                out.push_back(f);
        }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- group structure ------------------------------------------------------------------------

long ClassGroupStructure::order(QuadraticForm const & f) const
{
    QuadraticForm id = principal_form(discriminant);
    QuadraticForm g = reduce_form(f);
    QuadraticForm x = g;
    long k = 1;
    while (!(x == id)) {
        x = compose(x, g);
        ++k;
        if (k > h())
            throw std::logic_error("order exceeds the class number");
    }
    return k;
}

ClassGroupStructure class_group(Integer const & disc, bool allow_nonfundamental)
{
    check_discriminant(disc);
    if (disc >= 0)
        throw DomainError("class_group: discriminant must be negative");
    if (!allow_nonfundamental && !is_fundamental_discriminant(disc))
        throw DomainError("class_group: discriminant is not fundamental");
    ClassGroupStructure g;
    g.discriminant = disc;
    g.forms = reduced_forms(disc);
    long h = g.h();
    std::map<QuadraticForm, int> index;
    for (int i = 0; i < static_cast<int>(g.forms.size()); ++i)
        index[g.forms[static_cast<std::size_t>(i)]] = i;

    // elementary divisors from #G[l^k] for each prime l | h
    std::map<long, std::vector<int>> exponents; // prime -> exponents, descending
    for (auto const & [p, e] : factor(Integer(h))) {
        long l = p.get_si();
        long full = 1;
        for (long i = 0; i < e; ++i)
            full *= l;
        std::vector<QuadraticForm> cur = g.forms;
        std::vector<long> count{1}; // #G[l^0]
        while (count.back() < full) {
            long c = 0;
            for (auto & x : cur) {
                x = power(x, l);
                if (index.at(x) == 0)
                    ++c;
            }
            count.push_back(c);
        }
        // r_k = number of cyclic factors of exponent >= k
        std::vector<int> r;
        for (std::size_t k = 1; k < count.size(); ++k) {
            long ratio = count[k] / count[k - 1];
            int rk = 0;
            while (ratio > 1) {
                ratio /= l;
                ++rk;
            }
            r.push_back(rk);
        }
        std::vector<int> ex;
        for (int j = 0; j < r.front(); ++j) {
            int ej = 0;
            for (int rk : r)
                if (rk > j)
                    ++ej;
            ex.push_back(ej);
        }
        exponents[l] = ex;
    }
    std::size_t rank = 0;
    for (auto const & [l, ex] : exponents)
        rank = std::max(rank, ex.size());
    g.invariants.assign(rank, 1);
    for (auto const & [l, ex] : exponents)
        for (std::size_t j = 0; j < ex.size(); ++j)
            for (int k = 0; k < ex[j]; ++k)
                g.invariants[rank - 1 - j] *= l;

    // greedy generating set, largest orders first
    std::vector<std::pair<long, int>> by_order;
    for (int i = 0; i < static_cast<int>(g.forms.size()); ++i)
        by_order.push_back({-g.order(g.forms[static_cast<std::size_t>(i)]), i});
    std::sort(by_order.begin(), by_order.end());
    std::vector<char> in_sub(g.forms.size(), 0);
    in_sub[0] = 1;
    std::vector<int> members{0};
    for (auto const & [neg_order, i] : by_order) {
        if (in_sub[static_cast<std::size_t>(i)])
            continue;
        QuadraticForm gen = g.forms[static_cast<std::size_t>(i)];
        g.generators.push_back(gen);
        std::vector<int> grown = members;
        QuadraticForm pw = gen;
        while (index.at(pw) != 0) {
            for (int m : members) {
                int k = index.at(compose(g.forms[static_cast<std::size_t>(m)], pw));
                if (!in_sub[static_cast<std::size_t>(k)]) {
                    in_sub[static_cast<std::size_t>(k)] = 1;
                    grown.push_back(k);
                }
            }
            pw = compose(pw, gen);
        }
        members = grown;
    }
    return g;
}

long h3(ClassGroupStructure const & g)
{
    QuadraticForm id = principal_form(g.discriminant);
    long n = 0;
    for (auto const & f : g.forms)
        if (power(f, 3) == id)
            ++n;
    return n;
}

long h3(Integer const & disc, bool allow_nonfundamental)
{
    return h3(class_group(disc, allow_nonfundamental));
}

namespace {

int log3_exact(long n)
{
    int r = 0;
    while (n % 3 == 0) {
        n /= 3;
        ++r;
    }
    if (n != 1)
        throw std::logic_error("3-torsion count is not a power of 3");
    return r;
}

}  // namespace

int three_rank(Integer const & disc, bool allow_nonfundamental)
{
    return log3_exact(h3(disc, allow_nonfundamental));
}

QuadraticForm minkowski_representative(QuadraticForm const & f)
{
    return reduce_form(f);
}

bool within_minkowski_bound(QuadraticForm const & f)
{
    // a <= sqrt(|disc| / 3)  <=>  3 a^2 <= |disc|
    return 3 * f.a * f.a <= abs(f.discriminant());
}

// ---- the cubic identity --------------------------------------------------------------------

bool FredSolution::satisfies_identity() const
{
    Rational lhs = Rational(n * n * n);
    return lhs == y * y + Rational(d) * delta * delta && Rational(2 * y).get_den() == 1 &&
           Rational(2 * delta).get_den() == 1;
}

bool FredSolution::within(FredCaps const & caps) const
{
    long double dd = d.get_d();
    long double yy = std::fabs(y.get_d()), de = std::fabs(delta.get_d());
    return n.get_d() <= caps.x_factor * std::sqrt(dd) && yy <= caps.y_factor * std::pow(dd, 0.75L) &&
           de <= caps.delta_factor * std::pow(dd, 0.25L);
}

bool operator==(FredSolution const & s, FredSolution const & t)
{
    return s.n == t.n && s.y == t.y && s.delta == t.delta && s.d == t.d;
}

bool same_up_to_sign(FredSolution const & s, FredSolution const & t)
{
    return s.n == t.n && s.d == t.d && abs(s.y) == abs(t.y) && abs(s.delta) == abs(t.delta);
}

namespace {

// Elements x + y w of the order of discriminant disc, w = (disc0 + sqrt(disc)) / 2.
struct Element {
    Integer x, y;
};

Element multiply(Element const & p, Element const & q, Integer const & disc)
{
    Integer d0 = fmod(disc, 2);
    Integer w2_const = (disc - d0) / 4; // w^2 = d0 w + w2_const
    Integer yy = p.y * q.y;
    return {p.x * q.x + yy * w2_const, p.x * q.y + p.y * q.x + yy * d0};
}

// Z-lattice in the (x, y) coordinates in Hermite form {(p, 0), (q, r)}.
struct Lattice {
    Integer p = 0, q = 0, r = 0;

    void add(Element const & e)
    {
        if (e.y == 0) {
            mpz_gcd(p.get_mpz_t(), p.get_mpz_t(), e.x.get_mpz_t());
        } else if (r == 0) {
            q = e.x;
            r = e.y;
            if (r < 0) {
                q = -q;
                r = -r;
            }
        } else {
            Integer g, u, v;
            gcdext(r, e.y, g, u, v);
            Integer nq = u * q + v * e.x;
            Integer kx = (e.y / g) * q - (r / g) * e.x; // combination with zero y
            q = nq;
            r = g;
            mpz_gcd(p.get_mpz_t(), p.get_mpz_t(), kx.get_mpz_t());
        }
        if (p != 0)
            q = fmod(q, p);
    }

    bool contains(Element const & e) const
    {
        if (r == 0)
            return e.y == 0 && (p == 0 ? e.x == 0 : fmod(e.x, p) == 0);
        if (fmod(e.y, r) != 0)
            return false;
        Integer rest = e.x - (e.y / r) * q;
        return p == 0 ? rest == 0 : fmod(rest, p) == 0;
    }

    std::vector<Element> basis() const { return {{p, 0}, {q, r}}; }
};

Lattice ideal_product(Lattice const & a, Lattice const & b, Integer const & disc)
{
    Lattice out;
    for (auto const & u : a.basis())
        for (auto const & v : b.basis())
            out.add(multiply(u, v, disc));
    return out;
}

}  // namespace

FredSolution fred_from_class(QuadraticForm const & f, Integer const & d)
{
    Integer disc = -d;
    if (f.discriminant() != disc)
        throw DomainError("fred_from_class: form discriminant is not -D");
    QuadraticForm g = reduce_form(f);
    if (!(power(g, 3) == principal_form(disc)))
        throw DomainError("fred_from_class: class is not 3-torsion");
    Integer n = g.a;
    Integer d0 = fmod(disc, 2);

    // the ideal [N, (-b + sqrt(disc)) / 2] = [N, (-b - d0)/2 + w] and its cube
    Lattice ideal;
    ideal.add({n, 0});
    ideal.add({(-g.b - d0) / 2, 1});
    Lattice cube = ideal_product(ideal_product(ideal, ideal, disc), ideal, disc);

    // norm(x + z w) = x^2 + d0 x z + (d0 - disc)/4 z^2 = N^3
    Integer n3 = n * n * n;
    Integer zmax = isqrt(4 * n3 / d) + 1;
    std::optional<FredSolution> best;
    auto better = [](FredSolution const & s, FredSolution const & t) {
        // smallest |delta|, then y > 0, then delta > 0
        return std::make_tuple(abs(s.delta), s.y < 0, s.delta < 0) <
               std::make_tuple(abs(t.delta), t.y < 0, t.delta < 0);
    };
    for (Integer z = -zmax; z <= zmax; ++z) {
        Integer disc_x = disc * z * z + 4 * n3;
        Integer s;
        if (disc_x < 0 || !is_square(disc_x, &s))
            continue;
        for (Integer sg : {s, Integer(-s)}) {
            Integer num = -d0 * z + sg;
            if (fmod(num, 2) != 0)
                continue;
            Element alpha{num / 2, z};
            if (!cube.contains(alpha))
                continue;
            FredSolution sol{n, Rational(alpha.x) + Rational(d0 * z, 2), Rational(z, 2), d};
            sol.y.canonicalize();
            sol.delta.canonicalize();
            if (!best || better(sol, *best))
                best = sol;
        }
    }
    if (!best)
        throw RepresentationNotFound("no generator of the cubed ideal found");
    return *best;
}

std::vector<FredSolution> fred_solutions_exhaustive(Integer const & d, FredCaps const & caps)
{
    if (!(d > 0))
        throw DomainError("fred_solutions_exhaustive: D must be positive");
    double dd = d.get_d();
    long xmax = static_cast<long>(std::floor(caps.x_factor * std::sqrt(dd)));
    long dmax2 = static_cast<long>(std::floor(2 * caps.delta_factor * std::pow(dd, 0.25)));
    double ymax2 = 2 * caps.y_factor * std::pow(dd, 0.75);
    std::vector<FredSolution> out;
    for (long x = 1; x <= xmax; ++x)
        for (long t = 0; t <= dmax2; ++t) { // t = 2 delta
            Integer rhs = 4 * Integer(x) * x * x - d * t * t; // (2y)^2
            Integer s;
            if (rhs < 0 || !is_square(rhs, &s) || s.get_d() > ymax2)
                continue;
            FredSolution sol{Integer(x), Rational(s, 2), Rational(t, 2), d};
            sol.y.canonicalize();
            sol.delta.canonicalize();
            out.push_back(sol);
        }
    return out;
}

// ---- indefinite forms ------------------------------------------------------------------------

bool is_reduced_indefinite(QuadraticForm const & f)
{
    Integer disc = f.discriminant();
    if (disc <= 0)
        return false;
    if (!(f.b > 0) || !lt_sqrt(f.b, disc))
        return false;
    Integer two_a = 2 * abs(f.a);
    // sqrt(disc) - b < 2|a| < sqrt(disc) + b
    return !lt_sqrt(two_a + f.b, disc) && lt_sqrt(two_a - f.b, disc);
}

QuadraticForm rho(QuadraticForm const & f)
{
    Integer disc = f.discriminant();
    if (disc <= 0 || is_square(disc))
        throw DomainError("rho: discriminant must be a positive non-square");
    Integer c_abs = abs(f.c);
    Integer m = 2 * c_abs;
    Integer r;
    if (!lt_sqrt(c_abs, disc)) {
        // -|c| < r <= |c|
        r = fmod(-f.b + c_abs - 1, m) - c_abs + 1;
    } else {
        // sqrt(disc) - 2|c| < r < sqrt(disc)
        Integer s = isqrt(disc);
        r = s - fmod(s + f.b, m);
    }
    return {f.c, r, (r * r - disc) / (4 * f.c)};
}

int IndefiniteClassGroup::class_of(QuadraticForm const & f) const
{
    QuadraticForm g = f;
    for (int guard = 0; !is_reduced_indefinite(g); ++guard) {
        if (guard > 100000)
            throw std::logic_error("indefinite reduction did not terminate");
        g = rho(g);
    }
    auto it = std::lower_bound(reduced.begin(), reduced.end(), g);
    if (it == reduced.end() || !(*it == g))
        throw std::logic_error("reduced form missing from the enumeration");
    return cycle_of[static_cast<std::size_t>(it - reduced.begin())];
}

IndefiniteClassGroup indefinite_class_group(Integer const & disc)
{
    check_discriminant(disc);
    if (disc <= 0 || is_square(disc))
        throw DomainError("indefinite_class_group: need a positive non-square discriminant");
    IndefiniteClassGroup g;
    g.discriminant = disc;
    Integer s = isqrt(disc);
    for (Integer b = 1; b <= s; ++b) {
        if (fmod(b - disc, 2) != 0)
            continue;
        Integer ac = (disc - b * b) / 4; // = -a c > 0
        for (Integer a = 1; a * a <= ac; ++a) {
            if (fmod(ac, a) != 0)
                continue;
            for (Integer aa : {a, Integer(ac / a)}) {
                for (int sign : {1, -1}) {
                    QuadraticForm f{aa * sign, b, -(ac / aa) * sign};
                    if (f.primitive() && is_reduced_indefinite(f))
                        g.reduced.push_back(f);
                }
                if (a * a == ac)
                    break;
            }
        }
    }
    std::sort(g.reduced.begin(), g.reduced.end());
    g.reduced.erase(std::unique(g.reduced.begin(), g.reduced.end()), g.reduced.end());
    g.cycle_of.assign(g.reduced.size(), -1);
    for (std::size_t i = 0; i < g.reduced.size(); ++i) {
        if (g.cycle_of[i] >= 0)
            continue;
        int id = static_cast<int>(g.representatives.size());
        QuadraticForm least = g.reduced[i];
        QuadraticForm f = g.reduced[i];
        do {
            auto it = std::lower_bound(g.reduced.begin(), g.reduced.end(), f);
            if (it == g.reduced.end() || !(*it == f))
                throw std::logic_error("rho left the set of reduced forms");
            g.cycle_of[static_cast<std::size_t>(it - g.reduced.begin())] = id;
            least = std::min(least, f);
            f = rho(f);
        } while (!(f == g.reduced[i]));
        g.representatives.push_back(least);
    }
    return g;
}

int three_rank_real(Integer const & disc)
{
    IndefiniteClassGroup g = indefinite_class_group(disc);
    Integer b = fmod(disc, 2);
    QuadraticForm principal{Integer(1), b, (b * b - disc) / 4};
    int id = g.class_of(principal);
    long n = 0;
    for (auto const & f : g.representatives) {
        QuadraticForm cube = compose(compose(f, f), f);
        if (g.class_of(cube) == id)
            ++n;
    }
    return log3_exact(n);
}

Integer field_discriminant(Integer const & m)
{
    if (m == 0)
        throw DomainError("field_discriminant: m = 0");
    Integer core = m < 0 ? Integer(-1) : Integer(1);
    for (auto const & [p, e] : factor(m))
        if (e % 2 == 1)
            core *= p;
    if (core == 1)
        throw DomainError("field_discriminant: m is a square");
    return fmod(core, 4) == 1 ? core : Integer(4 * core);
}

ScholzReport scholz_check(Integer const & d)
{
    if (!(d > 0) || !is_fundamental_discriminant(Integer(-d)))
        throw DomainError("scholz_check: -D must be a fundamental discriminant");
    ScholzReport r;
    r.d = d;
    r.r_minus = three_rank(Integer(-d));
    if (is_square(Integer(3 * d))) {
        r.real_disc = 1; // Q(sqrt(3D)) = Q
        r.r_plus = 0;
    } else {
        r.real_disc = field_discriminant(Integer(3 * d));
        r.r_plus = three_rank_real(r.real_disc);
    }
    r.ok = r.r_plus <= r.r_minus && r.r_minus <= r.r_plus + 1;
    return r;
}

}  // namespace qortho
