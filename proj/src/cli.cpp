#include "qortho/cli.hpp"

#include "qortho/classgroup.hpp"
#include "qortho/curve.hpp"
#include "qortho/experiments.hpp"
#include "qortho/heights.hpp"
#include "qortho/packing.hpp"
#include "qortho/partitions.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace qortho {

namespace {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class CacheMismatch : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---- value conversion -----------------------------------------------------------------------------

json num(Integer const & n)
{
    if (n.fits_slong_p())
        return n.get_si();
    return n.get_str();
}

json num(Rational const & q)
{
    if (q.get_den() == 1)
        return num(Integer(q.get_num()));
    return q.get_str();
}

json num(Real const & r) { return r.convert_to<double>(); }

std::string point_text(CurvePoint const & p)
{
    if (p.is_origin())
        return "O";
    return "(" + p.x().get_str() + "," + p.y().get_str() + ")";
}

std::string curve_text(EllipticCurve const & e)
{
    std::string s = "[";
    for (std::size_t i = 0; i < 5; ++i)
        s += (i ? "," : "") + e.coefficients()[i].get_str();
    return s + "]";
}

std::vector<std::string> split(std::string const & s, char sep)
{
    std::vector<std::string> out;
    if (s.empty())
        return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    return out;
}

Integer parse_integer(std::string const & s)
{
    Integer n;
    if (s.empty() || n.set_str(s, 10) != 0)
        throw CLI::ValidationError("not an integer: " + s);
    return n;
}

Rational parse_rational(std::string const & s)
{
    Rational q;
    if (s.empty() || q.set_str(s, 10) != 0)
        throw CLI::ValidationError("not a rational number: " + s);
    q.canonicalize();
    return q;
}

EllipticCurve parse_curve(std::string const & s)
{
    auto parts = split(s, ',');
    if (parts.size() != 5)
        throw CLI::ValidationError("a curve is given as a1,a2,a3,a4,a6");
    return EllipticCurve(parse_integer(parts[0]), parse_integer(parts[1]), parse_integer(parts[2]),
                         parse_integer(parts[3]), parse_integer(parts[4]));
}

CurvePoint parse_point(std::string const & s)
{
    auto parts = split(s, ',');
    if (parts.size() != 2)
        throw CLI::ValidationError("a point is given as x,y");
    return CurvePoint(parse_rational(parts[0]), parse_rational(parts[1]));
}

std::vector<Integer> parse_primes(std::string const & s)
{
    std::vector<Integer> out;
    for (auto const & p : split(s, ','))
        out.push_back(parse_integer(p));
    return out;
}

// ---- documents ------------------------------------------------------------------------------------

struct Report {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
    json summary = json::object();
    json constants = json::array();
};

void add_constant(Report & r, std::string const & name, json value, std::string const & provenance)
{
    r.constants.push_back({{"name", name}, {"value", std::move(value)}, {"provenance", provenance}});
}

json config_json(RunConfig const & c)
{
    return {{"precision", c.precision},
            {"eps", c.eps},
            {"kappa", c.kappa},
            {"rank_a", c.rank_a},
            {"rank_b", c.rank_b},
            {"bound_constant", c.bound_constant},
            {"caps", {{"x", c.x_factor}, {"y", c.y_factor}, {"delta", c.delta_factor}}},
            {"format", c.format}};
}

void emit(Report const & r, RunConfig const & c, std::ostream & out)
{
    if (c.format == "csv") {
        for (std::size_t i = 0; i < r.columns.size(); ++i)
            out << (i ? "," : "") << r.columns[i];
        out << "\n";
        for (auto const & row : r.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::string cell = row[i].is_string() ? row[i].get<std::string>() : row[i].dump();
                if (cell.find_first_of(",\"\n") != std::string::npos) {
                    std::string quoted = "\"";
                    for (char ch : cell)
                        quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                    cell = quoted + "\"";
                }
                out << (i ? "," : "") << cell;
            }
            out << "\n";
        }
        return;
    }
    json doc;
    doc["tool"] = "qortho";
    doc["version"] = kToolVersion;
    doc["command"] = r.command;
    doc["config"] = config_json(c);
    doc["constants"] = r.constants;
    doc["columns"] = r.columns;
    json rows = json::array();
    for (auto const & row : r.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size(); ++i)
            o[r.columns[i]] = row[i];
        rows.push_back(std::move(o));
    }
    doc["rows"] = std::move(rows);
    doc["summary"] = r.summary;
    out << doc.dump(2) << "\n";
}

// ---- cache ----------------------------------------------------------------------------------------

class Cache {
  public:
    Cache(std::string dir, std::string const & command, bool verify) : dir_(std::move(dir)), verify_(verify)
    {
        if (dir_.empty())
            return;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec)
            throw IoError("cannot create cache directory " + dir_);
        path_ = (std::filesystem::path(dir_) / (command + ".jsonl")).string();
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            auto rec = json::parse(line, nullptr, false);
            if (rec.is_discarded() || !rec.contains("key") || !rec.contains("value"))
                throw IoError("corrupt cache record in " + path_);
            entries_[rec["key"].get<std::string>()] = rec["value"].dump();
        }
    }

    bool enabled() const { return !dir_.empty(); }

    /// Cached value or a fresh computation; hits are recomputed and compared in verify mode.
    json get(std::string const & key, std::function<json()> const & compute, std::vector<std::pair<std::string, json>> & fresh)
    {
        if (!enabled())
            return compute();
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            json v = compute();
            fresh.emplace_back(key, v);
            return v;
        }
        ++hits_;
        if (verify_) {
            std::string again = compute().dump();
            if (again != it->second)
                throw CacheMismatch("cache entry differs from recomputation: " + key);
            ++verified_;
        }
        return json::parse(it->second);
    }

    void append(std::vector<std::pair<std::string, json>> const & fresh)
    {
        if (!enabled() || fresh.empty())
            return;
        std::ofstream outf(path_, std::ios::app);
        if (!outf)
            throw IoError("cannot write cache file " + path_);
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::ostringstream ts;
        ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
        for (auto const & [key, value] : fresh) {
            json rec{{"key", key}, {"value", value}, {"version", kToolVersion}, {"timestamp", ts.str()}};
            outf << rec.dump() << "\n";
            entries_[key] = value.dump();
        }
        if (!outf)
            throw IoError("cannot write cache file " + path_);
    }

    long hits() const { return hits_; }
    long verified() const { return verified_; }

  private:
    std::string dir_, path_;
    bool verify_;
    std::map<std::string, std::string> entries_;
    std::atomic<long> hits_{0}, verified_{0};
};

/// Runs f(i) for i in [0, n) on a worker pool; results are stored by index, so order is input order.
void parallel_for(std::size_t n, int jobs, std::function<void(std::size_t)> const & f)
{
    std::size_t workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto & t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

std::string caps_key(RunConfig const & c)
{
    std::ostringstream s;
    s << std::setprecision(17) << c.x_factor << "," << c.y_factor << "," << c.delta_factor;
    return s.str();
}

FredCaps caps_of(RunConfig const & c) { return {c.x_factor, c.y_factor, c.delta_factor}; }

bool fundamental_negative(long d) { return field_discriminant(Integer(-d)) == -d; }

std::vector<long> discriminant_range(long d, long from, long to)
{
    std::vector<long> out;
    if (d > 0) {
        from = d;
        to = d;
    }
    for (long v = std::max(3L, from); v <= to; ++v) {
        long r = v % 4;
        if (r != 0 && r != 3)
            continue;
        if (fundamental_negative(v))
            out.push_back(v);
    }
    return out;
}

// ---- commands -------------------------------------------------------------------------------------

Report cmd_constants(RunConfig const & c)
{
    Report r;
    r.command = "constants";
    r.columns = {"name", "value", "error", "reference", "tolerance", "within", "provenance"};
    auto table = compute_exponent_table(c.precision);
    for (auto const & e : table.entries) {
        r.rows.push_back({e.name, e.value, e.error, e.reference, e.reference_tol,
                          std::fabs(e.value - e.reference) <= e.reference_tol, e.provenance});
        add_constant(r, e.name + "_reference", e.reference, "published");
    }
    r.summary["precision_bits"] = table.precision_bits;
    r.summary["lambda_residual"] = table.lambda_residual;
    r.summary["lambda_iterates"] = table.lambda_iterates;
    r.summary["alpha_argmin_at_lambda"] = table.alpha_argmin_at_lambda;
    return r;
}

Report cmd_h3(RunConfig const & c, long d, long from, long to, std::ostream & err)
{
    Report r;
    r.command = "h3";
    r.columns = {"D", "h", "h3", "three_rank", "fred_count", "scholz_ok"};
    auto ds = discriminant_range(d, from, to);
    Cache cache(c.cache_dir, "h3", c.verify_cache);
    std::vector<json> rows(ds.size());
    std::vector<std::vector<std::pair<std::string, json>>> fresh(ds.size());
    FredCaps caps = caps_of(c);
    parallel_for(ds.size(), c.jobs, [&](std::size_t i) {
        long v = ds[i];
        std::string key = "h3|D=" + std::to_string(v) + "|caps=" + caps_key(c);
        rows[i] = cache.get(key, [&] {
            auto g = class_group(Integer(-v));
            long n3 = h3(g);
            int rank = 0;
            for (long k = n3; k > 1; k /= 3)
                ++rank;
            auto fred = fred_solutions_exhaustive(Integer(v), caps);
            auto sch = scholz_check(Integer(v));
            return json::array({v, g.h(), n3, rank, fred.size(), sch.ok});
        }, fresh[i]);
    });
    std::vector<std::pair<std::string, json>> all;
    for (auto & f : fresh)
        all.insert(all.end(), f.begin(), f.end());
    cache.append(all);
    for (auto const & row : rows)
        r.rows.push_back(std::vector<json>(row.begin(), row.end()));
    r.summary["discriminants"] = ds.size();
    add_constant(r, "caps", {c.x_factor, c.y_factor, c.delta_factor}, "configured");
    if (cache.enabled())
        err << "cache: " << cache.hits() << " hits, " << all.size() << " new"
            << (c.verify_cache ? ", " + std::to_string(cache.verified()) + " verified" : "") << "\n";
    return r;
}

Report cmd_mordell_points(RunConfig const & c, Integer const & k, Integer const & bound, std::string const & primes)
{
    Report r;
    r.command = "mordell-points";
    r.columns = {"x", "y", "canonical_height", "torsion"};
    EllipticCurve e(0, 0, 0, 0, k);
    std::vector<CurvePoint> pts = primes.empty() ? integral_points_bounded(e, bound)
                                                 : mordell_s_integral_points(k, parse_primes(primes), bound);
    HeightEngine engine(e, c.precision);
    for (auto const & p : pts)
        r.rows.push_back({num(p.x()), num(p.y()), num(engine.canonical_height(p)), is_torsion(e, p).torsion});
    r.summary["curve"] = curve_text(e);
    r.summary["points"] = pts.size();
    r.summary["search"] = primes.empty() ? "integral, |x| <= bound" : "S-integral, naive height <= bound";
    return r;
}

Report cmd_heights(RunConfig const & c, EllipticCurve const & e, std::vector<std::string> const & points)
{
    Report r;
    r.command = "heights";
    r.columns = {"point", "canonical_height", "doubling_limit", "difference", "archimedean", "finite"};
    HeightEngine engine(e, c.precision);
    PrecisionScope scope(c.precision + 32);
    for (auto const & text : points) {
        CurvePoint p = parse_point(text);
        e.require_on_curve(p);
        Real h = engine.canonical_height(p, HeightMethod::local_sum);
        Real hd = engine.canonical_height(p, HeightMethod::doubling_limit);
        std::string finite;
        Real arch = 0;
        if (!p.is_origin()) {
            auto prof = engine.profile(p);
            arch = prof.archimedean;
            for (auto const & [q, v] : prof.finite) {
                std::ostringstream s;
                s << std::setprecision(15) << v.convert_to<double>();
                finite += (finite.empty() ? "" : ";") + q.get_str() + ":" + s.str();
            }
        }
        r.rows.push_back({point_text(p), num(h), num(hd), num(Real(abs(Real(h - hd)))), num(arch), finite});
    }
    r.summary["curve"] = curve_text(e);
    r.summary["minimal_model"] = curve_text(engine.minimal_curve());
    return r;
}

PlaceSetQ default_places(EllipticCurve const & e, std::string const & extra)
{
    auto primes = prime_divisors(e.discriminant());
    for (auto const & p : parse_primes(extra))
        if (std::find(primes.begin(), primes.end(), p) == primes.end())
            primes.push_back(p);
    std::sort(primes.begin(), primes.end());
    return PlaceSetQ(primes);
}

void require_slice_eps(RunConfig const & c)
{
    if (!(c.eps > 0 && c.eps < kMaxSliceEps))
        throw DomainError("--eps must lie in (0, 2/15) for slicing commands");
}

Report cmd_repulsion(RunConfig const & c, EllipticCurve const & e, Integer const & prime, Integer const & bound,
                     std::string const & places)
{
    require_slice_eps(c);
    Report r;
    r.command = "repulsion";
    r.columns = {"p1", "p2", "same_fiber", "valuation", "valuation_ok", "local_at_p", "local_ok", "same_slice",
                 "balanced", "hypotheses", "spacing_margin", "conclusion_margin", "angle_deg", "same_shell"};
    auto pts = integral_points_bounded(e, bound);
    auto s = default_places(e, places);
    auto rep = repulsion_check(e, s, prime, c.eps, pts, c.precision);
    auto opt = [](std::optional<Real> const & v) { return v ? num(*v) : json(nullptr); };
    for (auto const & pr : rep.pairs)
        r.rows.push_back({point_text(pr.p1), point_text(pr.p2), pr.same_fiber,
                          pr.same_fiber ? json(pr.valuation) : json(nullptr), pr.same_fiber ? json(pr.valuation_ok) : json(nullptr),
                          pr.same_fiber ? num(pr.local_at_p) : json(nullptr), pr.same_fiber ? json(pr.local_ok) : json(nullptr),
                          pr.same_slice, pr.balanced, pr.hypotheses, opt(pr.spacing_margin), opt(pr.conclusion_margin),
                          pr.angle_deg ? json(*pr.angle_deg) : json(nullptr), pr.same_shell});
    std::vector<std::string> sp;
    for (auto const & q : s.primes())
        sp.push_back(q.get_str());
    r.summary = {{"curve", curve_text(e)},
                 {"prime", num(prime)},
                 {"places", sp},
                 {"points", pts.size()},
                 {"pairs_examined", rep.pairs_examined},
                 {"same_fiber_pairs", rep.same_fiber_pairs},
                 {"valuation_failures", rep.valuation_failures},
                 {"local_failures", rep.local_failures},
                 {"hypothesis_pairs", rep.hypothesis_pairs},
                 {"conclusion_checked", rep.conclusion_checked},
                 {"conclusion_failures", rep.conclusion_failures},
                 {"spacing_failures", rep.spacing_failures},
                 {"angle_checked", rep.angle_checked},
                 {"angle_failures", rep.angle_failures},
                 {"angle_floor_deg", angle_floor_deg(c.eps)},
                 {"ok", rep.ok()}};
    add_constant(r, "eps", c.eps, "configured");
    add_constant(r, "margin_tolerance", 1e-6, "configured");
    return r;
}

Report cmd_fibers(RunConfig const &, EllipticCurve const & e, Integer const & prime, Integer const & bound)
{
    Report r;
    r.command = "fibers";
    r.columns = {"reduction", "size", "points"};
    auto pts = integral_points_bounded(e, bound);
    auto fp = reduction_fibers(e, pts, prime);
    for (auto const & [key, fiber] : fp.fibers) {
        std::string red = key.infinity ? "O" : "(" + key.x.get_str() + "," + key.y.get_str() + ")";
        std::string list;
        for (auto const & p : fiber)
            list += (list.empty() ? "" : ";") + point_text(p);
        r.rows.push_back({red, fiber.size(), list});
    }
    r.summary = {{"curve", curve_text(e)},
                 {"prime", num(prime)},
                 {"points", fp.point_count()},
                 {"fibers", fp.fibers.size()},
                 {"largest", fp.largest()}};
    return r;
}

Report cmd_conductor(RunConfig const & c, std::string const & primes, Integer const & cap)
{
    Report r;
    r.command = "conductor";
    r.columns = {"C", "x", "y", "kraus_direct", "curves", "models"};
    auto en = conductor_enumerate(parse_primes(primes), cap, c.jobs);
    for (auto const & cand : en.candidates) {
        std::set<std::array<Integer, 5>> distinct;
        std::string models;
        for (auto const & rc : cand.reconstructions)
            if (rc.curve && rc.support_ok && distinct.insert(rc.curve->coefficients()).second)
                models += (models.empty() ? "" : ";") + curve_text(*rc.curve);
        r.rows.push_back({num(cand.c), num(cand.point.x()), num(cand.point.y()), cand.kraus_direct, distinct.size(), models});
    }
    long worst = 0;
    for (auto const & [k, n] : en.multiplicity())
        worst = std::max(worst, n);
    std::vector<json> none;
    for (auto const & v : en.c_without_points)
        none.push_back(num(v));
    std::vector<std::string> ps;
    for (auto const & p : en.primes)
        ps.push_back(p.get_str());
    r.summary = {{"primes", ps},
                 {"height_cap", num(cap)},
                 {"c_values", en.c_values.size()},
                 {"candidates", en.candidates.size()},
                 {"curves", en.curves().size()},
                 {"largest_curve_multiplicity", worst},
                 {"largest_point_fiber", en.largest_point_fiber()},
                 {"fiber_bound", en.fiber_bound()},
                 {"none_within_cap", none}};
    add_constant(r, "fiber_bound", en.fiber_bound(), "published");
    return r;
}

Report cmd_classbound(RunConfig const & c, long d, long from, long to, double slack, std::ostream & err)
{
    Report r;
    r.command = "classbound";
    r.columns = {"D", "h3", "aggregate", "max_nonsingular", "bound_value", "h3_within", "height_failures",
                 "exponent", "exponent_nonsingular"};
    auto ds = discriminant_range(d, from, to);
    Cache cache(c.cache_dir, "classbound", c.verify_cache);
    std::vector<std::pair<std::string, json>> fresh;
    FredCaps caps = caps_of(c);
    double worst = 0;
    for (long v : ds) {
        std::ostringstream key;
        key << "classbound|D=" << v << "|caps=" << caps_key(c) << "|slack=" << std::setprecision(17) << slack
            << "|bits=" << c.precision;
        json row = cache.get(key.str(), [&] {
            auto rep = classbound_pipeline(Integer(v), caps, slack, c.precision);
            return json::array({v, rep.h3, rep.aggregate, rep.max_nonsingular, rep.bound_value, rep.h3_within,
                                rep.height_failures, rep.exponent, rep.exponent_nonsingular});
        }, fresh);
        worst = std::max(worst, row[7].get<double>());
        r.rows.push_back(std::vector<json>(row.begin(), row.end()));
    }
    cache.append(fresh);
    r.summary = {{"discriminants", ds.size()}, {"worst_exponent", worst}, {"exponent_reference", 0.44178}};
    add_constant(r, "height_slack", slack, "configured");
    add_constant(r, "lambda_reference", 0.44178, "published");
    add_constant(r, "caps", {c.x_factor, c.y_factor, c.delta_factor}, "configured");
    if (cache.enabled())
        err << "cache: " << cache.hits() << " hits, " << fresh.size() << " new\n";
    return r;
}

Report cmd_cover(RunConfig const & c, int n, double c1, double c2, long samples, unsigned long seed)
{
    Report r;
    r.command = "cover";
    r.columns = {"n", "c1", "c2", "eps", "shells", "count", "upper_bound", "within_bound", "samples", "misses"};
    SlabCover cover = cover_slab(n, c1, c2, c.eps);
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long misses = 0;
    for (long s = 0; s < samples; ++s) {
        std::vector<double> x(static_cast<std::size_t>(n));
        double total = 0;
        for (auto & v : x) {
            v = expo(gen);
            total += v;
        }
        double radius = c1 * std::exp(unit(gen) * std::log(c2 / c1));
        for (auto & v : x)
            v *= radius / total;
        if (l1_norm(x) >= c2 || l1_norm(x) < c1)
            continue;
        auto [m, y] = cover.assign(x);
        auto p = cover.point(m, y);
        if (!cover.contains(m, y) || l1_distance(x, p) > c.eps * l1_norm(p))
            ++misses;
    }
    r.rows.push_back({n, c1, c2, c.eps, cover.shells(), cover.count(), cover.upper_bound(),
                      cover.count() <= cover.upper_bound(), samples, misses});
    r.summary = {{"misses", misses}, {"seed", seed}};
    add_constant(r, "slab_constant", kSlabConstant, "computed");
    return r;
}

}  // namespace

RunConfig::RunConfig() : bound_constant(kSlabConstant) {}

void RunConfig::validate() const
{
    if (precision < 64)
        throw DomainError("--precision must be at least 64 bits");
    if (!(eps > 0 && eps < 1))
        throw DomainError("--eps must lie in (0, 1)");
    if (!(kappa > 0 && kappa < 1))
        throw DomainError("--kappa must lie in (0, 1)");
    if (x_factor < 1 || y_factor < 1 || delta_factor < 1)
        throw DomainError("caps multipliers must be at least 1");
    if (format != "csv" && format != "structured")
        throw DomainError("--format must be csv or structured");
    if (jobs < 1)
        throw DomainError("--jobs must be positive");
}

int run_cli(std::vector<std::string> const & args, std::ostream & out, std::ostream & err)
{
    RunConfig cfg;
    CLI::App app{"qortho: heights, slicing, class groups and point counts on elliptic curves", "qortho"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--precision", cfg.precision, "working precision in bits (>= 64)");
    app.add_option("--eps", cfg.eps, "slicing / covering parameter");
    app.add_option("--kappa", cfg.kappa, "height-floor parameter");
    app.add_option("--rank-a", cfg.rank_a, "constant A of the rank bound");
    app.add_option("--rank-b", cfg.rank_b, "constant B of the rank bound");
    app.add_option("--x-cap", cfg.x_factor, "multiplier of sqrt(D) in the x cap");
    app.add_option("--y-cap", cfg.y_factor, "multiplier of D^(3/4) in the y cap");
    app.add_option("--delta-cap", cfg.delta_factor, "multiplier of D^(1/4) in the delta cap");
    app.add_option("--jobs", cfg.jobs, "worker threads for exact batch work");
    app.add_option("--cache-dir", cfg.cache_dir, std::string("cache directory (default: $") + kCacheDirEnv + ")");
    app.add_option("--format", cfg.format, "csv or structured")->check(CLI::IsMember({"csv", "structured"}));
    app.add_flag("--verify-cache", cfg.verify_cache, "recompute cache hits and compare bytes");

    std::function<Report()> action;
    std::string curve_s, places, primes_s;
    std::vector<std::string> points;
    std::string prime_s, bound_s = "10000", k_s, cap_s = "10000";
    long d = 0, from = 0, to = -1, samples = 10000;
    double slack = 5, c1 = 1, c2 = 10;
    int n = 2;
    unsigned long seed = 1;

    auto * constants = app.add_subcommand("constants", "exponent table with tolerances and iterates");
    constants->callback([&] { action = [&] { return cmd_constants(cfg); }; });

    auto * h3c = app.add_subcommand("h3", "class numbers, 3-torsion, Fred counts and Scholz checks");
    h3c->add_option("--d", d, "single D (the field Q(sqrt(-D)))");
    h3c->add_option("--from", from, "range start");
    h3c->add_option("--to", to, "range end");
    h3c->callback([&] { action = [&] { return cmd_h3(cfg, d, from, to, err); }; });

    auto * mp = app.add_subcommand("mordell-points", "points on y^2 = x^3 + k");
    mp->add_option("--k", k_s, "the constant k")->required();
    mp->add_option("--bound", bound_s, "|x| bound, or naive height cap with --primes");
    mp->add_option("--primes", primes_s, "comma-separated primes for S-integral points");
    mp->callback([&] {
        action = [&] { return cmd_mordell_points(cfg, parse_integer(k_s), parse_integer(bound_s), primes_s); };
    });

    auto * hc = app.add_subcommand("heights", "canonical and local heights");
    hc->add_option("--curve", curve_s, "a1,a2,a3,a4,a6")->required();
    hc->add_option("--point", points, "x,y (repeatable)")->required();
    hc->callback([&] { action = [&] { return cmd_heights(cfg, parse_curve(curve_s), points); }; });

    auto * rc = app.add_subcommand("repulsion", "pairwise repulsion report on integral points");
    rc->add_option("--curve", curve_s, "a1,a2,a3,a4,a6")->required();
    rc->add_option("--prime", prime_s, "prime of good reduction")->required();
    rc->add_option("--bound", bound_s, "|x| bound for the integral points");
    rc->add_option("--places", places, "extra primes for S");
    rc->callback([&] {
        action = [&] { return cmd_repulsion(cfg, parse_curve(curve_s), parse_integer(prime_s), parse_integer(bound_s), places); };
    });

    auto * fc = app.add_subcommand("fibers", "fibers of reduction modulo a prime");
    fc->add_option("--curve", curve_s, "a1,a2,a3,a4,a6")->required();
    fc->add_option("--prime", prime_s, "prime of good reduction")->required();
    fc->add_option("--bound", bound_s, "|x| bound for the integral points");
    fc->callback([&] {
        action = [&] { return cmd_fibers(cfg, parse_curve(curve_s), parse_integer(prime_s), parse_integer(bound_s)); };
    });

    auto * cc = app.add_subcommand("conductor", "curves with good reduction outside S u {2,3}");
    cc->add_option("--primes", primes_s, "comma-separated primes of S (may be empty)");
    cc->add_option("--cap", cap_s, "naive height cap for the point search");
    cc->callback([&] { action = [&] { return cmd_conductor(cfg, primes_s, parse_integer(cap_s)); }; });

    auto * cb = app.add_subcommand("classbound", "3-torsion pipeline through the cubic identity");
    cb->add_option("--d", d, "single D");
    cb->add_option("--from", from, "range start");
    cb->add_option("--to", to, "range end");
    cb->add_option("--height-slack", slack, "additive slack c_h in the height cap");
    cb->callback([&] { action = [&] { return cmd_classbound(cfg, d, from, to, slack, err); }; });

    auto * cv = app.add_subcommand("cover", "l1 slab cover with random coverage samples");
    cv->add_option("--n", n, "dimension")->required();
    cv->add_option("--c1", c1, "inner radius")->required();
    cv->add_option("--c2", c2, "outer radius")->required();
    cv->add_option("--samples", samples, "number of random samples");
    cv->add_option("--seed", seed, "sampler seed");
    cv->callback([&] { action = [&] { return cmd_cover(cfg, n, c1, c2, samples, seed); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const &) {
        out << app.help();
        return kExitOk;
    } catch (CLI::CallForAllHelp const &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (CLI::ParseError const & e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    }

    try {
        if (cfg.cache_dir.empty())
            if (char const * env = std::getenv(kCacheDirEnv))
                cfg.cache_dir = env;
        cfg.validate();
        Report r = action();
        emit(r, cfg, out);
        if (!out)
            throw IoError("cannot write output");
        return kExitOk;
    } catch (CLI::ValidationError const & e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (PrecisionExhausted const & e) {
        err << "precision exhausted: " << e.what() << "\n";
        return kExitPrecision;
    } catch (DomainError const & e) {
        err << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (IoError const & e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (CacheMismatch const & e) {
        err << "cache verification failed: " << e.what() << "\n";
        return kExitCacheMismatch;
    } catch (std::exception const & e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace qortho
