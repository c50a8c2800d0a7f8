#include "wct/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace wct {

Profile parse_profile(const std::string& s) {
    if (s == "faithful") return Profile::faithful;
    if (s == "practical") return Profile::practical;
    throw DomainError("unknown profile '" + s + "'");
}

std::string to_string(Profile p) { return p == Profile::faithful ? "faithful" : "practical"; }

int64_t ParamPack::inv_delta() const { return static_cast<int64_t>(std::llround(1.0 / delta)); }

namespace {

constexpr int64_t kPracticalXi = 2;
constexpr int64_t kPracticalZetas = 7;

int64_t inv_ceil(double x) { return static_cast<int64_t>(std::ceil(x - 1e-12)); }

}  // namespace

ParamPack make_params_for_delta(double delta, Profile profile, bool release, int ell) {
    ParamPack p;
    p.delta = delta;
    p.profile = profile;
    p.release = release;
    const double inv = 1.0 / delta;
    if (std::fabs(inv - std::round(inv)) > 1e-9) throw DomainError("1/delta must be an integer");
    Geo geo(delta);
    if (ell < 0) ell = (release && profile == Profile::faithful) ? 25 : 3;
    p.ell = ell;

    // xi = ceil(ell * log_{1+d}(1/d)), exact against the power test.
    const double target = std::pow(inv, ell);
    p.xi = geo.ceil_log(target);

    if (profile == Profile::faithful) {
        double zc = std::pow(inv, ell + 1);
        p.zeta_count_real = zc;
        if (zc < 9.0e18) p.zeta_count = static_cast<int64_t>(std::llround(zc));
        double yr = static_cast<double>(p.xi) * zc - static_cast<double>(p.xi) - 1.0;
        p.y_real = yr;
        p.y = yr < 9.0e18 ? static_cast<int64_t>(yr) : std::numeric_limits<int64_t>::max();
        p.y_floored = false;  // xi * zeta_count is an integer product here
        p.gamma = std::exp(12.0 * std::log(delta) - yr * geo.log_base());
        p.g_exact = false;
        p.g_log10 = std::pow(inv, 300.0) * std::log10(inv);
        p.g_delta = std::numeric_limits<int64_t>::min() / 4;
        p.f_delta = p.g_delta - inv_ceil(2.0 / (delta * delta));
        if (release) {
            p.y_hat = static_cast<double>(p.xi) * zc;
            p.alpha = p.y_hat / std::pow(delta, 34);
        }
    } else {
        p.xi = std::min<int64_t>(p.xi, kPracticalXi);
        p.zeta_count = kPracticalZetas;
        p.zeta_count_real = kPracticalZetas;
        p.y = (kPracticalZetas - 1) * p.xi - 1;
        p.y_real = static_cast<double>(p.y);
        p.gamma = std::pow(delta, 3) / geo.value(p.y);
        p.g_exact = true;
        p.g_delta = -inv_ceil(1.0 / (delta * delta * delta));
        p.f_delta = p.g_delta - inv_ceil(2.0 / (delta * delta));
        p.g_log10 = std::log10(static_cast<double>(-p.g_delta));
        if (release) {
            p.y_hat = 4;
            p.alpha = p.y_hat / std::pow(delta, 4);
        }
    }
    return p;
}

ParamPack make_params(double eps, Profile profile, bool release) {
    if (!(eps > 0 && eps <= 1)) throw DomainError("eps must lie in (0, 1]");
    int64_t inv;
    if (profile == Profile::faithful)
        inv = release ? std::max<int64_t>(36, inv_ceil(48.0 / eps)) : std::max<int64_t>(8, inv_ceil(48.0 / eps));
    else
        inv = std::max<int64_t>(2, inv_ceil(4.0 / eps));
    ParamPack p = make_params_for_delta(1.0 / static_cast<double>(inv), profile, release);
    p.eps = eps;
    return p;
}

std::string ParamPack::describe() const {
    std::ostringstream os;
    os << "profile=" << to_string(profile) << " eps=" << eps << " delta=1/" << inv_delta() << " ell=" << ell
       << " xi=" << xi << " zetas=";
    if (zeta_count) os << *zeta_count;
    else os << zeta_count_real;
    os << " y=" << y_real << " gamma=" << gamma;
    if (g_exact) os << " g=" << g_delta << " f=" << f_delta;
    else os << " log10|g|=" << g_log10;
    if (release) os << " y_hat=" << y_hat << " alpha=" << alpha;
    if (profile == Profile::practical) os << " guarantee=empirical";
    return os.str();
}

void refresh_values(Instance& inst, const Geo& geo) {
    for (auto& j : inst.jobs) {
        j.size = geo.value(j.size_e);
        j.weight = geo.value(j.weight_e);
        if (inst.has_release) j.release = geo.value(j.release_e);
    }
    for (auto& m : inst.machines) m.speed = geo.value(m.speed_e);
    inst.rounded_delta = geo.delta();
}

Instance round_no_release(const Instance& a, const ParamPack& p) {
    a.check();
    Geo geo(p.delta);
    Instance out = a;
    for (auto& j : out.jobs) {
        j.size_e = {geo.ceil_log(j.size)};
        j.weight_e = {geo.ceil_log(j.weight)};
    }
    for (auto& m : out.machines) m.speed_e = {geo.floor_log(m.speed)};
    refresh_values(out, geo);
    return out;
}

Instance round_release(const Instance& a, const ParamPack& p) {
    a.check();
    if (a.jobs.empty()) throw DomainError("release rounding needs at least one job");
    Geo geo(p.delta);
    Instance out = a;
    out.has_release = true;
    double vmax = 0;
    for (const auto& m : a.machines) vmax = std::max(vmax, m.speed);
    double amin = std::numeric_limits<double>::infinity();
    for (const auto& j : a.jobs) amin = std::min(amin, j.size / vmax);
    const double beta = p.delta * p.delta * amin;
    for (auto& j : out.jobs) {
        j.size_e = {geo.ceil_log(j.size / vmax)};
        j.weight_e = {geo.ceil_log(j.weight)};
        j.release_e = {geo.ceil_log(j.release + beta)};
    }
    for (auto& m : out.machines) m.speed_e = {geo.floor_log(m.speed / vmax)};
    refresh_values(out, geo);
    return out;
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int64_t pos_mod(int64_t a, int64_t b) { return a - floor_div(a, b) * b; }

int64_t omega_block(int64_t beta, int64_t xi) { return floor_div(beta - 1, xi); }

bool is_forbidden(int64_t beta, int64_t zeta, const ParamPack& p) {
    int64_t c = omega_block(beta, p.xi);
    if (p.zeta_count) return pos_mod(c, *p.zeta_count) == zeta;
    // The modulus exceeds every 64-bit block index: only c = zeta itself matches.
    return c == zeta;
}

Instance density_shift(const Instance& a, int64_t zeta, const ParamPack& p) {
    Geo geo(p.delta);
    Instance out = a;
    for (auto& j : out.jobs)
        if (is_forbidden(j.density_exp(), zeta, p)) {
            j.weight_e.exponent += p.xi;
            j.weight = geo.value(j.weight_e);
        }
    return out;
}

std::vector<int64_t> relevant_zetas(const Instance& a, const ParamPack& p) {
    std::set<int64_t> hit;
    for (const auto& j : a.jobs) {
        int64_t c = omega_block(j.density_exp(), p.xi);
        if (p.zeta_count) hit.insert(pos_mod(c, *p.zeta_count));
        else if (c >= 0) hit.insert(c);
    }
    std::vector<int64_t> out(hit.begin(), hit.end());
    int64_t total = p.zeta_count ? *p.zeta_count : std::numeric_limits<int64_t>::max();
    if (static_cast<int64_t>(hit.size()) < total) {
        int64_t z = 0;
        while (hit.count(z)) ++z;
        out.push_back(z);
        std::sort(out.begin(), out.end());
    }
    return out;
}

std::vector<Band> split_into_bands(const Instance& a, int64_t zeta, const ParamPack& p) {
    std::map<int64_t, Band> runs;
    for (int idx = 0; idx < a.n(); ++idx) {
        int64_t beta = a.jobs[idx].density_exp();
        if (is_forbidden(beta, zeta, p))
            throw DomainError("job " + std::to_string(a.jobs[idx].id) + " has a forbidden density for this shift");
        int64_t c = omega_block(beta, p.xi);
        int64_t run, top;
        if (p.zeta_count) {
            run = floor_div(c - zeta, *p.zeta_count);
            top = ((run + 1) * *p.zeta_count + zeta) * p.xi;
        } else {
            run = c < zeta ? 0 : 1;
            top = run == 0 ? zeta * p.xi : std::numeric_limits<int64_t>::max();
        }
        Band& b = runs[run];
        b.run = run;
        b.top_exp = top;
        b.jobs.push_back(idx);
    }
    std::vector<Band> out;
    for (auto& [k, b] : runs) out.push_back(std::move(b));
    return out;
}

int64_t division_count(double delta) {
    Geo geo(delta);
    return geo.ceil_log(2.0);
}

DivisionInfo divisions(int64_t size_exp, double delta) {
    Geo geo(delta);
    DivisionInfo d;
    d.Delta = division_count(delta);
    // k with 2^k (1+d)^i in (1, 2].
    double l = static_cast<double>(size_exp) * std::log2(1.0 + delta);
    int64_t k = 1 - static_cast<int64_t>(std::ceil(l - 1e-12));
    auto scaled = [&](int64_t kk) { return std::ldexp(geo.value(size_exp), static_cast<int>(kk)); };
    while (scaled(k) > 2.0 * (1.0 + kSnap)) --k;
    while (scaled(k) <= 1.0 * (1.0 + kSnap)) ++k;
    d.subdivision = k;
    d.division = geo.ceil_log(std::ldexp(1.0, static_cast<int>(k))) + size_exp;
    d.pseudo_size = std::ldexp(geo.value(d.division), -static_cast<int>(k));
    return d;
}

Instance to_pseudo_instance(const Instance& a) {
    Instance out = a;
    if (!a.rounded()) throw DomainError("pseudo-sizes need a rounded instance");
    for (auto& j : out.jobs) j.size = divisions(j.size_e.exponent, a.rounded_delta).pseudo_size;
    return out;
}

}  // namespace wct
