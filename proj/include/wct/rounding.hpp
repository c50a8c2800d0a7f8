#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wct/core.hpp"

namespace wct {

enum class Profile { faithful, practical };

Profile parse_profile(const std::string& s);
std::string to_string(Profile p);

// Every derived constant of both schemes. Faithful values are kept for
// formula checks even where they are far too large to enumerate.
struct ParamPack {
    double eps = 0.5;
    double delta = 0.125;
    int ell = 3;
    Profile profile = Profile::practical;
    bool release = false;

    // Length of one forbidden run of density exponents.
    int64_t xi = 0;
    // Number of shift values; empty when it exceeds int64 (faithful, release).
    std::optional<int64_t> zeta_count;
    double zeta_count_real = 0;
    // Allowed runs hold at most y+1 consecutive exponents.
    int64_t y = 0;
    double y_real = 0;
    bool y_floored = false;

    // Bounded-ratio scheme.
    double gamma = 0;
    int64_t g_delta = 0;
    int64_t f_delta = 0;
    // log10 of |g| when it does not fit in 64 bits.
    double g_log10 = 0;
    bool g_exact = true;

    // Release-date scheme.
    double y_hat = 0;
    double alpha = 0;

    Geo geo() const { return Geo(delta); }
    int64_t inv_delta() const;
    std::string describe() const;
};

// delta chosen from eps per profile.
ParamPack make_params(double eps, Profile profile, bool release);
// Same constants for an explicit delta (1/delta integral).
ParamPack make_params_for_delta(double delta, Profile profile, bool release, int ell = -1);

Instance round_no_release(const Instance& a, const ParamPack& p);
Instance round_release(const Instance& a, const ParamPack& p);
// Rebuild real fields of a rounded instance from its exponents.
void refresh_values(Instance& inst, const Geo& geo);

// floor division and nonnegative modulo helpers.
int64_t floor_div(int64_t a, int64_t b);
int64_t pos_mod(int64_t a, int64_t b);

// Block index c with beta in {c*xi+1, ..., (c+1)*xi}.
int64_t omega_block(int64_t beta, int64_t xi);
bool is_forbidden(int64_t beta, int64_t zeta, const ParamPack& p);
Instance density_shift(const Instance& a, int64_t zeta, const ParamPack& p);
// Shift values that can change the instance, plus one that changes nothing
// when such a value exists.
std::vector<int64_t> relevant_zetas(const Instance& a, const ParamPack& p);

struct Band {
    std::vector<int> jobs;  // indices into the instance
    int64_t top_exp = 0;    // exponent of the largest allowed density of the run
    int64_t run = 0;        // run index
};
std::vector<Band> split_into_bands(const Instance& a, int64_t zeta, const ParamPack& p);

struct DivisionInfo {
    int64_t subdivision = 0;  // k_i
    int64_t division = 0;     // k'_i
    double pseudo_size = 0;   // (1+d)^{k'_i} / 2^{k_i}
    int64_t Delta = 0;
};
int64_t division_count(double delta);
DivisionInfo divisions(int64_t size_exp, double delta);
Instance to_pseudo_instance(const Instance& a);

}  // namespace wct
