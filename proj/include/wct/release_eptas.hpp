#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wct/bands_eptas.hpp"
#include "wct/core.hpp"
#include "wct/milp.hpp"
#include "wct/rounding.hpp"
#include "wct/timeline.hpp"

namespace wct {

struct ReleaseParams {
    double delta = 0.125;
    Profile profile = Profile::practical;
    double y_hat = 4;
    double alpha = 0;
    int64_t k_count = 0;     // alpha / delta
    int64_t y = 0;
    double fast_count = 0;   // 1/d^7 + 1 machines with a type of their own
    double min_machines = 0; // 2/d^7 + 3
    size_t config_cap = 200000;
    double palette_cap = 1e5;
    MilpBudget budget;

    static ReleaseParams from(const ParamPack& p);
    Geo geo() const { return Geo(delta); }

    // Q_{i,k} for i >= -1 and 0 <= k <= k_count.
    int64_t q(int64_t i, int64_t k, int64_t theta) const;
    // Psi_{i,k}; infinite when it overflows a double.
    double psi(int64_t i, int64_t k, int64_t theta) const;

    // Horizon and small-job granularity for a bounded instance with largest release R.
    double horizon(double R) const;
    double gamma_r(double R) const;
    double slow_cutoff(double D, double L) const;  // B
    int fast_machines(int m) const;      // min(m, fast_count)
};

// Machine indices sorted by speed non-increasing, ties by index.
std::vector<int> speed_rank(const Instance& inst);

// ---- release-date shifting ----

struct ReleaseShift {
    Instance shifted;                    // A_k
    std::vector<std::vector<int>> parts; // A_{ik}, indexed by i
    std::vector<int> part_of;            // per job
    std::vector<size_t> distinct_releases;  // per part
};

ReleaseShift release_shift(const Instance& tilde, int64_t k, const ReleaseParams& rp);

// Reference construction for the choice of k: idle of length |D_{i,k}| is
// inserted on every machine before the first job starting inside D_{i,k}.
TimedSchedule insert_release_idle(const Instance& tilde, const TimedSchedule& s, int64_t k, const ReleaseParams& rp);

struct IdleInsertionLedger {
    double opt = 0;
    double sum = 0;          // sum over all k of the transformed costs
    double bound = 0;        // (alpha/delta + (1+delta) alpha) opt
    double best = 0;
    int64_t best_k = 0;
    int64_t identity_ks = 0; // values of k that leave the schedule unchanged
    bool all_feasible = true;
};

IdleInsertionLedger idle_insertion_ledger(const Instance& tilde, const TimedSchedule& opt, const ReleaseParams& rp);

struct ChosenK {
    int64_t k = 0;
    TimedSchedule schedule;  // feasible for A_k and therefore for the input
    double value = 0;
    int solved = 0;          // distinct A_k handed to the solver
};

// Solves every distinct A_k with `solver` and keeps the cheapest by `measure`.
ChosenK choose_k(const Instance& tilde, const ReleaseParams& rp,
                 const std::function<TimedSchedule(const Instance&, int64_t)>& solver,
                 const std::function<double(const Instance&, const TimedSchedule&)>& measure);

// ---- structural properties ----

struct PropertyCheck {
    bool ok = true;
    int j1 = -1, j2 = -1;
    std::string message;
};

// Start-time form: start_j >= psi_prime / 2 and C_j' >= C_j + psi y_hat / d^28.
PropertyCheck property_1(const Instance& inst, const TimedSchedule& s, double psi, double psi_prime, double y_hat,
                         double delta);
// Same with psi_prime / 4 and d^27.
PropertyCheck property_3(const Instance& inst, const TimedSchedule& s, double psi, double psi_prime, double y_hat,
                         double delta);
// No job larger than psi y_hat / d^25 times the speed of its machine.
PropertyCheck property_no_large(const Instance& inst, const TimedSchedule& s, double psi, double y_hat, double delta);

// ---- palettes ----

struct Palette {
    int64_t t_lo = 0, t_hi = 0;               // colour universe [t_lo, t_hi]
    std::vector<int> machines;                // by speed rank
    std::vector<std::vector<char>> colors;    // colors[c][t - t_lo]

    bool pink(size_t c) const;
    bool allows(size_t c, int64_t t) const;
    // First pink component of rank >= 1.
    std::optional<size_t> pink_component() const;
    bool operator==(const Palette&) const = default;
};

Palette compute_palette(const Instance& inst, const TimedSchedule& s, double delta, int components, int64_t t_lo,
                        int64_t t_hi);
// Every component pink; configurations are unconstrained.
Palette full_palette(const Instance& inst, int components, int64_t t_lo, int64_t t_hi);
// log10 of the number of palettes over the universe.
double palette_space_log10(int components, int64_t t_lo, int64_t t_hi);
// Throws RefusalError when the palette space exceeds the cap.
void check_palette_cap(int components, int64_t t_lo, int64_t t_hi, const ReleaseParams& rp);

struct PinkResult {
    TimedSchedule schedule;
    int v = -1;                 // machine index of the pink machine
    int moved = 0;
    double max_inflation = 1;   // largest new/old completion ratio of a moved job
    bool fits = true;           // every moved job met its completion bound
    bool pink = false;
};

// Stretch, empty machine v of its early jobs onto the fastest machine and
// resequence late jobs by density. Needs at least two candidate machines.
PinkResult ensure_pink(const Instance& inst, const TimedSchedule& s, double delta, int components, double psi,
                       int64_t t_lo, int64_t t_hi);

// ---- sparse intervals ----

// (machine, t) windows with a start whose started size is at most s d^5 (1+d)^t.
std::vector<std::pair<int, int64_t>> sparse_windows(const Instance& inst, const TimedSchedule& s, double delta,
                                                    double horizon);

struct SparseResult {
    TimedSchedule schedule;
    int merged = 0;       // first phase moves
    int to_pink = 0;      // second phase moves
    int failed = 0;       // moves that found no room
    bool postcondition = false;
};

SparseResult eliminate_sparse(const Instance& inst, const TimedSchedule& s, double delta, int components, int v,
                              double horizon);
bool sparse_postcondition(const Instance& inst, const TimedSchedule& s, double delta, int components,
                          double horizon);

// ---- combining density bands ----

struct BandSchedule {
    int64_t k = 0;            // larger k = larger densities
    TimedSchedule schedule;   // machine -1 for jobs outside the band
};

struct ChargeRecord {
    int machine = 0;
    int64_t k_owner = 0, t_owner = 0;
    int64_t mu = 0;
    double size = 0;
    double bound = 0;  // s (1+d)^t' / d^{10(mu-1)+3}
};

struct GapLoad {
    int machine = 0;
    int64_t t = 0;
    double load = 0;
    double bound = 0;
};

struct CombineBandsResult {
    TimedSchedule schedule;
    std::vector<GapLoad> sparse_loads;    // bound 2 d^5 s (1+d)^t
    std::vector<GapLoad> postpone_loads;  // bound d^10 s (1+d)^t
    std::vector<ChargeRecord> charges;
    std::vector<double> machine_ratio;    // pseudo-cost / sum of band pseudo-costs
    int placement_failures = 0;
    int postponed = 0;
    bool prefix_ok = true;                // taken windows stay a prefix

    bool audits_pass(double delta) const;
};

CombineBandsResult combine_density_bands(const Instance& inst, const std::vector<BandSchedule>& bands, double delta,
                                         double max_release, int components);

// ---- combining sub-instances ----

struct PartSchedule {
    TimedSchedule schedule;  // machine -1 for jobs outside the part
    double psi = 0;          // Psi_{i,k}
    double psi_next = 0;     // Psi_{i,k+1}
};

struct HostLoad {
    int machine = 0;
    int64_t t = 0;
    double load = 0;   // processing time placed in the window
    double bound = 0;  // d^4 (1+d)^t
};

struct CombinePartsResult {
    TimedSchedule schedule;
    std::vector<HostLoad> hosts;
    // per (machine, part) with overflow: delay cost of S_{i,l}, l >= 1, and cost of S_{i,0}
    std::vector<std::pair<double, double>> delay_vs_base;
    std::vector<double> machine_ratio;  // against the sum of part pseudo-costs
    int placement_failures = 0;
    int overflow_jobs = 0;
};

CombinePartsResult combine_subinstances(const Instance& inst, const std::vector<PartSchedule>& parts, double delta);

// ---- bounded instances ----

struct BoundedSetup {
    double delta = 0.125;
    int64_t y = 11;
    int64_t t_hi = 0;            // exponent of the horizon L
    double gamma = 0;            // small-job granularity
    int components = 0;          // machines with their own type
    double slow_cutoff = 0;      // B
    Palette palette;
    size_t config_cap = 200000;
    MilpBudget budget;
};

// Practical setup for a bounded instance: horizon from the instance.
BoundedSetup bounded_setup(const Instance& inst, const ReleaseParams& rp);

struct Preprocessed {
    std::vector<int> kept;       // jobs left for the program
    TimedSchedule fragment;      // removed jobs, machine -1 for the rest
    std::vector<int> removed;
};

Preprocessed preprocess_bounded(const Instance& inst, const BoundedSetup& bs);

// (density exponent r, size exponent i, release exponent t)
struct RType {
    int64_t r = 0, i = 0, t = 0;
    auto operator<=>(const RType&) const = default;
};

struct MachineType {
    std::vector<int> machines;  // indices
    int64_t speed_e = 0;
    bool fast = true;
};

struct ConfigurationR {
    int type = 0;                                      // machine type
    int64_t speed_e = 0;
    std::map<std::pair<RType, int64_t>, int> large;    // (type, start window) -> count
    std::map<std::tuple<int64_t, int64_t, int64_t>, int64_t> small;  // (r, window, t) -> level
    double cost = 0;                                   // pseudo-cost of the virtual schedule
    double busy = 0;                                   // total started size
};

std::vector<MachineType> machine_types(const Instance& inst, const BoundedSetup& bs);
std::map<RType, int> rtype_counts(const Instance& inst, const std::vector<int>& jobs);

// Pseudo-cost of the virtual schedule, or nullopt when it is infeasible or not timely.
std::optional<double> virtual_schedule_cost(const ConfigurationR& c, const BoundedSetup& bs);

std::vector<ConfigurationR> enumerate_release_configs(const Instance& inst, const std::vector<int>& jobs,
                                                      const std::vector<MachineType>& types, const BoundedSetup& bs);

struct PiRelease {
    LinearModel model;
    std::vector<int> x_var;
    // (config, type, window) -> variable
    std::map<std::tuple<int, RType, int64_t>, int> y_var;
};

PiRelease build_pi_release(const Instance& inst, const std::vector<int>& jobs, const std::vector<MachineType>& types,
                           const std::vector<ConfigurationR>& configs, const BoundedSetup& bs);

struct RoundedRelease {
    TimedSchedule schedule;      // slots for `jobs`, machine -1 for the rest
    double leftover_size = 0;
    double leftover_bound = 0;   // d^5 s_v
    int leftover_jobs = 0;
    int appended = 0;            // leftovers that found no gap on the pink machine
};

RoundedRelease round_pi_release(const MilpSolution& sol, const Instance& inst, const std::vector<int>& jobs,
                                const std::vector<MachineType>& types, const std::vector<ConfigurationR>& configs,
                                const PiRelease& pi, const BoundedSetup& bs, int pink_machine);

struct BoundedResult {
    TimedSchedule schedule;  // every job of the instance
    double z_star = 0;
    size_t configs = 0;
    long nodes = 0;
    RoundedRelease rounding;
    Preprocessed pre;
};

BoundedResult solve_bounded_release(const Instance& inst, const ReleaseParams& rp);

// ---- end to end ----

struct ReleaseLedgerRow {
    std::string stage;
    int64_t k = 0;
    int64_t zeta = 0;
    int64_t part = 0;
    int64_t band = 0;
    double z_star = 0;
    double value = 0;
    std::string check;
};

std::string release_ledger_csv(const std::vector<ReleaseLedgerRow>& rows);

struct ReleaseOptions {
    // Run the structured pipeline even when the machine count is below 2/d^7+3.
    bool force_pipeline = false;
    int oracle_max_jobs = 8;
    int oracle_max_machines = 3;
};

struct ReleaseResult {
    TimedSchedule schedule;        // for the input instance
    double pseudo_cost = 0;        // on the rounded instance
    double cost = 0;               // on the input instance
    bool fallback = false;         // exact search was used
    int64_t k = 0;
    std::vector<ReleaseLedgerRow> ledger;
};

ReleaseResult eptas_release(const Instance& a, const ParamPack& params, const ReleaseOptions& opt = {});

}  // namespace wct
