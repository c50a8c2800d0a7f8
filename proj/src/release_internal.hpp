#pragma once

#include <map>
#include <optional>
#include <vector>

#include "wct/core.hpp"
#include "wct/milp.hpp"

namespace wct::detail {

inline double proc(const Instance& inst, int j, int l) { return inst.jobs[j].size / inst.machines[l].speed; }

inline double start_of(const Instance& inst, const TimedSchedule& s, int j) {
    return s.slots[j].completion - proc(inst, j, s.slots[j].machine);
}

// Busy intervals of one machine.
class Occupancy {
public:
    void add(double a, double b) {
        if (b > a) busy_.emplace(a, b);
    }
    // Earliest start >= lo of an idle stretch of length d ending by end_hi.
    std::optional<double> fit(double lo, double d, double end_hi = kInf) const;
    double idle_in(double lo, double hi) const;
    double end() const;

private:
    std::multimap<double, double> busy_;
};

std::vector<Occupancy> occupancy(const Instance& inst, const TimedSchedule& s);
// max(lo, release, d p/s)
double earliest_start(const Instance& inst, int j, int l, double lo, double delta);
// Jobs starting after threshold run back to back by density non-increasing.
void resequence_after(const Instance& inst, TimedSchedule& s, double threshold, double delta);
double subset_pseudo(const Instance& inst, const TimedSchedule& s, const Geo& geo, int machine);

}  // namespace wct::detail
