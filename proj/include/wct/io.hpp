#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "wct/core.hpp"

namespace wct {

// Error with the 1-based line number of malformed input.
struct ParseError : ValidationError {
    int line;
    ParseError(int line_no, const std::string& msg)
        : ValidationError("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Header `m n has_release`, then `machine <id> <speed>` and
// `job <id> <size> <weight> <release>` lines. '#' starts a comment.
Instance read_instance(std::istream& in);
Instance read_instance_file(const std::string& path);
void write_instance(std::ostream& out, const Instance& inst);

// One line per job: `job <id> machine <id> completion <decimal>`.
TimedSchedule read_schedule(std::istream& in, const Instance& inst);
TimedSchedule read_schedule_file(const std::string& path, const Instance& inst);
void write_schedule(std::ostream& out, const Instance& inst, const TimedSchedule& s);

enum class Shape { uniform, bimodal_density, release_bursts, power_speeds };

Shape parse_shape(const std::string& s);
std::string to_string(Shape s);

struct GenSpec {
    Shape shape = Shape::uniform;
    int n = 6;
    int m = 2;
    uint64_t seed = 1;
    // Snap sizes, weights and speeds up to powers of (1+snap_delta) when positive.
    double snap_delta = 0;
    double power_delta = 0.125;  // base for power-speeds
};

Instance generate(const GenSpec& spec);

}  // namespace wct
