#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace wct {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

struct Variable {
    std::string name;
    double lower = 0;
    double upper = kInf;
    bool integral = false;
};

struct Constraint {
    std::string name;
    std::vector<std::pair<int, double>> terms;
    Relation rel = Relation::le;
    double rhs = 0;
};

// minimize objective . x subject to constraints and bounds.
struct LinearModel {
    std::vector<Variable> vars;
    std::vector<Constraint> cons;
    std::vector<double> objective;  // dense, one entry per variable

    int add_var(std::string name, double cost, double lower = 0, double upper = kInf, bool integral = false);
    int add_constraint(std::string name, std::vector<std::pair<int, double>> terms, Relation rel, double rhs);
    void check() const;
    // One constraint per line, e.g. "c1: 2 x0 + 1 x1 <= 4".
    std::string dump() const;
};

enum class MilpStatus { optimal, infeasible, unbounded, budget_exceeded };

std::string to_string(MilpStatus s);

struct MilpSolution {
    MilpStatus status = MilpStatus::infeasible;
    std::vector<double> values;
    double objective = 0;
    long nodes = 0;
    long iterations = 0;
    bool has_incumbent = false;
    std::string diagnostics;
};

struct MilpBudget {
    long max_nodes = 200000;
    double time_s = 120;
    long max_iterations = 200000;  // per LP
};

MilpSolution solve_lp(const LinearModel& model, const MilpBudget& budget = {});
MilpSolution solve_milp(const LinearModel& model, const MilpBudget& budget = {});

// Largest scaled violation of bounds and constraints.
double max_violation(const LinearModel& model, const std::vector<double>& x);
double objective_value(const LinearModel& model, const std::vector<double>& x);

}  // namespace wct
