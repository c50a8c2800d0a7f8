#include "wct/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "wct/core.hpp"

namespace wct {

int LinearModel::add_var(std::string name, double cost, double lower, double upper, bool integral) {
    vars.push_back(Variable{std::move(name), lower, upper, integral});
    objective.push_back(cost);
    return static_cast<int>(vars.size()) - 1;
}

int LinearModel::add_constraint(std::string name, std::vector<std::pair<int, double>> terms, Relation rel,
                                double rhs) {
    cons.push_back(Constraint{std::move(name), std::move(terms), rel, rhs});
    return static_cast<int>(cons.size()) - 1;
}

void LinearModel::check() const {
    if (objective.size() != vars.size()) throw ValidationError("objective size differs from variable count");
    for (size_t j = 0; j < vars.size(); ++j) {
        if (!std::isfinite(vars[j].lower)) throw ValidationError("variable " + vars[j].name + " has no finite lower bound");
        if (vars[j].upper < vars[j].lower) throw ValidationError("variable " + vars[j].name + " has empty bounds");
    }
    for (const auto& c : cons)
        for (const auto& [v, a] : c.terms)
            if (v < 0 || v >= static_cast<int>(vars.size()))
                throw ValidationError("constraint " + c.name + " references an undeclared variable");
}

std::string LinearModel::dump() const {
    std::ostringstream os;
    os.precision(12);
    os << "min:";
    for (size_t j = 0; j < vars.size(); ++j)
        if (objective[j] != 0) os << " + " << objective[j] << " " << vars[j].name;
    os << "\n";
    for (const auto& c : cons) {
        os << c.name << ":";
        for (const auto& [v, a] : c.terms) os << " + " << a << " " << vars[v].name;
        os << (c.rel == Relation::le ? " <= " : c.rel == Relation::ge ? " >= " : " = ") << c.rhs << "\n";
    }
    for (const auto& v : vars) {
        os << "bound: " << v.lower << " <= " << v.name << " <= " << v.upper;
        if (v.integral) os << " int";
        os << "\n";
    }
    return os.str();
}

std::string to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::optimal: return "optimal";
        case MilpStatus::infeasible: return "infeasible";
        case MilpStatus::unbounded: return "unbounded";
        case MilpStatus::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

double objective_value(const LinearModel& model, const std::vector<double>& x) {
    double z = 0;
    for (size_t j = 0; j < x.size(); ++j) z += model.objective[j] * x[j];
    return z;
}

double max_violation(const LinearModel& model, const std::vector<double>& x) {
    double worst = 0;
    for (size_t j = 0; j < model.vars.size(); ++j) {
        worst = std::max(worst, model.vars[j].lower - x[j]);
        if (std::isfinite(model.vars[j].upper)) worst = std::max(worst, x[j] - model.vars[j].upper);
    }
    for (const auto& c : model.cons) {
        double lhs = 0, scale = 1 + std::fabs(c.rhs);
        for (const auto& [v, a] : c.terms) {
            lhs += a * x[v];
            scale = std::max(scale, std::fabs(a * x[v]));
        }
        double viol = 0;
        if (c.rel != Relation::ge) viol = std::max(viol, lhs - c.rhs);
        if (c.rel != Relation::le) viol = std::max(viol, c.rhs - lhs);
        worst = std::max(worst, viol / scale);
    }
    return worst;
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTolLp = 1e-9;

// Dense bounded-variable primal simplex on min c.x, A x = b, 0 <= x <= u, b >= 0.
class Simplex {
public:
    Simplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> u, long max_iter)
        : rows_(static_cast<int>(a.size())), max_iter_(max_iter) {
        cols_ = rows_ ? static_cast<int>(a[0].size()) : static_cast<int>(u.size());
        structural_ = cols_;
        // Append one artificial per row; the initial basis is all artificials.
        t_.assign(rows_, std::vector<double>(cols_ + rows_, 0.0));
        for (int r = 0; r < rows_; ++r) {
            std::copy(a[r].begin(), a[r].end(), t_[r].begin());
            t_[r][cols_ + r] = 1.0;
        }
        cols_ += rows_;
        upper_ = u;
        upper_.resize(cols_, kInf);
        x_.assign(cols_, 0.0);
        at_upper_.assign(cols_, false);
        basis_.resize(rows_);
        for (int r = 0; r < rows_; ++r) {
            basis_[r] = structural_ + r;
            x_[structural_ + r] = b[r];
        }
        in_basis_.assign(cols_, -1);
        for (int r = 0; r < rows_; ++r) in_basis_[basis_[r]] = r;
    }

    enum class Result { optimal, unbounded, iteration_limit };

    // Phase one; returns false when infeasible.
    bool phase_one(Result& res) {
        std::vector<double> c(cols_, 0.0);
        for (int r = 0; r < rows_; ++r) c[structural_ + r] = 1.0;
        res = run(c, true);
        if (res != Result::optimal) return false;
        double art = 0;
        for (int r = 0; r < rows_; ++r) art += x_[structural_ + r];
        for (int k = structural_; k < cols_; ++k) upper_[k] = 0.0;  // pin artificials
        drive_out();
        return art <= 1e-7 * (1.0 + rhs_scale_);
    }

    Result phase_two(const std::vector<double>& c_struct) {
        std::vector<double> c(cols_, 0.0);
        std::copy(c_struct.begin(), c_struct.end(), c.begin());
        return run(c, false);
    }

    std::vector<double> structural_values() const {
        return std::vector<double>(x_.begin(), x_.begin() + structural_);
    }
    long iterations() const { return iterations_; }
    void set_rhs_scale(double s) { rhs_scale_ = s; }

private:
    void pivot(int r, int j, std::vector<double>& d) {
        double piv = t_[r][j];
        auto& pr = t_[r];
        for (double& v : pr) v /= piv;
        pr[j] = 1.0;
        for (int k = 0; k < rows_; ++k) {
            if (k == r) continue;
            double f = t_[k][j];
            if (f == 0.0) continue;
            auto& row = t_[k];
            for (int c = 0; c < cols_; ++c)
                if (pr[c] != 0.0) row[c] -= f * pr[c];
            row[j] = 0.0;
        }
        double f = d[j];
        if (f != 0.0) {
            for (int c = 0; c < cols_; ++c)
                if (pr[c] != 0.0) d[c] -= f * pr[c];
            d[j] = 0.0;
        }
        in_basis_[basis_[r]] = -1;
        basis_[r] = j;
        in_basis_[j] = r;
    }

    // Replace basic artificials by structural columns where possible.
    void drive_out() {
        std::vector<double> dummy(cols_, 0.0);
        for (int r = 0; r < rows_; ++r) {
            if (basis_[r] < structural_) continue;
            for (int j = 0; j < structural_; ++j) {
                if (in_basis_[j] >= 0) continue;
                if (std::fabs(t_[r][j]) > 1e-7) {
                    // Degenerate pivot: the artificial sits at zero.
                    int leaving = basis_[r];
                    pivot(r, j, dummy);
                    x_[leaving] = 0.0;
                    break;
                }
            }
        }
    }

    Result run(const std::vector<double>& c, bool phase1) {
        std::vector<double> d = c;
        for (int r = 0; r < rows_; ++r) {
            double cb = c[basis_[r]];
            if (cb == 0.0) continue;
            for (int k = 0; k < cols_; ++k) d[k] -= cb * t_[r][k];
        }
        for (int r = 0; r < rows_; ++r) d[basis_[r]] = 0.0;
        int degenerate = 0;
        bool bland = false;
        while (true) {
            if (++iterations_ > max_iter_) return Result::iteration_limit;
            int enter = -1;
            double best = 0;
            for (int j = 0; j < cols_; ++j) {
                if (in_basis_[j] >= 0) continue;
                if (!phase1 && j >= structural_) continue;
                if (upper_[j] <= 0.0 && !at_upper_[j] && d[j] > 0) continue;
                double score = 0;
                if (!at_upper_[j] && d[j] < -kCostTolLp && upper_[j] > 0.0) score = -d[j];
                else if (at_upper_[j] && d[j] > kCostTolLp) score = d[j];
                if (score <= 0) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (score > best) {
                    best = score;
                    enter = j;
                }
            }
            if (enter < 0) return Result::optimal;
            const double dir = at_upper_[enter] ? -1.0 : 1.0;
            double theta = upper_[enter];  // bound flip distance
            int leave = -1;
            bool leave_to_upper = false;
            double leave_alpha = 0;
            for (int r = 0; r < rows_; ++r) {
                double alpha = t_[r][enter] * dir;
                int bv = basis_[r];
                double lim;
                bool to_upper;
                if (alpha > kPivotTol) {
                    lim = std::max(0.0, x_[bv]) / alpha;
                    to_upper = false;
                } else if (alpha < -kPivotTol && std::isfinite(upper_[bv])) {
                    lim = std::max(0.0, upper_[bv] - x_[bv]) / -alpha;
                    to_upper = true;
                } else {
                    continue;
                }
                bool take;
                if (lim < theta - 1e-12) take = true;
                else if (lim > theta + 1e-12 || leave < 0) take = false;
                else if (bland) take = bv < basis_[leave];
                else take = std::fabs(alpha) > leave_alpha;  // prefer the stabler pivot on ties
                if (take) {
                    theta = lim;
                    leave = r;
                    leave_to_upper = to_upper;
                    leave_alpha = std::fabs(alpha);
                }
            }
            if (!std::isfinite(theta)) return Result::unbounded;
            for (int r = 0; r < rows_; ++r) {
                double alpha = t_[r][enter];
                if (alpha != 0.0) x_[basis_[r]] -= theta * dir * alpha;
            }
            x_[enter] += dir * theta;
            if (theta < 1e-12) {
                if (++degenerate > 50) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
            if (leave < 0) {
                // Bound flip only.
                at_upper_[enter] = !at_upper_[enter];
                x_[enter] = at_upper_[enter] ? upper_[enter] : 0.0;
                continue;
            }
            int lv = basis_[leave];
            pivot(leave, enter, d);
            at_upper_[enter] = false;
            at_upper_[lv] = leave_to_upper;
            x_[lv] = leave_to_upper ? upper_[lv] : 0.0;
        }
    }

    int rows_, cols_, structural_;
    long max_iter_;
    long iterations_ = 0;
    double rhs_scale_ = 0;
    std::vector<std::vector<double>> t_;
    std::vector<double> upper_, x_;
    std::vector<bool> at_upper_;
    std::vector<int> basis_, in_basis_;
};

MilpSolution lp_with_bounds(const LinearModel& model, const std::vector<double>& lo, const std::vector<double>& hi,
                            long max_iter) {
    MilpSolution sol;
    const int nv = static_cast<int>(model.vars.size());
    for (int j = 0; j < nv; ++j)
        if (hi[j] < lo[j] - 1e-12) {
            sol.status = MilpStatus::infeasible;
            return sol;
        }
    // Standard form: shift by lower bounds, add slacks, flip rows to b >= 0.
    int slacks = 0;
    for (const auto& c : model.cons)
        if (c.rel != Relation::eq) ++slacks;
    const int rows = static_cast<int>(model.cons.size());
    const int cols = nv + slacks;
    std::vector<std::vector<double>> a(rows, std::vector<double>(cols, 0.0));
    std::vector<double> b(rows, 0.0), u(cols, kInf);
    for (int j = 0; j < nv; ++j) u[j] = hi[j] - lo[j];
    int s = nv;
    double rhs_scale = 0;
    for (int r = 0; r < rows; ++r) {
        const auto& c = model.cons[r];
        double rhs = c.rhs;
        for (const auto& [v, coef] : c.terms) {
            a[r][v] += coef;
            rhs -= coef * lo[v];
        }
        if (c.rel == Relation::le) a[r][s++] = 1.0;
        else if (c.rel == Relation::ge) a[r][s++] = -1.0;
        if (rhs < 0) {
            for (double& v : a[r]) v = -v;
            rhs = -rhs;
        }
        b[r] = rhs;
        rhs_scale = std::max(rhs_scale, rhs);
    }
    std::vector<double> cost(cols, 0.0);
    for (int j = 0; j < nv; ++j) cost[j] = model.objective[j];

    Simplex sx(std::move(a), std::move(b), std::move(u), max_iter);
    sx.set_rhs_scale(rhs_scale);
    Simplex::Result res;
    bool feasible = sx.phase_one(res);
    sol.iterations = sx.iterations();
    if (res == Simplex::Result::iteration_limit) {
        sol.status = MilpStatus::budget_exceeded;
        sol.diagnostics = "simplex iteration limit in phase one";
        return sol;
    }
    if (!feasible) {
        sol.status = MilpStatus::infeasible;
        return sol;
    }
    res = sx.phase_two(cost);
    sol.iterations = sx.iterations();
    if (res == Simplex::Result::iteration_limit) {
        sol.status = MilpStatus::budget_exceeded;
        sol.diagnostics = "simplex iteration limit in phase two";
        return sol;
    }
    if (res == Simplex::Result::unbounded) {
        sol.status = MilpStatus::unbounded;
        return sol;
    }
    auto xs = sx.structural_values();
    sol.values.assign(nv, 0.0);
    for (int j = 0; j < nv; ++j) {
        double v = lo[j] + xs[j];
        if (v < lo[j]) v = lo[j];
        if (v > hi[j]) v = hi[j];
        sol.values[j] = v;
    }
    sol.objective = objective_value(model, sol.values);
    sol.status = MilpStatus::optimal;
    double viol = max_violation(model, sol.values);
    if (viol > 1e-7) {
        sol.diagnostics = "residual " + std::to_string(viol);
        sol.status = MilpStatus::budget_exceeded;
    }
    return sol;
}

}  // namespace

MilpSolution solve_lp(const LinearModel& model, const MilpBudget& budget) {
    model.check();
    std::vector<double> lo, hi;
    for (const auto& v : model.vars) {
        lo.push_back(v.lower);
        hi.push_back(v.upper);
    }
    return lp_with_bounds(model, lo, hi, budget.max_iterations);
}

MilpSolution solve_milp(const LinearModel& model, const MilpBudget& budget) {
    model.check();
    const int nv = static_cast<int>(model.vars.size());
    struct Node {
        double bound;
        long seq;
        std::vector<double> lo, hi;
    };
    auto worse = [](const Node& a, const Node& b) {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.seq > b.seq;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    Node root{-kInf, 0, {}, {}};
    for (const auto& v : model.vars) {
        root.lo.push_back(v.integral ? std::ceil(v.lower - 1e-6) : v.lower);
        root.hi.push_back(v.integral && std::isfinite(v.upper) ? std::floor(v.upper + 1e-6) : v.upper);
    }
    open.push(root);
    long seq = 1;
    MilpSolution best;
    best.status = MilpStatus::infeasible;
    double incumbent = kInf;
    bool any_unbounded = false;
    const auto start = std::chrono::steady_clock::now();
    long nodes = 0;
    std::string diag;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= incumbent - 1e-9 * (1 + std::fabs(incumbent))) continue;
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (nodes >= budget.max_nodes || elapsed > budget.time_s) {
            best.status = MilpStatus::budget_exceeded;
            best.has_incumbent = std::isfinite(incumbent);
            best.nodes = nodes;
            best.diagnostics = "node or time budget exhausted";
            return best;
        }
        ++nodes;
        MilpSolution lp = lp_with_bounds(model, node.lo, node.hi, budget.max_iterations);
        if (lp.status == MilpStatus::infeasible) continue;
        if (lp.status == MilpStatus::unbounded) {
            any_unbounded = true;
            continue;
        }
        if (lp.status == MilpStatus::budget_exceeded) {
            diag = lp.diagnostics;
            continue;
        }
        if (lp.objective >= incumbent - 1e-9 * (1 + std::fabs(incumbent))) continue;
        // Snap near-integers and pick the most fractional variable.
        int branch = -1;
        double frac_best = 0;
        for (int j = 0; j < nv; ++j) {
            if (!model.vars[j].integral) continue;
            double v = lp.values[j];
            double f = v - std::floor(v);
            double dist = std::min(f, 1 - f);
            if (dist <= 1e-6) {
                lp.values[j] = std::round(v);
                continue;
            }
            if (dist > frac_best + 1e-12) {
                frac_best = dist;
                branch = j;
            }
        }
        if (branch < 0) {
            double z = objective_value(model, lp.values);
            if (z < incumbent) {
                incumbent = z;
                best.values = lp.values;
                best.objective = z;
                best.status = MilpStatus::optimal;
            }
            continue;
        }
        double v = lp.values[branch];
        Node down{lp.objective, seq++, node.lo, node.hi};
        down.hi[branch] = std::floor(v);
        Node up{lp.objective, seq++, node.lo, node.hi};
        up.lo[branch] = std::ceil(v);
        open.push(std::move(down));
        open.push(std::move(up));
    }
    best.nodes = nodes;
    if (best.status == MilpStatus::optimal) {
        best.has_incumbent = true;
        return best;
    }
    if (any_unbounded) best.status = MilpStatus::unbounded;
    else if (!diag.empty()) {
        best.status = MilpStatus::budget_exceeded;
        best.diagnostics = diag;
    }
    return best;
}

}  // namespace wct
