#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparsestab/numerics.hpp"

namespace sparsestab::lp {

/// Central tolerance record used by every solve.
struct Tols {
    double primal = 1e-8;
    double dual = 1e-8;
    double pivot = 1e-13;
    double vertex = 1e-9;
};

enum class Sense { Min, Max };
enum class Status { Optimal, Infeasible, Unbounded };

/// Canonical-form LP:
///   optimize c^T z   subject to  G z <= h,  E z = f,
/// with per-variable nonnegativity flags (free by default). Free variables
/// are split internally; >=-rows must be negated by the caller.
struct LpProblem {
    Vec c;
    Mat G = Mat::empty(0, 0);
    Vec h;
    Mat E = Mat::empty(0, 0);
    Vec f;
    std::vector<bool> nonneg;  // empty = all free
    Sense sense = Sense::Min;
    Tols tols;

    explicit LpProblem(std::size_t nvars = 0)
        : c(nvars, 0.0), G(Mat::empty(0, nvars)), E(Mat::empty(0, nvars)),
          nonneg(nvars, false) {}

    std::size_t nvars() const { return c.size(); }
    void add_ineq(const Vec& row, double rhs);  // row^T z <= rhs
    void add_eq(const Vec& row, double rhs);    // row^T z == rhs
};

/// Primal/dual solution. Dual multipliers follow the sign convention
///   min:  c + G^T dual_ineq + E^T dual_eq >= 0 (componentwise, = 0 on free vars)
///   max:  c - G^T dual_ineq - E^T dual_eq <= 0 analogously,
/// with dual_ineq >= 0 in both senses.
struct LpSolution {
    Status status = Status::Optimal;
    Vec z;
    Vec dual_ineq;
    Vec dual_eq;
    double value = 0.0;
    IndexSet active;  // tight inequality rows
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double compl_residual = 0.0;
    double gap = 0.0;
};

/// Dense two-phase revised simplex with Bland's anti-cycling rule.
LpSolution solve(const LpProblem& p);

/// Phase-1 feasibility: returns (true, witness) or (false, nullopt).
std::pair<bool, std::optional<Vec>> feasible(const LpProblem& p);

using VertexSet = std::vector<Vec>;

struct VertexEnumOptions {
    int dim_cap = 8;
    int row_cap = 40;
    bool check_bounded = true;
    double tol = 1e-9;
};

/// All vertices of the bounded polyhedron {z : G z <= h} by exhaustive
/// active-set enumeration. Throws Unbounded / SizeLimit per the options.
VertexSet enumerate_vertices(const Mat& G, const Vec& h, const VertexEnumOptions& opt = {});

/// Human-readable dump used in failure reports.
std::string dump(const LpProblem& p);

}  // namespace sparsestab::lp
