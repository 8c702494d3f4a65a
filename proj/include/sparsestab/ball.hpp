#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sparsestab/lp.hpp"
#include "sparsestab/numerics.hpp"

namespace sparsestab::ball {

/// Support half-space {z : a^T z <= 1} of the unit ball of some norm phi,
/// normalized so that phi*(a) = 1 (checked to 1e-10 at construction).
struct Halfspace {
    Vec a;
};

/// Strictly decreasing positive levels eps_1 > eps_2 > ... -> 0.
/// Default schedule: eps_j = eps1 * 2^(1-j) with eps1 = 0.5.
class EpsSchedule {
  public:
    EpsSchedule() = default;
    explicit EpsSchedule(double eps1);
    static EpsSchedule explicit_levels(std::vector<double> levels);
    double at(int j) const;  // 1-based level index

  private:
    double eps1_ = 0.5;
    std::vector<double> custom_;
};

/// Outer polytope approximation of the unit ball: intersection of support
/// half-spaces a^i (columns of the generator matrix), always containing the
/// coordinate half-spaces +-e_i^T z <= 1 and symmetric (a present => -a
/// present). Vertex cache is populated once on first use.
class Polytope {
  public:
    Polytope(NormSpec phi, int dim, std::vector<Vec> generators, double eps_level,
             bool approximate);

    const std::vector<Vec>& generators() const { return gens_; }
    int dim() const { return dim_; }
    double eps_level() const { return eps_; }
    bool approximate() const { return approx_; }
    const NormSpec& phi() const { return phi_; }
    /// Generator matrix with the a^i as columns.
    Mat gamma() const;
    /// Membership rows: gamma()^T z <= 1 as (G, h).
    Mat rows_matrix() const;
    const lp::VertexSet& vertices() const;
    /// JSON export, generators in lexicographic order.
    std::string to_json() const;

  private:
    NormSpec phi_;
    int dim_;
    std::vector<Vec> gens_;
    double eps_ = 0.0;
    bool approx_ = false;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

/// Support half-space touching the ball at x (phi(x) = 1 within 1e-10).
Halfspace support_halfspace(const NormSpec& spec, const Vec& x);

/// The accumulated outer approximation at schedule level j: half-space sets
/// are nested across j and the result passes sandwich_check at sched.at(j).
Polytope build_Q(const NormSpec& spec, int j, const EpsSchedule& sched, int q);

/// Two-sided sandwich test: (i) every generator has phi*(a) <= 1 + 1e-9 and
/// (ii) every sampled boundary point a* admits a generator with
/// (a*)^T a^i >= 1/(1+eps) - 1e-9.
bool sandwich_check(const Polytope& p, const NormSpec& spec, double eps, int samples);

/// General H-polyhedron {z : G z <= h, E z = f}; blocks may be empty.
struct HPoly {
    Mat G = Mat::empty(0, 0);
    Vec h;
    Mat E = Mat::empty(0, 0);
    Vec f;

    static HPoly from_rows(const Mat& G, const Vec& h);
    std::size_t dim() const { return G.cols() ? G.cols() : E.cols(); }
};

/// Euclidean projection onto an H-polyhedron. Exhaustive active-set search
/// for <= 20 inequality rows, dual (least-distance) path above. Throws
/// Infeasible when the set is empty.
Vec project(const HPoly& P, const Vec& x);
Vec project(const Polytope& p, const Vec& x);
/// Projection onto polytope restricted to the affine set {E z = f}.
Vec project(const Polytope& p, const Vec& x, const Mat& E, const Vec& f);

struct HausdorffOptions {
    bool check_nested = true;  // verify inner vertices lie in outer
    int vertex_budget_rows = 40;
    int vertex_budget_dim = 8;
};

/// d^H(inner, outer) for nested convex sets: max over outer vertices of the
/// distance to inner (the distance function to a convex set is convex, so its
/// maximum over a polytope sits at a vertex).
double hausdorff_nested(const HPoly& inner, const HPoly& outer, const HausdorffOptions& opt = {});
double hausdorff_nested(const Polytope& inner, const Polytope& outer,
                        const HausdorffOptions& opt = {});

}  // namespace sparsestab::ball
