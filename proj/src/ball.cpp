#include "sparsestab/ball.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace sparsestab::ball {

namespace {

constexpr double kGenTol = 1e-10;   // phi*(a) = 1 tolerance for generators
constexpr double kAngTol = 1e-9;    // half-space dedup tolerance
constexpr int kExhaustiveCap = 20;  // rows above this use the dual projector

bool same_direction(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return false;
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d <= kAngTol;
}

void dedup_into(std::vector<Vec>& gens, const Vec& a) {
    for (const Vec& g : gens)
        if (same_direction(g, a)) return;
    gens.push_back(a);
}

std::vector<Vec> coordinate_halfspaces(int q) {
    std::vector<Vec> out;
    for (int i = 0; i < q; ++i)
        for (double s : {1.0, -1.0}) {
            Vec e(q, 0.0);
            e[i] = s;
            out.push_back(e);
        }
    return out;
}

// Extreme points of the dual unit ball of alpha*||.||_inf+(1-alpha)*||.||_1,
// i.e. of the Minkowski sum alpha*B_1 + (1-alpha)*B_inf: the vectors
// alpha*sigma*e_i + (1-alpha)*s over sign vectors s with s_i = sigma.
std::vector<Vec> mixed_dual_extremes(double alpha, int q) {
    if (q > 16) throw SizeLimit("mixed norm: dual-ball enumeration needs q <= 16");
    std::vector<Vec> out;
    if (alpha == 1.0) return coordinate_halfspaces(q);
    for (int i = 0; i < q; ++i) {
        for (double sigma : {1.0, -1.0}) {
            for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
                Vec a(q);
                bool ok = true;
                for (int k = 0; k < q; ++k) {
                    double sk = ((mask >> k) & 1u) ? 1.0 : -1.0;
                    if (k == i && sk != sigma) {
                        ok = false;
                        break;
                    }
                    a[k] = (1.0 - alpha) * sk + (k == i ? alpha * sigma : 0.0);
                }
                if (ok) dedup_into(out, a);
            }
        }
    }
    return out;
}

std::vector<Vec> l1_facets(int q) {
    if (q > 16) throw SizeLimit("l1 ball: facet enumeration needs q <= 16");
    std::vector<Vec> out;
    for (std::uint32_t mask = 0; mask < (1u << q); ++mask) {
        Vec a(q);
        for (int k = 0; k < q; ++k) a[k] = ((mask >> k) & 1u) ? 1.0 : -1.0;
        out.push_back(a);
    }
    return out;
}

// Acklam's rational approximation of the standard normal quantile; ample for
// quasi-random mesh directions.
double inv_normal(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        double q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double halton(std::size_t index, int base) {
    double f = 1.0, r = 0.0;
    for (std::size_t i = index; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

// deterministic non-degenerate directions on the euclidean sphere
std::vector<Vec> quasi_directions(int q, std::size_t count) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        Vec d(q);
        double nrm = 0.0;
        for (int k = 0; k < q; ++k) {
            double u = halton(t + 17, primes[k % 12]);
            u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
            d[k] = inv_normal(u);
            nrm += d[k] * d[k];
        }
        nrm = std::sqrt(nrm);
        if (nrm < 1e-9) continue;
        for (int k = 0; k < q; ++k) d[k] /= nrm;
        out.push_back(d);
    }
    return out;
}

// Boundary sample points phi(x)=1, deterministic per (q, samples).
std::vector<Vec> boundary_samples(const NormSpec& spec, int q, int samples) {
    std::vector<Vec> pts;
    if (q == 2) {
        for (int t = 0; t < samples; ++t) {
            double th = 2.0 * M_PI * (t + 0.5) / samples;
            Vec d{std::cos(th), std::sin(th)};
            pts.push_back(scale(d, 1.0 / norm(d, spec)));
        }
    } else {
        for (const Vec& d : quasi_directions(q, samples)) {
            double n = norm(d, spec);
            if (n > 1e-12) pts.push_back(scale(d, 1.0 / n));
        }
    }
    return pts;
}

// midpoint subdivision of triangles and tetrahedra; collects every vertex
void subdivide_collect(std::vector<Vec> simplex, int levels, std::vector<Vec>& out) {
    for (const Vec& v : simplex) dedup_into(out, v);
    if (levels == 0) return;
    auto mid = [](const Vec& a, const Vec& b) { return scale(add(a, b), 0.5); };
    if (simplex.size() == 3) {
        const Vec &a = simplex[0], &b = simplex[1], &c = simplex[2];
        Vec ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        subdivide_collect({a, ab, ca}, levels - 1, out);
        subdivide_collect({ab, b, bc}, levels - 1, out);
        subdivide_collect({ca, bc, c}, levels - 1, out);
        subdivide_collect({ab, bc, ca}, levels - 1, out);
    } else if (simplex.size() == 4) {
        const Vec &a = simplex[0], &b = simplex[1], &c = simplex[2], &d = simplex[3];
        Vec ab = mid(a, b), ac = mid(a, c), ad = mid(a, d);
        Vec bc = mid(b, c), bd = mid(b, d), cd = mid(c, d);
        subdivide_collect({a, ab, ac, ad}, levels - 1, out);
        subdivide_collect({ab, b, bc, bd}, levels - 1, out);
        subdivide_collect({ac, bc, c, cd}, levels - 1, out);
        subdivide_collect({ad, bd, cd, d}, levels - 1, out);
        // central octahedron split along the ab-cd diagonal
        subdivide_collect({ab, ac, ad, cd}, levels - 1, out);
        subdivide_collect({ab, ac, bc, cd}, levels - 1, out);
        subdivide_collect({ab, ad, bd, cd}, levels - 1, out);
        subdivide_collect({ab, bc, bd, cd}, levels - 1, out);
    }
}

// One refinement level of tangent half-spaces for a smooth lp ball.
std::vector<Vec> lp_tangent_mesh(const NormSpec& spec, double eps, int q, int refine_round) {
    std::vector<Vec> gens;
    double gap = std::acos(1.0 / (1.0 + eps));  // angular budget from the euclidean case
    if (q == 2) {
        int k = std::max(4, static_cast<int>(std::ceil(M_PI / gap)));
        k <<= refine_round;
        if (k % 2) ++k;  // antipodal symmetry
        for (int i = 0; i < k; ++i) {
            double th = 2.0 * M_PI * i / k;
            Vec d{std::cos(th), std::sin(th)};
            Vec x = scale(d, 1.0 / norm(d, spec));
            gens.push_back(support_halfspace(spec, x).a);
        }
    } else if (q == 3 || q == 4) {
        int levels = std::max(1, static_cast<int>(std::ceil(
                                     std::log2((M_PI / 2.0) / std::max(gap, 1e-9)))));
        levels += refine_round;
        if (levels > 9) throw MeshRefinementFailed("simplex subdivision too deep");
        std::vector<Vec> dirs;
        std::uint32_t facets = 1u << q;
        for (std::uint32_t mask = 0; mask < facets; ++mask) {
            std::vector<Vec> simplex;
            for (int i = 0; i < q; ++i) {
                Vec e(q, 0.0);
                e[i] = ((mask >> i) & 1u) ? 1.0 : -1.0;
                simplex.push_back(e);
            }
            subdivide_collect(simplex, levels, dirs);
        }
        for (const Vec& d : dirs) {
            double n = norm(d, spec);
            if (n < 1e-12) continue;
            gens.push_back(support_halfspace(spec, scale(d, 1.0 / n)).a);
        }
    } else {
        // scrambled quasi-random directions; the polytope is flagged approximate
        double per_dim = std::sqrt(2.0 * std::max(eps, 1e-6));
        double count = std::pow(3.0 / per_dim, q - 1) * (1 << refine_round);
        std::size_t n = static_cast<std::size_t>(std::min(count, 2e5));
        for (const Vec& d : quasi_directions(q, n)) {
            double nn = norm(d, spec);
            if (nn < 1e-12) continue;
            gens.push_back(support_halfspace(spec, scale(d, 1.0 / nn)).a);
        }
    }
    // symmetrize
    std::vector<Vec> out;
    for (const Vec& a : gens) {
        dedup_into(out, a);
        dedup_into(out, scale(a, -1.0));
    }
    return out;
}

}  // namespace

EpsSchedule::EpsSchedule(double eps1) : eps1_(eps1) {
    if (!(eps1 > 0.0)) throw BadDimensions("EpsSchedule: eps1 must be positive");
}

EpsSchedule EpsSchedule::explicit_levels(std::vector<double> levels) {
    if (levels.empty()) throw BadDimensions("EpsSchedule: empty level list");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0)) throw BadDimensions("EpsSchedule: nonpositive level");
        if (i && !(levels[i] < levels[i - 1]))
            throw BadDimensions("EpsSchedule: levels must strictly decrease");
    }
    EpsSchedule s;
    s.custom_ = std::move(levels);
    return s;
}

double EpsSchedule::at(int j) const {
    if (j < 1) throw BadDimensions("EpsSchedule: level index is 1-based");
    if (!custom_.empty()) {
        if (static_cast<std::size_t>(j) > custom_.size())
            // extend an explicit schedule geometrically past its tail
            return custom_.back() * std::pow(0.5, j - static_cast<int>(custom_.size()));
        return custom_[j - 1];
    }
    return eps1_ * std::pow(2.0, 1 - j);
}

struct Polytope::Cache {
    std::once_flag once;
    lp::VertexSet verts;
};

Polytope::Polytope(NormSpec phi, int dim, std::vector<Vec> generators, double eps_level,
                   bool approximate)
    : phi_(phi), dim_(dim), gens_(std::move(generators)), eps_(eps_level),
      approx_(approximate), cache_(std::make_shared<Cache>()) {
    if (dim_ < 1) throw BadDimensions("Polytope: dimension");
    for (const Vec& a : gens_) {
        if (a.size() != static_cast<std::size_t>(dim_)) throw BadDimensions("Polytope: gen size");
        double d = dual_norm(a, phi_);
        if (std::abs(d - 1.0) > 1e-9)
            throw BadDimensions("Polytope: generator with phi*(a) != 1");
    }
    // coordinate half-spaces and symmetry are structural invariants
    for (const Vec& e : coordinate_halfspaces(dim_)) {
        bool found = false;
        for (const Vec& a : gens_)
            if (same_direction(a, e)) found = true;
        if (!found) throw BadDimensions("Polytope: missing coordinate half-space");
    }
    for (const Vec& a : gens_) {
        Vec na = scale(a, -1.0);
        bool found = false;
        for (const Vec& b : gens_)
            if (same_direction(b, na)) found = true;
        if (!found) throw BadDimensions("Polytope: not symmetric");
    }
}

Mat Polytope::gamma() const {
    Mat g(dim_, gens_.size(), 0.0);
    for (std::size_t j = 0; j < gens_.size(); ++j)
        for (int i = 0; i < dim_; ++i) g(i, j) = gens_[j][i];
    return g;
}

Mat Polytope::rows_matrix() const {
    Mat g = Mat::empty(gens_.size(), dim_);
    for (std::size_t i = 0; i < gens_.size(); ++i)
        for (int j = 0; j < dim_; ++j) g(i, j) = gens_[i][j];
    return g;
}

const lp::VertexSet& Polytope::vertices() const {
    std::call_once(cache_->once, [&] {
        lp::VertexEnumOptions opt;
        opt.row_cap = 4096;
        opt.dim_cap = 8;
        opt.check_bounded = false;  // bounded by the coordinate box
        cache_->verts = lp::enumerate_vertices(rows_matrix(), Vec(gens_.size(), 1.0), opt);
    });
    return cache_->verts;
}

std::string Polytope::to_json() const {
    std::vector<Vec> sorted = gens_;
    std::sort(sorted.begin(), sorted.end(), [](const Vec& a, const Vec& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    nlohmann::json j;
    j["eps"] = eps_;
    j["approximate"] = approx_;
    j["generators"] = nlohmann::json::array();
    for (const Vec& a : sorted) j["generators"].push_back(a.raw());
    return j.dump();
}

Halfspace support_halfspace(const NormSpec& spec, const Vec& x) {
    if (std::abs(norm(x, spec) - 1.0) > 1e-10)
        throw NotOnSphere("support_halfspace: phi(x) != 1");
    int q = static_cast<int>(x.size());
    if (spec.kind() == NormSpec::Kind::Lp) {
        double p = spec.p();
        if (p > 1.0 && p != kInf) {
            Vec a(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                double m = std::abs(x[i]);
                a[i] = (x[i] >= 0 ? 1.0 : -1.0) * std::pow(m, p - 1.0);
            }
            double d = dual_norm(a, spec);
            return {scale(a, 1.0 / d)};
        }
        if (p == 1.0) {
            Vec a(x.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                a[i] = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 1.0);  // lowest-index rule: +1 at zeros
            return {a};
        }
        // p = inf: face normal at the first coordinate attaining the max
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(std::abs(x[i]) - 1.0) <= 1e-10) {
                Vec a(x.size(), 0.0);
                a[i] = x[i] >= 0 ? 1.0 : -1.0;
                return {a};
            }
        throw NotOnSphere("support_halfspace: no max coordinate on the cube");
    }
    // mixed norm: best extreme point of the dual ball, first match wins ties
    std::vector<Vec> ext = mixed_dual_extremes(spec.alpha(), q);
    double best = -kInf;
    Vec besta;
    for (const Vec& a : ext) {
        double v = dot(a, x);
        if (v > best + 1e-14) {
            best = v;
            besta = a;
        }
    }
    if (std::abs(best - 1.0) > 1e-9) throw NotOnSphere("support_halfspace: mixed norm mismatch");
    return {besta};
}

Polytope build_Q(const NormSpec& spec, int j, const EpsSchedule& sched, int q) {
    if (j < 1) throw BadDimensions("build_Q: level index");
    bool approx = q > 4 && !spec.is_polyhedral();
    std::vector<Vec> gens = coordinate_halfspaces(q);

    if (spec.is_polyhedral()) {
        std::vector<Vec> facets;
        if (spec.kind() == NormSpec::Kind::MixedInfOne)
            facets = mixed_dual_extremes(spec.alpha(), q);
        else if (spec.p() == 1.0)
            facets = l1_facets(q);
        // p = inf: the coordinate half-spaces already give the exact cube
        for (const Vec& a : facets) dedup_into(gens, a);
        return Polytope(spec, q, std::move(gens), sched.at(j), false);
    }

    for (int k = 1; k <= j; ++k) {
        double eps = sched.at(k);
        for (int round = 0;; ++round) {
            if (round >= 20) throw MeshRefinementFailed("build_Q: sandwich not reached");
            std::vector<Vec> level = lp_tangent_mesh(spec, eps, q, round);
            std::vector<Vec> trial = gens;
            for (const Vec& a : level) dedup_into(trial, a);
            Polytope probe(spec, q, trial, eps, approx);
            int samples = q == 2 ? 720 : 2000;
            if (sandwich_check(probe, spec, eps, samples)) {
                gens = std::move(trial);
                break;
            }
        }
    }
    return Polytope(spec, q, std::move(gens), sched.at(j), approx);
}

bool sandwich_check(const Polytope& p, const NormSpec& spec, double eps, int samples) {
    if (samples < 1) throw BadDimensions("sandwich_check: samples >= 1");
    for (const Vec& a : p.generators())
        if (dual_norm(a, spec) > 1.0 + 1e-9) return false;  // outer containment broken
    double need = 1.0 / (1.0 + eps) - 1e-9;
    for (const Vec& astar : boundary_samples(spec, p.dim(), samples)) {
        double best = -kInf;
        for (const Vec& a : p.generators()) best = std::max(best, dot(astar, a));
        if (best < need) return false;
    }
    return true;
}

HPoly HPoly::from_rows(const Mat& G, const Vec& h) {
    HPoly p;
    p.G = G;
    p.h = h;
    p.E = Mat::empty(0, G.cols());
    return p;
}

namespace {

// Exhaustive equality-constrained least-squares search over active subsets.
// Exact for small row counts: the projection solves the LS problem on the
// affine hull of its minimal active face, so scanning all subsets of size
// <= dim and keeping the best feasible candidate recovers it.
std::optional<Vec> project_exhaustive(const Vec& x, const Mat& G, const Vec& h, const Mat& E,
                                      const Vec& f) {
    std::size_t n = x.size(), r = G.rows(), me = E.rows();
    auto ls_on_affine = [&](const std::vector<std::size_t>& act) -> std::optional<Vec> {
        std::size_t k = me + act.size();
        if (k == 0) return x;
        // minimize ||z - x|| s.t. C z = d  via  z = x - C^T lam, C C^T lam = C x - d
        Mat c = Mat::empty(k, n);
        Vec d(k);
        for (std::size_t i = 0; i < me; ++i) {
            for (std::size_t jj = 0; jj < n; ++jj) c(i, jj) = E(i, jj);
            d[i] = f[i];
        }
        for (std::size_t i = 0; i < act.size(); ++i) {
            for (std::size_t jj = 0; jj < n; ++jj) c(me + i, jj) = G(act[i], jj);
            d[me + i] = h[act[i]];
        }
        Mat cct = matmul(c, c.transposed());
        Vec rhs = sub(matvec(c, x), d);
        Vec lam = least_squares(cct, rhs);
        Vec z = sub(x, mat_t_vec(c, lam));
        // consistency: the affine subset may be contradictory
        Vec res = sub(matvec(c, z), d);
        double scl = 1.0 + norm_inf(d) + norm_inf(x);
        if (norm_inf(res) > 1e-8 * scl) return std::nullopt;
        return z;
    };
    double best_dist = kInf;
    std::optional<Vec> best;
    // row-relative feasibility scale so distant probes still certify
    Vec gx_ref = r ? matvec(G, x) : Vec();
    auto row_tol = [&](std::size_t i) {
        return 1e-8 * (1.0 + std::abs(h[i]) + std::abs(gx_ref[i]));
    };
    auto consider = [&](const std::optional<Vec>& z) {
        if (!z) return;
        if (r) {
            Vec gz = matvec(G, *z);
            for (std::size_t i = 0; i < r; ++i)
                if (gz[i] > h[i] + row_tol(i)) return;
        }
        double dist = norm2(sub(*z, x));
        if (dist < best_dist) {
            best_dist = dist;
            best = *z;
        }
    };
    std::size_t max_k = std::min(n, r);
    std::vector<std::size_t> stack;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        consider(ls_on_affine(stack));
        if (stack.size() == max_k) return;
        for (std::size_t i = start; i < r; ++i) {
            stack.push_back(i);
            self(self, i + 1);
            stack.pop_back();
        }
    };
    rec(rec, 0);
    if (!best) return std::nullopt;
    return best;
}

// Least-distance step: min ||y|| s.t. C y <= g, via the Lawson-Hanson
// reduction to nonnegative least squares.
std::optional<Vec> ldp(const Mat& c, const Vec& g) {
    std::size_t m = c.rows(), n = c.cols();
    Mat e = Mat::empty(n + 1, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t jj = 0; jj < n; ++jj) e(jj, i) = -c(i, jj);
        e(n, i) = -g[i];
    }
    Vec fvec(n + 1, 0.0);
    fvec[n] = 1.0;
    Vec u = nnls(e, fvec, static_cast<int>(20 * m + 200));
    Vec r = sub(matvec(e, u), fvec);
    double rn = r[n];
    if (std::abs(rn) < 1e-12) return std::nullopt;  // infeasible system
    Vec y(n);
    for (std::size_t jj = 0; jj < n; ++jj) y[jj] = -r[jj] / rn;
    return y;
}

Vec project_impl_core(const Vec& x, const Mat& G, const Vec& h, const Mat& E, const Vec& f);

// scale-normalized wrapper: G z <= h iff G (z/s) <= h/s, so project x/s onto
// the shrunk set and scale back; keeps the dual solver well conditioned for
// far-away probes
Vec project_impl(const Vec& x, const Mat& G, const Vec& h, const Mat& E, const Vec& f) {
    double s = std::max(1.0, norm_inf(x));
    if (s <= 16.0) return project_impl_core(x, G, h, E, f);
    Vec hs = scale(h, 1.0 / s), fs = scale(f, 1.0 / s);
    return scale(project_impl_core(scale(x, 1.0 / s), G, hs, E, fs), s);
}

Vec project_impl_core(const Vec& x, const Mat& G, const Vec& h, const Mat& E, const Vec& f) {
    std::size_t n = x.size();
    if (G.rows() != h.size() || E.rows() != f.size())
        throw BadDimensions("project: inconsistent blocks");
    if (G.rows() <= kExhaustiveCap) {
        auto z = project_exhaustive(x, G, h, E, f);
        if (!z) throw Infeasible("project: empty feasible set");
        return *z;
    }
    // reduce equalities to an orthonormal parameterization, then least-distance
    Vec x0(n, 0.0);
    Mat basis = Mat::identity(n);
    if (E.rows() > 0) {
        x0 = least_squares(E, f);
        if (norm_inf(sub(matvec(E, x0), f)) > 1e-8 * (1.0 + norm_inf(f)))
            throw Infeasible("project: inconsistent equalities");
        basis = null_basis(E);
    }
    // with orthonormal basis B: min ||x0 + B w - x|| over (G B) w <= h - G x0;
    // recentre at w0 = B^T (x - x0) so it becomes a least-distance problem
    Vec w0 = mat_t_vec(basis, sub(x, x0));
    Mat cb = matmul(G, basis);
    Vec gshift(G.rows());
    {
        Vec gx0 = matvec(G, x0);
        Vec cw0 = matvec(cb, w0);
        for (std::size_t i = 0; i < G.rows(); ++i) gshift[i] = h[i] - gx0[i] - cw0[i];
    }
    auto y = ldp(cb, gshift);
    if (!y) throw Infeasible("project: empty feasible set");
    Vec w = add(w0, *y);
    Vec z = add(x0, matvec(basis, w));
    // feasibility certificate (row-relative); polish through the exhaustive
    // path on the near-active rows if the dual step drifted
    Vec gx_ref = matvec(G, x);
    auto row_scale = [&](std::size_t i) {
        return 1.0 + std::abs(h[i]) + std::abs(gx_ref[i]);
    };
    Vec gz = matvec(G, z);
    double viol = 0.0;
    for (std::size_t i = 0; i < G.rows(); ++i)
        viol = std::max(viol, (gz[i] - h[i]) / row_scale(i));
    if (viol > 1e-7) {
        std::vector<std::size_t> near;
        for (std::size_t i = 0; i < G.rows(); ++i)
            if (gz[i] > h[i] - 1e-4 * row_scale(i)) near.push_back(i);
        if (near.size() <= 24) {
            Mat gn = Mat::empty(near.size(), n);
            Vec hn(near.size());
            for (std::size_t i = 0; i < near.size(); ++i) {
                for (std::size_t jj = 0; jj < n; ++jj) gn(i, jj) = G(near[i], jj);
                hn[i] = h[near[i]];
            }
            auto z2 = project_exhaustive(x, gn, hn, E, f);
            if (z2) {
                Vec gz2 = matvec(G, *z2);
                double v2 = 0.0;
                for (std::size_t i = 0; i < G.rows(); ++i)
                    v2 = std::max(v2, (gz2[i] - h[i]) / row_scale(i));
                if (v2 <= 1e-7) return *z2;
            }
        }
        throw NumericalBreakdown("project: dual step failed to certify");
    }
    return z;
}

}  // namespace

Vec project(const HPoly& P, const Vec& x) { return project_impl(x, P.G, P.h, P.E, P.f); }

Vec project(const Polytope& p, const Vec& x) {
    return project_impl(x, p.rows_matrix(), Vec(p.generators().size(), 1.0),
                        Mat::empty(0, p.dim()), Vec());
}

Vec project(const Polytope& p, const Vec& x, const Mat& E, const Vec& f) {
    return project_impl(x, p.rows_matrix(), Vec(p.generators().size(), 1.0), E, f);
}

double hausdorff_nested(const HPoly& inner, const HPoly& outer, const HausdorffOptions& opt) {
    lp::VertexEnumOptions vopt;
    vopt.row_cap = opt.vertex_budget_rows;
    vopt.dim_cap = opt.vertex_budget_dim;
    if (opt.check_nested) {
        lp::VertexSet vin = lp::enumerate_vertices(inner.G, inner.h, vopt);
        for (const Vec& v : vin) {
            Vec gz = matvec(outer.G, v);
            for (std::size_t i = 0; i < outer.G.rows(); ++i)
                if (gz[i] > outer.h[i] + 1e-7 * (1.0 + std::abs(outer.h[i])))
                    throw NotNested("hausdorff_nested: inner vertex escapes outer");
        }
    }
    lp::VertexSet vout = lp::enumerate_vertices(outer.G, outer.h, vopt);
    double worst = 0.0;
    for (const Vec& v : vout) worst = std::max(worst, norm2(sub(v, project(inner, v))));
    return worst;
}

double hausdorff_nested(const Polytope& inner, const Polytope& outer,
                        const HausdorffOptions& opt) {
    return hausdorff_nested(
        HPoly::from_rows(inner.rows_matrix(), Vec(inner.generators().size(), 1.0)),
        HPoly::from_rows(outer.rows_matrix(), Vec(outer.generators().size(), 1.0)), opt);
}

}  // namespace sparsestab::ball
