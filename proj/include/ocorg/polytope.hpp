#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ocorg/errors.hpp"
#include "ocorg/matrix.hpp"

namespace ocorg {

// One row of an H-representation: {z : normal^T z <= offset}.
struct Halfspace {
    Vector normal;
    double offset = 0.0;

    Halfspace() = default;
    Halfspace(Vector n, double off) : normal(std::move(n)), offset(off) {}
};

// Convex polytope {z : H z <= h}. Immutable after construction. Rows with a
// zero normal are dropped when their offset is nonnegative and reject the
// construction (empty set) otherwise.
class Polytope {
public:
    Polytope(std::size_t dim, std::vector<Halfspace> rows, bool certify_nonempty = false)
        : dim_(dim) {
        rows_.reserve(rows.size());
        for (auto& r : rows) {
            if (r.normal.size() != dim_)
                throw DimensionMismatch("Polytope: row dimension " +
                                        std::to_string(r.normal.size()) + " != " + std::to_string(dim_));
            if (max_abs(r.normal) <= 1e-14) {
                if (r.offset < 0.0)
                    throw Infeasible("Polytope: zero-normal row with negative offset marks the empty set");
                continue; // trivially satisfied
            }
            rows_.push_back(std::move(r));
        }
        if (certify_nonempty) certify_nonempty_now();
    }

    static Polytope from_hrep(const Matrix& h_mat, const Vector& h_vec, bool certify_nonempty = false) {
        if (h_mat.rows() != h_vec.size())
            throw DimensionMismatch("Polytope::from_hrep: H rows != h size");
        std::vector<Halfspace> rows;
        rows.reserve(h_mat.rows());
        for (std::size_t i = 0; i < h_mat.rows(); ++i) {
            Vector n(h_mat.cols(), 1);
            for (std::size_t j = 0; j < h_mat.cols(); ++j) n[j] = h_mat(i, j);
            rows.emplace_back(std::move(n), h_vec[i]);
        }
        return Polytope(h_mat.cols(), std::move(rows), certify_nonempty);
    }

    // Axis-aligned box |z_i| <= bound_i.
    static Polytope box(const std::vector<double>& bounds) {
        const std::size_t d = bounds.size();
        std::vector<Halfspace> rows;
        rows.reserve(2 * d);
        for (std::size_t i = 0; i < d; ++i) {
            Vector e(d, 1);
            e[i] = 1.0;
            rows.emplace_back(e, bounds[i]);
            e[i] = -1.0;
            rows.emplace_back(e, bounds[i]);
        }
        return Polytope(d, std::move(rows));
    }

    std::size_t dim() const { return dim_; }
    std::size_t row_count() const { return rows_.size(); }
    const std::vector<Halfspace>& rows() const { return rows_; }
    const Halfspace& row(std::size_t i) const { return rows_[i]; }

    Matrix h_matrix() const {
        Matrix h(rows_.size(), dim_);
        for (std::size_t i = 0; i < rows_.size(); ++i)
            for (std::size_t j = 0; j < dim_; ++j) h(i, j) = rows_[i].normal[j];
        return h;
    }

    Vector h_vector() const {
        Vector h(rows_.size(), 1);
        for (std::size_t i = 0; i < rows_.size(); ++i) h[i] = rows_[i].offset;
        return h;
    }

    // A strictly feasible point callers may attach to speed up projections.
    const std::optional<Vector>& interior_point() const { return interior_point_; }

    Polytope with_interior_point(Vector p) const {
        Polytope out = *this;
        out.interior_point_ = std::move(p);
        return out;
    }

private:
    void certify_nonempty_now() const; // defined below (needs chebyshev_center)

    std::size_t dim_ = 0;
    std::vector<Halfspace> rows_;
    std::optional<Vector> interior_point_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Vector point; // maximizer when Optimal
};

namespace detail {

// Dense two-phase simplex with Bland's anti-cycling rule.
// maximize c^T z  s.t.  H z <= h,  z free (split into z+ - z-).
class SimplexSolver {
public:
    SimplexSolver(const Vector& objective, const Polytope& p)
        : d_(p.dim()), m_(p.row_count()) {
        // variable layout: [z+ (d), z- (d), slack (m), artificial (n_art)]
        n_struct_ = 2 * d_ + m_;
        std::vector<bool> needs_art(m_, false);
        for (std::size_t i = 0; i < m_; ++i)
            if (p.row(i).offset < 0.0) needs_art[i] = true;
        n_art_ = 0;
        for (std::size_t i = 0; i < m_; ++i)
            if (needs_art[i]) ++n_art_;
        n_total_ = n_struct_ + n_art_;

        tab_.assign(m_, std::vector<double>(n_total_ + 1, 0.0));
        basis_.assign(m_, 0);
        active_row_.assign(m_, true);

        std::size_t art = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& row = p.row(i);
            const double sgn = needs_art[i] ? -1.0 : 1.0;
            for (std::size_t j = 0; j < d_; ++j) {
                tab_[i][j] = sgn * row.normal[j];
                tab_[i][d_ + j] = -sgn * row.normal[j];
            }
            tab_[i][2 * d_ + i] = sgn; // slack
            tab_[i][n_total_] = sgn * row.offset;
            if (needs_art[i]) {
                tab_[i][n_struct_ + art] = 1.0;
                basis_[i] = n_struct_ + art;
                ++art;
            } else {
                basis_[i] = 2 * d_ + i;
            }
        }

        obj_.assign(n_total_, 0.0);
        for (std::size_t j = 0; j < d_; ++j) {
            obj_[j] = objective[j];
            obj_[d_ + j] = -objective[j];
        }
    }

    LpSolution solve() {
        LpSolution out;
        if (n_art_ > 0) {
            std::vector<double> phase1(n_total_, 0.0);
            for (std::size_t j = n_struct_; j < n_total_; ++j) phase1[j] = 1.0;
            if (!run_phase(phase1, /*allow_art=*/true))
                throw Error("lp_solve: simplex iteration limit in phase 1");
            if (objective_value(phase1) > 1e-9) {
                out.status = LpStatus::Infeasible;
                return out;
            }
            purge_artificials();
        }
        const bool bounded = run_phase(negated(obj_), /*allow_art=*/false);
        if (!bounded) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        out.status = LpStatus::Optimal;
        out.point = Vector(d_, 1);
        std::vector<double> values(n_total_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (active_row_[i]) values[basis_[i]] = tab_[i][n_total_];
        for (std::size_t j = 0; j < d_; ++j) out.point[j] = values[j] - values[d_ + j];
        out.value = 0.0;
        for (std::size_t j = 0; j < n_total_; ++j) out.value += obj_[j] * values[j];
        return out;
    }

private:
    static std::vector<double> negated(std::vector<double> v) {
        for (double& x : v) x = -x;
        return v;
    }

    double objective_value(const std::vector<double>& cost) const {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (active_row_[i]) s += cost[basis_[i]] * tab_[i][n_total_];
        return s;
    }

    // Minimizes cost^T w. Returns false on unboundedness; throws on iteration
    // limit (phase 1) so callers can distinguish the two.
    bool run_phase(const std::vector<double>& cost, bool allow_art) {
        // reduced-cost row maintained incrementally: red[j] = c_j - c_B^T B^{-1} A_j
        std::vector<double> red(cost.begin(), cost.end());
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_row_[i]) continue;
            const double cb = cost[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < n_total_; ++j) red[j] -= cb * tab_[i][j];
        }
        const std::size_t limit = 20000 + 200 * (m_ + n_total_);
        for (std::size_t iter = 0; iter < limit; ++iter) {
            // Bland: entering = smallest index with negative reduced cost
            std::size_t enter = n_total_;
            const std::size_t scan_end = allow_art ? n_total_ : n_struct_;
            for (std::size_t j = 0; j < scan_end; ++j) {
                if (red[j] < -1e-9) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_total_) return true; // optimal
            // Bland: leaving = min ratio, ties by smallest basic variable index
            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (!active_row_[i]) continue;
                const double a = tab_[i][enter];
                if (a <= 1e-11) continue;
                const double ratio = tab_[i][n_total_] / a;
                if (leave == m_ || ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == m_) return false; // unbounded in this phase
            pivot(leave, enter, red);
        }
        throw Error("lp_solve: simplex iteration limit (degenerate cycling?)");
    }

    void pivot(std::size_t leave, std::size_t enter, std::vector<double>& red) {
        const double piv = tab_[leave][enter];
        const double inv = 1.0 / piv;
        for (std::size_t j = 0; j <= n_total_; ++j) tab_[leave][j] *= inv;
        tab_[leave][enter] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == leave || !active_row_[i]) continue;
            const double f = tab_[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_total_; ++j) tab_[i][j] -= f * tab_[leave][j];
            tab_[i][enter] = 0.0;
        }
        const double rf = red[enter];
        if (rf != 0.0)
            for (std::size_t j = 0; j < n_total_; ++j) red[j] -= rf * tab_[leave][j];
        red[enter] = 0.0;
        basis_[leave] = enter;
    }

    // After phase 1: pivot remaining basic artificials out, or deactivate
    // their rows when they are redundant (all-zero in structural columns).
    void purge_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_row_[i] || basis_[i] < n_struct_) continue;
            std::size_t col = n_struct_;
            for (std::size_t j = 0; j < n_struct_; ++j) {
                if (std::abs(tab_[i][j]) > 1e-9) {
                    col = j;
                    break;
                }
            }
            if (col == n_struct_) {
                active_row_[i] = false;
                continue;
            }
            std::vector<double> dummy(n_total_, 0.0);
            pivot(i, col, dummy);
        }
    }

    std::size_t d_, m_, n_struct_ = 0, n_art_ = 0, n_total_ = 0;
    std::vector<std::vector<double>> tab_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_row_;
    std::vector<double> obj_;
};

} // namespace detail

// Status-returning LP: maximize objective^T z over P.
inline LpSolution try_lp_solve(const Vector& objective, const Polytope& p) {
    if (objective.size() != p.dim())
        throw DimensionMismatch("lp_solve: objective dimension " + std::to_string(objective.size()) +
                                " != " + std::to_string(p.dim()));
    if (p.row_count() == 0) {
        LpSolution out;
        if (max_abs(objective) <= 1e-14) {
            out.status = LpStatus::Optimal;
            out.value = 0.0;
            out.point = Vector(p.dim(), 1);
        } else {
            out.status = LpStatus::Unbounded;
        }
        return out;
    }
    detail::SimplexSolver solver(objective, p);
    return solver.solve();
}

// Throwing LP wrapper: returns (optimum, maximizer).
inline std::pair<double, Vector> lp_solve(const Vector& objective, const Polytope& p) {
    const LpSolution sol = try_lp_solve(objective, p);
    switch (sol.status) {
    case LpStatus::Optimal: return {sol.value, sol.point};
    case LpStatus::Infeasible: throw Infeasible("lp_solve: phase-1 optimum positive");
    default: throw Unbounded("lp_solve: objective unbounded over polytope");
    }
}

inline bool contains(const Polytope& p, const Vector& z, double tol = 1e-9) {
    if (z.size() != p.dim())
        throw DimensionMismatch("contains: point dimension " + std::to_string(z.size()) +
                                " != " + std::to_string(p.dim()));
    for (const auto& row : p.rows())
        if (dot(row.normal, z) > row.offset + tol) return false;
    return true;
}

// Support function h_P(direction) = max_{z in P} direction^T z.
inline double support(const Polytope& p, const Vector& direction) {
    return lp_solve(direction, p).first;
}

// Drops every row implied by the others; processes rows in listed order.
// A row survives when maximizing its normal over the remaining rows exceeds
// its offset by more than 1e-9 (or is unbounded).
inline Polytope remove_redundancy(const Polytope& p) {
    const std::size_t m = p.row_count();
    std::vector<bool> keep(m, true);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Halfspace> others;
        others.reserve(m - 1);
        for (std::size_t j = 0; j < m; ++j)
            if (j != i && keep[j]) others.push_back(p.row(j));
        if (others.empty()) break; // last remaining row always kept
        const Polytope rest(p.dim(), std::move(others));
        const LpSolution sol = try_lp_solve(p.row(i).normal, rest);
        if (sol.status == LpStatus::Optimal && sol.value <= p.row(i).offset + 1e-9)
            keep[i] = false;
    }
    std::vector<Halfspace> kept;
    for (std::size_t i = 0; i < m; ++i)
        if (keep[i]) kept.push_back(p.row(i));
    Polytope out(p.dim(), std::move(kept));
    if (p.interior_point()) out = out.with_interior_point(*p.interior_point());
    return out;
}

// beta * P for 0 in P, realized by scaling every offset.
inline Polytope scale(const Polytope& p, double beta) {
    if (!(beta > 0.0) || beta > 1.0)
        throw InvalidBeta("scale: beta = " + std::to_string(beta) + " not in (0, 1]");
    const Vector origin(p.dim(), 1);
    if (!contains(p, origin))
        throw Error("scale: 0 not in polytope, offset scaling invalid");
    std::vector<Halfspace> rows = p.rows();
    for (auto& r : rows) r.offset *= beta;
    return Polytope(p.dim(), std::move(rows));
}

// Largest inscribed ball: maximize r s.t. normal^T z + r ||normal|| <= offset.
// radius > 0 certifies nonempty interior.
inline std::pair<Vector, double> chebyshev_center(const Polytope& p) {
    if (p.row_count() == 0)
        throw Error("chebyshev_center: polytope has no rows");
    const std::size_t d = p.dim();
    std::vector<Halfspace> lifted;
    lifted.reserve(p.row_count());
    for (const auto& row : p.rows()) {
        Vector n(d + 1, 1);
        for (std::size_t j = 0; j < d; ++j) n[j] = row.normal[j];
        n[d] = norm2(row.normal);
        lifted.emplace_back(std::move(n), row.offset);
    }
    Vector objective(d + 1, 1);
    objective[d] = 1.0;
    const LpSolution sol = try_lp_solve(objective, Polytope(d + 1, std::move(lifted)));
    if (sol.status == LpStatus::Unbounded)
        throw Unbounded("chebyshev_center: polytope unbounded");
    if (sol.status == LpStatus::Infeasible || sol.value < 0.0)
        throw Infeasible("chebyshev_center: polytope empty");
    Vector center(d, 1);
    for (std::size_t j = 0; j < d; ++j) center[j] = sol.point[j];
    return {center, sol.value};
}

inline void Polytope::certify_nonempty_now() const {
    chebyshev_center(*this); // throws Infeasible when empty
}

// Component-wise bounds [lo_i, hi_i] via support calls; throws Unbounded.
inline std::pair<Vector, Vector> axis_bounds(const Polytope& p) {
    const std::size_t d = p.dim();
    Vector lo(d, 1), hi(d, 1);
    for (std::size_t i = 0; i < d; ++i) {
        Vector e(d, 1);
        e[i] = 1.0;
        hi[i] = support(p, e);
        e[i] = -1.0;
        lo[i] = -support(p, e);
    }
    return {lo, hi};
}

struct ProjectionResult {
    Vector point;
    std::vector<std::size_t> active_rows;
    std::vector<double> multipliers; // one per active row, >= 0 at the solution
};

// Euclidean projection onto P by a primal active-set method for
// min ||s - z||^2 s.t. H s <= h. Exact in finitely many steps for
// nondegenerate instances; iteration limit 100 * rows.
inline ProjectionResult project_with_multipliers(const Polytope& p, const Vector& z) {
    if (z.size() != p.dim())
        throw DimensionMismatch("project: point dimension mismatch");
    const std::size_t d = p.dim();
    ProjectionResult out;
    if (contains(p, z, 1e-12)) {
        out.point = z;
        return out;
    }
    Vector s = p.interior_point() ? *p.interior_point() : chebyshev_center(p).first;
    std::vector<std::size_t> work; // active set, in insertion order
    const std::size_t max_iter = 100 * std::max<std::size_t>(p.row_count(), 1);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const std::size_t w = work.size();
        // KKT system for the equality-constrained step:
        // [I  A_W^T] [dir]   [z - s]
        // [A_W  0  ] [mu ] = [  0  ]
        Matrix kkt(d + w, d + w);
        Matrix rhs(d + w, 1);
        for (std::size_t i = 0; i < d; ++i) {
            kkt(i, i) = 1.0;
            rhs[i] = z[i] - s[i];
        }
        for (std::size_t k = 0; k < w; ++k) {
            const Vector& a = p.row(work[k]).normal;
            for (std::size_t i = 0; i < d; ++i) {
                kkt(i, d + k) = a[i];
                kkt(d + k, i) = a[i];
            }
        }
        Matrix sol(0, 0);
        try {
            sol = solve_linear(kkt, rhs);
        } catch (const SingularMatrix&) {
            work.pop_back(); // degenerate working set; retry without newest row
            continue;
        }
        Vector dir(d, 1);
        for (std::size_t i = 0; i < d; ++i) dir[i] = sol[i];
        if (max_abs(dir) <= 1e-12) {
            // stationary on the working set; check multipliers
            double worst = 0.0;
            std::size_t worst_k = w;
            for (std::size_t k = 0; k < w; ++k) {
                const double mu = sol[d + k];
                if (mu < worst) {
                    worst = mu;
                    worst_k = k;
                }
            }
            if (worst >= -1e-10) {
                out.point = s;
                out.active_rows = work;
                out.multipliers.resize(w);
                for (std::size_t k = 0; k < w; ++k) out.multipliers[k] = std::max(0.0, sol[d + k]);
                return out;
            }
            work.erase(work.begin() + static_cast<std::ptrdiff_t>(worst_k));
            continue;
        }
        // ratio test against inactive rows
        double alpha = 1.0;
        std::size_t blocker = p.row_count();
        for (std::size_t i = 0; i < p.row_count(); ++i) {
            if (std::find(work.begin(), work.end(), i) != work.end()) continue;
            const double adir = dot(p.row(i).normal, dir);
            if (adir <= 1e-14) continue;
            const double room = std::max(0.0, (p.row(i).offset - dot(p.row(i).normal, s)) / adir);
            if (room < alpha - 1e-15) {
                alpha = room;
                blocker = i;
            }
        }
        s += dir * alpha;
        if (blocker < p.row_count())
            work.push_back(blocker);
    }
    throw IterationLimit("project: active-set iteration limit, degenerate cycling suspected");
}

inline Vector project(const Polytope& p, const Vector& z) {
    return project_with_multipliers(p, z).point;
}

} // namespace ocorg
