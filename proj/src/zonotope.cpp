#include "reach/zonotope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace reach {

namespace {

void require_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw DimensionMismatch(std::string(what) + ": dimension " + std::to_string(a) + " vs " +
                                std::to_string(b));
    }
}

Matrix drop_zero_columns(const Matrix& g) {
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(g.cols()));
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        if ((g.col(j).array() != 0.0).any()) keep.push_back(j);
    }
    if (static_cast<Eigen::Index>(keep.size()) == g.cols()) return g;
    Matrix out(g.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = g.col(keep[j]);
    return out;
}

Matrix concat_columns(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

Vector abs_row_sums(const Matrix& g) {
    if (g.cols() == 0) return Vector::Zero(g.rows());
    return g.cwiseAbs().rowwise().sum();
}

}  // namespace

IntervalVector::IntervalVector(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    require_dim(lo.size(), hi.size(), "interval vector bounds");
    if ((lo.array() > hi.array()).any()) throw InvalidArgument("interval vector requires lo <= hi");
}

bool IntervalVector::contains(const Vector& x, double tol) const {
    if (x.size() != dim()) return false;
    return ((lo.array() - tol) <= x.array()).all() && (x.array() <= (hi.array() + tol)).all();
}

Zonotope::Zonotope(Vector center, Matrix generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
    if (generators_.cols() == 0) generators_.resize(center_.size(), 0);
    require_dim(generators_.rows(), center_.size(), "zonotope generators");
    if (!center_.allFinite() || !generators_.allFinite()) {
        throw InvalidArgument("zonotope entries must be finite");
    }
    generators_ = drop_zero_columns(generators_);
}

Zonotope Zonotope::point(Vector p) {
    const Eigen::Index n = p.size();
    return Zonotope(std::move(p), Matrix(n, 0));
}

Zonotope Zonotope::box(const Vector& center, const Vector& half_widths) {
    require_dim(center.size(), half_widths.size(), "box");
    if ((half_widths.array() < 0.0).any()) throw InvalidArgument("negative box half-width");
    return Zonotope(center, half_widths.asDiagonal().toDenseMatrix());
}

Zonotope Zonotope::from_interval(const IntervalVector& iv) {
    return box(iv.center(), iv.radius());
}

double Zonotope::order() const {
    return dim() == 0 ? 0.0 : static_cast<double>(num_generators()) / static_cast<double>(dim());
}

Zonotope Zonotope::translated(const Vector& offset) const {
    require_dim(offset.size(), dim(), "translate");
    return Zonotope(center_ + offset, generators_);
}

Zonotope Zonotope::centered() const {
    return Zonotope(Vector::Zero(dim()), generators_);
}

Zonotope minkowski_sum(const Zonotope& z1, const Zonotope& z2) {
    require_dim(z1.dim(), z2.dim(), "minkowski_sum");
    return Zonotope(z1.center() + z2.center(), concat_columns(z1.generators(), z2.generators()));
}

Zonotope linear_map(const Matrix& m, const Zonotope& z) {
    require_dim(m.cols(), z.dim(), "linear_map");
    return Zonotope(m * z.center(), m * z.generators());
}

Zonotope interval_map(const IntervalMatrix& m, const Zonotope& z) {
    require_dim(m.cols(), z.dim(), "interval_map");
    const Vector magnitude = z.center().cwiseAbs() + abs_row_sums(z.generators());
    const Vector half_widths = m.rad() * magnitude;
    const Matrix mid = m.mid();
    return Zonotope(mid * z.center(),
                    concat_columns(mid * z.generators(), half_widths.asDiagonal().toDenseMatrix()));
}

Zonotope convex_hull_step(const Zonotope& z, const Matrix& w, const Vector& offset) {
    require_dim(w.cols(), z.dim(), "convex_hull_step");
    require_dim(w.rows(), z.dim(), "convex_hull_step");
    require_dim(offset.size(), z.dim(), "convex_hull_step offset");
    const Vector& c = z.center();
    const Matrix& g = z.generators();
    const Vector far_center = w * c + offset;
    const Matrix wg = w * g;
    Matrix gens(z.dim(), 2 * g.cols() + 1);
    gens << 0.5 * (g + wg), 0.5 * (c - far_center), 0.5 * (g - wg);
    return Zonotope(0.5 * (c + far_center), gens);
}

Zonotope convex_hull_step(const Zonotope& z, const Matrix& w) {
    return convex_hull_step(z, w, Vector::Zero(z.dim()));
}

Zonotope convex_hull_gap(const Zonotope& z, const Matrix& w) {
    require_dim(w.cols(), z.dim(), "convex_hull_gap");
    require_dim(w.rows(), z.dim(), "convex_hull_gap");
    return Zonotope(Vector::Zero(z.dim()), z.generators() - w * z.generators());
}

IntervalVector box(const Zonotope& z) {
    const Vector r = abs_row_sums(z.generators());
    return IntervalVector(z.center() - r, z.center() + r);
}

double err(const IntervalVector& b) {
    return b.lo.cwiseAbs().cwiseMax(b.hi.cwiseAbs()).norm();
}

double err(const Zonotope& z) {
    return err(box(z));
}

double err_of_image(const IntervalMatrix& m, const Zonotope& z) {
    require_dim(m.cols(), z.dim(), "err_of_image");
    const Matrix mid = m.mid();
    const Vector half = abs_row_sums(mid * z.generators()) +
                        m.rad() * (z.center().cwiseAbs() + abs_row_sums(z.generators()));
    return ((mid * z.center()).cwiseAbs() + half).norm();
}

bool is_axis_aligned(const Eigen::Ref<const Vector>& g) {
    return (g.array() != 0.0).count() <= 1;
}

std::vector<Eigen::Index> reduction_order(const Matrix& generators) {
    const Eigen::Index gamma = generators.cols();
    std::vector<double> metric(static_cast<std::size_t>(gamma));
    for (Eigen::Index j = 0; j < gamma; ++j) {
        const auto col = generators.col(j);
        metric[static_cast<std::size_t>(j)] = col.lpNorm<1>() - col.lpNorm<Eigen::Infinity>();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(gamma));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return metric[static_cast<std::size_t>(a)] < metric[static_cast<std::size_t>(b)];
    });
    return order;
}

Reduction reduce_generators(const Zonotope& z, const std::vector<Eigen::Index>& order,
                            Eigen::Index count) {
    const Eigen::Index n = z.dim();
    const Eigen::Index gamma = z.num_generators();
    if (count <= 0) return {z, 0.0, 0};
    if (count > gamma || static_cast<Eigen::Index>(order.size()) != gamma) {
        throw InvalidArgument("reduce_generators: invalid removal count or order");
    }
    const Matrix& g = z.generators();
    Vector boxed = Vector::Zero(n);
    Vector lossy = Vector::Zero(n);
    std::vector<bool> removed(static_cast<std::size_t>(gamma), false);
    for (Eigen::Index k = 0; k < count; ++k) {
        const Eigen::Index j = order[static_cast<std::size_t>(k)];
        removed[static_cast<std::size_t>(j)] = true;
        const Vector a = g.col(j).cwiseAbs();
        boxed += a;
        if (!is_axis_aligned(g.col(j))) lossy += a;
    }
    Matrix gens(n, gamma - count + n);
    Eigen::Index next = 0;
    for (Eigen::Index j = 0; j < gamma; ++j) {
        if (!removed[static_cast<std::size_t>(j)]) gens.col(next++) = g.col(j);
    }
    gens.rightCols(n) = boxed.asDiagonal().toDenseMatrix();
    return {Zonotope(z.center(), gens), lossy.norm(), count};
}

Reduction reduce(const Zonotope& z, double rho_target) {
    if (!(rho_target >= 1.0)) throw InvalidArgument("reduce: target order must be >= 1");
    const Eigen::Index n = z.dim();
    const Eigen::Index gamma = z.num_generators();
    const auto target = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * rho_target + 1e-9));
    if (gamma <= target) return {z, 0.0, 0};
    return reduce_generators(z, reduction_order(z.generators()), gamma - target + n);
}

double support(const Zonotope& z, const Vector& d) {
    require_dim(d.size(), z.dim(), "support");
    const double spread = z.num_generators() == 0 ? 0.0 : (d.transpose() * z.generators()).cwiseAbs().sum();
    return d.dot(z.center()) + spread;
}

// ---------------------------------------------------------------------------
// Feasibility of  G b = x - c,  |b_j| <= 1 + tol  via a phase-one simplex.
// Structural variables start at a given point inside their bounds and the
// artificials absorb the residual; a nonbasic variable may rest anywhere
// within its bounds and moves in whichever direction lowers the objective.

namespace {

class BoundedFeasibility {
public:
    BoundedFeasibility(const Matrix& g, const Vector& rhs, double limit, const Vector& start)
        : m_(g.rows()), nstruct_(g.cols()), limit_(limit) {
        const Eigen::Index nvar = nstruct_ + m_;
        tableau_ = Matrix::Zero(m_, nvar);
        tableau_.leftCols(nstruct_) = g;
        tableau_.rightCols(m_) = Matrix::Identity(m_, m_);
        values_ = rhs - g * start;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (values_(i) < 0.0) {
                tableau_.row(i).head(nstruct_) *= -1.0;
                values_(i) = -values_(i);
            }
        }
        basis_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = nstruct_ + i;
        nonbasic_value_ = Vector::Zero(nvar);
        nonbasic_value_.head(nstruct_) = start;
        in_basis_.assign(static_cast<std::size_t>(nvar), false);
        for (auto b : basis_) in_basis_[static_cast<std::size_t>(b)] = true;
    }

    /// Minimizes the sum of artificial variables; returns that minimum.
    double solve() {
        const Eigen::Index nvar = nstruct_ + m_;
        // Largest-improvement pricing first; Bland's rule afterwards guards
        // against cycling on degenerate problems. Reduced costs only change
        // when the basis does, so one pricing serves every bound flip until
        // the next pivot.
        const long dantzig_limit = 20 * static_cast<long>(nvar + 10);
        const long limit = dantzig_limit + 200 * static_cast<long>(nvar + 10);
        long iter = 0;
        while (iter < limit) {
            const bool bland = iter >= dantzig_limit;
            auto candidates = eligible();
            if (candidates.empty()) return infeasibility();
            // Heap order equals the pricing order; usually only a few
            // entries are consumed before the next pivot.
            const auto later = [bland](const Candidate& x, const Candidate& y) {
                if (!bland && x.gain != y.gain) return x.gain < y.gain;
                return x.index > y.index;
            };
            std::make_heap(candidates.begin(), candidates.end(), later);
            while (!candidates.empty()) {
                std::pop_heap(candidates.begin(), candidates.end(), later);
                const Candidate c = candidates.back();
                candidates.pop_back();
                const Outcome o = step(c.index, c.dir);
                ++iter;
                if (o == Outcome::unbounded) return infeasibility();
                if (o == Outcome::pivot || iter >= limit) break;
            }
        }
        throw ReachError("contains_point: simplex iteration limit reached");
    }

private:
    static constexpr double kPivotTol = 1e-11;
    static constexpr double kCostTol = 1e-11;
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    enum class Outcome { unbounded, flip, pivot };

    struct Candidate {
        Eigen::Index index;
        double dir;
        double gain;  // |reduced cost|
    };

    double cost(Eigen::Index j) const { return j >= nstruct_ ? 1.0 : 0.0; }
    double lower(Eigen::Index j) const { return j >= nstruct_ ? 0.0 : -limit_; }
    double upper(Eigen::Index j) const { return j >= nstruct_ ? kInf : limit_; }

    double infeasibility() const {
        double total = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] >= nstruct_) total += values_(i);
        }
        return total;
    }

    /// Improving nonbasic columns with their direction. A flip moves a column
    /// to the bound it was heading for, so it never becomes eligible again
    /// before the next pivot and the list stays valid until then.
    std::vector<Candidate> eligible() const {
        const Eigen::Index nvar = nstruct_ + m_;
        Vector basic_cost(m_);
        for (Eigen::Index i = 0; i < m_; ++i) basic_cost(i) = cost(basis_[static_cast<std::size_t>(i)]);
        const Eigen::RowVectorXd reduced =
            Eigen::RowVectorXd::NullaryExpr(nvar, [&](Eigen::Index j) { return cost(j); }) -
            basic_cost.transpose() * tableau_;
        std::vector<Candidate> out;
        for (Eigen::Index j = 0; j < nvar; ++j) {
            if (in_basis_[static_cast<std::size_t>(j)]) continue;
            const double v = nonbasic_value_(j);
            const double r = reduced(j);
            if (r < -kCostTol && v < upper(j)) {
                out.push_back({j, 1.0, -r});
            } else if (r > kCostTol && v > lower(j)) {
                out.push_back({j, -1.0, r});
            }
        }
        return out;
    }

    Outcome step(Eigen::Index entering, double dir) {
        const double v = nonbasic_value_(entering);
        double theta = dir > 0.0 ? upper(entering) - v : v - lower(entering);
        Eigen::Index leave = -1;
        double leave_value = 0.0;
        for (Eigen::Index i = 0; i < m_; ++i) {
            // Basic variable i changes by -dir * theta * alpha.
            const double alpha = dir * tableau_(i, entering);
            const Eigen::Index k = basis_[static_cast<std::size_t>(i)];
            double ratio;
            double hit;
            if (alpha > kPivotTol) {
                hit = lower(k);
                ratio = std::max(values_(i) - hit, 0.0) / alpha;
            } else if (alpha < -kPivotTol && std::isfinite(upper(k))) {
                hit = upper(k);
                ratio = std::max(hit - values_(i), 0.0) / -alpha;
            } else {
                continue;
            }
            const bool better = ratio < theta ||
                                (ratio == theta && leave >= 0 && k < basis_[static_cast<std::size_t>(leave)]);
            if (better) {
                theta = ratio;
                leave = i;
                leave_value = hit;
            }
        }
        if (!std::isfinite(theta)) return Outcome::unbounded;

        values_ -= (dir * theta) * tableau_.col(entering);
        if (leave < 0) {
            nonbasic_value_(entering) = v + dir * theta;
            return Outcome::flip;
        }
        const Eigen::Index leaving = basis_[static_cast<std::size_t>(leave)];
        nonbasic_value_(leaving) = leave_value;
        in_basis_[static_cast<std::size_t>(leaving)] = false;
        in_basis_[static_cast<std::size_t>(entering)] = true;
        basis_[static_cast<std::size_t>(leave)] = entering;
        values_(leave) = v + dir * theta;

        const double pivot = tableau_(leave, entering);
        tableau_.row(leave) /= pivot;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (i == leave) continue;
            const double factor = tableau_(i, entering);
            if (factor != 0.0) tableau_.row(i) -= factor * tableau_.row(leave);
        }
        return Outcome::pivot;
    }

    Eigen::Index m_;
    Eigen::Index nstruct_;
    double limit_;
    Matrix tableau_;
    Vector values_;  // basic variable values, row-aligned with basis_
    std::vector<Eigen::Index> basis_;
    Vector nonbasic_value_;
    std::vector<bool> in_basis_;
};

}  // namespace

bool contains_point(const Zonotope& z, const Vector& x, double tol) {
    require_dim(x.size(), z.dim(), "contains_point");
    if (tol < 0.0) throw InvalidArgument("contains_point: tolerance must be non-negative");
    const double limit = 1.0 + tol;
    const Vector offset = x - z.center();
    const Matrix& g = z.generators();
    const double scale = std::max({offset.cwiseAbs().maxCoeff(), g.size() ? g.cwiseAbs().maxCoeff() : 0.0,
                                   std::numeric_limits<double>::min()});
    const double feasibility_tol = 1e-9;

    // Necessary condition through the box; avoids most simplex calls for far points.
    const Vector reach = limit * abs_row_sums(g);
    if (((offset.cwiseAbs() - reach).array() > feasibility_tol * scale).any()) return false;
    if (g.cols() == 0) return true;

    // Starting from the clipped least-norm coefficients leaves only a small
    // residual for the artificials, which saves most pivots on interior points.
    const Matrix gs = g / scale;
    const Vector os = offset / scale;
    Vector start = Vector::Zero(g.cols());
    const Eigen::LDLT<Matrix> gram(gs * gs.transpose());
    if (gram.info() == Eigen::Success) {
        const Vector beta = gs.transpose() * gram.solve(os);
        if (beta.allFinite()) start = beta.cwiseMax(-limit).cwiseMin(limit);
    }
    BoundedFeasibility lp(gs, os, limit, start);
    return lp.solve() <= feasibility_tol;
}

}  // namespace reach
