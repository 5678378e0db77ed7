#include "nuctk/dfo/pounders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "nuctk/error.hpp"

namespace nuctk::dfo {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct BudgetExhausted {};

double quad_value(const Vector& g, const Matrix& h, const Vector& s) {
    return g.dot(s) + 0.5 * s.dot(h * s);
}

class Solver {
public:
    Solver(const ResidualProblem& problem, const Vector& x0, const SolverOptions& opts,
           const WarmStart& warm, const Observer& observer, bool aggregate)
        : p_(problem), opts_(opts), observer_(observer), aggregate_(aggregate) {
        p_.validate();
        if (x0.size() != p_.n) throw InvalidArgument("x0 must have n entries");
        if (!x0.allFinite()) throw InvalidArgument("x0 must be finite");
        if (opts_.max_evals < 1) throw InvalidArgument("max_evals must be positive");
        if (!(opts_.gamma_shrink > 0.0 && opts_.gamma_shrink < 1.0) || !(opts_.gamma_grow >= 1.0))
            throw InvalidArgument("need 0 < gamma_shrink < 1 <= gamma_grow");
        x0_ = p_.project(x0);
        for (Index j = 0; j < p_.n; ++j)
            if (p_.lower(j) < p_.upper(j)) free_.push_back(j);
        nf_ = static_cast<Index>(free_.size());

        const double scale_inf = std::max(1.0, x0_.cwiseAbs().maxCoeff());
        delta_ = opts_.delta0 > 0.0 ? opts_.delta0 : 0.1 * scale_inf;
        delta_min_ = opts_.delta_min > 0.0 ? opts_.delta_min : 1e-8 * std::max(1.0, x0_.norm());
        delta_max_ = opts_.delta_max > 0.0 ? opts_.delta_max : 1e3 * delta_;
        const double sq = std::sqrt(static_cast<double>(std::max<Index>(nf_, 1)));
        c1_ = opts_.c1 > 0.0 ? opts_.c1 : sq;
        c2_ = opts_.c2 > 0.0 ? opts_.c2 : std::max(10.0, sq);
        n_models_ = aggregate_ ? 1 : p_.o;
        hessians_.assign(static_cast<std::size_t>(n_models_), Matrix::Zero(nf_, nf_));

        for (const auto& rec : warm.records) {
            if (rec.x.size() != p_.n || rec.r.size() != p_.o)
                throw InvalidArgument("warm-start record has the wrong shape");
            add_point(rec.x, rec.r, rec.r.squaredNorm(), false);
        }
    }

    FitResult run() {
        try {
            initialize();
            iterate();
        } catch (const BudgetExhausted&) {
            result_.reason = Termination::BudgetExhausted;
            result_.message = "budget exhausted";
        } catch (const EvaluationError& e) {
            result_.reason = Termination::EvaluatorFailure;
            result_.message = e.what();
        }
        if (!have_center_) {
            result_.best_f = std::numeric_limits<double>::infinity();
            result_.best_x = x0_;
            return result_;
        }
        const auto& best = bank_[best_index()];
        result_.best_x = best.x;
        result_.best_r = best.r;
        result_.best_f = best.f;
        return result_;
    }

private:
    struct Point {
        Vector x;
        Vector r;
        double f;
        bool fresh;  // evaluated by this run
    };

    // --- bookkeeping -------------------------------------------------------

    std::size_t add_point(const Vector& x, const Vector& r, double f, bool fresh) {
        bank_.push_back({x, r, f, fresh});
        return bank_.size() - 1;
    }

    std::size_t evaluate(const Vector& x_raw) {
        if (static_cast<Index>(result_.trace.size()) >= opts_.max_evals) throw BudgetExhausted{};
        const Vector x = p_.project(x_raw);
        const Chi2 c = chi2(p_, x);
        EvaluationRecord rec;
        rec.index = static_cast<Index>(result_.trace.size());
        rec.x = x;
        rec.r = c.r;
        rec.f = c.f;
        result_.trace.push_back(rec);
        return add_point(x, c.r, c.f, true);
    }

    std::size_t best_index() const {
        std::size_t best = center_;
        for (std::size_t i = 0; i < bank_.size(); ++i)
            if (bank_[i].f < bank_[best].f) best = i;
        return best;
    }

    Vector values(std::size_t i) const {
        if (aggregate_) return Vector::Constant(1, bank_[i].f);
        return bank_[i].r;
    }

    // scaled displacement of a bank point from the center, free coordinates only
    Vector scaled(std::size_t i) const {
        Vector s(nf_);
        for (Index k = 0; k < nf_; ++k) {
            const Index j = free_[static_cast<std::size_t>(k)];
            s(k) = (bank_[i].x(j) - bank_[center_].x(j)) / delta_;
        }
        return s;
    }

    Vector to_full_step(const Vector& s_free) const {
        Vector x = bank_[center_].x;
        for (Index k = 0; k < nf_; ++k) x(free_[static_cast<std::size_t>(k)]) += s_free(k);
        return x;
    }

    void mark_accept() {
        if (!accepted_once_) {
            accepted_once_ = true;
            result_.new_evals_before_first_accept = static_cast<Index>(result_.trace.size());
        }
    }

    // --- start-up ----------------------------------------------------------

    void initialize() {
        // a warm-start center must be feasible; the best such record wins
        bool seeded = false;
        for (std::size_t i = 0; i < bank_.size(); ++i) {
            if (!p_.feasible(bank_[i].x)) continue;
            if (!seeded || bank_[i].f < bank_[center_].f) center_ = i;
            seeded = true;
        }
        if (seeded) {
            have_center_ = true;
            mark_accept();
            return;
        }
        center_ = evaluate(x0_);
        have_center_ = true;
        // center plus +/- delta0 coordinate displacements, clipped to bounds
        for (Index k = 0; k < nf_; ++k) {
            const Index j = free_[static_cast<std::size_t>(k)];
            for (double sign : {1.0, -1.0}) {
                Vector y = x0_;
                y(j) += sign * delta_;
                y = p_.project(y);
                // clipping can fold a point onto the center or onto its mirror
                const bool known = std::any_of(bank_.begin(), bank_.end(),
                                               [&](const Point& pt) { return pt.x == y; });
                if (!known) evaluate(y);
            }
        }
    }

    // --- interpolation set -------------------------------------------------

    // orthonormal basis of the free-coordinate directions not covered by `dirs`
    Matrix uncovered(const std::vector<Vector>& dirs) const {
        if (dirs.empty()) return Matrix::Identity(nf_, nf_);
        Matrix s(nf_, static_cast<Index>(dirs.size()));
        for (std::size_t i = 0; i < dirs.size(); ++i) s.col(static_cast<Index>(i)) = dirs[i];
        Eigen::HouseholderQR<Matrix> qr(s);
        const Matrix q = qr.householderQ() * Matrix::Identity(nf_, nf_);
        return q.rightCols(nf_ - static_cast<Index>(dirs.size()));
    }

    // greedily adds affinely independent points within radius c (most recent first)
    void select_affine(double c, std::vector<std::size_t>& sel, std::vector<Vector>& dirs) const {
        for (std::size_t back = bank_.size(); back-- > 0;) {
            if (static_cast<Index>(sel.size()) >= nf_) return;
            if (back == center_) continue;
            if (std::find(sel.begin(), sel.end(), back) != sel.end()) continue;
            const Vector d = scaled(back);
            const double nd = d.norm();
            if (nd == 0.0 || nd > c) continue;
            const Matrix q = uncovered(dirs);
            if ((q.transpose() * d).norm() < opts_.pivot_tol) continue;
            sel.push_back(back);
            dirs.push_back(d);
        }
    }

    // KKT matrix of the minimum-Frobenius-norm interpolation problem
    Matrix kkt(const std::vector<Vector>& pts) const {
        const Index m = static_cast<Index>(pts.size());
        Matrix k = Matrix::Zero(m + nf_ + 1, m + nf_ + 1);
        for (Index a = 0; a < m; ++a) {
            for (Index b = 0; b < m; ++b) {
                const double dot = pts[static_cast<std::size_t>(a)].dot(pts[static_cast<std::size_t>(b)]);
                k(a, b) = 0.5 * dot * dot;
            }
            k(a, m) = 1.0;
            k(m, a) = 1.0;
            k.block(a, m + 1, 1, nf_) = pts[static_cast<std::size_t>(a)].transpose();
            k.block(m + 1, a, nf_, 1) = pts[static_cast<std::size_t>(a)];
        }
        return k;
    }

    static double condition(const Matrix& m) {
        Eigen::JacobiSVD<Matrix> svd(m);
        const Vector& s = svd.singularValues();
        if (s.size() == 0) return 1.0;
        const double smin = s(s.size() - 1);
        return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    }

    struct InterpolationSet {
        std::vector<std::size_t> points;  // center first
        std::vector<Vector> scaled;
        bool valid = false;
        Matrix missing;  // uncovered directions of the c1 selection
    };

    InterpolationSet build_set() {
        InterpolationSet set;
        std::vector<std::size_t> sel;
        std::vector<Vector> dirs;
        select_affine(c1_, sel, dirs);
        set.valid = static_cast<Index>(sel.size()) == nf_;
        set.missing = uncovered(dirs);
        if (!set.valid) {
            select_affine(c2_, sel, dirs);
            if (static_cast<Index>(sel.size()) < nf_) {
                // not enough usable points: sample the uncovered directions
                const Matrix q = uncovered(dirs);
                for (Index c = 0; c < q.cols(); ++c) {
                    const auto idx = geometry_point(q.col(c), q);
                    if (!idx) continue;
                    sel.push_back(*idx);
                    dirs.push_back(scaled(*idx));
                }
                if (static_cast<Index>(sel.size()) < nf_)
                    throw NumericalError("cannot complete an affinely independent interpolation set");
                // the sampled points lie within delta; the set is valid if the
                // earlier ones came from the c1 ball
                std::vector<std::size_t> check;
                std::vector<Vector> check_dirs;
                select_affine(c1_, check, check_dirs);
                set.valid = static_cast<Index>(check.size()) == nf_;
                set.missing = uncovered(check_dirs);
                if (set.valid) {
                    sel = check;
                    dirs = check_dirs;
                }
            }
        }
        set.points.push_back(center_);
        set.scaled.push_back(Vector::Zero(nf_));
        for (std::size_t i = 0; i < sel.size(); ++i) {
            set.points.push_back(sel[i]);
            set.scaled.push_back(dirs[i]);
        }
        // extra points for curvature, while the scaled system stays well conditioned
        const Index max_points = 2 * nf_ + 1;
        for (std::size_t back = bank_.size(); back-- > 0;) {
            if (static_cast<Index>(set.points.size()) >= max_points) break;
            if (std::find(set.points.begin(), set.points.end(), back) != set.points.end()) continue;
            const Vector d = scaled(back);
            const double nd = d.norm();
            if (nd == 0.0 || nd > c2_) continue;
            bool duplicate = false;
            for (const auto& s : set.scaled)
                if ((s - d).norm() <= 1e-12) duplicate = true;
            if (duplicate) continue;
            set.scaled.push_back(d);
            if (condition(kkt(set.scaled)) <= opts_.kkt_cond_max) {
                set.points.push_back(back);
            } else {
                set.scaled.pop_back();
            }
        }
        return set;
    }

    // evaluates center + delta * (+/-)dir, clipped, keeping the side that moves
    // further into the uncovered space
    std::optional<std::size_t> geometry_point(const Vector& dir, const Matrix& uncovered_dirs) {
        std::optional<Vector> best;
        double best_proj = 0.0;
        for (double sign : {1.0, -1.0}) {
            const Vector y = p_.project(to_full_step(sign * delta_ * dir));
            Vector d(nf_);
            for (Index k = 0; k < nf_; ++k) {
                const Index j = free_[static_cast<std::size_t>(k)];
                d(k) = (y(j) - bank_[center_].x(j)) / delta_;
            }
            const double proj = (uncovered_dirs.transpose() * d).norm();
            if (proj > best_proj + 1e-12) {
                best_proj = proj;
                best = y;
            }
        }
        if (!best || best_proj < opts_.pivot_tol) return std::nullopt;
        return evaluate(*best);
    }

    // samples the uncovered directions; shrinks the radius if none can be sampled
    void improve_geometry(const Matrix& missing) {
        Index added = 0;
        for (Index c = 0; c < missing.cols(); ++c)
            if (geometry_point(missing.col(c), missing)) ++added;
        if (added == 0) delta_ *= opts_.gamma_shrink;
    }

    // --- models ------------------------------------------------------------

    struct Models {
        std::vector<QuadraticModel> per;  // scaled back to unscaled free coordinates
        QuadraticModel master;
    };

    Models build_models(const InterpolationSet& set) {
        const Index m = static_cast<Index>(set.points.size());
        const Matrix k = kkt(set.scaled);
        Eigen::FullPivLU<Matrix> lu(k);
        Models out;
        out.per.resize(static_cast<std::size_t>(n_models_));
        const double d2 = delta_ * delta_;
        for (Index i = 0; i < n_models_; ++i) {
            Matrix& h = hessians_[static_cast<std::size_t>(i)];
            const Matrix h_scaled = d2 * h;
            Vector rhs = Vector::Zero(m + nf_ + 1);
            Vector fvals(m);
            for (Index a = 0; a < m; ++a) {
                fvals(a) = values(set.points[static_cast<std::size_t>(a)])(i);
                const Vector& s = set.scaled[static_cast<std::size_t>(a)];
                rhs(a) = fvals(a) - 0.5 * s.dot(h_scaled * s);
            }
            Vector sol = lu.solve(rhs);
            for (int refine = 0; refine < 2; ++refine) sol += lu.solve(Vector(rhs - k * sol));
            Matrix h_new = h_scaled;
            for (Index a = 0; a < m; ++a) {
                const Vector& s = set.scaled[static_cast<std::size_t>(a)];
                h_new += sol(a) * s * s.transpose();
            }
            h_new = 0.5 * (h_new + h_new.transpose()).eval();
            const double c = sol(m);
            const Vector g_scaled = sol.segment(m + 1, nf_);

            // interpolation check in scaled coordinates
            const double scale = std::max(fvals.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
            for (Index a = 0; a < m; ++a) {
                const Vector& s = set.scaled[static_cast<std::size_t>(a)];
                const double model = c + g_scaled.dot(s) + 0.5 * s.dot(h_new * s);
                result_.max_interpolation_error =
                    std::max(result_.max_interpolation_error, std::abs(model - fvals(a)) / scale);
            }

            h = h_new / d2;
            auto& q = out.per[static_cast<std::size_t>(i)];
            q.c = values(center_)(i);
            q.g = g_scaled / delta_;
            q.h = h;
        }
        if (aggregate_) {
            out.master = out.per.front();
        } else {
            Matrix g(p_.o, nf_);
            Matrix hsum = Matrix::Zero(nf_, nf_);
            const Vector& r = bank_[center_].r;
            for (Index i = 0; i < p_.o; ++i) {
                g.row(i) = out.per[static_cast<std::size_t>(i)].g.transpose();
                hsum += r(i) * out.per[static_cast<std::size_t>(i)].h;
            }
            out.master.c = bank_[center_].f;
            out.master.g = 2.0 * g.transpose() * r;
            out.master.h = 2.0 * (g.transpose() * g + hsum);
            out.master.h = 0.5 * (out.master.h + out.master.h.transpose()).eval();
        }
        return out;
    }

    void notify(const InterpolationSet& set, const Models& models) {
        if (!observer_) return;
        IterationSnapshot snap;
        snap.iteration = result_.iterations;
        snap.center = bank_[center_].x;
        snap.delta = delta_;
        snap.model_valid = set.valid;
        auto widen_vec = [&](const Vector& v) {
            Vector out = Vector::Zero(p_.n);
            for (Index k = 0; k < nf_; ++k) out(free_[static_cast<std::size_t>(k)]) = v(k);
            return out;
        };
        auto widen_mat = [&](const Matrix& m) {
            Matrix out = Matrix::Zero(p_.n, p_.n);
            for (Index a = 0; a < nf_; ++a)
                for (Index b = 0; b < nf_; ++b)
                    out(free_[static_cast<std::size_t>(a)], free_[static_cast<std::size_t>(b)]) = m(a, b);
            return out;
        };
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            snap.displacements.push_back(bank_[set.points[i]].x - bank_[center_].x);
            snap.values.push_back(values(set.points[i]));
        }
        for (const auto& q : models.per) snap.models.push_back({q.c, widen_vec(q.g), widen_mat(q.h)});
        snap.master = {models.master.c, widen_vec(models.master.g), widen_mat(models.master.h)};
        observer_(snap);
    }

    // ||P(x - g) - x|| over the free variables, P the projection onto the box
    double projected_gradient_norm(const Vector& g, const Vector& xc) const {
        double sq = 0.0;
        for (Index k = 0; k < nf_; ++k) {
            const Index j = free_[static_cast<std::size_t>(k)];
            const double step = std::clamp(xc(j) - g(k), p_.lower(j), p_.upper(j)) - xc(j);
            sq += step * step;
        }
        return std::sqrt(sq);
    }

    // --- main loop -----------------------------------------------------------

    void iterate() {
        if (nf_ == 0) {
            result_.message = "no free variables";
            return;
        }
        while (true) {
            if (delta_ < delta_min_) {
                result_.reason = Termination::SmallRadius;
                result_.message = "trust-region radius below minimum";
                return;
            }
            ++result_.iterations;
            const InterpolationSet set = build_set();
            const Models models = build_models(set);
            notify(set, models);

            const Vector& xc = bank_[center_].x;
            Vector lo(nf_), hi(nf_);
            for (Index k = 0; k < nf_; ++k) {
                const Index j = free_[static_cast<std::size_t>(k)];
                lo(k) = std::max(p_.lower(j) - xc(j), -delta_);
                hi(k) = std::min(p_.upper(j) - xc(j), delta_);
            }
            const Vector s = solve_box_qp(models.master.g, models.master.h, lo, hi);
            const double pred = -quad_value(models.master.g, models.master.h, s);
            const double fc = bank_[center_].f;
            const double floor = std::max(opts_.noise_floor, 10.0 * kEps * std::abs(fc));

            // snap to the variable bounds exactly where the step reached them
            Vector y = to_full_step(s);
            for (Index k = 0; k < nf_; ++k) {
                const Index j = free_[static_cast<std::size_t>(k)];
                if (s(k) == hi(k) && hi(k) == p_.upper(j) - xc(j)) y(j) = p_.upper(j);
                if (s(k) == lo(k) && lo(k) == p_.lower(j) - xc(j)) y(j) = p_.lower(j);
            }
            y = p_.project(y);

            if (!(pred > floor) || y == xc) {
                if (set.valid) {
                    mark_accept();
                    // criticality: the radius need not exceed the projected gradient step
                    delta_ = std::min(opts_.gamma_shrink * delta_, projected_gradient_norm(models.master.g, xc));
                } else {
                    improve_geometry(set.missing);
                }
                continue;
            }

            const std::size_t idx = evaluate(y);
            const double rho = (fc - bank_[idx].f) / pred;
            const bool boundary = s.cwiseAbs().maxCoeff() >= (1.0 - 1e-8) * delta_;
            if (rho > opts_.eta_accept) {
                center_ = idx;
                mark_accept();
            }
            if (rho >= 0.75 && boundary) {
                delta_ = std::min(opts_.gamma_grow * delta_, delta_max_);
            } else if (rho < 0.25) {
                if (set.valid) {
                    delta_ *= opts_.gamma_shrink;
                } else {
                    // check the geometry around the (possibly new) center
                    std::vector<std::size_t> sel;
                    std::vector<Vector> dirs;
                    select_affine(c1_, sel, dirs);
                    improve_geometry(uncovered(dirs));
                }
            }
        }
    }

    ResidualProblem p_;
    SolverOptions opts_;
    Observer observer_;
    bool aggregate_;
    Vector x0_;
    std::vector<Index> free_;
    Index nf_ = 0;
    Index n_models_ = 0;
    double delta_ = 0.0;
    double delta_min_ = 0.0;
    double delta_max_ = 0.0;
    double c1_ = 0.0;
    double c2_ = 0.0;
    std::vector<Matrix> hessians_;  // unscaled, free coordinates
    std::vector<Point> bank_;
    std::size_t center_ = 0;
    bool have_center_ = false;
    bool accepted_once_ = false;
    FitResult result_;
};

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::SmallRadius: return "small_radius";
        case Termination::BudgetExhausted: return "budget_exhausted";
        case Termination::EvaluatorFailure: return "evaluator_failure";
    }
    return "unknown";
}

WarmStart warm_start(const std::vector<EvaluationRecord>& history, Index n, Index o) {
    WarmStart out;
    for (const auto& rec : history) {
        if (rec.x.size() != n || rec.r.size() != o)
            throw InvalidArgument("history record " + std::to_string(rec.index) +
                                  " does not match n = " + std::to_string(n) +
                                  ", o = " + std::to_string(o));
        const bool dup = std::any_of(out.records.begin(), out.records.end(),
                                     [&](const EvaluationRecord& r) { return r.x == rec.x; });
        if (dup) continue;
        EvaluationRecord copy = rec;
        copy.index = static_cast<Index>(out.records.size());
        copy.f = rec.r.squaredNorm();
        out.records.push_back(std::move(copy));
    }
    return out;
}

FitResult pounders_minimize(const ResidualProblem& problem, const Vector& x0,
                            const SolverOptions& opts, const WarmStart& warm,
                            const Observer& observer) {
    return Solver(problem, x0, opts, warm, observer, false).run();
}

FitResult pounder_minimize(const ResidualProblem& problem, const Vector& x0,
                           const SolverOptions& opts, const WarmStart& warm,
                           const Observer& observer) {
    return Solver(problem, x0, opts, warm, observer, true).run();
}

Vector solve_box_qp(const Vector& g, const Matrix& h, const Vector& lo, const Vector& hi) {
    const Index n = g.size();
    Vector s = Vector::Zero(n);
    auto project = [&](Vector v) { return v.cwiseMax(lo).cwiseMin(hi); };
    auto q = [&](const Vector& v) { return quad_value(g, h, v); };
    const double gscale = std::max(g.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double range = std::max((hi - lo).cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

    for (Index outer = 0; outer < 10 + 5 * n; ++outer) {
        const double q_start = q(s);
        const Vector grad = g + h * s;
        // projected gradient
        Vector pg = grad;
        for (Index i = 0; i < n; ++i)
            if ((s(i) <= lo(i) && grad(i) > 0.0) || (s(i) >= hi(i) && grad(i) < 0.0)) pg(i) = 0.0;
        if (pg.cwiseAbs().maxCoeff() <= 1e-14 * gscale) break;

        // Cauchy point along the projected steepest-descent path
        const double curv = pg.dot(h * pg);
        double t = curv > 0.0 ? pg.squaredNorm() / curv : 2.0 * range / pg.cwiseAbs().maxCoeff();
        t = std::min(t, 2.0 * range / pg.cwiseAbs().maxCoeff());
        Vector trial = s;
        for (int bt = 0; bt < 60; ++bt) {
            trial = project(s - t * grad);
            if (q(trial) <= q_start + 1e-4 * grad.dot(trial - s)) break;
            t *= 0.5;
        }
        if (q(trial) < q_start) s = trial;

        // conjugate gradients on the variables strictly inside their bounds
        std::vector<Index> fr;
        for (Index i = 0; i < n; ++i)
            if (s(i) > lo(i) && s(i) < hi(i)) fr.push_back(i);
        if (!fr.empty()) {
            const Index m = static_cast<Index>(fr.size());
            Matrix hf(m, m);
            Vector r(m);
            const Vector full_grad = g + h * s;
            for (Index a = 0; a < m; ++a) {
                r(a) = -full_grad(fr[static_cast<std::size_t>(a)]);
                for (Index b = 0; b < m; ++b)
                    hf(a, b) = h(fr[static_cast<std::size_t>(a)], fr[static_cast<std::size_t>(b)]);
            }
            Vector dir = r;
            const double r0 = r.norm();
            for (Index it = 0; it < m && r.norm() > 1e-12 * std::max(r0, gscale); ++it) {
                const Vector hd = hf * dir;
                const double dhd = dir.dot(hd);
                // largest feasible step along dir and the variable that limits it
                double tau = std::numeric_limits<double>::infinity();
                Index hit = -1;
                bool hit_upper = false;
                for (Index a = 0; a < m; ++a) {
                    const Index i = fr[static_cast<std::size_t>(a)];
                    if (dir(a) > 0.0) {
                        const double ta = (hi(i) - s(i)) / dir(a);
                        if (ta < tau) { tau = ta; hit = i; hit_upper = true; }
                    } else if (dir(a) < 0.0) {
                        const double ta = (lo(i) - s(i)) / dir(a);
                        if (ta < tau) { tau = ta; hit = i; hit_upper = false; }
                    }
                }
                const double alpha = dhd > 0.0 ? r.squaredNorm() / dhd : std::numeric_limits<double>::infinity();
                if (alpha >= tau) {
                    if (!std::isfinite(tau)) break;  // unbounded direction cannot occur in a box
                    for (Index a = 0; a < m; ++a) s(fr[static_cast<std::size_t>(a)]) += tau * dir(a);
                    s = project(s);
                    if (hit >= 0) s(hit) = hit_upper ? hi(hit) : lo(hit);
                    break;
                }
                for (Index a = 0; a < m; ++a) s(fr[static_cast<std::size_t>(a)]) += alpha * dir(a);
                const Vector r_new = r - alpha * hd;
                const double beta = r_new.squaredNorm() / r.squaredNorm();
                dir = r_new + beta * dir;
                r = r_new;
            }
            s = project(s);
        }
        if (q_start - q(s) <= 1e-15 * std::max(1.0, std::abs(q_start))) break;
    }
    return s;
}

}  // namespace nuctk::dfo
