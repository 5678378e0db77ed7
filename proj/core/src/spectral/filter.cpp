#include "nuctk/spectral/filter.hpp"

#include <algorithm>
#include <cmath>

#include "nuctk/error.hpp"

namespace nuctk::spectral {

SpectralFilter SpectralFilter::build(double lambda, double lo, double hi, double gap, int degree) {
    if (!(lo <= hi)) throw InvalidArgument("spectral filter: empty spectrum interval");
    if (!(gap > 0.0)) throw InvalidArgument("spectral filter: gap must be positive");
    if (degree < 0) throw InvalidArgument("spectral filter: negative degree");
    if (lambda < lo || lambda > hi)
        throw InvalidArgument("spectral filter: lambda outside spectrum bounds");

    SpectralFilter f;
    f.lambda_ = lambda;

    const bool below = lambda - gap >= lo;  // unwanted spectrum below lambda
    const bool above = lambda + gap <= hi;  // unwanted spectrum above lambda

    if (!below && !above) {
        // nothing to suppress: p == 1
        f.degree_ = 0;
        f.damping_ = 0.0;
        f.unwanted_ = {lambda, lambda};
        return f;
    }

    f.degree_ = degree;
    double a = 0.0;
    double b = 0.0;
    double target = 0.0;
    if (below && above) {
        f.variable_ = Variable::ShiftedSquare;
        a = gap * gap;
        b = std::max((lo - lambda) * (lo - lambda), (hi - lambda) * (hi - lambda));
        target = 0.0;
        f.unwanted_ = {lo, lambda - gap};
        f.unwanted2_ = std::make_pair(lambda + gap, hi);
    } else {
        f.variable_ = Variable::Omega;
        if (above) {
            a = lambda + gap;
            b = hi;
        } else {
            a = lo;
            b = lambda - gap;
        }
        target = lambda;
        f.unwanted_ = {a, b};
    }
    // degenerate interval: widen away from the target so the map stays finite
    if (b <= a) {
        if (target < a) b = a + gap;
        else a = b - gap;
    }

    f.center_ = 0.5 * (a + b);
    f.halfwidth_ = 0.5 * (b - a);
    f.tau_ = (target - f.center_) / f.halfwidth_;
    // |T_d(tau)| for |tau| > 1 via cosh
    const double t_d = std::cosh(static_cast<double>(degree) * std::acosh(std::abs(f.tau_)));
    f.damping_ = degree == 0 ? 1.0 : 1.0 / t_d;
    return f;
}

double SpectralFilter::mapped(double omega) const noexcept {
    const double u = variable_ == Variable::Omega ? omega : (omega - lambda_) * (omega - lambda_);
    return (u - center_) / halfwidth_;
}

Vector SpectralFilter::chebyshev_coefficients() const {
    Vector c = Vector::Zero(degree_ + 1);
    if (degree_ == 0) {
        c(0) = 1.0;
        return c;
    }
    // p = T_d(l(u)) / T_d(tau)
    double t_prev = 1.0;
    double t_cur = tau_;
    for (int k = 1; k < degree_; ++k) {
        const double t_next = 2.0 * tau_ * t_cur - t_prev;
        t_prev = t_cur;
        t_cur = t_next;
    }
    c(degree_) = 1.0 / t_cur;
    return c;
}

double SpectralFilter::operator()(double omega) const {
    if (degree_ == 0) return 1.0;
    const double l = mapped(omega);
    double rho_prev = 1.0 / tau_;
    double p_prev = 1.0;
    double p_cur = rho_prev * l;
    for (int k = 1; k < degree_; ++k) {
        const double rho = 1.0 / (2.0 * tau_ - rho_prev);
        const double p_next = 2.0 * rho * l * p_cur - rho * rho_prev * p_prev;
        p_prev = p_cur;
        p_cur = p_next;
        rho_prev = rho;
    }
    return p_cur;
}

Matrix SpectralFilter::apply(const SymmetricOperatorBlock& a, const Matrix& x) const {
    if (degree_ == 0) return x;
    const double inv_e = 1.0 / halfwidth_;
    // L(Y) = (op(Y) - c Y) / e, op = A or (A - lambda I)^2
    auto mapped_op = [&](const Matrix& y) -> Matrix {
        Matrix z = a.sparse() * y;
        if (variable_ == Variable::ShiftedSquare) {
            z -= lambda_ * y;
            Matrix w = a.sparse() * z;
            w -= lambda_ * z;
            z = std::move(w);
        }
        z -= center_ * y;
        z *= inv_e;
        return z;
    };

    double rho_prev = 1.0 / tau_;
    Matrix y_prev = x;
    Matrix y_cur = rho_prev * mapped_op(x);
    for (int k = 1; k < degree_; ++k) {
        const double rho = 1.0 / (2.0 * tau_ - rho_prev);
        Matrix y_next = (2.0 * rho) * mapped_op(y_cur);
        y_next -= (rho * rho_prev) * y_prev;
        y_prev = std::move(y_cur);
        y_cur = std::move(y_next);
        rho_prev = rho;
    }
    return y_cur;
}

}  // namespace nuctk::spectral
