#include "nuctk/noise/ecnoise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "nuctk/error.hpp"
#include "nuctk/random.hpp"

namespace nuctk::noise {

namespace {

constexpr double kAgreeFactor = 4.0;

int sign_changes(const std::vector<double>& col) {
    int changes = 0;
    for (std::size_t i = 1; i < col.size(); ++i)
        if ((col[i - 1] > 0.0 && col[i] < 0.0) || (col[i - 1] < 0.0 && col[i] > 0.0)) ++changes;
    return changes;
}

}  // namespace

DifferenceTable difference_table(const std::vector<double>& values) {
    if (values.size() < 2) throw InvalidArgument("difference table needs at least 2 values");
    DifferenceTable t;
    t.reserve(values.size());
    t.push_back(values);
    for (std::size_t k = 1; k < values.size(); ++k) {
        const auto& prev = t.back();
        std::vector<double> col(prev.size() - 1);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = prev[i + 1] - prev[i];
        t.push_back(std::move(col));
    }
    return t;
}

double gamma(int k) {
    if (k < 0) throw InvalidArgument("gamma needs k >= 0");
    // both factorials are exact doubles for k <= 10, so one rounding in the division
    double num = 1.0;
    double den = 1.0;
    for (int j = 1; j <= k; ++j) num *= static_cast<double>(j);
    for (int j = 1; j <= 2 * k; ++j) den *= static_cast<double>(j);
    return num * num / den;
}

NoiseEstimate ecnoise_from_samples(const std::vector<double>& samples) {
    const int m = static_cast<int>(samples.size()) - 1;
    if (m < 4) throw InvalidArgument("ecnoise needs m >= 4");
    for (double v : samples)
        if (!std::isfinite(v)) throw InvalidArgument("ecnoise: non-finite sample");

    NoiseEstimate est;
    est.samples = samples;
    est.f0 = samples.front();

    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) {
        est.sigma_abs = 0.0;
        est.advisory = "identical values: h too small or f constant";
        if (est.f0 != 0.0) est.sigma_rel = 0.0;
        return est;
    }

    const auto t = difference_table(samples);
    std::vector<double> sigma(static_cast<std::size_t>(m) + 1, 0.0);
    for (int k = 1; k <= m; ++k) {
        const auto& col = t[static_cast<std::size_t>(k)];
        double sq = 0.0;
        for (double v : col) sq += v * v;
        sigma[static_cast<std::size_t>(k)] = std::sqrt(gamma(k) * sq / static_cast<double>(col.size()));
    }

    for (int k = 1; k < m; ++k) {
        const double a = sigma[static_cast<std::size_t>(k)];
        const double b = sigma[static_cast<std::size_t>(k) + 1];
        if (!(std::min(a, b) > 0.0) || std::max(a, b) > kAgreeFactor * std::min(a, b)) continue;
        // at least one change even where (m - k)/2 - 1 is not positive
        const double need = std::max(1.0, static_cast<double>(m - k) / 2.0 - 1.0);
        if (static_cast<double>(sign_changes(t[static_cast<std::size_t>(k)])) < need) continue;
        est.order = k;
        est.sigma_abs = a;
        est.reliable = true;
        break;
    }
    if (!est.reliable) {
        // report the last order as a rough figure
        est.sigma_abs = sigma[static_cast<std::size_t>(m)];
        // curvature shows as smooth higher differences with few sign changes
        est.advisory = sign_changes(t[1]) < (m - 1) / 2 ? "h too large: differences dominated by curvature"
                                                        : "no consistent difference order: try another h";
    }
    if (est.f0 != 0.0) est.sigma_rel = est.sigma_abs / std::abs(est.f0);
    return est;
}

NoiseEstimate ecnoise(const ScalarFunction& f, const Vector& x, const Vector& dir, double h, int m) {
    if (m < 4) throw InvalidArgument("ecnoise needs m >= 4");
    if (!(h > 0.0)) throw InvalidArgument("ecnoise needs h > 0");
    if (dir.size() != x.size()) throw InvalidArgument("ecnoise: direction size mismatch");
    const double nrm = dir.norm();
    if (!(nrm > 0.0)) throw InvalidArgument("ecnoise: zero direction");
    const Vector u = dir / nrm;
    std::vector<double> samples(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) samples[static_cast<std::size_t>(i)] = f(x + (static_cast<double>(i) * h) * u);
    return ecnoise_from_samples(samples);
}

double default_step(const Vector& x) { return 1e-4 * std::max(1.0, x.norm()); }

std::vector<NoiseMapRow> noise_map(const ScalarFunction& f, const std::vector<Vector>& points,
                                   const NoiseMapOptions& opts) {
    if (points.empty()) throw InvalidArgument("noise map needs at least one point");
    if (opts.m < 4) throw InvalidArgument("ecnoise needs m >= 4");
    if (opts.h < 0.0) throw InvalidArgument("ecnoise needs h > 0");

    std::vector<NoiseMapRow> rows(points.size());
    auto run = [&](std::size_t p) {
        NoiseMapRow& row = rows[p];
        row.point = static_cast<Index>(p);
        try {
            const Vector& x = points[p];
            Rng rng = make_rng(opts.seed, p);
            Vector dir = gaussian_matrix(x.size(), 1, rng).col(0);
            const double h = opts.h > 0.0 ? opts.h : default_step(x);
            row.estimate = ecnoise(f, x, dir, h, opts.m);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    unsigned workers = opts.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.workers;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(points.size()));
    if (workers <= 1) {
        for (std::size_t p = 0; p < points.size(); ++p) run(p);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t p = next++; p < points.size(); p = next++) run(p);
            });
    }
    return rows;
}

}  // namespace nuctk::noise
