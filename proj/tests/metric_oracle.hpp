#pragma once

// Direct-loop metric definitions used as an independent check of eval.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace dcload::testing {

struct OracleMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    double mbd = 0.0;
    double smape = 0.0;
    std::optional<double> r_squared;  // empty when actual has no variance
};

inline OracleMetrics oracle_metrics(const std::vector<double>& a, const std::vector<double>& p) {
    const std::size_t n = a.size();
    const double dn = static_cast<double>(n);
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = p[i] - a[i];

    OracleMetrics m;
    double sq = 0.0, ab = 0.0, bias = 0.0, pct = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sq += err[i] * err[i];
        ab += std::fabs(err[i]);
        bias += err[i];
        const double half_sum = 0.5 * (std::fabs(a[i]) + std::fabs(p[i]));
        pct += half_sum == 0.0 ? 0.0 : std::fabs(err[i]) / half_sum;
    }
    m.rmse = std::sqrt(sq / dn);
    m.mae = ab / dn;
    m.mbd = bias / dn;
    m.smape = 100.0 * pct / dn;

    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= dn;
    double total = 0.0;
    for (double v : a) total += (v - mean) * (v - mean);
    if (total > 0.0) m.r_squared = 1.0 - sq / total;
    return m;
}

// |x - y| <= tol * max(|x|, |y|); two exact zeros agree.
inline bool rel_close(double x, double y, double tol) {
    return std::fabs(x - y) <= tol * std::max(std::fabs(x), std::fabs(y));
}

} // namespace dcload::testing
