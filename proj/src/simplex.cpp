#include "olowod/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace olowod {

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const std::vector<double>& step,
                          int max_iter, double tol) {
    const std::size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<std::vector<double>> x(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) x[i + 1][i] += step[i];
    std::vector<double> fx(n + 1);
    for (std::size_t j = 0; j <= n; ++j) fx[j] = f(x[j]);

    auto order = [&]() {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> x2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            x2[i] = x[idx[i]];
            f2[i] = fx[idx[i]];
        }
        x.swap(x2);
        fx.swap(f2);
    };

    SimplexResult res;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();

        // parameter-space spread relative to the best vertex
        double spread = 0.0;
        for (std::size_t j = 1; j <= n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                spread = std::max(spread,
                                  std::abs(x[j][i] - x[0][i]) / (1.0 + std::abs(x[0][i])));
        if (spread <= tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += x[j][i] / static_cast<double>(n);

        auto along = [&](double t, const std::vector<double>& towards) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (towards[i] - centroid[i]);
            return p;
        };

        std::vector<double> xr = along(-alpha, x[n]);
        const double fr = f(xr);

        if (fr < fx[0]) {
            std::vector<double> xe = along(-alpha * gamma, x[n]);
            const double fe = f(xe);
            if (fe < fr) {
                x[n] = std::move(xe);
                fx[n] = fe;
            } else {
                x[n] = std::move(xr);
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = std::move(xr);
            fx[n] = fr;
        } else {
            const bool outside = fr < fx[n];
            std::vector<double> xc = outside ? along(-alpha * rho, x[n]) : along(rho, x[n]);
            const double fc = f(xc);
            if (fc < std::min(fr, fx[n])) {
                x[n] = std::move(xc);
                fx[n] = fc;
            } else {
                for (std::size_t j = 1; j <= n; ++j) {
                    for (std::size_t i = 0; i < n; ++i)
                        x[j][i] = x[0][i] + sigma * (x[j][i] - x[0][i]);
                    fx[j] = f(x[j]);
                }
            }
        }
    }

    order();
    res.x = x[0];
    res.fval = fx[0];
    res.iterations = iter;
    return res;
}

}  // namespace olowod
