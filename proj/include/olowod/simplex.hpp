#pragma once

#include <functional>
#include <vector>

namespace olowod {

struct SimplexResult {
    std::vector<double> x;
    double fval = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Derivative-free Nelder-Mead minimization. The objective may return +inf to
// reject infeasible points; the initial point must be feasible. Convergence:
// the simplex parameter spread falls below tol (relative to the best vertex).
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const std::vector<double>& step,
                          int max_iter = 500, double tol = 1e-6);

}  // namespace olowod
