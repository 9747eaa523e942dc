#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace verimap::stats {

// Nelder-Mead over R^n with optional nonnegative coordinates. Nonnegative
// coordinates are handled by evaluating at |x|, which lets the simplex cross
// zero smoothly and still reach exact boundary optima; the reported optimum
// folds the sign back.
struct OptimResult {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    std::size_t n_evals = 0;
    bool converged = false;
};

struct OptimOptions {
    std::size_t max_evals = 200000;
    double rel_tol = 1e-8;   // on the objective spread of the simplex
    double abs_tol = 1e-12;  // absolute objective spread floor
    double initial_step = 0.25;
    // restarts with a fresh simplex around the incumbent; guards against
    // premature collapse in higher dimensions
    int restarts = 2;
};

class NelderMead {
public:
    using Objective = std::function<double(const std::vector<double>&)>;

    NelderMead(Objective f, std::vector<bool> nonneg, OptimOptions opts = {})
        : f_(std::move(f)), nonneg_(std::move(nonneg)), opts_(opts) {}

    OptimResult minimize(std::vector<double> x0) {
        const std::size_t n = x0.size();
        OptimResult result;
        result.x = x0;
        result.fx = eval(x0, result);
        if (n == 0) {
            result.converged = true;
            return result;
        }
        double step = opts_.initial_step;
        for (int round = 0; round <= opts_.restarts; ++round) {
            bool converged = run_simplex(result, step);
            if (converged && round > 0) {
                result.converged = true;
                break;
            }
            if (converged) result.converged = true;
            step *= 0.25;  // restart tighter around the incumbent
            if (result.n_evals >= opts_.max_evals) break;
        }
        fold(result.x);
        return result;
    }

private:
    double eval(std::vector<double> x, OptimResult& res) {
        fold(x);
        ++res.n_evals;
        double v = f_(x);
        if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
        return v;
    }

    void fold(std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (i < nonneg_.size() && nonneg_[i]) x[i] = std::fabs(x[i]);
    }

    bool run_simplex(OptimResult& res, double step) {
        const std::size_t n = res.x.size();
        std::vector<std::vector<double>> pts(n + 1, res.x);
        std::vector<double> fx(n + 1);
        fx[0] = res.fx;
        for (std::size_t i = 0; i < n; ++i) {
            double delta = step * std::max(1.0, std::fabs(res.x[i]));
            pts[i + 1][i] += delta;
            fx[i + 1] = eval(pts[i + 1], res);
        }

        std::vector<std::size_t> order(n + 1);
        while (res.n_evals < opts_.max_evals) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
            std::size_t best = order[0], worst = order[n], second = order[n - 1];

            if (fx[best] < res.fx) {
                res.fx = fx[best];
                res.x = pts[best];
            }
            double spread = std::fabs(fx[worst] - fx[best]);
            if (spread <= opts_.abs_tol + opts_.rel_tol * (std::fabs(fx[best]) + opts_.abs_tol))
                return true;

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == worst) continue;
                for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
            }
            for (double& c : centroid) c /= static_cast<double>(n);

            auto blend = [&](double coef) {
                std::vector<double> p(n);
                for (std::size_t i = 0; i < n; ++i)
                    p[i] = centroid[i] + coef * (pts[worst][i] - centroid[i]);
                return p;
            };

            auto reflected = blend(-1.0);
            double fr = eval(reflected, res);
            if (fr < fx[best]) {
                auto expanded = blend(-2.0);
                double fe = eval(expanded, res);
                if (fe < fr) {
                    pts[worst] = expanded;
                    fx[worst] = fe;
                } else {
                    pts[worst] = reflected;
                    fx[worst] = fr;
                }
            } else if (fr < fx[second]) {
                pts[worst] = reflected;
                fx[worst] = fr;
            } else {
                bool outside = fr < fx[worst];
                auto contracted = blend(outside ? -0.5 : 0.5);
                double fc = eval(contracted, res);
                if (fc < std::min(fr, fx[worst])) {
                    pts[worst] = contracted;
                    fx[worst] = fc;
                } else {
                    // shrink toward best
                    for (std::size_t k = 0; k <= n; ++k) {
                        if (k == best) continue;
                        for (std::size_t i = 0; i < n; ++i)
                            pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
                        fx[k] = eval(pts[k], res);
                        if (res.n_evals >= opts_.max_evals) break;
                    }
                }
            }
        }
        // budget exhausted; keep the incumbent
        for (std::size_t k = 0; k <= n; ++k) {
            if (fx[k] < res.fx) {
                res.fx = fx[k];
                res.x = pts[k];
            }
        }
        return false;
    }

    Objective f_;
    std::vector<bool> nonneg_;
    OptimOptions opts_;
};

/// Convenience wrapper.
inline OptimResult nelder_mead(const NelderMead::Objective& f, std::vector<double> x0,
                               std::vector<bool> nonneg = {}, OptimOptions opts = {}) {
    if (nonneg.empty()) nonneg.assign(x0.size(), false);
    return NelderMead(f, std::move(nonneg), opts).minimize(std::move(x0));
}

}  // namespace verimap::stats
