#include "neldermead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bragg {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, const NelderMeadOptions& opts) {
    const int dim = static_cast<int>(x0.size());
    if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");

    std::vector<double> scale(dim);
    for (int i = 0; i < dim; ++i) scale[i] = std::max(std::abs(x0[i]), 1e-8);

    std::vector<std::vector<double>> x(dim + 1, x0);
    for (int i = 0; i < dim; ++i)
        x[i + 1][i] += (x0[i] != 0.0 ? opts.initial_step * x0[i] : opts.initial_step);

    NelderMeadResult res;
    std::vector<double> fx(dim + 1);
    for (int i = 0; i <= dim; ++i) {
        fx[i] = f(x[i]);
        ++res.evaluations;
    }

    auto order = [&]() {
        std::vector<int> idx(dim + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> x2(dim + 1);
        std::vector<double> f2(dim + 1);
        for (int i = 0; i <= dim; ++i) {
            x2[i] = x[idx[i]];
            f2[i] = fx[idx[i]];
        }
        x.swap(x2);
        fx.swap(f2);
    };

    auto diameter = [&]() {
        double d = 0.0;
        for (int i = 1; i <= dim; ++i)
            for (int c = 0; c < dim; ++c)
                d = std::max(d, std::abs(x[i][c] - x[0][c]) / scale[c]);
        return d;
    };

    order();
    res.best_history.push_back(fx[0]);

    while (res.evaluations < opts.max_evaluations) {
        if (diameter() < opts.tolerance) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(dim, 0.0);
        for (int i = 0; i < dim; ++i)
            for (int c = 0; c < dim; ++c) centroid[c] += x[i][c] / dim;

        auto at = [&](double coeff) {
            std::vector<double> p(dim);
            for (int c = 0; c < dim; ++c) p[c] = centroid[c] + coeff * (centroid[c] - x[dim][c]);
            return p;
        };

        std::vector<double> xr = at(opts.reflection);
        double fr = f(xr);
        ++res.evaluations;

        if (fr < fx[0]) {
            std::vector<double> xe = at(opts.reflection * opts.expansion);
            double fe = f(xe);
            ++res.evaluations;
            if (fe < fr) {
                x[dim] = std::move(xe);
                fx[dim] = fe;
            } else {
                x[dim] = std::move(xr);
                fx[dim] = fr;
            }
        } else if (fr < fx[dim - 1]) {
            x[dim] = std::move(xr);
            fx[dim] = fr;
        } else {
            bool outside = fr < fx[dim];
            std::vector<double> xc;
            if (outside) {
                xc.resize(dim);
                for (int c = 0; c < dim; ++c) xc[c] = centroid[c] + opts.contraction * (xr[c] - centroid[c]);
            } else {
                xc = at(-opts.contraction);
            }
            double fc = f(xc);
            ++res.evaluations;
            if (fc < std::min(fr, fx[dim])) {
                x[dim] = std::move(xc);
                fx[dim] = fc;
            } else {
                // shrink toward the best vertex
                for (int i = 1; i <= dim; ++i) {
                    for (int c = 0; c < dim; ++c)
                        x[i][c] = x[0][c] + opts.shrink * (x[i][c] - x[0][c]);
                    fx[i] = f(x[i]);
                    ++res.evaluations;
                }
            }
        }
        order();
        res.best_history.push_back(fx[0]);
    }

    res.best = x[0];
    res.value = fx[0];
    return res;
}

} // namespace bragg
