#include "blockboot/kernels.hpp"

#include "blockboot/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace blockboot {

std::string to_string(KernelId id) {
    switch (id) {
        case KernelId::gini: return "gini";
        case KernelId::variance_half: return "variance_half";
        case KernelId::product: return "product";
        case KernelId::custom: return "custom";
    }
    return "unknown";
}

Kernel gini_kernel() {
    Kernel k;
    k.id = KernelId::gini;
    k.name = "gini";
    k.eval = [](double x, double y) { return std::abs(x - y); };
    k.reference_law = "N(0,1)";
    k.analytic_theta = 2.0 / std::sqrt(std::numbers::pi);
    // E|x - Y| = 2 phi(x) + x (2 Phi(x) - 1) for Y ~ N(0,1).
    k.analytic_h1 = [](double x) {
        const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        return 2.0 * density + x * std::erf(x / std::numbers::sqrt2) - 2.0 / std::sqrt(std::numbers::pi);
    };
    return k;
}

Kernel variance_half_kernel() {
    Kernel k;
    k.id = KernelId::variance_half;
    k.name = "variance_half";
    k.eval = [](double x, double y) { return 0.5 * (x - y) * (x - y); };
    k.reference_law = "N(0,1)";
    k.analytic_theta = 1.0;
    k.analytic_h1 = [](double x) { return 0.5 * (x * x - 1.0); };
    return k;
}

Kernel product_kernel() {
    Kernel k;
    k.id = KernelId::product;
    k.name = "product";
    k.eval = [](double x, double y) { return x * y; };
    k.reference_law = "N(0,1)";
    k.analytic_theta = 0.0;
    k.analytic_h1 = [](double) { return 0.0; };
    return k;
}

Kernel custom_kernel(std::string name, std::function<double(double, double)> eval) {
    Kernel k;
    k.id = KernelId::custom;
    k.name = std::move(name);
    k.eval = std::move(eval);
    return k;
}

std::optional<Kernel> builtin_kernel(std::string_view name) {
    if (name == "gini") return gini_kernel();
    if (name == "variance_half") return variance_half_kernel();
    if (name == "product") return product_kernel();
    return std::nullopt;
}

namespace {

struct Sorted {
    std::vector<double> values;
    std::vector<double> weights;
};

// Values sorted ascending with weights carried along; skips the sort when the
// input is already ordered.
Sorted sorted_with_weights(std::span<const double> xs, std::span<const double> ws) {
    Sorted s;
    if (std::is_sorted(xs.begin(), xs.end())) {
        s.values.assign(xs.begin(), xs.end());
        s.weights.assign(ws.begin(), ws.end());
        return s;
    }
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    s.values.resize(xs.size());
    s.weights.resize(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        s.values[i] = xs[order[i]];
        s.weights[i] = ws.empty() ? 1.0 : ws[order[i]];
    }
    return s;
}

std::vector<double> sorted_copy(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    if (!std::is_sorted(v.begin(), v.end())) std::sort(v.begin(), v.end());
    return v;
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double gini_multiset(std::span<const double> xs, std::span<const double> ws) {
    const Sorted s = sorted_with_weights(xs, ws);
    double total = 0.0, w_before = 0.0, xw_before = 0.0;
    for (std::size_t j = 0; j < s.values.size(); ++j) {
        total += s.weights[j] * (s.values[j] * w_before - xw_before);
        w_before += s.weights[j];
        xw_before += s.weights[j] * s.values[j];
    }
    return total;
}

double gini_cross(std::span<const double> xs, std::span<const double> ys) {
    const std::vector<double> a = sorted_copy(xs);
    const std::vector<double> b = sorted_copy(ys);
    const double b_total = std::accumulate(b.begin(), b.end(), 0.0);
    double total = 0.0, below_sum = 0.0;
    std::size_t below = 0;
    for (double x : a) {
        while (below < b.size() && b[below] <= x) below_sum += b[below++];
        const double above = static_cast<double>(b.size() - below);
        total += x * static_cast<double>(below) - below_sum + (b_total - below_sum) - x * above;
    }
    return total;
}

std::vector<double> gini_rows(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    const double total = std::accumulate(xs.begin(), xs.end(), 0.0);
    std::vector<double> rows(n);
    double before = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double x = xs[order[r]];
        const double after = total - before - x;
        rows[order[r]] = x * static_cast<double>(r) - before + after - x * static_cast<double>(n - r - 1);
        before += x;
    }
    return rows;
}

double generic_pair_sum(const Kernel& h, std::span<const double> xs) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) total += h.eval(xs[i], xs[j]);
    }
    return total;
}

}  // namespace

double pair_sum(const Kernel& h, std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    switch (h.id) {
        case KernelId::gini: {
            const std::vector<double> v = sorted_copy(xs);
            double total = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) total += v[j] * (2.0 * static_cast<double>(j) - n + 1.0);
            return total;
        }
        case KernelId::variance_half: {
            const double c = mean_of(xs);
            double s1 = 0.0, s2 = 0.0;
            for (double x : xs) {
                s1 += x - c;
                s2 += (x - c) * (x - c);
            }
            return 0.5 * (n * s2 - s1 * s1);
        }
        case KernelId::product: {
            double s1 = 0.0, s2 = 0.0;
            for (double x : xs) {
                s1 += x;
                s2 += x * x;
            }
            return 0.5 * (s1 * s1 - s2);
        }
        case KernelId::custom: return generic_pair_sum(h, xs);
    }
    return 0.0;
}

double multiset_pair_sum(const Kernel& h, std::span<const double> xs, std::span<const double> ws) {
    if (xs.size() != ws.size()) throw std::invalid_argument("multiset_pair_sum: values and weights differ in length");
    switch (h.id) {
        case KernelId::gini: return gini_multiset(xs, ws);
        case KernelId::variance_half: {
            double wsum = 0.0, wx = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                wsum += ws[i];
                wx += ws[i] * xs[i];
            }
            const double c = wsum > 0.0 ? wx / wsum : 0.0;
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double d = xs[i] - c;
                s1 += ws[i] * d;
                s2 += ws[i] * d * d;
            }
            return 0.5 * (wsum * s2 - s1 * s1);
        }
        case KernelId::product: {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                s1 += ws[i] * xs[i];
                s2 += ws[i] * xs[i] * xs[i];
            }
            return 0.5 * (s1 * s1 - s2);
        }
        case KernelId::custom: {
            double total = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (ws[i] == 0.0) continue;
                total += 0.5 * ws[i] * (ws[i] - 1.0) * h.eval(xs[i], xs[i]);
                for (std::size_t j = i + 1; j < xs.size(); ++j) {
                    if (ws[j] != 0.0) total += ws[i] * ws[j] * h.eval(xs[i], xs[j]);
                }
            }
            return total;
        }
    }
    return 0.0;
}

double cross_sum(const Kernel& h, std::span<const double> xs, std::span<const double> ys) {
    switch (h.id) {
        case KernelId::gini: return gini_cross(xs, ys);
        case KernelId::variance_half: {
            const double c = 0.5 * (mean_of(xs) + mean_of(ys));
            double sx = 0.0, sxx = 0.0, sy = 0.0, syy = 0.0;
            for (double x : xs) {
                sx += x - c;
                sxx += (x - c) * (x - c);
            }
            for (double y : ys) {
                sy += y - c;
                syy += (y - c) * (y - c);
            }
            const double m = static_cast<double>(xs.size());
            const double l = static_cast<double>(ys.size());
            return 0.5 * (l * sxx - 2.0 * sx * sy + m * syy);
        }
        case KernelId::product:
            return std::accumulate(xs.begin(), xs.end(), 0.0) * std::accumulate(ys.begin(), ys.end(), 0.0);
        case KernelId::custom: {
            double total = 0.0;
            for (double x : xs) {
                for (double y : ys) total += h.eval(x, y);
            }
            return total;
        }
    }
    return 0.0;
}

std::vector<double> row_sums(const Kernel& h, std::span<const double> xs) {
    const std::size_t n = xs.size();
    switch (h.id) {
        case KernelId::gini: return gini_rows(xs);
        case KernelId::variance_half: {
            const double c = mean_of(xs);
            double s1 = 0.0, s2 = 0.0;
            for (double x : xs) {
                s1 += x - c;
                s2 += (x - c) * (x - c);
            }
            std::vector<double> rows(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = xs[i] - c;
                rows[i] = 0.5 * (static_cast<double>(n) * d * d - 2.0 * d * s1 + s2);
            }
            return rows;
        }
        case KernelId::product: {
            const double s1 = std::accumulate(xs.begin(), xs.end(), 0.0);
            std::vector<double> rows(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = xs[i] * s1;
            return rows;
        }
        case KernelId::custom: {
            std::vector<double> rows(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                rows[i] += h.eval(xs[i], xs[i]);
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double v = h.eval(xs[i], xs[j]);
                    rows[i] += v;
                    rows[j] += v;
                }
            }
            return rows;
        }
    }
    return {};
}

double diagonal_sum(const Kernel& h, std::span<const double> xs) {
    switch (h.id) {
        case KernelId::gini:
        case KernelId::variance_half: return 0.0;
        default: {
            double total = 0.0;
            for (double x : xs) total += h.eval(x, x);
            return total;
        }
    }
}

double u_statistic(std::span<const double> xs, const Kernel& h) {
    if (xs.size() < 2) throw InsufficientSampleError("U-statistic needs at least 2 observations");
    const double n = static_cast<double>(xs.size());
    return pair_sum(h, xs) * 2.0 / (n * (n - 1.0));
}

double u_statistic(const TimeSeries& series, const Kernel& h) { return u_statistic(series.values(), h); }

HoeffdingParts::HoeffdingParts(const Kernel& h, std::span<const double> xs) : kernel_(h), xs_(xs.begin(), xs.end()) {
    if (xs_.size() < 2) throw InsufficientSampleError("Hoeffding decomposition needs at least 2 observations");
    const double n = static_cast<double>(xs_.size());
    const double pairs = pair_sum(h, xs_);
    theta_ = (2.0 * pairs + diagonal_sum(h, xs_)) / (n * n);
    u_ = pairs * 2.0 / (n * (n - 1.0));
    h1_ = row_sums(h, xs_);
    for (auto& v : h1_) v = v / n - theta_;
}

double HoeffdingParts::h2(std::size_t i, std::size_t j) const {
    return kernel_.eval(xs_.at(i), xs_.at(j)) - h1_[i] - h1_[j] - theta_;
}

double HoeffdingParts::h1_at(double x) const {
    const double single[] = {x};
    return cross_sum(kernel_, single, xs_) / static_cast<double>(xs_.size()) - theta_;
}

double HoeffdingParts::degenerate_u_statistic() const { return u_ - theta_; }

double degenerate_u_statistic(const Kernel& h, std::span<const double> xs) {
    if (xs.size() < 2) throw InsufficientSampleError("degenerate part needs at least 2 observations");
    const double n = static_cast<double>(xs.size());
    const double pairs = pair_sum(h, xs);
    const double theta = (2.0 * pairs + diagonal_sum(h, xs)) / (n * n);
    return pairs * 2.0 / (n * (n - 1.0)) - theta;
}

HoeffdingParts hoeffding_decompose(const TimeSeries& series, const Kernel& h) {
    return HoeffdingParts(h, series.values());
}

std::vector<LipschitzProbeRow> p_lipschitz_probe(const Kernel& h, std::span<const double> xs,
                                                 std::span<const double> eps_grid, double l_candidate) {
    if (eps_grid.empty()) throw std::invalid_argument("p_lipschitz_probe: empty eps grid");
    for (double e : eps_grid) {
        if (!(e >= 0.0)) throw std::invalid_argument(fmt::format("p_lipschitz_probe: eps {} is negative", e));
    }
    const std::size_t n = xs.size();
    if (n < 3) throw InsufficientSampleError("p_lipschitz_probe needs at least 3 observations");

    // Nearest other sample point for each X_i, and the mean over Y of |h(X,Y) - h(X',Y)|.
    std::vector<double> gap(n);
    std::vector<double> mean_diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t nearest = i == 0 ? 1 : 0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m != i && std::abs(xs[m] - xs[i]) < std::abs(xs[nearest] - xs[i])) nearest = m;
        }
        gap[i] = std::abs(xs[nearest] - xs[i]);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || j == nearest) continue;
            acc += std::abs(h.eval(xs[i], xs[j]) - h.eval(xs[nearest], xs[j]));
        }
        mean_diff[i] = acc / static_cast<double>(n - 2);
    }

    std::vector<LipschitzProbeRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (gap[i] <= eps) lhs += mean_diff[i];
        }
        lhs /= static_cast<double>(n);
        rows.push_back({eps, lhs, l_candidate * eps, lhs > l_candidate * eps});
    }
    return rows;
}

}  // namespace blockboot
