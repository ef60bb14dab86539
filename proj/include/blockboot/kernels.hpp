#pragma once

#include "blockboot/process_gen.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace blockboot {

enum class KernelId { gini, variance_half, product, custom };

[[nodiscard]] std::string to_string(KernelId id);

/**
 * @brief Symmetric bivariate kernel h(x, y).
 *
 * Builtin kernels carry exact O(n log n) or O(n) evaluations of the pair sums
 * below; custom kernels fall back to plain pairwise loops. `analytic_theta` and
 * `analytic_h1` describe the kernel under the law named in `reference_law`.
 */
struct Kernel {
    KernelId id = KernelId::custom;
    std::string name;
    std::function<double(double, double)> eval;
    std::optional<double> analytic_theta;
    std::function<double(double)> analytic_h1;
    std::string reference_law;

    double operator()(double x, double y) const { return eval(x, y); }
};

/// h(x,y) = |x - y| (Gini's mean difference).
[[nodiscard]] Kernel gini_kernel();
/// h(x,y) = (x - y)^2 / 2; its U-statistic is the unbiased sample variance.
[[nodiscard]] Kernel variance_half_kernel();
/// h(x,y) = x * y.
[[nodiscard]] Kernel product_kernel();
[[nodiscard]] Kernel custom_kernel(std::string name, std::function<double(double, double)> eval);

/// Builtin kernel by id name ("gini", "variance_half", "product").
[[nodiscard]] std::optional<Kernel> builtin_kernel(std::string_view name);

// Pair sums. "Multiset" sums treat element i as appearing weights[i] times
// (weights must be nonnegative integers stored as doubles) and add
// C(w_i, 2) * h(x_i, x_i) for copies of the same element.

/// sum_{i<j} h(x_i, x_j).
[[nodiscard]] double pair_sum(const Kernel& h, std::span<const double> xs);
[[nodiscard]] double multiset_pair_sum(const Kernel& h, std::span<const double> xs, std::span<const double> weights);
/// sum_{x in xs, y in ys} h(x, y).
[[nodiscard]] double cross_sum(const Kernel& h, std::span<const double> xs, std::span<const double> ys);
/// r_i = sum_j h(x_i, x_j), diagonal included.
[[nodiscard]] std::vector<double> row_sums(const Kernel& h, std::span<const double> xs);
/// sum_i h(x_i, x_i).
[[nodiscard]] double diagonal_sum(const Kernel& h, std::span<const double> xs);

/// U_n(h) = 2/(n(n-1)) sum_{i<j} h(X_i, X_j). Throws InsufficientSampleError for n < 2.
[[nodiscard]] double u_statistic(std::span<const double> xs, const Kernel& h);
[[nodiscard]] double u_statistic(const TimeSeries& series, const Kernel& h);

/**
 * @brief Empirical Hoeffding decomposition with V-statistic centering.
 *
 * theta_hat = n^-2 sum_{i,j} h(X_i, X_j), h1(X_i) = n^-1 sum_j h(X_i, X_j) - theta_hat,
 * h2(X_i, X_j) = h(X_i, X_j) - h1(X_i) - h1(X_j) - theta_hat. With the diagonal
 * included both centering identities hold exactly:
 *   sum_i h1(X_i) = 0,  sum_j h2(X_i, X_j) = 0 for every i.
 */
class HoeffdingParts {
public:
    HoeffdingParts(const Kernel& h, std::span<const double> xs);

    [[nodiscard]] double theta_hat() const noexcept { return theta_; }
    [[nodiscard]] std::span<const double> h1_values() const noexcept { return h1_; }
    /// h2 evaluated on sample indices.
    [[nodiscard]] double h2(std::size_t i, std::size_t j) const;
    /// h1 at an arbitrary point x: n^-1 sum_j h(x, X_j) - theta_hat.
    [[nodiscard]] double h1_at(double x) const;

    /// U_n(h2) over the sample; equals U_n(h) - theta_hat because sum_i h1(X_i) = 0.
    [[nodiscard]] double degenerate_u_statistic() const;

private:
    Kernel kernel_;
    std::vector<double> xs_;
    double theta_;
    double u_;
    std::vector<double> h1_;
};

/// U_n(h2_hat) = U_n(h) - theta_hat without materialising the decomposition.
[[nodiscard]] double degenerate_u_statistic(const Kernel& h, std::span<const double> xs);

[[nodiscard]] HoeffdingParts hoeffding_decompose(const TimeSeries& series, const Kernel& h);

/// One row of a P-Lipschitz probe.
struct LipschitzProbeRow {
    double eps = 0.0;
    double lhs_estimate = 0.0;  ///< mean of |h(X,Y) - h(X',Y)| 1{|X - X'| <= eps}
    double bound = 0.0;         ///< L_candidate * eps
    bool flagged = false;       ///< lhs_estimate > bound
};

/**
 * Heuristic falsifier for P-Lipschitz continuity. For every sample point X_i the
 * perturbation X' is the nearest other sample point; the indicator keeps pairs
 * within eps, and Y ranges over all remaining sample points. A flag is a finding
 * against the candidate constant, never a proof of continuity.
 */
[[nodiscard]] std::vector<LipschitzProbeRow> p_lipschitz_probe(const Kernel& h, std::span<const double> xs,
                                                               std::span<const double> eps_grid, double l_candidate);

}  // namespace blockboot
