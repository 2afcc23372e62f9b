#pragma once

// Least-squares fit of r(x,y) = p(x,y)/p(y) with one indicator kernel per
// item pair. With kernel weights alpha_ij the model is r_hat(w_i, w_j) =
// alpha_ij; the empirical cost is
//
//   J_hat(alpha) = 1/2 sum alpha_ij^2 C(w_j)/N - sum alpha_ij C(w_i,w_j)/N
//
// and the objective adds (lambda/2N) |alpha|^2 under alpha_ij >= 0. The
// objective is separable per coordinate, so the minimizer is
// alpha_ij = C(w_i,w_j) / (C(w_j) + lambda), which is already feasible.
//
// The population cost (expressed in the unknown p(x,y), p(y)) differs from
// J_hat only by a constant in alpha and has no computable form here.
//
// alpha is stored over an explicit sorted support; entries off the support
// are zero. Unobserved pairs have C(w_i,w_j) = 0 and hence optimum 0, so the
// observed support carries the whole solution.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ratiorules/errors.hpp"
#include "ratiorules/transaction_store.hpp"

namespace ratiorules {

/// Indicator kernel phi_ij: 1 at (x, y) = (w_i, w_j), else 0.
struct KernelIndex {
    ItemId i;  // consequent item w_i
    ItemId j;  // antecedent item w_j

    auto operator<=>(const KernelIndex&) const = default;
};

inline double indicator_kernel(KernelIndex k, ItemId x, ItemId y) noexcept {
    return (x == k.i && y == k.j) ? 1.0 : 0.0;
}

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Values over a strictly increasing kernel support.
template <typename Scalar>
class KernelField {
public:
    KernelField() = default;

    KernelField(std::vector<KernelIndex> support, Vector<Scalar> values)
        : support_(std::move(support)), values_(std::move(values)) {
        if (static_cast<Eigen::Index>(support_.size()) != values_.size())
            throw InvalidArgument("kernel support and values differ in size");
        for (std::size_t k = 1; k < support_.size(); ++k)
            if (!(support_[k - 1] < support_[k])) throw InvalidArgument("kernel support must be strictly increasing");
    }

    const std::vector<KernelIndex>& support() const noexcept { return support_; }
    const Vector<Scalar>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return support_.size(); }

    /// Value at `k`; zero off the support.
    Scalar at(KernelIndex k) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), k);
        if (it == support_.end() || *it != k) return Scalar(0);
        return values_(static_cast<Eigen::Index>(it - support_.begin()));
    }

    Scalar max_abs() const { return values_.size() == 0 ? Scalar(0) : values_.cwiseAbs().maxCoeff(); }

protected:
    std::vector<KernelIndex> support_;
    Vector<Scalar> values_;
};

/// Kernel weights; every stored value is finite and >= 0.
template <typename Scalar>
class AlphaVector : public KernelField<Scalar> {
public:
    AlphaVector() = default;

    AlphaVector(std::vector<KernelIndex> support, Vector<Scalar> values)
        : KernelField<Scalar>(std::move(support), std::move(values)) {
        for (Eigen::Index k = 0; k < this->values_.size(); ++k) {
            const Scalar v = this->values_(k);
            if (!(v >= Scalar(0)) || !std::isfinite(static_cast<double>(v)))
                throw InvalidArgument("alpha entries must be finite and non-negative");
        }
    }

    static AlphaVector zeros(std::vector<KernelIndex> support) {
        const auto n = static_cast<Eigen::Index>(support.size());
        return AlphaVector(std::move(support), Vector<Scalar>::Zero(n));
    }

    /// r_hat(x, y) = sum_k alpha_k phi_k(x, y).
    Scalar estimate(ItemId x, ItemId y) const { return this->at(KernelIndex{x, y}); }
};

template <typename Scalar>
using Gradient = KernelField<Scalar>;

template <typename Scalar>
struct CostConfig {
    Scalar lambda = Scalar(0);
};

/// Every (i, j) with C(w_i, w_j) >= 1, diagonal included, sorted.
inline std::vector<KernelIndex> observed_support(const CooccurrenceCounts& counts) {
    std::vector<KernelIndex> support;
    support.reserve(2 * counts.pair_count() + counts.vocab_size());
    for (ItemId x = 0; x < counts.vocab_size(); ++x)
        if (counts.unary(x) > 0) support.push_back({x, x});
    for (const auto& [packed, c] : counts.pairs()) {
        const auto key = PairKey::unpack(packed);
        support.push_back({key.lo, key.hi});
        support.push_back({key.hi, key.lo});
    }
    std::sort(support.begin(), support.end());
    return support;
}

namespace detail {

template <typename Scalar>
struct SupportCounts {
    Vector<Scalar> cy;   // C(w_j)
    Vector<Scalar> cxy;  // C(w_i, w_j)
    Scalar n;
};

template <typename Scalar>
SupportCounts<Scalar> gather(const std::vector<KernelIndex>& support, const CooccurrenceCounts& counts) {
    if (counts.n_records() == 0) throw InvalidArgument("cost undefined for N = 0");
    const auto m = static_cast<Eigen::Index>(support.size());
    SupportCounts<Scalar> out{Vector<Scalar>(m), Vector<Scalar>(m), static_cast<Scalar>(counts.n_records())};
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& idx = support[static_cast<std::size_t>(k)];
        out.cy(k) = static_cast<Scalar>(counts.unary(idx.j));
        out.cxy(k) = static_cast<Scalar>(counts.pair(idx.i, idx.j));
    }
    return out;
}

template <typename Scalar>
void check_lambda(const CostConfig<Scalar>& cfg) {
    if (!(cfg.lambda >= Scalar(0)) || !std::isfinite(static_cast<double>(cfg.lambda)))
        throw InvalidArgument("lambda must be finite and >= 0");
}

}  // namespace detail

template <typename Scalar>
Scalar empirical_cost(const AlphaVector<Scalar>& alpha, const CooccurrenceCounts& counts) {
    const auto s = detail::gather<Scalar>(alpha.support(), counts);
    const auto a = alpha.values().array();
    return (Scalar(0.5) * (a.square() * s.cy.array()).sum() - (a * s.cxy.array()).sum()) / s.n;
}

template <typename Scalar>
Scalar regularized_objective(const AlphaVector<Scalar>& alpha, const CooccurrenceCounts& counts,
                             const CostConfig<Scalar>& cfg) {
    detail::check_lambda(cfg);
    const Scalar n = static_cast<Scalar>(counts.n_records());
    return empirical_cost(alpha, counts) + cfg.lambda / (Scalar(2) * n) * alpha.values().squaredNorm();
}

/// Component (i,j): alpha_ij (C(w_j) + lambda)/N - C(w_i,w_j)/N.
template <typename Scalar>
Gradient<Scalar> objective_gradient(const AlphaVector<Scalar>& alpha, const CooccurrenceCounts& counts,
                                    const CostConfig<Scalar>& cfg) {
    detail::check_lambda(cfg);
    const auto s = detail::gather<Scalar>(alpha.support(), counts);
    Vector<Scalar> g = (alpha.values().array() * (s.cy.array() + cfg.lambda) - s.cxy.array()) / s.n;
    return Gradient<Scalar>(alpha.support(), std::move(g));
}

/// alpha_ij = C(w_i,w_j) / (C(w_j) + lambda) over the observed support.
template <typename Scalar>
AlphaVector<Scalar> analytic_solution(const CooccurrenceCounts& counts, const CostConfig<Scalar>& cfg) {
    detail::check_lambda(cfg);
    auto support = observed_support(counts);
    const auto m = static_cast<Eigen::Index>(support.size());
    Vector<Scalar> cy(m), cxy(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& idx = support[static_cast<std::size_t>(k)];
        cy(k) = static_cast<Scalar>(counts.unary(idx.j));
        cxy(k) = static_cast<Scalar>(counts.pair(idx.i, idx.j));
    }
    if (cfg.lambda == Scalar(0) && m > 0 && cy.minCoeff() == Scalar(0))
        throw UndefinedRatio("lambda = 0 with C(w_j) = 0 on the support");
    Vector<Scalar> values = cxy.array() / (cy.array() + cfg.lambda);
    return AlphaVector<Scalar>(std::move(support), std::move(values));
}

struct MinimizerOptions {
    std::size_t max_iterations = 1'000'000;
};

/// Projected gradient descent from alpha = 0 over the observed support with
/// fixed step N / (max C(w_j) + lambda). Stops when the gradient restricted
/// to the active set has Euclidean norm <= tol. Requires lambda > 0.
template <typename Scalar>
AlphaVector<Scalar> numeric_minimizer(const CooccurrenceCounts& counts, const CostConfig<Scalar>& cfg, Scalar tol,
                                      MinimizerOptions options = {}) {
    detail::check_lambda(cfg);
    if (!(cfg.lambda > Scalar(0))) throw InvalidArgument("numeric minimizer requires lambda > 0");
    if (!(tol > Scalar(0))) throw InvalidArgument("tolerance must be > 0");
    auto support = observed_support(counts);
    const auto s = detail::gather<Scalar>(support, counts);
    const auto m = static_cast<Eigen::Index>(support.size());
    Vector<Scalar> alpha = Vector<Scalar>::Zero(m);
    if (m == 0) return AlphaVector<Scalar>(std::move(support), std::move(alpha));

    const Scalar step = s.n / (s.cy.maxCoeff() + cfg.lambda);
    const auto curvature = ((s.cy.array() + cfg.lambda) / s.n).eval();
    const auto linear = (s.cxy.array() / s.n).eval();

    Scalar norm = std::numeric_limits<Scalar>::infinity();
    for (std::size_t it = 0; it <= options.max_iterations; ++it) {
        const auto g = (alpha.array() * curvature - linear).eval();
        // At alpha = 0, only a descent direction into the feasible set counts.
        const auto active = (alpha.array() > Scalar(0)).select(g, g.min(Scalar(0)));
        norm = active.matrix().norm();
        if (norm <= tol) return AlphaVector<Scalar>(std::move(support), std::move(alpha));
        alpha = (alpha.array() - step * g).max(Scalar(0)).matrix();
    }
    throw ConvergenceFailure("projected gradient did not converge; final gradient norm " + std::to_string(static_cast<double>(norm)),
                             static_cast<double>(norm));
}

/// Dense v x v view of `w`, entry (i, j) = w_ij.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense(const KernelField<Scalar>& w, std::size_t vocab_size) {
    const auto v = static_cast<Eigen::Index>(vocab_size);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(v, v);
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto& idx = w.support()[k];
        if (idx.i >= vocab_size || idx.j >= vocab_size) throw InvalidArgument("kernel index outside the vocabulary");
        out(idx.i, idx.j) = w.values()(static_cast<Eigen::Index>(k));
    }
    return out;
}

}  // namespace ratiorules
