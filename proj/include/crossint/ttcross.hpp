#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "crossint/errors.hpp"
#include "crossint/gaussian.hpp"
#include "crossint/linalg.hpp"
#include "crossint/quadrature.hpp"
#include "crossint/rng.hpp"

namespace crossint {

/// Evaluates the target on a pinned slice: coordinates below `a` come from
/// node k, coordinate `a` is x, coordinates above `a` come from node l.
/// k/l are ignored when there are no coordinates on that side (edge slices);
/// callers pass -1 there.
using PinnedEvaluator = std::function<double(int a, int k, int l, double x)>;

/// A multivariate function prepared for cross interpolation. `eval` is
/// mandatory; the remaining hooks are optional accelerators:
///  - integrate_1d: analytic \int f[s_k<, x, s_l>] dx along dimension a
///    (left/right are null when that side carries no pinned coordinates);
///  - make_pinned: builds a fast slice evaluator bound to a node list,
///    replacing the generic splice-and-eval path;
///  - gh_mean/gh_var: per-dimension Gaussian hints for Gauss-Hermite
///    integration of slices when no analytic integral is available.
/// All evaluations (including slices and analytic 1-D integrals) tick the
/// shared counter, which backs the cost accounting of experiment reports.
struct TargetFunction {
    int dim = 0;
    std::function<double(const Vector&)> eval;
    std::function<double(int a, const Vector* left, const Vector* right)> integrate_1d;
    std::function<PinnedEvaluator(const std::vector<Vector>&)> make_pinned;
    Vector gh_mean;
    Vector gh_var;
    std::shared_ptr<std::int64_t> eval_count = std::make_shared<std::int64_t>(0);

    /// Optional separable-weight factorization f(x) = exp(sum_a w_a(x_a)) *
    /// core(x), with w_a = log_weight_1d(a, .). When all three hooks below are
    /// present, connection matrices are assembled and pseudo-inverted on the
    /// core alone: the diagonal weight scalings cancel exactly across the
    /// chain F_1 Q^+ F_2 ... F_d, so dropping them keeps the solves well
    /// conditioned even when the weight spans hundreds of orders of magnitude
    /// between nodes. core_integral_1d must return the weighted core integral
    /// \int w_a(x) core[s_k<, x, s_l>] dx (the full integrand integral with
    /// the *pinned* dimensions' weights left out).
    std::function<double(int a, double x)> log_weight_1d;
    std::function<PinnedEvaluator(const std::vector<Vector>&)> make_pinned_core;
    std::function<double(int a, const Vector* left, const Vector* right)> core_integral_1d;
    /// Optional weighted core integral restricted to [lo, hi]; required for
    /// integrate() under per-dimension integration limits in core mode.
    std::function<double(int a, const Vector* left, const Vector* right, double lo, double hi)>
        core_integral_1d_box;

    bool has_core_factorization() const {
        return static_cast<bool>(log_weight_1d) && static_cast<bool>(make_pinned_core) &&
               static_cast<bool>(core_integral_1d);
    }
};

/// Tensor train cross representation: an ordered node list plus cached
/// pseudo-inverses of the connection matrices, evaluable and integrable.
/// Growth is greedy: candidate points are drawn from a proposal sampler and
/// the largest-residual candidates become new nodes.
class TTXModel {
public:
    explicit TTXModel(TargetFunction target, double pinv_tol = 1e-12)
        : f_(std::move(target)), pinv_tol_(pinv_tol) {
        if (f_.dim < 1) throw InvalidInputError("TTXModel: dim must be >= 1");
        if (!f_.eval) throw InvalidInputError("TTXModel: target has no eval");
        proposal_center_ = Vector::Zero(f_.dim);
        local_scale_ = Vector::Ones(f_.dim);
        rebuild();
    }

    int dim() const { return f_.dim; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Vector>& nodes() const { return nodes_; }
    const TargetFunction& target() const { return f_; }
    double pinv_tol() const { return pinv_tol_; }
    std::int64_t eval_count() const { return *f_.eval_count; }
    std::int64_t assembly_evals() const { return assembly_evals_; }

    /// Candidate points for growth are drawn from `sampler`; `center` is also
    /// offered as a candidate in every pool (for unimodal targets the first
    /// node then lands at the mode). `scale` sets local-search step sizes.
    void set_proposal(std::function<Vector(Rng&)> sampler, Vector center, Vector scale) {
        proposal_ = std::move(sampler);
        proposal_center_ = std::move(center);
        local_scale_ = std::move(scale);
    }

    void set_proposal(const std::shared_ptr<const GaussianModel>& measure) {
        Vector scale = measure->spec().sigma.diagonal().cwiseSqrt();
        set_proposal([measure](Rng& rng) { return measure->sample(rng); },
                     measure->spec().mu, std::move(scale));
    }

    /// Restricts each element-wise 1-D integral in integrate() to
    /// [lo(a), hi(a)] instead of the whole line. Deliberately clipping a known
    /// tail mass trades a small, smooth, sign-constant truncation bias for the
    /// erratic interpolation remainder that otherwise dominates mid-size node
    /// counts, which is what sequence acceleration needs. Infinite entries
    /// leave that side uncut.
    void set_integration_limits(Vector lo, Vector hi) {
        if (lo.size() != f_.dim || hi.size() != f_.dim)
            throw InvalidInputError("set_integration_limits: dimension mismatch");
        for (int i = 0; i < f_.dim; ++i)
            if (!(lo(i) < hi(i)))
                throw InvalidInputError("set_integration_limits: need lo < hi");
        limit_lo_ = std::move(lo);
        limit_hi_ = std::move(hi);
        limited_ = true;
    }

    void clear_integration_limits() { limited_ = false; }

    /// Appends the given nodes (assumed distinct from the existing ones) and
    /// rebuilds the connection pseudo-inverses.
    void add_nodes(const std::vector<Vector>& pts) {
        for (const auto& p : pts) {
            if (p.size() != f_.dim)
                throw InvalidInputError("add_nodes: node dimension mismatch");
            if (!p.allFinite())
                throw InvalidInputError("add_nodes: node has non-finite coordinates");
            nodes_.push_back(p);
        }
        rebuild();
    }

    /// Greedy growth by one node: draws `pool` candidates, keeps the residual
    /// argmax, optionally hill-climbs it coordinate-wise, then rebuilds.
    void add_node(Rng& rng, int pool, int local_steps = 0) {
        if (pool < 1) throw InvalidInputError("add_node: pool must be >= 1");
        std::vector<Vector> cands = draw_pool(rng, pool);
        std::vector<double> res(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) res[i] = residual(cands[i]);
        std::vector<std::size_t> order = residual_order(res);

        Vector winner;
        bool found = false;
        for (std::size_t idx : order) {
            if (!is_duplicate(cands[idx])) { winner = cands[idx]; found = true; break; }
        }
        if (!found) {
            // Every candidate coincides with an existing node: jitter the best
            // one by 1e-8 of the local scale per coordinate.
            winner = cands[order.front()];
            for (int i = 0; i < f_.dim; ++i)
                winner(i) += 1e-8 * local_scale_(i) * rng.normal();
        }
        if (local_steps > 0) winner = local_search(winner, local_steps);
        nodes_.push_back(winner);
        rebuild();
    }

    /// Grows to `target_n` nodes, adding batches of up to half the current
    /// size between rebuilds so the residual landscape is refreshed at least
    /// twice per doubling.
    void grow_to(int target_n, Rng& rng, int pool, int local_steps = 0) {
        while (size() < target_n) {
            const int batch = std::max(1, std::min(size() / 2, target_n - size()));
            if (batch == 1) {
                add_node(rng, pool, local_steps);
                continue;
            }
            std::vector<Vector> cands = draw_pool(rng, std::max(pool, 2 * batch));
            std::vector<double> res(cands.size());
            for (std::size_t i = 0; i < cands.size(); ++i) res[i] = residual(cands[i]);
            std::vector<std::size_t> order = residual_order(res);

            std::vector<Vector> picked;
            for (std::size_t idx : order) {
                if (static_cast<int>(picked.size()) >= batch) break;
                const Vector& c = cands[idx];
                bool dup = is_duplicate(c);
                for (const auto& p : picked)
                    if (dup) break; else dup = close(p, c);
                if (!dup) picked.push_back(local_steps > 0 ? local_search(c, local_steps) : c);
            }
            if (picked.empty()) { add_node(rng, pool, local_steps); continue; }
            for (auto& p : picked) nodes_.push_back(std::move(p));
            rebuild();
        }
    }

    /// F_a[x]: 1 x n row for the first dimension, n x 1 column for the last,
    /// n x n otherwise (1 x 1 when d == 1).
    Matrix f_matrix(int a, double x) const {
        check_dim_index(a);
        const int n = size();
        if (f_.dim == 1) {
            Matrix m(1, 1);
            m(0, 0) = pinned(0, -1, -1, x);
            return m;
        }
        if (a == 0) {
            Matrix m(1, n);
            for (int l = 0; l < n; ++l) m(0, l) = pinned(a, -1, l, x);
            return m;
        }
        if (a == f_.dim - 1) {
            Matrix m(n, 1);
            for (int k = 0; k < n; ++k) m(k, 0) = pinned(a, k, -1, x);
            return m;
        }
        Matrix m(n, n);
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) m(k, l) = pinned(a, k, l, x);
        return m;
    }

    /// The chain product F_1[x_1] Q^+ F_2[x_2] ... F_d[x_d]. An empty model
    /// evaluates to 0 by convention.
    double evaluate(const Vector& x) const {
        if (x.size() != f_.dim) throw InvalidInputError("evaluate: dimension mismatch");
        const int n = size();
        if (n == 0) return 0.0;
        if (core_mode_) {
            // f = exp(sum log_weight) * core; the pseudo-inverses are of the
            // core matrices, so the chain over core slices reconstructs core(x)
            // and the weight is reattached as a scalar.
            double lw = 0.0;
            for (int a = 0; a < f_.dim; ++a) lw += f_.log_weight_1d(a, x(a));
            const double weight = std::exp(lw);
            if (weight == 0.0) return 0.0;
            if (f_.dim == 1) return weight * pinned_core(0, -1, -1, x(0));
            return weight * contract_chain([&](int a, int k, int l) {
                return pinned_core(a, k, l, x(a));
            });
        }
        if (f_.dim == 1) return pinned(0, -1, -1, x(0));
        return contract_chain([&](int a, int k, int l) { return pinned(a, k, l, x(a)); });
    }

    /// Replaces each F_a by its element-wise 1-D integral and contracts the
    /// chain. Uses the target's analytic integral when available, otherwise
    /// the supplied quadrature rule.
    double integrate(const QuadratureRule& quad = QuadratureRule::adaptive(1e-10)) const {
        const int n = size();
        if (n == 0) throw InvalidInputError("integrate: model has no nodes");
        if (f_.dim == 1) return integral_entry(0, -1, -1, quad);
        return contract_chain([&](int a, int k, int l) { return integral_entry(a, k, l, quad); });
    }

    /// Root-mean-square residual over points drawn from `sampler`.
    double rms_error(const GaussianModel& sampler, Rng& rng, long long n_samples) const {
        if (n_samples < 1) throw InvalidInputError("rms_error: need n_samples >= 1");
        double acc = 0.0;
        for (long long i = 0; i < n_samples; ++i) {
            const Vector x = sampler.sample(rng);
            const double r = f_.eval(x) - evaluate(x);
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(n_samples));
    }

    double residual(const Vector& x) const {
        ++*f_.eval_count;
        return std::abs(f_.eval(x) - evaluate(x));
    }

private:
    void check_dim_index(int a) const {
        if (a < 0 || a >= f_.dim) throw InvalidInputError("dimension index out of range");
    }

    double pinned(int a, int k, int l, double x) const {
        ++*f_.eval_count;
        if (pe_) return pe_(a, k, l, x);
        Vector z(f_.dim);
        for (int i = 0; i < a; ++i) z(i) = nodes_[k](i);
        z(a) = x;
        for (int i = a + 1; i < f_.dim; ++i) z(i) = nodes_[l](i);
        return f_.eval(z);
    }

    double pinned_core(int a, int k, int l, double x) const {
        ++*f_.eval_count;
        return pe_core_(a, k, l, x);
    }

    /// Left-to-right contraction row(0) * Q_0^+ * mid(1) * ... * col(d-1) over
    /// entries supplied by `entry(a, k, l)` (k = -1 for the first slot, l = -1
    /// for the last).
    template <typename EntryFn>
    double contract_chain(EntryFn&& entry) const {
        const int n = size();
        Eigen::RowVectorXd v(n);
        for (int l = 0; l < n; ++l) v(l) = entry(0, -1, l);
        for (int a = 1; a < f_.dim; ++a) {
            Eigen::RowVectorXd w = v * q_pinv_[a - 1];
            if (a == f_.dim - 1) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += w(k) * entry(a, k, -1);
                return acc;
            }
            Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(n);
            for (int k = 0; k < n; ++k) {
                const double wk = w(k);
                if (wk == 0.0) continue;
                for (int l = 0; l < n; ++l) next(l) += wk * entry(a, k, l);
            }
            v = std::move(next);
        }
        return 0.0; // unreachable
    }

    double integral_entry(int a, int k, int l, const QuadratureRule& quad) const {
        if (core_mode_) {
            ++*f_.eval_count;
            const Vector* left = k >= 0 ? &nodes_[k] : nullptr;
            const Vector* right = l >= 0 ? &nodes_[l] : nullptr;
            if (limited_) {
                if (!f_.core_integral_1d_box)
                    throw InvalidInputError(
                        "integrate: integration limits set but the target has no "
                        "truncated 1-D integral");
                return f_.core_integral_1d_box(a, left, right, limit_lo_(a), limit_hi_(a));
            }
            return f_.core_integral_1d(a, left, right);
        }
        if (limited_) {
            auto slice = [&](double x) { return pinned(a, k, l, x); };
            return adaptive_quad(slice, limit_lo_(a), limit_hi_(a), quad.tolerance);
        }
        if (f_.integrate_1d) {
            ++*f_.eval_count;
            const Vector* left = k >= 0 ? &nodes_[k] : nullptr;
            const Vector* right = l >= 0 ? &nodes_[l] : nullptr;
            return f_.integrate_1d(a, left, right);
        }
        auto slice = [&](double x) { return pinned(a, k, l, x); };
        if (quad.kind == QuadratureRule::Kind::GaussHermite) {
            const double m = f_.gh_mean.size() == f_.dim ? f_.gh_mean(a) : 0.0;
            const double v = f_.gh_var.size() == f_.dim ? f_.gh_var(a) : 1.0;
            auto g = [&](double x) {
                const double r = x - m;
                const double w = std::exp(-0.5 * r * r / v) / std::sqrt(2.0 * M_PI * v);
                return slice(x) / w;
            };
            return gauss_hermite(g, m, v, quad.order);
        }
        return adaptive_quad(slice, -kInf, kInf, quad.tolerance);
    }

    void rebuild() {
        core_mode_ = f_.has_core_factorization();
        pe_ = f_.make_pinned ? f_.make_pinned(nodes_) : PinnedEvaluator();
        pe_core_ = core_mode_ ? f_.make_pinned_core(nodes_) : PinnedEvaluator();
        const std::int64_t before = *f_.eval_count;
        const int n = size();
        q_pinv_.clear();
        if (n > 0 && f_.dim > 1) {
            q_pinv_.reserve(f_.dim - 1);
            for (int a = 0; a + 1 < f_.dim; ++a) {
                Matrix q(n, n);
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        q(k, l) = core_mode_ ? pinned_core(a, k, l, nodes_[k](a))
                                             : pinned(a, k, l, nodes_[k](a));
                q_pinv_.push_back(pinv(q, pinv_tol_));
            }
        }
        assembly_evals_ = *f_.eval_count - before;
    }

    std::vector<Vector> draw_pool(Rng& rng, int pool) const {
        if (!proposal_) throw InvalidInputError("growth requires a proposal sampler");
        std::vector<Vector> cands;
        cands.reserve(pool + 1);
        cands.push_back(proposal_center_);
        for (int i = 0; i < pool; ++i) cands.push_back(proposal_(rng));
        return cands;
    }

    static std::vector<std::size_t> residual_order(const std::vector<double>& res) {
        std::vector<std::size_t> order(res.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return res[a] > res[b]; });
        return order;
    }

    static bool close(const Vector& a, const Vector& b) {
        return (a - b).cwiseAbs().maxCoeff() <= 1e-10;
    }

    bool is_duplicate(const Vector& c) const {
        for (const auto& s : nodes_)
            if (close(s, c)) return true;
        return false;
    }

    Vector local_search(Vector x, int steps) const {
        double best = residual(x);
        for (int s = 0; s < steps; ++s) {
            const double h = 0.25 / static_cast<double>(1 << s);
            for (int i = 0; i < f_.dim; ++i) {
                for (double sign : {1.0, -1.0}) {
                    Vector y = x;
                    y(i) += sign * h * local_scale_(i);
                    const double r = residual(y);
                    if (r > best && !is_duplicate(y)) { best = r; x = std::move(y); }
                }
            }
        }
        return x;
    }

    TargetFunction f_;
    double pinv_tol_;
    std::vector<Vector> nodes_;
    std::vector<Matrix> q_pinv_;
    PinnedEvaluator pe_;
    PinnedEvaluator pe_core_;
    bool core_mode_ = false;
    bool limited_ = false;
    Vector limit_lo_;
    Vector limit_hi_;
    std::int64_t assembly_evals_ = 0;
    std::function<Vector(Rng&)> proposal_;
    Vector proposal_center_;
    Vector local_scale_;
};

/// Linear change of coordinates y = L^{-1}(x - mu): the returned target is
/// g(y) = f(mu + L y) |det L|, so integrals over y match integrals over x.
/// Whitening a Gaussian-weighted target with its Cholesky factor turns the
/// weight into a standard normal.
inline TargetFunction transformed_target(const TargetFunction& f, const Vector& mu,
                                         const Matrix& transform) {
    if (mu.size() != f.dim || transform.rows() != f.dim || transform.cols() != f.dim)
        throw InvalidInputError("transformed_target: dimension mismatch");
    const double jac = std::abs(transform.determinant());
    TargetFunction g;
    g.dim = f.dim;
    g.eval = [eval = f.eval, mu, transform, jac](const Vector& y) {
        return jac * eval(mu + transform * y);
    };
    g.gh_mean = Vector::Zero(f.dim);
    g.gh_var = Vector::Ones(f.dim);
    g.eval_count = f.eval_count;
    return g;
}

} // namespace crossint
