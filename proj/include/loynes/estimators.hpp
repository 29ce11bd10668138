#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "loynes/analytic.hpp"
#include "loynes/errors.hpp"
#include "loynes/lindley.hpp"
#include "loynes/matrix.hpp"
#include "loynes/optimize.hpp"
#include "loynes/trace.hpp"

namespace loynes {

// ---------------------------------------------------------------------------
// Result and option types
// ---------------------------------------------------------------------------

enum class ExponentStatus {
    root,    // bracketed positive zero of the estimated sCGF
    zero,    // sCGF positive immediately right of 0 (nonnegative drift)
    infinite // sCGF <= 0 on the whole search range
};

inline const char *to_string(ExponentStatus s) {
    switch (s) {
    case ExponentStatus::root: return "root";
    case ExponentStatus::zero: return "zero";
    default: return "infinite";
    }
}

// Estimated tail exponent. value is an extended real in [0, +inf];
// residual is |lambda_hat(value)| when status == root.
struct ExponentEstimate {
    double value = 0.0;
    ExponentStatus status = ExponentStatus::root;
    double residual = 0.0;
};

struct RootOpts {
    double tol = 1e-10;     // |lambda_hat| at the returned root
    double theta_cap = 1e6; // doubling ceiling; no sign change below it => infinite
    int max_bisect = 200;
};

struct SupOpts {
    double theta_cap = 1e3; // search range for the conjugate variable
    double width_tol = 1e-8;
};

// ---------------------------------------------------------------------------
// Block (i.i.d.) sCGF estimator
// ---------------------------------------------------------------------------

// MLE of the sCGF from block sums:
//   lambda_hat(theta) = (1/B) log( (1/K) sum_i exp(theta Y(i)) ).
// Evaluated as a log-sum-exp with the max of theta*Y factored out, so
// |theta * Y| far beyond 700 cannot overflow. lambda_hat(0) is 0 by
// definition and returned exactly.
inline double block_scgf(const BlockedTrace &blocked, double theta) {
    const auto &y = blocked.blocks;
    if (y.empty()) throw insufficient_data_error("block_scgf: no blocks");
    if (theta == 0.0) return 0.0;
    double m = -std::numeric_limits<double>::infinity();
    for (double v : y) m = std::max(m, theta * v);
    double s = 0.0;
    for (double v : y) s += std::exp(theta * v - m);
    return (m + std::log(s) - std::log(static_cast<double>(y.size()))) /
           static_cast<double>(blocked.block_size);
}

// ---------------------------------------------------------------------------
// Markov-chain sCGF estimator
// ---------------------------------------------------------------------------

// Transition MLE from a trace over a finite state list. counts(i,j) is the
// number of observed i -> j steps; pi_hat rows are count-normalized with
// 0/0 := 0, so a state never seen as a source keeps an all-zero row and is
// flagged unvisited.
struct TransitionEstimate {
    std::vector<std::vector<std::uint64_t>> counts;
    Mat pi_hat;
    std::vector<bool> visited;

    std::size_t states() const { return pi_hat.size(); }
    bool fully_visited() const {
        for (bool v : visited)
            if (!v) return false;
        return true;
    }
};

inline TransitionEstimate markov_mle(std::span<const double> values,
                                     const std::vector<double> &states) {
    if (states.empty()) throw parameter_error("markov_mle: empty state list");
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j)
            if (states[i] == states[j])
                throw parameter_error("markov_mle: duplicate state value");
    if (values.size() < 2)
        throw insufficient_data_error("markov_mle: need at least 2 observations");

    const std::size_t m = states.size();
    auto index_of = [&](double v) -> std::size_t {
        for (std::size_t i = 0; i < m; ++i)
            if (states[i] == v) return i;
        throw data_error("markov_mle: trace value " + format_real(v) +
                         " is not in the state list");
    };

    TransitionEstimate est;
    est.counts.assign(m, std::vector<std::uint64_t>(m, 0));
    est.pi_hat.assign(m, std::vector<double>(m, 0.0));
    est.visited.assign(m, false);

    std::size_t prev = index_of(values[0]);
    for (std::size_t k = 1; k < values.size(); ++k) {
        const std::size_t cur = index_of(values[k]);
        ++est.counts[prev][cur];
        prev = cur;
    }
    for (std::size_t i = 0; i < m; ++i) {
        std::uint64_t row_total = 0;
        for (std::uint64_t c : est.counts[i]) row_total += c;
        if (row_total == 0) continue; // 0/0 := 0
        est.visited[i] = true;
        for (std::size_t j = 0; j < m; ++j)
            est.pi_hat[i][j] =
                static_cast<double>(est.counts[i][j]) / static_cast<double>(row_total);
    }
    return est;
}

inline TransitionEstimate markov_mle(const Trace &trace, const std::vector<double> &states) {
    return markov_mle(std::span<const double>(trace.values), states);
}

namespace detail {

// log rho(pi_hat D_theta) with D_theta = diag(exp(theta f(j))). The largest
// exponent is factored out of the diagonal so entries stay in [0, 1]; the
// remaining exponents are clamped at -745 to keep the support graph intact
// when exp underflows.
inline double tilted_log_radius(const Mat &pi_hat, const std::vector<double> &f,
                                double theta) {
    const std::size_t m = pi_hat.size();
    double c = theta >= 0.0 ? *std::max_element(f.begin(), f.end())
                            : *std::min_element(f.begin(), f.end());
    Mat tilted(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            tilted[i][j] =
                pi_hat[i][j] * std::exp(std::max(theta * (f[j] - c), -745.0));
    return theta * c + std::log(spectral_radius(tilted));
}

// Every state must have outgoing evidence; a zero row would make the tilted
// matrix meaningless. The support may still be reducible (a walk that never
// returns to an early state): the spectral radius then takes the dominant
// closed class, which is the natural continuation of the estimator.
inline void require_estimable(const TransitionEstimate &est, const std::vector<double> &f,
                              const char *what) {
    if (f.size() != est.states())
        throw parameter_error(std::string(what) + ": value map size does not match state count");
    for (double v : f)
        if (v == 0.0 || !std::isfinite(v))
            throw parameter_error(std::string(what) + ": state values must be finite and nonzero");
    for (std::size_t i = 0; i < est.visited.size(); ++i)
        if (!est.visited[i])
            throw insufficient_data_error(std::string(what) + ": state " + std::to_string(i) +
                                          " never observed as a transition source");
}

} // namespace detail

// sCGF of the estimated chain: log of the spectral radius of the tilted
// matrix pi_hat * D_theta. Requires every state visited (the support must be
// irreducible for the Perron root to be meaningful).
inline double markov_scgf(const TransitionEstimate &est, const std::vector<double> &f,
                          double theta) {
    detail::require_estimable(est, f, "markov_scgf");
    return detail::tilted_log_radius(est.pi_hat, f, theta);
}

// ---------------------------------------------------------------------------
// ScgfEvaluator: one callable surface over both estimator families
// ---------------------------------------------------------------------------

class ScgfEvaluator {
  public:
    enum class Source { block, markov };

    static ScgfEvaluator from_blocks(BlockedTrace blocked) {
        if (blocked.blocks.empty())
            throw insufficient_data_error("ScgfEvaluator: no blocks");
        auto shared = std::make_shared<const BlockedTrace>(std::move(blocked));
        double mean = 0.0;
        for (double v : shared->blocks) mean += v;
        mean /= static_cast<double>(shared->blocks.size());
        const double drift = mean / static_cast<double>(shared->block_size);
        return ScgfEvaluator(Source::block, drift,
                             std::numeric_limits<double>::infinity(),
                             [shared](double theta) { return block_scgf(*shared, theta); });
    }

    static ScgfEvaluator from_markov(TransitionEstimate est, std::vector<double> f) {
        detail::require_estimable(est, f, "ScgfEvaluator");
        const auto phi = stationary_distribution(est.pi_hat);
        double drift = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) drift += phi[i] * f[i];
        // Past 700/spread the tilting exponents leave IEEE range and the
        // clamped matrix no longer tracks the true one; the exponent search
        // must not trust evaluations beyond this.
        const double spread = *std::max_element(f.begin(), f.end()) -
                              *std::min_element(f.begin(), f.end());
        const double cap = spread > 0.0 ? 700.0 / spread
                                        : std::numeric_limits<double>::infinity();
        auto pi = std::make_shared<const Mat>(std::move(est.pi_hat));
        auto fv = std::make_shared<const std::vector<double>>(std::move(f));
        return ScgfEvaluator(Source::markov, drift, cap, [pi, fv](double theta) {
            return detail::tilted_log_radius(*pi, *fv, theta);
        });
    }

    double operator()(double theta) const { return eval_(theta); }

    // Right-derivative of lambda_hat at 0: the mean block growth rate for the
    // block source, the stationary mean of f for the Markov source.
    double drift() const { return drift_; }

    // Largest theta at which evaluations are numerically trustworthy.
    double probe_cap() const { return probe_cap_; }
    Source source() const { return source_; }

  private:
    ScgfEvaluator(Source source, double drift, double probe_cap,
                  std::function<double(double)> eval)
        : source_(source), drift_(drift), probe_cap_(probe_cap), eval_(std::move(eval)) {}

    Source source_;
    double drift_;
    double probe_cap_;
    std::function<double(double)> eval_;
};

// ---------------------------------------------------------------------------
// Tail exponent from an sCGF: theta*(n) = sup{theta : lambda_hat(theta) <= 0}
// ---------------------------------------------------------------------------

// lambda_hat is convex with lambda_hat(0) = 0, so the sign of its drift
// settles the shape:
//   drift < 0  -> lambda_hat dips negative and, if it ever turns positive,
//                 crosses zero exactly once; doubling brackets the crossing
//                 and bisection drives |lambda_hat| below tol.
//   drift >= 0 -> lambda_hat >= 0 on [0, inf), so the sup is 0 unless
//                 lambda_hat vanishes identically, which makes every theta
//                 feasible (all-zero blocks land here).
// The search range is [0, min(theta_cap, probe_cap)]; the identically-zero
// probe additionally tolerates spectral noise that grows with theta.
inline ExponentEstimate exponent_from_scgf(const ScgfEvaluator &scgf,
                                           const RootOpts &opts = {}) {
    const double inf = std::numeric_limits<double>::infinity();
    const double cap = std::min(opts.theta_cap, std::max(1.0, scgf.probe_cap()));
    if (scgf.drift() >= 0.0) {
        for (double t = std::min(1.0, cap); t <= cap; t *= 2.0)
            if (scgf(t) > 1e-12 * (1.0 + t))
                return {0.0, ExponentStatus::zero, 0.0};
        return {inf, ExponentStatus::infinite, 0.0};
    }

    double lo = 0.0;
    double hi = std::min(1.0, cap);
    while (scgf(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > cap) return {inf, ExponentStatus::infinite, 0.0};
    }

    double mid = lo, residual = std::abs(scgf(lo));
    for (int it = 0; it < opts.max_bisect; ++it) {
        mid = 0.5 * (lo + hi);
        const double val = scgf(mid);
        residual = std::abs(val);
        (val <= 0.0 ? lo : hi) = mid;
        if (residual <= opts.tol && (hi - lo) <= 10.0 * opts.tol) break;
    }
    return {mid, ExponentStatus::root, residual};
}

inline ExponentEstimate block_exponent(const BlockedTrace &blocked, const RootOpts &opts = {}) {
    return exponent_from_scgf(ScgfEvaluator::from_blocks(blocked), opts);
}

inline ExponentEstimate markov_exponent(const TransitionEstimate &est,
                                        const std::vector<double> &f,
                                        const RootOpts &opts = {}) {
    return exponent_from_scgf(ScgfEvaluator::from_markov(est, f), opts);
}

// ---------------------------------------------------------------------------
// Direct extremal estimator on observed waiting times
// ---------------------------------------------------------------------------

// log(n) / max(1, W(1), ..., W(n)).
inline double extremal_exponent(std::span<const double> waits) {
    if (waits.size() < 2)
        throw insufficient_data_error("extremal_exponent: need at least 2 waiting times");
    double peak = 1.0;
    for (double w : waits) peak = std::max(peak, w);
    return std::log(static_cast<double>(waits.size())) / peak;
}

inline double extremal_exponent(const Trace &waits) {
    if (waits.kind != TraceKind::waits)
        throw parameter_error("extremal_exponent: input trace must hold waiting times");
    return extremal_exponent(std::span<const double>(waits.values));
}

// ---------------------------------------------------------------------------
// Legendre-Fenchel rate estimate
// ---------------------------------------------------------------------------

// I_hat(x) = sup_theta (theta x - lambda_hat(theta)), searched over
// [-cap, cap] by golden section (the objective is concave). If the maximizer
// sticks to the boundary the slope there decides: still growing means the
// transform is unbounded at this x (+inf sentinel); a flat tail means the
// supremum is attained in the limit and the boundary value is it.
inline double legendre_rate(const ScgfEvaluator &scgf, double x, const SupOpts &opts = {}) {
    const double cap = opts.theta_cap;
    auto neg_objective = [&](double theta) { return scgf(theta) - theta * x; };
    const auto best = golden_section_min(neg_objective, -cap, cap, opts.width_tol);
    double value = -best.value;
    const double edge_gap = std::max(2.0 * opts.width_tol, 1e-6 * cap);
    if (cap - std::abs(best.x) <= edge_gap) {
        const double side = best.x >= 0.0 ? 1.0 : -1.0;
        const double delta = std::max(1e-3 * cap, 100.0 * opts.width_tol);
        const double at_edge = -neg_objective(side * cap);
        const double inside = -neg_objective(side * (cap - delta));
        if (at_edge - inside > 1e-9 * (1.0 + std::abs(at_edge)))
            return std::numeric_limits<double>::infinity();
        value = std::max(value, at_edge);
    }
    // theta = 0 is always admissible and gives -lambda_hat(0).
    return std::max(value, -scgf(0.0));
}

} // namespace loynes
