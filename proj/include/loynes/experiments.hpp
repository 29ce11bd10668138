#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "loynes/analytic.hpp"
#include "loynes/errors.hpp"
#include "loynes/estimators.hpp"
#include "loynes/lindley.hpp"
#include "loynes/processes.hpp"

namespace loynes {

enum class EstimatorKind { block, markov, extremal };

inline const char *to_string(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::block: return "block";
    case EstimatorKind::markov: return "markov";
    default: return "extremal";
    }
}

struct EstimatorChoice {
    EstimatorKind kind = EstimatorKind::block;
    std::size_t block_size = 1; // block estimator only
};

namespace detail {

// One estimate from a prefix of increments, per estimator family.
//  - block: block sums then the sCGF root.
//  - markov: MLE over the distinct values seen. A value appearing only at
//    the very end has no outgoing transition and would break irreducibility,
//    so the tail is trimmed until the last value has been seen before; with
//    fewer than two effective observations there is no transition evidence
//    and every theta is feasible (status infinite).
//  - extremal: Lindley from 0 then log(n)/max(1, W).
inline ExponentEstimate estimate_on_prefix(std::span<const double> x,
                                           const EstimatorChoice &choice,
                                           const RootOpts &root) {
    switch (choice.kind) {
    case EstimatorKind::block:
        return block_exponent(block_sums(x, choice.block_size), root);
    case EstimatorKind::markov: {
        std::size_t len = x.size();
        auto seen_before = [&](std::size_t k) {
            for (std::size_t i = 0; i < k; ++i)
                if (x[i] == x[k]) return true;
            return false;
        };
        while (len >= 2 && !seen_before(len - 1)) --len;
        if (len < 2)
            return {std::numeric_limits<double>::infinity(), ExponentStatus::infinite, 0.0};
        const std::span<const double> head = x.subspan(0, len);
        std::set<double> distinct(head.begin(), head.end());
        const std::vector<double> states(distinct.begin(), distinct.end());
        return markov_exponent(markov_mle(head, states), states, root);
    }
    default: {
        const auto waits = lindley_recursion(x, 0.0);
        return {extremal_exponent(std::span<const double>(waits)), ExponentStatus::root, 0.0};
    }
    }
}

inline void require_compatible(const ProcessSpec &process, const EstimatorChoice &choice) {
    if (choice.kind == EstimatorKind::markov && std::holds_alternative<Dm1Spec>(process))
        throw parameter_error(
            "markov estimator needs finite-valued increments; dm1 increments are continuous");
    if (choice.kind == EstimatorKind::block && choice.block_size < 1)
        throw parameter_error("block size must be >= 1");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Single-realization convergence run
// ---------------------------------------------------------------------------

struct ConvergenceConfig {
    ProcessSpec process;
    EstimatorChoice estimator;
    std::size_t n_max = 0;
    std::vector<std::size_t> checkpoints; // empty means {n_max}
    std::uint64_t seed = 0;
    std::size_t warmup = 0; // increments discarded before the run proper
    RootOpts root;
};

struct ConvergencePoint {
    std::size_t n = 0;
    ExponentEstimate estimate;
};

// One realization of length n_max; the estimator is recomputed on the prefix
// at every checkpoint, so each row depends only on values 1..n.
inline std::vector<ConvergencePoint> run_convergence(const ConvergenceConfig &cfg) {
    detail::require_compatible(cfg.process, cfg.estimator);
    if (cfg.n_max < 1) throw parameter_error("run_convergence: n_max must be >= 1");
    std::vector<std::size_t> checkpoints =
        cfg.checkpoints.empty() ? std::vector<std::size_t>{cfg.n_max} : cfg.checkpoints;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > cfg.n_max)
            throw parameter_error("run_convergence: checkpoints must lie in [1, n_max]");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw parameter_error("run_convergence: checkpoints must be strictly increasing");
    }
    const std::size_t min_n =
        cfg.estimator.kind == EstimatorKind::block ? cfg.estimator.block_size : 2;
    if (checkpoints.front() < min_n)
        throw parameter_error("run_convergence: first checkpoint is too small for the estimator");

    const Trace trace =
        sample(with_run_params(cfg.process, cfg.n_max + cfg.warmup, cfg.seed));
    const std::span<const double> values =
        std::span<const double>(trace.values).subspan(cfg.warmup);

    std::vector<ConvergencePoint> out;
    out.reserve(checkpoints.size());
    for (std::size_t n : checkpoints)
        out.push_back({n, detail::estimate_on_prefix(values.subspan(0, n), cfg.estimator, cfg.root)});
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo probe of the estimator's large-deviation behavior
// ---------------------------------------------------------------------------

struct McLdpConfig {
    ProcessSpec process;
    EstimatorChoice estimator;
    std::uint64_t replicas = 10000; // m
    std::vector<std::size_t> n_list;
    std::vector<double> x_list;
    std::uint64_t base_seed = 0;
    std::size_t warmup = 0;
    std::optional<double> theta_star_ref; // required when no closed form exists
    unsigned workers = 1;
    RootOpts root;
};

struct McLdpCell {
    std::size_t n = 0;
    double x = 0.0;
    std::uint64_t exceed_count = 0;
    double rate = 0.0; // -(1/n) log(count/m); +inf when count = 0
};

struct McLdpResult {
    std::vector<McLdpCell> table; // n outer, x inner
    double theta_star_ref = 0.0;
    std::uint64_t replicas = 0;
    std::uint64_t base_seed = 0;
};

// Reference exponent for the exceedance events. Two-state and D/M/1 have
// analytic values; anything else must supply one explicitly.
inline double resolve_theta_star_ref(const McLdpConfig &cfg) {
    if (cfg.theta_star_ref) return *cfg.theta_star_ref;
    if (const auto *ts = std::get_if<TwoStateSpec>(&cfg.process))
        return two_state_exponent(ts->alpha, ts->beta);
    if (const auto *dm = std::get_if<Dm1Spec>(&cfg.process))
        return dm1_exponent(dm->alpha, dm->beta);
    throw parameter_error("run_mc_ldp: no analytic theta* for this process; "
                          "supply theta_star_ref explicitly");
}

// For each replica r (seeded base_seed + r) and each n in n_list, estimates
// theta*(n) on the prefix of length n and counts the events
// theta*(n) - theta*_ref > x for every x. An infinite estimate exceeds any x.
// Replicas are independent and the per-cell merge is a commutative integer
// sum, so the counts cannot depend on worker count or schedule.
inline McLdpResult run_mc_ldp(const McLdpConfig &cfg) {
    detail::require_compatible(cfg.process, cfg.estimator);
    if (cfg.replicas < 1) throw parameter_error("run_mc_ldp: replicas must be >= 1");
    if (cfg.n_list.empty()) throw parameter_error("run_mc_ldp: n_list must be nonempty");
    if (cfg.x_list.empty()) throw parameter_error("run_mc_ldp: x_list must be nonempty");
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        const std::size_t min_n =
            cfg.estimator.kind == EstimatorKind::block ? cfg.estimator.block_size : 2;
        if (cfg.n_list[i] < min_n)
            throw parameter_error("run_mc_ldp: n_list entry too small for the estimator");
        if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1])
            throw parameter_error("run_mc_ldp: n_list must be strictly increasing");
    }
    for (std::size_t i = 0; i < cfg.x_list.size(); ++i) {
        if (!(cfg.x_list[i] > 0.0))
            throw parameter_error("run_mc_ldp: x_list values must be positive");
        if (i > 0 && cfg.x_list[i] <= cfg.x_list[i - 1])
            throw parameter_error("run_mc_ldp: x_list must be strictly increasing");
    }
    const double theta_ref = resolve_theta_star_ref(cfg);

    const std::size_t n_count = cfg.n_list.size();
    const std::size_t x_count = cfg.x_list.size();
    const std::size_t n_big = cfg.n_list.back();

    // Validate the process spec before any worker starts; replica specs
    // differ only in seed, so one check covers them all.
    std::visit([&](const auto &s) { s.validate(); },
               with_run_params(cfg.process, n_big + cfg.warmup, cfg.base_seed));

    using CountGrid = std::vector<std::uint64_t>; // n-major, x-minor
    auto run_range = [&](std::uint64_t first, std::uint64_t last, CountGrid &counts) {
        for (std::uint64_t r = first; r < last; ++r) {
            const Trace trace = sample(
                with_run_params(cfg.process, n_big + cfg.warmup, cfg.base_seed + r));
            const std::span<const double> values =
                std::span<const double>(trace.values).subspan(cfg.warmup);
            for (std::size_t ni = 0; ni < n_count; ++ni) {
                const auto est = detail::estimate_on_prefix(
                    values.subspan(0, cfg.n_list[ni]), cfg.estimator, cfg.root);
                const double excess = est.status == ExponentStatus::infinite
                                          ? std::numeric_limits<double>::infinity()
                                          : est.value - theta_ref;
                for (std::size_t xi = 0; xi < x_count; ++xi)
                    if (excess > cfg.x_list[xi]) ++counts[ni * x_count + xi];
            }
        }
    };

    CountGrid total(n_count * x_count, 0);
    const unsigned workers =
        std::max(1u, std::min(cfg.workers, static_cast<unsigned>(cfg.replicas)));
    if (workers == 1) {
        run_range(0, cfg.replicas, total);
    } else {
        std::vector<CountGrid> partial(workers, CountGrid(n_count * x_count, 0));
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::uint64_t chunk = (cfg.replicas + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t first = static_cast<std::uint64_t>(w) * chunk;
            const std::uint64_t last = std::min<std::uint64_t>(first + chunk, cfg.replicas);
            pool.emplace_back([&, w, first, last] {
                try {
                    run_range(first, last, partial[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto &t : pool) t.join();
        for (const auto &e : errors)
            if (e) std::rethrow_exception(e);
        for (const auto &grid : partial)
            for (std::size_t i = 0; i < total.size(); ++i) total[i] += grid[i];
    }

    McLdpResult result;
    result.theta_star_ref = theta_ref;
    result.replicas = cfg.replicas;
    result.base_seed = cfg.base_seed;
    result.table.reserve(n_count * x_count);
    for (std::size_t ni = 0; ni < n_count; ++ni) {
        for (std::size_t xi = 0; xi < x_count; ++xi) {
            const std::uint64_t count = total[ni * x_count + xi];
            double rate;
            if (count == 0) {
                rate = std::numeric_limits<double>::infinity();
            } else {
                rate = -std::log(static_cast<double>(count) /
                                 static_cast<double>(cfg.replicas)) /
                       static_cast<double>(cfg.n_list[ni]);
                if (rate == 0.0) rate = 0.0; // normalize -0
            }
            result.table.push_back({cfg.n_list[ni], cfg.x_list[xi], count, rate});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Analytic rate curve for the two-state example
// ---------------------------------------------------------------------------

inline RateCurve rate_curve_two_state(double alpha, double beta,
                                      const std::vector<double> &x_grid) {
    require_two_state_params(alpha, beta, "rate_curve_two_state");
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (!(x_grid[i] > 0.0))
            throw parameter_error("rate_curve_two_state: grid values must be positive");
        if (i > 0 && x_grid[i] <= x_grid[i - 1])
            throw parameter_error("rate_curve_two_state: grid must be strictly increasing");
    }
    RateCurve curve;
    curve.kind = RateCurveKind::two_state_rate;
    curve.meta = {"alpha=" + format_real(alpha), "beta=" + format_real(beta),
                  "theta_star=" + format_real(two_state_exponent(alpha, beta))};
    curve.points.reserve(x_grid.size());
    for (double x : x_grid) curve.points.push_back({x, two_state_rate(alpha, beta, x)});
    return curve;
}

} // namespace loynes
