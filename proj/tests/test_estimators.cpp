#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "loynes/estimators.hpp"
#include "loynes/processes.hpp"

using namespace loynes;

namespace {

BlockedTrace blocks_of(std::vector<double> y, std::size_t b = 1) {
    BlockedTrace out;
    out.block_size = b;
    out.blocks = std::move(y);
    return out;
}

TransitionEstimate estimate_from_matrix(Mat pi_hat) {
    TransitionEstimate est;
    const std::size_t m = pi_hat.size();
    est.pi_hat = std::move(pi_hat);
    est.counts.assign(m, std::vector<std::uint64_t>(m, 1));
    est.visited.assign(m, true);
    return est;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

// ---------------------------------------------------------------------------
// block_scgf
// ---------------------------------------------------------------------------

TEST(BlockScgf, SingleSample) {
    EXPECT_DOUBLE_EQ(block_scgf(blocks_of({0.5}), 2.0), 1.0);
}

TEST(BlockScgf, ZeroIsExact) {
    EXPECT_EQ(block_scgf(blocks_of({0.3, -2.0, 5.5}), 0.0), 0.0);
    EXPECT_EQ(block_scgf(blocks_of({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}, 3), 0.0), 0.0);
}

TEST(BlockScgf, LogCoshOracle) {
    const auto blocked = blocks_of({-1.0, 1.0});
    for (double theta = -3.0; theta <= 3.0; theta += 0.125) {
        const double oracle = std::log(0.5 * (std::exp(-theta) + std::exp(theta)));
        EXPECT_NEAR(block_scgf(blocked, theta), oracle, 1e-12);
    }
    EXPECT_NEAR(block_scgf(blocked, 1.0), 0.433781, 1e-6);
}

TEST(BlockScgf, NoOverflowForHugeArguments) {
    const auto blocked = blocks_of({-1.0, 1.0});
    // log cosh(theta) = theta - log 2 once exp(-2 theta) underflows.
    EXPECT_NEAR(block_scgf(blocked, 800.0), 800.0 - std::log(2.0), 1e-9);
    EXPECT_NEAR(block_scgf(blocked, -800.0), 800.0 - std::log(2.0), 1e-9);
    EXPECT_TRUE(std::isfinite(block_scgf(blocks_of({700.0, -700.0}), 50.0)));
}

TEST(BlockScgf, ConvexOnGrids) {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> y(16);
        for (auto &v : y) v = dist(gen);
        const auto blocked = blocks_of(std::move(y), 2);
        for (double t1 = -4.0; t1 <= 4.0; t1 += 1.0) {
            for (double t2 = t1 + 1.0; t2 <= 4.0; t2 += 1.0) {
                const double mid = block_scgf(blocked, 0.5 * (t1 + t2));
                const double avg =
                    0.5 * (block_scgf(blocked, t1) + block_scgf(blocked, t2));
                EXPECT_LE(mid, avg + 1e-12);
            }
        }
    }
}

TEST(BlockScgf, EmptyRejected) {
    EXPECT_THROW(block_scgf(blocks_of({}), 1.0), insufficient_data_error);
}

// ---------------------------------------------------------------------------
// exponent_from_scgf
// ---------------------------------------------------------------------------

TEST(BlockExponent, GoldenRatioRoot) {
    // e^{-2 theta} + e^{theta} = 2 at theta = log((1+sqrt(5))/2); the same
    // root out of an independent bisection on the raw equation.
    const double closed_form = std::log(0.5 * (1.0 + std::sqrt(5.0)));
    auto h = [](double t) { return std::exp(-2.0 * t) + std::exp(t) - 2.0; };
    double lo = 0.1, hi = 1.0;
    ASSERT_LT(h(lo), 0.0);
    ASSERT_GT(h(hi), 0.0);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) <= 0.0 ? lo : hi) = mid;
    }
    const auto est = block_exponent(blocks_of({-2.0, 1.0}));
    EXPECT_EQ(est.status, ExponentStatus::root);
    EXPECT_NEAR(est.value, closed_form, 1e-9);
    EXPECT_NEAR(est.value, 0.5 * (lo + hi), 1e-9);
    EXPECT_LE(est.residual, 1e-10);
}

TEST(BlockExponent, AllZeroBlocksAreDegenerate) {
    const auto est = block_exponent(blocks_of({0.0, 0.0, 0.0}));
    EXPECT_EQ(est.status, ExponentStatus::infinite);
    EXPECT_TRUE(std::isinf(est.value));
}

TEST(BlockExponent, AllNegativeBlocksAreDegenerate) {
    const auto est = block_exponent(blocks_of({-1.0, -0.5, -2.0}));
    EXPECT_EQ(est.status, ExponentStatus::infinite);
}

TEST(BlockExponent, ZeroMeanGivesZeroStatus) {
    const auto est = block_exponent(blocks_of({-1.0, 1.0}));
    EXPECT_EQ(est.status, ExponentStatus::zero);
    EXPECT_EQ(est.value, 0.0);
}

TEST(BlockExponent, PositiveMeanGivesZeroStatus) {
    const auto est = block_exponent(blocks_of({-1.0, 1.0, 1.0}));
    EXPECT_EQ(est.status, ExponentStatus::zero);
    EXPECT_EQ(est.value, 0.0);
}

TEST(BlockExponent, SignBracketCertificate) {
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> dist(-3.0, 1.0);
    int roots = 0;
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> y(32);
        for (auto &v : y) v = dist(gen);
        y[0] = 2.0; // keep some positive mass so a root can exist
        const auto blocked = blocks_of(std::move(y));
        const RootOpts opts;
        const auto est = block_exponent(blocked, opts);
        if (est.status != ExponentStatus::root) continue;
        ++roots;
        const double delta = 10.0 * opts.tol;
        EXPECT_LT(block_scgf(blocked, est.value - delta), 0.0);
        EXPECT_GT(block_scgf(blocked, est.value + delta), 0.0);
    }
    EXPECT_GT(roots, 10);
}

// Multiplying increments by c > 0 substitutes theta -> theta/c in the sCGF;
// for powers of two the substitution is exact in floating point, and the
// estimated exponent scales accordingly.
TEST(BlockExponent, ScaleCovariance) {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> dist(-2.5, 1.0);
    std::vector<double> y(64);
    for (auto &v : y) v = dist(gen);
    y[0] = 1.5;
    for (double c : {2.0, 0.25, 64.0}) {
        std::vector<double> scaled = y;
        for (auto &v : scaled) v *= c;
        const auto base = blocks_of(y);
        const auto big = blocks_of(scaled);
        for (double theta = -8.0; theta <= 8.0; theta += 0.5)
            EXPECT_EQ(block_scgf(big, theta / c), block_scgf(base, theta));
        const auto est_base = block_exponent(base);
        const auto est_big = block_exponent(big);
        ASSERT_EQ(est_base.status, ExponentStatus::root);
        ASSERT_EQ(est_big.status, ExponentStatus::root);
        EXPECT_NEAR(est_big.value * c, est_base.value, 1e-7);
    }
}

// ---------------------------------------------------------------------------
// markov_mle
// ---------------------------------------------------------------------------

TEST(MarkovMle, HandCountedTransitions) {
    Trace trace;
    trace.values = {-1.0, 1.0, 1.0, -1.0, -1.0};
    const auto est = markov_mle(trace, {-1.0, 1.0});
    EXPECT_EQ(est.counts[0][0], 1u);
    EXPECT_EQ(est.counts[0][1], 1u);
    EXPECT_EQ(est.counts[1][0], 1u);
    EXPECT_EQ(est.counts[1][1], 1u);
    EXPECT_DOUBLE_EQ(est.pi_hat[0][0], 0.5);
    EXPECT_DOUBLE_EQ(est.pi_hat[0][1], 0.5);
    EXPECT_DOUBLE_EQ(est.pi_hat[1][0], 0.5);
    EXPECT_DOUBLE_EQ(est.pi_hat[1][1], 0.5);
    EXPECT_TRUE(est.fully_visited());
}

TEST(MarkovMle, UnvisitedRowIsZeroByConvention) {
    Trace trace;
    trace.values = {-1.0, -1.0, -1.0};
    const auto est = markov_mle(trace, {-1.0, 1.0});
    EXPECT_DOUBLE_EQ(est.pi_hat[0][0], 1.0);
    EXPECT_DOUBLE_EQ(est.pi_hat[0][1], 0.0);
    EXPECT_DOUBLE_EQ(est.pi_hat[1][0], 0.0); // 0/0 := 0
    EXPECT_DOUBLE_EQ(est.pi_hat[1][1], 0.0);
    EXPECT_TRUE(est.visited[0]);
    EXPECT_FALSE(est.visited[1]);
    EXPECT_FALSE(est.fully_visited());
}

TEST(MarkovMle, VisitedRowsAreNormalized) {
    std::mt19937_64 gen(24);
    Trace trace = sample_two_state({0.2, 0.4, 400, 17});
    const auto est = markov_mle(trace, {-1.0, 1.0});
    for (std::size_t i = 0; i < 2; ++i) {
        if (!est.visited[i]) continue;
        EXPECT_NEAR(est.pi_hat[i][0] + est.pi_hat[i][1], 1.0, 1e-12);
    }
}

TEST(MarkovMle, Errors) {
    Trace trace;
    trace.values = {-1.0, 2.5};
    EXPECT_THROW(markov_mle(trace, {-1.0, 1.0}), data_error); // value outside states
    trace.values = {-1.0};
    EXPECT_THROW(markov_mle(trace, {-1.0, 1.0}), insufficient_data_error);
    trace.values = {-1.0, 1.0};
    EXPECT_THROW(markov_mle(trace, {-1.0, -1.0}), parameter_error); // duplicate states
}

// ---------------------------------------------------------------------------
// markov_scgf / markov_exponent
// ---------------------------------------------------------------------------

TEST(MarkovScgf, ZeroAtZeroForStochasticEstimates) {
    const auto est = estimate_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
    EXPECT_NEAR(markov_scgf(est, {-1.0, 1.0}, 0.0), 0.0, 1e-10);
}

TEST(MarkovScgf, TrueMatrixVanishesAtExponent) {
    const double alpha = 1.0 / 16.0, beta = 3.0 / 16.0;
    const double theta_star = std::log((1.0 - alpha) / (1.0 - beta));
    const auto est =
        estimate_from_matrix({{1.0 - alpha, alpha}, {beta, 1.0 - beta}});
    EXPECT_NEAR(markov_scgf(est, {-1.0, 1.0}, theta_star), 0.0, 1e-10);
    // Determinant oracle: theta* makes Pi_theta - I singular.
    const double u = std::exp(-theta_star), v = std::exp(theta_star);
    const double det = ((1.0 - alpha) * u - 1.0) * ((1.0 - beta) * v - 1.0) -
                       alpha * v * beta * u;
    EXPECT_NEAR(det, 0.0, 1e-12);
}

TEST(MarkovScgf, SingletonChainIsLinear) {
    const auto est = estimate_from_matrix({{1.0}});
    for (double theta : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
        EXPECT_NEAR(markov_scgf(est, {2.5}, theta), 2.5 * theta, 1e-12);
        EXPECT_NEAR(markov_scgf(est, {-1.0}, theta), -theta, 1e-12);
    }
}

TEST(MarkovScgf, UnvisitedStateRefused) {
    Trace trace;
    trace.values = {-1.0, -1.0, -1.0};
    const auto est = markov_mle(trace, {-1.0, 1.0});
    EXPECT_THROW(markov_scgf(est, {-1.0, 1.0}, 0.5), insufficient_data_error);
    EXPECT_THROW(markov_exponent(est, {-1.0, 1.0}), insufficient_data_error);
}

TEST(MarkovScgf, ZeroValueMapRefused) {
    const auto est = estimate_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
    EXPECT_THROW(markov_scgf(est, {0.0, 1.0}, 0.5), parameter_error);
}

TEST(MarkovScgf, ConvexOnGrids) {
    const auto trace = sample_two_state({0.15, 0.35, 2000, 7});
    const auto est = markov_mle(trace, {-1.0, 1.0});
    const auto scgf = ScgfEvaluator::from_markov(est, {-1.0, 1.0});
    EXPECT_NEAR(scgf(0.0), 0.0, 1e-10); // log rho of the estimated chain itself
    for (double t1 = -3.0; t1 <= 3.0; t1 += 0.75) {
        for (double t2 = t1 + 0.75; t2 <= 3.0; t2 += 0.75) {
            EXPECT_LE(scgf(0.5 * (t1 + t2)), 0.5 * (scgf(t1) + scgf(t2)) + 1e-12);
        }
    }
}

TEST(MarkovExponent, PaperTwoStateValue) {
    const auto est = estimate_from_matrix({{15.0 / 16.0, 1.0 / 16.0}, {3.0 / 16.0, 13.0 / 16.0}});
    const auto got = markov_exponent(est, {-1.0, 1.0});
    EXPECT_EQ(got.status, ExponentStatus::root);
    EXPECT_NEAR(got.value, std::log(15.0 / 13.0), 1e-8);
    EXPECT_NEAR(got.value, 0.143101, 1e-6);
}

TEST(MarkovExponent, ClosedFormCrossCheck) {
    const auto est = estimate_from_matrix({{0.9, 0.1}, {0.2, 0.8}});
    const auto got = markov_exponent(est, {-1.0, 1.0});
    EXPECT_NEAR(got.value, std::log(9.0 / 8.0), 1e-8);
    EXPECT_NEAR(got.value, 0.117783, 1e-6);
}

TEST(MarkovExponent, NonnegativeStationaryMeanGivesZero) {
    const auto est = estimate_from_matrix({{0.5, 0.5}, {0.5, 0.5}});
    const auto got = markov_exponent(est, {-1.0, 2.0});
    EXPECT_EQ(got.status, ExponentStatus::zero);
    EXPECT_EQ(got.value, 0.0);
}

TEST(MarkovExponent, SymmetricDeterministicChainIsDegenerate) {
    // Alternating +/-1 chain has lambda identically zero.
    const auto est = estimate_from_matrix({{0.0, 1.0}, {1.0, 0.0}});
    const auto got = markov_exponent(est, {-1.0, 1.0});
    EXPECT_EQ(got.status, ExponentStatus::infinite);
}

// A walk can leave an early state forever; the estimated support is then
// reducible with every state still visited as a source. The spectral radius
// follows the dominant closed class.
TEST(MarkovExponent, ReducibleWalkEstimates) {
    Trace up; // -1 -> +1 -> +1: absorbed in the positive state
    up.values = {-1.0, 1.0, 1.0};
    const auto est_up = markov_mle(up, {-1.0, 1.0});
    const auto got_up = markov_exponent(est_up, {-1.0, 1.0});
    EXPECT_EQ(got_up.status, ExponentStatus::zero);

    Trace down; // +1 -> -1 -> -1: absorbed in the negative state
    down.values = {1.0, -1.0, -1.0};
    const auto est_down = markov_mle(down, {-1.0, 1.0});
    const auto got_down = markov_exponent(est_down, {-1.0, 1.0});
    EXPECT_EQ(got_down.status, ExponentStatus::infinite);
}

// ---------------------------------------------------------------------------
// extremal_exponent
// ---------------------------------------------------------------------------

TEST(ExtremalExponent, DirectFormula) {
    std::vector<double> waits(100, 0.0);
    waits[40] = 25.0;
    EXPECT_NEAR(extremal_exponent(std::span<const double>(waits)), std::log(100.0) / 25.0,
                1e-12);
    EXPECT_NEAR(extremal_exponent(std::span<const double>(waits)), 0.184207, 1e-6);
}

TEST(ExtremalExponent, DenominatorClampsAtOne) {
    const std::vector<double> waits(3, 0.0);
    EXPECT_DOUBLE_EQ(extremal_exponent(std::span<const double>(waits)), std::log(3.0));
    const std::vector<double> small = {0.2, 0.4, 0.9, 0.1};
    EXPECT_DOUBLE_EQ(extremal_exponent(std::span<const double>(small)), std::log(4.0));
}

TEST(ExtremalExponent, Errors) {
    const std::vector<double> one = {1.0};
    EXPECT_THROW(extremal_exponent(std::span<const double>(one)), insufficient_data_error);
    Trace increments;
    increments.values = {1.0, -1.0};
    increments.kind = TraceKind::increments;
    EXPECT_THROW(extremal_exponent(increments), parameter_error);
}

// Monte Carlo oracle: D/M/1 waits over 1e5 steps put the (slow, log-n)
// extremal estimate in a broad band above theta* ~ 0.176. A 100-seed
// calibration run puts the estimator's median at 0.259 with quartiles
// [0.242, 0.294]; it approaches theta* from above as n grows.
TEST(ExtremalExponent, Dm1MedianBand) {
    std::vector<double> estimates;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto trace = sample_dm1({1.0, 10.0 / 11.0, 100000, 9000 + seed});
        const auto waits = lindley_recursion(std::span<const double>(trace.values), 0.0);
        estimates.push_back(extremal_exponent(std::span<const double>(waits)));
    }
    const double med = median_of(estimates);
    EXPECT_GE(med, 0.12);
    EXPECT_LE(med, 0.30);
}

// ---------------------------------------------------------------------------
// legendre_rate
// ---------------------------------------------------------------------------

TEST(LegendreRate, LogCoshCases) {
    const auto scgf = ScgfEvaluator::from_blocks(blocks_of({-1.0, 1.0}));
    EXPECT_NEAR(legendre_rate(scgf, 0.0), 0.0, 1e-9);
    EXPECT_NEAR(legendre_rate(scgf, 0.5), 0.130812, 1e-6);
    EXPECT_NEAR(legendre_rate(scgf, 1.0), std::log(2.0), 1e-6);
    EXPECT_TRUE(std::isinf(legendre_rate(scgf, 2.0)));
    EXPECT_TRUE(std::isinf(legendre_rate(scgf, -2.0)));
}

TEST(LegendreRate, BinaryEntropyOracleOnGrid) {
    const auto scgf = ScgfEvaluator::from_blocks(blocks_of({-1.0, 1.0}));
    for (int i = 0; i < 50; ++i) {
        const double x = -0.99 + 1.98 * (i + 0.5) / 50.0;
        const double oracle =
            0.5 * (1.0 + x) * std::log(1.0 + x) + 0.5 * (1.0 - x) * std::log(1.0 - x);
        EXPECT_NEAR(legendre_rate(scgf, x), oracle, 1e-6) << "x=" << x;
    }
}

TEST(LegendreRate, GridSupCrossCheck) {
    const auto scgf = ScgfEvaluator::from_blocks(blocks_of({-2.0, 1.0, 0.5}));
    for (double x : {-1.0, -0.2, 0.3, 0.8}) {
        double coarse = -std::numeric_limits<double>::infinity();
        for (double theta = -60.0; theta <= 60.0; theta += 0.001)
            coarse = std::max(coarse, theta * x - scgf(theta));
        const double got = legendre_rate(scgf, x);
        if (std::isinf(got)) continue;
        EXPECT_GE(got, coarse - 1e-6) << "x=" << x;
    }
}

TEST(LegendreRate, NonnegativeAndZeroAtDrift) {
    const auto scgf = ScgfEvaluator::from_blocks(blocks_of({-2.0, 1.0}));
    EXPECT_NEAR(legendre_rate(scgf, scgf.drift()), 0.0, 1e-9);
    for (double x = -3.0; x <= 1.5; x += 0.25) {
        const double v = legendre_rate(scgf, x);
        EXPECT_GE(v, -1e-12);
    }
}

TEST(LegendreRate, MarkovSourceBehavesLikeARateFunction) {
    const auto trace = sample_two_state({0.1, 0.3, 5000, 77});
    const auto scgf =
        ScgfEvaluator::from_markov(markov_mle(trace, {-1.0, 1.0}), {-1.0, 1.0});
    // Vanishes (to evaluator precision) at the estimated mean drift and grows
    // away from it.
    EXPECT_NEAR(legendre_rate(scgf, scgf.drift()), 0.0, 1e-8);
    EXPECT_GT(legendre_rate(scgf, scgf.drift() + 0.3), 1e-3);
    EXPECT_GT(legendre_rate(scgf, scgf.drift() - 0.3), 1e-3);
    // Outside the value range the transform is unbounded.
    EXPECT_TRUE(std::isinf(legendre_rate(scgf, 2.0)));
}

TEST(LegendreRate, ConvexInArgumentOnGrid) {
    const auto scgf = ScgfEvaluator::from_blocks(blocks_of({-2.0, -0.5, 1.0, 0.25}));
    std::vector<double> xs, vals;
    for (double x = -1.9; x <= 0.9; x += 0.1) {
        xs.push_back(x);
        vals.push_back(legendre_rate(scgf, x));
    }
    for (std::size_t i = 1; i + 1 < vals.size(); ++i)
        EXPECT_LE(vals[i], 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-9);
}

// ---------------------------------------------------------------------------
// Estimator agreement on i.i.d. finite-support data
// ---------------------------------------------------------------------------

TEST(EstimatorAgreement, BlockAndMarkovConvergeTogether) {
    // i.i.d. +/-1 with P(+1) = 1/4, realized as a finite chain with equal
    // rows. Closed form: both estimate theta* = log 3.
    FiniteMarkovSpec iid;
    iid.pi = {{0.75, 0.25}, {0.75, 0.25}};
    iid.f = {-1.0, 1.0};
    iid.n = 100000;
    std::vector<double> gaps, block_err;
    for (std::uint64_t seed = 0; seed < 11; ++seed) {
        iid.seed = 4000 + seed;
        const auto trace = sample_finite_markov(iid);
        const auto blocked = block_sums(std::span<const double>(trace.values), 1);
        const auto via_block = block_exponent(blocked);
        const auto mle = markov_mle(trace, {-1.0, 1.0});
        const auto via_markov = markov_exponent(mle, {-1.0, 1.0});
        ASSERT_EQ(via_block.status, ExponentStatus::root);
        ASSERT_EQ(via_markov.status, ExponentStatus::root);
        gaps.push_back(std::abs(via_block.value - via_markov.value));
        block_err.push_back(std::abs(via_block.value - std::log(3.0)));
    }
    EXPECT_LT(median_of(gaps), 0.01);
    EXPECT_LT(median_of(block_err), 0.05);
}
