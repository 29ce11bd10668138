#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "loynes/csv.hpp"
#include "loynes/errors.hpp"
#include "loynes/matrix.hpp"
#include "loynes/rng.hpp"
#include "loynes/trace.hpp"

namespace loynes {

// Two-state Markov increments on {-1, +1}: alpha is the -1 -> +1 transition
// probability, beta the +1 -> -1 one. 0 < alpha < beta < 1 keeps the drift
// negative.
struct TwoStateSpec {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && alpha < beta && beta < 1.0))
            throw parameter_error("two-state spec: requires 0 < alpha < beta < 1");
        if (n < 1) throw parameter_error("two-state spec: sample count must be >= 1");
    }
};

// General finite chain emitting f(state). All f(i) must be nonzero and pi
// must be row-stochastic and irreducible. When init is unset, the first
// (unemitted) state is drawn from the stationary law.
struct FiniteMarkovSpec {
    Mat pi;
    std::vector<double> f;
    std::optional<std::size_t> init;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    void validate() const {
        require_stochastic(pi, "finite-markov spec");
        if (!strongly_connected(pi))
            throw parameter_error("finite-markov spec: transition matrix must be irreducible");
        if (f.size() != pi.size())
            throw parameter_error("finite-markov spec: value map must have one entry per state");
        for (double v : f)
            if (v == 0.0 || !std::isfinite(v))
                throw parameter_error("finite-markov spec: state values must be finite and nonzero");
        if (init && *init >= pi.size())
            throw parameter_error("finite-markov spec: initial state index out of range");
        if (n < 1) throw parameter_error("finite-markov spec: sample count must be >= 1");
    }
};

// i.i.d. D/M/1 increments X = Exp(alpha) - 1/beta (exponential service at
// rate alpha, deterministic inter-arrivals 1/beta). alpha > beta keeps the
// drift negative; the support is [-1/beta, inf).
struct Dm1Spec {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(alpha > 0.0 && beta > 0.0 && alpha > beta))
            throw parameter_error("dm1 spec: requires alpha > beta > 0 (negative drift)");
        if (n < 1) throw parameter_error("dm1 spec: sample count must be >= 1");
    }
};

using ProcessSpec = std::variant<TwoStateSpec, FiniteMarkovSpec, Dm1Spec>;

inline std::string describe(const TwoStateSpec &s) {
    std::ostringstream os;
    os << "two-state(alpha=" << format_real(s.alpha) << ",beta=" << format_real(s.beta)
       << ",n=" << s.n << ",seed=" << s.seed << ")";
    return os.str();
}

inline std::string describe(const FiniteMarkovSpec &s) {
    std::ostringstream os;
    os << "finite-markov(M=" << s.pi.size() << ",n=" << s.n << ",seed=" << s.seed;
    if (s.init) os << ",init=" << *s.init;
    os << ")";
    return os.str();
}

inline std::string describe(const Dm1Spec &s) {
    std::ostringstream os;
    os << "dm1(alpha=" << format_real(s.alpha) << ",beta=" << format_real(s.beta)
       << ",n=" << s.n << ",seed=" << s.seed << ")";
    return os.str();
}

inline std::string describe(const ProcessSpec &spec) {
    return std::visit([](const auto &s) { return describe(s); }, spec);
}

// Family and parameters only, without run length or seed; experiment outputs
// echo those separately.
inline std::string describe_family(const ProcessSpec &spec) {
    std::ostringstream os;
    if (const auto *ts = std::get_if<TwoStateSpec>(&spec)) {
        os << "two-state(alpha=" << format_real(ts->alpha) << ",beta=" << format_real(ts->beta)
           << ")";
    } else if (const auto *fm = std::get_if<FiniteMarkovSpec>(&spec)) {
        os << "finite-markov(M=" << fm->pi.size() << ")";
    } else {
        const auto &dm = std::get<Dm1Spec>(spec);
        os << "dm1(alpha=" << format_real(dm.alpha) << ",beta=" << format_real(dm.beta) << ")";
    }
    return os.str();
}

// Emits f(X(1)), ..., f(X(n)). X(0) is the init state when given, otherwise
// a stationary draw; X(0) itself is not emitted, so every emitted value is
// the result of a transition.
inline Trace sample_finite_markov(const FiniteMarkovSpec &spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::size_t state;
    if (spec.init) {
        state = *spec.init;
    } else {
        const auto phi = stationary_distribution(spec.pi);
        state = rng.categorical(phi);
    }
    Trace trace;
    trace.kind = TraceKind::increments;
    trace.origin = describe(spec);
    trace.seed = spec.seed;
    trace.values.reserve(spec.n);
    for (std::size_t k = 0; k < spec.n; ++k) {
        state = rng.categorical(spec.pi[state]);
        trace.values.push_back(spec.f[state]);
    }
    return trace;
}

// The two-state sampler is the finite sampler on the canonical embedding;
// both consume the RNG stream identically, so equal seeds give equal traces.
inline Trace sample_two_state(const TwoStateSpec &spec) {
    spec.validate();
    FiniteMarkovSpec chain;
    chain.pi = {{1.0 - spec.alpha, spec.alpha}, {spec.beta, 1.0 - spec.beta}};
    chain.f = {-1.0, +1.0};
    chain.n = spec.n;
    chain.seed = spec.seed;
    Trace trace = sample_finite_markov(chain);
    trace.origin = describe(spec);
    return trace;
}

// Inverse-CDF sampling keeps the stream reproducible: X = -log(U)/alpha -
// 1/beta with U on (0, 1].
inline Trace sample_dm1(const Dm1Spec &spec) {
    spec.validate();
    Rng rng(spec.seed);
    Trace trace;
    trace.kind = TraceKind::increments;
    trace.origin = describe(spec);
    trace.seed = spec.seed;
    trace.values.reserve(spec.n);
    const double shift = 1.0 / spec.beta;
    for (std::size_t k = 0; k < spec.n; ++k)
        trace.values.push_back(rng.exponential() / spec.alpha - shift);
    return trace;
}

inline Trace sample(const ProcessSpec &spec) {
    return std::visit(
        [](const auto &s) -> Trace {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, TwoStateSpec>) return sample_two_state(s);
            if constexpr (std::is_same_v<T, FiniteMarkovSpec>) return sample_finite_markov(s);
            if constexpr (std::is_same_v<T, Dm1Spec>) return sample_dm1(s);
        },
        spec);
}

// Copy of a spec with the sample count and seed overridden; the experiment
// runners use this to derive per-replica specs from one base description.
inline ProcessSpec with_run_params(ProcessSpec spec, std::size_t n, std::uint64_t seed) {
    std::visit(
        [&](auto &s) {
            s.n = n;
            s.seed = seed;
        },
        spec);
    return spec;
}

} // namespace loynes
