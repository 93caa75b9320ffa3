#include "lmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lmc/errors.hpp"
#include "lmc/stats.hpp"
#include "lmc/structure.hpp"

namespace lmc {

namespace {

// ceil with a guard against float noise on near-integer ratios
long long ceil_guarded(double x) {
    double r = std::nearbyint(x);
    if (std::fabs(x - r) < 1e-9) return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(x));
}

long long next_integer_above(double x) {
    double r = std::nearbyint(x);
    if (std::fabs(x - r) < 1e-9) return static_cast<long long>(r) + 1;
    return static_cast<long long>(std::floor(x)) + 1;
}

}  // namespace

HorizonBound compute_horizon(int n, double p_min, double epsilon, HorizonMode mode) {
    if (n < 1) throw DomainError("compute_horizon: n must be at least 1");
    if (!(p_min > 0.0 && p_min < 1.0)) throw DomainError("compute_horizon: p_min must be in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("compute_horizon: epsilon must be in (0,1)");

    HorizonBound bound;
    bound.epsilon = epsilon;
    bound.mode = mode;
    bound.n = n;
    bound.p_min = p_min;

    if (mode == HorizonMode::thm7) {
        const double nsq = static_cast<double>(n) * n;
        const double log_decay = std::log1p(-std::pow(p_min, nsq));
        if (!(log_decay < 0.0)) throw DomainError("compute_horizon: p_min^(n^2) underflows");
        bound.k = static_cast<long long>(nsq) * ceil_guarded(std::log(epsilon) / log_decay) + 2LL * n;
    } else {
        if (n < 2) throw DomainError("compute_horizon: appendix_b mode requires n >= 2");
        const double big_n = static_cast<double>(n) * n - 1.0;
        const double log_decay = std::log1p(-std::pow(p_min, big_n));
        if (!(log_decay < 0.0)) throw DomainError("compute_horizon: p_min^(n^2-1) underflows");
        bound.k = next_integer_above(big_n * std::log(epsilon) / log_decay);
    }
    return bound;
}

namespace {

struct SweepResult {
    std::vector<double> per_length;  // D^i for i = 1..depth
    Word argmax_final;               // maximizer at the final depth
    Word argmax_overall;             // maximizer across all depths
    long long argmax_overall_length = 0;
};

// Shared-prefix depth-first sweep over the union alphabet, iterative so the
// horizon depth is bounded by memory, not the call stack.  Each expanded
// node is a prefix with positive support in at least one chain; the
// contrast is recorded at every depth on the way down, so a single sweep
// serves every length i <= depth.  `leaf_filter` (optional) restricts which
// full-depth words may score.
SweepResult pair_sweep(const MarkovChain& c1, const MarkovChain& c2, long long depth,
                       std::uint64_t guard,
                       const std::function<bool(const std::vector<int>&)>& leaf_filter = nullptr) {
    auto symbols = union_alphabet(c1, c2);
    const size_t nsym = symbols.size();
    std::vector<int> sym1(nsym), sym2(nsym);
    for (size_t a = 0; a < nsym; ++a) {
        sym1[a] = c1.symbol_index(symbols[a]);
        sym2[a] = c2.symbol_index(symbols[a]);
    }
    const int n1 = c1.n(), n2 = c2.n();

    // per-depth forward mass, slot d holds the vector after d symbols
    std::vector<double> buf1(static_cast<size_t>(depth + 1) * n1, 0.0);
    std::vector<double> buf2(static_cast<size_t>(depth + 1) * n2, 0.0);
    auto alpha1 = [&](long long d) { return buf1.data() + static_cast<size_t>(d) * n1; };
    auto alpha2 = [&](long long d) { return buf2.data() + static_cast<size_t>(d) * n2; };

    auto advance = [](const MarkovChain& c, int sym, const double* in, double* out,
                      bool from_initial) {
        double mass = 0.0;
        const int n = c.n();
        for (int t = 0; t < n; ++t) {
            if (sym < 0 || c.label_of(t) != sym) {
                out[t] = 0.0;
                continue;
            }
            double v;
            if (from_initial) {
                v = c.initial[t];
            } else {
                v = 0.0;
                for (int s = 0; s < n; ++s) v += in[s] * c.p(s, t);
            }
            out[t] = v;
            mass += v;
        }
        return mass;
    };

    SweepResult result;
    result.per_length.assign(static_cast<size_t>(depth), 0.0);
    double best_final = -1.0, best_overall = -1.0;

    std::vector<int> word;
    word.reserve(static_cast<size_t>(depth));
    std::vector<size_t> cursor(static_cast<size_t>(depth) + 1, 0);

    auto to_word = [&](const std::vector<int>& ids) {
        Word w;
        w.reserve(ids.size());
        for (int id : ids) w.push_back(symbols[static_cast<size_t>(id)]);
        return w;
    };

    std::uint64_t nodes = 0;
    long long d = 0;
    while (true) {
        if (d < depth && cursor[static_cast<size_t>(d)] < nsym) {
            const size_t a = cursor[static_cast<size_t>(d)]++;
            const double m1 = advance(c1, sym1[a], alpha1(d), alpha1(d + 1), d == 0);
            const double m2 = advance(c2, sym2[a], alpha2(d), alpha2(d + 1), d == 0);
            if (!(m1 > 0.0) && !(m2 > 0.0)) continue;
            if (++nodes > guard)
                throw GuardError("enumeration guard exceeded (" + std::to_string(guard) +
                                 " positive-support prefixes) during a depth-" +
                                 std::to_string(depth) + " sweep");
            ++d;
            word.push_back(static_cast<int>(a));
            cursor[static_cast<size_t>(d)] = 0;

            const double contrast = std::fabs(m1 - m2);
            const bool scores = d < depth || !leaf_filter || leaf_filter(word);
            if (scores) {
                auto& slot = result.per_length[static_cast<size_t>(d) - 1];
                slot = std::max(slot, contrast);
                if (d == depth && contrast > best_final) {
                    best_final = contrast;
                    result.argmax_final = to_word(word);
                }
                if (contrast > best_overall) {
                    best_overall = contrast;
                    result.argmax_overall = to_word(word);
                    result.argmax_overall_length = d;
                }
            }
        } else {
            if (d == 0) break;
            word.pop_back();
            --d;
        }
    }
    return result;
}

int pair_state_bound(const MarkovChain& c1, const MarkovChain& c2) {
    return std::max(c1.n(), c2.n());
}

}  // namespace

std::vector<DistanceValue> distance_sweep(const MarkovChain& c1, const MarkovChain& c2,
                                          long long k_max, std::uint64_t guard) {
    if (k_max < 1) throw DomainError("distance_sweep: k_max must be at least 1");
    auto sweep = pair_sweep(c1, c2, k_max, guard);
    std::vector<DistanceValue> out(static_cast<size_t>(k_max));
    for (long long i = 0; i < k_max; ++i) out[static_cast<size_t>(i)].value = sweep.per_length[static_cast<size_t>(i)];
    if (!out.empty()) out.back().argmax_word = sweep.argmax_final;
    if (sweep.argmax_overall_length >= 1)
        out[static_cast<size_t>(sweep.argmax_overall_length) - 1].argmax_word = sweep.argmax_overall;
    return out;
}

DistanceValue fixed_k_distance(const MarkovChain& c1, const MarkovChain& c2, long long k,
                               std::uint64_t guard) {
    if (k < 1) throw DomainError("fixed_k_distance: k must be at least 1");
    auto sweep = pair_sweep(c1, c2, k, guard);
    DistanceValue out;
    out.value = sweep.per_length.back();
    out.argmax_word = sweep.argmax_final;
    out.error_bound = 0.0;
    return out;
}

DistanceValue finite_trace_distance(const MarkovChain& c1, const MarkovChain& c2, double epsilon,
                                    std::uint64_t guard) {
    const int n = pair_state_bound(c1, c2);
    const double p_min = shared_pmin(c1, c2);
    const auto horizon = compute_horizon(n, p_min, epsilon, HorizonMode::thm7);

    auto sweep = pair_sweep(c1, c2, horizon.k, guard);
    DistanceValue out;
    for (double v : sweep.per_length) out.value = std::max(out.value, v);
    out.argmax_word = sweep.argmax_overall;
    out.error_bound = epsilon;
    return out;
}

DistanceValue infinite_trace_distance_approx(const MarkovChain& c1, const MarkovChain& c2,
                                             double epsilon, std::uint64_t guard) {
    const int n = pair_state_bound(c1, c2);
    const double p_min = shared_pmin(c1, c2);
    const auto horizon = compute_horizon(n, p_min, epsilon, HorizonMode::thm7);
    const long long big_k = horizon.k + n;

    const auto symbols = union_alphabet(c1, c2);
    auto sweep = pair_sweep(c1, c2, big_k, guard, [&](const std::vector<int>& ids) {
        Word w;
        w.reserve(ids.size());
        for (int id : ids) w.push_back(symbols[static_cast<size_t>(id)]);
        return is_ultimately_periodic(w, big_k - n, n).periodic;
    });

    DistanceValue out;
    out.value = sweep.per_length.back();
    out.argmax_word = sweep.argmax_final;
    const double nsq = static_cast<double>(n) * n;
    const double exponent = std::floor(static_cast<double>(big_k - 2LL * n) / nsq);
    out.error_bound = 2.0 * std::pow(1.0 - std::pow(p_min, nsq), exponent);
    return out;
}

TvBoundPoint tv_lower_bound_demo(double tau, long long n_steps, bool exact) {
    if (!(tau > 0.0 && tau < 0.5)) throw DomainError("tv_lower_bound_demo: tau must be in (0, 0.5)");
    if (n_steps < 1) throw DomainError("tv_lower_bound_demo: n_steps must be at least 1");

    TvBoundPoint out;
    out.c_n = static_cast<long long>(std::floor((0.5 + tau / 2.0) * static_cast<double>(n_steps) + 1e-9));
    if (exact) {
        out.p1 = binomial_cdf(n_steps, 0.5, out.c_n);
        out.p2 = binomial_cdf(n_steps, 0.5 + tau, out.c_n);
    } else {
        const double sqrt_n = std::sqrt(static_cast<double>(n_steps));
        out.p1 = normal_cdf(tau * sqrt_n);
        out.p2 = normal_cdf(-0.5 * tau * sqrt_n / std::sqrt(0.25 - tau * tau));
    }
    out.gap = out.p1 - out.p2;
    return out;
}

bool decide_trace_equivalence(const MarkovChain& c1, const MarkovChain& c2, std::uint64_t guard) {
    const long long length = c1.n() + c2.n() - 1;
    auto sweep = pair_sweep(c1, c2, length, guard);
    for (double v : sweep.per_length)
        if (v > 1e-9) return false;
    return true;
}

}  // namespace lmc
