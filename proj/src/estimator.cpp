#include "lmc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "lmc/errors.hpp"
#include "lmc/oracle.hpp"
#include "lmc/stats.hpp"
#include "lmc/structure.hpp"

namespace lmc {

std::string to_string(CiMethod m) {
    return m == CiMethod::goodman ? "goodman" : "bonferroni-hoeffding";
}

CiMethod ci_method_from_string(const std::string& name) {
    if (name == "goodman") return CiMethod::goodman;
    if (name == "bonferroni-hoeffding") return CiMethod::bonferroni_hoeffding;
    throw DomainError("unknown ci method '" + name + "'");
}

std::string to_string(EstimateMode m) {
    switch (m) {
        case EstimateMode::fixed_k: return "fixed-k";
        case EstimateMode::unbounded: return "unbounded";
        case EstimateMode::infinite: return "infinite";
        case EstimateMode::equivalence: return "equivalence";
    }
    return "?";
}

namespace {

EstimateMode mode_from_string(const std::string& name) {
    if (name == "fixed-k") return EstimateMode::fixed_k;
    if (name == "unbounded") return EstimateMode::unbounded;
    if (name == "infinite") return EstimateMode::infinite;
    if (name == "equivalence") return EstimateMode::equivalence;
    throw DomainError("unknown estimate mode '" + name + "'");
}

// |Sigma|^k as a double; inf when it exceeds the double range.
double cell_count(size_t alphabet_size, long long k) {
    double ln_m = static_cast<double>(k) * std::log(static_cast<double>(alphabet_size));
    if (ln_m > 700.0) return std::numeric_limits<double>::infinity();
    return std::pow(static_cast<double>(alphabet_size), static_cast<double>(k));
}

double goodman_m(double alpha, double df) {
    if (!std::isfinite(df)) return std::numeric_limits<double>::infinity();
    return std::sqrt(chi_square_quantile(1.0 - alpha, df));
}

// S_j * M with the 0 * inf corner pinned to 0: cells that are constant in
// both samples have an exact half-width of zero.
double half_width(double s, double m) { return s == 0.0 ? 0.0 : s * m; }

// ln(4 m_cells / alpha) without forming m_cells; the per-cell Hoeffding
// half-width under a union bound over all cells and both chains is
// sqrt(C / (2n)) with C this value.
double bonferroni_log_term(size_t alphabet_size, long long k, double alpha) {
    return std::log(4.0) + static_cast<double>(k) * std::log(static_cast<double>(alphabet_size)) -
           std::log(alpha);
}

double bonferroni_pair_width(double log_term, std::uint64_t n1, std::uint64_t n2) {
    if (n1 == 0 || n2 == 0) return 2.0;
    return std::sqrt(log_term / (2.0 * static_cast<double>(n1))) +
           std::sqrt(log_term / (2.0 * static_cast<double>(n2)));
}

double contrast_s(double p1, double p2, double n1, double n2) {
    return std::sqrt((p1 - p1 * p1) / n1 + (p2 - p2 * p2) / n2);
}

}  // namespace

GoodmanResult goodman_intervals(const TraceCounts& counts, double alpha) {
    if (counts.total1 == 0 || counts.total2 == 0)
        throw DomainError("goodman_intervals: both samples must be non-empty");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("goodman_intervals: alpha must be in (0,1)");

    GoodmanResult out;
    out.params.alpha = alpha;
    out.params.degrees_of_freedom = cell_count(counts.alphabet_size, counts.length);
    out.params.m = goodman_m(alpha, out.params.degrees_of_freedom);

    const double n1 = static_cast<double>(counts.total1);
    const double n2 = static_cast<double>(counts.total2);
    for (const auto& [word, cell] : counts.cells) {
        ContrastEstimate c;
        c.word = word;
        c.p1 = static_cast<double>(cell.first) / n1;
        c.p2 = static_cast<double>(cell.second) / n2;
        c.delta = std::fabs(c.p1 - c.p2);
        c.s = contrast_s(c.p1, c.p2, n1, n2);
        out.contrasts.push_back(std::move(c));
    }
    // pooled cell for words never observed in either chain: p1 = p2 = 0,
    // so its half-width is exactly 0 under the S_j formula
    out.contrasts.push_back(ContrastEstimate{});
    return out;
}

namespace {

// ---------------------------------------------------------------------
// Raw trace pool for the long-horizon drivers.  Per-length counts are
// never materialized; groups of equal prefixes are read off a sorted
// order plus adjacent longest-common-prefix lengths.

struct TracePool {
    long long k = 0;
    std::vector<std::string> alphabet;  // union, first side's order first
    std::vector<std::uint8_t> remap[2];
    std::vector<std::uint8_t> data[2];
    std::uint64_t counts[2] = {0, 0};

    TracePool(const std::vector<std::string>& alpha_a, const std::vector<std::string>& alpha_b,
              long long length)
        : k(length) {
        alphabet = alpha_a;
        for (const auto& sym : alpha_b)
            if (std::find(alphabet.begin(), alphabet.end(), sym) == alphabet.end())
                alphabet.push_back(sym);
        auto build = [&](const std::vector<std::string>& side) {
            std::vector<std::uint8_t> map(side.size());
            for (size_t i = 0; i < side.size(); ++i) {
                auto it = std::find(alphabet.begin(), alphabet.end(), side[i]);
                map[i] = static_cast<std::uint8_t>(it - alphabet.begin());
            }
            return map;
        };
        remap[0] = build(alpha_a);
        remap[1] = build(alpha_b);
    }

    void append(int which, const SampleBatch& batch) {
        auto& dst = data[which];
        const auto& map = remap[which];
        size_t old = dst.size();
        dst.resize(old + batch.traces.size());
        for (size_t i = 0; i < batch.traces.size(); ++i) dst[old + i] = map[batch.traces[i]];
        counts[which] += batch.count;
    }

    const std::uint8_t* trace(int which, std::uint64_t i) const {
        return data[which].data() + i * static_cast<std::uint64_t>(k);
    }
    std::uint64_t total() const { return counts[0] + counts[1]; }
    std::uint64_t bytes() const { return data[0].size() + data[1].size(); }
};

struct SortedPool {
    std::vector<std::uint64_t> order;  // entry = trace_index * 2 + chain
    std::vector<std::uint32_t> lcp;    // shared prefix with the previous entry

    void build(const TracePool& pool) {
        const std::uint64_t n = pool.total();
        order.resize(n);
        std::uint64_t pos = 0;
        for (std::uint64_t i = 0; i < pool.counts[0]; ++i) order[pos++] = i << 1;
        for (std::uint64_t i = 0; i < pool.counts[1]; ++i) order[pos++] = (i << 1) | 1;
        const size_t k = static_cast<size_t>(pool.k);
        auto key = [&](std::uint64_t e) { return pool.trace(static_cast<int>(e & 1), e >> 1); };
        std::sort(order.begin(), order.end(), [&](std::uint64_t x, std::uint64_t y) {
            int c = std::memcmp(key(x), key(y), k);
            return c != 0 ? c < 0 : x < y;
        });
        lcp.assign(n, 0);
        for (std::uint64_t j = 1; j < n; ++j) {
            const std::uint8_t* a = key(order[j - 1]);
            const std::uint8_t* b = key(order[j]);
            std::uint32_t l = 0;
            while (l < k && a[l] == b[l]) ++l;
            lcp[j] = l;
        }
    }
};

// Walks the groups of identical length-i prefixes.  `keep` filters groups
// by their representative full trace (identity filter for most callers).
template <typename Keep>
ContrastSummary length_stats(const TracePool& pool, const SortedPool& sorted, long long i,
                             Keep&& keep) {
    ContrastSummary out;
    const double n1 = static_cast<double>(pool.counts[0]);
    const double n2 = static_cast<double>(pool.counts[1]);
    const std::uint64_t n = sorted.order.size();
    std::uint64_t j = 0;
    while (j < n) {
        std::uint64_t c1 = 0, c2 = 0;
        const std::uint64_t rep = sorted.order[j];
        do {
            if (sorted.order[j] & 1)
                ++c2;
            else
                ++c1;
            ++j;
        } while (j < n && sorted.lcp[j] >= i);
        if (!keep(rep)) continue;
        const double p1 = n1 > 0 ? static_cast<double>(c1) / n1 : 0.0;
        const double p2 = n2 > 0 ? static_cast<double>(c2) / n2 : 0.0;
        out.max_delta = std::max(out.max_delta, std::fabs(p1 - p2));
        out.max_s = std::max(out.max_s, contrast_s(p1, p2, n1, n2));
    }
    return out;
}

auto keep_all = [](std::uint64_t) { return true; };

struct PoolRunResult {
    bool stopped = false;
    std::string note;
};

// Shared batch loop for the unbounded/infinite drivers.  `rule` judges the
// accumulated pool; budget and memory caps end the loop with a note.
template <typename Rule>
PoolRunResult run_batches(Sampler& s1, Sampler& s2, TracePool& pool, const EstimatorOptions& opt,
                          long long length, Rule&& rule) {
    PoolRunResult out;
    while (true) {
        pool.append(0, s1.next_batch(length, opt.batch_size));
        pool.append(1, s2.next_batch(length, opt.batch_size));
        if (rule(pool)) {
            out.stopped = true;
            return out;
        }
        if (pool.total() + 2 * opt.batch_size > opt.sample_cap) {
            out.note = "sample cap reached before the stopping rule was met";
            return out;
        }
        if (pool.bytes() + 2 * opt.batch_size * static_cast<std::uint64_t>(length) >
            opt.memory_budget) {
            out.note = "trace memory budget reached before the stopping rule was met";
            return out;
        }
    }
}

DistanceReport skeleton(EstimateMode mode, Sampler& s1, Sampler& s2, double alpha, double delta,
                        CiMethod ci) {
    DistanceReport r;
    r.mode = mode;
    r.alpha = alpha;
    r.delta = delta;
    r.ci = ci;
    r.lineage1 = {s1.master_seed(), s1.stream_id(), s1.batches_drawn(), 0};
    r.lineage2 = {s2.master_seed(), s2.stream_id(), s2.batches_drawn(), 0};
    return r;
}

void finish_lineage(DistanceReport& r, Sampler& s1, Sampler& s2) {
    r.lineage1.batch_count = s1.batches_drawn() - r.lineage1.first_batch;
    r.lineage2.batch_count = s2.batches_drawn() - r.lineage2.first_batch;
}

}  // namespace

std::vector<ContrastSummary> pooled_length_stats(const SampleBatch& batch1,
                                                 const SampleBatch& batch2) {
    if (batch1.length != batch2.length)
        throw DomainError("pooled_length_stats: batches have different trace lengths");
    TracePool pool(batch1.alphabet, batch2.alphabet, batch1.length);
    pool.append(0, batch1);
    pool.append(1, batch2);
    SortedPool sorted;
    sorted.build(pool);
    std::vector<ContrastSummary> out(static_cast<size_t>(pool.k));
    for (long long i = 1; i <= pool.k; ++i)
        out[static_cast<size_t>(i) - 1] = length_stats(pool, sorted, i, keep_all);
    return out;
}

DistanceReport estimate_fixed_k(Sampler& s1, Sampler& s2, long long k, double alpha,
                                double epsilon_target, const EstimatorOptions& options) {
    if (k < 1) throw DomainError("estimate_fixed_k: k must be at least 1");
    if (!(epsilon_target > 0.0)) throw DomainError("estimate_fixed_k: epsilon_target must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("estimate_fixed_k: alpha must be in (0,1)");

    DistanceReport report = skeleton(EstimateMode::fixed_k, s1, s2, alpha, 2.0 * epsilon_target,
                                     options.ci);
    report.k = k;

    TraceCounts counts;
    bool stopped = false;
    while (true) {
        auto b1 = s1.next_batch(k, options.batch_size);
        auto b2 = s2.next_batch(k, options.batch_size);
        merge_into(counts, count_traces(b1, b2));

        if (options.ci == CiMethod::goodman) {
            auto gr = goodman_intervals(counts, alpha);
            double worst = 0.0;
            for (const auto& c : gr.contrasts) worst = std::max(worst, half_width(c.s, gr.params.m));
            stopped = worst <= epsilon_target;
        } else {
            double log_term = bonferroni_log_term(counts.alphabet_size, k, alpha);
            stopped = bonferroni_pair_width(log_term, counts.total1, counts.total2) <=
                      epsilon_target;
        }
        if (stopped) break;
        if (counts.total1 + counts.total2 + 2 * options.batch_size > options.sample_cap) {
            report.note = "sample cap reached before the stopping rule was met";
            break;
        }
    }

    double point = 0.0;
    const double n1 = static_cast<double>(counts.total1);
    const double n2 = static_cast<double>(counts.total2);
    for (const auto& [word, cell] : counts.cells)
        point = std::max(point, std::fabs(static_cast<double>(cell.first) / n1 -
                                          static_cast<double>(cell.second) / n2));

    report.samples1 = counts.total1;
    report.samples2 = counts.total2;
    report.point = point;
    report.lo = std::max(0.0, point - epsilon_target);
    report.hi = std::min(1.0, point + epsilon_target);
    report.conforming = stopped && report.hi - report.lo <= report.delta + 1e-12;
    finish_lineage(report, s1, s2);
    return report;
}

DistanceReport estimate_unbounded(Sampler& s1, Sampler& s2, double p_min, int n, double alpha,
                                  double delta, const EstimatorOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("estimate_unbounded: alpha must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("estimate_unbounded: delta must be in (0,1)");

    const double eps_trunc = delta / 2.0;
    const double eps_stat = delta / 4.0;
    const auto horizon = compute_horizon(n, p_min, eps_trunc, HorizonMode::thm7);

    DistanceReport report = skeleton(EstimateMode::unbounded, s1, s2, alpha, delta, options.ci);
    report.k = horizon.k;
    if (horizon.k > options.max_horizon) {
        report.note = "horizon infeasible: thm7 requires k = " + std::to_string(horizon.k) +
                      " (n = " + std::to_string(n) + ", p_min = " + std::to_string(p_min) +
                      ", epsilon = " + std::to_string(eps_trunc) + ")";
        report.hi = 1.0;
        finish_lineage(report, s1, s2);
        return report;
    }

    const long long k = horizon.k;
    const double alpha_len = alpha / static_cast<double>(k);
    TracePool pool(s1.chain().alphabet, s2.chain().alphabet, k);

    std::vector<double> m_by_length;  // goodman inflation factor per length
    if (options.ci == CiMethod::goodman) {
        m_by_length.resize(static_cast<size_t>(k) + 1, 0.0);
        for (long long i = 1; i <= k; ++i)
            m_by_length[static_cast<size_t>(i)] =
                goodman_m(alpha_len, cell_count(pool.alphabet.size(), i));
    }
    const double log_term =
        bonferroni_log_term(pool.alphabet.size(), k, alpha_len);

    SortedPool sorted;
    auto rule = [&](const TracePool& p) {
        if (options.ci == CiMethod::bonferroni_hoeffding)
            return bonferroni_pair_width(log_term, p.counts[0], p.counts[1]) <= eps_stat;
        sorted.build(p);
        for (long long i = k; i >= 1; --i) {
            auto stats = length_stats(p, sorted, i, keep_all);
            if (half_width(stats.max_s, m_by_length[static_cast<size_t>(i)]) > eps_stat)
                return false;
        }
        return true;
    };
    auto run = run_batches(s1, s2, pool, options, k, rule);

    sorted.build(pool);
    double point = 0.0;
    for (long long i = 1; i <= k; ++i)
        point = std::max(point, length_stats(pool, sorted, i, keep_all).max_delta);

    report.samples1 = pool.counts[0];
    report.samples2 = pool.counts[1];
    report.point = point;
    report.lo = std::max(0.0, point - eps_stat);
    report.hi = std::min(1.0, point + eps_stat + eps_trunc);
    report.conforming = run.stopped && report.hi - report.lo <= delta + 1e-12;
    report.note = run.note;
    finish_lineage(report, s1, s2);
    return report;
}

DistanceReport estimate_infinite(Sampler& s1, Sampler& s2, double p_min, int n, double alpha,
                                 double delta, const EstimatorOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("estimate_infinite: alpha must be in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("estimate_infinite: delta must be in (0,1)");

    const double eps_stat = delta / 4.0;
    const auto horizon = compute_horizon(n, p_min, delta / 4.0, HorizonMode::thm7);
    const double nsq = static_cast<double>(n) * n;

    DistanceReport report = skeleton(EstimateMode::infinite, s1, s2, alpha, delta, options.ci);
    if (horizon.k + n > options.max_horizon) {
        report.k = horizon.k + n;
        report.note = "horizon infeasible: thm7 requires K = " + std::to_string(horizon.k + n);
        report.hi = 1.0;
        finish_lineage(report, s1, s2);
        return report;
    }

    auto attempt = [&](long long big_k, DistanceReport& r) {
        r.k = big_k;
        TracePool pool(s1.chain().alphabet, s2.chain().alphabet, big_k);
        const double m_factor =
            options.ci == CiMethod::goodman
                ? goodman_m(alpha, cell_count(pool.alphabet.size(), big_k))
                : 0.0;
        const double log_term = bonferroni_log_term(pool.alphabet.size(), big_k, alpha);

        SortedPool sorted;
        auto keep = [&](std::uint64_t entry) {
            const std::uint8_t* t = pool.trace(static_cast<int>(entry & 1), entry >> 1);
            return has_tail_period({t, static_cast<size_t>(big_k)}, big_k - n, n);
        };
        auto rule = [&](const TracePool& p) {
            if (options.ci == CiMethod::bonferroni_hoeffding)
                return bonferroni_pair_width(log_term, p.counts[0], p.counts[1]) <= eps_stat;
            sorted.build(p);
            auto stats = length_stats(p, sorted, big_k, keep);
            return half_width(stats.max_s, m_factor) <= eps_stat;
        };
        auto run = run_batches(s1, s2, pool, options, big_k, rule);

        sorted.build(pool);
        const double point = length_stats(pool, sorted, big_k, keep).max_delta;
        const double exponent = std::floor(static_cast<double>(big_k - 2LL * n) / nsq);
        const double eps_tail = 2.0 * std::pow(1.0 - std::pow(p_min, nsq), exponent);

        r.samples1 += pool.counts[0];
        r.samples2 += pool.counts[1];
        r.point = point;
        r.lo = std::max(0.0, point - eps_stat - eps_tail);
        r.hi = std::min(1.0, point + eps_stat + eps_tail);
        r.note = run.note;
        return run.stopped;
    };

    long long big_k = horizon.k + n;
    bool stopped = attempt(big_k, report);
    if (stopped && report.hi - report.lo > delta) {
        big_k += static_cast<long long>(n) * n;
        DistanceReport retry = skeleton(EstimateMode::infinite, s1, s2, alpha, delta, options.ci);
        retry.samples1 = report.samples1;
        retry.samples2 = report.samples2;
        stopped = attempt(big_k, retry);
        retry.note = "interval exceeded delta at K = " + std::to_string(horizon.k + n) +
                     "; retried with K = " + std::to_string(big_k) +
                     (retry.note.empty() ? "" : "; " + retry.note);
        report = retry;
    }
    report.conforming = stopped && report.hi - report.lo <= delta + 1e-12;
    finish_lineage(report, s1, s2);
    return report;
}

namespace {

// Snap empirical frequencies to the 1/m grid.  Plain rounding is the
// contract; when it misses the simplex (off-grid truth or a bad sample) a
// largest-remainder apportionment restores a valid row and the row is
// flagged grid-inconsistent.
std::pair<std::vector<double>, bool> snap_to_grid(const std::vector<double>& freq, long long m) {
    const size_t n = freq.size();
    std::vector<long long> units(n);
    long long sum = 0;
    for (size_t i = 0; i < n; ++i) {
        units[i] = std::llround(freq[i] * static_cast<double>(m));
        sum += units[i];
    }
    bool consistent = sum == m;
    if (!consistent) {
        std::vector<std::pair<double, size_t>> remainder(n);
        long long base_sum = 0;
        for (size_t i = 0; i < n; ++i) {
            double scaled = freq[i] * static_cast<double>(m);
            long long base = static_cast<long long>(std::floor(scaled));
            units[i] = base;
            base_sum += base;
            remainder[i] = {scaled - static_cast<double>(base), i};
        }
        std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        long long deficit = m - base_sum;
        for (long long d = 0; d < deficit && d < static_cast<long long>(n); ++d)
            units[remainder[static_cast<size_t>(d)].second] += 1;
    }
    std::vector<double> snapped(n);
    for (size_t i = 0; i < n; ++i) snapped[i] = static_cast<double>(units[i]) / static_cast<double>(m);
    return {std::move(snapped), consistent};
}

}  // namespace

LearnedChain learn_chain_finite_precision(Sampler& sampler, double grid, double alpha,
                                          const LearnOptions& options) {
    if (!sampler.observes_states())
        throw DomainError("learn_chain_finite_precision: state-observable sampler required");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("learn_chain_finite_precision: alpha must be in (0,1)");
    const long long m = std::llround(1.0 / grid);
    if (!(grid > 0.0) || m < 1 || std::fabs(1.0 / grid - static_cast<double>(m)) > 1e-6)
        throw DomainError("learn_chain_finite_precision: grid must be 1/m for an integer m");

    const MarkovChain& truth = sampler.chain();  // state inventory and labels are observable
    const int n = truth.n();
    const double alpha_entry = alpha / static_cast<double>(n * n + n);
    // Hoeffding: half-width sqrt(ln(2/a')/2v) < g/2  <=>  v > 2 ln(2/a')/g^2
    const std::uint64_t visits_required = static_cast<std::uint64_t>(
        std::floor(2.0 * std::log(2.0 / alpha_entry) / (grid * grid))) + 1;

    std::vector<std::uint64_t> bigram(static_cast<size_t>(n) * n, 0);
    std::vector<std::uint64_t> row_visits(n, 0), first_state(n, 0);
    std::uint64_t traces = 0, steps = 0;
    bool extra_round = false, partial = false;

    while (true) {
        auto batch = sampler.next_batch(options.trace_length, options.batch_traces);
        for (std::uint64_t t = 0; t < batch.count; ++t) {
            auto path = batch.state_path(t);
            first_state[path[0]] += 1;
            for (size_t j = 0; j + 1 < path.size(); ++j) {
                bigram[static_cast<size_t>(path[j]) * n + path[j + 1]] += 1;
                row_visits[path[j]] += 1;
            }
        }
        traces += batch.count;
        steps += batch.count * static_cast<std::uint64_t>(options.trace_length);

        bool all_seen = true, visited_done = true;
        for (int s = 0; s < n; ++s) {
            if (row_visits[s] == 0)
                all_seen = false;
            else if (row_visits[s] < visits_required)
                visited_done = false;
        }
        bool init_done = traces >= visits_required;
        if (init_done && visited_done && all_seen) break;
        if (init_done && visited_done && !all_seen) {
            if (extra_round) {  // unreached states get exactly one grace round
                partial = true;
                break;
            }
            extra_round = true;
        }
        if (steps >= options.step_cap) {
            partial = true;
            break;
        }
    }

    LearnedChain out;
    std::vector<double> transitions(static_cast<size_t>(n) * n, 0.0);
    bool consistent = true;
    for (int s = 0; s < n; ++s) {
        if (row_visits[s] == 0) {
            out.unresolved.push_back(truth.states[s]);
            transitions[static_cast<size_t>(s) * n + s] = 1.0;  // placeholder self-loop
            continue;
        }
        std::vector<double> freq(n);
        for (int t = 0; t < n; ++t)
            freq[t] = static_cast<double>(bigram[static_cast<size_t>(s) * n + t]) /
                      static_cast<double>(row_visits[s]);
        auto [row, ok] = snap_to_grid(freq, m);
        consistent = consistent && ok;
        for (int t = 0; t < n; ++t) transitions[static_cast<size_t>(s) * n + t] = row[t];
    }
    std::vector<double> init_freq(n);
    for (int s = 0; s < n; ++s)
        init_freq[s] = static_cast<double>(first_state[s]) / static_cast<double>(traces);
    auto [initial, init_ok] = snap_to_grid(init_freq, m);
    consistent = consistent && init_ok;

    std::vector<std::string> labels(n);
    for (int s = 0; s < n; ++s) labels[s] = truth.label_name(s);
    out.chain = make_chain(truth.states, std::move(labels), std::move(transitions),
                           std::move(initial));
    out.grid_consistent = consistent;
    out.partial = partial || !out.unresolved.empty();
    out.confidence = out.partial ? 0.0 : 1.0 - alpha;
    out.traces_used = traces;
    return out;
}

EquivalenceDecision decide_equivalence_black_box(Sampler& s1, Sampler& s2, double grid,
                                                 double alpha, const LearnOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("decide_equivalence_black_box: alpha must be in (0,1)");

    EquivalenceDecision out;
    DistanceReport report = skeleton(EstimateMode::equivalence, s1, s2, alpha, 0.0,
                                     CiMethod::goodman);
    out.learned1 = learn_chain_finite_precision(s1, grid, alpha / 2.0, options);
    out.learned2 = learn_chain_finite_precision(s2, grid, alpha / 2.0, options);
    if (out.learned1.partial || out.learned2.partial) {
        std::string who = out.learned1.partial ? "first" : "second";
        throw Error("decide_equivalence_black_box: learning the " + who +
                    " chain failed (unvisited states or budget)");
    }

    out.equivalent = decide_trace_equivalence(out.learned1.chain, out.learned2.chain);
    out.confidence = 1.0 - alpha;

    const long long length = out.learned1.chain.n() + out.learned2.chain.n() - 1;
    double point = 0.0;
    for (const auto& d : distance_sweep(out.learned1.chain, out.learned2.chain, length))
        point = std::max(point, d.value);

    report.k = length;
    report.point = point;
    report.lo = point;  // exact white-box value on the learned models
    report.hi = point;
    report.samples1 = out.learned1.traces_used;
    report.samples2 = out.learned2.traces_used;
    report.conforming = true;
    report.state_observation_used = true;
    report.note = "decided on learned chains, grid " + std::to_string(grid) +
                  (out.learned1.grid_consistent && out.learned2.grid_consistent
                       ? ""
                       : "; rounded rows left the grid (off-grid truth?)");
    finish_lineage(report, s1, s2);
    out.report = report;
    return out;
}

std::string report_to_json(const DistanceReport& report) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(report.mode);
    j["interval"] = {report.lo, report.hi};
    j["point"] = report.point;
    j["k"] = report.k;
    j["samples"] = {report.samples1, report.samples2};
    j["alpha"] = report.alpha;
    j["delta"] = report.delta;
    j["ci_method"] = to_string(report.ci);
    auto lineage = [](const SeedLineage& l) {
        return nlohmann::ordered_json{{"master_seed", l.master_seed},
                                      {"stream_id", l.stream_id},
                                      {"first_batch", l.first_batch},
                                      {"batch_count", l.batch_count}};
    };
    j["seed_lineage"] = {lineage(report.lineage1), lineage(report.lineage2)};
    j["conforming"] = report.conforming;
    j["state_observation_used"] = report.state_observation_used;
    j["note"] = report.note;
    return j.dump(2);
}

DistanceReport report_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report is not valid JSON: ") + e.what());
    }
    DistanceReport r;
    try {
        r.mode = mode_from_string(j.at("mode").get<std::string>());
        r.lo = j.at("interval").at(0).get<double>();
        r.hi = j.at("interval").at(1).get<double>();
        r.point = j.at("point").get<double>();
        r.k = j.at("k").get<long long>();
        r.samples1 = j.at("samples").at(0).get<std::uint64_t>();
        r.samples2 = j.at("samples").at(1).get<std::uint64_t>();
        r.alpha = j.at("alpha").get<double>();
        r.delta = j.at("delta").get<double>();
        r.ci = ci_method_from_string(j.at("ci_method").get<std::string>());
        auto lineage = [](const nlohmann::json& l) {
            return SeedLineage{l.at("master_seed").get<std::uint64_t>(),
                               l.at("stream_id").get<std::uint64_t>(),
                               l.at("first_batch").get<std::uint64_t>(),
                               l.at("batch_count").get<std::uint64_t>()};
        };
        r.lineage1 = lineage(j.at("seed_lineage").at(0));
        r.lineage2 = lineage(j.at("seed_lineage").at(1));
        r.conforming = j.at("conforming").get<bool>();
        r.state_observation_used = j.at("state_observation_used").get<bool>();
        r.note = j.at("note").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report JSON is missing fields: ") + e.what());
    }
    return r;
}

}  // namespace lmc
