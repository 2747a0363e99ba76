#pragma once

// Design-space exploration: resilience sweeps, the three-phase design
// generator, exhaustive and heuristic baselines, and Pareto extraction.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "apxsig/energy.hpp"
#include "apxsig/errors.hpp"
#include "apxsig/library.hpp"
#include "apxsig/pantompkins.hpp"
#include "apxsig/quality.hpp"
#include "apxsig/signal_io.hpp"
#include "apxsig/stage.hpp"

namespace apxsig {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results land by index,
/// so the outcome never depends on scheduling. The first exception is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned jobs, Fn&& fn) {
    std::vector<std::optional<T>> slots(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(jobs, 1u), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) slots[i].emplace(fn(i));
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w)
                pool.emplace_back([&] {
                    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                        try {
                            slots[i].emplace(fn(i));
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                            next.store(n);
                        }
                    }
                });
        }
        if (failure) std::rethrow_exception(failure);
    }
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct Constraint {
    MetricId metric = MetricId::PSNR;
    double threshold = 15.0;
};

/// One evaluated design. Scores compare against the all-accurate pipeline on the same input.
struct DesignPoint {
    Design design;
    double psnr = 0.0;     // post-HPF signal, dB
    double ssim = 0.0;     // post-HPF signal
    double peak_acc = 0.0; // percent
    std::size_t false_positives = 0;
    EnergyReport energy;
    std::string phase;
    std::size_t ordinal = 0; // 1-based position in its exploration log
    double wall_s = 0.0;
};

inline double metric_value(const DesignPoint& p, MetricId m) {
    switch (m) {
    case MetricId::PSNR: return p.psnr;
    case MetricId::SSIM1D: return p.ssim;
    case MetricId::PEAK_ACC: return p.peak_acc;
    }
    return 0.0;
}

inline bool satisfies(const DesignPoint& p, const Constraint& c) { return metric_value(p, c.metric) >= c.threshold; }

/// Evaluated designs in evaluation order.
struct ExplorationLog {
    std::vector<DesignPoint> points;

    std::size_t size() const noexcept { return points.size(); }

    const DesignPoint& record(DesignPoint p, std::string phase) {
        p.phase = std::move(phase);
        p.ordinal = points.size() + 1;
        points.push_back(std::move(p));
        return points.back();
    }
};

/// Scores designs against the accurate pipeline on a fixed input. Thread-safe;
/// band-pass outputs are cached per (LPF, HPF) configuration.
class Evaluator {
public:
    Evaluator(Signal input, ModuleLibrary lib, std::optional<std::vector<std::size_t>> truth = std::nullopt,
              PeakParams params = {}, std::size_t tol_samples = 10)
        : input_(std::move(input)), lib_(std::move(lib)), params_(params), tol_(tol_samples) {
        lib_.validate();
        reference_ = run_pipeline(input_, Design{}, lib_, params_);
        truth_ = truth ? std::move(*truth) : reference_.detected_peaks;
    }

    const Signal& input() const noexcept { return input_; }
    const ModuleLibrary& library() const noexcept { return lib_; }
    const PipelineOutput& reference() const noexcept { return reference_; }
    const std::vector<std::size_t>& truth() const noexcept { return truth_; }
    std::size_t tolerance() const noexcept { return tol_; }

    PipelineOutput pipeline(const Design& d) const {
        d.validate(lib_);
        const auto band = band_pass(d);
        return run_back_end(band->first, band->second, d, lib_, params_);
    }

    DesignPoint evaluate(const Design& d) const {
        const auto t0 = std::chrono::steady_clock::now();
        const auto out = pipeline(d);
        DesignPoint p;
        p.design = d;
        p.psnr = psnr(reference_.hpf_out, out.hpf_out);
        p.ssim = ssim1d(reference_.hpf_out, out.hpf_out);
        const auto m = peak_accuracy(truth_, out.detected_peaks, tol_);
        p.peak_acc = m.accuracy;
        p.false_positives = m.false_positives;
        p.energy = design_cost(d, lib_);
        p.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return p;
    }

private:
    using Band = std::pair<Signal, Signal>;

    std::shared_ptr<const Band> band_pass(const Design& d) const {
        const auto& l = d[StageId::LPF];
        const auto& h = d[StageId::HPF];
        const std::string key = std::to_string(l.k_approx) + ':' + l.adder_spec + ':' + l.mult_spec + '|' +
                                std::to_string(h.k_approx) + ':' + h.adder_spec + ':' + h.mult_spec;
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        auto lpf = run_lpf(input_, l, lib_);
        auto hpf = run_hpf(lpf, h, lib_);
        auto band = std::make_shared<const Band>(std::move(lpf), std::move(hpf));
        std::lock_guard lock(mutex_);
        return cache_.emplace(key, std::move(band)).first->second;
    }

    Signal input_;
    ModuleLibrary lib_;
    PeakParams params_;
    std::size_t tol_;
    PipelineOutput reference_;
    std::vector<std::size_t> truth_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::shared_ptr<const Band>> cache_;
};

// ---------------------------------------------------------------------------
// Resilience sweep

struct SweepRow {
    unsigned k = 0;
    double psnr = 0.0; // swept stage's own output vs its accurate output
    double ssim = 0.0;
    double peak_acc = 0.0;
    double energy_reduction = 1.0; // of the swept stage alone
};

inline const Signal& stage_output(const PipelineOutput& out, StageId s) {
    switch (s) {
    case StageId::LPF: return out.lpf_out;
    case StageId::HPF: return out.hpf_out;
    case StageId::DIFF: return out.diff_out;
    case StageId::SQR: return out.sqr_out;
    case StageId::MWI: return out.mwi_out;
    }
    return out.mwi_out;
}

/// Approximates one stage at each k in `lsb_list` (in the given order) with every other stage exact.
inline std::vector<SweepRow> resilience_sweep(StageId stage, std::span<const unsigned> lsb_list,
                                              const std::string& adder, const std::string& mult,
                                              const Evaluator& ev, unsigned jobs = 1) {
    std::vector<StageConfig> configs;
    for (unsigned k : lsb_list) {
        StageConfig c{stage, k, adder, mult};
        c.validate(ev.library());
        configs.push_back(c);
    }
    return parallel_map<SweepRow>(configs.size(), jobs, [&](std::size_t i) {
        Design d;
        d[stage] = configs[i];
        const auto out = ev.pipeline(d);
        const auto& ref = stage_output(ev.reference(), stage);
        const auto& got = stage_output(out, stage);
        SweepRow r;
        r.k = configs[i].k_approx;
        r.psnr = psnr(ref, got);
        r.ssim = ssim1d(ref, got);
        r.peak_acc = peak_accuracy(ev.truth(), out.detected_peaks, ev.tolerance()).accuracy;
        r.energy_reduction = stage_cost(configs[i], ev.library()).reduction;
        return r;
    });
}

// ---------------------------------------------------------------------------
// Search spaces

/// Active stages, their candidate k values and shared module candidates.
/// Inactive stages keep their configuration from `base`.
struct SearchSpace {
    std::vector<StageId> stages;
    std::array<std::vector<unsigned>, 5> lsb{};
    std::vector<std::string> adders{"ApproxAdd5"};
    std::vector<std::string> mults{"AppMultV1"};
    Design base;

    std::vector<unsigned>& lsb_of(StageId s) { return lsb[static_cast<std::size_t>(s)]; }
    const std::vector<unsigned>& lsb_of(StageId s) const { return lsb[static_cast<std::size_t>(s)]; }

    void validate(const ModuleLibrary& lib) const {
        if (stages.empty()) throw ConfigError("search space: no stages");
        if (adders.empty() || mults.empty()) throw ConfigError("search space: empty module list");
        for (const auto& a : adders) lib.adder(a);
        for (const auto& m : mults) lib.mult(m);
        std::array<bool, 5> seen{};
        for (auto s : stages) {
            if (std::exchange(seen[static_cast<std::size_t>(s)], true))
                throw ConfigError("search space: stage " + to_string(s) + " listed twice");
            if (lsb_of(s).empty()) throw ConfigError("search space: stage " + to_string(s) + " has no LSB levels");
            for (unsigned k : lsb_of(s)) StageConfig{s, k, adders.front(), mults.front()}.validate();
        }
        base.validate(lib);
    }
};

/// Even k from 0 to max_k, ascending.
inline std::vector<unsigned> even_levels(unsigned max_k) {
    std::vector<unsigned> v;
    for (unsigned k = 0; k <= max_k; k += 2) v.push_back(k);
    return v;
}

/// LPF and HPF at every even k with ApproxAdd5 + AppMultV1 (9 x 9 points).
inline SearchSpace preprocessing_space() {
    SearchSpace s;
    s.stages = {StageId::LPF, StageId::HPF};
    for (auto st : s.stages) s.lsb_of(st) = even_levels(traits(st).max_k);
    return s;
}

/// DIFF, SQR and MWI at every even k (3 x 5 x 9 points).
inline SearchSpace signal_processing_space(const Design& base = {}) {
    SearchSpace s;
    s.stages = {StageId::DIFF, StageId::SQR, StageId::MWI};
    for (auto st : s.stages) s.lsb_of(st) = even_levels(traits(st).max_k);
    s.base = base;
    return s;
}

namespace detail {

// Cartesian product of per-stage options, first stage outermost.
inline std::vector<Design> enumerate(const SearchSpace& space,
                                     const std::function<std::vector<StageConfig>(StageId)>& options) {
    std::vector<Design> out{space.base};
    for (auto s : space.stages) {
        const auto opts = options(s);
        std::vector<Design> next;
        next.reserve(out.size() * opts.size());
        for (const auto& d : out)
            for (const auto& o : opts) {
                next.push_back(d);
                next.back()[s] = o;
            }
        out = std::move(next);
    }
    return out;
}

inline std::vector<DesignPoint> evaluate_all(const std::vector<Design>& designs, const Evaluator& ev,
                                             unsigned jobs, const std::string& phase, ExplorationLog& log) {
    auto points = parallel_map<DesignPoint>(designs.size(), jobs, [&](std::size_t i) { return ev.evaluate(designs[i]); });
    for (auto& p : points) p = log.record(std::move(p), phase);
    return points;
}

} // namespace detail

inline std::size_t exhaustive_size(const SearchSpace& space) {
    std::size_t n = 1;
    for (auto s : space.stages) n *= space.lsb_of(s).size() * space.adders.size() * space.mults.size();
    return n;
}

inline std::size_t heuristic_size(const SearchSpace& space) {
    std::size_t per_pair = 1;
    for (auto s : space.stages)
        per_pair *= static_cast<std::size_t>(
            std::count_if(space.lsb_of(s).begin(), space.lsb_of(s).end(), [](unsigned k) { return k % 2 == 0; }));
    return per_pair * space.adders.size() * space.mults.size();
}

/// Every (k, adder, mult) combination for every active stage.
inline ExplorationLog exhaustive_search(const SearchSpace& space, const Evaluator& ev, unsigned jobs = 1) {
    space.validate(ev.library());
    const auto designs = detail::enumerate(space, [&](StageId s) {
        std::vector<StageConfig> v;
        for (unsigned k : space.lsb_of(s))
            for (const auto& a : space.adders)
                for (const auto& m : space.mults) v.push_back({s, k, a, m});
        return v;
    });
    ExplorationLog log;
    detail::evaluate_all(designs, ev, jobs, "exhaustive", log);
    return log;
}

/// One global (adder, mult) pair per run and even k only.
inline ExplorationLog heuristic_search(const SearchSpace& space, const Evaluator& ev, unsigned jobs = 1) {
    space.validate(ev.library());
    std::vector<Design> designs;
    for (const auto& a : space.adders)
        for (const auto& m : space.mults) {
            auto part = detail::enumerate(space, [&](StageId s) {
                std::vector<StageConfig> v;
                for (unsigned k : space.lsb_of(s))
                    if (k % 2 == 0) v.push_back({s, k, a, m});
                return v;
            });
            designs.insert(designs.end(), part.begin(), part.end());
        }
    ExplorationLog log;
    detail::evaluate_all(designs, ev, jobs, "heuristic", log);
    return log;
}

// ---------------------------------------------------------------------------
// Three-phase design generation

struct GenerationResult {
    Design design;         // committed architecture for every stage
    DesignPoint committed; // its evaluation, taken from the log
    std::vector<StageId> order; // stage order after the energy-savings sort
    ExplorationLog log;
};

/// Largest standalone model reduction a stage can reach within the space.
inline double max_stage_savings(StageId s, const SearchSpace& space, const ModuleLibrary& lib) {
    double best = 1.0;
    for (unsigned k : space.lsb_of(s))
        for (const auto& a : space.adders)
            for (const auto& m : space.mults) best = std::max(best, stage_cost({s, k, a, m}, lib).reduction);
    return best;
}

namespace detail {

inline std::vector<std::string> by_energy(std::vector<std::string> names, const std::function<double(const std::string&)>& energy) {
    std::stable_sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
        const double ea = energy(a), eb = energy(b);
        return ea != eb ? ea < eb : a < b;
    });
    return names;
}

// Lower energy wins; ties go to fewer approximated LSBs, then module names.
inline bool better(const DesignPoint& a, const DesignPoint& b) {
    const double ea = a.energy.totals.energy, eb = b.energy.totals.energy;
    if (ea != eb) return ea < eb;
    unsigned ka = 0, kb = 0;
    for (auto s : all_stages) {
        ka += a.design[s].k_approx;
        kb += b.design[s].k_approx;
    }
    if (ka != kb) return ka < kb;
    return a.design.key() < b.design.key();
}

} // namespace detail

/// Stage-by-stage generation: aggressive-first search on the first stage,
/// conservative-first growth on each following stage, then a diagonal trade
/// of LSBs between each consecutive pair. Every committed design was evaluated
/// and met the constraint.
inline GenerationResult generate_designs(const SearchSpace& space, const Constraint& constraint, const Evaluator& ev,
                                         unsigned jobs = 1) {
    const auto& lib = ev.library();
    space.validate(lib);

    GenerationResult res;
    res.order = space.stages;
    std::vector<double> savings;
    for (auto s : res.order) savings.push_back(max_stage_savings(s, space, lib));
    {
        std::vector<std::size_t> idx(res.order.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return savings[a] < savings[b]; });
        std::vector<StageId> sorted;
        for (auto i : idx) sorted.push_back(space.stages[i]);
        res.order = std::move(sorted);
    }

    const auto adds = detail::by_energy(space.adders, [&](const std::string& n) { return lib.adder(n).cost.energy; });
    const auto mults = detail::by_energy(space.mults, [&](const std::string& n) { return lib.mult(n).cost.energy; });
    auto lsb_desc = [&](StageId s) {
        auto v = space.lsb_of(s);
        std::sort(v.begin(), v.end(), std::greater<>());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };

    auto& log = res.log;
    auto evaluate = [&](const Design& d, const char* phase) -> const DesignPoint& {
        return log.record(ev.evaluate(d), phase);
    };

    // Phase 1
    const StageId first = res.order.front();
    Design committed = space.base;
    std::vector<DesignPoint> pool1, pool2;
    {
        bool found = false;
        for (unsigned k : lsb_desc(first)) {
            for (const auto& m : mults) {
                for (const auto& a : adds) {
                    Design d = committed;
                    d[first] = {first, k, a, m};
                    const auto& p = evaluate(d, "phase1");
                    if (satisfies(p, constraint)) {
                        pool1.push_back(p);
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) break;
        }
        if (!found)
            throw InfeasibleConstraintError(to_string(first), "no configuration meets " + to_string(constraint.metric) +
                                                                  " >= " + std::to_string(constraint.threshold));
        committed = pool1.back().design;
    }
    DesignPoint committed_point = pool1.back();

    for (std::size_t i = 1; i < res.order.size(); ++i) {
        const StageId prev = res.order[i - 1];
        const StageId cur = res.order[i];

        // Phase 2
        auto levels = lsb_desc(cur);
        std::reverse(levels.begin(), levels.end());
        std::optional<StageConfig> grown;
        bool violated = false;
        for (unsigned k : levels) {
            for (auto m = mults.rbegin(); m != mults.rend() && !violated; ++m) {
                for (auto a = adds.rbegin(); a != adds.rend(); ++a) {
                    Design d = committed;
                    d[cur] = {cur, k, *a, *m};
                    const auto& p = evaluate(d, "phase2");
                    if (!satisfies(p, constraint)) {
                        violated = true;
                        break;
                    }
                    pool2.push_back(p);
                    grown = d[cur];
                }
            }
            if (violated) break;
        }

        // Phase 3
        const unsigned max_cur = traits(cur).max_k;
        unsigned k_prev = committed[prev].k_approx;
        unsigned k_cur = grown ? grown->k_approx : 0;
        while (k_prev >= 2) {
            k_prev -= 2;
            k_cur = std::min(k_cur + 2, max_cur);
            std::vector<Design> pairs;
            for (const auto& m : mults)
                for (const auto& a : adds) {
                    Design d = committed;
                    d[prev] = {prev, k_prev, a, m};
                    d[cur] = {cur, k_cur, a, m};
                    pairs.push_back(d);
                }
            auto points =
                parallel_map<DesignPoint>(pairs.size(), jobs, [&](std::size_t j) { return ev.evaluate(pairs[j]); });
            for (auto& p : points) {
                const auto& rec = log.record(std::move(p), "phase3");
                if (satisfies(rec, constraint)) {
                    pool1.push_back(rec);
                    pool2.push_back(rec);
                }
            }
        }

        // Best(Stage2) and Best(Stage1) are taken from whole evaluated designs so the
        // committed pair is one that actually met the constraint together.
        const DesignPoint* best = nullptr;
        for (const auto* pool : {&pool2, &pool1})
            for (const auto& p : *pool)
                if (!best || detail::better(p, *best)) best = &p;
        if (!best)
            throw InfeasibleConstraintError(to_string(cur), "no configuration meets " + to_string(constraint.metric) +
                                                                " >= " + std::to_string(constraint.threshold));
        committed_point = *best;
        committed = best->design;
        pool1 = std::move(pool2);
        pool2.clear();
        if (std::none_of(pool1.begin(), pool1.end(), [&](const DesignPoint& p) { return p.design == committed; }))
            pool1.push_back(committed_point);
    }

    res.design = committed;
    res.committed = committed_point;
    return res;
}

// ---------------------------------------------------------------------------
// Pareto front

/// Indices of the points not dominated in (maximize quality, minimize energy),
/// ordered by energy ascending with ties kept in input order.
inline std::vector<std::size_t> pareto_indices(std::span<const double> quality, std::span<const double> energy) {
    if (quality.size() != energy.size()) throw ArgumentError("pareto: coordinate lengths differ");
    std::vector<std::size_t> idx(quality.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (energy[a] != energy[b]) return energy[a] < energy[b];
        return quality[a] > quality[b];
    });
    // Sweep by energy; a point survives if no cheaper-or-equal point has at least its
    // quality with one coordinate strictly better.
    std::vector<std::size_t> front;
    double best_q = -std::numeric_limits<double>::infinity();
    double best_q_energy = 0.0;
    bool any = false;
    for (std::size_t pos = 0; pos < idx.size();) {
        std::size_t end = pos;
        while (end < idx.size() && energy[idx[end]] == energy[idx[pos]]) ++end;
        const double group_best = quality[idx[pos]];
        for (std::size_t j = pos; j < end; ++j) {
            const std::size_t i = idx[j];
            const bool dominated_by_cheaper = any && best_q >= quality[i] && best_q_energy < energy[i];
            const bool dominated_in_group = quality[i] < group_best;
            if (!dominated_by_cheaper && !dominated_in_group) front.push_back(i);
        }
        if (!any || group_best > best_q) {
            best_q = group_best;
            best_q_energy = energy[idx[pos]];
            any = true;
        }
        pos = end;
    }
    std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
        if (energy[a] != energy[b]) return energy[a] < energy[b];
        return a < b;
    });
    return front;
}

inline std::vector<DesignPoint> pareto_front(std::span<const DesignPoint> points, MetricId metric) {
    std::vector<double> q, e;
    for (const auto& p : points) {
        q.push_back(metric_value(p, metric));
        e.push_back(p.energy.totals.energy);
    }
    std::vector<DesignPoint> out;
    for (auto i : pareto_indices(q, e)) out.push_back(points[i]);
    return out;
}

} // namespace apxsig
