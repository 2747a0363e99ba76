#pragma once

// Analytical area/delay/power/energy accounting. Costs are summed per
// elementary instance; delay is a worst-case path sum and is only a model
// estimate. Registers, wiring and control are not modeled.

#include <algorithm>
#include <limits>

#include <json.hpp>

#include "apxsig/arith.hpp"
#include "apxsig/library.hpp"
#include "apxsig/stage.hpp"

namespace apxsig {

struct EnergyReport {
    CostRecord totals;
    CostRecord baseline;
    /// baseline.energy / totals.energy; +inf when the approximate design spends no energy.
    double reduction = 1.0;
};

inline double energy_ratio(double baseline, double totals) noexcept {
    if (totals == 0.0) return baseline == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return baseline / totals;
}

inline EnergyReport make_report(const CostRecord& totals, const CostRecord& baseline) {
    return {totals, baseline, energy_ratio(baseline.energy, totals.energy)};
}

/// Ripple-carry adder: every cell contributes its cost and sits on the carry path.
inline CostRecord unit_cost(const CompositeAdderConfig& cfg, const ModuleLibrary& lib) {
    cfg.validate();
    const auto& approx = lib.adder(cfg.cell_spec.name).cost;
    const auto& exact = lib.adder(accurate_name).cost;
    return approx * cfg.k_approx + exact * (cfg.width - cfg.k_approx);
}

namespace detail {

inline CostRecord mult_block_cost(unsigned n, unsigned offset, unsigned k, const CostRecord& elem_approx,
                                  const CostRecord& elem_exact, const CostRecord& add_approx,
                                  const CostRecord& add_exact) {
    if (n == 2) return offset < k ? elem_approx : elem_exact;
    const unsigned h = n / 2;
    CostRecord total;
    double sub_delay = 0.0;
    for (unsigned off : {offset, offset + h, offset + h, offset + n}) {
        const auto c = mult_block_cost(h, off, k, elem_approx, elem_exact, add_approx, add_exact);
        total += c;
        sub_delay = std::max(sub_delay, c.delay);
    }
    const unsigned w = 2 * n;
    const unsigned kc = std::min(k, w);
    const CostRecord adder = add_approx * kc + add_exact * (w - kc);
    total += adder * 3.0;
    // a1 and a2 run in parallel, then the final sum
    total.delay = sub_delay + 2.0 * adder.delay;
    return total;
}

} // namespace detail

/// Recursive multiplier: all elementary 2x2 instances plus every internal adder cell,
/// each costed by the module assigned under the k mapping.
inline CostRecord unit_cost(const RecursiveMultConfig& cfg, const ModuleLibrary& lib) {
    cfg.validate();
    return detail::mult_block_cost(cfg.width, 0, cfg.k_approx, lib.mult(cfg.elem_spec.name).cost,
                                   lib.mult(accurate_name).cost, lib.adder(cfg.internal_adder_spec.name).cost,
                                   lib.adder(accurate_name).cost);
}

inline CompositeAdderConfig stage_adder_config(const StageConfig& s, const ModuleLibrary& lib) {
    return {stage_adder_width, std::min(s.k_approx, stage_adder_width), lib.adder(s.adder_spec).spec};
}

inline RecursiveMultConfig stage_mult_config(const StageConfig& s, const ModuleLibrary& lib) {
    return {stage_mult_width, std::min(s.k_approx, 2 * stage_mult_width), lib.mult(s.mult_spec).spec,
            lib.adder(s.adder_spec).spec};
}

namespace detail {

// Instances of a stage form one multiply followed by a serial accumulation chain.
inline CostRecord stage_totals(const StageConfig& s, const ModuleLibrary& lib) {
    const auto t = traits(s.stage);
    CostRecord total;
    double delay = 0.0;
    if (t.adders) {
        const auto a = unit_cost(stage_adder_config(s, lib), lib);
        total += a * t.adders;
        delay += a.delay * t.adders;
    }
    if (t.mults) {
        const auto m = unit_cost(stage_mult_config(s, lib), lib);
        total += m * t.mults;
        delay += m.delay;
    }
    total.delay = delay;
    return total;
}

} // namespace detail

inline EnergyReport stage_cost(const StageConfig& stage, const ModuleLibrary& lib) {
    stage.validate(lib);
    StageConfig exact{stage.stage, 0, std::string(accurate_name), std::string(accurate_name)};
    return make_report(detail::stage_totals(stage, lib), detail::stage_totals(exact, lib));
}

/// Component-wise sum of the five stage reports.
inline EnergyReport design_cost(const Design& design, const ModuleLibrary& lib) {
    CostRecord totals, baseline;
    for (const auto& s : design.stages) {
        const auto r = stage_cost(s, lib);
        totals += r.totals;
        baseline += r.baseline;
    }
    return make_report(totals, baseline);
}

/// Non-finite reductions serialize as the string "inf".
inline nlohmann::json number_or_inf(double v) {
    if (v == std::numeric_limits<double>::infinity()) return "inf";
    if (v == -std::numeric_limits<double>::infinity()) return "-inf";
    return v;
}

inline nlohmann::json to_json(const EnergyReport& r) {
    return {{"totals", to_json(r.totals)},
            {"baseline", to_json(r.baseline)},
            {"reduction", number_or_inf(r.reduction)},
            {"delay_note", "model estimate"}};
}

} // namespace apxsig
