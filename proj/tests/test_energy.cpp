#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

using namespace apxsig;

namespace {

const ModuleLibrary& lib() {
    static const auto l = ModuleLibrary::defaults();
    return l;
}

} // namespace

TEST(UnitCost, SingleCells) {
    EXPECT_DOUBLE_EQ(unit_cost(CompositeAdderConfig{1, 0, tables::accurate_fa()}, lib()).energy, 0.409);
    EXPECT_EQ(unit_cost(CompositeAdderConfig{1, 1, tables::approx_add5()}, lib()).energy, 0.0);
}

TEST(UnitCost, Adder32) {
    const auto exact = unit_cost(CompositeAdderConfig{32, 0, tables::approx_add5()}, lib());
    EXPECT_NEAR(exact.energy, 13.088, 1e-12);
    EXPECT_NEAR(exact.delay, 32 * 0.18, 1e-12);
    EXPECT_NEAR(exact.area, 32 * 10.08, 1e-9);
    const auto approx = unit_cost(CompositeAdderConfig{32, 32, tables::approx_add5()}, lib());
    EXPECT_EQ(approx.energy, 0.0);
    EXPECT_EQ(approx.delay, 0.0);
}

TEST(UnitCost, AdderIsCellSum) {
    for (unsigned k = 0; k <= 32; ++k) {
        const auto c = unit_cost(CompositeAdderConfig{32, k, tables::approx_add2()}, lib());
        EXPECT_NEAR(c.energy, k * 0.049 + (32 - k) * 0.409, 1e-12);
        EXPECT_NEAR(c.power, k * 0.61 + (32 - k) * 2.27, 1e-9);
    }
}

TEST(UnitCost, MultiplierMatchesInstanceTally) {
    const auto& add5 = lib().adder("ApproxAdd5").cost;
    const auto& addx = lib().adder("Accurate").cost;
    const auto& v1 = lib().mult("AppMultV1").cost;
    const auto& mx = lib().mult("Accurate").cost;
    for (unsigned width : {2u, 4u, 8u, 16u})
        for (unsigned k = 0; k <= 2 * width; ++k) {
            oracle::Tally t;
            oracle::tally_mult(width, 0, k, t);
            const double want = t.elem_approx * v1.energy + t.elem_exact * mx.energy + t.cell_approx * add5.energy +
                                t.cell_exact * addx.energy;
            const auto got = unit_cost(RecursiveMultConfig{width, k, tables::app_mult_v1(), tables::approx_add5()}, lib());
            EXPECT_NEAR(got.energy, want, 1e-9) << width << "/" << k;
            EXPECT_EQ(t.elem_approx + t.elem_exact, static_cast<double>((width / 2) * (width / 2)));
        }
}

TEST(UnitCost, MultiplierInstanceCounts16) {
    oracle::Tally t;
    oracle::tally_mult(16, 0, 0, t);
    EXPECT_EQ(t.elem_exact, 64.0);
    // 3 adders of width 2n at every internal block: 16 blocks of n=4, 4 of n=8, 1 of n=16.
    EXPECT_EQ(t.cell_exact, 3.0 * (16 * 8 + 4 * 16 + 1 * 32));
}

TEST(UnitCost, MultiplierDelayIsDeepestPath) {
    // Exact 4x4: elements 0.16 ns, then two 8-bit adder levels.
    const auto c = unit_cost(RecursiveMultConfig{4, 0, tables::accurate_mult(), tables::accurate_fa()}, lib());
    EXPECT_NEAR(c.delay, 0.16 + 2 * 8 * 0.18, 1e-12);
}

TEST(UnitCost, MissingModuleIsConfigError) {
    ModuleLibrary small;
    small.add(AdderModule{tables::accurate_fa(), {1, 1, 1, 1}});
    small.add(MultModule{tables::accurate_mult(), {1, 1, 1, 1}});
    EXPECT_THROW(unit_cost(CompositeAdderConfig{8, 2, tables::approx_add5()}, small), ConfigError);
    EXPECT_THROW(stage_cost(StageConfig{StageId::LPF, 2, "ApproxAdd5", "Accurate"}, small), ConfigError);
}

TEST(StageCost, AccurateStageHasUnitReduction) {
    for (auto s : all_stages) {
        const auto r = stage_cost(StageConfig{s, 0, "Accurate", "Accurate"}, lib());
        EXPECT_EQ(r.totals, r.baseline);
        EXPECT_EQ(r.reduction, 1.0);
    }
}

TEST(StageCost, InstanceCounts) {
    EXPECT_EQ(traits(StageId::LPF).adders, 10u);
    EXPECT_EQ(traits(StageId::LPF).mults, 11u);
    EXPECT_EQ(traits(StageId::HPF).adders, 31u);
    EXPECT_EQ(traits(StageId::HPF).mults, 32u);
    const double adder = 13.088;
    const double mult = unit_cost(RecursiveMultConfig{16, 0, tables::accurate_mult(), tables::accurate_fa()}, lib()).energy;
    EXPECT_NEAR(stage_cost({StageId::HPF, 0, "Accurate", "Accurate"}, lib()).baseline.energy, 31 * adder + 32 * mult, 1e-9);
    EXPECT_NEAR(stage_cost({StageId::MWI, 0, "Accurate", "Accurate"}, lib()).baseline.energy, 31 * adder, 1e-9);
    EXPECT_NEAR(stage_cost({StageId::SQR, 0, "Accurate", "Accurate"}, lib()).baseline.energy, mult, 1e-9);
}

TEST(StageCost, LpfAtSixteenLsbsReducesAtLeastTwofold) {
    const auto r = stage_cost({StageId::LPF, 16, "ApproxAdd5", "AppMultV1"}, lib());
    EXPECT_GE(r.reduction, 2.0);
    EXPECT_LT(r.reduction, 100.0);
}

TEST(StageCost, KAboveStageMaximumRejected) {
    EXPECT_THROW(stage_cost({StageId::DIFF, 5, "ApproxAdd5", "AppMultV1"}, lib()), ConfigError);
    EXPECT_THROW(stage_cost({StageId::SQR, 9, "ApproxAdd5", "AppMultV1"}, lib()), ConfigError);
}

TEST(DesignCost, AllAccurateIsBaseline) {
    const auto r = design_cost(Design{}, lib());
    EXPECT_EQ(r.reduction, 1.0);
    EXPECT_EQ(r.totals, r.baseline);
}

TEST(DesignCost, AdditivityAndBaselineIndependence) {
    auto r = gen::rng(31);
    const auto base = design_cost(Design{}, lib()).totals;
    for (int i = 0; i < 300; ++i) {
        const auto d = gen::random_design(r, lib());
        const auto rep = design_cost(d, lib());
        double sum = 0.0;
        for (auto s : all_stages) sum += stage_cost(d[s], lib()).totals.energy;
        EXPECT_NEAR(rep.totals.energy, sum, 1e-9);
        EXPECT_NEAR(rep.baseline.energy, base.energy, 1e-9);
        EXPECT_NEAR(rep.baseline.area, base.area, 1e-6);
    }
}

TEST(DesignCost, MonotoneInK) {
    auto r = gen::rng(32);
    for (int i = 0; i < 1000; ++i) {
        const auto d = gen::random_design(r, lib());
        const auto s = all_stages[gen::below(r, 5)];
        if (d[s].k_approx == traits(s).max_k) continue;
        auto more = d;
        more[s].k_approx += 1;
        ASSERT_LE(design_cost(more, lib()).totals.energy, design_cost(d, lib()).totals.energy + 1e-12)
            << d.key();
    }
}

TEST(DesignCost, ReductionAtLeastOneWithDefaultLibrary) {
    auto r = gen::rng(33);
    for (int i = 0; i < 300; ++i) EXPECT_GE(design_cost(gen::random_design(r, lib()), lib()).reduction, 1.0 - 1e-12);
}

TEST(EnergyReport, ZeroEnergyIsInfiniteReduction) {
    EXPECT_EQ(energy_ratio(5.0, 0.0), std::numeric_limits<double>::infinity());
    EXPECT_EQ(energy_ratio(0.0, 0.0), 1.0);
    const auto j = to_json(make_report({}, {1, 1, 1, 1}));
    EXPECT_EQ(j.at("reduction"), "inf");
    EXPECT_EQ(j.at("delay_note"), "model estimate");
    EXPECT_DOUBLE_EQ(to_json(make_report({1, 1, 1, 2}, {1, 1, 1, 4})).at("reduction").get<double>(), 2.0);
}

TEST(StageConfigMapping, StageKIsPassedToUnits) {
    const StageConfig s{StageId::LPF, 12, "ApproxAdd5", "AppMultV1"};
    EXPECT_EQ(stage_adder_config(s, lib()).k_approx, 12u);
    EXPECT_EQ(stage_adder_config(s, lib()).width, 32u);
    const auto m = stage_mult_config(s, lib());
    EXPECT_EQ(m.k_approx, 12u);
    EXPECT_EQ(m.width, 16u);
    EXPECT_EQ(m.internal_adder_spec.name, "ApproxAdd5");
}
