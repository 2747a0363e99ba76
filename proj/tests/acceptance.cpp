// Acceptance suite: one PASS/FAIL line per criterion. Values are checked
// against native integer arithmetic or recomputed independently here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apxsig/apxsig.hpp"

using namespace apxsig;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 3) {
    if (!std::isfinite(v)) return format_number(v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

const fs::path source_dir = APXSIG_SOURCE_DIR;

Evaluator clean_evaluator(double bpm, double seconds, double noise = 0.0, std::uint64_t seed = 7) {
    SynthParams p;
    p.duration_s = seconds;
    p.heart_rate_bpm = bpm;
    p.noise_amplitude = noise;
    p.seed = seed;
    auto [sig, truth] = synth_ecg(p);
    return Evaluator(std::move(sig), ModuleLibrary::defaults(), std::move(truth.indices));
}

// Bit-exactness of the k=0 units against native arithmetic.
Verdict ac1() {
    const auto t0 = Clock::now();
    std::size_t bad = 0;
    const CompositeAdderConfig add8{8, 0, tables::accurate_fa()};
    for (std::uint64_t x = 0; x < 256; ++x)
        for (std::uint64_t y = 0; y < 256; ++y)
            for (unsigned c = 0; c < 2; ++c) {
                const auto r = eval_composite_adder(add8, x, y, c);
                const auto want = x + y + c;
                bad += r.sum != (want & 0xFF) || r.cout != (want >> 8);
            }
    const RecursiveMultiplier mul4({4, 0, tables::accurate_mult(), tables::accurate_fa()});
    for (std::uint64_t x = 0; x < 16; ++x)
        for (std::uint64_t y = 0; y < 16; ++y) bad += mul4(x, y) != x * y;

    std::mt19937_64 rng(2024);
    const RecursiveMultiplier mul16({16, 0, tables::accurate_mult(), tables::accurate_fa()});
    const CompositeAdderConfig add32{32, 0, tables::accurate_fa()};
    for (int i = 0; i < 100000; ++i) {
        const std::uint64_t x = rng() & 0xFFFF, y = rng() & 0xFFFF;
        bad += mul16(x, y) != x * y;
        const std::uint64_t a = rng() & 0xFFFFFFFF, b = rng() & 0xFFFFFFFF;
        const unsigned c = static_cast<unsigned>(rng() & 1);
        const auto r = eval_composite_adder(add32, a, b, c);
        bad += r.sum != ((a + b + c) & 0xFFFFFFFF) || r.cout != ((a + b + c) >> 32);
    }
    const double t = seconds_since(t0);
    return {bad == 0 && t < 60.0, std::to_string(bad) + " mismatches, " + fmt(t, 2) + " s (limit 60 s)"};
}

Verdict ac2() {
    const auto v1 = characterize(tables::app_mult_v1());
    const auto fa = characterize(tables::accurate_fa());
    const bool pass = v1.cases == 16 && v1.wrong == 1 && v1.max_abs_error == 2 && fa.wrong == 0 && fa.max_abs_error == 0;
    return {pass, "AppMultV1 error rate " + std::to_string(v1.wrong) + "/" + std::to_string(v1.cases) +
                      ", max |err| " + std::to_string(v1.max_abs_error) + "; Accurate FA wrong " +
                      std::to_string(fa.wrong)};
}

Verdict ac3() {
    const auto lib = ModuleLibrary::defaults();
    const double fa = unit_cost(CompositeAdderConfig{1, 0, tables::accurate_fa()}, lib).energy;
    const double a5 = unit_cost(CompositeAdderConfig{1, 1, tables::approx_add5()}, lib).energy;
    const double a32 = unit_cost(CompositeAdderConfig{32, 0, tables::accurate_fa()}, lib).energy;
    std::mt19937_64 rng(99);
    std::size_t violations = 0;
    for (int i = 0; i < 1000; ++i) {
        Design d;
        for (auto s : all_stages) {
            d[s].k_approx = static_cast<unsigned>(rng() % (traits(s).max_k + 1));
            d[s].adder_spec = lib.adders()[rng() % lib.adders().size()].spec.name;
            d[s].mult_spec = lib.mults()[rng() % lib.mults().size()].spec.name;
        }
        const auto s = all_stages[rng() % 5];
        if (d[s].k_approx == traits(s).max_k) d[s].k_approx -= 1;
        auto more = d;
        more[s].k_approx += 1;
        violations += design_cost(more, lib).totals.energy > design_cost(d, lib).totals.energy;
    }
    const bool pass = fa == 0.409 && a5 == 0.0 && std::abs(a32 - 13.088) < 1e-9 && violations == 0;
    return {pass, "FA " + format_number(fa) + " fJ, ApproxAdd5 " + format_number(a5) + " fJ, 32-bit " +
                      fmt(a32, 6) + " fJ, monotonicity violations " + std::to_string(violations) + "/1000"};
}

Verdict ac4() {
    const auto t0 = Clock::now();
    Verdict v;
    for (double bpm : {60.0, 80.0, 120.0}) {
        const auto ev = clean_evaluator(bpm, 30.0);
        const auto acc = ev.evaluate(Design{}).peak_acc;
        v.pass = v.pass && acc == 100.0;
        v.detail += fmt(bpm, 0) + " bpm " + fmt(acc, 1) + "%; ";
    }
    for (double noise : {0.02, 0.05}) {
        const auto ev = clean_evaluator(72.0, 30.0, noise, 13);
        const auto acc = ev.evaluate(Design{}).peak_acc;
        v.pass = v.pass && acc >= 99.0;
        v.detail += "noise " + fmt(100 * noise, 0) + "% " + fmt(acc, 1) + "%; ";
    }
    const double t = seconds_since(t0);
    v.pass = v.pass && t < 30.0;
    v.detail += fmt(t, 2) + " s (limit 30 s)";
    return v;
}

Verdict ac5() {
    const auto ev = clean_evaluator(72.0, 30.0);
    std::vector<unsigned> ks(17);
    for (unsigned k = 0; k <= 16; ++k) ks[k] = k;
    const auto rows = resilience_sweep(StageId::LPF, ks, "ApproxAdd5", "AppMultV1", ev);
    int k_star = -1;
    for (const auto& r : rows) {
        if (r.peak_acc != 100.0) break;
        k_star = static_cast<int>(r.k);
    }
    bool collapse = false;
    for (const auto& r : rows)
        if (static_cast<int>(r.k) > k_star && r.peak_acc < 50.0) collapse = true;
    const double psnr4 = rows[4].psnr, psnr16 = rows[16].psnr;
    std::string acc;
    for (const auto& r : rows) acc += (acc.empty() ? "" : ",") + fmt(r.peak_acc, 0);
    return {k_star >= 4 && collapse && psnr16 < psnr4,
            "k*=" + std::to_string(k_star) + ", collapse " + (collapse ? "yes" : "no") + ", PSNR k=4 " + fmt(psnr4, 2) +
                " dB > k=16 " + fmt(psnr16, 2) + " dB; accuracy by k [" + acc + "]; reduction at k* " +
                (k_star >= 0 ? fmt(rows[static_cast<std::size_t>(k_star)].energy_reduction, 2) : "n/a") + "x"};
}

Verdict ac6() {
    const auto ev = clean_evaluator(72.0, 30.0);
    const auto pre = exhaustive_search(preprocessing_space(), ev);
    const auto sp = exhaustive_search(signal_processing_space(), ev);
    const Constraint c{MetricId::PSNR, 15.0};
    bool any = false;
    for (const auto& p : pre.points) any = any || satisfies(p, c);
    std::size_t generated = 0;
    bool committed_ok = false;
    try {
        const auto g = generate_designs(preprocessing_space(), c, ev);
        generated = g.log.size();
        committed_ok = satisfies(g.committed, c) && satisfies(ev.evaluate(g.design), c);
    } catch (const InfeasibleConstraintError&) {
        committed_ok = !any;
    }
    return {pre.size() == 81 && sp.size() == 135 && generated <= 20 && (committed_ok || !any),
            "exhaustive " + std::to_string(pre.size()) + " + " + std::to_string(sp.size()) + ", generate " +
                std::to_string(generated) + " evaluations (limit 20), committed meets PSNR >= 15: " +
                (committed_ok ? "yes" : "no")};
}

// Exhaustive exploration of both scopes from the shipped configuration.
Verdict ac7() {
    auto cfg = load_config((source_dir / "configs" / "explore_exhaustive.json").string());
    cfg.output_dir = (fs::temp_directory_path() / "apxsig_acceptance" / "ac7").string();
    const auto res = cmd_explore(cfg, 1);
    std::size_t sp_front = 0;
    double best = 0.0;
    std::string best_key = "none";
    for (const auto& s : res.scopes) {
        if (s.scope == "signal_processing") sp_front = s.pareto.size();
        for (const auto& p : s.log.points)
            if (p.peak_acc >= 100.0 && p.energy.reduction > best) {
                best = p.energy.reduction;
                best_key = p.design.key();
            }
    }
    return {best >= 10.0 && sp_front >= 2,
            "best reduction at 100% accuracy " + fmt(best, 2) + "x (need >= 10x) by " + best_key + "; " +
                std::to_string(res.evaluations) + " evaluations; pareto points " + std::to_string(sp_front) +
                " (need >= 2)"};
}

Verdict ac8() {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::int32_t> d(-2048, 2047);
    std::vector<std::int32_t> s(200000);
    for (auto& v : s) v = d(rng);
    const bool identity = decode_212(encode_212(s)) == s;
    bool raised = false;
    try {
        const std::vector<std::uint8_t> ragged(7, 0);
        decode_212(ragged);
    } catch (const ParseError&) {
        raised = true;
    }
    bool short_raised = false;
    try {
        const auto bytes = encode_212(std::vector<std::int32_t>{1, 2});
        read_wfdb212("r 1 360 10\nr.dat 212\n", bytes, 0);
    } catch (const ParseError&) {
        short_raised = true;
    }
    return {identity && raised && short_raised, std::string("10^5 pairs identity ") + (identity ? "yes" : "no") +
                                                    ", ragged stream error " + (raised ? "yes" : "no") +
                                                    ", short record error " + (short_raised ? "yes" : "no")};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = ss.str();
    }
    return files;
}

Verdict ac9() {
    const auto root = fs::temp_directory_path() / "apxsig_acceptance" / "ac9";
    auto base = load_config((source_dir / "configs" / "explore_generate.json").string());
    base.input.synth.duration_s = 10.0;
    base.input.synth.noise_amplitude = 0.03;
    std::size_t compared = 0, differing = 0;
    for (unsigned jobs : {1u, 2u}) {
        std::vector<std::map<std::string, std::string>> runs;
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = root / ("j" + std::to_string(jobs) + "_" + std::to_string(rep));
            fs::remove_all(dir);
            auto cfg = base;
            cfg.output_dir = (dir / "explore").string();
            const auto ex = cmd_explore(cfg, jobs);
            cfg.output_dir = (dir / "sweep").string();
            cfg.mode = "sweep";
            cmd_sweep(cfg, jobs);
            cfg.output_dir = (dir / "run").string();
            cmd_run(cfg, ex.design);
            runs.push_back(snapshot(dir));
        }
        for (const auto& [name, content] : runs[0]) {
            ++compared;
            const auto it = runs[1].find(name);
            differing += it == runs[1].end() || it->second != content;
        }
        differing += runs[0].size() != runs[1].size();
    }
    return {differing == 0 && compared > 0,
            std::to_string(compared) + " files compared across reruns (jobs 1 and 2), " + std::to_string(differing) +
                " differ"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::string only;
    app.add_option("--only", only, "run a single criterion, e.g. AC5");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
    bool all = true, matched = false;
    for (const auto& [name, fn] : criteria) {
        if (!only.empty() && only != name) continue;
        matched = true;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s %s\n", name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        all = all && v.pass;
    }
    if (!matched) {
        std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
        return 2;
    }
    return all ? 0 : 1;
}
