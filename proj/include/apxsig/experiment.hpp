#pragma once

// Experiment configuration and the sweep / explore / run commands behind the
// command-line tool. Every output file is a pure function of the effective
// configuration; timing goes to the caller, never into files.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apxsig/dse.hpp"
#include "apxsig/energy.hpp"
#include "apxsig/errors.hpp"
#include "apxsig/library.hpp"
#include "apxsig/pantompkins.hpp"
#include "apxsig/quality.hpp"
#include "apxsig/signal_io.hpp"
#include "apxsig/stage.hpp"

namespace apxsig {

inline constexpr double pipeline_fs = 200.0;

struct InputSpec {
    std::string source = "synthetic"; // synthetic | csv | wfdb
    SynthParams synth;
    std::string path; // csv file or WFDB header
    std::size_t channel = 0;
    bool scale_to_16bit = true;
};

struct ExperimentConfig {
    InputSpec input;
    std::string library_path; // empty: built-in library
    Constraint preprocessing{MetricId::PSNR, 15.0};
    Constraint final_quality{MetricId::PEAK_ACC, 100.0};
    std::string mode = "generate";   // sweep | generate | exhaustive | heuristic
    std::string scope = "both";      // preprocessing | signal_processing | both
    std::array<std::vector<unsigned>, 5> lsb{};
    std::vector<std::string> adders{"ApproxAdd5"};
    std::vector<std::string> mults{"AppMultV1"};
    std::string output_dir = "out";
    unsigned jobs = 1;
    std::size_t tolerance_samples = 10;
    PeakParams peaks;

    ExperimentConfig() {
        for (auto s : all_stages) lsb[static_cast<std::size_t>(s)] = even_levels(traits(s).max_k);
    }

    const std::vector<unsigned>& lsb_of(StageId s) const { return lsb[static_cast<std::size_t>(s)]; }
};

// ---------------------------------------------------------------------------
// Formatting

/// Shortest round-trip decimal; non-finite values print as inf / -inf / nan.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Configuration

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + "." + key + ": required field missing");
    return obj.at(key);
}

template <class T>
T get_as(const nlohmann::json& v, const std::string& where) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + ": wrong type (" + std::string(v.type_name()) + ")");
    }
}

inline double get_number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + ": must be finite");
    return d;
}

inline unsigned get_unsigned(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer");
    return static_cast<unsigned>(v.get<unsigned long long>());
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
        bool ok = false;
        for (const char* n : known) ok = ok || k == n;
        if (!ok) throw ConfigError(where + "." + k + ": unknown field");
    }
}

inline Constraint constraint_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    reject_unknown(j, {"metric", "threshold"}, where);
    Constraint c;
    c.metric = metric_from_string(get_as<std::string>(field(j, "metric", where), where + ".metric"));
    c.threshold = get_number(field(j, "threshold", where), where + ".threshold");
    return c;
}

inline std::vector<std::string> name_list(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of module names");
    std::vector<std::string> out;
    for (const auto& e : j) out.push_back(get_as<std::string>(e, where + "[]"));
    return out;
}

} // namespace detail

/// Parses a configuration document. Relative input and library paths are
/// resolved against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
    using namespace detail;
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(doc,
                   {"input", "library", "constraints", "mode", "scope", "stages", "adders", "mults", "output_dir",
                    "jobs", "tolerance_samples", "peaks"},
                   "config");
    ExperimentConfig cfg;
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).lexically_normal().string();
    };

    if (doc.contains("input")) {
        const auto& in = doc.at("input");
        if (!in.is_object()) throw ConfigError("input: expected an object");
        cfg.input.source = get_as<std::string>(field(in, "source", "input"), "input.source");
        if (cfg.input.source == "synthetic") {
            reject_unknown(in, {"source", "duration_s", "heart_rate_bpm", "noise_amplitude", "seed", "r_amplitude"},
                           "input");
            auto& s = cfg.input.synth;
            if (in.contains("duration_s")) s.duration_s = get_number(in.at("duration_s"), "input.duration_s");
            if (in.contains("heart_rate_bpm"))
                s.heart_rate_bpm = get_number(in.at("heart_rate_bpm"), "input.heart_rate_bpm");
            if (in.contains("noise_amplitude"))
                s.noise_amplitude = get_number(in.at("noise_amplitude"), "input.noise_amplitude");
            if (in.contains("r_amplitude")) s.r_amplitude = get_number(in.at("r_amplitude"), "input.r_amplitude");
            if (in.contains("seed")) {
                const auto& seed = in.at("seed");
                if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0))
                    throw ConfigError("input.seed: expected a non-negative integer");
                s.seed = seed.get<std::uint64_t>();
            }
        } else if (cfg.input.source == "csv" || cfg.input.source == "wfdb") {
            reject_unknown(in, {"source", "path", "channel", "scale_to_16bit"}, "input");
            cfg.input.path = resolve(get_as<std::string>(field(in, "path", "input"), "input.path"));
            if (in.contains("channel")) cfg.input.channel = get_unsigned(in.at("channel"), "input.channel");
            if (in.contains("scale_to_16bit"))
                cfg.input.scale_to_16bit = get_as<bool>(in.at("scale_to_16bit"), "input.scale_to_16bit");
        } else {
            throw ConfigError("input.source: expected synthetic | csv | wfdb, got '" + cfg.input.source + "'");
        }
    }

    if (doc.contains("library")) cfg.library_path = resolve(get_as<std::string>(doc.at("library"), "library"));

    if (doc.contains("constraints")) {
        const auto& c = doc.at("constraints");
        if (!c.is_object()) throw ConfigError("constraints: expected an object");
        reject_unknown(c, {"preprocessing", "final"}, "constraints");
        if (c.contains("preprocessing"))
            cfg.preprocessing = constraint_from_json(c.at("preprocessing"), "constraints.preprocessing");
        if (c.contains("final")) cfg.final_quality = constraint_from_json(c.at("final"), "constraints.final");
    }

    if (doc.contains("mode")) cfg.mode = get_as<std::string>(doc.at("mode"), "mode");
    if (doc.contains("scope")) cfg.scope = get_as<std::string>(doc.at("scope"), "scope");

    if (doc.contains("stages")) {
        const auto& st = doc.at("stages");
        if (!st.is_object()) throw ConfigError("stages: expected an object keyed by stage name");
        for (const auto& [name, spec] : st.items()) {
            const std::string where = "stages." + name;
            StageId id;
            try {
                id = stage_from_string(name);
            } catch (const ConfigError&) {
                throw ConfigError(where + ": unknown stage (expected LPF|HPF|DIFF|SQR|MWI)");
            }
            if (!spec.is_object()) throw ConfigError(where + ": expected an object");
            reject_unknown(spec, {"lsb"}, where);
            const auto& l = field(spec, "lsb", where);
            if (!l.is_array() || l.empty()) throw ConfigError(where + ".lsb: expected a non-empty array");
            std::vector<unsigned> ks;
            for (const auto& e : l) ks.push_back(get_unsigned(e, where + ".lsb[]"));
            cfg.lsb[static_cast<std::size_t>(id)] = std::move(ks);
        }
    }

    if (doc.contains("adders")) cfg.adders = name_list(doc.at("adders"), "adders");
    if (doc.contains("mults")) cfg.mults = name_list(doc.at("mults"), "mults");
    if (doc.contains("output_dir")) cfg.output_dir = get_as<std::string>(doc.at("output_dir"), "output_dir");
    if (doc.contains("jobs")) cfg.jobs = get_unsigned(doc.at("jobs"), "jobs");
    if (doc.contains("tolerance_samples"))
        cfg.tolerance_samples = get_unsigned(doc.at("tolerance_samples"), "tolerance_samples");
    if (doc.contains("peaks")) {
        const auto& p = doc.at("peaks");
        if (!p.is_object()) throw ConfigError("peaks: expected an object");
        reject_unknown(p, {"refractory_s", "alignment_s", "learning_s"}, "peaks");
        if (p.contains("refractory_s")) cfg.peaks.refractory_s = get_number(p.at("refractory_s"), "peaks.refractory_s");
        if (p.contains("alignment_s")) cfg.peaks.alignment_s = get_number(p.at("alignment_s"), "peaks.alignment_s");
        if (p.contains("learning_s")) cfg.peaks.learning_s = get_number(p.at("learning_s"), "peaks.learning_s");
    }
    return cfg;
}

/// Checks field ranges and that referenced files exist.
inline void validate(const ExperimentConfig& cfg, const ModuleLibrary& lib) {
    if (cfg.mode != "sweep" && cfg.mode != "generate" && cfg.mode != "exhaustive" && cfg.mode != "heuristic")
        throw ConfigError("mode: expected sweep | generate | exhaustive | heuristic, got '" + cfg.mode + "'");
    if (cfg.scope != "preprocessing" && cfg.scope != "signal_processing" && cfg.scope != "both")
        throw ConfigError("scope: expected preprocessing | signal_processing | both, got '" + cfg.scope + "'");
    if (cfg.preprocessing.metric == MetricId::PEAK_ACC)
        throw ConfigError("constraints.preprocessing.metric: must be PSNR or SSIM1D");
    for (const auto* c : {&cfg.preprocessing, &cfg.final_quality})
        if (!std::isfinite(c->threshold)) throw ConfigError("constraints: thresholds must be finite");
    if (cfg.final_quality.metric == MetricId::PEAK_ACC &&
        (cfg.final_quality.threshold < 0.0 || cfg.final_quality.threshold > 100.0))
        throw ConfigError("constraints.final.threshold: peak accuracy must be within [0, 100]");
    for (auto s : all_stages)
        for (unsigned k : cfg.lsb_of(s))
            if (k > traits(s).max_k)
                throw ConfigError("stages." + to_string(s) + ".lsb: " + std::to_string(k) + " exceeds maximum " +
                                  std::to_string(traits(s).max_k));
    for (const auto& a : cfg.adders)
        if (!lib.find_adder(a)) throw ConfigError("adders: '" + a + "' is not in the module library");
    for (const auto& m : cfg.mults)
        if (!lib.find_mult(m)) throw ConfigError("mults: '" + m + "' is not in the module library");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
    if (cfg.tolerance_samples == 0) throw ConfigError("tolerance_samples: must be positive");
    if (!(cfg.peaks.refractory_s > 0.0) || !(cfg.peaks.alignment_s > 0.0) || !(cfg.peaks.learning_s > 0.0))
        throw ConfigError("peaks: windows must be positive");
    if (!cfg.input.path.empty() && !std::filesystem::exists(cfg.input.path))
        throw ConfigError("input.path: '" + cfg.input.path + "' does not exist");
    if (cfg.input.source == "synthetic") {
        const auto& s = cfg.input.synth;
        if (!(s.duration_s > 0.0)) throw ConfigError("input.duration_s: must be positive");
        if (!(s.heart_rate_bpm >= 30.0 && s.heart_rate_bpm <= 220.0))
            throw ConfigError("input.heart_rate_bpm: must be within [30, 220]");
        if (!(s.noise_amplitude >= 0.0 && s.noise_amplitude <= 1.0))
            throw ConfigError("input.noise_amplitude: must be within [0, 1]");
        if (!(s.r_amplitude > 0.0 && s.r_amplitude <= 32767.0))
            throw ConfigError("input.r_amplitude: must be within (0, 32767]");
    }
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json in = {{"source", cfg.input.source}};
    if (cfg.input.source == "synthetic") {
        const auto& s = cfg.input.synth;
        in["duration_s"] = s.duration_s;
        in["heart_rate_bpm"] = s.heart_rate_bpm;
        in["noise_amplitude"] = s.noise_amplitude;
        in["r_amplitude"] = s.r_amplitude;
        in["seed"] = s.seed;
    } else {
        in["path"] = cfg.input.path;
        in["channel"] = cfg.input.channel;
        in["scale_to_16bit"] = cfg.input.scale_to_16bit;
    }
    nlohmann::json stages = nlohmann::json::object();
    for (auto s : all_stages) stages[to_string(s)] = {{"lsb", cfg.lsb_of(s)}};
    return {{"input", in},
            {"library", cfg.library_path},
            {"constraints",
             {{"preprocessing",
               {{"metric", to_string(cfg.preprocessing.metric)}, {"threshold", cfg.preprocessing.threshold}}},
              {"final", {{"metric", to_string(cfg.final_quality.metric)}, {"threshold", cfg.final_quality.threshold}}}}},
            {"mode", cfg.mode},
            {"scope", cfg.scope},
            {"stages", stages},
            {"adders", cfg.adders},
            {"mults", cfg.mults},
            {"tolerance_samples", cfg.tolerance_samples},
            {"peaks",
             {{"refractory_s", cfg.peaks.refractory_s},
              {"alignment_s", cfg.peaks.alignment_s},
              {"learning_s", cfg.peaks.learning_s}}}};
}

/// Hash of everything that can change an output byte. Worker count and output
/// directory are excluded since they cannot.
inline std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a(to_json(cfg).dump())); }

inline ExperimentConfig load_config(const std::string& path) {
    const auto text = read_text_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return config_from_json(doc, std::filesystem::path(path).parent_path());
}

inline ModuleLibrary load_library(const ExperimentConfig& cfg) {
    return cfg.library_path.empty() ? ModuleLibrary::defaults() : ModuleLibrary::load(cfg.library_path);
}

struct LoadedInput {
    Signal signal;
    std::optional<std::vector<std::size_t>> truth;
    double source_fs = pipeline_fs;
};

/// Materializes the configured input at the pipeline rate.
inline LoadedInput load_input(const ExperimentConfig& cfg) {
    LoadedInput in;
    if (cfg.input.source == "synthetic") {
        auto [sig, truth] = synth_ecg(cfg.input.synth);
        in.signal = std::move(sig);
        in.truth = std::move(truth.indices);
        return in;
    }
    Signal s = cfg.input.source == "csv" ? read_csv(read_text_file(cfg.input.path))
                                          : load_wfdb212(cfg.input.path, cfg.input.channel);
    if (s.samples.empty()) throw ConfigError("input.path: '" + cfg.input.path + "' holds no samples");
    if (s.adc_bits > 16) throw ConfigError("input: samples wider than 16 bits are not supported");
    if (cfg.input.scale_to_16bit) s = scale_to_16bit(std::move(s));
    in.source_fs = s.fs;
    if (s.fs != pipeline_fs) s = resample_linear(s, pipeline_fs);
    in.signal = std::move(s);
    return in;
}

// ---------------------------------------------------------------------------
// Output writers

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "k,psnr,ssim,peak_acc,energy_reduction\n";
    for (const auto& r : rows)
        out += std::to_string(r.k) + ',' + format_number(r.psnr) + ',' + format_number(r.ssim) + ',' +
               format_number(r.peak_acc) + ',' + format_number(r.energy_reduction) + '\n';
    return out;
}

/// One record per evaluated design; `timestamp` is the evaluation's position in the run.
inline std::string exploration_csv(const std::vector<std::pair<std::string, const DesignPoint*>>& records) {
    std::string out = "timestamp,scope,phase";
    for (auto s : all_stages) {
        const auto n = to_string(s);
        out += ',' + n + "_k," + n + "_adder," + n + "_mult";
    }
    out += ",psnr,ssim,peak_acc,false_positives,energy_fj,energy_reduction\n";
    std::size_t t = 0;
    for (const auto& [scope, p] : records) {
        out += std::to_string(++t) + ',' + scope + ',' + p->phase;
        for (const auto& c : p->design.stages)
            out += ',' + std::to_string(c.k_approx) + ',' + c.adder_spec + ',' + c.mult_spec;
        out += ',' + format_number(p->psnr) + ',' + format_number(p->ssim) + ',' + format_number(p->peak_acc) + ',' +
               std::to_string(p->false_positives) + ',' + format_number(p->energy.totals.energy) + ',' +
               format_number(p->energy.reduction) + '\n';
    }
    return out;
}

inline std::string pareto_csv(std::span<const DesignPoint> front, MetricId metric) {
    std::string out = "design," + to_string(metric) + ",energy_fj,energy_reduction\n";
    for (const auto& p : front)
        out += p.design.key() + ',' + format_number(metric_value(p, metric)) + ',' +
               format_number(p.energy.totals.energy) + ',' + format_number(p.energy.reduction) + '\n';
    return out;
}

inline nlohmann::json scores_json(const DesignPoint& p) {
    return {{"psnr", number_or_inf(p.psnr)},
            {"ssim", p.ssim},
            {"peak_acc", p.peak_acc},
            {"false_positives", p.false_positives}};
}

// ---------------------------------------------------------------------------
// Commands

struct SweepResult {
    std::array<std::vector<SweepRow>, 5> rows;
    std::string config_hash;
};

/// One resilience table per stage, using the first listed adder and multiplier.
inline SweepResult cmd_sweep(const ExperimentConfig& cfg, unsigned jobs) {
    const auto lib = load_library(cfg);
    validate(cfg, lib);
    auto in = load_input(cfg);
    const Evaluator ev(std::move(in.signal), lib, std::move(in.truth), cfg.peaks, cfg.tolerance_samples);

    SweepResult res;
    res.config_hash = config_hash(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    nlohmann::json summary = {{"config_hash", res.config_hash},
                              {"adder", cfg.adders.front()},
                              {"mult", cfg.mults.front()},
                              {"samples", ev.input().size()},
                              {"reference_peaks", ev.truth().size()},
                              {"files", nlohmann::json::array()}};
    for (auto s : all_stages) {
        auto& rows = res.rows[static_cast<std::size_t>(s)];
        rows = resilience_sweep(s, cfg.lsb_of(s), cfg.adders.front(), cfg.mults.front(), ev, jobs);
        const std::string name = "sweep_" + to_string(s) + ".csv";
        write_file(dir / name, sweep_csv(rows));
        summary["files"].push_back(name);
    }
    write_file(dir / "sweep_summary.json", dump_json(summary));
    return res;
}

struct ScopeResult {
    std::string scope;
    Constraint constraint;
    ExplorationLog log;
    DesignPoint committed;
    std::vector<DesignPoint> pareto;
};

struct ExploreResult {
    std::vector<ScopeResult> scopes;
    Design design;
    DesignPoint committed;
    std::string config_hash;
    std::size_t evaluations = 0;
    double wall_s = 0.0;
    /// Largest model reduction among evaluated designs with 100% peak accuracy.
    double best_reduction_full_accuracy = 0.0;
};

namespace detail {

inline SearchSpace space_for(const ExperimentConfig& cfg, std::vector<StageId> stages, const Design& base) {
    SearchSpace sp;
    sp.stages = std::move(stages);
    for (auto s : sp.stages) sp.lsb_of(s) = cfg.lsb_of(s);
    sp.adders = cfg.adders;
    sp.mults = cfg.mults;
    sp.base = base;
    return sp;
}

inline ScopeResult explore_scope(const ExperimentConfig& cfg, const std::string& scope, const SearchSpace& space,
                                 const Constraint& constraint, const Evaluator& ev, unsigned jobs) {
    ScopeResult r;
    r.scope = scope;
    r.constraint = constraint;
    if (cfg.mode == "generate") {
        auto g = generate_designs(space, constraint, ev, jobs);
        r.log = std::move(g.log);
        r.committed = g.committed;
    } else {
        r.log = cfg.mode == "exhaustive" ? exhaustive_search(space, ev, jobs) : heuristic_search(space, ev, jobs);
        const DesignPoint* best = nullptr;
        for (const auto& p : r.log.points)
            if (satisfies(p, constraint) && (!best || better(p, *best))) best = &p;
        if (!best)
            throw InfeasibleConstraintError(scope, "no evaluated design meets " + to_string(constraint.metric) +
                                                       " >= " + format_number(constraint.threshold));
        r.committed = *best;
    }
    r.pareto = pareto_front(r.log.points, constraint.metric);
    return r;
}

} // namespace detail

/// Explores the configured scope(s). With scope "both" the signal-processing
/// stages are explored on top of the committed pre-processing design.
inline ExploreResult cmd_explore(const ExperimentConfig& cfg, unsigned jobs) {
    if (cfg.mode == "sweep") throw ConfigError("mode: 'sweep' is served by the sweep command");
    const auto lib = load_library(cfg);
    validate(cfg, lib);
    auto in = load_input(cfg);
    const Evaluator ev(std::move(in.signal), lib, std::move(in.truth), cfg.peaks, cfg.tolerance_samples);

    const auto t0 = std::chrono::steady_clock::now();
    ExploreResult res;
    res.config_hash = config_hash(cfg);
    Design base;
    if (cfg.scope != "signal_processing") {
        res.scopes.push_back(detail::explore_scope(cfg, "preprocessing",
                                                   detail::space_for(cfg, {StageId::LPF, StageId::HPF}, base),
                                                   cfg.preprocessing, ev, jobs));
        base = res.scopes.back().committed.design;
        res.committed = res.scopes.back().committed;
    }
    if (cfg.scope != "preprocessing") {
        res.scopes.push_back(detail::explore_scope(
            cfg, "signal_processing", detail::space_for(cfg, {StageId::DIFF, StageId::SQR, StageId::MWI}, base),
            cfg.final_quality, ev, jobs));
        res.committed = res.scopes.back().committed;
    }
    res.design = res.committed.design;
    res.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::vector<std::pair<std::string, const DesignPoint*>> records;
    for (const auto& s : res.scopes)
        for (const auto& p : s.log.points) {
            records.emplace_back(s.scope, &p);
            if (p.peak_acc >= 100.0) res.best_reduction_full_accuracy = std::max(res.best_reduction_full_accuracy, p.energy.reduction);
        }
    res.evaluations = records.size();

    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "exploration.csv", exploration_csv(records));
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& s : res.scopes) {
        write_file(dir / ("pareto_" + s.scope + ".csv"), pareto_csv(s.pareto, s.constraint.metric));
        counts[s.scope] = s.log.size();
    }
    const nlohmann::json design_doc = {{"config_hash", res.config_hash},
                                       {"design", to_json(res.design)},
                                       {"scores", scores_json(res.committed)},
                                       {"energy", to_json(res.committed.energy)}};
    write_file(dir / "design.json", dump_json(design_doc));
    const nlohmann::json summary = {{"config_hash", res.config_hash},
                                    {"mode", cfg.mode},
                                    {"scope", cfg.scope},
                                    {"evaluations", counts},
                                    {"total_evaluations", res.evaluations},
                                    {"committed_reduction", number_or_inf(res.committed.energy.reduction)},
                                    {"best_reduction_full_accuracy", number_or_inf(res.best_reduction_full_accuracy)},
                                    {"reference_peaks", ev.truth().size()}};
    write_file(dir / "summary.json", dump_json(summary));
    return res;
}

/// Reads a design from either a bare stage array or a document with a "design" field.
inline Design load_design(const std::string& path) {
    const auto text = read_text_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("design '" + path + "': " + e.what());
    }
    if (doc.is_object()) {
        if (!doc.contains("design")) throw ConfigError("design '" + path + "': missing \"design\" field");
        return design_from_json(doc.at("design"));
    }
    return design_from_json(doc);
}

struct RunResult {
    PipelineOutput output;
    DesignPoint scores;
    PeakMatch match;
    std::string config_hash;
};

inline RunResult cmd_run(const ExperimentConfig& cfg, const Design& design) {
    const auto lib = load_library(cfg);
    validate(cfg, lib);
    design.validate(lib);
    auto in = load_input(cfg);
    const Signal input = in.signal;
    const Evaluator ev(std::move(in.signal), lib, std::move(in.truth), cfg.peaks, cfg.tolerance_samples);

    RunResult res;
    res.config_hash = config_hash(cfg);
    res.output = ev.pipeline(design);
    res.scores = ev.evaluate(design);
    res.match = peak_accuracy(ev.truth(), res.output.detected_peaks, ev.tolerance());

    const auto& o = res.output;
    std::string sig = "n,input,lpf,hpf,diff,sqr,mwi\n";
    for (std::size_t n = 0; n < input.size(); ++n)
        sig += std::to_string(n) + ',' + std::to_string(input.samples[n]) + ',' + std::to_string(o.lpf_out.samples[n]) +
               ',' + std::to_string(o.hpf_out.samples[n]) + ',' + std::to_string(o.diff_out.samples[n]) + ',' +
               std::to_string(o.sqr_out.samples[n]) + ',' + std::to_string(o.mwi_out.samples[n]) + '\n';
    std::string peaks = "index\n";
    for (auto i : o.detected_peaks) peaks += std::to_string(i) + '\n';

    const std::filesystem::path dir(cfg.output_dir);
    write_file(dir / "signals.csv", sig);
    write_file(dir / "peaks.csv", peaks);
    const nlohmann::json metrics = {{"config_hash", res.config_hash},
                                    {"design", to_json(design)},
                                    {"scores", scores_json(res.scores)},
                                    {"matched", res.match.matched},
                                    {"missed", res.match.missed},
                                    {"detected", o.detected_peaks.size()},
                                    {"reference_peaks", ev.truth().size()},
                                    {"energy", to_json(res.scores.energy)}};
    write_file(dir / "metrics.json", dump_json(metrics));
    return res;
}

} // namespace apxsig
