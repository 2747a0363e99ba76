#pragma once

// Per-stage approximation parameters and five-stage design assignments.

#include <array>
#include <string>
#include <string_view>

#include <json.hpp>

#include "apxsig/errors.hpp"
#include "apxsig/library.hpp"

namespace apxsig {

enum class StageId { LPF = 0, HPF, DIFF, SQR, MWI };

inline constexpr std::array<StageId, 5> all_stages{StageId::LPF, StageId::HPF, StageId::DIFF, StageId::SQR,
                                                   StageId::MWI};

/// Arithmetic instance counts and approximation ceiling of a stage.
struct StageTraits {
    std::string_view name;
    unsigned adders;
    unsigned mults;
    unsigned max_k;
};

inline constexpr StageTraits traits(StageId s) noexcept {
    switch (s) {
    case StageId::LPF: return {"LPF", 10, 11, 16};
    case StageId::HPF: return {"HPF", 31, 32, 16};
    case StageId::DIFF: return {"DIFF", 5, 0, 4};
    case StageId::SQR: return {"SQR", 0, 1, 8};
    case StageId::MWI: return {"MWI", 31, 0, 16};
    }
    return {"?", 0, 0, 0};
}

inline constexpr unsigned stage_adder_width = 32;
inline constexpr unsigned stage_mult_width = 16;

inline std::string to_string(StageId s) { return std::string(traits(s).name); }

inline StageId stage_from_string(std::string_view name) {
    for (auto s : all_stages)
        if (traits(s).name == name) return s;
    throw ConfigError("unknown stage '" + std::string(name) + "' (expected LPF|HPF|DIFF|SQR|MWI)");
}

struct StageConfig {
    StageId stage = StageId::LPF;
    unsigned k_approx = 0;
    std::string adder_spec{accurate_name};
    std::string mult_spec{accurate_name};

    void validate() const {
        if (k_approx > traits(stage).max_k)
            throw ConfigError("stage " + to_string(stage) + ": k_approx " + std::to_string(k_approx) +
                              " exceeds maximum " + std::to_string(traits(stage).max_k));
    }

    void validate(const ModuleLibrary& lib) const {
        validate();
        lib.adder(adder_spec);
        lib.mult(mult_spec);
    }

    friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

/// Full five-stage approximation assignment, indexed by StageId.
struct Design {
    std::array<StageConfig, 5> stages{};

    Design() {
        for (auto s : all_stages) stages[static_cast<std::size_t>(s)].stage = s;
    }

    StageConfig& operator[](StageId s) noexcept { return stages[static_cast<std::size_t>(s)]; }
    const StageConfig& operator[](StageId s) const noexcept { return stages[static_cast<std::size_t>(s)]; }

    void validate(const ModuleLibrary& lib) const {
        for (auto s : all_stages) {
            if ((*this)[s].stage != s) throw ConfigError("design slot " + to_string(s) + " holds another stage");
            (*this)[s].validate(lib);
        }
    }

    /// Compact identifier, e.g. "LPF:16:ApproxAdd5:AppMultV1|HPF:0:Accurate:Accurate|...".
    std::string key() const {
        std::string out;
        for (const auto& c : stages) {
            if (!out.empty()) out += '|';
            out += to_string(c.stage) + ':' + std::to_string(c.k_approx) + ':' + c.adder_spec + ':' + c.mult_spec;
        }
        return out;
    }

    friend bool operator==(const Design&, const Design&) = default;
};

inline nlohmann::json to_json(const StageConfig& c) {
    return {{"stage", to_string(c.stage)}, {"k", c.k_approx}, {"adder", c.adder_spec}, {"mult", c.mult_spec}};
}

inline nlohmann::json to_json(const Design& d) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : d.stages) arr.push_back(to_json(c));
    return arr;
}

inline StageConfig stage_config_from_json(const nlohmann::json& j) try {
    StageConfig c;
    c.stage = stage_from_string(j.at("stage").get<std::string>());
    const auto k = j.at("k").get<long long>();
    if (k < 0) throw ConfigError("stage " + to_string(c.stage) + ": k must be non-negative");
    c.k_approx = static_cast<unsigned>(k);
    c.adder_spec = j.value("adder", std::string(accurate_name));
    c.mult_spec = j.value("mult", std::string(accurate_name));
    c.validate();
    return c;
} catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("stage config: ") + e.what());
}

/// Parses a design from a JSON array holding each of the five stages exactly once.
inline Design design_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("design: expected an array of stage configs");
    Design d;
    std::array<bool, 5> seen{};
    for (const auto& e : j) {
        const auto c = stage_config_from_json(e);
        const auto idx = static_cast<std::size_t>(c.stage);
        if (seen[idx]) throw ConfigError("design: stage " + to_string(c.stage) + " listed twice");
        seen[idx] = true;
        d.stages[idx] = c;
    }
    for (auto s : all_stages)
        if (!seen[static_cast<std::size_t>(s)]) throw ConfigError("design: stage " + to_string(s) + " missing");
    return d;
}

} // namespace apxsig
