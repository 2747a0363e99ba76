#pragma once

// Module library: elementary truth tables plus their synthesized cost records,
// loadable from and serializable to JSON.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apxsig/arith.hpp"
#include "apxsig/errors.hpp"

namespace apxsig {

/// Area [um^2], delay [ns], power [uW], energy [fJ].
struct CostRecord {
    double area = 0.0;
    double delay = 0.0;
    double power = 0.0;
    double energy = 0.0;

    CostRecord& operator+=(const CostRecord& o) noexcept {
        area += o.area;
        delay += o.delay;
        power += o.power;
        energy += o.energy;
        return *this;
    }
    friend CostRecord operator+(CostRecord a, const CostRecord& b) noexcept { return a += b; }
    friend CostRecord operator*(CostRecord a, double s) noexcept {
        a.area *= s;
        a.delay *= s;
        a.power *= s;
        a.energy *= s;
        return a;
    }
    friend bool operator==(const CostRecord&, const CostRecord&) = default;
};

struct AdderModule {
    FullAdderSpec spec;
    CostRecord cost;
};

struct MultModule {
    Mult2x2Spec spec;
    CostRecord cost;
};

inline constexpr std::string_view accurate_name = "Accurate";

class ModuleLibrary {
public:
    void add(AdderModule m) {
        if (find_adder(m.spec.name)) throw ConfigError("duplicate fa module '" + m.spec.name + "'");
        adders_.push_back(std::move(m));
    }
    void add(MultModule m) {
        if (find_mult(m.spec.name)) throw ConfigError("duplicate mult2x2 module '" + m.spec.name + "'");
        mults_.push_back(std::move(m));
    }

    const AdderModule* find_adder(std::string_view name) const noexcept {
        for (const auto& m : adders_)
            if (m.spec.name == name) return &m;
        return nullptr;
    }
    const MultModule* find_mult(std::string_view name) const noexcept {
        for (const auto& m : mults_)
            if (m.spec.name == name) return &m;
        return nullptr;
    }

    const AdderModule& adder(std::string_view name) const {
        if (const auto* m = find_adder(name)) return *m;
        throw ConfigError("no fa module named '" + std::string(name) + "' in library");
    }
    const MultModule& mult(std::string_view name) const {
        if (const auto* m = find_mult(name)) return *m;
        throw ConfigError("no mult2x2 module named '" + std::string(name) + "' in library");
    }

    const std::vector<AdderModule>& adders() const noexcept { return adders_; }
    const std::vector<MultModule>& mults() const noexcept { return mults_; }

    /// Checks the invariants a usable library must satisfy.
    void validate() const {
        if (!find_adder(accurate_name) || !find_mult(accurate_name))
            throw ConfigError("library must define 'Accurate' modules of both kinds");
        if (!adder(accurate_name).spec.is_exact()) throw ConfigError("fa 'Accurate' is not exact addition");
        if (!mult(accurate_name).spec.is_exact()) throw ConfigError("mult2x2 'Accurate' is not exact multiplication");
        auto check_cost = [](const std::string& n, const CostRecord& c) {
            if (c.area < 0 || c.delay < 0 || c.power < 0 || c.energy < 0)
                throw ConfigError("module '" + n + "' has a negative cost field");
        };
        for (const auto& m : adders_) check_cost(m.spec.name, m.cost);
        for (const auto& m : mults_) check_cost(m.spec.name, m.cost);
    }

    /// Library seeded with the synthesized 65 nm cell costs.
    static ModuleLibrary defaults() {
        ModuleLibrary lib;
        lib.add(AdderModule{tables::accurate_fa(), {10.08, 0.18, 2.27, 0.409}});
        lib.add(AdderModule{tables::approx_add1(), {8.28, 0.11, 1.34, 0.147}});
        lib.add(AdderModule{tables::approx_add2(), {3.96, 0.08, 0.61, 0.049}});
        lib.add(AdderModule{tables::approx_add3(), {3.60, 0.06, 0.41, 0.025}});
        lib.add(AdderModule{tables::approx_add4(), {3.24, 0.06, 0.33, 0.020}});
        lib.add(AdderModule{tables::approx_add5(), {0.00, 0.00, 0.00, 0.000}});
        lib.add(MultModule{tables::accurate_mult(), {14.40, 0.16, 1.80, 0.288}});
        lib.add(MultModule{tables::app_mult_v1(), {11.52, 0.13, 1.67, 0.167}});
        lib.add(MultModule{tables::app_mult_v2(), {9.72, 0.06, 1.37, 0.137}});
        return lib;
    }

    static ModuleLibrary from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    static ModuleLibrary load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open module library '" + path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("module library '" + path + "': " + e.what());
        }
        return from_json(doc);
    }

private:
    std::vector<AdderModule> adders_;
    std::vector<MultModule> mults_;
};

inline nlohmann::json to_json(const CostRecord& c) {
    return {{"area", c.area}, {"delay", c.delay}, {"power", c.power}, {"energy", c.energy}};
}

inline CostRecord cost_from_json(const nlohmann::json& j, const std::string& owner) {
    try {
        return {j.at("area").get<double>(), j.at("delay").get<double>(), j.at("power").get<double>(),
                j.at("energy").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("module '" + owner + "': bad cost record: " + e.what());
    }
}

inline ModuleLibrary ModuleLibrary::from_json(const nlohmann::json& doc) try {
    ModuleLibrary lib;
    if (!doc.contains("modules") || !doc["modules"].is_array())
        throw ConfigError("module library: missing 'modules' array");
    for (const auto& m : doc["modules"]) {
        std::string name, kind;
        try {
            name = m.at("name").get<std::string>();
            kind = m.at("kind").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("module library entry: ") + e.what());
        }
        const auto& table = m.contains("table") ? m["table"] : nlohmann::json{};
        if (kind == "fa") {
            if (!table.is_array() || table.size() != 8)
                throw ConfigError("fa module '" + name + "': table must list all 8 input rows");
            FullAdderSpec spec{name, {}};
            for (std::size_t i = 0; i < 8; ++i) {
                const auto& row = table[i];
                if (!row.is_array() || row.size() != 2)
                    throw ConfigError("fa module '" + name + "': row " + std::to_string(i) + " must be [sum, cout]");
                const int s = row[0].get<int>(), c = row[1].get<int>();
                if ((s != 0 && s != 1) || (c != 0 && c != 1))
                    throw ConfigError("fa module '" + name + "': row " + std::to_string(i) + " has non-bit output");
                spec.table[i] = static_cast<std::uint8_t>(s | (c << 1));
            }
            lib.add(AdderModule{std::move(spec), cost_from_json(m.at("cost"), name)});
        } else if (kind == "mult2x2") {
            if (!table.is_array() || table.size() != 16)
                throw ConfigError("mult2x2 module '" + name + "': table must list all 16 products");
            Mult2x2Spec spec{name, {}};
            for (std::size_t i = 0; i < 16; ++i) {
                const int p = table[i].get<int>();
                if (p < 0 || p > 15)
                    throw ConfigError("mult2x2 module '" + name + "': product out of 4-bit range");
                spec.table[i] = static_cast<std::uint8_t>(p);
            }
            lib.add(MultModule{std::move(spec), cost_from_json(m.at("cost"), name)});
        } else {
            throw ConfigError("module '" + name + "': unknown kind '" + kind + "' (expected fa|mult2x2)");
        }
    }
    lib.validate();
    return lib;
} catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("module library: ") + e.what());
}

inline nlohmann::json ModuleLibrary::to_json() const {
    nlohmann::json mods = nlohmann::json::array();
    for (const auto& m : adders_) {
        nlohmann::json rows = nlohmann::json::array();
        for (auto e : m.spec.table) rows.push_back({e & 1, (e >> 1) & 1});
        mods.push_back({{"name", m.spec.name}, {"kind", "fa"}, {"table", rows}, {"cost", apxsig::to_json(m.cost)}});
    }
    for (const auto& m : mults_) {
        nlohmann::json prods = nlohmann::json::array();
        for (auto e : m.spec.table) prods.push_back(static_cast<int>(e));
        mods.push_back({{"name", m.spec.name}, {"kind", "mult2x2"}, {"table", prods}, {"cost", apxsig::to_json(m.cost)}});
    }
    return {{"modules", mods}};
}

} // namespace apxsig
