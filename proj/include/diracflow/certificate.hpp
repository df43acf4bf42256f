#pragma once

#include <string>
#include <utility>
#include <vector>

#include "diracflow/jsonio.hpp"

namespace diracflow {

// One recorded inequality lhs (<|<=) rhs. Certificates are conjunctions of
// these over stored constants, so a verdict can be re-verified without
// recomputing anything heavy.
struct Inequality {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool strict = true;

    bool holds() const { return strict ? lhs < rhs : lhs <= rhs; }
};

struct Certificate {
    std::string statement;  // locus | count_upper | count_lower | window_bound |
                            // tail_bound | sign | transversality |
                            // spectral_largeness | piercing
    bool verdict = false;
    std::vector<std::pair<double, double>> intervals;  // tau intervals involved
    std::vector<std::pair<std::string, double>> constants;
    std::vector<Inequality> inequalities;
    json provenance;  // spectrum checksum, tf ids, cutoff, grid, spin-c, ...

    void add_constant(const std::string& name, double v) {
        constants.emplace_back(name, v);
    }

    void require(const std::string& name, double lhs, double rhs,
                 bool strict = true) {
        inequalities.push_back(Inequality{name, lhs, rhs, strict});
    }

    // verdict is the conjunction of the recorded inequalities
    void settle() {
        verdict = true;
        for (const auto& iq : inequalities) verdict = verdict && iq.holds();
    }

    bool replay() const {
        bool all = true;
        for (const auto& iq : inequalities) all = all && iq.holds();
        return all == verdict;
    }

    double constant(const std::string& name) const {
        for (const auto& [k, v] : constants) {
            if (k == name) return v;
        }
        throw std::runtime_error("certificate has no constant '" + name + "'");
    }

    json to_json() const {
        json ineqs = json::array();
        for (const auto& iq : inequalities) {
            ineqs.push_back(json{{"name", iq.name},
                                 {"lhs", fmt_real(iq.lhs)},
                                 {"rhs", fmt_real(iq.rhs)},
                                 {"strict", iq.strict}});
        }
        json consts = json::object();
        for (const auto& [k, v] : constants) consts[k] = fmt_real(v);
        json ivals = json::array();
        for (const auto& [lo, hi] : intervals) {
            ivals.push_back(json::array({fmt_real(lo), fmt_real(hi)}));
        }
        return json{{"statement", statement}, {"verdict", verdict},
                    {"intervals", ivals},     {"constants", consts},
                    {"inequalities", ineqs},  {"provenance", provenance}};
    }

    static Certificate from_json(const json& j) {
        Certificate c;
        c.statement = j.at("statement").get<std::string>();
        c.verdict = j.at("verdict").get<bool>();
        for (const auto& iv : j.at("intervals")) {
            c.intervals.emplace_back(parse_real(iv.at(0), "interval lo"),
                                     parse_real(iv.at(1), "interval hi"));
        }
        for (const auto& [k, v] : j.at("constants").items()) {
            c.constants.emplace_back(k, parse_real(v, k.c_str()));
        }
        for (const auto& iq : j.at("inequalities")) {
            c.inequalities.push_back(Inequality{
                iq.at("name").get<std::string>(), parse_real(iq.at("lhs"), "lhs"),
                parse_real(iq.at("rhs"), "rhs"), iq.at("strict").get<bool>()});
        }
        c.provenance = j.value("provenance", json::object());
        return c;
    }
};

}  // namespace diracflow
