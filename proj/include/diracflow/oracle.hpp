#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "diracflow/jsonio.hpp"
#include "diracflow/spectrum.hpp"

namespace diracflow {

// One planted spectral family s_j(tau), either a polynomial in tau or a
// trigonometric branch (periodic over the circle of connections).
struct SyntheticAtom {
    enum class Kind { polynomial, trig };
    Kind kind = Kind::polynomial;
    int multiplicity = 1;
    std::vector<double> coeffs;  // polynomial: sum coeffs[i] tau^i
    double offset = 0.0;         // trig: offset + amp*cos(2pi freq tau + phase)
    double amp = 0.0;
    int freq = 1;
    double phase = 0.0;

    double value(double tau) const {
        if (kind == Kind::polynomial) {
            double v = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 0;) v = v * tau + coeffs[i];
            return v;
        }
        return offset + amp * std::cos(two_pi * freq * tau + phase);
    }

    // sup over [0,1] of |s'(tau)| for this branch alone
    double deriv_sup() const {
        if (kind == Kind::polynomial) {
            double b = 0.0;
            for (std::size_t i = 1; i < coeffs.size(); ++i) {
                b += static_cast<double>(i) * std::abs(coeffs[i]);
            }
            return b;
        }
        return std::abs(amp) * two_pi * freq;
    }

    double deriv(double tau) const {
        if (kind == Kind::polynomial) {
            double v = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 1;) v = v * tau + i * coeffs[i];
            return v;
        }
        return -amp * two_pi * freq * std::sin(two_pi * freq * tau + phase);
    }

    static SyntheticAtom constant(double s, int mult = 1) {
        SyntheticAtom a;
        a.kind = Kind::polynomial;
        a.multiplicity = mult;
        a.coeffs = {s};
        return a;
    }
};

// Planted spectrum used as the oracle: every trace-formula "geometric side"
// downstream is computed as its spectral side over these atoms, so each
// certificate can be checked against known truth.
struct SyntheticSpectrum {
    std::string name = "synthetic";
    double derivative_bound = 0.0;  // sup_j sup_tau |s_j'(tau)|
    std::vector<SyntheticAtom> atoms;
    std::string checksum;

    void validate() const {
        for (const auto& a : atoms) {
            if (a.multiplicity < 1) {
                throw std::runtime_error("synthetic atom with multiplicity < 1");
            }
            for (int i = 0; i <= 400; ++i) {
                if (std::abs(a.deriv(i / 400.0)) > derivative_bound * (1.0 + 1e-12)) {
                    throw std::runtime_error(
                        "synthetic atom violates the declared derivative bound");
                }
            }
        }
    }
};

inline json synthetic_to_json(const SyntheticSpectrum& s) {
    json atoms = json::array();
    for (const auto& a : s.atoms) {
        json ja;
        ja["mult"] = a.multiplicity;
        if (a.kind == SyntheticAtom::Kind::polynomial) {
            ja["type"] = "poly";
            json c = json::array();
            for (double v : a.coeffs) c.push_back(fmt_real(v));
            ja["coeffs"] = std::move(c);
        } else {
            ja["type"] = "trig";
            ja["offset"] = fmt_real(a.offset);
            ja["amp"] = fmt_real(a.amp);
            ja["freq"] = a.freq;
            ja["phase"] = fmt_real(a.phase);
        }
        atoms.push_back(std::move(ja));
    }
    return json{{"kind", "synthetic"},
                {"name", s.name},
                {"derivative_bound", fmt_real(s.derivative_bound)},
                {"atoms", std::move(atoms)}};
}

inline SyntheticSpectrum synthetic_from_json(const json& j) {
    SyntheticSpectrum s;
    s.name = j.at("name").get<std::string>();
    s.derivative_bound = parse_real(j.at("derivative_bound"), "derivative_bound");
    for (const auto& ja : j.at("atoms")) {
        SyntheticAtom a;
        a.multiplicity = ja.value("mult", 1);
        const std::string type = ja.at("type").get<std::string>();
        if (type == "poly") {
            a.kind = SyntheticAtom::Kind::polynomial;
            for (const auto& c : ja.at("coeffs")) {
                a.coeffs.push_back(parse_real(c, "poly coefficient"));
            }
        } else if (type == "trig") {
            a.kind = SyntheticAtom::Kind::trig;
            a.offset = parse_real(ja.at("offset"), "offset");
            a.amp = parse_real(ja.at("amp"), "amp");
            a.freq = ja.at("freq").get<int>();
            a.phase = parse_real(ja.at("phase"), "phase");
        } else {
            throw std::runtime_error("unknown synthetic atom type: " + type);
        }
        s.atoms.push_back(std::move(a));
    }
    s.validate();
    return s;
}

inline SyntheticSpectrum load_synthetic(const std::string& path) {
    const std::string bytes = read_file(path);
    SyntheticSpectrum s = synthetic_from_json(json::parse(bytes));
    s.checksum = fnv1a64_hex(bytes);
    return s;
}

inline void save_synthetic(const SyntheticSpectrum& s, const std::string& path) {
    write_file(path, synthetic_to_json(s).dump(1));
}

}  // namespace diracflow
