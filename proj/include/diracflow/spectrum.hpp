#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "diracflow/jsonio.hpp"

namespace diracflow {

constexpr double two_pi = 6.283185307179586476925286766559;

// One closed geodesic of the spin-refined length spectrum. Angles are the
// rotation angle of the geodesic and of its fixed lift, with
// holonomy = 2 * spin_holonomy mod 2pi.
struct GeodesicRecord {
    double length = 0.0;         // l
    double prime_length = 0.0;   // l0 of the underlying prime geodesic
    double holonomy = 0.0;       // theta in [0, 2pi)
    double spin_holonomy = 0.0;  // theta~ in [0, 2pi)
    std::int64_t free_class = 0;
    int torsion_class = 0;       // in [0, torsion_order)

    auto key() const {
        return std::make_tuple(length, prime_length, holonomy, spin_holonomy,
                               free_class, torsion_class);
    }
};

// Character-independent weight l0 / (|1-e^{Cl}| |1-e^{-Cl}|). The product of
// the two moduli equals 2|cosh(Cl) - 1|, which is free of the cancellation
// the literal form has for short geodesics.
inline double geodesic_weight(const GeodesicRecord& g) {
    const double re = std::cosh(g.length) * std::cos(g.holonomy) - 1.0;
    const double im = std::sinh(g.length) * std::sin(g.holonomy);
    return g.prime_length / (2.0 * std::hypot(re, im));
}

inline void validate_record(const GeodesicRecord& g, int torsion_order,
                            std::size_t index) {
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("geodesic record " + std::to_string(index) +
                                 ": " + msg);
    };
    if (!(g.prime_length > 0.0)) fail("prime length must be positive");
    if (!(g.length >= g.prime_length - 1e-12)) fail("length below prime length");
    const double ratio = g.length / g.prime_length;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        fail("length is not an integer multiple of the prime length");
    }
    if (g.holonomy < 0.0 || g.holonomy >= two_pi) fail("holonomy out of [0,2pi)");
    if (g.spin_holonomy < 0.0 || g.spin_holonomy >= two_pi) {
        fail("spin holonomy out of [0,2pi)");
    }
    double diff = std::fmod(2.0 * g.spin_holonomy - g.holonomy, two_pi);
    if (diff < 0.0) diff += two_pi;
    if (std::min(diff, two_pi - diff) > 1e-9) {
        fail("holonomy is not the double of the spin holonomy mod 2pi");
    }
    if (g.torsion_class < 0 || g.torsion_class >= torsion_order) {
        fail("torsion class out of range");
    }
    if (!(geodesic_weight(g) > 0.0) || !std::isfinite(geodesic_weight(g))) {
        fail("degenerate weight denominator");
    }
}

struct ManifoldData {
    std::string name;
    double volume = 0.0;
    int b1 = 0;
    int torsion_order = 1;  // m, torsion subgroup assumed cyclic Z/m
    double cutoff = 0.0;    // R
    std::optional<double> c_y_upper;
    std::vector<GeodesicRecord> geodesics;  // sorted canonically
    std::string checksum;                   // of the source file
};

inline void sort_canonical(std::vector<GeodesicRecord>& v) {
    std::sort(v.begin(), v.end(),
              [](const GeodesicRecord& a, const GeodesicRecord& b) {
                  return a.key() < b.key();
              });
}

// All k-fold multiples of the given prime geodesics with length <= R.
// The spin angle of a power is k times the spin angle mod 2pi (composition
// in the double cover adds lifted angles).
inline std::vector<GeodesicRecord> expand_primes(
    const std::vector<GeodesicRecord>& primes, double cutoff, int torsion_order) {
    std::vector<GeodesicRecord> out;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const GeodesicRecord& p = primes[i];
        if (std::abs(p.length - p.prime_length) > 1e-12) {
            throw std::runtime_error("expand_primes: record " + std::to_string(i) +
                                     " is not prime");
        }
        const int kmax = static_cast<int>(std::floor(cutoff / p.prime_length + 1e-9));
        for (int k = 1; k <= kmax; ++k) {
            GeodesicRecord g;
            g.prime_length = p.prime_length;
            g.length = k * p.prime_length;
            g.holonomy = std::fmod(k * p.holonomy, two_pi);
            g.spin_holonomy = std::fmod(k * p.spin_holonomy, two_pi);
            g.free_class = k * p.free_class;
            g.torsion_class =
                static_cast<int>((static_cast<std::int64_t>(k) * p.torsion_class) %
                                 torsion_order);
            out.push_back(g);
        }
    }
    sort_canonical(out);
    return out;
}

namespace detail {

inline GeodesicRecord record_from_json(const json& j) {
    GeodesicRecord g;
    g.length = parse_real(j.at("l"), "l");
    g.prime_length = parse_real(j.at("l0"), "l0");
    g.holonomy = parse_real(j.at("theta"), "theta");
    g.spin_holonomy = parse_real(j.at("spin_theta"), "spin_theta");
    g.free_class = j.at("free_class").get<std::int64_t>();
    g.torsion_class = j.at("torsion_class").get<int>();
    return g;
}

inline json record_to_json(const GeodesicRecord& g) {
    return json{{"l", fmt_real(g.length)},
                {"l0", fmt_real(g.prime_length)},
                {"theta", fmt_real(g.holonomy)},
                {"spin_theta", fmt_real(g.spin_holonomy)},
                {"free_class", g.free_class},
                {"torsion_class", g.torsion_class}};
}

}  // namespace detail

// Loads and validates a spectrum file. The sidecar checksum file
// (<path>.checksum, written by `ingest`) is required so certificates can
// pin their provenance.
inline ManifoldData load_spectrum(const std::string& path) {
    const std::string bytes = read_file(path);
    const std::string digest = fnv1a64_hex(bytes);

    std::string sidecar;
    try {
        sidecar = read_file(path + ".checksum");
    } catch (const std::exception&) {
        throw std::runtime_error(
            "missing checksum sidecar for " + path +
            " (run `ingest` to create " + path + ".checksum)");
    }
    const std::string expected = "fnv1a64:" + digest;
    if (sidecar.substr(0, expected.size()) != expected) {
        throw std::runtime_error("checksum mismatch for " + path);
    }

    json j = json::parse(bytes);
    ManifoldData data;
    data.name = j.at("name").get<std::string>();
    data.volume = parse_real(j.at("volume"), "volume");
    data.b1 = j.at("b1").get<int>();
    data.torsion_order = j.at("torsion_order").get<int>();
    data.cutoff = parse_real(j.at("cutoff_R"), "cutoff_R");
    if (j.contains("c_y_upper") && !j.at("c_y_upper").is_null()) {
        data.c_y_upper = parse_real(j.at("c_y_upper"), "c_y_upper");
    }
    data.checksum = digest;

    if (!(data.volume > 0.0)) throw std::runtime_error("volume must be positive");
    if (data.torsion_order < 1) throw std::runtime_error("torsion order must be >= 1");
    if (!(data.cutoff > 0.0)) throw std::runtime_error("cutoff must be positive");
    if (j.contains("torsion_structure") && j.at("torsion_structure").size() > 1) {
        throw std::runtime_error(
            "unsupported input: torsion subgroup is not cyclic");
    }

    // Explicit geodesic lists are authoritative; a primes-only file is
    // expanded up to the cutoff.
    if (j.contains("geodesics")) {
        for (const auto& rec : j.at("geodesics")) {
            data.geodesics.push_back(detail::record_from_json(rec));
        }
    } else if (j.contains("primes")) {
        std::vector<GeodesicRecord> primes;
        for (const auto& rec : j.at("primes")) {
            primes.push_back(detail::record_from_json(rec));
        }
        data.geodesics = expand_primes(primes, data.cutoff, data.torsion_order);
    } else {
        throw std::runtime_error("spectrum file has neither geodesics nor primes");
    }

    for (std::size_t i = 0; i < data.geodesics.size(); ++i) {
        validate_record(data.geodesics[i], data.torsion_order, i);
        if (data.geodesics[i].length > data.cutoff + 1e-9) {
            throw std::runtime_error("geodesic record " + std::to_string(i) +
                                     ": length exceeds the cutoff");
        }
    }
    sort_canonical(data.geodesics);
    for (std::size_t i = 0; i + 1 < data.geodesics.size(); ++i) {
        if (data.geodesics[i].key() == data.geodesics[i + 1].key()) {
            throw std::runtime_error("duplicate geodesic record at sorted index " +
                                     std::to_string(i));
        }
    }
    return data;
}

inline json spectrum_to_json(const ManifoldData& data) {
    json j;
    j["name"] = data.name;
    j["volume"] = fmt_real(data.volume);
    j["b1"] = data.b1;
    j["torsion_order"] = data.torsion_order;
    j["cutoff_R"] = fmt_real(data.cutoff);
    if (data.c_y_upper) j["c_y_upper"] = fmt_real(*data.c_y_upper);
    json recs = json::array();
    for (const auto& g : data.geodesics) recs.push_back(detail::record_to_json(g));
    j["geodesics"] = std::move(recs);
    return j;
}

// Writes the spectrum plus its checksum sidecar.
inline void save_spectrum(const ManifoldData& data, const std::string& path) {
    const std::string bytes = spectrum_to_json(data).dump(1);
    write_file(path, bytes);
    write_file(path + ".checksum", "fnv1a64:" + fnv1a64_hex(bytes) + "\n");
}

inline void write_checksum_sidecar(const std::string& path) {
    write_file(path + ".checksum", "fnv1a64:" + fnv1a64_hex(read_file(path)) + "\n");
}

}  // namespace diracflow
