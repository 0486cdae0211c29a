// Versioned JSON persistence for MPS states and ground-state results.
//
//   {"version": 1, "chi": 2, "n_sites": 3, "field": "real",
//    "S": [S1, S2], "X": [X1, X2, X3]}
//
// Every matrix is a list of rows. Complex entries are [re, im] pairs. Doubles
// are written with shortest round-trip precision, so load(save(x)) == x bitwise.

#pragma once

#include "softmps/linalg.hpp"
#include "softmps/mps_state.hpp"
#include "softmps/optimizer.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace softmps::io {

using json = nlohmann::json;

inline constexpr int kStateVersion = 1;

namespace detail {

template <class T>
json matrix_to_json(const Mat<T>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if constexpr (is_complex_v<T>)
                row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
            else
                row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

[[noreturn]] inline void malformed(const std::string& what) { throw Error("malformed_document", what); }

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) malformed(where + ": expected a number");
    return v.get<double>();
}

template <class T>
Mat<T> matrix_from_json(const json& j, int chi, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != chi) malformed(where + ": expected " + std::to_string(chi) + " rows");
    Mat<T> m(chi, chi);
    for (int r = 0; r < chi; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != chi)
            malformed(where + ": row " + std::to_string(r) + " must have " + std::to_string(chi) + " entries");
        for (int c = 0; c < chi; ++c) {
            const json& e = row[c];
            if constexpr (is_complex_v<T>) {
                if (!e.is_array() || e.size() != 2) malformed(where + ": complex entries are [re, im] pairs");
                m(r, c) = T(number(e[0], where), number(e[1], where));
            } else {
                m(r, c) = number(e, where);
            }
        }
    }
    return m;
}

inline int integer(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer()) malformed(std::string("missing integer field '") + key + "'");
    return doc[key].get<int>();
}

}  // namespace detail

template <class T>
json state_to_json(const MpsState<T>& st) {
    st.validate();
    json doc;
    doc["version"] = kStateVersion;
    doc["chi"] = st.chi;
    doc["n_sites"] = st.n_sites;
    doc["field"] = to_string(MpsState<T>::field);
    doc["S"] = json::array({detail::matrix_to_json(st.spin[0]), detail::matrix_to_json(st.spin[1])});
    json xs = json::array();
    for (const auto& x : st.modes) xs.push_back(detail::matrix_to_json(x));
    doc["X"] = std::move(xs);
    return doc;
}

template <class T>
MpsState<T> state_from_json(const json& doc) {
    if (!doc.is_object()) detail::malformed("state document must be a JSON object");
    const int version = detail::integer(doc, "version");
    if (version != kStateVersion)
        throw Error("version_mismatch", "state document has version " + std::to_string(version) + ", expected " +
                                            std::to_string(kStateVersion));
    const int chi = detail::integer(doc, "chi");
    const int n = detail::integer(doc, "n_sites");
    if (chi < 1 || n < 1) detail::malformed("chi and n_sites must be >= 1");
    if (!doc.contains("field") || !doc["field"].is_string()) detail::malformed("missing string field 'field'");
    const std::string field = doc["field"].get<std::string>();
    if (field != to_string(MpsState<T>::field))
        throw Error("field_mismatch", "state document holds a " + field + " state, requested " +
                                          to_string(MpsState<T>::field));
    if (!doc.contains("S") || !doc["S"].is_array() || doc["S"].size() != 2) detail::malformed("'S' must hold two matrices");
    if (!doc.contains("X") || !doc["X"].is_array() || static_cast<int>(doc["X"].size()) != n)
        detail::malformed("'X' must hold n_sites matrices");
    auto st = MpsState<T>::zeros(chi, n);
    for (int k = 0; k < 2; ++k) st.spin[k] = detail::matrix_from_json<T>(doc["S"][k], chi, "S[" + std::to_string(k) + "]");
    for (int m = 0; m < n; ++m)
        st.modes[m] = detail::matrix_from_json<T>(doc["X"][m], chi, "X[" + std::to_string(m) + "]");
    try {
        st.validate();
    } catch (const std::invalid_argument& e) {
        detail::malformed(e.what());
    }
    return st;
}

inline json energy_to_json(const EnergyBreakdown& e) {
    return {{"total", e.total}, {"e_loc", e.e_loc}, {"e_int", e.e_int}, {"e_chain", e.e_chain}, {"norm", e.norm}};
}

inline EnergyBreakdown energy_from_json(const json& j) {
    if (!j.is_object()) detail::malformed("'energy' must be an object");
    EnergyBreakdown e;
    auto get = [&](const char* key) {
        if (!j.contains(key)) detail::malformed(std::string("energy is missing '") + key + "'");
        return detail::number(j[key], key);
    };
    e.total = get("total");
    e.e_loc = get("e_loc");
    e.e_int = get("e_int");
    e.e_chain = get("e_chain");
    e.norm = get("norm");
    return e;
}

// The ground-state document is the state document plus a "result" block.
template <class T>
json ground_to_json(const GroundState<T>& gs) {
    json doc = state_to_json(gs.state);
    json reports = json::array();
    for (const auto& r : gs.reports) {
        reports.push_back({{"index", r.index},
                           {"warm", r.warm},
                           {"failed", r.failed},
                           {"converged", r.converged},
                           {"energy", std::isfinite(r.energy) ? json(r.energy) : json(nullptr)},
                           {"gradient_norm", std::isfinite(r.gradient_norm) ? json(r.gradient_norm) : json(nullptr)},
                           {"iterations", r.iterations},
                           {"status", r.status}});
    }
    doc["result"] = {{"energy", energy_to_json(gs.energy)},
                     {"converged", gs.converged},
                     {"iterations", gs.iterations},
                     {"restarts_used", gs.restarts_used},
                     {"best_restart", gs.best_restart},
                     {"seed", gs.seed},
                     {"restarts", std::move(reports)}};
    return doc;
}

template <class T>
GroundState<T> ground_from_json(const json& doc) {
    GroundState<T> gs;
    gs.state = state_from_json<T>(doc);
    if (!doc.contains("result") || !doc["result"].is_object()) detail::malformed("missing 'result' block");
    const json& r = doc["result"];
    try {
        gs.energy = energy_from_json(r.at("energy"));
        gs.converged = r.at("converged").get<bool>();
        gs.iterations = r.at("iterations").get<int>();
        gs.restarts_used = r.at("restarts_used").get<int>();
        gs.best_restart = r.at("best_restart").get<int>();
        gs.seed = r.at("seed").get<std::uint64_t>();
        for (const auto& rep : r.value("restarts", json::array())) {
            RestartReport rr;
            rr.index = rep.at("index").get<int>();
            rr.warm = rep.at("warm").get<bool>();
            rr.failed = rep.at("failed").get<bool>();
            rr.converged = rep.at("converged").get<bool>();
            rr.energy = rep.at("energy").is_null() ? std::numeric_limits<double>::quiet_NaN() : rep.at("energy").get<double>();
            rr.gradient_norm = rep.at("gradient_norm").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                                 : rep.at("gradient_norm").get<double>();
            rr.iterations = rep.at("iterations").get<int>();
            rr.status = rep.at("status").get<std::string>();
            gs.reports.push_back(std::move(rr));
        }
    } catch (const json::exception& e) {
        detail::malformed(std::string("result block: ") + e.what());
    }
    return gs;
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("malformed_document", path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw Error("io_error", "write failed for " + path.string());
}

template <class T>
void save_state(const std::filesystem::path& path, const MpsState<T>& st) {
    write_json(path, state_to_json(st));
}

template <class T>
MpsState<T> load_state(const std::filesystem::path& path) {
    return state_from_json<T>(read_json(path));
}

template <class T>
void save_ground(const std::filesystem::path& path, const GroundState<T>& gs) {
    write_json(path, ground_to_json(gs));
}

template <class T>
GroundState<T> load_ground(const std::filesystem::path& path) {
    return ground_from_json<T>(read_json(path));
}

}  // namespace softmps::io
