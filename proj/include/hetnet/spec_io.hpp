#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetnet/error.hpp"
#include "hetnet/integrator.hpp"
#include "hetnet/network.hpp"
#include "hetnet/vector_field.hpp"

namespace hetnet {

using json = nlohmann::ordered_json;

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SpecError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

namespace detail {

template <class T>
T get_as(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw SpecError(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SpecError(where + ": key '" + key + "' has the wrong type");
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    return get_as<T>(j, key, where);
}

}  // namespace detail

struct FieldSpec {
    std::string name;
    std::string builtin;  // kirk_silber, product_homoclinic or polynomial
    json params = json::object();
};

struct NetworkSpec {
    HeteroclinicNetwork network;
    std::vector<CycleCoding> codings;
    std::vector<FieldSpec> fields;
};

inline NetworkSpec parse_network_spec(const json& j) {
    if (!j.is_object()) throw SpecError("network spec: top level must be an object");
    const auto dim = detail::get_as<std::size_t>(j, "ambient_dim", "network spec");
    std::vector<Equilibrium> eqs;
    for (const auto& e : detail::get_as<json>(j, "equilibria", "network spec")) {
        const std::string where = "equilibrium " + e.value("id", json(nullptr)).dump();
        eqs.push_back({detail::get_as<int>(e, "id", where), detail::get_as<State>(e, "position", where),
                       detail::get_or<std::string>(e, "name", "", where)});
    }
    std::vector<Connection> conns;
    for (const auto& c : detail::get_as<json>(j, "connections", "network spec")) {
        const std::string where = "connection " + c.value("id", json(nullptr)).dump();
        conns.push_back({detail::get_as<int>(c, "id", where), detail::get_as<int>(c, "source", where), detail::get_as<int>(c, "target", where),
                         detail::get_as<State>(c, "witness", where)});
    }
    NetworkSpec out{HeteroclinicNetwork(dim, std::move(eqs), std::move(conns)), {}, {}};
    if (j.contains("codings")) {
        for (const auto& c : j.at("codings")) {
            std::optional<Symbol> anchor;
            if (c.contains("anchor") && !c.at("anchor").is_null()) anchor = detail::get_as<int>(c, "anchor", "coding");
            CycleCoding coding(anchor, detail::get_as<std::map<std::string, Word>>(c, "symbols", "coding"));
            coding.check_against(out.network);
            out.codings.push_back(std::move(coding));
        }
    }
    if (j.contains("fields")) {
        for (const auto& f : j.at("fields")) {
            FieldSpec fs;
            fs.name = detail::get_as<std::string>(f, "name", "field");
            if (f.contains("builtin")) {
                fs.builtin = detail::get_as<std::string>(f, "builtin", "field " + fs.name);
                fs.params = f.value("params", json::object());
            } else if (f.contains("polynomial")) {
                fs.builtin = "polynomial";
                fs.params = f.at("polynomial");
            } else {
                throw SpecError("field " + fs.name + ": needs 'builtin' or 'polynomial'");
            }
            out.fields.push_back(std::move(fs));
        }
    }
    return out;
}

inline NetworkSpec load_network_spec(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    try {
        return parse_network_spec(j);
    } catch (const SpecError& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
}

inline json to_json(const HeteroclinicNetwork& net) {
    json j;
    j["ambient_dim"] = net.dim();
    j["equilibria"] = json::array();
    for (const auto& e : net.equilibria()) j["equilibria"].push_back({{"id", e.id}, {"position", e.position}, {"name", e.name}});
    j["connections"] = json::array();
    for (const auto& c : net.connections())
        j["connections"].push_back({{"id", c.id}, {"source", c.source}, {"target", c.target}, {"witness", c.witness}});
    return j;
}

// `overrides` is merged over the spec's params (flat keys).
inline VectorField build_field(const FieldSpec& fs, const json& overrides = json::object()) {
    json p = fs.params;
    for (const auto& [k, v] : overrides.items()) p[k] = v;
    const std::string where = "field " + fs.name;
    if (fs.builtin == "kirk_silber") {
        const Matrix4 a = detail::get_or<Matrix4>(p, "a", kirk_silber_default_coefficients(), where);
        return kirk_silber(a);
    }
    if (fs.builtin == "product_homoclinic") {
        ProductHomoclinicParams q;
        q.c_A = detail::get_or(p, "c_A", q.c_A, where);
        q.e_A = detail::get_or(p, "e_A", q.e_A, where);
        q.c_B = detail::get_or(p, "c_B", q.c_B, where);
        q.e_B = detail::get_or(p, "e_B", q.e_B, where);
        q.alpha_A = detail::get_or(p, "alpha_A", q.alpha_A, where);
        q.alpha_B = detail::get_or(p, "alpha_B", q.alpha_B, where);
        return product_homoclinic(q);
    }
    if (fs.builtin == "polynomial") {
        const auto dim = detail::get_as<std::size_t>(p, "dim", where);
        std::vector<Monomial> terms;
        for (const auto& t : detail::get_as<json>(p, "terms", where)) {
            const auto comp = detail::get_as<std::size_t>(t, "component", where);
            if (comp == 0) throw SpecError(where + ": term components are 1-based");
            terms.push_back({comp - 1, detail::get_as<double>(t, "coeff", where), detail::get_as<std::vector<unsigned>>(t, "powers", where)});
        }
        VectorField f = polynomial_field(dim, std::move(terms), fs.name);
        if (p.contains("equilibria")) {
            f.known_equilibria = detail::get_as<std::vector<State>>(p, "equilibria", where);
            check_known_equilibria(f);
        }
        return f;
    }
    throw SpecError(where + ": unknown builtin '" + fs.builtin + "'");
}

inline const FieldSpec& find_field(const NetworkSpec& spec, const std::string& name) {
    if (spec.fields.empty()) throw SpecError("network spec defines no fields");
    if (name.empty()) return spec.fields.front();
    for (const auto& f : spec.fields)
        if (f.name == name) return f;
    throw SpecError("network spec has no field named '" + name + "'");
}

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& rec) {
    out << "t";
    for (std::size_t k = 0; k < rec.dim; ++k) out << ",x" << k + 1;
    out << '\n';
    for (std::size_t i = 0; i < rec.size(); ++i) {
        out << format_double(rec.times[i]);
        for (double v : rec.state(i)) out << ',' << format_double(v);
        out << '\n';
    }
}

inline json events_json(const TrajectoryRecord& rec, const ProbeSet* probes) {
    json arr = json::array();
    for (const auto& e : rec.events) {
        json ev = {{"t", e.t}, {"kind", to_string(e.kind)}};
        if (probes && e.kind != EventKind::enter_tube && e.kind != EventKind::exit_tube) ev["label"] = e.label;
        arr.push_back(std::move(ev));
    }
    return arr;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace hetnet
