#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "subsel/core.hpp"
#include "subsel/generators.hpp"
#include "subsel/hte.hpp"
#include "subsel/select.hpp"

namespace subsel {

enum class DataFormat { CSV, JSON };

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view tok, const char* what) {
    double v;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw io_error(std::string("malformed row: bad ") + what + " value '" +
                       std::string(tok) + "'");
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline Dataset load_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io_error("malformed row: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header.back() != "y")
        throw io_error("malformed row: header must be x1,...,xd,y");
    const int d = static_cast<int>(header.size()) - 1;
    for (int j = 0; j < d; ++j)
        if (header[j] != "x" + std::to_string(j + 1))
            throw io_error("malformed row: header must be x1,...,xd,y");

    std::vector<double> xs;
    std::vector<double> ys;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto toks = detail::split_csv_line(line);
        if (static_cast<int>(toks.size()) != d + 1)
            throw io_error("inconsistent dimension: expected " +
                           std::to_string(d + 1) + " columns, got " +
                           std::to_string(toks.size()));
        for (int j = 0; j < d; ++j) xs.push_back(detail::parse_double(toks[j], "covariate"));
        const double y = detail::parse_double(toks.back(), "response");
        if (!(y >= 0.0 && y <= 1.0)) throw io_error("response out of range [0,1]");
        ys.push_back(y);
    }
    return Dataset(d, std::move(xs), std::move(ys));
}

inline Dataset load_dataset_json(std::istream& in) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("malformed row: ") + e.what());
    }
    if (!doc.is_array() || doc.empty())
        throw io_error("malformed row: expected a non-empty JSON array");
    std::vector<double> xs;
    std::vector<double> ys;
    int d = -1;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("x") || !item.contains("y") ||
            !item["x"].is_array())
            throw io_error("malformed row: each entry needs x (array) and y");
        if (d < 0) d = static_cast<int>(item["x"].size());
        if (static_cast<int>(item["x"].size()) != d)
            throw io_error("inconsistent dimension across rows");
        for (const auto& v : item["x"]) xs.push_back(v.get<double>());
        const double y = item["y"].get<double>();
        if (!(y >= 0.0 && y <= 1.0)) throw io_error("response out of range [0,1]");
        ys.push_back(y);
    }
    return Dataset(d, std::move(xs), std::move(ys));
}

inline Dataset load_dataset(const std::string& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    return format == DataFormat::CSV ? load_dataset_csv(in) : load_dataset_json(in);
}

inline void save_dataset_csv(const Dataset& data, std::ostream& out) {
    for (int j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto x = data.x(i);
        for (int j = 0; j < data.dim(); ++j)
            out << detail::format_double(x[j]) << ',';
        out << detail::format_double(data.y(i)) << '\n';
    }
}

inline void save_dataset_json(const Dataset& data, std::ostream& out) {
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t i = 0; i < data.n(); ++i) {
        nlohmann::json row;
        row["x"] = std::vector<double>(data.x(i).begin(), data.x(i).end());
        row["y"] = data.y(i);
        doc.push_back(std::move(row));
    }
    out << doc.dump(2) << '\n';
}

inline nlohmann::ordered_json cube_to_json(const HyperCube& c) {
    nlohmann::ordered_json j;
    j["family"] = c.family == CubeFamily::H ? "H" : "Hplus";
    j["q"] = c.q;
    j["a"] = c.a;
    return j;
}

inline nlohmann::ordered_json result_to_json(const SelectionResult& r) {
    nlohmann::ordered_json j;
    j["ell_alpha"] = r.ell_alpha;
    j["cubes"] = nlohmann::ordered_json::array();
    for (const auto& c : r.selected_cubes) j["cubes"].push_back(cube_to_json(c));
    if (r.a_hat.is_empty()) {
        j["a_hat"] = nullptr;
    } else {
        nlohmann::ordered_json rect;
        rect["lower"] = r.a_hat.lower();
        rect["upper"] = r.a_hat.upper();
        j["a_hat"] = std::move(rect);
    }
    j["empirical_measure"] = r.empirical_measure;
    return j;
}

// Triples CSV with header x1,...,xd,t,y.
inline HTEDataset load_hte_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io_error("malformed row: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[header.size() - 2] != "t" || header.back() != "y")
        throw io_error("malformed row: header must be x1,...,xd,t,y");
    const int d = static_cast<int>(header.size()) - 2;
    for (int j = 0; j < d; ++j)
        if (header[j] != "x" + std::to_string(j + 1))
            throw io_error("malformed row: header must be x1,...,xd,t,y");

    std::vector<double> xs, ys;
    std::vector<int> ts;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto toks = detail::split_csv_line(line);
        if (static_cast<int>(toks.size()) != d + 2)
            throw io_error("inconsistent dimension: expected " +
                           std::to_string(d + 2) + " columns, got " +
                           std::to_string(toks.size()));
        for (int j = 0; j < d; ++j) xs.push_back(detail::parse_double(toks[j], "covariate"));
        const double t = detail::parse_double(toks[d], "treatment");
        if (t != 0.0 && t != 1.0) throw io_error("treatment indicator must be 0 or 1");
        ts.push_back(static_cast<int>(t));
        const double y = detail::parse_double(toks.back(), "response");
        if (!(y >= 0.0 && y <= 1.0)) throw io_error("response out of range [0,1]");
        ys.push_back(y);
    }
    return HTEDataset(d, std::move(xs), std::move(ts), std::move(ys));
}

inline HTEDataset load_hte_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    return load_hte_csv(in);
}

inline nlohmann::ordered_json spec_to_json(const GeneratorSpec& spec) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json params;
    if (const auto* p = std::get_if<Example1Params>(&spec.kind)) {
        j["kind"] = "example1";
        params["nu"] = p->nu;
        params["tau"] = p->tau;
    } else if (const auto* p = std::get_if<Example2Params>(&spec.kind)) {
        j["kind"] = "example2";
        params["epsilon"] = p->epsilon;
        params["delta"] = p->delta;
        params["gamma"] = p->gamma;
        params["c"] = p->c;
        params["tau"] = p->tau;
        params["d"] = p->d;
    } else if (const auto* p = std::get_if<Example3Params>(&spec.kind)) {
        j["kind"] = "example3";
        params["kappa"] = p->kappa;
        params["gamma"] = p->gamma;
        params["tau"] = p->tau;
        params["c_s"] = p->c_s;
        params["d"] = p->d;
    } else if (const auto* p = std::get_if<FanoParams>(&spec.kind)) {
        j["kind"] = "fano";
        params["L"] = p->L;
        params["r"] = p->r;
        params["w"] = p->w;
        params["s"] = p->s;
        params["theta"] = p->theta;
        params["ell"] = p->ell;
        params["tau"] = p->tau;
        params["d"] = p->d;
        params["epsilon0"] = p->epsilon0;
    } else {
        const auto& pp = std::get<ParametricParams>(spec.kind);
        j["kind"] = "parametric";
        params["t"] = pp.t;
        params["theta"] = pp.theta;
        params["s"] = pp.s;
        params["zeta"] = pp.zeta;
        params["ell"] = pp.ell;
        params["tau"] = pp.tau;
        params["d"] = pp.d;
        params["epsilon0"] = pp.epsilon0;
    }
    j["params"] = std::move(params);
    j["seed"] = spec.seed;
    return j;
}

inline GeneratorSpec spec_from_json(const nlohmann::json& j) {
    GeneratorSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    const auto& p = j.at("params");
    auto get = [&](const char* key) { return p.at(key).get<double>(); };
    auto get_or = [&](const char* key, double fallback) {
        return p.contains(key) ? p.at(key).get<double>() : fallback;
    };
    if (kind == "example1") {
        spec.kind = Example1Params{get("nu"), get("tau")};
    } else if (kind == "example2") {
        spec.kind = Example2Params{get("epsilon"), get("delta"), get("gamma"),
                                   get("c"), get("tau"), p.at("d").get<int>()};
    } else if (kind == "example3") {
        spec.kind = Example3Params{get("kappa"), get("gamma"), get("tau"),
                                   get("c_s"), p.at("d").get<int>()};
    } else if (kind == "fano") {
        spec.kind = FanoParams{p.at("L").get<int>(), get("r"),       get("w"),
                               get("s"),             get("theta"),   p.at("ell").get<int>(),
                               get("tau"),           p.at("d").get<int>(),
                               get_or("epsilon0", 0.2)};
    } else if (kind == "parametric") {
        spec.kind = ParametricParams{get("t"),   get("theta"), get("s"),
                                     get("zeta"), p.at("ell").get<int>(),
                                     get("tau"),  p.at("d").get<int>(),
                                     get_or("epsilon0", 0.2)};
    } else {
        throw io_error("unknown generator kind '" + kind + "'");
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    validate_spec(spec);
    return spec;
}

} // namespace subsel
