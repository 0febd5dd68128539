#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aniso/atoms.hpp"
#include "aniso/exponents.hpp"
#include "aniso/kernel.hpp"
#include "aniso/mihlin.hpp"
#include "aniso/operator.hpp"
#include "aniso/quasinorm.hpp"

namespace aniso {

using json = nlohmann::ordered_json;

inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

inline Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidArgument, "matrix must be a nonempty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    if (n > 3) throw Error(ErrorCode::Unsupported, "dimension must be 1, 2 or 3");
    Mat m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw Error(ErrorCode::InvalidArgument, "matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

inline json vec_to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Vec vec_from_json(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

inline json index_to_json(const MultiIndex& b) {
    json a = json::array();
    for (int i = 0; i < b.n; ++i) a.push_back(b.e[i]);
    return a;
}

inline std::string index_label(const MultiIndex& b) {
    std::string s;
    for (int i = 0; i < b.n; ++i) s += (i ? "," : "") + std::to_string(b.e[i]);
    return "(" + s + ")";
}

inline json to_json(const Dilation& d) {
    return {{"matrix", matrix_to_json(d.matrix())}, {"lambda_minus", d.lambda_minus()}, {"lambda_plus", d.lambda_plus()}};
}

/// Margins are optional in the input; the defaults of Dilation apply when absent.
inline Dilation dilation_from_json(const json& j) {
    Mat m = matrix_from_json(j.at("matrix"));
    if (j.contains("lambda_minus") != j.contains("lambda_plus"))
        throw Error(ErrorCode::BadMargins, "give both margins or neither");
    if (j.contains("lambda_minus"))
        return Dilation(m, Margins{j["lambda_minus"].get<double>(), j["lambda_plus"].get<double>()});
    return Dilation(m);
}

inline json to_json(const EllipsoidFamily& f) {
    return {{"P", matrix_to_json(f.shape())}, {"kappa", f.kappa()}, {"r", f.r()}};
}

inline json to_json(const Interval& i) {
    return {{"lower", i.lower}, {"upper", i.upper}, {"lower_open", i.lower_open}, {"upper_open", i.upper_open}};
}

inline json to_json(const MultiplierBudget& b) {
    return {{"N", b.N},
            {"L", b.L},
            {"floorL", b.floorL},
            {"p_low", b.p_low},
            {"p_range", to_json(Interval{b.p_low, 1.0, true, false})},
            {"tightened", b.tightened},
            {"L_tightened", b.L_tightened},
            {"margins_used", {b.margins_used.lower, b.margins_used.upper}}};
}

inline json to_json(const MihlinReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) cells.push_back({{"j", c.j}, {"beta", index_to_json(c.beta)}, {"sup", c.sup}});
    return {{"N", r.N},
            {"j_range", {r.j_lo, r.j_hi}},
            {"samples_per_shell", r.samples_per_shell},
            {"fd_policy", r.fd_policy},
            {"constant", r.constant},
            {"cells", cells}};
}

inline json to_json(const DecayReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) cells.push_back({{"k", c.k}, {"alpha", index_to_json(c.alpha)}, {"S", c.S}});
    json alphas = json::array();
    for (std::size_t i = 0; i < r.alphas.size(); ++i)
        alphas.push_back({{"alpha", index_to_json(r.alphas[i])}, {"pass", i < r.alpha_pass.size() && r.alpha_pass[i]}});
    json rem = json::array();
    for (const auto& [i, v] : r.partition_remainder) rem.push_back({{"shell", i}, {"remainder", v}});
    json out = {{"J", r.J},
                {"samples", r.samples},
                {"constant", r.constant},
                {"alphas", alphas},
                {"R_bound", r.r_range.bound},
                {"R_max", r.r_range.empty ? json(nullptr) : json(r.r_range.r_max)},
                {"consistent", r.consistent},
                {"cells", cells},
                {"partition_remainder", rem}};
    out["fitted_order"] = r.fitted_order < 0 ? json(nullptr) : json(r.fitted_order);
    return out;
}

inline json to_json(const AtomCheck& c) {
    return {{"valid", c.valid},
            {"outside_mass", c.outside_mass},
            {"size", c.size},
            {"size_bound", c.size_bound},
            {"max_moment_residual", c.max_moment_residual},
            {"moment_tolerance", c.moment_tolerance}};
}

inline json to_json(const AtomicDecomposition& d) {
    json terms = json::array();
    for (const auto& t : d.terms) terms.push_back({{"scale", t.scale}, {"mu", t.mu}, {"check", to_json(t.check)}});
    return {{"normalization", d.normalization},
            {"sigma", d.sigma},
            {"k", d.k_start},
            {"r", d.r},
            {"C0", d.C0},
            {"measured_C", d.measured_C},
            {"coeff_sum", d.coeff_sum},
            {"bound", d.bound},
            {"drop_threshold", d.drop_threshold},
            {"dropped_terms", d.dropped_terms},
            {"unresolved_scales", d.unresolved_scales},
            {"all_atoms_valid", d.all_atoms_valid},
            {"reconstruction_error", d.reconstruction_error_L1},
            {"projection_l1", d.projection_l1},
            {"terms", terms}};
}

inline json to_json(const UniformBoundReport& r) {
    json rows = json::array();
    for (const auto& w : r.rows)
        rows.push_back({{"id", w.id},
                        {"j", w.j},
                        {"center", vec_to_json(w.center)},
                        {"N", w.N},
                        {"lq", w.lq},
                        {"weighted", w.weighted},
                        {"tail_fraction", w.tail_fraction},
                        {"moment_residual", w.moment_residual}});
    return {{"max", r.max_over_atoms},
            {"median", r.median},
            {"pass", r.pass},
            {"max_moment_residual", r.max_moment_residual},
            {"rows", rows}};
}

inline json to_json(const Grid& g) { return {{"n", g.n}, {"points", g.points}, {"extent", g.extent}}; }

inline Grid grid_from_json(const json& j) {
    Grid g{j.at("n").get<int>(), j.at("points").get<int>(), j.at("extent").get<double>()};
    return g;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    os << text;
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoError, path.string() + ": " + e.what());
    }
}

/// A CSV table. Numbers are written with round-trip precision.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... T>
    void row(const T&... cells) {
        std::ostringstream os;
        os.precision(17);
        bool first = true;
        ((os << (first ? "" : ",") << cells, first = false), ...);
        rows_.push_back(os.str());
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
        out += "\n";
        for (const auto& r : rows_) out += r + "\n";
        return out;
    }

    void write(const std::filesystem::path& path) const { write_text(path, str()); }

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

/// Fields are stored as little-endian float64 (re, im) pairs in row-major
/// order, with a JSON sidecar carrying the grid and the domain tag.
inline void write_field(const std::filesystem::path& bin, const SampledField& f) {
    static_assert(std::endian::native == std::endian::little, "field files are little-endian");
    if (bin.has_parent_path()) std::filesystem::create_directories(bin.parent_path());
    std::ofstream os(bin, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + bin.string());
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
    json side = {{"grid", to_json(f.grid)}, {"domain", f.domain == Domain::Spatial ? "spatial" : "frequency"}};
    write_json(std::filesystem::path(bin.string() + ".json"), side);
}

inline SampledField read_field(const std::filesystem::path& bin) {
    const json side = read_json(std::filesystem::path(bin.string() + ".json"));
    SampledField f(grid_from_json(side.at("grid")), side.value("domain", "spatial") == "frequency" ? Domain::Frequency : Domain::Spatial);
    std::ifstream is(bin, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoError, "cannot read " + bin.string());
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
    if (is.gcount() != static_cast<std::streamsize>(f.values.size() * sizeof(cplx)))
        throw Error(ErrorCode::IoError, bin.string() + " is shorter than its grid");
    return f;
}

} // namespace aniso
