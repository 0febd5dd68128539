#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "aniso/aniso.hpp"

namespace fs = std::filesystem;
using namespace aniso;

namespace {

json default_config() {
    return json::parse(R"({
  "dilation": {"matrix": [[2, 0], [0, 2]], "lambda_minus": 1.9, "lambda_plus": 2.1},
  "grid": {"points": 256, "extent": 16.0},
  "exponents": {"p": 0.8, "q": 2.0, "s": "auto", "N": 4},
  "symbols": [],
  "sweep": {"j_lo": -8, "j_hi": 8, "k_lo": 1, "k_hi": 6, "J": 8, "samples": 48, "mihlin_samples": 1000},
  "molecules": 5,
  "seed": 20240611
})");
}

/// Everything a subcommand needs, checked before any compute.
struct RunConfig {
    explicit RunConfig(Dilation d) : dil(std::move(d)) {}

    json resolved;
    Dilation dil;
    Grid grid;
    AdmissibleTriple triple;
    int N = 4;
    std::vector<std::string> symbols;
    int j_lo = -8, j_hi = 8, k_lo = 1, k_hi = 6, J = 8, samples = 48, mihlin_samples = 1000;
    int molecules = 5;
    std::uint64_t seed = 0;
    fs::path out;
};

template <class T>
T field_of(const json& j, const char* section, const char* key) {
    try {
        return j.at(section).at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config ") + section + "." + key + ": " + e.what());
    }
}

RunConfig resolve(json cfg, const fs::path& out) {
    RunConfig rc(dilation_from_json(cfg.at("dilation")));
    const int n = rc.dil.dim();
    rc.grid = Grid(n, field_of<int>(cfg, "grid", "points"), field_of<double>(cfg, "grid", "extent"));
    const double p = field_of<double>(cfg, "exponents", "p");
    const double q = field_of<double>(cfg, "exponents", "q");
    const json& s = cfg["exponents"]["s"];
    const int s_val = s.is_string() && s.get<std::string>() == "auto" ? min_s(rc.dil, p) : s.get<int>();
    cfg["exponents"]["s"] = s_val;
    rc.triple = make_triple(rc.dil, p, q, s_val);
    rc.N = field_of<int>(cfg, "exponents", "N");
    if (rc.N < 1) throw Error(ErrorCode::InvalidArgument, "config exponents.N must be at least 1");

    MultiplierCatalog cat(rc.dil);
    rc.symbols = cfg.at("symbols").get<std::vector<std::string>>();
    for (const auto& name : rc.symbols) cat.get(name);
    if (rc.symbols.empty()) {
        rc.symbols = cat.names();
        cfg["symbols"] = rc.symbols;
    }

    rc.j_lo = field_of<int>(cfg, "sweep", "j_lo");
    rc.j_hi = field_of<int>(cfg, "sweep", "j_hi");
    rc.k_lo = field_of<int>(cfg, "sweep", "k_lo");
    rc.k_hi = field_of<int>(cfg, "sweep", "k_hi");
    rc.J = field_of<int>(cfg, "sweep", "J");
    rc.samples = field_of<int>(cfg, "sweep", "samples");
    rc.mihlin_samples = field_of<int>(cfg, "sweep", "mihlin_samples");
    if (rc.j_lo > rc.j_hi || rc.k_lo > rc.k_hi) throw Error(ErrorCode::InvalidArgument, "config sweep ranges are empty");
    if (rc.J < 1 || rc.samples < 1 || rc.mihlin_samples < 1) throw Error(ErrorCode::InvalidArgument, "config sweep sizes must be positive");
    rc.molecules = cfg.at("molecules").get<int>();
    if (rc.molecules < 1) throw Error(ErrorCode::InvalidArgument, "config molecules must be positive");
    rc.seed = cfg.at("seed").get<std::uint64_t>();
    rc.out = out;
    rc.resolved = cfg;
    return rc;
}

json error_json(const std::string& code, const std::string& message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

// ---- subcommands ---------------------------------------------------------

json cmd_spectrum(const RunConfig& rc) {
    const Dilation& d = rc.dil;
    StepQuasiNorm q(canonical_ellipsoids(d));
    CsvTable powers({"k", "norm_Ak", "root_norm_Ak", "root_norm_adjoint_k"});
    for (int k = 1; k <= 40; ++k) {
        const double a = op_norm(d.power(k)), b = op_norm(d.adjoint_power(k));
        powers.row(k, a, std::pow(a, 1.0 / k), std::pow(b, 1.0 / k));
    }
    powers.write(rc.out / "powers.csv");
    json r;
    r["dilation"] = to_json(d);
    r["dimension"] = d.dim();
    r["det_abs"] = d.det_abs();
    r["eigen_moduli"] = d.eig_moduli();
    r["zeta_minus"] = d.zeta_minus();
    r["zeta_plus"] = d.zeta_plus();
    r["spectral_threshold_eps_0.1"] = spectral_threshold(d, 0.1);
    r["omega"] = q.omega();
    r["doubling_constant"] = q.doubling_constant();
    return r;
}

json cmd_quasinorm_table(const RunConfig& rc) {
    StepQuasiNorm q(canonical_ellipsoids(rc.dil));
    const auto& fam = q.family();
    std::mt19937_64 rng(rc.seed);
    std::vector<Vec> pts;
    CsvTable shells({"k", "inner_radius", "outer_radius", "volume"});
    json rows = json::array();
    for (int k = rc.j_lo; k <= rc.j_hi; ++k) {
        shells.row(k, fam.inner_radius(k), fam.outer_radius(k), fam.volume(k));
        rows.push_back({{"k", k}, {"inner_radius", fam.inner_radius(k)}, {"outer_radius", fam.outer_radius(k)}, {"volume", fam.volume(k)}});
        for (int i = 0; i < 200; ++i) pts.push_back(sample_shell_uniform(fam, k, rng));
    }
    shells.write(rc.out / "shells.csv");
    const EuclidFit fit = euclid_compare(q, pts);
    json r;
    r["family"] = to_json(fam);
    r["omega"] = q.omega();
    r["doubling_constant"] = q.doubling_constant();
    r["volume_closed_form"] = fam.volume_closed_form();
    r["nestedness_margin"] = fam.nestedness_margin();
    r["euclid_fit"] = {{"c", fit.c}, {"violations", fit.violations}, {"samples", fit.samples}};
    r["shells"] = rows;
    return r;
}

json cmd_exponents(const RunConfig& rc) {
    const Dilation& d = rc.dil;
    const auto& t = rc.triple;
    json r;
    r["dilation"] = to_json(d);
    r["p"] = t.p;
    r["q"] = t.q;
    r["s"] = t.s;
    r["s_min"] = min_s(d, t.p);
    r["d_min"] = min_d(d, t.s, t.q);
    r["R_lower"] = czr_lower(d, t.p, t.s);
    const RRange rr = dw_R_range(d, rc.N);
    r["R_bound"] = rr.bound;
    r["R_max"] = rr.empty ? json(nullptr) : json(rr.r_max);
    r["range_coefficient"] = range_coefficient(d);
    try {
        r["multiplier"] = to_json(multiplier_p_range(d, rc.N));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyRange) throw;
        r["multiplier"] = {{"N", rc.N}, {"empty", true}};
    }
    if (!rr.empty && rr.r_max >= 1) r["kernel_p_range"] = to_json(sio_p_range(d, rr.r_max));
    return r;
}

json cmd_mihlin_check(const RunConfig& rc) {
    MultiplierCatalog cat(rc.dil);
    CsvTable cells({"symbol", "j", "beta", "sup"});
    json r = json::object();
    for (const auto& name : rc.symbols) {
        const MihlinReport rep = mihlin_constant(cat.get(name), cat.partition(), rc.N, rc.j_lo, rc.j_hi, rc.mihlin_samples, rc.seed);
        for (const auto& c : rep.cells) cells.row(name, c.j, "\"" + index_label(c.beta) + "\"", c.sup);
        r[name] = to_json(rep);
    }
    cells.write(rc.out / "mihlin.csv");
    return r;
}

json cmd_kernel_decay(const RunConfig& rc) {
    MultiplierCatalog cat(rc.dil);
    StepQuasiNorm q(canonical_ellipsoids(rc.dil));
    const RRange rr = dw_R_range(rc.dil, rc.N);
    const auto alphas = indices_up_to(rc.dil.dim(), rr.empty ? 0 : std::max(rr.r_max, 0));
    CsvTable cells({"symbol", "k", "alpha", "S"});
    json r = json::object();
    for (const auto& name : rc.symbols) {
        const auto& m = cat.get(name);
        const DecayReport rep = decay_sweep(m, cat.partition(), q, rc.N, alphas, rc.k_lo, rc.k_hi, rc.J, rc.samples);
        const PartialSumCheck ps = partial_sum_convergence(m, cat.partition(), q.family(), alphas, rc.J - 2, rc.J, 20);
        for (const auto& c : rep.cells) cells.row(name, c.k, "\"" + index_label(c.alpha) + "\"", c.S);
        r[name] = {{"decay", to_json(rep)}, {"partial_sum_change", ps.max_relative_change}, {"probes", ps.probes}};
    }
    cells.write(rc.out / "decay.csv");
    return r;
}

json cmd_atomize(const RunConfig& rc) {
    StepQuasiNorm q(canonical_ellipsoids(rc.dil));
    RhoTable rho(q);
    const auto quad = make_quadruple(rc.dil, rc.triple);
    const double c0 = estimate_C0(orthonormal_basis(q.family(), rc.triple.s), q.family());
    std::mt19937_64 rng(rc.seed);
    CsvTable terms({"molecule", "scale", "mu", "valid"});
    json rows = json::array();
    for (int i = 0; i < rc.molecules; ++i) {
        const Vec c = Vec::Zero(rc.dil.dim());
        const SampledField M = random_molecule(rc.grid, c, rc.triple.s, rng);
        const AtomicDecomposition dec = decompose_molecule(M, c, quad, rho, rc.J, c0);
        for (const auto& t : dec.terms) terms.row(i, t.scale, t.mu, t.check.valid ? 1 : 0);
        rows.push_back(to_json(dec));
    }
    terms.write(rc.out / "terms.csv");
    return {{"quadruple", {{"p", quad.triple.p}, {"q", quad.triple.q}, {"s", quad.triple.s}, {"d", quad.d}, {"theta", quad.theta}}},
            {"molecules", rows}};
}

/// Atom files carry their center and scale in the sidecar next to the grid.
void write_atom(const fs::path& bin, const Atom& a) {
    write_field(bin, a.field);
    const fs::path side(bin.string() + ".json");
    json meta = read_json(side);
    meta["center"] = vec_to_json(a.center);
    meta["j"] = a.j;
    write_json(side, meta);
}

Atom read_atom(const fs::path& bin, const AdmissibleTriple& t) {
    Atom a;
    a.field = read_field(bin);
    if (a.field.domain != Domain::Spatial) throw Error(ErrorCode::TagMismatch, bin.string() + " is not a spatial field");
    const json meta = read_json(fs::path(bin.string() + ".json"));
    a.center = meta.contains("center") ? vec_from_json(meta["center"]) : Vec::Zero(a.field.grid.n);
    a.j = meta.value("j", 0);
    a.triple = t;
    return a;
}

json cmd_apply(const RunConfig& rc, const std::string& atom_file) {
    MultiplierCatalog cat(rc.dil);
    StepQuasiNorm q(canonical_ellipsoids(rc.dil));
    RhoTable rho(q);
    const auto quad = make_quadruple(rc.dil, rc.triple);
    Atom a;
    if (atom_file.empty()) {
        std::mt19937_64 rng(rc.seed);
        a = random_atom(rc.grid, q.family(), 0, Vec::Zero(rc.dil.dim()), rc.triple, rng);
        write_atom(rc.out / "atom.bin", a);
    } else {
        a = read_atom(atom_file, rc.triple);
    }
    json r;
    r["atom"] = to_json(validate_atom(a.field, a.center, a.j, rc.triple, q.family()));
    r["N_atom"] = molecular_norm(a.field, a.center, quad, rho).value;
    json per = json::object();
    for (const auto& name : rc.symbols) {
        const SampledField ta = apply_multiplier(cat.get(name), a.field);
        const auto nm = molecular_norm(ta, a.center, quad, rho);
        double moment = 0.0;
        for (const auto& m : discrete_moments(ta, a.center, rc.triple.s)) moment = std::max(moment, std::abs(m) / ta.lq_norm(1.0));
        write_field(rc.out / ("T_" + name + ".bin"), ta);
        per[name] = {{"l2_in", a.field.l2_norm()}, {"l2_out", ta.l2_norm()}, {"N", nm.value}, {"tail_fraction", nm.tail_fraction}, {"moment_residual", moment}};
    }
    r["symbols"] = per;
    return r;
}

json cmd_uniform_bound(const RunConfig& rc, const std::string& manifest) {
    MultiplierCatalog cat(rc.dil);
    StepQuasiNorm q(canonical_ellipsoids(rc.dil));
    RhoTable rho(q);
    const auto quad = make_quadruple(rc.dil, rc.triple, rc.triple.s == 0 ? std::optional<double>(0.8) : std::nullopt);
    // Atoms grouped by grid, so each group shares one sampled symbol.
    std::vector<std::pair<Grid, std::vector<Atom>>> groups;
    auto add = [&](Atom a) {
        for (auto& [g, v] : groups)
            if (g == a.field.grid) {
                v.push_back(std::move(a));
                return;
            }
        const Grid g = a.field.grid;
        groups.push_back({g, {std::move(a)}});
    };
    if (manifest.empty()) {
        if (rc.dil.dim() != 2) throw Error(ErrorCode::Unsupported, "the built-in family is two-dimensional");
        const ScaleFamily fam = scale_family(q, rc.triple, rc.grid.points, rc.seed);
        json entries = json::array();
        for (std::size_t s = 0; s < fam.atoms.size(); ++s)
            for (std::size_t i = 0; i < fam.atoms[s].size(); ++i) {
                const std::string file = "atom_j" + std::to_string(fam.scales[s]) + "_" + std::to_string(i) + ".bin";
                write_atom(rc.out / "family" / file, fam.atoms[s][i]);
                entries.push_back(file);
                add(fam.atoms[s][i]);
            }
        write_json(rc.out / "family" / "manifest.json", {{"atoms", entries}});
    } else {
        const json m = read_json(manifest);
        const fs::path base = fs::path(manifest).parent_path();
        for (const auto& e : m.at("atoms")) add(read_atom(base / e.get<std::string>(), rc.triple));
    }
    CsvTable rows({"symbol", "group", "id", "j", "N", "tail_fraction", "moment_residual"});
    json r = json::object();
    for (const auto& name : rc.symbols) {
        std::vector<double> ns;
        json reps = json::array();
        double moment = 0.0;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& [g, atoms] = groups[gi];
            const UniformBoundReport rep = uniform_molecule_bound(sample_symbol(cat.get(name), g), atoms, quad, rho);
            for (const auto& w : rep.rows) {
                ns.push_back(w.N);
                rows.row(name, gi, w.id, w.j, w.N, w.tail_fraction, w.moment_residual);
            }
            moment = std::max(moment, rep.max_moment_residual);
            reps.push_back(to_json(rep));
        }
        std::vector<double> sorted = ns;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
        const double mx = sorted.back();
        r[name] = {{"max", mx}, {"median", median}, {"ratio", mx / median}, {"pass", mx < 3.0 * median && moment <= 1e-6},
                   {"max_moment_residual", moment}, {"groups", reps}};
    }
    rows.write(rc.out / "uniform_bound.csv");
    return r;
}

json cmd_full_verify(RunConfig rc) {
    const fs::path root = rc.out;
    json stages;
    auto stage = [&](const std::string& name, auto&& fn) {
        rc.out = root / name;
        fs::create_directories(rc.out);
        json r = fn();
        write_json(rc.out / "report.json", r);
        stages[name] = "done";
    };
    stage("exponents", [&] { return cmd_exponents(rc); });
    stage("mihlin-check", [&] { return cmd_mihlin_check(rc); });
    stage("kernel-decay", [&] {
        // The sweep is only meaningful for invariant symbols.
        RunConfig inv = rc;
        MultiplierCatalog cat(rc.dil);
        inv.symbols.clear();
        for (const auto& s : rc.symbols)
            if (cat.get(s).invariant) inv.symbols.push_back(s);
        return cmd_kernel_decay(inv);
    });
    stage("atomize", [&] { return cmd_atomize(rc); });
    stage("uniform-bound", [&] { return cmd_uniform_bound(rc, ""); });
    rc.out = root;

    VerifyConfig vc;
    vc.seed = rc.seed;
    vc.grid = rc.grid.points;
    vc.symbols = rc.resolved.at("symbols").get<std::vector<std::string>>();
    if (vc.symbols == MultiplierCatalog(rc.dil).names()) vc.symbols.clear();
    json criteria = json::array();
    CsvTable timings({"criterion", "seconds", "limit"});
    bool all = true;
    for (const auto& check : acceptance_checks()) {
        CriterionResult res = check(vc);
        std::fprintf(stderr, "%s criterion %d: %s\n", res.pass ? "PASS" : "FAIL", res.id, res.title.c_str());
        timings.row(res.id, res.seconds, res.limit);
        json j = to_json(res);
        j.erase("seconds");
        criteria.push_back(j);
        all = all && res.pass;
    }
    timings.write(root / "timings.csv");
    return {{"summary", all ? "PASS" : "FAIL"}, {"stages", stages}, {"criteria", criteria}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anisotropic Hardy space numerics"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "aniso_out";
    std::optional<int> grid_points;
    std::optional<std::uint64_t> seed;
    bool as_json = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--grid", grid_points, "grid points per axis");
    app.add_option("--seed", seed, "random seed");
    app.add_flag("--json", as_json, "print the report JSON on stdout");

    std::vector<std::string> symbols;
    std::string atom_file, family_file;
    std::vector<CLI::App*> subs;
    const std::pair<const char*, const char*> commands[] = {
        {"spectrum", "spectral radius convergence of A^j"},
        {"quasinorm-table", "shell counts and Euclidean comparison constants"},
        {"exponents", "admissible exponent ranges"},
        {"mihlin-check", "anisotropic Mihlin constants of the catalog symbols"},
        {"kernel-decay", "kernel slice decay sweep"},
        {"atomize", "molecular decomposition of random molecules"},
        {"apply", "apply multipliers to an atom"},
        {"uniform-bound", "molecular norms of T_m a over an atom family"},
        {"full-verify", "run every stage and the acceptance checks"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        subs.push_back(sub);
    }
    for (auto* sub : subs) {
        const std::string n = sub->get_name();
        if (n == "mihlin-check" || n == "kernel-decay" || n == "apply" || n == "uniform-bound" || n == "full-verify")
            sub->add_option("--symbol", symbols, "catalog symbol (repeatable)");
    }
    app.get_subcommand("apply")->add_option("--atom", atom_file, "atom field file")->check(CLI::ExistingFile);
    app.get_subcommand("uniform-bound")->add_option("--family", family_file, "atom family manifest")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        json cfg = default_config();
        if (!config_path.empty()) cfg.merge_patch(read_json(config_path));
        if (grid_points) cfg["grid"]["points"] = *grid_points;
        if (seed) cfg["seed"] = *seed;
        if (!symbols.empty()) cfg["symbols"] = symbols;
        RunConfig rc = resolve(cfg, out_dir);
        fs::create_directories(rc.out);
        write_json(rc.out / "config.json", rc.resolved);

        json report;
        if (cmd == "spectrum") report = cmd_spectrum(rc);
        else if (cmd == "quasinorm-table") report = cmd_quasinorm_table(rc);
        else if (cmd == "exponents") report = cmd_exponents(rc);
        else if (cmd == "mihlin-check") report = cmd_mihlin_check(rc);
        else if (cmd == "kernel-decay") report = cmd_kernel_decay(rc);
        else if (cmd == "atomize") report = cmd_atomize(rc);
        else if (cmd == "apply") report = cmd_apply(rc, atom_file);
        else if (cmd == "uniform-bound") report = cmd_uniform_bound(rc, family_file);
        else report = cmd_full_verify(rc);

        write_json(rc.out / (cmd + ".json"), report);
        if (as_json) {
            std::cout << report.dump(2) << "\n";
        } else if (cmd == "full-verify") {
            std::cout << report["summary"].get<std::string>() << "\n";
        } else {
            std::cout << "wrote " << (rc.out / (cmd + ".json")).string() << "\n";
        }
        return cmd == "full-verify" && report["summary"] != "PASS" ? 1 : 0;
    } catch (const Error& e) {
        std::cerr << error_json(std::string(to_string(e.code())), e.what()).dump(2) << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << error_json("InvalidArgument", std::string("config: ") + e.what()).dump(2) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_json("IoError", e.what()).dump(2) << "\n";
        return 1;
    }
}
