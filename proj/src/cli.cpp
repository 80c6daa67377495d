#include "aniso/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "aniso/congruence.hpp"
#include "aniso/elsolve.hpp"
#include "aniso/errors.hpp"
#include "aniso/io.hpp"
#include "aniso/laguerre.hpp"
#include "aniso/norms.hpp"
#include "aniso/propagate.hpp"
#include "aniso/schema.hpp"
#include "aniso/surfaces.hpp"
#include "runconfig_schema.inc"

namespace aniso {

using nlohmann::json;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const GridTooSmallError*>(&e) ||
        dynamic_cast<const NonConvexInputError*>(&e) || dynamic_cast<const json::exception*>(&e) ||
        dynamic_cast<const MeshMismatchError*>(&e))
        return kExitValidation;
    if (dynamic_cast<const ConvexityError*>(&e) || dynamic_cast<const PositivityError*>(&e)) return kExitConvexity;
    if (dynamic_cast<const SingularCurvatureError*>(&e) || dynamic_cast<const DegenerateError*>(&e))
        return kExitCurvature;
    if (dynamic_cast<const NotSpacelikeError*>(&e)) return kExitNotSpacelike;
    if (dynamic_cast<const CFLViolationError*>(&e)) return kExitCFL;
    if (dynamic_cast<const SolverError*>(&e)) return kExitSolver;
    return kExitOther;
}

const json& runconfig_schema() {
    static const json schema = json::parse(kRunConfigSchema);
    return schema;
}

RunConfig RunConfig::from_json(const json& j) {
    validate_against(runconfig_schema(), j);
    RunConfig c;
    c.command = j.value("command", std::string());
    if (j.contains("norm")) c.norm = j["norm"];
    c.subdiv = j.value("subdiv", c.subdiv);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    if (j.contains("surface")) c.surface = j["surface"];
    if (j.contains("surfaces")) c.surfaces = j["surfaces"].get<std::vector<json>>();
    c.scale = j.value("scale", c.scale);
    c.sweep = j.value("sweep", c.sweep);
    if (j.contains("tolerances")) {
        c.compare_rel = j["tolerances"].value("compare_rel", c.compare_rel);
        c.solver_residual = j["tolerances"].value("solver_residual", c.solver_residual);
    }
    for (auto [key, dst] : {std::pair<const char*, json*>{"canal", &c.canal}, {"propagate", &c.propagate},
                            {"solve", &c.solve}, {"ibp", &c.ibp}})
        if (j.contains(key)) *dst = j[key];
    return c;
}

json RunConfig::to_json() const {
    json j;
    if (!command.empty()) j["command"] = command;
    j["norm"] = norm;
    j["subdiv"] = subdiv;
    j["seed"] = seed;
    j["out"] = out;
    if (!surface.is_null()) j["surface"] = surface;
    if (!surfaces.empty()) j["surfaces"] = surfaces;
    if (scale != 1.0) j["scale"] = scale;
    if (!sweep.empty()) j["sweep"] = sweep;
    j["tolerances"] = {{"compare_rel", compare_rel}, {"solver_residual", solver_residual}};
    if (!canal.empty()) j["canal"] = canal;
    if (!propagate.empty()) j["propagate"] = propagate;
    if (!solve.empty()) j["solve"] = solve;
    if (!ibp.empty()) j["ibp"] = ibp;
    return j;
}

std::vector<double> parse_sweep(const std::string& text) {
    std::string body = text;
    if (body.rfind("t=", 0) == 0) body = body.substr(2);
    double v[3];
    char c1 = 0, c2 = 0, extra = 0;
    std::istringstream in(body);
    in.imbue(std::locale::classic());
    if (!(in >> v[0] >> c1 >> v[1] >> c2 >> v[2]) || c1 != ':' || c2 != ':' || (in >> extra))
        throw ValidationError("sweep must look like t=start:stop:step, got \"" + text + "\"");
    if (!(v[2] > 0.0) || v[1] < v[0]) throw ValidationError("sweep needs step > 0 and stop >= start");
    const long n = std::lround(std::floor((v[1] - v[0]) / v[2] + 1e-9));
    if (n > 10000) throw ValidationError("sweep has too many samples");
    std::vector<double> ts;
    for (long i = 0; i <= n; ++i) ts.push_back(v[0] + v[2] * static_cast<double>(i));
    return ts;
}

namespace {

// Files are staged in memory and written only after the command succeeded.
class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
    void add(const std::string& name, std::string contents) { files_.emplace_back(name, std::move(contents)); }
    void add_json(const std::string& name, const json& j) { add(name, dump_json(j)); }
    void commit() const {
        std::filesystem::create_directories(dir_);
        for (const auto& [name, contents] : files_) write_file_atomic((std::filesystem::path(dir_) / name).string(), contents);
    }

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

struct Context {
    MeshPtr mesh;
    NormPtr norm;
};

Context make_context(const RunConfig& c) {
    Context ctx;
    ctx.mesh = SphereMesh::icosphere(c.subdiv);
    ctx.norm = norm_from_spec(NormSpec::from_json(c.norm), ctx.mesh);
    return ctx;
}

json default_surface() { return {{"kind", "harmonics"}, {"base", "wulff"}, {"coeffs", json::array({{2, 0, 0.05}})}}; }

ScalarField surface_q(const RunConfig& c, const Context& ctx, const json& fallback) {
    const json spec = c.surface.is_null() ? fallback : c.surface;
    return support_from_preset(spec, *ctx.norm);
}

json base_report(const RunConfig& c) {
    json r;
    r["config"] = c.to_json();
    return r;
}

std::string curvature_csv(const SupportSurface& s) {
    std::string out = "vertex,x,y,z,X,Y,Z,mu1,mu2,lambda1,lambda2,eta\n";
    const auto& m = *s.mesh();
    for (int i = 0; i < m.num_vertices(); ++i) {
        const Vec3& v = m.vertex(i);
        const Vec3& X = s.X()[i];
        out += std::to_string(i);
        for (double x : {v.x(), v.y(), v.z(), X.x(), X.y(), X.z(), s.mu1().values[i], s.mu2().values[i],
                         s.lambda1().values[i], s.lambda2().values[i], s.eta().values[i]})
            out += "," + fmt17(x);
        out += '\n';
    }
    return out;
}

void cmd_norm(const RunConfig& c) {
    const Context ctx = make_context(c);
    const Norm& n = *ctx.norm;
    const WulffShape w = cahn_hoffman_map(n);
    Outputs out(c.out);
    out.add("wulff.obj", obj_string(w.xi, ctx.mesh->faces()));
    out.add("kw.csv", to_csv(n.kW()));
    json r = base_report(c);
    r["min_eigenvalue"] = n.min_m_tau_eigenvalue();
    r["min_eigenvalue_vertex"] = n.min_m_tau_vertex();
    r["convex"] = n.min_m_tau_eigenvalue() > 0.0;
    r["tau_min"] = n.tau().values.minCoeff();
    r["tau_max"] = n.tau().values.maxCoeff();
    r["kw_min"] = n.kW().values.minCoeff();
    r["kw_max"] = n.kW().values.maxCoeff();
    r["wulff_volume"] = wulff_volume(n);
    out.add_json("norm.json", r);
    out.commit();
}

std::string patch_obj(const ParametricPatch& p) {
    std::vector<std::array<int, 3>> faces;
    for (int i = 0; i + 1 < p.nu; ++i)
        for (int j = 0; j + 1 < p.nv; ++j) {
            const int a = i * p.nv + j, b = (i + 1) * p.nv + j, cc = (i + 1) * p.nv + j + 1, d = i * p.nv + j + 1;
            faces.push_back({a, b, cc});
            faces.push_back({a, cc, d});
        }
    return obj_string(p.X, faces);
}

void cmd_surface(const RunConfig& c) {
    const Context ctx = make_context(c);
    Outputs out(c.out);
    json r = base_report(c);
    const json spec = c.surface.is_null() ? default_surface() : c.surface;
    if (spec.value("kind", std::string()) == "helicoid") {
        auto range = [&](const char* key, double a, double b) {
            if (!spec.contains(key)) return std::array<double, 2>{a, b};
            return std::array<double, 2>{spec[key][0].get<double>(), spec[key][1].get<double>()};
        };
        const auto rr = range("r_range", 0.2, 1.0), tr = range("theta_range", 0.0, M_PI);
        int nr = 41, nth = 81;
        if (spec.contains("samples")) {
            nr = spec["samples"][0];
            nth = spec["samples"][1];
        }
        const ParametricPatch p = helicoid_patch(*ctx.norm, spec.value("a", 1.0), rr[0], rr[1], nr, tr[0], tr[1], nth);
        const PatchCurvatures k = patch_anisotropic_curvatures(p, *ctx.norm);
        std::string csv = "i,j,r,theta,x,y,z,lambda1,lambda2,Lambda,eta\n";
        for (int i = 0; i < p.nu; ++i)
            for (int j = 0; j < p.nv; ++j) {
                const int id = i * p.nv + j;
                csv += std::to_string(i) + "," + std::to_string(j);
                for (double x : {p.us[i], p.vs[j], p.X[id].x(), p.X[id].y(), p.X[id].z(), k.lambda1[id], k.lambda2[id],
                                 k.Lambda[id], k.eta[id]})
                    csv += "," + fmt17(x);
                csv += '\n';
            }
        out.add("patch.obj", patch_obj(p));
        out.add("patch_curvatures.csv", csv);
        r["max_abs_Lambda"] = k.max_abs_Lambda;
        r["max_abs_eta"] = k.max_abs_eta;
        r["legendre_residual"] = legendre_residual(p);
    } else {
        ScalarField q = support_from_preset(spec, *ctx.norm);
        if (c.scale != 1.0) q = q * c.scale;
        const SurfacePtr s = from_support(q, ctx.norm);
        out.add("surface.obj", s->to_trimesh().to_obj());
        out.add("support.csv", to_csv(q));
        out.add("curvatures.csv", curvature_csv(*s));
        r["legendre_residual"] = legendre_residual(*s);
        r["mu_min"] = s->mu1().values.minCoeff();
        r["mu_max"] = s->mu2().values.maxCoeff();
        r["area"] = surface_area(*s);
        r["volume"] = enclosed_volume(*s, 0.0);
    }
    out.add_json("surface.json", r);
    out.commit();
}

void cmd_invariants(const RunConfig& c) {
    const Context ctx = make_context(c);
    ScalarField q = surface_q(c, ctx, default_surface());
    if (c.scale != 1.0) q = q * c.scale;
    const SurfacePtr s = from_support(q, ctx.norm);
    Outputs out(c.out);
    json r = base_report(c);
    r["report"] = invariant_report(*s).to_json();
    if (!c.sweep.empty()) {
        std::string csv = "t,laguerre,energy,I,area,laguerre_rel_change\n";
        const double L0 = laguerre_functional(*s);
        json rows = json::array();
        double worst = 0.0;
        for (double t : parse_sweep(c.sweep)) {
            const SurfacePtr st = from_support(parallel_support(q, *ctx.norm, t), ctx.norm);
            const double L = laguerre_functional(*st);
            const double rel = std::abs(L0) > 0.0 ? (L - L0) / std::abs(L0) : 0.0;
            worst = std::max(worst, std::abs(rel));
            csv += fmt17(t) + "," + fmt17(L) + "," + fmt17(energy(*st)) + "," + fmt17(gauge_invariant_I(*st)) + "," +
                   fmt17(surface_area(*st)) + "," + fmt17(rel) + "\n";
        }
        out.add("sweep.csv", csv);
        r["sweep_max_rel_change"] = worst;
    }
    out.add_json("invariants.json", r);
    out.commit();
}

void cmd_compare(const RunConfig& c) {
    if (c.surfaces.size() != 2) throw ValidationError("compare needs exactly two entries in \"surfaces\"");
    const Context ctx = make_context(c);
    const ScalarField q1 = support_from_preset(c.surfaces[0], *ctx.norm);
    const ScalarField q2 = support_from_preset(c.surfaces[1], *ctx.norm);
    const CompareVerdict v = compare_wavefronts(q1, q2, ctx.norm, c.compare_rel);
    Outputs out(c.out);
    json r = base_report(c);
    r["verdict"] = v.to_json();
    out.add_json("compare.json", r);
    out.commit();
}

void cmd_canal(const RunConfig& c) {
    const Context ctx = make_context(c);
    const json curve_spec = c.canal.value("curve", json{{"kind", "helix"}, {"radius", 1.0}, {"pitch", 0.2}});
    const SphereCurve curve = SphereCurve::from_json(curve_spec);
    const CanalSurface cs = canal_envelope(*ctx.norm, curve, c.canal.value("n_samples", 96));
    Outputs out(c.out);
    out.add("canal.obj", cs.strip.to_obj());
    json r = base_report(c);
    r["loop_size"] = cs.loop_size;
    r["rings"] = static_cast<int>(cs.normals.size());
    r["alpha_residual"] = cs.alpha_residual;
    r["incidence_residual"] = cs.incidence_residual;
    r["tangency_residual"] = cs.tangency_residual;
    out.add_json("canal.json", r);
    out.commit();
}

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", t);
    return buf;
}

void cmd_propagate(const RunConfig& c) {
    const Context ctx = make_context(c);
    const ScalarField q = surface_q(c, ctx, json{{"kind", "support"}, {"q", "wulff"}});
    const SurfacePtr s = from_support(q, ctx.norm);
    std::vector<double> ts = c.propagate.value("t", std::vector<double>{0.5, 1.0});
    std::sort(ts.begin(), ts.end());

    const json gj = c.propagate.value("grid", json::object());
    GridSpec spec;
    spec.n = gj.value("n", 96);
    if (gj.contains("lo") || gj.contains("hi")) {
        spec.lo = gj.value("lo", -2.0);
        spec.hi = gj.value("hi", 2.0);
    } else {
        // cube around the farthest front with room for the source margin
        const SurfacePtr far = from_support(parallel_support(q, *ctx.norm, ts.back()), ctx.norm);
        double ext = 0.0;
        for (const auto& x : far->X()) ext = std::max(ext, x.cwiseAbs().maxCoeff());
        for (const auto& x : s->X()) ext = std::max(ext, x.cwiseAbs().maxCoeff());
        const double half = 1.3 * ext + 0.05;
        spec.lo = -half;
        spec.hi = half;
    }

    Outputs out(c.out);
    json r = base_report(c);
    r["grid"] = {{"lo", spec.lo}, {"hi", spec.hi}, {"n", spec.n}, {"h", spec.spacing()}};
    LevelGrid g = init_from_surface(*s, spec);
    json fronts = json::array();
    for (double t : ts) {
        if (c.propagate.contains("dt")) {
            // user step: largest uniform step not above dt, still subject to the CFL check
            const double span = t - g.time;
            const int steps = span > 0.0 ? static_cast<int>(std::ceil(span / c.propagate["dt"].get<double>() - 1e-9)) : 0;
            const double t0 = g.time;
            for (int k = 0; k < steps; ++k) g = hj_step(*ctx.norm, g, span / steps);
            g.time = t0 + span;
        } else {
            g = evolve(*ctx.norm, g, t - g.time);
        }
        const TriMesh front = extract_zero_level(g);
        const SurfacePtr target = from_support(parallel_support(q, *ctx.norm, t), ctx.norm);
        const double hd = hausdorff_distance(front, target->to_trimesh());
        out.add("front_t" + time_tag(t) + ".obj", front.to_obj());
        out.add("parallel_t" + time_tag(t) + ".obj", target->to_trimesh().to_obj());
        if (c.propagate.value("write_grid", false)) out.add("grid_t" + time_tag(t) + ".raw", g.to_raw());
        fronts.push_back({{"t", t}, {"hausdorff", hd}, {"cells", hd / g.h}, {"front_vertices", front.vertices.size()}});
    }
    r["fronts"] = fronts;
    out.add_json("propagate.json", r);
    out.commit();
}

void cmd_solve(const RunConfig& c) {
    const Context ctx = make_context(c);
    const json bspec = c.solve.value("boundary", json{{"kind", "support"}, {"q", "wulff"}});
    const ScalarField qb = support_from_preset(bspec, *ctx.norm);
    Vec3 center = Vec3::UnitZ();
    if (c.solve.contains("center")) {
        center = Vec3(c.solve["center"][0], c.solve["center"][1], c.solve["center"][2]);
        if (!(center.norm() > 0.0)) throw ValidationError("cap center must be nonzero");
        center.normalize();
    }
    const double radius = c.solve.value("radius", 0.6);
    const ELOperator op = assemble_F(*ctx.norm);
    const CapRegion region = make_cap(op, center, radius);
    const CapSolution sol = solve_cap(op, region, qb, c.solver_residual);
    double dev = 0.0;
    for (int i : region.interior) dev = std::max(dev, std::abs(sol.q.values[i] - qb.values[i]));
    Outputs out(c.out);
    out.add("solution.csv", to_csv(sol.q));
    json r = base_report(c);
    r["solution"] = sol.report();
    r["interior_vertices"] = region.interior.size();
    r["boundary_vertices"] = region.ring1.size() + region.ring2.size();
    r["max_deviation_from_boundary_field"] = dev;
    out.add_json("solve.json", r);
    out.commit();
}

void cmd_ibp(const RunConfig& c) {
    const MeshPtr mesh = SphereMesh::icosphere(c.subdiv);
    const int lmax = c.ibp.value("lmax", 4);
    std::vector<std::uint64_t> seeds{c.seed, c.seed + 1, c.seed + 2};
    if (c.ibp.contains("seeds")) seeds = c.ibp["seeds"].get<std::vector<std::uint64_t>>();
    const IbpReport rep = ibp_check(band_limited_field(mesh, lmax, seeds[0]), band_limited_field(mesh, lmax, seeds[1]),
                                    band_limited_field(mesh, lmax, seeds[2]));
    Outputs out(c.out);
    json r = base_report(c);
    r["residual"] = rep.residual;
    r["scale"] = rep.scale;
    r["relative"] = rep.relative;
    out.add_json("ibp.json", r);
    out.commit();
}

} // namespace

void run_command(const RunConfig& c) {
    static const std::map<std::string, void (*)(const RunConfig&)> table = {
        {"norm", cmd_norm},   {"surface", cmd_surface},     {"invariants", cmd_invariants}, {"compare", cmd_compare},
        {"canal", cmd_canal}, {"propagate", cmd_propagate}, {"solve", cmd_solve},           {"ibp-check", cmd_ibp}};
    const auto it = table.find(c.command);
    if (it == table.end()) throw ValidationError("unknown command \"" + c.command + "\"");
    it->second(c);
}

namespace {

json parse_json_arg(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

void report_error(const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (const auto* s = dynamic_cast<const SingularCurvatureError*>(&e)) {
        std::cerr << "degenerate vertices (" << s->vertices.size() << "):";
        for (std::size_t i = 0; i < s->vertices.size() && i < 32; ++i) std::cerr << ' ' << s->vertices[i];
        if (s->vertices.size() > 32) std::cerr << " ...";
        std::cerr << '\n';
    }
    if (const auto* s = dynamic_cast<const ConvexityError*>(&e))
        std::cerr << "min eigenvalue of D^2 tau + tau I: " << fmt17(s->min_eigenvalue) << '\n';
    if (const auto* s = dynamic_cast<const NotSpacelikeError*>(&e))
        std::cerr << "spacelike margin: " << fmt17(s->margin) << '\n';
    if (const auto* s = dynamic_cast<const CFLViolationError*>(&e))
        std::cerr << "dt " << fmt17(s->dt) << " exceeds " << fmt17(s->dt_max) << '\n';
    if (const auto* s = dynamic_cast<const SolverError*>(&e)) std::cerr << "residual: " << fmt17(s->residual) << '\n';
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Anisotropic wavefront geometry toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out, spec, norm, surface, sweep;
    int subdiv = -1;
    std::int64_t seed = -1;
    double scale = 0.0;
    app.add_option("--config", config_path, "JSON run config");
    app.add_option("--out", out, "output directory");
    app.add_option("--subdiv", subdiv, "icosphere subdivision level")->check(CLI::Range(1, 7));
    app.add_option("--seed", seed, "seed for random fields")->check(CLI::NonNegativeNumber);

    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"norm", "Wulff shape, K_W and convexity report"},
        {"surface", "support-function surface or helicoid patch with curvatures"},
        {"invariants", "Laguerre functional, energy and gauge invariant"},
        {"compare", "decide whether two wavefronts can share a source"},
        {"canal", "envelope of a curve of anisotropic spheres"},
        {"propagate", "Hamilton-Jacobi front versus parallel surfaces"},
        {"solve", "Euler-Lagrange cap problem with clamped boundary"},
        {"ibp-check", "integration-by-parts identity on random fields"}};
    for (const auto& [name, help] : cmds) {
        CLI::App* sub = app.add_subcommand(name, help);
        if (name == "norm") sub->add_option("--spec", spec, "norm spec JSON");
        else sub->add_option("--norm", norm, "norm spec JSON");
        if (name == "surface" || name == "invariants" || name == "propagate")
            sub->add_option("--surface", surface, "surface spec JSON");
        if (name == "invariants") {
            sub->add_option("--sweep", sweep, "parallel family, t=start:stop:step");
            sub->add_option("--scale", scale, "scale the support function")->check(CLI::PositiveNumber);
        }
        if (name == "surface") sub->add_option("--scale", scale, "scale the support function")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        json j = json::object();
        if (!config_path.empty()) j = parse_json_arg(read_file(config_path), "config file");
        if (!j.is_object()) throw ValidationError("config must be a JSON object");
        // flags override the file, then the merged config is validated as a whole
        j["command"] = app.get_subcommands().front()->get_name();
        if (!out.empty()) j["out"] = out;
        if (subdiv > 0) j["subdiv"] = subdiv;
        if (seed >= 0) j["seed"] = seed;
        if (!spec.empty()) j["norm"] = parse_json_arg(spec, "--spec");
        if (!norm.empty()) j["norm"] = parse_json_arg(norm, "--norm");
        if (!surface.empty()) j["surface"] = parse_json_arg(surface, "--surface");
        if (!sweep.empty()) j["sweep"] = sweep;
        if (scale > 0.0) j["scale"] = scale;
        const RunConfig config = RunConfig::from_json(j);
        run_command(config);
        return kExitOk;
    } catch (const std::exception& e) {
        report_error(e);
        return exit_code_for(e);
    }
}

} // namespace aniso
