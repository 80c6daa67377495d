#include "aniso/congruence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "aniso/errors.hpp"

namespace aniso {

double incidence(const Norm& norm, const OrientedSphere& Y, const Vec3& x) {
    Eigen::Vector4d v;
    v << Y.center - x, Y.radius;
    return finsler_L(norm, v);
}

SphereCongruence make_congruence(const SurfacePtr& base, const ScalarField& rho) {
    const auto W = cahn_hoffman_map(*base->norm());
    return make_congruence(base, rho, W.xi);
}

SphereCongruence make_congruence(const SurfacePtr& base, const ScalarField& rho, std::vector<Vec3> direction) {
    require_same_mesh(base->mesh(), rho.mesh);
    const int n = base->mesh()->num_vertices();
    if (static_cast<int>(direction.size()) != n) throw ValidationError("direction field size mismatch");
    SphereCongruence c{base, rho, std::move(direction), {}};
    c.Y.resize(n);
    for (int i = 0; i < n; ++i) {
        c.Y[i].head<3>() = base->X()[i] + rho[i] * c.direction[i];
        c.Y[i][3] = rho[i];
    }
    return c;
}

namespace {

// frame derivatives of vector-valued vertex data through the mesh stencils
std::vector<Eigen::Matrix<double, 3, 2>> frame_derivative(const MeshPtr& mesh, const std::vector<Vec3>& P) {
    const int n = mesh->num_vertices();
    std::vector<Eigen::Matrix<double, 3, 2>> out(n);
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd c(n);
        for (int i = 0; i < n; ++i) c[i] = P[i][k];
        const auto g = grad(ScalarField(mesh, c));
        for (int i = 0; i < n; ++i) {
            out[i](k, 0) = g.values(i, 0);
            out[i](k, 1) = g.values(i, 1);
        }
    }
    return out;
}

} // namespace

EnvelopeResiduals envelope_residuals(const SphereCongruence& c) {
    const Norm& norm = *c.base->norm();
    const auto dX = frame_derivative(c.base->mesh(), c.base->X());
    EnvelopeResiduals r;
    for (int i = 0; i < static_cast<int>(c.Y.size()); ++i) {
        const Eigen::Vector4d d = c.Y[i] - (Eigen::Vector4d() << c.base->X()[i], 0.0).finished();
        if (d.head<3>().norm() == 0.0 && d[3] == 0.0) continue;
        r.r1 = std::max(r.r1, std::abs(finsler_L(norm, d)));
        // dL_{w}(v) = 2 T(w) <grad T(w), v> for the spatial part w
        const Vec3 w = d.head<3>();
        if (w.norm() == 0.0) continue;
        const double T = eval_T(norm, w);
        const Vec3 gT = gauge_gradient(norm, w);
        for (int j = 0; j < 2; ++j) r.r2 = std::max(r.r2, std::abs(2.0 * T * gT.dot(dX[i].col(j))));
    }
    return r;
}

HorizontalDifferential horizontal_differential(const SphereCongruence& c) {
    const MeshPtr& mesh = c.base->mesh();
    const int n = mesh->num_vertices();
    std::vector<Vec3> Zs(n);
    for (int i = 0; i < n; ++i) Zs[i] = c.Y[i].head<3>();
    HorizontalDifferential h;
    h.dZ = frame_derivative(mesh, Zs);
    h.dX = frame_derivative(mesh, c.base->X());
    Eigen::VectorXd z4(n);
    for (int i = 0; i < n; ++i) z4[i] = c.Y[i][3];
    const auto g4 = grad(ScalarField(mesh, z4));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) h.dZ[i].col(j) -= g4.values(i, j) * c.direction[i];
    return h;
}

CurvatureCongruences curvature_congruences(const SurfacePtr& s) {
    const MeshPtr& mesh = s->mesh();
    const int n = mesh->num_vertices();
    std::vector<int> flat;
    for (int i = 0; i < n; ++i)
        if (s->lambda1()[i] == 0.0 || s->lambda2()[i] == 0.0 || !std::isfinite(s->mu1()[i]) ||
            !std::isfinite(s->mu2()[i]))
            flat.push_back(i);
    if (!flat.empty()) throw InfiniteRadiusError("vanishing anisotropic curvature", flat);
    // rho_i = 1/lambda_i = -mu_i
    CurvatureCongruences out{make_congruence(s, s->mu1() * -1.0), make_congruence(s, s->mu2() * -1.0), {}, {}, 0, 0};
    for (int which = 0; which < 2; ++which) {
        const auto& z = which == 0 ? out.z1 : out.z2;
        const auto h = horizontal_differential(z);
        Eigen::VectorXd sig(n);
        for (int i = 0; i < n; ++i) {
            Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(h.dZ[i]);
            const double scale = h.dX[i].norm();
            sig[i] = svd.singularValues().minCoeff() / scale;
        }
        (which == 0 ? out.sigma1 : out.sigma2) = ScalarField(mesh, sig);
        (which == 0 ? out.max_sigma1 : out.max_sigma2) = sig.maxCoeff();
    }
    return out;
}

MiddleCongruence middle_congruence(const SurfacePtr& s) {
    const MeshPtr& mesh = s->mesh();
    const int n = mesh->num_vertices();
    // rho = (1/lambda1 + 1/lambda2)/2 = -eta/2
    MiddleCongruence out{make_congruence(s, s->eta() * -0.5), 0.0, 0.0};
    const auto& mt = s->norm()->m_tau();
    const auto h = horizontal_differential(out.z);
    for (int i = 0; i < n; ++i) {
        const Eigen::Matrix2d Binv = mt[i].matrix().inverse();
        const double rho = out.z.rho[i];
        const double alg = (Binv * (s->m_q()[i].matrix() + rho * mt[i].matrix())).trace();
        out.algebraic_trace_residual = std::max(out.algebraic_trace_residual, std::abs(alg));
        // express the numerical dZ in the vertex frame: column j is dZ(e_j)
        Eigen::Matrix2d dz;
        for (int j = 0; j < 2; ++j) {
            dz(0, j) = h.dZ[i].col(j).dot(mesh->e1(i));
            dz(1, j) = h.dZ[i].col(j).dot(mesh->e2(i));
        }
        out.trace_residual = std::max(out.trace_residual, std::abs((Binv * dz).trace()));
    }
    return out;
}

SphereCurve SphereCurve::helix(double radius, double pitch, double t0, double dt, double s0, double s1, int n) {
    if (n < 2) throw ValidationError("curve needs at least two samples");
    SphereCurve c;
    for (int k = 0; k < n; ++k) {
        const double s = s0 + (s1 - s0) * k / (n - 1);
        c.s.push_back(s);
        c.alpha.emplace_back(radius * std::cos(s), radius * std::sin(s), pitch * s, t0 + dt * s);
        c.dalpha.emplace_back(-radius * std::sin(s), radius * std::cos(s), pitch, dt);
    }
    return c;
}

SphereCurve SphereCurve::line(const Vec3& origin, const Vec3& direction, double t0, double dt, double s0, double s1,
                              int n) {
    if (n < 2) throw ValidationError("curve needs at least two samples");
    SphereCurve c;
    for (int k = 0; k < n; ++k) {
        const double s = s0 + (s1 - s0) * k / (n - 1);
        c.s.push_back(s);
        Eigen::Vector4d a, d;
        a << origin + s * direction, t0 + dt * s;
        d << direction, dt;
        c.alpha.push_back(a);
        c.dalpha.push_back(d);
    }
    return c;
}

SphereCurve SphereCurve::from_samples(const std::vector<Eigen::Vector4d>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw ValidationError("sampled curve needs at least three points");
    SphereCurve c;
    c.alpha = pts;
    for (int k = 0; k < n; ++k) {
        c.s.push_back(k);
        if (k == 0) c.dalpha.push_back((-3.0 * pts[0] + 4.0 * pts[1] - pts[2]) / 2.0);
        else if (k == n - 1) c.dalpha.push_back((3.0 * pts[n - 1] - 4.0 * pts[n - 2] + pts[n - 3]) / 2.0);
        else c.dalpha.push_back((pts[k + 1] - pts[k - 1]) / 2.0);
    }
    return c;
}

SphereCurve SphereCurve::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("curve spec must be an object with a string \"kind\"");
    const std::string kind = j["kind"];
    auto num = [&](const char* k, double def) {
        if (!j.contains(k)) return def;
        if (!j[k].is_number()) throw ValidationError(std::string("curve field \"") + k + "\" must be a number");
        return j[k].get<double>();
    };
    std::array<double, 2> range{0.0, 2.0 * std::numbers::pi};
    if (j.contains("s_range")) {
        if (!j["s_range"].is_array() || j["s_range"].size() != 2) throw ValidationError("s_range must be [s0, s1]");
        range = {j["s_range"][0].get<double>(), j["s_range"][1].get<double>()};
    }
    const int n = j.value("samples", 64);
    if (kind == "helix") return helix(num("radius", 1.0), num("pitch", 0.0), num("t", 0.5), num("dt", 0.0), range[0], range[1], n);
    if (kind == "line") {
        Vec3 dir = Vec3::UnitX();
        if (j.contains("direction")) dir = Vec3(j["direction"][0], j["direction"][1], j["direction"][2]);
        return line(Vec3::Zero(), dir, num("t", 0.5), num("dt", 0.0), range[0], range[1], n);
    }
    if (kind == "samples") {
        if (!j.contains("points") || !j["points"].is_array()) throw ValidationError("samples curve needs \"points\"");
        std::vector<Eigen::Vector4d> pts;
        for (const auto& p : j["points"]) {
            if (!p.is_array() || p.size() != 4) throw ValidationError("curve points must be [x, y, z, t]");
            pts.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>());
        }
        return from_samples(pts);
    }
    throw ValidationError("unknown curve kind \"" + kind + "\"");
}

void require_spacelike(const Norm& norm, const SphereCurve& curve) {
    for (size_t k = 0; k < curve.dalpha.size(); ++k) {
        const double T = eval_T(norm, curve.dalpha[k].head<3>());
        const double margin = T - std::abs(curve.dalpha[k][3]);
        if (!(margin > 1e-3 * T))
            throw NotSpacelikeError("curve is not spacelike at sample " + std::to_string(k), T > 0 ? margin / T : margin);
    }
}

namespace {

struct LevelFunction {
    const Norm& norm;
    Vec3 a;   // spatial derivative of the curve
    double b; // derivative of the radius

    double value(const Vec3& nu) const { return nu.dot(a) / norm.tau_at(nu) - b; }
    // tangential gradient on the sphere
    Vec3 gradient(const Vec3& nu) const {
        Eigen::Matrix<Jet<3>, 3, 1> X;
        for (int k = 0; k < 3; ++k) X[k] = Jet<3>::variable(nu[k], k);
        const Jet<3> g = (X[0] * a[0] + X[1] * a[1] + X[2] * a[2]) / support_function<Jet<3>>(norm.spec(), X);
        return g.g - nu * nu.dot(g.g);
    }
    Vec3 newton(Vec3 nu) const {
        for (int it = 0; it < 30; ++it) {
            const double g = value(nu);
            if (std::abs(g) < 1e-15) break;
            const Vec3 d = gradient(nu);
            const double d2 = d.squaredNorm();
            if (d2 == 0.0) break;
            nu = (nu - g / d2 * d).normalized();
        }
        return nu;
    }
};

Vec3 slerp(const Vec3& p, const Vec3& q, double t) {
    const double ang = std::acos(std::clamp(p.dot(q), -1.0, 1.0));
    if (ang < 1e-12) return p;
    return ((std::sin((1 - t) * ang) * p + std::sin(t * ang) * q) / std::sin(ang)).normalized();
}

// zero crossing of g on the arc from p to q (g(p), g(q) of opposite sign)
Vec3 arc_root(const LevelFunction& f, const Vec3& p, const Vec3& q) {
    double lo = 0.0, hi = 1.0, glo = f.value(p);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = f.value(slerp(p, q, mid));
        if ((gm < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return slerp(p, q, 0.5 * (lo + hi));
}

std::vector<Vec3> extract_loop(const Norm& norm, const LevelFunction& f) {
    const MeshPtr& mesh = norm.mesh();
    const int n = mesh->num_vertices();
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        g[i] = f.value(mesh->vertex(i));
        if (g[i] == 0.0) g[i] = 1e-300; // keep the sign test strict
    }
    // one segment per sign-changing face, joining its two crossing edges
    std::map<std::pair<int, int>, int> edge_id;
    std::vector<Vec3> points;
    std::vector<std::vector<int>> links;
    auto crossing = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = edge_id.find(key);
        if (it != edge_id.end()) return it->second;
        const int id = static_cast<int>(points.size());
        points.push_back(arc_root(f, mesh->vertex(a), mesh->vertex(b)));
        links.emplace_back();
        edge_id.emplace(key, id);
        return id;
    };
    for (const auto& t : mesh->faces()) {
        std::vector<int> ids;
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            if ((g[a] < 0.0) != (g[b] < 0.0)) ids.push_back(crossing(a, b));
        }
        if (ids.size() == 2) {
            links[ids[0]].push_back(ids[1]);
            links[ids[1]].push_back(ids[0]);
        }
    }
    if (points.empty()) throw EmptyLevelSetError("level curve C(s) is empty on the sphere mesh");

    // chain into closed loops and keep the longest
    std::vector<char> used(points.size(), 0);
    std::vector<int> best;
    for (int start = 0; start < static_cast<int>(points.size()); ++start) {
        if (used[start]) continue;
        std::vector<int> loop{start};
        used[start] = 1;
        int prev = -1, cur = start;
        for (;;) {
            int next = -1;
            for (int x : links[cur])
                if (x != prev && !used[x]) {
                    next = x;
                    break;
                }
            if (next < 0) break;
            used[next] = 1;
            loop.push_back(next);
            prev = cur;
            cur = next;
        }
        const bool closed = std::find(links[cur].begin(), links[cur].end(), start) != links[cur].end();
        if (!closed || loop.size() < 3) throw EmptyLevelSetError("level curve C(s) does not close on the sphere mesh");
        if (loop.size() > best.size()) best = loop;
    }
    std::vector<Vec3> out;
    for (int id : best) out.push_back(points[id]);
    return out;
}

std::vector<Vec3> resample_loop(const std::vector<Vec3>& loop, int N) {
    const int m = static_cast<int>(loop.size());
    std::vector<double> cum(m + 1, 0.0);
    for (int k = 0; k < m; ++k) cum[k + 1] = cum[k] + (loop[(k + 1) % m] - loop[k]).norm();
    std::vector<Vec3> out;
    int seg = 0;
    for (int j = 0; j < N; ++j) {
        const double target = cum[m] * j / N;
        while (seg < m - 1 && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0 ? (target - cum[seg]) / len : 0.0;
        out.push_back(slerp(loop[seg], loop[(seg + 1) % m], t));
    }
    return out;
}

} // namespace

CanalSurface canal_envelope(const Norm& norm, const SphereCurve& curve, int n_samples) {
    if (n_samples < 3) throw ValidationError("canal_envelope needs at least 3 samples per level curve");
    require_spacelike(norm, curve);
    CanalSurface out;
    out.loop_size = n_samples;
    const int ns = static_cast<int>(curve.s.size());
    for (int k = 0; k < ns; ++k) {
        const LevelFunction f{norm, curve.dalpha[k].head<3>(), curve.dalpha[k][3]};
        std::vector<Vec3> raw = extract_loop(norm, f);
        const int m = static_cast<int>(raw.size());
        Vec3 mean = Vec3::Zero();
        for (const auto& p : raw) mean += p;
        if (mean.norm() < 1e-12) mean = curve.dalpha[k].head<3>();
        mean.normalize();
        double winding = 0.0;
        for (int j = 0; j < m; ++j) winding += raw[j].cross(raw[(j + 1) % m]).dot(mean);
        if (winding < 0.0) std::reverse(raw.begin(), raw.end());
        if (k > 0) {
            // start at the point of the loop nearest the previous start so the
            // strip parameterization varies smoothly with s
            const Vec3& ref = out.normals.back().front();
            int seg = 0;
            double best_t = 0.0, bestd = 1e300;
            for (int j = 0; j < m; ++j) {
                const Vec3& a = raw[j];
                const Vec3 e = raw[(j + 1) % m] - a;
                const double t = e.squaredNorm() > 0 ? std::clamp((ref - a).dot(e) / e.squaredNorm(), 0.0, 1.0) : 0.0;
                if (const double d = (a + t * e - ref).squaredNorm(); d < bestd) {
                    bestd = d;
                    seg = j;
                    best_t = t;
                }
            }
            std::vector<Vec3> rot{(raw[seg] + best_t * (raw[(seg + 1) % m] - raw[seg])).normalized()};
            for (int j = 1; j <= m; ++j) rot.push_back(raw[(seg + j) % m]);
            raw = std::move(rot);
        }
        std::vector<Vec3> loop = resample_loop(raw, n_samples);
        for (auto& p : loop) p = f.newton(p);

        const Vec3 c = curve.alpha[k].head<3>();
        const double t = curve.alpha[k][3];
        for (const auto& nu : loop) {
            out.alpha_residual = std::max(out.alpha_residual, std::abs(f.value(nu)));
            const Vec3 X = c - t * norm.xi_at(nu);
            out.strip.vertices.push_back(X);
            out.incidence_residual = std::max(out.incidence_residual, std::abs(incidence(norm, {c, t}, X)));
        }
        out.normals.push_back(std::move(loop));
    }
    for (int k = 0; k + 1 < ns; ++k)
        for (int j = 0; j < n_samples; ++j) {
            const int a = k * n_samples + j, b = k * n_samples + (j + 1) % n_samples;
            const int c = a + n_samples, d = b + n_samples;
            out.strip.faces.push_back({a, b, d});
            out.strip.faces.push_back({a, d, c});
        }
    // first-order tangency: central-difference derivatives in the loop angle and in s
    const auto& V = out.strip.vertices;
    const double dphi = 2.0 * std::numbers::pi / n_samples;
    for (int k = 0; k < ns; ++k)
        for (int j = 0; j < n_samples; ++j) {
            const Vec3& nu = out.normals[k][j];
            const Vec3 xs = nu / norm.tau_at(nu);
            const int jp = (j + 1) % n_samples, jm = (j + n_samples - 1) % n_samples;
            const Vec3 d_phi = (V[k * n_samples + jp] - V[k * n_samples + jm]) / (2.0 * dphi);
            out.tangency_residual = std::max(out.tangency_residual, std::abs(d_phi.dot(xs)));
            if (k > 0 && k + 1 < ns) {
                const double ds = curve.s[k + 1] - curve.s[k - 1];
                const Vec3 d_s = (V[(k + 1) * n_samples + j] - V[(k - 1) * n_samples + j]) / ds;
                out.tangency_residual = std::max(out.tangency_residual, std::abs(d_s.dot(xs)));
            }
        }
    return out;
}

} // namespace aniso
