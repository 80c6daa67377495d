#include "aniso/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "aniso/errors.hpp"
#include "aniso/harmonics.hpp"

namespace aniso {

namespace {

// real eigenvalues of a 2x2 matrix known to be similar to a symmetric one
std::pair<double, double> real_eigenvalues(const Eigen::Matrix2d& M) {
    const double tr = M.trace(), det = M.determinant();
    // (a - d)^2 + 4bc equals tr^2 - 4 det without the cancellation at repeated roots
    const double d = M(0, 0) - M(1, 1);
    double disc = d * d + 4.0 * M(0, 1) * M(1, 0);
    const double scale = tr * tr + std::abs(det) + 1e-300;
    if (disc < 0.0) {
        if (disc < -1e-8 * scale) throw DegenerateError("complex eigenvalue pair in 2x2 curvature operator");
        disc = 0.0;
    }
    const double s = std::sqrt(disc);
    return {0.5 * (tr - s), 0.5 * (tr + s)};
}

} // namespace

std::shared_ptr<const SupportSurface> SupportSurface::from_support(const ScalarField& q, const NormPtr& norm) {
    require_same_mesh(q.mesh, norm->mesh());
    const MeshPtr& mesh = q.mesh;
    const int n = mesh->num_vertices();
    auto s = std::shared_ptr<SupportSurface>(new SupportSurface());
    s->q_ = q;
    s->norm_ = norm;

    const auto dq = grad(q);
    const auto hq = hess(q);
    s->X_.resize(n);
    s->m_q_.resize(n);
    s->A_.resize(n);
    Eigen::VectorXd mu1(n), mu2(n), l1(n), l2(n), eta(n), detA(n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        s->X_[i] = dq.ambient(i) + q[i] * mesh->vertex(i);
        s->m_q_[i] = hq.values[i].plus_identity(q[i]);
        s->A_[i] = s->m_q_[i].matrix() * norm->m_tau()[i].matrix().inverse();
        const auto [a, b] = real_eigenvalues(s->A_[i]);
        mu1[i] = a;
        mu2[i] = b;
        eta[i] = s->A_[i].trace();
        detA[i] = s->A_[i].determinant();
        scale = std::max({scale, std::abs(a), std::abs(b)});
    }
    std::vector<int> bad;
    for (int i = 0; i < n; ++i)
        if (std::min(std::abs(mu1[i]), std::abs(mu2[i])) <= 1e-9 * std::max(scale, 1e-300)) bad.push_back(i);
    // a sorted radius changing sign along an edge vanishes between the two vertices
    for (int i = 0; i < n; ++i)
        for (int j : mesh->adjacency()[i])
            if (j != i && (mu1[i] * mu1[j] < 0.0 || mu2[i] * mu2[j] < 0.0)) {
                bad.push_back(i);
                break;
            }
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    if (!bad.empty()) {
        std::string list;
        for (size_t k = 0; k < bad.size() && k < 10; ++k) list += (k ? ", " : "") + std::to_string(bad[k]);
        if (bad.size() > 10) list += ", ...";
        throw SingularCurvatureError("D^2 q + q I singular at " + std::to_string(bad.size()) + " vertices: " + list, bad);
    }
    for (int i = 0; i < n; ++i) {
        l1[i] = -1.0 / mu1[i];
        l2[i] = -1.0 / mu2[i];
    }
    s->mu1_ = ScalarField(mesh, mu1);
    s->mu2_ = ScalarField(mesh, mu2);
    s->lambda1_ = ScalarField(mesh, l1);
    s->lambda2_ = ScalarField(mesh, l2);
    s->eta_ = ScalarField(mesh, eta);
    s->detA_ = ScalarField(mesh, detA);
    return s;
}

SurfacePtr from_support(const ScalarField& q, const NormPtr& norm) { return SupportSurface::from_support(q, norm); }

TriMesh SupportSurface::to_trimesh() const { return {X_, mesh()->faces()}; }

ScalarField parallel_support(const ScalarField& q, const Norm& norm, double t) {
    require_same_mesh(q.mesh, norm.mesh());
    return q + norm.tau() * t;
}

double legendre_residual(const SupportSurface& s) {
    const MeshPtr& mesh = s.mesh();
    const int n = mesh->num_vertices();
    std::array<TangentVectorField, 3> dx;
    for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd c(n);
        for (int i = 0; i < n; ++i) c[i] = s.X()[i][k];
        dx[k] = grad(ScalarField(mesh, c));
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 xs = mesh->vertex(i) / s.norm()->tau()[i];
        for (int j = 0; j < 2; ++j) {
            const Vec3 de(dx[0].values(i, j), dx[1].values(i, j), dx[2].values(i, j));
            worst = std::max(worst, std::abs(de.dot(xs)));
        }
    }
    return worst;
}

ParametricPatch make_patch(const Immersion& f, const Norm& norm, double u0, double u1, int nu, double v0, double v1,
                           int nv) {
    if (nu < 2 || nv < 2) throw ValidationError("patch grid needs at least 2x2 samples");
    ParametricPatch p;
    p.nu = nu;
    p.nv = nv;
    p.u0 = u0;
    p.u1 = u1;
    p.v0 = v0;
    p.v1 = v1;
    for (int i = 0; i < nu; ++i) p.us.push_back(u0 + (u1 - u0) * i / (nu - 1));
    for (int j = 0; j < nv; ++j) p.vs.push_back(v0 + (v1 - v0) * j / (nv - 1));
    const int N = nu * nv;
    for (auto* v : {&p.X, &p.Xu, &p.Xv, &p.normal, &p.normal_u, &p.normal_v, &p.xi, &p.xi_u, &p.xi_v}) v->resize(N);
    p.tau.resize(N);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const int k = i * nv + j;
            const auto X = f(Jet2::variable(p.us[i], 0), Jet2::variable(p.vs[j], 1));
            Vec3 Xu, Xv, Xuu, Xuv, Xvv;
            for (int c = 0; c < 3; ++c) {
                p.X[k][c] = X[c].v;
                Xu[c] = X[c].g[0];
                Xv[c] = X[c].g[1];
                Xuu[c] = X[c].h(0, 0);
                Xuv[c] = X[c].h(0, 1);
                Xvv[c] = X[c].h(1, 1);
            }
            const Vec3 nrm = Xu.cross(Xv);
            const double len = nrm.norm();
            if (!(len > 1e-12)) throw DegenerateError("immersion is singular at patch sample " + std::to_string(k));
            const Vec3 nu_ = nrm / len;
            const Vec3 nu_u = Xuu.cross(Xv) + Xu.cross(Xuv);
            const Vec3 nu_v = Xuv.cross(Xv) + Xu.cross(Xvv);
            p.Xu[k] = Xu;
            p.Xv[k] = Xv;
            p.normal[k] = nu_;
            p.normal_u[k] = (nu_u - nu_ * nu_.dot(nu_u)) / len;
            p.normal_v[k] = (nu_v - nu_ * nu_.dot(nu_v)) / len;
            const Eigen::Matrix3d H = norm.dxi_at(nu_);
            p.xi[k] = norm.xi_at(nu_);
            p.xi_u[k] = H * p.normal_u[k];
            p.xi_v[k] = H * p.normal_v[k];
            p.tau[k] = norm.tau_at(nu_);
        }
    return p;
}

Immersion sphere_immersion(double radius) {
    return [radius](const Jet2& th, const Jet2& ph) {
        Eigen::Matrix<Jet2, 3, 1> X;
        X << sin(th) * cos(ph) * radius, sin(th) * sin(ph) * radius, cos(th) * radius;
        return X;
    };
}

Immersion ellipsoid_immersion(const Vec3& axes) {
    return [axes](const Jet2& th, const Jet2& ph) {
        Eigen::Matrix<Jet2, 3, 1> X;
        X << sin(th) * cos(ph) * axes[0], sin(th) * sin(ph) * axes[1], cos(th) * axes[2];
        return X;
    };
}

Immersion helicoid_immersion(double a) {
    return [a](const Jet2& r, const Jet2& th) {
        Eigen::Matrix<Jet2, 3, 1> X;
        X << r * cos(th), r * sin(th), th * a;
        return X;
    };
}

ParametricPatch helicoid_patch(const Norm& norm, double a, double r0, double r1, int nr, double th0, double th1,
                               int nth) {
    return make_patch(helicoid_immersion(a), norm, r0, r1, nr, th0, th1, nth);
}

double legendre_residual(const ParametricPatch& p) {
    double worst = 0.0;
    for (int k = 0; k < p.size(); ++k) {
        const Vec3 xs = p.normal[k] / p.tau[k];
        worst = std::max({worst, std::abs(p.Xu[k].normalized().dot(xs)), std::abs(p.Xv[k].normalized().dot(xs))});
    }
    return worst;
}

PatchCurvatures patch_anisotropic_curvatures(const ParametricPatch& patch, const Norm&) {
    PatchCurvatures out;
    const int N = patch.size();
    out.lambda1.resize(N);
    out.lambda2.resize(N);
    out.Lambda.resize(N);
    out.eta.resize(N);
    std::vector<int> flat;
    for (int k = 0; k < N; ++k) {
        Eigen::Matrix<double, 3, 2> dX, dxi;
        dX << patch.Xu[k], patch.Xv[k];
        dxi << patch.xi_u[k], patch.xi_v[k];
        const Eigen::Matrix2d G = dX.transpose() * dX;
        if (!(G.determinant() > 1e-24 * (G.trace() * G.trace() + 1e-300)))
            throw DegenerateError("dX singular at patch sample " + std::to_string(k));
        const Eigen::Matrix2d S = -G.inverse() * (dX.transpose() * dxi);
        const auto [a, b] = real_eigenvalues(S);
        out.lambda1[k] = a;
        out.lambda2[k] = b;
        out.Lambda[k] = S.trace();
        const double det = S.determinant();
        if (std::abs(det) <= 1e-14 * (S.squaredNorm() + 1e-300)) {
            flat.push_back(k);
            continue;
        }
        out.eta[k] = -S.trace() / det;
        out.max_abs_Lambda = std::max(out.max_abs_Lambda, std::abs(out.Lambda[k]));
        out.max_abs_eta = std::max(out.max_abs_eta, std::abs(out.eta[k]));
    }
    if (!flat.empty())
        throw InfiniteRadiusError("anisotropic principal curvature vanishes at " + std::to_string(flat.size()) +
                                      " patch samples",
                                  flat);
    return out;
}

ScalarField project_harmonics(const ScalarField& f, int lmax) {
    const MeshPtr& mesh = f.mesh;
    const int n = mesh->num_vertices();
    const int nc = sh_count(lmax);
    if (n < nc) throw ValidationError("mesh too coarse for the requested harmonic band limit");
    Eigen::MatrixXd Y(n, nc);
    std::vector<double> row;
    for (int i = 0; i < n; ++i) {
        real_sh_all(lmax, mesh->vertex(i), row);
        for (int c = 0; c < nc; ++c) Y(i, c) = row[c];
    }
    const Eigen::Map<const Eigen::VectorXd> w(mesh->weights().data(), n);
    const Eigen::MatrixXd YtW = Y.transpose() * w.asDiagonal();
    const Eigen::MatrixXd N = YtW * Y;
    const Eigen::VectorXd c = N.ldlt().solve(YtW * f.values);
    return {mesh, Y * c};
}

ScalarField fit_support(const TriMesh& input, const MeshPtr& mesh, int l_fit) {
    if (input.vertices.size() < 4 || !input.is_closed())
        throw NonConvexInputError("input mesh is not a closed, consistently oriented surface");
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (const auto& v : input.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const double size = (hi - lo).norm();
    const double viol = input.convexity_violation();
    if (viol > 1e-9 * size)
        throw NonConvexInputError("input mesh is not convex (vertex " + std::to_string(viol) +
                                  " above a neighboring face plane)");
    const ScalarField raw = sample(mesh, [&](const Vec3& nu) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& p : input.vertices) m = std::max(m, p.dot(nu));
        return m;
    });
    return project_harmonics(raw, l_fit);
}

TriMesh ellipsoid_trimesh(const Vec3& axes, int subdivisions) {
    const auto m = SphereMesh::icosphere(subdivisions);
    TriMesh t;
    t.faces = m->faces();
    for (const auto& v : m->vertices()) t.vertices.push_back(v.cwiseProduct(axes));
    return t;
}

ScalarField ellipsoid_support(const MeshPtr& mesh, const Vec3& axes) {
    return sample(mesh, [&](const Vec3& nu) { return nu.cwiseProduct(axes).norm(); });
}

ScalarField support_from_preset(const nlohmann::json& spec, const Norm& norm) {
    const MeshPtr& mesh = norm.mesh();
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        throw ValidationError("surface spec must be an object with a string \"kind\"");
    const std::string kind = spec["kind"];
    auto num = [&](const char* key, double def) {
        if (!spec.contains(key)) return def;
        if (!spec[key].is_number()) throw ValidationError(std::string("surface field \"") + key + "\" must be a number");
        return spec[key].get<double>();
    };
    auto base = [&](const std::string& b, double r) {
        if (b == "wulff") return norm.tau() * r;
        if (b == "sphere") return ScalarField(mesh, r);
        if (b == "none") return ScalarField(mesh, 0.0);
        throw ValidationError("unknown base \"" + b + "\"");
    };
    if (kind == "support") {
        const std::string q = spec.value("q", std::string("sphere"));
        if (q != "wulff" && q != "sphere") throw ValidationError("support surface \"q\" must be wulff or sphere");
        const double r = num("r", 1.0);
        return base(q, r);
    }
    if (kind == "harmonics") {
        ScalarField q = base(spec.value("base", std::string("wulff")), num("r", 1.0));
        if (!spec.contains("coeffs") || !spec["coeffs"].is_array())
            throw ValidationError("harmonics surface needs a \"coeffs\" array");
        for (const auto& c : spec["coeffs"]) {
            if (!c.is_array() || c.size() != 3 || !c[0].is_number_integer() || !c[1].is_number_integer() ||
                !c[2].is_number())
                throw ValidationError("each harmonic coefficient must be [l, m, c]");
            const int l = c[0], m = c[1];
            if (l < 0 || m < -l || m > l) throw ValidationError("harmonic index out of range");
            q = q + harmonic_field(mesh, l, m) * c[2].get<double>();
        }
        return q;
    }
    if (kind == "ellipsoid") {
        if (!spec.contains("axes") || !spec["axes"].is_array() || spec["axes"].size() != 3)
            throw ValidationError("ellipsoid needs three \"axes\"");
        Vec3 ax;
        for (int k = 0; k < 3; ++k) {
            ax[k] = spec["axes"][k].get<double>();
            if (!(ax[k] > 0.0)) throw ValidationError("ellipsoid axes must be positive");
        }
        if (spec.value("fit", false)) return fit_support(ellipsoid_trimesh(ax, 5), mesh, spec.value("l_fit", 12));
        return ellipsoid_support(mesh, ax);
    }
    if (kind == "mesh") {
        if (!spec.contains("path") || !spec["path"].is_string()) throw ValidationError("mesh surface needs a \"path\"");
        return fit_support(TriMesh::read_obj(spec["path"]), mesh, spec.value("l_fit", 12));
    }
    if (kind == "helicoid") throw ValidationError("helicoid is a parametric patch, not a support surface");
    throw ValidationError("unknown surface kind \"" + kind + "\"");
}

} // namespace aniso
