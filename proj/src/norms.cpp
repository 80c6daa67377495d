#include "aniso/norms.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "aniso/errors.hpp"

namespace aniso {

using nlohmann::json;

NormSpec NormSpec::from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ValidationError("norm spec must be an object with a string \"kind\"");
    const std::string kind = j["kind"];
    auto reject_extra = [&](std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) throw ValidationError("unknown key \"" + it.key() + "\" in norm spec");
        }
    };
    NormSpec s;
    if (kind == "isotropic") {
        reject_extra({"kind"});
        s.kind = Kind::Isotropic;
    } else if (kind == "axisymmetric") {
        reject_extra({"kind", "a"});
        if (!j.contains("a") || !j["a"].is_number()) throw ValidationError("axisymmetric norm needs numeric \"a\"");
        s.kind = Kind::Axisymmetric;
        s.a = j["a"].get<double>();
        if (!std::isfinite(s.a)) throw ValidationError("axisymmetric parameter must be finite");
    } else if (kind == "harmonics") {
        reject_extra({"kind", "coeffs"});
        if (!j.contains("coeffs") || !j["coeffs"].is_array() || j["coeffs"].empty())
            throw ValidationError("harmonics norm needs a non-empty \"coeffs\" array");
        s.kind = Kind::Harmonics;
        for (const auto& c : j["coeffs"]) {
            if (!c.is_array() || c.size() != 3 || !c[0].is_number_integer() || !c[1].is_number_integer() ||
                !c[2].is_number())
                throw ValidationError("each harmonic coefficient must be [l, m, c] with integer l, m");
            const int l = c[0], m = c[1];
            const double v = c[2];
            if (l < 0 || l > 64 || m < -l || m > l || !std::isfinite(v))
                throw ValidationError("harmonic coefficient out of range");
            s.coeffs.emplace_back(l, m, v);
        }
    } else {
        throw ValidationError("unknown norm kind \"" + kind + "\"");
    }
    return s;
}

json NormSpec::to_json() const {
    switch (kind) {
    case Kind::Isotropic:
        return {{"kind", "isotropic"}};
    case Kind::Axisymmetric:
        return {{"kind", "axisymmetric"}, {"a", a}};
    case Kind::Harmonics: {
        json arr = json::array();
        for (const auto& [l, m, c] : coeffs) arr.push_back({l, m, c});
        return {{"kind", "harmonics"}, {"coeffs", arr}};
    }
    }
    return {};
}

std::shared_ptr<const Norm> Norm::from_spec(const NormSpec& spec, const MeshPtr& mesh) {
    auto n = std::shared_ptr<Norm>(new Norm());
    n->spec_ = spec;
    n->mesh_ = mesh;
    n->tau_ = sample(mesh, [&](const Vec3& p) { return spec.tau<double>(p.x(), p.y(), p.z()); });

    int worst = 0;
    for (int i = 1; i < mesh->num_vertices(); ++i)
        if (n->tau_[i] < n->tau_[worst]) worst = i;
    if (!(n->tau_[worst] > 0.0))
        throw PositivityError("tau <= 0 at vertex " + std::to_string(worst), n->tau_[worst]);

    n->dtau_ = grad(n->tau_);
    n->d2tau_ = hess(n->tau_);
    n->m_tau_.resize(mesh->num_vertices());
    Eigen::VectorXd kw(mesh->num_vertices());
    n->min_eig_ = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mesh->num_vertices(); ++i) {
        n->m_tau_[i] = n->d2tau_.values[i].plus_identity(n->tau_[i]);
        const double e = n->m_tau_[i].min_eigenvalue();
        if (e < n->min_eig_) {
            n->min_eig_ = e;
            n->min_eig_vertex_ = i;
        }
    }
    if (!(n->min_eig_ >= 1e-8))
        throw ConvexityError("D^2 tau + tau I not positive definite at vertex " + std::to_string(n->min_eig_vertex_),
                             n->min_eig_);
    for (int i = 0; i < mesh->num_vertices(); ++i) kw[i] = 1.0 / n->m_tau_[i].det();
    n->kw_ = ScalarField(mesh, kw);
    return n;
}

NormPtr norm_from_spec(const NormSpec& spec, const MeshPtr& mesh) { return Norm::from_spec(spec, mesh); }

double Norm::tau_at(const Vec3& nu) const {
    const Vec3 n = nu.normalized();
    return spec_.tau<double>(n.x(), n.y(), n.z());
}

double Norm::support(const Vec3& x) const {
    const double r = x.norm();
    if (r == 0.0) return 0.0;
    return r * tau_at(x / r);
}

namespace {
Jet<3> support_jet(const NormSpec& spec, const Vec3& x) {
    Eigen::Matrix<Jet<3>, 3, 1> X;
    for (int k = 0; k < 3; ++k) X[k] = Jet<3>::variable(x[k], k);
    return support_function<Jet<3>>(spec, X);
}
} // namespace

Vec3 Norm::xi_at(const Vec3& nu) const { return support_jet(spec_, nu.normalized()).g; }

Eigen::Matrix3d Norm::dxi_at(const Vec3& nu) const { return support_jet(spec_, nu.normalized()).h; }

namespace {

// unit normal of W at the boundary point in direction xh, i.e. argmax of <xh,nu>/tau(nu)
Vec3 gauge_argmax(const Norm& norm, const Vec3& xh) {
    if (norm.is_isotropic()) return xh;
    const NormSpec& spec = norm.spec();

    // maximize f(nu) = <xh, nu>/tau(nu); its only critical points are the
    // maximum and the minimum, so safeguarded ascent from xh finds the maximum
    auto f_val = [&](const Vec3& nu) { return xh.dot(nu) / norm.tau_at(nu); };
    auto ascend = [&](Vec3 nu, bool& converged) {
        converged = false;
        for (int it = 0; it < 100; ++it) {
            Eigen::Matrix<Jet<3>, 3, 1> X;
            for (int k = 0; k < 3; ++k) X[k] = Jet<3>::variable(nu[k], k);
            const Jet<3> j = (X[0] * xh[0] + X[1] * xh[1] + X[2] * xh[2]) / support_function<Jet<3>>(spec, X);
            const Vec3 a = std::abs(nu.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
            const Vec3 e1 = (a - a.dot(nu) * nu).normalized();
            const Vec3 e2 = nu.cross(e1);
            Eigen::Matrix<double, 3, 2> E;
            E << e1, e2;
            // f is 0-homogeneous, so the projected Hessian is the Riemannian one
            const Eigen::Vector2d g = E.transpose() * j.g;
            const Eigen::Matrix2d H = E.transpose() * j.h * E;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
            const bool concave = es.eigenvalues().maxCoeff() < 0.0;
            if (g.norm() < 1e-14) {
                converged = concave;
                break;
            }
            const Eigen::Vector2d step = concave ? Eigen::Vector2d(-H.ldlt().solve(g)) : g;
            double s = 1.0;
            Vec3 trial = nu;
            for (int bt = 0; bt < 60; ++bt) {
                trial = (nu + E * (s * step)).normalized();
                if (f_val(trial) >= j.v - 1e-16) break;
                s *= 0.5;
            }
            if ((trial - nu).norm() < 1e-15) {
                converged = concave;
                break;
            }
            nu = trial;
        }
        return nu;
    };
    bool ok = false;
    Vec3 nu = ascend(xh, ok);
    if (ok) return nu;
    // coarse search over the mesh directions, then refine
    Vec3 best = xh;
    double fb = f_val(xh);
    for (const Vec3& p : norm.mesh()->vertices())
        if (const double v = f_val(p); v > fb) {
            fb = v;
            best = p;
        }
    return ascend(best, ok);
}

} // namespace

double eval_T(const Norm& norm, const Vec3& x) {
    const double r = x.norm();
    if (r == 0.0) return 0.0;
    const Vec3 xh = x / r;
    const Vec3 nu = gauge_argmax(norm, xh);
    return r * xh.dot(nu) / norm.tau_at(nu);
}

Vec3 gauge_gradient(const Norm& norm, const Vec3& x) {
    const double r = x.norm();
    if (r == 0.0) return Vec3::Zero();
    const Vec3 nu = gauge_argmax(norm, x / r);
    return nu / norm.tau_at(nu);
}

double eval_T_dual(const Norm& norm, const Vec3& u) { return norm.support(u); }

WulffShape cahn_hoffman_map(const Norm& norm) {
    const auto& mesh = norm.mesh();
    WulffShape w{mesh, {}, {}};
    w.xi.resize(mesh->num_vertices());
    w.xi_star.resize(mesh->num_vertices());
    for (int i = 0; i < mesh->num_vertices(); ++i) {
        const Vec3& nu = mesh->vertex(i);
        const double t = norm.tau()[i];
        w.xi[i] = norm.dtau().ambient(i) + t * nu;
        w.xi_star[i] = nu / t;
    }
    return w;
}

double finsler_L(const Norm& norm, const Eigen::Vector4d& v) {
    const double T = eval_T(norm, v.head<3>());
    return T * T - v[3] * v[3];
}

double wulff_volume(const Norm& norm) {
    // (1/3) int <xi, nu> dA with dA = det(D^2 tau + tau I) dsigma
    const auto& m = norm.m_tau();
    Eigen::VectorXd d(norm.mesh()->num_vertices());
    for (int i = 0; i < d.size(); ++i) d[i] = norm.tau()[i] * m[i].det() / 3.0;
    return integrate(ScalarField(norm.mesh(), d));
}

} // namespace aniso
