#include <doctest.h>

#include <cmath>
#include <numbers>

#include "aniso/errors.hpp"
#include "aniso/norms.hpp"
#include "common.hpp"

using namespace aniso;
using testing::axisym;
using testing::isotropic;
using testing::level;
using testing::mesh;

namespace {

std::vector<Vec3> directions() {
    std::vector<Vec3> d;
    for (int k = 0; k < 200; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / 200.0;
        const double phi = k * std::numbers::pi * (3.0 - std::sqrt(5.0));
        const double r = std::sqrt(1.0 - z * z);
        d.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return d;
}

} // namespace

TEST_CASE("isotropic norm is the euclidean length") {
    const auto n = isotropic(3);
    for (const Vec3& v : directions()) {
        const Vec3 x = 1.7 * v;
        CHECK(eval_T(*n, x) == doctest::Approx(1.7).epsilon(1e-12));
        CHECK(eval_T_dual(*n, x) == doctest::Approx(1.7).epsilon(1e-12));
        CHECK((n->xi_at(v) - v).norm() <= 1e-12);
    }
    CHECK(n->min_m_tau_eigenvalue() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(testing::max_abs(n->kW().values - Eigen::VectorXd::Ones(n->kW().size())) <= 1e-8);
}

TEST_CASE("axisymmetric gauge at the pole") {
    const auto n = axisym(3, 0.3);
    CHECK(n->tau_at(Vec3::UnitZ()) == doctest::Approx(0.7));
    CHECK(eval_T(*n, Vec3(0, 0, 2)) == doctest::Approx(2.0 / 0.7).epsilon(1e-9));
    CHECK(eval_T_dual(*n, Vec3(0, 0, 2)) == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(eval_T(*n, Vec3(3, 0, 0)) == doctest::Approx(3.0).epsilon(1e-9));
    // smallest eigenvalue of m_tau is 1 - 2a, at the poles
    CHECK(std::abs(n->min_m_tau_eigenvalue() - 0.4) <= 1e-3);
}

TEST_CASE("cahn-hoffman points lie on the wulff shape") {
    for (const auto& n : {isotropic(3), axisym(3, 0.3)}) {
        const WulffShape w = cahn_hoffman_map(*n);
        for (int i = 0; i < n->mesh()->num_vertices(); ++i) {
            const Vec3& nu = n->mesh()->vertex(i);
            CHECK(w.xi[i].dot(nu) == doctest::Approx(n->tau()[i]).epsilon(1e-12));
            // mesh xi carries the stencil error of D tau
            CHECK(std::abs(eval_T(*n, w.xi[i]) - 1.0) <= 1e-7);
            CHECK(w.xi_star[i].dot(w.xi[i]) == doctest::Approx(1.0).epsilon(1e-12));
            const Vec3 xa = n->xi_at(nu);
            CHECK(std::abs(eval_T(*n, xa) - 1.0) <= 1e-12);
            CHECK(std::abs(finsler_L(*n, Eigen::Vector4d(xa.x(), xa.y(), xa.z(), 1.0))) <= 1e-12);
        }
    }
}

TEST_CASE("norm homogeneity, symmetry and duality") {
    const auto n = axisym(3, 0.3);
    for (const Vec3& v : directions()) {
        const Vec3 x = 0.8 * v + Vec3(0.1, -0.2, 0.05);
        CHECK(eval_T(*n, 2.5 * x) == doctest::Approx(2.5 * eval_T(*n, x)).epsilon(1e-9));
        CHECK(eval_T(*n, -x) == doctest::Approx(eval_T(*n, x)).epsilon(1e-9));
        CHECK(eval_T_dual(*n, 3.0 * x) == doctest::Approx(3.0 * eval_T_dual(*n, x)).epsilon(1e-12));
        // Cauchy-Schwarz for a norm and its dual
        for (const Vec3& u : {Vec3(1, 0, 0), Vec3(0, 0.3, 1), Vec3(-1, 2, 0.5)})
            CHECK(x.dot(u) <= eval_T(*n, x) * eval_T_dual(*n, u) * (1 + 1e-9));
        // grad T is the unit dual covector
        const Vec3 g = gauge_gradient(*n, x);
        CHECK(eval_T_dual(*n, g) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(g.dot(x) == doctest::Approx(eval_T(*n, x)).epsilon(1e-8));
    }
}

TEST_CASE("gauge gradient agrees with finite differences") {
    const auto n = axisym(3, 0.3);
    const Vec3 x(0.4, -0.7, 0.9);
    const Vec3 g = gauge_gradient(*n, x);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = h;
        CHECK((eval_T(*n, x + e) - eval_T(*n, x - e)) / (2 * h) == doctest::Approx(g[k]).epsilon(1e-6));
    }
}

TEST_CASE("dxi is the hessian of the support function") {
    const auto n = axisym(3, 0.3);
    for (const Vec3& v : directions()) {
        const Eigen::Matrix3d H = n->dxi_at(v);
        CHECK((H - H.transpose()).norm() <= 1e-12);
        // 1-homogeneity: the radial direction is in the kernel
        CHECK((H * v).norm() <= 1e-10);
        const double h = 1e-5;
        for (int k = 0; k < 3; ++k) {
            Vec3 e = Vec3::Zero();
            e[k] = h;
            const Vec3 fd = (n->xi_at((v + e).normalized()) * 1.0 - n->xi_at((v - e).normalized())) / (2 * h);
            // xi is 0-homogeneous, compare on the tangent projection of e
            const Vec3 et = e / h - v * v[k];
            CHECK((fd - H * et).norm() <= 1e-6);
        }
    }
}

TEST_CASE("mesh derivatives of tau match the analytic cahn-hoffman field") {
    const int s = level();
    const auto n = axisym(s, 0.3);
    double e = 0.0, ek = 0.0;
    for (int i = 0; i < n->mesh()->num_vertices(); ++i) {
        const Vec3& nu = n->mesh()->vertex(i);
        const Vec3 xi = n->dtau().ambient(i) + n->tau()[i] * nu;
        e = std::max(e, (xi - n->xi_at(nu)).norm());
        const Eigen::Matrix3d H = n->dxi_at(nu);
        const Eigen::Matrix<double, 3, 2> E = (Eigen::Matrix<double, 3, 2>() << n->mesh()->e1(i), n->mesh()->e2(i)).finished();
        const Eigen::Matrix2d m = E.transpose() * H * E;
        ek = std::max(ek, std::abs(1.0 / m.determinant() - n->kW()[i]));
    }
    CHECK(e <= 1e-8);
    CHECK(ek <= 1e-5);
}

TEST_CASE("wulff volume") {
    CHECK(wulff_volume(*isotropic(level())) == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-4));
    // oblate: volume of {T <= 1} checked against the polyhedral Wulff image
    const auto n = axisym(level(), 0.3);
    const double v = wulff_volume(*n);
    CHECK(v == doctest::Approx(2.8535).epsilon(1e-3));
    CHECK(v < 4.0 * std::numbers::pi / 3.0);
}

TEST_CASE("non-convex and non-positive norms are rejected") {
    CHECK_THROWS_AS(norm_from_spec(NormSpec::axisymmetric(0.6), mesh(3)), ConvexityError);
    CHECK_THROWS_AS(norm_from_spec(NormSpec::axisymmetric(2.0), mesh(3)), Error);
    NormSpec neg;
    neg.kind = NormSpec::Kind::Harmonics;
    neg.coeffs = {{0, 0, -1.0}};
    CHECK_THROWS_AS(norm_from_spec(neg, mesh(3)), PositivityError);
    // a = 0.49 is still convex
    CHECK_NOTHROW(norm_from_spec(NormSpec::axisymmetric(0.49), mesh(3)));
}

TEST_CASE("norm spec json") {
    const auto j = nlohmann::json::parse(R"({"kind": "harmonics", "coeffs": [[0, 0, 3.5], [2, 0, 0.1]]})");
    const NormSpec spec = NormSpec::from_json(j);
    CHECK(spec.kind == NormSpec::Kind::Harmonics);
    CHECK(spec.coeffs.size() == 2);
    CHECK(NormSpec::from_json(spec.to_json()).to_json() == spec.to_json());
    CHECK(NormSpec::from_json(NormSpec::axisymmetric(0.3).to_json()).a == 0.3);
    CHECK_THROWS_AS(NormSpec::from_json(nlohmann::json::parse(R"({"kind": "cubic"})")), ValidationError);
    CHECK_THROWS_AS(NormSpec::from_json(nlohmann::json::parse(R"({"kind": "axisymmetric"})")), ValidationError);
}
