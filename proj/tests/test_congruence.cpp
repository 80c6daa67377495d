#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "aniso/congruence.hpp"
#include "aniso/errors.hpp"
#include "common.hpp"

using namespace aniso;
using testing::axisym;
using testing::isotropic;
using testing::level;
using testing::mesh;

namespace {

EnvelopeResiduals parallel_residuals(int s, double rho) {
    const auto n = axisym(s, 0.3);
    const auto surf = from_support(testing::perturbed(*n), n);
    return envelope_residuals(make_congruence(surf, ScalarField(n->mesh(), rho)));
}

} // namespace

TEST_CASE("incidence of points on anisotropic spheres") {
    const auto n = axisym(3, 0.3);
    const OrientedSphere Y{Vec3(0.3, -0.2, 0.1), 0.8};
    for (const Vec3& nu : {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.6, 0.0, 0.8), Vec3(-0.48, 0.6, 0.64)}) {
        const Vec3 x = Y.center + Y.radius * n->xi_at(nu);
        CHECK(std::abs(incidence(*n, Y, x)) <= 1e-12);
    }
    // the centre is inside, a far point outside
    CHECK(incidence(*n, Y, Y.center) < 0.0);
    CHECK(incidence(*n, Y, Y.center + Vec3(3, 0, 0)) > 0.0);
    CHECK(Y.orientation() == 1);
    CHECK(OrientedSphere{Vec3::Zero(), -1.0}.orientation() == -1);
    CHECK(OrientedSphere{Vec3::Zero(), 0.0}.orientation() == 0);
}

TEST_CASE("envelope residuals of parallel congruences") {
    const auto r = parallel_residuals(level(), 0.4);
    CHECK(r.r1 <= 1e-10);
    CHECK(r.r2 <= 1e-3);
    CHECK(parallel_residuals(level(), -0.25).r1 <= 1e-10);
    // second order in the mesh spacing
    const auto r4 = parallel_residuals(4, 0.4), r5 = parallel_residuals(5, 0.4);
    CHECK(r4.r2 / r5.r2 >= 3.0);
}

TEST_CASE("normal-direction congruences are not enveloped") {
    const auto n = axisym(4, 0.3);
    const auto surf = from_support(testing::perturbed(*n), n);
    std::vector<Vec3> normals(n->mesh()->vertices());
    const auto c = make_congruence(surf, ScalarField(n->mesh(), 0.4), normals);
    const auto r = envelope_residuals(c);
    CHECK(r.r1 > 1e-2);
    CHECK_THROWS_AS(make_congruence(surf, ScalarField(n->mesh(), 0.4), std::vector<Vec3>(3)), ValidationError);
}

TEST_CASE("curvature congruences are degenerate") {
    for (const auto& n : {isotropic(level()), axisym(level(), 0.3)}) {
        const auto surf = from_support(testing::perturbed(*n, 0.1), n);
        const auto cc = curvature_congruences(surf);
        CHECK(cc.max_sigma1 <= 1e-2);
        CHECK(cc.max_sigma2 <= 1e-2);
        // a generic radius is not
        const auto hd = horizontal_differential(make_congruence(surf, surf->mu1() * 0.5));
        double smin = 1e300;
        for (size_t i = 0; i < hd.dZ.size(); ++i) {
            Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(hd.dZ[i]);
            smin = std::min(smin, svd.singularValues()[1] / hd.dX[i].norm());
        }
        CHECK(smin > 1e-2);
    }
}

TEST_CASE("middle congruence is trace free") {
    const auto n = axisym(level(), 0.3);
    const auto surf = from_support(testing::perturbed(*n, 0.1), n);
    const auto m = middle_congruence(surf);
    CHECK(m.algebraic_trace_residual <= 1e-12);
    CHECK(m.trace_residual <= 1e-3);
    for (int i = 0; i < surf->mesh()->num_vertices(); ++i)
        CHECK(m.z.rho[i] == doctest::Approx(-0.5 * surf->eta()[i]).epsilon(1e-12));
}

TEST_CASE("isotropic tube around a line is a cylinder") {
    const auto n = isotropic(3);
    const double R = 0.5;
    const auto curve = SphereCurve::line(Vec3::Zero(), Vec3::UnitX(), R, 0.0, -1.0, 1.0, 21);
    const auto canal = canal_envelope(*n, curve, 96);
    double e = 0.0;
    for (const Vec3& p : canal.strip.vertices) e = std::max(e, std::abs(std::hypot(p.y(), p.z()) - R));
    CHECK(e <= 1e-3);
    CHECK(canal.alpha_residual <= 1e-6);
    CHECK(canal.loop_size >= 3);
}

TEST_CASE("canal surface of the helix curve") {
    const auto n = isotropic(4);
    const auto curve = SphereCurve::helix(1.0, 0.0, 0.0, 0.2, 0.5, 6.0, 64);
    const auto canal = canal_envelope(*n, curve, 96);
    CHECK(canal.alpha_residual <= 1e-6);
    CHECK(canal.incidence_residual <= 1e-6);
    CHECK(canal.tangency_residual <= 5e-3);
    CHECK(canal.strip.vertices.size() == curve.s.size() * static_cast<size_t>(canal.loop_size));
    const auto an = axisym(4, 0.3);
    const auto ac = canal_envelope(*an, SphereCurve::helix(1.0, 0.2, 0.5, 0.1, 0.0, 3.0, 32), 64);
    CHECK(ac.alpha_residual <= 1e-6);
    CHECK(ac.incidence_residual <= 1e-6);
}

TEST_CASE("timelike curves are rejected") {
    const auto n = axisym(3, 0.3);
    const auto fast = SphereCurve::line(Vec3::Zero(), Vec3::UnitX(), 0.5, 2.0, 0.0, 1.0, 8);
    CHECK_THROWS_AS(require_spacelike(*n, fast), NotSpacelikeError);
    CHECK_THROWS_AS(canal_envelope(*n, fast, 32), NotSpacelikeError);
    // along z the gauge is 1/0.7, so dt = 1.2 is still spacelike there
    CHECK_NOTHROW(require_spacelike(*n, SphereCurve::line(Vec3::Zero(), Vec3::UnitZ(), 0.5, 1.2, 0.0, 1.0, 8)));
    CHECK_THROWS_AS(require_spacelike(*n, SphereCurve::line(Vec3::Zero(), Vec3::UnitX(), 0.5, 1.2, 0.0, 1.0, 8)),
                    NotSpacelikeError);
}

TEST_CASE("curve specs") {
    const auto h = SphereCurve::from_json(
        nlohmann::json::parse(R"({"kind": "helix", "radius": 2, "pitch": 0.1, "t": 0.3, "dt": 0.05, "samples": 10})"));
    REQUIRE(h.alpha.size() == 10);
    CHECK(h.alpha[0].isApprox(Eigen::Vector4d(2, 0, 0, 0.3)));
    CHECK(h.dalpha[0].isApprox(Eigen::Vector4d(0, 2, 0.1, 0.05)));
    const auto s = SphereCurve::from_json(
        nlohmann::json::parse(R"({"kind": "samples", "points": [[0,0,0,1], [1,0,0,1], [2,0,0,1], [3,0,0,1]]})"));
    for (const auto& d : s.dalpha) CHECK(d.isApprox(Eigen::Vector4d(1, 0, 0, 0)));
    CHECK_THROWS_AS(SphereCurve::from_json(nlohmann::json::parse(R"({"kind": "spiral"})")), ValidationError);
    CHECK_THROWS_AS(SphereCurve::from_json(nlohmann::json::parse(R"({"kind": "samples", "points": [[0,0,0]]})")),
                    ValidationError);
}
