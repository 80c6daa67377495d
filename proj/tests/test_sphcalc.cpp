#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "aniso/errors.hpp"
#include "aniso/harmonics.hpp"
#include "aniso/io.hpp"
#include "aniso/sphcalc.hpp"
#include "common.hpp"

using namespace aniso;
using testing::level;
using testing::max_abs;
using testing::mesh;

namespace {

const double kPi = std::numbers::pi;

ScalarField nu(const MeshPtr& m, int k) {
    return sample(m, [k](const Vec3& v) { return v[k]; });
}

double grad_error(const MeshPtr& m, const ScalarField& f, const std::function<Vec3(const Vec3&)>& ambient) {
    const auto g = grad(f);
    double e = 0.0;
    for (int i = 0; i < m->num_vertices(); ++i) {
        const Vec3& v = m->vertex(i);
        Vec3 a = ambient(v);
        a -= a.dot(v) * v;
        e = std::max(e, (g.ambient(i) - a).norm());
    }
    return e;
}

double laplace_spectrum_error(int s) {
    double worst = 0.0;
    for (int l = 1; l <= 3; ++l)
        for (int m = -l; m <= l; ++m) {
            const ScalarField f = harmonic_field(mesh(s), l, m);
            const double ev = -l * (l + 1.0);
            worst = std::max(worst, (laplace(f).values - ev * f.values).norm() / std::abs(ev) / f.values.norm());
        }
    return worst;
}

} // namespace

TEST_CASE("icosphere combinatorics") {
    CHECK(mesh(0)->num_vertices() == 12);
    CHECK(mesh(0)->num_faces() == 20);
    CHECK(mesh(3)->num_vertices() == 642);
    CHECK(mesh(3)->num_faces() == 1280);
    CHECK(mesh(5)->num_vertices() == 10 * 1024 + 2);
}

TEST_CASE("mesh invariants") {
    for (int s : {0, 2, 4, level()}) {
        const auto m = mesh(s);
        double wsum = 0.0;
        for (int i = 0; i < m->num_vertices(); ++i) {
            const Vec3& v = m->vertex(i);
            CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
            CHECK(m->weights()[i] > 0.0);
            wsum += m->weights()[i];
            CHECK(std::abs(m->e1(i).norm() - 1.0) <= 1e-12);
            CHECK(std::abs(m->e2(i).norm() - 1.0) <= 1e-12);
            CHECK(std::abs(m->e1(i).dot(m->e2(i))) <= 1e-12);
            CHECK(std::abs(m->e1(i).dot(v)) <= 1e-12);
            CHECK(std::abs(m->e2(i).dot(v)) <= 1e-12);
            // right-handed frame so e1 x e2 is the outward normal
            CHECK(m->e1(i).cross(m->e2(i)).dot(v) > 0.0);
        }
        CHECK(std::abs(wsum - 4.0 * kPi) <= 1e-10 * 4.0 * kPi);
    }
}

TEST_CASE("derivatives of constants vanish") {
    const auto m = mesh(level());
    const ScalarField c(m, 3.7);
    const auto g = grad(c);
    CHECK(g.values.cwiseAbs().maxCoeff() <= 1e-10);
    for (const auto& h : hess(c).values) {
        CHECK(std::abs(h.xx) <= 1e-10);
        CHECK(std::abs(h.xy) <= 1e-10);
        CHECK(std::abs(h.yy) <= 1e-10);
    }
    CHECK(max_abs(laplace(c).values) <= 1e-10);
    CHECK(max_abs(laplace(ScalarField(m, 1.0)).values) <= 1e-10);
}

TEST_CASE("gradient of coordinate and l=2 functions converges") {
    double prev_z = 0.0, prev_xy = 0.0;
    for (int s : {3, 4, level()}) {
        const auto m = mesh(s);
        const double ez = grad_error(m, nu(m, 2), [](const Vec3&) { return Vec3(0, 0, 1); });
        const double exy = grad_error(m, nu(m, 0) * nu(m, 1), [](const Vec3& v) { return Vec3(v.y(), v.x(), 0); });
        CHECK(ez <= 1e-4);
        CHECK(exy <= 1e-3);
        if (s > 3) {
            // at least second order unless already at roundoff
            if (prev_z > 1e-10) CHECK(prev_z / ez >= 3.0);
            if (prev_xy > 1e-10) CHECK(prev_xy / exy >= 3.0);
        }
        prev_z = ez;
        prev_xy = exy;
    }
}

TEST_CASE("hessian of nu3 is -nu3 times the metric") {
    const auto m = mesh(level());
    const ScalarField z = nu(m, 2);
    const auto h = hess(z);
    double e = 0.0;
    for (int i = 0; i < m->num_vertices(); ++i) {
        e = std::max({e, std::abs(h.values[i].xx + z[i]), std::abs(h.values[i].yy + z[i]), std::abs(h.values[i].xy)});
    }
    CHECK(e <= 1e-6);
}

TEST_CASE("trace of the hessian is the laplacian") {
    const auto m = mesh(level());
    const ScalarField f = band_limited_field(m, 5, 7);
    const auto h = hess(f);
    const auto L = laplace(f);
    double e = 0.0;
    for (int i = 0; i < m->num_vertices(); ++i) e = std::max(e, std::abs(h.values[i].trace() - L[i]));
    CHECK(e <= 1e-10 * std::max(1.0, max_abs(L.values)));
}

TEST_CASE("laplacian spectrum") {
    const auto m = mesh(level());
    for (int mm = -1; mm <= 1; ++mm) {
        const ScalarField f = harmonic_field(m, 1, mm);
        CHECK(testing::rel_l2(laplace(f).values, (f * -2.0).values) <= 1e-2);
    }
    for (int mm = -2; mm <= 2; ++mm) {
        const ScalarField f = harmonic_field(m, 2, mm);
        CHECK(testing::rel_l2(laplace(f).values, (f * -6.0).values) <= 1e-2);
    }
    const double e4 = laplace_spectrum_error(4), e5 = laplace_spectrum_error(5);
    CHECK(e5 <= 1e-2);
    CHECK(e4 / e5 >= 3.0);
}

TEST_CASE("quadrature moments") {
    const auto m = mesh(level());
    CHECK(std::abs(integrate(ScalarField(m, 1.0)) - 4.0 * kPi) <= 1e-10);
    CHECK(std::abs(integrate(nu(m, 2))) <= 1e-10);
    CHECK(std::abs(integrate(nu(m, 2) * nu(m, 2)) - 4.0 * kPi / 3.0) <= 1e-4);
    // orthonormal harmonics
    const auto y20 = harmonic_field(m, 2, 0), y31 = harmonic_field(m, 3, 1);
    CHECK(std::abs(integrate(y20 * y20) - 1.0) <= 1e-3);
    CHECK(std::abs(integrate(y20 * y31)) <= 1e-3);
}

TEST_CASE("monge-ampere operator") {
    const auto m = mesh(level());
    CHECK(max_abs(monge_ampere(ScalarField(m, 2.0)).values) <= 1e-10);
    for (int k : {0, 2}) {
        const ScalarField x = nu(m, k);
        CHECK(max_abs(monge_ampere(x).values - (x * x).values) <= 1e-6);
    }
}

TEST_CASE("monge-ampere bilinear form") {
    const auto m = mesh(level());
    const ScalarField u = band_limited_field(m, 4, 1), w = band_limited_field(m, 4, 2);
    const double scale = max_abs(monge_ampere(u).values);
    CHECK(max_abs(ma_bilinear(u, u).values - (monge_ampere(u) * 2.0).values) <= 1e-9 * scale);
    CHECK(max_abs(ma_bilinear(u, w).values - ma_bilinear(w, u).values) <= 1e-9 * scale);
    const ScalarField z = nu(m, 2);
    CHECK(max_abs(ma_bilinear(z, z).values - (z * z * 2.0).values) <= 1e-6);
    // derivative of M along w by centered differences
    const double t = 1e-5;
    const ScalarField fd = (monge_ampere(u + w * t) - monge_ampere(u - w * t)) * (0.5 / t);
    CHECK(max_abs(fd.values - ma_bilinear(u, w).values) <= 1e-6 * scale);
    // constants have zero hessian
    CHECK(max_abs(ma_bilinear(u, ScalarField(m, 1.0)).values) <= 1e-10 * scale);
}

TEST_CASE("integration by parts identity") {
    const auto m = mesh(level());
    CHECK(ibp_residual(ScalarField(m, 1.0), ScalarField(m, 2.0), ScalarField(m, -1.0)) <= 1e-10);
    const IbpReport r = ibp_check(nu(m, 2), nu(m, 0), nu(m, 1));
    CHECK(r.relative <= 1e-3);
    double prev = 0.0;
    for (int s : {3, 4, 5}) {
        const auto ms = mesh(s);
        const IbpReport b = ibp_check(band_limited_field(ms, 4, 42), band_limited_field(ms, 4, 43),
                                      band_limited_field(ms, 4, 44));
        if (s == 5) CHECK(b.relative <= 1e-3);
        if (s > 3) CHECK(prev / b.relative >= 3.0);
        prev = b.relative;
    }
}

TEST_CASE("band-limited fields are reproducible and band-limited") {
    const auto m = mesh(3);
    const auto a = band_limited_field(m, 4, 42), b = band_limited_field(m, 4, 42), c = band_limited_field(m, 4, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    const auto hi = band_limited_field(m, 3, 5, 2);
    CHECK(std::abs(integrate(hi)) <= 1e-8);
}

TEST_CASE("fields on different meshes are rejected") {
    CHECK_THROWS_AS(harmonic_field(mesh(2), 1, 0) + harmonic_field(mesh(3), 1, 0), MeshMismatchError);
    CHECK_THROWS_AS(SphereMesh::from_arrays({Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{{0, 1, 2}}}),
                    ValidationError);
}

TEST_CASE("obj and csv round trip") {
    const auto tmp = std::filesystem::temp_directory_path() / "aniso_sph_io";
    std::filesystem::create_directories(tmp);
    const auto m = mesh(2);
    m->write_obj((tmp / "m.obj").string());
    const auto r = SphereMesh::read_obj((tmp / "m.obj").string());
    REQUIRE(r->num_vertices() == m->num_vertices());
    for (int i = 0; i < m->num_vertices(); ++i) CHECK((r->vertex(i) - m->vertex(i)).norm() <= 1e-15);
    CHECK(r->faces() == m->faces());
    const std::string csv = to_csv(harmonic_field(m, 1, 0));
    CHECK(csv.rfind("vertex,x,y,z,value\n", 0) == 0);
    std::filesystem::remove_all(tmp);
}
