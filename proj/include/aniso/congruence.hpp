#pragma once

#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "aniso/norms.hpp"
#include "aniso/surfaces.hpp"
#include "aniso/trimesh.hpp"

namespace aniso {

// Point (center, t) of R^4; t > 0 outer orientation, t < 0 inner, t = 0 point sphere.
struct OrientedSphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;

    Eigen::Vector4d point() const { return {center.x(), center.y(), center.z(), radius}; }
    int orientation() const { return radius > 0.0 ? 1 : (radius < 0.0 ? -1 : 0); }
};

// L(y - x, t); zero iff x lies on the sphere
double incidence(const Norm& norm, const OrientedSphere& Y, const Vec3& x);

// Y = X + rho (d, 1) over a support surface, d = xi unless given.
struct SphereCongruence {
    SurfacePtr base;
    ScalarField rho;
    std::vector<Vec3> direction;
    std::vector<Eigen::Vector4d> Y;

    OrientedSphere sphere(int i) const { return {Y[i].head<3>(), Y[i][3]}; }
};

SphereCongruence make_congruence(const SurfacePtr& base, const ScalarField& rho);
SphereCongruence make_congruence(const SurfacePtr& base, const ScalarField& rho, std::vector<Vec3> direction);

struct EnvelopeResiduals {
    double r1 = 0.0; // sup |L(Y - X)|
    double r2 = 0.0; // sup over frame directions of |dL_{Y-X}(dX(e))|
};
EnvelopeResiduals envelope_residuals(const SphereCongruence& c);

// Horizontal part of dZ (the null direction (xi,1) removed), taken by
// differentiating the coordinates of Z with the mesh stencils.
struct HorizontalDifferential {
    std::vector<Eigen::Matrix<double, 3, 2>> dZ;
    std::vector<Eigen::Matrix<double, 3, 2>> dX;
};
HorizontalDifferential horizontal_differential(const SphereCongruence& c);

struct CurvatureCongruences {
    SphereCongruence z1, z2;
    // per vertex: smallest singular value of the horizontal differential over ||dX||
    ScalarField sigma1, sigma2;
    double max_sigma1 = 0.0, max_sigma2 = 0.0;
};
CurvatureCongruences curvature_congruences(const SurfacePtr& surface);

struct MiddleCongruence {
    SphereCongruence z;
    double algebraic_trace_residual = 0.0; // tr(m_tau^-1 (m_q + rho m_tau)), exact formula
    double trace_residual = 0.0;           // same trace from the numerically differentiated dZ
};
MiddleCongruence middle_congruence(const SurfacePtr& surface);

struct SphereCurve {
    std::vector<double> s;
    std::vector<Eigen::Vector4d> alpha;
    std::vector<Eigen::Vector4d> dalpha;

    // (R cos s, R sin s, pitch s, t0 + dt s) for s in [s0, s1]
    static SphereCurve helix(double radius, double pitch, double t0, double dt, double s0, double s1, int n);
    static SphereCurve line(const Vec3& origin, const Vec3& direction, double t0, double dt, double s0, double s1,
                            int n);
    // samples at unit parameter spacing; derivative by finite differences
    static SphereCurve from_samples(const std::vector<Eigen::Vector4d>& points);
    static SphereCurve from_json(const nlohmann::json& spec);
};

// T(a') - |a4'| relative to T(a'); must exceed 1e-3 at every sample
void require_spacelike(const Norm& norm, const SphereCurve& curve);

struct CanalSurface {
    TriMesh strip;                // rings of `loop_size` vertices, one per curve sample
    int loop_size = 0;
    std::vector<std::vector<Vec3>> normals; // points of C(s) on the sphere
    double alpha_residual = 0.0;      // max |<xi*, a'> - a4'|
    double incidence_residual = 0.0;  // max |L(Y(s) - X)|
    double tangency_residual = 0.0;   // max |<xi*, dX>| along the strip, unit directions
};

CanalSurface canal_envelope(const Norm& norm, const SphereCurve& curve, int n_samples);

} // namespace aniso
