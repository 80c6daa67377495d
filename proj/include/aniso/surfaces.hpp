#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "aniso/jet.hpp"
#include "aniso/norms.hpp"
#include "aniso/sphcalc.hpp"
#include "aniso/trimesh.hpp"

namespace aniso {

// Convex surface X = Dq + q nu parameterized over its Gauss map.
class SupportSurface {
public:
    static std::shared_ptr<const SupportSurface> from_support(const ScalarField& q, const NormPtr& norm);

    const ScalarField& q() const { return q_; }
    const NormPtr& norm() const { return norm_; }
    const MeshPtr& mesh() const { return q_.mesh; }

    const std::vector<Vec3>& X() const { return X_; }
    const std::vector<Sym2>& m_q() const { return m_q_; }            // D^2 q + q I
    const std::vector<Eigen::Matrix2d>& A() const { return A_; }     // m_q m_tau^-1
    // eigenvalues of A are curvature radii mu_i = -1/lambda_i, sorted mu1 <= mu2
    const ScalarField& mu1() const { return mu1_; }
    const ScalarField& mu2() const { return mu2_; }
    const ScalarField& lambda1() const { return lambda1_; }
    const ScalarField& lambda2() const { return lambda2_; }
    const ScalarField& eta() const { return eta_; }   // tr A
    const ScalarField& det_A() const { return detA_; }

    TriMesh to_trimesh() const;

private:
    SupportSurface() = default;
    ScalarField q_;
    NormPtr norm_;
    std::vector<Vec3> X_;
    std::vector<Sym2> m_q_;
    std::vector<Eigen::Matrix2d> A_;
    ScalarField mu1_, mu2_, lambda1_, lambda2_, eta_, detA_;
};

using SurfacePtr = std::shared_ptr<const SupportSurface>;

SurfacePtr from_support(const ScalarField& q, const NormPtr& norm);
ScalarField parallel_support(const ScalarField& q, const Norm& norm, double t);
// max over vertices and frame directions of |<dX(e), xi*>|, with dX taken by
// differentiating the embedded coordinates of X through the mesh stencils
double legendre_residual(const SupportSurface& s);

using Jet2 = Jet<2>;
using Immersion = std::function<Eigen::Matrix<Jet2, 3, 1>(const Jet2& u, const Jet2& v)>;

struct ParametricPatch {
    int nu = 0, nv = 0;
    double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
    std::vector<double> us, vs;
    // row-major samples, index = i * nv + j for (us[i], vs[j])
    std::vector<Vec3> X, Xu, Xv, normal, normal_u, normal_v;
    std::vector<Vec3> xi, xi_u, xi_v;
    std::vector<double> tau;

    int size() const { return nu * nv; }
};

ParametricPatch make_patch(const Immersion& f, const Norm& norm, double u0, double u1, int nu, double v0, double v1,
                           int nv);
ParametricPatch helicoid_patch(const Norm& norm, double a, double r0, double r1, int nr, double th0, double th1,
                               int nth);
Immersion sphere_immersion(double radius);    // (theta, phi)
Immersion ellipsoid_immersion(const Vec3& axes);
Immersion helicoid_immersion(double a);       // (r, theta)

double legendre_residual(const ParametricPatch& p);

struct PatchCurvatures {
    std::vector<double> lambda1, lambda2, Lambda, eta;
    double max_abs_Lambda = 0.0;
    double max_abs_eta = 0.0;
};
PatchCurvatures patch_anisotropic_curvatures(const ParametricPatch& patch, const Norm& norm);

ScalarField fit_support(const TriMesh& input, const MeshPtr& mesh, int l_fit = 12);
// least-squares projection onto harmonics l <= lmax using the quadrature weights
ScalarField project_harmonics(const ScalarField& f, int lmax);

TriMesh ellipsoid_trimesh(const Vec3& axes, int subdivisions);
ScalarField ellipsoid_support(const MeshPtr& mesh, const Vec3& axes);

// Surface presets (support, harmonics, ellipsoid). Helicoids are patches and are
// handled by the caller.
ScalarField support_from_preset(const nlohmann::json& spec, const Norm& norm);

} // namespace aniso
