#pragma once

#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "aniso/harmonics.hpp"
#include "aniso/jet.hpp"
#include "aniso/sphcalc.hpp"

namespace aniso {

struct NormSpec {
    enum class Kind { Isotropic, Axisymmetric, Harmonics };
    Kind kind = Kind::Isotropic;
    double a = 0.0;
    std::vector<std::tuple<int, int, double>> coeffs; // (l, m, c)

    static NormSpec isotropic() { return {}; }
    static NormSpec axisymmetric(double a) { return {Kind::Axisymmetric, a, {}}; }
    static NormSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // tau on the unit sphere, written as a polynomial in the components of n
    template <class T>
    T tau(const T& x, const T& y, const T& z) const {
        switch (kind) {
        case Kind::Isotropic:
            return T(1.0);
        case Kind::Axisymmetric:
            return T(1.0) - z * z * a;
        case Kind::Harmonics: {
            T s(0.0);
            for (const auto& [l, m, c] : coeffs) s = s + real_sh<T>(l, m, x, y, z) * c;
            return s;
        }
        }
        return T(1.0);
    }
};

// Support function of the Wulff shape, 1-homogeneous extension of tau.
// Gradient at a unit vector is the Cahn-Hoffman point, Hessian is dxi.
template <class T>
T support_function(const NormSpec& spec, const Eigen::Matrix<T, 3, 1>& x) {
    using std::sqrt;
    const T r = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    return spec.tau<T>(x[0] / r, x[1] / r, x[2] / r) * r;
}

class Norm {
public:
    static std::shared_ptr<const Norm> from_spec(const NormSpec& spec, const MeshPtr& mesh);

    const NormSpec& spec() const { return spec_; }
    const MeshPtr& mesh() const { return mesh_; }
    bool is_isotropic() const { return spec_.kind == NormSpec::Kind::Isotropic; }

    // mesh fields (exact tau, discrete derivatives)
    const ScalarField& tau() const { return tau_; }
    const TangentVectorField& dtau() const { return dtau_; }
    const TangentTensorField& d2tau() const { return d2tau_; }
    const std::vector<Sym2>& m_tau() const { return m_tau_; } // D^2 tau + tau I
    const ScalarField& kW() const { return kw_; }
    double min_m_tau_eigenvalue() const { return min_eig_; }
    int min_m_tau_vertex() const { return min_eig_vertex_; }

    // analytic evaluation at arbitrary directions
    double tau_at(const Vec3& nu) const;
    double support(const Vec3& x) const;
    Vec3 xi_at(const Vec3& nu) const;       // Dtau + tau nu
    Eigen::Matrix3d dxi_at(const Vec3& nu) const; // Hessian of the support function
    Vec3 xi_star_at(const Vec3& nu) const { return nu / tau_at(nu); }

private:
    Norm() = default;
    NormSpec spec_;
    MeshPtr mesh_;
    ScalarField tau_, kw_;
    TangentVectorField dtau_;
    TangentTensorField d2tau_;
    std::vector<Sym2> m_tau_;
    double min_eig_ = 0.0;
    int min_eig_vertex_ = -1;
};

using NormPtr = std::shared_ptr<const Norm>;

NormPtr norm_from_spec(const NormSpec& spec, const MeshPtr& mesh);

struct WulffShape {
    MeshPtr mesh;
    std::vector<Vec3> xi;
    std::vector<Vec3> xi_star;
};

// gauge of the Wulff shape: T(x) = sup_nu <x,nu>/tau(nu), so T = 1 on W
double eval_T(const Norm& norm, const Vec3& x);
// gradient of T at x != 0: xi* of the Wulff point in direction x
Vec3 gauge_gradient(const Norm& norm, const Vec3& x);
// T*(u) = sup_{T(xi)=1} <u, xi> = |u| tau(u/|u|)
double eval_T_dual(const Norm& norm, const Vec3& u);
WulffShape cahn_hoffman_map(const Norm& norm);
// L((x,t)) = T(x)^2 - t^2
double finsler_L(const Norm& norm, const Eigen::Vector4d& v);
double wulff_volume(const Norm& norm);

} // namespace aniso
