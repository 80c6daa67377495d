#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "aniso/norms.hpp"
#include "aniso/sphcalc.hpp"

namespace aniso {

struct LinearOperator {
    MeshPtr mesh;
    SpMat matrix;
    std::string description;

    ScalarField apply(const ScalarField& f) const;
};

// F = E o H - 2 (Lap + 2), with
//   H q   = tr((D^2 q + q I) m_tau^-1)
//   E eta = (1/K_W) tr((D^2 eta + eta I) m_tau^-1)
struct ELOperator {
    LinearOperator F, H, E, laplacian;
    double min_symbol_eigenvalue = 0.0; // of m_tau^-1, positive for an elliptic operator
};
ELOperator assemble_F(const Norm& norm);

ScalarField el_residual(const Norm& norm, const ScalarField& q);
ScalarField el_residual(const ELOperator& op, const ScalarField& q);

// d/de L[q + e qdot] at e = 0, equal to 1/2 int qdot F[q] dsigma
double first_variation(const ELOperator& op, const ScalarField& q, const ScalarField& qdot);
double first_variation(const Norm& norm, const ScalarField& q, const ScalarField& qdot);
// d^2/de^2 L[q + e qdot], equal to 1/2 int qdot F[qdot] dsigma (L is quadratic in q)
double second_variation(const ELOperator& op, const ScalarField& qdot);
double second_variation(const Norm& norm, const ScalarField& qdot);

struct CapRegion {
    Vec3 center = Vec3::UnitZ();
    double radius = 0.0; // geodesic
    std::vector<int> interior;
    std::vector<int> ring1; // boundary layer next to the interior
    std::vector<int> ring2; // outer boundary layer
};

// interior = vertices within the geodesic radius; the clamped boundary is every other
// vertex reached by the interior rows of F, split into two layers by graph distance
CapRegion make_cap(const ELOperator& op, const Vec3& center, double radius);

struct CapSolution {
    ScalarField q;
    double residual = 0.0; // relative, ||F_II q_I + F_IB q_B|| / ||F_IB q_B||
    int iterations = 0;
    double interior_el_residual = 0.0; // max |F[q]| over interior vertices
    std::vector<std::string> kernel_warnings;

    nlohmann::json report() const;
};

// SolverError when the relative residual after refinement exceeds tol
CapSolution solve_cap(const ELOperator& op, const CapRegion& region, const ScalarField& boundary_q,
                      double tol = 1e-8);

} // namespace aniso
