#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "aniso/surfaces.hpp"

namespace aniso {

// 1/4 int (1/lambda1 - 1/lambda2)^2 dW, evaluated as 1/4 int (eta^2 - 4 det A) det(m_tau) dsigma
double laguerre_functional(const SupportSurface& s);
// int T*(nu) dSigma = int tau det(m_q) dsigma
double energy(const SupportSurface& s);
// Euclidean area int det(m_q) dsigma
double surface_area(const SupportSurface& s);

struct GaugeInvariant {
    double volume_form = 0.0; // (int tau eta dW)^2 - 12 vol(W) F
    double lambda_form = 0.0; // (int tau Lambda dSigma)^2 - 4 F int tau (K_S/K_W) dSigma
};
GaugeInvariant gauge_invariant_forms(const SupportSurface& s);
double gauge_invariant_I(const SupportSurface& s);

// tau (t^2 + eta t + det A)
ScalarField q_density(const SupportSurface& s, double t);

// V(t) = c0 + c1 t + c2 t^2 + c3 t^3, volume enclosed by X + t xi
std::array<double, 4> steiner_coefficients(const SupportSurface& s);
double enclosed_volume(const SupportSurface& s, double t);

struct InvariantReport {
    double laguerre = 0.0;
    double energy = 0.0;
    double I = 0.0;
    double I_volume_form = 0.0;
    double I_lambda_form = 0.0;
    std::optional<double> ratio;
    std::array<double, 4> steiner{};
    double area = 0.0;
    double floor = 0.0;
    int subdivisions = -1;
    nlohmann::json norm_spec;

    nlohmann::json to_json() const;
};
InvariantReport invariant_report(const SupportSurface& s);

struct CompareVerdict {
    double L1 = 0.0, L2 = 0.0, I1 = 0.0, I2 = 0.0;
    double tol_rel = 0.0;
    double floor = 0.0;
    bool distinct_source = false;
    std::string verdict;

    nlohmann::json to_json() const;
};
CompareVerdict compare_wavefronts(const ScalarField& q1, const ScalarField& q2, const NormPtr& norm,
                                  double tol_rel = 1e-2);

} // namespace aniso
