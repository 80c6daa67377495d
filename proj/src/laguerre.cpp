#include "aniso/laguerre.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "aniso/io.hpp"

namespace aniso {

namespace {

template <class F>
double integrate_vertexwise(const SupportSurface& s, F&& f) {
    const auto& w = s.mesh()->weights();
    double sum = 0.0;
    for (int i = 0; i < s.mesh()->num_vertices(); ++i) sum += f(i) * w[i];
    return sum;
}

constexpr double kFloorFactor = 1e-8;

} // namespace

double laguerre_functional(const SupportSurface& s) {
    const auto& mt = s.norm()->m_tau();
    return 0.25 * integrate_vertexwise(s, [&](int i) {
        const double eta = s.eta()[i];
        return (eta * eta - 4.0 * s.det_A()[i]) * mt[i].det();
    });
}

double energy(const SupportSurface& s) {
    const auto& tau = s.norm()->tau();
    return integrate_vertexwise(s, [&](int i) { return tau[i] * s.m_q()[i].det(); });
}

double surface_area(const SupportSurface& s) {
    return integrate_vertexwise(s, [&](int i) { return s.m_q()[i].det(); });
}

GaugeInvariant gauge_invariant_forms(const SupportSurface& s) {
    const auto& tau = s.norm()->tau();
    const auto& mt = s.norm()->m_tau();
    const double F = energy(s);
    GaugeInvariant g;
    // dW = det(m_tau) dsigma
    const double c1 = integrate_vertexwise(s, [&](int i) { return tau[i] * s.eta()[i] * mt[i].det(); });
    g.volume_form = c1 * c1 - 12.0 * wulff_volume(*s.norm()) * F;
    // dSigma = det(m_q) dsigma, K_S/K_W = 1/det A = lambda1 lambda2
    const double a = integrate_vertexwise(s, [&](int i) {
        return tau[i] * (s.lambda1()[i] + s.lambda2()[i]) * s.m_q()[i].det();
    });
    const double b = integrate_vertexwise(s, [&](int i) {
        return tau[i] * s.lambda1()[i] * s.lambda2()[i] * s.m_q()[i].det();
    });
    g.lambda_form = a * a - 4.0 * F * b;
    return g;
}

double gauge_invariant_I(const SupportSurface& s) { return gauge_invariant_forms(s).volume_form; }

ScalarField q_density(const SupportSurface& s, double t) {
    const auto& tau = s.norm()->tau();
    Eigen::VectorXd v(s.mesh()->num_vertices());
    for (int i = 0; i < v.size(); ++i) v[i] = tau[i] * (t * t + s.eta()[i] * t + s.det_A()[i]);
    return {s.mesh(), v};
}

double enclosed_volume(const SupportSurface& s, double t) {
    // (1/3) int <X_t, nu> dA_t with X_t = X + t xi, support q + t tau, dA_t = det(m_q + t m_tau) dsigma
    const auto& tau = s.norm()->tau();
    const auto& mt = s.norm()->m_tau();
    return integrate_vertexwise(s, [&](int i) {
        const Sym2& a = s.m_q()[i];
        const Sym2& b = mt[i];
        const Sym2 m{a.xx + t * b.xx, a.xy + t * b.xy, a.yy + t * b.yy};
        return (s.q()[i] + t * tau[i]) * m.det() / 3.0;
    });
}

std::array<double, 4> steiner_coefficients(const SupportSurface& s) {
    const std::array<double, 4> ts{-1.0, 0.0, 1.0, 2.0};
    Eigen::Matrix4d V;
    Eigen::Vector4d y;
    for (int k = 0; k < 4; ++k) {
        for (int p = 0; p < 4; ++p) V(k, p) = std::pow(ts[k], p);
        y[k] = enclosed_volume(s, ts[k]);
    }
    const Eigen::Vector4d c = V.fullPivLu().solve(y);
    return {c[0], c[1], c[2], c[3]};
}

InvariantReport invariant_report(const SupportSurface& s) {
    InvariantReport r;
    r.laguerre = laguerre_functional(s);
    r.energy = energy(s);
    const auto g = gauge_invariant_forms(s);
    r.I = g.volume_form;
    r.I_volume_form = g.volume_form;
    r.I_lambda_form = g.lambda_form;
    r.area = surface_area(s);
    r.floor = kFloorFactor * std::abs(r.area);
    if (std::abs(r.laguerre) > r.floor) r.ratio = r.I / r.laguerre;
    r.steiner = steiner_coefficients(s);
    r.subdivisions = s.mesh()->subdivisions();
    r.norm_spec = s.norm()->spec().to_json();
    return r;
}

nlohmann::json InvariantReport::to_json() const {
    nlohmann::json j;
    j["laguerre"] = laguerre;
    j["energy"] = energy;
    j["I"] = I;
    j["I_forms"] = {{"volume", I_volume_form}, {"lambda", I_lambda_form}};
    j["ratio"] = ratio ? nlohmann::json(*ratio) : nlohmann::json(nullptr);
    j["steiner"] = steiner;
    j["area"] = area;
    j["meta"] = {{"subdivisions", subdivisions}, {"norm", norm_spec}, {"ratio_floor", floor}};
    return j;
}

CompareVerdict compare_wavefronts(const ScalarField& q1, const ScalarField& q2, const NormPtr& norm, double tol_rel) {
    const auto s1 = from_support(q1, norm);
    const auto s2 = from_support(q2, norm);
    CompareVerdict v;
    v.L1 = laguerre_functional(*s1);
    v.L2 = laguerre_functional(*s2);
    v.I1 = gauge_invariant_I(*s1);
    v.I2 = gauge_invariant_I(*s2);
    v.tol_rel = tol_rel;
    v.floor = kFloorFactor * std::max(std::abs(surface_area(*s1)), std::abs(surface_area(*s2)));
    const double scale = std::max({std::abs(v.L1), std::abs(v.L2), v.floor});
    v.distinct_source = std::abs(v.L1 - v.L2) > tol_rel * scale;
    v.verdict = v.distinct_source ? "distinct sources" : "inconclusive — consistent with a common source";
    return v;
}

nlohmann::json CompareVerdict::to_json() const {
    return {{"L1", L1}, {"L2", L2}, {"I1", I1}, {"I2", I2}, {"tol_rel", tol_rel}, {"floor", floor},
            {"distinct_source", distinct_source}, {"verdict", verdict}};
}

} // namespace aniso
