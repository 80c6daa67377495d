#pragma once

#include <cstdlib>
#include <map>
#include <string>

#include "aniso/norms.hpp"
#include "aniso/sphcalc.hpp"

namespace testing {

// Subdivision level for the accuracy tests; override with ANISO_TEST_SUBDIV.
inline int level() {
    static const int s = [] {
        const char* env = std::getenv("ANISO_TEST_SUBDIV");
        return env ? std::atoi(env) : 5;
    }();
    return s;
}

inline aniso::MeshPtr mesh(int s) {
    static std::map<int, aniso::MeshPtr> cache;
    auto& m = cache[s];
    if (!m) m = aniso::SphereMesh::icosphere(s);
    return m;
}

inline aniso::NormPtr isotropic(int s) {
    static std::map<int, aniso::NormPtr> cache;
    auto& n = cache[s];
    if (!n) n = aniso::norm_from_spec(aniso::NormSpec::isotropic(), mesh(s));
    return n;
}

inline aniso::NormPtr axisym(int s, double a = 0.3) {
    static std::map<std::pair<int, double>, aniso::NormPtr> cache;
    auto& n = cache[{s, a}];
    if (!n) n = aniso::norm_from_spec(aniso::NormSpec::axisymmetric(a), mesh(s));
    return n;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

inline double rel_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

// tau + c Y_20
inline aniso::ScalarField perturbed(const aniso::Norm& n, double c = 0.05) {
    return n.tau() + aniso::harmonic_field(n.mesh(), 2, 0) * c;
}

} // namespace testing
