#pragma once
#include <array>
#include <string>
#include <vector>
#include <Eigen/Core>
#include "aniso/norms.hpp"
#include "aniso/surfaces.hpp"
#include "aniso/trimesh.hpp"

namespace aniso {

// Cube [lo, hi]^3 sampled with n nodes per axis.
struct GridSpec {
    double lo = -2.0;
    double hi = 2.0;
    int n = 64;
    double spacing() const { return (hi - lo) / (n - 1); }
};

// Node-centred samples of the front function S, x index fastest.
struct LevelGrid {
    std::array<int, 3> dims{0, 0, 0};
    double h = 0.0;
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    std::vector<double> S;
    double time = 0.0;

    static LevelGrid make(const GridSpec& spec);
    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k);
    }
    double at(int i, int j, int k) const { return S[index(i, j, k)]; }
    Eigen::Vector3d node(int i, int j, int k) const { return origin + h * Eigen::Vector3d(i, j, k); }
    std::size_t size() const { return S.size(); }
    // trilinear interpolation, clamped to the grid
    double sample(const Eigen::Vector3d& p) const;

    std::string to_raw() const;
    void write_raw(const std::string& path) const;
    static LevelGrid read_raw(const std::string& path);
};

// Signed distance to a closed mesh, negative inside. Requires a margin of five cells.
LevelGrid init_from_surface(const TriMesh& surface, const GridSpec& spec);
LevelGrid init_from_surface(const SupportSurface& surface, const GridSpec& spec);

// Lax-Friedrichs dissipation coefficients: 1.01 * max over directions of |xi_i|.
Eigen::Vector3d lf_alpha(const Norm& norm);
double max_stable_dt(const Norm& norm, const LevelGrid& grid);

// One explicit Euler step of S_t + T*(grad S) = 0.
LevelGrid hj_step(const Norm& norm, const LevelGrid& grid, double dt);
// Uniform steps at the largest stable dt that lands exactly on t_final.
LevelGrid evolve(const Norm& norm, const LevelGrid& grid, double t_final);

// Zero level by marching tetrahedra, oriented toward increasing S.
TriMesh extract_zero_level(const LevelGrid& grid);

struct HuygensReport {
    double t = 0.0;
    double h = 0.0;
    double hausdorff = 0.0;
    double cells() const { return hausdorff / h; }
    int steps = 0;
};

// HJ front from the surface versus the parallel surface q + t tau.
HuygensReport huygens_check(const Norm& norm, const SupportSurface& surface, double t, const GridSpec& spec);

} // namespace aniso
