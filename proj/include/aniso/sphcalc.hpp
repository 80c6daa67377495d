#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

namespace aniso {

using Vec3 = Eigen::Vector3d;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Symmetric 2x2 tensor in a local orthonormal frame.
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double trace() const { return xx + yy; }
    double det() const { return xx * yy - xy * xy; }
    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d m;
        m << xx, xy, xy, yy;
        return m;
    }
    Sym2 plus_identity(double s) const { return {xx + s, xy, yy + s}; }
    double min_eigenvalue() const;
};

// Linear derivative operators in the local frames, one row per vertex.
struct Stencils {
    SpMat gu, gv;
    SpMat huu, huv, hvv;
    SpMat laplacian;
    std::vector<int> fit_degree; // polynomial degree actually used per vertex
};

class SphereMesh {
public:
    static std::shared_ptr<const SphereMesh> icosphere(int subdivisions);
    // Vertices are renormalized; inputs more than 1e-6 off the unit sphere are rejected.
    static std::shared_ptr<const SphereMesh> from_arrays(std::vector<Vec3> vertices,
                                                         std::vector<std::array<int, 3>> faces);
    static std::shared_ptr<const SphereMesh> read_obj(const std::string& path);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_faces() const { return static_cast<int>(faces_.size()); }
    int subdivisions() const { return subdivisions_; }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const Vec3& vertex(int i) const { return vertices_[i]; }
    const std::vector<std::array<int, 3>>& faces() const { return faces_; }
    const Vec3& e1(int i) const { return e1_[i]; }
    const Vec3& e2(int i) const { return e2_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }

    // mean edge length (chordal)
    double spacing() const { return spacing_; }

    const Stencils& stencils() const;

    void write_obj(const std::string& path) const;

private:
    SphereMesh() = default;
    void finalize();
    void build_stencils() const;

    int subdivisions_ = -1;
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 3>> faces_;
    std::vector<Vec3> e1_, e2_;
    std::vector<double> weights_;
    std::vector<std::vector<int>> adjacency_;
    double spacing_ = 0.0;

    mutable std::once_flag stencil_once_;
    mutable Stencils stencils_;
};

using MeshPtr = std::shared_ptr<const SphereMesh>;

struct ScalarField {
    MeshPtr mesh;
    Eigen::VectorXd values;

    ScalarField() = default;
    ScalarField(MeshPtr m, Eigen::VectorXd v);
    ScalarField(MeshPtr m, double c);

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[i]; }

    ScalarField operator+(const ScalarField& o) const;
    ScalarField operator-(const ScalarField& o) const;
    ScalarField operator*(double s) const;
    ScalarField operator*(const ScalarField& o) const; // pointwise
};

// f(nu) sampled at every vertex
template <class F>
ScalarField sample(const MeshPtr& mesh, F&& f) {
    Eigen::VectorXd v(mesh->num_vertices());
    for (int i = 0; i < mesh->num_vertices(); ++i) v[i] = f(mesh->vertex(i));
    return ScalarField(mesh, std::move(v));
}

struct TangentVectorField {
    MeshPtr mesh;
    Eigen::Matrix<double, Eigen::Dynamic, 2> values;

    Vec3 ambient(int i) const { return values(i, 0) * mesh->e1(i) + values(i, 1) * mesh->e2(i); }
};

struct TangentTensorField {
    MeshPtr mesh;
    std::vector<Sym2> values;
};

void require_same_mesh(const MeshPtr& a, const MeshPtr& b);

TangentVectorField grad(const ScalarField& f);
TangentTensorField hess(const ScalarField& f);
ScalarField laplace(const ScalarField& f);
double integrate(const ScalarField& f);
ScalarField monge_ampere(const ScalarField& u);
ScalarField ma_bilinear(const ScalarField& u, const ScalarField& w);

struct IbpReport {
    double residual = 0.0; // absolute
    double scale = 0.0;    // L1 size of the integrands
    double relative = 0.0;
};
IbpReport ibp_check(const ScalarField& u, const ScalarField& w, const ScalarField& zeta);
double ibp_residual(const ScalarField& u, const ScalarField& w, const ScalarField& zeta);

// Real orthonormal harmonic Y_lm sampled on the mesh.
ScalarField harmonic_field(const MeshPtr& mesh, int l, int m);
// Sum of c_lm Y_lm over lmin <= l <= lmax with c_lm = +-1 from the seed.
ScalarField band_limited_field(const MeshPtr& mesh, int lmax, std::uint64_t seed, int lmin = 0);

void write_csv(const ScalarField& f, const std::string& path);
std::string to_csv(const ScalarField& f);

} // namespace aniso
