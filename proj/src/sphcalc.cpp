#include "aniso/sphcalc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "aniso/errors.hpp"
#include "aniso/harmonics.hpp"
#include "aniso/io.hpp"

namespace aniso {

double Sym2::min_eigenvalue() const {
    const double m = 0.5 * (xx + yy);
    const double d = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return m - d;
}

namespace {

constexpr double kPi = std::numbers::pi;

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double num = std::abs(a.dot(b.cross(c)));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

// mixed-Voronoi split of a flat triangle, returned as fractions of its area
std::array<double, 3> mixed_voronoi_fractions(const Vec3& a, const Vec3& b, const Vec3& c) {
    const std::array<Vec3, 3> p{a, b, c};
    const double area = 0.5 * (b - a).cross(c - a).norm();
    std::array<double, 3> out{};
    int obtuse = -1;
    for (int i = 0; i < 3; ++i) {
        const Vec3 u = p[(i + 1) % 3] - p[i];
        const Vec3 v = p[(i + 2) % 3] - p[i];
        if (u.dot(v) < 0.0) obtuse = i;
    }
    if (obtuse >= 0) {
        for (int i = 0; i < 3; ++i) out[i] = (i == obtuse) ? 0.5 : 0.25;
        return out;
    }
    auto cot = [&](int i) {
        const Vec3 u = p[(i + 1) % 3] - p[i];
        const Vec3 v = p[(i + 2) % 3] - p[i];
        return u.dot(v) / u.cross(v).norm();
    };
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        out[i] = ((p[j] - p[i]).squaredNorm() * cot(k) + (p[k] - p[i]).squaredNorm() * cot(j)) / 8.0 / area;
    }
    return out;
}

// Taylor coefficients of (1+x)^(-1/2)
double inv_sqrt_coeff(int k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c *= (-0.5 - i) / (i + 1.0);
    return c;
}

// (1+x)^(-1/2) minus its Taylor polynomial through x^K
double inv_sqrt_remainder(double x, int K) {
    if (x < 0.1) {
        double s = 0.0;
        double c = inv_sqrt_coeff(K + 1);
        double xp = std::pow(x, K + 1);
        for (int k = K + 1; k < K + 200; ++k) {
            const double t = c * xp;
            s += t;
            if (std::abs(t) < 1e-18 * std::abs(s)) break;
            c *= (-0.5 - k) / (k + 1.0);
            xp *= x;
        }
        return s;
    }
    double poly = 0.0, xp = 1.0;
    for (int k = 0; k <= K; ++k) {
        poly += inv_sqrt_coeff(k) * xp;
        xp *= x;
    }
    return 1.0 / std::sqrt(1.0 + x) - poly;
}

struct FitConfig {
    int degree;
    bool extras;
    int margin;
};

int poly_terms(int degree) { return (degree + 1) * (degree + 2) / 2; }

} // namespace

std::shared_ptr<const SphereMesh> SphereMesh::icosphere(int subdivisions) {
    if (subdivisions < 0 || subdivisions > 8)
        throw ValidationError("subdivisions must be in [0, 8], got " + std::to_string(subdivisions));
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> V{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : V) v.normalize();
    std::vector<std::array<int, 3>> F{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> cache;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            V.push_back((V[a] + V[b]).normalized());
            const int id = static_cast<int>(V.size()) - 1;
            cache.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> NF;
        NF.reserve(F.size() * 4);
        for (const auto& f : F) {
            const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            NF.push_back({f[0], ab, ca});
            NF.push_back({f[1], bc, ab});
            NF.push_back({f[2], ca, bc});
            NF.push_back({ab, bc, ca});
        }
        F = std::move(NF);
    }
    auto mesh = std::shared_ptr<SphereMesh>(new SphereMesh());
    mesh->subdivisions_ = subdivisions;
    mesh->vertices_ = std::move(V);
    mesh->faces_ = std::move(F);
    mesh->finalize();
    return mesh;
}

std::shared_ptr<const SphereMesh> SphereMesh::from_arrays(std::vector<Vec3> vertices,
                                                          std::vector<std::array<int, 3>> faces) {
    if (vertices.size() < 4 || faces.empty()) throw ValidationError("sphere mesh needs at least 4 vertices and one face");
    for (auto& v : vertices) {
        if (std::abs(v.norm() - 1.0) > 1e-6) throw ValidationError("sphere mesh vertex off the unit sphere");
        v.normalize();
    }
    const int n = static_cast<int>(vertices.size());
    for (const auto& f : faces)
        for (int k : f)
            if (k < 0 || k >= n) throw ValidationError("face index out of range");
    auto mesh = std::shared_ptr<SphereMesh>(new SphereMesh());
    mesh->vertices_ = std::move(vertices);
    mesh->faces_ = std::move(faces);
    mesh->finalize();
    return mesh;
}

std::shared_ptr<const SphereMesh> SphereMesh::read_obj(const std::string& path) {
    ObjData d = parse_obj(read_file(path));
    return from_arrays(std::move(d.vertices), std::move(d.faces));
}

void SphereMesh::write_obj(const std::string& path) const { write_file_atomic(path, obj_string(vertices_, faces_)); }

void SphereMesh::finalize() {
    const int n = num_vertices();
    e1_.resize(n);
    e2_.resize(n);
    for (int i = 0; i < n; ++i) {
        const Vec3& nu = vertices_[i];
        int k = 0;
        for (int j = 1; j < 3; ++j)
            if (std::abs(nu[j]) < std::abs(nu[k])) k = j;
        Vec3 a = Vec3::Zero();
        a[k] = 1.0;
        e1_[i] = (a - a.dot(nu) * nu).normalized();
        e2_[i] = nu.cross(e1_[i]);
    }

    weights_.assign(n, 0.0);
    std::vector<std::vector<int>> adj(n);
    double edge_sum = 0.0;
    for (const auto& f : faces_) {
        const Vec3 &a = vertices_[f[0]], &b = vertices_[f[1]], &c = vertices_[f[2]];
        const auto frac = mixed_voronoi_fractions(a, b, c);
        const double area = spherical_triangle_area(a, b, c);
        for (int k = 0; k < 3; ++k) {
            weights_[f[k]] += frac[k] * area;
            adj[f[k]].push_back(f[(k + 1) % 3]);
            adj[f[k]].push_back(f[(k + 2) % 3]);
        }
        edge_sum += (a - b).norm() + (b - c).norm() + (c - a).norm();
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    adjacency_ = std::move(adj);
    spacing_ = edge_sum / (3.0 * num_faces());
    for (int i = 0; i < n; ++i)
        if (!(weights_[i] > 0.0)) throw ValidationError("vertex " + std::to_string(i) + " has no incident area");
}

const Stencils& SphereMesh::stencils() const {
    std::call_once(stencil_once_, [this] { build_stencils(); });
    return stencils_;
}

void SphereMesh::build_stencils() const {
    const int n = num_vertices();
    constexpr int kMaxDegree = 6;
    constexpr int kMinRings = 3;
    const int target = poly_terms(kMaxDegree) + 3 + 6;

    std::vector<FitConfig> configs;
    for (int d = kMaxDegree; d >= 2; --d) configs.push_back({d, true, 6});
    for (int d = kMaxDegree; d >= 2; --d) configs.push_back({d, true, 0});
    configs.push_back({2, false, 0});

    using Trip = Eigen::Triplet<double>;
    std::array<std::vector<Trip>, 5> trips;
    stencils_.fit_degree.assign(n, 0);

    std::vector<int> mark(n, -1);
    for (int v = 0; v < n; ++v) {
        const Vec3& nu = vertices_[v];
        const Vec3& a1 = e1_[v];
        const Vec3& a2 = e2_[v];

        // grow rings until the fit is comfortably overdetermined
        std::vector<int> all{v}, frontier{v}, pts;
        mark[v] = v;
        for (int ring = 1;; ++ring) {
            std::vector<int> next;
            for (int x : frontier)
                for (int y : adjacency_[x])
                    if (mark[y] != v) {
                        mark[y] = v;
                        next.push_back(y);
                    }
            std::sort(next.begin(), next.end());
            all.insert(all.end(), next.begin(), next.end());
            frontier = std::move(next);
            pts.clear();
            for (int p : all)
                if (vertices_[p].dot(nu) > 0.2) pts.push_back(p);
            if (frontier.empty()) break;
            if (ring >= kMinRings && static_cast<int>(pts.size()) >= target) break;
        }
        std::sort(pts.begin(), pts.end());
        const int m = static_cast<int>(pts.size());

        Eigen::VectorXd u(m), w(m);
        for (int i = 0; i < m; ++i) {
            const Vec3& p = vertices_[pts[i]];
            const double c = p.dot(nu);
            u[i] = p.dot(a1) / c;
            w[i] = p.dot(a2) / c;
        }
        const double h = std::sqrt((u.squaredNorm() + w.squaredNorm()) / m);

        const FitConfig* cfg = nullptr;
        for (const auto& c : configs)
            if (m >= poly_terms(c.degree) + (c.extras ? 3 : 0) + c.margin) {
                cfg = &c;
                break;
            }
        if (!cfg) throw ValidationError("too few points for a derivative stencil at vertex " + std::to_string(v));
        const int D = cfg->degree;
        const int np = poly_terms(D);
        const int ncols = np + (cfg->extras ? 3 : 0);

        Eigen::MatrixXd A(m, ncols);
        int i10 = -1, i01 = -1, i20 = -1, i11 = -1, i02 = -1;
        {
            int col = 0;
            for (int i = 0; i <= D; ++i)
                for (int j = 0; i + j <= D; ++j, ++col) {
                    for (int r = 0; r < m; ++r) A(r, col) = std::pow(u[r] / h, i) * std::pow(w[r] / h, j);
                    if (i == 1 && j == 0) i10 = col;
                    if (i == 0 && j == 1) i01 = col;
                    if (i == 2 && j == 0) i20 = col;
                    if (i == 1 && j == 1) i11 = col;
                    if (i == 0 && j == 2) i02 = col;
                }
        }
        if (cfg->extras) {
            // ambient linear functions restricted to the chart, minus the part the polynomial already spans
            const int K0 = D / 2, K1 = (D - 1) / 2;
            for (int r = 0; r < m; ++r) {
                const double x = u[r] * u[r] + w[r] * w[r];
                const double r1 = inv_sqrt_remainder(x, K1);
                A(r, np) = inv_sqrt_remainder(x, K0);
                A(r, np + 1) = u[r] * r1;
                A(r, np + 2) = w[r] * r1;
            }
            for (int c = np; c < ncols; ++c) {
                const double s = A.col(c).norm();
                if (s > 0.0) A.col(c) /= s;
            }
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
        const Eigen::MatrixXd P = cod.pseudoInverse();

        const std::array<double, 5> scale{1.0 / h, 1.0 / h, 2.0 / (h * h), 1.0 / (h * h), 2.0 / (h * h)};
        const std::array<int, 5> rows{i10, i01, i20, i11, i02};
        const int self = static_cast<int>(std::lower_bound(pts.begin(), pts.end(), v) - pts.begin());
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd c = scale[k] * P.row(rows[k]).transpose();
            // the fit annihilates constants up to roundoff; make it exact
            c[self] -= c.sum();
            for (int r = 0; r < m; ++r) trips[k].emplace_back(v, pts[r], c[r]);
        }
        stencils_.fit_degree[v] = D;
    }

    auto mk = [n](const std::vector<Trip>& t) {
        SpMat M(n, n);
        M.setFromTriplets(t.begin(), t.end());
        M.makeCompressed();
        return M;
    };
    stencils_.gu = mk(trips[0]);
    stencils_.gv = mk(trips[1]);
    stencils_.huu = mk(trips[2]);
    stencils_.huv = mk(trips[3]);
    stencils_.hvv = mk(trips[4]);
    stencils_.laplacian = stencils_.huu + stencils_.hvv;
    stencils_.laplacian.makeCompressed();
}

ScalarField::ScalarField(MeshPtr m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh) throw ValidationError("scalar field without a mesh");
    if (values.size() != mesh->num_vertices())
        throw ValidationError("field has " + std::to_string(values.size()) + " values for " +
                              std::to_string(mesh->num_vertices()) + " vertices");
    if (!values.allFinite()) throw ValidationError("field contains non-finite values");
}

ScalarField::ScalarField(MeshPtr m, double c) : mesh(std::move(m)) {
    if (!mesh) throw ValidationError("scalar field without a mesh");
    values = Eigen::VectorXd::Constant(mesh->num_vertices(), c);
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
    require_same_mesh(mesh, o.mesh);
    return {mesh, values + o.values};
}
ScalarField ScalarField::operator-(const ScalarField& o) const {
    require_same_mesh(mesh, o.mesh);
    return {mesh, values - o.values};
}
ScalarField ScalarField::operator*(double s) const { return {mesh, values * s}; }
ScalarField ScalarField::operator*(const ScalarField& o) const {
    require_same_mesh(mesh, o.mesh);
    return {mesh, values.cwiseProduct(o.values)};
}

void require_same_mesh(const MeshPtr& a, const MeshPtr& b) {
    if (a.get() != b.get()) throw MeshMismatchError();
}

TangentVectorField grad(const ScalarField& f) {
    const auto& st = f.mesh->stencils();
    TangentVectorField g{f.mesh, Eigen::Matrix<double, Eigen::Dynamic, 2>(f.size(), 2)};
    g.values.col(0) = st.gu * f.values;
    g.values.col(1) = st.gv * f.values;
    return g;
}

TangentTensorField hess(const ScalarField& f) {
    const auto& st = f.mesh->stencils();
    const Eigen::VectorXd a = st.huu * f.values;
    const Eigen::VectorXd b = st.huv * f.values;
    const Eigen::VectorXd c = st.hvv * f.values;
    TangentTensorField H{f.mesh, std::vector<Sym2>(f.size())};
    for (int i = 0; i < f.size(); ++i) H.values[i] = {a[i], b[i], c[i]};
    return H;
}

ScalarField laplace(const ScalarField& f) {
    const auto& st = f.mesh->stencils();
    return {f.mesh, st.laplacian * f.values};
}

double integrate(const ScalarField& f) {
    const auto& w = f.mesh->weights();
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += f.values[i] * w[i];
    return s;
}

ScalarField monge_ampere(const ScalarField& u) {
    const auto H = hess(u);
    Eigen::VectorXd out(u.size());
    for (int i = 0; i < u.size(); ++i) out[i] = H.values[i].det();
    return {u.mesh, out};
}

ScalarField ma_bilinear(const ScalarField& u, const ScalarField& w) {
    require_same_mesh(u.mesh, w.mesh);
    const auto Hu = hess(u);
    const auto Hw = hess(w);
    Eigen::VectorXd out(u.size());
    for (int i = 0; i < u.size(); ++i) {
        const Sym2& a = Hu.values[i];
        const Sym2& b = Hw.values[i];
        out[i] = a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy;
    }
    return {u.mesh, out};
}

IbpReport ibp_check(const ScalarField& u, const ScalarField& w, const ScalarField& zeta) {
    require_same_mesh(u.mesh, w.mesh);
    require_same_mesh(u.mesh, zeta.mesh);
    const auto gu = grad(u), gw = grad(w), gz = grad(zeta);
    const auto muz = ma_bilinear(u, zeta), muw = ma_bilinear(u, w);
    const auto& wt = u.mesh->weights();
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        const double du_dz = gu.values.row(i).dot(gz.values.row(i));
        const double du_dw = gu.values.row(i).dot(gw.values.row(i));
        const double a = w[i] * (muz[i] - du_dz);
        const double b = zeta[i] * (muw[i] - du_dw);
        lhs += a * wt[i];
        rhs += b * wt[i];
        scale += (std::abs(a) + std::abs(b)) * wt[i];
    }
    IbpReport r;
    r.residual = std::abs(lhs - rhs);
    r.scale = scale;
    r.relative = scale > 0.0 ? r.residual / scale : 0.0;
    return r;
}

double ibp_residual(const ScalarField& u, const ScalarField& w, const ScalarField& zeta) {
    return ibp_check(u, w, zeta).residual;
}

void real_sh_all(int lmax, const Eigen::Vector3d& p, std::vector<double>& out) {
    out.assign(sh_count(lmax), 0.0);
    for (int l = 0; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) out[sh_index(l, m)] = real_sh(l, m, p);
}

ScalarField harmonic_field(const MeshPtr& mesh, int l, int m) {
    if (l < 0 || m < -l || m > l) throw ValidationError("invalid harmonic index");
    return sample(mesh, [&](const Vec3& p) { return real_sh(l, m, p); });
}

ScalarField band_limited_field(const MeshPtr& mesh, int lmax, std::uint64_t seed, int lmin) {
    std::mt19937_64 gen(seed);
    std::vector<std::array<double, 3>> coeffs;
    for (int l = lmin; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) coeffs.push_back({double(l), double(m), (gen() >> 63) ? 1.0 : -1.0});
    return sample(mesh, [&](const Vec3& p) {
        double s = 0.0;
        for (const auto& c : coeffs) s += c[2] * real_sh(int(c[0]), int(c[1]), p);
        return s;
    });
}

std::string to_csv(const ScalarField& f) {
    std::string s = "vertex,x,y,z,value\n";
    for (int i = 0; i < f.size(); ++i) {
        const Vec3& p = f.mesh->vertex(i);
        s += std::to_string(i) + ',' + fmt17(p.x()) + ',' + fmt17(p.y()) + ',' + fmt17(p.z()) + ',' +
             fmt17(f[i]) + '\n';
    }
    return s;
}

void write_csv(const ScalarField& f, const std::string& path) { write_file_atomic(path, to_csv(f)); }

} // namespace aniso
