#include "aniso/elsolve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "aniso/errors.hpp"
#include "aniso/io.hpp"

namespace aniso {

ScalarField LinearOperator::apply(const ScalarField& f) const {
    require_same_mesh(mesh, f.mesh);
    return {mesh, matrix * f.values};
}

ELOperator assemble_F(const Norm& norm) {
    const MeshPtr& mesh = norm.mesh();
    const int n = mesh->num_vertices();
    const auto& st = mesh->stencils();
    Eigen::VectorXd bxx(n), bxy(n), byy(n), btr(n), det(n);
    double min_eig = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const Sym2& m = norm.m_tau()[i];
        const double d = m.det();
        const Sym2 b{m.yy / d, -m.xy / d, m.xx / d};
        bxx[i] = b.xx;
        bxy[i] = b.xy;
        byy[i] = b.yy;
        btr[i] = b.trace();
        det[i] = d;
        min_eig = std::min(min_eig, b.min_eigenvalue());
    }
    if (!(min_eig > 0.0)) throw ConvexityError("symbol m_tau^-1 is not positive definite", min_eig);

    SpMat I(n, n);
    I.setIdentity();
    SpMat H = SpMat(bxx.asDiagonal() * st.huu) + SpMat(2.0 * bxy.asDiagonal() * st.huv) +
              SpMat(byy.asDiagonal() * st.hvv) + SpMat(btr.asDiagonal() * I);
    SpMat E = det.asDiagonal() * H;
    const SpMat EH = E * H;
    const SpMat shift = st.laplacian + 2.0 * I;
    SpMat F = EH - 2.0 * shift;
    H.makeCompressed();
    E.makeCompressed();
    F.makeCompressed();

    ELOperator op;
    op.F = {mesh, F, "E o H - 2 (Lap + 2)"};
    op.H = {mesh, H, "q -> tr((D^2 q + q I) m_tau^-1)"};
    op.E = {mesh, E, "eta -> det(m_tau) tr((D^2 eta + eta I) m_tau^-1)"};
    op.laplacian = {mesh, st.laplacian, "Lap"};
    op.min_symbol_eigenvalue = min_eig;
    return op;
}

ScalarField el_residual(const ELOperator& op, const ScalarField& q) { return op.F.apply(q); }
ScalarField el_residual(const Norm& norm, const ScalarField& q) { return el_residual(assemble_F(norm), q); }

double first_variation(const ELOperator& op, const ScalarField& q, const ScalarField& qdot) {
    require_same_mesh(q.mesh, qdot.mesh);
    return 0.5 * integrate(qdot * op.F.apply(q));
}
double first_variation(const Norm& norm, const ScalarField& q, const ScalarField& qdot) {
    return first_variation(assemble_F(norm), q, qdot);
}

double second_variation(const ELOperator& op, const ScalarField& qdot) {
    return 0.5 * integrate(qdot * op.F.apply(qdot));
}
double second_variation(const Norm& norm, const ScalarField& qdot) { return second_variation(assemble_F(norm), qdot); }

CapRegion make_cap(const ELOperator& op, const Vec3& center, double radius) {
    const MeshPtr& mesh = op.F.mesh;
    const int n = mesh->num_vertices();
    CapRegion r;
    r.center = center.normalized();
    r.radius = radius;
    std::vector<char> in(n, 0), bnd(n, 0);
    for (int i = 0; i < n; ++i)
        if (std::acos(std::clamp(mesh->vertex(i).dot(r.center), -1.0, 1.0)) < radius) {
            in[i] = 1;
            r.interior.push_back(i);
        }
    if (r.interior.empty()) return r;
    for (int i : r.interior)
        for (SpMat::InnerIterator it(op.F.matrix, i); it; ++it)
            if (!in[it.col()]) bnd[it.col()] = 1;

    // graph distance from the interior
    std::vector<int> dist(n, -1);
    std::deque<int> queue;
    for (int i : r.interior) {
        dist[i] = 0;
        queue.push_back(i);
    }
    while (!queue.empty()) {
        const int x = queue.front();
        queue.pop_front();
        for (int y : mesh->adjacency()[x])
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
    }
    int dmax = 0;
    for (int i = 0; i < n; ++i)
        if (bnd[i]) dmax = std::max(dmax, dist[i]);
    const int split = (dmax + 1) / 2;
    for (int i = 0; i < n; ++i)
        if (bnd[i]) (dist[i] <= split ? r.ring1 : r.ring2).push_back(i);
    return r;
}

CapSolution solve_cap(const ELOperator& op, const CapRegion& region, const ScalarField& boundary_q, double tol) {
    const MeshPtr& mesh = op.F.mesh;
    require_same_mesh(mesh, boundary_q.mesh);
    CapSolution out;
    out.q = boundary_q;
    if (region.interior.empty()) {
        out.kernel_warnings.push_back("empty interior: boundary data returned unchanged");
        return out;
    }
    const int n = mesh->num_vertices();
    std::vector<int> local(n, -1);
    for (int k = 0; k < static_cast<int>(region.interior.size()); ++k) local[region.interior[k]] = k;
    std::vector<char> pinned(n, 0);
    for (int i : region.ring1) pinned[i] = 1;
    for (int i : region.ring2) pinned[i] = 1;

    const int m = static_cast<int>(region.interior.size());
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < m; ++k) {
        const int i = region.interior[k];
        for (SpMat::InnerIterator it(op.F.matrix, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (local[j] >= 0) trips.emplace_back(k, local[j], it.value());
            else if (pinned[j]) rhs[k] -= it.value() * boundary_q[j];
            else throw ValidationError("cap boundary does not cover the operator stencil");
        }
    }
    Eigen::SparseMatrix<double> A(m, m);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage(), 1.0);
    Eigen::VectorXd x = lu.solve(rhs);
    out.iterations = 1;
    const double scale = std::max(rhs.norm(), 1e-300);
    double res = (A * x - rhs).norm() / scale;
    // one step of iterative refinement
    if (res > 1e-12) {
        x += lu.solve(rhs - A * x);
        ++out.iterations;
        res = (A * x - rhs).norm() / scale;
    }
    if (rhs.norm() == 0.0) res = (A * x).norm();
    out.residual = res;
    if (!x.allFinite() || !(res <= tol)) throw SolverError("cap solve did not reach relative residual " + fmt17(tol), res);

    Eigen::VectorXd q = boundary_q.values;
    for (int k = 0; k < m; ++k) q[region.interior[k]] = x[k];
    out.q = ScalarField(mesh, q);
    const Eigen::VectorXd Fq = op.F.matrix * q;
    for (int i : region.interior) out.interior_el_residual = std::max(out.interior_el_residual, std::abs(Fq[i]));
    return out;
}

nlohmann::json CapSolution::report() const {
    return {{"residual", residual}, {"iterations", iterations}, {"interior_el_residual", interior_el_residual},
            {"kernel_warnings", kernel_warnings}};
}

} // namespace aniso
