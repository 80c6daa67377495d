#include "aniso/trimesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "aniso/errors.hpp"
#include "aniso/io.hpp"

namespace aniso {

using Eigen::Vector3d;

TriMesh TriMesh::read_obj(const std::string& path) {
    ObjData d = parse_obj(read_file(path));
    return {std::move(d.vertices), std::move(d.faces)};
}

std::string TriMesh::to_obj() const { return obj_string(vertices, faces); }

void TriMesh::write_obj(const std::string& path) const { write_file_atomic(path, to_obj()); }

bool TriMesh::is_closed() const {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& f : faces)
        for (int k = 0; k < 3; ++k) {
            auto& c = directed[{f[k], f[(k + 1) % 3]}];
            if (++c > 1) return false;
        }
    for (const auto& [e, c] : directed)
        if (!directed.count({e.second, e.first})) return false;
    return !faces.empty();
}

double TriMesh::volume() const {
    double v = 0.0;
    for (const auto& f : faces) v += vertices[f[0]].dot(vertices[f[1]].cross(vertices[f[2]]));
    return v / 6.0;
}

double TriMesh::area() const {
    double a = 0.0;
    for (const auto& f : faces) a += 0.5 * (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).norm();
    return a;
}

double TriMesh::convexity_violation() const {
    const double orient = volume() >= 0.0 ? 1.0 : -1.0;
    std::map<std::pair<int, int>, int> edge_face;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i)
        for (int k = 0; k < 3; ++k) edge_face[{faces[i][k], faces[i][(k + 1) % 3]}] = i;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
        const auto& f = faces[i];
        const Vector3d n = orient * (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]).normalized();
        for (int k = 0; k < 3; ++k) {
            auto it = edge_face.find({f[(k + 1) % 3], f[k]});
            if (it == edge_face.end()) continue;
            for (int q : faces[it->second]) {
                if (q == f[0] || q == f[1] || q == f[2]) continue;
                worst = std::max(worst, n.dot(vertices[q] - vertices[f[0]]));
            }
        }
    }
    return worst;
}

Vector3d closest_point_triangle(const Vector3d& p, const Vector3d& a, const Vector3d& b, const Vector3d& c,
                                int& feature) {
    const Vector3d ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) {
        feature = 1;
        return a;
    }
    const Vector3d bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) {
        feature = 2;
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        feature = 4;
        return a + ab * (d1 / (d1 - d3));
    }
    const Vector3d cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) {
        feature = 3;
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        feature = 6;
        return a + ac * (d2 / (d2 - d6));
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        feature = 5;
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    feature = 0;
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {
std::pair<int, int> edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }
} // namespace

AabbTree::AabbTree(const TriMesh& mesh) : mesh_(&mesh) {
    const int nf = static_cast<int>(mesh.faces.size());
    if (nf == 0) throw ValidationError("closest-point tree over an empty mesh");
    order_.resize(nf);
    std::iota(order_.begin(), order_.end(), 0);
    centroid_.resize(nf);
    face_normal_.resize(nf);
    edge_normal_.resize(nf);
    vertex_normal_.assign(mesh.vertices.size(), Vector3d::Zero());
    std::map<std::pair<int, int>, Vector3d> edge_acc;
    for (int i = 0; i < nf; ++i) {
        const auto& f = mesh.faces[i];
        const Vector3d &a = mesh.vertices[f[0]], &b = mesh.vertices[f[1]], &c = mesh.vertices[f[2]];
        centroid_[i] = (a + b + c) / 3.0;
        Vector3d n = (b - a).cross(c - a);
        const double len = n.norm();
        n = len > 0.0 ? Vector3d(n / len) : Vector3d::Zero();
        face_normal_[i] = n;
        for (int k = 0; k < 3; ++k) {
            const Vector3d& p = mesh.vertices[f[k]];
            const Vector3d u = mesh.vertices[f[(k + 1) % 3]] - p;
            const Vector3d v = mesh.vertices[f[(k + 2) % 3]] - p;
            const double ang = std::atan2(u.cross(v).norm(), u.dot(v));
            vertex_normal_[f[k]] += ang * n;
            edge_acc.try_emplace(edge_key(f[k], f[(k + 1) % 3]), Vector3d::Zero()).first->second += n;
        }
    }
    for (int i = 0; i < nf; ++i) {
        const auto& f = mesh.faces[i];
        for (int k = 0; k < 3; ++k) edge_normal_[i][k] = edge_acc.at(edge_key(f[k], f[(k + 1) % 3]));
    }
    nodes_.reserve(2 * nf);
    build(0, nf);
}

int AabbTree::build(int begin, int end) {
    Node node;
    node.lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (int i = begin; i < end; ++i)
        for (int k : mesh_->faces[order_[i]]) {
            node.lo = node.lo.cwiseMin(mesh_->vertices[k]);
            node.hi = node.hi.cwiseMax(mesh_->vertices[k]);
        }
    node.begin = begin;
    node.end = end;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin > 4) {
        int axis;
        (node.hi - node.lo).maxCoeff(&axis);
        const int mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int x, int y) { return centroid_[x][axis] < centroid_[y][axis]; });
        const int l = build(begin, mid);
        const int r = build(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
    }
    return id;
}

namespace {
double box_dist2(const Vector3d& p, const Vector3d& lo, const Vector3d& hi) {
    const Vector3d d = (lo - p).cwiseMax(Vector3d::Zero()).cwiseMax(p - hi);
    return d.squaredNorm();
}
} // namespace

void AabbTree::query(int id, const Vector3d& p, Hit& best, int& feature) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int fi = order_[i];
            const auto& f = mesh_->faces[fi];
            int feat;
            const Vector3d q =
                closest_point_triangle(p, mesh_->vertices[f[0]], mesh_->vertices[f[1]], mesh_->vertices[f[2]], feat);
            const double d = (q - p).squaredNorm();
            if (d < best.distance) {
                best.distance = d;
                best.point = q;
                best.face = fi;
                feature = feat;
            }
        }
        return;
    }
    const double dl = box_dist2(p, nodes_[node.left].lo, nodes_[node.left].hi);
    const double dr = box_dist2(p, nodes_[node.right].lo, nodes_[node.right].hi);
    const int first = dl <= dr ? node.left : node.right;
    const int second = dl <= dr ? node.right : node.left;
    if (std::min(dl, dr) < best.distance) query(first, p, best, feature);
    if (std::max(dl, dr) < best.distance) query(second, p, best, feature);
}

AabbTree::Hit AabbTree::closest(const Vector3d& p) const {
    Hit h;
    h.distance = std::numeric_limits<double>::infinity();
    int feature = 0;
    query(0, p, h, feature);
    h.distance = std::sqrt(h.distance);
    return h;
}

double AabbTree::signed_distance(const Vector3d& p) const {
    Hit h;
    h.distance = std::numeric_limits<double>::infinity();
    int feature = 0;
    query(0, p, h, feature);
    const auto& f = mesh_->faces[h.face];
    // rounding can report an edge or vertex region as interior; re-derive the feature
    // from barycentric coordinates with a tolerance
    if (feature == 0) {
        const Vector3d &a = mesh_->vertices[f[0]], &b = mesh_->vertices[f[1]], &c = mesh_->vertices[f[2]];
        const Vector3d nn = (b - a).cross(c - a);
        const double area2 = nn.squaredNorm();
        if (area2 > 0.0) {
            const double bary[3] = {(c - b).cross(h.point - b).dot(nn) / area2, (a - c).cross(h.point - c).dot(nn) / area2,
                                    (b - a).cross(h.point - a).dot(nn) / area2};
            const double eps = 1e-9;
            int zeros = 0, last_zero = -1, nonzero = -1;
            for (int k = 0; k < 3; ++k) {
                if (bary[k] < eps) {
                    ++zeros;
                    last_zero = k;
                } else {
                    nonzero = k;
                }
            }
            if (zeros == 2) feature = 1 + nonzero;
            else if (zeros == 1) feature = 4 + (last_zero + 1) % 3; // opposite edge (v_{k+1}, v_{k+2})
        }
    }
    Vector3d n;
    if (feature == 0) n = face_normal_[h.face];
    else if (feature <= 3) n = vertex_normal_[f[feature - 1]];
    else n = edge_normal_[h.face][feature - 4];
    const double d = std::sqrt(h.distance);
    return n.dot(p - h.point) < 0.0 ? -d : d;
}

double one_sided_distance(const TriMesh& from, const AabbTree& to) {
    double worst = 0.0;
    for (const auto& v : from.vertices) worst = std::max(worst, to.closest(v).distance);
    return worst;
}

double hausdorff_distance(const TriMesh& a, const TriMesh& b) {
    const AabbTree ta(a), tb(b);
    return std::max(one_sided_distance(a, tb), one_sided_distance(b, ta));
}

} // namespace aniso
