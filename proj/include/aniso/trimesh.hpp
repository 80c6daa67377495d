#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aniso {

struct TriMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> faces;

    static TriMesh read_obj(const std::string& path);
    void write_obj(const std::string& path) const;
    std::string to_obj() const;

    // every edge used by exactly two faces with opposite orientation
    bool is_closed() const;
    // signed volume by the divergence theorem
    double volume() const;
    double area() const;
    // largest positive distance of a vertex above the plane of a face sharing an edge with it,
    // after orienting outward; <= 0 for a convex surface
    double convexity_violation() const;
};

// Closest-point queries against a fixed triangle soup.
class AabbTree {
public:
    explicit AabbTree(const TriMesh& mesh);

    struct Hit {
        double distance = 0.0;
        Eigen::Vector3d point = Eigen::Vector3d::Zero();
        int face = -1;
    };
    Hit closest(const Eigen::Vector3d& p) const;
    // negative inside; uses angle-weighted pseudonormals, mesh must be closed and consistently oriented
    double signed_distance(const Eigen::Vector3d& p) const;

private:
    struct Node {
        Eigen::Vector3d lo, hi;
        int left = -1, right = -1;
        int begin = 0, end = 0;
    };
    int build(int begin, int end);
    void query(int node, const Eigen::Vector3d& p, Hit& best, int& feature) const;

    const TriMesh* mesh_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    std::vector<Eigen::Vector3d> face_normal_;
    std::vector<Eigen::Vector3d> vertex_normal_;
    std::vector<std::array<Eigen::Vector3d, 3>> edge_normal_; // per face, edge k is (v_k, v_{k+1})
    std::vector<Eigen::Vector3d> centroid_;
};

// Point-triangle closest point. feature: 0 interior, 1..3 vertex k-1, 4..6 edge k-4 (v_k, v_{k+1}).
Eigen::Vector3d closest_point_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                       const Eigen::Vector3d& b, const Eigen::Vector3d& c, int& feature);

// Symmetric Hausdorff distance sampled at the vertices of each mesh against the other's triangles.
double hausdorff_distance(const TriMesh& a, const TriMesh& b);
double one_sided_distance(const TriMesh& from, const AabbTree& to);

} // namespace aniso
