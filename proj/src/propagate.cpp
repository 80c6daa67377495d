#include "aniso/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <unordered_map>

#include "aniso/errors.hpp"
#include "aniso/io.hpp"

namespace aniso {

LevelGrid LevelGrid::make(const GridSpec& spec) {
    if (spec.n < 2 || !(spec.hi > spec.lo)) throw ValidationError("grid needs n >= 2 and hi > lo");
    LevelGrid g;
    g.dims = {spec.n, spec.n, spec.n};
    g.h = spec.spacing();
    g.origin = Eigen::Vector3d::Constant(spec.lo);
    g.S.assign(static_cast<std::size_t>(spec.n) * spec.n * spec.n, 0.0);
    return g;
}

double LevelGrid::sample(const Eigen::Vector3d& p) const {
    double f[3];
    int c[3];
    for (int a = 0; a < 3; ++a) {
        const double u = std::clamp((p[a] - origin[a]) / h, 0.0, dims[a] - 1.0);
        c[a] = std::min(static_cast<int>(u), dims[a] - 2);
        f[a] = u - c[a];
    }
    double s = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
        const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
        s += w * at(c[0] + dx, c[1] + dy, c[2] + dz);
    }
    return s;
}

namespace {

template <class T>
void put(std::string& out, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw ValidationError("grid file truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

static_assert(sizeof(double) == 8);

} // namespace

// header: 3 x uint64 dims, float64 spacing, 3 x float64 origin; then float64 samples (x fastest).
// Assumes a little-endian host.
std::string LevelGrid::to_raw() const {
    std::string out;
    out.reserve(56 + S.size() * 8);
    for (int d : dims) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    put(out, h);
    for (int a = 0; a < 3; ++a) put(out, origin[a]);
    for (double v : S) put(out, v);
    return out;
}

void LevelGrid::write_raw(const std::string& path) const { write_file_atomic(path, to_raw()); }

LevelGrid LevelGrid::read_raw(const std::string& path) {
    const std::string in = read_file(path);
    std::size_t pos = 0;
    LevelGrid g;
    std::size_t total = 1;
    for (int a = 0; a < 3; ++a) {
        const auto d = take<std::uint64_t>(in, pos);
        if (d < 2 || d > (1u << 16)) throw ValidationError("grid file has invalid dimensions");
        g.dims[a] = static_cast<int>(d);
        total *= d;
    }
    g.h = take<double>(in, pos);
    for (int a = 0; a < 3; ++a) g.origin[a] = take<double>(in, pos);
    if (in.size() != pos + total * 8) throw ValidationError("grid file size does not match its header");
    g.S.resize(total);
    std::memcpy(g.S.data(), in.data() + pos, total * 8);
    return g;
}

LevelGrid init_from_surface(const TriMesh& surface, const GridSpec& spec) {
    if (!surface.is_closed()) throw ValidationError("source surface is not closed");
    LevelGrid g = LevelGrid::make(spec);
    const double margin = 5.0 * g.h;
    for (const auto& v : surface.vertices)
        for (int a = 0; a < 3; ++a)
            if (v[a] < spec.lo + margin || v[a] > spec.hi - margin)
                throw GridTooSmallError("surface comes within five cells of the grid boundary");

    const AabbTree tree(surface);
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) g.S[g.index(i, j, k)] = tree.signed_distance(g.node(i, j, k));
    return g;
}

LevelGrid init_from_surface(const SupportSurface& surface, const GridSpec& spec) {
    return init_from_surface(surface.to_trimesh(), spec);
}

Eigen::Vector3d lf_alpha(const Norm& norm) {
    // Fibonacci directions plus the coordinate axes
    const int n = 4000;
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    auto visit = [&](const Vec3& nu) { best = best.cwiseMax(norm.xi_at(nu).cwiseAbs()); };
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double r = std::sqrt(1.0 - z * z);
        visit(Vec3(r * std::cos(golden * i), r * std::sin(golden * i), z));
    }
    for (int a = 0; a < 3; ++a) {
        visit(Vec3::Unit(a));
        visit(-Vec3::Unit(a));
    }
    return 1.01 * best;
}

double max_stable_dt(const Norm& norm, const LevelGrid& grid) { return 0.5 * grid.h / lf_alpha(norm).sum(); }

namespace {

LevelGrid step_with(const NormSpec& spec, const Eigen::Vector3d& alpha, const LevelGrid& g, double dt) {
    LevelGrid out = g;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const double inv_h = 1.0 / g.h;
    const bool iso = spec.kind == NormSpec::Kind::Isotropic;
    // ghost nodes by linear extrapolation
    auto val = [&](int i, int j, int k) {
        const int ci = std::clamp(i, 0, nx - 1), cj = std::clamp(j, 0, ny - 1), ck = std::clamp(k, 0, nz - 1);
        if (ci == i && cj == j && ck == k) return g.at(i, j, k);
        const int si = i < 0 ? 1 : (i >= nx ? -1 : 0);
        const int sj = j < 0 ? 1 : (j >= ny ? -1 : 0);
        const int sk = k < 0 ? 1 : (k >= nz ? -1 : 0);
        return 2.0 * g.at(ci, cj, ck) - g.at(ci + si, cj + sj, ck + sk);
    };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double c = g.at(i, j, k);
                const bool interior = i > 0 && j > 0 && k > 0 && i < nx - 1 && j < ny - 1 && k < nz - 1;
                double xm, xp, ym, yp, zm, zp;
                if (interior) {
                    const std::size_t id = g.index(i, j, k);
                    const std::size_t sy = nx, sz = static_cast<std::size_t>(nx) * ny;
                    xm = g.S[id - 1], xp = g.S[id + 1];
                    ym = g.S[id - sy], yp = g.S[id + sy];
                    zm = g.S[id - sz], zp = g.S[id + sz];
                } else {
                    xm = val(i - 1, j, k), xp = val(i + 1, j, k);
                    ym = val(i, j - 1, k), yp = val(i, j + 1, k);
                    zm = val(i, j, k - 1), zp = val(i, j, k + 1);
                }
                const Eigen::Vector3d pm((c - xm) * inv_h, (c - ym) * inv_h, (c - zm) * inv_h);
                const Eigen::Vector3d pp((xp - c) * inv_h, (yp - c) * inv_h, (zp - c) * inv_h);
                const Eigen::Vector3d p = 0.5 * (pm + pp);
                const double r = p.norm();
                double ham = 0.0;
                if (r > 0.0) ham = iso ? r : support_function<double>(spec, p);
                ham -= 0.5 * alpha.dot(pp - pm);
                out.S[g.index(i, j, k)] = c - dt * ham;
            }
    out.time = g.time + dt;
    return out;
}

} // namespace

LevelGrid hj_step(const Norm& norm, const LevelGrid& grid, double dt) {
    const Eigen::Vector3d alpha = lf_alpha(norm);
    const double dt_max = 0.5 * grid.h / alpha.sum();
    if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12))
        throw CFLViolationError("time step violates the CFL bound", dt, dt_max);
    return step_with(norm.spec(), alpha, grid, dt);
}

LevelGrid evolve(const Norm& norm, const LevelGrid& grid, double t_final) {
    if (t_final < 0.0) throw ValidationError("evolution time must be nonnegative");
    if (t_final == 0.0) return grid;
    const Eigen::Vector3d alpha = lf_alpha(norm);
    const double dt_max = 0.5 * grid.h / alpha.sum();
    const int steps = static_cast<int>(std::ceil(t_final / dt_max - 1e-9));
    const double dt = t_final / steps;
    LevelGrid g = grid;
    for (int n = 0; n < steps; ++n) g = step_with(norm.spec(), alpha, g, dt);
    g.time = grid.time + t_final;
    return g;
}

TriMesh extract_zero_level(const LevelGrid& g) {
    TriMesh out;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    auto node_id = [&](int i, int j, int k) { return static_cast<std::uint64_t>(g.index(i, j, k)); };

    auto edge_point = [&](std::uint64_t a, std::uint64_t b, const Eigen::Vector3d& pa, const Eigen::Vector3d& pb,
                          double sa, double sb) {
        const std::uint64_t lo = std::min(a, b), hi = std::max(a, b);
        const std::uint64_t key = lo * g.size() + hi;
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;
        const double t = sa / (sa - sb);
        out.vertices.push_back(pa + t * (pb - pa));
        const int id = static_cast<int>(out.vertices.size()) - 1;
        edge_vertex.emplace(key, id);
        return id;
    };

    // Kuhn split: tets 0 -> e_a -> e_a + e_b -> 7 over axis permutations
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k + 1 < nz; ++k)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                double smin = 1e300, smax = -1e300;
                for (int c = 0; c < 8; ++c) {
                    const double s = g.at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                    smin = std::min(smin, s);
                    smax = std::max(smax, s);
                }
                if (smin >= 0.0 || smax < 0.0) continue;
                for (const auto& perm : perms) {
                    int off[4][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}};
                    off[1][perm[0]] = 1;
                    off[2][perm[0]] = 1;
                    off[2][perm[1]] = 1;
                    std::uint64_t id[4];
                    Eigen::Vector3d pos[4];
                    double s[4];
                    std::vector<int> in, outv;
                    for (int v = 0; v < 4; ++v) {
                        const int a = i + off[v][0], b = j + off[v][1], c = k + off[v][2];
                        id[v] = node_id(a, b, c);
                        pos[v] = g.node(a, b, c);
                        s[v] = g.at(a, b, c);
                        (s[v] < 0.0 ? in : outv).push_back(v);
                    }
                    if (in.empty() || outv.empty()) continue;
                    auto ep = [&](int a, int b) { return edge_point(id[a], id[b], pos[a], pos[b], s[a], s[b]); };
                    Eigen::Vector3d dir = Eigen::Vector3d::Zero();
                    for (int v : outv) dir += pos[v] / outv.size();
                    for (int v : in) dir -= pos[v] / in.size();
                    auto emit = [&](int a, int b, int c) {
                        if (a == b || b == c || a == c) return;
                        const Eigen::Vector3d n =
                            (out.vertices[b] - out.vertices[a]).cross(out.vertices[c] - out.vertices[a]);
                        if (n.dot(dir) < 0.0) std::swap(b, c);
                        out.faces.push_back({a, b, c});
                    };
                    if (in.size() == 1 || outv.size() == 1) {
                        const bool lone_in = in.size() == 1;
                        const int lone = lone_in ? in[0] : outv[0];
                        const auto& others = lone_in ? outv : in;
                        emit(ep(lone, others[0]), ep(lone, others[1]), ep(lone, others[2]));
                    } else {
                        const int a = in[0], b = in[1], c = outv[0], d = outv[1];
                        const int ac = ep(a, c), ad = ep(a, d), bd = ep(b, d), bc = ep(b, c);
                        emit(ac, ad, bd);
                        emit(ac, bd, bc);
                    }
                }
            }
    if (out.faces.empty()) throw EmptyLevelSetError("grid has no zero crossing");
    return out;
}

HuygensReport huygens_check(const Norm& norm, const SupportSurface& surface, double t, const GridSpec& spec) {
    if (t < 0.0) throw ValidationError("huygens_check needs t >= 0");
    const LevelGrid g0 = init_from_surface(surface, spec);
    const double dt_max = max_stable_dt(norm, g0);
    const LevelGrid g = evolve(norm, g0, t);
    const TriMesh front = extract_zero_level(g);
    const SurfacePtr target = from_support(parallel_support(surface.q(), norm, t), surface.norm());
    HuygensReport r;
    r.t = t;
    r.h = g.h;
    r.hausdorff = hausdorff_distance(front, target->to_trimesh());
    r.steps = t > 0.0 ? static_cast<int>(std::ceil(t / dt_max - 1e-9)) : 0;
    return r;
}

} // namespace aniso
