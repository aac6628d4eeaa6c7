#include "mdprec/probgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mdprec/dense.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec::probgen {

void GenConfig::validate() const {
    for (Index c : solid_grid) {
        if (c < 1) throw ConfigError("gen.solid_grid entries must be >= 1");
    }
    if (dofs_per_node != 1 && dofs_per_node != 3) throw ConfigError("gen.dofs_per_node must be 1 or 3");
    if (!(solid_modulus > 0.0)) throw ConfigError("gen.solid_modulus must be > 0");
    if (!(beam_modulus > 0.0)) throw ConfigError("gen.beam_modulus must be > 0");
    if (elements_per_fiber < 1) throw ConfigError("gen.elements_per_fiber must be >= 1");
    if (!(penalty_pos >= 0.0)) throw ConfigError("gen.penalty_pos must be >= 0");
    if (!(penalty_rot >= 0.0)) throw ConfigError("gen.penalty_rot must be >= 0");
    if (!(fiber_length > 0.0 && fiber_length < 1.0)) throw ConfigError("gen.fiber_length must lie in (0, 1)");
    if (dofs_per_beam_node != 6 && dofs_per_beam_node != 9) {
        throw ConfigError("gen.dofs_per_beam_node must be 6 or 9");
    }
    if (penalty_rot > 0.0 && dofs_per_beam_node != 9) {
        throw ConfigError("gen.penalty_rot requires dofs_per_beam_node = 9");
    }
    if (!(soft_mode_ratio > 0.0 && soft_mode_ratio <= 1.0)) {
        throw ConfigError("gen.soft_mode_ratio must lie in (0, 1]");
    }
    if (!(skew_perturbation >= 0.0)) throw ConfigError("gen.skew_perturbation must be >= 0");
    if (max_placement_attempts < 1) throw ConfigError("gen.max_placement_attempts must be >= 1");
}

namespace {

struct Grid {
    Index nx, ny, nz;
    double hx, hy, hz;
    Index d;

    explicit Grid(const GenConfig& cfg)
        : nx(cfg.solid_grid[0]), ny(cfg.solid_grid[1]), nz(cfg.solid_grid[2]),
          hx(1.0 / static_cast<double>(nx)), hy(1.0 / static_cast<double>(ny)),
          hz(1.0 / static_cast<double>(nz)), d(cfg.dofs_per_node) {}

    Index free_nodes() const { return (nx + 1) * (ny + 1) * nz; }
    bool clamped(Index k) const { return k == 0; }
    // Valid only for k >= 1.
    Index node(Index i, Index j, Index k) const { return ((k - 1) * (ny + 1) + j) * (nx + 1) + i; }
};

void add_edge(std::vector<Triplet>& t, const Grid& g, std::array<Index, 3> a, std::array<Index, 3> b,
              double w) {
    const bool ca = g.clamped(a[2]);
    const bool cb = g.clamped(b[2]);
    const Index na = ca ? 0 : g.node(a[0], a[1], a[2]);
    const Index nb = cb ? 0 : g.node(b[0], b[1], b[2]);
    for (Index c = 0; c < g.d; ++c) {
        if (!ca) t.push_back({na * g.d + c, na * g.d + c, w});
        if (!cb) t.push_back({nb * g.d + c, nb * g.d + c, w});
        if (!ca && !cb) {
            t.push_back({na * g.d + c, nb * g.d + c, -w});
            t.push_back({nb * g.d + c, na * g.d + c, -w});
        }
    }
}

CsrMatrix assemble_solid(const GenConfig& cfg, const Grid& g) {
    std::vector<Triplet> t;
    t.reserve(g.free_nodes() * g.d * 14);
    // Each cell edge carries a quarter of the face-to-length weight.
    const double wx = cfg.solid_modulus * g.hy * g.hz / g.hx / 4.0;
    const double wy = cfg.solid_modulus * g.hx * g.hz / g.hy / 4.0;
    const double wz = cfg.solid_modulus * g.hx * g.hy / g.hz / 4.0;
    for (Index k = 0; k < g.nz; ++k) {
        for (Index j = 0; j < g.ny; ++j) {
            for (Index i = 0; i < g.nx; ++i) {
                for (Index a = 0; a < 2; ++a) {
                    for (Index b = 0; b < 2; ++b) {
                        add_edge(t, g, {i, j + a, k + b}, {i + 1, j + a, k + b}, wx);
                        add_edge(t, g, {i + a, j, k + b}, {i + a, j + 1, k + b}, wy);
                        add_edge(t, g, {i + a, j + b, k}, {i + a, j + b, k + 1}, wz);
                    }
                }
            }
        }
    }
    const Index n = g.free_nodes() * g.d;
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

Vector top_face_load(const Grid& g) {
    Vector rhs(g.free_nodes() * g.d, 0.0);
    const Index comp = g.d == 3 ? 2 : 0;
    for (Index j = 0; j <= g.ny; ++j) {
        for (Index i = 0; i <= g.nx; ++i) {
            const double fx = (i == 0 || i == g.nx) ? 0.5 : 1.0;
            const double fy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
            rhs[g.node(i, j, g.nz) * g.d + comp] = g.hx * g.hy * fx * fy;
        }
    }
    return rhs;
}

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Orthonormal basis whose first column is `first` (unit), completed by
// Gram-Schmidt on random vectors.
DenseMatrix orthonormal_with(const Vector& first, Rng& rng) {
    const Index n = first.size();
    DenseMatrix q(n, n);
    std::ranges::copy(first, q.column(0).begin());
    for (Index c = 1; c < n; ++c) {
        auto col = q.column(c);
        while (true) {
            for (double& v : col) v = uniform(rng, -1.0, 1.0);
            const double n0 = norm2(col);
            for (int pass = 0; pass < 2; ++pass) {
                for (Index p = 0; p < c; ++p) axpy(-dot(q.column(p), col), q.column(p), col);
            }
            const double nc = norm2(col);
            if (nc > 1e-3 * n0) {
                for (double& v : col) v /= nc;
                break;
            }
        }
    }
    return q;
}

// Dense symmetric element E^B Q diag(lambda) Q^T for two 6-dof nodes
// (positions 0-2, tangents 3-5). One eigenvector lives on tangent dofs only.
DenseMatrix symmetric_element(const GenConfig& cfg, Rng& rng) {
    constexpr Index n = 12;
    Vector soft(n, 0.0);
    for (Index node = 0; node < 2; ++node) {
        for (Index c = 3; c < 6; ++c) soft[node * 6 + c] = uniform(rng, -1.0, 1.0);
    }
    const double ns = norm2(soft);
    for (double& v : soft) v /= ns;
    const DenseMatrix q = orthonormal_with(soft, rng);
    Vector lambda(n);
    lambda[0] = cfg.soft_mode_ratio;
    for (Index i = 1; i < n; ++i) lambda[i] = uniform(rng, 0.1, 1.0);
    DenseMatrix k(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j <= i; ++j) {
            double s = 0.0;
            for (Index e = 0; e < n; ++e) s += q(i, e) * lambda[e] * q(j, e);
            k(i, j) = cfg.beam_modulus * s;
            k(j, i) = k(i, j);
        }
    }
    return k;
}

// Sparse element for two 9-dof nodes. Dofs form six groups of three per
// node pair (0-2, 3-5, 6-8 on each node); the middle groups are hubs coupled
// to every group, the others only to the hubs. The graph has diameter two, so
// the inverse is dense while the matrix is not. Each coupled group pair adds a
// random rank-3 Gram term; a small shift keeps it definite. Optional skew part
// on the same pairs makes it nonsymmetric.
DenseMatrix sparse_element(const GenConfig& cfg, Rng& rng) {
    constexpr Index n = 18;
    constexpr std::array<Index, 2> hubs{1, 4};
    constexpr std::array<Index, 4> leaves{0, 2, 3, 5};
    std::vector<std::pair<Index, Index>> pairs{{hubs[0], hubs[1]}};
    for (Index l : leaves) {
        for (Index h : hubs) pairs.emplace_back(l, h);
    }
    DenseMatrix k(n, n);
    for (const auto& [ga, gb] : pairs) {
        std::array<Index, 6> dofs{};
        for (Index c = 0; c < 3; ++c) {
            dofs[c] = 3 * ga + c;
            dofs[3 + c] = 3 * gb + c;
        }
        std::array<std::array<double, 6>, 3> w{};
        for (auto& row : w) {
            for (double& v : row) v = uniform(rng, -1.0, 1.0);
        }
        for (Index a = 0; a < 6; ++a) {
            for (Index b = 0; b < 6; ++b) {
                double s = 0.0;
                for (const auto& row : w) s += row[a] * row[b];
                k(dofs[a], dofs[b]) += s / 3.0;
            }
        }
        if (cfg.skew_perturbation > 0.0) {
            for (Index a = 0; a < 3; ++a) {
                for (Index b = 3; b < 6; ++b) {
                    const double s = cfg.skew_perturbation * uniform(rng, -1.0, 1.0);
                    k(dofs[a], dofs[b]) += s;
                    k(dofs[b], dofs[a]) -= s;
                }
            }
        }
    }
    for (Index i = 0; i < n; ++i) k(i, i) += uniform(rng, 0.01, 0.02);
    for (Index j = 0; j < n; ++j) {
        for (double& v : k.column(j)) v *= cfg.beam_modulus;
    }
    return k;
}

struct Interp {
    std::array<Index, 8> node{};
    std::array<double, 8> weight{};
    Index count = 0;
};

// Trilinear weights of point p over the surrounding cell; clamped nodes dropped.
Interp trilinear(const Grid& g, const std::array<double, 3>& p) {
    auto locate = [](double x, Index cells) {
        const double s = x * static_cast<double>(cells);
        Index c = static_cast<Index>(std::floor(s));
        c = std::min(c, cells - 1);
        return std::pair<Index, double>(c, s - static_cast<double>(c));
    };
    const auto [i, fx] = locate(p[0], g.nx);
    const auto [j, fy] = locate(p[1], g.ny);
    const auto [k, fz] = locate(p[2], g.nz);
    Interp out;
    for (Index c = 0; c < 8; ++c) {
        const Index di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
        const double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
        if (g.clamped(k + dk) || w == 0.0) continue;
        out.node[out.count] = g.node(i + di, j + dj, k + dk);
        out.weight[out.count] = w;
        ++out.count;
    }
    return out;
}

} // namespace

Index solid_dof_count(const GenConfig& cfg) { return Grid(cfg).free_nodes() * cfg.dofs_per_node; }

CsrMatrix solid_stiffness(const GenConfig& cfg) {
    cfg.validate();
    return assemble_solid(cfg, Grid(cfg));
}

Generated generate(const GenConfig& cfg) {
    cfg.validate();
    const Grid g(cfg);
    Rng rng(cfg.seed);
    Generated out;
    BlockSystem& sys = out.system;
    GenMetadata& meta = out.meta;

    const CsrMatrix ks = assemble_solid(cfg, g);
    const Index n_solid = ks.rows();
    const Index bd = cfg.dofs_per_beam_node;

    // Fiber placement by rejection sampling.
    for (Index f = 0; f < cfg.fiber_count; ++f) {
        bool placed = false;
        for (Index attempt = 0; attempt < cfg.max_placement_attempts && !placed; ++attempt) {
            std::array<double, 3> c{uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0),
                                    uniform(rng, 0.0, 1.0)};
            const double cz = uniform(rng, -1.0, 1.0);
            const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            const double sz = std::sqrt(1.0 - cz * cz);
            const std::array<double, 3> dir{sz * std::cos(phi), sz * std::sin(phi), cz};
            FiberInfo fi;
            bool inside = true;
            for (Index a = 0; a < 3; ++a) {
                fi.start[a] = c[a] - 0.5 * cfg.fiber_length * dir[a];
                fi.end[a] = c[a] + 0.5 * cfg.fiber_length * dir[a];
                inside = inside && fi.start[a] >= 0.0 && fi.start[a] <= 1.0 && fi.end[a] >= 0.0 &&
                         fi.end[a] <= 1.0;
            }
            if (!inside) continue;
            fi.elements = cfg.element_count_mode == ElementCountMode::fixed
                              ? cfg.elements_per_fiber
                              : std::uniform_int_distribution<Index>(1, cfg.elements_per_fiber)(rng);
            meta.fibers.push_back(fi);
            placed = true;
        }
        if (!placed) {
            throw ConfigError("gen: could not place fiber " + std::to_string(f) + " inside the cube after " +
                              std::to_string(cfg.max_placement_attempts) + " attempts");
        }
    }

    std::vector<Triplet> ta;   // beam stiffness plus penalty
    std::vector<Triplet> tb1t; // M x N
    std::vector<Triplet> tb2;  // N x M
    std::vector<Triplet> tc;   // penalty on the solid
    Index beam_offset = 0;
    const double eps = cfg.penalty_pos;
    const double eps_rot = cfg.penalty_rot;
    const bool coupled = eps > 0.0 || eps_rot > 0.0;
    const Index coupled_pos = cfg.dofs_per_node == 3 ? 3 : 1;

    for (const FiberInfo& fi : meta.fibers) {
        const Index ne = fi.elements;
        const Index nodes = ne + 1;
        for (Index e = 0; e < ne; ++e) {
            const DenseMatrix ke = bd == 6 ? symmetric_element(cfg, rng) : sparse_element(cfg, rng);
            const Index base = beam_offset + e * bd;
            for (Index j = 0; j < ke.cols(); ++j) {
                for (Index i = 0; i < ke.rows(); ++i) {
                    if (ke(i, j) != 0.0) ta.push_back({base + i, base + j, ke(i, j)});
                }
            }
        }
        if (coupled) {
            const double le = cfg.fiber_length / static_cast<double>(ne);
            for (Index nd = 0; nd < nodes; ++nd) {
                const double t = static_cast<double>(nd) / static_cast<double>(ne);
                std::array<double, 3> p{};
                for (Index a = 0; a < 3; ++a) p[a] = fi.start[a] + t * (fi.end[a] - fi.start[a]);
                const double w = (nd == 0 || nd == ne) ? 0.5 * le : le;
                const Interp ip = trilinear(g, p);
                auto couple = [&](double pen, Index beam_dof, Index solid_comp, double asym) {
                    // pen * [S, -Pi]^T w [S, -Pi] on the pair (beam_dof, solid component)
                    ta.push_back({beam_dof, beam_dof, pen * w});
                    for (Index a = 0; a < ip.count; ++a) {
                        const Index sa = ip.node[a] * g.d + solid_comp;
                        const double v = pen * w * ip.weight[a];
                        tb1t.push_back({beam_dof, sa, -v});
                        tb2.push_back({sa, beam_dof, -v * (1.0 + asym)});
                        for (Index b = 0; b < ip.count; ++b) {
                            tc.push_back({sa, ip.node[b] * g.d + solid_comp, v * ip.weight[b]});
                        }
                    }
                };
                const Index node_base = beam_offset + nd * bd;
                if (eps > 0.0) {
                    for (Index c = 0; c < coupled_pos; ++c) couple(eps, node_base + c, c, 0.0);
                }
                if (eps_rot > 0.0) {
                    for (Index c = 0; c < 3; ++c) {
                        couple(eps_rot, node_base + 3 + c, (c + 1) % cfg.dofs_per_node,
                               cfg.rot_asymmetry);
                    }
                }
            }
        }
        beam_offset += nodes * bd;
        meta.beam_block_boundaries.push_back(beam_offset);
    }

    const Index m = beam_offset;
    sys.a = CsrMatrix::from_triplets(m, m, std::move(ta));
    sys.b1t = CsrMatrix::from_triplets(m, n_solid, std::move(tb1t));
    sys.b2 = CsrMatrix::from_triplets(n_solid, m, std::move(tb2));
    sys.c = coupled && !tc.empty() ? add_scaled(ks, 1.0, CsrMatrix::from_triplets(n_solid, n_solid, std::move(tc)))
                                   : ks;
    sys.rhs_beam.assign(m, 0.0);
    sys.rhs_solid = top_face_load(g);
    sys.beam_block_boundaries = meta.beam_block_boundaries;
    meta.n_beam_dofs = m;
    meta.n_solid_dofs = n_solid;
    validate(sys);
    return out;
}

} // namespace mdprec::probgen
