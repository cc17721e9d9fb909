#include "spb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "spb/errors.hpp"

namespace spb {

namespace {

std::uint64_t pack(int a, int b) {
    const auto [lo, hi] = edge_key(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32U) | static_cast<std::uint32_t>(hi);
}

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

int longest_edge(const std::vector<Point>& v, const std::array<int, 3>& c) {
    int best = 0;
    double best_len = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double len = (v[c[(i + 2) % 3]] - v[c[(i + 1) % 3]]).norm();
        if (len > best_len * (1.0 + 1e-12)) {
            best = i;
            best_len = len;
        }
    }
    return best;
}

/// Deduplicates points generated independently by different blocks.
class VertexPool {
  public:
    int add(const Point& p) {
        const auto key = std::make_pair(std::llround(p.x() * 1e10), std::llround(p.y() * 1e10));
        auto [it, inserted] = index_.try_emplace(key, static_cast<int>(points_.size()));
        if (inserted) points_.push_back(p);
        return it->second;
    }
    std::vector<Point> take() { return std::move(points_); }

  private:
    std::map<std::pair<long long, long long>, int> index_;
    std::vector<Point> points_;
};

void push_ccw(std::vector<std::array<int, 3>>& cells, const std::vector<Point>& v, int a, int b, int c) {
    if (signed_area(v[a], v[b], v[c]) > 0.0)
        cells.push_back({a, b, c});
    else
        cells.push_back({a, c, b});
}

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

/// Union of axis-aligned blocks of a tensor grid. `included(i, j)` selects
/// block (xs[i], xs[i+1]) x (ys[j], ys[j+1]).
Mesh block_mesh(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::function<bool(int, int)>& included, double h, const BoundaryRule& rule) {
    std::vector<double> gx, gy;
    std::vector<int> bx, by; // block index of each fine interval
    auto subdivide = [h](const std::vector<double>& br, std::vector<double>& g, std::vector<int>& blk) {
        g.push_back(br.front());
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            const double len = br[i + 1] - br[i];
            const int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
            for (int k = 1; k <= n; ++k) {
                g.push_back(k == n ? br[i + 1] : br[i] + len * k / n);
                blk.push_back(static_cast<int>(i));
            }
        }
    };
    subdivide(xs, gx, bx);
    subdivide(ys, gy, by);

    VertexPool pool;
    std::vector<std::array<int, 4>> quads;
    for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
        for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
            if (!included(bx[i], by[j])) continue;
            quads.push_back({pool.add({gx[i], gy[j]}), pool.add({gx[i + 1], gy[j]}), pool.add({gx[i + 1], gy[j + 1]}),
                             pool.add({gx[i], gy[j + 1]})});
        }
    }
    auto verts = pool.take();
    std::vector<std::array<int, 3>> cells;
    cells.reserve(2 * quads.size());
    for (const auto& q : quads) {
        cells.push_back({q[0], q[1], q[2]});
        cells.push_back({q[0], q[2], q[3]});
    }
    return Mesh(std::move(verts), std::move(cells), rule);
}

Mesh unit_triangle_mesh(double h, const BoundaryRule& rule) {
    const int n = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-9)));
    std::vector<Point> verts;
    std::vector<std::vector<int>> id(n + 1, std::vector<int>(n + 1, -1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i + j <= n; ++i) {
            id[i][j] = static_cast<int>(verts.size());
            verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
        }
    std::vector<std::array<int, 3>> cells;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i + j < n; ++i) {
            cells.push_back({id[i][j], id[i + 1][j], id[i][j + 1]});
            if (i + j < n - 1) cells.push_back({id[i + 1][j], id[i + 1][j + 1], id[i][j + 1]});
        }
    return Mesh(std::move(verts), std::move(cells), rule);
}

constexpr double kPipeLength = 2.2;
constexpr double kPipeHeight = 0.41;

/// O-grid around the obstacle inside the box [0, H] x [0, H], followed by a
/// structured block up to the outlet.
Mesh pipe_mesh(const PipeWithHoleDomain& d, double h, const BoundaryRule& rule) {
    const double H = kPipeHeight;
    const double r = d.radius;
    const Point c = d.center;
    const double margin = std::min({c.x() - r, H - c.x() - r, c.y() - r, H - c.y() - r});
    if (r <= 0.0 || margin <= 0.0)
        throw GeometryError("obstacle of radius " + std::to_string(r) + " does not fit inside the pipe inlet box");
    if (h > r)
        throw GeometryError("h_target " + std::to_string(h) + " too coarse to resolve an obstacle of radius " +
                            std::to_string(r));

    // polygon segment 2 r sin(pi / N) <= h with N = 4 m
    int m = std::max(2, static_cast<int>(std::ceil(H / h - 1e-9)));
    while (2.0 * r * std::sin(std::numbers::pi / (4.0 * m)) > h) ++m;
    const int n_poly = 4 * m;
    const int layers = std::max(1, static_cast<int>(std::ceil((0.5 * H - r) / h - 1e-9)));

    auto box_point = [&](int k) -> Point {
        const int side = k / m;
        const double t = static_cast<double>(k % m) / m;
        switch (side) {
            case 0: return {t * H, 0.0};
            case 1: return {H, t * H};
            case 2: return {H - t * H, H};
            default: return {0.0, H - t * H};
        }
    };
    auto circle_point = [&](int k) -> Point {
        const double a = 1.25 * std::numbers::pi + 2.0 * std::numbers::pi * k / n_poly;
        return c + r * Point(std::cos(a), std::sin(a));
    };

    VertexPool pool;
    std::vector<std::vector<int>> ring(layers + 1, std::vector<int>(n_poly));
    for (int l = 0; l <= layers; ++l) {
        const double s = static_cast<double>(l) / layers;
        for (int k = 0; k < n_poly; ++k) {
            const Point p = l == 0 ? circle_point(k) : (l == layers ? box_point(k) : Point((1.0 - s) * circle_point(k) + s * box_point(k)));
            ring[l][k] = pool.add(p);
        }
    }
    const int nx = std::max(1, static_cast<int>(std::ceil((kPipeLength - H) / (H / m) - 1e-9)));
    std::vector<std::vector<int>> grid(nx + 1, std::vector<int>(m + 1));
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= m; ++j) {
            const double x = i == 0 ? H : (i == nx ? kPipeLength : H + (kPipeLength - H) * i / nx);
            const double y = j == m ? H : H * j / m;
            grid[i][j] = pool.add({x, y});
        }
    auto verts = pool.take();

    std::vector<std::array<int, 3>> cells;
    auto split_quad = [&](int a, int b, int cc, int dd) {
        // shorter diagonal
        if ((verts[a] - verts[cc]).norm() <= (verts[b] - verts[dd]).norm()) {
            push_ccw(cells, verts, a, b, cc);
            push_ccw(cells, verts, a, cc, dd);
        } else {
            push_ccw(cells, verts, a, b, dd);
            push_ccw(cells, verts, b, cc, dd);
        }
    };
    for (int l = 0; l < layers; ++l)
        for (int k = 0; k < n_poly; ++k) {
            const int k1 = (k + 1) % n_poly;
            split_quad(ring[l][k], ring[l][k1], ring[l + 1][k1], ring[l + 1][k]);
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < m; ++j) split_quad(grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]);

    return Mesh(std::move(verts), std::move(cells), rule);
}

} // namespace

std::string to_string(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::Dirichlet: return "dirichlet";
        case BoundaryTag::Navier: return "navier";
        case BoundaryTag::DoNothing: return "donothing";
        default: return "none";
    }
}

BoundaryTag tag_from_string(const std::string& s) {
    if (s == "dirichlet" || s == "1") return BoundaryTag::Dirichlet;
    if (s == "navier" || s == "2") return BoundaryTag::Navier;
    if (s == "donothing" || s == "3") return BoundaryTag::DoNothing;
    throw GeometryError("unknown boundary tag '" + s + "'");
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
           const std::map<EdgeKey, BoundaryTag>& tags, std::vector<int> refinement_edge, std::vector<int> parent,
           int generation)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), refinement_edge_(std::move(refinement_edge)),
      parent_(std::move(parent)), generation_(generation) {
    build_topology(&tags, nullptr);
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells, const BoundaryRule& rule)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
    build_topology(nullptr, &rule);
}

void Mesh::build_topology(const std::map<EdgeKey, BoundaryTag>* tags, const BoundaryRule* rule) {
    const int nv = num_vertices();
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        for (int v : cells_[c])
            if (v < 0 || v >= nv) throw GeometryError("cell " + std::to_string(c) + " references missing vertex");
        if (signed_area(vertices_[cells_[c][0]], vertices_[cells_[c][1]], vertices_[cells_[c][2]]) <= 0.0)
            throw GeometryError("cell " + std::to_string(c) + " is not positively oriented");
    }
    if (!refinement_edge_.empty() && refinement_edge_.size() != cells_.size())
        throw GeometryError("refinement edge array has wrong length");
    if (refinement_edge_.empty()) {
        refinement_edge_.resize(cells_.size());
        for (std::size_t c = 0; c < cells_.size(); ++c) refinement_edge_[c] = longest_edge(vertices_, cells_[c]);
    }

    std::unordered_map<std::uint64_t, int> lookup;
    lookup.reserve(cells_.size() * 2);
    cell_facets_.assign(cells_.size(), {-1, -1, -1});
    facets_.clear();
    facets_.reserve(cells_.size() * 3 / 2 + 16);
    for (int c = 0; c < num_cells(); ++c) {
        for (int le = 0; le < 3; ++le) {
            const int a = cells_[c][(le + 1) % 3];
            const int b = cells_[c][(le + 2) % 3];
            auto [it, inserted] = lookup.try_emplace(pack(a, b), num_facets());
            if (inserted) {
                Facet f;
                f.vertices = {a, b};
                f.cells = {c, -1};
                f.local = {le, -1};
                facets_.push_back(f);
            } else {
                Facet& f = facets_[it->second];
                if (f.cells[1] >= 0)
                    throw GeometryError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                        ") shared by more than two cells");
                f.cells[1] = c;
                f.local[1] = le;
            }
            cell_facets_[c][le] = it->second;
        }
    }
    for (auto& f : facets_) {
        if (!f.is_boundary()) continue;
        if (tags != nullptr) {
            auto it = tags->find(edge_key(f.vertices[0], f.vertices[1]));
            if (it != tags->end()) f.tag = it->second;
        } else if (rule != nullptr && *rule) {
            f.tag = (*rule)(0.5 * (vertices_[f.vertices[0]] + vertices_[f.vertices[1]]));
        }
        if (f.tag == BoundaryTag::None)
            throw GeometryError("boundary facet (" + std::to_string(f.vertices[0]) + "," +
                                std::to_string(f.vertices[1]) + ") has no tag (non-conforming mesh or incomplete tags)");
    }
}

int Mesh::num_boundary_facets() const {
    return static_cast<int>(std::count_if(facets_.begin(), facets_.end(), [](const Facet& f) { return f.is_boundary(); }));
}

double Mesh::cell_area(int c) const {
    const auto& k = cells_[c];
    return signed_area(vertices_[k[0]], vertices_[k[1]], vertices_[k[2]]);
}

double Mesh::cell_diameter(int c) const {
    const auto& k = cells_[c];
    return std::max({(vertices_[k[0]] - vertices_[k[1]]).norm(), (vertices_[k[1]] - vertices_[k[2]]).norm(),
                     (vertices_[k[2]] - vertices_[k[0]]).norm()});
}

double Mesh::cell_inradius(int c) const {
    const auto& k = cells_[c];
    const double perim = (vertices_[k[0]] - vertices_[k[1]]).norm() + (vertices_[k[1]] - vertices_[k[2]]).norm() +
                         (vertices_[k[2]] - vertices_[k[0]]).norm();
    return 2.0 * cell_area(c) / perim;
}

double Mesh::facet_length(int f) const {
    return (vertices_[facets_[f].vertices[1]] - vertices_[facets_[f].vertices[0]]).norm();
}

Point Mesh::cell_centroid(int c) const {
    const auto& k = cells_[c];
    return (vertices_[k[0]] + vertices_[k[1]] + vertices_[k[2]]) / 3.0;
}

Point Mesh::outward_normal(int c, int le) const {
    const Point d = vertices_[cells_[c][(le + 2) % 3]] - vertices_[cells_[c][(le + 1) % 3]];
    return Point(d.y(), -d.x()).normalized();
}

FacetFrame Mesh::facet_frame(int f) const {
    const Facet& fc = facets_[f];
    FacetFrame fr;
    fr.normal = outward_normal(fc.cells[0], fc.local[0]);
    fr.tangent = Point(-fr.normal.y(), fr.normal.x());
    fr.h_e = facet_length(f);
    fr.h_K = cell_diameter(fc.cells[0]);
    return fr;
}

double Mesh::max_h() const {
    double h = 0.0;
    for (int c = 0; c < num_cells(); ++c) h = std::max(h, cell_diameter(c));
    return h;
}

double Mesh::min_h() const {
    double h = std::numeric_limits<double>::infinity();
    for (int c = 0; c < num_cells(); ++c) h = std::min(h, cell_diameter(c));
    return h;
}

double Mesh::max_shape_ratio() const {
    double r = 0.0;
    for (int c = 0; c < num_cells(); ++c) r = std::max(r, cell_diameter(c) / cell_inradius(c));
    return r;
}

std::map<EdgeKey, BoundaryTag> Mesh::tag_map() const {
    std::map<EdgeKey, BoundaryTag> out;
    for (const auto& f : facets_)
        if (f.is_boundary()) out.emplace(edge_key(f.vertices[0], f.vertices[1]), f.tag);
    return out;
}

BoundaryRule default_boundary_rule(const DomainKind& kind) {
    return std::visit(
        [](const auto& d) -> BoundaryRule {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, RectangleDomain>) {
                return [](const Point&) { return BoundaryTag::Dirichlet; };
            } else if constexpr (std::is_same_v<T, LShapeDomain>) {
                // edges meeting at the re-entrant corner (0,0)
                return [](const Point& p) {
                    const bool notch = (near(p.y(), 0.0) && p.x() > 0.0) || (near(p.x(), 0.0) && p.y() > 0.0);
                    return notch ? BoundaryTag::Navier : BoundaryTag::Dirichlet;
                };
            } else if constexpr (std::is_same_v<T, CShapeDomain>) {
                return [](const Point& p) {
                    const bool notch = (near(p.x(), -0.2) && std::abs(p.y()) < 0.5) ||
                                       ((near(p.y(), 0.5) || near(p.y(), -0.5)) && p.x() > -0.2);
                    return notch ? BoundaryTag::Navier : BoundaryTag::Dirichlet;
                };
            } else if constexpr (std::is_same_v<T, TShapeDomain>) {
                return [](const Point& p) {
                    const bool notch = (near(p.y(), 0.0) && std::abs(p.x()) > 0.5) ||
                                       ((near(p.x(), 0.5) || near(p.x(), -0.5)) && p.y() < 0.0);
                    return notch ? BoundaryTag::Navier : BoundaryTag::Dirichlet;
                };
            } else if constexpr (std::is_same_v<T, UnitTriangleDomain>) {
                return [](const Point& p) {
                    return near(p.x() + p.y(), 1.0) ? BoundaryTag::Navier : BoundaryTag::Dirichlet;
                };
            } else {
                const Point c = d.center;
                const double r = d.radius;
                return [c, r](const Point& p) {
                    if ((p - c).norm() < r + 1e-6) return BoundaryTag::Navier;
                    if (near(p.x(), kPipeLength)) return BoundaryTag::DoNothing;
                    return BoundaryTag::Dirichlet;
                };
            }
        },
        kind);
}

Mesh make_rect_mesh(int nx, int ny, const Bounds& b, const BoundaryRule& rule) {
    if (nx < 1 || ny < 1) throw GeometryError("cell counts must be positive");
    if (!(b.x1 > b.x0) || !(b.y1 > b.y0) || !std::isfinite(b.x1 - b.x0) || !std::isfinite(b.y1 - b.y0))
        throw GeometryError("degenerate rectangle bounds");
    std::vector<Point> verts;
    verts.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            verts.emplace_back(i == nx ? b.x1 : b.x0 + (b.x1 - b.x0) * i / nx,
                               j == ny ? b.y1 : b.y0 + (b.y1 - b.y0) * j / ny);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::array<int, 3>> cells;
    cells.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return Mesh(std::move(verts), std::move(cells), rule ? rule : default_boundary_rule(RectangleDomain{b}));
}

Mesh make_named_domain(const DomainSpec& spec, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("h_target must be positive");
    const BoundaryRule rule = spec.boundary_rule ? spec.boundary_rule : default_boundary_rule(spec.kind);
    return std::visit(
        [&](const auto& d) -> Mesh {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, RectangleDomain>) {
                const Bounds& b = d.bounds;
                if (!(b.x1 > b.x0) || !(b.y1 > b.y0)) throw GeometryError("degenerate rectangle bounds");
                return block_mesh({b.x0, b.x1}, {b.y0, b.y1}, [](int, int) { return true; }, h, rule);
            } else if constexpr (std::is_same_v<T, LShapeDomain>) {
                return block_mesh({-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0},
                                  [](int i, int j) { return !(i == 1 && j == 1); }, h, rule);
            } else if constexpr (std::is_same_v<T, CShapeDomain>) {
                return block_mesh({-1.0, -0.2, 1.0}, {-1.0, -0.5, 0.5, 1.0},
                                  [](int i, int j) { return !(i == 1 && j == 1); }, h, rule);
            } else if constexpr (std::is_same_v<T, TShapeDomain>) {
                return block_mesh({-1.5, -0.5, 0.5, 1.5}, {-2.0, 0.0, 1.0},
                                  [](int i, int j) { return j == 1 || i == 1; }, h, rule);
            } else if constexpr (std::is_same_v<T, UnitTriangleDomain>) {
                return unit_triangle_mesh(h, rule);
            } else {
                return pipe_mesh(d, h, rule);
            }
        },
        spec.kind);
}

Mesh refine_uniform(const Mesh& m) {
    std::vector<Point> verts = m.vertices();
    std::vector<int> edge_mid(m.num_facets());
    for (int f = 0; f < m.num_facets(); ++f) {
        const auto& fv = m.facet(f).vertices;
        edge_mid[f] = static_cast<int>(verts.size());
        verts.push_back(0.5 * (m.vertex(fv[0]) + m.vertex(fv[1])));
    }
    std::vector<std::array<int, 3>> cells;
    std::vector<int> ref_edge, parent;
    cells.reserve(4 * static_cast<std::size_t>(m.num_cells()));
    for (int c = 0; c < m.num_cells(); ++c) {
        const auto& k = m.cell(c);
        const auto& cf = m.cell_facets(c);
        const int ma = edge_mid[cf[0]], mb = edge_mid[cf[1]], mc = edge_mid[cf[2]];
        // Children are homothetic to the parent with matching local order,
        // so they inherit the refinement edge index.
        const std::array<std::array<int, 3>, 4> kids{
            {{k[0], mc, mb}, {mc, k[1], ma}, {mb, ma, k[2]}, {ma, mb, mc}}};
        for (const auto& kid : kids) {
            cells.push_back(kid);
            ref_edge.push_back(m.refinement_edge(c));
            parent.push_back(c);
        }
    }
    std::map<EdgeKey, BoundaryTag> tags;
    for (int f = 0; f < m.num_facets(); ++f) {
        const Facet& fc = m.facet(f);
        if (!fc.is_boundary()) continue;
        tags[edge_key(fc.vertices[0], edge_mid[f])] = fc.tag;
        tags[edge_key(edge_mid[f], fc.vertices[1])] = fc.tag;
    }
    return Mesh(std::move(verts), std::move(cells), tags, std::move(ref_edge), std::move(parent), m.generation() + 1);
}

Mesh refine_bisect(const Mesh& m, const std::set<int>& marked) {
    for (int c : marked)
        if (c < 0 || c >= m.num_cells()) throw UsageError("marked cell id " + std::to_string(c) + " out of range");
    if (marked.empty()) return m;

    struct Work {
        std::array<int, 3> v;
        int ref;
        int origin;
    };
    std::vector<Point> verts = m.vertices();
    std::vector<Work> cells;
    cells.reserve(m.num_cells() + 4 * marked.size());
    for (int c = 0; c < m.num_cells(); ++c) cells.push_back({m.cell(c), m.refinement_edge(c), c});

    std::map<EdgeKey, BoundaryTag> tags = m.tag_map();
    std::unordered_map<std::uint64_t, int> midpoint;
    std::vector<char> flag(cells.size(), 0);
    for (int c : marked) flag[c] = 1;

    auto mid_of = [&](int a, int b) {
        auto [it, inserted] = midpoint.try_emplace(pack(a, b), static_cast<int>(verts.size()));
        if (inserted) {
            verts.push_back(0.5 * (verts[a] + verts[b]));
            auto t = tags.find(edge_key(a, b));
            if (t != tags.end()) {
                const BoundaryTag tag = t->second;
                tags.erase(t);
                tags[edge_key(a, it->second)] = tag;
                tags[edge_key(it->second, b)] = tag;
            }
        }
        return it->second;
    };

    bool any = true;
    while (any) {
        std::vector<Work> next;
        next.reserve(cells.size() + 64);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!flag[i]) {
                next.push_back(cells[i]);
                continue;
            }
            const auto& w = cells[i];
            const int w0 = w.v[w.ref], w1 = w.v[(w.ref + 1) % 3], w2 = w.v[(w.ref + 2) % 3];
            const int mv = mid_of(w1, w2);
            next.push_back({{mv, w0, w1}, 0, w.origin});
            next.push_back({{mv, w2, w0}, 0, w.origin});
        }
        cells = std::move(next);
        // closure: any cell with a split edge must be bisected
        flag.assign(cells.size(), 0);
        any = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& v = cells[i].v;
            for (int le = 0; le < 3 && !flag[i]; ++le)
                if (midpoint.count(pack(v[(le + 1) % 3], v[(le + 2) % 3])) != 0U) {
                    flag[i] = 1;
                    any = true;
                }
        }
    }

    std::vector<std::array<int, 3>> out_cells;
    std::vector<int> ref, parent;
    out_cells.reserve(cells.size());
    for (const auto& w : cells) {
        out_cells.push_back(w.v);
        ref.push_back(w.ref);
        parent.push_back(w.origin);
    }
    return Mesh(std::move(verts), std::move(out_cells), tags, std::move(ref), std::move(parent), m.generation() + 1);
}

MeshCheck check_mesh(const Mesh& m) {
    MeshCheck r;
    for (int c = 0; c < m.num_cells(); ++c)
        if (m.cell_area(c) <= 0.0) r.positively_oriented = false;
    r.max_shape_ratio = m.max_shape_ratio();
    for (const auto& f : m.facets()) {
        if (f.cells[0] < 0) r.adjacency_ok = false;
        if (f.is_boundary() == (f.tag == BoundaryTag::None)) r.tags_ok = false;
    }
    // A hanging vertex can only sit on a facet that has a single owner.
    for (int fi = 0; fi < m.num_facets(); ++fi) {
        const Facet& f = m.facet(fi);
        if (!f.is_boundary()) continue;
        const Point a = m.vertex(f.vertices[0]);
        const Point b = m.vertex(f.vertices[1]);
        const Point lo = a.cwiseMin(b), hi = a.cwiseMax(b);
        const double len = (b - a).norm();
        for (int v = 0; v < m.num_vertices(); ++v) {
            if (v == f.vertices[0] || v == f.vertices[1]) continue;
            const Point& p = m.vertex(v);
            if ((p.array() < lo.array() - 1e-12).any() || (p.array() > hi.array() + 1e-12).any()) continue;
            const double cross = (b - a).x() * (p - a).y() - (b - a).y() * (p - a).x();
            const double t = (p - a).dot(b - a) / (len * len);
            if (std::abs(cross) <= 1e-12 * len * len && t > 1e-12 && t < 1.0 - 1e-12) ++r.hanging_vertices;
        }
    }
    return r;
}

void write_mesh(std::ostream& os, const Mesh& m) {
    std::vector<const Facet*> tagged;
    for (const auto& f : m.facets())
        if (f.tag != BoundaryTag::None) tagged.push_back(&f);
    os << m.num_cells() << ' ' << m.num_vertices() << ' ' << tagged.size() << '\n';
    os << std::setprecision(17);
    for (const auto& p : m.vertices()) os << p.x() << ' ' << p.y() << '\n';
    for (const auto& c : m.cells()) os << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    for (const Facet* f : tagged) os << f->vertices[0] << ' ' << f->vertices[1] << ' ' << to_string(f->tag) << '\n';
}

Mesh read_mesh(std::istream& is) {
    long long nc = 0, nv = 0, nf = 0;
    if (!(is >> nc >> nv >> nf) || nc < 0 || nv < 0 || nf < 0) throw GeometryError("malformed mesh header");
    std::vector<Point> verts(static_cast<std::size_t>(nv));
    for (auto& p : verts)
        if (!(is >> p.x() >> p.y())) throw GeometryError("malformed vertex line");
    std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(nc));
    for (auto& c : cells)
        if (!(is >> c[0] >> c[1] >> c[2])) throw GeometryError("malformed cell line");
    std::map<EdgeKey, BoundaryTag> tags;
    for (long long i = 0; i < nf; ++i) {
        int a = 0, b = 0;
        std::string t;
        if (!(is >> a >> b >> t)) throw GeometryError("malformed facet line");
        tags[edge_key(a, b)] = tag_from_string(t);
    }
    return Mesh(std::move(verts), std::move(cells), tags);
}

void write_mesh_file(const std::string& path, const Mesh& m) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_mesh(os, m);
    if (!os) throw IoError("write to '" + path + "' failed");
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    return read_mesh(is);
}

} // namespace spb
