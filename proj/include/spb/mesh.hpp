#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace spb {

using Point = Eigen::Vector2d;

enum class BoundaryTag : std::uint8_t { None = 0, Dirichlet = 1, Navier = 2, DoNothing = 3 };

std::string to_string(BoundaryTag tag);
BoundaryTag tag_from_string(const std::string& s);

/// An edge of the triangulation. For interior facets `cells[0]` is the
/// lower-indexed neighbour (K-) and `cells[1]` the other one (K+); boundary
/// facets have `cells[1] == -1`. `vertices` follow the local edge direction
/// of cells[0], so (vertices[1] - vertices[0]) rotated by -90 degrees is the
/// K- outward normal.
struct Facet {
    std::array<int, 2> vertices{};
    std::array<int, 2> cells{-1, -1};
    std::array<int, 2> local{-1, -1};
    BoundaryTag tag = BoundaryTag::None;

    [[nodiscard]] bool is_boundary() const { return cells[1] < 0; }
};

struct FacetFrame {
    Point normal;
    Point tangent;
    double h_e = 0.0;
    double h_K = 0.0;
};

/// Key for an undirected edge.
using EdgeKey = std::pair<int, int>;
inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

using BoundaryRule = std::function<BoundaryTag(const Point& midpoint)>;

/// Conforming triangulation of a polygonal domain. Immutable after
/// construction; refinement returns a new mesh.
///
/// Local edge `i` of a cell is the edge opposite local vertex `i`, running
/// from vertex (i+1)%3 to (i+2)%3.
class Mesh {
  public:
    Mesh() = default;

    /// Builds facet adjacency and applies tags. Every facet with a single
    /// owning cell must receive a tag other than None, otherwise the input is
    /// either non-conforming or the tag map is incomplete.
    Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
         const std::map<EdgeKey, BoundaryTag>& tags, std::vector<int> refinement_edge = {},
         std::vector<int> parent = {}, int generation = 0);

    /// Same, with tags obtained by evaluating `rule` at boundary-facet midpoints.
    Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells, const BoundaryRule& rule);

    [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int num_cells() const { return static_cast<int>(cells_.size()); }
    [[nodiscard]] int num_facets() const { return static_cast<int>(facets_.size()); }
    [[nodiscard]] int num_boundary_facets() const;

    [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
    [[nodiscard]] const Point& vertex(int v) const { return vertices_[v]; }
    [[nodiscard]] const std::array<int, 3>& cell(int c) const { return cells_[c]; }
    [[nodiscard]] const std::vector<std::array<int, 3>>& cells() const { return cells_; }
    [[nodiscard]] const Facet& facet(int f) const { return facets_[f]; }
    [[nodiscard]] const std::vector<Facet>& facets() const { return facets_; }
    [[nodiscard]] const std::array<int, 3>& cell_facets(int c) const { return cell_facets_[c]; }
    [[nodiscard]] int refinement_edge(int c) const { return refinement_edge_[c]; }
    [[nodiscard]] int parent(int c) const { return parent_.empty() ? -1 : parent_[c]; }
    [[nodiscard]] int generation() const { return generation_; }

    [[nodiscard]] double cell_area(int c) const;
    [[nodiscard]] double cell_diameter(int c) const;
    [[nodiscard]] double cell_inradius(int c) const;
    [[nodiscard]] double facet_length(int f) const;
    [[nodiscard]] Point cell_centroid(int c) const;

    /// Outward unit normal of local edge `le` of cell `c`.
    [[nodiscard]] Point outward_normal(int c, int le) const;
    [[nodiscard]] FacetFrame facet_frame(int f) const;

    [[nodiscard]] double max_h() const;
    [[nodiscard]] double min_h() const;
    [[nodiscard]] double max_shape_ratio() const;

    /// Tagged boundary edges, keyed by sorted vertex pair.
    [[nodiscard]] std::map<EdgeKey, BoundaryTag> tag_map() const;

  private:
    void build_topology(const std::map<EdgeKey, BoundaryTag>* tags, const BoundaryRule* rule);

    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<Facet> facets_;
    std::vector<std::array<int, 3>> cell_facets_;
    std::vector<int> refinement_edge_;
    std::vector<int> parent_;
    int generation_ = 0;
};

struct Bounds {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

struct RectangleDomain {
    Bounds bounds;
};
struct LShapeDomain {};
struct CShapeDomain {};
struct TShapeDomain {};
struct UnitTriangleDomain {};
struct PipeWithHoleDomain {
    Point center{0.2, 0.2};
    double radius = 0.1;
};

using DomainKind = std::variant<RectangleDomain, LShapeDomain, CShapeDomain, TShapeDomain, UnitTriangleDomain,
                                PipeWithHoleDomain>;

struct DomainSpec {
    DomainKind kind;
    /// Empty rule selects the default tagging of the domain kind.
    BoundaryRule boundary_rule;
};

/// Default boundary tagging of each named domain.
BoundaryRule default_boundary_rule(const DomainKind& kind);

/// Structured nx-by-ny grid, each rectangle split along its SW-NE diagonal.
Mesh make_rect_mesh(int nx, int ny, const Bounds& bounds, const BoundaryRule& rule = {});

/// Mesh of a named domain with grid spacing (or obstacle segment length) at
/// most `h_target`.
Mesh make_named_domain(const DomainSpec& spec, double h_target);

/// Red refinement: every triangle is split into four congruent children.
Mesh refine_uniform(const Mesh& m);

/// Newest-vertex bisection of the marked cells plus conforming closure.
/// Parent indices of the result refer to cells of `m`.
Mesh refine_bisect(const Mesh& m, const std::set<int>& marked);

struct MeshCheck {
    bool positively_oriented = true;
    bool adjacency_ok = true;
    int hanging_vertices = 0;
    double max_shape_ratio = 0.0;
    bool tags_ok = true;
    [[nodiscard]] bool ok(double shape_bound = 10.0) const {
        return positively_oriented && adjacency_ok && hanging_vertices == 0 && tags_ok &&
               max_shape_ratio <= shape_bound;
    }
};

/// Full invariant scan (orientation, adjacency counts, hanging vertices,
/// shape regularity, tag partition).
MeshCheck check_mesh(const Mesh& m);

void write_mesh(std::ostream& os, const Mesh& m);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& m);
Mesh read_mesh_file(const std::string& path);

} // namespace spb
