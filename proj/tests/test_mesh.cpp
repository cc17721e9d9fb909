#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "spb/errors.hpp"
#include "spb/mesh.hpp"

using namespace spb;

namespace {

int interior_facets(const Mesh& m) { return m.num_facets() - m.num_boundary_facets(); }

bool inside(const Mesh& m, int c, const Point& p) {
    const auto& v = m.cell(c);
    const Point a = m.vertex(v[0]), b = m.vertex(v[1]), d = m.vertex(v[2]);
    auto cross = [](const Point& u, const Point& w) { return u.x() * w.y() - u.y() * w.x(); };
    const double tol = 1e-12;
    return cross(b - a, p - a) >= -tol && cross(d - b, p - b) >= -tol && cross(a - d, p - d) >= -tol;
}

void expect_valid(const Mesh& m) {
    const MeshCheck chk = check_mesh(m);
    EXPECT_TRUE(chk.positively_oriented);
    EXPECT_TRUE(chk.adjacency_ok);
    EXPECT_EQ(chk.hanging_vertices, 0);
    EXPECT_TRUE(chk.tags_ok);
    EXPECT_LE(chk.max_shape_ratio, 10.0);
    for (int f = 0; f < m.num_facets(); ++f) {
        const Facet& fc = m.facet(f);
        if (fc.is_boundary()) EXPECT_NE(fc.tag, BoundaryTag::None);
        else EXPECT_EQ(fc.tag, BoundaryTag::None);
    }
}

} // namespace

TEST(MeshBuild, SingleSquareSplit) {
    const Mesh m = make_rect_mesh(1, 1, {});
    EXPECT_EQ(m.num_cells(), 2);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.num_facets(), 5);
    EXPECT_EQ(m.num_boundary_facets(), 4);
}

TEST(MeshBuild, TwoByOneGrid) {
    const Mesh m = make_rect_mesh(2, 1, {});
    EXPECT_EQ(m.num_cells(), 4);
    EXPECT_EQ(m.num_vertices(), 6);
    EXPECT_EQ(interior_facets(m), 3);
}

TEST(MeshBuild, FourByFourSpacing) {
    const Mesh m = make_rect_mesh(4, 4, {});
    EXPECT_NEAR(m.max_h(), std::sqrt(2.0) / 4.0, 1e-14);
    expect_valid(m);
}

TEST(MeshBuild, RejectsClockwiseCell) {
    std::vector<Point> v{{0, 0}, {1, 0}, {0, 1}};
    EXPECT_THROW(Mesh(v, {{0, 2, 1}}, [](const Point&) { return BoundaryTag::Dirichlet; }), GeometryError);
}

TEST(MeshBuild, RejectsBadTarget) {
    EXPECT_THROW(make_named_domain({LShapeDomain{}, {}}, 0.0), GeometryError);
    EXPECT_THROW(make_named_domain({LShapeDomain{}, {}}, -1.0), GeometryError);
}

TEST(NamedDomains, LShapeHasReentrantCorner) {
    const Mesh m = make_named_domain({LShapeDomain{}, {}}, 1.0);
    bool found = false;
    for (const Point& p : m.vertices()) found = found || p.norm() < 1e-14;
    EXPECT_TRUE(found);
    expect_valid(m);
}

TEST(NamedDomains, UnitTriangleCoarsest) {
    const Mesh m = make_named_domain({UnitTriangleDomain{}, {}}, 1.0);
    ASSERT_EQ(m.num_cells(), 1);
    std::set<std::pair<double, double>> got;
    for (const Point& p : m.vertices()) got.insert({p.x(), p.y()});
    EXPECT_EQ(got, (std::set<std::pair<double, double>>{{0, 0}, {1, 0}, {0, 1}}));
}

TEST(NamedDomains, PipeObstacleOnCircle) {
    const Mesh m = make_named_domain({PipeWithHoleDomain{}, {}}, 0.05);
    int on_circle = 0;
    for (int f = 0; f < m.num_facets(); ++f) {
        const Facet& fc = m.facet(f);
        if (fc.tag != BoundaryTag::Navier) continue;
        for (int v : fc.vertices) {
            EXPECT_NEAR((m.vertex(v) - Point(0.2, 0.2)).norm(), 0.1, 1e-12);
            ++on_circle;
        }
    }
    EXPECT_GT(on_circle, 0);
    expect_valid(m);
}

TEST(NamedDomains, EulerCharacteristic) {
    for (const DomainKind& k : std::vector<DomainKind>{RectangleDomain{}, LShapeDomain{}, CShapeDomain{},
                                                       TShapeDomain{}, UnitTriangleDomain{}}) {
        Mesh m = make_named_domain({k, {}}, 0.25);
        for (int r = 0; r < 2; ++r) {
            EXPECT_EQ(m.num_vertices() - m.num_facets() + m.num_cells(), 1);
            m = refine_uniform(m);
        }
    }
    const Mesh pipe = make_named_domain({PipeWithHoleDomain{}, {}}, 0.05);
    EXPECT_EQ(pipe.num_vertices() - pipe.num_facets() + pipe.num_cells(), 0);
}

TEST(Refinement, UniformTwoCellSquare) {
    const Mesh m = refine_uniform(make_rect_mesh(1, 1, {}));
    EXPECT_EQ(m.num_cells(), 8);
    EXPECT_EQ(m.num_vertices(), 9);
}

TEST(Refinement, UniformHalvesSpacing) {
    const Mesh m = refine_uniform(make_rect_mesh(4, 4, {}));
    EXPECT_NEAR(m.max_h(), std::sqrt(2.0) / 8.0, 1e-14);
}

TEST(Refinement, UniformRepeatedKeepsInvariants) {
    Mesh m = make_named_domain({LShapeDomain{}, {}}, 1.0);
    for (int r = 0; r < 5; ++r) {
        m = refine_uniform(m);
        expect_valid(m);
    }
}

TEST(Refinement, BisectEmptyMarkIsIdentity) {
    const Mesh m = make_rect_mesh(3, 2, {});
    const Mesh r = refine_bisect(m, {});
    EXPECT_EQ(r.num_cells(), m.num_cells());
    EXPECT_EQ(r.vertices(), m.vertices());
    EXPECT_EQ(r.cells(), m.cells());
}

TEST(Refinement, BisectSingleCellClosure) {
    const Mesh m = make_rect_mesh(1, 1, {});
    const Mesh r = refine_bisect(m, {0});
    EXPECT_GE(r.num_cells(), 3);
    EXPECT_EQ(check_mesh(r).hanging_vertices, 0);
}

TEST(Refinement, BisectOutOfRangeMark) {
    const Mesh m = make_rect_mesh(1, 1, {});
    EXPECT_THROW(refine_bisect(m, {7}), UsageError);
}

TEST(Refinement, RandomBisectionProperty) {
    std::mt19937 rng(12345);
    Mesh m = make_named_domain({LShapeDomain{}, {}}, 0.5);
    for (int round = 0; round < 100; ++round) {
        std::set<int> marked;
        std::uniform_int_distribution<int> pick(0, m.num_cells() - 1);
        const int count = 1 + round % 3;
        for (int i = 0; i < count; ++i) marked.insert(pick(rng));
        const Mesh r = refine_bisect(m, marked);
        const MeshCheck chk = check_mesh(r);
        ASSERT_TRUE(chk.ok()) << "round " << round << " shape " << chk.max_shape_ratio;
        EXPECT_EQ(r.num_vertices() - r.num_facets() + r.num_cells(), 1);
        for (int c = 0; c < r.num_cells(); ++c) {
            const int p = r.parent(c);
            ASSERT_GE(p, 0);
            ASSERT_LT(p, m.num_cells());
            for (int v : r.cell(c)) ASSERT_TRUE(inside(m, p, r.vertex(v)));
        }
        m = r;
    }
}

TEST(Refinement, AreaPreserved) {
    Mesh m = make_named_domain({TShapeDomain{}, {}}, 0.5);
    auto area = [](const Mesh& x) {
        double a = 0.0;
        for (int c = 0; c < x.num_cells(); ++c) a += x.cell_area(c);
        return a;
    };
    const double a0 = area(m);
    m = refine_bisect(m, {0, 3});
    m = refine_uniform(m);
    EXPECT_NEAR(area(m), a0, 1e-12);
    EXPECT_NEAR(a0, 3.0 + 2.0, 1e-12);
}

TEST(FacetFrame, TopEdge) {
    const Mesh m = make_rect_mesh(1, 1, {});
    int found = 0;
    for (int f = 0; f < m.num_facets(); ++f) {
        const Facet& fc = m.facet(f);
        const Point mid = 0.5 * (m.vertex(fc.vertices[0]) + m.vertex(fc.vertices[1]));
        if (std::abs(mid.y() - 1.0) > 1e-12) continue;
        const FacetFrame fr = m.facet_frame(f);
        EXPECT_NEAR((fr.normal - Point(0, 1)).norm(), 0.0, 1e-14);
        EXPECT_NEAR((fr.tangent - Point(-1, 0)).norm(), 0.0, 1e-14);
        ++found;
    }
    EXPECT_EQ(found, 1);
}

TEST(FacetFrame, DiagonalLength) {
    const Mesh m = make_rect_mesh(1, 1, {});
    for (int f = 0; f < m.num_facets(); ++f)
        if (!m.facet(f).is_boundary()) EXPECT_NEAR(m.facet_frame(f).h_e, std::sqrt(2.0), 1e-14);
}

TEST(FacetFrame, OppositeNormalsOnInteriorFacets) {
    const Mesh m = make_rect_mesh(4, 4, {});
    for (int f = 0; f < m.num_facets(); ++f) {
        const Facet& fc = m.facet(f);
        if (fc.is_boundary()) continue;
        const Point n0 = m.outward_normal(fc.cells[0], fc.local[0]);
        const Point n1 = m.outward_normal(fc.cells[1], fc.local[1]);
        EXPECT_NEAR((n0 + n1).norm(), 0.0, 1e-14);
        EXPECT_NEAR(n0.norm(), 1.0, 1e-14);
    }
}

TEST(MeshIo, RoundTrip) {
    const Mesh m = refine_bisect(make_named_domain({CShapeDomain{}, {}}, 0.5), {1, 2});
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    EXPECT_EQ(r.vertices(), m.vertices());
    EXPECT_EQ(r.cells(), m.cells());
    EXPECT_EQ(r.tag_map(), m.tag_map());
}

TEST(MeshIo, MalformedInput) {
    std::stringstream ss("not a mesh");
    EXPECT_THROW(read_mesh(ss), GeometryError);
}
