#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "spb/mesh.hpp"

namespace spb {

// ---------------------------------------------------------------- quadrature

enum class QuadDomain { Triangle, Edge };

/// Points live on the reference triangle (0,0),(1,0),(0,1) or, for edges, on
/// [0,1] stored in the x coordinate.
struct QuadratureRule {
    QuadDomain domain = QuadDomain::Triangle;
    int degree = 0;
    std::vector<Point> points;
    std::vector<double> weights;
    [[nodiscard]] int size() const { return static_cast<int>(weights.size()); }
};

constexpr int kMaxQuadratureDegree = 10;

/// Collapsed Gauss (Legendre x Jacobi(1,0)) rule on the triangle, Gauss-Legendre
/// on the edge. Rules are cached; the returned reference stays valid.
const QuadratureRule& quad_rule(QuadDomain domain, int degree);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// ------------------------------------------------------------------- basis

/// Basis data at a set of reference points; row = point, column = basis fn.
struct Tabulation {
    Eigen::MatrixXd values, dx, dy, dxx, dxy, dyy;
};

/// Nodal Lagrange basis of degree 1..3 on the reference triangle.
///
/// Node order: vertices, then (degree-1) nodes per local edge (edge i is
/// opposite vertex i and runs from vertex i+1 to vertex i+2), then interior.
class LagrangeBasis {
  public:
    explicit LagrangeBasis(int degree);

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int size() const { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const std::vector<Point>& nodes() const { return nodes_; }

    [[nodiscard]] Tabulation tabulate(std::span<const Point> ref_points) const;

  private:
    int degree_;
    std::vector<Point> nodes_;
    std::vector<std::pair<int, int>> monomials_;
    Eigen::MatrixXd coeffs_; // column i = monomial coefficients of basis i
};

const LagrangeBasis& lagrange_basis(int degree);

Tabulation tabulate_basis(int degree, std::span<const Point> ref_points);

/// Cached tabulations at the points of quad_rule(Triangle, quad_degree), and
/// at the points of quad_rule(Edge, quad_degree) mapped onto local edge `le`.
const Tabulation& cell_tabulation(int degree, int quad_degree);
const Tabulation& edge_tabulation(int degree, int le, int quad_degree);

/// Affine map of a mesh cell from the reference triangle.
struct CellMap {
    Point origin;
    Eigen::Matrix2d jac;
    Eigen::Matrix2d jac_inv;
    double det = 0.0;

    [[nodiscard]] Point to_physical(const Point& ref) const { return origin + jac * ref; }
    [[nodiscard]] Point to_reference(const Point& x) const { return jac_inv * (x - origin); }
    /// Physical gradient from reference gradient.
    [[nodiscard]] Point grad(double gx, double gy) const { return jac_inv.transpose() * Point(gx, gy); }
    /// Physical Laplacian from reference second derivatives.
    [[nodiscard]] double laplacian(double hxx, double hxy, double hyy) const;
};

CellMap cell_map(const Mesh& m, int c);

/// Reference-triangle coordinates of an edge quadrature point on local edge `le`.
Point edge_to_reference(int le, double t);

// ------------------------------------------------------------------ spaces

enum class EssentialBoundary { None, DirichletTagged, AllBoundary };

/// Continuous scalar Lagrange space with a global dof map.
/// Dof order: vertices, facet-interior nodes (facet order), cell-interior nodes.
class LagrangeSpace {
  public:
    LagrangeSpace(std::shared_ptr<const Mesh> mesh, int degree, EssentialBoundary essential);

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] int degree() const { return basis_->degree(); }
    [[nodiscard]] const LagrangeBasis& basis() const { return *basis_; }
    [[nodiscard]] int num_dofs() const { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] int dofs_per_cell() const { return basis_->size(); }
    [[nodiscard]] std::span<const int> cell_dofs(int c) const {
        return {cell_dofs_.data() + static_cast<std::size_t>(c) * dofs_per_cell(),
                static_cast<std::size_t>(dofs_per_cell())};
    }
    [[nodiscard]] const Point& node(int dof) const { return nodes_[dof]; }
    [[nodiscard]] bool is_essential(int dof) const { return essential_[dof] != 0; }
    [[nodiscard]] int num_essential() const;

  private:
    std::shared_ptr<const Mesh> mesh_;
    const LagrangeBasis* basis_;
    std::vector<int> cell_dofs_;
    std::vector<Point> nodes_;
    std::vector<char> essential_;
};

/// Velocity (vector, degree k+1), pressure (degree k) and potential
/// (degree k+1) spaces. Unknown vector layout: [u_x | u_y | p | psi].
class SpaceTriple {
  public:
    SpaceTriple(std::shared_ptr<const Mesh> mesh, int k);

    [[nodiscard]] int k() const { return k_; }
    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] const LagrangeSpace& velocity() const { return velocity_; }
    [[nodiscard]] const LagrangeSpace& pressure() const { return pressure_; }
    [[nodiscard]] const LagrangeSpace& potential() const { return potential_; }

    [[nodiscard]] int u_offset(int comp) const { return comp * velocity_.num_dofs(); }
    [[nodiscard]] int p_offset() const { return 2 * velocity_.num_dofs(); }
    [[nodiscard]] int psi_offset() const { return p_offset() + pressure_.num_dofs(); }
    [[nodiscard]] int num_dofs() const { return psi_offset() + potential_.num_dofs(); }
    [[nodiscard]] int num_u() const { return 2 * velocity_.num_dofs(); }

    /// Default quadrature degree for assembly: 2(k+1)+2.
    [[nodiscard]] int quad_degree() const { return std::min(kMaxQuadratureDegree, 2 * (k_ + 1) + 2); }

  private:
    std::shared_ptr<const Mesh> mesh_;
    int k_;
    LagrangeSpace velocity_, pressure_, potential_;
};

std::shared_ptr<const SpaceTriple> make_space_triple(std::shared_ptr<const Mesh> mesh, int k = 1);

/// Coefficients (u, p, psi) over a SpaceTriple.
struct SystemState {
    std::shared_ptr<const SpaceTriple> space;
    Eigen::VectorXd x;

    SystemState() = default;
    explicit SystemState(std::shared_ptr<const SpaceTriple> s)
        : space(std::move(s)), x(Eigen::VectorXd::Zero(space->num_dofs())) {}

    [[nodiscard]] auto u(int comp) { return x.segment(space->u_offset(comp), space->velocity().num_dofs()); }
    [[nodiscard]] auto u(int comp) const { return x.segment(space->u_offset(comp), space->velocity().num_dofs()); }
    [[nodiscard]] auto p() { return x.segment(space->p_offset(), space->pressure().num_dofs()); }
    [[nodiscard]] auto p() const { return x.segment(space->p_offset(), space->pressure().num_dofs()); }
    [[nodiscard]] auto psi() { return x.segment(space->psi_offset(), space->potential().num_dofs()); }
    [[nodiscard]] auto psi() const { return x.segment(space->psi_offset(), space->potential().num_dofs()); }
};

// ----------------------------------------------------------- field tools

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;
/// Gradient convention: G(i, j) = d u_i / d x_j, so G * n is the normal derivative.
using TensorField = std::function<Eigen::Matrix2d(const Point&)>;

/// Closed-form solution fields of a manufactured case.
struct ExactFields {
    VectorField u;
    TensorField grad_u;
    VectorField lap_u;
    ScalarField p;
    VectorField grad_p;
    ScalarField psi;
    VectorField grad_psi;
    ScalarField lap_psi;

    [[nodiscard]] bool complete() const { return u && grad_u && lap_u && p && grad_p && psi && grad_psi && lap_psi; }
};

Eigen::VectorXd interpolate(const LagrangeSpace& space, const ScalarField& f);

/// Fills the velocity, pressure and potential blocks by nodal interpolation.
SystemState interpolate(std::shared_ptr<const SpaceTriple> space, const VectorField& u, const ScalarField& p,
                        const ScalarField& psi);

/// Per-cell polynomial coefficients of an L2 projection (discontinuous field).
struct CellwisePolynomial {
    int degree = 0;
    int components = 1;
    Eigen::MatrixXd coeffs; // rows: cell * components + comp, cols: basis index

    /// Value of component `comp` at reference points of cell `c`, given the
    /// tabulation of lagrange_basis(degree) at those points.
    [[nodiscard]] Eigen::VectorXd values(int c, int comp, const Tabulation& tab) const {
        return tab.values * coeffs.row(c * components + comp).transpose();
    }
};

CellwisePolynomial project_elementwise(int degree, const ScalarField& f, const Mesh& m, int quad_degree);
CellwisePolynomial project_elementwise(int degree, const VectorField& f, const Mesh& m, int quad_degree);

struct ErrorNorms {
    double u_grad = 0.0;      ///< ||grad e_u||
    double u_navier = 0.0;    ///< (sum_e h_e^-1 ||e_u . n||_e^2)^(1/2)
    double u_1h = 0.0;        ///< discrete energy norm ||e_u||_{1,h}
    double p_l2 = 0.0;        ///< ||e_p||
    double psi_l2 = 0.0;      ///< ||e_psi||
    double psi_grad = 0.0;    ///< ||grad e_psi||
    double psi_h1 = 0.0;      ///< full H1 norm of e_psi
    double total = 0.0;       ///< root-sum-square: (||e_u||_{1,h}^2 + ||e_p||^2 + ||grad e_psi||^2)^(1/2)
    double total_sum = 0.0;   ///< additive: ||e_u||_{1,h} + ||e_p|| + ||grad e_psi||
};

/// Norms of (exact - state). Throws UsageError if `exact` is incomplete.
ErrorNorms error_norms(const SystemState& state, const ExactFields& exact);

/// Same norms applied to the discrete fields themselves (e.g. the difference
/// of two states on one space).
ErrorNorms discrete_norms(const SystemState& state);

/// Norms of the difference of two states; throws UsageError on space mismatch.
ErrorNorms difference_norms(const SystemState& a, const SystemState& b);

} // namespace spb
