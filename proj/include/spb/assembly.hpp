#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "spb/fespace.hpp"

namespace spb {

/// Charge density K(s) = k0 sinh(k1 s).
class ChargeLaw {
  public:
    /// Largest |k1 s| accepted before sinh/cosh overflow territory.
    static constexpr double kMaxArgument = 700.0;

    ChargeLaw(double k0, double k1) : k0_(k0), k1_(k1) {}

    [[nodiscard]] double value(double s) const;
    [[nodiscard]] double derivative(double s) const;

  private:
    void guard(double s) const;
    double k0_, k1_;
};

/// Length h in the Nitsche penalty gamma/h on a Navier facet.
enum class PenaltyLength { CellDiameter, FacetLength };

struct PhysParams {
    double mu = 1.0;
    double eps = 1.0;
    double beta = 1.0;
    double gamma = 10.0;
    double k0 = 1.0;
    double k1 = 1.0;
    VectorField efield = [](const Point&) { return Eigen::Vector2d(0.0, 0.0); };
    /// Below this the Nitsche penalty may lose coercivity; only a warning.
    double gamma_floor = 1.0;
    PenaltyLength penalty_length = PenaltyLength::CellDiameter;

    [[nodiscard]] double penalty(double h_e, double h_K) const {
        return gamma / (penalty_length == PenaltyLength::CellDiameter ? h_K : h_e);
    }

    [[nodiscard]] ChargeLaw charge() const { return {k0, k1}; }
    /// Throws UsageError on non-positive parameters; returns warnings.
    [[nodiscard]] std::vector<std::string> validate() const;
};

/// Boundary datum evaluated at a point with the outward unit normal there.
using BoundaryField = std::function<double(const Point&, const Eigen::Vector2d& normal)>;

/// Body force, potential source and boundary data. g_n prescribes u.n and
/// g_tau the tangential traction mu (du/dn).tau + beta u.tau on Navier facets,
/// with tau the normal rotated by +90 degrees.
struct LoadData {
    VectorField f;
    ScalarField g;
    BoundaryField g_n;
    BoundaryField g_tau;
    VectorField u_dirichlet;
    ScalarField psi_dirichlet;

    static LoadData zero();
    [[nodiscard]] bool complete() const { return f && g && g_n && g_tau && u_dirichlet && psi_dirichlet; }
};

using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Linearized system over the concatenated (u, p, psi) unknowns, optionally
/// bordered by one pressure-mean constraint row/column.
struct BlockSystem {
    CsrMatrix matrix;
    Eigen::VectorXd rhs;
    /// Start of the u, p, psi blocks and the end of the psi block.
    std::array<int, 4> offsets{0, 0, 0, 0};
    /// Rows replaced by identity for strongly imposed Dirichlet data.
    std::vector<char> essential;
    bool bordered = false;

    [[nodiscard]] int size() const { return static_cast<int>(matrix.rows()); }
};

struct AssemblyOptions {
    /// Drop c1, c2 and the charge terms (leaves the Stokes-Nitsche + Poisson part).
    bool include_coupling = true;
    /// Override of the quadrature degree; <= 0 means SpaceTriple::quad_degree().
    int quad_degree = 0;
};

/// Residual of the discrete nonlinear problem tested against every global
/// basis function. Dirichlet entries hold (state - interpolated data).
Eigen::VectorXd assemble_residual(const SystemState& state, const PhysParams& params, const LoadData& loads,
                                  const AssemblyOptions& opts = {});

/// Exact Jacobian of assemble_residual; rhs = -residual. Dirichlet rows are
/// identity rows, columns are left intact (see eliminate_dirichlet_columns).
BlockSystem assemble_jacobian(const SystemState& state, const PhysParams& params, const LoadData& loads,
                              const AssemblyOptions& opts = {});

/// Moves the known Dirichlet increments to the right-hand side and zeroes the
/// matching columns, keeping the matrix symmetric where it was.
void eliminate_dirichlet_columns(BlockSystem& sys);

/// Consistent data terms for non-homogeneous Navier data:
/// -int mu n.grad(v)n g_n + int q g_n + gamma/h_e int g_n v.n + int g_tau v.tau.
Eigen::VectorXd assemble_nitsche_rhs(const SpaceTriple& space, const PhysParams& params, const LoadData& loads);

enum class FormId { a, a_tau, a_gamma, a_c, b, b_bnd, c1, c2, d, k_momentum, k_potential, F, G };

FormId form_from_string(const std::string& name);
std::string to_string(FormId id);
[[nodiscard]] bool is_matrix_form(FormId id);

/// Global matrix of a bilinear form, rows = test dofs, columns = trial dofs,
/// both in the full (u, p, psi) numbering:
///   a, a_tau, a_gamma, a_c: (u, v);  b, b_bnd: rows q, columns u;
///   c1: (psi, v) with advecting velocity from `frozen`; c2: (psi, phi) likewise;
///   d: (psi, phi).
CsrMatrix assemble_form_matrix(FormId id, const SpaceTriple& space, const PhysParams& params,
                               const SystemState* frozen = nullptr, int quad_degree = 0);

/// Global vector of a linear form: k_momentum/k_potential use psi of `state`,
/// F/G use the loads.
Eigen::VectorXd assemble_form_vector(FormId id, const SpaceTriple& space, const PhysParams& params,
                                     const LoadData* loads, const SystemState* state, int quad_degree = 0);

/// Quadrature value of a named form. `convect` supplies w in c1/c2 and
/// defaults to `trial`.
double eval_form(FormId id, const SystemState& trial, const SystemState& test, const PhysParams& params,
                 const LoadData* loads = nullptr, const SystemState* convect = nullptr);

/// "row col value" per line with 17 significant digits.
void write_coordinate(std::ostream& os, const CsrMatrix& a);

} // namespace spb
