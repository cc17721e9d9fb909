#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spb/assembly.hpp"

namespace spb {

enum class GaugeMode { MeanZero, None };

GaugeMode gauge_from_string(const std::string& s);
std::string to_string(GaugeMode g);

/// Sparse LU factorization (UMFPACK) of a CSR matrix. The symbolic analysis
/// is kept and reused while the sparsity pattern stays the same.
class SparseLU {
  public:
    /// Reciprocal pivot ratio below which the matrix is treated as singular.
    static constexpr double kSingularRcond = 1e-13;

    SparseLU();
    ~SparseLU();
    SparseLU(const SparseLU&) = delete;
    SparseLU& operator=(const SparseLU&) = delete;

    /// Throws SolverError (naming the pivot row/column) on singularity.
    void factorize(const CsrMatrix& a);
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

    [[nodiscard]] double rcond() const { return rcond_; }
    [[nodiscard]] bool symbolic_reused() const { return reused_; }
    [[nodiscard]] int size() const { return n_; }

  private:
    void release_numeric();
    void release_symbolic();

    void* symbolic_ = nullptr;
    void* numeric_ = nullptr;
    int n_ = 0;
    std::vector<int> outer_, inner_;
    std::vector<double> values_;
    double rcond_ = 0.0;
    bool reused_ = false;
};

struct LinearDiagnostics {
    double rcond = 0.0;
    double residual_inf = 0.0;
    int refinement_steps = 0;
};

/// Solves sys.matrix x = sys.rhs with a fresh factorization; verifies
/// ||A x - b||_inf <= 1e-9 (1 + ||b||_inf) after up to three refinement steps.
Eigen::VectorXd solve_linear(const BlockSystem& sys, LinearDiagnostics* diag = nullptr);

/// Same, reusing `lu` (and its symbolic analysis when the pattern matches).
Eigen::VectorXd solve_linear(const BlockSystem& sys, SparseLU& lu, LinearDiagnostics* diag = nullptr);

/// m_j = integral of pressure basis function j, in full-system numbering
/// (zero outside the pressure block).
Eigen::VectorXd pressure_mass_vector(const SpaceTriple& space);

/// MeanZero borders the system with the row/column m and constraint value
/// `target` (m . x = target); None returns the system unchanged.
BlockSystem apply_pressure_gauge(BlockSystem sys, GaugeMode mode, const Eigen::VectorXd& mass, double target = 0.0);

/// Mean of the discrete pressure, |Omega|^-1 int p_h.
double pressure_mean(const SystemState& s);

enum class InitialGuess { Zero, InterpolatedData, Provided };

struct NewtonConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_iter = 25;
    double damping = 1.0;
    double min_damping = 1.0 / 16.0;
    InitialGuess initial_guess = InitialGuess::InterpolatedData;
    std::optional<SystemState> provided;
    GaugeMode gauge = GaugeMode::MeanZero;
    AssemblyOptions assembly;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residuals;   ///< residual inf-norm, one per iterate
    std::vector<double> steps;       ///< accepted damping factor per step
    std::vector<double> rcond;       ///< per linear solve
    std::vector<double> contraction; ///< Picard: ||du_m|| / ||du_{m-1}||
    std::vector<double> increments;  ///< Picard: ||du_m||_{1,h}
    bool converged = false;
    double wall_time = 0.0;
    std::string message;
};

struct SolveResult {
    SystemState state;
    SolveReport report;
};

/// Monolithic damped Newton iteration on the full nonlinear residual.
SolveResult newton_solve(std::shared_ptr<const SpaceTriple> space, const PhysParams& params, const LoadData& loads,
                         const NewtonConfig& cfg = {});

struct PicardConfig {
    double tol = 1e-10;
    int max_outer = 100;
    /// Inner potential solve and shared settings (gauge, initial guess).
    NewtonConfig inner;
};

/// Fixed-point splitting: linear Stokes-Nitsche solve with frozen potential,
/// then a nonlinear potential solve with frozen velocity; stops once the
/// velocity increment is below `tol` in the discrete energy norm.
SolveResult picard_solve(std::shared_ptr<const SpaceTriple> space, const PhysParams& params, const LoadData& loads,
                         const PicardConfig& cfg = {});

} // namespace spb
