#pragma once

#include <iosfwd>
#include <set>
#include <vector>

#include "spb/assembly.hpp"

namespace spb {

/// Squared local contributions of one cell. psi_K^2 = psi_R_sq + psi_e_sq + psi_J_sq.
struct ElementIndicator {
    double psi_R_sq = 0.0; ///< h_K^2 ||R_K||^2 + ||R_1K||^2 + h_K^2 ||R_2K||^2
    double psi_e_sq = 0.0; ///< sum over interior facets of K of h_e (||R_e||^2 + ||R_1e||^2)
    double psi_J_sq = 0.0; ///< sum over Navier facets of K of h_e ||R1_J||^2 + h_e^-1 ||R2_J||^2
    double psi_K = 0.0;
    double osc_sq = 0.0;   ///< h_K^2 (||f - f_h||^2 + ||g - g_h||^2)
};

struct EstimatorReport {
    std::vector<ElementIndicator> cells;
    double psi = 0.0;   ///< (sum psi_K^2)^(1/2)
    double theta = 0.0; ///< (sum osc_sq)^(1/2)
    double psi_R = 0.0, psi_e = 0.0, psi_J = 0.0;
    /// psi / root-sum-square error when an exact solution is supplied, NaN otherwise.
    double effectivity = 0.0;
    double error_total = 0.0;
};

/// Length scale h_K weighting the element residuals.
/// AreaBased is sqrt(2|K|), equal to the leg length on the structured right-triangle meshes.
enum class CellSize { Diameter, AreaBased };

struct EstimatorOptions {
    CellSize cell_size = CellSize::AreaBased;
    /// Evaluate interior jumps from the K+ side (K+ normal, K+ orientation).
    bool swap_facet_convention = false;
    /// <= 0 selects SpaceTriple::quad_degree() + 2.
    int quad_degree = 0;
};

/// Elementwise L2 projections of the body force and potential source onto
/// discontinuous P_{k+1}.
struct DataProjection {
    CellwisePolynomial f;
    CellwisePolynomial g;
};

DataProjection project_data(const SpaceTriple& space, const LoadData& loads, int quad_degree = 0);

/// Residual values at the quadrature points of one cell.
struct ElementResiduals {
    std::vector<Point> points;
    std::vector<double> weights; ///< physical weights
    std::vector<Eigen::Vector2d> r_momentum;
    std::vector<double> r_div;
    std::vector<double> r_potential;
};

ElementResiduals element_residuals(const SystemState& state, const PhysParams& params, const LoadData& loads,
                                   const DataProjection& proj, int cell, int quad_degree = 0);

/// Half-jumps on one facet, at edge quadrature points; exact zeros on
/// boundary facets. Jump = (K- trace) - (K+ trace) with the K- normal, or the
/// mirrored convention when `swap` is set.
struct FacetResiduals {
    std::vector<double> weights;
    std::vector<Eigen::Vector2d> r_stress;
    std::vector<double> r_flux;
};

FacetResiduals facet_residuals(const SystemState& state, const PhysParams& params, int facet, bool swap = false,
                               int quad_degree = 0);

/// Navier-boundary residuals R1_J (tangential traction minus g_tau) and
/// R2_J (u.n minus g_n). UsageError if the facet is not tagged Navier.
struct BoundaryResiduals {
    std::vector<double> weights;
    std::vector<double> r_tangential;
    std::vector<double> r_normal;
};

BoundaryResiduals boundary_residuals(const SystemState& state, const PhysParams& params, const LoadData& loads,
                                     int facet, int quad_degree = 0);

EstimatorReport compute_indicators(const SystemState& state, const PhysParams& params, const LoadData& loads,
                                   const ExactFields* exact = nullptr, const EstimatorOptions& opts = {});

/// Cells with psi_K >= theta * max psi_K. UsageError unless 0 < theta < 1.
std::set<int> mark_max_strategy(const EstimatorReport& report, double theta);

/// CSV: cell_id,psi_R,psi_e,psi_J,psi_K,osc (square roots of the squared parts).
void write_indicator_csv(std::ostream& os, const EstimatorReport& report);

} // namespace spb
