#ifndef DDP_POISSON_HPP
#define DDP_POISSON_HPP

/// @file poisson.hpp
/// @brief Free-space solver for -eps^2 Lap(psi) = rho on the truncated box:
///        the discrete Newtonian potential evaluated as a zero-padded (open
///        boundary) kernel convolution, with an O(cells^2) direct-sum oracle
///        and a finite-difference gradient.

#include "ddp/grid.hpp"

#include <memory>
#include <vector>

namespace ddp {

/// Computes psi = G * rho with the Newtonian kernel G = 1/(4 pi eps^2 |x|)
/// in 3D (log kernel in 2D, experimental). The convolution is done on a
/// 2N-per-axis zero-padded grid so boundaries are open, not periodic.
/// The kernel value at the singular cell is the exact cell average of G.
class PoissonSolver {
public:
    PoissonSolver(const Grid& g, double epsilon);
    ~PoissonSolver();

    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    const Grid& grid() const;
    double epsilon() const;

    /// FFT-accelerated discrete Newtonian potential of rho.
    ScalarField solve(const ScalarField& rho) const;

    /// Reference oracle: the same discrete sum evaluated directly,
    /// psi_i = sum_j G(x_i - x_j) rho_j h^dim. Intended for small grids.
    ScalarField direct_sum(const ScalarField& rho) const;

    /// Kernel entry for an integer cell displacement (shared by both paths).
    double kernel_entry(int di, int dj, int dk) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Componentwise finite-difference gradient: central differences on interior
/// cells, one-sided at the box faces. Returns dim fields.
std::vector<ScalarField> gradient(const ScalarField& psi);

/// Discrete 7-point (5-point in 2D) Laplacian on interior cells; boundary
/// cells of the output are set to 0. Used by residual diagnostics.
ScalarField interior_laplacian(const ScalarField& psi);

} // namespace ddp

#endif
