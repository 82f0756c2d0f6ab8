#ifndef DDP_GRID_HPP
#define DDP_GRID_HPP

/// @file grid.hpp
/// @brief Uniform cell-centered Cartesian grid on [-L,L]^dim, scalar fields,
///        midpoint quadrature and the plain/weighted norms used everywhere else.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace ddp {

/// Truncated box [-L,L]^dim with N cells per axis, cell-centered storage.
/// Values are stored row-major with x fastest: idx = i + N*(j + N*k).
class Grid {
public:
    Grid(int dim, double half_width, int cells_per_axis);

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    int cells_per_axis() const { return cells_; }
    double spacing() const { return spacing_; }
    double cell_volume() const { return cell_volume_; }
    std::size_t cell_count() const { return cell_count_; }

    /// Center coordinate of the cell with 1D index q along any axis.
    double coord(int q) const { return -half_width_ + (q + 0.5) * spacing_; }

    std::size_t index(int i, int j, int k = 0) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(cells_) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_) * k);
    }

    /// Cell center as a point (z component is 0 in 2D).
    std::array<double, 3> center(int i, int j, int k = 0) const {
        return {coord(i), coord(j), dim_ == 3 ? coord(k) : 0.0};
    }

    bool operator==(const Grid&) const = default;

private:
    int dim_;
    double half_width_;
    int cells_;
    double spacing_;
    double cell_volume_;
    std::size_t cell_count_;
};

/// One real value per cell of a Grid.
class ScalarField {
public:
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), values_(g.cell_count(), fill) {}

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t idx) { return values_[idx]; }
    double operator[](std::size_t idx) const { return values_[idx]; }

    double& at(int i, int j, int k = 0) { return values_[grid_.index(i, j, k)]; }
    double at(int i, int j, int k = 0) const { return values_[grid_.index(i, j, k)]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// True when every value is finite (no NaN/Inf).
bool all_finite(const ScalarField& f);

/// Throws std::invalid_argument when the two fields live on different grids.
void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what);

/// Midpoint quadrature: sum f * h^dim over cells.
double integrate(const ScalarField& f);

/// Midpoint quadrature with a cellwise weight: sum f * w * h^dim.
double integrate(const ScalarField& f, const ScalarField& weight);

/// (integral |f|^r)^(1/r); max |f| when r is infinity. Requires r >= 1.
double lr_norm(const ScalarField& f, double r);

/// (integral f^2 e^V)^(1/2). Throws when e^V overflows at some cell.
double weighted_l2_norm(const ScalarField& f, const ScalarField& V);

} // namespace ddp

#endif
