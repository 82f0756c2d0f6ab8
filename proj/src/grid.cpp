#include "ddp/grid.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ddp {

Grid::Grid(int dim, double half_width, int cells_per_axis)
    : dim_(dim), half_width_(half_width), cells_(cells_per_axis) {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("Grid: dim must be 2 or 3");
    if (!(half_width > 0.0))
        throw std::invalid_argument("Grid: half_width must be > 0");
    if (cells_per_axis < 4 || cells_per_axis % 2 != 0)
        throw std::invalid_argument("Grid: cells_per_axis must be even and >= 4");
    spacing_ = 2.0 * half_width_ / cells_;
    cell_volume_ = std::pow(spacing_, dim_);
    cell_count_ = 1;
    for (int d = 0; d < dim_; ++d) cell_count_ *= static_cast<std::size_t>(cells_);
}

bool all_finite(const ScalarField& f) {
    for (double v : f.values())
        if (!std::isfinite(v)) return false;
    return true;
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        std::ostringstream msg;
        msg << what << ": fields live on different grids";
        throw std::invalid_argument(msg.str());
    }
}

namespace {

// Neumaier compensated sum: keeps quadrature roundoff well below the
// conservation tolerances without changing the deterministic cell order.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace

double integrate(const ScalarField& f) {
    CompensatedSum s;
    for (double v : f.values()) s.add(v);
    return s.value() * f.grid().cell_volume();
}

double integrate(const ScalarField& f, const ScalarField& weight) {
    require_same_grid(f, weight, "integrate");
    CompensatedSum s;
    const auto fv = f.values();
    const auto wv = weight.values();
    for (std::size_t idx = 0; idx < fv.size(); ++idx) s.add(fv[idx] * wv[idx]);
    return s.value() * f.grid().cell_volume();
}

double lr_norm(const ScalarField& f, double r) {
    if (!(r >= 1.0))
        throw std::invalid_argument("lr_norm: exponent r must satisfy r >= 1");
    if (std::isinf(r)) {
        double m = 0.0;
        for (double v : f.values()) m = std::max(m, std::abs(v));
        return m;
    }
    CompensatedSum s;
    for (double v : f.values()) s.add(std::pow(std::abs(v), r));
    return std::pow(s.value() * f.grid().cell_volume(), 1.0 / r);
}

double weighted_l2_norm(const ScalarField& f, const ScalarField& V) {
    require_same_grid(f, V, "weighted_l2_norm");
    CompensatedSum s;
    const auto fv = f.values();
    const auto vv = V.values();
    for (std::size_t idx = 0; idx < fv.size(); ++idx) {
        double w = std::exp(vv[idx]);
        if (!std::isfinite(w)) {
            std::ostringstream msg;
            msg << "weighted_l2_norm: e^V overflows at cell " << idx
                << " (V = " << vv[idx] << "); potential grows too fast for this box";
            throw std::runtime_error(msg.str());
        }
        s.add(fv[idx] * fv[idx] * w);
    }
    return std::sqrt(s.value() * f.grid().cell_volume());
}

} // namespace ddp
