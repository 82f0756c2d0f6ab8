#include "ddp/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace ddp {

namespace {

// Exact cell averages of the singular kernels over one unit cell:
// 3D: mean of 1/|x| over [-1/2,1/2]^3 = 3 ln(2+sqrt3) - pi/2
// 2D: mean of -ln|x| over [-1/2,1/2]^2 = 3/2 + (ln 2)/2 - pi/4
const double kCellAvgInvR3 = 3.0 * std::log(2.0 + std::sqrt(3.0)) - std::numbers::pi / 2.0;
const double kCellAvgNegLnR2 = 1.5 + 0.5 * std::log(2.0) - std::numbers::pi / 4.0;

struct FftwRealDeleter {
    void operator()(double* p) const { fftw_free(p); }
};
struct FftwComplexDeleter {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwRealDeleter>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwComplexDeleter>;

RealBuf alloc_real(std::size_t n) {
    return RealBuf(static_cast<double*>(fftw_malloc(n * sizeof(double))));
}
ComplexBuf alloc_complex(std::size_t n) {
    return ComplexBuf(static_cast<fftw_complex*>(fftw_malloc(n * sizeof(fftw_complex))));
}

} // namespace

struct PoissonSolver::Impl {
    Grid grid;
    double eps;
    int padded;              // 2N per axis
    std::size_t real_size;   // padded^dim
    std::size_t cplx_size;   // padded^(dim-1) * (padded/2 + 1)
    ComplexBuf kernel_hat;   // forward transform of the kernel, pre-scaled
    fftw_plan fwd = nullptr; // r2c on prototype buffers, reused via new-array execute
    fftw_plan bwd = nullptr;
    RealBuf proto_real;
    ComplexBuf proto_cplx;

    Impl(const Grid& g, double epsilon) : grid(g), eps(epsilon) {
        padded = 2 * g.cells_per_axis();
        const int m = padded;
        if (g.dim() == 3) {
            real_size = static_cast<std::size_t>(m) * m * m;
            cplx_size = static_cast<std::size_t>(m) * m * (m / 2 + 1);
        } else {
            real_size = static_cast<std::size_t>(m) * m;
            cplx_size = static_cast<std::size_t>(m) * (m / 2 + 1);
        }
        proto_real = alloc_real(real_size);
        proto_cplx = alloc_complex(cplx_size);
        if (g.dim() == 3) {
            fwd = fftw_plan_dft_r2c_3d(m, m, m, proto_real.get(), proto_cplx.get(),
                                       FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_3d(m, m, m, proto_cplx.get(), proto_real.get(),
                                       FFTW_ESTIMATE);
        } else {
            fwd = fftw_plan_dft_r2c_2d(m, m, proto_real.get(), proto_cplx.get(), FFTW_ESTIMATE);
            bwd = fftw_plan_dft_c2r_2d(m, m, proto_cplx.get(), proto_real.get(), FFTW_ESTIMATE);
        }
        build_kernel();
    }

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }

    double kernel_entry(int di, int dj, int dk) const {
        const double h = grid.spacing();
        const double r2 = static_cast<double>(di) * di + static_cast<double>(dj) * dj +
                          static_cast<double>(dk) * dk;
        if (grid.dim() == 3) {
            const double pref = 1.0 / (4.0 * std::numbers::pi * eps * eps);
            if (r2 == 0.0) return pref * kCellAvgInvR3 / h;
            return pref / (h * std::sqrt(r2));
        }
        const double pref = 1.0 / (2.0 * std::numbers::pi * eps * eps);
        if (r2 == 0.0) return pref * (kCellAvgNegLnR2 - std::log(h));
        return pref * (-std::log(h * std::sqrt(r2)));
    }

    // Circular-distance component for a padded index.
    static int wrap(int t, int m) { return t <= m / 2 ? t : m - t; }

    void build_kernel() {
        const int m = padded;
        RealBuf kernel = alloc_real(real_size);
        const double scale = grid.cell_volume() / static_cast<double>(real_size);
        if (grid.dim() == 3) {
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i) {
                        std::size_t idx =
                            static_cast<std::size_t>(i) +
                            static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k);
                        kernel[idx] = kernel_entry(wrap(i, m), wrap(j, m), wrap(k, m));
                    }
        } else {
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i)
                    kernel[static_cast<std::size_t>(i) + static_cast<std::size_t>(m) * j] =
                        kernel_entry(wrap(i, m), wrap(j, m), 0);
        }
        kernel_hat = alloc_complex(cplx_size);
        fftw_execute_dft_r2c(fwd, kernel.get(), kernel_hat.get());
        // Fold the quadrature weight and the FFTW normalization into the kernel.
        for (std::size_t idx = 0; idx < cplx_size; ++idx) {
            kernel_hat[idx][0] *= scale;
            kernel_hat[idx][1] *= scale;
        }
    }

    ScalarField solve(const ScalarField& rho) const {
        const int n = grid.cells_per_axis();
        const int m = padded;
        RealBuf real = alloc_real(real_size);
        ComplexBuf cplx = alloc_complex(cplx_size);
        std::fill(real.get(), real.get() + real_size, 0.0);
        const int nk = grid.dim() == 3 ? n : 1;
        for (int k = 0; k < nk; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    std::size_t dst =
                        static_cast<std::size_t>(i) +
                        static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k);
                    real[dst] = rho.at(i, j, k);
                }
        fftw_execute_dft_r2c(fwd, real.get(), cplx.get());
        for (std::size_t idx = 0; idx < cplx_size; ++idx) {
            const double ar = cplx[idx][0], ai = cplx[idx][1];
            const double br = kernel_hat[idx][0], bi = kernel_hat[idx][1];
            cplx[idx][0] = ar * br - ai * bi;
            cplx[idx][1] = ar * bi + ai * br;
        }
        fftw_execute_dft_c2r(bwd, cplx.get(), real.get());
        ScalarField psi(grid);
        for (int k = 0; k < nk; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    std::size_t src =
                        static_cast<std::size_t>(i) +
                        static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k);
                    psi.at(i, j, k) = real[src];
                }
        return psi;
    }
};

PoissonSolver::PoissonSolver(const Grid& g, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("PoissonSolver: epsilon must be > 0");
    impl_ = std::make_unique<Impl>(g, epsilon);
}

PoissonSolver::~PoissonSolver() = default;

const Grid& PoissonSolver::grid() const { return impl_->grid; }
double PoissonSolver::epsilon() const { return impl_->eps; }

double PoissonSolver::kernel_entry(int di, int dj, int dk) const {
    return impl_->kernel_entry(std::abs(di), std::abs(dj), std::abs(dk));
}

ScalarField PoissonSolver::solve(const ScalarField& rho) const {
    if (!(rho.grid() == impl_->grid))
        throw std::invalid_argument("PoissonSolver::solve: grid mismatch");
    if (!all_finite(rho))
        throw std::invalid_argument("PoissonSolver::solve: non-finite charge field");
    return impl_->solve(rho);
}

ScalarField PoissonSolver::direct_sum(const ScalarField& rho) const {
    if (!(rho.grid() == impl_->grid))
        throw std::invalid_argument("PoissonSolver::direct_sum: grid mismatch");
    const Grid& g = impl_->grid;
    const int n = g.cells_per_axis();
    const int nk = g.dim() == 3 ? n : 1;
    const double vol = g.cell_volume();
    ScalarField psi(g);
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int kk = 0; kk < nk; ++kk)
                    for (int jj = 0; jj < n; ++jj)
                        for (int ii = 0; ii < n; ++ii)
                            acc += impl_->kernel_entry(std::abs(i - ii), std::abs(j - jj),
                                                       std::abs(k - kk)) *
                                   rho.at(ii, jj, kk);
                psi.at(i, j, k) = acc * vol;
            }
    return psi;
}

std::vector<ScalarField> gradient(const ScalarField& psi) {
    const Grid& g = psi.grid();
    const int n = g.cells_per_axis();
    const int nk = g.dim() == 3 ? n : 1;
    const double h = g.spacing();
    std::vector<ScalarField> grad(g.dim(), ScalarField(g));
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int ijk[3] = {i, j, k};
                for (int d = 0; d < g.dim(); ++d) {
                    int lo[3] = {i, j, k}, hi[3] = {i, j, k};
                    double denom;
                    if (ijk[d] == 0) {
                        hi[d] += 1;
                        denom = h;
                    } else if (ijk[d] == n - 1) {
                        lo[d] -= 1;
                        denom = h;
                    } else {
                        lo[d] -= 1;
                        hi[d] += 1;
                        denom = 2.0 * h;
                    }
                    grad[d].at(i, j, k) =
                        (psi.at(hi[0], hi[1], hi[2]) - psi.at(lo[0], lo[1], lo[2])) / denom;
                }
            }
    return grad;
}

ScalarField interior_laplacian(const ScalarField& psi) {
    const Grid& g = psi.grid();
    const int n = g.cells_per_axis();
    const int nk = g.dim() == 3 ? n : 1;
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    ScalarField lap(g, 0.0);
    const int k0 = g.dim() == 3 ? 1 : 0;
    const int k1 = g.dim() == 3 ? nk - 1 : 1;
    for (int k = k0; k < k1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                double acc = -2.0 * g.dim() * psi.at(i, j, k);
                acc += psi.at(i - 1, j, k) + psi.at(i + 1, j, k);
                acc += psi.at(i, j - 1, k) + psi.at(i, j + 1, k);
                if (g.dim() == 3) acc += psi.at(i, j, k - 1) + psi.at(i, j, k + 1);
                lap.at(i, j, k) = acc * inv_h2;
            }
    return lap;
}

} // namespace ddp
