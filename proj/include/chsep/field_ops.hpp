#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "chsep/grid.hpp"

namespace chsep {

using Spectrum = std::vector<std::complex<double>>;

/// Discretized periodic convolution kernel with the derived constants
/// used by the nonlocal model: a = K*1 (exactly constant on the torus),
/// a_star = inf a, a_upper = int |K|, b_upper = int |grad K|.
struct KernelSpec {
    Grid grid;
    ScalarField k_values;
    double a_const = 0.0; ///< value of K*1 (torus: a(x) is this constant)
    double a_star = 0.0;
    double a_upper = 0.0;
    double b_upper = 0.0;
    Spectrum khat; ///< cell-area-scaled DFT of K, ready for convolution
};

/// FFT-backed operator toolbox for one grid: Laplacian, its inverse on
/// zero-mean fields, the dual norms, and periodic convolution.
///
/// All norms carry continuum normalization (cell-area weights), so values
/// are comparable across resolutions. One instance owns its transform
/// buffers: share across calls within a thread, not across threads.
class SpectralOps {
  public:
    explicit SpectralOps(const Grid& grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    const Grid& grid() const { return grid_; }
    std::size_t spectrum_size() const;

    /// Unnormalized forward r2c transform (half spectrum, ny/2+1 columns).
    void forward(const ScalarField& v, Spectrum& out);
    /// Inverse transform including the 1/(nx*ny) factor.
    void backward(const Spectrum& in, ScalarField& out);

    /// |k|^2 for the half-spectrum entry i*(ny/2+1)+j, wrapped frequencies.
    const std::vector<double>& k_squared() const { return k2_; }
    /// Hermitian multiplicity of column j (1 on the self-conjugate columns, else 2).
    double column_weight(int j) const;

    ScalarField laplacian(const ScalarField& v);
    /// Inverse of -Laplacian on zero-mean fields (the operator N). The zero
    /// mode maps to zero; input mean must vanish to 1e-10 * sup|v|.
    ScalarField inv_laplacian_zero_mean(const ScalarField& v);

    double l2_norm(const ScalarField& v) const;  ///< physical-space quadrature
    double spectral_l2_norm(const ScalarField& v); ///< same norm via Parseval
    double grad_l2_norm(const ScalarField& v);
    double h1_norm(const ScalarField& v); ///< (l2^2 + grad^2)^(1/2), the V norm

    /// ||v||_* = ||grad N v|| on zero-mean fields.
    double star_norm(const ScalarField& v);
    /// ||v||_{-1} = ||v - mean||_* + |mean|; accepts any field.
    double hminus1_norm(const ScalarField& v);

    /// Periodic convolution (K*v)(x) = int K(x-y) v(y) dy.
    ScalarField convolve(const KernelSpec& kernel, const ScalarField& v);

  private:
    struct Impl;
    Grid grid_;
    std::vector<double> k2_;
    std::unique_ptr<Impl> impl_;
};

/// Periodized Gaussian amplitude*exp(-|x|^2/(2 sigma^2)), summed over the
/// 3x3 nearest periodic images (residual error O(exp(-L^2/8 sigma^2))).
/// Requires sigma >= 2*max(dx,dy).
KernelSpec make_gaussian_kernel(const Grid& grid, double amplitude, double sigma);

/// Same, with the amplitude chosen so the quadrature of K equals `mass`.
KernelSpec make_gaussian_kernel_with_mass(const Grid& grid, double mass, double sigma);

/// Kernel from explicit samples; validates K(x)=K(-x) up to grid symmetry
/// and computes the derived constants.
KernelSpec make_kernel(const Grid& grid, ScalarField samples);

/// Field snapshot text format shared with the CLI: first line
/// "nx ny Lx Ly t", then nx*ny values row-major, 17 significant digits.
void write_snapshot(const std::string& path, const ScalarField& v, double t);
std::pair<ScalarField, double> read_snapshot(const std::string& path);

} // namespace chsep
