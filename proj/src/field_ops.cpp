#include "chsep/field_ops.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

namespace chsep {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

double kahan_sum(const std::vector<double>& xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

std::string format_double(double v, int precision) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

} // namespace

struct SpectralOps::Impl {
    int nx, ny, nyh;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    Impl(int nx_, int ny_) : nx(nx_), ny(ny_), nyh(ny_ / 2 + 1) {
        rbuf = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
        cbuf = fftw_alloc_complex(static_cast<std::size_t>(nx) * nyh);
        std::lock_guard<std::mutex> lock(plan_mutex());
        // FFTW_ESTIMATE keeps plan selection deterministic run to run.
        fwd = fftw_plan_dft_r2c_2d(nx, ny, rbuf, cbuf, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_2d(nx, ny, cbuf, rbuf, FFTW_ESTIMATE);
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(plan_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }
};

SpectralOps::SpectralOps(const Grid& grid) : grid_(grid) {
    if (grid.nx < 2 || grid.ny < 2 || grid.lx <= 0.0 || grid.ly <= 0.0)
        throw DomainError("grid must have nx,ny >= 2 and positive extents");
    impl_ = std::make_unique<Impl>(grid.nx, grid.ny);
    const int nyh = grid.ny / 2 + 1;
    k2_.resize(static_cast<std::size_t>(grid.nx) * nyh);
    const double fx = 2.0 * std::numbers::pi / grid.lx;
    const double fy = 2.0 * std::numbers::pi / grid.ly;
    for (int i = 0; i < grid.nx; ++i) {
        const int wi = (i <= grid.nx / 2) ? i : i - grid.nx;
        const double kx = fx * wi;
        for (int j = 0; j < nyh; ++j) {
            const double ky = fy * j;
            k2_[static_cast<std::size_t>(i) * nyh + j] = kx * kx + ky * ky;
        }
    }
}

SpectralOps::~SpectralOps() = default;

std::size_t SpectralOps::spectrum_size() const {
    return static_cast<std::size_t>(grid_.nx) * (grid_.ny / 2 + 1);
}

double SpectralOps::column_weight(int j) const {
    const bool self_conjugate = (j == 0) || (grid_.ny % 2 == 0 && j == grid_.ny / 2);
    return self_conjugate ? 1.0 : 2.0;
}

void SpectralOps::forward(const ScalarField& v, Spectrum& out) {
    if (!(v.grid == grid_)) throw GridMismatch("field grid does not match transform grid");
    std::memcpy(impl_->rbuf, v.values.data(), v.values.size() * sizeof(double));
    fftw_execute(impl_->fwd);
    out.resize(spectrum_size());
    // std::complex<double> is layout-compatible with fftw_complex
    std::memcpy(reinterpret_cast<double*>(out.data()), impl_->cbuf,
                out.size() * sizeof(fftw_complex));
}

void SpectralOps::backward(const Spectrum& in, ScalarField& out) {
    if (in.size() != spectrum_size()) throw GridMismatch("spectrum size does not match grid");
    std::memcpy(impl_->cbuf, reinterpret_cast<const double*>(in.data()),
                in.size() * sizeof(fftw_complex));
    fftw_execute(impl_->bwd); // destroys cbuf, which is a scratch copy
    out.grid = grid_;
    out.values.resize(grid_.size());
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = impl_->rbuf[i] * scale;
}

ScalarField SpectralOps::laplacian(const ScalarField& v) {
    Spectrum s;
    forward(v, s);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= -k2_[i];
    ScalarField out;
    backward(s, out);
    return out;
}

ScalarField SpectralOps::inv_laplacian_zero_mean(const ScalarField& v) {
    const double m = mean(v);
    if (std::abs(m) > 1e-10 * std::max(max_abs(v), 1e-300))
        throw MeanNotZero("inverse Laplacian requires a zero-mean field");
    Spectrum s;
    forward(v, s);
    s[0] = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
        s[i] = (k2_[i] > 0.0) ? s[i] / k2_[i] : std::complex<double>(0.0);
    ScalarField out;
    backward(s, out);
    return out;
}

double SpectralOps::l2_norm(const ScalarField& v) const {
    if (!(v.grid == grid_)) throw GridMismatch("field grid does not match transform grid");
    double sum = 0.0, comp = 0.0;
    for (double x : v.values) {
        const double term = x * x - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return std::sqrt(sum * grid_.cell_area());
}

namespace {
// sum_k weight * f(k) over the half spectrum.
template <typename F>
double spectral_sum(const SpectralOps& ops, const Spectrum& s, int nx, int nyh, F&& f) {
    double sum = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nyh; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * nyh + j;
            sum += ops.column_weight(j) * f(idx, std::norm(s[idx]));
        }
    }
    return sum;
}
} // namespace

double SpectralOps::spectral_l2_norm(const ScalarField& v) {
    Spectrum s;
    forward(v, s);
    const int nyh = grid_.ny / 2 + 1;
    const double sum = spectral_sum(*this, s, grid_.nx, nyh,
                                    [](std::size_t, double p) { return p; });
    const double n2 = static_cast<double>(grid_.size()) * static_cast<double>(grid_.size());
    return std::sqrt(sum * grid_.area() / n2);
}

double SpectralOps::grad_l2_norm(const ScalarField& v) {
    Spectrum s;
    forward(v, s);
    const int nyh = grid_.ny / 2 + 1;
    const double sum = spectral_sum(*this, s, grid_.nx, nyh,
                                    [&](std::size_t idx, double p) { return k2_[idx] * p; });
    const double n2 = static_cast<double>(grid_.size()) * static_cast<double>(grid_.size());
    return std::sqrt(sum * grid_.area() / n2);
}

double SpectralOps::h1_norm(const ScalarField& v) {
    const double a = l2_norm(v);
    const double b = grad_l2_norm(v);
    return std::sqrt(a * a + b * b);
}

double SpectralOps::star_norm(const ScalarField& v) {
    const double m = mean(v);
    if (std::abs(m) > 1e-10 * std::max(max_abs(v), 1e-300))
        throw MeanNotZero("star norm requires a zero-mean field");
    Spectrum s;
    forward(v, s);
    const int nyh = grid_.ny / 2 + 1;
    const double sum = spectral_sum(*this, s, grid_.nx, nyh, [&](std::size_t idx, double p) {
        return (k2_[idx] > 0.0) ? p / k2_[idx] : 0.0;
    });
    const double n2 = static_cast<double>(grid_.size()) * static_cast<double>(grid_.size());
    return std::sqrt(sum * grid_.area() / n2);
}

double SpectralOps::hminus1_norm(const ScalarField& v) {
    const double m = mean(v);
    Spectrum s;
    forward(v, s);
    const int nyh = grid_.ny / 2 + 1;
    // Skipping k=0 is exactly the star norm of v - mean.
    const double sum = spectral_sum(*this, s, grid_.nx, nyh, [&](std::size_t idx, double p) {
        return (k2_[idx] > 0.0) ? p / k2_[idx] : 0.0;
    });
    const double n2 = static_cast<double>(grid_.size()) * static_cast<double>(grid_.size());
    return std::sqrt(sum * grid_.area() / n2) + std::abs(m);
}

ScalarField SpectralOps::convolve(const KernelSpec& kernel, const ScalarField& v) {
    if (!(kernel.grid == grid_) || !(v.grid == grid_))
        throw GridMismatch("kernel and field must share the transform grid");
    Spectrum s;
    forward(v, s);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= kernel.khat[i];
    ScalarField out;
    backward(s, out);
    return out;
}

KernelSpec make_kernel(const Grid& grid, ScalarField samples) {
    if (!(samples.grid == grid)) throw GridMismatch("kernel samples on wrong grid");
    // evenness K(x) = K(-x), on the grid: K[i][j] == K[(nx-i)%nx][(ny-j)%ny]
    const double tol = 1e-12 * std::max(1.0, max_abs(samples));
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            const int im = (grid.nx - i) % grid.nx;
            const int jm = (grid.ny - j) % grid.ny;
            if (std::abs(samples.at(i, j) - samples.at(im, jm)) > tol)
                throw CoercivityViolated("kernel samples are not even under x -> -x");
        }
    }

    KernelSpec spec;
    spec.grid = grid;
    const double cell = grid.cell_area();
    spec.a_const = kahan_sum(samples.values) * cell;
    spec.a_star = spec.a_const; // K*1 is exactly constant on the torus
    if (spec.a_star < 0.0) throw CoercivityViolated("kernel has negative total mass (a_* < 0)");
    double abs_sum = 0.0;
    for (double x : samples.values) abs_sum += std::abs(x);
    spec.a_upper = abs_sum * cell;

    SpectralOps ops(grid);
    Spectrum s;
    ops.forward(samples, s);
    spec.khat.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) spec.khat[i] = s[i] * cell;

    // int |grad K| by spectral differentiation; Nyquist rows/columns are
    // zeroed in the odd-derivative multipliers.
    const int nyh = grid.ny / 2 + 1;
    const double fx = 2.0 * std::numbers::pi / grid.lx;
    const double fy = 2.0 * std::numbers::pi / grid.ly;
    Spectrum sx(s.size()), sy(s.size());
    for (int i = 0; i < grid.nx; ++i) {
        int wi = (i <= grid.nx / 2) ? i : i - grid.nx;
        if (grid.nx % 2 == 0 && i == grid.nx / 2) wi = 0;
        for (int j = 0; j < nyh; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * nyh + j;
            const double ky = (grid.ny % 2 == 0 && j == grid.ny / 2) ? 0.0 : fy * j;
            sx[idx] = std::complex<double>(0.0, fx * wi) * s[idx];
            sy[idx] = std::complex<double>(0.0, ky) * s[idx];
        }
    }
    ScalarField gx, gy;
    ops.backward(sx, gx);
    ops.backward(sy, gy);
    double grad_abs = 0.0;
    for (std::size_t i = 0; i < gx.values.size(); ++i)
        grad_abs += std::hypot(gx.values[i], gy.values[i]);
    spec.b_upper = grad_abs * cell;

    spec.k_values = std::move(samples);
    return spec;
}

KernelSpec make_gaussian_kernel(const Grid& grid, double amplitude, double sigma) {
    if (sigma <= 0.0) throw DomainError("sigma must be positive");
    if (sigma < 2.0 * std::max(grid.dx(), grid.dy()))
        throw ResolutionError("sigma under-resolved: need sigma >= 2*cell size");
    ScalarField samples(grid);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int i = 0; i < grid.nx; ++i) {
        // wrapped coordinate keeps the image sum exactly even on the grid
        double x = i * grid.dx();
        if (x > grid.lx / 2.0) x -= grid.lx;
        for (int j = 0; j < grid.ny; ++j) {
            double y = j * grid.dy();
            if (y > grid.ly / 2.0) y -= grid.ly;
            double v = 0.0;
            for (int mi = -1; mi <= 1; ++mi) {
                for (int mj = -1; mj <= 1; ++mj) {
                    const double px = x + mi * grid.lx;
                    const double py = y + mj * grid.ly;
                    v += std::exp(-(px * px + py * py) * inv2s2);
                }
            }
            samples.at(i, j) = amplitude * v;
        }
    }
    return make_kernel(grid, std::move(samples));
}

KernelSpec make_gaussian_kernel_with_mass(const Grid& grid, double mass, double sigma) {
    KernelSpec unit = make_gaussian_kernel(grid, 1.0, sigma);
    if (unit.a_const <= 0.0) throw DomainError("degenerate Gaussian quadrature mass");
    return make_gaussian_kernel(grid, mass / unit.a_const, sigma);
}

void write_snapshot(const std::string& path, const ScalarField& v, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open snapshot file for writing: " + path);
    out << v.grid.nx << ' ' << v.grid.ny << ' ' << format_double(v.grid.lx, 17) << ' '
        << format_double(v.grid.ly, 17) << ' ' << format_double(t, 17) << '\n';
    for (int i = 0; i < v.grid.nx; ++i) {
        for (int j = 0; j < v.grid.ny; ++j) {
            if (j) out << ' ';
            out << format_double(v.at(i, j), 17);
        }
        out << '\n';
    }
    if (!out.good()) throw Error("snapshot write failed: " + path);
}

std::pair<ScalarField, double> read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open snapshot file: " + path);
    Grid g;
    double t = 0.0;
    if (!(in >> g.nx >> g.ny >> g.lx >> g.ly >> t))
        throw Error("malformed snapshot header: " + path);
    if (g.nx <= 0 || g.ny <= 0) throw Error("bad snapshot grid size: " + path);
    ScalarField v(g);
    for (double& x : v.values)
        if (!(in >> x)) throw Error("truncated snapshot values: " + path);
    return {std::move(v), t};
}

} // namespace chsep
