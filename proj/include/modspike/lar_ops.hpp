#ifndef MODSPIKE_LAR_OPS_HPP
#define MODSPIKE_LAR_OPS_HPP

#include <modspike/core_types.hpp>

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

namespace modspike {

/// Forward differences of a raster. The last column of gx and the last row of gy are zero.
struct GradientField
{
    Raster gx;
    Raster gy;
};

/// gx(i,j) = img(i,j+1) - img(i,j); gy(i,j) = img(i+1,j) - img(i,j).
inline GradientField gradient(const Raster& img)
{
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    GradientField g{Raster(h, w), Raster(h, w)};
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j + 1 < w; ++j)
            g.gx(i, j) = img(i, j + 1) - img(i, j);
    }
    for (std::size_t i = 0; i + 1 < h; ++i) {
        for (std::size_t j = 0; j < w; ++j)
            g.gy(i, j) = img(i + 1, j) - img(i, j);
    }
    return g;
}

/// Backward-difference divergence, the negative adjoint of gradient(). The padded last
/// column/row of the field is ignored, so divergence(gradient(x)) is the Neumann 5-point
/// Laplacian of x.
inline Raster divergence(const GradientField& field)
{
    require(field.gx.same_shape(field.gy), "divergence: gx and gy differ in shape");
    const std::size_t h = field.gx.height();
    const std::size_t w = field.gx.width();
    Raster out(h, w);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            double v = 0.0;
            if (j + 1 < w)
                v += field.gx(i, j);
            if (j > 0)
                v -= field.gx(i, j - 1);
            if (i + 1 < h)
                v += field.gy(i, j);
            if (i > 0)
                v -= field.gy(i - 1, j);
            out(i, j) = v;
        }
    }
    return out;
}

inline Raster laplacian(const Raster& img) { return divergence(gradient(img)); }

/// Least absolute remainder: representative of o modulo m in [-m/2, m/2).
inline double lar(double o, double m)
{
    const double half = 0.5 * m;
    double r = std::fmod(o + half, m);
    if (r < 0.0)
        r += m;
    // fmod of a tiny negative value can round up to exactly m
    if (r >= m)
        r -= m;
    return r - half;
}

inline Raster lar(const Raster& o, double m)
{
    Raster out(o.height(), o.width());
    for (std::size_t p = 0; p < o.size(); ++p)
        out[p] = lar(o[p], m);
    return out;
}

inline GradientField lar(const GradientField& g, double m) { return {lar(g.gx, m), lar(g.gy, m)}; }

namespace detail {

// The FFTW planner is not reentrant; execution on a plan's own buffers is.
inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwBufferDeleter
{
    void operator()(double* p) const noexcept { fftw_free(p); }
};

class CosinePlan
{
public:
    CosinePlan(std::size_t h, std::size_t w, double* buffer, fftw_r2r_kind kind)
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_r2r_2d(static_cast<int>(h), static_cast<int>(w), buffer, buffer, kind, kind,
                                 FFTW_ESTIMATE);
        require(plan_ != nullptr, "poisson_solve: FFTW planning failed");
    }
    CosinePlan(const CosinePlan&) = delete;
    CosinePlan& operator=(const CosinePlan&) = delete;
    ~CosinePlan()
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }

    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

} // namespace detail

/// Least-squares solution of laplacian(x) = rhs under Neumann boundaries, gauge mean(x) = 0.
///
/// The 5-point Neumann Laplacian is diagonal in the type-II cosine basis with eigenvalues
/// 2cos(pi u/H) + 2cos(pi v/W) - 4. The rhs mean (the component outside the operator's range)
/// is discarded, and the zero mode of the solution is set to zero.
inline Raster poisson_solve(const Raster& rhs)
{
    const std::size_t h = rhs.height();
    const std::size_t w = rhs.width();
    if (h * w <= 1)
        return Raster(h, w);
    for (double v : rhs.values())
        require(std::isfinite(v), "poisson_solve: rhs must be finite");

    std::unique_ptr<double[], detail::FftwBufferDeleter> buf(fftw_alloc_real(h * w));
    require(buf != nullptr, "poisson_solve: allocation failed");
    std::copy(rhs.values().begin(), rhs.values().end(), buf.get());

    {
        detail::CosinePlan forward(h, w, buf.get(), FFTW_REDFT10);
        forward.execute();
    }

    std::vector<double> row_eig(h);
    std::vector<double> col_eig(w);
    for (std::size_t u = 0; u < h; ++u)
        row_eig[u] = 2.0 * std::cos(std::numbers::pi * static_cast<double>(u) / static_cast<double>(h)) - 2.0;
    for (std::size_t v = 0; v < w; ++v)
        col_eig[v] = 2.0 * std::cos(std::numbers::pi * static_cast<double>(v) / static_cast<double>(w)) - 2.0;

    // REDFT10 followed by REDFT01 scales by (2H)(2W)
    const double norm = 1.0 / (4.0 * static_cast<double>(h) * static_cast<double>(w));
    for (std::size_t u = 0; u < h; ++u) {
        for (std::size_t v = 0; v < w; ++v) {
            double& c = buf[u * w + v];
            c = (u == 0 && v == 0) ? 0.0 : c * norm / (row_eig[u] + col_eig[v]);
        }
    }

    {
        detail::CosinePlan inverse(h, w, buf.get(), FFTW_REDFT01);
        inverse.execute();
    }

    Raster out(h, w);
    std::copy(buf.get(), buf.get() + h * w, out.values().begin());
    return out;
}

} // namespace modspike

#endif // MODSPIKE_LAR_OPS_HPP
