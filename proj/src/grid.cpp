#include "nlslab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace nlslab {

namespace {

bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

// Global FFTW plan cache keyed by (dim, M). Plan creation is not thread
// safe and is serialized; execution through the new-array interface is.
// Plans are created with FFTW_UNALIGNED so they accept any caller buffer.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    struct Plans {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    const Plans& get(int dim, int m) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(dim, m);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        std::size_t n = dim == 1 ? static_cast<std::size_t>(m)
                                 : static_cast<std::size_t>(m) * m;
        std::vector<Complex> a(n), b(n);
        auto* in = reinterpret_cast<fftw_complex*>(a.data());
        auto* out = reinterpret_cast<fftw_complex*>(b.data());
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        Plans p;
        if (dim == 1) {
            p.fwd = fftw_plan_dft_1d(m, in, out, FFTW_FORWARD, flags);
            p.bwd = fftw_plan_dft_1d(m, in, out, FFTW_BACKWARD, flags);
        } else {
            p.fwd = fftw_plan_dft_2d(m, m, in, out, FFTW_FORWARD, flags);
            p.bwd = fftw_plan_dft_2d(m, m, in, out, FFTW_BACKWARD, flags);
        }
        if (!p.fwd || !p.bwd) throw Error("fftw plan creation failed");
        return cache_.emplace(key, p).first->second;
    }

private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<std::pair<int, int>, Plans> cache_;
};

} // namespace

Grid::Grid(int dim, int points_per_axis, double box_length)
    : dim_(dim), m_(points_per_axis), box_(box_length) {
    if (dim != 1 && dim != 2) throw Error("grid dim must be 1 or 2");
    if (m_ < 16 || !is_power_of_two(m_))
        throw Error("grid points per axis must be a power of two >= 16");
    if (!(box_ > 0.0)) throw Error("grid box length must be positive");
    size_ = dim == 1 ? static_cast<std::size_t>(m_)
                     : static_cast<std::size_t>(m_) * m_;
}

std::array<double, 2> Grid::point(std::size_t flat) const {
    if (dim_ == 1) return {coord(static_cast<int>(flat)), 0.0};
    return {coord(static_cast<int>(flat / m_)), coord(static_cast<int>(flat % m_))};
}

double Grid::wrap(double delta) const {
    double half = 0.5 * box_;
    double r = std::fmod(delta + half, box_);
    if (r < 0) r += box_;
    return r - half;
}

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw GridMismatchError("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    require_same_grid(*this, o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}

Field& Field::operator*=(Complex c) {
    for (auto& z : v_) z *= c;
    return *this;
}

Field& Field::operator*=(double c) {
    for (auto& z : v_) z *= c;
    return *this;
}

void fft_forward(const Grid& g, const Complex* in, Complex* out) {
    const auto& p = PlanCache::instance().get(g.dim(), g.points_per_axis());
    fftw_execute_dft(p.fwd,
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void fft_backward(const Grid& g, const Complex* in, Complex* out) {
    const auto& p = PlanCache::instance().get(g.dim(), g.points_per_axis());
    fftw_execute_dft(p.bwd,
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

double pairing(const Field& u, const Field& v, double eps, PairingKind kind) {
    require_same_grid(u, v);
    if (!(eps > 0.0)) throw DomainError("pairing requires eps > 0");
    const Grid& g = u.grid();
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * std::conj(v[i]);
    double weight = std::pow(g.dx(), g.dim()) / std::pow(eps, g.dim());
    return kind == PairingKind::inner ? acc.real() * weight : acc.imag() * weight;
}

double l2_norm(const Field& u, double eps) {
    return std::sqrt(std::max(0.0, pairing(u, u, eps, PairingKind::inner)));
}

double h1_norm(const Field& u, double eps) {
    if (!(eps > 0.0)) throw DomainError("h1_norm requires eps > 0");
    const Grid& g = u.grid();
    std::vector<Complex> spec(g.size());
    fft_forward(g, u.data(), spec.data());
    const int m = g.points_per_axis();
    double sum = 0.0;
    if (g.dim() == 1) {
        for (int i = 0; i < m; ++i) {
            double k = g.wavenumber(i);
            sum += (eps * eps * k * k + 1.0) * std::norm(spec[i]);
        }
    } else {
        for (int i = 0; i < m; ++i) {
            double kx = g.wavenumber(i);
            for (int j = 0; j < m; ++j) {
                double ky = g.wavenumber(j);
                sum += (eps * eps * (kx * kx + ky * ky) + 1.0) *
                       std::norm(spec[static_cast<std::size_t>(i) * m + j]);
            }
        }
    }
    // Parseval: int |u|^2 dx = dx^N / size * sum_k |u_hat|^2.
    double integral = sum * std::pow(g.dx(), g.dim()) / static_cast<double>(g.size());
    return std::sqrt(integral / std::pow(eps, g.dim()));
}

Field spectral_derivative(const Field& u, int axis, int order) {
    const Grid& g = u.grid();
    if (axis < 0 || axis >= g.dim()) throw DomainError("derivative axis out of range");
    if (order != 1 && order != 2) throw DomainError("derivative order must be 1 or 2");
    const int m = g.points_per_axis();
    std::vector<Complex> spec(g.size());
    fft_forward(g, u.data(), spec.data());
    for (std::size_t i = 0; i < g.size(); ++i) {
        int idx = g.axis_index(i, axis);
        double k = g.wavenumber(idx);
        if (order == 1) {
            // The Nyquist mode has no well-defined odd derivative; zero it.
            bool nyquist = g.signed_index(idx) == -m / 2;
            spec[i] *= nyquist ? Complex(0, 0) : Complex(0, k);
        } else {
            spec[i] *= -k * k;
        }
    }
    Field out(g);
    fft_backward(g, spec.data(), out.data());
    out *= 1.0 / static_cast<double>(g.size());
    return out;
}

Field laplacian(const Field& u) {
    const Grid& g = u.grid();
    const int m = g.points_per_axis();
    std::vector<Complex> spec(g.size());
    fft_forward(g, u.data(), spec.data());
    if (g.dim() == 1) {
        for (int i = 0; i < m; ++i) {
            double k = g.wavenumber(i);
            spec[i] *= -k * k;
        }
    } else {
        for (int i = 0; i < m; ++i) {
            double kx = g.wavenumber(i);
            for (int j = 0; j < m; ++j) {
                double ky = g.wavenumber(j);
                spec[static_cast<std::size_t>(i) * m + j] *= -(kx * kx + ky * ky);
            }
        }
    }
    Field out(g);
    fft_backward(g, spec.data(), out.data());
    out *= 1.0 / static_cast<double>(g.size());
    return out;
}

Field translate(const Field& u, const std::array<double, 2>& shift) {
    const Grid& g = u.grid();
    std::vector<Complex> spec(g.size());
    fft_forward(g, u.data(), spec.data());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double phase = 0.0;
        for (int a = 0; a < g.dim(); ++a) phase -= g.wavenumber(g.axis_index(i, a)) * shift[a];
        spec[i] *= Complex(std::cos(phase), std::sin(phase));
    }
    Field out(g);
    fft_backward(g, spec.data(), out.data());
    out *= 1.0 / static_cast<double>(g.size());
    return out;
}

double max_abs(const Field& u) {
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i]));
    return m;
}

bool all_finite(const Field& u) {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag())) return false;
    return true;
}

} // namespace nlslab
