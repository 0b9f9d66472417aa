#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "nlslab/errors.hpp"

namespace nlslab {

using Complex = std::complex<double>;

/// Uniform periodic grid on the centered box [-L/2, L/2)^dim with dim in
/// {1, 2}. Coordinates are x_i = -L/2 + i*dx, dx = L/M; the wavenumber
/// lattice is (2*pi/L) * {-M/2, ..., M/2-1} per axis in FFT storage order.
class Grid {
public:
    Grid(int dim, int points_per_axis, double box_length);

    int dim() const { return dim_; }
    int points_per_axis() const { return m_; }
    double box_length() const { return box_; }
    double dx() const { return box_ / m_; }
    std::size_t size() const { return size_; }

    /// Axis index of a flat (row-major) sample index.
    int axis_index(std::size_t flat, int axis) const {
        return dim_ == 1 ? static_cast<int>(flat)
                         : (axis == 0 ? static_cast<int>(flat / m_) : static_cast<int>(flat % m_));
    }
    double coord(int index_on_axis) const { return -0.5 * box_ + index_on_axis * dx(); }
    std::array<double, 2> point(std::size_t flat) const;

    /// Signed FFT index: i -> i for i < M/2, i - M otherwise.
    int signed_index(int i) const { return i < m_ / 2 ? i : i - m_; }
    double wavenumber(int index_on_axis) const {
        return 2.0 * kPi * signed_index(index_on_axis) / box_;
    }

    /// Offset x - a wrapped into [-L/2, L/2), i.e. measured to the nearest
    /// periodic image.
    double wrap(double delta) const;

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && m_ == o.m_ && box_ == o.box_;
    }

    static constexpr double kPi = 3.141592653589793238462643383279502884;

private:
    int dim_;
    int m_;
    double box_;
    std::size_t size_;
};

/// Complex scalar field sampled on a Grid. Arithmetic requires identical
/// grids and throws GridMismatchError otherwise.
class Field {
public:
    explicit Field(const Grid& g, Complex fill = Complex(0.0, 0.0))
        : grid_(g), v_(g.size(), fill) {}

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    Complex& operator[](std::size_t i) { return v_[i]; }
    const Complex& operator[](std::size_t i) const { return v_[i]; }
    Complex* data() { return v_.data(); }
    const Complex* data() const { return v_.data(); }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(Complex c);
    Field& operator*=(double c);

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, Complex c) { return a *= c; }
    friend Field operator*(Complex c, Field a) { return a *= c; }
    friend Field operator*(Field a, double c) { return a *= c; }
    friend Field operator*(double c, Field a) { return a *= c; }

private:
    Grid grid_;
    std::vector<Complex> v_;
};

void require_same_grid(const Field& a, const Field& b);

enum class PairingKind { inner, symplectic };

/// Epsilon-weighted pairings of two fields by the rectangle rule:
///   inner      -> Re  int eps^{-N} u conj(v) dx
///   symplectic -> Im  int eps^{-N} u conj(v) dx
/// The symplectic form satisfies w(u, v) = <u, i v> with the inner pairing.
double pairing(const Field& u, const Field& v, double eps, PairingKind kind);

/// sqrt( int eps^{-N} (eps^2 |grad u|^2 + |u|^2) dx ) with the spectral
/// gradient, evaluated via Parseval.
double h1_norm(const Field& u, double eps);

double l2_norm(const Field& u, double eps);

/// Fourier-multiplier derivative along one axis; order 1 uses ik (Nyquist
/// zeroed), order 2 uses -k^2.
Field spectral_derivative(const Field& u, int axis, int order);

Field laplacian(const Field& u);

/// u(x - shift) by the spectral phase shift; exact for band-limited data.
Field translate(const Field& u, const std::array<double, 2>& shift);

double max_abs(const Field& u);
bool all_finite(const Field& u);

/// Forward/backward DFT (FFTW, unnormalized backward; forward unnormalized).
void fft_forward(const Grid& g, const Complex* in, Complex* out);
void fft_backward(const Grid& g, const Complex* in, Complex* out);

} // namespace nlslab
