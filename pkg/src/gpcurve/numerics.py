"""Shared discretization helpers: finite differences, quadrature, periodic spectral calculus."""

import numpy as np
import scipy.sparse as sp


def fd_first(n, h):
    """Fourth-order centered first derivative with zero values beyond both ends."""
    offsets = [-2, -1, 1, 2]
    coeffs = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)
    return sp.diags([np.full(n - abs(k), c) for k, c in zip(offsets, coeffs)], offsets, format="csr")


def fd_second(n, h):
    """Fourth-order centered second derivative with zero values beyond both ends."""
    offsets = [-2, -1, 0, 1, 2]
    coeffs = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    return sp.diags([np.full(n - abs(k), c) for k, c in zip(offsets, coeffs)], offsets, format="csr")


def simpson_weights(n, h):
    """Composite Simpson weights on n (odd) equally spaced nodes."""
    if n % 2 == 0 or n < 3:
        raise ValueError("Simpson weights need an odd node count >= 3")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def dx_axis0(values, op):
    """Apply a sparse x-operator along axis 0 of a (nx, ...) array."""
    shape = values.shape
    return (op @ values.reshape(shape[0], -1)).reshape(shape)


def periodic_wavenumbers(n, period):
    return 2.0 * np.pi / period * np.fft.rfftfreq(n, d=1.0 / n)


def periodic_derivative(values, period, order=1, axis=-1):
    """Spectral derivative of samples on a uniform periodic grid.

    For even n the Nyquist coefficient is dropped in odd-order derivatives.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    k = periodic_wavenumbers(n, period)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[-1] = 0.0
    shape = [1] * values.ndim
    shape[axis] = k.size
    coef = np.fft.rfft(values, axis=axis) * mult.reshape(shape)
    return np.fft.irfft(coef, n=n, axis=axis)


def periodic_eval(values, period, points):
    """Evaluate the trigonometric interpolant of periodic samples at arbitrary points."""
    values = np.asarray(values, dtype=float)
    n = values.size
    coef = np.fft.rfft(values) / n
    k = periodic_wavenumbers(n, period)
    pts = np.asarray(points, dtype=float)
    phase = np.exp(1j * np.multiply.outer(pts, k))
    weights = np.full(k.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return np.real(phase @ (coef * weights))


def periodic_antiderivative(values, period, points):
    """Evaluate ∫_0^p g for the trigonometric interpolant g of periodic samples."""
    values = np.asarray(values, dtype=float)
    n = values.size
    coef = np.fft.rfft(values) / n
    if n % 2 == 0:
        coef[-1] = 0.0
    k = periodic_wavenumbers(n, period)
    pts = np.asarray(points, dtype=float)
    out = np.real(coef[0]) * pts
    kk = k[1:]
    phase = np.exp(1j * np.multiply.outer(pts, kk)) - 1.0
    out = out + np.real(phase @ (2.0 * coef[1:] / (1j * kk)))
    return out


def periodic_l2(values, period, axis=-1):
    """L2 norm over one period by the (spectrally accurate) rectangle rule."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    return np.sqrt(np.sum(values**2, axis=axis) * period / n)


def loglog_slope(xs, ys):
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])
