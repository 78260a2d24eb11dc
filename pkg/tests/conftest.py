"""Shared test oracles, independent of the package's evaluation strategy.

The probability oracle sums the raw geometric series in 80-bit arithmetic
instead of using the closed sin-ratio form, so agreement between the two is
a real cross-check rather than the same formula twice.
"""

import numpy as np

PI_LD = np.arccos(np.longdouble(-1.0))


def oracle_pmf_vector(n: int, components) -> np.ndarray:
    """P(y) for all y by direct summation: |sum_x e^{2 pi i (theta - y/M) x}|^2 / M^2.

    components: iterable of (theta, weight). Runs in longdouble; the
    amplitude sum has M terms, so the result carries ~1e-17 absolute error,
    far inside the 1e-12 comparisons it backs.
    """
    M = 1 << n
    xs = np.arange(M, dtype=np.longdouble)
    total = np.zeros(M, dtype=np.longdouble)
    for theta, weight in components:
        theta_ld = np.longdouble(float(theta))
        for y in range(M):
            # keep the accumulated angle small: theta*x mod 1 and (y*x mod M)/M
            phase = np.mod(theta_ld * xs, 1.0) - np.mod(y * np.arange(M), M) / np.longdouble(M)
            amp = np.exp(2j * PI_LD * phase).sum() / M
            total[y] += np.longdouble(weight) * (amp * np.conj(amp)).real
    return total.astype(float)


def oracle_pmf(n: int, theta: float, y: int) -> float:
    return float(oracle_pmf_vector(n, [(theta, 1.0)])[y])


def central_log_diff(f, x: float, h: float) -> float:
    """Central finite difference of log f at x."""
    return (np.log(f(x + h)) - np.log(f(x - h))) / (2.0 * h)


def fd_jacobian(residual, params: np.ndarray, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of a residual vector function."""
    params = np.asarray(params, dtype=float)
    r0 = residual(params)
    out = np.empty((r0.size, params.size))
    for i in range(params.size):
        up = params.copy()
        down = params.copy()
        up[i] += h
        down[i] -= h
        out[:, i] = (residual(up) - residual(down)) / (2.0 * h)
    return out


def random_phase_model(rng: np.random.Generator, J: int):
    """A valid J-component model with distinct phases and normalized weights."""
    while True:
        thetas = rng.random(J)
        if len(set(thetas)) == J:
            break
    raw = rng.random(J) + 0.1
    weights = raw / raw.sum()
    # renormalize exactly against float rounding in the sum
    weights[-1] = 1.0 - weights[:-1].sum()
    return list(zip(thetas.tolist(), weights.tolist()))
