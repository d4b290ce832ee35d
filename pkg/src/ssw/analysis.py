"""Error norms, convergence rates, y-averages and kinetic energy spectra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMS = ("L1", "L2", "Linf")


def error_norm(numeric, exact, norm="L1", cell_area=1.0, axis=None):
    """Discrete norm of ``numeric - exact``; L1 and L2 are weighted by cell area.

    ``axis`` selects the axes that are reduced (all by default), e.g.
    ``axis=(1, 2)`` gives one value per variable of a ``(6, nx, ny)`` field.
    """
    numeric = np.asarray(numeric, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if numeric.shape != exact.shape:
        raise ValueError(f"shape mismatch: {numeric.shape} vs {exact.shape}")
    err = np.abs(numeric - exact)
    if norm == "L1":
        return np.sum(err, axis=axis) * cell_area
    if norm == "L2":
        return np.sqrt(np.sum(err * err, axis=axis) * cell_area)
    if norm == "Linf":
        return np.max(err, axis=axis)
    raise ValueError(f"unknown norm {norm!r}; choose from {NORMS}")


def convergence_rate(e_coarse, e_fine, ratio=2.0):
    """Observed order log(e_coarse / e_fine) / log(ratio)."""
    e_coarse = np.asarray(e_coarse, dtype=float)
    e_fine = np.asarray(e_fine, dtype=float)
    if np.any(~(e_coarse > 0)) or np.any(~(e_fine > 0)):
        raise ValueError("convergence rate needs strictly positive errors")
    rate = np.log(e_coarse / e_fine) / np.log(ratio)
    return rate if rate.ndim else float(rate)


def convergence_table(resolutions, errors):
    """Rows ``(n, error, rate)`` with the rate against the previous row (None first)."""
    rows = []
    for i, (n, e) in enumerate(zip(resolutions, errors)):
        rate = None
        if i > 0:
            rate = convergence_rate(errors[i - 1], e, n / resolutions[i - 1])
        rows.append((n, e, rate))
    return rows


def y_average_decompose(field):
    """Split a ``(nx, ny)`` field into its y-mean per column and the fluctuation."""
    field = np.asarray(field, dtype=float)
    if field.ndim != 2:
        raise ValueError("y-average needs a 2-D field of shape (nx, ny)")
    mean = field.mean(axis=1)
    return mean, field - mean[:, None]


@dataclass
class SpectrumResult:
    k: np.ndarray
    E: np.ndarray
    total: float


def _check_uniform(coord, name):
    if coord is None:
        return
    d = np.diff(np.asarray(coord, dtype=float))
    if d.size and not np.allclose(d, d[0], rtol=1e-10, atol=0.0):
        raise ValueError(f"energy spectrum needs a uniform grid in {name}")


def _dft2(f):
    """Direct 2-D DFT through explicit matrices; the reference for the FFT path."""
    nx, ny = f.shape
    jx = np.arange(nx)
    jy = np.arange(ny)
    wx = np.exp(-2j * np.pi * np.outer(jx, jx) / nx)
    wy = np.exp(-2j * np.pi * np.outer(jy, jy) / ny)
    return wx @ f @ wy.T


def energy_spectrum(u, v, x=None, y=None, method="fft"):
    """Shell-summed kinetic energy of the fluctuation fields ``u``, ``v``.

    Transforms are divided by the number of cells, so the shell energies sum
    to half the mean of ``u**2 + v**2``.  Shells are integer bins of the
    radius in index space.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 2:
        raise ValueError("u and v must be 2-D fields of equal shape")
    _check_uniform(x, "x")
    _check_uniform(y, "y")
    nx, ny = u.shape
    if method == "fft":
        uh = np.fft.fft2(u)
        vh = np.fft.fft2(v)
    elif method == "direct":
        uh = _dft2(u)
        vh = _dft2(v)
    else:
        raise ValueError(f"unknown method {method!r}")
    n = nx * ny
    e2 = 0.5 * (np.abs(uh) ** 2 + np.abs(vh) ** 2) / (n * n)
    kx = np.fft.fftfreq(nx) * nx
    ky = np.fft.fftfreq(ny) * ny
    kr = np.sqrt(kx[:, None] ** 2 + ky[None, :] ** 2)
    shell = np.rint(kr).astype(int)
    E = np.bincount(shell.ravel(), weights=e2.ravel())
    total = 0.5 * float(np.mean(u * u + v * v))
    return SpectrumResult(np.arange(E.size), E, total)
