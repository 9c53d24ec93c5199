"""Hot loops of the ensemble sweep.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy version
that performs the same per-element operations in the same order.  Setting
``GRAVDEC_DISABLE_NUMBA=1`` (or running without numba installed) selects the
numpy path.  Both reduce over modes with Neumaier compensated summation, so
sums do not depend on how the modes are ordered beyond the last few ulps.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("GRAVDEC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised via the env flag in a subprocess
    njit = None

HAVE_NUMBA = njit is not None
BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------- numpy path

def _np_neumaier(x):
    s = 0.0
    comp = 0.0
    for v in x:
        v = float(v)
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


def _np_accumulate(s, comp, v):
    t = s + v
    big = np.abs(s) >= np.abs(v)
    comp += np.where(big, (s - t) + v, (v - t) + s)
    return t, comp


def _np_log_gamma_series(times, rates, a, c):
    s = np.zeros(times.shape[0])
    comp = np.zeros(times.shape[0])
    for i in range(rates.shape[0]):
        h = np.sin(0.5 * rates[i] * times)
        x = 2.0 * h * h
        ax = a[i] * x
        term = -0.5 * np.log1p(ax) - c[i] * x / (1.0 + ax)
        s, comp = _np_accumulate(s, comp, term)
    return s + comp


def _np_log_fidelity_series(times, rates, f):
    s = np.zeros(times.shape[0])
    comp = np.zeros(times.shape[0])
    for i in range(rates.shape[0]):
        h = np.sin(0.5 * rates[i] * times)
        term = -f[i] * (2.0 * h * h)
        s, comp = _np_accumulate(s, comp, term)
    return s + comp


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    import math

    @njit(cache=True)
    def _nb_neumaier(x):
        s = 0.0
        comp = 0.0
        for v in x:
            t = s + v
            if abs(s) >= abs(v):
                comp += (s - t) + v
            else:
                comp += (v - t) + s
            s = t
        return s + comp

    @njit(cache=True)
    def _nb_log_gamma_series(times, rates, a, c):
        out = np.empty(times.shape[0])
        for j in range(times.shape[0]):
            t = times[j]
            s = 0.0
            comp = 0.0
            for i in range(rates.shape[0]):
                h = math.sin(0.5 * rates[i] * t)
                x = 2.0 * h * h
                ax = a[i] * x
                v = -0.5 * math.log1p(ax) - c[i] * x / (1.0 + ax)
                u = s + v
                if abs(s) >= abs(v):
                    comp += (s - u) + v
                else:
                    comp += (v - u) + s
                s = u
            out[j] = s + comp
        return out

    @njit(cache=True)
    def _nb_log_fidelity_series(times, rates, f):
        out = np.empty(times.shape[0])
        for j in range(times.shape[0]):
            t = times[j]
            s = 0.0
            comp = 0.0
            for i in range(rates.shape[0]):
                h = math.sin(0.5 * rates[i] * t)
                v = -f[i] * (2.0 * h * h)
                u = s + v
                if abs(s) >= abs(v):
                    comp += (s - u) + v
                else:
                    comp += (v - u) + s
                s = u
            out[j] = s + comp
        return out

    neumaier_sum_impl = _nb_neumaier
    log_gamma_series_impl = _nb_log_gamma_series
    log_fidelity_series_impl = _nb_log_fidelity_series
else:
    neumaier_sum_impl = _np_neumaier
    log_gamma_series_impl = _np_log_gamma_series
    log_fidelity_series_impl = _np_log_fidelity_series


def _f64(x):
    return np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))


def neumaier_sum(x) -> float:
    """Compensated sum of a 1-D float array."""
    return float(neumaier_sum_impl(_f64(x)))


def log_gamma_series(times, rates, a, c, backend=None):
    """Sum over modes of ``log |Gamma_i(t)|`` for every time.

    ``rates`` are phase rates (rad/s), ``a = 2 nbar (nbar + 1)`` and
    ``c = |alpha|^2 (2 nbar + 1)``.
    """
    fn = _select(backend, log_gamma_series_impl, _np_log_gamma_series)
    return fn(_f64(times), _f64(rates), _f64(a), _f64(c))


def log_fidelity_series(times, rates, f, backend=None):
    """Sum over modes of ``log B_i(t)`` with ``f = |alpha|^2 / (2 nbar + 1)``."""
    fn = _select(backend, log_fidelity_series_impl, _np_log_fidelity_series)
    return fn(_f64(times), _f64(rates), _f64(f))


def _select(backend, default, numpy_fn):
    if backend is None:
        return default
    if backend == "numpy":
        return numpy_fn
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return default
    raise ValueError(f"unknown backend {backend!r}")
