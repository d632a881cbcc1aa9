"""Hot inner loops of the master-equation integrator.

All kernels operate on C-contiguous complex128 matrices.  They are compiled
with numba when available (cached to disk after the first call) and fall back
to equivalent numpy implementations otherwise.  The two nontrivial access
patterns, the conjugate-transpose combine and the Hermitian symmetrization,
are tiled so the transposed reads stay cache-resident.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

_TILE = 48


@njit(cache=True, nogil=True)
def combine_commutator(X, rho, E, out):
    """out = -i(X - X†) + E ∘ rho, with X = H(t) @ rho for Hermitian rho.

    Exactly Hermitian output for Hermitian rho and real symmetric E: the (i,j)
    and (j,i) entries are built from the same loads with exact conjugations.
    """
    n = X.shape[0]
    for i0 in range(0, n, _TILE):
        i1 = min(i0 + _TILE, n)
        for j0 in range(0, n, _TILE):
            j1 = min(j0 + _TILE, n)
            for i in range(i0, i1):
                for j in range(j0, j1):
                    out[i, j] = -1j * (X[i, j] - np.conj(X[j, i])) + E[i, j] * rho[i, j]


def _combine_commutator_np(X, rho, E, out):
    np.multiply(E, rho, out=out)
    out -= 1j * X
    out += 1j * X.conj().T


@njit(cache=True, nogil=True)
def jump_rows(rho, out, dst, src, w, scale):
    """Accumulate scale · ξ rho ξ† for a weighted partial permutation
    ξ = Σ_a w[a] |dst[a]⟩⟨src[a]|:  out[dst_a, dst_b] += scale w_a w_b rho[src_a, src_b]."""
    nd = dst.shape[0]
    for a in range(nd):
        da = dst[a]
        sa = src[a]
        wa = scale * w[a]
        for b in range(nd):
            out[da, dst[b]] += (wa * w[b]) * rho[sa, src[b]]


def _jump_rows_np(rho, out, dst, src, w, scale):
    ww = scale * np.outer(w, w)
    out[np.ix_(dst, dst)] += ww * rho[np.ix_(src, src)]


@njit(cache=True, nogil=True)
def hermitize(rho):
    """rho <- (rho + rho†)/2 in place, imaginary diagonal dropped."""
    n = rho.shape[0]
    for i0 in range(0, n, _TILE):
        i1 = min(i0 + _TILE, n)
        for j0 in range(i0, n, _TILE):
            j1 = min(j0 + _TILE, n)
            for i in range(i0, i1):
                jlo = j0 if j0 > i else i + 1
                for j in range(jlo, j1):
                    avg = 0.5 * (rho[i, j] + np.conj(rho[j, i]))
                    rho[i, j] = avg
                    rho[j, i] = np.conj(avg)
    for i in range(n):
        rho[i, i] = complex(rho[i, i].real, 0.0)


def _hermitize_np(rho):
    upper = 0.5 * (rho + rho.conj().T)
    rho[:] = upper
    d = np.einsum("ii->i", rho)
    d.imag = 0.0


@njit(cache=True, nogil=True)
def axpy_to(out, base, c, k):
    """out = base + c * k (single fused pass)."""
    n = out.shape[0]
    m = out.shape[1]
    for i in range(n):
        for j in range(m):
            out[i, j] = base[i, j] + c * k[i, j]


def _axpy_to_np(out, base, c, k):
    np.multiply(k, c, out=out)
    out += base


@njit(cache=True, nogil=True)
def accumulate(out, c, arr):
    """out += c * arr."""
    n = out.shape[0]
    m = out.shape[1]
    for i in range(n):
        for j in range(m):
            out[i, j] += c * arr[i, j]


def _accumulate_np(out, c, arr):
    out += c * arr


@njit(cache=True, nogil=True)
def max_abs(arr):
    """max |arr_ij| without materializing the modulus array."""
    n = arr.shape[0]
    m = arr.shape[1]
    best = 0.0
    for i in range(n):
        for j in range(m):
            v = abs(arr[i, j])
            if v > best:
                best = v
    return best


def _max_abs_np(arr):
    return float(np.abs(arr).max()) if arr.size else 0.0


@njit(cache=True, nogil=True)
def rk4_final(rho, k1, k2, k3, k4, dt):
    """rho += dt/6 (k1 + 2 k2 + 2 k3 + k4), fused."""
    n = rho.shape[0]
    m = rho.shape[1]
    c = dt / 6.0
    for i in range(n):
        for j in range(m):
            rho[i, j] += c * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])


def _rk4_final_np(rho, k1, k2, k3, k4, dt):
    acc = k1 + k4
    acc += 2.0 * k2
    acc += 2.0 * k3
    acc *= dt / 6.0
    rho += acc


if not HAVE_NUMBA:  # pragma: no cover
    combine_commutator = _combine_commutator_np
    jump_rows = _jump_rows_np
    hermitize = _hermitize_np
    axpy_to = _axpy_to_np
    accumulate = _accumulate_np
    max_abs = _max_abs_np
    rk4_final = _rk4_final_np
