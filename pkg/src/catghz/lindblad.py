"""Master-equation integration for the driven lossy qutrit-cavity system.

The state follows dρ/dt = −i[H(t), ρ] + Σ rate · L[ξ](ρ) with the dissipator
L[ξ]ρ = ξρξ† − ½{ξ†ξ, ρ} over six collapse channels (three cavity decays,
three qutrit relaxations) plus pure dephasing of |e⟩ and |f⟩.  ρ is kept
dense; every operator acting on it is sparse or structured.

Two integrators sit behind one interface: a fixed-step classic 4th-order
scheme for Hamiltonians with fast oscillating phases (step bounded by the
highest phase frequency), and an embedded Dormand-Prince 5(4) scheme with
step control for slow effective models.  ρ is re-symmetrized every step;
positivity is monitored, never enforced.  A dense matrix-exponential oracle
for small constant Hamiltonians backs the integrator tests.

The compiled right-hand side exploits two structural facts: the commutator
needs only X = H(t)ρ because ρH = (Hρ)† for Hermitian ρ, and every collapse
operator here is a weighted partial permutation, so ξρξ† is a gather and all
anticommutator/dephasing diagonals collapse into one precomputed real matrix
applied elementwise.  A reference implementation (`rhs`) with none of those
shortcuts backs the equivalence tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from . import _kernels
from .fock import SpaceLayout, annihilation, qutrit_projector, qutrit_sigma
from .model import Generator, SystemParams, TWO_PI

try:
    from scipy.sparse import _sparsetools as _sptools
    _CSR_MATVECS = _sptools.csr_matvecs
except Exception:  # pragma: no cover - depends on scipy internals
    _CSR_MATVECS = None

# Fixed-step phase resolution: at least this many steps per fastest cycle.
STEPS_PER_CYCLE = 50
# Phase frequency (cycles/μs) above which `auto` picks the fixed-step method.
FAST_PHASE_CUTOFF = 100.0
TRACE_ABORT = 1e-6
_DEFAULT_SAMPLES = 81


class IntegrationError(RuntimeError):
    """Integration aborted: unstable step control or trace drift."""


@dataclass(frozen=True)
class DissipatorSet:
    """Collapse channels (operator, rate μs⁻¹) and dephasing projectors."""

    collapse: tuple = ()
    dephasing: tuple = ()

    def __post_init__(self):
        for op, rate in tuple(self.collapse) + tuple(self.dephasing):
            if rate < 0:
                raise ValueError(f"negative dissipation rate {rate}")

    @property
    def channels(self):
        return tuple(self.collapse) + tuple(self.dephasing)


def build_dissipators(params: SystemParams, layout: SpaceLayout) -> DissipatorSet:
    """Six collapse channels and two dephasing channels at the configured rates."""
    collapse = []
    for cav in (1, 2, 3):
        collapse.append((annihilation(layout, cav), params.kappa[cav - 1]))
    collapse.append((qutrit_sigma(layout, "g", "e"), params.gamma_eg))
    collapse.append((qutrit_sigma(layout, "e", "f"), params.gamma_fe))
    collapse.append((qutrit_sigma(layout, "g", "f"), params.gamma_fg))
    dephasing = [
        (qutrit_projector(layout, "e"), params.gamma_phi_e),
        (qutrit_projector(layout, "f"), params.gamma_phi_f),
    ]
    return DissipatorSet(collapse=tuple(collapse), dephasing=tuple(dephasing))


@dataclass(frozen=True)
class IntegrationConfig:
    """Integrator selection and stepping controls.

    method: "auto" picks fixed-step when fast phases are present, otherwise
    the adaptive scheme; "rk4"/"fixed" and "dp45"/"adaptive" force one.
    dt: fixed step in μs (None derives it from the fastest phase).
    tolerance: absolute per-step error bound for the adaptive scheme.
    sample_times: array of times, an integer count, or None for the default.
    """

    t_span: tuple
    method: str = "auto"
    dt: float | None = None
    tolerance: float = 1e-8
    sample_times: object = None

    def __post_init__(self):
        aliases = {"fixed": "rk4", "adaptive": "dp45"}
        method = aliases.get(self.method, self.method)
        if method not in ("auto", "rk4", "dp45"):
            raise ValueError(f"unknown integration method {self.method!r}")
        object.__setattr__(self, "method", method)
        t0, t1 = (float(self.t_span[0]), float(self.t_span[1]))
        if not t1 > t0:
            raise ValueError(f"empty time span {self.t_span}")
        object.__setattr__(self, "t_span", (t0, t1))
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.tolerance <= 1e-3:
            raise ValueError(f"tolerance {self.tolerance} outside (0, 1e-3]")

    def resolve_samples(self) -> np.ndarray:
        t0, t1 = self.t_span
        st = self.sample_times
        if st is None:
            st = _DEFAULT_SAMPLES
        if isinstance(st, (int, np.integer)):
            if st < 2:
                raise ValueError("need at least 2 sample times")
            return np.linspace(t0, t1, int(st))
        times = np.asarray(st, dtype=float)
        if times.ndim != 1 or times.size < 1:
            raise ValueError("sample_times must be a 1-D sequence")
        if np.any(np.diff(times) <= 0):
            raise ValueError("sample_times must be strictly increasing")
        if times[0] < t0 - 1e-12 or times[-1] > t1 + 1e-12:
            raise ValueError("sample_times outside t_span")
        if abs(times[0] - t0) > 1e-12:
            times = np.concatenate(([t0], times))
        if abs(times[-1] - t1) > 1e-12:
            times = np.concatenate((times, [t1]))
        times[0], times[-1] = t0, t1
        return times


@dataclass
class SimulationResult:
    """Final state plus sampled observables of one evolution."""

    final_rho: np.ndarray | None
    final_state: np.ndarray | None
    times: np.ndarray
    traces: np.ndarray
    qutrit_pops: np.ndarray | None
    mean_photons: np.ndarray | None
    purities: np.ndarray | None
    fidelities: np.ndarray | None
    step_count: int
    wall_time: float
    trace_drift: float
    method: str
    final_metrics: dict = field(default_factory=dict)


def rhs(hamiltonian: Generator, dissipators: DissipatorSet | None,
        rho: np.ndarray, t: float) -> np.ndarray:
    """Reference right-hand side, written directly from the defining formula.

    Makes no assumption about Hermiticity of rho; used as the correctness
    oracle for the compiled evaluation path.
    """
    if rho.shape != (hamiltonian.dim, hamiltonian.dim):
        raise ValueError(f"rho shape {rho.shape} does not match dim {hamiltonian.dim}")
    h = hamiltonian.value(t)
    out = -1j * (h @ rho - rho @ h)
    if dissipators is not None:
        for xi, rate in dissipators.channels:
            if rate == 0.0:
                continue
            xd = xi.conj().T.tocsr()
            n = (xd @ xi).tocsr()
            out += rate * ((xi @ rho) @ xd)
            out -= (rate / 2.0) * (n @ rho + rho @ n)
    return out


class _PermChannel:
    """ξ = Σ_a w_a |dst_a⟩⟨src_a| with real weights; jump applied by gather."""

    __slots__ = ("dst", "src", "w", "rate", "block")

    def __init__(self, dst, src, w, rate):
        self.dst = np.ascontiguousarray(dst, dtype=np.int64)
        self.src = np.ascontiguousarray(src, dtype=np.int64)
        self.w = np.ascontiguousarray(w, dtype=np.float64)
        self.rate = float(rate)
        self.block = None
        nd = self.dst.size
        if nd and np.array_equal(self.dst, np.arange(self.dst[0], self.dst[0] + nd)) \
                and np.array_equal(self.src, np.arange(self.src[0], self.src[0] + nd)) \
                and np.allclose(self.w, self.w[0]):
            self.block = (int(self.dst[0]), int(self.src[0]), nd, self.rate * float(self.w[0]) ** 2)


class _CompiledRhs:
    """Preassembled fast evaluation of the master-equation right-hand side.

    The Hamiltonian's union sparsity pattern is fixed; at time t its data
    vector is M @ [e^{iω_k t}]_k.  Diagonal channel algebra lives in the real
    matrix E with E[i,j] = Σ_deph γ m_i m_j − (G_i + G_j),
    G_i = Σ_ch (rate/2)(ξ†ξ)_ii, so the per-stage work is one sparse-dense
    product, one fused combine, and a handful of gathers.
    """

    def __init__(self, hamiltonian: Generator, dissipators: DissipatorSet | None):
        dim = hamiltonian.dim
        self.dim = dim
        self.max_abs_omega = hamiltonian.max_abs_omega

        mats, freqs = [], []
        for op, omega in hamiltonian.terms:
            mats.append(op.tocsr())
            freqs.append(float(omega))
            mats.append(op.conj().T.tocsr())
            freqs.append(-float(omega))
        self._freqs = np.array(freqs, dtype=float)

        if mats:
            union = sum((abs(m) for m in mats), sparse.csr_array((dim, dim)))
            union = union.tocsr()
            union.sum_duplicates()
            union.sort_indices()
            slot = {}
            coo = union.tocoo()
            order = np.lexsort((coo.col, coo.row))
            # row-major slot numbering matches csr data layout after sort_indices
            for s, (i, j) in enumerate(zip(coo.row[order], coo.col[order])):
                slot[(int(i), int(j))] = s
            nnz = union.nnz
            m_stack = np.zeros((nnz, len(mats)), dtype=complex)
            for k, m in enumerate(mats):
                c = m.tocoo()
                for i, j, v in zip(c.row, c.col, c.data):
                    m_stack[slot[(int(i), int(j))], k] = v
            self._indptr = union.indptr
            self._indices = union.indices
            self._m_stack = m_stack
            self._data = np.zeros(nnz, dtype=complex)
            self._hbuf = sparse.csr_array((self._data, self._indices, self._indptr), shape=(dim, dim))
        else:
            self._indptr = None
            self._m_stack = np.zeros((0, 0), dtype=complex)
            self._data = np.zeros(0, dtype=complex)

        self.E = np.zeros((dim, dim), dtype=float)
        gdiag = np.zeros(dim, dtype=float)
        self._perm: list[_PermChannel] = []
        self._generic: list[tuple] = []
        if dissipators is not None:
            for xi, rate in dissipators.channels:
                if rate == 0.0:
                    continue
                ch = self._classify(xi.tocsr(), rate, dim)
                if isinstance(ch, _PermChannel):
                    np.add.at(gdiag, ch.src, 0.5 * ch.rate * ch.w ** 2)
                    if np.array_equal(ch.dst, ch.src):
                        m = np.zeros(dim)
                        m[ch.src] = ch.w
                        self.E += ch.rate * np.outer(m, m)
                    else:
                        self._perm.append(ch)
                else:
                    xi_c, n_c = ch
                    gdiag += 0.5 * rate * n_c.diagonal().real
                    self._generic.append((xi_c, n_c - sparse.diags_array(n_c.diagonal(), format="csr"), rate))
        self.E -= gdiag[:, None]
        self.E -= gdiag[None, :]

        self._x = np.zeros((dim, dim), dtype=complex)

    @staticmethod
    def _classify(xi, rate, dim):
        coo = xi.tocoo()
        coo.sum_duplicates()
        rows, cols, data = coo.row, coo.col, coo.data
        perm_like = (len(np.unique(rows)) == rows.size
                     and len(np.unique(cols)) == cols.size
                     and np.all(np.abs(data.imag) <= 1e-15 * (1.0 + np.abs(data.real))))
        if perm_like:
            order = np.argsort(rows)
            return _PermChannel(rows[order], cols[order], data.real[order], rate)
        n = (xi.conj().T @ xi).tocsr()
        return (xi, n)

    def assemble(self, t: float) -> None:
        if self._indptr is not None and self._data.size:
            phases = np.exp(1j * self._freqs * t)
            np.dot(self._m_stack, phases, out=self._data)

    def __call__(self, t: float, rho: np.ndarray, out: np.ndarray) -> None:
        """out <- dρ/dt at time t.  Requires Hermitian rho."""
        x = self._x
        if self._indptr is not None:
            self.assemble(t)
            x.fill(0.0)
            if _CSR_MATVECS is not None:
                _CSR_MATVECS(self.dim, self.dim, self.dim, self._indptr,
                             self._indices, self._data, rho.ravel(), x.ravel())
            else:  # pragma: no cover
                x += self._hbuf @ rho
        else:
            x.fill(0.0)
        _kernels.combine_commutator(x, rho, self.E, out)
        for ch in self._perm:
            if ch.block is not None:
                d0, s0, n, coef = ch.block
                out[d0:d0 + n, d0:d0 + n] += coef * rho[s0:s0 + n, s0:s0 + n]
            else:
                _kernels.jump_rows(rho, out, ch.dst, ch.src, ch.w, ch.rate)
        for xi, n_off, rate in self._generic:
            xr = xi @ rho
            out += rate * (xi @ xr.conj().T).conj().T
            half = n_off @ rho
            out -= (rate / 2.0) * half
            out -= (rate / 2.0) * half.conj().T


def _resolve_method(config: IntegrationConfig, max_abs_omega: float) -> str:
    if config.method != "auto":
        return config.method
    f_max = max_abs_omega / TWO_PI
    return "rk4" if f_max >= FAST_PHASE_CUTOFF else "dp45"


def _resolve_dt(config: IntegrationConfig, max_abs_omega: float) -> float:
    t0, t1 = config.t_span
    f_max = max_abs_omega / TWO_PI
    bound = 1.0 / (STEPS_PER_CYCLE * f_max) if f_max > 0 else math.inf
    if config.dt is not None:
        if config.dt > bound * (1 + 1e-12):
            raise ValueError(
                f"dt = {config.dt:g} μs does not resolve the fastest phase "
                f"({f_max:g} MHz): need dt <= {bound:g} μs")
        return float(config.dt)
    dt = min(1e-5, bound) if math.isfinite(bound) else (t1 - t0) / 1000.0
    return dt


class _Recorder:
    def __init__(self, layout, target, dim, want_purity):
        self.layout = layout
        self.target = target
        self.want_purity = want_purity
        self.times, self.traces, self.pops, self.photons = [], [], [], []
        self.purities, self.fids = [], []
        self.max_herm = 0.0

    def density(self, t, rho):
        self.times.append(t)
        tr = float(np.real(np.trace(rho)))
        self.traces.append(tr)
        if self.layout is not None:
            diag = np.real(np.diagonal(rho))
            block = diag.size // 3
            self.pops.append([diag[q * block:(q + 1) * block].sum() for q in range(3)])
            occ = diag.reshape(self.layout.dims)
            row = []
            for cav in range(3):
                axes = tuple(ax for ax in range(4) if ax != cav + 1)
                row.append(float(occ.sum(axis=axes) @ np.arange(self.layout.cavity_dims[cav])))
            self.photons.append(row)
        if self.want_purity:
            self.purities.append(float(np.real(np.vdot(rho, rho))))
        herm = float(np.abs(rho - rho.conj().T).max())
        self.max_herm = max(self.max_herm, herm)
        if self.target is not None:
            q = float(np.real(np.vdot(self.target, rho @ self.target)))
            self.fids.append(math.sqrt(max(q, 0.0)))

    def state(self, t, psi):
        self.times.append(t)
        nrm2 = float(np.real(np.vdot(psi, psi)))
        self.traces.append(nrm2)
        if self.layout is not None:
            probs = np.abs(psi) ** 2
            block = probs.size // 3
            self.pops.append([probs[q * block:(q + 1) * block].sum() for q in range(3)])
            occ = probs.reshape(self.layout.dims)
            row = []
            for cav in range(3):
                axes = tuple(ax for ax in range(4) if ax != cav + 1)
                row.append(float(occ.sum(axis=axes) @ np.arange(self.layout.cavity_dims[cav])))
            self.photons.append(row)
        if self.want_purity:
            self.purities.append(1.0)
        if self.target is not None:
            self.fids.append(abs(complex(np.vdot(self.target, psi))))

    def arrays(self):
        def arr(x):
            return np.array(x) if x else None
        return (np.array(self.times), np.array(self.traces), arr(self.pops),
                arr(self.photons), arr(self.purities), arr(self.fids))


def _check_trace(tr_err: float, t: float, step: int) -> None:
    if tr_err > TRACE_ABORT:
        raise IntegrationError(
            f"trace drift |tr rho - 1| = {tr_err:.3e} exceeded {TRACE_ABORT:g} "
            f"at t = {t:.6f} μs (step {step}); the state left the physical manifold")


def evolve(hamiltonian: Generator, dissipators: DissipatorSet | None,
           rho0: np.ndarray, config: IntegrationConfig, *,
           layout: SpaceLayout | None = None,
           fidelity_target: np.ndarray | None = None,
           track_purity: bool = False) -> SimulationResult:
    """Integrate the master equation from rho0 over config.t_span.

    rho0 must be a unit-trace Hermitian matrix; Hermiticity is re-imposed by
    symmetrization after every accepted step and the trace is monitored,
    aborting with a diagnostic when it drifts beyond 1e-6.  Pass `layout` to
    sample populations and photon numbers, `fidelity_target` to sample the
    instantaneous fidelity against a fixed state.
    """
    dim = hamiltonian.dim
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dim, dim):
        raise ValueError(f"rho0 shape {rho0.shape}, expected {(dim, dim)}")
    herm = float(np.abs(rho0 - rho0.conj().T).max())
    if herm > 1e-10:
        raise ValueError(f"rho0 not Hermitian: max |rho - rho†| = {herm:.3e}")
    tr0 = float(np.real(np.trace(rho0)))
    if abs(tr0 - 1.0) > 1e-8:
        raise ValueError(f"rho0 trace {tr0} deviates from 1")

    ws = _CompiledRhs(hamiltonian, dissipators)
    method = _resolve_method(config, ws.max_abs_omega)
    samples = config.resolve_samples()
    rec = _Recorder(layout, fidelity_target, dim, track_purity)

    rho = np.ascontiguousarray(rho0.copy())
    _kernels.hermitize(rho)
    start = time.perf_counter()
    if method == "rk4":
        dt = _resolve_dt(config, ws.max_abs_omega)
        steps, drift = _run_rk4(ws, rho, samples, dt, rec.density)
        rejected = 0
    else:
        steps, rejected, drift = _run_dp45(ws, rho, samples, config.tolerance, rec.density)
    wall = time.perf_counter() - start

    times, traces, pops, photons, purities, fids = rec.arrays()
    metrics = {
        "trace_error": abs(float(np.real(np.trace(rho))) - 1.0),
        "hermiticity_defect": float(np.abs(rho - rho.conj().T).max()),
        "max_sample_hermiticity": rec.max_herm,
        "rejected_steps": rejected,
    }
    if dim <= 2048:
        metrics["min_eigenvalue"] = float(np.linalg.eigvalsh(rho).min())
    return SimulationResult(
        final_rho=rho, final_state=None, times=times, traces=traces,
        qutrit_pops=pops, mean_photons=photons, purities=purities,
        fidelities=fids, step_count=steps, wall_time=wall,
        trace_drift=drift, method=method, final_metrics=metrics)


def _run_rk4(ws: _CompiledRhs, rho: np.ndarray, samples: np.ndarray,
             dt: float, record: Callable) -> tuple[int, float]:
    dim = ws.dim
    k1, k2, k3, k4, y = (np.zeros((dim, dim), dtype=complex) for _ in range(5))
    steps = 0
    drift = 0.0
    record(samples[0], rho)
    for a in range(samples.size - 1):
        ta, tb = samples[a], samples[a + 1]
        n = max(1, math.ceil((tb - ta) / dt - 1e-9))
        h = (tb - ta) / n
        for i in range(n):
            t = ta + i * h
            ws(t, rho, k1)
            _kernels.axpy_to(y, rho, h / 2.0, k1)
            ws(t + h / 2.0, y, k2)
            _kernels.axpy_to(y, rho, h / 2.0, k2)
            ws(t + h / 2.0, y, k3)
            _kernels.axpy_to(y, rho, h, k3)
            ws(t + h, y, k4)
            _kernels.rk4_final(rho, k1, k2, k3, k4, h)
            _kernels.hermitize(rho)
            steps += 1
            tr_err = abs(float(np.real(np.trace(rho))) - 1.0)
            drift = max(drift, tr_err)
            _check_trace(tr_err, t + h, steps)
        record(tb, rho)
    return steps, drift


# Dormand-Prince 5(4) tableau; row 7 equals the 5th-order weights (FSAL).
_DP_A = (
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def _run_dp45(ws: _CompiledRhs, rho: np.ndarray, samples: np.ndarray,
              tol: float, record: Callable) -> tuple[int, int, float]:
    dim = ws.dim
    ks = [np.zeros((dim, dim), dtype=complex) for _ in range(7)]
    y = np.zeros((dim, dim), dtype=complex)
    err = np.zeros((dim, dim), dtype=complex)
    t0, t1 = samples[0], samples[-1]
    span = t1 - t0
    f_max = ws.max_abs_omega / TWO_PI
    h = min(span / 20.0, 0.05 / f_max) if f_max > 0 else span / 20.0
    t = t0
    steps = rejected = 0
    drift = 0.0
    record(t0, rho)
    ws(t0, rho, ks[0])
    for target in samples[1:]:
        while t < target - 1e-14 * max(1.0, abs(target)):
            h = min(h, target - t)
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t = {t:.6e} μs")
            for s in range(5):
                np.copyto(y, rho)
                for k, a in zip(ks, _DP_A[s]):
                    if a != 0.0:
                        _kernels.accumulate(y, h * a, k)
                ws(t + _DP_C[s + 1] * h, y, ks[s + 1])
            np.copyto(y, rho)
            for k, a in zip(ks, _DP_A[5]):
                if a != 0.0:
                    _kernels.accumulate(y, h * a, k)
            ws(t + h, y, ks[6])
            err.fill(0.0)
            for k, e in zip(ks, _DP_E):
                if e != 0.0:
                    _kernels.accumulate(err, h * e, k)
            enorm = _kernels.max_abs(err) / tol
            if enorm <= 1.0:
                t += h
                np.copyto(rho, y)
                _kernels.hermitize(rho)
                np.copyto(ks[0], ks[6])
                steps += 1
                tr_err = abs(float(np.real(np.trace(rho))) - 1.0)
                drift = max(drift, tr_err)
                _check_trace(tr_err, t, steps)
            else:
                rejected += 1
            factor = 0.9 * enorm ** (-0.2) if enorm > 0 else 5.0
            h *= min(5.0, max(0.2, factor))
        record(target, rho)
    return steps, rejected, drift


def evolve_state(hamiltonian: Generator, psi0: np.ndarray,
                 config: IntegrationConfig, *,
                 layout: SpaceLayout | None = None,
                 fidelity_target: np.ndarray | None = None) -> SimulationResult:
    """Integrate the Schrödinger equation dψ/dt = −iH(t)ψ for a pure state.

    Equivalent to `evolve` with no dissipators on ρ = |ψ⟩⟨ψ|, at vector cost;
    the norm is monitored the way the trace is for ρ (never renormalized).
    """
    dim = hamiltonian.dim
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.size != dim:
        raise ValueError(f"psi0 length {psi0.size}, expected {dim}")
    nrm = float(np.linalg.norm(psi0))
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"psi0 norm {nrm} deviates from 1")

    ws = _CompiledRhs(hamiltonian, None)

    def f(t, psi):
        if ws._indptr is None:
            return np.zeros_like(psi)
        ws.assemble(t)
        return -1j * (ws._hbuf @ psi)

    method = _resolve_method(config, ws.max_abs_omega)
    samples = config.resolve_samples()
    rec = _Recorder(layout, fidelity_target, dim, False)
    psi = psi0.copy()
    start = time.perf_counter()
    steps = rejected = 0
    drift = 0.0
    rec.state(samples[0], psi)
    if method == "rk4":
        dt = _resolve_dt(config, ws.max_abs_omega)
        for a in range(samples.size - 1):
            ta, tb = samples[a], samples[a + 1]
            n = max(1, math.ceil((tb - ta) / dt - 1e-9))
            h = (tb - ta) / n
            for i in range(n):
                t = ta + i * h
                k1 = f(t, psi)
                k2 = f(t + h / 2, psi + (h / 2) * k1)
                k3 = f(t + h / 2, psi + (h / 2) * k2)
                k4 = f(t + h, psi + h * k3)
                psi += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                steps += 1
                tr_err = abs(float(np.real(np.vdot(psi, psi))) - 1.0)
                drift = max(drift, tr_err)
                _check_trace(tr_err, t + h, steps)
            rec.state(tb, psi)
    else:
        t0, t1 = samples[0], samples[-1]
        f_max = ws.max_abs_omega / TWO_PI
        h = min((t1 - t0) / 20.0, 0.05 / f_max) if f_max > 0 else (t1 - t0) / 20.0
        t = t0
        k1 = f(t, psi)
        for target in samples[1:]:
            while t < target - 1e-14 * max(1.0, abs(target)):
                h = min(h, target - t)
                if h < 1e-14 * max(1.0, abs(t)):
                    raise IntegrationError(f"step size underflow at t = {t:.6e} μs")
                ks = [k1]
                for s in range(6):
                    y = psi + h * sum(a * k for a, k in zip(_DP_A[s], ks) if a != 0.0)
                    ks.append(f(t + _DP_C[s + 1] * h, y))
                ynew = psi + h * sum(a * k for a, k in zip(_DP_A[5], ks) if a != 0.0)
                errv = h * sum(e * k for e, k in zip(_DP_E, ks) if e != 0.0)
                enorm = float(np.abs(errv).max()) / config.tolerance
                if enorm <= 1.0:
                    t += h
                    psi = ynew
                    k1 = ks[6]
                    steps += 1
                    tr_err = abs(float(np.real(np.vdot(psi, psi))) - 1.0)
                    drift = max(drift, tr_err)
                    _check_trace(tr_err, t, steps)
                else:
                    rejected += 1
                factor = 0.9 * enorm ** (-0.2) if enorm > 0 else 5.0
                h *= min(5.0, max(0.2, factor))
            rec.state(target, psi)
    wall = time.perf_counter() - start

    times, traces, pops, photons, _, fids = rec.arrays()
    metrics = {
        "trace_error": abs(float(np.real(np.vdot(psi, psi))) - 1.0),
        "hermiticity_defect": 0.0,
        "max_sample_hermiticity": 0.0,
        "min_eigenvalue": 0.0,
        "rejected_steps": rejected,
    }
    return SimulationResult(
        final_rho=None, final_state=psi, times=times, traces=traces,
        qutrit_pops=pops, mean_photons=photons, purities=None,
        fidelities=fids, step_count=steps, wall_time=wall,
        trace_drift=drift, method=method, final_metrics=metrics)


def expm_oracle(h_const, t: float, psi: np.ndarray) -> np.ndarray:
    """e^{−iHt}ψ by dense scaling-and-squaring; small constant H only."""
    if sparse.issparse(h_const):
        h = h_const.toarray()
    else:
        h = np.asarray(h_const, dtype=complex)
    if h.shape[0] > 1000:
        raise ValueError(f"dimension {h.shape[0]} exceeds the oracle cap of 1000")
    u = expm(-1j * t * h)
    return u @ np.asarray(psi, dtype=complex)
