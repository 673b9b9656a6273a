"""Second-order truncated cumulant expansion (TCE) of the lattice dynamics.

The state holds every one-site moment ``<T_i^{ab}>`` and two-site moment
``<T_i^{ab} T_j^{cd}>``.  Internally these are kept as reduced density
matrices (``<T^{ab}> = rho[b, a]``), on which the Heisenberg equations take a
compact form.  Three-site moments entering the two-site equations are closed
by setting third cumulants to zero,

    <ABC> = <AB><C> + <AC><B> + <BC><A> - 2 <A><B><C>,

which, after the trace over the third site, leaves only products of one-site
matrices with connected two-site reductions.  One- and two-site terms are
kept exactly, so a pair of spins evolves exactly and ``J = 0`` reproduces the
isolated-spin dynamics.

Two storage layouts:

* ``"translation"``: periodic lattices, one site matrix and one pair matrix
  per displacement class ``{r, -r}``;
* ``"full"``: any lattice, one matrix per site and per unordered pair.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .lattice import CouplingTable, LatticeSpec, build_couplings
from .moments import CollectiveMoments, Series, squeezing_from_moments, validity_ratio
from .spin import coherent_state, spin_operators

log = logging.getLogger(__name__)

XXZ = np.array([-0.5, -0.5, 1.0])
CHECKPOINT_VERSION = 1

STOP_REASONS = ("end-of-grid", "R-maximum", "diluteness-breach", "negative-variance", "numerical-abort")


@dataclass
class CumulantState:
    """Moments of the TCE at one instant.

    ``rho1``: ``(d, d)`` (translation layout) or ``(N, d, d)``.
    ``rho2``: ``(P, d, d, d, d)`` pair matrices with axes ``(a, b, a', b')``
    for ``<a b| rho_ij |a' b'>``.
    """

    rho1: np.ndarray
    rho2: np.ndarray
    time: float = 0.0

    def copy(self) -> "CumulantState":
        return CumulantState(self.rho1.copy(), self.rho2.copy(), self.time)

    def singles(self) -> np.ndarray:
        """``<T^{ab}>`` with axes ``(..., a, b)``."""
        return np.swapaxes(self.rho1, -1, -2)

    def pairs(self) -> np.ndarray:
        """``<T_i^{ab} T_j^{cd}>`` with axes ``(p, a, b, c, d)``."""
        return np.einsum("pbdac->pabcd", self.rho2)


def _kron4(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched ``A (x) B`` as 4-tensors ``(a, b, a', b')``."""
    return A[..., :, None, :, None] * B[..., None, :, None, :]


def _pair_matrix(R: np.ndarray) -> np.ndarray:
    d = R.shape[-1]
    return R.reshape(R.shape[:-4] + (d * d, d * d))


def _swap(R: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.swapaxes(R, -4, -3), -2, -1)


class TceModel:
    """Equations of motion for one lattice, compiled once.

    All operator algebra is fixed per ``(S, lattice)``; each call to
    :meth:`rhs` only contracts the current moments with precomputed
    operators and coupling matrices.
    """

    def __init__(self, spec: LatticeSpec, table: CouplingTable | None = None, layout: str | None = None):
        self.spec = spec
        self.table = table or build_couplings(spec)
        if layout is None:
            layout = "translation" if spec.periodic else "full"
        if layout == "translation" and not spec.periodic:
            raise ValueError("translation layout requires a periodic lattice")
        if layout not in ("translation", "full"):
            raise ValueError(f"unknown layout {layout!r}")
        self.layout = layout
        sm = spin_operators(spec.S)
        d = self.d = spec.dim
        self.Smu = np.stack(sm.xyz())
        self.h = spec.B_q * (sm.Sz @ sm.Sz)
        eye = np.eye(d)
        self.V2 = sum(c * np.kron(s, s) for c, s in zip(XXZ, self.Smu))
        self.h2 = np.kron(self.h, eye) + np.kron(eye, self.h)
        self._h2diag = np.real(np.diag(self.h2)).copy()
        self.S_left = np.stack([np.kron(s, eye) for s in self.Smu])
        self.S_right = np.stack([np.kron(eye, s) for s in self.Smu])
        # pair products S^mu (x) S^nu as 4-tensors for second moments
        self.SS = np.stack([[_kron4(a, b) for b in self.Smu] for a in self.Smu])
        self._St = np.ascontiguousarray(self.Smu.transpose(2, 1, 0).reshape(d * d, 3))
        if layout == "translation":
            self._setup_translation()
        else:
            self._setup_full()

    # ------------------------------------------------------------------ setup
    def _setup_translation(self):
        L, N = self.spec.L, self.spec.N
        Dflat = self.table.Ddisp.reshape(-1)
        r = np.arange(N)
        rx, ry = np.divmod(r, L)
        neg = ((-rx) % L) * L + ((-ry) % L)
        reps = np.array([k for k in range(1, N) if k <= neg[k]])
        self.reps = reps
        self.neg = neg
        self.self_inverse = neg[reps] == reps
        self.weight = np.where(self.self_inverse, 1.0, 2.0)
        self.Drep = Dflat[reps]
        self.D0 = Dflat.sum()
        # W[r, q] = D(r + q): F(r) = sum_k D(k) C(k - r) = sum_q W[r, q] C(q)
        qx, qy = np.divmod(r, L)
        Wfull = Dflat[(((rx[:, None] + qx[None, :]) % L) * L + (ry[:, None] + qy[None, :]) % L)]
        self.W_plus = Wfull[reps]
        self.W_minus = Wfull[neg[reps]]
        self.Dflat = Dflat

    def _setup_full(self):
        N = self.spec.N
        iu, ju = np.triu_indices(N, 1)
        self.pi, self.pj = iu, ju
        self.Dpair = self.table.D[iu, ju]
        self.Dmat = self.table.D

    # ------------------------------------------------------------ state setup
    def initial_state(self) -> CumulantState:
        """Coherent state along ``x``: pair matrices are products of singles."""
        psi = coherent_state(self.spec.S, (1.0, 0.0, 0.0))
        rho = np.outer(psi, psi.conj())
        pair = _kron4(rho, rho)
        if self.layout == "translation":
            P = len(self.reps)
            return CumulantState(rho.copy(), np.broadcast_to(pair, (P,) + pair.shape).copy(), 0.0)
        N = self.spec.N
        P = len(self.pi)
        return CumulantState(
            np.broadcast_to(rho, (N,) + rho.shape).copy(),
            np.broadcast_to(pair, (P,) + pair.shape).copy(),
            0.0,
        )

    # -------------------------------------------------------------- helpers
    def _reductions(self, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``Tr_2[(1 x S) rho]`` and ``Tr_1[(S x 1) rho]`` for every pair and component."""
        P, d = R.shape[0], self.d
        # St[(c, b), m] = S^m[b, c]
        left = (R.transpose(0, 1, 3, 2, 4).reshape(P * d * d, d * d) @ self._St).reshape(P, d, d, 3)
        right = (R.transpose(0, 2, 4, 1, 3).reshape(P * d * d, d * d) @ self._St).reshape(P, d, d, 3)
        return left.transpose(0, 3, 1, 2), right.transpose(0, 3, 1, 2)

    @staticmethod
    def _outer_ops(A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """``sum_m A[., m] (x) B[., m]`` as pair 4-tensors ``(p, a, b, c, d)``.

        ``A`` and ``B`` have shape ``(P, 3, d, d)`` or ``(3, d, d)`` (shared).
        """
        if A.ndim == 3:
            out = np.tensordot(B, A, axes=([1], [0]))  # (P, b, d, a, c)
            return out.transpose(0, 3, 1, 4, 2)
        if B.ndim == 3:
            out = np.tensordot(A, B, axes=([1], [0]))  # (P, a, c, b, d)
            return out.transpose(0, 1, 3, 2, 4)
        P, d = A.shape[0], A.shape[-1]
        # batched: (P, ac, m) @ (P, m, bd)
        out = A.reshape(P, 3, d * d).transpose(0, 2, 1) @ B.reshape(P, 3, d * d)
        return out.reshape(P, d, d, d, d).transpose(0, 1, 3, 2, 4)

    def _pair_commutator(self, R, coupling, ML, MR) -> np.ndarray:
        """``[H_p, R_p]`` for ``H_p = h2 + coupling_p V2 + ML_p (x) 1 + 1 (x) MR_p``.

        Both ``H_p`` and ``R_p`` are Hermitian, so the commutator is
        ``X^dag - X`` with ``X = R_p H_p``; only the right product is formed.
        """
        P, d = R.shape[0], self.d
        D = d * d
        Rm = R.reshape(P, D, D)
        X = Rm * self._h2diag[None, None, :]
        X += coupling[:, None, None] * (Rm.reshape(P * D, D) @ self.V2).reshape(P, D, D)
        # R (ML (x) 1): contract the a' leg; R (1 (x) MR): the b' leg
        XL = np.matmul(R.transpose(0, 1, 2, 4, 3), ML[:, None, None] if ML.ndim == 3 else ML)
        X += XL.transpose(0, 1, 2, 4, 3).reshape(P, D, D)
        X += np.matmul(R, MR[:, None, None] if MR.ndim == 3 else MR).reshape(P, D, D)
        return (np.swapaxes(X, -1, -2).conj() - X).reshape(R.shape)

    def _comm(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return A @ B - B @ A

    # ------------------------------------------------------------------ rhs
    def rhs(self, state: CumulantState) -> CumulantState:
        if self.layout == "translation":
            d1, d2 = self._rhs_translation(state.rho1, state.rho2)
        elif state.rho2.shape[0] == 0:
            # no pairs: only the on-site term acts
            d1, d2 = -1j * self._comm(self.h[None], state.rho1), np.zeros_like(state.rho2)
        else:
            d1, d2 = self._rhs_full(state.rho1, state.rho2)
        return CumulantState(d1, d2, 1.0)

    def _rhs_translation(self, rho, R):
        J, d = self.spec.J, self.d
        Smu = self.Smu
        m = np.real(np.einsum("mab,ba->m", Smu, rho))
        left, right = self._reductions(R)  # (P, 3, d, d)
        # one-site equation: exact
        w = self.weight
        sig_tot = np.einsum("p,pmab->mab", self.Drep, left + np.where(self.self_inverse, 0.0, 1.0)[:, None, None, None] * right)
        eff = np.einsum("m,mab->ab", XXZ, self._comm(Smu, sig_tot))
        d1 = -1j * (self._comm(self.h, rho) + J * eff)

        # connected reductions C(r) and C(-r) for the representatives
        CL = left - m[None, :, None, None] * rho
        CR = right - m[None, :, None, None] * rho
        N = self.spec.N
        Call = np.zeros((N, 3, d, d), dtype=complex)
        Call[self.reps] = CL
        Call[self.neg[self.reps]] = CR
        P_tot = np.einsum("q,qmab->mab", self.Dflat, Call)
        Cflat = Call.reshape(N, -1)
        F = (self.W_plus @ Cflat).reshape(-1, 3, d, d)
        G = (self.W_minus @ Cflat).reshape(-1, 3, d, d)

        comP = self._comm(Smu, P_tot)  # (3, d, d)
        comR = self._comm(Smu, rho)  # (3, d, d)
        Dr = self.Drep[:, None, None, None]
        XL = np.einsum("m,pmab->pab", XXZ, comP[None] - Dr * self._comm(Smu[None], CL))
        XR = np.einsum("m,pmab->pab", XXZ, comP[None] - Dr * self._comm(Smu[None], CR))
        Y = _kron4(XL, rho[None]) + _kron4(rho[None], XR)
        xcomR = XXZ[:, None, None] * comR
        Y += self._outer_ops(xcomR, F)
        Y += self._outer_ops(G, xcomR)

        # two-site Hamiltonian plus the mean field of all other sites
        Mop = np.einsum("m,m,mab->ab", XXZ, m, Smu)
        f = J * (self.D0 - self.Drep)
        comm = self._pair_commutator(R, J * self.Drep, f[:, None, None] * Mop, f[:, None, None] * Mop)
        d2 = -1j * (comm + J * Y)
        return d1, d2

    def _rhs_full(self, rho, R):
        J, d, N = self.spec.J, self.d, self.spec.N
        Smu = self.Smu
        pi, pj, Dp = self.pi, self.pj, self.Dpair
        m = np.real(np.einsum("mab,iba->im", Smu, rho))  # (N, 3)
        left, right = self._reductions(R)  # left: op on i given j; right: op on j given i
        sig = np.zeros((N, N, 3, d, d), dtype=complex)
        sig[pi, pj] = left
        sig[pj, pi] = right
        sig_tot = np.einsum("ik,ikmab->imab", self.Dmat, sig)
        eff = np.einsum("m,imab->iab", XXZ, self._comm(Smu[None], sig_tot))
        d1 = -1j * (self._comm(self.h[None], rho) + J * eff)

        C = sig - m[None, :, :, None, None] * rho[:, None, None, :, :]
        C[np.arange(N), np.arange(N)] = 0.0
        Ptot = np.einsum("ik,ikmab->imab", self.Dmat, C)  # (N, 3, d, d)
        Q = np.einsum("ik,jkmab->ijmab", self.Dmat, C)  # operator on j

        comR = self._comm(Smu[None], rho[:, None])  # (N, 3, d, d)
        Dr = Dp[:, None, None, None]
        XL = np.einsum("m,pmab->pab", XXZ, self._comm(Smu[None], Ptot[pi] - Dr * C[pi, pj]))
        XR = np.einsum("m,pmab->pab", XXZ, self._comm(Smu[None], Ptot[pj] - Dr * C[pj, pi]))
        Y = _kron4(XL, rho[pj]) + _kron4(rho[pi], XR)
        xcomR = XXZ[None, :, None, None] * comR
        Y += self._outer_ops(xcomR[pi], Q[pi, pj])
        Y += self._outer_ops(Q[pj, pi], xcomR[pj])

        Dm = self.Dmat @ m  # (N, 3)
        a = Dm[pi] - Dp[:, None] * m[pj]
        b = Dm[pj] - Dp[:, None] * m[pi]
        ML = J * np.einsum("pm,m,mab->pab", a, XXZ, Smu)
        MR = J * np.einsum("pm,m,mab->pab", b, XXZ, Smu)
        comm = self._pair_commutator(R, J * Dp, ML, MR)
        d2 = -1j * (comm + J * Y)
        return d1, d2

    # ---------------------------------------------------------- observables
    def energy(self, state: CumulantState) -> float:
        J = self.spec.J
        Rm = _pair_matrix(state.rho2)
        pair_e = np.real(np.einsum("ab,pba->p", self.V2, Rm))
        if self.layout == "translation":
            N = self.spec.N
            e1 = np.real(np.trace(self.h @ state.rho1))
            return float(N * (e1 + 0.5 * J * np.sum(self.weight * self.Drep * pair_e)))
        e1 = np.real(np.einsum("ab,iba->", self.h, state.rho1))
        return float(e1 + J * np.sum(self.Dpair * pair_e))

    def observables(self, state: CumulantState) -> tuple[np.ndarray, np.ndarray]:
        """``(<J^mu>, <J^mu J^nu>)`` with symmetrized second moments."""
        Smu = self.Smu
        SS1 = np.einsum("mab,nbc->mnac", Smu, Smu)
        pair_mom = np.real(np.einsum("mnabcd,pcdab->pmn", self.SS, state.rho2))
        pair_mom = pair_mom + np.swapaxes(pair_mom, 1, 2)
        if self.layout == "translation":
            N = self.spec.N
            mean = N * np.real(np.einsum("mab,ba->m", Smu, state.rho1))
            on_site = N * np.real(np.einsum("mnab,ba->mn", SS1, state.rho1))
            w = np.where(self.self_inverse, 0.5, 1.0)
            second = on_site + N * np.einsum("p,pmn->mn", w, pair_mom)
        else:
            mean = np.real(np.einsum("mab,iba->m", Smu, state.rho1))
            on_site = np.real(np.einsum("mnab,iba->mn", SS1, state.rho1))
            second = on_site + pair_mom.sum(axis=0)
        second = (second + second.T) / 2
        return mean, second

    def moments(self, state: CumulantState) -> tuple[CollectiveMoments, float]:
        mean, second = self.observables(state)
        cov = second[1:, 1:] - np.outer(mean[1:], mean[1:])
        J2 = float(np.trace(second))
        return CollectiveMoments(mean[0], cov, J2), float(mean[1] ** 2 + mean[2] ** 2)

    # ------------------------------------------------------------ invariants
    def invariant_violation(self, state: CumulantState) -> float:
        """Largest deviation from trace, Hermiticity and marginal consistency."""
        r1, R = state.rho1, state.rho2
        Rm = _pair_matrix(R)

        def worst(x):
            return float(np.max(np.abs(x))) if x.size else 0.0

        errs = [
            worst(np.trace(r1, axis1=-2, axis2=-1) - 1),
            worst(r1 - np.swapaxes(r1, -1, -2).conj()),
            worst(Rm - np.swapaxes(Rm, -1, -2).conj()),
        ]
        marg_l = np.einsum("pabcb->pac", R)
        marg_r = np.einsum("pabad->pbd", R)
        if self.layout == "translation":
            errs.append(worst(marg_l - r1[None]))
            errs.append(worst(marg_r - r1[None]))
            errs.append(worst(R[self.self_inverse] - _swap(R[self.self_inverse])))
        else:
            errs.append(worst(marg_l - r1[self.pi]))
            errs.append(worst(marg_r - r1[self.pj]))
        return max(errs)

    def connected_pairs(self, state: CumulantState) -> np.ndarray:
        r1 = state.rho1
        if self.layout == "translation":
            return state.rho2 - _kron4(r1, r1)[None]
        return state.rho2 - _kron4(r1[self.pi], r1[self.pj])


def _axpy(state: CumulantState, k: CumulantState, h: float) -> CumulantState:
    return CumulantState(state.rho1 + h * k.rho1, state.rho2 + h * k.rho2, state.time + h)


def rk4_step(model: TceModel, state: CumulantState, dt: float) -> CumulantState:
    k1 = model.rhs(state)
    k2 = model.rhs(_axpy(state, k1, dt / 2))
    k3 = model.rhs(_axpy(state, k2, dt / 2))
    k4 = model.rhs(_axpy(state, k3, dt))
    rho1 = state.rho1 + dt / 6 * (k1.rho1 + 2 * k2.rho1 + 2 * k3.rho1 + k4.rho1)
    rho2 = state.rho2 + dt / 6 * (k1.rho2 + 2 * k2.rho2 + 2 * k3.rho2 + k4.rho2)
    return CumulantState(rho1, rho2, state.time + dt)


def default_dt(spec: LatticeSpec, table: CouplingTable | None = None) -> float:
    table = table or build_couplings(spec, dense=False)
    scale = max(abs(spec.J) * table.sumD / spec.N, abs(spec.B_q))
    return 1e-3 / scale if scale > 0 else 1e-3


def converge_dt(
    model: TceModel, dt0: float | None = None, probe_time: float | None = None, tol: float = 1e-8, max_halvings: int = 8
) -> float:
    """Halve ``dt`` until the probe-window end moments change by less than ``tol``.

    Moments are compared per spin (``<J^x>`` and the covariance divided by
    ``N S``); the probe window defaults to 200 steps of the starting ``dt``.
    """
    dt = dt0 or default_dt(model.spec, model.table)
    T = probe_time or 200 * dt
    scale = model.spec.N * model.spec.S

    def end(h):
        st = model.initial_state()
        n = max(1, int(round(T / h)))
        for _ in range(n):
            st = rk4_step(model, st, T / n)
        mom, _ = model.moments(st)
        return np.concatenate([[float(mom.mean_x)], np.ravel(mom.cov)]) / scale

    prev = end(dt)
    for _ in range(max_halvings):
        cur = end(dt / 2)
        if np.max(np.abs(cur - prev)) < tol:
            return dt
        dt, prev = dt / 2, cur
    log.warning("dt not converged to %g after %d halvings; using %g", tol, max_halvings, dt)
    return dt


@dataclass
class MonitorOptions:
    stop_on_r_max: bool = True
    stop_on_negative_variance: bool = True
    r_decreasing_samples: int = 3
    negative_variance_tol: float = 1e-9
    check_invariants: bool = True


@dataclass
class TceRunReport:
    series: Series
    stop_reason: str
    stop_time: float
    energy_drift: float
    R: np.ndarray
    invariant_violation: float
    steps: int
    dt: float
    message: str = ""
    final_state: CumulantState | None = field(default=None, repr=False)

    @property
    def xi2(self) -> np.ndarray:
        return self.series.squeezing.xi2


class RMaxMonitor:
    """Flags the first maximum of ``R(t)`` after a rise from its initial value.

    The maximum is confirmed once ``n_dec`` consecutive samples decrease.
    """

    def __init__(self, n_dec: int = 3, rise_tol: float = 1e-9):
        self.n_dec = n_dec
        self.rise_tol = rise_tol
        self.R0 = None
        self.prev = None
        self.peak_idx = None
        self.risen = False
        self.count = 0
        self.disabled = False

    def update(self, i: int, R: float) -> int | None:
        """Feed sample ``i``; returns the index of the confirmed maximum, if any."""
        if self.disabled:
            return None
        if not np.isfinite(R):
            self.disabled = True
            return None
        if self.R0 is None:
            self.R0 = self.prev = R
            self.peak_idx = i
            return None
        if R > self.prev:
            self.count = 0
            self.peak_idx = i
            if R > self.R0 + self.rise_tol:
                self.risen = True
        elif R < self.prev and self.risen:
            self.count += 1
            if self.count >= self.n_dec:
                return self.peak_idx
        self.prev = R
        return None


def integrate(
    model: TceModel,
    t_end: float,
    dt: float | None = None,
    state: CumulantState | None = None,
    monitor: MonitorOptions | None = None,
    record_every: int = 1,
) -> TceRunReport:
    """Classic RK4 from ``state`` (default: the coherent state) to ``t_end``."""
    spec = model.spec
    monitor = monitor or MonitorOptions()
    dt = dt or default_dt(spec, model.table)
    if dt <= 0:
        raise ValueError("dt must be positive")
    state = state or model.initial_state()
    nsteps = int(round((t_end - state.time) / dt))
    N, S = spec.N, spec.S

    ts, mx, covs, es, j2s = [], [], [], [], []
    rmon = RMaxMonitor(monitor.r_decreasing_samples)
    worst_inv = 0.0
    stop, message, keep = "end-of-grid", "", None

    def record(st: CumulantState):
        mom, _ = model.moments(st)
        ts.append(st.time)
        mx.append(float(mom.mean_x))
        covs.append(mom.cov)
        es.append(model.energy(st))
        j2s.append(float(mom.total_J2))
        return mom

    record(state)
    rmon.update(0, float(validity_ratio(CollectiveMoments(mx[0], covs[0]))))
    step = 0
    t0 = state.time
    for step in range(1, nsteps + 1):
        state = rk4_step(model, state, dt)
        state.time = t0 + step * dt  # no accumulated rounding in the time axis
        if step % record_every and step != nsteps:
            continue
        if not (np.all(np.isfinite(state.rho1)) and np.all(np.isfinite(state.rho2))):
            stop, message = "numerical-abort", f"non-finite moments at t={state.time:.6g}"
            log.error(message)
            break
        mom = record(state)
        if monitor.check_invariants:
            worst_inv = max(worst_inv, model.invariant_violation(state))
        vmin, _ = mom.eigvals()
        if monitor.stop_on_negative_variance and vmin < -monitor.negative_variance_tol * N * S:
            stop, message = "negative-variance", f"Var(J^min) = {float(vmin):.3g} at t={state.time:.6g}"
            break
        i = len(ts) - 1
        peak = rmon.update(i, float(validity_ratio(mom)))
        if monitor.stop_on_r_max and peak is not None:
            stop, keep = "R-maximum", peak + 1
            break

    series = Series(np.array(ts), np.array(mx), np.array(covs), np.array(es), np.array(j2s), N, S)
    if keep is not None:
        series = series.truncate(keep)
    e0 = series.energy[0]
    denom = abs(e0) if e0 != 0 else 1.0
    drift = float(np.max(np.abs(np.array(es) - e0)) / denom)
    return TceRunReport(
        series=series,
        stop_reason=stop,
        stop_time=float(series.t[-1]),
        energy_drift=drift,
        R=series.R,
        invariant_violation=worst_inv,
        steps=step,
        dt=dt,
        message=message,
        final_state=state,
    )


def run_tce(spec: LatticeSpec, t_end: float, dt: float | None = None, layout: str | None = None, **kw) -> TceRunReport:
    return integrate(TceModel(spec, layout=layout), t_end, dt=dt, **kw)


# ------------------------------------------------------------- checkpoints
def save_checkpoint(path, model: TceModel, state: CumulantState) -> None:
    """Write moments in the T-operator convention (flat index ``a*(2S+1)+b``)."""
    d = model.d
    meta = dict(
        version=CHECKPOINT_VERSION,
        layout=model.layout,
        time=state.time,
        L=model.spec.L,
        S=model.spec.S,
        J=model.spec.J,
        B_q=model.spec.B_q,
        boundary=model.spec.boundary,
    )
    singles = state.singles().reshape(state.rho1.shape[:-2] + (d * d,))
    pairs = state.pairs().reshape(-1, d * d, d * d)
    with open(path, "wb") as fh:
        np.savez(fh, meta=json.dumps(meta), singles=singles, pairs=pairs)


def load_checkpoint(path) -> tuple[dict, CumulantState]:
    with np.load(path) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        singles, pairs = z["singles"], z["pairs"]
    d = int(round(2 * meta["S"])) + 1
    rho1 = np.swapaxes(singles.reshape(singles.shape[:-1] + (d, d)), -1, -2)
    P = pairs.reshape(-1, d, d, d, d)
    rho2 = np.einsum("pabcd->pbdac", P)
    return meta, CumulantState(np.ascontiguousarray(rho1), np.ascontiguousarray(rho2), meta["time"])
