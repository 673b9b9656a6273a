"""Self-consistent single-site mean-field thermodynamics.

A two-sublattice (checkerboard) product-state ansatz covers uniform in-plane
order (XY ferromagnet), staggered ``z`` order (Neel) and the paramagnet.  Site
``i`` on sublattice ``s`` sees

    H_s = -h_s . S + B_q (S^z)**2,
    h^{x,y} = (J/2) sum_j D_ij <S_j^{x,y}>,   h^z = -J sum_j D_ij <S_j^z>,

and its energy is booked as ``<H_s> + h_s . <S_s> / 2`` so that pair terms
are not counted twice.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .lattice import LatticeSpec, build_couplings, check_spin
from .spin import spin_operators

log = logging.getLogger(__name__)

DEFAULT_L = 48


@dataclass
class MeanFieldState:
    mA: np.ndarray
    mB: np.ndarray
    T: float
    free_energy: float
    energy: float
    converged: bool
    iterations: int

    @property
    def m_xy(self) -> float:
        """Magnitude of the uniform in-plane magnetization per site."""
        avg = (self.mA + self.mB) / 2
        return float(np.hypot(avg[0], avg[1]))

    @property
    def m_stag(self) -> float:
        """Staggered ``z`` magnetization per site."""
        return float(abs(self.mA[2] - self.mB[2]) / 2)

    @property
    def phase(self) -> str:
        tol = 1e-6 * max(1.0, np.abs(self.mA).max())
        if self.m_xy > tol:
            return "xy-fm"
        if self.m_stag > tol:
            return "z-neel"
        return "para"


class MeanFieldModel:
    """Single-site problem for one ``(S, J, B_q)`` and a fixed lattice sum.

    ``D_same``/``D_opp`` are ``sum_j D_ij`` over the site's own and the other
    sublattice of an ``L x L`` periodic lattice (minimum image).
    """

    def __init__(self, S: float, B_q: float, J: float = 1.0, L: int = DEFAULT_L):
        self.S = check_spin(S)
        self.B_q = float(B_q)
        self.J = float(J)
        if L % 2:
            raise ValueError("two-sublattice ansatz needs an even L")
        self.L = L
        spec = LatticeSpec(L=L, S=self.S, J=J, B_q=B_q, boundary="periodic")
        Dd = build_couplings(spec, dense=False).Ddisp
        x, y = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
        same = (x + y) % 2 == 0
        self.D_same = float(Dd[same].sum())
        self.D_opp = float(Dd[~same].sum())
        ops = spin_operators(self.S)
        self.Svec = np.stack(ops.xyz())
        self.h0 = B_q * np.real(np.diag(ops.Sz @ ops.Sz))
        self.m = ops.m

    @property
    def D0(self) -> float:
        return self.D_same + self.D_opp

    @property
    def D_stag(self) -> float:
        return self.D_same - self.D_opp

    def with_field(self, B_q: float) -> "MeanFieldModel":
        new = object.__new__(MeanFieldModel)
        new.__dict__.update(self.__dict__)
        new.B_q = float(B_q)
        new.h0 = B_q * self.m**2
        return new

    # ----------------------------------------------------------- one site
    def fields(self, mA, mB):
        scale = np.array([0.5, 0.5, -1.0]) * self.J
        hA = scale * (self.D_same * mA + self.D_opp * mB)
        hB = scale * (self.D_same * mB + self.D_opp * mA)
        return hA, hB

    def _site(self, h, T):
        """``(<S>, -T log Z, <H_site>)`` for field ``h``; ``T = 0`` uses the ground state."""
        H = np.diag(self.h0).astype(complex) - np.einsum("m,mab->ab", h, self.Svec)
        E, V = np.linalg.eigh(H)
        if T <= 0:
            # equal weights over a degenerate ground manifold keep the symmetry of h
            w = (E - E[0] <= 1e-10 * max(1.0, abs(E[0]))).astype(float)
            w /= w.sum()
            g = E[0]
        else:
            x = -(E - E[0]) / T
            w = np.exp(x)
            Z = w.sum()
            w /= Z
            g = E[0] - T * np.log(Z)
        # <S> = sum_n w_n <n|S|n>
        amp = np.einsum("an,mab,bn->mn", V.conj(), self.Svec, V)
        m = np.real(amp @ w)
        return m, g, float(np.dot(w, E))

    def update(self, mA, mB, T):
        hA, hB = self.fields(mA, mB)
        a = self._site(hA, T)
        b = self._site(hB, T)
        return a, b, hA, hB

    # ------------------------------------------------------------- solve
    def solve(
        self, T: float, seed, eta: float = 0.5, tol: float = 1e-10, max_iter: int = 100_000, restrict: bool = False
    ) -> MeanFieldState:
        """Damped fixed-point iteration ``m <- (1 - eta) m + eta F(m)``.

        ``seed`` is ``(mA, mB)`` or one of ``"xy"``, ``"neel"``, ``"para"``.
        ``restrict`` keeps a named seed inside its symmetry sector (uniform
        in-plane, or staggered ``z``), so each branch can be followed where it
        is not the global attractor.
        """
        mA, mB = self._seed(seed)
        project = self._projector(seed) if restrict else None
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            (nA, _, _), (nB, _, _), _, _ = self.update(mA, mB, T)
            nA = (1 - eta) * mA + eta * nA
            nB = (1 - eta) * mB + eta * nB
            if project is not None:
                nA, nB = project(nA, nB)
            change = max(np.abs(nA - mA).max(), np.abs(nB - mB).max())
            mA, mB = nA, nB
            if change < tol:
                converged = True
                break
        if not converged:
            log.warning("mean field did not converge at T=%g, B_q=%g (seed %s)", T, self.B_q, seed)
        F, U = self.thermo(mA, mB, T)
        return MeanFieldState(mA, mB, float(T), F, U, converged, it)

    @staticmethod
    def _projector(seed):
        if seed == "xy":
            def proj(a, b):
                u = (a + b) / 2
                u[2] = 0.0
                return u, u.copy()
        elif seed == "neel":
            def proj(a, b):
                z = (a[2] - b[2]) / 2
                return np.array([0.0, 0.0, z]), np.array([0.0, 0.0, -z])
        elif seed == "para":
            def proj(a, b):
                return np.zeros(3), np.zeros(3)
        else:
            raise ValueError("restrict needs a named seed")
        return proj

    def _seed(self, seed):
        S = self.S
        if isinstance(seed, str):
            if seed == "xy":
                return np.array([S, 0.0, 0.0]), np.array([S, 0.0, 0.0])
            if seed == "neel":
                return np.array([0.0, 0.0, S]), np.array([0.0, 0.0, -S])
            if seed == "para":
                return np.zeros(3), np.zeros(3)
            raise ValueError(f"unknown seed {seed!r}")
        mA, mB = seed
        return np.asarray(mA, dtype=float), np.asarray(mB, dtype=float)

    def thermo(self, mA, mB, T) -> tuple[float, float]:
        """Free energy and energy per site, with the double-counting correction."""
        (_, gA, uA), (_, gB, uB), hA, hB = self.update(mA, mB, T)
        corrA, corrB = np.dot(hA, mA) / 2, np.dot(hB, mB) / 2
        F = (gA + corrA + gB + corrB) / 2
        U = (uA + corrA + uB + corrB) / 2
        return float(F), float(U)

    def equilibrium(self, T: float, **kw) -> MeanFieldState:
        """Lowest-free-energy converged branch among the ordered and paramagnetic seeds."""
        states = [self.solve(T, s, **kw) for s in ("xy", "neel", "para")]
        states += [self.solve(T, s, restrict=True, **kw) for s in ("xy", "neel")]
        ok = [st for st in states if st.converged] or states
        return min(ok, key=lambda st: st.free_energy)

    # ------------------------------------------------- paramagnet response
    def _para_weights(self, T):
        E = self.h0
        if T <= 0:
            w = (E == E.min()).astype(float)
        else:
            w = np.exp(-(E - E.min()) / T)
        return E, w / w.sum()

    def para_energy(self, T: float) -> float:
        E, w = self._para_weights(T)
        return float(np.dot(w, E))

    def chi_xx(self, T: float) -> float:
        """Static single-site susceptibility of the paramagnet along ``x``."""
        E, p = self._para_weights(T)
        Sx2 = np.abs(self.Svec[0]) ** 2
        dE = E[None, :] - E[:, None]
        dp = p[:, None] - p[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(np.abs(dE) > 1e-12, dp / np.where(np.abs(dE) > 1e-12, dE, 1.0), p[:, None] / T if T > 0 else 0.0)
        if T <= 0 and np.any((np.abs(dE) <= 1e-12) & (Sx2 > 0) & (p[:, None] > 0)):
            return np.inf
        return float(np.sum(Sx2 * term))

    def chi_zz(self, T: float) -> float:
        E, p = self._para_weights(T)
        if T <= 0:
            return 0.0 if np.all(self.m[p > 0] == 0) else np.inf
        return float(np.dot(p, self.m**2) / T)

    def css_energy(self) -> float:
        """Energy per site of the ``x``-polarized coherent state."""
        return -self.J * self.S**2 * self.D0 / 4 + self.B_q * self.S / 2


# ---------------------------------------------------------------- T_c
def _linear_tc(model: MeanFieldModel, kind: str, T_max: float) -> float | None:
    if kind == "xy":
        f = lambda T: model.J * model.D0 / 2 * model.chi_xx(T) - 1
    elif kind == "neel":
        f = lambda T: -model.J * model.D_stag * model.chi_zz(T) - 1
    else:
        raise ValueError(f"kind must be 'xy' or 'neel', got {kind!r}")
    lo = 1e-6 * T_max
    if f(lo) <= 0:
        return None
    if f(T_max) > 0:
        raise ValueError(f"order persists beyond T={T_max}")
    return float(brentq(f, lo, T_max, xtol=1e-12 * T_max))


def critical_temperature(
    model: MeanFieldModel, kind: str = "xy", T_max: float | None = None, check: bool = True
) -> float | None:
    """Ordering temperature of the ``kind`` phase (``None`` if no order).

    The continuous transition is located where the paramagnet becomes unstable
    in the ordering channel.  With ``check``, the self-consistent solution from
    an ordered seed is verified just below and above (a first-order jump would
    leave order above the linear-response point; the ordered branch is then
    followed by bisection on the free energy).
    """
    T_max = T_max or 4 * model.J * model.D0 * model.S * (model.S + 1) + 10 * abs(model.B_q)
    tc = _linear_tc(model, kind, T_max)
    if tc is None or not check:
        return tc
    seed = "xy" if kind == "xy" else "neel"
    order = (lambda st: st.m_xy) if kind == "xy" else (lambda st: st.m_stag)
    tol = 1e-3 * model.S
    above = model.solve(1.02 * tc, seed, max_iter=20000)
    if order(above) <= tol:
        return tc
    # first-order: the ordered branch survives; bisect on its free-energy advantage
    para = lambda T: model.solve(T, "para").free_energy

    def ordered_wins(T):
        st = model.solve(T, seed, max_iter=20000)
        return order(st) > tol and st.free_energy < para(T) - 1e-12

    lo, hi = tc, 1.02 * tc
    while ordered_wins(hi):
        lo, hi = hi, 1.5 * hi
    for _ in range(50):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if ordered_wins(mid) else (lo, mid)
        if hi - lo < 1e-8 * hi:
            break
    return (lo + hi) / 2


def t_css(model: MeanFieldModel, T_max: float | None = None) -> float | None:
    """Temperature whose equilibrium energy equals the coherent-state energy.

    The equilibrium energy is increasing in ``T``; ``None`` if the target is
    outside ``[U(0), U(T_max)]``.
    """
    T_max = T_max or 4 * model.J * model.D0 * model.S * (model.S + 1) + 10 * abs(model.B_q)
    target = model.css_energy()
    f = lambda T: model.equilibrium(T).energy - target
    if f(1e-9 * T_max) > 0 or f(T_max) < 0:
        return None
    return float(brentq(f, 1e-9 * T_max, T_max, xtol=1e-9))


# ------------------------------------------------------ phase boundaries
@dataclass
class PhaseBoundaries:
    S: float
    B_qm: float | None
    B_qc: float | None
    B_qp: float | None


def ground_branch(model: MeanFieldModel, seed: str) -> MeanFieldState:
    """``T = 0`` solution restricted to the symmetry sector of ``seed``."""
    return model.solve(0.0, seed, restrict=True)


def neel_boundary(model: MeanFieldModel, window=(-5.0, -1e-3)) -> float | None:
    """``B_q`` where the ``T = 0`` Neel and XY branches cross in energy."""

    def gap(bq):
        m = model.with_field(bq)
        return ground_branch(m, "xy").energy - ground_branch(m, "neel").energy

    lo, hi = window
    if gap(lo) * gap(hi) > 0:
        return None
    return float(brentq(gap, lo, hi, xtol=1e-10))


def paramagnet_boundary(model: MeanFieldModel, window=(1e-3, 1e4)) -> float | None:
    """Smallest ``B_q > 0`` at which ``T = 0`` in-plane order vanishes.

    Located at the ``T = 0`` instability of the ``m = 0`` paramagnet (integer
    ``S``); for half-integer ``S`` the ground doublet always orders.
    """
    if (2 * model.S) % 2 == 1:
        return None

    def f(bq):
        return model.J * model.D0 / 2 * model.with_field(bq).chi_xx(0.0) - 1

    lo, hi = window
    if f(lo) <= 0 or f(hi) >= 0:
        return None
    return float(brentq(f, lo, hi, xtol=1e-10))


def critical_field(model: MeanFieldModel, window=(1.0, None)) -> float | None:
    """``B_q`` at which the XY ``T_c`` meets ``T_CSS``.

    At the XY transition the equilibrium state is the paramagnet, so the
    condition is ``U_para(T_c(B_q)) = E_CSS(B_q)``.
    """
    hi = window[1] or (paramagnet_boundary(model) or 1e3) * 0.999

    def f(bq):
        m = model.with_field(bq)
        tc = critical_temperature(m, "xy", check=False)
        if tc is None:
            return -np.inf  # no order left: T_CSS is above
        return m.para_energy(tc) - m.css_energy()

    lo = window[0]
    grid = np.linspace(lo, hi, 60)
    vals = np.array([f(b) for b in grid])
    # T_c above T_CSS at small B_q (f > 0); first sign change
    idx = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if idx.size == 0:
        return None
    k = idx[0]
    return float(brentq(f, grid[k], grid[k + 1], xtol=1e-10))


def phase_boundaries(S: float, J: float = 1.0, L: int = DEFAULT_L) -> PhaseBoundaries:
    model = MeanFieldModel(S, 0.0, J=J, L=L)
    return PhaseBoundaries(S, neel_boundary(model), critical_field(model), paramagnet_boundary(model))


@dataclass
class PhaseRow:
    B_q: float
    T_c_xy: float | None
    T_c_neel: float | None
    T_css: float | None
    m_xy: float | None
    m_stag: float | None


def phase_diagram(S: float, B_q_values, J: float = 1.0, L: int = DEFAULT_L) -> list[PhaseRow]:
    """``T_c`` of both orders and ``T_CSS`` along ``B_q``; order parameters at ``T_CSS``."""
    base = MeanFieldModel(S, 0.0, J=J, L=L)
    rows = []
    for bq in B_q_values:
        m = base.with_field(float(bq))
        tcx = critical_temperature(m, "xy")
        tcn = critical_temperature(m, "neel")
        tc = t_css(m)
        st = m.equilibrium(tc) if tc is not None else None
        rows.append(
            PhaseRow(float(bq), tcx, tcn, tc, st.m_xy if st else None, st.m_stag if st else None)
        )
    return rows
