"""Open-loop Nash equilibrium trajectories via the coupled state/costate system.

Stacking opinions x and costates p gives a linear two-point boundary value
problem

    d/dt [x; p] = [[0, -I], [-W, 0]] [x; p] + [[0, 0], [K, 0]] [x0; p0],

with x(0) = x0 fixed and p(T) = 0 free-endpoint.  Two evaluation routes are
provided:

* a general route that reads the transition blocks off augmented matrix
  exponentials and solves for p(0) at the horizon, exact for arbitrary W;
* a spectral route used whenever W has a trustworthy real eigendecomposition,
  which collapses the block formula to per-mode cosh/sinh ratios.  The ratios
  are evaluated in exponential-difference form, so this route stays accurate
  for stiff instances where cosh(sqrt(lambda) T) dwarfs float64 resolution
  and the general route would cancel catastrophically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SingularMatrixError, exp_with_integral, solve_linear
from .network import (CompleteUniform, GameMatrices, InfluenceNetwork,
                      SingleLeader, build_matrices, classify_topology)

# |lambda| t^2 below this uses the power series; keeps kernels continuous at 0.
_SERIES_CUTOFF = 1e-6
# sqrt(lambda) * horizon above this switches ratios to exponential form.
_EXP_FORM_CUTOFF = 30.0


# ---------------------------------------------------------------------------
# scalar kernels: entire functions of z = lambda * t^2


def _k0(z):
    """cosh(sqrt(z)) continued through z <= 0."""
    z = np.asarray(z, dtype=float)
    return np.piecewise(
        z,
        [np.abs(z) < _SERIES_CUTOFF, z >= _SERIES_CUTOFF],
        [
            lambda s: 1.0 + s / 2.0 * (1.0 + s / 12.0 * (1.0 + s / 30.0)),
            lambda s: np.cosh(np.sqrt(s)),
            lambda s: np.cos(np.sqrt(-s)),
        ],
    )


def _k1(z):
    """sinh(sqrt(z))/sqrt(z) continued through z <= 0."""
    z = np.asarray(z, dtype=float)
    return np.piecewise(
        z,
        [np.abs(z) < _SERIES_CUTOFF, z >= _SERIES_CUTOFF],
        [
            lambda s: 1.0 + s / 6.0 * (1.0 + s / 20.0 * (1.0 + s / 42.0)),
            lambda s: np.sinh(np.sqrt(s)) / np.sqrt(s),
            lambda s: np.sin(np.sqrt(-s)) / np.sqrt(-s),
        ],
    )


def _k2(z):
    """(cosh(sqrt(z)) - 1)/z continued through z <= 0."""
    z = np.asarray(z, dtype=float)
    return np.piecewise(
        z,
        [np.abs(z) < _SERIES_CUTOFF, z >= _SERIES_CUTOFF],
        [
            lambda s: 0.5 * (1.0 + s / 12.0 * (1.0 + s / 30.0 * (1.0 + s / 56.0))),
            lambda s: (np.cosh(np.sqrt(s)) - 1.0) / s,
            lambda s: (np.cos(np.sqrt(-s)) - 1.0) / s,
        ],
    )


def kernel_cosh(lam, t):
    """cosh(sqrt(lam) t); cos(sqrt(-lam) t) for lam < 0; 1 at lam = 0."""
    out = _k0(lam * np.square(t))
    return float(out) if np.ndim(out) == 0 else out


def kernel_sinhc(lam, t):
    """sinh(sqrt(lam) t)/sqrt(lam); the lam -> 0 limit is t."""
    out = np.asarray(t, dtype=float) * _k1(lam * np.square(t))
    return float(out) if np.ndim(out) == 0 else out


def kernel_coshm1(lam, t):
    """(cosh(sqrt(lam) t) - 1)/lam; the lam -> 0 limit is t^2/2."""
    out = np.square(np.asarray(t, dtype=float)) * _k2(lam * np.square(t))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# stable ratio helpers, used by the spectral route and the closed forms

def cosh_ratio(lam, a, b):
    """cosh(sqrt(lam) a)/cosh(sqrt(lam) b) for 0 <= a <= b.

    For large sqrt(lam) b this uses e^{s(a-b)} (1 + e^{-2sa})/(1 + e^{-2sb}),
    which never overflows and keeps full relative accuracy.
    """
    a = np.asarray(a, dtype=float)
    if lam <= 0.0 or np.sqrt(lam) * b <= _EXP_FORM_CUTOFF:
        return _k0(lam * a * a) / _k0(lam * b * b)
    s = np.sqrt(lam)
    return np.exp(s * (a - b)) * (1.0 + np.exp(-2.0 * s * a)) / (1.0 + np.exp(-2.0 * s * b))


def _sqrt_sinh_over_cosh(lam, a, b):
    """sqrt(lam) sinh(sqrt(lam) a)/cosh(sqrt(lam) b) for 0 <= a <= b."""
    a = np.asarray(a, dtype=float)
    if lam <= 0.0 or np.sqrt(lam) * b <= _EXP_FORM_CUTOFF:
        return lam * a * _k1(lam * a * a) / _k0(lam * b * b)
    s = np.sqrt(lam)
    return s * np.exp(s * (a - b)) * (1.0 - np.exp(-2.0 * s * a)) / (1.0 + np.exp(-2.0 * s * b))


def _sinhc_over_cosh(lam, a, b):
    """[sinh(sqrt(lam) a)/sqrt(lam)] / cosh(sqrt(lam) b) for 0 <= a <= b."""
    a = np.asarray(a, dtype=float)
    if lam <= 0.0 or np.sqrt(lam) * b <= _EXP_FORM_CUTOFF:
        return a * _k1(lam * a * a) / _k0(lam * b * b)
    s = np.sqrt(lam)
    return np.exp(s * (a - b)) * (1.0 - np.exp(-2.0 * s * a)) / (s * (1.0 + np.exp(-2.0 * s * b)))


def _coshm1_gap_over_cosh(lam, a, b):
    """(1 - cosh(sqrt(lam) a)/cosh(sqrt(lam) b)) / lam for 0 <= a <= b.

    Written as (coshm1(b) - coshm1(a))/cosh(b) near lam = 0 to dodge the
    0/0 cancellation; the limit is (b^2 - a^2)/2.
    """
    a = np.asarray(a, dtype=float)
    if lam <= 0.0 or np.sqrt(lam) * b <= _EXP_FORM_CUTOFF:
        num = b * b * _k2(lam * b * b) - a * a * _k2(lam * a * a)
        return num / _k0(lam * b * b)
    return (1.0 - cosh_ratio(lam, a, b)) / lam


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class StateCostateSystem:
    """The stacked 2n x 2n system matrices A = [[0,-I],[-W,0]], Khat = [[0,0],[K,0]]."""

    A: np.ndarray
    Khat: np.ndarray
    n: int


@dataclass(frozen=True)
class BlockTransition:
    """n x n partitions of Phi(t) = e^{At}, Psi(t) = int_0^t e^{A s} ds and the
    zeta blocks zeta11 = phi11 + psi12 K, zeta12 = phi12,
    zeta21 = phi21 + psi22 K, zeta22 = phi22."""

    t: float
    phi11: np.ndarray
    phi12: np.ndarray
    phi21: np.ndarray
    phi22: np.ndarray
    psi12: np.ndarray
    psi22: np.ndarray
    zeta11: np.ndarray
    zeta12: np.ndarray
    zeta21: np.ndarray
    zeta22: np.ndarray


@dataclass(frozen=True)
class SpectralData:
    """Real eigendecomposition W = V diag(lambdas) V^{-1}."""

    lambdas: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray


@dataclass(frozen=True)
class EquilibriumTrajectory:
    """Sampled equilibrium: opinions x, costates p and controls u = -p.

    Rows index the time grid, columns the agents.  x[0] equals the initial
    opinions exactly and p[-1] vanishes up to the boundary tolerance.
    """

    grid: np.ndarray
    x: np.ndarray
    p: np.ndarray
    u: np.ndarray

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def T(self):
        return float(self.grid[-1])


# ---------------------------------------------------------------------------
# block machinery


def assemble_system(gm: GameMatrices) -> StateCostateSystem:
    n = gm.W.shape[0]
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = -np.eye(n)
    A[n:, :n] = -gm.W
    Khat = np.zeros((2 * n, 2 * n))
    Khat[n:, :n] = np.diag(gm.k)
    return StateCostateSystem(A=A, Khat=Khat, n=n)


def _blocks(t, phi11, phi12, phi21, phi22, psi12, psi22, k):
    # zeta = Phi + Psi Khat restricted to the blocks Khat actually touches;
    # right-multiplying by diag(k) scales columns.
    return BlockTransition(
        t=float(t),
        phi11=phi11, phi12=phi12, phi21=phi21, phi22=phi22,
        psi12=psi12, psi22=psi22,
        zeta11=phi11 + psi12 * k,
        zeta12=phi12,
        zeta21=phi21 + psi22 * k,
        zeta22=phi22,
    )


def transition_blocks(sys: StateCostateSystem, gm: GameMatrices, t) -> BlockTransition:
    """Partition e^{At} and its running integral into the n x n blocks."""
    Phi, Psi = exp_with_integral(sys.A, t)
    n = sys.n
    return _blocks(
        t,
        Phi[:n, :n], Phi[:n, n:], Phi[n:, :n], Phi[n:, n:],
        Psi[:n, n:], Psi[n:, n:],
        gm.k,
    )


def spectral_blocks(sd: SpectralData, gm: GameMatrices, t) -> BlockTransition:
    """Same blocks as transition_blocks, built from the eigendecomposition:
    phi11 = V diag(cosh(sqrt(l) t)) V^-1, phi12 = -V diag(sinh(sqrt(l) t)/sqrt(l)) V^-1,
    psi12 = -V diag((cosh(sqrt(l) t)-1)/l) V^-1, phi21 = W phi12, phi22 = phi11,
    psi22 = -phi12."""
    lam = np.asarray(sd.lambdas, dtype=float)
    if np.iscomplexobj(sd.lambdas):
        raise ValueError("spectral blocks require a real spectrum; use transition_blocks")
    pis = np.array([kernel_cosh(l, t) for l in lam])
    pihat = np.array([kernel_sinhc(l, t) for l in lam])
    pitil = np.array([kernel_coshm1(l, t) for l in lam])
    V, Vinv = sd.V, sd.Vinv
    phi11 = (V * pis) @ Vinv
    phi12 = -(V * pihat) @ Vinv
    psi12 = -(V * pitil) @ Vinv
    phi21 = gm.W @ phi12
    return _blocks(t, phi11, phi12, phi21, phi11, psi12, -phi12, gm.k)


def _complete_uniform_spectrum(n, w, kc):
    """Exact modes of the complete uniform topology: k + n w (n-1 times), then k."""
    lam = np.full(n, kc + n * w)
    lam[-1] = kc
    V = np.zeros((n, n))
    for i in range(n - 1):
        V[i, i] = 1.0
        V[n - 1, i] = -1.0
    V[:, n - 1] = 1.0
    Vinv = np.zeros((n, n))
    Vinv[: n - 1, : n - 1] = np.eye(n - 1)
    Vinv[: n - 1, :] -= 1.0 / n
    Vinv[n - 1, :] = 1.0 / n
    return SpectralData(lambdas=lam, V=V, Vinv=Vinv)


def _leader_spectrum(gm):
    """Triangular eigendecomposition of the one-leader topology.

    Needs the leader diagonal q_1 separated from every follower q_i; returns
    None when some gap is too small for a trustworthy eigenbasis.
    """
    q = gm.q
    n = len(q)
    gaps = q[1:] - q[0]
    scale = max(1.0, float(np.max(np.abs(q))))
    if np.any(np.abs(gaps) < 1e-8 * scale):
        return None
    nu = -gm.W[1:, 0] / gaps  # w_i1 / (q_i - q_1)
    V = np.eye(n)
    V[1:, 0] = nu
    Vinv = np.eye(n)
    Vinv[1:, 0] = -nu
    return SpectralData(lambdas=q.copy(), V=V, Vinv=Vinv)


def spectral_data(gm: GameMatrices, topology=None, *,
                  imag_tol=1e-9, resid_rtol=1e-8, cond_max=1e8):
    """Real eigendecomposition of W when one is reliably available, else None.

    Known topologies get exact eigenbases; symmetric W goes through eigh;
    anything else through eig, accepted only if the spectrum is real to
    tolerance, V is well conditioned and W is reconstructed to resid_rtol.
    """
    W = gm.W
    n = W.shape[0]
    sd = None
    if isinstance(topology, CompleteUniform):
        sd = _complete_uniform_spectrum(n, topology.w, topology.k)
    elif isinstance(topology, SingleLeader):
        sd = _leader_spectrum(gm)
    if sd is None:
        wnorm = max(np.linalg.norm(W), 1e-300)
        if np.linalg.norm(W - W.T) <= 1e-12 * wnorm:
            lam, V = np.linalg.eigh(0.5 * (W + W.T))
            sd = SpectralData(lambdas=lam, V=V, Vinv=V.T.copy())
        else:
            lam, V = np.linalg.eig(W)
            if np.max(np.abs(lam.imag)) > imag_tol * max(1.0, wnorm):
                return None
            lam = lam.real
            V = V.real
            if not np.all(np.isfinite(V)) or np.linalg.cond(V) > cond_max:
                return None
            sd = SpectralData(lambdas=lam, V=V, Vinv=np.linalg.inv(V))
    resid = np.linalg.norm(W @ sd.V - sd.V * sd.lambdas)
    if resid > resid_rtol * max(np.linalg.norm(W), 1.0):
        return None
    return sd


def initial_costate(bt_T: BlockTransition, x0, rcond_min=1e-12):
    """p(0) = -zeta22(T)^{-1} zeta21(T) x0, the costate making p(T) vanish."""
    x0 = np.asarray(x0, dtype=float)
    try:
        return -solve_linear(bt_T.zeta22, bt_T.zeta21 @ x0, rcond_min=rcond_min)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            "terminal block zeta22(T) is numerically singular; the instance is "
            f"too stiff for the general route (long horizon and/or strong coupling): {exc}",
            rcond=exc.rcond,
        ) from exc


# ---------------------------------------------------------------------------
# trajectory propagation


def _propagate_general(gm, x0, grid, rcond_min):
    sys = assemble_system(gm)
    T = grid[-1]
    bt_T = transition_blocks(sys, gm, T)
    p0 = initial_costate(bt_T, x0, rcond_min=rcond_min)
    m = len(grid)
    n = len(x0)
    x = np.empty((m, n))
    p = np.empty((m, n))
    for idx, t in enumerate(grid):
        bt = transition_blocks(sys, gm, t)
        x[idx] = bt.zeta11 @ x0 + bt.zeta12 @ p0
        p[idx] = bt.zeta21 @ x0 + bt.zeta22 @ p0
    return x, p


def _propagate_spectral(sd, gm, x0, grid):
    """Per-mode closed form.  With y = V^-1 x, g = V^-1 K x0 and c = g/lambda,

        y(t) = c + [cosh(sqrt(l)(T-t))/cosh(sqrt(l) T)] (y0 - c),
        q(t) = sqrt(l) [sinh(sqrt(l)(T-t))/cosh(sqrt(l) T)] (y0 - c),

    evaluated through ratio kernels that stay bounded for any lambda T."""
    T = grid[-1]
    rem = T - grid
    y0 = sd.Vinv @ np.asarray(x0, dtype=float)
    g = sd.Vinv @ (gm.k * np.asarray(x0, dtype=float))
    m, n = len(grid), len(x0)
    Y = np.empty((m, n))
    Q = np.empty((m, n))
    for j, lam in enumerate(sd.lambdas):
        ratio = cosh_ratio(lam, rem, T)
        gap = _coshm1_gap_over_cosh(lam, rem, T)  # (1 - ratio)/lambda, stable at 0
        Y[:, j] = y0[j] * ratio + g[j] * gap
        Q[:, j] = (y0[j] * _sqrt_sinh_over_cosh(lam, rem, T)
                   - g[j] * _sinhc_over_cosh(lam, rem, T))
    return Y @ sd.V.T, Q @ sd.V.T


def solve_equilibrium(net: InfluenceNetwork, m: int, *,
                      boundary_tol=1e-8, rcond_min=1e-12,
                      route="auto") -> EquilibriumTrajectory:
    """Sample the unique equilibrium trajectory on a uniform m-point grid.

    route picks the evaluation path: "auto" prefers the spectral route and
    falls back to the general one, "spectral"/"general" force a path.  The
    returned trajectory carries x, the jointly propagated costate p, and
    u = -p; the terminal costate is checked against boundary_tol so that an
    ill-conditioned propagation fails loudly instead of returning noise.
    """
    if m < 2:
        raise ValueError("need at least two grid samples")
    gm = build_matrices(net)
    grid = np.linspace(0.0, net.T, m)
    sd = None
    if route not in ("auto", "spectral", "general"):
        raise ValueError(f"unknown route {route!r}")
    if route in ("auto", "spectral"):
        sd = spectral_data(gm, classify_topology(net))
        if sd is None and route == "spectral":
            raise ValueError("no trustworthy real eigendecomposition; "
                             "use route='general'")
    if sd is not None:
        x, p = _propagate_spectral(sd, gm, net.x0, grid)
    else:
        x, p = _propagate_general(gm, net.x0, grid, rcond_min)
    x[0] = net.x0  # t = 0 is the initial condition by definition
    pT = float(np.max(np.abs(p[-1])))
    if pT > boundary_tol:
        raise ArithmeticError(
            f"terminal costate residual {pT:.3e} exceeds {boundary_tol:.3e}; "
            "the instance is too stiff for the selected route")
    traj = EquilibriumTrajectory(grid=grid, x=x, p=p, u=-p)
    return traj
