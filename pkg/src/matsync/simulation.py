"""Closed-loop assembly, fixed-step simulation, and the coupling sweep.

Trajectories are integrated with the classical 4th-order Runge-Kutta
method at a fixed step.  For the linear closed loop the RK4 update is the
degree-4 Taylor polynomial of exp(h Psi), so the per-step matrix is formed
once and iterated; this is bit-identical to stepping the stage equations
and keeps long horizons cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .array_model import CONTINUOUS, ArraySpec, build_graph
from .errors import DimensionMismatch, Diverged, EigenvectorMatchFailed
from .gains import GainSet
from .mwl import assemble_block_laplacian
from .spectral import neutral_split

CONVERGED_RATIO = 1e-4
DIVERGED_RATIO = 10.0
SYNC_ABS_FLOOR = 1e-9   # times ||x0||; absolute convergence for sync starts
BOUND_CAP_FACTOR = 1e8  # times ||x0||


@dataclass(frozen=True)
class SimTrace:
    times: np.ndarray        # (S,)
    states: np.ndarray       # (S, q*n)
    sync_error: np.ndarray   # (S,) max over pairs of ||x_i - x_j||
    disagreement: np.ndarray  # (S,) x' [Gamma (x) I] x
    bounded: bool
    q: int
    n: int

    def verdict(self) -> str:
        """converged | diverged | inconclusive, per the declared bands."""
        x0_norm = float(np.linalg.norm(self.states[0]))
        s0 = float(self.sync_error[0])
        s_end = float(self.sync_error[-1])
        if not self.bounded:
            return "diverged"
        if s_end <= SYNC_ABS_FLOOR * max(x0_norm, 1e-300):
            return "converged"
        ratio = s_end / max(s0, 1e-12)
        if ratio <= CONVERGED_RATIO:
            return "converged"
        if ratio >= DIVERGED_RATIO:
            return "diverged"
        return "inconclusive"


@dataclass(frozen=True)
class ClosedLoop:
    system_matrix: np.ndarray  # qn x qn
    spec: ArraySpec
    gains: dict
    epsilon: float | None      # discrete-time coupling step; None in CT
    gamma: np.ndarray          # q x q normalized graph Laplacian matrix


def _gain_map(gains):
    return gains.gains if isinstance(gains, GainSet) else dict(gains)


def closed_loop(spec: ArraySpec, gains, epsilon: float | None = None) -> ClosedLoop:
    """Assemble x' = Psi x (CT) or x+ = M x (DT) from a spec and its gains.

    ``gains`` is a GainSet or a plain ``(i, j) -> G_ij`` map.  In discrete
    time the coupling is scaled by ``epsilon``, defaulting to the gain set's
    eps_bar when it carries one.
    """
    gmap = _gain_map(gains)
    weights = {}
    for (i, j), C in spec.C.items():
        G = gmap.get((i, j))
        if G is None:
            raise DimensionMismatch(f"no gain for edge ({i + 1}, {j + 1})")
        G = np.atleast_2d(np.asarray(G, dtype=float))
        if G.shape != (spec.n, C.shape[0]):
            raise DimensionMismatch(
                f"gain G_{i + 1}{j + 1} has shape {G.shape}, "
                f"expected ({spec.n}, {C.shape[0]})"
            )
        weights[(i, j)] = G @ C
    coupling = assemble_block_laplacian(weights, spec.q, spec.n)
    base = np.kron(np.eye(spec.q), spec.A)
    if spec.time_domain == CONTINUOUS:
        system = base - coupling
        eps_used = None
    else:
        if epsilon is None:
            ebar = gains.eps_bar if isinstance(gains, GainSet) else None
            epsilon = ebar if ebar is not None and np.isfinite(ebar) else 1.0
        system = base - epsilon * coupling
        eps_used = float(epsilon)

    g = build_graph(spec)
    gamma = np.zeros((spec.q, spec.q))
    for (i, j) in g.edges:
        gamma[i, j] = -1.0 / spec.q
    for i in range(spec.q):
        gamma[i, i] = g.degrees[i] / spec.q
    return ClosedLoop(
        system_matrix=system, spec=spec, gains=gmap, epsilon=eps_used, gamma=gamma
    )


def _metrics(cl, times, states):
    q, n = cl.spec.q, cl.spec.n
    X = states.reshape(len(times), q, n)
    sync = np.zeros(len(times))
    for i in range(q):
        for j in range(i + 1, q):
            sync = np.maximum(sync, np.linalg.norm(X[:, i] - X[:, j], axis=1))
    disagreement = np.einsum("sik,ij,sjk->s", X, cl.gamma, X)
    return sync, disagreement


def _trace(cl, times, states, bounded):
    sync, dis = _metrics(cl, np.asarray(times), np.asarray(states))
    return SimTrace(
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=float),
        sync_error=sync,
        disagreement=dis,
        bounded=bounded,
        q=cl.spec.q,
        n=cl.spec.n,
    )


def _iterate(cl, step_matrix, x0, times):
    """Step x <- R x, recording every state; raises Diverged past the cap."""
    x0 = np.asarray(x0, dtype=float).ravel()
    qn = cl.spec.q * cl.spec.n
    if x0.shape[0] != qn:
        raise DimensionMismatch(f"x0 has length {x0.shape[0]}, expected {qn}")
    cap_sq = (BOUND_CAP_FACTOR * max(np.linalg.norm(x0), 1e-300)) ** 2
    states = np.empty((len(times), qn))
    states[0] = x0
    x = x0.copy()
    for k in range(1, len(times)):
        x = step_matrix @ x
        if not np.isfinite(x).all() or float(x @ x) > cap_sq:
            trace = _trace(cl, times[:k], states[:k], bounded=False)
            raise Diverged(
                f"state norm exceeded the divergence cap at t = {times[k]:g}", trace
            )
        states[k] = x
    return _trace(cl, times, states, bounded=True)


def rk4_step_matrix(system_matrix: np.ndarray, h: float) -> np.ndarray:
    """I + h Psi + ... + (h Psi)^4 / 24, the classical RK4 update for x' = Psi x."""
    n = system_matrix.shape[0]
    R = np.eye(n)
    hA = h * system_matrix
    for k in (4, 3, 2, 1):
        R = np.eye(n) + (hA / k) @ R
    return R


def simulate_ct(cl: ClosedLoop, x0, T: float = 100.0, h: float = 1e-3) -> SimTrace:
    """Fixed-step RK4 integration of the continuous-time closed loop."""
    if h <= 0.0 or T < h:
        raise ValueError(f"need 0 < h <= T, got h={h}, T={T}")
    steps = int(round(T / h))
    times = np.arange(steps + 1) * h
    return _iterate(cl, rk4_step_matrix(cl.system_matrix, h), x0, times)


def simulate_dt(cl: ClosedLoop, x0, K: int) -> SimTrace:
    """Exact iteration x(k+1) = M x(k) of the discrete-time closed loop."""
    if K < 1:
        raise ValueError(f"need K >= 1, got {K}")
    times = np.arange(K + 1, dtype=float)
    return _iterate(cl, cl.system_matrix, x0, times)


def _remove_sync_eigenvalues(system, A, q, n, resid_tol):
    """Indices of the n closed-loop eigenvalues carried by the sync subspace.

    Fast path: eigenvectors whose projection residual onto the sync subspace
    is below resid_tol.  When eigenvalue multiplicity blurs the eigenvectors
    (e.g. the decoupled array), each eigenvalue of A is matched against the
    span of the closed-loop eigenvectors clustered around it instead.
    """
    lam, V = np.linalg.eig(system)
    ones = np.ones(q) / np.sqrt(q)
    proj = np.kron(np.outer(ones, ones), np.eye(n))
    resid = np.linalg.norm(V - proj @ V, axis=0)  # eigenvectors are unit norm
    candidates = np.flatnonzero(resid < resid_tol)
    if len(candidates) == n:
        return lam, candidates

    lamA, VA = np.linalg.eig(A)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    match_tol = 1e-6 * scale + 1e-9 * float(np.linalg.norm(system, 2))
    used = []
    for k in range(n):
        sync_vec = np.kron(np.ones(q) / np.sqrt(q), VA[:, k])
        cluster = [
            idx for idx in range(len(lam))
            if idx not in used and abs(lam[idx] - lamA[k]) <= match_tol
        ]
        if not cluster:
            raise EigenvectorMatchFailed(
                f"no closed-loop eigenvalue matches eig(A) = {lamA[k]:.6g}"
            )
        B = V[:, cluster]
        coeff, *_ = np.linalg.lstsq(B, sync_vec, rcond=None)
        if np.linalg.norm(B @ coeff - sync_vec) >= resid_tol:
            raise EigenvectorMatchFailed(
                f"sync eigenvector for eig(A) = {lamA[k]:.6g} not found in its cluster"
            )
        used.append(cluster[int(np.argmin(np.abs(lam[cluster] - lamA[k])))])
    return lam, np.asarray(used)


def rho_sweep(spec: ArraySpec, P: np.ndarray, alphas, resid_tol: float = 1e-6):
    """max Re of the non-sync closed-loop spectrum for each coupling alpha.

    Gains are alpha P^-1 C_ij^T.  Returns [(alpha, rho), ...] in input order.
    """
    P = np.asarray(P, dtype=float)
    out = []
    for alpha in alphas:
        gmap = {
            e: float(alpha) * np.linalg.solve(P, C.T) for e, C in spec.C.items()
        }
        cl = closed_loop(spec, gmap)
        lam, sync_idx = _remove_sync_eigenvalues(
            cl.system_matrix, spec.A, spec.q, spec.n, resid_tol
        )
        rest = np.delete(lam, sync_idx)
        out.append((float(alpha), float(rest.real.max())))
    return out


def asymptotic_anchor(A_big: np.ndarray, x0, w_times, w_values) -> np.ndarray:
    """Anchor v with ||x(t) - exp(A_big t) v|| -> 0 for decaying forcing.

    Implements the constructive choice v = U (z1(0) + int_0^inf exp(-S tau)
    w1(tau) dtau) from the neutral split of A_big; the integral is evaluated
    by the trapezoid rule over the supplied forcing trace.  Stable A_big
    (empty marginal part) yields v = 0.
    """
    A_big = np.asarray(A_big, dtype=float)
    x0 = np.asarray(x0, dtype=float).ravel()
    w_times = np.asarray(w_times, dtype=float)
    w_values = np.asarray(w_values, dtype=float)
    if w_values.ndim == 1:
        w_values = w_values[:, None]
    if w_values.shape != (len(w_times), A_big.shape[0]):
        raise DimensionMismatch(
            f"forcing trace has shape {w_values.shape}, expected "
            f"({len(w_times)}, {A_big.shape[0]})"
        )
    split = neutral_split(A_big, CONTINUOUS)
    if split.n1 == 0:
        return np.zeros(A_big.shape[0])
    S = split.marginal_block
    w1 = w_values @ split.U_dag.T  # (S, n1)

    integral = np.zeros(split.n1)
    if len(w_times) >= 2:
        E = sla.expm(-S * w_times[0])
        prev = E @ w1[0]
        prop_cache = {}
        for k in range(1, len(w_times)):
            dt = w_times[k] - w_times[k - 1]
            key = round(dt, 15)
            if key not in prop_cache:
                prop_cache[key] = sla.expm(-S * dt)
            E = E @ prop_cache[key]
            cur = E @ w1[k]
            integral += 0.5 * dt * (prev + cur)
            prev = cur
    return split.U @ (split.U_dag @ x0 + integral)
