"""Physical array builders and the bundled worked examples.

Both builders return the same array in two coordinate systems: the raw
second-order model and the energy coordinates in which the drift is
skew-symmetric and the coupling weights are symmetric PSD, related by a
per-agent state transform ``xi = T x``.  Output matrices are chosen so
that ``C_ij^T C_ij`` reproduces the physical coupling weight exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import CONTINUOUS, ArraySpec
from .errors import DimensionMismatch, NonPositiveParameter, UnknownName
from .spectral import spd_sqrt


@dataclass(frozen=True)
class ArrayRealization:
    spec: ArraySpec
    gains: dict  # (i, j) -> gain closing the loop to the physical dynamics


@dataclass(frozen=True)
class BuiltArray:
    raw: ArrayRealization          # second-order physical coordinates
    transformed: ArrayRealization  # skew-drift coordinates
    transform: np.ndarray          # per-agent T with xi = T x


@dataclass(frozen=True)
class BuiltinExample:
    name: str
    spec: ArraySpec
    P: np.ndarray | None = None
    description: str = ""


def _symmetrized_edges(coupling, q, p, what):
    """Validate and mirror a map edge -> length-p diagonal, entries >= 0."""
    out = {}
    for (i, j), vals in coupling.items():
        i, j = int(i), int(j)
        if not (0 <= i < q and 0 <= j < q) or i == j:
            raise DimensionMismatch(f"{what} edge ({i + 1}, {j + 1}) invalid for q={q}")
        v = np.asarray(vals, dtype=float).ravel()
        if v.shape[0] != p:
            raise DimensionMismatch(
                f"{what} on edge ({i + 1}, {j + 1}) has {v.shape[0]} entries, expected {p}"
            )
        if np.any(v < 0.0):
            raise NonPositiveParameter(f"{what} entries must be >= 0")
        if (j, i) in out and not np.array_equal(out[(j, i)], v):
            raise DimensionMismatch(f"{what} map is not symmetric on ({i + 1}, {j + 1})")
        out[(i, j)] = v
        out[(j, i)] = v
    return out


def _tridiagonal(chain_vals):
    """Stiffness-patterned tridiagonal from p+1 positive chain parameters."""
    c = np.asarray(chain_vals, dtype=float).ravel()
    p = c.shape[0] - 1
    K = np.zeros((p, p))
    for i in range(p):
        K[i, i] = c[i] + c[i + 1]
        if i + 1 < p:
            K[i, i + 1] = -c[i + 1]
            K[i + 1, i] = -c[i + 1]
    return K


def _second_order_array(q, p, drift_block, raw_mix, trans_mix, coupling, T):
    """Shared assembly for the mass-spring and LC arrays.

    drift_block: the p x p matrix -D with x'' = -D x in raw coordinates.
    raw_mix / trans_mix: per-edge maps giving the p x p velocity-coupling
    factor V with coupling weight blkdiag(0, V d V^T)-style structure; the
    output is C = [0 | sqrt(d) V] so that C^T C is the weight.
    """
    n = 2 * p
    A_raw = np.zeros((n, n))
    A_raw[:p, p:] = np.eye(p)
    A_raw[p:, :p] = drift_block

    S = T @ A_raw @ np.linalg.inv(T)

    raw_C, raw_G = {}, {}
    tr_C, tr_G = {}, {}
    for (i, j), d in coupling.items():
        root = np.sqrt(d)
        C_raw = np.hstack([np.zeros((p, p)), np.diag(root)])
        raw_C[(i, j)] = C_raw
        raw_G[(i, j)] = np.vstack([np.zeros((p, p)), raw_mix @ np.diag(root)])
        C_tr = np.hstack([np.zeros((p, p)), np.diag(root) @ trans_mix])
        tr_C[(i, j)] = C_tr
        tr_G[(i, j)] = C_tr.T
    raw_spec = ArraySpec(q=q, n=n, A=A_raw, C=raw_C, time_domain=CONTINUOUS)
    tr_spec = ArraySpec(q=q, n=n, A=S, C=tr_C, time_domain=CONTINUOUS)
    return BuiltArray(
        raw=ArrayRealization(spec=raw_spec, gains=raw_G),
        transformed=ArrayRealization(spec=tr_spec, gains=tr_G),
        transform=T,
    )


def build_mass_spring(masses, springs, damping, q: int) -> BuiltArray:
    """Array of q mass-spring chains coupled by viscous friction.

    masses: p positive masses; springs: p+1 positive spring constants;
    damping: map edge -> p per-mass damping coefficients (symmetric, >= 0).
    The transformed coordinates are xi = blkdiag(K^(1/2), M^(1/2)) x.
    """
    m = np.asarray(masses, dtype=float).ravel()
    k = np.asarray(springs, dtype=float).ravel()
    p = m.shape[0]
    if k.shape[0] != p + 1:
        raise DimensionMismatch(f"need {p + 1} spring constants, got {k.shape[0]}")
    if np.any(m <= 0.0) or np.any(k <= 0.0):
        raise NonPositiveParameter("masses and spring constants must be positive")
    if q < 1:
        raise NonPositiveParameter(f"agent count q={q} must be >= 1")
    coupling = _symmetrized_edges(damping, q, p, "damping")

    K = _tridiagonal(k)
    M_inv = np.diag(1.0 / m)
    K_half = spd_sqrt(K)
    M_half_inv = np.diag(1.0 / np.sqrt(m))
    T = np.zeros((2 * p, 2 * p))
    T[:p, :p] = K_half
    T[p:, p:] = np.diag(np.sqrt(m))
    return _second_order_array(
        q, p,
        drift_block=-M_inv @ K,
        raw_mix=M_inv,          # raw weight blkdiag(0, M^-1 B)
        trans_mix=M_half_inv,   # transformed weight blkdiag(0, M^-1/2 B M^-1/2)
        coupling=coupling,
        T=T,
    )


def build_lc(capacitances, inductances, conductances, q: int) -> BuiltArray:
    """Array of q LC ladder oscillators coupled through resistors.

    capacitances: p+1 positive values forming the tridiagonal C matrix;
    inductances: p positive values; conductances: map edge -> p per-node
    conductances (symmetric, >= 0).  The transformed coordinates are
    xi = blkdiag(L^(-1/2), C^(1/2)) x.
    """
    cv = np.asarray(capacitances, dtype=float).ravel()
    lv = np.asarray(inductances, dtype=float).ravel()
    p = lv.shape[0]
    if cv.shape[0] != p + 1:
        raise DimensionMismatch(f"need {p + 1} capacitances, got {cv.shape[0]}")
    if np.any(cv <= 0.0) or np.any(lv <= 0.0):
        raise NonPositiveParameter("capacitances and inductances must be positive")
    if q < 1:
        raise NonPositiveParameter(f"agent count q={q} must be >= 1")
    coupling = _symmetrized_edges(conductances, q, p, "conductance")

    Cmat = _tridiagonal(cv)
    L_inv = np.diag(1.0 / lv)
    C_inv = np.linalg.inv(Cmat)
    C_half = spd_sqrt(Cmat)
    C_half_inv = np.linalg.inv(C_half)
    L_half_inv = np.diag(1.0 / np.sqrt(lv))
    T = np.zeros((2 * p, 2 * p))
    T[:p, :p] = L_half_inv
    T[p:, p:] = C_half
    return _second_order_array(
        q, p,
        drift_block=-C_inv @ L_inv,
        raw_mix=C_inv,         # raw weight blkdiag(0, C^-1 G)
        trans_mix=C_half_inv,  # transformed weight blkdiag(0, C^-1/2 G C^-1/2)
        coupling=coupling,
        T=T,
    )


# --- bundled examples ------------------------------------------------------

_ASYM_H = {
    (0, 1): [[1.9006, 1.8406], [1.8406, 4.0758]],
    (0, 2): [[1.0382, 0.9603], [0.9603, 6.2512]],
    (1, 0): [[3.8896, 3.1418], [3.1418, 4.7041]],
    (1, 2): [[6.4288, -1.6342], [-1.6342, 1.5263]],
    (2, 0): [[2.2944, -1.9328], [-1.9328, 6.5011]],
    (2, 1): [[4.9157, -3.9794], [-3.9794, 3.6283]],
}

_CHAIN5_A = [
    [0.4429, 0.4871, 0.7504],
    [0.7265, -1.5839, -1.8779],
    [0.0154, 1.3969, 1.5767],
]

_CHAIN5_C = {
    (0, 1): [[1.0, 0.0, 0.0]],
    (1, 2): [[3.3036, 0.1565, 0.1265]],
    (2, 3): [[3.7854, 1.3147, 3.4819]],
    (3, 4): [[4.6054, 1.8354, 3.1269]],
}

_CHAIN5_P = [
    [0.6209, -0.1396, -0.2605],
    [-0.1396, 0.0677, 0.0997],
    [-0.2605, 0.0997, 0.1815],
]

# demo parameters are arbitrary draws kept fixed for reproducibility
MASS_SPRING_DEMO = dict(
    masses=(1.0, 2.0),
    springs=(1.0, 1.5, 0.5),
    damping={(0, 1): (0.8, 0.5), (1, 2): (0.6, 1.0)},
    q=3,
)

LC_DEMO = dict(
    capacitances=(1.0, 0.8, 1.2),
    inductances=(0.9, 1.1),
    conductances={(0, 1): (0.7, 0.4), (1, 2): (0.5, 0.9)},
    q=3,
)

BUILTIN_NAMES = ("counterexample_asym", "chain5", "mass_spring_demo", "lc_demo")


def builtin_example(name: str) -> BuiltinExample:
    """The bundled arrays: both counterexamples and two builder demos."""
    if name == "counterexample_asym":
        spec = ArraySpec(
            q=3, n=2, A=np.zeros((2, 2)), C=dict(_ASYM_H), time_domain=CONTINUOUS
        )
        return BuiltinExample(
            name=name,
            spec=spec,
            description="three coupled planar systems with asymmetric edge "
            "outputs; the closed loop -L is unstable",
        )
    if name == "chain5":
        cmap = dict(_CHAIN5_C)
        cmap.update({(j, i): M for (i, j), M in _CHAIN5_C.items()})
        spec = ArraySpec(
            q=5, n=3, A=_CHAIN5_A, C=cmap, time_domain=CONTINUOUS
        )
        return BuiltinExample(
            name=name,
            spec=spec,
            P=np.asarray(_CHAIN5_P, dtype=float),
            description="five systems on a chain; CL-detectable but the "
            "connectivity condition fails for every coupling coefficient",
        )
    if name == "mass_spring_demo":
        built = build_mass_spring(**MASS_SPRING_DEMO)
        return BuiltinExample(
            name=name,
            spec=built.transformed.spec,
            description="two-mass chains, q=3, in skew coordinates",
        )
    if name == "lc_demo":
        built = build_lc(**LC_DEMO)
        return BuiltinExample(
            name=name,
            spec=built.transformed.spec,
            description="two-node LC ladders, q=3, in skew coordinates",
        )
    raise UnknownName(f"unknown builtin example {name!r}; choose from {BUILTIN_NAMES}")
