import numpy as np
import pytest
import scipy.linalg as sla

from matsync import ArraySpec, pbh_detectable


def random_orthogonal(rng, n):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q


def well_conditioned_transform(rng, n):
    return (
        random_orthogonal(rng, n)
        @ np.diag(rng.uniform(0.6, 1.6, n))
        @ random_orthogonal(rng, n)
    )


def connected_edge_pairs(rng, q, extra=1):
    """Unordered pairs of a random spanning tree plus `extra` chords."""
    pairs = set()
    order = rng.permutation(q)
    for k in range(1, q):
        a = order[k]
        b = order[rng.integers(0, k)]
        pairs.add((min(a, b), max(a, b)))
    candidates = [
        (i, j) for i in range(q) for j in range(i + 1, q) if (i, j) not in pairs
    ]
    rng.shuffle(candidates)
    pairs.update(candidates[:extra])
    return sorted(pairs)


def marginal_block_ct(rng, n1):
    X = rng.standard_normal((n1, n1))
    return X - X.T


def marginal_block_dt(rng, n1):
    blocks = []
    k = n1
    while k >= 2:
        th = rng.uniform(0.2, np.pi - 0.2)
        blocks.append(np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]]))
        k -= 2
    if k == 1:
        blocks.append(np.array([[rng.choice([-1.0, 1.0])]]))
    return sla.block_diag(*blocks)


def stable_block(rng, n2, domain):
    if n2 == 0:
        return np.zeros((0, 0))
    F = rng.standard_normal((n2, n2))
    if domain == "continuous":
        shift = np.max(np.linalg.eigvals(F).real)
        return F - (shift + rng.uniform(0.3, 0.8)) * np.eye(n2)
    radius = np.max(np.abs(np.linalg.eigvals(F)))
    return F * (rng.uniform(0.3, 0.7) / max(radius, 1e-9))


def random_neutrally_stable(rng, n, domain="continuous", n1=None):
    """A = T blkdiag(marginal, stable) T^-1 with a well-conditioned T."""
    if n1 is None:
        n1 = int(rng.integers(1, n + 1))
    n2 = n - n1
    marginal = (
        marginal_block_ct(rng, n1) if domain == "continuous" else marginal_block_dt(rng, n1)
    )
    blk = sla.block_diag(marginal, stable_block(rng, n2, domain))
    T = well_conditioned_transform(rng, n)
    return T @ blk @ np.linalg.inv(T)


def random_symmetric_spec(rng, q, n, domain="continuous", extra_edges=1, A=None):
    """Connected symmetric spec with detectable random edge outputs."""
    if A is None:
        A = random_neutrally_stable(rng, n, domain)
    cmap = {}
    for (i, j) in connected_edge_pairs(rng, q, extra=extra_edges):
        for _ in range(50):
            m = int(rng.integers(1, n + 1))
            C = rng.standard_normal((m, n))
            C = C / np.linalg.norm(C) * rng.uniform(1.0, 2.0)
            if pbh_detectable(C, A, domain):
                break
        else:
            raise AssertionError("could not draw a detectable edge output")
        cmap[(i, j)] = C
        cmap[(j, i)] = C
    return ArraySpec(q=q, n=n, A=A, C=cmap, time_domain=domain)


def random_complete_cl_spec(rng, q, n):
    """Complete graph with invertible edge outputs; a common P always exists.

    The drift may be unstable, but its spectral abscissa is capped so that
    the synchronized motion e^{At} stays within the divergence cap over the
    finite test horizons (synchronization does not imply boundedness here).
    """
    A = rng.standard_normal((n, n)) * 0.7
    abscissa = float(np.max(np.linalg.eigvals(A).real))
    A = A + (rng.uniform(-0.3, 0.04) - abscissa) * np.eye(n)
    cmap = {}
    for i in range(q):
        for j in range(i + 1, q):
            C = (
                random_orthogonal(rng, n)
                @ np.diag(rng.uniform(0.8, 1.5, n))
                @ random_orthogonal(rng, n)
            )
            cmap[(i, j)] = C
            cmap[(j, i)] = C
    return ArraySpec(q=q, n=n, A=A, C=cmap, time_domain="continuous")


def random_spd(rng, n, cond=10.0):
    Q = random_orthogonal(rng, n)
    return Q @ np.diag(rng.uniform(1.0, cond, n)) @ Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
