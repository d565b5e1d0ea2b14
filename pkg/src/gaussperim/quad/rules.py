"""One-dimensional quadrature rules and deterministic reductions.

Every integral in the package is assembled from these pieces: plain
Gauss-Legendre panels, geometrically graded panels toward an endpoint
singularity, and a Gauss-Jacobi closing cell that integrates an algebraic
endpoint singularity ``t**beta`` exactly.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gauss_jacobi_unit(order: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``int_0^1 t**beta f(t) dt`` (beta > -1)."""
    if beta <= -1.0:
        raise ValueError("beta must exceed -1")
    x, w = special.roots_jacobi(order, 0.0, beta)
    t = 0.5 * (x + 1.0)
    w = w * 2.0 ** (-beta - 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=64)
def mixed_unit(order: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Rule on [0, 1] for ``t**beta A(t) + B(t)`` with smooth A and B.

    Nodes are the Gauss-Jacobi and Gauss-Legendre nodes together; weights are
    the minimum-norm solution of the moment equations for ``t**(beta+k)``,
    ``k < order - 2``, and ``t**k``, ``k < 3``. Weights apply to the function itself.
    """
    tj, _ = gauss_jacobi_unit(order, beta)
    x, _ = gauss_legendre(order)
    t = np.concatenate([tj, 0.5 * (x + 1.0)])
    ks = range(max(order - 2, 1))
    kr = range(min(3, order))
    A = np.array([t ** (k + beta) for k in ks] + [t ** k for k in kr])
    mom = np.array([1.0 / (k + beta + 1.0) for k in ks] + [1.0 / (k + 1.0) for k in kr])
    w = np.linalg.lstsq(A, mom, rcond=None)[0]
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gl_panel(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = gauss_legendre(order)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


def composite(edges, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on every panel ``[edges[i], edges[i+1]]``."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0), np.empty(0)
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    h = 0.5 * (edges[1:, None] - a)
    nodes = a + h * (x[None, :] + 1.0)
    weights = h * w[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_edges(a: float, b: float, max_width: float) -> np.ndarray:
    m = max(1, int(np.ceil((b - a) / max_width - 1e-12)))
    return np.linspace(a, b, m + 1)


def graded_edges(a: float, b: float, levels: int, toward: str = "left",
                 ratio: float = 0.5) -> np.ndarray:
    """Panel edges on [a, b] shrinking geometrically toward one or both ends.

    ``levels`` graded panels are generated toward each requested end; the
    remaining middle is one panel.
    """
    if b <= a:
        return np.array([a, b])
    if toward == "both":
        mid = 0.5 * (a + b)
        left = graded_edges(a, mid, levels, "left", ratio)
        right = graded_edges(mid, b, levels, "right", ratio)
        return np.concatenate([left, right[1:]])
    L = b - a
    offs = L * ratio ** np.arange(1, levels + 1)
    if toward == "left":
        inner = a + offs[::-1]
        return np.concatenate([[a], inner, [b]])
    if toward == "right":
        inner = b - offs
        return np.concatenate([[a], inner, [b]])
    raise ValueError(f"unknown grading direction {toward!r}")


def singular_rule(a: float, b: float, beta: float, order: int, levels: int,
                  at: str = "left") -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``int_a^b F`` where ``F ~ |x - endpoint|**beta`` near ``at``.

    Geometric grading (ratio 1/2) toward the singular end; the closing cell
    integrates ``t**beta * poly + poly`` exactly (see ``mixed_unit``), so a
    regular part added to the singular one costs nothing. Returned weights
    apply to F itself.
    """
    if b <= a:
        return np.empty(0), np.empty(0)
    L = b - a
    h = L * 0.5 ** levels
    if at == "left":
        edges = graded_edges(a, b, levels, "left")[1:]
    else:
        edges = graded_edges(a, b, levels, "right")[:-1]
    xg, wg = composite(edges, order)
    t, wj = mixed_unit(order, float(beta))
    wcell = h * wj
    if at == "left":
        xc = a + h * t
    else:
        xc = b - h * t
    return np.concatenate([xc, xg]), np.concatenate([wcell, wg])


def pairwise_sum(values) -> float:
    """Sum with a fixed binary tree, independent of how values were produced."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0])


def richardson_fit(h, values, powers) -> tuple[float, float]:
    """Least-squares fit ``values ~ c0 + sum_k c_k h**p_k``; returns (c0, residual).

    The residual is the RMS misfit, zero when the system is square.
    """
    h = np.asarray(h, dtype=float)
    y = np.asarray(values, dtype=float)
    cols = [np.ones_like(h)] + [h ** p for p in powers]
    A = np.stack(cols, axis=1)
    if A.shape[0] < A.shape[1]:
        raise ValueError("not enough samples for the requested model")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(A.shape[0] - A.shape[1], 1)
    return float(coef[0]), float(np.sqrt(np.sum(res ** 2) / dof))
