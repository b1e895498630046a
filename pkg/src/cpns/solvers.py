"""Jacobi-preconditioned conjugate gradient for Laplacian systems.

Solves ``L X = B`` for many right-hand sides at once. ``L`` may be singular
(one null vector per connected component); right-hand sides must sum to zero
on every component, and the returned solution is the minimum-norm one
(mean zero per component), i.e. ``L^+ B``.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError


def project_components(x, labels, count):
    """Subtract the per-component mean from each column of ``x`` (in place)."""
    sizes = np.bincount(labels, minlength=count).astype(float)
    sums = np.zeros((count,) + x.shape[1:])
    np.add.at(sums, labels, x)
    x -= (sums / sizes.reshape((-1,) + (1,) * (x.ndim - 1)))[labels]
    return x


def laplacian_pcg(lap, rhs, labels, count, rtol, maxiter=None):
    """Block PCG on a graph Laplacian.

    Parameters
    ----------
    lap : sparse (n, n) Laplacian.
    rhs : (n,) or (n, k) array.
    labels, count : connected-component labelling of the graph.
    rtol : stop a column once ``||r|| <= rtol * ||b||``.
    maxiter : iteration cap, default ``10 * n``.

    Returns
    -------
    x : array shaped like ``rhs``.
    iterations : int
    """
    b = np.array(rhs, dtype=float)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    n = b.shape[0]
    maxiter = 10 * n if maxiter is None else maxiter
    project_components(b, labels, count)

    diag = np.asarray(lap.diagonal(), dtype=float)
    inv_diag = np.divide(1.0, diag, out=np.zeros_like(diag), where=diag > 0)[:, None]

    bnorm = np.linalg.norm(b, axis=0)
    target = rtol * bnorm
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    d = z.copy()
    rz = np.einsum("ij,ij->j", r, z)
    rnorm = bnorm.copy()
    active = rnorm > target
    it = 0
    while active.any():
        if it >= maxiter:
            worst = float(np.max(rnorm / np.where(bnorm > 0, bnorm, 1.0)))
            raise ConvergenceError(
                f"PCG did not converge in {maxiter} iterations (relative residual {worst:.3e} > {rtol:.3e})",
                residual=worst,
                iterations=it,
            )
        cols = np.flatnonzero(active)
        dc = d[:, cols]
        ad = lap @ dc
        dad = np.einsum("ij,ij->j", dc, ad)
        alpha = rz[cols] / dad
        x[:, cols] += alpha * dc
        r[:, cols] -= alpha * ad
        zc = inv_diag * r[:, cols]
        rz_new = np.einsum("ij,ij->j", r[:, cols], zc)
        beta = rz_new / rz[cols]
        d[:, cols] = zc + beta * dc
        rz[cols] = rz_new
        rnorm[cols] = np.linalg.norm(r[:, cols], axis=0)
        active[cols] = rnorm[cols] > target[cols]
        it += 1
    project_components(x, labels, count)
    return (x[:, 0] if vector else x), it
