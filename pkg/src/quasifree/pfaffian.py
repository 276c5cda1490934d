"""Real antisymmetric linear algebra: Pfaffians and canonical forms.

The Pfaffian is computed by reducing the matrix with congruence
transformations (unit shears plus row/column swaps) to the point where it
factors over 2x2 diagonal blocks, i.e. the skew-symmetric analogue of
tridiagonalization with partial pivoting. Shears have determinant one and
leave the Pfaffian invariant; each swap flips its sign, and the sign is
tracked exactly as an integer.

The canonical form rotates a real antisymmetric matrix into a direct sum of
2x2 rotation generators [[0, lam], [-lam, 0]] with lam >= 0 sorted in
descending order, via a real Schur decomposition.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .exceptions import ValidationError

__all__ = ["validate_antisymmetric", "pfaffian", "canonical_form"]

#: absolute tolerance for accepting a matrix as antisymmetric
ANTISYMMETRY_ATOL = 1e-12


def validate_antisymmetric(a, atol: float = ANTISYMMETRY_ATOL) -> np.ndarray:
    """Check that ``a`` is a square real antisymmetric matrix.

    Parameters
    ----------
    a : array_like
        Candidate matrix.
    atol : float
        Absolute tolerance on ``max |a + a^T|``.

    Returns
    -------
    numpy.ndarray
        A float copy symmetrized to ``(a - a^T)/2`` with an exactly zero
        diagonal, so downstream arithmetic sees an exactly antisymmetric
        matrix.

    Raises
    ------
    ValidationError
        If ``a`` is not square, not real, or violates antisymmetry beyond
        ``atol``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if np.iscomplexobj(a):
        if np.abs(a.imag).max(initial=0.0) != 0.0:
            raise ValidationError("expected a real matrix, got complex entries")
        a = a.real
    a = a.astype(float, copy=True)
    dev = np.abs(a + a.T).max(initial=0.0)
    if dev > atol:
        raise ValidationError(
            f"matrix is not antisymmetric: max |A + A^T| = {dev:.3e} > {atol:.1e}"
        )
    a = (a - a.T) / 2.0
    np.fill_diagonal(a, 0.0)
    return a


def pfaffian(a, atol: float = ANTISYMMETRY_ATOL) -> float:
    """Pfaffian of a real antisymmetric matrix.

    Parameters
    ----------
    a : array_like
        Real antisymmetric matrix. Validated and symmetrized first.
    atol : float
        Antisymmetry tolerance passed to :func:`validate_antisymmetric`.

    Returns
    -------
    float
        ``Pf(a)``, satisfying ``Pf(a)^2 = det(a)`` and
        ``Pf(O^T a O) = det(O) Pf(a)`` for orthogonal ``O``. A matrix of odd
        dimension has Pfaffian 0 by convention; the empty matrix has
        Pfaffian 1.

    Notes
    -----
    O(n^3) overall; each 2x2 step pivots on the largest remaining entry of
    the working column for stability and applies a rank-two update to the
    trailing block. An exactly zero working column short-circuits to 0.
    """
    a = validate_antisymmetric(a, atol=atol)
    n = a.shape[0]
    if n % 2 == 1:
        return 0.0
    if n == 0:
        return 1.0

    sign = 1
    prod = 1.0
    for k in range(0, n - 1, 2):
        # pivot: move the largest |entry| of column k below the diagonal to
        # row k+1 (symmetric swap keeps antisymmetry; each swap flips Pf)
        col = np.abs(a[k + 1:, k])
        j = int(np.argmax(col)) + k + 1
        if a[j, k] == 0.0:
            return 0.0
        if j != k + 1:
            a[[k + 1, j], :] = a[[j, k + 1], :]
            a[:, [k + 1, j]] = a[:, [j, k + 1]]
            sign = -sign
        pivot = a[k, k + 1]
        prod *= pivot
        if k + 2 < n:
            # shear that zeroes a[k, k+2:]; Pf-invariant (det = 1)
            mu = a[k, k + 2:] / pivot
            w = a[k + 1, k + 2:]
            a[k + 2:, k + 2:] += np.outer(w, mu) - np.outer(mu, w)
    return sign * prod


def canonical_form(a, atol: float = ANTISYMMETRY_ATOL):
    """Rotate a real antisymmetric matrix to its canonical block form.

    Parameters
    ----------
    a : array_like
        Real antisymmetric matrix.
    atol : float
        Antisymmetry tolerance passed to :func:`validate_antisymmetric`.

    Returns
    -------
    o : numpy.ndarray
        Real orthogonal matrix with ``o.T @ a @ o = d``.
    d : numpy.ndarray
        Direct sum of blocks ``[[0, lam], [-lam, 0]]`` ordered by ``lam``
        descending; an odd dimension leaves one trailing zero row/column.
    lams : numpy.ndarray
        The nonnegative block coefficients, descending. These are the
        positive imaginary parts of the eigenvalues of ``a``.
    """
    a = validate_antisymmetric(a, atol=atol)
    n = a.shape[0]
    if n == 0:
        return np.eye(0), np.zeros((0, 0)), np.zeros(0)

    t, z = scipy.linalg.schur(a, output="real")

    # walk the quasi-diagonal: 2x2 antisymmetric blocks and 1x1 zeros
    pairs = []   # (lam, first column index, needs_swap)
    singles = []
    i = 0
    scale = max(np.abs(t).max(initial=0.0), 1.0)
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-14 * scale:
            b = (t[i, i + 1] - t[i + 1, i]) / 2.0
            pairs.append((abs(b), i, b < 0.0))
            i += 2
        else:
            singles.append(i)
            i += 1
    # exact zero directions pair up with lam = 0
    for a_idx, b_idx in zip(singles[0::2], singles[1::2]):
        pairs.append((0.0, (a_idx, b_idx), False))

    pairs.sort(key=lambda p: -p[0])

    cols = []
    lams = []
    for lam, loc, swap in pairs:
        if isinstance(loc, tuple):
            c0, c1 = loc
        else:
            c0, c1 = loc, loc + 1
        if swap:
            c0, c1 = c1, c0
        cols.extend([c0, c1])
        lams.append(lam)
    if len(singles) % 2 == 1:
        cols.append(singles[-1])

    o = z[:, cols]
    lams = np.asarray(lams)
    d = np.zeros((n, n))
    for k, lam in enumerate(lams):
        d[2 * k, 2 * k + 1] = lam
        d[2 * k + 1, 2 * k] = -lam
    return o, d, lams
