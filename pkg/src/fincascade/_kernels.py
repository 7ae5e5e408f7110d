"""Hot numeric kernels.

Most kernels are single-source: they are written against the numpy array
API so the identical code runs compiled under numba or interpreted as
plain numpy (selected in :mod:`fincascade._accel`).  The simplex pivot
loop is the exception: its column scans are loop-shaped, which is fast
compiled and unusably slow interpreted, so it has a vectorized numpy
twin with identical pivot selection and identical arithmetic.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, maybe_njit

# Status codes shared by the simplex iteration kernels.
SIMPLEX_OPTIMAL = 0
SIMPLEX_UNBOUNDED = 1
SIMPLEX_ITER_LIMIT = 2
SIMPLEX_BREAKDOWN = 3


def _gauss_solve_src(A, b, pivot_floor):
    """Gaussian elimination with partial pivoting on copies of A, b.

    Returns ``(x, ok)``; ``ok`` is False when a pivot magnitude falls
    below ``pivot_floor`` (matrix numerically singular).
    """
    n = A.shape[0]
    U = A.copy()
    y = b.copy()
    x = np.zeros(n)
    for k in range(n):
        p = k + np.argmax(np.abs(U[k:, k]))
        if np.abs(U[p, k]) < pivot_floor:
            return x, False
        if p != k:
            tmp = U[k, :].copy()
            U[k, :] = U[p, :]
            U[p, :] = tmp
            t = y[k]
            y[k] = y[p]
            y[p] = t
        piv = U[k, k]
        fac = U[k + 1 :, k] / piv
        rowk = U[k, k + 1 :]
        U[k + 1 :, k + 1 :] -= fac.reshape(-1, 1) * rowk.reshape(1, -1)
        y[k + 1 :] -= fac * y[k]
        U[k + 1 :, k] = 0.0
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for j in range(i + 1, n):
            acc -= U[i, j] * x[j]
        x[i] = acc / U[i, i]
    return x, True


def _power_iter_src(M, x0, max_iter, tol):
    """Infinity-norm power iteration on a nonnegative matrix.

    Returns the converged ratio ``max|M x| / max|x|``, which never
    exceeds the maximum row sum of ``M``.
    """
    nx = np.abs(x0).max()
    if nx == 0.0:
        return 0.0
    x = x0 / nx
    est = 0.0
    for _ in range(max_iter):
        y = np.dot(M, x)
        ny = np.abs(y).max()
        if ny == 0.0:
            return 0.0
        if np.abs(ny - est) <= tol * (1.0 + ny):
            return ny
        est = ny
        x = y / ny
    return est


def _simulate_steps_src(W, drive, pen, x0, steps):
    """Iterate ``x' = W x + drive - pen * (x < 0)`` for ``steps`` steps.

    ``pen`` is the per-company penalty hit applied while a company sits
    below its threshold.  Returns the ``(steps + 1, n)`` history.
    """
    n = x0.shape[0]
    hist = np.empty((steps + 1, n))
    hist[0, :] = x0
    x = x0.copy()
    for t in range(steps):
        hit = np.where(x < 0.0, pen, 0.0)
        x = np.dot(W, x) + drive - hit
        hist[t + 1, :] = x
    return hist


def _simplex_iterate_loops(T, basis, n_allowed, tol_cost, tol_piv, max_iter, stall_limit):
    """Simplex iterations on a dense tableau, loop form.

    ``T`` is ``(m + 1, cols + 1)``: constraint rows then the reduced-cost
    row, right-hand side in the last column.  Entering column: most
    negative reduced cost below ``-tol_cost`` (ties to the lowest index);
    after ``stall_limit`` pivots without objective progress the scan
    drops to pure lowest-index selection, whose termination guarantee
    breaks any cycle.  Leaving row: minimum ratio, ties broken by lowest
    basis variable.  Mutates ``T`` and ``basis`` in place; returns
    ``(status, iterations)``.
    """
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    lowest_index = False
    stalled = 0
    last_obj = T[m, rhs]
    while it < max_iter:
        enter = -1
        if lowest_index:
            for j in range(n_allowed):
                if T[m, j] < -tol_cost:
                    enter = j
                    break
        else:
            best_cost = -tol_cost
            for j in range(n_allowed):
                if T[m, j] < best_cost:
                    best_cost = T[m, j]
                    enter = j
        if enter == -1:
            return SIMPLEX_OPTIMAL, it
        leave = -1
        best = np.inf
        best_var = rhs + 1
        tiny = False
        for i in range(m):
            a = T[i, enter]
            if a > tol_piv:
                r = T[i, rhs] / a
                if r < best:
                    best = r
                    leave = i
                    best_var = basis[i]
                elif r == best and basis[i] < best_var:
                    leave = i
                    best_var = basis[i]
            elif a > 0.0:
                tiny = True
        if leave == -1:
            if tiny:
                return SIMPLEX_BREAKDOWN, it
            return SIMPLEX_UNBOUNDED, it
        piv = T[leave, enter]
        for c in range(rhs + 1):
            T[leave, c] /= piv
        for i in range(m + 1):
            if i == leave:
                continue
            f = T[i, enter]
            if f != 0.0:
                for c in range(rhs + 1):
                    T[i, c] -= f * T[leave, c]
        basis[leave] = enter
        it += 1
        # rhs of the cost row carries minus the objective, so improvement
        # shows up as an increase
        obj = T[m, rhs]
        if obj > last_obj + 1e-12 * (1.0 + np.abs(last_obj)):
            stalled = 0
            lowest_index = False
        else:
            stalled += 1
            if stalled >= stall_limit:
                lowest_index = True
        last_obj = obj
    return SIMPLEX_ITER_LIMIT, it


def _simplex_iterate_numpy(T, basis, n_allowed, tol_cost, tol_piv, max_iter, stall_limit):
    """Vectorized twin of :func:`_simplex_iterate_loops`.

    Pivot selection and per-element arithmetic match the loop form, so
    both paths walk the same vertex sequence.
    """
    m = T.shape[0] - 1
    rhs = T.shape[1] - 1
    it = 0
    lowest_index = False
    stalled = 0
    last_obj = T[m, rhs]
    while it < max_iter:
        if lowest_index:
            neg = np.nonzero(T[m, :n_allowed] < -tol_cost)[0]
            if neg.size == 0:
                return SIMPLEX_OPTIMAL, it
            enter = int(neg[0])
        else:
            enter = int(np.argmin(T[m, :n_allowed]))
            if not T[m, enter] < -tol_cost:
                return SIMPLEX_OPTIMAL, it
        col = T[:m, enter]
        elig = col > tol_piv
        if not elig.any():
            if (col > 0.0).any():
                return SIMPLEX_BREAKDOWN, it
            return SIMPLEX_UNBOUNDED, it
        ratios = np.full(m, np.inf)
        ratios[elig] = T[:m, rhs][elig] / col[elig]
        best = ratios.min()
        ties = np.nonzero(ratios == best)[0]
        leave = int(ties[np.argmin(basis[ties])])
        piv = T[leave, enter]
        T[leave, :] /= piv
        f = T[:, enter].copy()
        f[leave] = 0.0
        T -= np.outer(f, T[leave, :])
        basis[leave] = enter
        it += 1
        # rhs of the cost row carries minus the objective, so improvement
        # shows up as an increase
        obj = T[m, rhs]
        if obj > last_obj + 1e-12 * (1.0 + np.abs(last_obj)):
            stalled = 0
            lowest_index = False
        else:
            stalled += 1
            if stalled >= stall_limit:
                lowest_index = True
        last_obj = obj
    return SIMPLEX_ITER_LIMIT, it


# Plain-python handles, kept for the benchmark and the fallback path.
gauss_solve_py = _gauss_solve_src
power_iter_py = _power_iter_src
simulate_steps_py = _simulate_steps_src
simplex_iterate_loops_py = _simplex_iterate_loops
simplex_iterate_numpy = _simplex_iterate_numpy

if NUMBA_ENABLED:
    gauss_solve = maybe_njit(cache=True)(_gauss_solve_src)
    power_iter = maybe_njit(cache=True)(_power_iter_src)
    simulate_steps = maybe_njit(cache=True)(_simulate_steps_src)
    simplex_iterate = maybe_njit(cache=True)(_simplex_iterate_loops)
else:
    gauss_solve = _gauss_solve_src
    power_iter = _power_iter_src
    simulate_steps = _simulate_steps_src
    # Interpreted column scans would crawl; use the vectorized twin.
    simplex_iterate = _simplex_iterate_numpy
