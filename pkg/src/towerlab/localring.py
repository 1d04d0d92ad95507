"""Linear algebra over the local ring R = F_p[tau]/(tau^p) = F_p[Z/p].

Matrices over R are integer arrays of shape ``(rows, cols, p)``; the last axis
holds the coefficients of ``tau^0 .. tau^(p-1)`` modulo ``p``.  Every nonzero
element is ``tau^k * unit``, so Gaussian elimination with pivots of minimal
valuation brings any matrix to a diagonal of powers of ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .complexes import ChainComplexSpec
from .exact import rank_mod_p
from .groupring import GF
from .groups import Tower, kernel_element_of_order_p
from .reduction import FlatMatrix, reduce_matrix


@dataclass(frozen=True)
class LocalRingElement:
    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) % self.p for x in self.coeffs)
        if len(c) > self.p:
            c = c[: self.p]
        object.__setattr__(self, "coeffs", c + (0,) * (self.p - len(c)))

    @classmethod
    def tau_power(cls, p: int, k: int) -> "LocalRingElement":
        c = [0] * p
        if k < p:
            c[k] = 1
        return cls(p, tuple(c))

    def __add__(self, other):
        return LocalRingElement(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return LocalRingElement(self.p, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return LocalRingElement(self.p, tuple(_mul(np.array(self.coeffs), np.array(other.coeffs), self.p)))

    @property
    def valuation(self) -> int:
        return next((k for k, c in enumerate(self.coeffs) if c), self.p)

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def inverse(self) -> "LocalRingElement":
        if not self.is_unit():
            raise ZeroDivisionError("not a unit of F_p[tau]/(tau^p)")
        return LocalRingElement(self.p, tuple(_unit_inverse(np.array(self.coeffs), self.p)))

    def factor(self) -> tuple[int, "LocalRingElement"]:
        """``(k, u)`` with ``self = tau^k u`` and ``u`` a unit (``u = 1`` for 0)."""
        k = self.valuation
        if k == self.p:
            return k, LocalRingElement.tau_power(self.p, 0)
        return k, LocalRingElement(self.p, self.coeffs[k:])


def _mul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Truncated product along the last axis (broadcasting)."""
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.int64)
    for i in range(p):
        ai = a[..., i]
        if not np.any(ai):
            continue
        for j in range(p - i):
            out[..., i + j] += ai * b[..., j]
    return out % p


def _unit_inverse(u: np.ndarray, p: int) -> np.ndarray:
    inv = np.zeros(p, dtype=np.int64)
    inv[0] = pow(int(u[0]), -1, p)
    for k in range(1, p):
        s = sum(int(u[j]) * int(inv[k - j]) for j in range(1, k + 1))
        inv[k] = (-s * int(inv[0])) % p
    return inv


def valuations(M: np.ndarray) -> np.ndarray:
    nz = M != 0
    first = np.argmax(nz, axis=-1)
    return np.where(nz.any(axis=-1), first, M.shape[-1])


def local_matmul(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros((A.shape[0], B.shape[1], p), dtype=np.int64)
    for i in range(p):
        for j in range(p - i):
            out[:, :, i + j] += (A[:, :, i] @ B[:, :, j]) % p
    return out % p


def local_identity(n: int, p: int) -> np.ndarray:
    out = np.zeros((n, n, p), dtype=np.int64)
    out[np.arange(n), np.arange(n), 0] = 1
    return out


def as_local_matrix(rows, p: int) -> np.ndarray:
    """From nested lists of LocalRingElement, coefficient tuples or integers."""
    rows = list(rows)
    ncols = len(rows[0]) if rows else 0
    out = np.zeros((len(rows), ncols, p), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, a in enumerate(row):
            if isinstance(a, LocalRingElement):
                out[i, j] = a.coeffs
            elif isinstance(a, (int, np.integer)):
                out[i, j, 0] = a % p
            else:
                c = list(a)[:p]
                out[i, j, : len(c)] = np.asarray(c) % p
    return out


def is_invertible(U: np.ndarray, p: int) -> bool:
    """A square matrix over the local ring is invertible iff it is mod tau."""
    n = U.shape[0]
    return U.shape[:2] == (n, n) and rank_mod_p(U[:, :, 0].tolist(), p) == n


@dataclass
class LocalDiagonalForm:
    p: int
    exponents: list[int]
    U: np.ndarray
    V: np.ndarray
    D: np.ndarray
    shape: tuple[int, int]


def local_diagonalize(M: np.ndarray, p: int) -> LocalDiagonalForm:
    """``U M V = D`` with ``D`` diagonal, entries ``tau^k`` (``k = p`` means 0)."""
    M = np.asarray(M, dtype=np.int64) % p
    r, c = M.shape[:2]
    D = M.copy()
    U = local_identity(r, p)
    V = local_identity(c, p)
    exps: list[int] = []
    for t in range(min(r, c)):
        val = valuations(D[t:, t:])
        v = int(val.min())
        if v == p:
            exps.extend([p] * (min(r, c) - t))
            break
        i, j = (int(x) for x in np.argwhere(val == v)[0])
        i += t
        j += t
        if i != t:
            D[[t, i]] = D[[i, t]]
            U[[t, i]] = U[[i, t]]
        if j != t:
            D[:, [t, j]] = D[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
        unit = np.concatenate([D[t, t, v:], np.zeros(v, dtype=np.int64)])
        uinv = _unit_inverse(unit, p)
        D[t] = _mul(D[t], uinv, p)
        U[t] = _mul(U[t], uinv, p)
        # every remaining entry has valuation >= v, so dividing by tau^v is a shift
        below = np.zeros((r - t - 1, p), dtype=np.int64)
        below[:, : p - v] = D[t + 1 :, t, v:]
        if below.any():
            D[t + 1 :] = (D[t + 1 :] - _mul(below[:, None, :], D[t][None, :, :], p)) % p
            U[t + 1 :] = (U[t + 1 :] - _mul(below[:, None, :], U[t][None, :, :], p)) % p
        right = np.zeros((c - t - 1, p), dtype=np.int64)
        right[:, : p - v] = D[t, t + 1 :, v:]
        if right.any():
            D[:, t + 1 :] = (D[:, t + 1 :] - _mul(D[:, t][:, None, :], right[None, :, :], p)) % p
            V[:, t + 1 :] = (V[:, t + 1 :] - _mul(V[:, t][:, None, :], right[None, :, :], p)) % p
        exps.append(v)
    return LocalDiagonalForm(p, sorted(exps), U, V, D, (r, c))


def check_diagonal_form(M: np.ndarray, form: LocalDiagonalForm) -> bool:
    p = form.p
    lhs = local_matmul(local_matmul(form.U, np.asarray(M) % p, p), form.V, p)
    if not np.array_equal(lhs, form.D):
        return False
    off = form.D.copy()
    n = min(form.shape)
    diag_vals = sorted(int(v) for v in valuations(form.D[np.arange(n), np.arange(n)])) if n else []
    off[np.arange(n), np.arange(n)] = 0
    if off.any() or diag_vals != form.exponents:
        return False
    for k in range(n):
        v = int(valuations(form.D[k, k]))
        if v < p and not np.array_equal(form.D[k, k], np.eye(p, dtype=np.int64)[v]):
            return False
    return is_invertible(form.U, p) and is_invertible(form.V, p)


@dataclass
class LocalDims:
    im_dim: int
    ker_dim: int
    bar_im_dim: int
    bar_ker_dim: int
    p: int

    @property
    def inequalities_hold(self) -> bool:
        return self.im_dim >= self.p * self.bar_im_dim and self.ker_dim <= self.p * self.bar_ker_dim


def local_dims(form: LocalDiagonalForm) -> LocalDims:
    """F_p dimensions of image and kernel of ``v -> v M`` on ``R^rows`` and of
    the induced map modulo tau."""
    return dims_from_exponents(form.exponents, form.shape[0], form.p)


def dims_from_exponents(exponents, rows: int, p: int) -> LocalDims:
    im = sum(p - k for k in exponents)
    bar_im = sum(1 for k in exponents if k == 0)
    dims = LocalDims(im, rows * p - im, bar_im, rows - bar_im, p)
    if not dims.inequalities_hold:
        raise AssertionError(f"local ring dimension inequalities fail: {dims}")
    return dims


def _tmul(a: tuple, b: tuple, p: int) -> tuple:
    out = [0] * p
    for i, x in enumerate(a):
        if x:
            for j in range(p - i):
                out[i + j] += x * b[j]
    return tuple(c % p for c in out)


def local_exponents(M: np.ndarray, p: int) -> list[int]:
    """Exponents of the diagonal form of ``M`` by sparse elimination.

    Same invariant as ``local_diagonalize(M, p).exponents`` but without the
    transformation matrices: pivots still have minimal valuation, ties are
    broken by fill-in (fewest entries in pivot row and column) to keep
    boundary matrices sparse.
    """
    M = np.asarray(M, dtype=np.int64) % p
    r, c = M.shape[:2]
    rows: dict[int, dict[int, tuple]] = {}
    cols: dict[int, set[int]] = {}
    for i, j in zip(*np.nonzero(M.any(axis=-1))):
        rows.setdefault(int(i), {})[int(j)] = tuple(int(x) for x in M[i, j])
        cols.setdefault(int(j), set()).add(int(i))

    def val(a):
        return next(k for k, x in enumerate(a) if x)

    def set_entry(i, j, a):
        if any(a):
            rows[i][j] = a
            cols.setdefault(j, set()).add(i)
        else:
            rows[i].pop(j, None)
            s = cols.get(j)
            if s is not None:
                s.discard(i)
                if not s:
                    del cols[j]

    def eliminate(i, j, v):
        piv = rows[i][j]
        uinv = tuple(int(x) for x in _unit_inverse(np.array(piv[v:] + (0,) * v), p))
        prow = rows[i]
        for k in list(cols[j]):
            if k == i:
                continue
            e = rows[k][j]
            f = _tmul(e[v:] + (0,) * v, uinv, p)
            for col, a in prow.items():
                prod = _tmul(f, a, p)
                old = rows[k].get(col, (0,) * p)
                set_entry(k, col, tuple((x - y) % p for x, y in zip(old, prod)))
            if not rows[k]:
                del rows[k]
        for col in list(prow):
            s = cols[col]
            s.discard(i)
            if not s:
                del cols[col]
        del rows[i]

    exps: list[int] = []
    # unit pivots first: any unit has the minimal valuation 0
    work = sorted(rows)
    while work:
        touched = set()
        for i in work:
            row = rows.get(i)
            if not row:
                continue
            units = [j for j, a in row.items() if a[0]]
            if not units:
                continue
            j = min(units, key=lambda col: (len(cols[col]), col))
            touched |= cols[j] - {i}
            eliminate(i, j, 0)
            exps.append(0)
        work = sorted(touched)
    while rows:
        v, _, i, j = min(
            (val(a), (len(rows[i]) - 1) * (len(cols[j]) - 1), i, j) for i, row in rows.items() for j, a in row.items()
        )
        eliminate(i, j, v)
        exps.append(v)
    exps.extend([p] * (min(r, c) - len(exps)))
    return sorted(exps)


def _binomials_mod(p: int) -> np.ndarray:
    # T^j = (1 + tau)^j
    return np.array([[comb(j, i) % p for i in range(p)] for j in range(p)], dtype=np.int64)


def regroup_as_local(flat: FlatMatrix, m: int, sigma, p: int) -> np.ndarray:
    """Rewrite a flat F_p matrix, equivariant under the deck permutation
    ``sigma`` of order ``p`` acting blockwise, as a matrix over R.

    Each orbit ``(v, sigma v, ..)`` spans a copy of R with basis
    ``1, T, .., T^(p-1)``, ``tau = T - 1``; the orbit representative is the
    smallest flat index.
    """
    sigma = tuple(sigma)
    if len(sigma) != m:
        raise ValueError("sigma must permute the points of the level")
    if any(sigma[x] == x for x in range(m)):
        raise ValueError("sigma has a fixed point")
    if any(len(_cycle(sigma, x)) != p for x in range(m)):
        raise ValueError(f"sigma does not act with orbits of size {p}")
    rb, cb = flat.rows // m, flat.cols // m

    def lifted(i):
        return (i // m) * m + sigma[i % m]

    dense = flat.to_dense(np.int64) % p if flat.rows and flat.cols else np.zeros((flat.rows, flat.cols), np.int64)
    perm_r = [lifted(i) for i in range(flat.rows)]
    perm_c = [lifted(j) for j in range(flat.cols)]
    if flat.rows and flat.cols and not np.array_equal(dense[np.ix_(perm_r, perm_c)], dense):
        raise ValueError("boundary is not equivariant under sigma")

    reps = sorted({min(_cycle(sigma, x)) for x in range(m)})
    row_orbits = [[b * m + y for y in _cycle(sigma, x)] for b in range(rb) for x in reps]
    col_orbits = [[b * m + y for y in _cycle(sigma, x)] for b in range(cb) for x in reps]
    out = np.zeros((len(row_orbits), len(col_orbits), p), dtype=np.int64)
    if not row_orbits or not col_orbits:
        return out
    heads = [o[0] for o in row_orbits]
    cols_idx = np.array(col_orbits)  # (ncol_orbits, p): sigma^j w_b
    tcoeffs = dense[np.ix_(heads, cols_idx.reshape(-1))].reshape(len(heads), len(col_orbits), p)
    return (tcoeffs @ _binomials_mod(p)) % p


def _cycle(sigma, x: int) -> list[int]:
    out = [x]
    y = sigma[x]
    while y != x:
        out.append(y)
        y = sigma[y]
    return out


@dataclass
class MonotoneRow:
    level: int
    index: int
    betti: int
    normalized: Fraction
    delta_sign: str
    local_check: dict | None = None


@dataclass
class MonotoneReport:
    q: int
    p: int
    rows: list[MonotoneRow]
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0 and n > 1:
        n //= p
    return n == 1


def monotone_harness(C: ChainComplexSpec, tower: Tower, q: int, p: int) -> MonotoneReport:
    """Normalized mod-p Betti numbers along a tower of p-power steps.

    Steps of ratio exactly ``p`` are additionally regrouped over R: flat
    ranks must match the R-diagonal forms, and ``b(i+1) <= p b(i)``.
    """
    orders = tower.orders
    for a, b in zip(orders, orders[1:]):
        if b % a or not _is_p_power(b // a, p):
            raise ValueError(f"index ratio {b}/{a} is not a power of {p}")
    if tower.maps is None:
        raise ValueError("the harness needs compatibility maps")
    field_ = GF(p)
    flats = []
    bettis = []
    for quo in tower.quotients:
        A_q = C.boundary(q)
        A_q1 = C.boundary(q + 1)
        fq = reduce_matrix(A_q, quo, field_) if A_q is not None else None
        fq1 = reduce_matrix(A_q1, quo, field_) if A_q1 is not None else None
        rq = fq.rank() if fq is not None else 0
        rq1 = fq1.rank() if fq1 is not None else 0
        flats.append((fq, fq1, rq, rq1))
        bettis.append(C.ranks[q] * quo.order - rq - rq1)

    report = MonotoneReport(q, p, [])
    prev = None
    for i, (quo, b) in enumerate(zip(tower.quotients, bettis), start=1):
        norm = Fraction(b, quo.order)
        sign = "" if prev is None else ("-" if norm < prev else "0" if norm == prev else "+")
        if sign == "+":
            report.violations.append(f"level {i}: normalized b_{q} increased from {prev} to {norm}")
        row = MonotoneRow(i, quo.order, b, norm, sign)
        if i > 1 and quo.order == p * orders[i - 2]:
            row.local_check = _local_step_check(C, tower, i, p, flats, bettis, report.violations, q)
        report.rows.append(row)
        prev = norm
    return report


def _local_step_check(C, tower, i, p, flats, bettis, violations, q) -> dict:
    quo = tower.quotients[i - 1]
    sigma = kernel_element_of_order_p(tower, i, p)
    fq, fq1, rq, rq1 = flats[i - 1]
    _, _, rq_lo, rq1_lo = flats[i - 2]
    check = {"sigma_level": i}
    ker_q = bar_ker_q = 0
    im_q1 = bar_im_q1 = 0
    for name, flat, rank_hi, rank_lo in (("d_q", fq, rq, rq_lo), ("d_q1", fq1, rq1, rq1_lo)):
        if flat is None:
            continue
        R = regroup_as_local(flat, quo.order, sigma, p)
        dims = dims_from_exponents(local_exponents(R, p), R.shape[0], p)
        check[name] = {"flat_rank": rank_hi, "im_dim": dims.im_dim, "bar_im_dim": dims.bar_im_dim}
        if dims.im_dim != rank_hi:
            violations.append(f"level {i}: flat rank {rank_hi} of {name} != local image dimension {dims.im_dim}")
        if dims.bar_im_dim != rank_lo:
            violations.append(f"level {i}: {name} mod tau has rank {dims.bar_im_dim}, level {i - 1} has {rank_lo}")
        if name == "d_q":
            ker_q, bar_ker_q = dims.ker_dim, dims.bar_ker_dim
        else:
            im_q1, bar_im_q1 = dims.im_dim, dims.bar_im_dim
    if fq is None:
        ker_q = C.ranks[q] * quo.order
        bar_ker_q = ker_q // p
    hi = ker_q - im_q1
    lo = bar_ker_q - bar_im_q1
    check["betti_hi"], check["betti_lo"] = hi, lo
    if hi != bettis[i - 1] or lo != bettis[i - 2]:
        violations.append(f"level {i}: local Betti numbers ({hi}, {lo}) disagree with flat ({bettis[i - 1]}, {bettis[i - 2]})")
    if hi > p * lo:
        violations.append(f"level {i}: b_{q} = {hi} exceeds {p} * {lo}")
    return check
