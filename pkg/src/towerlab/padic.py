"""Limit estimation and residual exponents for p-adic analytic towers.

For a tower with ``[G:G_i] = w p^{d i}`` the mod-p Betti numbers grow like
``beta * index + O(index^(1 - 1/d))``.  Here ``beta`` is estimated by the
last normalized value and the error exponent by a least squares slope of
``log_p |b_i - beta * index_i|`` against ``log_p index_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence


class IndexPatternError(ValueError):
    pass


def index_pattern_check(indices: Sequence[int], p: int, d: int) -> tuple[Fraction, int]:
    """Return ``(w, first_regular_level)`` for the longest suffix with ratio ``p^d``.

    Levels are numbered from 1, so ``w = index_i / p^(d*i)`` on the suffix.
    """
    if len(indices) < 2:
        raise IndexPatternError("index pattern needs at least 2 levels")
    if d < 1:
        raise IndexPatternError("tower dimension d must be >= 1")
    step = p**d
    start = len(indices) - 1
    while start > 0 and indices[start] == step * indices[start - 1]:
        start -= 1
    if len(indices) - start < 2:
        raise IndexPatternError(
            f"no regular suffix: last index ratio is {Fraction(indices[-1], indices[-2])}, expected {step}"
        )
    level = start + 1
    return Fraction(indices[start], p ** (d * level)), level


@dataclass
class PadicTowerMeta:
    p: int
    d: int
    indices: list[int]
    w_hint: Fraction | None = None

    def check(self) -> tuple[Fraction, int]:
        w, first = index_pattern_check(self.indices, self.p, self.d)
        if self.w_hint is not None and Fraction(self.w_hint) != w:
            raise IndexPatternError(f"index constant is {w}, expected {self.w_hint}")
        return w, first


@dataclass
class PadicReport:
    beta_estimate: Fraction
    residuals: list[Fraction]
    fitted_exponent: float
    bound: Fraction
    tolerance: float
    indices: list[int]
    w: Fraction
    first_regular_level: int
    monotone: bool
    fit_levels: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        if math.isnan(self.fitted_exponent):
            return True
        return self.fitted_exponent <= float(self.bound) + self.tolerance

    @property
    def violation(self) -> bool:
        return not self.ok

    def to_json(self) -> dict:
        return {
            "beta_estimate": str(self.beta_estimate),
            "bound": str(self.bound),
            "fitted_exponent": _float_text(self.fitted_exponent),
            "tolerance": _float_text(self.tolerance),
            "indices": [str(i) for i in self.indices],
            "residuals": [str(r) for r in self.residuals],
            "fit_levels": self.fit_levels,
            "w": str(self.w),
            "first_regular_level": self.first_regular_level,
            "monotone": self.monotone,
            "ok": self.ok,
        }


def _float_text(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return f"{x:.12g}"


def _log(x: Fraction, base: int) -> float:
    x = Fraction(x)
    return (math.log(x.numerator) - math.log(x.denominator)) / math.log(base)


def check_rank_additivity(rank_data) -> None:
    """Every level's ``(domain, image, kernel)`` triples satisfy im + ker = domain."""
    for level, triples in enumerate(rank_data, start=1):
        for domain, im, ker in triples:
            if im + ker != domain:
                raise AssertionError(f"level {level}: dim im {im} + dim ker {ker} != domain {domain}")


def padic_fit(betti_sequence, meta: PadicTowerMeta, tolerance: float = 1e-6, rank_data=None) -> PadicReport:
    values = [Fraction(b) for b in betti_sequence]
    if len(values) < 3:
        raise ValueError("padic_fit needs at least 3 levels")
    if len(values) != len(meta.indices):
        raise ValueError(f"{len(values)} Betti numbers for {len(meta.indices)} indices")
    w, first = meta.check()
    if rank_data is not None:
        check_rank_additivity(rank_data)

    normalized = [b / n for b, n in zip(values, meta.indices)]
    beta = normalized[-1]
    monotone = all(a >= b for a, b in zip(normalized, normalized[1:]))
    residuals = [abs(b - beta * n) for b, n in zip(values, meta.indices)]
    bound = 1 - Fraction(1, meta.d)

    fit = [i for i, r in enumerate(residuals) if r]
    if not fit:
        exponent = -math.inf
    elif len(fit) == 1:
        exponent = math.nan
    else:
        xs = [_log(Fraction(meta.indices[i]), meta.p) for i in fit]
        ys = [_log(residuals[i], meta.p) for i in fit]
        mx = sum(xs) / len(xs)
        my = sum(ys) / len(ys)
        sxx = sum((x - mx) ** 2 for x in xs)
        exponent = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    return PadicReport(
        beta, residuals, exponent, bound, tolerance, list(meta.indices), w, first, monotone, [i + 1 for i in fit]
    )
