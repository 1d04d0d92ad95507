"""Run configurations, the analysis orchestrator and the rank gradient workflow."""

from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .complexes import ChainComplexSpec, builtin_complex, complex_laplacian, validate, wedge_rank
from .formats import FormatError, load_complex, load_tower, write_csv, write_json
from .groupring import INTEGERS, QQ, GF, kappa_bound
from .groups import GroupModelSpec, Tower, abelian_tower, make_builtin_tower, validate_tower
from .localring import monotone_harness
from .padic import IndexPatternError, PadicTowerMeta, padic_fit
from .reduction import betti, betti_table, boundary_ranks, torsion_counts
from .spectral import (
    fk_certificate,
    kazhdan_report,
    level_measure,
    moment_convergence_report,
    reference_l2_betti,
)

ANALYSES = ("betti", "spectrum", "converge", "fkdet", "modp", "padic", "rankgrad")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """What to compute.

    ``complex`` is a builtin spec such as ``"wedge:2"``, ``"torus:2"``,
    ``"circle"``, ``"lls:2,2"`` or a path to a complex file.  ``tower`` is a
    builtin family (``"abelian"``, ``"abelian-refined"``, ``"heisenberg"``,
    ``"cyclic"``) or a path to a tower file.  The builtin families use ``p``
    and ``depth``; ``"cyclic"`` uses ``moduli`` (each level reduces every
    generator modulo one number).
    """

    complex: str
    tower: str = "abelian"
    p: int = 2
    depth: int = 3
    moduli: list[int] = field(default_factory=list)
    degrees: list[int] | None = None
    primes: list[int] = field(default_factory=list)
    rationals: bool = True
    analyses: list[str] = field(default_factory=lambda: ["betti"])
    out: str = "towerlab-out"
    seed: int = 0
    k_max: int = 4
    tolerance: float = 1e-6
    tower_dimension: int | None = None
    histogram_bins: int = 20
    strict: bool = True

    @classmethod
    def from_dict(cls, doc: dict, strict: bool = True) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(doc) - known)
        if extra:
            raise ConfigError(f"unknown config field(s) {', '.join(extra)}")
        if "complex" not in doc:
            raise ConfigError("config needs a 'complex'")
        cfg = cls(**{**doc, "strict": doc.get("strict", strict)})
        cfg.check_shape()
        return cfg

    @classmethod
    def from_file(cls, path, strict: bool = True) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be an object")
        cfg = cls.from_dict(doc, strict)
        base = Path(path).parent
        for attr in ("complex", "tower"):
            value = getattr(cfg, attr)
            if value.endswith(".json") and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
        return cfg

    def check_shape(self):
        if not self.analyses:
            raise ConfigError("at least one analysis is required")
        bad = [a for a in self.analyses if a not in ANALYSES]
        if bad:
            raise ConfigError(f"unknown analyses {bad}; choose from {list(ANALYSES)}")
        if self.depth < 1 or self.k_max < 1:
            raise ConfigError("depth and k_max must be >= 1")


def parse_complex_source(source: str, strict: bool = True) -> ChainComplexSpec:
    if source.endswith(".json") or Path(source).is_file():
        return load_complex(source, strict)
    name, _, args = source.partition(":")
    try:
        params = [int(a) for a in args.split(",") if a]
        return builtin_complex(name, *params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad complex {source!r}: {exc}") from exc


def build_tower(cfg: RunConfig, model: GroupModelSpec) -> Tower:
    src = cfg.tower
    if src.endswith(".json") or Path(src).is_file():
        tower = load_tower(src, cfg.strict)
        if tower.quotients[0].ngens != model.ngens:
            raise ConfigError(f"tower has {tower.quotients[0].ngens} generators, complex group has {model.ngens}")
        return tower
    try:
        if src == "cyclic":
            if not cfg.moduli:
                raise ConfigError("the cyclic tower needs 'moduli'")
            if model.kind == "heisenberg":
                raise ConfigError("the cyclic tower needs a free or free abelian group")
            return abelian_tower(model, [[m] * model.ngens for m in cfg.moduli])
        refine = src == "abelian-refined"
        family = "abelian" if refine else src
        return make_builtin_tower(model, family, cfg.depth, cfg.p, refine)
    except ValueError as exc:
        raise ConfigError(f"bad tower {src!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# shipped examples


@dataclass
class Example:
    label: str
    complex: ChainComplexSpec
    tower: Tower
    p: int


def shipped_examples() -> list[Example]:
    """The built-in complexes with the towers the demos and checks use."""
    out = []
    for label, C, p, depth, refine in (
        ("circle", builtin_complex("circle"), 3, 5, False),
        ("wedge1", builtin_complex("wedge", 1), 2, 8, False),
        ("wedge2", builtin_complex("wedge", 2), 2, 5, False),
        ("wedge3", builtin_complex("wedge", 3), 2, 3, False),
        ("torus2", builtin_complex("torus", 2), 2, 5, False),
        ("torus2-refined", builtin_complex("torus", 2), 2, 5, True),
        ("lls22", builtin_complex("lls", 2, 2), 2, 8, False),
    ):
        out.append(Example(label, C, make_builtin_tower(C.model, "abelian", depth, p, refine), p))
    return out


# ---------------------------------------------------------------------------
# rank gradient


@dataclass
class RankGradientRow:
    level: int
    index: int
    d_estimate: int
    gradient: Fraction
    normalized_b1: Fraction
    b1_modp: dict[int, int]


@dataclass
class RankGradientReport:
    d: int
    rows: list[RankGradientRow]
    limit_estimate: Fraction
    reference: Fraction
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def rank_gradient(C: ChainComplexSpec, tower: Tower, primes=(2, 3, 5), rng=None) -> RankGradientReport:
    """Minimal generator counts of the covering free groups along the tower.

    For a wedge of ``d`` circles the cover at level ``i`` is a connected
    graph, so ``G_i`` is free of rank ``1 - chi(cover) = 1 + (d - 1) index``
    and its abelianization gives ``d_estimate = b_1(Q)``.
    """
    d = wedge_rank(C)
    if d is None:
        raise ConfigError("rank gradient needs a wedge of circles")
    rng = rng or random.Random(0)
    rows, violations = [], []
    for i, q in enumerate(tower.quotients, start=1):
        dg = betti(C, q, QQ, rng)[1]
        if dg - 1 != (d - 1) * q.order:
            violations.append(f"level {i}: d(G_i) - 1 = {dg - 1}, expected {(d - 1) * q.order}")
        graph_rank = 1 - C.euler_characteristic() * q.order
        modp = {p: betti(C, q, GF(p))[1] for p in primes}
        for p, b in modp.items():
            if not dg <= b <= graph_rank:
                violations.append(f"level {i}: chain b1(Q) <= b1(F{p}) <= d(G_i) fails ({dg}, {b}, {graph_rank})")
        rows.append(RankGradientRow(i, q.order, dg, Fraction(dg - 1, q.order), Fraction(dg, q.order), modp))
    for a, b in zip(rows, rows[1:]):
        if b.gradient > a.gradient:
            violations.append(f"level {b.level}: (d(G_i) - 1)/index increased")
        if b.normalized_b1 > a.normalized_b1:
            violations.append(f"level {b.level}: d(G_i)/index increased")
    limit = rows[-1].gradient if rows else Fraction(d - 1)
    if limit != d - 1:
        violations.append(f"rank gradient estimate {limit} differs from {d - 1}")
    return RankGradientReport(d, rows, limit, Fraction(d - 1), violations)


# ---------------------------------------------------------------------------
# orchestration


class _Run:
    def __init__(self, cfg: RunConfig, C: ChainComplexSpec, tower: Tower, out: Path, log):
        self.cfg = cfg
        self.C = C
        self.tower = tower
        self.out = out
        self.log = log
        self.violations: list[str] = []
        self.rng = random.Random(cfg.seed)
        self.degrees = cfg.degrees if cfg.degrees is not None else list(range(len(C.ranks)))
        self.table = None

    def violate(self, msg: str):
        self.violations.append(msg)
        self.log(f"  VIOLATION {msg}")

    def betti_table(self):
        if self.table is None:
            self.table = betti_table(self.C, self.tower, self.cfg.primes, self.cfg.rationals, self.rng)
        return self.table

    # analyses -----------------------------------------------------------

    def betti(self):
        table = self.betti_table()
        C, cfg = self.C, self.cfg
        chi = C.euler_characteristic()
        rows = []
        fields = ([("Q", None)] if cfg.rationals else []) + [(f"F{p}", p) for p in cfg.primes]
        for lv in table.levels:
            for label, p in fields:
                values = lv.rational if p is None else lv.modp[p]
                euler = sum((-1) ** k * b for k, b in enumerate(values))
                if euler != chi * lv.index:
                    self.violate(f"betti level {lv.level} {label}: Euler characteristic {euler} != {chi * lv.index}")
                for k in self.degrees:
                    rows.append((lv.level, lv.index, label, k, values[k], Fraction(values[k], lv.index)))
            if cfg.rationals and cfg.primes and C.coefficients.kind == INTEGERS:
                q = self.tower.quotients[lv.level - 1]
                for p in cfg.primes:
                    t = torsion_counts(C, q, p)
                    for k in range(len(C.ranks)):
                        expect = lv.rational[k] + t[k] + (t[k - 1] if k else 0)
                        if lv.modp[p][k] != expect:
                            self.violate(
                                f"betti level {lv.level}: universal coefficients fail in degree {k} for F{p}"
                            )
        header = ("level", "index", "field", "degree", "betti", "normalized")
        write_csv(self.out / "betti.csv", header, rows)
        write_json(
            self.out / "betti.json",
            {
                "complex": C.name,
                "euler_characteristic": chi,
                "levels": [
                    {
                        "level": lv.level,
                        "index": lv.index,
                        "rational": lv.rational,
                        "modp": {str(p): v for p, v in lv.modp.items()},
                    }
                    for lv in table.levels
                ],
            },
        )
        last = table.levels[-1]
        for k in self.degrees:
            vals = ", ".join(
                f"{label}: {(last.rational if p is None else last.modp[p])[k]}" for label, p in fields
            )
            self.log(f"  degree {k} at index {last.index}: {vals}")

    def spectrum(self):
        C = self.C
        spec_rows, hist_rows = [], []
        for k in self.degrees:
            Delta = complex_laplacian(C, k)
            bound = kappa_bound(Delta)
            for i, q in enumerate(self.tower.quotients, start=1):
                mu = level_measure(Delta, q)
                expected_kernel = betti(C, q, QQ, self.rng)[k]
                if mu.zero_multiplicity * q.order != expected_kernel:
                    self.violate(f"spectrum degree {k} level {i}: kernel {mu.zero_multiplicity * q.order} != b_{k}")
                if abs(mu.total_mass - C.ranks[k]) > 1e-9:
                    self.violate(f"spectrum degree {k} level {i}: total mass {mu.total_mass} != {C.ranks[k]}")
                if mu.atoms and mu.atoms[-1][0] > float(bound) + 1e-9:
                    self.violate(f"spectrum degree {k} level {i}: eigenvalue above {bound}")
                if mu.zero_multiplicity:
                    spec_rows.append((k, i, q.order, 0.0, expected_kernel, mu.zero_multiplicity))
                for x, w in mu.atoms:
                    mult = round(w * q.order)
                    spec_rows.append((k, i, q.order, x, mult, Fraction(mult, q.order)))
                for left, right, mass in mu.histogram(self.cfg.histogram_bins):
                    hist_rows.append((k, i, q.order, left, right, mass))
        write_csv(
            self.out / "spectrum.csv",
            ("degree", "level", "index", "eigenvalue", "multiplicity", "normalized_multiplicity"),
            spec_rows,
        )
        write_csv(self.out / "histogram.csv", ("degree", "level", "index", "bin_left", "bin_right", "mass"), hist_rows)
        self.log(f"  {len(spec_rows)} spectral atoms")

    def converge(self):
        moment_rows, kaz_rows = [], []
        for k in self.degrees:
            Delta = complex_laplacian(self.C, k)
            report = moment_convergence_report(Delta, self.tower, self.cfg.k_max)
            for r in report.rows:
                moment_rows.append((k, r.level, r.index, r.k, r.exact, r.l2, r.difference))
            ref = reference_l2_betti(self.C, k)
            for r in kazhdan_report(self.C, self.tower, k, ref):
                kaz_rows.append((k, r.level, r.index, r.normalized, r.reference, r.gap))
            self.log(f"  degree {k}: moments agree from level {report.agreement_level}")
        write_csv(self.out / "moments.csv", ("degree", "level", "index", "k", "exact", "l2", "difference"), moment_rows)
        write_csv(self.out / "kazhdan.csv", ("degree", "level", "index", "normalized", "reference", "gap"), kaz_rows)

    def fkdet(self):
        rows = []
        for k in self.degrees:
            Delta = complex_laplacian(self.C, k)
            for i, q in enumerate(self.tower.quotients, start=1):
                cert = fk_certificate(Delta, q)
                if cert.log_normalized_det < 0:
                    self.violate(f"fkdet degree {k} level {i}: negative log determinant")
                rows.append((k, i, q.order, abs(cert.char_poly_low_coeff), cert.log_normalized_det))
            self.log(f"  degree {k}: final log_normalized_det {rows[-1][-1]:.6f}")
        write_csv(self.out / "fkdet.csv", ("degree", "level", "index", "low_coeff_digits", "log_normalized_det"), rows)

    def tower_primes(self) -> list[int]:
        """Configured primes for which every index ratio is a power of p."""
        candidates = self.cfg.primes or [self.cfg.p]
        orders = self.tower.orders
        primes = [p for p in candidates if all(_is_power(b // a, p) and b % a == 0 for a, b in zip(orders, orders[1:]))]
        skipped = [p for p in candidates if p not in primes]
        if skipped:
            self.log(f"  skipping primes {skipped}: tower steps are not powers of them")
        if not primes:
            raise ConfigError(f"tower orders {orders} are not a p-power tower for any of {candidates}")
        return primes

    def modp(self):
        primes = self.tower_primes()
        rows = []
        for p in primes:
            for k in self.degrees:
                try:
                    rep = monotone_harness(self.C, self.tower, k, p)
                except ValueError as exc:
                    raise ConfigError(f"modp: {exc}") from exc
                for v in rep.violations:
                    self.violate(f"modp F{p} degree {k}: {v}")
                for r in rep.rows:
                    rows.append((p, k, r.level, r.index, r.betti, r.normalized, r.delta_sign))
        write_csv(
            self.out / "monotone.csv",
            ("prime", "degree", "level", "index", "b_q_Fp", "normalized", "delta_sign"),
            rows,
        )
        self.log(f"  {len(rows)} monotonicity rows")

    def padic(self):
        primes = self.tower_primes()
        indices = self.tower.orders
        reports, rows = [], []
        for p in primes:
            d = self.cfg.tower_dimension or _infer_dimension(indices, p)
            meta = PadicTowerMeta(p, d, indices)
            levels_betti = [betti(self.C, q, GF(p)) for q in self.tower.quotients]
            rank_data = []
            for q in self.tower.quotients:
                ranks = boundary_ranks(self.C, q, GF(p))
                rank_data.append(
                    [(self.C.ranks[j] * q.order, r, self.C.ranks[j] * q.order - r) for j, r in sorted(ranks.items())]
                )
            for k in self.degrees:
                seq = [b[k] for b in levels_betti]
                try:
                    rep = padic_fit(seq, meta, self.cfg.tolerance, rank_data)
                except IndexPatternError as exc:
                    raise ConfigError(f"padic: {exc}") from exc
                if rep.violation:
                    self.violate(
                        f"padic F{p} degree {k}: fitted exponent {rep.fitted_exponent:.6f} above {rep.bound}"
                    )
                reports.append({"prime": p, "degree": k, "d": d, **rep.to_json()})
                for i, (b, r) in enumerate(zip(seq, rep.residuals), start=1):
                    rows.append((p, k, i, indices[i - 1], b, r))
                self.log(f"  F{p} degree {k}: beta {rep.beta_estimate}, exponent {rep.fitted_exponent:.4g} (bound {rep.bound})")
        write_json(self.out / "padic.json", reports)
        write_csv(self.out / "residuals.csv", ("prime", "degree", "level", "index", "betti", "residual"), rows)

    def rankgrad(self):
        primes = self.cfg.primes or [2, 3, 5]
        rep = rank_gradient(self.C, self.tower, primes, self.rng)
        for v in rep.violations:
            self.violate(f"rankgrad: {v}")
        header = ("level", "index", "d_estimate", "gradient", "normalized_b1") + tuple(f"b1_F{p}" for p in primes)
        rows = [
            (r.level, r.index, r.d_estimate, r.gradient, r.normalized_b1) + tuple(r.b1_modp[p] for p in primes)
            for r in rep.rows
        ]
        write_csv(self.out / "rankgrad.csv", header, rows)
        write_json(
            self.out / "rankgrad.json",
            {"d": rep.d, "limit_estimate": rep.limit_estimate, "reference": rep.reference, "ok": rep.ok},
        )
        self.log(f"  rank gradient estimate {rep.limit_estimate}, reference {rep.reference}")


def _is_power(n: int, p: int) -> bool:
    while n > 1 and n % p == 0:
        n //= p
    return n == 1


def _infer_dimension(indices, p) -> int:
    ratio = Fraction(indices[-1], indices[-2]) if len(indices) > 1 else Fraction(0)
    d = 0
    while ratio.denominator == 1 and ratio.numerator % p == 0 and ratio > 1:
        ratio /= p
        d += 1
    if ratio != 1 or d == 0:
        raise ConfigError(f"last index ratio is not a power of {p}; set tower_dimension")
    return d


def run(cfg: RunConfig, log=None) -> int:
    """Execute the configured analyses; returns the exit code (0 ok, 1 input
    error, 2 invariant violation)."""
    log = log or (lambda msg: print(msg, file=sys.stdout))
    try:
        cfg.check_shape()
        C = parse_complex_source(cfg.complex, cfg.strict)
        if cfg.degrees is not None and any(not 0 <= k < len(C.ranks) for k in cfg.degrees):
            raise ConfigError(f"degrees {cfg.degrees} outside 0..{C.top_degree}")
        tower = build_tower(cfg, C.model)
        report = validate_tower(tower)
        if not report:
            raise ConfigError(f"tower: {report.reason}")
    except (ConfigError, FormatError, ValueError) as exc:
        log(f"error: {exc}")
        return EXIT_INPUT

    check = validate(C)
    if not check:
        log(f"invariant violation: not a chain complex: {check.reason}")
        return EXIT_VIOLATION

    out = Path(cfg.out)
    state = _Run(cfg, C, tower, out, log)
    log(f"complex {C.name or cfg.complex} ranks {list(C.ranks)}; tower orders {tower.orders}")
    for name in ANALYSES:
        if name not in cfg.analyses:
            continue
        log(f"{name}:")
        try:
            getattr(state, name)()
        except (ConfigError, FormatError) as exc:
            log(f"error: {exc}")
            return EXIT_INPUT
        except (AssertionError, ArithmeticError) as exc:
            state.violate(f"{name}: {exc}")
        except ValueError as exc:
            log(f"error: {name}: {exc}")
            return EXIT_INPUT
    if state.violations:
        log(f"{len(state.violations)} invariant violation(s)")
        return EXIT_VIOLATION
    log(f"ok; reports in {out}")
    return EXIT_OK
