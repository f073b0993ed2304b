"""Desk-scale experiment harness: sweeps reproducing the tree-count
asymptotics, the complexity upper bound, and shape-vs-shape comparisons,
with reproducible on-disk runs."""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapExceededError, ConfigError
from .heights import EULER_GAMMA, CrConstant, c_constant, height
from .lattices import IntegerLattice, RealLattice, normalize_shape, parse_matrix
from .spectral import EXACT_DET_CAP, FLOAT_PATH_CAP, count_spanning_trees, log_det_star_float

EXPERIMENT_EXACT_CAP = 300  # exact Bareiss path kept cheap inside sweeps

_SEQUENCE_KINDS = ("scale", "hexagonal_pq", "rect_match")


@dataclass(frozen=True)
class SequenceSpec:
    """Rule producing Λ_n from n.

    kind "scale":        Λ_n = n · base
    kind "hexagonal_pq": Λ_n = [[2n, n], [0, round(n√3)]]  (hexagonal shape limit)
    kind "rect_match":   Λ_n = [[2n, 0], [0, round(n√3)]]  (same determinants)
    """

    n_min: int
    n_max: int
    kind: str = "scale"
    base: IntegerLattice | None = None

    def __post_init__(self):
        if self.kind not in _SEQUENCE_KINDS:
            raise ConfigError(f"unknown sequence kind {self.kind!r}")
        if self.kind == "scale" and self.base is None:
            raise ConfigError("kind 'scale' needs a base matrix")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError("need 1 <= n_min <= n_max")

    def lattice(self, n: int) -> IntegerLattice:
        if self.kind == "scale":
            return IntegerLattice.from_rows(
                [[n * x for x in row] for row in self.base.mat]
            )
        p = round(n * math.sqrt(3.0))
        if self.kind == "hexagonal_pq":
            return IntegerLattice.from_rows([[2 * n, n], [0, p]])
        return IntegerLattice.from_rows([[2 * n, 0], [0, p]])

    def items(self):
        return ((n, self.lattice(n)) for n in range(self.n_min, self.n_max + 1))

    def shape_limit(self) -> RealLattice:
        if self.kind == "scale":
            return normalize_shape(self.base)
        if self.kind == "hexagonal_pq":
            basis = np.array([[2.0, 1.0], [0.0, math.sqrt(3.0)]])
        else:
            basis = np.array([[2.0, 0.0], [0.0, math.sqrt(3.0)]])
        return RealLattice(basis).rescaled_to_volume()


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    det: int
    log_det_star: float | None
    method: str
    predicted: float | None
    residual: float | None
    wall_ms: int


@dataclass
class Theorem1Report:
    records: list[ExperimentRecord]
    c_r: CrConstant
    height_limit: float
    shape_errors: list[float]
    max_residual_top_quartile: float = field(init=False)
    residual_at_largest: float = field(init=False)
    fraction_decreasing_last_half: float = field(init=False)

    def __post_init__(self):
        done = [rec for rec in self.records if rec.residual is not None]
        if not done:
            raise ConfigError("sweep produced no computable rows")
        q = max(1, len(done) // 4)
        self.max_residual_top_quartile = max(abs(rec.residual) for rec in done[-q:])
        self.residual_at_largest = done[-1].residual
        half = [abs(rec.residual) for rec in done[len(done) // 2 :]]
        if len(half) < 2:
            self.fraction_decreasing_last_half = 1.0
        else:
            dec = sum(1 for a, b in zip(half, half[1:]) if b <= a)
            self.fraction_decreasing_last_half = dec / (len(half) - 1)


def _log_det_star(L: IntegerLattice, exact_cap: int, float_cap: int):
    """(value, method); exact where cheap, spectral float otherwise."""
    if L.det_abs <= exact_cap:
        return math.log(count_spanning_trees(L).det_star), "exact"
    if L.det_abs <= float_cap:
        return log_det_star_float(L), "float"
    raise CapExceededError(f"det {L.det_abs} above the float cap {float_cap}")


def verify_theorem1(
    spec: SequenceSpec,
    exact_cap: int = EXPERIMENT_EXACT_CAP,
    float_cap: int = FLOAT_PATH_CAP,
) -> Theorem1Report:
    """Residuals of log det* against its predicted expansion
    c_r·det + (2/r)·log det + log det*Δ_shape, for every n in range."""
    first = spec.lattice(spec.n_min)
    r = first.r
    cr = c_constant(r)
    A = spec.shape_limit()
    h = height(A, cross_check=False).log_det_star
    records: list[ExperimentRecord] = []
    shape_errors: list[float] = []
    for n, L in spec.items():
        t0 = time.perf_counter()
        shape_errors.append(
            float(np.linalg.norm(normalize_shape(L).basis - A.basis, 2))
        )
        det = L.det_abs
        try:
            val, method = _log_det_star(L, exact_cap, float_cap)
        except CapExceededError:
            records.append(
                ExperimentRecord(n=n, det=det, log_det_star=None, method="skipped",
                                 predicted=None, residual=None,
                                 wall_ms=int(1000 * (time.perf_counter() - t0)))
            )
            continue
        predicted = cr.value * det + (2.0 / r) * math.log(det) + h
        records.append(
            ExperimentRecord(
                n=n, det=det, log_det_star=val, method=method, predicted=predicted,
                residual=val - predicted,
                wall_ms=int(1000 * (time.perf_counter() - t0)),
            )
        )
    report = Theorem1Report(records=records, c_r=cr, height_limit=h, shape_errors=shape_errors)
    if report.shape_errors[-1] > report.shape_errors[0] + 1e-9:
        raise ConfigError("sequence shapes do not converge to the declared limit")
    return report


@dataclass(frozen=True)
class TreeBound:
    holds: bool
    log_slack: float
    log_tau: float
    log_bound: float


def check_tree_bound(
    L: IntegerLattice, cr: CrConstant | None = None, exact_cap: int = EXACT_DET_CAP
) -> TreeBound:
    """τ ≤ det^{2/r-1}/(4π) · exp(c_r·det + γ + 2/r), reported as log-slack."""
    r = L.r
    cr = cr if cr is not None and cr.r == r else c_constant(r)
    det = L.det_abs
    if det <= exact_cap:
        log_tau = math.log(count_spanning_trees(L).tau)
    else:
        log_tau = log_det_star_float(L) - math.log(det)
    log_bound = (
        (2.0 / r - 1.0) * math.log(det)
        + cr.value * det
        + EULER_GAMMA
        + 2.0 / r
        - math.log(4.0 * math.pi)
    )
    slack = log_bound - log_tau
    return TreeBound(holds=slack >= 0.0, log_slack=slack, log_tau=log_tau, log_bound=log_bound)


@dataclass(frozen=True)
class ComparisonRow:
    det: int
    n_a: int
    n_b: int
    log_det_star_a: float
    log_det_star_b: float
    method_a: str
    method_b: str
    det_b: int | None = None  # set when matching was approximate

    @property
    def winner(self) -> str:
        if self.log_det_star_a > self.log_det_star_b:
            return "A"
        if self.log_det_star_b > self.log_det_star_a:
            return "B"
        return "tie"


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    diagnostic: str | None
    advisory: str | None

    @property
    def dominant_at_largest(self) -> str | None:
        return self.rows[-1].winner if self.rows else None


def compare_sequences(
    spec_a: SequenceSpec,
    spec_b: SequenceSpec,
    det_matching: str = "exact",
    exact_cap: int = EXPERIMENT_EXACT_CAP,
    float_cap: int = FLOAT_PATH_CAP,
) -> ComparisonTable:
    """Pair lattices of equal determinant across the two sequences and report
    which side has the larger complexity (evidence only: a finite sweep
    cannot certify the asymptotic statement)."""
    if det_matching not in ("exact", "near"):
        raise ConfigError("det_matching must be 'exact' or 'near'")
    a_items = [(n, L, L.det_abs) for n, L in spec_a.items()]
    b_by_det = {}
    for n, L in spec_b.items():
        b_by_det.setdefault(L.det_abs, (n, L))
    rows = []
    for n_a, La, det in a_items:
        hit = b_by_det.get(det)
        det_b = None
        if hit is None and det_matching == "near":
            close = [d for d in b_by_det if abs(d - det) <= 0.05 * det]
            if close:
                det_b = min(close, key=lambda d: abs(d - det))
                hit = b_by_det[det_b]
        if hit is None:
            continue
        n_b, Lb = hit
        va, ma = _log_det_star(La, exact_cap, float_cap)
        vb, mb = _log_det_star(Lb, exact_cap, float_cap)
        # equal dets cancel in the tau comparison, so log det* decides
        rows.append(
            ComparisonRow(det=det, n_a=n_a, n_b=n_b, log_det_star_a=va,
                          log_det_star_b=vb, method_a=ma, method_b=mb, det_b=det_b)
        )
    if not rows:
        return ComparisonTable(
            rows=(),
            diagnostic="no matching determinants between the sequences in range",
            advisory=None,
        )
    adv = (
        f"sequence {rows[-1].winner} has more spanning trees at the largest "
        f"matched determinant {rows[-1].det} (desk-scale evidence, not a proof)"
    )
    return ComparisonTable(rows=tuple(rows), diagnostic=None, advisory=adv)


# ---------------------------------------------------------------------------
# experiment files


def _parse_config(text: str) -> dict:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if "sequence" not in parser:
        raise ConfigError("config must have a [sequence] section")

    def seq_from(section) -> SequenceSpec:
        kind = section.get("kind", "scale")
        base = None
        if "base" in section:
            base = parse_matrix(section["base"])
        try:
            n_min = section.getint("n_min")
            n_max = section.getint("n_max")
        except (TypeError, ValueError) as exc:
            raise ConfigError("n_min/n_max must be integers") from exc
        if n_min is None or n_max is None:
            raise ConfigError("[sequence] needs n_min and n_max")
        return SequenceSpec(n_min=n_min, n_max=n_max, kind=kind, base=base)

    out = {"sequence": seq_from(parser["sequence"])}
    if "sequence_b" in parser:
        out["sequence_b"] = seq_from(parser["sequence_b"])
    compute = parser["compute"] if "compute" in parser else {}
    out["exact_cap"] = int(compute.get("exact_cap", EXPERIMENT_EXACT_CAP))
    out["float_cap"] = int(compute.get("float_cap", FLOAT_PATH_CAP))
    output = parser["output"] if "output" in parser else {}
    out["dir"] = output.get("dir", "runs")
    out["formats"] = [f.strip() for f in output.get("formats", "csv,json").split(",")]
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.15g}"
    return str(x)


CSV_COLUMNS = ["n", "det", "log_det_star", "method", "predicted", "residual", "wall_ms"]


@dataclass(frozen=True)
class RunResult:
    run_dir: Path
    report: Theorem1Report | None
    comparison: ComparisonTable | None


def run_experiment_file(config: str | Path, base_dir: str | Path | None = None) -> RunResult:
    """Execute a key=value experiment file and persist the run: records.csv,
    records.json, config.echo and manifest.json in a fresh run directory.

    Numeric CSV fields are formatted at 15 significant digits and are
    bit-for-bit reproducible across reruns; wall_ms is timing metadata and
    is exempt from that contract.
    """
    if not str(config).strip():
        raise ConfigError("empty config")
    path = Path(config)
    if path.is_file():
        text = path.read_text()
    elif isinstance(config, str) and "[" in config:
        text = config
    else:
        raise ConfigError(f"config file not found: {config}")
    if not text.strip():
        raise ConfigError("empty config")
    cfg = _parse_config(text)

    out_root = Path(base_dir) if base_dir is not None else Path(cfg["dir"])
    out_root.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    digest = hashlib.sha256(text.encode()).hexdigest()[:8]
    run_dir = out_root / f"run-{stamp}-{digest}"
    suffix = 0
    while run_dir.exists():
        suffix += 1
        run_dir = out_root / f"run-{stamp}-{digest}-{suffix}"
    run_dir.mkdir()

    t0 = time.perf_counter()
    comparison = None
    report = None
    if "sequence_b" in cfg:
        comparison = compare_sequences(
            cfg["sequence"], cfg["sequence_b"],
            exact_cap=cfg["exact_cap"], float_cap=cfg["float_cap"],
        )
        records = [
            {
                "det": row.det, "n_a": row.n_a, "n_b": row.n_b,
                "log_det_star_a": row.log_det_star_a,
                "log_det_star_b": row.log_det_star_b,
                "winner": row.winner,
            }
            for row in comparison.rows
        ]
        columns = ["det", "n_a", "n_b", "log_det_star_a", "log_det_star_b", "winner"]
    else:
        report = verify_theorem1(
            cfg["sequence"], exact_cap=cfg["exact_cap"], float_cap=cfg["float_cap"]
        )
        records = [rec.__dict__ for rec in report.records]
        columns = CSV_COLUMNS

    if "csv" in cfg["formats"]:
        with open(run_dir / "records.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for rec in records:
                writer.writerow([_fmt(rec[c]) for c in columns])
    if "json" in cfg["formats"]:
        payload = [
            {k: (f"{v:.15g}" if isinstance(v, float) else v) for k, v in rec.items()}
            for rec in records
        ]
        (run_dir / "records.json").write_text(json.dumps(payload, indent=1))
    (run_dir / "config.echo").write_text(text)
    manifest = {
        "package": "toruslab 0.1.0",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
        "config_sha256": digest,
        "total_wall_ms": int(1000 * (time.perf_counter() - t0)),
        "rows": len(records),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return RunResult(run_dir=run_dir, report=report, comparison=comparison)
