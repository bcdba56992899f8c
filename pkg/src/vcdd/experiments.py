"""Sweeps over network width, training epochs and sample size.

Every grid point is an independent work item keyed by ``(width, axis value,
seed)``.  Feature maps and network initializations are seeded from
``(seed, N)`` so any single point can be recomputed on its own, and results
are sorted by key before output so worker scheduling never shows up in the
tables.
"""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds
from .data import (
    BinaryDataset,
    cifar10_class,
    corrupt_labels,
    corrupt_pixels,
    load_cifar10,
    load_dataset,
    load_mnist,
    make_binary_task,
    synth_gaussians,
)
from .features import DEFAULT_SIGMA, RELU, apply_features, apply_z_scaling, fit_z_scaling, sample_map, scale_inputs
from .mlp import TrainConfig, TrainingDiverged, default_record, train_sgd
from .rng import generator
from .solvers import DEFAULT_C, fit_linear_svm, fit_min_norm_ls, zero_one_error

WIDTH, EPOCHS, SAMPLES = "width", "epochs", "samples"
AXES = (WIDTH, EPOCHS, SAMPLES)
LS, SVM, MLP = "ls", "svm", "mlp"
LEARNERS = (LS, SVM, MLP)
EQ1, EQ2 = "eq1", "eq2"
VARIANTS = (EQ1, EQ2)

ZERO_TOL = 1e-12
MLP_GATE = 0.01
NAN = float("nan")


# ---------------------------------------------------------------- data


@dataclass(frozen=True)
class DataSpec:
    """Where a binary task comes from and what noise is applied to it.

    ``source`` is one of ``mnist:AvB``, ``cifar:A-B`` (class names or
    indices), ``synth`` or ``cache:PATH``.
    """

    source: str = "mnist:5v8"
    n_train: int = 800
    n_test: int = 2000
    seed: int = 0
    label_noise: float = 0.0
    pixel_noise: float = 0.0
    mnist_dir: str | None = None
    cifar_dir: str | None = None
    synth_dim: int = 50
    synth_sep: float = 4.0


def _find_mnist(directory) -> tuple[Path, Path]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"MNIST directory {d} does not exist")

    def pick(tag):
        hits = sorted(d.glob(f"*{tag}*"))
        preferred = [p for p in hits if p.name.startswith("train-")]
        if not hits:
            raise FileNotFoundError(f"no *{tag}* file in {d}")
        return (preferred or hits)[0]

    return pick("images-idx3-ubyte"), pick("labels-idx1-ubyte")


def _class_pair(text: str, sep: str, parse) -> tuple[int, int]:
    parts = text.split(sep)
    if len(parts) != 2:
        raise ValueError(f"class pair {text!r} must look like A{sep}B")
    return parse(parts[0]), parse(parts[1])


def build_dataset(spec: DataSpec) -> BinaryDataset:
    """Load and split the task, then apply label and pixel noise."""
    kind, _, arg = spec.source.partition(":")
    if kind == "mnist":
        if spec.mnist_dir is None:
            raise ValueError("MNIST source needs an MNIST directory")
        a, b = _class_pair(arg or "5v8", "v", int)
        raw = load_mnist(*_find_mnist(spec.mnist_dir))
        ds = make_binary_task(raw, a, b, spec.n_train, spec.n_test, spec.seed)
    elif kind == "cifar":
        if spec.cifar_dir is None:
            raise ValueError("CIFAR source needs a CIFAR-10 directory")
        a, b = _class_pair(arg or "cat-automobile", "-", cifar10_class)
        paths = sorted(Path(spec.cifar_dir).glob("data_batch_*.bin"))
        if not paths:
            raise FileNotFoundError(f"no data_batch_*.bin files in {spec.cifar_dir}")
        ds = make_binary_task(load_cifar10(paths), a, b, spec.n_train, spec.n_test, spec.seed)
    elif kind == "synth":
        ds = synth_gaussians(spec.synth_dim, spec.n_train, spec.n_test, spec.synth_sep, spec.seed)
    elif kind == "cache":
        ds = load_dataset(arg)
    else:
        raise ValueError(f"unknown dataset source {spec.source!r}")
    if spec.pixel_noise:
        ds = corrupt_pixels(ds, spec.pixel_noise, spec.seed)
    if spec.label_noise:
        ds = corrupt_labels(ds, spec.label_noise, spec.seed)
    return ds


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class SweepConfig:
    axis: str = WIDTH
    learner: str = LS
    grid: tuple[int, ...] | None = None  # None: default grid for the axis
    features: str = RELU
    sigma: float = DEFAULT_SIGMA
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    a1: float = 1.0
    a2: float = 1.0
    variant: str = EQ1
    C: float = DEFAULT_C
    sphere: bool = False
    width: int = 500  # fixed N for the samples axis
    widths: tuple[int, ...] = (10, 100)  # networks trained on the epochs axis
    mlp: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.learner not in LEARNERS:
            raise ValueError(f"learner must be one of {LEARNERS}, got {self.learner!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"bound variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.axis == EPOCHS and self.learner != MLP:
            raise ValueError("the epochs axis needs the mlp learner")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ValueError("need at least one seed, without repeats")
        if self.grid is not None:
            g = list(self.grid)
            if not g or any(b <= a for a, b in zip(g, g[1:])) or g[0] < 1:
                raise ValueError("grid must be non-empty, positive and strictly increasing")
        if self.width < 1 or not self.widths or min(self.widths) < 1:
            raise ValueError("network widths must be >= 1")
        bounds._check_constants(self.a1, self.a2)


def default_width_grid(n: int, anticipated: float | None = None, points: int = 30, upper: float = 2.5) -> list[int]:
    """Log-spaced widths from 2 to ``upper * n``.

    The band within 20% of ``anticipated`` (default ``n``) gets three times
    the base density, and ``anticipated`` itself is always included.
    """
    lo, hi = 2, max(3, int(round(upper * n)))
    a = float(n if anticipated is None else anticipated)
    base = np.geomspace(lo, hi, points)
    k = max(3, int(round(3 * points * math.log(1.5) / math.log(hi / lo))))
    dense = np.geomspace(0.8 * a, 1.2 * a, k)
    vals = np.concatenate([base, dense, [a]])
    return sorted({int(round(v)) for v in vals if round(v) >= 1})


def default_sample_grid(lo: int = 100, hi: int = 1200, step: int = 100) -> list[int]:
    return list(range(lo, hi + 1, step))


# ---------------------------------------------------------------- results


@dataclass
class Row:
    """One (width, axis value, seed) measurement."""

    axis_value: int
    seed: int
    n: int
    width: int
    dim: int
    train_error: float = NAN
    test_error: float = NAN
    train_mse: float = NAN
    norm_sq: float = NAN
    h: float = NAN
    bound: float = NAN
    eta: float = NAN
    epsilon: float = NAN
    n_support: int | None = None
    first_crossing: int | None = None
    flags: tuple[str, ...] = ()
    wall_time: float = 0.0  # kept in memory only

    @property
    def key(self):
        return (self.width, self.axis_value, self.seed)


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[Row]

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.key)

    def axis_values(self) -> list[int]:
        return sorted({r.axis_value for r in self.rows})

    def groups(self) -> dict[tuple[int, int], list[Row]]:
        out: dict[tuple[int, int], list[Row]] = {}
        for r in self.rows:
            out.setdefault((r.width, r.axis_value), []).append(r)
        return out

    def merged(self, other: "SweepResult") -> "SweepResult":
        """Union of rows; rows of ``other`` replace rows with the same key."""
        keyed = {r.key: r for r in self.rows}
        keyed.update({r.key: r for r in other.rows})
        grid = sorted({r.axis_value for r in keyed.values()})
        return SweepResult(dataclasses.replace(self.config, grid=tuple(grid)), list(keyed.values()))


def aggregate(values) -> tuple[float, float, float]:
    """Mean, min and max over the finite entries (NaN when there are none)."""
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return NAN, NAN, NAN
    return float(np.mean(vals)), float(min(vals)), float(max(vals))


# ---------------------------------------------------------------- per-point work


def point_seed(seed: int, width: int) -> int:
    """Feature-map / initialization seed for replicate ``seed`` at width ``width``."""
    return int(generator(seed, width).integers(0, 2**63 - 1))


def _attach_bound(row: Row, cfg: SweepConfig) -> Row:
    if not math.isfinite(row.h):
        return row
    flags = list(row.flags)
    if cfg.variant == EQ1:
        res = bounds.vc_bound(bounds.BoundParams(row.n, row.h, row.train_error, cfg.a1, cfg.a2))
        row.bound, row.eta, row.epsilon = res.bound, res.eta, res.epsilon
        if res.out_of_regime:
            flags.append("out_of_regime")
    else:
        row.bound = bounds.second_descent_bound(row.n, row.h)
        if row.train_error > 0.0:
            flags.append("train_error_nonzero")
        if row.h > row.n:
            flags.append("out_of_regime")
    row.flags = tuple(flags)
    return row


def _linear_point(cfg: SweepConfig, ds: BinaryDataset, width: int, seed: int, axis_value: int) -> Row:
    Xtr, Xte, _ = scale_inputs(ds.X_train, ds.X_test)
    fmap = sample_map(cfg.features, Xtr.shape[1], width, point_seed(seed, width), cfg.sigma)
    Ftr = apply_features(fmap, Xtr)
    fmap = fit_z_scaling(fmap, Ftr, sphere=cfg.sphere)
    Ztr, Zte = apply_z_scaling(fmap, Ftr), apply_z_scaling(fmap, apply_features(fmap, Xte))
    row = Row(axis_value, seed, ds.n_train, width, fmap.output_dim)
    flags = []
    if cfg.learner == LS:
        model = fit_min_norm_ls(Ztr, ds.y_train)
    else:
        fit = fit_linear_svm(Ztr, ds.y_train, C=cfg.C)
        model = fit.model
        row.n_support = fit.n_support
        if not fit.converged:
            flags.append("svm_not_converged")
    resid = model.decision(Ztr) - ds.y_train
    row.train_mse = float(resid @ resid) / ds.n_train
    row.train_error = zero_one_error(model, Ztr, ds.y_train)
    row.test_error = zero_one_error(model, Zte, ds.y_test)
    row.norm_sq = model.norm_sq
    row.h = bounds.linear_vc_dim(model.norm_sq, fmap.output_dim)
    row.flags = tuple(flags)
    return _attach_bound(row, cfg)


def _mlp_rows(cfg: SweepConfig, ds: BinaryDataset, width: int, seed: int, per_epoch: bool) -> list[Row]:
    Xtr, Xte, _ = scale_inputs(ds.X_train, ds.X_test)
    scaled = BinaryDataset(Xtr, ds.y_train, Xte, ds.y_test, ds.provenance)
    tcfg = dataclasses.replace(cfg.mlp, seed=point_seed(seed, width))
    if not per_epoch:
        record = lambda e: False  # noqa: E731 - only the final epoch
    elif cfg.grid is not None:
        wanted = set(cfg.grid)
        record = wanted.__contains__
    else:
        record = default_record
    flags: tuple[str, ...] = ()
    try:
        _, hist = train_sgd(scaled, width, tcfg, record=record)
    except TrainingDiverged as exc:
        hist, flags = exc.history, ("diverged",)
    crossing = next((e for e, tr in zip(hist.epoch, hist.train_error) if tr < MLP_GATE), None)
    rows = []
    for e, tr, te, ns in zip(hist.epoch, hist.train_error, hist.test_error, hist.output_norm_sq):
        axis_value = e if per_epoch else width
        row = Row(axis_value, seed, ds.n_train, width, width, tr, te, norm_sq=ns, flags=flags)
        row.first_crossing = crossing if per_epoch else None
        if tr < MLP_GATE and math.isfinite(ns):
            row.h = ns + 1.0  # same as mlp.estimate_vc_dim on the recorded weights
            _attach_bound(row, cfg)
        else:
            row.flags = row.flags + ("above_gate",)
        rows.append(row)
    if flags and not rows:
        rows.append(Row(cfg.mlp.epochs if per_epoch else width, seed, ds.n_train, width, width, flags=flags))
    return rows


def _run_task(cfg: SweepConfig, ds: BinaryDataset, task) -> list[Row]:
    kind, width, seed, n = task
    start = time.perf_counter()
    try:
        if kind == EPOCHS:
            rows = _mlp_rows(cfg, ds, width, seed, per_epoch=True)
        elif cfg.learner == MLP:
            sub = ds if kind == WIDTH else _prefix(ds, n, seed)
            rows = _mlp_rows(cfg, sub, width, seed, per_epoch=False)
            for r in rows:
                r.axis_value = width if kind == WIDTH else n
        elif kind == WIDTH:
            rows = [_linear_point(cfg, ds, width, seed, width)]
        else:
            rows = [_linear_point(cfg, _prefix(ds, n, seed), width, seed, n)]
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        axis_value = width if kind == WIDTH else (n if kind == SAMPLES else cfg.mlp.epochs)
        reason = str(exc).replace(",", " ").replace(";", " ").replace("\n", " ")
        rows = [Row(axis_value, seed, n, width, width, flags=(f"failed:{type(exc).__name__}:{reason}",))]
    elapsed = time.perf_counter() - start
    for r in rows:
        r.wall_time = elapsed
    return rows


# ---------------------------------------------------------------- worker pool

_SHARED: dict = {}


def _init_worker(cfg, ds):
    _SHARED["cfg"], _SHARED["ds"] = cfg, ds


def _pool_task(task):
    return _run_task(_SHARED["cfg"], _SHARED["ds"], task)


def _execute(cfg: SweepConfig, ds: BinaryDataset, tasks, workers: int | None) -> list[Row]:
    workers = max(1, min(workers or 1, len(tasks)))
    if workers == 1:
        chunks = [_run_task(cfg, ds, t) for t in tasks]
    else:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg, ds)) as pool:
            chunks = list(pool.map(_pool_task, tasks))
    return [r for chunk in chunks for r in chunk]


# ---------------------------------------------------------------- sweeps


def sweep_width(cfg: SweepConfig, ds: BinaryDataset, workers: int | None = 1) -> SweepResult:
    """Fit one model per (N, seed).

    Without an explicit grid the default log grid is used.  For the SVM the
    threshold is not known in advance, so a second pass densifies the band
    around the support-vector count found at the first interpolating width.
    """
    if cfg.axis != WIDTH:
        raise ValueError("sweep_width needs a width-axis config")
    grid = list(cfg.grid) if cfg.grid is not None else default_width_grid(ds.n_train)
    rows = _execute(cfg, ds, [(WIDTH, N, s, ds.n_train) for N in grid for s in cfg.seeds], workers)
    result = SweepResult(dataclasses.replace(cfg, grid=tuple(grid)), rows)
    if cfg.grid is None and cfg.learner == SVM:
        star = interpolation_threshold(result)
        if star is not None:
            sv = [r.n_support for r in result.groups()[(star, star)] if r.n_support is not None]
            if sv:
                extra = [N for N in _band(float(np.mean(sv)), len(grid)) if N not in grid]
                if extra:
                    more = _execute(cfg, ds, [(WIDTH, N, s, ds.n_train) for N in extra for s in cfg.seeds], workers)
                    result = result.merged(SweepResult(cfg, more))
    return result


def _band(center: float, base_points: int) -> list[int]:
    """Integer widths within 20% of ``center`` at three times the base density."""
    k = max(5, int(round(3 * base_points * math.log(1.5) / math.log(max(center, 4.0)))))
    return sorted({max(1, int(round(v))) for v in np.geomspace(0.8 * center, 1.2 * center, k)})


def sweep_epochs(cfg: SweepConfig, ds: BinaryDataset, workers: int | None = 1) -> SweepResult:
    """Train one network per (width, seed) and tabulate its training history."""
    if cfg.axis != EPOCHS:
        raise ValueError("sweep_epochs needs an epochs-axis config")
    tasks = [(EPOCHS, N, s, ds.n_train) for N in cfg.widths for s in cfg.seeds]
    return SweepResult(cfg, _execute(cfg, ds, tasks, workers))


def subsample_order(y: np.ndarray, seed: int) -> np.ndarray:
    """Class-interleaved random ordering of the training indices.

    Every prefix is as balanced as the class counts allow, and the prefix of
    length ``n`` is contained in the prefix of any longer length.
    """
    y = np.asarray(y)
    g = generator(seed, 2)
    pos = g.permutation(np.flatnonzero(y > 0))
    neg = g.permutation(np.flatnonzero(y < 0))
    k = min(len(pos), len(neg))
    head = np.empty(2 * k, dtype=np.int64)
    head[0::2], head[1::2] = pos[:k], neg[:k]
    return np.concatenate([head, pos[k:], neg[k:]])


def _prefix(ds: BinaryDataset, n: int, seed: int) -> BinaryDataset:
    if n > ds.n_train:
        raise ValueError(f"requested {n} training samples but only {ds.n_train} are available")
    idx = subsample_order(ds.y_train, seed)[:n]
    prov = dict(ds.provenance, subsample=n)
    return BinaryDataset(ds.X_train[idx], ds.y_train[idx], ds.X_test, ds.y_test, prov)


def sweep_samples(cfg: SweepConfig, ds: BinaryDataset, workers: int | None = 1) -> SweepResult:
    """Fixed width, growing nested training subsets, fixed test set.

    Grid values above the available training count are skipped and kept as
    flagged rows.
    """
    if cfg.axis != SAMPLES:
        raise ValueError("sweep_samples needs a samples-axis config")
    grid = list(cfg.grid) if cfg.grid is not None else default_sample_grid()
    tasks, skipped = [], []
    for n in grid:
        for s in cfg.seeds:
            if n > ds.n_train:
                skipped.append(Row(n, s, n, cfg.width, cfg.width, flags=("skipped:insufficient_data",)))
            else:
                tasks.append((SAMPLES, cfg.width, s, n))
    rows = _execute(cfg, ds, tasks, workers) + skipped
    return SweepResult(dataclasses.replace(cfg, grid=tuple(grid)), rows)


def run_sweep(cfg: SweepConfig, ds: BinaryDataset, workers: int | None = 1) -> SweepResult:
    return {WIDTH: sweep_width, EPOCHS: sweep_epochs, SAMPLES: sweep_samples}[cfg.axis](cfg, ds, workers)


# ---------------------------------------------------------------- analysis


def _interpolates(row: Row, criterion: str) -> bool:
    if criterion == "mse":
        return math.isfinite(row.train_mse) and row.train_mse <= ZERO_TOL
    if criterion == "zero_one":
        return math.isfinite(row.train_error) and row.train_error <= ZERO_TOL
    if criterion == "gate":
        return math.isfinite(row.train_error) and row.train_error < MLP_GATE
    raise ValueError(f"unknown threshold criterion {criterion!r}")


def threshold_criterion(learner: str) -> str:
    """LS interpolates when the squared loss is zero, the SVM when the 0/1 loss
    is zero, the MLP once training error is under 1%."""
    return {LS: "mse", SVM: "zero_one", MLP: "gate"}[learner]


def interpolation_threshold(result: SweepResult, criterion: str = "auto", width: int | None = None):
    """Smallest axis value at which every seed interpolates, or ``None``."""
    crit = threshold_criterion(result.config.learner) if criterion == "auto" else criterion
    for (w, value), rows in sorted(result.groups().items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if width is not None and w != width:
            continue
        if rows and all(_interpolates(r, crit) for r in rows):
            return value
    return None


def interpolation_regressions(result: SweepResult, criterion: str = "auto") -> list[int]:
    """Axis values past the threshold where some seed stops interpolating."""
    crit = threshold_criterion(result.config.learner) if criterion == "auto" else criterion
    star = interpolation_threshold(result, crit)
    if star is None:
        return []
    return sorted({r.axis_value for r in result.rows if r.axis_value >= star and not _interpolates(r, crit)})


def mean_at(result: SweepResult, axis_value: int, column: str, width: int | None = None) -> float:
    rows = [r for r in result.rows if r.axis_value == axis_value and (width is None or r.width == width)]
    return aggregate(getattr(r, column) for r in rows)[0]


# ---------------------------------------------------------------- CSV

AGG_COLUMNS = ("train_error", "test_error", "norm_sq", "bound")
CSV_HEADER = (
    "axis", "axis_value", "seed", "n", "width", "dim", "learner", "features", "variant", "a1", "a2",
    "train_error", "test_error", "train_mse", "norm_sq", "h", "bound", "eta", "epsilon",
    "n_support", "first_crossing", "flags",
) + tuple(f"{c}_{s}" for c in AGG_COLUMNS for s in ("mean", "min", "max"))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        raise TypeError("booleans are not CSV values")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def csv_lines(result: SweepResult) -> list[str]:
    cfg = result.config
    aggs = {key: [aggregate(getattr(r, c) for r in rows) for c in AGG_COLUMNS] for key, rows in result.groups().items()}
    features = cfg.features if cfg.learner != MLP else "mlp"
    lines = [",".join(CSV_HEADER)]
    for r in result.rows:
        cells = [
            cfg.axis, _fmt(r.axis_value), _fmt(r.seed), _fmt(r.n), _fmt(r.width), _fmt(r.dim),
            cfg.learner, features, cfg.variant, _fmt(float(cfg.a1)), _fmt(float(cfg.a2)),
            _fmt(r.train_error), _fmt(r.test_error), _fmt(r.train_mse), _fmt(r.norm_sq), _fmt(r.h),
            _fmt(r.bound), _fmt(r.eta), _fmt(r.epsilon), _fmt(r.n_support), _fmt(r.first_crossing),
            ";".join(r.flags),
        ]
        for stats in aggs[(r.width, r.axis_value)]:
            cells.extend(_fmt(v) for v in stats)
        lines.append(",".join(cells))
    return lines


def write_csv(result: SweepResult, path) -> None:
    if not result.rows:
        raise ValueError("refusing to write an empty sweep")
    Path(path).write_text("\n".join(csv_lines(result)) + "\n", encoding="ascii")


_INT_COLUMNS = {"axis_value", "seed", "n", "width", "dim", "n_support", "first_crossing"}
_TEXT_COLUMNS = {"axis", "learner", "features", "variant", "flags"}


def read_csv(path) -> list[dict]:
    """Parse a sweep CSV into dicts with typed values (``None`` for blanks)."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or tuple(lines[0].split(",")) != CSV_HEADER:
        raise ValueError(f"{path}: header does not match the sweep CSV schema")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(CSV_HEADER):
            raise ValueError(f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, got {len(cells)}")
        rec = {}
        for name, cell in zip(CSV_HEADER, cells):
            if name in _TEXT_COLUMNS:
                rec[name] = cell
            elif cell == "":
                rec[name] = None
            elif name in _INT_COLUMNS:
                rec[name] = int(cell)
            else:
                rec[name] = float(cell)
        out.append(rec)
    return out


def audit_records(records: list[dict]) -> list[str]:
    """Recompute derived columns from the stored ones; returns mismatch messages.

    Checks ``h`` against the norm, the bound against ``(n, h, train_error,
    a1, a2)``, ``bound >= train_error`` for the full bound, and the
    aggregate columns against the per-seed rows.
    """
    problems = []
    for i, rec in enumerate(records, start=2):
        h = rec["h"]
        if h is None or not math.isfinite(h):
            continue
        if rec["learner"] == MLP:
            want_h = rec["norm_sq"] + 1.0
        else:
            want_h = bounds.linear_vc_dim(rec["norm_sq"], rec["dim"])
        if want_h != h:
            problems.append(f"line {i}: h={h!r} but norm_sq gives {want_h!r}")
            continue
        if rec["variant"] == EQ1:
            res = bounds.vc_bound(bounds.BoundParams(rec["n"], h, rec["train_error"], rec["a1"], rec["a2"]))
            want = res.bound
            if res.eta != rec["eta"] or res.epsilon != rec["epsilon"]:
                problems.append(f"line {i}: eta/epsilon do not recompute")
            if want < rec["train_error"]:
                problems.append(f"line {i}: bound below training error")
        else:
            want = bounds.second_descent_bound(rec["n"], h)
        if want != rec["bound"]:
            problems.append(f"line {i}: bound={rec['bound']!r} but recomputes to {want!r}")
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec["width"], rec["axis_value"]), []).append(rec)
    for key, recs in groups.items():
        for c in AGG_COLUMNS:
            want = aggregate(r[c] for r in recs)
            for r in recs:
                got = (r[f"{c}_mean"], r[f"{c}_min"], r[f"{c}_max"])
                if not all(_same(a, b) for a, b in zip(got, want)):
                    problems.append(f"width={key[0]} axis_value={key[1]}: {c} aggregates do not recompute")
                    break
    return problems


def _same(a: float, b: float) -> bool:
    return (math.isnan(a) and math.isnan(b)) or a == b


def audit_csv(path) -> list[str]:
    return audit_records(read_csv(path))
