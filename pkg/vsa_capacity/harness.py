"""Seeded Monte-Carlo runs of the sequence memory and their comparison
against the analytic predictions.

Trial ``i`` draws every random quantity it needs (codebook, sequence, noise,
tie-breaks) from its own generator derived from ``(seed, i)``, so results do
not depend on how trials are chunked or scheduled.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import numpy as np
from scipy import special, stats

from .codebook import (
    BindingKind,
    BindingOperator,
    Scheme,
    generate_codebook,
    make_binding,
    second_moment,
    variance_ratio,
)
from .config import ExperimentSpec, SweepConfig
from .dsr import dsr_accuracy, dsr_decode, dsr_encode, make_dsr_code
from .exceptions import InvalidParameterError, VSAError
from .memory import (
    EMPTY,
    REJECT,
    ActivationKind,
    InputSequence,
    NoiseKind,
    burn_in_steps,
    classify,
    detect,
)
from .theory import BitFlip, accuracy_numeric, item_info, moment_curve, snr
from .utils import as_generator, draw_seed, logger, trial_generator, wilson_interval

try:
    import anyio
    import anyio.to_thread
except ImportError:
    anyio = None  # type:ignore[assignment]

# cap on T * N * D float64 cells held by one batch of per-trial codebooks
_MAX_BATCH_CELLS = 2**24


@dataclass
class _Counts:
    """Outcome matrices for a block of trials, one column per lookback.

    ``correct`` is the hit (item slot) or correct rejection (EMPTY slot in
    detection mode); ``empty`` marks EMPTY slots.
    """

    correct: np.ndarray
    empty: np.ndarray

    @classmethod
    def concat(cls, parts: Iterable[_Counts]) -> _Counts:
        parts = list(parts)
        return cls(
            np.concatenate([p.correct for p in parts]),
            np.concatenate([p.empty for p in parts]),
        )


@dataclass(frozen=True)
class TheoryPoint:
    p_corr: float
    correct_rejection: float = math.nan


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    binding: str
    N: int
    D: int
    activation: str
    contraction: float
    kappa: Optional[int]
    gamma: Optional[float]
    M: Union[int, str]
    K: int
    noise: str
    noise_level: float
    input_sparsity: float
    code_sparsity: float
    threshold: Optional[float]
    shared_codebook: bool
    trials: int
    items: int
    hits: int
    p_empirical: float
    ci_lo: float
    ci_hi: float
    p_theory: float
    bits_empirical: float
    bits_theory: float
    empties: int = 0
    rejections: int = 0
    cr_empirical: float = math.nan
    cr_theory: float = math.nan

    @classmethod
    def fieldnames(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def extend(self, other: SweepResult) -> None:
        self.rows.extend(other.rows)

    def records(self) -> list[dict[str, Any]]:
        return [row.as_dict() for row in self.rows]

    def table(self, fieldnames: Optional[list[str]] = None) -> Table:
        return Table(fieldnames or SweepRow.fieldnames(), self.records(), self.config)


@dataclass
class Table:
    """Plot-ready rows plus the resolved configuration that produced them."""

    fieldnames: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def write(
        self, out_dir: Union[str, Path], stem: str, fmt: str = "csv", meta: Optional[dict] = None
    ) -> list[Path]:
        """csv: ``<stem>.csv`` plus a ``<stem>.json`` sidecar with config and
        meta; json: a single ``<stem>.json`` that also holds the rows."""
        out_dir = Path(out_dir)
        sidecar = {"config": self.config, **(meta or {})}
        if fmt == "csv":
            return [
                write_csv(out_dir / f"{stem}.csv", self.fieldnames, self.rows),
                write_json(out_dir / f"{stem}.json", sidecar),
            ]
        if fmt == "json":
            rows = [{k: row.get(k) for k in self.fieldnames} for row in self.rows]
            return [write_json(out_dir / f"{stem}.json", {**sidecar, "rows": rows})]
        raise InvalidParameterError(f"[-] Error: unknown output format {fmt!r}")


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path: Union[str, Path], fieldnames: list[str], rows: list[dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\r\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _cell(row.get(k)) for k in fieldnames})
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def write_json(path: Union[str, Path], data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


# -- theory for a configuration --------------------------------------------


def _decay_sum(contraction: float, steps: Optional[int]) -> float:
    """sum_{k < steps} lambda^2k, steps=None for the infinite sum."""
    lam2 = contraction**2
    if steps is None:
        return 1.0 / (1.0 - lam2)
    if contraction == 1.0:
        return float(steps)
    return -math.expm1(steps * math.log(lam2)) / (1.0 - lam2)


def _linear_point(
    spec: ExperimentSpec, lookback: int, weight: float, noise_weight: float
) -> TheoryPoint:
    """Score statistics for a linear network whose stored items (the probed
    one included) carry total squared weight `weight`, noise `noise_weight`
    (both in code units of the unbound state)."""
    n, d = spec.n_dim, spec.n_tokens
    lam2k = spec.contraction ** (2 * lookback)
    vr = variance_ratio(spec.scheme, spec.code_sparsity)
    total = weight + noise_weight
    s = math.sqrt(n * lam2k / total)
    hit_scale = math.sqrt(max(total - lam2k + lam2k * vr, 0.0) / total)
    theta = None if spec.threshold is None else spec.threshold * s
    p = float(accuracy_numeric(s, d, theta, hit_scale, settings=spec.settings))
    cr = math.nan if theta is None else float(np.exp(d * special.log_ndtr(theta)))
    return TheoryPoint(p, cr)


def _mean_points(points: list[TheoryPoint], weights: np.ndarray) -> TheoryPoint:
    p = float(np.dot(weights, [t.p_corr for t in points]))
    cr = float(np.dot(weights, [t.correct_rejection for t in points]))
    return TheoryPoint(p, cr)


def _linear_theory(spec: ExperimentSpec, lookback: int) -> TheoryPoint:
    lam = spec.contraction
    v = second_moment(spec.scheme, spec.n_dim, spec.code_sparsity)
    if v == 0.0:
        return TheoryPoint(1.0 / spec.n_tokens)
    steps = None if spec.filled else spec.length
    noise_weight = 0.0
    sigma2 = spec.noise_level**2 / v
    if spec.noise is NoiseKind.READOUT:
        noise_weight = sigma2
    elif spec.noise is NoiseKind.PER_STEP:
        noise_weight = sigma2 * _decay_sum(lam, steps)
    elif spec.noise is NoiseKind.BIT_FLIP:
        if spec.filled or lam != 1.0 or spec.input_sparsity:
            return TheoryPoint(math.nan)
        s = snr(BitFlip(spec.n_dim, spec.length, spec.noise_level))
        theta = None if spec.threshold is None else spec.threshold * s
        p = float(accuracy_numeric(s, spec.n_tokens, theta, settings=spec.settings))
        return TheoryPoint(p)
    rho = spec.input_sparsity
    if rho == 0.0:
        return _linear_point(spec, lookback, _decay_sum(lam, steps), noise_weight)
    if lam == 1.0 and steps is not None:
        # exact average over the number of other stored items
        others = np.arange(steps)
        pmf = stats.binom.pmf(others, steps - 1, 1.0 - rho)
        keep = pmf > 1e-15
        points = [_linear_point(spec, lookback, m + 1.0, noise_weight) for m in others[keep]]
        return _mean_points(points, pmf[keep] / pmf[keep].sum())
    lam2k = lam ** (2 * lookback)
    weight = lam2k + (1.0 - rho) * (_decay_sum(lam, steps) - lam2k)
    return _linear_point(spec, lookback, weight, noise_weight)


def _tracked_theory(spec: ExperimentSpec, lookbacks: list[int]) -> dict[int, TheoryPoint]:
    plain = (
        spec.scheme is Scheme.HDC
        and spec.binding is BindingKind.PERMUTATION
        and spec.code_sparsity == 0.0
        and spec.input_sparsity == 0.0
        and spec.noise is NoiseKind.NONE
        and spec.contraction == 1.0
    )
    if not plain:
        logger.debug("no tracker prediction for this configuration")
        return {k: TheoryPoint(math.nan) for k in lookbacks}
    config = spec.network_config()
    if spec.filled:
        curve = moment_curve(
            config,
            None,
            max_lookback=max(lookbacks) + 1,
            n_bins=_bins(spec),
            settings=spec.settings,
        )
    else:
        curve = moment_curve(config, spec.length, n_bins=_bins(spec), settings=spec.settings)
    out = {}
    for k in lookbacks:
        s = float(curve.snr[k])
        theta = None if spec.threshold is None else spec.threshold * s
        h = float(curve.hit_scale[k])
        p = float(accuracy_numeric(s, spec.n_tokens, theta, h, settings=spec.settings))
        cr = math.nan if theta is None else float(np.exp(spec.n_tokens * special.log_ndtr(theta)))
        out[k] = TheoryPoint(p, cr)
    return out


def _bins(spec: ExperimentSpec) -> Optional[int]:
    return None if spec.activation is ActivationKind.CLIPPED else spec.squash_bins


def theory_for(spec: ExperimentSpec) -> dict[int, TheoryPoint]:
    """Predicted accuracy (and correct rejection) for each lookback of `spec`.

    Lookbacks without a prediction map to NaN.
    """
    lookbacks = sorted(set(spec.lookbacks))
    if spec.activation is ActivationKind.LINEAR:
        return {k: _linear_theory(spec, k) for k in lookbacks}
    return _tracked_theory(spec, lookbacks)


# -- simulation ------------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    spec: ExperimentSpec
    binding: BindingOperator
    shared_seed: Optional[int]
    steps: int
    lookbacks: tuple[int, ...]


def _plan(spec: ExperimentSpec) -> _Plan:
    master = as_generator(spec.seed)
    binding_seed = draw_seed(master)
    shared_seed = draw_seed(master) if spec.shared_codebook else None
    split = spec.scheme is Scheme.FHRR and spec.binding is BindingKind.CIRCULANT
    binding = make_binding(
        spec.binding, spec.n_dim, spec.contraction, binding_seed, split_complex=split
    )
    config = spec.network_config()
    sample = generate_codebook(spec.scheme, spec.n_dim, 2, spec.code_sparsity, 0)
    config.check(sample, binding)
    if spec.filled:
        steps = max(burn_in_steps(config), max(spec.lookbacks) + 1)
        logger.debug(f"filled run: {steps} steps per trial")
    else:
        steps = spec.length
    return _Plan(spec, binding, shared_seed, steps, tuple(sorted(set(spec.lookbacks))))


def _expected_hit(spec: ExperimentSpec, lookbacks: tuple[int, ...]) -> dict[int, float]:
    """Mean hit score after unbinding; detection thresholds scale with it."""
    n = spec.n_dim
    v = second_moment(spec.scheme, n, spec.code_sparsity)
    if spec.activation is ActivationKind.LINEAR:
        flip = 1 - 2 * spec.noise_level if spec.noise is NoiseKind.BIT_FLIP else 1.0
        return {k: n * v * flip for k in lookbacks}
    config = spec.network_config()
    length = None if spec.filled else spec.length
    max_k = max(lookbacks) + 1 if spec.filled else None
    curve = moment_curve(
        config, length, max_lookback=max_k, n_bins=_bins(spec), settings=spec.settings
    )
    return {k: n * v * float(curve.mu[k]) for k in lookbacks}


def _run_batch(plan: _Plan, start: int, stop: int, thresholds: dict[int, float]) -> _Counts:
    spec, binding = plan.spec, plan.binding
    n, d, steps = spec.n_dim, spec.n_tokens, plan.steps
    activation = spec.activation_model()
    noise = spec.noise_model()
    rngs = [trial_generator(spec.seed, i) for i in range(start, stop)]
    t = len(rngs)
    codes = np.empty((t, n, d))
    tokens = np.empty((t, steps), dtype=np.intp)
    for j, rng in enumerate(rngs):
        seed = plan.shared_seed if plan.shared_seed is not None else draw_seed(rng)
        codes[j] = generate_codebook(spec.scheme, n, d, spec.code_sparsity, seed).columns
        sequence = InputSequence.random(steps, d, rng, spec.input_sparsity)
        tokens[j] = sequence.slots
    rows = np.arange(t)
    x = np.zeros((n, t))
    per_step = noise.kind is NoiseKind.PER_STEP and noise.level > 0
    for step in range(steps):
        x = binding.apply(x, 1)
        column = tokens[:, step]
        present = column != EMPTY
        x = x + (codes[rows, :, column] * present[:, None]).T
        if per_step:
            for j, rng in enumerate(rngs):
                x[:, j] += rng.normal(0.0, noise.level, size=n)
        x = activation(x)
    if noise.kind in (NoiseKind.READOUT, NoiseKind.BIT_FLIP) and noise.level > 0:
        for j, rng in enumerate(rngs):
            x[:, j] = noise.corrupt_readout(x[:, j], rng)

    lookbacks = plan.lookbacks
    correct = np.zeros((t, len(lookbacks)), dtype=bool)
    empty = np.zeros((t, len(lookbacks)), dtype=bool)
    y, done = x, 0
    for col, k in enumerate(lookbacks):
        y = binding.apply(y, -(k - done))
        done = k
        scores = np.einsum("tnd,nt->td", codes, y)
        truth = tokens[:, steps - 1 - k]
        for j, rng in enumerate(rngs):
            if spec.threshold is None:
                decoded = classify(scores[j], rng)
            else:
                decoded = detect(scores[j], thresholds[k], rng)
            if truth[j] == EMPTY:
                empty[j, col] = True
                correct[j, col] = decoded == REJECT
            else:
                correct[j, col] = decoded == truth[j]
    return _Counts(correct, empty)


def _run_chunk(plan: _Plan, start: int, stop: int, thresholds: dict[int, float]) -> _Counts:
    spec = plan.spec
    batch = max(1, _MAX_BATCH_CELLS // (spec.n_dim * spec.n_tokens))
    parts = [
        _run_batch(plan, lo, min(lo + batch, stop), thresholds) for lo in range(start, stop, batch)
    ]
    logger.debug(f"trials {start}..{stop} done")
    return _Counts.concat(parts)


def _chunks(spec: ExperimentSpec) -> list[tuple[int, int]]:
    size = spec.chunk_size
    return [(lo, min(lo + size, spec.trials)) for lo in range(0, spec.trials, size)]


async def _run_threaded(fns: list, threads: int) -> list[_Counts]:
    results: list[Optional[_Counts]] = [None] * len(fns)
    limiter = anyio.CapacityLimiter(threads)

    async def run(index: int) -> None:
        results[index] = await anyio.to_thread.run_sync(fns[index], limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index in range(len(fns)):
            tg.start_soon(run, index)
    return results  # type:ignore[return-value]


def _require_anyio() -> None:
    if anyio is None:
        raise VSAError("'anyio' is required! You may need to run: `pip install anyio`")


def _prepare(spec: ExperimentSpec) -> tuple[_Plan, list[partial[_Counts]]]:
    if spec.trials < 1:
        raise InvalidParameterError("[-] Error: trials must be >= 1")
    plan = _plan(spec)
    thresholds: dict[int, float] = {}
    if spec.threshold is not None:
        thresholds = {k: spec.threshold * h for k, h in _expected_hit(spec, plan.lookbacks).items()}
    return plan, [partial(_run_chunk, plan, lo, hi, thresholds) for lo, hi in _chunks(spec)]


def _outcomes(spec: ExperimentSpec, threads: int = 1) -> tuple[_Plan, _Counts]:
    plan, fns = _prepare(spec)
    if threads > 1:
        _require_anyio()
        parts = anyio.run(_run_threaded, fns, threads)
    else:
        parts = [fn() for fn in fns]
    return plan, _Counts.concat(parts)


def trial_outcomes(spec: ExperimentSpec, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(correct, empty) boolean matrices of shape (trials, lookbacks), the
    lookbacks sorted ascending."""
    _, counts = _outcomes(spec, threads)
    return counts.correct, counts.empty


def _row(
    spec: ExperimentSpec,
    lookback: int,
    correct: np.ndarray,
    empty: np.ndarray,
    theory: TheoryPoint,
    scheme: Optional[str] = None,
) -> SweepRow:
    items = int(np.sum(~empty))
    hits = int(np.sum(correct & ~empty))
    empties = int(np.sum(empty))
    rejections = int(np.sum(correct & empty))
    p = hits / items if items else math.nan
    lo, hi = wilson_interval(hits, items)
    d = spec.n_tokens
    detecting = spec.threshold is not None
    return SweepRow(
        scheme=scheme or spec.scheme.value,
        binding=spec.binding.value,
        N=spec.n_dim,
        D=d,
        activation=spec.activation.value,
        contraction=spec.contraction,
        kappa=spec.kappa,
        gamma=spec.gamma,
        M="filled" if spec.filled else spec.length,
        K=lookback,
        noise=spec.noise.value,
        noise_level=spec.noise_level,
        input_sparsity=spec.input_sparsity,
        code_sparsity=spec.code_sparsity,
        threshold=spec.threshold,
        shared_codebook=spec.shared_codebook,
        trials=spec.trials,
        items=items,
        hits=hits,
        p_empirical=p,
        ci_lo=lo,
        ci_hi=hi,
        p_theory=theory.p_corr,
        bits_empirical=float(item_info(p, d)) if items else math.nan,
        bits_theory=float(item_info(theory.p_corr, d)) if math.isfinite(theory.p_corr) else math.nan,
        empties=empties,
        rejections=rejections,
        cr_empirical=rejections / empties if detecting and empties else math.nan,
        cr_theory=theory.correct_rejection if detecting else math.nan,
    )


def _result(spec: ExperimentSpec, plan: _Plan, counts: _Counts) -> SweepResult:
    theory = theory_for(spec)
    rows = [
        _row(spec, k, counts.correct[:, col], counts.empty[:, col], theory[k])
        for col, k in enumerate(plan.lookbacks)
    ]
    return SweepResult(rows, spec.model_dump(mode="json"))


def run_trials(spec: ExperimentSpec, threads: int = 1) -> SweepResult:
    """Simulate `spec` and return one row per lookback."""
    plan, counts = _outcomes(spec, threads)
    return _result(spec, plan, counts)


async def run_trials_async(spec: ExperimentSpec, threads: int = 2) -> SweepResult:
    """run_trials from inside an event loop; chunks go to worker threads."""
    _require_anyio()
    plan, fns = _prepare(spec)
    parts = await _run_threaded(fns, threads)
    return _result(spec, plan, _Counts.concat(parts))


def run_sweep(sweep: SweepConfig, threads: int = 1) -> SweepResult:
    points = sweep.points()
    if not points:
        raise InvalidParameterError("[-] Error: the sweep grid is empty")
    result = SweepResult(config=sweep.model_dump(mode="json"))
    for index, spec in enumerate(points, 1):
        logger.info(f"sweep point {index}/{len(points)}")
        result.extend(run_trials(spec, threads))
    return result


def run_dsr_trials(spec: ExperimentSpec) -> SweepResult:
    """The same protocol on the distributed shift register baseline."""
    code = make_dsr_code(spec.n_dim, spec.n_tokens)
    noise = spec.noise_model()
    p_f = noise.level if noise.kind is NoiseKind.BIT_FLIP else 0.0
    lookbacks = sorted(set(spec.lookbacks))
    correct = np.zeros((spec.trials, len(lookbacks)), dtype=bool)
    empty = np.zeros_like(correct)
    for i in range(spec.trials):
        rng = trial_generator(spec.seed, i)
        sequence = InputSequence.random(spec.length, spec.n_tokens, rng, spec.input_sparsity)
        state = dsr_encode(code, sequence)
        for col, k in enumerate(lookbacks):
            truth = sequence.at_lookback(k)
            decoded = dsr_decode(code, state, k, noise, rng)
            empty[i, col] = truth == EMPTY
            correct[i, col] = truth != EMPTY and decoded == truth
    theory = TheoryPoint(dsr_accuracy(code, p_f))
    rows = [
        _row(spec, k, correct[:, col], empty[:, col], theory, scheme="DSR")
        for col, k in enumerate(lookbacks)
    ]
    return SweepResult(rows, spec.model_dump(mode="json"))


# -- comparison ------------------------------------------------------------


@dataclass(frozen=True)
class RowCheck:
    index: int
    z: float
    passed: bool


@dataclass
class CompareReport:
    checks: list[RowCheck]
    tolerance_sigmas: float
    min_pass_rate: float
    skipped: int = 0

    @property
    def pass_rate(self) -> float:
        if not self.checks:
            return 1.0
        return sum(c.passed for c in self.checks) / len(self.checks)

    @property
    def passed(self) -> bool:
        return self.pass_rate >= self.min_pass_rate

    @property
    def failures(self) -> list[RowCheck]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict[str, Any]:
        return {
            "rows": len(self.checks),
            "skipped": self.skipped,
            "failed": len(self.failures),
            "pass_rate": self.pass_rate,
            "tolerance_sigmas": self.tolerance_sigmas,
            "min_pass_rate": self.min_pass_rate,
            "passed": self.passed,
        }


def z_score(empirical: float, theory: float, n: int) -> float:
    """(empirical - theory) / binomial SE at the predicted rate; the variance
    is floored at 1/n so that theory = 0 or 1 stays finite."""
    variance = max(theory * (1.0 - theory), 1.0 / n) / n
    return (empirical - theory) / math.sqrt(variance)


def compare(
    sweep: SweepResult, tolerance_sigmas: float = 3.0, min_pass_rate: float = 1.0
) -> CompareReport:
    """Flag rows whose empirical accuracy sits more than `tolerance_sigmas`
    standard errors from theory; rows without a prediction are skipped."""
    checks = []
    skipped = 0
    for index, row in enumerate(sweep.rows):
        if not math.isfinite(row.p_theory) or not row.items:
            skipped += 1
            continue
        z = z_score(row.p_empirical, row.p_theory, row.items)
        checks.append(RowCheck(index, z, abs(z) <= tolerance_sigmas))
    report = CompareReport(checks, tolerance_sigmas, min_pass_rate, skipped)
    for check in report.failures:
        row = sweep.rows[check.index]
        logger.info(
            f"row {check.index} (M={row.M}, K={row.K}): empirical {row.p_empirical:.4f} "
            f"vs theory {row.p_theory:.4f}, z={check.z:+.2f}"
        )
    return report
