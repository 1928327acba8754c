"""Named presets that regenerate the data behind each figure panel.

Every preset returns a :class:`~vsa_capacity.harness.Table`; simulated panels
honour the trial count, seed and thread count of the :class:`FigureContext`.
Parameters are desk-scale (N <= 10000, a few hundred trials per point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy import optimize, special

from .config import ExperimentSpec, resolve_settings
from .dsr import dsr_accuracy, make_dsr_code
from .exceptions import InvalidParameterError
from .harness import Table, run_trials
from .memory import Activation, NetworkConfig
from .theory import (
    ApproxMethod,
    BitFlip,
    DecayFilled,
    DecayFinite,
    Kappa,
    Lambda,
    LinearLargeM,
    StepKind,
    accuracy_approx,
    accuracy_numeric,
    all_correct_probability,
    capacity_search,
    chang_alpha,
    collision_accuracy,
    collision_info,
    contraction_for_kappa,
    item_info,
    moment_curve,
    optimal_dimension,
    plate_optimal_threshold,
    required_snr_squared,
    retrieval_curve,
    snr,
    snr_for_accuracy,
    storage_bits,
    tanh_time_constant,
    time_constant,
    tracker_init,
    tracker_moments,
    tracker_step,
)
from .utils import logger


@dataclass(frozen=True)
class FigureContext:
    trials: int = 500
    seed: int = 0
    threads: int = 1


@dataclass(frozen=True)
class Figure:
    figure_id: str
    description: str
    build: Callable[[FigureContext], Table]


FIGURES: dict[str, Figure] = {}

OUT_OF_SCOPE = {
    "2G": "panel 2G shows gradient-trained encoding matrices, which are not modelled here",
    "2H": "panel 2H shows gradient-trained decoding matrices, which are not modelled here",
}


def figure(figure_id: str, description: str):
    def decorator(fn: Callable[[FigureContext], Table]) -> Callable[[FigureContext], Table]:
        FIGURES[figure_id] = Figure(figure_id, description, fn)
        return fn

    return decorator


def normalize_id(figure_id: str) -> str:
    return figure_id.strip().upper()


def out_of_scope_notice(figure_id: str) -> Optional[str]:
    return OUT_OF_SCOPE.get(normalize_id(figure_id))


def get_figure(figure_id: str) -> Figure:
    key = normalize_id(figure_id)
    for name, fig in FIGURES.items():
        if name.upper() == key:
            return fig
    raise InvalidParameterError(
        f"[-] Error: unknown figure id {figure_id!r} (known: {', '.join(FIGURES)})"
    )


def run_figure(figure_id: str, ctx: Optional[FigureContext] = None) -> Table:
    fig = get_figure(figure_id)
    ctx = ctx or FigureContext()
    logger.info(f"figure {fig.figure_id}: {fig.description}")
    table = fig.build(ctx)
    table.config = {"figure": fig.figure_id, "description": fig.description, **table.config}
    return table


# -- shared helpers --------------------------------------------------------

_SIM_FIELDS = ["scheme", "binding", "N", "D", "M", "K", "p_theory", "p_empirical", "ci_lo", "ci_hi", "trials"]
_KAPPAS = [1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50, 60]
_GAMMAS = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0]
_LAMBDAS = [float(1 - x) for x in np.geomspace(1e-4, 0.3, 24)]
_DS = [8, 32, 256, 1024]


def _m_grid(top: int, points: int = 40) -> list[int]:
    return sorted({int(m) for m in np.geomspace(1, top, points)})


def _simulate(
    specs: Sequence[ExperimentSpec],
    ctx: FigureContext,
    fieldnames: list[str],
    annotate: Optional[Callable[[ExperimentSpec], dict[str, Any]]] = None,
) -> Table:
    rows: list[dict[str, Any]] = []
    for spec in specs:
        point = run_trials(spec, ctx.threads)
        extra = annotate(spec) if annotate else {}
        rows.extend({**record, **extra} for record in point.records())
    config = {"points": [spec.model_dump(mode="json") for spec in specs]}
    return Table(fieldnames, rows, config)


def _base(ctx: FigureContext, **fields: Any) -> ExperimentSpec:
    return ExperimentSpec(trials=ctx.trials, seed=ctx.seed, **fields)


def _scheme_sweep(
    ctx: FigureContext,
    scheme: str,
    binding: str,
    n_dims: Sequence[int] = (1000,),
    n_tokens: Sequence[int] = (27,),
    lengths: Sequence[int] = tuple(range(50, 501, 50)),
    **fields: Any,
) -> Table:
    specs = [
        _base(ctx, scheme=scheme, binding=binding, n_dim=n, n_tokens=d, length=m, **fields)
        for n in n_dims
        for d in n_tokens
        for m in lengths
    ]
    return _simulate(specs, ctx, _SIM_FIELDS)


def _tracked_accuracy(curve, n_tokens: int) -> list[float]:
    return [
        float(accuracy_numeric(s, n_tokens, hit_scale=float(h)))
        for s, h in zip(curve.snr, curve.hit_scale)
    ]


def _distribution(activation: Activation, filled: bool, marks: Sequence[int], label: str) -> Table:
    tracker = tracker_step(tracker_init(activation, filled), StepKind.SKEW)
    rows = []
    for step in range(1, max(marks) + 1):
        if step in marks:
            rows.extend(
                {label: step, "z": float(z), "p": float(p)}
                for z, p in zip(tracker.values, tracker.p)
                if p > 1e-12
            )
        tracker = tracker_step(tracker, StepKind.DIFFUSE)
    return Table([label, "z", "p"], rows, {"activation": activation.kind.value, "filled": filled})


def _moment_rows(
    activation: Activation, n_dim: int, top: int, filled: bool, label: str, param: str, value: float
) -> list[dict[str, Any]]:
    config = NetworkConfig(n_dim, activation)
    if filled:
        curve = moment_curve(config, None, max_lookback=top)
    else:
        curve = moment_curve(config, top, first_item=True)
    return [
        {param: value, label: int(k), "mu": float(mu), "var": float(var), "s": float(s)}
        for k, mu, var, s in zip(curve.lookbacks, curve.mu, curve.var, curve.snr)
    ]


def _approx_table(n_tokens: int, s_grid: np.ndarray, methods: Sequence[ApproxMethod]) -> Table:
    numeric = np.asarray(accuracy_numeric(s_grid, n_tokens))
    approx = {m.value: np.asarray(accuracy_approx(s_grid, n_tokens, m)) for m in methods}
    rows = [
        {"D": n_tokens, "s": float(s), "numeric": float(numeric[i]), **{k: float(v[i]) for k, v in approx.items()}}
        for i, s in enumerate(s_grid)
    ]
    return Table(["D", "s", "numeric", *approx], rows, {"D": n_tokens})


# -- figure 1 ----------------------------------------------------------------


@figure("1E", "required s^2 against ln D, numeric and linear approximations")
def _fig_1e(ctx: FigureContext) -> Table:
    rows = []
    for d in sorted({int(x) for x in np.geomspace(2, 2**20, 21)}):
        for eps in (1e-1, 1e-2, 1e-3, 1e-4):
            rows.append(
                {
                    "D": d,
                    "lnD": math.log(d),
                    "epsilon": eps,
                    "s2_numeric": snr_for_accuracy(1 - eps, d) ** 2,
                    "s2_fa_cr_lee": required_snr_squared(d, eps, ApproxMethod.FA_CR_LEE),
                    "s2_chang": required_snr_squared(d, eps, ApproxMethod.CHANG),
                }
            )
    return Table(list(rows[0]), rows)


# -- figure 2: accuracy across frameworks ----------------------------------


@figure("2A", "HDC accuracy against M for several N")
def _fig_2a(ctx: FigureContext) -> Table:
    return _scheme_sweep(ctx, "HDC", "Permutation", n_dims=(500, 1000, 2000))


@figure("2B", "HDC accuracy against M for several D at N=2000")
def _fig_2b(ctx: FigureContext) -> Table:
    return _scheme_sweep(ctx, "HDC", "Permutation", n_dims=(2000,), n_tokens=(4, 27, 256))


@figure("2C", "HRR accuracy against M")
def _fig_2c(ctx: FigureContext) -> Table:
    return _scheme_sweep(ctx, "HRR", "Circulant")


@figure("2D", "FHRR with circular convolution against M")
def _fig_2d(ctx: FigureContext) -> Table:
    return _scheme_sweep(ctx, "FHRR", "Circulant")


@figure("2E", "FHRR with element-wise multiply against M")
def _fig_2e(ctx: FigureContext) -> Table:
    return _scheme_sweep(ctx, "FHRR", "PhasorDiagonal")


@figure("2F", "random codes with a random unitary recurrent matrix against M")
def _fig_2f(ctx: FigureContext) -> Table:
    return _scheme_sweep(ctx, "RandomUnitary", "RandomUnitary")


@figure("2X-A", "detection of a sparse input sequence: hits and correct rejections against threshold")
def _fig_2xa(ctx: FigureContext) -> Table:
    specs = [
        _base(ctx, n_dim=1000, n_tokens=27, length=100, input_sparsity=0.1, threshold=float(t))
        for t in np.linspace(0.0, 1.0, 11)
    ]
    fields = ["threshold", "N", "D", "M", "K", "p_theory", "p_empirical", "ci_lo", "ci_hi",
              "cr_theory", "cr_empirical", "trials"]
    return _simulate(specs, ctx, fields)


@figure("2X-B", "accuracy against M for several encoding sparsities")
def _fig_2xb(ctx: FigureContext) -> Table:
    specs = [
        _base(ctx, n_dim=2000, n_tokens=27, length=m, code_sparsity=p)
        for p in (0.0, 0.5, 0.9, 1.0)
        for m in range(50, 501, 50)
    ]
    return _simulate(specs, ctx, ["code_sparsity", *_SIM_FIELDS])


@figure("2X-C", "accuracy under readout noise and bit flips")
def _fig_2xc(ctx: FigureContext) -> Table:
    lengths = range(50, 501, 50)
    specs = []
    for m in lengths:
        specs.append(_base(ctx, n_dim=2000, n_tokens=27, length=m, noise="readout", noise_level=1.0))
        specs.append(
            _base(ctx, n_dim=2000, n_tokens=27, length=m, noise="readout", noise_level=math.sqrt(m))
        )
        for p_f in (0.05, 0.1):
            specs.append(
                _base(ctx, n_dim=2000, n_tokens=27, length=m, noise="bit_flip", noise_level=p_f)
            )
    return _simulate(specs, ctx, ["noise", "noise_level", *_SIM_FIELDS])


# -- figure 3: information and channel capacity ----------------------------

_ALL_METHODS = list(ApproxMethod)


@figure("3A", "approximations of the accuracy against M (N=1000, D=27)")
def _fig_3a(ctx: FigureContext) -> Table:
    n, d = 1000, 27
    lengths = np.array(_m_grid(4 * n))
    table = _approx_table(d, np.sqrt(n / lengths), _ALL_METHODS)
    for row, m in zip(table.rows, lengths):
        row["M"] = int(m)
    table.fieldnames.insert(0, "M")
    return table


@figure("3B", "information per item against M")
def _fig_3b(ctx: FigureContext) -> Table:
    n = 1000
    rows = []
    for d in (4, 27, 256, 4096):
        for m in _m_grid(4 * n):
            s = snr(LinearLargeM(n, m))
            p = float(accuracy_numeric(s, d))
            rows.append({"D": d, "M": m, "s": s, "p_corr": p, "I_item": float(item_info(p, d))})
    return Table(["D", "M", "s", "p_corr", "I_item"], rows, {"N": n})


@figure("3C", "total retrieved information per neuron against M, numeric and approximations")
def _fig_3c(ctx: FigureContext) -> Table:
    n, d = 1000, 27
    lengths = _m_grid(4 * n, 60)
    rows = []
    for method in ["numeric", *(m.value for m in _ALL_METHODS)]:
        per_neuron = []
        for m in lengths:
            s = snr(LinearLargeM(n, m))
            if method == "numeric":
                p = float(accuracy_numeric(s, d))
            else:
                p = float(accuracy_approx(s, d, method))
            per_neuron.append(m * float(item_info(p, d)) / n)
        best = int(np.argmax(per_neuron))
        rows.extend(
            {"method": method, "M": m, "I_per_neuron": v, "capacity": i == best}
            for i, (m, v) in enumerate(zip(lengths, per_neuron))
        )
    return Table(["method", "M", "I_per_neuron", "capacity"], rows, {"N": n, "D": d})


@figure("3D", "simulated against predicted retrieved information")
def _fig_3d(ctx: FigureContext) -> Table:
    n = 1000
    specs = [
        _base(ctx, n_dim=n, n_tokens=d, length=m)
        for d in (8, 27, 256)
        for m in (25, 50, 100, 200, 300, 400, 600, 800)
    ]
    table = _simulate(specs, ctx, ["D", "M", "I_empirical_per_neuron", "I_theory_per_neuron"])
    for row in table.rows:
        row["I_empirical_per_neuron"] = row["M"] * row["bits_empirical"] / n
        row["I_theory_per_neuron"] = row["M"] * row["bits_theory"] / n
    return table


@figure("3E", "capacity and stored information at the optimum against D")
def _fig_3e(ctx: FigureContext) -> Table:
    n = 1000
    grid = _m_grid(20 * n, 120)
    rows = []
    for d in sorted({int(x) for x in np.geomspace(2, 2**16, 17)}):
        result = capacity_search("M", n, d, grid)
        rows.append(
            {
                "D": d,
                "M_max": int(result.argmax),
                "I_per_neuron": max(result.values),
                "I_stored_per_neuron": result.argmax * math.log2(d) / n,
            }
        )
    return Table(list(rows[0]), rows, {"N": n})


@figure("3F", "retrieved and stored information when D approaches 2^N (N=100)")
def _fig_3f(ctx: FigureContext) -> Table:
    n = 100
    rows = []
    lengths = np.arange(1, 200)
    s = np.sqrt(n / lengths)
    for bits in range(1, n + 1, 3):
        d = 2**bits
        info = lengths * np.asarray(item_info(accuracy_numeric(s, d), d)) / n
        for m in range(1, 11):
            rows.append({"log2D": bits, "M": m, "I_per_neuron": float(info[m - 1]),
                         "I_stored_per_neuron": m * bits / n})
        best = int(np.argmax(info))
        rows.append({"log2D": bits, "M": "max", "I_per_neuron": float(info[best]),
                     "I_stored_per_neuron": int(lengths[best]) * bits / n})
    return Table(["log2D", "M", "I_per_neuron", "I_stored_per_neuron"], rows, {"N": n})


# -- figure 4: contracting linear networks ---------------------------------


def _decay_rows(n: int, d: int, lam: float, length: Optional[int], lookbacks) -> list[dict]:
    rows = []
    for k in lookbacks:
        if length is None:
            s = snr(DecayFilled(n, lam, k))
        else:
            s = snr(DecayFinite(n, length, lam, k))
        p = float(accuracy_numeric(s, d))
        rows.append({"lambda": lam, "M": length or "filled", "K": k, "s": s, "p_corr": p,
                     "I_item": float(item_info(p, d))})
    return rows


@figure("4A1", "accuracy against K for several M (lambda=0.996, N=1000)")
def _fig_4a1(ctx: FigureContext) -> Table:
    rows = []
    for m in (100, 500, 1000, 2000):
        rows.extend(_decay_rows(1000, 27, 0.996, m, range(0, m, max(1, m // 50))))
    return Table(["lambda", "M", "K", "s", "p_corr"], rows, {"N": 1000, "D": 27})


@figure("4B1", "information per item against K for several M (lambda=0.996)")
def _fig_4b1(ctx: FigureContext) -> Table:
    table = _fig_4a1(ctx)
    table.fieldnames = ["lambda", "M", "K", "I_item"]
    return table


def _lambda_info(n: int, d: int, length: Optional[int], lambdas=_LAMBDAS) -> list[dict]:
    result = capacity_search("lambda", n, d, lambdas, length)
    return [
        {"D": d, "M": length or "filled", "lambda": lam, "tau": time_constant(Lambda(lam)),
         "I_per_neuron": v}
        for lam, v in zip(result.grid, result.values)
    ]


@figure("4C1", "retrieved information per neuron against lambda for finite M (D=64)")
def _fig_4c1(ctx: FigureContext) -> Table:
    rows = []
    for m in (100, 1000, 10000):
        rows.extend(_lambda_info(1000, 64, m))
    return Table(["M", "lambda", "I_per_neuron"], rows, {"N": 1000, "D": 64})


@figure("4D1", "retrieved information per neuron against D (lambda=0.988, finite M)")
def _fig_4d1(ctx: FigureContext) -> Table:
    n, lam = 1000, 0.988
    rows = []
    for m in (100, 1000):
        for d in sorted({int(x) for x in np.geomspace(2, 2**14, 15)}):
            p, info = retrieval_curve("lambda", lam, n, d, m)
            rows.append({"M": m, "D": d, "I_per_neuron": float(np.sum(info)) / n})
    return Table(["M", "D", "I_per_neuron"], rows, {"N": n, "lambda": lam})


@figure("4A2", "filled network accuracy against K (N=5000, D=32), simulated and predicted")
def _fig_4a2(ctx: FigureContext) -> Table:
    specs = []
    for lam in (0.99, 0.996, 0.999):
        tau = -1.0 / math.log(lam)
        lookbacks = tuple(sorted({int(k) for k in np.linspace(0, 3 * tau, 10)}))
        specs.append(
            _base(ctx, n_dim=5000, n_tokens=32, contraction=lam, filled=True, lookbacks=lookbacks)
        )
    return _simulate(specs, ctx, ["contraction", *_SIM_FIELDS])


@figure("4B2", "filled network information per item against K")
def _fig_4b2(ctx: FigureContext) -> Table:
    rows = []
    for lam in (0.99, 0.996, 0.999):
        tau = -1.0 / math.log(lam)
        rows.extend(_decay_rows(10000, 32, lam, None, range(0, int(5 * tau), max(1, int(tau) // 20))))
    return Table(["lambda", "K", "I_item"], rows, {"N": 10000, "D": 32})


@figure("4C2", "filled network retrieved information against lambda (D=64)")
def _fig_4c2(ctx: FigureContext) -> Table:
    return Table(["lambda", "tau", "I_per_neuron"], _lambda_info(1000, 64, None), {"N": 1000, "D": 64})


@figure("4D2", "filled network retrieved information against D (lambda=0.999)")
def _fig_4d2(ctx: FigureContext) -> Table:
    n, lam = 1000, 0.999
    rows = []
    for d in sorted({int(x) for x in np.geomspace(2, 2**14, 15)}):
        _, info = retrieval_curve("lambda", lam, n, d)
        rows.append({"D": d, "I_per_neuron": float(np.sum(info)) / n})
    return Table(["D", "I_per_neuron"], rows, {"N": n, "lambda": lam})


@figure("4E", "filled network retrieved information over D and lambda")
def _fig_4e(ctx: FigureContext) -> Table:
    rows = []
    for d in (4, 16, 64, 256, 1024, 4096):
        rows.extend(_lambda_info(1000, d, None))
    return Table(["D", "lambda", "tau", "I_per_neuron"], rows, {"N": 1000})


@figure("4F", "lambda maximizing filled network information for several N and D")
def _fig_4f(ctx: FigureContext) -> Table:
    rows = []
    for n in (100, 1000, 10000):
        for d in _DS:
            result = capacity_search("lambda", n, d, _LAMBDAS)
            rows.append({"N": n, "D": d, "lambda_max": result.argmax, "I_per_neuron": max(result.values)})
    return Table(["N", "D", "lambda_max", "I_per_neuron"], rows)


# -- figures 5 and 6: saturating networks ----------------------------------


def _first_item_sim(ctx: FigureContext, activation: dict, n: int, d: int, lengths) -> list[ExperimentSpec]:
    return [
        _base(ctx, n_dim=n, n_tokens=d, length=m, lookbacks=(m - 1,), **activation)
        for m in lengths
    ]


def _filled_sim(ctx: FigureContext, activation: dict, n: int, d: int, lookbacks) -> ExperimentSpec:
    return _base(ctx, n_dim=n, n_tokens=d, filled=True, lookbacks=tuple(lookbacks), **activation)


def _clipped(kappa: int) -> dict:
    return {"activation": "ClippedLinear", "kappa": kappa}


def _tanh(gamma: float) -> dict:
    return {"activation": "Tanh", "gamma": gamma}


def _saturating_info(
    objective: str, grid, n: int, d: int, length: Optional[int], param: str
) -> list[dict]:
    result = capacity_search(objective, n, d, grid, length)
    return [
        {"D": d, "M": length or "filled", param: value, "I_per_neuron": v,
         "I_stored_per_neuron": (length * math.log2(d) / n) if length else math.nan}
        for value, v in zip(result.grid, result.values)
    ]


@figure("5A1", "distribution of the first item's term as M grows (kappa=7)")
def _fig_5a1(ctx: FigureContext) -> Table:
    return _distribution(Activation.clipped(7), False, (1, 2, 5, 10, 20, 50, 100, 200), "M")


@figure("5B1", "signal of the first item against M (N=5000)")
def _fig_5b1(ctx: FigureContext) -> Table:
    rows = []
    for kappa in (3, 7, 15):
        rows.extend(_moment_rows(Activation.clipped(kappa), 5000, 400, False, "M", "kappa", kappa))
    return Table(["kappa", "M", "mu", "s"], rows, {"N": 5000})


@figure("5C1", "variance of the first item's term against M")
def _fig_5c1(ctx: FigureContext) -> Table:
    table = _fig_5b1(ctx)
    table.fieldnames = ["kappa", "M", "var"]
    return table


@figure("5D1", "first item accuracy against M=K (N=5000, D=27), simulated and predicted")
def _fig_5d1(ctx: FigureContext) -> Table:
    specs = [
        spec
        for kappa in (3, 7, 15)
        for spec in _first_item_sim(ctx, _clipped(kappa), 5000, 27, (5, 10, 25, 50, 100, 200, 400))
    ]
    return _simulate(specs, ctx, ["kappa", *_SIM_FIELDS])


@figure("5E1", "retrieved information against kappa for finite M (D=256)")
def _fig_5e1(ctx: FigureContext) -> Table:
    rows = []
    for m in (100, 1000):
        rows.extend(_saturating_info("kappa", _KAPPAS, 1000, 256, m, "kappa"))
    return Table(["M", "kappa", "I_per_neuron", "I_stored_per_neuron"], rows, {"N": 1000, "D": 256})


@figure("5F1", "retrieved information against D for finite M (kappa=20)")
def _fig_5f1(ctx: FigureContext) -> Table:
    n = 1000
    rows = []
    for m in (100, 1000):
        for d in (4, 16, 64, 256, 1024, 4096):
            _, info = retrieval_curve("kappa", 20, n, d, m)
            rows.append({"M": m, "D": d, "I_per_neuron": float(np.sum(info)) / n})
    return Table(["M", "D", "I_per_neuron"], rows, {"N": n, "kappa": 20})


@figure("5A2", "filled distribution of the term against K (kappa=7)")
def _fig_5a2(ctx: FigureContext) -> Table:
    return _distribution(Activation.clipped(7), True, (1, 2, 5, 10, 20, 50, 100), "K")


@figure("5B2", "filled network signal against K")
def _fig_5b2(ctx: FigureContext) -> Table:
    rows = []
    for kappa in (3, 7, 15):
        rows.extend(_moment_rows(Activation.clipped(kappa), 5000, 600, True, "K", "kappa", kappa))
    return Table(["kappa", "K", "mu", "s"], rows, {"N": 5000})


@figure("5C2", "filled network variance against K")
def _fig_5c2(ctx: FigureContext) -> Table:
    table = _fig_5b2(ctx)
    table.fieldnames = ["kappa", "K", "var"]
    return table


@figure("5D2", "filled network accuracy against K (N=5000, D=27), simulated and predicted")
def _fig_5d2(ctx: FigureContext) -> Table:
    specs = [
        _filled_sim(ctx, _clipped(kappa), 5000, 27, sorted({int(k) for k in np.linspace(0, 4 * kappa**2, 10)}))
        for kappa in (3, 7, 15)
    ]
    return _simulate(specs, ctx, ["kappa", *_SIM_FIELDS])


@figure("5E2", "filled network retrieved information against kappa (D=256)")
def _fig_5e2(ctx: FigureContext) -> Table:
    rows = _saturating_info("kappa", _KAPPAS, 1000, 256, None, "kappa")
    return Table(["kappa", "I_per_neuron"], rows, {"N": 1000, "D": 256})


@figure("5F2", "filled network retrieved information against D (kappa=20)")
def _fig_5f2(ctx: FigureContext) -> Table:
    n = 1000
    rows = []
    for d in (4, 16, 64, 256, 1024, 4096):
        _, info = retrieval_curve("kappa", 20, n, d)
        rows.append({"D": d, "I_per_neuron": float(np.sum(info)) / n})
    return Table(["D", "I_per_neuron"], rows, {"N": n, "kappa": 20})


@figure("5G", "kappa maximizing filled network information for several N and D")
def _fig_5g(ctx: FigureContext) -> Table:
    rows = []
    for n in (100, 1000, 10000):
        for d in _DS:
            result = capacity_search("kappa", n, d, _KAPPAS)
            rows.append({"N": n, "D": d, "kappa_max": int(result.argmax), "I_per_neuron": max(result.values)})
    return Table(["N", "D", "kappa_max", "I_per_neuron"], rows)


@figure("6A1", "distribution of the first item's term as M grows (gamma=16)")
def _fig_6a1(ctx: FigureContext) -> Table:
    return _distribution(Activation.tanh(16.0), False, (1, 2, 5, 10, 20, 50, 100, 200), "M")


@figure("6B1", "first item accuracy against M=K for tanh (N=2000, D=32), simulated and predicted")
def _fig_6b1(ctx: FigureContext) -> Table:
    specs = [
        spec
        for gamma in (8.0, 64.0)
        for spec in _first_item_sim(ctx, _tanh(gamma), 2000, 32, (5, 10, 25, 50, 100, 200, 400))
    ]
    return _simulate(specs, ctx, ["gamma", *_SIM_FIELDS])


@figure("6C1", "retrieved information against gamma for finite M (D=256)")
def _fig_6c1(ctx: FigureContext) -> Table:
    rows = []
    for m in (100, 1000):
        rows.extend(_saturating_info("gamma", _GAMMAS, 1000, 256, m, "gamma"))
    return Table(["M", "gamma", "I_per_neuron", "I_stored_per_neuron"], rows, {"N": 1000, "D": 256})


@figure("6D1", "retrieved information against D for finite M (gamma=64)")
def _fig_6d1(ctx: FigureContext) -> Table:
    n = 1000
    rows = []
    for m in (100, 1000):
        for d in (4, 16, 64, 256, 1024, 4096):
            _, info = retrieval_curve("gamma", 64.0, n, d, m)
            rows.append({"M": m, "D": d, "I_per_neuron": float(np.sum(info)) / n})
    return Table(["M", "D", "I_per_neuron"], rows, {"N": n, "gamma": 64.0})


@figure("6A2", "filled distribution of the term against K (gamma=16)")
def _fig_6a2(ctx: FigureContext) -> Table:
    return _distribution(Activation.tanh(16.0), True, (1, 2, 5, 10, 20, 50, 100), "K")


@figure("6B2", "filled tanh network accuracy against K (N=2000, D=32), simulated and predicted")
def _fig_6b2(ctx: FigureContext) -> Table:
    specs = [
        _filled_sim(ctx, _tanh(gamma), 2000, 32, sorted({int(k) for k in np.linspace(0, 2 * gamma**2, 10)}))
        for gamma in (8.0, 64.0)
    ]
    return _simulate(specs, ctx, ["gamma", *_SIM_FIELDS])


@figure("6C2", "filled tanh network retrieved information against gamma (D=256)")
def _fig_6c2(ctx: FigureContext) -> Table:
    rows = _saturating_info("gamma", _GAMMAS, 1000, 256, None, "gamma")
    return Table(["gamma", "I_per_neuron"], rows, {"N": 1000, "D": 256})


@figure("6E", "gamma maximizing filled tanh network information for several N and D")
def _fig_6e(ctx: FigureContext) -> Table:
    rows = []
    for n in (100, 1000, 10000):
        for d in _DS:
            result = capacity_search("gamma", n, d, _GAMMAS)
            rows.append({"N": n, "D": d, "gamma_max": result.argmax, "I_per_neuron": max(result.values)})
    return Table(["N", "D", "gamma_max", "I_per_neuron"], rows)


# -- figure 7: buffer time constants ---------------------------------------


@figure("7A", "dimension maximizing information per neuron for a given time constant")
def _fig_7a(ctx: FigureContext) -> Table:
    grid = sorted({int(x) for x in np.geomspace(50, 50000, 40)})
    rows = []
    for tau in (10.0, 30.0, 100.0, 300.0, 1000.0):
        for d in (8, 32, 256):
            result = optimal_dimension(tau, d, grid)
            rows.append({"tau": tau, "D": d, "N_opt": result.n_dim, "I_per_neuron": max(result.values)})
    return Table(["tau", "D", "N_opt", "I_per_neuron"], rows)


@figure("7B", "time constant of clipped and tanh networks")
def _fig_7b(ctx: FigureContext) -> Table:
    rows: list[dict[str, Any]] = []
    for kappa in _KAPPAS[1:]:
        rows.append({"activation": "ClippedLinear", "value": kappa, "tau": time_constant(Kappa(kappa))})
    for gamma in _GAMMAS:
        rows.append({"activation": "Tanh", "value": gamma, "tau": tanh_time_constant(gamma)})
    return Table(["activation", "value", "tau"], rows)


def _matching_gamma(kappa: int) -> float:
    """gamma whose filled tanh variance equals the clipped network's."""
    target = ((2 * kappa + 1) ** 2 - 1) / 12

    def gap(gamma: float) -> float:
        return tracker_moments(tracker_init(Activation.tanh(gamma), True))[1] - target

    return float(optimize.brentq(gap, 0.5 * kappa, 4.0 * kappa, xtol=1e-3))


@figure("7C", "accuracy of decay, clipped and tanh networks sharing a variance bound")
def _fig_7c(ctx: FigureContext) -> Table:
    n, d = 1000, 27
    rows = []
    for kappa in (7, 15):
        lam = contraction_for_kappa(kappa)
        tau = time_constant(Kappa(kappa))
        top = int(2 * tau) + 1
        gamma = _matching_gamma(kappa)
        clipped = moment_curve(NetworkConfig(n, Activation.clipped(kappa)), None, max_lookback=top)
        tanh = moment_curve(NetworkConfig(n, Activation.tanh(gamma)), None, max_lookback=top)
        p_clipped = _tracked_accuracy(clipped, d)
        p_tanh = _tracked_accuracy(tanh, d)
        for k in range(1, top + 1):
            s = snr(DecayFilled(n, lam, k - 1))
            rows.append(
                {"kappa": kappa, "lambda": lam, "gamma": gamma, "K": k,
                 "p_decay": float(accuracy_numeric(s, d)),
                 "p_clipped": p_clipped[k - 1], "p_tanh": p_tanh[k - 1]}
            )
    return Table(list(rows[0]), rows, {"N": n, "D": d})


@figure("7D", "retrieved over stored information for clipped networks")
def _fig_7d(ctx: FigureContext) -> Table:
    n = 1000
    rows = []
    for d in (8, 32, 256, 1024, 4096):
        result = capacity_search("kappa", n, d, _KAPPAS)
        for kappa, info in zip(result.grid, result.values):
            stored = storage_bits(n, int(kappa)) / n
            rows.append({"D": d, "kappa": int(kappa), "storage_bits_per_neuron": stored,
                         "I_per_neuron": info, "ratio": info / stored})
    return Table(["D", "kappa", "storage_bits_per_neuron", "I_per_neuron", "ratio"], rows, {"N": n})


# -- figure 8: approximation steps -----------------------------------------


@figure("8A", "normal tail, Chernoff-Rubin bound and Chang approximation")
def _fig_8a(ctx: FigureContext) -> Table:
    beta = resolve_settings()["beta"]
    alpha = chang_alpha(beta)
    rows = [
        {"x": float(x), "tail": float(0.5 * special.erfc(x / math.sqrt(2))),
         "cr_bound": float(0.5 * math.exp(-(x**2) / 2)),
         "chang": float(0.5 * alpha * math.exp(-beta * x**2 / 2))}
        for x in np.linspace(0.0, 5.0, 101)
    ]
    return Table(["x", "tail", "cr_bound", "chang"], rows, {"alpha": alpha, "beta": beta})


_S_GRID = np.linspace(0.0, 10.0, 201)


@figure("8B", "factorized and Chernoff-Rubin approximations against the numeric accuracy (D=27)")
def _fig_8b(ctx: FigureContext) -> Table:
    return _approx_table(27, _S_GRID, [ApproxMethod.FA, ApproxMethod.FA_CR, ApproxMethod.FA_CR_LEE])


@figure("8C", "Chang approximations against the numeric accuracy (D=27)")
def _fig_8c(ctx: FigureContext) -> Table:
    return _approx_table(27, _S_GRID, [ApproxMethod.FA, ApproxMethod.FA_CHANG, ApproxMethod.CHANG])


@figure("8D", "all approximations at D=8")
def _fig_8d(ctx: FigureContext) -> Table:
    return _approx_table(8, _S_GRID, _ALL_METHODS)


@figure("8E", "all approximations at D=1024")
def _fig_8e(ctx: FigureContext) -> Table:
    return _approx_table(1024, _S_GRID, _ALL_METHODS)


# -- figures 9 and 10: constructed codes and M = 1 -------------------------


@figure("9", "shift register against randomized codes under bit flips (N=400)")
def _fig_9(ctx: FigureContext) -> Table:
    n = 400
    rows = []
    for bits in range(1, 11):
        d = 2**bits
        code = make_dsr_code(n, d)
        m = code.capacity_slots
        for p_f in (0.0, 0.01, 0.05, 0.1):
            p_dsr = dsr_accuracy(code, p_f)
            p_random = float(accuracy_numeric(snr(BitFlip(n, m, p_f)), d))
            rows.append(
                {"D": d, "p_f": p_f, "M": m, "p_dsr": p_dsr, "p_random": p_random,
                 "I_dsr_per_neuron": m * float(item_info(p_dsr, d)) / n,
                 "I_random_per_neuron": m * float(item_info(p_random, d)) / n}
            )
    return Table(list(rows[0]), rows, {"N": n})


def _collision_rows() -> list[dict[str, Any]]:
    rows = []
    for n in (4, 6, 8, 10, 12, 16, 20):
        for d in sorted({int(round(x)) for x in np.geomspace(2, 2**n, 25)}):
            bits, per_neuron = collision_info(n, d)
            rows.append({"N": n, "D": d, "D_over_2N": d / 2**n,
                         "p_corr": collision_accuracy(n, d), "I_bits": bits,
                         "I_per_neuron": per_neuron})
    return rows


@figure("10A", "single-token accuracy as D approaches 2^N")
def _fig_10a(ctx: FigureContext) -> Table:
    return Table(["N", "D", "D_over_2N", "p_corr"], _collision_rows())


@figure("10B", "single-token information per neuron as D approaches 2^N")
def _fig_10b(ctx: FigureContext) -> Table:
    return Table(["N", "D", "D_over_2N", "I_bits", "I_per_neuron"], _collision_rows())


@figure("plate", "all-items-correct probability, thresholded convention against winner-take-all")
def _fig_plate(ctx: FigureContext) -> Table:
    panels = [("A", n, 4096) for n in (500, 1000, 2000)] + [("B", 1000, d) for d in (64, 512, 4096)]
    rows = []
    for panel, n, d in panels:
        for m in (1, 2, 5, 10, 20, 30, 40, 60):
            if m > d:
                continue
            s = snr(LinearLargeM(n, m))
            theta = plate_optimal_threshold(s, d, m)
            rows.append(
                {"panel": panel, "N": n, "D": d, "M": m, "s": s, "theta_plate": theta,
                 "p_all_plate": all_correct_probability(s, d, m, theta, "Plate"),
                 "p_all_ours": all_correct_probability(s, d, m)}
            )
    return Table(list(rows[0]), rows)
