"""Monte Carlo experiment runner: sweeps a data parameter, runs every
configured estimator on freshly drawn datasets, and reports the MSE index
(the Frobenius norm of the empirical error-covariance matrix of the
vectorized, trace-renormalized estimation error).

Determinism contract: given (seed, config), the emitted CSV is byte-identical
for any worker count.  Trials are split into fixed-size chunks (independent of
the worker count), each trial draws from its own RngStream keyed by the trial
index, chunks are reduced in index order, and the wall-time column is pinned
to zero so that timing noise never leaks into the output (measured timings are
available in ``MseCurve.detail``).

Estimator labels: ``scm``, ``tyler``, and ``r:<prelim>:<score>`` where
``<prelim>`` is ``scm`` or ``tyler`` and ``<score>`` is ``vdw``, ``t<dof>``
(e.g. ``t5``), ``wilcoxon``, or ``spearman``.
"""

from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat

import numpy as np

from .errors import ConfigError, DataError, ExperimentError, ShapekitError
from .estimators import one_step_r_estimate, scm, tyler
from .linalg import frobenius, herm_sqrt, vec
from .sampling import (
    CesModel,
    ComplexT,
    ContaminationConfig,
    GeneralizedGaussian,
    RngStream,
    build_outlier_dataset,
    gg_scale_for_power,
    sample_ces,
    sample_contaminated,
    toeplitz_scatter,
)
from .scores import PowerScore, StudentTScore, VanDerWaerdenScore

__all__ = [
    "ExperimentConfig",
    "MseRow",
    "MseCurve",
    "CellDetail",
    "PRESETS",
    "preset_config",
    "apply_param",
    "mse_index",
    "run_experiment",
    "emit_csv",
    "parse_csv",
]

_CSV_HEADER = "sweep,estimator,mse_index,trials,nonpd_rate,seconds"
_SWEEP_PARAMS = ("lambda", "L", "outlier_frac", "epsilon")
_DATA_MODELS = ("plain", "outliers", "contaminated")
_MAX_FAILURE_RATE = 0.05
_TARGET_BATCHES = 100


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description (picklable, all-primitive)."""

    preset: str = "custom"
    n_dim: int = 8
    rho_mod: float = 0.8
    rho_arg: float = 2.0 * math.pi / 5.0
    sigma2: float = 4.0
    data_model: str = "plain"
    sweep_param: str = "lambda"
    sweep: tuple = (2.0,)
    lam: float = 2.0
    n_obs: int = 40
    nu: float = 5.0
    upsilon: float = 0.01
    gg_shape: float = 0.1
    outlier_frac: float = 0.0
    epsilon: float = 0.0
    estimators: tuple = ("scm", "tyler", "r:tyler:vdw")
    trials: int = 10_000
    seed: int = 0
    workers: int = 1
    tyler_tol: float = 1e-9
    tyler_max_iter: int = 200

    @property
    def rho(self):
        return self.rho_mod * complex(math.cos(self.rho_arg), math.sin(self.rho_arg))

    def validate(self):
        if self.n_dim < 2:
            raise ConfigError(f"N must be at least 2, got {self.n_dim}")
        if not 0.0 <= self.rho_mod < 1.0:
            raise ConfigError(f"rho_mod must lie in [0, 1), got {self.rho_mod}")
        if self.sigma2 <= 0.0:
            raise ConfigError(f"sigma2 must be positive, got {self.sigma2}")
        if self.data_model not in _DATA_MODELS:
            raise ConfigError(f"unknown data model {self.data_model!r}")
        if self.sweep_param not in _SWEEP_PARAMS:
            raise ConfigError(f"unknown sweep parameter {self.sweep_param!r}")
        if not self.sweep:
            raise ConfigError("sweep must contain at least one value")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        if self.upsilon <= 0.0:
            raise ConfigError(f"upsilon must be positive, got {self.upsilon}")
        if self.gg_shape <= 0.0:
            raise ConfigError(f"s (GG shape) must be positive, got {self.gg_shape}")
        if not 0.0 <= self.outlier_frac <= 1.0:
            raise ConfigError(f"outlier_frac must lie in [0, 1], got {self.outlier_frac}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        for value in self.sweep:
            if self.sweep_param == "lambda" and not value > 1.0:
                raise ConfigError(f"lambda sweep values must exceed 1, got {value}")
            if self.sweep_param == "L" and (int(value) != value or value <= self.n_dim):
                raise ConfigError(f"L sweep values must be integers > N, got {value}")
            if self.sweep_param in ("outlier_frac", "epsilon") and not 0.0 <= value <= 1.0:
                raise ConfigError(f"{self.sweep_param} sweep values must lie in [0, 1]")
        if self.sweep_param != "L" and self.n_obs <= self.n_dim:
            raise ConfigError(f"L must exceed N, got L={self.n_obs}, N={self.n_dim}")
        if self.sweep_param != "lambda" and not self.lam > 1.0:
            raise ConfigError(f"lambda must exceed 1, got {self.lam}")
        for label in self.estimators:
            _parse_estimator(label, self.n_dim, self.nu)
        return self


PRESETS = {
    "fig1": dict(
        data_model="plain",
        sweep_param="L",
        sweep=(16.0, 32.0, 64.0, 128.0, 256.0),
        lam=2.0,
        estimators=("scm", "r:scm:vdw"),
    ),
    "fig2": dict(
        data_model="plain",
        sweep_param="lambda",
        sweep=(1.5, 2.0, 3.0, 5.0, 10.0, 20.0),
        n_obs=40,
        estimators=("scm", "tyler", "r:scm:vdw", "r:tyler:vdw"),
    ),
    "fig3": dict(
        data_model="plain",
        sweep_param="lambda",
        sweep=(1.5, 2.0, 3.0, 5.0, 10.0, 20.0),
        n_obs=40,
        estimators=("r:tyler:vdw", "r:tyler:t5", "r:tyler:wilcoxon", "r:tyler:spearman"),
    ),
    "fig4": dict(
        data_model="outliers",
        sweep_param="outlier_frac",
        sweep=(0.0, 0.02, 0.05, 0.10),
        lam=2.0,
        n_obs=800,
        estimators=("tyler", "r:tyler:vdw"),
    ),
    "fig5": dict(
        data_model="contaminated",
        sweep_param="epsilon",
        sweep=(0.0, 0.02, 0.05, 0.10),
        lam=2.0,
        n_obs=800,
        estimators=("tyler", "r:tyler:vdw"),
    ),
    "custom": dict(
        data_model="plain",
        sweep_param="lambda",
        sweep=(2.0,),
        n_obs=40,
        estimators=("scm", "tyler", "r:tyler:vdw"),
    ),
}


def preset_config(name, **overrides):
    """Build an ExperimentConfig from a preset name plus field overrides."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (choose from {sorted(PRESETS)})")
    fields = dict(PRESETS[name])
    fields["preset"] = name
    fields.update(overrides)
    return ExperimentConfig(**fields).validate()


_PARAM_FIELDS = {
    "lambda": ("lam", float),
    "L": ("n_obs", int),
    "nu": ("nu", float),
    "upsilon": ("upsilon", float),
    "epsilon": ("epsilon", float),
    "outlier_frac": ("outlier_frac", float),
    "s": ("gg_shape", float),
    "sigma2": ("sigma2", float),
    "rho_mod": ("rho_mod", float),
    "rho_arg": ("rho_arg", float),
    "N": ("n_dim", int),
}


def apply_param(config, key, raw_value):
    """Apply one ``--param key=value`` override.

    If ``key`` is the configured sweep parameter, the value (a single number
    or a comma-separated list) replaces the sweep; otherwise it sets the fixed
    field and must be a single number.
    """
    if key not in _PARAM_FIELDS:
        raise ConfigError(f"unknown parameter {key!r} (choose from {sorted(_PARAM_FIELDS)})")
    field_name, caster = _PARAM_FIELDS[key]
    try:
        values = [caster(float(part)) for part in str(raw_value).split(",") if part != ""]
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {raw_value!r} for {key}: {exc}") from exc
    if not values:
        raise ConfigError(f"empty value for parameter {key}")
    if key == config.sweep_param:
        return dataclasses.replace(config, sweep=tuple(float(v) for v in values))
    if len(values) > 1:
        raise ConfigError(f"{key} is not the sweep parameter; give a single value")
    return dataclasses.replace(config, **{field_name: values[0]})


# ---------------------------------------------------------------------------
# Estimator specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _EstimatorSpec:
    label: str
    kind: str                 # "scm" | "tyler" | "r"
    prelim: str | None = None
    score_token: str | None = None


def _score_from_token(token, dim, default_dof):
    if token == "vdw":
        return VanDerWaerdenScore(dim)
    if token == "wilcoxon":
        return PowerScore(dim, 1.0)
    if token == "spearman":
        return PowerScore(dim, 2.0)
    if token == "t":
        return StudentTScore(dim, default_dof)
    if token.startswith("t"):
        try:
            return StudentTScore(dim, float(token[1:]))
        except (ValueError, ShapekitError) as exc:
            raise ConfigError(f"bad score token {token!r}: {exc}") from exc
    raise ConfigError(f"unknown score token {token!r}")


def _parse_estimator(label, dim, default_dof):
    parts = label.split(":")
    if parts == ["scm"]:
        return _EstimatorSpec(label, "scm")
    if parts == ["tyler"]:
        return _EstimatorSpec(label, "tyler")
    if len(parts) == 3 and parts[0] == "r" and parts[1] in ("scm", "tyler"):
        _score_from_token(parts[2], dim, default_dof)  # validate eagerly
        return _EstimatorSpec(label, "r", prelim=parts[1], score_token=parts[2])
    raise ConfigError(
        f"unknown estimator {label!r}; expected scm, tyler, or r:<prelim>:<score>"
    )


# ---------------------------------------------------------------------------
# MSE index and result containers
# ---------------------------------------------------------------------------

def mse_index(errors):
    """Frobenius norm of the empirical error covariance (1/T) sum vec(E) vec(E)^H."""
    errors = list(errors)
    if not errors:
        raise DataError("mse_index requires at least one error matrix")
    acc = None
    for err in errors:
        e = vec(np.asarray(err, dtype=np.complex128))
        outer = np.outer(e, e.conj())
        acc = outer if acc is None else acc + outer
    return frobenius(acc / len(errors))


@dataclass(frozen=True)
class MseRow:
    sweep: float
    estimator: str
    mse_index: float
    trials: int
    nonpd_rate: float
    seconds: float


@dataclass(frozen=True)
class CellDetail:
    """Per-(sweep, estimator) diagnostics that are not part of the CSV."""

    batch_mse: np.ndarray
    stderr: float
    failures: int
    wall_seconds: float


@dataclass
class MseCurve:
    rows: list
    detail: dict = field(default_factory=dict, compare=False, repr=False)

    def row(self, sweep, estimator):
        for r in self.rows:
            if r.sweep == float(sweep) and r.estimator == estimator:
                return r
        raise KeyError((sweep, estimator))


# ---------------------------------------------------------------------------
# Per-cell machinery
# ---------------------------------------------------------------------------

class _CellContext:
    """Everything needed to run one (sweep value) cell, built inside workers."""

    def __init__(self, config, sweep_value):
        self.config = config
        dim = config.n_dim
        lam = sweep_value if config.sweep_param == "lambda" else config.lam
        n_obs = int(sweep_value) if config.sweep_param == "L" else config.n_obs
        self.n_obs = n_obs
        self.scatter = toeplitz_scatter(config.rho, dim)
        self.scatter_sqrt = herm_sqrt(self.scatter)
        self.target = dim * self.scatter / np.trace(self.scatter).real
        self.law = ComplexT.from_power(dim, lam, config.sigma2)
        self.specs = [_parse_estimator(lbl, dim, config.nu) for lbl in config.estimators]
        self.scores = {
            spec.label: _score_from_token(spec.score_token, dim, config.nu)
            for spec in self.specs
            if spec.kind == "r"
        }
        model = config.data_model
        if model == "plain":
            self._draw = self._draw_plain
        elif model == "outliers":
            frac = sweep_value if config.sweep_param == "outlier_frac" else config.outlier_frac
            self.n_outliers = int(round(frac * n_obs))
            self.n_proper = n_obs - self.n_outliers
            self.nominal = CesModel(self.scatter, self.law)
            self._draw = self._draw_outliers
        else:
            eps = sweep_value if config.sweep_param == "epsilon" else config.epsilon
            # The contaminating scatter sigma2 * I already carries the power,
            # so the modular scale is matched to unit per-component power:
            # E[z z^H] = sigma2 * I, the same power as the nominal data.
            gg = GeneralizedGaussian(
                dim,
                config.gg_shape,
                gg_scale_for_power(1.0, config.gg_shape, dim),
            )
            self.contamination = ContaminationConfig(
                fraction=eps,
                nominal=CesModel(self.scatter, self.law),
                contaminating=CesModel(config.sigma2 * np.eye(dim), gg),
            )
            self._draw = self._draw_contaminated

    def _draw_plain(self, gen):
        return sample_ces(self.scatter_sqrt, self.law, gen, size=self.n_obs)

    def _draw_outliers(self, gen):
        return build_outlier_dataset(self.n_proper, self.n_outliers, self.nominal, gen)

    def _draw_contaminated(self, gen):
        return sample_contaminated(self.contamination, self.n_obs, gen)

    def estimate(self, spec, data, gen, prelim_cache):
        if spec.kind in ("scm", "tyler"):
            return self._preliminary(spec.kind, data, prelim_cache)
        prelim = self._preliminary(spec.prelim, data, prelim_cache)
        return one_step_r_estimate(
            data,
            prelim,
            self.scores[spec.label],
            gen,
            upsilon=self.config.upsilon,
        )

    def _preliminary(self, token, data, cache):
        if token not in cache:
            try:
                if token == "scm":
                    cache[token] = scm(data)
                else:
                    cache[token] = tyler(
                        data,
                        tol=self.config.tyler_tol,
                        max_iter=self.config.tyler_max_iter,
                    )
            except ShapekitError as exc:
                cache[token] = exc
        value = cache[token]
        if isinstance(value, ShapekitError):
            raise value
        return value


def _run_chunk(config, sweep_value, start, stop):
    """Run trials [start, stop) of one cell; returns per-estimator accumulators.

    Each trial draws from RngStream(seed, trial_index), so chunk boundaries and
    worker scheduling cannot change any draw.
    """
    ctx = _CellContext(config, sweep_value)
    dim2 = config.n_dim * config.n_dim
    acc = {
        spec.label: [np.zeros((dim2, dim2), dtype=np.complex128), 0, 0, 0]
        for spec in ctx.specs
    }
    for trial in range(start, stop):
        gen = RngStream(config.seed, trial).generator
        data = ctx._draw(gen)
        prelim_cache = {}
        for spec in ctx.specs:
            entry = acc[spec.label]
            try:
                output = ctx.estimate(spec, data, gen, prelim_cache)
            except ShapekitError:
                entry[3] += 1
                continue
            err = vec(output.renormalized - ctx.target)
            entry[0] += np.outer(err, err.conj())
            entry[1] += 1
            entry[2] += int(output.diagnostics.nonpd)
    return acc


def _chunk_bounds(trials):
    size = max(1, math.ceil(trials / _TARGET_BATCHES))
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


# ---------------------------------------------------------------------------
# Experiment driver
# ---------------------------------------------------------------------------

def run_experiment(config):
    """Run the configured sweep and return the MseCurve.

    Per-trial estimator failures are counted and the trial is excluded for
    that estimator; a per-cell failure rate above 5% aborts the experiment.
    """
    config.validate()
    bounds = _chunk_bounds(config.trials)
    rows = []
    detail = {}
    pool = None
    try:
        if config.workers > 1:
            pool = ProcessPoolExecutor(max_workers=config.workers)
        for sweep_value in config.sweep:
            started = time.perf_counter()
            if pool is None:
                chunk_results = [
                    _run_chunk(config, sweep_value, a, b) for a, b in bounds
                ]
            else:
                chunk_results = list(
                    pool.map(
                        _run_chunk,
                        repeat(config),
                        repeat(sweep_value),
                        [a for a, _ in bounds],
                        [b for _, b in bounds],
                    )
                )
            elapsed = time.perf_counter() - started
            for label in config.estimators:
                total = None
                ok = nonpd = failures = 0
                batch_mse = []
                for chunk in chunk_results:  # fixed chunk order: deterministic sums
                    m, c_ok, c_nonpd, c_fail = chunk[label]
                    total = m.copy() if total is None else total + m
                    ok += c_ok
                    nonpd += c_nonpd
                    failures += c_fail
                    if c_ok:
                        batch_mse.append(frobenius(m / c_ok))
                if failures / config.trials > _MAX_FAILURE_RATE:
                    raise ExperimentError(
                        f"estimator {label!r} failed {failures}/{config.trials} trials "
                        f"at sweep value {sweep_value}"
                    )
                if ok == 0:
                    raise ExperimentError(
                        f"estimator {label!r} produced no usable trials at {sweep_value}"
                    )
                batch_mse = np.asarray(batch_mse)
                stderr = (
                    float(batch_mse.std(ddof=1) / math.sqrt(batch_mse.size))
                    if batch_mse.size > 1
                    else math.nan
                )
                rows.append(
                    MseRow(
                        sweep=float(sweep_value),
                        estimator=label,
                        mse_index=frobenius(total / ok),
                        trials=ok,
                        nonpd_rate=nonpd / ok,
                        seconds=0.0,
                    )
                )
                detail[(float(sweep_value), label)] = CellDetail(
                    batch_mse=batch_mse,
                    stderr=stderr,
                    failures=failures,
                    wall_seconds=elapsed,
                )
    finally:
        if pool is not None:
            pool.shutdown()
    order = {label: i for i, label in enumerate(config.estimators)}
    rows.sort(key=lambda r: (r.sweep, order[r.estimator]))
    return MseCurve(rows=rows, detail=detail)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def emit_csv(curve, path):
    """Write the fixed-column CSV (floats at 17 significant digits)."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(_CSV_HEADER + "\n")
        for row in curve.rows:
            fh.write(
                f"{row.sweep:.17g},{row.estimator},{row.mse_index:.17g},"
                f"{row.trials},{row.nonpd_rate:.17g},{row.seconds:.17g}\n"
            )


def parse_csv(path):
    """Read a CSV produced by :func:`emit_csv` back into an MseCurve."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _CSV_HEADER:
        raise DataError(f"{path}: missing or malformed header")
    rows = []
    for line in lines[1:]:
        sweep, estimator, mse, trials, nonpd, seconds = line.split(",")
        rows.append(
            MseRow(
                sweep=float(sweep),
                estimator=estimator,
                mse_index=float(mse),
                trials=int(trials),
                nonpd_rate=float(nonpd),
                seconds=float(seconds),
            )
        )
    return MseCurve(rows=rows)
