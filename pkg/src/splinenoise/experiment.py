"""Monte Carlo study of strong-noise detection from penalized spline residuals.

Data follow ``y = B delta_j + e`` where ``e_I ~ N(0, 1)`` and every other
component is ``N(0, sigma^2)``. For each smoothing parameter the residual
``(I - B H(lam, M, L)) y`` is scanned for its largest absolute entry; a trial
fails on position when that entry is not ``I`` and on sign when its sign
differs from ``sign(e_I)``.

Randomness: trial ``t`` at sigma index ``s`` draws from its own
``PCG64(SeedSequence(seed, spawn_key=(s, t)))`` stream, so results do not
depend on execution order or thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import logging

import numpy as np

from .bspline import column_of, design_matrix, make_uniform_knots, penalty_operator, uniform_abscissae
from .errors import (
    ConfigError,
    DegenerateWeightError,
    DetectionError,
    DomainError,
    ExcessiveFailuresError,
)
from .estimator import WeightMatrix, fit, residual_operator

log = logging.getLogger(__name__)

RNG_SCHEME = "numpy.PCG64(SeedSequence(entropy=seed, spawn_key=(sigma_index, trial_index))).standard_normal"
WEIGHT_MODES = ("identity", "oracle")
MAX_FAILURE_FRACTION = 0.01

DEFAULT_LAMBDA_GRID = tuple(k / 10 for k in range(1, 101))
DEFAULT_SIGMA_GRID = tuple(k / 10 for k in range(1, 16))


@dataclass(frozen=True)
class NoiseModel:
    """Strong noise at 1-based position ``I``; the rest have std ``sigma``."""

    n: int
    I: int
    sigma: float

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.I <= self.n:
            raise DomainError(f"need 1 <= I <= n, got I={self.I}, n={self.n}")
        if not (np.isfinite(self.sigma) and self.sigma >= 0):
            raise DomainError(f"sigma must be finite and >= 0, got {self.sigma}")

    @property
    def ratio(self):
        """Dominance ratio ``1 / sigma^2``."""
        return np.inf if self.sigma == 0 else 1.0 / self.sigma**2


@dataclass(frozen=True)
class SignalSpec:
    """True signal: the single cubic basis function ``S_{j,4}``, ``j`` in ``-3..K``."""

    j: int
    K: int

    def __post_init__(self):
        if not -3 <= self.j <= self.K:
            raise DomainError(f"basis index j={self.j} outside -3..{self.K}")

    @property
    def column(self):
        return column_of(self.j)

    def coefficients(self):
        delta = np.zeros(self.K + 4)
        delta[self.column] = 1.0
        return delta


@dataclass(frozen=True)
class DetectionOutcome:
    index: int
    sign: int


def sign(x):
    """``+1`` for ``x >= 0`` and ``-1`` otherwise; zero is a measure-zero event."""
    return 1 if x >= 0 else -1


def trial_stream(seed, sigma_index, trial_index):
    """Independent generator for one (sigma, trial) cell."""
    ss = np.random.SeedSequence(seed, spawn_key=(int(sigma_index), int(trial_index)))
    return np.random.Generator(np.random.PCG64(ss))


def sample_noise(model, stream):
    """One draw of the strong-noise vector."""
    z = stream.standard_normal(model.n)
    e = model.sigma * z
    e[model.I - 1] = z[model.I - 1]
    return e


def weight_matrix(model, mode="oracle"):
    """``identity`` weights, or ``oracle`` weights ``C^(-1/2)``."""
    if mode == "identity":
        return WeightMatrix.identity(model.n)
    if mode != "oracle":
        raise ConfigError(f"unknown weight mode {mode!r}")
    if model.sigma == 0:
        raise DegenerateWeightError("oracle weights need sigma > 0")
    w = np.full(model.n, 1.0 / model.sigma)
    w[model.I - 1] = 1.0
    return WeightMatrix(w)


def detect(residual):
    """Position (1-based, lowest index on ties) and sign of the largest |residual|."""
    r = np.asarray(residual, dtype=float)
    if r.ndim != 1 or r.size == 0 or not np.all(np.isfinite(r)):
        raise DetectionError("residual must be a non-empty finite vector")
    k = int(np.argmax(np.abs(r)))
    if r[k] == 0:
        raise DetectionError("residual is identically zero")
    return DetectionOutcome(k + 1, sign(r[k]))


def _detect_batch(res):
    # res: (..., n, trials). Mirrors detect() along axis -2.
    a = np.abs(res)
    idx = np.argmax(a, axis=-2)
    peak = np.take_along_axis(res, idx[..., None, :], axis=-2)[..., 0, :]
    bad = (peak == 0) | ~np.all(np.isfinite(res), axis=-2)
    sgn = np.where(peak < 0, -1, 1)
    return idx + 1, sgn, bad


@dataclass(frozen=True)
class ExperimentConfig:
    K: int
    j: int
    I: int
    n: int
    a: float
    b: float
    lambda_grid: tuple
    sigma_grid: tuple
    trials: int
    seed: int
    weight_mode: str

    FIELDS = ("K", "j", "I", "n", "a", "b", "lambda_grid", "sigma_grid", "trials", "seed", "weight_mode")

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "sigma_grid", tuple(float(v) for v in self.sigma_grid))
        problems = []
        for name in ("K", "j", "I", "n", "trials", "seed"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer, float)) or int(v) != v:
                problems.append(f"{name} must be an integer")
            else:
                object.__setattr__(self, name, int(v))
        if problems:
            raise ConfigError("; ".join(problems))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if self.K < 1:
            problems.append("K must be >= 1")
        if not -3 <= self.j <= self.K:
            problems.append(f"j must be in -3..K, got {self.j}")
        if self.n < 2:
            problems.append("n must be >= 2")
        if not 1 <= self.I <= self.n:
            problems.append(f"I must be in 1..n, got {self.I}")
        if not self.a < self.b:
            problems.append("need a < b")
        lg, sg = np.array(self.lambda_grid), np.array(self.sigma_grid)
        if lg.size == 0 or np.any(lg <= 0) or np.any(np.diff(lg) <= 0) or not np.all(np.isfinite(lg)):
            problems.append("lambda_grid must be non-empty, positive, strictly increasing")
        if sg.size == 0 or np.any(sg < 0) or np.any(np.diff(sg) <= 0) or not np.all(np.isfinite(sg)):
            problems.append("sigma_grid must be non-empty, non-negative, strictly increasing")
        if self.trials < 1:
            problems.append("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        if self.weight_mode not in WEIGHT_MODES:
            problems.append(f"weight_mode must be one of {WEIGHT_MODES}")
        elif self.weight_mode == "oracle" and sg.size and sg[0] == 0:
            problems.append("oracle weights need every sigma > 0")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_dict(cls, data):
        """Strict constructor: every field must be present, nothing else allowed."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        missing = [k for k in cls.FIELDS if k not in data]
        extra = [k for k in data if k not in cls.FIELDS]
        if missing or extra:
            raise ConfigError(f"missing keys {missing}, unknown keys {extra}")
        try:
            return cls(**{k: data[k] for k in cls.FIELDS})
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        d = asdict(self)
        d["lambda_grid"] = list(self.lambda_grid)
        d["sigma_grid"] = list(self.sigma_grid)
        return d

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return type(self)(**d)

    @property
    def signal(self):
        return SignalSpec(self.j, self.K)


def default_config(n=10, trials=100, seed=0, weight_mode="oracle", sigma_grid=DEFAULT_SIGMA_GRID,
                 lambda_grid=DEFAULT_LAMBDA_GRID):
    """The published setting: ``[0, 1]``, ``K = 4``, ``j = 3``, ``I = 1``."""
    return ExperimentConfig(K=4, j=3, I=1, n=n, a=0.0, b=1.0, lambda_grid=lambda_grid,
                            sigma_grid=sigma_grid, trials=trials, seed=seed,
                            weight_mode=weight_mode)


def build_problem(config):
    """Design matrix and penalty for a config."""
    knots = make_uniform_knots(config.a, config.b, config.K)
    B = design_matrix(knots, uniform_abscissae(config.a, config.b, config.n))
    return B, penalty_operator(knots)


def run_trial(config, B, L, sigma, e):
    """Detection path over ``config.lambda_grid`` for one noise vector.

    Uses the direct solve for each smoothing parameter. Raises
    :class:`DetectionError` if any residual is identically zero.
    """
    model = NoiseModel(config.n, config.I, sigma)
    M = weight_matrix(model, config.weight_mode)
    y = B @ config.signal.coefficients() + np.asarray(e, dtype=float)
    return [detect(fit(y, B, M, L, lam).residual) for lam in config.lambda_grid]


@dataclass(frozen=True)
class ProbabilityCurve:
    kind: str
    axis: str
    grid: tuple
    probs: tuple
    fixed: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict, repr=False)

    @property
    def points(self):
        return list(zip(self.grid, self.probs))


@dataclass
class MonteCarloResult:
    """Failure probabilities; ``p1``/``p2`` have shape ``(len(sigma), len(lambda))``."""

    config: ExperimentConfig
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    p4: np.ndarray
    failures: np.ndarray
    zero_signs: np.ndarray

    def curves(self):
        cfg = self.config.to_dict()
        lam, sig = self.config.lambda_grid, self.config.sigma_grid
        out = []
        for s, sv in enumerate(sig):
            for kind, p in (("p1", self.p1), ("p2", self.p2)):
                out.append(ProbabilityCurve(kind, "lambda", lam, tuple(p[s]), {"sigma": sv}, cfg))
        for l, lv in enumerate(lam):
            for kind, p in (("p1", self.p1), ("p2", self.p2)):
                out.append(ProbabilityCurve(kind, "sigma", sig, tuple(p[:, l]), {"lambda": lv}, cfg))
        for kind, p in (("p3", self.p3), ("p4", self.p4)):
            out.append(ProbabilityCurve(kind, "sigma", sig, tuple(p), {}, cfg))
        return out


def _sigma_cell(config, B, L, s_index):
    sigma = config.sigma_grid[s_index]
    model = NoiseModel(config.n, config.I, sigma)
    M = weight_matrix(model, config.weight_mode)
    ops = np.stack([residual_operator(B, M, L, lam) for lam in config.lambda_grid])
    E = np.column_stack([sample_noise(model, trial_stream(config.seed, s_index, t))
                         for t in range(config.trials)])
    Y = (B @ config.signal.coefficients())[:, None] + E
    idx, sgn, bad = _detect_batch(ops @ Y)
    true_sign = np.where(E[config.I - 1] < 0, -1, 1)
    failed = bad.any(axis=0)
    ok = ~failed
    pos_miss = (idx != config.I)[:, ok]
    sign_miss = (sgn != true_sign)[:, ok]
    n_ok = max(int(ok.sum()), 1)
    zero = int(np.count_nonzero(E[config.I - 1] == 0))
    return (pos_miss.sum(axis=1) / n_ok, sign_miss.sum(axis=1) / n_ok,
            pos_miss.any(axis=0).sum() / n_ok, sign_miss.any(axis=0).sum() / n_ok,
            int(failed.sum()), zero)


def monte_carlo(config, threads=1, problem=None):
    """Estimate p1..p4 for every (sigma, lambda) in the config grids.

    ``threads`` only changes speed. Raises :class:`ExcessiveFailuresError`
    (carrying the result) when more than 1% of the trials at some sigma fail.
    """
    B, L = build_problem(config) if problem is None else problem
    n_sig = len(config.sigma_grid)
    if threads > 1 and n_sig > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(lambda s: _sigma_cell(config, B, L, s), range(n_sig)))
    else:
        cells = [_sigma_cell(config, B, L, s) for s in range(n_sig)]
    p1, p2, p3, p4, failures, zeros = zip(*cells)
    result = MonteCarloResult(config, np.array(p1), np.array(p2), np.array(p3), np.array(p4),
                              np.array(failures), np.array(zeros))
    worst = result.failures.max() / config.trials
    if worst > MAX_FAILURE_FRACTION:
        raise ExcessiveFailuresError(
            f"{result.failures.max()} of {config.trials} trials failed at some sigma", result)
    if result.failures.any():
        log.warning("trial failures per sigma: %s", result.failures.tolist())
    return result
