"""Content catalog, AR(H) demand forecasting and synthetic demand traces.

A demand *window* at stage ``t`` is an ``(N, H)`` array whose column ``k``
holds the requests observed at stage ``t - k`` (most recent first). Stages
before a content's birth are filled from its seeded prior history, and
anything older than that is zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientHistory, InvalidParameter

DEFAULT_BETA = (0.6, 0.3, 0.1)


def zipf_popularity(N: int, skew: float) -> np.ndarray:
    if N < 1:
        raise InvalidParameter("Zipf popularity needs N >= 1")
    if skew <= 0:
        raise InvalidParameter("Zipf skew must be positive")
    w = np.arange(1, N + 1, dtype=float) ** (-skew)
    return w / w.sum()


def flat_profile(T: int) -> tuple[float, ...]:
    return (1.0,) * T


# (stage, level) anchors; stage 24 wraps onto stage 1 of the next day
DIURNAL_ANCHORS = ((1, 0.6), (4, 0.3), (12, 1.0), (16, 0.7), (20, 1.0), (24, 0.6))


def diurnal_profile(T: int = 24) -> tuple[float, ...]:
    """Two-peak daily demand level, linearly interpolated and stretched to T stages."""
    xs = np.array([s for s, _ in DIURNAL_ANCHORS], dtype=float)
    ys = np.array([v for _, v in DIURNAL_ANCHORS])
    if T == 1:
        return (float(ys[0]),)
    grid = 1 + (np.arange(T) * (24 - 1) / (T - 1))
    return tuple(float(v) for v in np.interp(grid, xs, ys))


@dataclass(frozen=True)
class ArModel:
    """Parameters of the auto-regressive request model.

    With ``level_normalized`` the history is divided by the level of the
    stage it was observed in before weighting, so ``mu_profile`` acts as an
    absolute daily level rather than a compounding stage-to-stage factor.
    With a flat profile both readings coincide.
    """

    beta: tuple[float, ...] = DEFAULT_BETA
    mu_profile: tuple[float, ...] = field(default_factory=lambda: flat_profile(24))
    noise_sigma: float = 1.0
    zipf_skew: float = 0.8
    base_rate: float = 5.0
    level_normalized: bool = False

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        mu = tuple(float(m) for m in self.mu_profile)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mu_profile", mu)
        if not beta or any(b < 0 for b in beta):
            raise InvalidParameter("beta weights must be nonnegative and nonempty")
        if abs(sum(beta) - 1.0) > 1e-9:
            raise InvalidParameter(f"beta weights must sum to 1, got {sum(beta)}")
        if not mu or any(m <= 0 for m in mu):
            raise InvalidParameter("mu_profile entries must be positive")
        if self.noise_sigma < 0:
            raise InvalidParameter("noise_sigma must be nonnegative")
        if self.zipf_skew <= 0:
            raise InvalidParameter("zipf_skew must be positive")
        if self.base_rate < 0:
            raise InvalidParameter("base_rate must be nonnegative")

    @property
    def H(self) -> int:
        return len(self.beta)

    @property
    def T(self) -> int:
        return len(self.mu_profile)

    def mu(self, s: int) -> float:
        # stages outside 1..T wrap onto the neighbouring day
        return self.mu_profile[(s - 1) % self.T]

    def _level(self, stages) -> np.ndarray:
        if not self.level_normalized:
            return np.ones(len(stages))
        return np.array([self.mu(s) for s in stages])


def forecast_path(model: ArModel, window: np.ndarray, t: int, horizon: int) -> np.ndarray:
    """Expected requests for stages t+1..t+horizon, shape (horizon, N).

    Each step's forecast is fed back into the window (noise-free recursion).
    """
    window = np.atleast_2d(np.asarray(window, dtype=float))
    H = model.H
    if window.shape[1] < H:
        raise InsufficientHistory(f"need {H} history values, got {window.shape[1]}")
    beta = np.array(model.beta)
    # work in level units; hist[:, k] is stage t - k
    hist = window[:, :H] / model._level([t - k for k in range(H)])[None, :]
    out = np.empty((horizon, window.shape[0]))
    for step in range(1, horizon + 1):
        s = t + step
        level = hist @ beta
        out[step - 1] = model.mu(s) * level
        nxt = out[step - 1] / (model.mu(s) if model.level_normalized else 1.0)
        hist = np.concatenate([nxt[:, None], hist[:, :-1]], axis=1)
    return out


def forecast(model: ArModel, history, t: int, steps: int = 1) -> float:
    """Expected request count ``steps`` stages after ``t`` for one content.

    ``history`` lists the last H observations, most recent (stage t) first.
    """
    if steps < 1:
        raise InvalidParameter("steps must be >= 1")
    history = np.asarray(history, dtype=float)
    if history.shape[0] < model.H:
        raise InsufficientHistory(
            f"need {model.H} history values, got {history.shape[0]}; left-pad with zeros"
        )
    return float(forecast_path(model, history[None, : model.H], t, steps)[-1, 0])


def pad_history(values, H: int) -> np.ndarray:
    """Zero-pad a most-recent-first history to depth H."""
    values = list(values)[:H]
    return np.array(values + [0.0] * (H - len(values)), dtype=float)


def realize_demand(model: ArModel, window: np.ndarray, t: int, rng: np.random.Generator,
                   deterministic: bool = False) -> np.ndarray:
    """Draw stage-t request counts from the stage-(t-1) window.

    Noise is Normal(0, sigma^2) inside the AR bracket and the count is a
    Poisson draw around the clamped mean; ``deterministic`` drops the noise
    and rounds the mean instead.
    """
    window = np.atleast_2d(np.asarray(window, dtype=float))
    n = window.shape[0]
    H = model.H
    hist = window[:, :H] / model._level([t - 1 - k for k in range(H)])[None, :]
    bracket = hist @ np.array(model.beta)
    if deterministic:
        return np.rint(np.maximum(0.0, model.mu(t) * bracket)).astype(np.int64)
    eps = rng.normal(0.0, model.noise_sigma, size=n) if model.noise_sigma > 0 else 0.0
    mean = np.maximum(0.0, model.mu(t) * (bracket + eps))
    return rng.poisson(mean).astype(np.int64)


@dataclass(frozen=True)
class Catalog:
    """Contents with sizes, birth stages and seeded prior histories.

    ``prior[n, k]`` is the (synthetic) request count of content n at stage
    ``birth[n] - 1 - k``.
    """

    sizes: np.ndarray
    birth: np.ndarray
    prior: np.ndarray

    @property
    def N(self) -> int:
        return len(self.sizes)

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.N)

    def active(self, t: int) -> np.ndarray:
        return self.birth <= t

    @classmethod
    def initial(cls, N0: int, model: ArModel, sizes=None) -> "Catalog":
        """Initial catalog: content id order is Zipf rank order."""
        H = model.H
        q = zipf_popularity(N0, model.zipf_skew) * N0 * model.base_rate if N0 else np.zeros(0)
        levels = np.array([model.mu(-k) for k in range(H)]) if model.level_normalized else np.ones(H)
        prior = q[:, None] * levels[None, :]
        sizes = np.ones(N0, dtype=np.int64) if sizes is None else np.asarray(sizes, dtype=np.int64)
        if np.any(sizes < 1):
            raise InvalidParameter("content sizes must be >= 1")
        return cls(sizes, np.ones(N0, dtype=np.int64), prior)


def spawn_contents(catalog: Catalog, arrivals: int, t: int, model: ArModel,
                   rng: np.random.Generator, avg_demand: float | None = None) -> Catalog:
    """Append ``arrivals`` unit-size contents born at stage t.

    Each newcomer draws a uniform rank r over the enlarged catalog and gets
    an H-deep prior of ``p_r * N * avg_demand`` (Zipf mass times the total
    per-stage demand), scaled by the level of each prior stage.
    """
    if arrivals < 0:
        raise InvalidParameter("arrivals must be >= 0")
    if arrivals == 0:
        return catalog
    if avg_demand is None:
        avg_demand = model.base_rate
    H = model.H
    N_new = catalog.N + arrivals
    p = zipf_popularity(N_new, model.zipf_skew)
    ranks = rng.integers(1, N_new + 1, size=arrivals)
    q = p[ranks - 1] * N_new * avg_demand
    stages = [t - 1 - k for k in range(H)]
    levels = np.array([model.mu(s) for s in stages]) if model.level_normalized else np.ones(H)
    prior = q[:, None] * levels[None, :]
    return Catalog(
        np.concatenate([catalog.sizes, np.ones(arrivals, dtype=np.int64)]),
        np.concatenate([catalog.birth, np.full(arrivals, t, dtype=np.int64)]),
        np.vstack([catalog.prior.reshape(-1, H), prior]),
    )


@dataclass(frozen=True)
class DemandTrace:
    """Realized requests ``lam[t-1, n]`` for t = 1..T over the final catalog."""

    lam: np.ndarray
    catalog: Catalog
    rng_seed: int | None = None

    @property
    def T(self) -> int:
        return self.lam.shape[0]

    @property
    def N(self) -> int:
        return self.lam.shape[1]

    def at(self, t: int) -> np.ndarray:
        return self.lam[t - 1]

    def window(self, t: int, H: int) -> np.ndarray:
        """History window at stage t: column k is stage t - k (see module doc)."""
        return history_window(self.lam, self.catalog, t, H)

    def total_requests(self) -> int:
        return int(self.lam.sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "content_id", "requests"])
        for t, n in zip(*np.nonzero(self.lam)):
            w.writerow([t + 1, n, int(self.lam[t, n])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, T: int, catalog: Catalog) -> "DemandTrace":
        lam = np.zeros((T, catalog.N), dtype=np.int64)
        for row in csv.DictReader(io.StringIO(text)):
            lam[int(row["stage"]) - 1, int(row["content_id"])] = int(row["requests"])
        return cls(lam, catalog)


def history_window(lam: np.ndarray, catalog: Catalog, t: int, H: int) -> np.ndarray:
    N = catalog.N
    out = np.zeros((N, H))
    for k in range(H):
        s = t - k
        if s >= 1:
            born = catalog.birth <= s
            out[born, k] = lam[s - 1, :N][born]
        back = catalog.birth - 1 - s  # index into prior for pre-birth stages
        use = (back >= 0) & (back < catalog.prior.shape[1])
        out[use, k] = catalog.prior[use, back[use]]
    return out


def generate_trace(model: ArModel, N0: int, arrivals: int, T: int | None = None,
                   rng: np.random.Generator | int | None = None,
                   deterministic: bool = False) -> DemandTrace:
    """Simulate one day: contents arrive at every stage, then requests are drawn."""
    seed = int(rng) if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    T = model.T if T is None else T
    cat = Catalog.initial(N0, model)
    lam = np.zeros((T, N0 + arrivals * T), dtype=np.int64)
    for t in range(1, T + 1):
        if t == 1 or cat.N == 0:
            avg = model.base_rate
        else:
            level = model.mu(t - 1) if model.level_normalized else 1.0
            avg = float(lam[t - 2, : cat.N].mean()) / level
        cat = spawn_contents(cat, arrivals, t, model, rng, avg)
        window = history_window(lam, cat, t - 1, model.H)
        lam[t - 1, : cat.N] = realize_demand(model, window, t, rng, deterministic)
    return DemandTrace(lam, cat, seed)
