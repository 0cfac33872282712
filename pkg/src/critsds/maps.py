"""Random map families with asymptotic-linearity bookkeeping.

Each family samples transformations psi together with the data (A, B,
alpha) of the envelope |psi(x) - A*x| <= B*(1 + |x|^alpha).  For the
alpha = 0 families the stronger single-constant bound
|psi(x) - A*x| <= B holds, which is what the affine sandwich recursions
of the engine require.  B is clamped to >= 1 throughout (the normal form
the analysis assumes costs nothing and simplifies bookkeeping).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import transforms

__all__ = [
    "Dist",
    "MapSample",
    "FamilySpec",
    "AffineFamily",
    "GoldieMaxFamily",
    "GoldieSqrtFamily",
    "ReflectedStepFamily",
    "ExpConjReflectedFamily",
    "IntervalMixFamily",
    "GaltonWatsonFamily",
    "EnvelopeReport",
    "envelope_check",
    "goldie_sqrt_derivative_check",
    "uniqueness_criterion_audit",
    "gw_envelope_constant",
    "family_from_config",
]

REALS = "reals"
HALF_LINE = "half_line"
NATURALS = "naturals"
UNIT_INTERVAL = "unit_interval"


def domain_contains(domain: str, x: float) -> bool:
    if domain == REALS:
        return bool(np.isfinite(x))
    if domain == HALF_LINE:
        return bool(np.isfinite(x)) and x >= 0
    if domain == NATURALS:
        return x >= 0 and float(x).is_integer()
    if domain == UNIT_INTERVAL:
        return 0.0 <= x <= 1.0
    raise ValueError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# parameter distributions

@dataclass(frozen=True)
class Dist:
    """A named scalar distribution, serializable into scenario configs."""

    kind: str
    args: tuple

    @staticmethod
    def constant(v: float) -> "Dist":
        return Dist("constant", (float(v),))

    @staticmethod
    def normal(mean: float, std: float) -> "Dist":
        return Dist("normal", (float(mean), float(std)))

    @staticmethod
    def lognormal(mean_log: float, std_log: float) -> "Dist":
        return Dist("lognormal", (float(mean_log), float(std_log)))

    @staticmethod
    def uniform(lo: float, hi: float) -> "Dist":
        return Dist("uniform", (float(lo), float(hi)))

    @staticmethod
    def exponential(scale: float) -> "Dist":
        return Dist("exponential", (float(scale),))

    @staticmethod
    def two_point(a: float, p_a: float, b: float) -> "Dist":
        return Dist("two_point", (float(a), float(p_a), float(b)))

    @staticmethod
    def truncnormal(mean: float, std: float, bound: float) -> "Dist":
        """Normal conditioned on |x - mean| <= bound (symmetric, so the
        mean is preserved)."""
        return Dist("truncnormal", (float(mean), float(std), float(bound)))

    @staticmethod
    def poisson(lam: float) -> "Dist":
        return Dist("poisson", (float(lam),))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        k, a = self.kind, self.args
        if k == "constant":
            return np.full(size, a[0])
        if k == "normal":
            return a[0] + a[1] * rng.standard_normal(size)
        if k == "lognormal":
            return np.exp(a[0] + a[1] * rng.standard_normal(size))
        if k == "uniform":
            return a[0] + (a[1] - a[0]) * rng.random(size)
        if k == "exponential":
            return a[0] * rng.standard_exponential(size)
        if k == "two_point":
            return np.where(rng.random(size) < a[1], a[0], a[2])
        if k == "truncnormal":
            mean, std, bound = a
            out = mean + std * rng.standard_normal(size)
            bad = np.abs(out - mean) > bound
            while bad.any():
                out[bad] = mean + std * rng.standard_normal(int(bad.sum()))
                bad = np.abs(out - mean) > bound
            return out
        if k == "poisson":
            return rng.poisson(a[0], size).astype(float)
        raise ValueError(f"unknown distribution kind {k!r}")

    def mean(self) -> Optional[float]:
        """Analytic mean where available, else None (caller falls back to MC)."""
        k, a = self.kind, self.args
        if k in ("constant",):
            return a[0]
        if k in ("normal", "truncnormal"):
            return a[0]
        if k == "lognormal":
            return math.exp(a[0] + a[1] ** 2 / 2)
        if k == "uniform":
            return (a[0] + a[1]) / 2
        if k == "exponential":
            return a[0]
        if k == "two_point":
            return a[0] * a[1] + a[2] * (1 - a[1])
        if k == "poisson":
            return a[0]
        return None

    def as_config(self) -> dict:
        return {"kind": self.kind, "args": list(self.args)}

    @staticmethod
    def from_config(obj: dict) -> "Dist":
        return Dist(str(obj["kind"]), tuple(float(v) for v in obj["args"]))


# ---------------------------------------------------------------------------
# map samples

@dataclass(frozen=True)
class MapSample:
    """One realized random transformation with its linearization data."""

    family: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    A: float
    B: float
    alpha: float
    domain: str
    params: tuple = ()

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("asymptotic slope A must be positive")
        if not self.B > 0:
            raise ValueError("envelope constant B must be positive")
        if not (0 <= self.alpha < 1):
            raise ValueError("envelope exponent alpha must lie in [0, 1)")

    def __call__(self, x):
        return self.evaluate(x)


def apply_map(m: MapSample, x: float) -> float:
    """Apply one map with domain checking on both sides."""
    if not domain_contains(m.domain, x):
        raise ValueError(f"x={x} outside domain {m.domain}")
    y = float(m.evaluate(x))
    if not domain_contains(m.domain, y):
        raise ValueError(f"map left its domain: psi({x}) = {y}")
    return y


# ---------------------------------------------------------------------------
# family specifications

class FamilySpec:
    """Samplable distribution over transformations.

    Subclasses define the per-step parameter draw (one chain's stream at a
    time, a fixed recipe shared by both kernel backends), the envelope
    data as a function of those parameters, and the construction of
    individual MapSample values.
    """

    name: str = ""
    domain: str = REALS
    critical_intended: bool = True
    kernel: Optional[str] = None  # kernel function name, None = python-only
    param_names: tuple = ()

    def draw_params(self, rng: np.random.Generator, size: int) -> dict:
        raise NotImplementedError

    def envelope_ab(self, params: dict) -> tuple[np.ndarray, np.ndarray]:
        """(A, B) arrays for a parameter block, with B >= 1."""
        raise NotImplementedError

    def map_from_row(self, row: dict) -> MapSample:
        raise NotImplementedError

    def sample_map(self, rng: np.random.Generator) -> MapSample:
        params = self.draw_params(rng, 1)
        row = {k: float(v[0]) for k, v in params.items()}
        return self.map_from_row(row)

    # latent-state hooks (identity for families simulated in their own domain)
    def state_from_value(self, x):
        return x

    def values_from_states(self, states):
        return states

    def log_a_mean(self) -> Optional[float]:
        """Analytic E[log A] if available."""
        return None

    def estimate_log_a_mean(self, seed: int, n: int = 200_000) -> tuple[float, float]:
        """Monte Carlo (mean, standard error) of log A."""
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        params = self.draw_params(rng, n)
        la = np.log(self.envelope_ab(params)[0])
        return float(la.mean()), float(la.std(ddof=1) / math.sqrt(n))

    def as_config(self) -> dict:
        raise NotImplementedError


@dataclass
class AffineFamily(FamilySpec):
    """psi(x) = A*x + B with (log A, B) drawn independently."""

    log_a: Dist = field(default_factory=lambda: Dist.normal(0.0, 0.5))
    b: Dist = field(default_factory=lambda: Dist.lognormal(0.0, 0.5))
    b_min: float = 1.0
    name: str = "affine"
    domain: str = HALF_LINE
    kernel: str = "affine_block"
    param_names: tuple = ("a", "b")

    def draw_params(self, rng, size):
        la = self.log_a.sample(rng, size)
        b = self.b.sample(rng, size)
        if self.b_min is not None:
            b = np.maximum(b, self.b_min)
        return {"a": np.exp(la), "b": b}

    def envelope_ab(self, params):
        return params["a"], np.maximum(np.abs(params["b"]), 1.0)

    def map_from_row(self, row):
        a, b = row["a"], row["b"]
        return MapSample("affine", lambda x, a=a, b=b: a * np.asarray(x, float) + b,
                         A=a, B=max(abs(b), 1.0), alpha=0.0, domain=self.domain,
                         params=(a, b))

    def log_a_mean(self):
        return self.log_a.mean()

    def as_config(self):
        return {"family": "affine", "log_a": self.log_a.as_config(),
                "b": self.b.as_config(), "b_min": self.b_min}


@dataclass
class GoldieMaxFamily(FamilySpec):
    """psi(x) = max(A*x, B) + C on the half line, A, B, C > 0."""

    log_a: Dist = field(default_factory=lambda: Dist.normal(0.0, 0.3))
    b: Dist = field(default_factory=lambda: Dist.lognormal(0.0, 0.3))
    c: Dist = field(default_factory=lambda: Dist.uniform(0.5, 1.5))
    name: str = "goldie_max"
    domain: str = HALF_LINE
    kernel: str = "goldie_max_block"
    param_names: tuple = ("a", "b", "c")

    def draw_params(self, rng, size):
        la = self.log_a.sample(rng, size)
        b = self.b.sample(rng, size)
        c = self.c.sample(rng, size)
        if (b <= 0).any() or (c < 0).any():
            raise ValueError("goldie_max requires B > 0 and C >= 0")
        return {"a": np.exp(la), "b": b, "c": c}

    def envelope_ab(self, params):
        # sup_x |max(Ax,B)+C - Ax| = B + C; +1 keeps strict slack and >= 1
        return params["a"], params["b"] + params["c"] + 1.0

    def map_from_row(self, row):
        a, b, c = row["a"], row["b"], row["c"]
        return MapSample(
            "goldie_max",
            lambda x, a=a, b=b, c=c: np.maximum(a * np.asarray(x, float), b) + c,
            A=a, B=b + c + 1.0, alpha=0.0, domain=self.domain, params=(a, b, c))

    def log_a_mean(self):
        return self.log_a.mean()

    def as_config(self):
        return {"family": "goldie_max", "log_a": self.log_a.as_config(),
                "b": self.b.as_config(), "c": self.c.as_config()}


@dataclass
class GoldieSqrtFamily(FamilySpec):
    """psi(x) = sqrt(A^2 x^2 + B x + C), A, B, C > 0.

    With enforce_delta the discriminant condition B^2 - 4 A^2 C <= 0 is
    built in by drawing C = B^2/(4A^2) + extra, extra >= 0; the map is
    then Lipschitz with constant exactly A.
    """

    log_a: Dist = field(default_factory=lambda: Dist.normal(0.0, 0.3))
    b: Dist = field(default_factory=lambda: Dist.lognormal(0.0, 0.3))
    c_extra: Dist = field(default_factory=lambda: Dist.lognormal(0.0, 0.3))
    enforce_delta: bool = True
    name: str = "goldie_sqrt"
    domain: str = HALF_LINE
    kernel: str = "goldie_sqrt_block"
    param_names: tuple = ("a", "b", "c")

    def draw_params(self, rng, size):
        la = self.log_a.sample(rng, size)
        a = np.exp(la)
        b = self.b.sample(rng, size)
        extra = self.c_extra.sample(rng, size)
        if (b <= 0).any() or (extra < 0).any():
            raise ValueError("goldie_sqrt requires B > 0 and C > 0")
        if self.enforce_delta:
            c = b * b / (4.0 * a * a) + extra
        else:
            c = extra
        return {"a": a, "b": b, "c": c}

    def envelope_ab(self, params):
        # 0 <= sqrt(A^2x^2+Bx+C) - Ax <= B/(2A) + sqrt(C) on [0, inf)
        a, b, c = params["a"], params["b"], params["c"]
        return a, np.maximum(b / (2.0 * a) + np.sqrt(c), 1.0)

    def map_from_row(self, row):
        a, b, c = row["a"], row["b"], row["c"]
        return MapSample(
            "goldie_sqrt",
            lambda x, a=a, b=b, c=c: np.sqrt((a * np.asarray(x, float)) ** 2 + b * np.asarray(x, float) + c),
            A=a, B=max(b / (2 * a) + math.sqrt(c), 1.0), alpha=0.0,
            domain=self.domain, params=(a, b, c))

    def log_a_mean(self):
        return self.log_a.mean()

    def as_config(self):
        return {"family": "goldie_sqrt", "log_a": self.log_a.as_config(),
                "b": self.b.as_config(), "c_extra": self.c_extra.as_config(),
                "enforce_delta": self.enforce_delta}


@dataclass
class ReflectedStepFamily(FamilySpec):
    """psi(y) = |y - u| on [0, inf).

    Degenerate-critical on the linear scale (A = 1 surely); the
    exponential conjugation removes the degeneracy.
    """

    u: Dist = field(default_factory=lambda: Dist.normal(0.0, 1.0))
    name: str = "reflected_step"
    domain: str = HALF_LINE
    kernel: str = "reflected_block"
    param_names: tuple = ("u",)

    def draw_params(self, rng, size):
        return {"u": self.u.sample(rng, size)}

    def envelope_ab(self, params):
        u = params["u"]
        return np.ones_like(u), np.maximum(np.abs(u), 1.0)

    def map_from_row(self, row):
        u = row["u"]
        return MapSample("reflected_step",
                         lambda x, u=u: np.abs(np.asarray(x, float) - u),
                         A=1.0, B=max(abs(u), 1.0), alpha=0.0,
                         domain=self.domain, params=(u,))

    def log_a_mean(self):
        return 0.0

    def as_config(self):
        return {"family": "reflected_step", "u": self.u.as_config()}


# Validated margin for the exponentially conjugated reflected step: the
# conjugate error |s(|s^-1(x) - u|) - e^(-u) x| vanishes for large x and is
# bounded by ~2 e^(1+|u|) overall; the factor 3 gives strict slack.
_EXP_REFL_B = 3.0


@dataclass
class ExpConjReflectedFamily(FamilySpec):
    """Reflected step conjugated by the exponential scale.

    Simulated in the latent reflected coordinate y (state) and reported in
    x = s(y); A = e^(-u), B = 3 e^(1+|u|).
    """

    u: Dist = field(default_factory=lambda: Dist.normal(0.0, 1.0))
    name: str = "exp_conj_reflected"
    domain: str = HALF_LINE
    kernel: str = "reflected_block"
    param_names: tuple = ("u",)

    def draw_params(self, rng, size):
        return {"u": self.u.sample(rng, size)}

    def envelope_ab(self, params):
        u = params["u"]
        return np.exp(-u), _EXP_REFL_B * np.exp(1.0 + np.abs(u))

    def map_from_row(self, row):
        u = row["u"]

        def ev(x, u=u):
            y = transforms.exp_scale_inv(np.asarray(x, float))
            return transforms.exp_scale(np.abs(y - u))

        return MapSample("exp_conj_reflected", ev, A=math.exp(-u),
                         B=_EXP_REFL_B * math.exp(1.0 + abs(u)), alpha=0.0,
                         domain=self.domain, params=(u,))

    def state_from_value(self, x):
        return transforms.exp_scale_inv(x)

    def values_from_states(self, states):
        return transforms.exp_scale(states)

    def log_a_mean(self):
        m = self.u.mean()
        return None if m is None else -m

    def as_config(self):
        return {"family": "exp_conj_reflected", "u": self.u.as_config()}


_INTERVAL_B_GRID = np.concatenate(
    [-np.logspace(6, -2, 25), [0.0], np.logspace(-2, 6, 25)])


@dataclass
class IntervalMixFamily(FamilySpec):
    """Real-line conjugate of random interval automorphisms.

    phi mixes the conjugated pure scaling with the identity:
    phi(u) = (1-t) * rinv(a_lin * r(u)) + t * u, which fixes 0 and 1 with
    equal end derivatives a_phi = e^ell; its conjugate on R has
    A = e^(-ell).  B is measured per sample as the grid sup of the
    envelope error times a 1.25 safety factor.
    """

    ell: Dist = field(default_factory=lambda: Dist.truncnormal(0.0, 0.25, 1.0))
    t: float = 0.25
    name: str = "interval_mix"
    domain: str = REALS
    kernel: str = "interval_mix_block"
    param_names: tuple = ("alin",)

    def __post_init__(self):
        if self.ell.kind == "truncnormal" and math.exp(-self.ell.args[2]) <= self.t:
            raise ValueError("truncation bound too wide: need e^(-bound) > t")

    def _alin(self, a_phi):
        return (1.0 - self.t) / (a_phi - self.t)

    def draw_params(self, rng, size):
        ell = self.ell.sample(rng, size)
        a_phi = np.exp(ell)
        if (a_phi <= self.t).any():
            raise ValueError("drew a_phi <= t; end derivative out of range")
        return {"alin": self._alin(a_phi), "ell": ell}

    def _eval_block(self, alin, x):
        u1 = transforms.line_to_interval(np.multiply.outer(alin, x))
        u2 = transforms.line_to_interval(np.asarray(x, float))
        m = (1.0 - self.t) * u1 + self.t * u2
        return transforms.interval_to_line(m)

    def envelope_ab(self, params):
        alin, ell = params["alin"], params["ell"]
        a = np.exp(-ell)
        # grid sup of |psi(x) - A x|, vectorized over the whole block
        vals = self._eval_block(alin, _INTERVAL_B_GRID)
        err = np.abs(vals - np.multiply.outer(a, _INTERVAL_B_GRID))
        b = np.maximum(err.max(axis=-1) * 1.25, 1.0)
        return a, b

    def map_from_row(self, row):
        alin = row["alin"]
        ell = row["ell"]
        a = math.exp(-ell)
        vals = self._eval_block(np.array([alin]), _INTERVAL_B_GRID)[0]
        b = max(float(np.abs(vals - a * _INTERVAL_B_GRID).max()) * 1.25, 1.0)

        def ev(x, alin=alin, t=self.t):
            x = np.asarray(x, float)
            u1 = transforms.line_to_interval(alin * x)
            u2 = transforms.line_to_interval(x)
            return transforms.interval_to_line((1.0 - t) * u1 + t * u2)

        return MapSample("interval_mix", ev, A=a, B=b, alpha=0.0,
                         domain=self.domain, params=(alin, ell))

    def interval_phi(self, row) -> Callable:
        """The underlying [0,1] automorphism of a sampled row."""
        alin, t = row["alin"], self.t

        def phi(u):
            u = np.asarray(u, float)
            return (1.0 - t) * transforms.line_to_interval(
                alin * transforms.interval_to_line(u)) + t * u

        return phi

    def log_a_mean(self):
        m = self.ell.mean()
        return None if m is None else -m

    def as_config(self):
        return {"family": "interval_mix", "ell": self.ell.as_config(), "t": self.t}


class _GWMap:
    """A frozen Galton-Watson map: immigration + memoized offspring sums.

    The offspring draws extend lazily with the sample's own generator so
    psi is a consistent function of x; extension is append-only.
    """

    def __init__(self, immigration: int, mean_offspring: float,
                 offspring: Dist, seed: int, pretab: int):
        self.immigration = immigration
        self.mean_offspring = mean_offspring
        self._offspring = offspring
        self._rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
        self._cum = np.zeros(1)
        self._extend(pretab)

    def _extend(self, x: int):
        need = x - (len(self._cum) - 1)
        if need > 0:
            draws = np.rint(self._offspring.sample(self._rng, int(need)))
            if (draws < 0).any():
                raise ValueError("offspring law produced a negative count")
            self._cum = np.concatenate([self._cum, self._cum[-1] + np.cumsum(draws)])

    def __call__(self, x):
        xs = np.atleast_1d(np.asarray(x))
        if not np.all(xs >= 0) or not np.all(np.equal(np.mod(xs, 1), 0)):
            raise ValueError("Galton-Watson maps act on nonnegative integers")
        xi = xs.astype(int)
        self._extend(int(xi.max()))
        out = self.immigration + self._cum[xi]
        return out if np.ndim(x) else float(out[0])


@dataclass
class GaltonWatsonFamily(FamilySpec):
    """Population maps psi(x) = i + sum of x offspring draws.

    environments: sequence of (weight, offspring Dist over N, immigration
    Dist over N); a sampled map fixes one environment, one immigration
    value and one frozen offspring stream.
    """

    environments: Sequence[tuple] = ((1.0, Dist.poisson(1.0), Dist.constant(1.0)),)
    alpha: float = 0.8
    pretab: int = 1024
    name: str = "galton_watson"
    domain: str = NATURALS
    kernel: Optional[str] = None

    def __post_init__(self):
        w = np.array([e[0] for e in self.environments], dtype=float)
        if (w <= 0).any():
            raise ValueError("environment weights must be positive")
        self._wcum = np.cumsum(w / w.sum())
        if not (0.75 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (3/4, 1)")

    def sample_map(self, rng: np.random.Generator) -> MapSample:
        k = int(np.searchsorted(self._wcum, rng.random(), side="right"))
        k = min(k, len(self.environments) - 1)
        _, offspring, immigration = self.environments[k]
        i = float(np.rint(immigration.sample(rng, 1)[0]))
        if i < 0:
            raise ValueError("immigration must be nonnegative")
        seed = int(rng.integers(0, 2**63 - 1))
        a = offspring.mean()
        if a is None or a <= 0:
            raise ValueError("offspring law needs a positive analytic mean")
        gw = _GWMap(int(i), a, offspring, seed, self.pretab)
        err = np.abs(gw(np.arange(self.pretab + 1)) - a * np.arange(self.pretab + 1))
        b = max(float((err / (np.arange(self.pretab + 1) ** self.alpha + 1.0)).max()) * 1.25, 1.0)
        return MapSample("galton_watson", gw, A=a, B=b, alpha=self.alpha,
                         domain=NATURALS, params=(k, i, seed))

    def draw_params(self, rng, size):
        raise NotImplementedError("Galton-Watson has no block kernel; sample maps instead")

    def log_a_mean(self):
        w = np.array([e[0] for e in self.environments], dtype=float)
        w = w / w.sum()
        means = [e[1].mean() for e in self.environments]
        if any(m is None or m <= 0 for m in means):
            return None
        return float(np.sum(w * np.log(means)))

    def as_config(self):
        return {"family": "galton_watson", "alpha": self.alpha,
                "environments": [
                    {"weight": w, "offspring": off.as_config(),
                     "immigration": imm.as_config()}
                    for (w, off, imm) in self.environments]}


# ---------------------------------------------------------------------------
# operations on samples and families

@dataclass(frozen=True)
class EnvelopeReport:
    max_violation: float
    worst_x: float
    holds: bool


def envelope_check(m: MapSample, grid: np.ndarray) -> EnvelopeReport:
    """Largest excess of |psi(x) - A x| over B(1 + |x|^alpha) on the grid.

    Nonpositive max violation means the envelope holds there.
    """
    grid = np.asarray(grid, dtype=float)
    err = np.abs(np.asarray(m.evaluate(grid), dtype=float) - m.A * grid)
    bound = m.B * (1.0 + np.abs(grid) ** m.alpha)
    viol = err - bound
    i = int(np.argmax(viol))
    return EnvelopeReport(float(viol[i]), float(grid[i]), bool(viol[i] <= 0))


def _fd_slopes(m: MapSample, grid: np.ndarray) -> np.ndarray:
    """Central finite-difference slopes with scale-aware step."""
    grid = np.asarray(grid, dtype=float)
    h = 1e-4 * (1.0 + np.abs(grid))
    if m.domain in (HALF_LINE, NATURALS):
        lo = np.maximum(grid - h, 0.0)
    else:
        lo = grid - h
    hi = grid + h
    fhi = np.asarray(m.evaluate(hi), dtype=float)
    flo = np.asarray(m.evaluate(lo), dtype=float)
    return (fhi - flo) / (hi - lo)


def goldie_sqrt_derivative_check(m: MapSample, grid: np.ndarray, tol: float = 1e-9) -> bool:
    """Slopes nondecreasing and bounded by A (needs B^2 - 4 A^2 C <= 0)."""
    if m.family != "goldie_sqrt":
        raise ValueError("not a goldie_sqrt sample")
    a, b, c = m.params
    if b * b - 4 * a * a * c > 0:
        raise ValueError("discriminant positive: monotone-derivative claim needs B^2 <= 4 A^2 C")
    grid = np.sort(np.asarray(grid, dtype=float))
    if len(grid) < 2:
        return True
    s = _fd_slopes(m, grid)
    return bool(np.all(np.diff(s) >= -tol) and np.all(s <= m.A + tol))


@dataclass
class UniquenessAudit:
    """Evidence for the three local-contraction conditions."""

    cond1_scan: dict            # beta -> estimated P(inf psi >= beta)
    cond1_beta: float           # largest beta with positive probability
    cond1_prob: float
    cond1_pass: bool
    cond2_violations: int
    cond2_worst: float
    cond2_pass: bool
    cond3_violations: int
    cond3_worst_excess: float
    cond3_pass: bool
    samples: int

    @property
    def all_pass(self) -> bool:
        return self.cond1_pass and self.cond2_pass and self.cond3_pass

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "cond1_beta", "cond1_prob", "cond1_pass", "cond2_violations",
            "cond2_worst", "cond2_pass", "cond3_violations",
            "cond3_worst_excess", "cond3_pass", "samples")}
        out["cond1_scan"] = {str(k): v for k, v in self.cond1_scan.items()}
        out["all_pass"] = self.all_pass
        return out


def uniqueness_criterion_audit(
    spec: FamilySpec,
    sample_budget: int,
    grid: np.ndarray,
    seed: int,
    beta_scan: Sequence[float] = (0.01, 0.1, 0.5, 1.0, 2.0),
    tol: float = 1e-9,
) -> UniquenessAudit:
    """Audit the uniqueness criterion on sampled maps.

    cond1: some beta > 0 has positive estimated P(psi([0,inf)) within
    [beta,inf)); cond2: A x <= psi(x) <= A x + B on the grid; cond3: max
    finite-difference slope <= A + tol.
    """
    if spec.domain != HALF_LINE:
        raise ValueError("audit applies to half-line families")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    grid = np.sort(np.abs(np.asarray(grid, dtype=float)))
    inf_counts = np.zeros(len(beta_scan), dtype=int)
    c2_viol = 0
    c2_worst = 0.0
    c3_viol = 0
    c3_worst = 0.0
    for _ in range(sample_budget):
        m = spec.sample_map(rng)
        vals = np.asarray(m.evaluate(grid), dtype=float)
        lo = float(vals.min())
        inf_counts += np.asarray(beta_scan) <= lo
        below = (m.A * grid) - vals
        above = vals - (m.A * grid + m.B)
        worst = max(float(below.max()), float(above.max()))
        if worst > tol:
            c2_viol += 1
            c2_worst = max(c2_worst, worst)
        excess = float(_fd_slopes(m, grid).max()) - m.A
        if excess > tol:
            c3_viol += 1
            c3_worst = max(c3_worst, excess)
    scan = {float(b): float(c / sample_budget)
            for b, c in zip(beta_scan, inf_counts)}
    positive = [b for b, p in scan.items() if p > 0]
    best = max(positive) if positive else float(beta_scan[0])
    return UniquenessAudit(
        cond1_scan=scan,
        cond1_beta=best,
        cond1_prob=scan[best],
        cond1_pass=bool(positive),
        cond2_violations=c2_viol, cond2_worst=c2_worst, cond2_pass=c2_viol == 0,
        cond3_violations=c3_viol, cond3_worst_excess=c3_worst, cond3_pass=c3_viol == 0,
        samples=sample_budget)


@dataclass(frozen=True)
class GwEnvelopeReport:
    b_values: np.ndarray
    alpha: float
    x_max: int
    p99: float
    log_moment: float  # empirical E[(log+ B)^(2+eps)]
    eps: float


def gw_envelope_constant(
    spec: GaltonWatsonFamily, alpha: float, x_max: int, samples: int,
    seed: int, eps: float = 0.5,
) -> GwEnvelopeReport:
    """Empirical distribution of B = sup_{x<=x_max} |psi(x) - A x|/(x^alpha + 1)."""
    if not (0.75 < alpha < 1):
        raise ValueError("alpha must lie in (3/4, 1)")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    xs = np.arange(x_max + 1)
    denom = xs ** alpha + 1.0
    out = np.empty(samples)
    for i in range(samples):
        m = spec.sample_map(rng)
        vals = np.asarray(m.evaluate(xs), dtype=float)
        out[i] = float((np.abs(vals - m.A * xs) / denom).max())
    logplus = np.log(np.maximum(out, 1.0))
    return GwEnvelopeReport(out, alpha, x_max, float(np.percentile(out, 99)),
                            float((logplus ** (2.0 + eps)).mean()), eps)


_FAMILY_PARSERS = {}


def family_from_config(obj: dict) -> FamilySpec:
    """Rebuild a family spec from its config dictionary."""
    kind = obj.get("family")
    if kind == "affine":
        return AffineFamily(Dist.from_config(obj["log_a"]), Dist.from_config(obj["b"]),
                            float(obj.get("b_min", 1.0)))
    if kind == "goldie_max":
        return GoldieMaxFamily(Dist.from_config(obj["log_a"]), Dist.from_config(obj["b"]),
                               Dist.from_config(obj["c"]))
    if kind == "goldie_sqrt":
        return GoldieSqrtFamily(Dist.from_config(obj["log_a"]), Dist.from_config(obj["b"]),
                                Dist.from_config(obj["c_extra"]),
                                bool(obj.get("enforce_delta", True)))
    if kind == "reflected_step":
        return ReflectedStepFamily(Dist.from_config(obj["u"]))
    if kind == "exp_conj_reflected":
        return ExpConjReflectedFamily(Dist.from_config(obj["u"]))
    if kind == "interval_mix":
        return IntervalMixFamily(Dist.from_config(obj["ell"]), float(obj.get("t", 0.25)))
    if kind == "galton_watson":
        envs = tuple(
            (float(e["weight"]), Dist.from_config(e["offspring"]), Dist.from_config(e["immigration"]))
            for e in obj["environments"])
        return GaltonWatsonFamily(envs, float(obj.get("alpha", 0.8)))
    raise ValueError(f"unknown family {kind!r}")
