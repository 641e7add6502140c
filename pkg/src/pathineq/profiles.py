"""Rate profiles for weak functional inequalities, and empirical tail bounds.

A weak log-Sobolev inequality reads  Ent(f^2) <= beta(s) E|grad f|^2 + s |f|_inf^2
and a weak Poincare inequality reads  Var(f) <= alpha(s) E|grad f|^2 + s |f|_inf^2,
each for s in (0, r0) with a non-increasing positive rate function.  This module
holds the rate-function objects (``BetaProfile`` / ``AlphaProfile``), the tail
bound object fed into the tail-to-weak-LSI transfer, and their JSON round-trip.

Profiles come in three families:

* ``c_log_inv_s``  -- beta(s) = C * log(1/s), the borderline rate that still
  upgrades to a true Poincare inequality;
* ``tabulated``    -- values on an explicit grid, evaluated as a left step
  function (conservative: a certificate at s' <= s is also one at s);
* ``composed``     -- a closed-form construction described by parameters and
  re-evaluated from them (scan constructions, the weak-Poincare formula).
  Keeping parameters instead of closures is what makes serialization lossless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import beta as _beta_dist

_INV_E = 1.0 / math.e


class ProfileError(ValueError):
    """Malformed profile or tail bound."""


class DomainError(ValueError):
    """Profile evaluated outside its stated domain."""


def _as_float_tuple(xs):
    return tuple(float(x) for x in xs)


# ---------------------------------------------------------------------------
# Tail bounds


@dataclass(frozen=True)
class TailBound:
    """Non-increasing upper bound m(s) >= mu(u > s) on a level grid.

    Values are stored in survival scale (bounds on the probability itself).
    Between grid points, evaluation steps left: for levels[i] <= s <
    levels[i+1] we return values[i], which bounds mu(u > s) because survival
    functions are non-increasing.  Below the first level the trivial bound 1
    is returned; beyond the last level the last value is kept (again valid by
    monotonicity of the survival function).
    """

    levels: tuple
    values: tuple
    source: str = "analytic"  # "analytic" | "empirical"
    n_samples: int | None = None
    confidence: float | None = None

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if levels.ndim != 1 or levels.size < 2 or values.shape != levels.shape:
            raise ProfileError("tail bound needs matching 1-d level/value grids")
        if not np.all(np.diff(levels) > 0):
            raise ProfileError("tail levels must be strictly increasing")
        if np.any(values < 0) or np.any(values > 1 + 1e-12):
            raise ProfileError("tail values must lie in [0, 1]")
        if np.any(np.diff(values) > 1e-12):
            raise ProfileError("tail values must be non-increasing")
        if self.source not in ("analytic", "empirical"):
            raise ProfileError(f"unknown tail source {self.source!r}")
        object.__setattr__(self, "levels", _as_float_tuple(levels))
        object.__setattr__(self, "values", _as_float_tuple(np.minimum(values, 1.0)))

    def __call__(self, s):
        s = float(s)
        lv = np.asarray(self.levels)
        i = int(np.searchsorted(lv, s, side="right")) - 1
        if i < 0:
            return 1.0
        return self.values[i]

    @classmethod
    def from_function(cls, m, levels):
        """Sample an analytic bound onto a grid (kept conservative by the
        left-step evaluation rule)."""
        levels = np.asarray(levels, dtype=float)
        vals = np.array([float(m(s)) for s in levels])
        return cls(levels=tuple(levels), values=tuple(vals), source="analytic")

    @classmethod
    def from_samples(cls, u, levels=None, confidence=0.99):
        """One-sided upper confidence bound on the survival function.

        Per grid point the Clopper-Pearson style upper bound at the given
        confidence is used, then monotonicity is enforced by a running
        maximum from the right.  A raw empirical tail would understate the
        certificate, hence the adjustment.
        """
        u = np.asarray(u, dtype=float).ravel()
        n = u.size
        if n < 2:
            raise ProfileError("need at least two samples for an empirical tail")
        if levels is None:
            hi = float(u.max()) * 1.25 + 1e-9
            lo = max(float(np.quantile(u, 0.05)), hi * 1e-4, 1e-6)
            levels = np.concatenate([[0.0], np.geomspace(lo, hi, 64)])
        levels = np.asarray(levels, dtype=float)
        counts = (u[None, :] > levels[:, None]).sum(axis=1)
        vals = np.empty_like(levels)
        for i, k in enumerate(counts):
            if k >= n:
                vals[i] = 1.0
            else:
                vals[i] = float(_beta_dist.ppf(confidence, k + 1, n - k))
        vals = np.maximum.accumulate(vals[::-1])[::-1]  # running max from the right
        return cls(
            levels=tuple(levels),
            values=tuple(np.minimum(vals, 1.0)),
            source="empirical",
            n_samples=int(n),
            confidence=float(confidence),
        )

    def to_dict(self):
        d = {
            "type": "tail_bound",
            "levels": list(self.levels),
            "values": list(self.values),
            "source": self.source,
        }
        if self.source == "empirical":
            d["n_samples"] = self.n_samples
            d["confidence"] = self.confidence
        return d

    @classmethod
    def from_dict(cls, d):
        if d.get("type") != "tail_bound":
            raise ProfileError("not a serialized tail bound")
        return cls(
            levels=tuple(d["levels"]),
            values=tuple(d["values"]),
            source=d["source"],
            n_samples=d.get("n_samples"),
            confidence=d.get("confidence"),
        )


# ---------------------------------------------------------------------------
# Composed-profile evaluators (parameter dict -> value at s)


def _eval_weighted_lsi_scan(params, s):
    a = params["a"]
    C = params["C"]
    M = params["M"]
    n = int(params["n_min"])
    c0 = 4.0 * a * a
    add = _INV_E + 1.0
    while True:
        b = (c0 * n * n + add) * M * math.exp(-0.5 * C * (n - 1.0) ** 2)
        if b <= s:
            return 2.0 * n * n
        n += 1
        if n > 10**7:  # unreachable: b underflows to 0 long before
            raise DomainError(f"scan did not terminate at s={s}")


def _eval_weighted_lsi_smooth(params, s):
    # continuous variant: beta(s) = 2 r*^2 with b(r*) = s, r* >= n_min
    from scipy.optimize import brentq

    a, C, M = params["a"], params["C"], params["M"]
    n_min = float(params["n_min"])
    c0 = 4.0 * a * a
    add = _INV_E + 1.0

    def b(r):
        return (c0 * r * r + add) * M * math.exp(-0.5 * C * (r - 1.0) ** 2)

    if b(n_min) <= s:
        return 2.0 * n_min * n_min
    hi = n_min + 1.0
    while b(hi) > s:
        hi += max(1.0, hi)
    r_star = brentq(lambda r: b(r) - s, n_min, hi, xtol=1e-12, rtol=1e-14)
    return 2.0 * r_star * r_star


def _eval_tail_scan(params, s):
    a = params["a"]
    cap = int(params["n_cap"])
    tail = TailBound(
        levels=tuple(params["levels"]),
        values=tuple(params["m"]),
        source=params.get("source", "analytic"),
        n_samples=params.get("n_samples"),
        confidence=params.get("confidence"),
    )
    c0 = 4.0 * a * a
    add = _INV_E + 1.0
    for n in range(1, cap + 1):
        # sqrt: the entropy cut-off estimate consumes sqrt(mu(u > n-1))
        if (c0 * n * n + add) * math.sqrt(tail(n - 1.0)) <= s:
            return 2.0 * n * n
    raise DomainError(
        f"no weak-LSI derivable at s={s!r}: no qualifying level below cap {cap}"
    )


def _eval_weak_poincare_formula(params, s):
    r1 = params.get("r1")
    if r1 is not None and s >= r1:
        raise DomainError(f"s={s} outside weak-Poincare domain (0, {r1})")
    inner = BetaProfile.from_dict(params["beta"])
    c1p = params["C1_prime"]
    c2p = params["C2_prime"]
    L = math.log(1.0 / s)
    return inner(c2p * s * L) / (c1p * L)


_BETA_FORMS = {
    "weighted_lsi_scan": _eval_weighted_lsi_scan,
    "weighted_lsi_smooth": _eval_weighted_lsi_smooth,
    "tail_scan": _eval_tail_scan,
}

_ALPHA_FORMS = {
    "weak_poincare_formula": _eval_weak_poincare_formula,
}


def _freeze(obj):
    """Make nested params hashable-free but JSON-stable (lists -> lists)."""
    if isinstance(obj, dict):
        return {k: _freeze(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_freeze(v) for v in obj]
    return obj


@dataclass(frozen=True)
class BetaProfile:
    """Weak log-Sobolev rate s -> beta(s), non-increasing and positive."""

    family: str
    r0: float
    C: float | None = None
    s_grid: tuple | None = None
    values: tuple | None = None
    form: str | None = None
    params: dict | None = None

    _forms = _BETA_FORMS

    def __post_init__(self):
        if not (self.r0 > 0):
            raise ProfileError("domain bound r0 must be positive")
        if self.family == "c_log_inv_s":
            if self.C is None or not (self.C > 0):
                raise ProfileError("c_log_inv_s profile needs C > 0")
            if not (self.r0 < 1):
                raise ProfileError("c_log_inv_s needs r0 < 1 so beta stays positive")
        elif self.family == "tabulated":
            g = np.asarray(self.s_grid, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if g.ndim != 1 or g.size < 1 or v.shape != g.shape:
                raise ProfileError("tabulated profile needs matching grids")
            if not np.all(np.diff(g) > 0):
                raise ProfileError("tabulated s-grid must be strictly increasing")
            if np.any(v <= 0):
                raise ProfileError("tabulated values must be positive")
            if np.any(np.diff(v) > 1e-12 * np.abs(v[:-1])):
                raise ProfileError("tabulated values must be non-increasing")
            object.__setattr__(self, "s_grid", _as_float_tuple(g))
            object.__setattr__(self, "values", _as_float_tuple(v))
        elif self.family == "composed":
            if self.form not in self._forms:
                raise ProfileError(f"unknown composed form {self.form!r}")
            object.__setattr__(self, "params", _freeze(self.params))
        else:
            raise ProfileError(f"unknown profile family {self.family!r}")

    @property
    def eval_floor(self):
        """Smallest s at which the profile is derivable (0 when unrestricted)."""
        if self.family == "composed" and self.params is not None:
            return float(self.params.get("s_min", 0.0))
        if self.family == "tabulated":
            return float(self.s_grid[0])
        return 0.0

    def __call__(self, s):
        s = float(s)
        if not (s > 0) or not math.isfinite(s):
            raise DomainError(f"profile argument must be a finite positive s, got {s}")
        if s >= self.r0 and self.family == "c_log_inv_s":
            raise DomainError(f"s={s} outside domain (0, {self.r0})")
        if self.family == "c_log_inv_s":
            return self.C * math.log(1.0 / s)
        if self.family == "tabulated":
            g = np.asarray(self.s_grid)
            i = int(np.searchsorted(g, s, side="right")) - 1
            if i < 0:
                raise DomainError(f"s={s} below tabulated grid start {g[0]}")
            return self.values[i]
        return self._forms[self.form](self.params, s)

    def tabulate(self, s_values):
        return np.array([self(s) for s in np.asarray(s_values, dtype=float)])

    def check_monotone(self, n_points=1000, lo=None, hi=None):
        """Non-increase and positivity on a log grid; raises on violation."""
        r0_scale = self.r0 * 1e-12 if math.isfinite(self.r0) else 1e-12
        lo = lo if lo is not None else max(self.eval_floor * 1.0001, r0_scale, 1e-280)
        hi = hi if hi is not None else (self.r0 * (1 - 1e-9) if math.isfinite(self.r0) else 1.0)
        if not lo < hi:
            raise ProfileError(f"empty monotonicity check range [{lo}, {hi}]")
        grid = np.geomspace(lo, hi, n_points)
        vals = self.tabulate(grid)
        if np.any(vals <= 0):
            raise ProfileError("profile not positive on its domain")
        if np.any(np.diff(vals) > 1e-12 * np.maximum(np.abs(vals[:-1]), 1.0)):
            raise ProfileError("profile not non-increasing on its domain")
        return vals

    def to_dict(self):
        d = {"type": "beta_profile", "family": self.family, "r0": self.r0}
        if self.family == "c_log_inv_s":
            d["C"] = self.C
        elif self.family == "tabulated":
            d["s_grid"] = list(self.s_grid)
            d["values"] = list(self.values)
        else:
            d["form"] = self.form
            d["params"] = _freeze(self.params)
        return d

    @classmethod
    def from_dict(cls, d):
        if d.get("type") != "beta_profile":
            raise ProfileError("not a serialized beta profile")
        return cls(
            family=d["family"],
            r0=d["r0"],
            C=d.get("C"),
            s_grid=tuple(d["s_grid"]) if "s_grid" in d else None,
            values=tuple(d["values"]) if "values" in d else None,
            form=d.get("form"),
            params=d.get("params"),
        )


@dataclass(frozen=True)
class AlphaProfile(BetaProfile):
    """Weak Poincare rate; ``is_constant`` marks a true Poincare constant."""

    is_constant: bool = False
    value: float | None = None

    _forms = _ALPHA_FORMS

    def __post_init__(self):
        if self.family == "constant":
            if not self.is_constant or self.value is None or not (self.value > 0):
                raise ProfileError("constant alpha profile needs a positive value")
            return
        if self.is_constant:
            raise ProfileError("is_constant only valid with family='constant'")
        super().__post_init__()

    def __call__(self, s):
        if self.family == "constant":
            return self.value
        return super().__call__(s)

    @property
    def eval_floor(self):
        if self.family == "constant":
            return 0.0
        if self.family == "composed":
            return float(self.params.get("s_lo", 0.0))
        return super().eval_floor

    def tabulate_monotone(self, s_values=None, n_points=64):
        """Tabulated, valid, non-increasing view of the profile.

        alpha_bar(s) = min over s' <= s of alpha(s') is again a weak-Poincare
        rate (a certificate at smaller s is also one at larger s), so the raw
        formula values may be monotonized by a running minimum.
        """
        if self.family == "constant":
            grid = np.asarray(s_values if s_values is not None else [1e-6, 1.0])
            return grid, np.full(grid.shape, self.value)
        if s_values is None:
            lo = max(self.eval_floor * 1.001, 1e-300)
            hi = self.r0 * 0.999
            if not lo < hi:
                raise DomainError("empty evaluable range")
            s_values = np.geomspace(lo, hi, n_points)
        grid = np.asarray(s_values, dtype=float)
        vals = self.tabulate(grid)
        return grid, np.minimum.accumulate(vals)

    def to_dict(self):
        if self.family == "constant":
            return {
                "type": "alpha_profile",
                "family": "constant",
                "is_constant": True,
                "value": self.value,
            }
        d = super().to_dict()
        d["type"] = "alpha_profile"
        d["is_constant"] = False
        return d

    @classmethod
    def from_dict(cls, d):
        if d.get("type") != "alpha_profile":
            raise ProfileError("not a serialized alpha profile")
        if d["family"] == "constant":
            return cls(family="constant", r0=math.inf, is_constant=True, value=d["value"])
        return cls(
            family=d["family"],
            r0=d["r0"],
            C=d.get("C"),
            s_grid=tuple(d["s_grid"]) if "s_grid" in d else None,
            values=tuple(d["values"]) if "values" in d else None,
            form=d.get("form"),
            params=d.get("params"),
        )


def profile_from_dict(d):
    t = d.get("type")
    if t == "beta_profile":
        return BetaProfile.from_dict(d)
    if t == "alpha_profile":
        return AlphaProfile.from_dict(d)
    raise ProfileError(f"unknown serialized profile type {t!r}")


def profile_to_json(p, **kw):
    return json.dumps(p.to_dict(), **kw)


def profile_from_json(s):
    return profile_from_dict(json.loads(s))
