"""Shared value types, errors, and the declarative mechanism model.

Every guarantee type is an immutable dataclass. Mechanisms are described by a
small tagged union (``Gaussian``, ``Laplace``, ...) that round-trips through a
versioned JSON document; see ``docs/mechanism_schema.md``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence, Union

import numpy as np

SCHEMA_VERSION = 1

# Probabilities below this are treated as exact zeros (with a flag).
UNDERFLOW = 1e-300

ORDER_DECIMALS = 12


class InvalidParameter(ValueError):
    """An argument is outside its documented range."""


class GuaranteeNotSatisfied(ValueError):
    """A distribution pair does not satisfy the claimed (eps, delta) bound."""


class AssumptionNotMet(ValueError):
    """A theorem's side conditions fail; ``omega`` carries the computed order cap."""

    def __init__(self, message: str, omega: float | None = None):
        super().__init__(message)
        self.omega = omega


class NoCommonOrders(ValueError):
    """RDP curves share no orders, so they cannot be composed pointwise."""


class Neighbouring(enum.Enum):
    ADD_REMOVE = "AddRemove"
    REPLACE = "Replace"


def require_add_remove(neighbouring: Neighbouring) -> None:
    if Neighbouring(neighbouring) is not Neighbouring.ADD_REMOVE:
        raise InvalidParameter(
            "Poisson subsampling bounds hold for add/remove neighbours only")


def clamp_underflow(x: float) -> tuple[float, bool]:
    """Return ``(x, False)``, or ``(0.0, True)`` when ``0 < |x| < 1e-300``."""
    if x != 0.0 and abs(x) < UNDERFLOW:
        return 0.0, True
    return float(x), False


def canonical_order(alpha: float) -> float:
    return round(float(alpha), ORDER_DECIMALS)


# --------------------------------------------------------------------------
# Guarantees


@dataclass(frozen=True)
class EpsDelta:
    eps: float
    delta: float = 0.0
    clamped: bool = field(default=False, compare=False)

    def __post_init__(self):
        eps, delta = float(self.eps), float(self.delta)
        if not eps >= 0:
            raise InvalidParameter(f"eps must be >= 0, got {eps}")
        if not 0.0 <= delta <= 1.0:
            raise InvalidParameter(f"delta must be in [0,1], got {delta}")
        delta, flag = clamp_underflow(delta)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "clamped", self.clamped or flag)

    def dominates(self, other: "EpsDelta") -> bool:
        """True when this guarantee is at least as strong in both coordinates."""
        return self.eps <= other.eps and self.delta <= other.delta


@dataclass(frozen=True)
class ZcdpBound:
    rho: float

    def __post_init__(self):
        rho = float(self.rho)
        if not rho >= 0:
            raise InvalidParameter(f"rho must be >= 0, got {rho}")
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class RdpCurve:
    """Renyi DP guarantee ``eps_at[i]`` at order ``orders[i]``.

    Orders are canonicalised to 12 decimals so that curves built on the same
    nominal grid compare equal.
    """

    orders: tuple[float, ...]
    eps_at: tuple[float, ...]

    def __post_init__(self):
        orders = tuple(canonical_order(a) for a in self.orders)
        eps_at = tuple(float(e) for e in self.eps_at)
        if len(orders) != len(eps_at):
            raise InvalidParameter("orders and eps_at differ in length")
        if not orders:
            raise InvalidParameter("an RDP curve needs at least one order")
        if any(a <= 1 for a in orders):
            raise InvalidParameter("every order must be > 1")
        if any(b <= a for a, b in zip(orders, orders[1:])):
            raise InvalidParameter("orders must be strictly increasing")
        if any(not (e >= 0) for e in eps_at):
            raise InvalidParameter("eps_at entries must be >= 0 (or +inf)")
        for a, b in zip(eps_at, eps_at[1:]):
            # a few ulps of slack for values produced by log-space sums
            if b < a - 1e-12 * max(1.0, abs(a)):
                raise InvalidParameter("eps_at must be nondecreasing in alpha")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "eps_at", eps_at)

    @classmethod
    def linear(cls, rho: float, orders: Iterable[float]) -> "RdpCurve":
        orders = tuple(orders)
        return cls(orders, tuple(rho * a for a in orders))

    def at(self, alpha: float) -> float:
        key = canonical_order(alpha)
        try:
            return self.eps_at[self.orders.index(key)]
        except ValueError:
            raise InvalidParameter(f"curve has no order {alpha}") from None

    def scaled(self, factor: float) -> "RdpCurve":
        return RdpCurve(self.orders, tuple(factor * e for e in self.eps_at))

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.orders, self.eps_at))


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """A probability mass function over outcomes ``0..n-1``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidParameter("probs must be a non-empty vector")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise InvalidParameter("probs must be finite and >= 0")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidParameter(f"probs sum to {probs.sum()!r}, not 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        return isinstance(other, DiscreteDist) and np.array_equal(self.probs, other.probs)

    __hash__ = None

    @classmethod
    def normalized(cls, weights: Sequence[float]) -> "DiscreteDist":
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        # fix the last bit of rounding so the sum check passes
        w[np.argmax(w)] += 1.0 - w.sum()
        return cls(np.clip(w, 0.0, None))

    def mix(self, other: "DiscreteDist", weight: float) -> "DiscreteDist":
        """``weight * self + (1 - weight) * other``."""
        if len(self) != len(other):
            raise InvalidParameter("outcome sets differ in size")
        return DiscreteDist.normalized(weight * self.probs + (1 - weight) * other.probs)


@dataclass(frozen=True, eq=False)
class DiscretePld:
    """Finite privacy-loss distribution with an optional atom at +inf.

    ``zs`` is sorted ascending with distinct values.  When ``step`` is set the
    atoms lie on the lattice ``k * step`` and ``zs`` equals ``offset + step *
    arange(len)`` where ``offset`` is an integer multiple of ``step``.
    """

    zs: np.ndarray
    ps: np.ndarray
    inf_mass: float = 0.0
    step: float | None = None
    offset: int = 0

    def __post_init__(self):
        zs = np.array(self.zs, dtype=float).reshape(-1)
        ps = np.array(self.ps, dtype=float).reshape(-1)
        if zs.shape != ps.shape:
            raise InvalidParameter("zs and ps differ in length")
        if np.any(ps < 0) or self.inf_mass < 0:
            raise InvalidParameter("masses must be >= 0")
        if np.any(np.diff(zs) <= 0):
            raise InvalidParameter("zs must be strictly increasing")
        total = ps.sum() + self.inf_mass
        if abs(total - 1.0) > 1e-12:
            raise InvalidParameter(f"masses sum to {total!r}, not 1")
        zs.flags.writeable = False
        ps.flags.writeable = False
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "ps", ps)
        object.__setattr__(self, "inf_mass", float(self.inf_mass))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.zs.tolist(), self.ps.tolist()))

    def to_json(self) -> dict[str, Any]:
        return {"atoms": [[z, p] for z, p in self.atoms], "inf_mass": self.inf_mass}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "DiscretePld":
        atoms = sorted((float(z), float(p)) for z, p in doc["atoms"])
        zs = np.array([z for z, _ in atoms])
        ps = np.array([p for _, p in atoms])
        return cls(zs, ps, float(doc.get("inf_mass", 0.0)))


# --------------------------------------------------------------------------
# Mechanism descriptions


@dataclass(frozen=True)
class Gaussian:
    sensitivity: float
    sigma: float


@dataclass(frozen=True)
class Laplace:
    sensitivity: float
    scale: float


@dataclass(frozen=True)
class PureDp:
    eps: float


@dataclass(frozen=True)
class ApproxDp:
    eps: float
    delta: float


@dataclass(frozen=True)
class Zcdp:
    rho: float


@dataclass(frozen=True)
class Rdp:
    orders: tuple[float, ...]
    eps_at: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(float(a) for a in self.orders))
        object.__setattr__(self, "eps_at", tuple(float(e) for e in self.eps_at))

    @property
    def curve(self) -> RdpCurve:
        return RdpCurve(self.orders, self.eps_at)


@dataclass(frozen=True)
class RandomizedResponse:
    eps: float
    delta: float = 0.0


@dataclass(frozen=True)
class PoissonSubsampled:
    p: float
    inner: "MechanismSpec"


@dataclass(frozen=True)
class Composed:
    parts: tuple["MechanismSpec", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


MechanismSpec = Union[Gaussian, Laplace, PureDp, ApproxDp, Zcdp, Rdp,
                      RandomizedResponse, PoissonSubsampled, Composed]

_KINDS = {cls.__name__: cls for cls in (Gaussian, Laplace, PureDp, ApproxDp, Zcdp, Rdp,
                                        RandomizedResponse, PoissonSubsampled, Composed)}


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate(spec: MechanismSpec, path: str = "") -> list[str]:
    """List every range violation in ``spec``; an empty list means valid."""
    out: list[str] = []

    def bad(msg):
        out.append(f"{path}{msg}")

    def nonneg(name, x):
        if not _finite(x) or x < 0:
            bad(f"{name} must be >= 0")

    def unit(name, x):
        if not _finite(x) or not 0 <= x <= 1:
            bad(f"{name} must be in [0,1]")

    if isinstance(spec, Gaussian):
        nonneg("sensitivity", spec.sensitivity)
        if not _finite(spec.sigma) or spec.sigma <= 0:
            bad("sigma must be > 0")
    elif isinstance(spec, Laplace):
        nonneg("sensitivity", spec.sensitivity)
        if not _finite(spec.scale) or spec.scale <= 0:
            bad("scale must be > 0")
    elif isinstance(spec, PureDp):
        nonneg("eps", spec.eps)
    elif isinstance(spec, (ApproxDp, RandomizedResponse)):
        nonneg("eps", spec.eps)
        unit("delta", spec.delta)
        if isinstance(spec, RandomizedResponse) and _finite(spec.delta) and spec.delta >= 1:
            bad("delta must be < 1 for randomized response")
    elif isinstance(spec, Zcdp):
        nonneg("rho", spec.rho)
    elif isinstance(spec, Rdp):
        try:
            RdpCurve(spec.orders, spec.eps_at)
        except InvalidParameter as e:
            bad(str(e))
    elif isinstance(spec, PoissonSubsampled):
        unit("p", spec.p)
        out.extend(validate(spec.inner, path + "inner."))
    elif isinstance(spec, Composed):
        if not spec.parts:
            bad("parts must be non-empty")
        for i, part in enumerate(spec.parts):
            out.extend(validate(part, f"{path}parts[{i}]."))
    else:
        bad(f"unknown mechanism {type(spec).__name__}")
    return out


def spec_to_dict(spec: MechanismSpec) -> dict[str, Any]:
    d: dict[str, Any] = {"type": type(spec).__name__}
    if isinstance(spec, PoissonSubsampled):
        d["p"] = spec.p
        d["inner"] = spec_to_dict(spec.inner)
    elif isinstance(spec, Composed):
        d["parts"] = [spec_to_dict(s) for s in spec.parts]
    elif isinstance(spec, Rdp):
        d["orders"] = list(spec.orders)
        d["eps_at"] = list(spec.eps_at)
    else:
        d.update(vars(spec))
    return d


def spec_from_dict(d: dict[str, Any]) -> MechanismSpec:
    if not isinstance(d, dict) or "type" not in d:
        raise InvalidParameter("mechanism object needs a 'type' field")
    kind = _KINDS.get(d["type"])
    if kind is None:
        raise InvalidParameter(f"unknown mechanism type {d['type']!r}")
    fields = {k: v for k, v in d.items() if k != "type"}
    try:
        if kind is PoissonSubsampled:
            return PoissonSubsampled(fields["p"], spec_from_dict(fields["inner"]))
        if kind is Composed:
            return Composed(tuple(spec_from_dict(s) for s in fields["parts"]))
        return kind(**fields)
    except (KeyError, TypeError) as e:
        raise InvalidParameter(f"bad fields for {d['type']}: {e}") from None


def dumps_spec(spec: MechanismSpec) -> str:
    return json.dumps({"version": SCHEMA_VERSION, "mechanism": spec_to_dict(spec)},
                      sort_keys=True)


def loads_spec(text: str) -> MechanismSpec:
    """Parse a mechanism document; a bare mechanism object is also accepted."""
    doc = json.loads(text)
    if isinstance(doc, dict) and "mechanism" in doc:
        version = doc.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise InvalidParameter(f"unsupported schema version {version}")
        doc = doc["mechanism"]
    return spec_from_dict(doc)
