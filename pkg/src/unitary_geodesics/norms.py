"""Unitarily invariant and Ad-invariant norms on Hermitian matrices.

Every norm here depends only on the spectrum, so each :class:`NormSpec`
variant exposes ``gauge(eigs)``, a function of eigenvalue vectors that
broadcasts over leading axes.  Matrices are evaluated through
:func:`norm_value`.

The su(n) Cartan subalgebra is modeled by traceless real n-vectors, paired
with the plain Euclidean (trace) inner product.  The Killing form of su(n)
is ``2n`` times this pairing, so orbit weights differ from the Killing-form
convention by that positive factor.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import ValidationError

BRUTE_FORCE_MAX_N = 8


@dataclass(frozen=True)
class CartanVector:
    """Point of the positive Weyl chamber: a non-increasing real vector."""

    v: tuple
    traceless: bool = False

    def __post_init__(self):
        v = tuple(float(a) for a in np.ravel(self.v))
        if not v:
            raise ValidationError("Cartan vector must be non-empty")
        if any(b > a for a, b in zip(v, v[1:])):
            raise ValidationError(f"Cartan vector must be sorted non-increasing: {v}")
        if self.traceless and abs(sum(v)) > 1e-12 * max(1.0, max(abs(a) for a in v)):
            raise ValidationError(f"Cartan vector is not traceless (sum {sum(v):.3e})")
        object.__setattr__(self, "v", v)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.v, dtype=dtype)

    def __len__(self):
        return len(self.v)

    @property
    def strictly_sorted(self) -> bool:
        return all(a > b for a, b in zip(self.v, self.v[1:]))

    @property
    def symmetric(self) -> bool:
        """``-mu`` lies in the Weyl orbit of ``mu``; the orbit norm is then a full norm."""
        return np.allclose(self.v, [-a for a in reversed(self.v)], atol=1e-12)


def _sorted_desc(a) -> np.ndarray:
    return -np.sort(-np.asarray(a, dtype=float), axis=-1)


def _eigs(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {x.shape}")
    return np.linalg.eigvalsh(0.5 * (x + x.conj().T))


def singular_values(x) -> np.ndarray:
    """Singular values of a Hermitian matrix: sorted absolute eigenvalues."""
    return _sorted_desc(np.abs(_eigs(x)))


def _check_dim(vec_len: int, n: int, what: str):
    if vec_len != n:
        raise ValidationError(f"{what} has length {vec_len}, matrix dimension is {n}")


@dataclass(frozen=True)
class KyFan:
    k: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValidationError(f"Ky-Fan index must be a positive integer, got {self.k!r}")

    def gauge(self, eigs) -> np.ndarray:
        sigma = _sorted_desc(np.abs(eigs))
        if self.k > sigma.shape[-1]:
            raise ValidationError(f"Ky-Fan index {self.k} exceeds dimension {sigma.shape[-1]}")
        return sigma[..., : self.k].sum(axis=-1)

    def to_json(self):
        return {"type": "kyfan", "k": int(self.k)}


@dataclass(frozen=True)
class Alpha:
    alpha: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in np.ravel(self.alpha))
        if not a or a[0] <= 0 or a[-1] < 0 or any(q > p for p, q in zip(a, a[1:])):
            raise ValidationError(f"alpha must satisfy a_1 >= ... >= a_n >= 0, a_1 > 0; got {a}")
        object.__setattr__(self, "alpha", a)

    def gauge(self, eigs) -> np.ndarray:
        sigma = _sorted_desc(np.abs(eigs))
        _check_dim(len(self.alpha), sigma.shape[-1], "alpha")
        return sigma @ np.asarray(self.alpha)

    def to_json(self):
        return {"type": "alpha", "alpha": list(self.alpha)}


@dataclass(frozen=True)
class Schatten:
    p: float

    def __post_init__(self):
        p = float(self.p)
        if not p >= 1:
            raise ValidationError(f"Schatten exponent must be >= 1 or inf, got {self.p}")
        object.__setattr__(self, "p", p)

    def gauge(self, eigs) -> np.ndarray:
        sigma = np.abs(np.asarray(eigs, dtype=float))
        if math.isinf(self.p):
            return sigma.max(axis=-1)
        scale = sigma.max(axis=-1, keepdims=True)
        safe = np.where(scale > 0, scale, 1.0)
        return safe[..., 0] * ((sigma / safe) ** self.p).sum(axis=-1) ** (1.0 / self.p)

    def to_json(self):
        return {"type": "schatten", "p": "inf" if math.isinf(self.p) else self.p}


@dataclass(frozen=True)
class Orbit:
    mu: CartanVector

    def __post_init__(self):
        if not isinstance(self.mu, CartanVector):
            object.__setattr__(self, "mu", CartanVector(self.mu))

    @property
    def kind(self) -> str:
        return "norm" if self.mu.symmetric else "Finsler"

    def gauge(self, eigs) -> np.ndarray:
        lam = _sorted_desc(eigs)
        _check_dim(len(self.mu), lam.shape[-1], "mu")
        return lam @ np.asarray(self.mu)

    def to_json(self):
        return {"type": "orbit", "mu": list(self.mu.v), "kind": self.kind}


@dataclass(frozen=True)
class SupFamily:
    """Pointwise maximum of orbit norms (``reading="su"``) or of alpha norms (``"u"``)."""

    family: tuple
    reading: str = "su"

    def __post_init__(self):
        if self.reading not in ("su", "u"):
            raise ValidationError(f"reading must be 'su' or 'u', got {self.reading!r}")
        fam = tuple(m if isinstance(m, CartanVector) else CartanVector(m) for m in self.family)
        if not fam:
            raise ValidationError("SupFamily needs at least one member")
        if self.reading == "u":
            for m in fam:
                Alpha(m.v)  # validates membership in R^n_{+,down}
        object.__setattr__(self, "family", fam)

    def members(self):
        if self.reading == "u":
            return [Alpha(m.v) for m in self.family]
        return [Orbit(m) for m in self.family]

    def gauge(self, eigs) -> np.ndarray:
        values = [m.gauge(eigs) for m in self.members()]
        return np.max(np.stack(values, axis=0), axis=0)

    def to_json(self):
        return {"type": "supfamily", "family": [list(m.v) for m in self.family], "reading": self.reading}


NormSpec = KyFan | Alpha | Schatten | Orbit | SupFamily


def norm_value(spec: NormSpec, x) -> float:
    return float(spec.gauge(_eigs(x)))


def ky_fan(x, k: int) -> float:
    n = np.asarray(x).shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k must lie in [1, {n}], got {k}")
    return norm_value(KyFan(k), x)


def alpha_norm(x, alpha) -> float:
    return norm_value(alpha if isinstance(alpha, Alpha) else Alpha(alpha), x)


def alpha_norm_via_ky_fan(x, alpha) -> float:
    """``sum_i (a_i - a_{i+1}) ||x||_(i)`` with ``a_{n+1} = 0``."""
    a = np.append(np.asarray(Alpha(alpha).alpha), 0.0)
    partial = np.cumsum(singular_values(x))
    return float(np.sum((a[:-1] - a[1:]) * partial))


def schatten(x, p) -> float:
    return norm_value(Schatten(p), x)


def orbit_norm(x, mu) -> float:
    """``sum_i lambda_(i)(x) mu_i`` with both sides sorted non-increasing."""
    return norm_value(Orbit(mu), x)


def sup_family_norm(x, family, reading: str = "su") -> float:
    return norm_value(SupFamily(tuple(family), reading), x)


def rearrangement_sup(x, y) -> float:
    """Maximum over permutations ``s`` of ``sum_i x_i y_s(i)``.

    Exhaustive for ``n <= 8``; beyond that the sorted pairing is returned
    (which is the maximum) and a RuntimeWarning is issued.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"shape mismatch: {x.shape} vs {y.shape}")
    if len(x) > BRUTE_FORCE_MAX_N:
        warnings.warn(
            f"n = {len(x)} > {BRUTE_FORCE_MAX_N}: using sorted pairing instead of enumeration",
            RuntimeWarning,
            stacklevel=2,
        )
        return float(_sorted_desc(x) @ _sorted_desc(y))
    perms = np.array(list(itertools.permutations(range(len(y)))))
    return float(np.max(y[perms] @ x))


def majorizes(big, small, tol: float = 1e-9) -> bool:
    """``small`` is majorized by ``big``: partial sums dominated, totals equal."""
    a = np.cumsum(_sorted_desc(big))
    b = np.cumsum(_sorted_desc(small))
    return bool(np.all(b <= a + tol) and abs(a[-1] - b[-1]) <= tol)


def kostant_membership(x, u, tol: float = 1e-9) -> bool:
    """Whether ``diag(u x u*)`` lies in the convex hull of permutations of ``spec(x)``.

    Tested via majorization (Schur-Horn); the tolerance scales with ``||x||``.
    """
    x = np.asarray(x, dtype=complex)
    u = np.asarray(u, dtype=complex)
    eigs = _eigs(x)
    diag = np.real(np.diag(u @ x @ u.conj().T))
    scale = max(1.0, float(np.max(np.abs(eigs))))
    return majorizes(eigs, diag, tol * scale)


# --- polar duality on the Weyl chamber of su(n) ---------------------------------


def fundamental_weights(n: int) -> np.ndarray:
    """Unit vectors spanning the extreme rays of the traceless positive chamber."""
    if n < 2:
        raise ValidationError("the su(n) chamber needs n >= 2")
    rays = np.array([[1.0 if i <= k else 0.0 for i in range(n)] for k in range(n - 1)])
    rays -= rays.mean(axis=1, keepdims=True)
    return rays / np.linalg.norm(rays, axis=1, keepdims=True)


def chamber_directions(n: int, resolution: int, seed: int = 0) -> np.ndarray:
    """Unit traceless sorted vectors sampling the positive chamber.

    ``n = 2``: the single ray.  ``n = 3``: ``resolution`` points equally spaced
    in angle along the 60-degree arc.  ``n >= 4``: the extreme rays plus
    Dirichlet-distributed conic combinations (seeded).
    """
    rays = fundamental_weights(n)
    if n == 2:
        return rays.copy()
    if resolution < 2:
        raise ValidationError("resolution must be >= 2")
    if n == 3:
        return _arc(rays, np.linspace(0.0, 1.0, resolution))
    rng = np.random.default_rng(seed)
    coeffs = rng.dirichlet(np.ones(n - 1), size=max(resolution - (n - 1), 0))
    pts = np.vstack([rays, coeffs @ rays])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _arc(rays: np.ndarray, s) -> np.ndarray:
    """Points along the great-circle arc between the two rays of the n = 3 chamber."""
    a, b = rays
    perp = b - (a @ b) * a
    perp /= np.linalg.norm(perp)
    span = math.acos(float(np.clip(a @ b, -1.0, 1.0)))
    phi = np.asarray(s, dtype=float) * span
    return np.cos(phi)[..., None] * a + np.sin(phi)[..., None] * perp


def _slice_basis(d: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the traceless vectors orthogonal to ``d``."""
    n = len(d)
    q, _ = np.linalg.qr(np.column_stack([np.ones(n), d, np.eye(n)]))
    return q[:, 2:n]


def _support(spec: NormSpec, d: np.ndarray, candidates: np.ndarray, norms: np.ndarray) -> float:
    """``h(d) = max_{c in C} <c, d>`` for the unit ball ``C`` of ``spec`` on traceless vectors.

    By duality ``h(d) = 1 / min {N(c) : <c, d> = 1}``, a convex problem on an
    affine slice.  The sampled maximizer seeds the local solve.
    """
    d = d / np.linalg.norm(d)
    ratios = (candidates @ d) / norms
    j = int(np.argmax(ratios))
    best = float(ratios[j])
    if len(d) < 3 or best <= 0:
        return best
    basis = _slice_basis(d)
    start = basis.T @ (candidates[j] / float(candidates[j] @ d))

    def objective(v):
        return float(spec.gauge(d + basis @ np.atleast_1d(v)))

    if basis.shape[1] == 1:
        step = 0.05 * (1.0 + abs(float(start[0])))
        res = minimize_scalar(objective, bracket=(start[0] - step, start[0] + step), tol=1e-14)
        value = float(res.fun)
    else:
        dim = basis.shape[1]
        res = minimize(
            objective, start, method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxfev": 3000 * dim, "adaptive": True},
        )
        res = minimize(
            objective, res.x, method="Nelder-Mead",
            options={"xatol": 1e-13, "fatol": 1e-16, "maxfev": 3000 * dim, "adaptive": True},
        )
        value = float(res.fun)
    if value > 0:
        best = max(best, 1.0 / value)
    return best


def polar_dual_boundary(spec: NormSpec, n: int, resolution: int, seed: int = 0) -> list[CartanVector]:
    """Sample ``bd(B°) ∩ h+`` for the unit ball ``B`` of an Ad-invariant norm on su(n).

    For each chamber direction ``d`` the point ``d / h(d)`` is returned, with
    ``h`` the support function of the norm's unit ball on the traceless
    Cartan subalgebra.  ``h`` is maximized over chamber sample points and
    then refined locally.  Directions on which the norm degenerates are
    skipped with a RuntimeWarning reporting how many.
    """
    dirs = chamber_directions(n, resolution, seed)
    gauges = np.asarray(spec.gauge(dirs), dtype=float)
    ok = gauges > 1e-14
    skipped = int(np.count_nonzero(~ok))
    cands, cnorms = dirs[ok], gauges[ok]
    out = []
    for d in dirs:
        h = _support(spec, d, cands, cnorms) if len(cands) else 0.0
        if not np.isfinite(h) or h <= 0:
            skipped += 1
            continue
        mu = d / h
        out.append(CartanVector(_sorted_desc(mu), traceless=True))
    if skipped:
        warnings.warn(f"polar_dual_boundary skipped {skipped} degenerate directions", RuntimeWarning, stacklevel=2)
    return out


def support_value(spec: NormSpec, mu, resolution: int = 2000, seed: int = 0) -> float:
    """``max <c, mu>`` over the unit ball on the chamber; equals 1 on ``bd(B°)``."""
    mu = np.asarray(mu, dtype=float)
    n = len(mu)
    dirs = chamber_directions(n, resolution, seed)
    gauges = np.asarray(spec.gauge(dirs), dtype=float)
    ok = gauges > 1e-14
    mu = _sorted_desc(mu)
    return float(np.linalg.norm(mu)) * _support(spec, mu, dirs[ok], gauges[ok])


# --- parsing ----------------------------------------------------------------------


def parse_norm(obj) -> NormSpec:
    """Build a NormSpec from its JSON form or from a short inline string.

    Inline forms: ``kyfan:2``, ``alpha:2,1,0``, ``schatten:inf``,
    ``orbit:1,0,-1``, ``supfamily:1,0,-1;2,-1,-1``; a string starting with
    ``{`` is parsed as JSON.
    """
    if isinstance(obj, str):
        text = obj.strip()
        if text.startswith("{"):
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"bad norm JSON: {exc}") from exc
        else:
            kind, _, arg = text.partition(":")
            obj = _inline(kind.strip().lower(), arg.strip())
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError('norm spec must be an object with a "type"')
    kind = obj["type"]
    try:
        if kind == "kyfan":
            return KyFan(int(obj["k"]))
        if kind == "alpha":
            return Alpha(tuple(obj["alpha"]))
        if kind == "schatten":
            p = obj["p"]
            return Schatten(math.inf if str(p).lower() in ("inf", "infinity") else float(p))
        if kind == "orbit":
            return Orbit(CartanVector(tuple(obj["mu"])))
        if kind == "supfamily":
            return SupFamily(tuple(CartanVector(tuple(m)) for m in obj["family"]), obj.get("reading", "su"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad parameters for norm {kind!r}: {exc}") from exc
    raise ValidationError(f"unknown norm type {kind!r}")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _inline(kind: str, arg: str) -> dict:
    try:
        if kind == "kyfan":
            return {"type": kind, "k": int(arg)}
        if kind == "schatten":
            return {"type": kind, "p": arg}
        if kind in ("alpha", "orbit"):
            return {"type": kind, "alpha" if kind == "alpha" else "mu": _floats(arg)}
        if kind == "supfamily":
            return {"type": kind, "family": [_floats(part) for part in arg.split(";")]}
    except ValueError as exc:
        raise ValidationError(f"bad inline norm {kind}:{arg}: {exc}") from exc
    raise ValidationError(f"unknown norm type {kind!r}")
