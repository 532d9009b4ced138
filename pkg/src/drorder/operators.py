"""Maximally monotone operators on R^d with closed-form resolvents.

The catalog covers monotone linear and affine maps, the normal cones of
the standard convex sets (affine subspaces, halfspaces, balls, rays,
boxes), a deterministic selection of the sphere projector (admitted as a
non-monotone stand-in for a resolvent), and the inverse and
point-reflection transforms of any catalog member.

For a monotone operator A the resolvent J = (Id + A)^{-1} is single
valued and firmly nonexpansive, and the reflected resolvent R = 2J - Id
is nonexpansive.  Normal cone operators resolve to metric projections,
so every resolvent here is an exact closed form (the only linear solve
is the dense (I + M) system of the linear/affine variants).

Operators are immutable after construction and safe to share between
threads; every operation is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TAU_PSD",
    "TAU_ORTHO",
    "TAU_GRAPH",
    "TAU_NUM",
    "DimensionMismatchError",
    "MonotonicityError",
    "NotAffineError",
    "NonFinitePointError",
    "as_point",
    "GraphPair",
    "Operator",
    "LinearMonotone",
    "AffineRelation",
    "NormalConeAffineSubspace",
    "NormalConeHalfspace",
    "NormalConeBall",
    "NormalConeRay",
    "NormalConeBox",
    "SphereSelection",
    "Inverse",
    "Rotation",
    "resolve",
    "reflect",
    "inverse_resolvent",
    "graph_contains",
    "is_monotone",
    "operator_from_dict",
    "register_operator_kind",
]

# Default tolerances for unit-scale data in double precision.  All of
# them can be overridden per problem instance through the config layer.
TAU_PSD = 1e-9     # min eigenvalue of the symmetric part >= -TAU_PSD
TAU_ORTHO = 1e-10  # orthonormality / unit-norm slack
TAU_GRAPH = 1e-8   # graph membership certificates
TAU_NUM = 1e-9     # generic numerical identity slack


class DimensionMismatchError(ValueError):
    """Operand dimensions are inconsistent."""


class MonotonicityError(ValueError):
    """A monotone operator was required and the requirement failed."""


class NotAffineError(TypeError):
    """An affine operator was required."""


class NonFinitePointError(ValueError):
    """A point with inf or NaN entries reached an operator evaluation."""


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float vector, optionally of length ``dim``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D point, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"expected a point in R^{dim}, got length {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise NonFinitePointError("point has non-finite entries")
    return arr


@dataclass(frozen=True)
class GraphPair:
    """A claimed graph point (x, u), i.e. u in A(x)."""

    x: np.ndarray
    u: np.ndarray


def _require_finite_matrix(m: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")


def _require_psd_symmetric_part(matrix: np.ndarray, tau_psd: float) -> None:
    sym = 0.5 * (matrix + matrix.T)
    lo = float(np.linalg.eigvalsh(sym)[0])
    if lo < -tau_psd:
        raise MonotonicityError(
            f"symmetric part has eigenvalue {lo:.3e} < -{tau_psd:.1e}; "
            "the operator is not monotone"
        )


def _solve_shifted(shifted: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # (I + M) is nonsingular whenever M is monotone; a failure here means
    # a broken internal invariant, not a user error.
    try:
        return np.linalg.solve(shifted, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError(
            "internal invariant violation: (I + M) singular for a monotone M"
        ) from exc


def _unit_vector(v, name: str, tau_ortho: float) -> np.ndarray:
    """Return ``v`` scaled to unit norm (no-op if already unit to tolerance)."""
    v = as_point(v)
    nv = float(np.linalg.norm(v))
    if nv <= tau_ortho:
        raise ValueError(f"{name} must be a nonzero vector")
    if abs(nv - 1.0) <= tau_ortho:
        return v
    return v / nv


def _orthonormal_columns(basis: np.ndarray, tau_ortho: float) -> np.ndarray:
    """Orthonormalize the columns of ``basis`` by modified Gram-Schmidt.

    Columns that are dependent on the preceding ones (residual norm at
    most ``tau_ortho``) are dropped.  A basis that is already orthonormal
    to tolerance is returned unchanged, which keeps serialization round
    trips bit-identical.
    """
    d, r = basis.shape
    if r == 0:
        return basis.copy()
    if r <= d:
        gram = basis.T @ basis
        if float(np.max(np.abs(gram - np.eye(r)))) <= tau_ortho:
            return basis.copy()
    cols: list[np.ndarray] = []
    for j in range(r):
        v = basis[:, j].copy()
        # two passes of re-orthogonalization for numerical stability
        for _ in range(2):
            for u in cols:
                v -= (u @ v) * u
        nv = float(np.linalg.norm(v))
        if nv > tau_ortho:
            cols.append(v / nv)
    if not cols:
        return np.zeros((d, 0))
    return np.column_stack(cols)


class Operator:
    """Common interface of the operator catalog.

    Subclasses implement ``resolve`` (the resolvent; for normal cones
    this is the metric projection onto the underlying set) and declare
    ``monotone`` and ``affine``.  Affine members additionally expose
    their resolvent as an explicit affine map for closed-form assembly.
    """

    kind: str = "abstract"
    monotone: bool = True
    affine: bool = False

    def __init__(self, dim: int):
        self.dim = int(dim)

    def resolve(self, x) -> np.ndarray:
        """Evaluate the resolvent J(x) = (Id + A)^{-1} x."""
        raise NotImplementedError

    def reflect(self, x) -> np.ndarray:
        """Evaluate the reflected resolvent (2J - Id) x."""
        x = as_point(x, self.dim)
        return 2.0 * self.resolve(x) - x

    def resolvent_affine_map(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (C, b) with J x = C x + b.  Affine operators only."""
        raise NotAffineError(f"{type(self).__name__} has no affine resolvent form")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"{type(self).__name__}(dim={self.dim})"


class LinearMonotone(Operator):
    """The linear operator x -> M x for monotone M.

    Monotonicity is equivalent to the symmetric part (M + M^T)/2 being
    positive semidefinite; this is validated at construction.  The
    resolvent solves the dense system (I + M) y = x.
    """

    kind = "linear_monotone"
    affine = True

    def __init__(self, matrix, *, tau_psd: float = TAU_PSD):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"matrix must be square, got {matrix.shape}")
        _require_finite_matrix(matrix, "matrix")
        _require_psd_symmetric_part(matrix, tau_psd)
        super().__init__(matrix.shape[0])
        self.matrix = matrix
        self._shifted = np.eye(self.dim) + matrix

    def resolve(self, x):
        x = as_point(x, self.dim)
        return _solve_shifted(self._shifted, x)

    def resolvent_affine_map(self):
        return np.linalg.inv(self._shifted), np.zeros(self.dim)

    def to_dict(self):
        return {"kind": self.kind, "matrix": _matrix_rows(self.matrix)}


class AffineRelation(Operator):
    """The affine operator x -> M x + b with monotone M.

    Resolvent: y = (I + M)^{-1} (x - b).
    """

    kind = "affine_relation"
    affine = True

    def __init__(self, matrix, offset, *, tau_psd: float = TAU_PSD):
        matrix = np.asarray(matrix, dtype=float)
        offset = as_point(offset)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"matrix must be square, got {matrix.shape}")
        if matrix.shape[0] != offset.shape[0]:
            raise DimensionMismatchError("matrix and offset dimensions differ")
        _require_finite_matrix(matrix, "matrix")
        _require_psd_symmetric_part(matrix, tau_psd)
        super().__init__(offset.shape[0])
        self.matrix = matrix
        self.offset = offset
        self._shifted = np.eye(self.dim) + matrix

    def resolve(self, x):
        x = as_point(x, self.dim)
        return _solve_shifted(self._shifted, x - self.offset)

    def resolvent_affine_map(self):
        inv = np.linalg.inv(self._shifted)
        return inv, -inv @ self.offset

    def to_dict(self):
        return {
            "kind": self.kind,
            "matrix": _matrix_rows(self.matrix),
            "offset": _vector_list(self.offset),
        }


class NormalConeAffineSubspace(Operator):
    """Normal cone of the affine subspace U = offset + range(basis).

    The resolvent is the orthogonal projection P_U.  The basis is
    orthonormalized at construction by modified Gram-Schmidt (dependent
    columns dropped) unless it is already orthonormal to ``tau_ortho``.
    ``basis`` may have zero columns, in which case U is the single point
    ``offset``.
    """

    kind = "normal_cone_affine_subspace"
    affine = True

    def __init__(self, offset, basis, *, tau_ortho: float = TAU_ORTHO):
        offset = as_point(offset)
        basis = np.asarray(basis, dtype=float)
        if basis.size == 0:
            basis = basis.reshape(offset.shape[0], 0)
        if basis.ndim != 2 or basis.shape[0] != offset.shape[0]:
            raise DimensionMismatchError(
                f"basis must have {offset.shape[0]} rows, got shape {basis.shape}"
            )
        _require_finite_matrix(basis, "basis")
        super().__init__(offset.shape[0])
        self.offset = offset
        self.basis = _orthonormal_columns(basis, tau_ortho)

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def resolve(self, x):
        x = as_point(x, self.dim)
        centered = x - self.offset
        return self.offset + self.basis @ (self.basis.T @ centered)

    def resolvent_affine_map(self):
        proj = self.basis @ self.basis.T
        return proj, self.offset - proj @ self.offset

    def to_dict(self):
        return {
            "kind": self.kind,
            "offset": _vector_list(self.offset),
            "basis": _matrix_rows(self.basis),
        }


class NormalConeHalfspace(Operator):
    """Normal cone of the halfspace {x : <normal, x> <= rhs}.

    A non-unit ``normal`` is rescaled together with ``rhs`` so the stored
    normal is a unit vector describing the same halfspace.
    """

    kind = "normal_cone_halfspace"

    def __init__(self, normal, rhs: float, *, tau_ortho: float = TAU_ORTHO):
        normal = as_point(normal)
        nv = float(np.linalg.norm(normal))
        if nv <= tau_ortho:
            raise ValueError("halfspace normal must be nonzero")
        rhs = float(rhs)
        if abs(nv - 1.0) > tau_ortho:
            normal = normal / nv
            rhs = rhs / nv
        super().__init__(normal.shape[0])
        self.normal = normal
        self.rhs = rhs

    def resolve(self, x):
        x = as_point(x, self.dim)
        slack = float(self.normal @ x) - self.rhs
        if slack <= 0.0:
            return x.copy()
        return x - slack * self.normal

    def to_dict(self):
        return {
            "kind": self.kind,
            "normal": _vector_list(self.normal),
            "rhs": float(self.rhs),
        }


class NormalConeBall(Operator):
    """Normal cone of the closed ball with the given center and radius."""

    kind = "normal_cone_ball"

    def __init__(self, center, radius: float):
        center = as_point(center)
        radius = float(radius)
        if not radius > 0.0:
            raise ValueError("ball radius must be strictly positive")
        super().__init__(center.shape[0])
        self.center = center
        self.radius = radius

    def resolve(self, x):
        x = as_point(x, self.dim)
        v = x - self.center
        dist = float(np.linalg.norm(v))
        if dist <= self.radius:
            return x.copy()
        return self.center + (self.radius / dist) * v

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": _vector_list(self.center),
            "radius": float(self.radius),
        }


class NormalConeRay(Operator):
    """Normal cone of the ray {t * direction : t >= 0}.

    Projection: P(x) = max(<direction, x>, 0) * direction.
    """

    kind = "normal_cone_ray"

    def __init__(self, direction, *, tau_ortho: float = TAU_ORTHO):
        direction = _unit_vector(direction, "ray direction", tau_ortho)
        super().__init__(direction.shape[0])
        self.direction = direction

    def resolve(self, x):
        x = as_point(x, self.dim)
        t = float(self.direction @ x)
        return max(t, 0.0) * self.direction

    def to_dict(self):
        return {"kind": self.kind, "direction": _vector_list(self.direction)}


class NormalConeBox(Operator):
    """Normal cone of the box [lower, upper]; bounds may be +-inf."""

    kind = "normal_cone_box"

    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.ndim != 1 or upper.ndim != 1 or lower.shape != upper.shape:
            raise DimensionMismatchError("lower and upper must be vectors of equal length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper entrywise")
        super().__init__(lower.shape[0])
        self.lower = lower
        self.upper = upper

    def resolve(self, x):
        x = as_point(x, self.dim)
        return np.clip(x, self.lower, self.upper)

    def to_dict(self):
        return {
            "kind": self.kind,
            "lower": _bounds_list(self.lower),
            "upper": _bounds_list(self.upper),
        }


class SphereSelection(Operator):
    """A single-valued selection of the set-valued projector onto a sphere.

    The sphere is not convex, so this is not the resolvent of a monotone
    operator; ``monotone`` is False and operations whose contract needs
    monotonicity reject it.  At the center, where every sphere point is
    nearest, the declared ``tie_direction`` makes the selection
    deterministic: resolve(center) = center + radius * tie_direction.
    """

    kind = "sphere_selection"
    monotone = False

    def __init__(self, center, radius: float, tie_direction, *, tau_ortho: float = TAU_ORTHO):
        center = as_point(center)
        radius = float(radius)
        if not radius > 0.0:
            raise ValueError("sphere radius must be strictly positive")
        tie_direction = _unit_vector(tie_direction, "tie_direction", tau_ortho)
        if tie_direction.shape[0] != center.shape[0]:
            raise DimensionMismatchError("center and tie_direction dimensions differ")
        super().__init__(center.shape[0])
        self.center = center
        self.radius = radius
        self.tie_direction = tie_direction

    def resolve(self, x):
        x = as_point(x, self.dim)
        v = x - self.center
        dist = float(np.linalg.norm(v))
        if dist == 0.0:
            return self.center + self.radius * self.tie_direction
        return self.center + (self.radius / dist) * v

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": _vector_list(self.center),
            "radius": float(self.radius),
            "tie_direction": _vector_list(self.tie_direction),
        }


class Inverse(Operator):
    """The inverse A^{-1} of a monotone catalog operator.

    By the inverse resolvent identity J_{A^{-1}} = Id - J_A, so the
    resolvent needs nothing beyond the inner operator's.
    """

    kind = "inverse"

    def __init__(self, inner: Operator):
        if not inner.monotone:
            raise MonotonicityError("inverse requires a monotone operand")
        super().__init__(inner.dim)
        self.inner = inner

    @property
    def affine(self):  # type: ignore[override]
        return self.inner.affine

    def resolve(self, x):
        x = as_point(x, self.dim)
        return x - self.inner.resolve(x)

    def resolvent_affine_map(self):
        c, b = self.inner.resolvent_affine_map()
        return np.eye(self.dim) - c, -b

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict()}


class Rotation(Operator):
    """The point reflection conjugate (-Id) o A o (-Id) of a catalog operator.

    Its resolvent is x -> -J_inner(-x); monotonicity and affinity carry
    over from the inner operator.
    """

    kind = "rotation"

    def __init__(self, inner: Operator):
        super().__init__(inner.dim)
        self.inner = inner

    @property
    def monotone(self):  # type: ignore[override]
        return self.inner.monotone

    @property
    def affine(self):  # type: ignore[override]
        return self.inner.affine

    def resolve(self, x):
        x = as_point(x, self.dim)
        return -self.inner.resolve(-x)

    def resolvent_affine_map(self):
        c, b = self.inner.resolvent_affine_map()
        return c, -b

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict()}


def _require_monotone(op: Operator, operation: str) -> None:
    if not op.monotone:
        raise MonotonicityError(f"{operation} requires a monotone operator, got {op.kind}")


def resolve(op: Operator, x) -> np.ndarray:
    """Resolvent J_op(x); the metric projection for normal cone variants."""
    return op.resolve(as_point(x, op.dim))


def reflect(op: Operator, x) -> np.ndarray:
    """Reflected resolvent (2 J_op - Id)(x)."""
    return op.reflect(x)


def inverse_resolvent(op: Operator, x) -> np.ndarray:
    """J of the inverse operator, via J_{A^{-1}} = Id - J_A.

    Consequently reflect(Inverse(op), x) == -reflect(op, x).
    """
    _require_monotone(op, "inverse_resolvent")
    x = as_point(x, op.dim)
    return x - op.resolve(x)


def graph_contains(op: Operator, pair: GraphPair, tol: float = TAU_GRAPH) -> bool:
    """Certify (x, u) in gra(op) via ||J_op(x + u) - x|| <= tol."""
    _require_monotone(op, "graph_contains")
    x = as_point(pair.x, op.dim)
    u = as_point(pair.u, op.dim)
    return float(np.linalg.norm(op.resolve(x + u) - x)) <= tol


def is_monotone(op: Operator, *, tau_psd: float = TAU_PSD) -> bool:
    """Monotonicity of a catalog member.

    For linear/affine variants this re-certifies that the symmetric part
    is PSD to ``tau_psd`` (construction already enforced it); for other
    variants it is the declared catalog property.
    """
    if isinstance(op, (LinearMonotone, AffineRelation)):
        sym = 0.5 * (op.matrix + op.matrix.T)
        return float(np.linalg.eigvalsh(sym)[0]) >= -tau_psd
    if isinstance(op, (Inverse, Rotation)):
        return is_monotone(op.inner, tau_psd=tau_psd)
    return bool(op.monotone)


# --------------------------------------------------------------------------
# JSON serialization.  Matrices are row-major nested lists, vectors plain
# lists; box bounds use the strings "inf"/"-inf" for unbounded sides so the
# emitted documents stay valid JSON.

def _vector_list(v: np.ndarray) -> list[float]:
    return [float(x) for x in v]


def _matrix_rows(m: np.ndarray) -> list[list[float]]:
    return [[float(x) for x in row] for row in m]


def _bounds_list(v: np.ndarray) -> list:
    out = []
    for x in v:
        if np.isposinf(x):
            out.append("inf")
        elif np.isneginf(x):
            out.append("-inf")
        else:
            out.append(float(x))
    return out


def _parse_bound(value, name: str) -> float:
    if isinstance(value, str):
        if value in ("inf", "+inf"):
            return float("inf")
        if value == "-inf":
            return float("-inf")
        raise ValueError(f"{name}: bad bound string {value!r}")
    return float(value)


def _expect_keys(data: dict, required: set[str]) -> None:
    keys = set(data) - {"kind"}
    missing = required - keys
    extra = keys - required
    if missing:
        raise ValueError(f"operator {data.get('kind')!r}: missing fields {sorted(missing)}")
    if extra:
        raise ValueError(f"operator {data.get('kind')!r}: unknown fields {sorted(extra)}")


_KIND_REGISTRY: dict = {}


def register_operator_kind(kind: str, loader) -> None:
    """Register a loader(data, tau_psd, tau_ortho) for a serialized kind."""
    _KIND_REGISTRY[kind] = loader


def operator_from_dict(data: dict, *, tau_psd: float = TAU_PSD,
                       tau_ortho: float = TAU_ORTHO) -> Operator:
    """Rebuild an operator from its JSON object form."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ValueError("operator document must be an object with a 'kind' tag")
    kind = data["kind"]
    try:
        loader = _KIND_REGISTRY[kind]
    except KeyError:
        raise ValueError(f"unknown operator kind {kind!r}") from None
    return loader(data, tau_psd, tau_ortho)


def _load_linear(data, tau_psd, tau_ortho):
    _expect_keys(data, {"matrix"})
    return LinearMonotone(data["matrix"], tau_psd=tau_psd)


def _load_affine(data, tau_psd, tau_ortho):
    _expect_keys(data, {"matrix", "offset"})
    return AffineRelation(data["matrix"], data["offset"], tau_psd=tau_psd)


def _load_subspace(data, tau_psd, tau_ortho):
    _expect_keys(data, {"offset", "basis"})
    offset = as_point(data["offset"])
    basis = np.asarray(data["basis"], dtype=float)
    if basis.size == 0:
        basis = basis.reshape(offset.shape[0], 0)
    return NormalConeAffineSubspace(offset, basis, tau_ortho=tau_ortho)


def _load_halfspace(data, tau_psd, tau_ortho):
    _expect_keys(data, {"normal", "rhs"})
    return NormalConeHalfspace(data["normal"], data["rhs"], tau_ortho=tau_ortho)


def _load_ball(data, tau_psd, tau_ortho):
    _expect_keys(data, {"center", "radius"})
    return NormalConeBall(data["center"], data["radius"])


def _load_ray(data, tau_psd, tau_ortho):
    _expect_keys(data, {"direction"})
    return NormalConeRay(data["direction"], tau_ortho=tau_ortho)


def _load_box(data, tau_psd, tau_ortho):
    _expect_keys(data, {"lower", "upper"})
    lower = [_parse_bound(v, "lower") for v in data["lower"]]
    upper = [_parse_bound(v, "upper") for v in data["upper"]]
    return NormalConeBox(lower, upper)


def _load_sphere(data, tau_psd, tau_ortho):
    _expect_keys(data, {"center", "radius", "tie_direction"})
    return SphereSelection(
        data["center"], data["radius"], data["tie_direction"], tau_ortho=tau_ortho
    )


def _load_inverse(data, tau_psd, tau_ortho):
    _expect_keys(data, {"inner"})
    return Inverse(operator_from_dict(data["inner"], tau_psd=tau_psd, tau_ortho=tau_ortho))


def _load_rotation(data, tau_psd, tau_ortho):
    _expect_keys(data, {"inner"})
    return Rotation(operator_from_dict(data["inner"], tau_psd=tau_psd, tau_ortho=tau_ortho))


register_operator_kind(LinearMonotone.kind, _load_linear)
register_operator_kind(AffineRelation.kind, _load_affine)
register_operator_kind(NormalConeAffineSubspace.kind, _load_subspace)
register_operator_kind(NormalConeHalfspace.kind, _load_halfspace)
register_operator_kind(NormalConeBall.kind, _load_ball)
register_operator_kind(NormalConeRay.kind, _load_ray)
register_operator_kind(NormalConeBox.kind, _load_box)
register_operator_kind(SphereSelection.kind, _load_sphere)
register_operator_kind(Inverse.kind, _load_inverse)
register_operator_kind(Rotation.kind, _load_rotation)
