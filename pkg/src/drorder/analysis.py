"""Fixed points, exchange-identity certification, and primal/dual extraction.

The reflected resolvent of the first operand maps the fixed point set of
the (A, B)-ordered splitting operator isometrically onto that of the
(B, A)-ordered one, with the second reflector as its inverse; on fixed
points it acts as z + k -> z - k, where z is the primal solution
(shadow of the fixed point) and k = f - z the dual solution.  The
checkers in this module certify these statements pointwise, together
with the stronger commutation, conjugation, and shadow identities that
hold when the first operand is affine (or a normal cone of an affine
subspace), and the failure probes that show where they break.

All checkers are pure; randomized callers can fan trials out across
workers and merge the reports by taking the worst violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .operators import (
    GraphPair,
    MonotonicityError,
    NormalConeAffineSubspace,
    NotAffineError,
    Operator,
    TAU_GRAPH,
    TAU_NUM,
    as_point,
    graph_contains,
)
from .splitting import SplitOperator, dr_step

__all__ = [
    "FixedPointBudgetError",
    "CertificateError",
    "SolutionPair",
    "IdentityReport",
    "find_fixed_point",
    "extract_solution",
    "map_fixed_point",
    "check_commutation",
    "check_conjugation",
    "probe_conjugation",
    "check_shadow_equality",
    "check_nonexpansive_transfer",
    "check_commutator",
    "check_defect_decomposition",
    "check_firmly_nonexpansive",
    "check_dual_symmetry",
]


class FixedPointBudgetError(RuntimeError):
    """Iteration budget ran out; carries the best iterate seen."""

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(message)
        self.best = best
        self.residual = residual


class CertificateError(RuntimeError):
    """A graph-membership or fixed-point certificate failed."""


@dataclass(eq=False)
class SolutionPair:
    """A primal/dual pair (z, k) with graph-membership certificates.

    cert_a witnesses (z, k) in gra A and cert_b witnesses (z, -k) in
    gra B, which together place z among the zeros of A + B and (z, -k)
    in the extended solution set of the ordered pair.
    """

    z: np.ndarray
    k: np.ndarray
    cert_a: GraphPair
    cert_b: GraphPair


@dataclass
class IdentityReport:
    """Outcome of one identity check: worst violation over the samples."""

    identity_name: str
    max_violation: float
    sample_count: int
    tolerance: float
    passed: bool

    @classmethod
    def from_violation(cls, name: str, violation: float, samples: int,
                       tolerance: float) -> "IdentityReport":
        return cls(name, float(violation), int(samples), float(tolerance),
                   bool(violation <= tolerance))

    def to_dict(self) -> dict:
        return {
            "identity_name": self.identity_name,
            "max_violation": self.max_violation,
            "sample_count": self.sample_count,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def find_fixed_point(T: SplitOperator, x0, tol: float = 1e-10,
                     max_iter: int = 10_000) -> np.ndarray:
    """Return x with ||T x - x|| <= tol, by plain iteration from x0.

    Raises FixedPointBudgetError (with the best iterate and its
    residual) when the budget is exhausted; for monotone operands the
    iteration converges whenever T has any fixed point.
    """
    x = as_point(x0, T.dim)
    best = x
    best_residual = float("inf")
    for _ in range(max_iter):
        tx = T.apply(x)
        residual = float(np.linalg.norm(tx - x))
        if residual < best_residual:
            best, best_residual = x, residual
        if residual <= tol:
            return x
        x = tx
    raise FixedPointBudgetError(
        f"no fixed point to tolerance {tol:.1e} within {max_iter} iterations "
        f"(best residual {best_residual:.3e})",
        best,
        best_residual,
    )


def extract_solution(A: Operator, B: Operator, fixed_point, *,
                     fix_tol: float = TAU_GRAPH,
                     graph_tol: float = TAU_GRAPH) -> SolutionPair:
    """Split a fixed point f of the (A, B) operator into z = J_A f, k = f - z.

    Both graph certificates are validated; a failure signals that f was
    not a fixed point to sufficient accuracy.
    """
    f = as_point(fixed_point, A.dim)
    residual = float(np.linalg.norm(dr_step(A, B, f) - f))
    if residual > fix_tol:
        raise CertificateError(
            f"not a fixed point: residual {residual:.3e} > {fix_tol:.1e}"
        )
    z = A.resolve(f)
    k = f - z
    cert_a = GraphPair(z, k)
    cert_b = GraphPair(z, -k)
    if not graph_contains(A, cert_a, graph_tol):
        raise CertificateError("certificate (z, k) in gra A failed")
    if not graph_contains(B, cert_b, graph_tol):
        raise CertificateError("certificate (z, -k) in gra B failed")
    return SolutionPair(z=z, k=k, cert_a=cert_a, cert_b=cert_b)


def map_fixed_point(A: Operator, B: Operator, f, direction: str = "ab", *,
                    fix_tol: float = TAU_GRAPH) -> np.ndarray:
    """Carry a fixed point across orders by the matching reflector.

    direction "ab" maps Fix T_(A,B) -> Fix T_(B,A) via the first
    reflector; "ba" is the reverse map via the second reflector.  On a
    fixed point with solution pair (z, k) the image is z - k, and the
    two directions are mutually inverse isometries.
    """
    if direction not in ("ab", "ba"):
        raise ValueError("direction must be 'ab' or 'ba'")
    f = as_point(f, A.dim)
    if direction == "ab":
        source_residual = float(np.linalg.norm(dr_step(A, B, f) - f))
        reflector = A
    else:
        source_residual = float(np.linalg.norm(dr_step(B, A, f) - f))
        reflector = B
    if source_residual > fix_tol:
        raise CertificateError(
            f"source fixed-point check failed: residual {source_residual:.3e} "
            f"> {fix_tol:.1e}"
        )
    return reflector.reflect(f)


def _require_generalized_partner(A: Operator, B: Operator) -> None:
    if not B.monotone and not isinstance(A, NormalConeAffineSubspace):
        raise MonotonicityError(
            "a non-monotone second operand needs an affine-subspace normal "
            "cone in the first slot"
        )


def check_commutation(A: Operator, B: Operator, x, n: int, *,
                      tol: float = TAU_NUM) -> IdentityReport:
    """Worst defect of R_A T_ab^m x = T_ba^m R_A x over 1 <= m <= n.

    Requires an affine first operand; the second may be a projector
    selection only when the first is an affine-subspace normal cone.
    """
    if not A.affine:
        raise NotAffineError("commutation requires an affine first operand")
    _require_generalized_partner(A, B)
    x = as_point(x, A.dim)
    forward = x.copy()
    reflected = A.reflect(x)
    worst = 0.0
    for _ in range(int(n)):
        forward = dr_step(A, B, forward)
        reflected = dr_step(B, A, reflected)
        worst = max(worst, float(np.linalg.norm(A.reflect(forward) - reflected)))
    return IdentityReport.from_violation("commutation", worst, int(n), tol)


def _conjugation_violation(A: Operator, B: Operator, x, n: int) -> float:
    x = as_point(x, A.dim)
    rx = A.reflect(x)
    ab_x, ba_x = x.copy(), x.copy()
    ab_rx, ba_rx = rx.copy(), rx.copy()
    worst = 0.0
    for _ in range(int(n)):
        ab_x = dr_step(A, B, ab_x)
        ba_x = dr_step(B, A, ba_x)
        ab_rx = dr_step(A, B, ab_rx)
        ba_rx = dr_step(B, A, ba_rx)
        worst = max(
            worst,
            float(np.linalg.norm(ba_x - A.reflect(ab_rx))),
            float(np.linalg.norm(ab_x - A.reflect(ba_rx))),
        )
    return worst


def check_conjugation(A: Operator, B: Operator, x, n: int, *,
                      tol: float = TAU_NUM) -> IdentityReport:
    """Worst defect over m <= n of both conjugation identities

        T_ba^m x = R_A T_ab^m R_A x   and   T_ab^m x = R_A T_ba^m R_A x.

    The first operand must be an affine-subspace normal cone (so that
    its reflector is an involution); the second operand may also be a
    projector selection.
    """
    if not isinstance(A, NormalConeAffineSubspace):
        raise NotAffineError(
            "conjugation requires an affine-subspace normal cone first operand"
        )
    worst = _conjugation_violation(A, B, x, n)
    return IdentityReport.from_violation("conjugation", worst, int(n), tol)


def probe_conjugation(A: Operator, B: Operator, x, n: int, *,
                      tol: float = TAU_NUM) -> IdentityReport:
    """Precondition-waived conjugation probe.

    Evaluates the same defect as check_conjugation without requiring an
    affine-subspace first operand.  This is the designated entry point
    for exhibiting counterexamples (e.g. a halfspace in the first slot);
    contract-honoring code paths should call check_conjugation instead.
    """
    worst = _conjugation_violation(A, B, x, n)
    return IdentityReport.from_violation("conjugation-probe", worst, int(n), tol)


def check_shadow_equality(A: Operator, B: Operator, x, n: int, *,
                          tol: float = TAU_NUM) -> IdentityReport:
    """Worst defect over m <= n of J_A T_ba^m x = J_A T_ab^m (R_A x)."""
    if not isinstance(A, NormalConeAffineSubspace):
        raise NotAffineError(
            "shadow equality requires an affine-subspace normal cone first operand"
        )
    _require_generalized_partner(A, B)
    x = as_point(x, A.dim)
    ba = x.copy()
    ab = A.reflect(x)
    worst = float(np.linalg.norm(A.resolve(ba) - A.resolve(ab)))
    for _ in range(int(n)):
        ba = dr_step(B, A, ba)
        ab = dr_step(A, B, ab)
        worst = max(worst, float(np.linalg.norm(A.resolve(ba) - A.resolve(ab))))
    return IdentityReport.from_violation("shadow-equality", worst, int(n) + 1, tol)


def check_nonexpansive_transfer(A: Operator, B: Operator, x, y, *,
                                tol: float = TAU_NUM) -> IdentityReport:
    """Certify ||T_ab x - T_ab y|| = ||T_ba R_A x - T_ba R_A y|| <= ||R_A x - R_A y||.

    The report's violation is the worse of the equality defect and any
    excess over the inequality.
    """
    if not isinstance(A, NormalConeAffineSubspace):
        raise NotAffineError(
            "nonexpansive transfer requires an affine-subspace normal cone "
            "first operand"
        )
    _require_generalized_partner(A, B)
    x = as_point(x, A.dim)
    y = as_point(y, A.dim)
    direct = float(np.linalg.norm(dr_step(A, B, x) - dr_step(A, B, y)))
    rx, ry = A.reflect(x), A.reflect(y)
    swapped = float(np.linalg.norm(dr_step(B, A, rx) - dr_step(B, A, ry)))
    bound = float(np.linalg.norm(rx - ry))
    violation = max(abs(direct - swapped), swapped - bound, 0.0)
    return IdentityReport.from_violation("nonexpansive-transfer", violation, 1, tol)


def check_commutator(A: Operator, B: Operator, x, *,
                     tol: float = TAU_NUM) -> IdentityReport:
    """Certify the affine-pair commutator identities at x.

    Checks 4(T_ab T_ba - T_ba T_ab) x = (R_B R_A^2 R_B - R_A R_B^2 R_A) x
    and the exchange T_ab R_B R_A x = R_B R_A T_ab x; when both operands
    are affine-subspace normal cones (reflectors are involutions) it
    additionally certifies that the two product orders coincide.
    """
    if not (A.affine and B.affine):
        raise NotAffineError("commutator requires affine operands")
    x = as_point(x, A.dim)
    ab_ba = dr_step(A, B, dr_step(B, A, x))
    ba_ab = dr_step(B, A, dr_step(A, B, x))
    lhs = 4.0 * (ab_ba - ba_ab)
    rhs = (B.reflect(A.reflect(A.reflect(B.reflect(x))))
           - A.reflect(B.reflect(B.reflect(A.reflect(x)))))
    violation = float(np.linalg.norm(lhs - rhs))

    exchange = float(np.linalg.norm(
        dr_step(A, B, B.reflect(A.reflect(x)))
        - B.reflect(A.reflect(dr_step(A, B, x)))
    ))
    violation = max(violation, exchange)

    if isinstance(A, NormalConeAffineSubspace) and isinstance(B, NormalConeAffineSubspace):
        violation = max(violation, float(np.linalg.norm(ab_ba - ba_ab)))
    return IdentityReport.from_violation("commutator", violation, 1, tol)


def check_defect_decomposition(A: Operator, B: Operator, x, *,
                               tol: float = TAU_NUM) -> IdentityReport:
    """Certify the unconditional decomposition of the commutation defect,

        (R_A T_ab - T_ba R_A) x = (2 J_A T_ab - J_A - J_A R_B R_A) x,

    which holds for arbitrary operand pairs (no affinity needed).
    """
    x = as_point(x, A.dim)
    tab = dr_step(A, B, x)
    lhs = A.reflect(tab) - dr_step(B, A, A.reflect(x))
    rhs = 2.0 * A.resolve(tab) - A.resolve(x) - A.resolve(B.reflect(A.reflect(x)))
    violation = float(np.linalg.norm(lhs - rhs))
    return IdentityReport.from_violation("defect-decomposition", violation, 1, tol)


def check_firmly_nonexpansive(T: Callable[[np.ndarray], np.ndarray], x, y) -> float:
    """The inner product <Tx - Ty, (Id - T)x - (Id - T)y>.

    Nonnegative for every firmly nonexpansive map; the caller interprets
    the sign.  ``T`` is any point-to-point callable (a SplitOperator, a
    bound resolvent, ...).
    """
    x = as_point(x)
    y = as_point(y)
    tx = as_point(T(x), x.shape[0])
    ty = as_point(T(y), y.shape[0])
    return float((tx - ty) @ ((x - tx) - (y - ty)))


def check_dual_symmetry(A: Operator, B: Operator,
                        pairs: Iterable[SolutionPair], *,
                        graph_tol: float = TAU_GRAPH,
                        tol: float = TAU_NUM) -> IdentityReport:
    """Certify that solution pairs for (A, B) transfer to the swapped order.

    For each (z, k) the primal z is order-invariant while the dual flips
    sign, so (z, -k) must certify for (B, A) through the same two graph
    memberships; on top of that, the reflector image of the fixed point
    z + k must equal z - k.  Certificate failures raise; the report's
    violation is the worst reflector-image defect.
    """
    worst = 0.0
    count = 0
    for pair in pairs:
        z = as_point(pair.z, A.dim)
        k = as_point(pair.k, A.dim)
        if not graph_contains(A, GraphPair(z, k), graph_tol):
            raise CertificateError("swapped-order certificate (z, k) in gra A failed")
        if not graph_contains(B, GraphPair(z, -k), graph_tol):
            raise CertificateError("swapped-order certificate (z, -k) in gra B failed")
        image = map_fixed_point(A, B, z + k, "ab", fix_tol=3.0 * graph_tol)
        worst = max(worst, float(np.linalg.norm(image - (z - k))))
        count += 1
    return IdentityReport.from_violation("dual-symmetry", worst, count, tol)
