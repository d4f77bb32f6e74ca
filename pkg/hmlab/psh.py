"""Sub-mean-value estimates, plurisubharmonicity verdicts and maximum-principle checks."""

from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainTooSmallError, FieldError, InvalidCircleError
from .fields import GridDomain, ScalarSampleField, as_point, circle_average, circle_points
from .reports import PshReport, VerificationReport, Witness

LOGGER = logging.getLogger("HermitianLab.Psh")

DEFAULT_RADIUS_STEPS = (16, 8, 4)
DEFAULT_DISK_RADII = (0.02, 0.01, 0.005)


def grid_tolerance(domain: GridDomain, factor: float = 10.0) -> float:
    return factor * domain.spacing**2


def default_radii(domain: GridDomain) -> list:
    return [steps * domain.spacing for steps in DEFAULT_RADIUS_STEPS]


def _center_value(u: Callable[[np.ndarray], np.ndarray], z0: complex) -> float:
    with np.errstate(all="ignore"):
        value = float(np.asarray(u(np.array([z0])), dtype=float).reshape(-1)[0])
    if not np.isfinite(value):
        raise InvalidCircleError(z0, 0.0)
    return value


def lambda_profile(
    u: Callable[[np.ndarray], np.ndarray],
    z0: complex,
    radii: Sequence[float],
    nodes: int = 64,
) -> np.ndarray:
    """``r⁻²(circle average - u(z0))`` per radius; NaN where the circle is invalid."""
    z0 = as_point(z0)
    if not radii or any(not r > 0 for r in radii):
        raise FieldError(f"Radii must be positive, got {list(radii)}")
    center = _center_value(u, z0)
    profile = np.full(len(radii), np.nan)
    for i, r in enumerate(radii):
        try:
            profile[i] = (circle_average(u, z0, r, nodes) - center) / (r * r)
        except InvalidCircleError:
            LOGGER.debug("Circle of radius %.3e around %s is invalid", r, z0)
    return profile


def lambda_estimate(
    u: Callable[[np.ndarray], np.ndarray],
    z0: complex,
    radii: Sequence[float],
    nodes: int = 64,
) -> float:
    """Finite-radius surrogate of ``limsup r⁻²(circle average - u(z0))``: the max over ``radii``."""
    profile = lambda_profile(u, z0, radii, nodes)
    if np.all(np.isnan(profile)):
        raise InvalidCircleError(as_point(z0), float(min(radii)))
    return float(np.nanmax(profile))


def xi_xi_bar_estimate(
    u: Callable[[np.ndarray], np.ndarray],
    s,
    xi,
    disk_samples: int = 8,
    radii: Sequence[float] = DEFAULT_DISK_RADII,
    nodes: int = 64,
    seed: int = 0,
) -> float:
    """Min of Λ(u∘f)(0) over the affine disk ``s + zξ`` and random quadratic disks.

    ``u`` takes points of the base as arrays of shape ``(..., d)``.
    """
    base = np.atleast_1d(np.asarray(s, dtype=complex))
    direction = np.atleast_1d(np.asarray(xi, dtype=complex))
    if base.ndim != 1 or base.size < 1 or direction.shape != base.shape:
        raise FieldError("Base point and direction must be vectors of the same dimension >= 1")
    rng = np.random.default_rng(seed)
    bends = [np.zeros_like(base)]
    for _ in range(disk_samples):
        bends.append(0.5 * (rng.standard_normal(base.size) + 1j * rng.standard_normal(base.size)))

    estimates = []
    for eta in bends:

        def restricted(z: np.ndarray, eta: np.ndarray = eta) -> np.ndarray:
            z = np.asarray(z, dtype=complex)[..., None]
            return u(base + z * direction + z * z * eta)

        estimates.append(lambda_estimate(restricted, 0j, radii, nodes))
    return float(min(estimates))


def _interior_nodes(u: ScalarSampleField, radii: list) -> tuple:
    radii = sorted(radii, reverse=True)
    while radii:
        mask = u.mask & u.domain.interior_mask(radii[0])
        if mask.any():
            return radii, mask
        radii = radii[1:]
    raise DomainTooSmallError(
        f"No unmasked node of the {u.domain.resolution}-node grid admits a circle of the smallest radius"
    )


def psh_verdict(
    u: ScalarSampleField,
    radii: Optional[Sequence[float]] = None,
    nodes: int = 64,
    tolerance: Optional[float] = None,
    tolerance_factor: float = 10.0,
) -> PshReport:
    """Classify a sampled field as psh, not-psh or inconclusive.

    Circle values come from bilinear interpolation.  Nodes are tested when every
    radius of the ladder fits inside the domain; the largest radii are dropped if
    no node qualifies.
    """
    domain = u.domain
    tol = grid_tolerance(domain, tolerance_factor) if tolerance is None else float(tolerance)
    ladder, mask = _interior_nodes(u, list(radii) if radii else default_radii(domain))
    interp = u.interpolator("linear")
    centers = domain.points()[mask]
    center_values = u.values[mask]

    profile = np.empty((centers.size, len(ladder)))
    for i, r in enumerate(ladder):
        ring = circle_points(0j, r, nodes)
        samples = interp(centers[:, None] + ring[None, :])
        profile[:, i] = (samples.mean(axis=1) - center_values) / (r * r)

    complete = np.all(np.isfinite(profile), axis=1)
    estimate = np.where(np.isfinite(profile), profile, -np.inf).max(axis=1)
    estimate[np.isinf(estimate)] = np.nan
    lambda_map = np.full(u.values.shape, np.nan)
    lambda_map[mask] = estimate

    tested = np.isfinite(estimate)
    if not tested.any():
        LOGGER.warning("No node produced a valid circle average; verdict inconclusive")
        return PshReport("inconclusive", None, float("nan"), ladder, tol, 0, lambda_map, nodes)

    failing = tested & (estimate < -tol)
    decisive = failing & complete
    if decisive.any():
        idx = int(np.argmin(np.where(decisive, estimate, np.inf)))
        verdict = "not-psh"
    else:
        idx = int(np.argmin(np.where(tested, estimate, np.inf)))
        verdict = "inconclusive" if failing.any() else "psh"
    report = PshReport(
        verdict=verdict,
        worst_node=complex(centers[idx]),
        worst_lambda=float(estimate[idx]),
        radii=[float(r) for r in ladder],
        tolerance=tol,
        nodes_tested=int(tested.sum()),
        lambda_map=lambda_map,
        circle_nodes=nodes,
    )
    LOGGER.debug("psh verdict %s (worst Λ %.3e at %s)", verdict, report.worst_lambda, report.worst_node)
    return report


def _grid_offset(field_domain: GridDomain, sub: GridDomain) -> tuple:
    dx, dy = field_domain.spacing_x, field_domain.spacing_y
    if abs(sub.spacing_x - dx) > 1e-9 * dx or abs(sub.spacing_y - dy) > 1e-9 * dy:
        raise FieldError("Subdomain spacing must match the sampled grid")
    col = (sub.xs[0] - field_domain.xs[0]) / dx
    row = (sub.ys[0] - field_domain.ys[0]) / dy
    if abs(col - round(col)) > 1e-6 or abs(row - round(row)) > 1e-6:
        raise FieldError("Subdomain corners must be nodes of the sampled grid")
    col, row = int(round(col)), int(round(row))
    last = field_domain.resolution - 1
    if col < 1 or row < 1 or col + sub.resolution - 1 > last - 1 or row + sub.resolution - 1 > last - 1:
        raise FieldError("Subdomain must lie strictly inside the sampled grid")
    return row, col


def max_principle_check(
    u: ScalarSampleField,
    sub: GridDomain,
    tolerance: Optional[float] = None,
    tolerance_factor: float = 10.0,
) -> VerificationReport:
    """Pass iff the interior max of ``u`` over ``sub`` is at most its boundary max plus tolerance."""
    row, col = _grid_offset(u.domain, sub)
    n = sub.resolution
    values = u.values[row : row + n, col : col + n]
    mask = u.mask[row : row + n, col : col + n]
    ring = np.ones((n, n), dtype=bool)
    ring[1:-1, 1:-1] = False
    interior = mask & ~ring
    boundary = mask & ring
    if not interior.any() or not boundary.any():
        raise DomainTooSmallError("Subdomain has no valid interior or boundary nodes")
    tol = grid_tolerance(u.domain, tolerance_factor) if tolerance is None else float(tolerance)

    inner = np.where(interior, values, -np.inf)
    idx = np.unravel_index(int(np.argmax(inner)), inner.shape)
    interior_max = float(inner[idx])
    boundary_max = float(np.max(values[boundary]))
    return VerificationReport(
        check="max-principle",
        residual=interior_max - boundary_max,
        tolerance=tol,
        samples=int(interior.sum() + boundary.sum()),
        witness=Witness(s=sub.node(*idx), note="interior maximum"),
        details={
            "interior_max": interior_max,
            "boundary_max": boundary_max,
            "subdomain": sub.to_dict(),
        },
    )


def nested_subdomains(domain: GridDomain, count: int = 3) -> list:
    """``count`` concentric sub-grids, each shrinking the previous one by a fixed number of rings."""
    rings = max((domain.resolution // 2 - 1) // (count + 1), 1)
    return [domain.shrink(rings * (k + 1)) for k in range(count)]


def levi_form_map(u: ScalarSampleField) -> ScalarSampleField:
    """Five-point ``(u_xx + u_yy) / 4`` at interior nodes; NaN elsewhere."""
    values = u.values
    dx2 = u.domain.spacing_x**2
    dy2 = u.domain.spacing_y**2
    levi = np.full(values.shape, np.nan)
    with np.errstate(invalid="ignore"):
        levi[1:-1, 1:-1] = 0.25 * (
            (values[1:-1, 2:] - 2.0 * values[1:-1, 1:-1] + values[1:-1, :-2]) / dx2
            + (values[2:, 1:-1] - 2.0 * values[1:-1, 1:-1] + values[:-2, 1:-1]) / dy2
        )
    return ScalarSampleField(u.domain, levi, np.isfinite(levi))


def lambda_map(u: ScalarSampleField, report: Optional[PshReport] = None, **kwargs) -> ScalarSampleField:
    report = report if report is not None and report.lambda_map is not None else psh_verdict(u, **kwargs)
    return ScalarSampleField(u.domain, report.lambda_map, np.isfinite(report.lambda_map))
