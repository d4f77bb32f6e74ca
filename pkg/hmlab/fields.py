"""Matrix-valued polynomial fields in (s, s̄) over plane domains.

Every metric, homomorphism, section and connection form in the laboratory is a
:class:`MatrixPolyField`: a table of complex matrices ``C[j, k]`` standing for
``Σ C[j, k] s^j s̄^k``.  Wirtinger derivatives act exactly on the table, so each
curvature formula has an in-system oracle; :func:`fd_derivative` provides the
independent finite-difference cross-check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.special import comb, factorial

from .errors import FieldError, InvalidCircleError, StencilOutsideDomainError

LOGGER = logging.getLogger("HermitianLab.Fields")

ComplexPoint = complex
Bidegree = Tuple[int, int]
MatrixLike = Union[complex, float, Sequence, np.ndarray]

WIRTINGER = ("s", "sbar")
FD_DERIVATIVES = ("s", "sbar", "s_sbar")


def as_point(value: object) -> complex:
    """Coerce ``value`` to a finite complex number."""
    try:
        z = complex(value)
    except (TypeError, ValueError) as exc:
        raise FieldError(f"Not a complex point: {value!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise FieldError(f"Point {value!r} is not finite")
    return z


def point_to_dict(z: complex) -> Dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


def point_from_dict(payload: object) -> complex:
    if isinstance(payload, Mapping):
        return as_point(complex(float(payload.get("re", 0.0)), float(payload.get("im", 0.0))))
    if isinstance(payload, (list, tuple)) and len(payload) == 2:
        return as_point(complex(float(payload[0]), float(payload[1])))
    return as_point(payload)


@dataclass(frozen=True)
class GridDomain:
    """A rectangular grid over ``center ± (half_width_x, half_width_y)``.

    Nodes are stored row-major: row index runs over Im(s), column index over
    Re(s).  The resolution is forced odd so the center is a node.
    """

    center: complex = 0j
    half_width_x: float = 1.0
    half_width_y: float = 1.0
    resolution: int = 65

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center))
        hx, hy = float(self.half_width_x), float(self.half_width_y)
        if not (hx > 0 and hy > 0 and math.isfinite(hx) and math.isfinite(hy)):
            raise FieldError(f"Half-widths must be positive, got ({hx}, {hy})")
        object.__setattr__(self, "half_width_x", hx)
        object.__setattr__(self, "half_width_y", hy)
        resolution = int(self.resolution)
        if resolution < 3:
            raise FieldError(f"Resolution must be at least 3, got {resolution}")
        if resolution % 2 == 0:
            resolution += 1
        object.__setattr__(self, "resolution", resolution)

    @classmethod
    def square(cls, center: complex = 0j, half_width: float = 1.0, resolution: int = 65) -> "GridDomain":
        return cls(center=center, half_width_x=half_width, half_width_y=half_width, resolution=resolution)

    @property
    def spacing_x(self) -> float:
        return 2.0 * self.half_width_x / (self.resolution - 1)

    @property
    def spacing_y(self) -> float:
        return 2.0 * self.half_width_y / (self.resolution - 1)

    @property
    def spacing(self) -> float:
        return max(self.spacing_x, self.spacing_y)

    @property
    def half_width(self) -> float:
        return max(self.half_width_x, self.half_width_y)

    @property
    def xs(self) -> np.ndarray:
        return self.center.real + np.linspace(-self.half_width_x, self.half_width_x, self.resolution)

    @property
    def ys(self) -> np.ndarray:
        return self.center.imag + np.linspace(-self.half_width_y, self.half_width_y, self.resolution)

    def points(self) -> np.ndarray:
        x, y = np.meshgrid(self.xs, self.ys)
        return x + 1j * y

    def node(self, row: int, col: int) -> complex:
        return complex(self.xs[col], self.ys[row])

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        offset = complex(z) - self.center
        slack = 1e-12 * (1.0 + self.half_width)
        return (
            abs(offset.real) <= self.half_width_x - margin + slack
            and abs(offset.imag) <= self.half_width_y - margin + slack
        )

    def boundary_distance(self) -> np.ndarray:
        offset = self.points() - self.center
        return np.minimum(self.half_width_x - np.abs(offset.real), self.half_width_y - np.abs(offset.imag))

    def interior_mask(self, margin: float) -> np.ndarray:
        return self.boundary_distance() >= margin - 1e-12 * (1.0 + self.half_width)

    def shrink(self, nodes: int) -> "GridDomain":
        """Concentric sub-grid obtained by dropping ``nodes`` rings of boundary nodes."""
        if nodes < 0 or self.resolution - 2 * nodes < 3:
            raise FieldError(f"Cannot shrink a {self.resolution}-node grid by {nodes} rings")
        return GridDomain(
            center=self.center,
            half_width_x=self.half_width_x - nodes * self.spacing_x,
            half_width_y=self.half_width_y - nodes * self.spacing_y,
            resolution=self.resolution - 2 * nodes,
        )

    def with_resolution(self, resolution: int) -> "GridDomain":
        return GridDomain(self.center, self.half_width_x, self.half_width_y, resolution)

    def to_dict(self) -> Dict[str, object]:
        return {
            "center": point_to_dict(self.center),
            "half_widths": [self.half_width_x, self.half_width_y],
            "resolution": self.resolution,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "GridDomain":
        widths = payload.get("half_widths", payload.get("half_width", 1.0))
        if isinstance(widths, (list, tuple)):
            hx, hy = float(widths[0]), float(widths[1])
        else:
            hx = hy = float(widths)
        return cls(
            center=point_from_dict(payload.get("center", 0.0)),
            half_width_x=hx,
            half_width_y=hy,
            resolution=int(payload.get("resolution", 65)),
        )


def default_fd_step(domain: Optional[GridDomain], factor: float = 1e-4, floor: float = 1e-5) -> float:
    """Finite-difference step: ``factor`` × the domain half-width, never below ``floor``."""
    if domain is None:
        return max(factor, floor)
    return max(factor * domain.half_width, floor)


def _as_matrix(value: MatrixLike) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise FieldError(f"Expected a matrix, got array of shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class MatrixPolyField:
    """``Σ C[j, k] s^j s̄^k`` with ``coeffs`` of shape ``(n, n, rows, cols)``."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=complex)
        if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise FieldError(f"Coefficient table must have shape (n, n, rows, cols), got {arr.shape}")
        if arr.shape[2] < 1 or arr.shape[3] < 1:
            raise FieldError("Fields need at least one row and one column")
        if not np.all(np.isfinite(arr)):
            raise FieldError("Coefficient table contains non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    # -- construction -------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int, size: int = 1) -> "MatrixPolyField":
        return cls(np.zeros((size, size, rows, cols), dtype=complex))

    @classmethod
    def constant(cls, matrix: MatrixLike) -> "MatrixPolyField":
        mat = _as_matrix(matrix)
        return cls(mat[None, None, :, :])

    @classmethod
    def identity(cls, rank: int) -> "MatrixPolyField":
        return cls.constant(np.eye(rank, dtype=complex))

    @classmethod
    def from_terms(cls, terms: Mapping[Bidegree, MatrixLike]) -> "MatrixPolyField":
        """Build a field from ``{(j, k): matrix}``; scalars give a 1×1 field."""
        if not terms:
            raise FieldError("At least one term is required")
        mats = {(int(j), int(k)): _as_matrix(m) for (j, k), m in terms.items()}
        shapes = {m.shape for m in mats.values()}
        if len(shapes) != 1:
            raise FieldError(f"Inconsistent coefficient shapes: {sorted(shapes)}")
        rows, cols = shapes.pop()
        if any(j < 0 or k < 0 for j, k in mats):
            raise FieldError("Bidegrees must be non-negative")
        size = max(max(j, k) for j, k in mats) + 1
        table = np.zeros((size, size, rows, cols), dtype=complex)
        for (j, k), mat in mats.items():
            table[j, k] += mat
        return cls(table)

    @classmethod
    def block_diagonal(cls, blocks: Sequence["MatrixPolyField"]) -> "MatrixPolyField":
        size = max(b.size for b in blocks)
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        table = np.zeros((size, size, rows, cols), dtype=complex)
        r = c = 0
        for block in blocks:
            padded = block.padded(size).coeffs
            table[:, :, r : r + block.rows, c : c + block.cols] = padded
            r += block.rows
            c += block.cols
        return cls(table)

    # -- shape --------------------------------------------------------

    @property
    def size(self) -> int:
        return self.coeffs.shape[0]

    @property
    def rows(self) -> int:
        return self.coeffs.shape[2]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[3]

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def _support(self) -> np.ndarray:
        return np.any(self.coeffs != 0, axis=(2, 3))

    @property
    def degree(self) -> int:
        """Maximum total degree ``j + k`` over non-zero coefficients."""
        js, ks = np.nonzero(self._support())
        return int((js + ks).max()) if js.size else 0

    def terms(self) -> Iterator[Tuple[int, int, np.ndarray]]:
        for j, k in zip(*np.nonzero(self._support())):
            yield int(j), int(k), self.coeffs[j, k]

    def coefficient(self, j: int, k: int) -> np.ndarray:
        if j < self.size and k < self.size:
            return np.array(self.coeffs[j, k])
        return np.zeros(self.shape, dtype=complex)

    def padded(self, size: int) -> "MatrixPolyField":
        if size <= self.size:
            return self
        table = np.zeros((size, size, self.rows, self.cols), dtype=complex)
        table[: self.size, : self.size] = self.coeffs
        return MatrixPolyField(table)

    def trimmed(self) -> "MatrixPolyField":
        js, ks = np.nonzero(self._support())
        size = int(max(js.max(), ks.max())) + 1 if js.size else 1
        if size == self.size:
            return self
        return MatrixPolyField(self.coeffs[:size, :size])

    # -- predicates ---------------------------------------------------

    def is_holomorphic(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs[:, 1:]) <= atol))

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= atol))

    def hermitian_defect(self) -> float:
        """Relative size of ``C[j, k] - C[k, j]*`` over the table."""
        if self.rows != self.cols:
            return math.inf
        scale = float(np.abs(self.coeffs).max())
        if scale == 0.0:
            return 0.0
        return float(np.abs(self.coeffs - self.adjoint().coeffs).max()) / scale

    def is_hermitian_symmetric(self, rtol: float = 1e-12) -> bool:
        return self.hermitian_defect() <= rtol

    # -- evaluation ---------------------------------------------------

    def evaluate(self, s: Union[complex, np.ndarray]) -> np.ndarray:
        """Values at ``s``; array input of shape ``S`` gives ``S + (rows, cols)``."""
        z = np.asarray(s, dtype=complex)
        if not np.all(np.isfinite(z)):
            raise FieldError("Evaluation points must be finite")
        flat = z.reshape(-1)
        n, r, c = self.size, self.rows, self.cols
        powers = np.vander(flat, n, increasing=True)
        partial = (powers @ self.coeffs.reshape(n, n * r * c)).reshape(-1, n, r, c)
        values = np.einsum("pk,pkrc->prc", np.conj(powers), partial)
        return values.reshape(z.shape + (r, c))

    def sample(self, domain: GridDomain) -> np.ndarray:
        return self.evaluate(domain.points())

    def sup_norm(self, domain: GridDomain) -> float:
        return float(np.abs(self.sample(domain)).max())

    # -- calculus -----------------------------------------------------

    def d_s(self) -> "MatrixPolyField":
        if self.size == 1:
            return MatrixPolyField.zeros(self.rows, self.cols)
        return MatrixPolyField(_d_table(self.coeffs, axis=0)).trimmed()

    def d_sbar(self) -> "MatrixPolyField":
        if self.size == 1:
            return MatrixPolyField.zeros(self.rows, self.cols)
        return MatrixPolyField(_d_table(self.coeffs, axis=1)).trimmed()

    def wirtinger(self, which: str) -> "MatrixPolyField":
        if which == "s":
            return self.d_s()
        if which == "sbar":
            return self.d_sbar()
        raise FieldError(f"Unknown Wirtinger direction '{which}', expected one of {WIRTINGER}")

    # -- algebra ------------------------------------------------------

    def _check_same_shape(self, other: "MatrixPolyField") -> None:
        if self.shape != other.shape:
            raise FieldError(f"Shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "MatrixPolyField") -> "MatrixPolyField":
        self._check_same_shape(other)
        size = max(self.size, other.size)
        return MatrixPolyField(self.padded(size).coeffs + other.padded(size).coeffs)

    def __sub__(self, other: "MatrixPolyField") -> "MatrixPolyField":
        return self + (-other)

    def __neg__(self) -> "MatrixPolyField":
        return MatrixPolyField(-self.coeffs)

    def __mul__(self, scalar: complex) -> "MatrixPolyField":
        if isinstance(scalar, MatrixPolyField):
            return NotImplemented
        return MatrixPolyField(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixPolyField") -> "MatrixPolyField":
        """Pointwise matrix product of two fields."""
        if self.cols != other.rows:
            raise FieldError(f"Cannot multiply {self.shape} by {other.shape}")
        na, nb = self.size, other.size
        size = na + nb - 1
        out = np.zeros((size, size, self.rows, other.cols), dtype=complex)
        left_terms = list(self.terms())
        right_terms = list(other.terms())
        if len(left_terms) <= len(right_terms):
            for j, k, mat in left_terms:
                out[j : j + nb, k : k + nb] += np.matmul(mat, other.coeffs)
        else:
            for j, k, mat in right_terms:
                out[j : j + na, k : k + na] += np.matmul(self.coeffs, mat)
        return MatrixPolyField(out).trimmed()

    def scaled_by(self, scalar_field: "MatrixPolyField") -> "MatrixPolyField":
        """Product with a 1×1 field ``u``: the field ``u(s)·F(s)``."""
        if scalar_field.shape != (1, 1):
            raise FieldError("scaled_by expects a 1x1 scalar field")
        nu, nf = scalar_field.size, self.size
        size = nu + nf - 1
        out = np.zeros((size, size, self.rows, self.cols), dtype=complex)
        for j, k, mat in scalar_field.terms():
            out[j : j + nf, k : k + nf] += mat[0, 0] * self.coeffs
        return MatrixPolyField(out).trimmed()

    def adjoint(self) -> "MatrixPolyField":
        """The field ``s ↦ F(s)*``."""
        return MatrixPolyField(np.conj(np.transpose(self.coeffs, (1, 0, 3, 2))))

    def truncate(self, max_degree: int) -> "MatrixPolyField":
        j = np.arange(self.size)
        keep = (j[:, None] + j[None, :]) <= max_degree
        return MatrixPolyField(self.coeffs * keep[:, :, None, None]).trimmed()

    def shift(self, c: complex) -> "MatrixPolyField":
        """The field ``t ↦ F(t + c)`` (re-expansion about ``-c``)."""
        c = as_point(c)
        if c == 0:
            return self
        n = self.size
        j = np.arange(n)
        exponent = j[:, None] - j[None, :]
        valid = exponent >= 0
        binom = np.where(valid, comb(j[:, None], j[None, :]), 0.0)
        safe = np.where(valid, exponent, 0)
        expand = binom * np.power(c, safe)
        expand_bar = binom * np.power(np.conj(c), safe)
        return MatrixPolyField(np.einsum("ja,kb,jkrc->abrc", expand, expand_bar, self.coeffs))

    # -- serialization ------------------------------------------------

    def to_dict(self) -> Dict[str, object]:
        terms = []
        for j, k, mat in self.terms():
            terms.append(
                {
                    "j": j,
                    "k": k,
                    "matrix": [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in mat],
                }
            )
        return {"rows": self.rows, "cols": self.cols, "coeffs": terms}

    @classmethod
    def from_dict(cls, payload: Mapping[str, object]) -> "MatrixPolyField":
        try:
            rows = int(payload["rows"])
            cols = int(payload["cols"])
            entries = payload.get("coeffs", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise FieldError(f"Malformed field payload: {exc}") from exc
        terms: Dict[Bidegree, np.ndarray] = {}
        for entry in entries:
            j, k = int(entry["j"]), int(entry["k"])
            matrix = np.array(
                [[_complex_entry(v) for v in row] for row in entry["matrix"]],
                dtype=complex,
            ).reshape(rows, cols)
            terms[(j, k)] = terms.get((j, k), 0) + matrix
        if not terms:
            return cls.zeros(rows, cols)
        return cls.from_terms(terms)


def _complex_entry(value: object) -> complex:
    if isinstance(value, Mapping):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)):
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _d_table(coeffs: np.ndarray, axis: int) -> np.ndarray:
    """Power rule on one axis of a coefficient table (size preserved)."""
    n = coeffs.shape[0]
    out = np.zeros_like(coeffs)
    scale = np.arange(1, n, dtype=float)
    if axis == 0:
        out[:-1] = coeffs[1:] * scale[:, None, None, None]
    else:
        out[:, :-1] = coeffs[:, 1:] * scale[None, :, None, None]
    return out


def scalar_field(terms: Mapping[Bidegree, complex]) -> MatrixPolyField:
    """1×1 field from ``{(j, k): coefficient}``."""
    return MatrixPolyField.from_terms({key: [[value]] for key, value in terms.items()})


def random_holomorphic_field(
    rng: np.random.Generator,
    rows: int,
    cols: int,
    degree: int = 2,
    scale: float = 1.0,
) -> MatrixPolyField:
    """Holomorphic field with complex normal coefficients; the ``s^j`` term is damped by ``1/(j+1)``."""
    terms = {}
    for j in range(degree + 1):
        noise = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        terms[(j, 0)] = scale * noise / (np.sqrt(2.0) * (j + 1))
    return MatrixPolyField.from_terms(terms)


def modulus_squared(center: complex = 0j) -> MatrixPolyField:
    """The scalar field ``|s - center|²``."""
    c = as_point(center)
    return scalar_field({(1, 1): 1.0, (1, 0): -np.conj(c), (0, 1): -c, (0, 0): abs(c) ** 2})


def exp_surrogate(u: MatrixPolyField, order: int = 10) -> MatrixPolyField:
    """Truncated series ``Σ_{k ≤ order} u^k / k!`` of a scalar field (Horner form)."""
    if u.shape != (1, 1):
        raise FieldError("exp_surrogate expects a 1x1 scalar field")
    if order < 0:
        raise FieldError("order must be non-negative")
    one = MatrixPolyField.identity(1)
    result = one
    for k in range(order, 0, -1):
        result = one + (u @ result) * (1.0 / k)
    return result


def exp_order_for(bound: float, tolerance: float = 1e-15, minimum: int = 4) -> int:
    """Smallest order whose relative tail ``b^{N+1}/(N+1)! · e^{2b}`` is below ``tolerance``."""
    bound = abs(float(bound))
    order = max(minimum, 1)
    while order < 200:
        tail = bound ** (order + 1) / float(factorial(order + 1)) * math.exp(2.0 * bound)
        if tail <= tolerance:
            return order
        order += 1
    return order


def eval_field(field: MatrixPolyField, s: complex) -> np.ndarray:
    """``Σ C[j,k] s^j s̄^k`` at a single point."""
    return field.evaluate(as_point(s))


def wirtinger_derivative(field: MatrixPolyField, which: str) -> MatrixPolyField:
    return field.wirtinger(which)


def fd_derivative(
    evaluator: Callable[[complex], object],
    s: complex,
    which: str,
    step: float,
    domain: Optional[GridDomain] = None,
) -> np.ndarray:
    """Central five-point stencil for ∂/∂s, ∂/∂s̄ or ∂²/∂s∂s̄ (O(step²) accurate).

    The stencil steps along ±step and ±i·step; when ``domain`` is given every
    stencil point must lie inside it.
    """
    if not step > 0:
        raise FieldError(f"Finite-difference step must be positive, got {step}")
    if which not in FD_DERIVATIVES:
        raise FieldError(f"Unknown derivative '{which}', expected one of {FD_DERIVATIVES}")
    z0 = as_point(s)
    offsets = {"east": step, "west": -step, "north": 1j * step, "south": -1j * step}
    if domain is not None:
        for offset in offsets.values():
            if not domain.contains(z0 + offset):
                raise StencilOutsideDomainError(z0 + offset)
    values = {name: np.asarray(evaluator(z0 + offset), dtype=complex) for name, offset in offsets.items()}
    if which == "s_sbar":
        values["center"] = np.asarray(evaluator(z0), dtype=complex)
    if not all(np.all(np.isfinite(v)) for v in values.values()):
        raise FieldError(f"Evaluator is not finite on the stencil around {z0!r}")
    if which == "s_sbar":
        total = values["east"] + values["west"] + values["north"] + values["south"] - 4.0 * values["center"]
        return total / (4.0 * step * step)
    d_x = (values["east"] - values["west"]) / (2.0 * step)
    d_y = (values["north"] - values["south"]) / (2.0 * step)
    if which == "s":
        return 0.5 * (d_x - 1j * d_y)
    return 0.5 * (d_x + 1j * d_y)


def circle_points(z0: complex, r: float, nodes: int) -> np.ndarray:
    tau = np.arange(nodes) / nodes
    return z0 + r * np.exp(2j * np.pi * tau)


def circle_average(u: Callable[[np.ndarray], np.ndarray], z0: complex, r: float, nodes: int = 64) -> float:
    """Trapezoid rule for ``∫₀¹ u(z0 + r e^{2πiτ}) dτ``; ``u`` must accept arrays."""
    if not r > 0:
        raise FieldError(f"Radius must be positive, got {r}")
    if nodes < 16:
        raise FieldError(f"At least 16 circle nodes are required, got {nodes}")
    z0 = as_point(z0)
    with np.errstate(all="ignore"):
        samples = np.asarray(u(circle_points(z0, r, nodes)), dtype=float)
    if not np.all(np.isfinite(samples)):
        raise InvalidCircleError(z0, r)
    return float(samples.mean())


@dataclass(eq=False)
class ScalarSampleField:
    """A real function sampled on a :class:`GridDomain`; ``mask`` flags defined nodes."""

    domain: GridDomain
    values: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        expected = (self.domain.resolution, self.domain.resolution)
        if values.shape != expected:
            raise FieldError(f"Sample array has shape {values.shape}, expected {expected}")
        mask = np.isfinite(values) if self.mask is None else np.array(self.mask, dtype=bool)
        if mask.shape != expected:
            raise FieldError(f"Mask has shape {mask.shape}, expected {expected}")
        if not np.all(np.isfinite(values[mask])):
            raise FieldError("Sample values must be finite wherever the mask is set")
        values[~mask] = np.nan
        self.values = values
        self.mask = mask

    @classmethod
    def from_function(cls, domain: GridDomain, func: Callable[[np.ndarray], np.ndarray]) -> "ScalarSampleField":
        with np.errstate(all="ignore"):
            values = np.asarray(func(domain.points()), dtype=float)
        return cls(domain=domain, values=values, mask=np.isfinite(values))

    @property
    def spacing(self) -> float:
        return self.domain.spacing

    def any_valid(self) -> bool:
        return bool(self.mask.any())

    def log(self) -> "ScalarSampleField":
        positive = self.mask & (np.nan_to_num(self.values, nan=0.0) > 0.0)
        with np.errstate(all="ignore"):
            logged = np.where(positive, np.log(np.where(positive, self.values, 1.0)), np.nan)
        return ScalarSampleField(self.domain, logged, positive)

    def interpolator(self, method: str = "linear") -> Callable[[np.ndarray], np.ndarray]:
        """Grid interpolant returning NaN outside the domain or next to masked nodes."""
        interp = RegularGridInterpolator(
            (self.domain.ys, self.domain.xs),
            self.values,
            method=method,
            bounds_error=False,
            fill_value=np.nan,
        )

        def evaluate(z: np.ndarray) -> np.ndarray:
            z = np.asarray(z, dtype=complex)
            query = np.stack([z.imag.reshape(-1), z.real.reshape(-1)], axis=-1)
            return interp(query).reshape(z.shape)

        return evaluate

    def rows(self) -> Iterator[Tuple[float, float, float]]:
        points = self.domain.points()
        for row in range(self.domain.resolution):
            for col in range(self.domain.resolution):
                z = points[row, col]
                yield float(z.real), float(z.imag), float(self.values[row, col])
