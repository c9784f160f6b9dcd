"""Linear 1-D finite elements: mesh, quadrature, tridiagonal assembly and solves.

Every operator in the conductor model couples nearest neighbours only, so
global matrices are stored as three arrays (sub-, main and super-diagonal).
Element integrals use 2-point Gauss quadrature with coefficients given at
the quadrature points; ``Mesh1D.at_qp`` interpolates nodal fields there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import lapack

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class MeshError(ValueError):
    """Raised when a mesh cannot be built from the requested geometry."""


class SingularSystemError(RuntimeError):
    """Raised when tridiagonal elimination hits a zero pivot."""

    def __init__(self, pivot: int, msg: str = ""):
        self.pivot = pivot
        super().__init__(msg or f"singular tridiagonal system: zero pivot at index {pivot}")

    def __reduce__(self):
        return (type(self), (self.pivot, str(self)))


@dataclass(frozen=True)
class ElementQuadrature:
    """Gauss rule on the reference element [-1, 1] with linear shape functions."""

    points: np.ndarray
    weights: np.ndarray
    N: np.ndarray = field(init=False, repr=False)  # (n_qp, 2): N1, N2 at each point

    def __post_init__(self):
        xi = self.points
        object.__setattr__(self, "N", np.stack([0.5 * (1.0 - xi), 0.5 * (1.0 + xi)], axis=1))

    @property
    def dN_dxi(self) -> np.ndarray:
        return np.array([-0.5, 0.5])

    def dN_dx(self, h):
        """Physical shape-function derivatives for element length(s) ``h``."""
        h = np.asarray(h, dtype=float)
        return np.stack([-1.0 / h, 1.0 / h], axis=-1)


GAUSS2 = ElementQuadrature(
    points=np.array([-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0)]),
    weights=np.array([1.0, 1.0]),
)


@dataclass(frozen=True)
class Mesh1D:
    length: float
    n_elements: int
    node_x: np.ndarray
    area: np.ndarray
    surf_per_len: np.ndarray
    quadrature: ElementQuadrature = GAUSS2
    h: np.ndarray = field(init=False, repr=False)
    jw: np.ndarray = field(init=False, repr=False)
    area_qp: np.ndarray = field(init=False, repr=False)
    surf_qp: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = self.node_x
        if x.shape != (self.n_elements + 1,):
            raise MeshError("node_x must have n_elements + 1 entries")
        if np.any(np.diff(x) <= 0.0):
            raise MeshError("node coordinates must be strictly increasing")
        object.__setattr__(self, "h", np.diff(x))
        # quadrature weight times Jacobian, (n_el, n_qp)
        object.__setattr__(self, "jw", np.outer(0.5 * self.h, self.quadrature.weights))
        object.__setattr__(self, "area_qp", self.at_qp(self.area))
        object.__setattr__(self, "surf_qp", self.at_qp(self.surf_per_len))

    @property
    def n_nodes(self) -> int:
        return self.n_elements + 1

    @property
    def mid_node(self) -> int:
        return int(np.argmin(np.abs(self.node_x - 0.5 * self.length)))

    def at_qp(self, nodal) -> np.ndarray:
        """Linear interpolation of a nodal vector to quadrature points, shape (n_el, n_qp)."""
        nodal = np.asarray(nodal, dtype=float)
        N = self.quadrature.N
        return nodal[:-1, None] * N[:, 0] + nodal[1:, None] * N[:, 1]

    def gradient(self, nodal) -> np.ndarray:
        """Element-wise derivative of a nodal field (constant on each linear element)."""
        return np.diff(nodal) / self.h

    def nodal_gradient(self, nodal) -> np.ndarray:
        """Derivative at nodes: mean of adjacent element gradients, one-sided at the ends."""
        g = self.gradient(nodal)
        out = np.empty(self.n_nodes)
        out[0] = g[0]
        out[-1] = g[-1]
        out[1:-1] = 0.5 * (g[:-1] + g[1:])
        return out

    def integrate(self, values_qp) -> float:
        """Integral over the line of a field given at quadrature points."""
        w = self.quadrature.weights
        return float(np.sum(values_qp @ w * 0.5 * self.h))


def area_profile(x, L: float, A0: float, A_sigma: float) -> np.ndarray:
    """Cross-section with a Gaussian notch centred at L/2."""
    x = np.asarray(x, dtype=float)
    if np.isinf(A_sigma):
        return np.full_like(x, A0)
    notch = np.exp(-((x - 0.5 * L) ** 2) / (2.0 * A_sigma**2)) * INV_SQRT_2PI / A_sigma
    return A0 * (1.0 - notch)


def build_mesh(L: float, n_elements: int, A0: float, A_sigma: float) -> Mesh1D:
    if n_elements < 2:
        raise MeshError(f"need at least 2 elements, got {n_elements}")
    if L <= 0 or A0 <= 0:
        raise MeshError("length and nominal area must be positive")
    if not A_sigma > INV_SQRT_2PI:
        raise MeshError(
            f"A_sigma={A_sigma!r} gives a non-positive cross-section at the centre; "
            f"it must exceed 1/sqrt(2*pi) = {INV_SQRT_2PI:.4f}"
        )
    x = np.linspace(0.0, L, n_elements + 1)
    area = area_profile(x, L, A0, A_sigma)
    if np.any(area <= 0.0):
        raise MeshError(f"non-positive area for A_sigma={A_sigma!r}")
    diameter = np.sqrt(4.0 * area / np.pi)
    return Mesh1D(
        length=float(L),
        n_elements=int(n_elements),
        node_x=x,
        area=area,
        surf_per_len=np.pi * diameter,
    )


@dataclass
class LinearSystem:
    """Tridiagonal system: ``lower[i] = A[i+1, i]``, ``upper[i] = A[i, i+1]``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "LinearSystem":
        return cls(np.zeros(n - 1), np.zeros(n), np.zeros(n - 1), np.zeros(n))

    @property
    def n(self) -> int:
        return self.diag.size

    def copy(self) -> "LinearSystem":
        return LinearSystem(self.lower.copy(), self.diag.copy(), self.upper.copy(), self.rhs.copy())

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def matvec(self, x) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y

    def __add__(self, other: "LinearSystem") -> "LinearSystem":
        return LinearSystem(
            self.lower + other.lower,
            self.diag + other.diag,
            self.upper + other.upper,
            self.rhs + other.rhs,
        )


@dataclass
class ElementKernel:
    """Integrand coefficients at quadrature points, each of shape (n_el, n_qp).

    ``stiffness`` multiplies B^T B, ``mass`` multiplies N^T N, ``load_n`` and
    ``load_b`` multiply N and B in the right-hand side.  Missing terms are zero.
    """

    stiffness: Optional[np.ndarray] = None
    mass: Optional[np.ndarray] = None
    load_n: Optional[np.ndarray] = None
    load_b: Optional[np.ndarray] = None


def assemble(mesh: Mesh1D, kernel: ElementKernel) -> LinearSystem:
    N = mesh.quadrature.N
    jw = mesh.jw
    n = mesh.n_nodes
    diag = np.zeros(n)
    off = np.zeros(n - 1)
    rhs = np.zeros(n)

    if kernel.stiffness is not None:
        s = np.sum(kernel.stiffness * jw, axis=1) / mesh.h**2
        diag[:-1] += s
        diag[1:] += s
        off -= s
    if kernel.mass is not None:
        mw = kernel.mass * jw
        diag[:-1] += mw @ (N[:, 0] * N[:, 0])
        diag[1:] += mw @ (N[:, 1] * N[:, 1])
        off += mw @ (N[:, 0] * N[:, 1])
    if kernel.load_n is not None:
        fw = kernel.load_n * jw
        rhs[:-1] += fw @ N[:, 0]
        rhs[1:] += fw @ N[:, 1]
    if kernel.load_b is not None:
        bw = np.sum(kernel.load_b * jw, axis=1) / mesh.h
        rhs[:-1] -= bw
        rhs[1:] += bw
    return LinearSystem(off, diag, off.copy(), rhs)


def lumped_mass(mesh: Mesh1D, coeff_qp=None) -> np.ndarray:
    """Row-sum lumped mass ``sum_j int c N_i N_j dx`` (= ``int c N_i dx``)."""
    c = mesh.area_qp if coeff_qp is None else coeff_qp
    return assemble(mesh, ElementKernel(load_n=c)).rhs


def apply_dirichlet(sys: LinearSystem, node: int, value: float) -> LinearSystem:
    """Impose ``x[node] = value`` at an end node, keeping the matrix symmetric."""
    n = sys.n
    if node < 0:
        node += n
    if node not in (0, n - 1):
        raise ValueError(f"Dirichlet conditions are only supported at end nodes, got node {node}")
    out = sys.copy()
    if node == 0:
        out.rhs[1] -= out.lower[0] * value
        out.lower[0] = 0.0
        out.upper[0] = 0.0
    else:
        out.rhs[n - 2] -= out.upper[n - 2] * value
        out.upper[n - 2] = 0.0
        out.lower[n - 2] = 0.0
    out.diag[node] = 1.0
    out.rhs[node] = value
    return out


def solve_tridiagonal(sys: LinearSystem) -> np.ndarray:
    """Gaussian elimination with partial pivoting (LAPACK ``dgtsv``)."""
    if sys.n == 1:
        if sys.diag[0] == 0.0:
            raise SingularSystemError(0)
        return sys.rhs / sys.diag
    *_, x, info = lapack.dgtsv(sys.lower, sys.diag, sys.upper, sys.rhs[:, None])
    if info > 0:
        raise SingularSystemError(info - 1)
    if info < 0:
        raise ValueError(f"illegal argument {-info} passed to dgtsv")
    return x[:, 0]
