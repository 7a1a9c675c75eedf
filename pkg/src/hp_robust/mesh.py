"""hp-meshes of an interval: breakpoints plus one polynomial degree per element.

Elements are indexed 0..N-1 from left to right, nodes 0..N; element ``j`` is
the interval (x_j, x_{j+1}).
"""
import csv
import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInput


class Refinement(enum.Enum):
    BISECT = "bisect"
    RAISE_DEGREE = "raise_degree"


@dataclass(frozen=True)
class RefinementDecision:
    element: int
    kind: Refinement


class HpMesh:
    """Immutable hp-mesh.

    Args:
        breakpoints: strictly increasing x_0 < ... < x_N.
        degrees: N integers >= 1.
    """

    __slots__ = ("breakpoints", "degrees")

    def __init__(self, breakpoints, degrees):
        x = np.array(breakpoints, dtype=np.float64)
        p = np.array(degrees, dtype=np.int64)
        if x.ndim != 1 or x.size < 2:
            raise InvalidInput("need at least two breakpoints")
        if p.shape != (x.size - 1,):
            raise InvalidInput(f"expected {x.size - 1} degrees, got {p.size}")
        if not np.all(np.diff(x) > 0):
            raise InvalidInput("breakpoints must be strictly increasing")
        if np.any(p < 1):
            raise InvalidInput("degrees must be >= 1")
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "degrees", p)

    def __setattr__(self, name, value):
        raise AttributeError("HpMesh is immutable")

    def __eq__(self, other):
        if not isinstance(other, HpMesh):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.degrees, other.degrees))

    def __hash__(self):
        return hash((self.breakpoints.tobytes(), self.degrees.tobytes()))

    def __repr__(self):
        return f"HpMesh(n_elements={self.n_elements}, max_degree={self.max_degree})"

    @property
    def n_elements(self):
        return self.degrees.size

    @property
    def h(self):
        return np.diff(self.breakpoints)

    @property
    def max_degree(self):
        return int(self.degrees.max())

    @property
    def n_dofs(self):
        """Free DOFs: interior vertices plus bubbles."""
        return int(self.n_elements - 1 + np.sum(self.degrees - 1))

    @property
    def domain(self):
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def element(self, j):
        """(x_left, x_right, degree) of element ``j``."""
        self._check_index(j)
        return float(self.breakpoints[j]), float(self.breakpoints[j + 1]), int(self.degrees[j])

    def _check_index(self, j):
        if not 0 <= j < self.n_elements:
            raise IndexError(f"element index {j} out of range [0, {self.n_elements})")

    def records(self):
        """One (x_left, x_right, degree) tuple per element."""
        return [self.element(j) for j in range(self.n_elements)]


def uniform_mesh(a, b, n, p):
    if not a < b:
        raise DomainError(f"empty interval ({a}, {b})")
    if n < 1 or p < 1:
        raise InvalidInput("need n >= 1 elements of degree p >= 1")
    return HpMesh(np.linspace(a, b, n + 1), np.full(n, p))


def patch(mesh, j):
    """Indices of element ``j`` and its neighbours."""
    mesh._check_index(j)
    return {i for i in (j - 1, j, j + 1) if 0 <= i < mesh.n_elements}


def patch_interval(mesh, j):
    idx = patch(mesh, j)
    return float(mesh.breakpoints[min(idx)]), float(mesh.breakpoints[max(idx) + 1])


def shape_regularity(mesh):
    """Smallest mu with neighbouring h and p ratios in [1/mu, mu]."""
    if mesh.n_elements == 1:
        return 1.0
    h = mesh.h
    p = mesh.degrees.astype(np.float64)
    hr = h[1:] / h[:-1]
    hr = np.maximum(hr, 1 / hr)
    # linspace spacings differ in the last bits; those ratios count as 1.
    hr[hr - 1.0 < 64 * np.finfo(float).eps] = 1.0
    pr = p[1:] / p[:-1]
    return float(max(np.max(hr), np.max(np.maximum(pr, 1 / pr))))


def apply_refinements(mesh, decisions):
    """New mesh after bisecting or p-enriching the listed elements."""
    by_elem = {}
    for d in decisions:
        mesh._check_index(d.element)
        if d.element in by_elem:
            raise InvalidInput(f"duplicate decision for element {d.element}")
        by_elem[d.element] = d.kind
    if not by_elem:
        return mesh
    x = mesh.breakpoints
    new_x = [x[0]]
    new_p = []
    for j, pj in enumerate(mesh.degrees):
        kind = by_elem.get(j)
        if kind is Refinement.BISECT:
            new_x.append(0.5 * (x[j] + x[j + 1]))
            new_p.append(pj)
        elif kind is Refinement.RAISE_DEGREE:
            pj = pj + 1
        new_x.append(x[j + 1])
        new_p.append(pj)
    return HpMesh(new_x, new_p)


def write_mesh_csv(mesh, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_left", "x_right", "degree"])
        for xl, xr, p in mesh.records():
            w.writerow([repr(xl), repr(xr), p])


def read_mesh_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    x = [float(rows[0]["x_left"])] + [float(r["x_right"]) for r in rows]
    return HpMesh(x, [int(r["degree"]) for r in rows])
