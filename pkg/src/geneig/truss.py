"""Ground-structure trusses and their stiffness/mass pencils.

Builds planar ground structures (dense candidate member sets on node
grids), assembles per-member stiffness and consistent-mass matrices
reduced to free dofs, and packages the eigenfrequency problem as the
affine pencil (-K(x), M(x) + M0) over a volume-capped box of
cross-sectional areas.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .feasible import FeasibleSet
from .pencil import AffinePencil

__all__ = [
    "UnderConstrained",
    "DofOutOfRange",
    "PointMass",
    "GroundStructure",
    "TrussModel",
    "TrussProblem",
    "generate_grid",
    "assemble",
    "canonical_problem",
    "canonical_instance",
    "truss_to_dict",
    "truss_from_dict",
    "save_truss_json",
    "load_truss_json",
    "design_to_csv",
    "design_to_svg",
]


class UnderConstrained(Exception):
    """Too few fixed dofs to suppress planar rigid-body motion."""


class DofOutOfRange(Exception):
    """A dof or node index does not exist in the structure."""


@dataclass(frozen=True)
class PointMass:
    """Non-structural mass (kg) lumped on one node."""

    node: int
    mass: float


def _member_has_interior_node(p_i, p_j, nodes, skip, tol):
    """True if any node other than the endpoints lies on the open segment."""
    d = p_j - p_i
    length = float(np.hypot(d[0], d[1]))
    rel = nodes - p_i
    t = (rel @ d) / (length * length)
    # perpendicular distance via the 2-D cross product
    dist = np.abs(rel[:, 0] * d[1] - rel[:, 1] * d[0]) / length
    margin = tol / length
    on = (dist <= tol) & (t > margin) & (t < 1.0 - margin)
    on[list(skip)] = False
    return bool(on.any())


@dataclass(frozen=True)
class GroundStructure:
    """Planar truss geometry reduced to candidate members.

    Parameters
    ----------
    nodes : (N, 2) ndarray
        Node coordinates in meters.
    fixed_dofs : sequence of int
        Constrained global dof indices (node i owns dofs 2i, 2i+1).
    members : sequence of (i, j)
        Candidate bars as unordered node pairs.

    Lengths are computed on construction. Members must be unique,
    have positive length, and must not pass through another node
    (each candidate bar connects exactly two nodes).
    """

    nodes: np.ndarray
    fixed_dofs: tuple
    members: tuple

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2 or nodes.shape[0] < 2:
            raise ValueError("nodes must be an (N, 2) array with N >= 2")
        N = nodes.shape[0]

        fixed = tuple(sorted(int(d) for d in self.fixed_dofs))
        if len(set(fixed)) != len(fixed):
            raise ValueError("duplicate fixed dof")
        for d in fixed:
            if not 0 <= d < 2 * N:
                raise DofOutOfRange(f"fixed dof {d} out of range for {N} nodes")

        members = []
        seen = set()
        for pair in self.members:
            i, j = int(pair[0]), int(pair[1])
            if not (0 <= i < N and 0 <= j < N):
                raise DofOutOfRange(f"member node index out of range: ({i}, {j})")
            if i == j:
                raise ValueError(f"degenerate member ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate member {key}")
            seen.add(key)
            members.append(key)
        members = tuple(members)

        lengths = np.array(
            [np.hypot(*(nodes[j] - nodes[i])) for i, j in members], dtype=float
        )
        if members and not np.all(lengths > 0):
            raise ValueError("zero-length member")
        for (i, j), l_e in zip(members, lengths):
            if _member_has_interior_node(
                nodes[i], nodes[j], nodes, (i, j), 1e-9 * l_e
            ):
                raise ValueError(f"member ({i}, {j}) passes through another node")

        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "fixed_dofs", fixed)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "lengths", lengths)
        free = tuple(d for d in range(2 * N) if d not in set(fixed))
        object.__setattr__(self, "free_dofs", free)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        """Number of free dofs (pencil order)."""
        return len(self.free_dofs)


_EDGE_SELECTORS = ("left", "right", "bottom", "top")


def _resolve_fixed_nodes(selector, gx, gy):
    if isinstance(selector, str):
        if selector not in _EDGE_SELECTORS:
            raise ValueError(f"unknown edge selector {selector!r}")
        idx = []
        for iy in range(gy):
            for ix in range(gx):
                hit = {
                    "left": ix == 0,
                    "right": ix == gx - 1,
                    "bottom": iy == 0,
                    "top": iy == gy - 1,
                }[selector]
                if hit:
                    idx.append(iy * gx + ix)
        return idx
    return [int(i) for i in selector]


def _candidate_members(nodes: np.ndarray) -> tuple:
    """All node pairs whose open segment contains no other node."""
    kept = []
    for i, j in combinations(range(nodes.shape[0]), 2):
        l_e = float(np.hypot(*(nodes[j] - nodes[i])))
        if l_e <= 0:
            continue
        if not _member_has_interior_node(
            nodes[i], nodes[j], nodes, (i, j), 1e-9 * l_e
        ):
            kept.append((i, j))
    return tuple(kept)


def _as_point_masses(mass_nodes, num_nodes, fixed_dofs) -> tuple:
    fixed = set(fixed_dofs)
    out = []
    for item in mass_nodes:
        if isinstance(item, PointMass):
            node, mass = item.node, item.mass
        elif isinstance(item, dict):
            node, mass = item["node"], item["mass"]
        else:
            node, mass = item
        node = int(node)
        mass = float(mass)
        if not 0 <= node < num_nodes:
            raise DofOutOfRange(f"point-mass node {node} out of range")
        if mass <= 0 or not np.isfinite(mass):
            raise ValueError("point mass must be positive and finite")
        if 2 * node in fixed and 2 * node + 1 in fixed:
            raise ValueError(f"point mass on fully fixed node {node} has no effect")
        out.append(PointMass(node, mass))
    return tuple(out)


def generate_grid(gx, gy, spacing=1.0, fixed_nodes="left", mass_nodes=()):
    """Dense ground structure on a gx-by-gy node grid.

    Node ``iy*gx + ix`` sits at (ix*spacing, iy*spacing). Members are
    all node pairs except those passing through an intermediate grid
    node. ``fixed_nodes`` is an edge name ("left", "right", "bottom",
    "top") or an iterable of node indices; both dofs of each selected
    node are constrained. ``mass_nodes`` is a list of (node, mass)
    pairs, validated and returned alongside the structure.

    Returns (GroundStructure, tuple of PointMass).
    """
    gx, gy = int(gx), int(gy)
    if gx < 1 or gy < 1 or gx * gy < 2:
        raise ValueError("grid needs at least two nodes")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValueError("spacing must be positive")

    nodes = np.array(
        [(ix * spacing, iy * spacing) for iy in range(gy) for ix in range(gx)],
        dtype=float,
    )
    fixed_idx = _resolve_fixed_nodes(fixed_nodes, gx, gy)
    for i in fixed_idx:
        if not 0 <= i < gx * gy:
            raise DofOutOfRange(f"fixed node {i} out of range")
    fixed_dofs = sorted({d for i in fixed_idx for d in (2 * i, 2 * i + 1)})
    if len(fixed_dofs) < 3:
        raise UnderConstrained(
            "need at least 3 fixed dofs to remove planar rigid-body modes"
        )

    gs = GroundStructure(nodes, tuple(fixed_dofs), _candidate_members(nodes))
    masses = _as_point_masses(mass_nodes, gx * gy, fixed_dofs)
    return gs, masses


@dataclass(frozen=True)
class TrussModel:
    """Assembled finite-element data on free dofs.

    K (m, n, n) holds per-member unit-area stiffness matrices, M the
    consistent mass matrices, M0 the diagonal non-structural mass.
    K(x) = sum_e x_e K[e], M(x) likewise.
    """

    structure: GroundStructure
    K: np.ndarray
    M: np.ndarray
    M0: np.ndarray
    E: float
    rho: float

    def stiffness(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("e,eij->ij", np.asarray(x, dtype=float), self.K)

    def mass(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("e,eij->ij", np.asarray(x, dtype=float), self.M) + self.M0


# consistent mass pattern per axis: (rho*l/6) * [2, 1; 1, 2]
_MASS_PATTERN = np.array(
    [
        [2.0, 0.0, 1.0, 0.0],
        [0.0, 2.0, 0.0, 1.0],
        [1.0, 0.0, 2.0, 0.0],
        [0.0, 1.0, 0.0, 2.0],
    ]
)


def assemble(gs: GroundStructure, E: float, rho: float, point_masses=()):
    """Element matrices on free dofs and the eigenfrequency pencil.

    Per member e of length l_e and unit direction c: global stiffness
    for unit area is (E/l_e) d d^T with d = (-c, c) on the member's
    four dofs, and the consistent mass is (rho l_e / 6)[2,1;1,2] per
    axis. Fixed rows/columns are deleted, so every matrix is n-by-n
    with n the free-dof count. Point masses land on the diagonal of
    M0 at both dofs of their node.

    Returns (TrussModel, AffinePencil) with A_e = -K_e, B_e = M_e,
    B0 = M0, A0 = 0: eigenvalues are -omega^2, so minimizing the
    largest of (-K, M + M0) maximizes the fundamental frequency.
    """
    if not (np.isfinite(E) and E > 0):
        raise ValueError("E must be positive")
    if not (np.isfinite(rho) and rho > 0):
        raise ValueError("rho must be positive")

    N = gs.num_nodes
    n = gs.n
    glob2free = np.full(2 * N, -1, dtype=int)
    for k, d in enumerate(gs.free_dofs):
        glob2free[d] = k

    m = gs.m
    K = np.zeros((m, n, n))
    M = np.zeros((m, n, n))
    for e, (i, j) in enumerate(gs.members):
        l_e = gs.lengths[e]
        c = (gs.nodes[j] - gs.nodes[i]) / l_e
        d4 = np.array([-c[0], -c[1], c[0], c[1]])
        Ke4 = (E / l_e) * np.outer(d4, d4)
        Me4 = (rho * l_e / 6.0) * _MASS_PATTERN
        dofs = np.array([2 * i, 2 * i + 1, 2 * j, 2 * j + 1])
        fi = glob2free[dofs]
        keep = fi >= 0
        rows = fi[keep]
        K[e][np.ix_(rows, rows)] = Ke4[np.ix_(keep, keep)]
        M[e][np.ix_(rows, rows)] = Me4[np.ix_(keep, keep)]

    M0 = np.zeros((n, n))
    masses = _as_point_masses(point_masses, N, gs.fixed_dofs)
    for pm in masses:
        for d in (2 * pm.node, 2 * pm.node + 1):
            k = glob2free[d]
            if k >= 0:
                M0[k, k] += pm.mass

    model = TrussModel(gs, K, M, M0, float(E), float(rho))
    pencil = AffinePencil(A0=np.zeros((n, n)), A=-K, B0=M0, B=M)
    return model, pencil


@dataclass(frozen=True)
class TrussProblem:
    """A full problem description: geometry, material, masses, budget."""

    structure: GroundStructure
    E: float
    rho: float
    point_masses: tuple
    V0: float
    x_min: float

    def build(self):
        """Assemble into (TrussModel, AffinePencil, FeasibleSet)."""
        model, pencil = assemble(self.structure, self.E, self.rho, self.point_masses)
        S = FeasibleSet(l=self.structure.lengths, V0=self.V0, x_min=self.x_min)
        return model, pencil, S


def canonical_problem(scale: str = "desk") -> TrussProblem:
    """Reference instances used throughout the test suite and CLI.

    "desk": 3x3 grid, left edge fixed, 1e7 kg on the free bottom-right
    corner node; 28 members, 12 free dofs. Small enough for exhaustive
    verification runs.

    "full": 5x5 grid with the two left-edge corner nodes fixed and
    1e7 kg on the right-edge middle node; 200 members, 46 free dofs.

    "degenerate": 3x3 grid with all four corner nodes fixed and 1e7 kg
    on the center node. The quarter-turn symmetry forces the x and y
    translation modes of the mass into a degenerate pair, so the top
    eigenvalue has multiplicity 2 at every symmetric design including
    the optimum.

    All use E = 200 GPa, rho = 7860 kg/m^3, 1 m spacing, V0 = 0.1 m^3
    and x_min = 1e-8 m^2.
    """
    if scale == "desk":
        gs, masses = generate_grid(3, 3, 1.0, fixed_nodes="left", mass_nodes=[(2, 1e7)])
    elif scale == "full":
        # grid nodes 0 and 20 are the left edge's bottom and top corners
        gs, masses = generate_grid(
            5, 5, 1.0, fixed_nodes=(0, 20), mass_nodes=[(14, 1e7)]
        )
    elif scale == "degenerate":
        gs, masses = generate_grid(
            3, 3, 1.0, fixed_nodes=(0, 2, 6, 8), mass_nodes=[(4, 1e7)]
        )
    else:
        raise ValueError(f"unknown scale {scale!r}")
    return TrussProblem(gs, 200e9, 7.86e3, masses, 0.1, 1e-8)


def canonical_instance(scale: str = "desk"):
    """(TrussModel, AffinePencil, FeasibleSet) for a canonical problem."""
    return canonical_problem(scale).build()


def truss_to_dict(problem: TrussProblem) -> dict:
    return {
        "kind": "truss",
        "nodes": problem.structure.nodes.tolist(),
        "fixed": list(problem.structure.fixed_dofs),
        "members": [list(p) for p in problem.structure.members],
        "E": problem.E,
        "rho": problem.rho,
        "point_masses": [{"node": pm.node, "mass": pm.mass} for pm in problem.point_masses],
        "V0": problem.V0,
        "xmin": problem.x_min,
    }


def truss_from_dict(data: dict) -> TrussProblem:
    """Build a TrussProblem from the truss JSON schema.

    "members" is optional; when absent the dense candidate set is
    generated from the node list. "fixed" lists dof indices.
    """
    nodes = np.asarray(data["nodes"], dtype=float)
    members = data.get("members")
    if members is None:
        members = _candidate_members(nodes)
    gs = GroundStructure(nodes, tuple(int(d) for d in data["fixed"]),
                         tuple(tuple(p) for p in members))
    masses = _as_point_masses(data.get("point_masses", ()), gs.num_nodes, gs.fixed_dofs)
    return TrussProblem(
        structure=gs,
        E=float(data["E"]),
        rho=float(data["rho"]),
        point_masses=masses,
        V0=float(data["V0"]),
        x_min=float(data["xmin"]),
    )


def save_truss_json(problem: TrussProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(truss_to_dict(problem), fh, indent=2)
        fh.write("\n")


def load_truss_json(path) -> TrussProblem:
    with open(path) as fh:
        return truss_from_dict(json.load(fh))


def design_to_csv(path, x) -> None:
    """Write the design vector as `member,area` rows."""
    x = np.asarray(x, dtype=float)
    with open(path, "w") as fh:
        fh.write("member,area\n")
        for e, area in enumerate(x):
            fh.write(f"{e},{area:.17g}\n")


def design_to_svg(path, gs: GroundStructure, x, x_min: float) -> int:
    """Render a design to SVG; returns the number of members drawn.

    Stroke width is proportional to sqrt(area). Members thinner than
    1.5 * x_min are treated as removed and not drawn.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (gs.m,):
        raise ValueError("design vector length must match member count")

    lo = gs.nodes.min(axis=0)
    hi = gs.nodes.max(axis=0)
    extent = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-9))
    pad = 0.1 * extent
    shown = [e for e in range(gs.m) if x[e] >= 1.5 * x_min]
    wmax = 0.06 * extent
    amax = max((np.sqrt(x[e]) for e in shown), default=1.0)

    def sx(v):
        return v - lo[0] + pad

    def sy(v):
        # svg y grows downward
        return (hi[1] - v) + pad

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {hi[0] - lo[0] + 2 * pad:.6g} {hi[1] - lo[1] + 2 * pad:.6g}">'
    ]
    for e in shown:
        i, j = gs.members[e]
        w = wmax * np.sqrt(x[e]) / amax
        lines.append(
            f'<line x1="{sx(gs.nodes[i, 0]):.6g}" y1="{sy(gs.nodes[i, 1]):.6g}" '
            f'x2="{sx(gs.nodes[j, 0]):.6g}" y2="{sy(gs.nodes[j, 1]):.6g}" '
            f'stroke="black" stroke-width="{w:.6g}" stroke-linecap="round"/>'
        )
    fixed_nodes = {d // 2 for d in gs.fixed_dofs}
    r = 0.02 * extent
    for k in range(gs.num_nodes):
        fill = "#c33" if k in fixed_nodes else "#333"
        lines.append(
            f'<circle cx="{sx(gs.nodes[k, 0]):.6g}" cy="{sy(gs.nodes[k, 1]):.6g}" '
            f'r="{r:.6g}" fill="{fill}"/>'
        )
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")
    return len(shown)
