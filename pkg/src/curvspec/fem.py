"""P1 finite element assembly for the conformally weighted eigenproblem.

The stiffness matrix is the flat P1 gradient form (curvature enters only
through the mass side); the mass matrix carries the conformal weight and is
integrated with the 3-point edge-midpoint rule, which is exact for the flat
case and second-order consistent for curved weights. Dirichlet nodes are
eliminated by row/column deletion; Neumann is natural.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import DIRICHLET, SpaceForm, conformal_factor
from .meshing import Mesh


class AssemblyError(ValueError):
    """Mesh/weight combination cannot be assembled."""


@dataclass(frozen=True)
class ConformalWeight:
    """Mass-side weight of the model-coordinate eigenproblem.

    Euclidean 1, hyperbolic 1/y^2, spherical (4/(x^2+y^2+4))^2: the squared
    conformal factor of the space form.
    """

    space: SpaceForm

    def __call__(self, x, y):
        rho = conformal_factor(self.space, x, y)
        return rho * rho


@dataclass
class EigenProblem:
    """Symmetric pencil (K, M) on the free nodes of a mesh."""

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    free_nodes: np.ndarray  # matrix index -> mesh vertex
    node_index: np.ndarray  # mesh vertex -> matrix index, -1 if constrained
    num_constrained: int

    @property
    def dimension(self) -> int:
        return self.stiffness.shape[0]


def constrained_dimension(problem: EigenProblem) -> int:
    """Number of free nodes of the assembled problem."""
    return problem.dimension


def dirichlet_vertices(mesh: Mesh, bc_map=None) -> np.ndarray:
    """Mesh vertices on any Dirichlet arc (mixed-BC corners count as Dirichlet)."""
    bcs = _effective_bc(mesh, bc_map)
    out = set()
    for (i, j, a), bc in zip(mesh.boundary_edges, bcs):
        if bc == DIRICHLET:
            out.add(int(i))
            out.add(int(j))
    return np.array(sorted(out), dtype=np.int64)


def _effective_bc(mesh: Mesh, bc_map) -> list[str]:
    if bc_map is None:
        return list(mesh.boundary_bc())
    out = []
    for i, j, a in mesh.boundary_edges:
        bc = bc_map.get(int(a)) if hasattr(bc_map, "get") else bc_map[int(a)]
        if bc not in ("D", "N"):
            raise AssemblyError(f"bc_map[{int(a)}] must be 'D' or 'N', got {bc!r}")
        out.append(bc)
    return out


def assemble(mesh: Mesh, weight: ConformalWeight, bc_map=None) -> EigenProblem:
    """Assemble the P1 stiffness/weighted-mass pencil with BCs applied.

    `bc_map` optionally overrides the per-arc boundary conditions carried by
    the mesh (arc id -> "D"/"N").
    """
    v = mesh.vertices
    t = mesh.triangles
    if weight.space is SpaceForm.HYPERBOLIC and np.any(v[:, 1] <= 0.0):
        raise AssemblyError("hyperbolic assembly needs all vertices at y > 0")

    p = v[t]  # (T, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    if np.any(area2 <= 0.0):
        raise AssemblyError("mesh contains nonpositively oriented triangles")
    area = 0.5 * area2

    # P1 gradients: grad phi_i = rot90(p_k - p_j) / (2 area)
    grads = np.empty((len(t), 3, 2))
    for i in range(3):
        e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
        grads[:, i, 0] = -e[:, 1]
        grads[:, i, 1] = e[:, 0]
    grads /= area2[:, None, None]

    k_loc = np.einsum("tia,tja->tij", grads, grads) * area[:, None, None]
    k_loc = 0.5 * (k_loc + np.swapaxes(k_loc, 1, 2))  # exact symmetry

    # edge midpoints (m01, m12, m20); phi values there are 1/2 on adjacent vertices
    mids = 0.5 * np.stack(
        [p[:, 0] + p[:, 1], p[:, 1] + p[:, 2], p[:, 2] + p[:, 0]], axis=1
    )
    w = weight(mids[:, :, 0], mids[:, :, 1])  # (T, 3)
    m_loc = np.zeros((len(t), 3, 3))
    # vertex i touches midpoints of edges (i-1, i) and (i, i+1)
    edge_verts = ((0, 1), (1, 2), (2, 0))
    for e, (a, b) in enumerate(edge_verts):
        m_loc[:, a, a] += w[:, e]
        m_loc[:, b, b] += w[:, e]
        m_loc[:, a, b] += w[:, e]
        m_loc[:, b, a] += w[:, e]
    m_loc *= (area / 12.0)[:, None, None]

    rows = np.repeat(t, 3, axis=1).reshape(-1)
    cols = np.tile(t, (1, 3)).reshape(-1)
    n = mesh.num_vertices
    stiffness = sp.coo_matrix((k_loc.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()
    mass = sp.coo_matrix((m_loc.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()

    constrained = dirichlet_vertices(mesh, bc_map)
    node_index = -np.ones(n, dtype=np.int64)
    free = np.setdiff1d(np.arange(n, dtype=np.int64), constrained)
    node_index[free] = np.arange(len(free))
    stiffness = stiffness[free][:, free].tocsr()
    mass = mass[free][:, free].tocsr()
    return EigenProblem(
        stiffness=stiffness,
        mass=mass,
        free_nodes=free,
        node_index=node_index,
        num_constrained=len(constrained),
    )


def weighted_mesh_area(mesh: Mesh, weight: ConformalWeight) -> float:
    """Midpoint-rule integral of the weight over the mesh (equals sum of all mass entries)."""
    p = mesh.vertices[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    mids = 0.5 * np.stack(
        [p[:, 0] + p[:, 1], p[:, 1] + p[:, 2], p[:, 2] + p[:, 0]], axis=1
    )
    w = weight(mids[:, :, 0], mids[:, :, 1])
    return float(np.sum(area / 3.0 * w.sum(axis=1)))


def export_matrix(matrix: sp.spmatrix, path) -> None:
    """Coordinate-format text dump: 0-based `row col value`, sorted row-major."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for r, c, val in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {val:.17g}\n")
