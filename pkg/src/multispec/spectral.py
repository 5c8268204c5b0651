"""Dense symmetric eigensolving, multiplicity clustering, and the explicit
finitely-supported eigenvector certificates.

Three certificate constructions are provided:
  * canopy_certificates: for a patch root x and an eigenpair (E, psi) of the
    depth-(l-1) complete subtree, K-1 orthonormal vectors supported on the
    forward-neighbor subtrees of x, certifying the eigenvalue E + omega_x.
  * cayley_certificates: base-graph eigenvectors at E0 vanishing on every
    anchor, copied into a single fiber g, certifying E0 + omega_g.
  * junction_kernel_basis: on a glued graph, combinations of per-piece
    eigenvectors at E0 that cancel at every junction.

Every returned certificate is re-verified by multiplying the fully
assembled operator (not the construction shortcut) against the vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .anderson import SiteOperator, assemble_canopy_operator, assemble_cayley_operator
from .canopy import PatchSet, TruncatedCanopy, build_truncated_canopy, subtree
from .cayley import CayleyGraph
from .errors import CertificateError, InvalidArgumentError, TooLargeError
from .graph_core import GluedGraph, adjacency_matrix

DEFAULT_EIG_CAP = 5_000
ORTHO_TOL = 1e-10
PSI_RESIDUAL_TOL = 1e-10
ANCHOR_VANISH_TOL = 1e-12


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns
    residual_bound: float


def eig_sym(M: np.ndarray, cap: int = DEFAULT_EIG_CAP) -> EigenSystem:
    """Full decomposition of a real symmetric matrix, ascending order."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if M.shape[0] > cap:
        raise TooLargeError(f"dimension {M.shape[0]} exceeds eig cap {cap}")
    if M.size and not np.array_equal(M, M.T):
        raise InvalidArgumentError("matrix must be symmetric")
    w, v = np.linalg.eigh(M)
    residual = float(np.max(np.abs(M @ v - v * w))) if M.size else 0.0
    max_entry = float(np.max(np.abs(M))) if M.size else 0.0
    bound = 1e-9 * (1.0 + max_entry * M.shape[0])
    if residual > bound:
        raise CertificateError(
            f"eigensolver residual {residual:.3e} exceeds bound {bound:.3e}"
        )
    if M.size:
        gram_dev = float(np.max(np.abs(v.T @ v - np.eye(M.shape[0]))))
        if gram_dev > 1e-10:
            raise CertificateError(f"eigenvectors not orthonormal ({gram_dev:.3e})")
    return EigenSystem(w, v, residual)


def cluster_multiplicities(eigenvalues, tau: float) -> list[tuple[float, int]]:
    """Greedy clustering of an ascending sequence: consecutive values within
    tau of the previous one join the current cluster."""
    if tau <= 0:
        raise InvalidArgumentError("cluster tolerance must be positive")
    vals = list(eigenvalues)
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise InvalidArgumentError("eigenvalues must be sorted ascending")
    clusters: list[tuple[float, int]] = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > tau:
            chunk = vals[start:i]
            clusters.append((sum(chunk) / len(chunk), len(chunk)))
            start = i
    return clusters


@dataclass(frozen=True)
class AlphaBasis:
    """K-1 orthonormal zero-sum tuples over the K forward neighbors."""

    K: int
    rows: np.ndarray  # (K-1) x K

    def __post_init__(self):
        sums = np.abs(self.rows.sum(axis=1))
        gram = self.rows @ self.rows.T
        if np.max(sums) > 1e-14 or np.max(np.abs(gram - np.eye(self.K - 1))) > 1e-13:
            raise CertificateError("alpha basis violates zero-sum/orthonormality")


def alpha_basis(K: int) -> AlphaBasis:
    """Helmert rows: row j has 1/sqrt(j(j+1)) at positions 0..j-1 and
    -j/sqrt(j(j+1)) at position j."""
    if K < 2:
        raise InvalidArgumentError("alpha basis needs K >= 2")
    rows = np.zeros((K - 1, K))
    for j in range(1, K):
        c = 1.0 / np.sqrt(j * (j + 1))
        rows[j - 1, :j] = c
        rows[j - 1, j] = -j * c
    return AlphaBasis(K, rows)


def subtree_eigenpairs(K: int, depth: int, cap: int = DEFAULT_EIG_CAP) -> EigenSystem:
    """Spectrum of the complete K-ary tree of the given depth (BFS indexing)."""
    template = build_truncated_canopy(K, depth, vertex_cap=cap)
    return eig_sym(adjacency_matrix(template.graph), cap=cap)


@dataclass(frozen=True)
class EigenvectorCertificate:
    """A finitely-supported unit vector, its claimed eigenvalue, and the
    measured residual against the assembled operator."""

    vector: dict[int, float]
    eigenvalue: float
    support: tuple[int, ...]
    residual: float
    provenance: dict

    def dense(self, dimension: int) -> np.ndarray:
        v = np.zeros(dimension)
        for i, x in self.vector.items():
            v[i] = x
        return v

    def to_json(self) -> str:
        return json.dumps(
            {
                "eigenvalue": self.eigenvalue,
                "residual": self.residual,
                "support": list(self.support),
                "provenance": self.provenance,
                "vector": [[i, x] for i, x in sorted(self.vector.items())],
            }
        )


def _verify(
    op: SiteOperator,
    dense: np.ndarray,
    eigenvalue: float,
    tolerance: float,
    support: tuple[int, ...],
    provenance: dict,
) -> EigenvectorCertificate:
    norm = float(np.linalg.norm(dense))
    if abs(norm - 1.0) > 1e-12:
        raise CertificateError(f"certificate vector norm {norm} is not 1")
    residual = float(np.max(np.abs(op.matvec(dense) - eigenvalue * dense)))
    if residual > tolerance:
        raise CertificateError(
            f"certificate residual {residual:.3e} exceeds tolerance "
            f"{tolerance:.3e} (claimed eigenvalue {eigenvalue})"
        )
    vector = {int(i): float(dense[i]) for i in support if dense[i] != 0.0}
    return EigenvectorCertificate(vector, eigenvalue, support, residual, provenance)


def canopy_certificates(
    t: TruncatedCanopy,
    p: PatchSet,
    r,
    x: int,
    E: float,
    psi: np.ndarray,
    operator: SiteOperator | None = None,
) -> list[EigenvectorCertificate]:
    """K-1 orthonormal certificates for the eigenvalue E + omega_x, built by
    spreading the depth-(l-1) subtree eigenvector psi over the forward
    neighbors of the patch root x with zero-sum weights.

    psi is indexed by the BFS order of the complete K-ary depth-(l-1) tree
    and must be a unit eigenvector of its adjacency matrix at E.
    """
    if x not in p.roots:
        raise InvalidArgumentError(f"vertex {x} is not a patch root")
    l = p.l
    if l < 2:
        raise InvalidArgumentError("construction needs patch depth l >= 2")
    template = build_truncated_canopy(t.K, l - 1)
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (template.vertex_count,):
        raise InvalidArgumentError("psi has the wrong dimension")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise InvalidArgumentError("psi must be unit norm")
    psi_res = float(
        np.max(np.abs(adjacency_matrix(template.graph) @ psi - E * psi))
    )
    if psi_res > PSI_RESIDUAL_TOL:
        raise InvalidArgumentError(
            f"psi residual {psi_res:.3e} against the subtree adjacency"
        )
    if operator is None:
        operator = assemble_canopy_operator(t, p, r)
    omega_x = r.values[x]
    tolerance = 1e-9 * (1.0 + abs(E) + t.K + 1 + r.max_abs())
    alphas = alpha_basis(t.K)
    forward = t.children[x]
    copies = [subtree(t, y, l - 1) for y in forward]
    certs = []
    for a_idx, row in enumerate(alphas.rows):
        dense = np.zeros(t.vertex_count)
        for a_y, copy in zip(row, copies):
            # canonical order-preserving isomorphism: BFS order to BFS order
            dense[list(copy)] = a_y * psi
        support = tuple(v for copy in copies for v in copy)
        certs.append(
            _verify(
                operator,
                dense,
                E + omega_x,
                tolerance,
                support,
                {
                    "construction": "canopy",
                    "patch_root": x,
                    "E": float(E),
                    "alpha_index": a_idx,
                },
            )
        )
    _check_gram(certs, t.vertex_count)
    return certs


def cayley_certificates(
    cg: CayleyGraph,
    r,
    g: int,
    E0: float,
    psis,
    operator: SiteOperator | None = None,
) -> list[EigenvectorCertificate]:
    """One certificate per base-graph eigenvector psi_i at E0 vanishing on all
    anchors, each supported on the single fiber g and certifying E0 + omega_g."""
    if g in cg.boundary_fibers:
        raise InvalidArgumentError(f"fiber {g} is not interior")
    base_adj = adjacency_matrix(cg.template.base)
    anchors = cg.template.anchor_vertices()
    psis = [np.asarray(psi, dtype=float) for psi in psis]
    for psi in psis:
        bad = max(abs(psi[a]) for a in anchors)
        if bad > ANCHOR_VANISH_TOL:
            raise InvalidArgumentError(
                f"eigenvector does not vanish at an anchor (|value| = {bad:.3e})"
            )
        res = float(np.max(np.abs(base_adj @ psi - E0 * psi)))
        if res > PSI_RESIDUAL_TOL:
            raise InvalidArgumentError(
                f"base eigenvector residual {res:.3e} at E0 = {E0}"
            )
    if operator is None:
        operator = assemble_cayley_operator(cg, r)
    omega_g = r.values[g]
    max_deg = max(cg.graph.degrees(), default=0)
    tolerance = 1e-9 * (1.0 + abs(E0) + max_deg + r.max_abs())
    support = tuple(cg.fiber_vertices(g))
    certs = []
    for i, psi in enumerate(psis):
        dense = np.zeros(cg.vertex_count)
        dense[list(support)] = psi
        certs.append(
            _verify(
                operator,
                dense,
                E0 + omega_g,
                tolerance,
                support,
                {
                    "construction": "cayley",
                    "fiber": repr(cg.group.elements[g]),
                    "E0": float(E0),
                    "i": i,
                },
            )
        )
    _check_gram(certs, cg.vertex_count)
    return certs


def _check_gram(certs: list[EigenvectorCertificate], dimension: int):
    if len(certs) < 2:
        return
    mat = np.column_stack([c.dense(dimension) for c in certs])
    dev = float(np.max(np.abs(mat.T @ mat - np.eye(len(certs)))))
    if dev > ORTHO_TOL:
        raise CertificateError(f"certificate Gram deviates from identity by {dev:.3e}")


def junction_kernel_basis(
    glued: GluedGraph, E0: float, eig_tol: float = 1e-8
) -> list[np.ndarray]:
    """Orthonormal vectors on the glued graph that are exact E0-eigenvectors
    of its adjacency matrix and vanish at every junction.

    Picks one unit eigenvector psi_i at E0 per piece, solves the junction
    cancellation system sum_i alpha_i psi_i(v_{i,j}) = 0, and spreads each
    kernel element over the pieces.
    """
    spec = glued.spec
    m = spec.junction_count
    pieces = spec.pieces
    piece_vecs = []
    for i, piece in enumerate(pieces):
        es = eig_sym(adjacency_matrix(piece))
        hits = np.where(np.abs(es.eigenvalues - E0) <= eig_tol)[0]
        if hits.size == 0:
            raise InvalidArgumentError(
                f"piece {i} has no eigenvalue within {eig_tol} of E0 = {E0}"
            )
        piece_vecs.append(es.eigenvectors[:, hits[0]])
    M = np.zeros((m, len(pieces)))
    for i, (attach, psi) in enumerate(zip(spec.attach_points, piece_vecs)):
        for j, v in enumerate(attach):
            M[j, i] = psi[v]
    # kernel via SVD with a rank tolerance tied to the matrix scale
    _, s, vt = np.linalg.svd(M)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(M))))
    rank = int(np.sum(s > tol))
    kernel = vt[rank:].T  # columns: orthonormal alpha tuples
    n = glued.graph.vertex_count
    adj = adjacency_matrix(glued.graph)
    out = []
    for k in range(kernel.shape[1]):
        alpha = kernel[:, k]
        vec = np.zeros(n)
        for i, psi in enumerate(piece_vecs):
            vec[list(glued.piece_vertices(i))] = alpha[i] * psi
        res = float(np.max(np.abs(adj @ vec - E0 * vec)))
        if res > 1e-10:
            raise CertificateError(
                f"kernel vector residual {res:.3e} exceeds 1e-10"
            )
        if any(vec[j] != 0.0 for j in glued.junctions):
            raise CertificateError("kernel vector is nonzero at a junction")
        out.append(vec)
    return out
