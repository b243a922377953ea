"""
Exact diagonalization of the full Hamiltonian in a truncated Fock space.

Serves as brute-force ground truth for the perturbative pipeline. Basis
ordering: index ``2*m`` is ``|g, m>`` and ``2*m + 1`` is ``|e, m>``,
``m = 0 .. fock_cutoff``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import AmbiguousMatch, CutoffTooSmall, SolverFailure
from .model import ModelParams, StateLabel, canonical, jc_eigenpair

#: photons kept beyond the highest manifold of interest
CUTOFF_MARGIN = 4
DEFAULT_CUTOFF = 40


def basis_index(excited: bool, m: int) -> int:
    return 2 * m + int(excited)


@dataclass(frozen=True)
class TruncatedHamiltonian:
    fock_cutoff: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MatchedEigenstate:
    label: StateLabel
    energy: float
    vector: np.ndarray
    overlap: float


def _operators(fock_cutoff: int):
    nf = fock_cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, nf, dtype=float)), k=1)
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g><e| with g first
    sz = np.diag([-1.0, 1.0])
    eye_f, eye_a = np.eye(nf), np.eye(2)
    # kron(field, atom) matches basis_index ordering
    return (np.kron(a, eye_a), np.kron(eye_f, sm), np.kron(eye_f, sz), np.kron(eye_f, eye_a))


def annihilation_matrix(fock_cutoff: int) -> np.ndarray:
    return _operators(fock_cutoff)[0]


def build_hamiltonian(p: ModelParams, fock_cutoff: int = DEFAULT_CUTOFF, max_manifold: int = 0) -> TruncatedHamiltonian:
    """
    Full Hamiltonian ``H_JC + H_CR + H_AS`` (including ``g_S_prime``) as a dense matrix.

    Raises
    ------
    CutoffTooSmall
        If ``fock_cutoff < max_manifold + CUTOFF_MARGIN``.
    """
    if fock_cutoff < max_manifold + CUTOFF_MARGIN:
        raise CutoffTooSmall(
            f"fock_cutoff={fock_cutoff} leaves no margin above manifold {max_manifold} "
            f"(need >= {max_manifold + CUTOFF_MARGIN})")
    a, sm, sz, one = _operators(fock_cutoff)
    ad, sp = a.T, sm.T
    h = (p.omega_c * ad @ a + 0.5 * p.omega_a * sz
         + p.g_R * (sp @ a + ad @ sm)
         + p.g_R * (sp @ ad + sm @ a)
         + (p.g_S * (sz + one) + p.g_S_prime * (sz - one)) @ (a + ad))
    return TruncatedHamiltonian(fock_cutoff, 0.5 * (h + h.T))


def exact_eigensystem(h: TruncatedHamiltonian) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    try:
        w, v = linalg.eigh(h.matrix)
    except linalg.LinAlgError as exc:
        raise SolverFailure(str(exc)) from exc
    resid = np.abs(v.T @ v - np.eye(v.shape[1])).max()
    if resid > 1e-10:
        raise SolverFailure(f"eigenvectors not orthonormal (residual {resid:.2e})")
    return w, v


def jc_vector(label: StateLabel, p: ModelParams, fock_cutoff: int) -> np.ndarray:
    """Zeroth-order JC state in the product basis."""
    ep = jc_eigenpair(label, p)
    vec = np.zeros(2 * (fock_cutoff + 1))
    vec[basis_index(False, label.n)] = ep.A
    if label.n >= 1:
        vec[basis_index(True, label.n - 1)] = ep.B
    return vec


def match_state(label: StateLabel, p: ModelParams, eigs: Tuple[np.ndarray, np.ndarray],
                fock_cutoff: int, degeneracy_tol: float = 1e-9, min_gap: float = 0.1,
                min_overlap: float = 0.5) -> MatchedEigenstate:
    """
    Exact eigenstate with maximal squared overlap with the zeroth-order JC state.

    Exactly degenerate eigenvalues (within ``degeneracy_tol``) are grouped and the
    JC state is projected onto the whole eigenspace, so bare (uncoupled) ladders
    match unambiguously.

    Raises
    ------
    AmbiguousMatch
        If the two largest overlaps differ by less than ``min_gap``, or the
        largest does not exceed ``min_overlap`` (above 1/2 the match is unique).
    """
    w, v = eigs
    label = canonical(label, p)
    ref = jc_vector(label, p, fock_cutoff)
    proj = v.T @ ref
    groups: List[List[int]] = []
    for i in range(w.size):
        if groups and abs(w[i] - w[groups[-1][0]]) <= degeneracy_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    weights = np.array([np.sum(proj[g] ** 2) for g in groups])
    order = np.argsort(weights)[::-1]
    best = groups[order[0]]
    if weights.size > 1 and weights[order[0]] - weights[order[1]] < min_gap:
        raise AmbiguousMatch(
            f"state {label}: overlaps {weights[order[0]]:.3f} and {weights[order[1]]:.3f} "
            "are too close to identify the dressed state")
    if weights[order[0]] <= min_overlap:
        raise AmbiguousMatch(
            f"state {label}: best overlap {weights[order[0]]:.3f} <= {min_overlap}; "
            "the JC state is spread over several eigenstates")
    vec = v[:, best] @ proj[best]
    vec = vec / np.linalg.norm(vec)
    return MatchedEigenstate(label, float(np.mean(w[best])), vec, float(weights[order[0]]))


def exact_a_sq(final: MatchedEigenstate, initial: MatchedEigenstate, fock_cutoff: int) -> float:
    a = annihilation_matrix(fock_cutoff)
    return float((final.vector @ a @ initial.vector) ** 2)


@dataclass
class LabelReport:
    label: StateLabel
    exact_energy: float
    perturbative_energy: float
    overlap: float
    a_sq: Dict[StateLabel, Tuple[float, float]]  # final -> (exact, perturbative)

    @property
    def energy_error(self) -> float:
        return self.exact_energy - self.perturbative_energy

    @property
    def overlap_deficit(self) -> float:
        return 1.0 - self.overlap


def match_and_compare(eigs, p: ModelParams, labels: Iterable[StateLabel], fock_cutoff: int,
                      finals: Optional[Dict[StateLabel, List[StateLabel]]] = None) -> List[LabelReport]:
    """
    Compare exact eigenpairs with the second-order results for each label.

    ``finals`` maps an initial label to the final labels whose ``|<f|a|i>|^2``
    should be compared; by default all emission channels of the initial state.
    """
    from .emission import a_matrix_element_sq, candidate_finals
    from .perturbation import energy_with_correction

    reports = []
    for lab in labels:
        lab = canonical(lab, p)
        if lab.n + CUTOFF_MARGIN > fock_cutoff:
            raise CutoffTooSmall(f"fock_cutoff={fock_cutoff} too small for label {lab}")
        m_i = match_state(lab, p, eigs, fock_cutoff)
        corr = energy_with_correction(lab, p)
        targets = finals.get(lab, []) if finals is not None else candidate_finals(lab, p)
        a_cmp = {}
        for f in targets:
            m_f = match_state(f, p, eigs, fock_cutoff)
            a_cmp[canonical(f, p)] = (exact_a_sq(m_f, m_i, fock_cutoff), a_matrix_element_sq(f, lab, p))
        reports.append(LabelReport(lab, m_i.energy, corr.energy, m_i.overlap, a_cmp))
    return reports
