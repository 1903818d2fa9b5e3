from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.modules.linalg.core import StateVector, freeze, inner, normalize

RAY_TOLERANCE = 1e-10
# relative slack under which two amplitude moduli count as tied for the canonical phase
PHASE_TIE_TOL = 1e-12


def canonicalize(psi: StateVector) -> StateVector:
    """Normalizes a state and rotates its global phase so the largest-modulus amplitude is real and positive.

    Ties between amplitude moduli are broken by the lowest index.
    """
    psi = normalize(psi)
    moduli = np.abs(psi)
    largest = moduli.max()
    pivot = int(np.flatnonzero(moduli >= largest * (1.0 - PHASE_TIE_TOL))[0])
    phase = psi[pivot] / moduli[pivot]
    canonical = psi * np.conj(phase)
    canonical[pivot] = moduli[pivot]
    return freeze(canonical)


def ray_equivalent(a: StateVector, b: StateVector, tol: float = RAY_TOLERANCE) -> bool:
    """Whether two normalized states lie on the same projective ray: 1 - |<a|b>|^2 < tol."""
    overlap = inner(a, b)
    return 1.0 - (overlap.real**2 + overlap.imag**2) < tol


@dataclass(frozen=True)
class Ray:
    """A projective ray of the effective ensemble, stored as its canonical-phase representative."""

    representative: StateVector
    index: int


class EffectiveEnsemble:
    """The distinct rays phi_j of the trajectory ensemble and their occupation counts N_j, sum_j N_j = N.

    Rays whose count drops to zero are kept: they can be repopulated, and an empty ray that receives reverse flux is
    exactly the positivity-breakdown signal.

    Parameters
    ----------
        * states: Sequence[:class:`StateVector`]
        * counts: Sequence[:class:`int`]
        * tol: :class:`float` | 1e-10
            - Ray-equivalence tolerance.
    """

    def __init__(self, states: Sequence[StateVector], counts: Sequence[int], tol: float = RAY_TOLERANCE):
        if len(states) != len(counts):
            raise ValueError("every ray needs exactly one count")
        if any(int(count) != count or count < 0 for count in counts):
            raise ValueError("ray counts must be non-negative integers")
        self.tol = tol
        self._states: List[StateVector] = [canonicalize(psi) for psi in states]
        self._counts: List[int] = [int(count) for count in counts]
        self.total: int = sum(self._counts)
        self.merge_equivalent()

    @classmethod
    def pure(cls, psi: StateVector, size: int, tol: float = RAY_TOLERANCE):
        """An ensemble of `size` members all in state psi."""
        return cls([psi], [size], tol)

    def __len__(self):
        return len(self._states)

    def __iter__(self) -> Iterator[Tuple[Ray, int]]:
        return iter(zip(self.rays, self._counts))

    @property
    def rays(self) -> List[Ray]:
        return [Ray(representative=psi, index=idx) for idx, psi in enumerate(self._states)]

    @property
    def states(self) -> List[StateVector]:
        return list(self._states)

    @property
    def counts(self) -> List[int]:
        return list(self._counts)

    def ray(self, index: int) -> Ray:
        return Ray(representative=self._states[index], index=index)

    def count(self, index: int) -> int:
        return self._counts[index]

    @property
    def populated(self) -> List[int]:
        """Indices of the rays with N_j > 0, in ray order."""
        return [idx for idx, count in enumerate(self._counts) if count > 0]

    def find(self, psi: StateVector) -> Optional[int]:
        """Index of the first ray equivalent to psi, or `None` if psi is not in the ensemble."""
        return next((idx for idx, phi in enumerate(self._states) if ray_equivalent(phi, psi, self.tol)), None)

    def find_or_add(self, psi: StateVector) -> int:
        """Index of the ray of psi, appending it with count 0 if it is absent."""
        idx = self.find(psi)
        if idx is None:
            self._states.append(canonicalize(psi))
            self._counts.append(0)
            idx = len(self._states) - 1
        return idx

    def replace_states(self, states: Sequence[StateVector]):
        """Swaps every representative for its drifted successor (same order) and re-canonicalizes phases."""
        if len(states) != len(self._states):
            raise ValueError("drifted states must match the ray set one to one")
        self._states = [canonicalize(psi) for psi in states]

    def merge_equivalent(self) -> int:
        """Merges rays that became equivalent, summing their counts. Returns the number of merges.

        The merged ray sits at the lower index; its representative is the one with the larger count (ties: lower index).
        """
        merges = 0
        idx = 0
        while idx < len(self._states):
            other = idx + 1
            while other < len(self._states):
                if ray_equivalent(self._states[idx], self._states[other], self.tol):
                    if self._counts[other] > self._counts[idx]:
                        self._states[idx] = self._states[other]
                    self._counts[idx] += self._counts[other]
                    del self._states[other]
                    del self._counts[other]
                    merges += 1
                else:
                    other += 1
            idx += 1
        return merges

    def apply_transfers(self, transfers: Sequence[Tuple[int, int, int]]):
        """Moves members between rays. Each transfer is (source, target, n)."""
        counts = list(self._counts)
        for transfer in transfers:
            source, target, moved = transfer[:3]
            counts[source] -= moved
            counts[target] += moved
        if any(count < 0 for count in counts):
            raise ValueError("a transfer removed more members than a ray holds")
        if sum(counts) != self.total:
            raise ValueError("transfers must conserve the ensemble size")
        self._counts = counts

    def copy(self) -> "EffectiveEnsemble":
        clone = EffectiveEnsemble.__new__(EffectiveEnsemble)
        clone.tol = self.tol
        clone._states = list(self._states)
        clone._counts = list(self._counts)
        clone.total = self.total
        return clone

    def probability(self, index: int) -> float:
        """The ensemble estimate P[phi_j] = N_j / N."""
        return self._counts[index] / self.total

    def snapshot(self) -> Tuple[Tuple[StateVector, int], ...]:
        return tuple(zip(self._states, self._counts))
