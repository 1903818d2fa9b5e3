"""Jump proposals of the effective ensemble.

Forward jumps psi -> C_k psi / ||C_k psi|| happen with probability dt Delta_k^+ ||C_k psi||^2. While a rate is negative
a member in the image ray C_k phi / ||C_k phi|| jumps back onto phi with probability

    dt Delta_k^- (N_phi / N_source) ||C_k phi||^2,

which diverges once the image ray empties: the positivity breakdown of the unravelling.
"""
import enum
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from src.modules.errors import PositivityBreakdown, TimestepTooLarge, ZeroImageError
from src.modules.jumps.ensemble import EffectiveEnsemble, Ray, canonicalize, ray_equivalent
from src.modules.jumps.streams import RandomStreams
from src.modules.linalg.core import LinearOperator, StateVector, dagger, freeze, outer
from src.modules.model.model import Channel, ModelSpec
from src.modules.model.rates import RateFunction, rate_partition

DEFAULT_P_MAX = 0.1
# ||C psi||^2 below this is treated as psi lying in the kernel of C
IMAGE_TOL = 1e-15


class Direction(str, enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


class Transfer(NamedTuple):
    """Members moved from one ray to another by one proposal."""

    source: int
    target: int
    count: int
    channel: str
    direction: Direction


@dataclass(frozen=True)
class JumpProposal:
    """One possible jump of the members of `source_ray` during a step.

    Parameters
    ----------
        * source_ray: :class:`int`
        * target_ray: :class:`int`
            - Always an index into the ensemble; unseen forward targets are appended with count 0 first.
        * channel: :class:`str`
        * direction: :class:`Direction`
        * probability: :class:`float`
            - Conditional probability per member of the source ray, >= 0.
        * dt: :class:`float`
    """

    source_ray: int
    target_ray: int
    channel: str
    direction: Direction
    probability: float
    dt: float


def jump_weight(psi: StateVector, channel: Channel) -> float:
    """||C_k psi||^2"""
    return float(np.real(np.vdot(psi, channel.cdc @ psi)))


def forward_jump_probability(psi: StateVector, channel: Channel, t: float, dt: float) -> float:
    return dt * rate_partition(channel.delta(t)).plus * jump_weight(psi, channel)


def forward_jump_target(psi: StateVector, channel: Channel) -> StateVector:
    """The canonical ray of C_k psi / ||C_k psi||. Raises `ZeroImageError` if psi lies in the kernel of C_k."""
    image = channel.operator @ psi
    if float(np.real(np.vdot(image, image))) < IMAGE_TOL:
        raise ZeroImageError(f"channel '{channel.label}' maps the state onto the zero vector")
    return canonicalize(image)


def jump_operator(psi: StateVector, channel: Channel) -> LinearOperator:
    """A_k[psi] = C_k |psi><psi| / ||C_k psi||; it sends psi onto the normalized image of the forward jump."""
    length = np.sqrt(jump_weight(psi, channel))
    if length**2 < IMAGE_TOL:
        raise ZeroImageError(f"channel '{channel.label}' maps the state onto the zero vector")
    return freeze((channel.operator @ outer(psi, psi)) / length)


def reverse_jump_operator(phi: StateVector, channel: Channel) -> LinearOperator:
    """The adjoint A_k^dagger[phi]; it maps the image C_k phi / ||C_k phi|| back onto phi."""
    return freeze(dagger(jump_operator(phi, channel)))


def reverse_jump_probability(
    source: Ray, target: Ray, channel: Channel, ens: EffectiveEnsemble, t: float, dt: float
) -> float:
    """Conditional probability that a member of `source` jumps back onto `target` through `channel`.

    Returns 0 when the rate is non-negative or when `source` is not the image ray of `target`.

    Raises
    ----------
        * :class:`PositivityBreakdown`
            - If `source` is empty while the reverse flux towards a populated `target` is positive.
    """
    minus = rate_partition(channel.delta(t)).minus
    weight = jump_weight(target.representative, channel)
    if minus == 0.0 or weight < IMAGE_TOL:
        return 0.0
    if not ray_equivalent(source.representative, forward_jump_target(target.representative, channel), ens.tol):
        return 0.0

    n_source = ens.count(source.index)
    n_target = ens.count(target.index)
    if n_source == 0:
        if n_target > 0:
            error = PositivityBreakdown(source.index, target.index, channel.label, channel.delta(t), n_target)
            error.source_state = source.representative
            raise error
        return 0.0
    return dt * minus * (n_target / n_source) * weight


def enumerate_proposals(
    ens: EffectiveEnsemble, model: ModelSpec, t: float, dt: float, p_max: float = DEFAULT_P_MAX
) -> Dict[int, List[JumpProposal]]:
    """Lists every jump the populated rays can make during the step ending at t.

    Image rays missing from the ensemble are appended with count 0, so the ensemble may grow.

    Parameters
    ----------
        * ens: :class:`EffectiveEnsemble`
        * model: :class:`ModelSpec`
        * t: :class:`float`
            - Time at which the rates are evaluated.
        * dt: :class:`float`
        * p_max: :class:`float` | 0.1
            - Largest total jump probability a single ray may have.

    Returns
    ----------
        * Dict[:class:`int`, List[:class:`JumpProposal`]]
            - Proposals keyed by source ray, for every populated ray in ray order.

    Raises
    ----------
        * :class:`PositivityBreakdown`
        * :class:`TimestepTooLarge`
    """
    populated = ens.populated
    proposals: Dict[int, List[JumpProposal]] = {idx: [] for idx in populated}

    for channel in model.channels:
        partition = rate_partition(channel.delta(t))
        if partition.plus == 0.0 and partition.minus == 0.0:
            continue

        for idx in populated:
            origin = ens.ray(idx)
            if jump_weight(origin.representative, channel) < IMAGE_TOL:
                continue
            image = ens.find_or_add(forward_jump_target(origin.representative, channel))
            if partition.plus > 0.0:
                probability = forward_jump_probability(origin.representative, channel, t, dt)
                proposals[idx].append(JumpProposal(idx, image, channel.label, Direction.FORWARD, probability, dt))
            else:
                # members of the image ray return to the populated ray that feeds it
                probability = reverse_jump_probability(ens.ray(image), origin, channel, ens, t, dt)
                proposals[image].append(JumpProposal(image, idx, channel.label, Direction.REVERSE, probability, dt))

    for idx in populated:
        total = total_jump_probability(proposals[idx])
        if total > p_max:
            raise TimestepTooLarge(idx, total, p_max, dt)

    return proposals


def total_jump_probability(proposals_for_ray: Sequence[JumpProposal]) -> float:
    """Sum of the jump probabilities of one ray."""
    return sum(proposal.probability for proposal in proposals_for_ray)


def no_jump_probability(proposals_for_ray: Sequence[JumpProposal]) -> float:
    """Probability of the trivial process: 1 - sum of the jump probabilities of one ray."""
    total = total_jump_probability(proposals_for_ray)
    remaining = 1.0 - total
    if remaining < 0.0:
        first = proposals_for_ray[0]
        raise TimestepTooLarge(first.source_ray, total, 1.0, first.dt)
    return remaining


def sample_transitions(
    ens: EffectiveEnsemble, proposals: Dict[int, List[JumpProposal]], streams: RandomStreams, step: int
) -> List[Transfer]:
    """Draws how many members of each ray take each proposed jump.

    The multinomial over {proposals, no jump} is drawn as a chain of conditional binomials, one random stream per
    (step, ray, slot). All draws use the counts from before the step.
    """
    transfers: List[Transfer] = []
    for idx, ray_proposals in proposals.items():
        remaining = ens.count(idx)
        mass = 1.0
        for slot, proposal in enumerate(ray_proposals):
            if remaining == 0:
                break
            conditional = min(1.0, proposal.probability / mass) if mass > 0.0 else 0.0
            moved = streams.binomial(step, idx, slot, remaining, conditional)
            remaining -= moved
            mass -= proposal.probability
            if moved and proposal.target_ray != proposal.source_ray:
                transfers.append(Transfer(idx, proposal.target_ray, moved, proposal.channel, proposal.direction))
    return transfers


def duality_check(
    psi: Ray, phi: Ray, channel: Channel, ens: EffectiveEnsemble, t: float, dt: float
) -> Tuple[float, float]:
    """Joint probabilities of the forward jump phi -> psi at +|Delta| and the reverse jump psi -> phi at -|Delta|.

    psi must be the image ray of phi under the channel. Joint probabilities are (N_source / N) times the conditional
    ones; the two values agree whenever the ensemble estimate is used for the probabilities.
    """
    magnitude = abs(channel.delta(t))
    forward_channel = channel.with_rate(RateFunction.constant(magnitude))
    reverse_channel = channel.with_rate(RateFunction.constant(-magnitude))

    forward = ens.probability(phi.index) * forward_jump_probability(phi.representative, forward_channel, t, dt)
    reverse = ens.probability(psi.index) * reverse_jump_probability(psi, phi, reverse_channel, ens, t, dt)
    return forward, reverse


def probability_drift(ens: EffectiveEnsemble, model: ModelSpec, t: float, dt: float) -> List[float]:
    """Per-ray increment of the probability distribution over one step, on the ensemble estimate P_j = N_j / N.

    delta P_i = dt [sum_{j,k: ray(C_k phi_j) = phi_i} P_j Delta_k ||C_k phi_j||^2 - P_i sum_k Delta_k ||C_k phi_i||^2]

    with signed rates. Image rays missing from the ensemble are appended with count 0; the increments sum to zero.
    """
    return list(signed_flux(ens.states, [ens.probability(idx) for idx in range(len(ens))], ens, model, t, dt))


def signed_flux(
    states: Sequence[StateVector],
    weights: Sequence[float],
    ray_set,
    model: ModelSpec,
    t: float,
    dt: float,
) -> np.ndarray:
    """Weight increments of the probability-drift equation for arbitrary (possibly negative) ray weights.

    `ray_set` provides `find_or_add(state) -> int` and `__len__`; image rays it appends get a zero weight.
    """
    flows: List[Tuple[int, int, float]] = []
    for idx, (state, weight) in enumerate(zip(states, weights)):
        if weight == 0.0:
            continue
        for channel in model.channels:
            delta = channel.delta(t)
            if delta == 0.0:
                continue
            image_weight = jump_weight(state, channel)
            if image_weight < IMAGE_TOL:
                continue
            image = ray_set.find_or_add(forward_jump_target(state, channel))
            flows.append((idx, image, dt * delta * weight * image_weight))

    increments = np.zeros(len(ray_set), dtype=np.float64)
    for source, target, amount in flows:
        increments[source] -= amount
        increments[target] += amount
    return increments


def marginals(ens: EffectiveEnsemble, proposals: Dict[int, List[JumpProposal]]) -> Tuple[np.ndarray, np.ndarray]:
    """Source and target marginals of the joint one-step process built from the proposals and the trivial process.

    The source marginal reproduces N_j / N; target minus source is the probability drift.
    """
    source = np.zeros(len(ens), dtype=np.float64)
    target = np.zeros(len(ens), dtype=np.float64)
    for idx, ray_proposals in proposals.items():
        weight = ens.probability(idx)
        stay = no_jump_probability(ray_proposals) if ray_proposals else 1.0
        source[idx] += weight * stay
        target[idx] += weight * stay
        for proposal in ray_proposals:
            joint = weight * proposal.probability
            source[proposal.source_ray] += joint
            target[proposal.target_ray] += joint
    return source, target
