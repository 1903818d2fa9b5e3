import math

import numpy as np
import pytest

from src.modules.errors import PositivityBreakdown, TimestepTooLarge, ZeroImageError
from src.modules.jumps.engine import (
    Direction,
    JumpProposal,
    duality_check,
    enumerate_proposals,
    forward_jump_probability,
    forward_jump_target,
    jump_operator,
    marginals,
    no_jump_probability,
    probability_drift,
    reverse_jump_operator,
    reverse_jump_probability,
    sample_transitions,
)
from src.modules.jumps.ensemble import EffectiveEnsemble, ray_equivalent
from src.modules.jumps.streams import RandomStreams
from src.modules.linalg.core import as_operator, as_state, normalize
from src.modules.model.model import Channel, ModelSpec
from src.modules.model.operators import EXCITED, GROUND, SIGMA_MINUS, SIGMA_Z
from src.modules.model.rates import RateFunction

PLUS = normalize(as_state([1, 1]))


def decay(rate: float) -> Channel:
    return Channel("decay", SIGMA_MINUS, RateFunction.constant(rate))


def proposal(probability: float, source: int = 0, target: int = 1) -> JumpProposal:
    return JumpProposal(source, target, "decay", Direction.FORWARD, probability, 0.01)


def test_forward_jump_probability():
    assert forward_jump_probability(EXCITED, decay(2.0), 0.0, 0.01) == pytest.approx(0.02)
    assert forward_jump_probability(PLUS, decay(2.0), 0.0, 0.01) == pytest.approx(0.01)
    assert forward_jump_probability(GROUND, decay(2.0), 0.0, 0.01) == 0.0
    assert forward_jump_probability(EXCITED, decay(-2.0), 0.0, 0.01) == 0.0


def test_forward_jump_target():
    np.testing.assert_allclose(forward_jump_target(EXCITED, decay(1.0)), GROUND)
    np.testing.assert_allclose(forward_jump_target(PLUS, decay(1.0)), GROUND)
    with pytest.raises(ZeroImageError):
        forward_jump_target(GROUND, decay(1.0))


def test_jump_operators_map_between_rays(random_state, rng):
    for _ in range(20):
        operator = as_operator(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        channel = Channel("random", operator, RateFunction.constant(1.0))
        phi = random_state()
        image = forward_jump_target(phi, channel)

        assert ray_equivalent(normalize(jump_operator(phi, channel) @ phi), image)
        # the adjoint restores phi from the normalized image up to a phase
        restored = reverse_jump_operator(phi, channel) @ image
        assert np.linalg.norm(restored) == pytest.approx(1.0)
        assert ray_equivalent(normalize(restored), phi)


def test_reverse_jump_probability():
    ens = EffectiveEnsemble([GROUND, EXCITED], [20, 80])
    g, e = ens.ray(0), ens.ray(1)
    assert reverse_jump_probability(g, e, decay(-1.0), ens, 0.0, 0.01) == pytest.approx(0.04)
    assert reverse_jump_probability(g, e, decay(1.0), ens, 0.0, 0.01) == 0.0
    # e is not the image of g
    assert reverse_jump_probability(e, g, decay(-1.0), ens, 0.0, 0.01) == 0.0


def test_reverse_jump_from_empty_ray_breaks_down():
    ens = EffectiveEnsemble([GROUND, EXCITED], [0, 100])
    with pytest.raises(PositivityBreakdown) as e:
        reverse_jump_probability(ens.ray(0), ens.ray(1), decay(-1.0), ens, 0.0, 0.01)
    assert e.value.source_ray == 0
    assert e.value.target_ray == 1
    assert e.value.target_count == 100
    assert e.value.to_record()["channel"] == "decay"


def test_forward_proposals_append_the_image_ray(markov):
    ens = EffectiveEnsemble.pure(EXCITED, 100)
    proposals = enumerate_proposals(ens, markov, 0.0, 0.01)
    assert len(ens) == 2
    assert ens.counts == [100, 0]
    [jump] = proposals[0]
    assert jump.target_ray == 1
    assert jump.direction == Direction.FORWARD
    assert jump.probability == pytest.approx(0.01)
    assert 1 not in proposals


def test_reverse_proposals_come_from_the_image_ray(constant_decay):
    ens = EffectiveEnsemble([GROUND, EXCITED], [30, 70])
    proposals = enumerate_proposals(ens, constant_decay(-1.0), 0.0, 0.001)
    assert proposals[1] == []
    [jump] = proposals[0]
    assert (jump.source_ray, jump.target_ray) == (0, 1)
    assert jump.direction == Direction.REVERSE
    assert jump.probability == pytest.approx(0.001 * 70 / 30)


def test_no_excited_population_means_no_proposals(constant_decay):
    ens = EffectiveEnsemble.pure(GROUND, 50)
    assert enumerate_proposals(ens, constant_decay(-1.0), 0.0, 0.001) == {0: []}


def test_enumerate_detects_breakdown(constant_decay):
    ens = EffectiveEnsemble.pure(EXCITED, 100)
    with pytest.raises(PositivityBreakdown) as e:
        enumerate_proposals(ens, constant_decay(-1.0), 0.0, 0.001)
    assert (e.value.source_ray, e.value.target_ray) == (1, 0)
    assert e.value.rate == -1.0
    np.testing.assert_allclose(e.value.source_state, GROUND)


def test_timestep_guard(constant_decay):
    ens = EffectiveEnsemble.pure(EXCITED, 100)
    with pytest.raises(TimestepTooLarge) as e:
        enumerate_proposals(ens, constant_decay(200.0), 0.0, 0.001)
    assert e.value.probability == pytest.approx(0.2)
    assert e.value.suggested_dt == pytest.approx(5e-4)


def test_proposals_use_the_jump_probabilities():
    model = ModelSpec(
        hamiltonian=np.zeros((2, 2), dtype=complex),
        channels=(
            Channel("decay", SIGMA_MINUS, RateFunction.constant(-0.5)),
            Channel("dephasing", SIGMA_Z, RateFunction.constant(0.3)),
        ),
        initial_state=EXCITED,
    )
    ens = EffectiveEnsemble([EXCITED, GROUND, PLUS], [30, 50, 20])
    proposals = enumerate_proposals(ens, model, 0.0, 0.01)

    directions = set()
    for ray_proposals in proposals.values():
        for jump in ray_proposals:
            channel = model.channel(jump.channel)
            directions.add(jump.direction)
            if jump.direction is Direction.FORWARD:
                expected = forward_jump_probability(ens.states[jump.source_ray], channel, 0.0, 0.01)
            else:
                expected = reverse_jump_probability(
                    ens.ray(jump.source_ray), ens.ray(jump.target_ray), channel, ens, 0.0, 0.01
                )
            assert jump.probability == expected
        total = sum(jump.probability for jump in ray_proposals)
        assert no_jump_probability(ray_proposals) == pytest.approx(1.0 - total)

    assert directions == {Direction.FORWARD, Direction.REVERSE}
    assert [jump.probability for jump in proposals[1] if jump.direction is Direction.REVERSE] == pytest.approx(
        [0.003, 0.001]
    )


def test_no_jump_probability():
    assert no_jump_probability([proposal(0.02), proposal(0.03)]) == pytest.approx(0.95)
    assert no_jump_probability([]) == 1.0
    with pytest.raises(TimestepTooLarge):
        no_jump_probability([proposal(0.7), proposal(0.5)])


def test_sampling_is_deterministic_per_seed(markov):
    def draw(seed):
        ens = EffectiveEnsemble.pure(EXCITED, 1000)
        proposals = enumerate_proposals(ens, markov, 0.0, 0.05)
        streams = RandomStreams(seed)
        return [sample_transitions(ens, proposals, streams, step) for step in range(1, 6)]

    assert draw(11) == draw(11)
    assert draw(11) != draw(12)


def test_zero_probability_moves_nobody():
    ens = EffectiveEnsemble([GROUND, EXCITED], [10, 10])
    proposals = {1: [proposal(0.0, 1, 0)]}
    assert sample_transitions(ens, proposals, RandomStreams(0), step=1) == []


def test_binomial_statistics():
    size = 100_000
    ens = EffectiveEnsemble([EXCITED, GROUND], [size, 0])
    transfers = sample_transitions(ens, {0: [proposal(0.02)]}, RandomStreams(5), step=1)
    moved = sum(transfer.count for transfer in transfers)
    sigma = math.sqrt(size * 0.02 * 0.98)
    assert abs(moved - size * 0.02) < 4 * sigma

    ens.apply_transfers(transfers)
    assert sum(ens.counts) == size


def test_chained_binomials_split_between_proposals():
    size = 100_000
    third = normalize(as_state([1, 1j]))
    ens = EffectiveEnsemble([EXCITED, GROUND, third], [size, 0, 0])
    proposals = {0: [proposal(0.03, 0, 1), proposal(0.05, 0, 2)]}
    transfers = sample_transitions(ens, proposals, RandomStreams(9), step=4)
    moved = {transfer.target: transfer.count for transfer in transfers}
    for target, p in ((1, 0.03), (2, 0.05)):
        assert abs(moved[target] - size * p) < 4 * math.sqrt(size * p * (1 - p))


def test_duality_example():
    ens = EffectiveEnsemble([GROUND, EXCITED], [70, 30])
    forward, reverse = duality_check(ens.ray(0), ens.ray(1), decay(1.0), ens, 0.0, 0.01)
    assert forward == pytest.approx(3e-3)
    assert reverse == pytest.approx(forward, rel=1e-14)


def test_duality_on_random_ensembles(random_state, rng):
    checked = 0
    while checked < 1000:
        operator = as_operator(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        channel = Channel("random", operator, RateFunction.constant(float(rng.uniform(0.1, 5.0))))
        phi = random_state()
        psi = forward_jump_target(phi, channel)
        if ray_equivalent(phi, psi):
            continue
        ens = EffectiveEnsemble([psi, phi], [int(rng.integers(1, 1000)), int(rng.integers(1, 1000))])
        dt = float(rng.uniform(1e-4, 1e-2))
        forward, reverse = duality_check(ens.ray(0), ens.ray(1), channel, ens, 0.0, dt)
        assert forward > 0.0
        assert reverse == pytest.approx(forward, rel=1e-14)
        checked += 1


@pytest.mark.parametrize("rate, counts", [(1.0, [30, 70]), (-1.0, [30, 70]), (-0.5, [90, 10])])
def test_marginals_reproduce_the_probability_drift(constant_decay, rate, counts):
    model = constant_decay(rate)
    ens = EffectiveEnsemble([GROUND, EXCITED], counts)
    dt = 0.001
    proposals = enumerate_proposals(ens, model, 0.0, dt)
    source, target = marginals(ens, proposals)
    np.testing.assert_allclose(source, np.array(counts) / sum(counts), atol=1e-15)
    np.testing.assert_allclose(target - source, probability_drift(ens, model, 0.0, dt), atol=1e-15)


def test_probability_drift_sums_to_zero(dephasing_pair):
    ens = EffectiveEnsemble.pure(dephasing_pair.initial_state, 100)
    drift = probability_drift(ens, dephasing_pair, 0.0, 0.01)
    assert len(drift) == 3
    assert sum(drift) == pytest.approx(0.0, abs=1e-15)
    # decay 0.5 and dephasing 1.0, each on half or all of the weight
    assert drift[0] == pytest.approx(-0.01 * (0.5 * 0.5 + 1.0))


def test_streams_do_not_depend_on_draw_order():
    streams = RandomStreams(123)
    first = streams.binomial(7, 2, 1, 10_000, 0.3)
    streams.binomial(7, 2, 0, 10_000, 0.3)
    streams.binomial(8, 0, 0, 10_000, 0.3)
    assert RandomStreams(123).binomial(7, 2, 1, 10_000, 0.3) == first
    assert streams.binomial(1, 0, 0, 0, 0.5) == 0
    assert streams.binomial(1, 0, 0, 25, 1.0) == 25
    with pytest.raises(ValueError):
        RandomStreams(-1)
