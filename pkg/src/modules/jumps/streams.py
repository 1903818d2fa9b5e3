import numpy as np


class RandomStreams:
    """Counter-based random streams derived from one master seed.

    Every (step, ray, slot) triple owns an independent Philox generator, so a draw never depends on how many draws
    happened before it or on which thread asked for it.

    Parameters
    ----------
        * seed: :class:`int`
            - Non-negative master seed (up to 64 bits).
    """

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)

    def generator(self, step: int, ray: int, slot: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=(step, ray, slot))
        return np.random.Generator(np.random.Philox(sequence))

    def binomial(self, step: int, ray: int, slot: int, trials: int, probability: float) -> int:
        if trials == 0 or probability <= 0.0:
            return 0
        if probability >= 1.0:
            return trials
        return int(self.generator(step, ray, slot).binomial(trials, probability))
