import numpy as np

from latentmix import LatentSet, LatentShape, LatentTensor


def random_latent(rng: np.random.Generator, shape: LatentShape, scale: float = 1.0) -> LatentTensor:
    return LatentTensor(scale * rng.standard_normal(shape.as_tuple()))


def random_set(
    rng: np.random.Generator, n: int, shape: LatentShape, scale: float = 1.0
) -> LatentSet:
    return LatentSet([random_latent(rng, shape, scale) for _ in range(n)])


def random_small_shape(rng: np.random.Generator) -> LatentShape:
    # spatial extent >= 2 so mean removal never zeroes a channel outright
    return LatentShape(
        int(rng.integers(1, 4)), int(rng.integers(2, 7)), int(rng.integers(2, 7))
    )
