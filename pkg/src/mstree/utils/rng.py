"""Portable seeded randomness: SplitMix64, xoshiro256**, Lemire, Fisher-Yates.

Every stream is pinned to these exact algorithms so that trajectories
reproduce bit-for-bit across runs, platforms and implementations:

- SplitMix64: state += 0x9E3779B97F4A7C15, output mixed by
  (z ^ z>>30) * 0xBF58476D1CE4E5B9, (z ^ z>>27) * 0x94D049BB133111EB,
  z ^ z>>31.
- xoshiro256**: state seeded from four consecutive SplitMix64 outputs;
  output rotl(s1 * 5, 7) * 9.
- Bounded integers in [0, s): Lemire's nearly-divisionless multiply-shift,
  rejecting the low word below (2^64 - s) mod s.
- Permutations: Fisher-Yates from the top index down, j = below(i + 1).
- Trial seeds: the (index + 1)-th SplitMix64 output for the master seed.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def splitmix64_mix(z: int) -> int:
    """Apply the SplitMix64 output finalizer to a 64-bit word."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sixty-four bit SplitMix generator, used for seeding."""

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return splitmix64_mix(self.state)


def derive_seed(master: int, index: int) -> int:
    """Seed for trial `index`, independent of scheduling order."""
    return splitmix64_mix((master + (index + 1) * GOLDEN_GAMMA) & MASK64)


class Xoshiro256StarStar:
    """xoshiro256** generator with Lemire bounded sampling."""

    def __init__(self, seed: int) -> None:
        seeder = SplitMix64(seed)
        self.s = [seeder.next() for _ in range(4)]

    def next(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        product = self.next() * bound
        low = product & MASK64
        if low < bound:
            threshold = ((1 << 64) - bound) % bound
            while low < threshold:
                product = self.next() * bound
                low = product & MASK64
        return product >> 64


def fisher_yates(n: int, rng: Xoshiro256StarStar) -> list[int]:
    """Return a uniformly random permutation of the ranks 1..n."""
    perm = list(range(1, n + 1))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def random_permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates permutation of 1..n from a fresh seeded generator."""
    return fisher_yates(n, Xoshiro256StarStar(seed))
