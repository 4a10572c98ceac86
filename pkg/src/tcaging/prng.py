"""xoshiro256** generator seeded through splitmix64.

Seeding: the 64-bit seed initializes a splitmix64 state, whose first four
outputs become the xoshiro256** state words s0..s3. Uniform doubles in [0, 1)
take the top 53 bits of each 64-bit output: ``(x >> 11) * 2**-53``.
"""

MASK64 = (1 << 64) - 1
_DOUBLE_UNIT = 1.0 / (1 << 53)


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Xoshiro256StarStar:
    def __init__(self, seed: int = 0, state: tuple[int, int, int, int] | None = None):
        if state is None:
            sm = seed & MASK64
            words = []
            for _ in range(4):
                sm, out = splitmix64(sm)
                words.append(out)
            state = tuple(words)
        if not any(state):
            raise ValueError("xoshiro256** state must not be all zero")
        self.s0, self.s1, self.s2, self.s3 = (w & MASK64 for w in state)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s1 * 5) & MASK64
        result = ((((x << 7) | (x >> 57)) & MASK64) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * _DOUBLE_UNIT

    def randbelow(self, n: int) -> int:
        """Integer in [0, n) by scaling a uniform double (n well below 2**53)."""
        return int(self.random() * n)
