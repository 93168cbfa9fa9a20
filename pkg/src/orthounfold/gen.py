"""Seeded generator of valid polycubes with orthogonally convex layers.

Everything is integer-only and driven by splitmix64, so a (seed, config)
pair reproduces the same instance on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import Polycube, validate

MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 (Steele, Lea, Flood 2014); 64-bit state, 64-bit output."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.below(hi - lo + 1)


@dataclass(frozen=True)
class GenConfig:
    max_layers: int = 6
    max_extent: int = 10
    max_attempts: int = 10_000


def _monotone_pair(rng: SplitMix64, h: int, width: int) -> list[tuple[int, int]]:
    """Row intervals of an hv-convex polyomino inside ``width`` columns.

    Left ends descend then ascend, right ends ascend then descend, and
    consecutive rows overlap; that is exactly row/column convexity plus
    connectivity.
    """
    turn_lo = rng.below(h)
    turn_hi = rng.below(h)
    lo = [0] * h
    hi = [0] * h
    lo[turn_lo] = rng.below(width)
    for k in range(turn_lo - 1, -1, -1):
        lo[k] = rng.between(lo[k + 1], width - 1)
    for k in range(turn_lo + 1, h):
        lo[k] = rng.between(lo[k - 1], width - 1)
    hi[turn_hi] = rng.between(lo[turn_hi], width - 1)
    for k in range(turn_hi - 1, -1, -1):
        hi[k] = rng.between(lo[k], hi[k + 1]) if lo[k] <= hi[k + 1] else lo[k]
    for k in range(turn_hi + 1, h):
        hi[k] = rng.between(lo[k], hi[k - 1]) if lo[k] <= hi[k - 1] else lo[k]
    return list(zip(lo, hi))


def random_orthoconvex_polyomino(rng: SplitMix64, max_extent: int) -> frozenset:
    """A random connected, orthogonally convex polyomino (may need retries)."""
    w = rng.between(1, max_extent)
    h = rng.between(1, max_extent)
    rows = _monotone_pair(rng, h, w)
    return frozenset((x, y) for y, (lo, hi) in enumerate(rows) for x in range(lo, hi + 1))


def random_polycube(rng: SplitMix64, cfg: GenConfig = GenConfig()) -> Polycube:
    """Stack random orthoconvex layers until the result validates."""
    from .model import is_connected_2d, is_orthogonally_convex

    for _ in range(cfg.max_attempts):
        m = rng.between(1, cfg.max_layers)
        layers = []
        while len(layers) < m:
            poly = random_orthoconvex_polyomino(rng, cfg.max_extent)
            if not (is_connected_2d(poly) and is_orthogonally_convex(poly)):
                continue
            if layers:
                prev = layers[-1]
                px = [x for x, _ in prev]
                py = [y for _, y in prev]
                dx = rng.between(min(px) - cfg.max_extent // 2, max(px))
                dy = rng.between(min(py) - cfg.max_extent // 2, max(py))
                poly = frozenset((x + dx, y + dy) for x, y in poly)
                if not poly & prev:
                    continue
            layers.append(poly)
        cubes = [(x, y, z) for z, poly in enumerate(layers) for x, y in poly]
        p = Polycube.from_cubes(cubes)
        if validate(p).ok:
            return p
    raise RuntimeError("generator exhausted its attempt budget")


def instance_seed(seed: int, index: int) -> int:
    """Per-instance seed derived from a run seed."""
    return SplitMix64((seed + index * 0x9E3779B97F4A7C15) & MASK64).next_u64()


def generate(seed: int, index: int, cfg: GenConfig = GenConfig()) -> Polycube:
    return random_polycube(SplitMix64(instance_seed(seed, index)), cfg)
