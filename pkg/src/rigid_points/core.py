"""Shared conventions: RNG streams, complex Gaussians, disks and point configurations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TOL = 1e-14
ORIGIN_TOL = 1e-14


class RigidPointsError(Exception):
    """Base class for numerical and validation failures raised by this package."""


class BoundaryPoint(RigidPointsError):
    pass


class OriginPoint(RigidPointsError):
    pass


@dataclass(frozen=True)
class RngState:
    """A (master seed, stream) pair.

    Streams are derived with numpy's ``SeedSequence`` hashing, which mixes the
    stream index into the entropy pool; distinct streams are independent for
    practical purposes and identical pairs replay identical draws.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64) or not (0 <= self.stream < 2**64):
            raise ValueError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngState":
        # sub-streams for nested replicas: fold the index into the stream id
        mixed = (self.stream * 0x9E3779B97F4A7C15 + index + 1) % 2**64
        return RngState(self.seed, mixed)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngState or numpy Generator, got {type(rng).__name__}")


def standard_complex_gaussian(rng, size=None):
    """Draw standard complex Gaussians: real and imaginary parts N(0, 1/2), E|xi|^2 = 1."""
    gen = as_generator(rng)
    re = gen.standard_normal(size)
    im = gen.standard_normal(size)
    return (re + 1j * im) * np.sqrt(0.5)


def sample_standard_complex_gaussian(rng) -> complex:
    return complex(standard_complex_gaussian(rng))


@dataclass(frozen=True)
class Disk:
    radius: float
    center: complex = 0j

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        if self.center != 0:
            raise ValueError("only origin-centred disks are supported")

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius


@dataclass(frozen=True)
class PointConfiguration:
    points: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(pts)):
            raise ValueError("configuration contains non-finite points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    def split(self, disk: Disk):
        return split_configuration(self, disk)

    def to_json(self, r0: float, meta: dict | None = None) -> str:
        doc = {"r0": float(r0), "points": [[float(z.real), float(z.imag)] for z in self.points]}
        if meta is not None:
            doc["meta"] = meta
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str):
        doc = json.loads(text)
        pts = np.array([complex(a, b) for a, b in doc["points"]], dtype=complex)
        return cls(pts), float(doc["r0"]), doc.get("meta")


def split_configuration(config, disk: Disk):
    """Return (inside, outside) arrays; raises BoundaryPoint for points on the circle."""
    pts = config.points if isinstance(config, PointConfiguration) else np.asarray(config, dtype=complex)
    pts = pts.reshape(-1)
    dist = np.abs(pts - disk.center)
    on_circle = np.abs(dist - disk.radius) <= BOUNDARY_TOL
    if np.any(on_circle):
        raise BoundaryPoint(f"{int(on_circle.sum())} point(s) within {BOUNDARY_TOL} of |z| = {disk.radius}")
    inside = dist < disk.radius
    return pts[inside], pts[~inside]


def check_no_origin(points, what="configuration"):
    pts = np.asarray(points, dtype=complex)
    if pts.size and np.min(np.abs(pts)) <= ORIGIN_TOL:
        raise OriginPoint(f"{what} has a point within {ORIGIN_TOL} of the origin")
