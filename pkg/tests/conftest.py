"""Shared fixtures: the reference arrangements used across the suite."""

import math

import numpy as np
import pytest

import sphex as sx

SIDE = 1.5


def equilateral(radius: float = 1.0, side: float = SIDE):
    c = np.array([
        [0.0, 0.0],
        [side, 0.0],
        [side / 2.0, side * math.sqrt(3.0) / 2.0],
    ])
    return sx.from_centers_radii(c, [radius] * 3)


def tetrahedron(radius: float = 1.0, side: float = SIDE):
    c = np.array([
        [0.0, 0.0, 0.0],
        [side, 0.0, 0.0],
        [side / 2.0, side * math.sqrt(3.0) / 2.0, 0.0],
        [side / 2.0, side / (2.0 * math.sqrt(3.0)),
         side * math.sqrt(2.0 / 3.0)],
    ])
    return sx.from_centers_radii(c, [radius] * 4)


def lens_trio():
    """Two unit circles at distance 1 plus a third that shaves a sliver.

    The chamber (-,-,+) of this arrangement is the classical lens minus
    a small curved triangle; H1 and H2 hold, so every closed form
    applies.
    """
    c = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, -1.5]])
    return sx.from_centers_radii(c, [1.0, 1.0, 0.65])


def embedded_lens(n: int = 2):
    """Two unit spheres at distance 1, the rest huge so the all-minus
    chamber is exactly the lens."""
    if n == 2:
        c = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])
        return sx.from_centers_radii(c, [1.0, 1.0, 4.0])
    c = np.array([
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.5, 0.1, 0.0],
    ])
    return sx.from_centers_radii(c, [1.0, 1.0, 4.0, 4.0])


def gap_fixture(radius: float = 0.8):
    """Equilateral centers whose disks leave a curved triangle uncovered
    in the middle; satisfies H1' so the all-plus chamber is a bounded
    pseudo-simplex."""
    return equilateral(radius=radius)


def jitter_arrangement(gen, n: int = 2, center_scale: float = 0.12,
                       radius_scale: float = 0.08):
    base = equilateral() if n == 2 else tetrahedron()
    c = base.centers + gen.normal(scale=center_scale, size=base.centers.shape)
    r = np.abs(1.0 + gen.normal(scale=radius_scale, size=n + 1))
    return sx.from_centers_radii(c, r)


def random_h1(gen, n: int = 2, tries: int = 300):
    for _ in range(tries):
        try:
            a = jitter_arrangement(gen, n)
        except ValueError:
            continue
        h = sx.check_hypotheses(a, h2="skip")
        if h.h1 is True:
            return a
    raise RuntimeError("failed to draw an H1 arrangement")


def random_h1_prime(gen, tries: int = 300):
    for _ in range(tries):
        base = gap_fixture()
        c = base.centers + gen.normal(scale=0.05, size=base.centers.shape)
        r = np.abs(0.8 + gen.normal(scale=0.03, size=3))
        try:
            a = sx.from_centers_radii(c, r)
        except ValueError:
            continue
        h = sx.check_hypotheses(a, h2="skip")
        if h.h1_prime is True:
            return a
    raise RuntimeError("failed to draw an H1' arrangement")


@pytest.fixture
def tri():
    return equilateral()


@pytest.fixture
def tetra():
    return tetrahedron()


@pytest.fixture
def gap():
    return gap_fixture()


@pytest.fixture
def lens3():
    return lens_trio()
