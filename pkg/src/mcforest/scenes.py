"""Synthetic test scenes.

Shape constants (radii, spreads, spiral pitch) are reconstructions chosen so
the ground-truth groups are visibly separated. Label -1 marks noise. Every
scene is a pure function of (name, seed).
"""

from __future__ import annotations

import math

import numpy as np

from .dataset import PointSet, Window, uniform_in

SCENES = ("cao_two_clusters", "rings", "half_rings", "gaussians_3",
          "noisy_half_rings", "masking_spirals", "cloud3d")

# cao_two_clusters
CAO_NOISE = 950
CAO_CLUSTER = 25
CAO_CENTERS = ((0.4, 0.4), (0.7, 0.7))
CAO_RADIUS = 0.02

# rings: concentric, point counts proportional to circumference
RING_CENTER = (0.5, 0.5)
RING_RADII = (0.15, 0.4)
RING_POINTS = (150, 400)
RING_JITTER = 0.0005

# half_rings: two interleaved half circles
MOON_RADIUS = 0.3
MOON_POINTS = 250
MOON_JITTER = 0.0005

# gaussians_3
GAUSS_CENTERS = ((0.25, 0.25), (0.75, 0.3), (0.5, 0.75))
GAUSS_SPREAD = 0.05
GAUSS_POINTS = 300

# noisy_half_rings
NOISY_MOON_POINTS = 300
NOISY_MOON_NOISE = 300

# cloud3d: sphere shell and torus shell in the unit cube
SPHERE_POINTS = 3274
TORUS_POINTS = 3595
CLOUD_NOISE = 3031
SPHERE_CENTER = (0.3, 0.5, 0.5)
SPHERE_RADIUS = 0.15
TORUS_CENTER = (0.7, 0.5, 0.5)
TORUS_RADII = (0.15, 0.05)
SHELL_JITTER = 0.003


def _disk(rng, n, center, spread):
    return np.asarray(center) + rng.normal(0.0, spread, (n, 2))


def _stratified(rng, n, lo, hi):
    """n parameters on a regular grid of [lo, hi] shifted by up to a tenth of a
    step."""
    return lo + (hi - lo) * (np.arange(n) + 0.5 + rng.uniform(-0.1, 0.1, n)) / n


def _ring(rng, n, center, radius, jitter):
    t = _stratified(rng, n, 0, 2 * math.pi)
    r = radius + rng.normal(0.0, jitter, n)
    return np.asarray(center) + np.c_[r * np.cos(t), r * np.sin(t)]


def _moons(rng, n, radius, jitter):
    t1 = _stratified(rng, n, 0, math.pi)
    t2 = _stratified(rng, n, 0, math.pi)
    r1 = radius + rng.normal(0.0, jitter, n)
    r2 = radius + rng.normal(0.0, jitter, n)
    upper = np.c_[r1 * np.cos(t1), r1 * np.sin(t1)]
    lower = np.c_[radius - r2 * np.cos(t2), radius / 3 - r2 * np.sin(t2)]
    pts = np.vstack([upper, lower])
    return pts + np.array([0.5 - radius / 2, 0.5 - radius / 3]), np.repeat([0, 1], n)


def cao_two_clusters(rng):
    noise = uniform_in(rng, CAO_NOISE, Window.unit(2))
    parts = [noise] + [_uniform_disk(rng, CAO_CLUSTER, c, CAO_RADIUS) for c in CAO_CENTERS]
    labels = np.r_[np.full(CAO_NOISE, -1), np.repeat([0, 1], CAO_CLUSTER)]
    return np.vstack(parts), labels


def rings(rng):
    parts = [_ring(rng, n, RING_CENTER, r, RING_JITTER) for r, n in zip(RING_RADII, RING_POINTS)]
    return np.vstack(parts), np.repeat([0, 1], RING_POINTS)


def half_rings(rng):
    return _moons(rng, MOON_POINTS, MOON_RADIUS, MOON_JITTER)


def gaussians_3(rng):
    parts = [_disk(rng, GAUSS_POINTS, c, GAUSS_SPREAD) for c in GAUSS_CENTERS]
    return np.vstack(parts), np.repeat([0, 1, 2], GAUSS_POINTS)


def noisy_half_rings(rng):
    pts, lab = _moons(rng, NOISY_MOON_POINTS, MOON_RADIUS, MOON_JITTER)
    lo = pts.min(axis=0) - 0.05
    hi = pts.max(axis=0) + 0.05
    noise = uniform_in(rng, NOISY_MOON_NOISE, Window(lo, hi))
    return np.vstack([pts, noise]), np.r_[lab, np.full(NOISY_MOON_NOISE, -1)]


# masking scene: a long dense spiral arm holding a large share of the points,
# two small round clusters and uniform noise in the unit square
MASK_DOMINANT_SHARE = 0.36
MASK_SMALL_SHARE = 0.05
MASK_SMALL_CENTERS = ((0.2, 0.8), (0.8, 0.2))
MASK_SMALL_RADIUS = 0.12
MASK_SPIRAL_TURNS = 1.25
MASK_SPIRAL_JITTER = 0.004


def _spiral(rng, n):
    t = np.sqrt(_stratified(rng, n, 0.15, 1.0))  # even spacing along the arm
    ang = 2 * math.pi * MASK_SPIRAL_TURNS * t
    r = 0.38 * t
    pts = np.c_[0.5 + r * np.cos(ang), 0.5 + r * np.sin(ang)]
    return pts + rng.normal(0.0, MASK_SPIRAL_JITTER, (n, 2))


def _uniform_disk(rng, n, center, radius):
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    t = rng.uniform(0, 2 * math.pi, n)
    return np.asarray(center) + np.c_[r * np.cos(t), r * np.sin(t)]


def masking_scene(rng, n_total: int):
    n_dom = int(round(MASK_DOMINANT_SHARE * n_total))
    n_small = int(round(MASK_SMALL_SHARE * n_total))
    n_noise = n_total - n_dom - 2 * n_small
    parts = [_spiral(rng, n_dom)]
    parts += [_uniform_disk(rng, n_small, c, MASK_SMALL_RADIUS) for c in MASK_SMALL_CENTERS]
    parts.append(uniform_in(rng, n_noise, Window.unit(2)))
    labels = np.r_[np.zeros(n_dom, int), np.full(n_small, 1), np.full(n_small, 2),
                   np.full(n_noise, -1)]
    return np.vstack(parts), labels


def masking_spirals(rng):
    return masking_scene(rng, 7000)


def _sphere_shell(rng, n):
    # Fibonacci lattice: near-even spacing, like the vertices of a scanned mesh
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i + rng.uniform(0, 2 * math.pi)
    rho = np.sqrt(1.0 - z * z)
    v = np.c_[rho * np.cos(phi), rho * np.sin(phi), z]
    r = SPHERE_RADIUS + rng.normal(0.0, SHELL_JITTER, n)  # along the normal only
    return np.asarray(SPHERE_CENTER) + v * r[:, None]


def _torus_shell(rng, n):
    big, small = TORUS_RADII
    area = 4 * math.pi ** 2 * big * small
    step = math.sqrt(area / n)
    # rings around the tube, each holding points in proportion to its length
    n_rings = max(1, int(round(2 * math.pi * small / step)))
    v = 2 * math.pi * (np.arange(n_rings) + 0.5) / n_rings + rng.uniform(0, 2 * math.pi)
    share = (big + small * np.cos(v)) / (big * n_rings)
    counts = np.floor(share * n).astype(int)
    extra = np.argsort(counts - share * n, kind="stable")[: n - counts.sum()]
    counts[extra] += 1
    parts = []
    for vj, cj in zip(v, counts):
        u = _stratified(rng, cj, 0, 2 * math.pi) + rng.uniform(0, 2 * math.pi)
        tube = small + rng.normal(0.0, SHELL_JITTER, cj)  # along the normal only
        rho = big + tube * math.cos(vj)
        parts.append(np.c_[rho * np.cos(u), tube * math.sin(vj), rho * np.sin(u)])
    return np.asarray(TORUS_CENTER) + np.vstack(parts)


def cloud3d(rng):
    parts = [_sphere_shell(rng, SPHERE_POINTS), _torus_shell(rng, TORUS_POINTS),
             uniform_in(rng, CLOUD_NOISE, Window.unit(3))]
    labels = np.r_[np.zeros(SPHERE_POINTS, int), np.ones(TORUS_POINTS, int),
                   np.full(CLOUD_NOISE, -1)]
    return np.vstack(parts), labels


_GENERATORS = {
    "cao_two_clusters": cao_two_clusters,
    "rings": rings,
    "half_rings": half_rings,
    "gaussians_3": gaussians_3,
    "noisy_half_rings": noisy_half_rings,
    "masking_spirals": masking_spirals,
    "cloud3d": cloud3d,
}


def generate_scene(name: str, seed: int) -> PointSet:
    try:
        gen = _GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown scene {name!r}; choose from {', '.join(SCENES)}") from None
    pts, labels = gen(np.random.default_rng(seed))
    return PointSet(pts, labels)


def generate_masking_scene(n_total: int, seed: int) -> PointSet:
    """The masking layout at an arbitrary size."""
    pts, labels = masking_scene(np.random.default_rng(seed), n_total)
    return PointSet(pts, labels)
