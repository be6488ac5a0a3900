"""Closed contours in the c-plane and argument-principle winding numbers."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContourThroughZero

QUARTER = 0.25 * math.pi


@dataclass(frozen=True)
class Region:
    """A closed, positively oriented curve ``z(t)``, t in [0, 1).

    ``kind`` is one of "rectangle", "disk", "semicircle"; ``params`` keeps
    the defining numbers so the region can be resized.
    """

    kind: str
    params: tuple
    n_init: int = 64

    def z(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float) % 1.0
        if self.kind == "disk":
            c, r = self.params
            return c + r * np.exp(2j * math.pi * t)
        if self.kind == "rectangle":
            z0, z1 = self.params
            x0, x1 = min(z0.real, z1.real), max(z0.real, z1.real)
            y0, y1 = min(z0.imag, z1.imag), max(z0.imag, z1.imag)
            corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1),
                       complex(x0, y1), complex(x0, y0)]
            return _polyline(corners, t)
        if self.kind == "semicircle":
            center, R, delta = self.params
            th0 = math.asin(min(delta / R, 1.0))
            rho = math.sqrt(max(R * R - delta * delta, 0.0))
            Lb = 2.0 * rho
            La = R * (math.pi - 2.0 * th0)
            s = t * (Lb + La)
            out = np.empty(t.shape, dtype=complex)
            bottom = s < Lb
            out[bottom] = center - rho + s[bottom] + 1j * delta
            th = th0 + (s[~bottom] - Lb) / R
            out[~bottom] = center + R * np.exp(1j * th)
            return out
        raise ValueError(f"unknown region kind {self.kind!r}")

    def contains(self, c: complex) -> bool:
        c = complex(c)
        if self.kind == "disk":
            center, r = self.params
            return abs(c - center) < r
        if self.kind == "rectangle":
            z0, z1 = self.params
            return (min(z0.real, z1.real) < c.real < max(z0.real, z1.real)
                    and min(z0.imag, z1.imag) < c.imag < max(z0.imag, z1.imag))
        center, R, delta = self.params
        return abs(c - center) < R and c.imag > delta

    def resized(self, amount: float) -> "Region":
        """Grow (amount > 0) or shrink the region by roughly ``amount``."""
        if self.kind == "disk":
            c, r = self.params
            return Region("disk", (c, r + amount), self.n_init)
        if self.kind == "rectangle":
            z0, z1 = self.params
            d = complex(amount, amount)
            return Region("rectangle", (z0 - d, z1 + d), self.n_init)
        center, R, delta = self.params
        return Region("semicircle", (center, R + amount, max(delta - amount, 0.25 * delta)),
                      self.n_init)


def _polyline(corners, t):
    seg = np.array([abs(b - a) for a, b in zip(corners[:-1], corners[1:])])
    cum = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    out = np.empty(t.shape, dtype=complex)
    for i in range(len(seg)):
        m = (t >= cum[i]) & (t < cum[i + 1])
        u = (t[m] - cum[i]) / (cum[i + 1] - cum[i])
        out[m] = corners[i] + u * (corners[i + 1] - corners[i])
    return out


def rectangle(z0: complex, z1: complex, n_init: int = 32) -> Region:
    return Region("rectangle", (complex(z0), complex(z1)), n_init)


def disk(center: complex, radius: float, n_init: int = 64) -> Region:
    return Region("disk", (complex(center), float(radius)), n_init)


def semicircle_region(profile, delta: float, n_init: int = 64) -> Region:
    """Upper half of the semicircle disk enlarged by ``delta`` and cut at
    Im c = delta, so the contour keeps a distance delta from the segment."""
    center = 0.5 * (profile.Umax + profile.Umin)
    R = 0.5 * profile.spread + delta
    return Region("semicircle", (center, R, float(delta)), n_init)


def winding_number(f: Callable[[complex], complex], region: Region,
                   max_nodes: int = 20000, map_fn=map) -> int:
    """Number of zeros of f inside ``region`` by accumulated argument.

    Midpoints are inserted until consecutive values differ in argument by
    less than pi/4.  Raises ContourThroughZero when f vanishes on the
    contour or refinement does not settle.
    """
    ts = list(np.linspace(0.0, 1.0, region.n_init, endpoint=False))
    vals = _eval(f, region, ts, map_fn)
    while True:
        n = len(ts)
        bad = []
        for i in range(n):
            a, b = vals[i], vals[(i + 1) % n]
            if abs(_dphase(a, b)) >= QUARTER:
                bad.append(i)
        if not bad:
            break
        if n + len(bad) > max_nodes:
            raise ContourThroughZero(
                f"argument did not resolve with {max_nodes} nodes on the {region.kind} contour")
        new_t = []
        for i in bad:
            t0 = ts[i]
            t1 = ts[i + 1] if i + 1 < n else 1.0
            if t1 - t0 < 1e-13:
                raise ContourThroughZero("zero of the function on or next to the contour")
            new_t.append(0.5 * (t0 + t1))
        new_v = _eval(f, region, new_t, map_fn)
        merged = sorted(zip(ts + new_t, vals + new_v), key=lambda p: p[0])
        ts = [p[0] for p in merged]
        vals = [p[1] for p in merged]
    total = sum(_dphase(vals[i], vals[(i + 1) % len(vals)]) for i in range(len(vals)))
    w = total / (2.0 * math.pi)
    nw = int(round(w))
    if abs(w - nw) > 1e-6:
        raise ContourThroughZero(f"non-integer winding {w}")
    return nw


def _eval(f, region, ts, map_fn):
    zs = region.z(np.array(ts))
    vals = list(map_fn(f, [complex(z) for z in zs]))
    for z, v in zip(zs, vals):
        if v == 0 or not cmath.isfinite(v):
            raise ContourThroughZero(f"function is {v} at c = {complex(z)}")
    return vals


def _dphase(a: complex, b: complex) -> float:
    d = cmath.phase(b) - cmath.phase(a)
    return (d + math.pi) % (2.0 * math.pi) - math.pi
