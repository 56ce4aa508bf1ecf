"""Degeneracy curves, linking numbers, and the interlock phase rule.

A real two-level Hamiltonian field H(R) = A1(R) sigma1 + A3(R) sigma3 is
degenerate where both coefficient fields vanish; generically that zero set
is a curve in 3-space.  The loop phase of the ground band around a probe
loop is 0 or pi, and it is pi exactly when the probe links the degeneracy
curve an odd number of times.  This module traces the curves, computes
Gauss linking numbers exactly per segment pair, and exposes the parity
rule and the dimension-counting table for n-level real Hamiltonians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import berry
from .errors import (GeometryError, NonTransversalError, ResolutionError,
                     RootNotFoundError, StabilityError)

_CLOSURE_TOL = 1e-12


@dataclass(frozen=True)
class Curve3D:
    """Closed oriented polyline in 3-space: first point repeated last."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be an (N, 3) array")
        if pts.shape[0] < 8:
            raise ValueError("a closed curve needs at least 8 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("curve points must be finite")
        if np.linalg.norm(pts[0] - pts[-1]) > _CLOSURE_TOL:
            raise ValueError("curve is not closed (first and last points differ)")
        pts = pts.copy()
        pts[-1] = pts[0]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_function(cls, fn: Callable[[float], object], samples: int) -> "Curve3D":
        """Sample fn on [0, 1]; fn(1) must return to fn(0) within 1e-9."""
        if samples < 8:
            raise ValueError("need at least 8 samples")
        pts = np.array([np.asarray(fn(t), dtype=float)
                        for t in np.linspace(0.0, 1.0, samples + 1)])
        if np.linalg.norm(pts[0] - pts[-1]) > 1e-9:
            raise ValueError("fn does not close the loop")
        pts[-1] = pts[0]
        return cls(pts)

    @classmethod
    def circle(cls, center, radius: float, normal, samples: int = 200,
               turns: int = 1) -> "Curve3D":
        """Planar circle (optionally wound several turns) about an axis."""
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        n = np.asarray(normal, dtype=float)
        n = n / np.linalg.norm(n)
        trial = np.array([1.0, 0.0, 0.0])
        if abs(trial @ n) > 0.9:
            trial = np.array([0.0, 1.0, 0.0])
        u = np.cross(n, trial)
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        ang = np.linspace(0.0, 2.0 * math.pi * turns, samples + 1)
        c = np.asarray(center, dtype=float)
        pts = (c[None, :] + radius * np.cos(ang)[:, None] * u[None, :]
               + radius * np.sin(ang)[:, None] * v[None, :])
        pts[-1] = pts[0]
        return cls(pts)

    @property
    def segment_count(self) -> int:
        return self.points.shape[0] - 1

    def reversed(self) -> "Curve3D":
        return Curve3D(self.points[::-1])

    def transformed(self, rotation=None, scale: float = 1.0,
                    translation=(0.0, 0.0, 0.0)) -> "Curve3D":
        pts = self.points * float(scale)
        if rotation is not None:
            pts = pts @ np.asarray(rotation, dtype=float).T
        return Curve3D(pts + np.asarray(translation, dtype=float))


@dataclass(frozen=True)
class RealFieldHamiltonian:
    """Coefficient fields of H(R) = a1(R) sigma1 + a3(R) sigma3 over 3-space."""

    a1: Callable[[np.ndarray], float]
    a3: Callable[[np.ndarray], float]

    def value(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        out = np.array([float(self.a1(x)), float(self.a3(x))])
        if not np.all(np.isfinite(out)):
            raise ValueError(f"field is not finite at {x.tolist()}")
        return out


@dataclass(frozen=True)
class DegeneracyCount:
    """Dimension bookkeeping for degeneracies of real symmetric n-level H."""

    n: int
    parameter_dim: int
    real_codimension: int
    degeneracy_dim: int


def degeneracy_count(n: int) -> DegeneracyCount:
    """Counting table for an n-level real Hamiltonian family.

    parameter_dim counts independent traceless generators (n^2 - 1 for the
    full complex family); real_codimension counts the vanishing conditions
    for a real symmetric pair degeneracy, n(n+1)/2 - 1; their difference
    n(n-1)/2 is the generic dimension of the degeneracy set.  The two
    summands are reported separately because "dimension" alone is ambiguous.
    """
    if n < 2:
        raise ValueError("need at least 2 levels")
    parameter_dim = n * n - 1
    real_codim = n * (n + 1) // 2 - 1
    return DegeneracyCount(n=n, parameter_dim=parameter_dim,
                           real_codimension=real_codim,
                           degeneracy_dim=parameter_dim - real_codim)


# ---------------------------------------------------------------------------
# Gauss linking number

def _min_point_distance(a: np.ndarray, b: np.ndarray) -> float:
    best = math.inf
    for block in range(0, a.shape[0], 256):
        chunk = a[block:block + 256]
        d2 = np.sum((chunk[:, None, :] - b[None, :, :]) ** 2, axis=2)
        best = min(best, float(d2.min()))
    return math.sqrt(best)


def _unitize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return np.where(norm > 1e-300, v / np.maximum(norm, 1e-300), 0.0)


def gauss_linking_sum(a: Curve3D, b: Curve3D) -> float:
    """Gauss double integral over all segment pairs, before rounding.

    Each pair contributes the exact signed solid angle of the quadrilateral
    spanned by the two segments (sum of four arcsin terms), so the total is
    exact for the polygons themselves rather than a quadrature estimate.
    """
    pa, pb = a.points[:-1], a.points[1:]
    qa, qb = b.points[:-1], b.points[1:]
    ta = pb - pa
    tb = qb - qa
    total = 0.0
    for block in range(0, pa.shape[0], 128):
        sl = slice(block, block + 128)
        r1 = qa[None, :, :] - pa[sl][:, None, :]
        r2 = qb[None, :, :] - pa[sl][:, None, :]
        r3 = qb[None, :, :] - pb[sl][:, None, :]
        r4 = qa[None, :, :] - pb[sl][:, None, :]
        n1 = _unitize(np.cross(r1, r2))
        n2 = _unitize(np.cross(r2, r3))
        n3 = _unitize(np.cross(r3, r4))
        n4 = _unitize(np.cross(r4, r1))

        def dots(u, v):
            return np.clip(np.einsum("ijk,ijk->ij", u, v), -1.0, 1.0)

        omega = (np.arcsin(dots(n1, n2)) + np.arcsin(dots(n2, n3))
                 + np.arcsin(dots(n3, n4)) + np.arcsin(dots(n4, n1)))
        sign = np.sign(np.einsum("ijk,ijk->ij",
                                 np.cross(tb[None, :, :], ta[sl][:, None, :]), r1))
        total += float(np.sum(omega * sign))
    return total / (4.0 * math.pi)


def linking_number(a: Curve3D, b: Curve3D) -> int:
    """Linking number of two disjoint closed curves, rounded from the exact
    segment-pair solid-angle sum.

    Curves closer than 1e-9 are treated as touching (GeometryError); a
    pre-rounding residual above 0.05 means the polygons are too coarse for
    their separation and raises ResolutionError.
    """
    if _min_point_distance(a.points, b.points) < 1e-9:
        raise GeometryError("curves touch; linking number undefined")
    raw = gauss_linking_sum(a, b)
    nearest = round(raw)
    residual = abs(raw - nearest)
    if residual > 0.05:
        raise ResolutionError(
            f"linking sum {raw:.4f} is not close to an integer; "
            "refine the curve sampling", residual=residual)
    return int(nearest)


def topological_phase_predict(probe: Curve3D, degeneracy: Curve3D) -> float:
    """Loop phase forced by time reversal: pi for odd linking, else 0."""
    return math.pi * (linking_number(probe, degeneracy) % 2)


def real_field_loop_phase(h: RealFieldHamiltonian, probe: Curve3D) -> float:
    """Ground-band loop phase of a1 sigma1 + a3 sigma3 along the probe.

    The coefficient pair traces a planar loop (a1, 0, a3) on which the
    spin-half loop phase is evaluated; time reversal confines the answer
    to {0, pi} up to sampling error.  Probe points sitting on the
    degeneracy set raise DegeneracyError from the phase evaluation.
    """
    pts = probe.points[:-1]
    coeffs = np.array([[h.a1(x), 0.0, h.a3(x)] for x in pts])
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("field is not finite along the probe")
    return berry.wilson_loop_phase(coeffs)


# ---------------------------------------------------------------------------
# Degeneracy-curve tracing

@dataclass(frozen=True)
class DegeneracyTrace:
    """Polyline on the zero set {a1 = a3 = 0}; open traces span the box."""

    points: np.ndarray
    closed: bool

    def curve(self) -> Curve3D:
        if not self.closed:
            raise GeometryError("trace is open (curve leaves the box); "
                                "no closed curve to return")
        return Curve3D(np.vstack([self.points, self.points[:1]]))


def _field_jacobian(h: RealFieldHamiltonian, x: np.ndarray) -> np.ndarray:
    jac = np.empty((2, 3))
    for k in range(3):
        step = 1e-6 * (1.0 + abs(x[k]))
        xp = x.copy(); xp[k] += step
        xm = x.copy(); xm[k] -= step
        jac[:, k] = (h.value(xp) - h.value(xm)) / (2.0 * step)
    return jac


def _newton_correct(h: RealFieldHamiltonian, x: np.ndarray,
                    tol: float = 1e-11, iterations: int = 40) -> np.ndarray | None:
    """Damped least-norm Newton onto the zero set; the correction lies in
    the row space of the Jacobian, i.e. normal to the curve."""
    x = x.copy()
    f = h.value(x)
    for _ in range(iterations):
        res = np.linalg.norm(f)
        if res < tol:
            return x
        jac = _field_jacobian(h, x)
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        lam = 1.0
        for _ in range(10):
            trial = x + lam * step
            ftrial = h.value(trial)
            if np.linalg.norm(ftrial) < res:
                x, f = trial, ftrial
                break
            lam *= 0.5
        else:
            return None
    return x if np.linalg.norm(f) < tol else None


def _tangent(h: RealFieldHamiltonian, x: np.ndarray) -> np.ndarray:
    jac = _field_jacobian(h, x)
    _, s, vt = np.linalg.svd(jac)
    if s[1] < 1e-8 * max(s[0], 1e-300):
        raise NonTransversalError(
            f"Jacobian rank < 2 at {x.tolist()}: zero set is not a transverse curve")
    return vt[2]


def _inside(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    return bool(np.all(x >= lo - 1e-9) and np.all(x <= hi + 1e-9))


def _clip_to_box(inside_pt: np.ndarray, outside_pt: np.ndarray,
                 lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    d = outside_pt - inside_pt
    s = 1.0
    for k in range(3):
        if d[k] > 0 and outside_pt[k] > hi[k]:
            s = min(s, (hi[k] - inside_pt[k]) / d[k])
        elif d[k] < 0 and outside_pt[k] < lo[k]:
            s = min(s, (lo[k] - inside_pt[k]) / d[k])
    return inside_pt + max(s, 0.0) * d


def _march(h: RealFieldHamiltonian, start: np.ndarray, tangent0: np.ndarray,
           step0: float, lo: np.ndarray, hi: np.ndarray,
           max_points: int = 100000):
    """Follow the curve from start along tangent0; returns (points after
    start, 'closed'|'exited')."""
    points = []
    x = start
    t_prev = tangent0
    step = step0
    for _ in range(max_points):
        predictor = x + step * t_prev
        if not _inside(predictor, lo, hi):
            points.append(_clip_to_box(x, predictor, lo, hi))
            return points, "exited"
        corrected = _newton_correct(h, predictor)
        halvings = 0
        while corrected is None:
            halvings += 1
            if halvings > 10:
                raise StabilityError("continuation stalled: Newton correction "
                                     "failed at 10 successive step halvings")
            step *= 0.5
            predictor = x + step * t_prev
            corrected = _newton_correct(h, predictor)
        x = corrected
        points.append(x)
        if len(points) >= 8 and np.linalg.norm(x - start) < 0.75 * step0:
            return points, "closed"
        t = _tangent(h, x)
        if t @ t_prev < 0:
            t = -t
        t_prev = t
        step = min(step * 2.0, step0)
    raise StabilityError("continuation exceeded the point budget")


def degeneracy_curve(h: RealFieldHamiltonian, box, resolution: int = 21) -> DegeneracyTrace:
    """Trace the zero curve of (a1, a3) inside an axis-aligned box.

    box is ((x0, x1), (y0, y1), (z0, z1)).  A coarse grid scan seeds a
    damped Newton solve; the curve is then continued along the Jacobian
    null direction with step 1/100 of the box diagonal, halved on Newton
    failure up to 10 times.  A trace returning to its start closes up; one
    leaving the box is continued from the seed in the opposite direction
    and returned open, spanning the box, with closed=False.
    """
    lo = np.array([float(b[0]) for b in box])
    hi = np.array([float(b[1]) for b in box])
    if np.any(hi <= lo):
        raise ValueError("box must have positive extent on every axis")
    if resolution < 4:
        raise ValueError("resolution must be at least 4")

    axes = [np.linspace(lo[k], hi[k], resolution) for k in range(3)]
    best, best_norm = None, math.inf
    for x0 in axes[0]:
        for y0 in axes[1]:
            for z0 in axes[2]:
                p = np.array([x0, y0, z0])
                nrm = float(np.linalg.norm(h.value(p)))
                if nrm < best_norm:
                    best, best_norm = p, nrm
    root = _newton_correct(h, best)
    if root is None or not _inside(root, lo, hi):
        raise RootNotFoundError("no zero of (a1, a3) found in the box")

    diag = float(np.linalg.norm(hi - lo))
    step0 = diag / 100.0
    t0 = _tangent(h, root)
    forward, status = _march(h, root, t0, step0, lo, hi)
    if status == "closed":
        pts = np.vstack([root[None, :], np.array(forward[:-1])])
        return DegeneracyTrace(points=pts, closed=True)
    backward, status_b = _march(h, root, -t0, step0, lo, hi)
    if status_b == "closed":
        # curvature carried the forward leg out of the box but the loop
        # closes; keep the backward closed trace
        pts = np.vstack([root[None, :], np.array(backward[:-1])])
        return DegeneracyTrace(points=pts, closed=True)
    pts = np.vstack([np.array(backward[::-1]), root[None, :], np.array(forward)])
    return DegeneracyTrace(points=pts, closed=False)
