"""Rasterized tube volumes, dimension and content estimates.

Everything here is measured, never derived from the zeta machinery, so it
can serve as an oracle for the tube formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage, optimize

from .errors import EpsilonTooSmall, InsufficientRange, NotConverged, ResourceLimit

MAX_CELLS = 1 << 30
SQ3 = math.sqrt(3.0)

DEFAULT_BOX = {
    "gasket": (-0.125, -0.125, 1.25),
    "carpet": (-0.125, -0.125, 1.25),
    "cantor_graph_rfd": (-0.125, -0.125, 1.25),
    "square_boundary": (-0.125, -0.125, 1.25),
    "circle": (-1.125, -1.125, 2.25),
}


@dataclass
class RasterSet:
    spec: str
    depth: int
    resolution: int  # cells per box side
    box: tuple  # (x0, y0, size)
    fill: np.ndarray  # cell centers inside the depth-d prefractal (filled cells)
    occ: np.ndarray  # fill plus cells met by the sampled edges / curve
    omega: Optional[np.ndarray] = None
    _dist: Optional[np.ndarray] = field(default=None, repr=False)
    _sorted: dict = field(default_factory=dict, repr=False)

    @property
    def h(self) -> float:
        return self.box[2] / self.resolution

    def centers(self):
        x0, y0, _ = self.box
        c = (np.arange(self.resolution) + 0.5) * self.h
        return x0 + c, y0 + c

    def distance(self) -> np.ndarray:
        """Exact Euclidean distance from each cell center to the nearest occupied center."""
        if self._dist is None:
            self._dist = ndimage.distance_transform_edt(~self.occ) * self.h
        return self._dist

    def volumes(self, eps, relative_to_omega: bool = False) -> np.ndarray:
        key = bool(relative_to_omega)
        if key not in self._sorted:
            d = self.distance()
            if key:
                if self.omega is None:
                    raise ValueError(f"{self.spec} has no relative domain")
                d = d[self.omega]
            self._sorted[key] = np.sort(d, axis=None)
        srt = self._sorted[key]
        eps = np.asarray(eps, dtype=float)
        return np.searchsorted(srt, eps, side="right") * self.h ** 2

    def release(self):
        self._dist = None


# -- prefractal geometry -----------------------------------------------------

def cantor_function(x):
    """Cantor function through base-3 digits (digits 2 become binary 1)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = np.zeros_like(x)
    done = x >= 1.0
    out[done] = 1.0
    y = x.copy()
    scale = 0.5
    for _ in range(52):
        y = y * 3
        dgt = np.floor(y)
        y = y - dgt
        live = ~done
        one = live & (dgt == 1)
        two = live & (dgt >= 2)
        out[one] += scale
        done |= one
        out[two] += scale
        scale *= 0.5
    return out


def _gasket_corners(depth: int):
    c = np.zeros((1, 2))
    offs = np.array([[0.0, 0.0], [0.5, 0.0], [0.25, SQ3 / 4]])
    for _ in range(depth):
        c = (c[None, :, :] * 0.5 + offs[:, None, :]).reshape(-1, 2)
    return c


def _gasket_fill(X, Y, depth):
    u = X - Y / SQ3
    v = 2 * Y / SQ3
    n = 1 << depth
    inside = (u >= 0) & (v >= 0) & (u + v <= 1)
    i = np.floor(u * n).astype(np.int64)
    j = np.floor(v * n).astype(np.int64)
    fu, fv = u * n - i, v * n - j
    return inside & ((i & j) == 0) & (fu + fv <= 1) & (i + j < n)


def _carpet_fill(X, Y, depth):
    inside = (X >= 0) & (X <= 1) & (Y >= 0) & (Y <= 1)
    keep = inside.copy()
    x, y = np.clip(X, 0, 1 - 1e-15), np.clip(Y, 0, 1 - 1e-15)
    for _ in range(depth):
        x, y = x * 3, y * 3
        dx, dy = np.floor(x), np.floor(y)
        keep &= ~((dx == 1) & (dy == 1))
        x, y = x - dx, y - dy
    return keep


def _carpet_squares(depth):
    c = np.zeros((1, 2))
    offs = np.array([[a, b] for a in range(3) for b in range(3) if (a, b) != (1, 1)], float) / 3
    for _ in range(depth):
        c = (c[None, :, :] / 3 + offs[:, None, :]).reshape(-1, 2)
    return c


def _mark_points(occ, px, py, box, res):
    x0, y0, size = box
    h = size / res
    ix = np.floor((px - x0) / h).astype(np.int64)
    iy = np.floor((py - y0) / h).astype(np.int64)
    ok = (ix >= 0) & (ix < res) & (iy >= 0) & (iy < res)
    occ[iy[ok], ix[ok]] = True


def _mark_segments(occ, a, b, box, res):
    """Sample segments a->b (arrays of shape (n, 2)) at spacing h/2."""
    h = box[2] / res
    length = float(np.max(np.hypot(*(b - a).T))) if len(a) else 0.0
    k = max(2, int(math.ceil(length / (0.5 * h))) + 1)
    for t in np.linspace(0.0, 1.0, k):
        p = a + t * (b - a)
        _mark_points(occ, p[:, 0], p[:, 1], box, res)


def rasterize(spec: str, depth: int, resolution: int, box: Optional[tuple] = None) -> RasterSet:
    """Occupancy of a planar prefractal on a resolution x resolution grid."""
    if spec not in DEFAULT_BOX:
        raise ValueError(f"unknown raster spec {spec!r}")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if resolution < 256:
        raise ValueError("resolution must be at least 256")
    if resolution * resolution > MAX_CELLS:
        raise ResourceLimit(f"{resolution}^2 cells exceeds the limit of 2^30")
    box = tuple(box) if box is not None else DEFAULT_BOX[spec]
    x0, y0, size = box
    h = size / resolution
    c = x0 + (np.arange(resolution) + 0.5) * h
    cy = y0 + (np.arange(resolution) + 0.5) * h
    omega = None
    occ = np.zeros((resolution, resolution), dtype=bool)
    if spec == "gasket":
        fill = np.zeros_like(occ)
        for r0 in range(0, resolution, 512):  # row blocks keep the temporaries small
            X, Y = np.meshgrid(c, cy[r0:r0 + 512])
            fill[r0:r0 + 512] = _gasket_fill(X, Y, depth)
        corners = _gasket_corners(depth)
        sd = 0.5 ** depth
        p1 = corners
        p2 = corners + [sd, 0.0]
        p3 = corners + [sd / 2, sd * SQ3 / 2]
        for a, b in ((p1, p2), (p2, p3), (p3, p1)):
            _mark_segments(occ, a, b, box, resolution)
    elif spec == "carpet":
        fill = np.zeros_like(occ)
        for r0 in range(0, resolution, 512):
            X, Y = np.meshgrid(c, cy[r0:r0 + 512])
            fill[r0:r0 + 512] = _carpet_fill(X, Y, depth)
        # boundaries of every removed square up to the given depth plus the outer square
        holes = []
        for k in range(1, depth + 1):
            sq = _carpet_squares(k - 1)
            sk = 3.0 ** -k
            holes.append((sq + sk, sk))
        for lo, sk in holes + [(np.zeros((1, 2)), 1.0)]:
            a = lo
            b = lo + [sk, 0]
            cc = lo + [sk, sk]
            d = lo + [0, sk]
            for p, q in ((a, b), (b, cc), (cc, d), (d, a)):
                _mark_segments(occ, p, q, box, resolution)
    elif spec == "cantor_graph_rfd":
        fill = np.zeros_like(occ)
        xs = np.arange(x0, x0 + size, h / 4)
        xs = xs[(xs >= 0) & (xs <= 1)]
        ys = cantor_function(xs)
        _mark_points(occ, xs, ys, box, resolution)
        # the graph is monotone: fill the vertical gaps between consecutive samples
        steps = np.diff(ys)
        big = np.nonzero(steps > 0.5 * h)[0]
        for i in big:
            yy = np.arange(ys[i], ys[i + 1], 0.5 * h)
            _mark_points(occ, np.full_like(yy, xs[i]), yy, box, resolution)
        omega = _cantor_graph_omega(c, cy, depth)
    elif spec == "square_boundary":
        fill = np.zeros_like(occ)
        sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        for k in range(4):
            _mark_segments(occ, sq[k:k + 1], sq[(k + 1) % 4:(k + 1) % 4 + 1], box, resolution)
        X, Y = np.meshgrid(c, cy)
        omega = (X > 0) & (X < 1) & (Y > 0) & (Y < 1)
    else:  # circle
        fill = np.zeros_like(occ)
        n = int(math.ceil(2 * math.pi / (0.5 * h)))
        t = np.linspace(0, 2 * math.pi, n, endpoint=False)
        _mark_points(occ, np.cos(t), np.sin(t), box, resolution)
        X, Y = np.meshgrid(c, cy)
        omega = X ** 2 + Y ** 2 < 1
    occ |= fill
    return RasterSet(spec, depth, resolution, box, fill, occ, omega)


def cantor_graph_gaps(depth: int):
    """(left end, length, level) of every flat part of the Cantor function up to depth."""
    out = []
    lefts = np.array([0.0])
    for k in range(1, depth + 1):
        L = 3.0 ** -k
        gaps = lefts + L  # middle third of each remaining interval of length 3L
        out.append((gaps, L, cantor_function(gaps + L / 2)))
        lefts = np.concatenate([lefts, lefts + 2 * L])
    return out


def _cantor_graph_omega(cx, cy, depth):
    """Isosceles triangles of base L and height L above and below each flat part."""
    om = np.zeros((len(cy), len(cx)), dtype=bool)
    h = cx[1] - cx[0]
    x0 = cx[0] - h / 2
    for gaps, L, lev in cantor_graph_gaps(depth):
        for a, y in zip(gaps, lev):
            i0 = max(int(math.floor((a - x0) / h)), 0)
            i1 = min(int(math.ceil((a + L - x0) / h)), len(cx))
            if i1 <= i0:
                continue
            xs = cx[i0:i1]
            half = L - 2 * np.abs(xs - (a + L / 2))  # triangle height profile
            half = np.where((xs > a) & (xs < a + L), half, -1.0)
            dy = np.abs(cy[:, None] - y)
            om[:, i0:i1] |= dy < half[None, :]
    return om


def cantor_graph_tube_exact(eps: float, depth: int = 60) -> float:
    """|A_eps cap Omega| for the triangle model with vertical distance to the flat parts.

    Each flat part of length L carries two triangles; within vertical
    distance eps the pair covers 2 (L eps - eps^2 / 2) while eps <= L,
    and all of its area L^2 once eps >= L.
    """
    total = 0.0
    for k in range(1, depth + 1):
        L = 3.0 ** -k
        n = 2 ** (k - 1)
        per = L * L if eps >= L else 2 * (L * eps - eps * eps / 2)
        total += n * per
    return total


# -- tube volumes -------------------------------------------------------------

@dataclass
class EmpiricalTube:
    eps: np.ndarray
    V: np.ndarray
    err: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_rows(self):
        return [(float(e), float(v), float(r)) for e, v, r in zip(self.eps, self.V, self.err)]


def tube_volume(raster: RasterSet, eps, relative_to_omega: bool = False,
                fine: Optional[RasterSet] = None) -> EmpiricalTube:
    """Cell-count tube volume; with a second raster at twice the resolution the
    two counts are Richardson-extrapolated (first order in the cell size)."""
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if np.any(eps < 3 * raster.h):
        raise EpsilonTooSmall(f"eps must be at least 3 cells ({3 * raster.h:.3g})")
    Vc = raster.volumes(eps, relative_to_omega)
    meta = {"spec": raster.spec, "depth": raster.depth, "resolution": [raster.resolution],
            "relative": bool(relative_to_omega), "richardson_order": 0}
    if fine is None:
        # one cell of boundary layer as the error estimate
        Vp = raster.volumes(eps + raster.h, relative_to_omega)
        Vm = raster.volumes(eps - raster.h, relative_to_omega)
        return EmpiricalTube(eps, Vc, np.abs(Vp - Vm) / 2, meta)
    Vf = fine.volumes(eps, relative_to_omega)
    V = 2 * Vf - Vc
    meta["resolution"].append(fine.resolution)
    meta["richardson_order"] = 1
    V = np.maximum.accumulate(V)  # keep the monotone envelope
    return EmpiricalTube(eps, V, np.abs(Vf - Vc), meta)


def measure_tube(spec: str, depth: int, resolution: int, eps, relative_to_omega=False,
                 box=None) -> EmpiricalTube:
    """Richardson pair at resolution/2 and resolution."""
    coarse = rasterize(spec, depth, resolution // 2, box)
    Vc = coarse.volumes(np.asarray(eps, float), relative_to_omega)
    if np.any(np.asarray(eps) < 3 * coarse.h):
        raise EpsilonTooSmall(f"eps must be at least 3 coarse cells ({3 * coarse.h:.3g})")
    del coarse
    fine = rasterize(spec, depth, resolution, box)
    Vf = fine.volumes(np.asarray(eps, float), relative_to_omega)
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    V = np.maximum.accumulate(2 * Vf - Vc)
    meta = {"spec": spec, "depth": depth, "resolution": [resolution // 2, resolution],
            "relative": bool(relative_to_omega), "richardson_order": 1}
    return EmpiricalTube(eps, V, np.abs(Vf - Vc), meta)


def check_tube(tube: EmpiricalTube, ceiling: float) -> bool:
    """V nondecreasing in eps and bounded by the ceiling."""
    order = np.argsort(tube.eps)
    v = tube.V[order]
    return bool(np.all(np.diff(v) >= -1e-15) and np.all(v <= ceiling * (1 + 1e-12)))


# -- estimators ---------------------------------------------------------------

def _as_arrays(source, eps_lo=None, eps_hi=None, n=2000):
    if isinstance(source, EmpiricalTube):
        return np.asarray(source.eps, float), np.asarray(source.V, float)
    eps = np.logspace(math.log10(eps_lo), math.log10(eps_hi), n)
    return eps, np.array([source(e) for e in eps])


@dataclass(frozen=True)
class DimFit:
    D: float
    band: float
    slope: float
    points: int


def dim_fit(tube, N: int, eps_lo: float = 1e-8, eps_hi: float = 1e-3) -> DimFit:
    """N minus the least-squares slope of log V against log eps."""
    eps, V = _as_arrays(tube, eps_lo, eps_hi, 400)
    ok = (eps > 0) & (V > 0)
    eps, V = eps[ok], V[ok]
    if len(eps) < 10 or math.log10(eps.max() / eps.min()) < 1.5:
        raise InsufficientRange("need at least 10 points spanning 1.5 decades")
    x, y = np.log(eps), np.log(V)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = coef[0]
    resid = y - A @ coef
    se = math.sqrt(float(resid @ resid) / max(len(x) - 2, 1) / float(((x - x.mean()) ** 2).sum()))
    # the residuals of a log-periodic source are not noise: add their range as a bias bound
    bias = float(resid.max() - resid.min()) / float(x.max() - x.min())
    return DimFit(N - slope, 2 * se + bias, slope, len(x))


def contents(source, D: float, N: int, eps_lo: float = 1e-8, decades: float = 1.5,
             period: Optional[float] = None):
    """(lower, upper) extremes of V(eps)/eps^(N-D) over the smallest 1.5 decades.

    For a callable source the extremes found on a dense log grid are
    refined by a bounded scalar search around each candidate.
    """
    if isinstance(source, EmpiricalTube):
        eps, V = np.asarray(source.eps), np.asarray(source.V)
        lo = eps.min()
        sel = eps <= lo * 10 ** decades
        r = V[sel] / eps[sel] ** (N - D)
        return float(r.min()), float(r.max())
    f = lambda u: source(math.exp(u)) / math.exp(u * (N - D))
    u0, u1 = math.log(eps_lo), math.log(eps_lo) + decades * math.log(10)
    us = np.linspace(u0, u1, 30001)
    vals = np.array([f(u) for u in us])
    du = us[1] - us[0]
    out = []
    for sign, idx in ((1, int(np.argmin(vals))), (-1, int(np.argmax(vals)))):
        a, b = us[max(idx - 1, 0)], us[min(idx + 1, len(us) - 1)]
        r = optimize.minimize_scalar(lambda u: sign * f(u), bounds=(a, b), method="bounded",
                                     options={"xatol": du * 1e-6})
        out.append(sign * min(sign * vals[idx], r.fun))
    return float(out[0]), float(out[1])


def _cesaro_window(f, u_end, length, n_per_unit=4000):
    us = np.linspace(u_end - length, u_end, int(length * n_per_unit) + 1)
    vals = np.array([f(u) for u in us])
    return float(np.trapezoid(vals, us) / length)


def average_content(source, D: float, N: int, eps_lo: float = 1e-8, period: Optional[float] = None,
                    tol: float = 1e-3) -> float:
    """Logarithmic Cesaro average of V(t)/t^(N-D).

    The running integral grows like (average) * log(tau) + const, so the
    slope over whole periods near the small end gives the average while the
    constant from the large-t part drops out. Two windows one decade apart
    must agree within tol (relative).
    """
    if isinstance(source, EmpiricalTube):
        eps, V = np.asarray(source.eps), np.asarray(source.V)
        order = np.argsort(eps)
        u = -np.log(eps[order])
        g = V[order] / eps[order] ** (N - D)
        u, g = u[::-1], g[::-1]
        L = u[-1] - u[0]
        if period:
            L = math.floor(L / period) * period
        if L <= 0:
            raise NotConverged("range shorter than one period")
        sel = u >= u[-1] - L
        return float(np.trapezoid(g[sel], u[sel]) / (u[sel][-1] - u[sel][0]))
    f = lambda u: source(math.exp(-u)) * math.exp(u * (N - D))
    u_end = -math.log(eps_lo)
    length = period * max(1, round(math.log(10) / period)) * 2 if period else 2 * math.log(10)
    a = _cesaro_window(f, u_end, length)
    b = _cesaro_window(f, u_end - math.log(10), length)
    if abs(a - b) > tol * abs(a):
        raise NotConverged(f"Cesaro windows differ: {a} vs {b}")
    return a


@dataclass(frozen=True)
class Oscillation:
    amplitude: float  # peak to trough
    period: Optional[float]  # in log(1/eps) units; None when nothing periodic is seen
    mean: float

    @property
    def semi_amplitude(self) -> float:
        return self.amplitude / 2

    def to_json(self):
        return {"amplitude": self.amplitude, "semi_amplitude": self.semi_amplitude,
                "period": self.period, "mean": self.mean}


def oscillation_from_profile(u: np.ndarray, g: np.ndarray) -> Oscillation:
    """Peak-to-trough amplitude and autocorrelation period of g on a uniform u grid."""
    g = np.asarray(g, float)
    amp = float(g.max() - g.min())
    x = g - g.mean()
    if not np.any(x):
        return Oscillation(0.0, None, float(g.mean()))
    n = len(x)
    ac = np.correlate(x, x, mode="full")[n - 1:]
    ac = ac / ac[0]
    du = u[1] - u[0]
    neg = np.nonzero(ac < 0)[0]
    if not len(neg):
        return Oscillation(amp, None, float(g.mean()))
    start = neg[0]
    lim = n // 2
    if start >= lim:
        return Oscillation(amp, None, float(g.mean()))
    k = start + int(np.argmax(ac[start:lim]))
    if ac[k] < 0.2:
        return Oscillation(amp, None, float(g.mean()))
    if 0 < k < n - 1:
        y0, y1, y2 = ac[k - 1], ac[k], ac[k + 1]
        den = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / den if den else 0.0
    else:
        shift = 0.0
    return Oscillation(amp, float((k + shift) * du), float(g.mean()))


def oscillation_detect(source, D: float, N: int, eps_lo: float = 1e-8, decades: float = 3.0,
                       n: int = 6000) -> Oscillation:
    """Oscillation of V(eps)/eps^(N-D) against log(1/eps)."""
    if isinstance(source, EmpiricalTube):
        eps, V = np.asarray(source.eps), np.asarray(source.V)
        u = -np.log(eps)
        order = np.argsort(u)
        uu = np.linspace(u.min(), u.max(), len(u))
        g = np.interp(uu, u[order], (V / eps ** (N - D))[order])
        return oscillation_from_profile(uu, g)
    u_hi = -math.log(eps_lo)
    uu = np.linspace(u_hi - decades * math.log(10), u_hi, n)
    g = np.array([source(math.exp(-x)) * math.exp(x * (N - D)) for x in uu])
    return oscillation_from_profile(uu, g)


def zeta_from_tube(eps, V, z: complex, N: int, D: float, delta: float) -> complex:
    """Distance zeta rebuilt from sampled tube volumes.

    zeta(s) = delta**(s-N) V(delta) + (N-s) int_0^delta t**(s-N-1) V(t) dt.
    The integral runs in log t with the trapezoid rule over the samples.
    Below the smallest sample V is continued as a power law whose
    coefficient is the mean of V/t**(N-D) over the lowest decade.
    """
    eps = np.asarray(eps, float)
    V = np.asarray(V, float)
    order = np.argsort(eps)
    eps, V = eps[order], V[order]
    if abs(eps[-1] - delta) > 1e-12 * delta:
        raise ValueError("the samples must end at delta")
    u = np.log(eps)
    g = np.exp((z - N) * u) * V
    body = np.trapezoid(g, u)
    low = eps <= eps[0] * 10
    c = float(np.trapezoid((V / eps ** (N - D))[low], u[low]) / (u[low][-1] - u[low][0]))
    t0 = eps[0]
    tail = c * t0 ** (z - D) / (z - D)
    return complex(delta ** (z - N) * V[-1] + (N - z) * (body + tail))
