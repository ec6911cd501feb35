"""Star-shaped domains and the ray geometry used by the singular quadrature.

Every domain here is star-shaped with respect to the closed unit ball
centered at the origin: for any z in the domain and any b with |b| <= 1
the whole segment [b, z] stays inside.  That containment requirement is
what makes the integral kernels vanish identically outside the domain,
so it is enforced at construction time.

Supported shapes:

* ``ball``       radius R0 > 1, centered at the origin
* ``ellipsoid``  semi-axes a, b, c, all > 1
* ``box``        half-widths h1, h2, h3, all > 1
* ``radial``     boundary radius r(u) tabulated over a product sphere
                 grid, min r > 1; interpolated bilinearly in (theta, phi)

Membership is strict: boundary points count as outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StarDomain",
    "RaySegments",
    "ball",
    "ellipsoid",
    "box",
    "radial",
    "radial_from_function",
    "parse_domain",
    "domain_spec_string",
    "contains",
    "boundary_distance",
    "radial_gap",
    "ray_segments",
    "validate_star_shape",
    "normalize_domain",
    "DomainNormalization",
    "sample_interior",
    "sample_directions",
]

_EPS_RAY = 1e-14


@dataclass(frozen=True)
class StarDomain:
    """A bounded domain star-shaped w.r.t. the closed unit ball at the origin.

    ``kind`` is one of ``ball``, ``ellipsoid``, ``box``, ``radial``.
    ``params`` holds the shape parameters; for ``radial`` the table of
    boundary radii lives in ``table`` with its (theta, phi) grid.
    """

    kind: str
    params: tuple = ()
    # radial tables: cos(theta) rows (descending theta grid not required),
    # phi columns, and the n_polar x n_azimuth radius values.
    table: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("ball", "ellipsoid", "box", "radial"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "ball":
            (r0,) = self.params
            if not r0 > 1.0:
                raise ValueError("ball radius must exceed 1 (unit ball containment)")
        elif self.kind == "ellipsoid":
            if min(self.params) <= 1.0:
                raise ValueError("ellipsoid semi-axes must exceed 1")
        elif self.kind == "box":
            if min(self.params) <= 1.0:
                raise ValueError("box half-widths must exceed 1")
        else:
            _, _, rvals = self.table
            if np.min(rvals) <= 1.0:
                raise ValueError("radial table must stay above 1 everywhere")

    # -- scalar geometric descriptors -------------------------------------

    @property
    def circumradius(self) -> float:
        if self.kind == "ball":
            return self.params[0]
        if self.kind == "ellipsoid":
            return max(self.params)
        if self.kind == "box":
            return math.sqrt(sum(h * h for h in self.params))
        return float(np.max(self.table[2]))

    @property
    def inradius(self) -> float:
        if self.kind == "ball":
            return self.params[0]
        if self.kind == "ellipsoid":
            return min(self.params)
        if self.kind == "box":
            return min(self.params)
        return float(np.min(self.table[2]))

    @property
    def diameter(self) -> float:
        return 2.0 * self.circumradius

    def scaled(self, factor: float) -> "StarDomain":
        """The image of this domain under x -> factor * x."""
        if factor <= 0.0:
            raise ValueError("scale factor must be positive")
        if self.kind == "radial":
            ct, ph, rv = self.table
            return StarDomain("radial", table=(ct, ph, rv * factor))
        return StarDomain(self.kind, tuple(p * factor for p in self.params))


@dataclass(frozen=True)
class RaySegments:
    """Maximal sub-intervals of {origin + t*direction : 0 <= t <= t_max}
    lying inside the domain.  ``segments`` is a tuple of (lo, hi) pairs,
    disjoint and increasing."""

    origin: np.ndarray
    direction: np.ndarray
    t_max: float
    segments: tuple


# -- constructors ----------------------------------------------------------


def ball(r0: float) -> StarDomain:
    return StarDomain("ball", (float(r0),))


def ellipsoid(a: float, b: float, c: float) -> StarDomain:
    return StarDomain("ellipsoid", (float(a), float(b), float(c)))


def box(h1: float, h2: float, h3: float) -> StarDomain:
    return StarDomain("box", (float(h1), float(h2), float(h3)))


def radial(cos_theta: np.ndarray, phi: np.ndarray, rvals: np.ndarray) -> StarDomain:
    """Radial domain from a boundary-radius table.

    ``cos_theta`` must be strictly decreasing (north to south pole),
    ``phi`` strictly increasing in [0, 2*pi), ``rvals`` shaped
    (len(cos_theta), len(phi)).
    """
    ct = np.asarray(cos_theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    rv = np.asarray(rvals, dtype=float)
    if rv.shape != (ct.size, ph.size):
        raise ValueError("radius table shape does not match the angular grid")
    if np.any(np.diff(ct) >= 0):
        raise ValueError("cos_theta rows must be strictly decreasing")
    if np.any(np.diff(ph) <= 0):
        raise ValueError("phi columns must be strictly increasing")
    return StarDomain("radial", table=(ct, ph, rv))


def radial_from_function(fn, n_polar: int = 32, n_azimuth: int = 64) -> StarDomain:
    """Tabulate r(u) = fn(u) over a Gauss-Legendre x uniform angular grid."""
    ct, _ = np.polynomial.legendre.leggauss(n_polar)
    ct = ct[::-1]  # descending: north pole first
    ph = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    st = np.sqrt(np.maximum(0.0, 1.0 - ct**2))
    u = np.empty((n_polar, n_azimuth, 3))
    u[..., 0] = st[:, None] * np.cos(ph)[None, :]
    u[..., 1] = st[:, None] * np.sin(ph)[None, :]
    u[..., 2] = ct[:, None] * np.ones_like(ph)[None, :]
    rv = np.asarray(fn(u), dtype=float)
    return radial(ct, ph, rv)


# -- domain spec strings ---------------------------------------------------


def parse_domain(spec: str) -> StarDomain:
    """Parse compact domain descriptions.

    Accepted forms::

        ball:R0=2
        ellipsoid:a=2,b=2.5,c=3
        box:h=1.5,1.5,1.5
        radial:file=<path>
    """
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "ball":
            kv = _parse_kv(rest)
            return ball(float(kv["r0"]))
        if kind == "ellipsoid":
            kv = _parse_kv(rest)
            return ellipsoid(float(kv["a"]), float(kv["b"]), float(kv["c"]))
        if kind == "box":
            kv = _parse_kv(rest, listy=("h",))
            h = [float(t) for t in kv["h"]]
            if len(h) != 3:
                raise ValueError("box needs three half-widths")
            return box(*h)
        if kind == "radial":
            kv = _parse_kv(rest)
            return load_radial_table(kv["file"])
    except KeyError as exc:
        raise ValueError(f"domain spec {spec!r} is missing parameter {exc}") from exc
    raise ValueError(f"unknown domain kind in spec {spec!r}")


def domain_spec_string(dom: StarDomain) -> str:
    if dom.kind == "ball":
        return f"ball:R0={dom.params[0]:g}"
    if dom.kind == "ellipsoid":
        a, b, c = dom.params
        return f"ellipsoid:a={a:g},b={b:g},c={c:g}"
    if dom.kind == "box":
        return "box:h=" + ",".join(f"{h:g}" for h in dom.params)
    return "radial:file=<table>"


def _parse_kv(rest: str, listy=()):
    """key=value pairs separated by commas; ``listy`` keys swallow bare
    comma-separated values that follow them (box:h=1.5,1.5,1.5)."""
    out = {}
    pending = None
    for tok in rest.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "=" in tok:
            k, _, v = tok.partition("=")
            k = k.strip().lower()
            if k in listy:
                out[k] = [v.strip()]
                pending = k
            else:
                out[k] = v.strip()
                pending = None
        elif pending is not None:
            out[pending].append(tok)
        else:
            raise ValueError(f"cannot parse domain parameter token {tok!r}")
    return out


def load_radial_table(path: str) -> StarDomain:
    """Read a radial table file: first line ``n_polar,n_azimuth``, then one
    radius per line in polar-major order over the standard grid
    (Gauss-Legendre rows in cos(theta), uniform phi columns)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        n_polar, n_azimuth = (int(t) for t in header.strip().split(","))
        vals = np.loadtxt(fh, dtype=float, ndmin=1)
    if vals.size != n_polar * n_azimuth:
        raise ValueError(
            f"radial table holds {vals.size} values, expected {n_polar * n_azimuth}"
        )
    ct, _ = np.polynomial.legendre.leggauss(n_polar)
    ph = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    return radial(ct[::-1], ph, vals.reshape(n_polar, n_azimuth))


def save_radial_table(dom: StarDomain, path: str) -> None:
    ct, ph, rv = dom.table
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{ct.size},{ph.size}\n")
        for v in rv.ravel():
            fh.write(f"{v:.17g}\n")


# -- membership ------------------------------------------------------------


def contains(dom: StarDomain, x) -> np.ndarray:
    """Strict membership test, vectorized over the leading axes of ``x``.

    Points on the boundary are reported as outside.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    if dom.kind == "ball":
        r0 = dom.params[0]
        out = np.einsum("...i,...i->...", pts, pts) < r0 * r0
    elif dom.kind == "ellipsoid":
        ax = np.asarray(dom.params)
        q = pts / ax
        out = np.einsum("...i,...i->...", q, q) < 1.0
    elif dom.kind == "box":
        h = np.asarray(dom.params)
        out = np.all(np.abs(pts) < h, axis=-1)
    else:
        r = np.linalg.norm(pts, axis=-1)
        out = np.empty(r.shape, dtype=bool)
        tiny = r < 1e-300
        out[tiny] = True  # the origin is interior (min table radius > 1)
        if np.any(~tiny):
            u = pts[~tiny] / r[~tiny][..., None]
            out[~tiny] = r[~tiny] < _radial_boundary(dom, u)
    return out[0] if scalar else out.reshape(x.shape[:-1])


def boundary_distance(dom: StarDomain, u) -> np.ndarray:
    """Distance from the origin to the boundary along unit direction(s) u."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 1
    uu = np.atleast_2d(u)
    if dom.kind == "ball":
        out = np.full(uu.shape[:-1], dom.params[0])
    elif dom.kind == "ellipsoid":
        ax = np.asarray(dom.params)
        q = uu / ax
        out = 1.0 / np.sqrt(np.einsum("...i,...i->...", q, q))
    elif dom.kind == "box":
        h = np.asarray(dom.params)
        with np.errstate(divide="ignore"):
            t = np.where(np.abs(uu) > 1e-300, h / np.abs(uu), np.inf)
        out = np.min(t, axis=-1)
    else:
        out = _radial_boundary(dom, uu)
    return out[0] if scalar else out.reshape(u.shape[:-1])


def radial_gap(dom: StarDomain, x) -> np.ndarray:
    """Radial clearance of interior points: boundary_distance(x/|x|) - |x|,
    vectorized over leading axes.  This is the true distance to the boundary
    for balls and the star-ray surrogate for other shapes; every margin test
    in the package uses this one convention (matching sample_interior), so
    margins compose.  Negative for points radially past the boundary."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = np.atleast_2d(x)
    r = np.linalg.norm(pts, axis=-1)
    gap = np.empty(r.shape)
    tiny = r < 1e-300
    gap[tiny] = boundary_distance(dom, np.array([0.0, 0.0, 1.0])) if np.any(tiny) else 0.0
    if np.any(~tiny):
        u = pts[~tiny] / r[~tiny][..., None]
        gap[~tiny] = boundary_distance(dom, u) - r[~tiny]
    return gap[0] if scalar else gap.reshape(x.shape[:-1])


def _radial_boundary(dom: StarDomain, u: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of the radius table in (theta, phi)."""
    ct_grid, ph_grid, rv = dom.table
    ct = np.clip(u[..., 2], -1.0, 1.0)
    ph = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2.0 * np.pi)

    # theta rows: ct_grid is strictly decreasing; clamp beyond the poles.
    asc = ct_grid[::-1]
    j = np.searchsorted(asc, ct, side="right")
    j = np.clip(j, 1, asc.size - 1)
    c_lo = asc[j - 1]
    c_hi = asc[j]
    w = np.clip((ct - c_lo) / (c_hi - c_lo), 0.0, 1.0)
    row_hi = ct_grid.size - 1 - j          # row with larger cos(theta)
    row_lo = ct_grid.size - j

    # phi columns with periodic wrap; uniform grid assumed for the wrap cell.
    k = np.searchsorted(ph_grid, ph, side="right") - 1
    k = np.clip(k, 0, ph_grid.size - 1)
    k_next = (k + 1) % ph_grid.size
    ph_lo = ph_grid[k]
    span = np.where(k_next == 0, 2.0 * np.pi - ph_lo + ph_grid[0], ph_grid[k_next] - ph_lo)
    v = np.clip((ph - ph_lo) / span, 0.0, 1.0)

    r00 = rv[row_lo, k]
    r01 = rv[row_lo, k_next]
    r10 = rv[row_hi, k]
    r11 = rv[row_hi, k_next]
    return (1 - w) * ((1 - v) * r00 + v * r01) + w * ((1 - v) * r10 + v * r11)


# -- ray segmentation ------------------------------------------------------


def ray_segments(dom: StarDomain, origin, direction, t_max: float) -> RaySegments:
    """Intersect the ray origin + t*direction, t in [0, t_max], with the domain.

    Closed-form for ball/ellipsoid/box; bracketing plus bisection (to 1e-10
    in t) for radial tables.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise ValueError("ray direction must be a unit vector")
    if t_max <= 0.0:
        return RaySegments(origin, direction, t_max, ())
    if dom.kind == "ball":
        segs = _quadric_segment(origin, direction, t_max, np.ones(3) / dom.params[0])
    elif dom.kind == "ellipsoid":
        segs = _quadric_segment(origin, direction, t_max, 1.0 / np.asarray(dom.params))
    elif dom.kind == "box":
        segs = _box_segment(origin, direction, t_max, np.asarray(dom.params))
    else:
        segs = _scan_segments(dom, origin, direction, t_max)
    return RaySegments(origin, direction, t_max, segs)


def _quadric_segment(x, u, t_max, inv_ax):
    """Ball and ellipsoid share |diag(inv_ax) (x + t u)| < 1."""
    xs = x * inv_ax
    us = u * inv_ax
    a = us @ us
    b = xs @ us
    c = xs @ xs - 1.0
    if a < _EPS_RAY:
        return ((0.0, t_max),) if c < 0.0 else ()
    disc = b * b - a * c
    if disc <= 0.0:
        return ()
    sq = math.sqrt(disc)
    lo = (-b - sq) / a
    hi = (-b + sq) / a
    lo = max(lo, 0.0)
    hi = min(hi, t_max)
    return ((lo, hi),) if hi > lo else ()


def _box_segment(x, u, t_max, h):
    lo, hi = 0.0, t_max
    for i in range(3):
        if abs(u[i]) < _EPS_RAY:
            if abs(x[i]) >= h[i]:
                return ()
            continue
        t1 = (-h[i] - x[i]) / u[i]
        t2 = (h[i] - x[i]) / u[i]
        if t1 > t2:
            t1, t2 = t2, t1
        lo = max(lo, t1)
        hi = min(hi, t2)
        if hi <= lo:
            return ()
    return ((lo, hi),)


_N_SCAN = 256


def _scan_segments(dom, x, u, t_max, tol=1e-10):
    """Membership scan along the ray followed by bisection of each bracket."""
    t = np.linspace(0.0, t_max, _N_SCAN + 1)
    inside = contains(dom, x[None, :] + t[:, None] * u[None, :])
    segs = []
    open_lo = 0.0 if inside[0] else None
    for k in range(_N_SCAN):
        if inside[k] == inside[k + 1]:
            continue
        cross = _bisect_crossing(dom, x, u, t[k], t[k + 1], inside[k], tol)
        if inside[k]:
            segs.append((open_lo, cross))
            open_lo = None
        else:
            open_lo = cross
    if open_lo is not None:
        segs.append((open_lo, t_max))
    return tuple(s for s in segs if s[1] - s[0] > tol)


def _bisect_crossing(dom, x, u, lo, hi, lo_inside, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if contains(dom, x + mid * u) == lo_inside:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- star-shape validation -------------------------------------------------


def validate_star_shape(dom: StarDomain, n_samples: int = 10_000, seed: int = 0,
                        n_checks: int = 16, max_witnesses: int = 100):
    """Sampled check of star-shapedness w.r.t. the closed unit ball.

    Draws pairs (b, z) with b uniform in the closed unit ball and z uniform
    in the domain, then tests ``n_checks`` equispaced points of the segment
    [b, z] for membership (endpoints included; both lie inside by
    construction).  Returns (violation_count, witnesses) where witnesses is
    a list of (b, z, t) triples for failing parameters t.
    """
    rng = np.random.default_rng(seed)
    b = _uniform_ball(rng, n_samples, 1.0)
    z = sample_interior(dom, n_samples, rng)
    t = np.linspace(0.0, 1.0, n_checks)
    pts = b[:, None, :] + t[None, :, None] * (z - b)[:, None, :]
    ok = contains(dom, pts.reshape(-1, 3)).reshape(n_samples, n_checks)
    # endpoint b may sit exactly on |b| = 1 which is interior to the domain
    # (min boundary radius > 1), so strict membership holds there too.
    bad = ~ok
    violations = int(np.count_nonzero(np.any(bad, axis=1)))
    witnesses = []
    if violations:
        idx = np.nonzero(np.any(bad, axis=1))[0][:max_witnesses]
        for i in idx:
            kfail = int(np.nonzero(bad[i])[0][0])
            witnesses.append((b[i].copy(), z[i].copy(), float(t[kfail])))
    return violations, witnesses


def _uniform_ball(rng, n, radius):
    pts = np.empty((n, 3))
    got = 0
    while got < n:
        cand = rng.uniform(-radius, radius, size=(2 * (n - got) + 16, 3))
        keep = cand[np.einsum("ij,ij->i", cand, cand) <= radius * radius]
        take = min(n - got, keep.shape[0])
        pts[got:got + take] = keep[:take]
        got += take
    return pts


def sample_interior(dom: StarDomain, n: int, rng, margin: float = 0.0) -> np.ndarray:
    """Uniform interior points by rejection from the circumball.

    ``margin`` keeps a radial gap to the boundary: points x with
    boundary_distance(x/|x|) - |x| <= margin are rejected.
    """
    rad = dom.circumradius
    pts = np.empty((n, 3))
    got = 0
    attempts = 0
    while got < n:
        attempts += 1
        if attempts > 1000:
            raise RuntimeError("interior sampling failed to converge")
        cand = _uniform_ball(rng, 2 * (n - got) + 16, rad)
        keep = cand[contains(dom, cand)]
        if margin > 0.0 and keep.size:
            r = np.linalg.norm(keep, axis=-1)
            safe = r < 1e-300
            gap = np.empty_like(r)
            gap[safe] = np.inf
            if np.any(~safe):
                u = keep[~safe] / r[~safe][:, None]
                gap[~safe] = boundary_distance(dom, u) - r[~safe]
            keep = keep[gap > margin]
        take = min(n - got, keep.shape[0])
        pts[got:got + take] = keep[:take]
        got += take
    return pts


def sample_directions(n: int, rng) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# -- normalization ---------------------------------------------------------


@dataclass(frozen=True)
class DomainNormalization:
    """Affine change of variables x_hat = (x - center)/radius together with
    the induced field transform.

    If v_hat solves curl v_hat = g_hat on the image domain with
    g_hat(x_hat) = radius * g(center + radius * x_hat), then
    v(x) = v_hat((x - center)/radius) solves curl v = g on the original
    domain, with the zero boundary values carried over.
    """

    center: np.ndarray
    radius: float
    image: StarDomain

    def forward(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.radius

    def inverse(self, x_hat):
        return self.center + self.radius * np.asarray(x_hat, dtype=float)

    def transform_field(self, g):
        r, c = self.radius, self.center
        return lambda x_hat: r * g(c + r * np.asarray(x_hat, dtype=float))

    def pull_back_potential(self, v_hat):
        c, r = self.center, self.radius
        return lambda x: v_hat((np.asarray(x, dtype=float) - c) / r)


def normalize_domain(center, radius: float, shape_about_center: StarDomain) -> DomainNormalization:
    """Build the normalization for a domain star-shaped w.r.t. B(center, radius).

    ``shape_about_center`` describes the domain in coordinates centered at
    ``center`` (the actual domain is its translate by ``center``).  The image
    domain, scaled by 1/radius, must contain the closed unit ball; this is
    checked exactly through the shape's inradius.
    """
    if radius <= 0.0:
        raise ValueError("normalization radius must be positive")
    center = np.asarray(center, dtype=float)
    if center.shape != (3,):
        raise ValueError("center must be a 3-vector")
    if shape_about_center.inradius / radius <= 1.0:
        raise ValueError(
            "normalized image does not contain the closed unit ball; "
            "choose a smaller normalization radius"
        )
    image = shape_about_center.scaled(1.0 / radius)
    return DomainNormalization(center=center, radius=float(radius), image=image)
