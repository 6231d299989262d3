"""Constructive solid geometry for product domains, fibers, and distance probes.

Domains live in R^(m+n) (or C^(m+n), stored as interleaved real pairs) and are
described by CSG trees over three primitives -- balls, boxes, halfspaces --
closed under union, intersection, and complement.  Primitives may constrain a
subset of the coordinates (a ball over two of four axes is a cylinder), which
is what makes polydiscs and product figures exact.  Membership is decided
exactly for any point; the represented sets are open (complements are taken
against closed primitives).

Three consumers drive the design:

* quadrature wants every fiber slice as a list of disjoint open intervals,
  merged across measure-zero seams so that removing a point from a domain
  cannot change an integral;
* distance probes want the distance to the complement computed exactly from
  primitive distances whenever the tree structure allows it (intersections
  combine by min; products across disjoint axis groups combine by Pythagoras),
  with an honest inexact flag and a certified bracket otherwise;
* the disc criterion wants deterministic sampling of closed analytic discs
  with the boundary samples a literal subset of the disc samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DiscEscapesDomain,
    InvalidParam,
    PointOutsideDomain,
)

__all__ = [
    "Ball", "Box", "Halfspace", "Full", "Empty", "Union", "Intersection",
    "Complement", "Domain", "FiberDomain", "AffineFiberMap", "AnalyticDisc",
    "DistanceInfo", "MidpointReport", "DiscDistanceReport",
    "fiber", "fiber_distance", "boundary_distance", "disc_distance_check",
    "midpoint_closure_check",
    "ball_domain", "box_domain", "full_space", "bidisc", "hartogs_figure",
    "punctured_ball", "dumbbell", "disc_region", "plane_region",
    "domain_to_json", "domain_from_json",
]

_INF = math.inf
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


# ---------------------------------------------------------------------------
# CSG nodes


class Node:
    """Base class for CSG tree nodes.  Instances are immutable."""

    def member(self, p: np.ndarray) -> bool:
        raise NotImplementedError

    def closed_member(self, p: np.ndarray) -> bool:
        raise NotImplementedError

    def axes_set(self) -> frozenset:
        raise NotImplementedError

    def slice_first(self, t: np.ndarray, nb: int) -> "Node":
        """Fix the first ``nb`` coordinates to ``t``; remaining axes shift down."""
        raise NotImplementedError

    def bounds(self, dim: int):
        raise NotImplementedError


def _shift_axes(axes, nb):
    return tuple(a - nb for a in axes)


@dataclass(frozen=True)
class Ball(Node):
    center: tuple
    radius: float
    axes: tuple

    def __post_init__(self):
        if len(self.center) != len(self.axes):
            raise InvalidParam("ball center and axes lengths differ")
        if self.radius < 0.0:
            raise InvalidParam("ball radius must be nonnegative")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))

    def _dist2(self, p):
        return sum((p[a] - c) ** 2 for a, c in zip(self.axes, self.center))

    def member(self, p):
        return self._dist2(p) < self.radius * self.radius

    def closed_member(self, p):
        return self._dist2(p) <= self.radius * self.radius

    def axes_set(self):
        return frozenset(self.axes)

    def slice_first(self, t, nb):
        base = [(a, c) for a, c in zip(self.axes, self.center) if a < nb]
        fib = [(a, c) for a, c in zip(self.axes, self.center) if a >= nb]
        if not fib:
            return Full() if self.member_partial(t, base) else Empty()
        off2 = sum((t[a] - c) ** 2 for a, c in base)
        rad2 = self.radius * self.radius - off2
        if rad2 <= 0.0:
            return Empty()
        return Ball(tuple(c for _, c in fib), math.sqrt(rad2),
                    _shift_axes((a for a, _ in fib), nb))

    def member_partial(self, t, base):
        return sum((t[a] - c) ** 2 for a, c in base) < self.radius * self.radius

    def bounds(self, dim):
        lo = np.full(dim, -_INF)
        hi = np.full(dim, _INF)
        for a, c in zip(self.axes, self.center):
            lo[a] = c - self.radius
            hi[a] = c + self.radius
        return lo, hi


@dataclass(frozen=True)
class Box(Node):
    lo: tuple
    hi: tuple
    axes: tuple

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.axes)):
            raise InvalidParam("box lo/hi/axes lengths differ")
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))

    def member(self, p):
        return all(l < p[a] < h for a, l, h in zip(self.axes, self.lo, self.hi))

    def closed_member(self, p):
        return all(l <= p[a] <= h for a, l, h in zip(self.axes, self.lo, self.hi))

    def axes_set(self):
        return frozenset(self.axes)

    def slice_first(self, t, nb):
        keep_axes, keep_lo, keep_hi = [], [], []
        for a, l, h in zip(self.axes, self.lo, self.hi):
            if a < nb:
                if not (l < t[a] < h):
                    return Empty()
            else:
                keep_axes.append(a - nb)
                keep_lo.append(l)
                keep_hi.append(h)
        if not keep_axes:
            return Full()
        return Box(tuple(keep_lo), tuple(keep_hi), tuple(keep_axes))

    def bounds(self, dim):
        lo = np.full(dim, -_INF)
        hi = np.full(dim, _INF)
        for a, l, h in zip(self.axes, self.lo, self.hi):
            lo[a] = l
            hi[a] = h
        return lo, hi


@dataclass(frozen=True)
class Halfspace(Node):
    normal: tuple
    offset: float
    axes: tuple

    def __post_init__(self):
        if len(self.normal) != len(self.axes):
            raise InvalidParam("halfspace normal and axes lengths differ")
        if all(v == 0.0 for v in self.normal):
            raise InvalidParam("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", tuple(float(v) for v in self.normal))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "axes", tuple(int(a) for a in self.axes))

    def _dot(self, p):
        return sum(v * p[a] for a, v in zip(self.axes, self.normal))

    def member(self, p):
        return self._dot(p) < self.offset

    def closed_member(self, p):
        return self._dot(p) <= self.offset

    def axes_set(self):
        return frozenset(self.axes)

    def slice_first(self, t, nb):
        off = self.offset
        keep_axes, keep_n = [], []
        for a, v in zip(self.axes, self.normal):
            if a < nb:
                off -= v * t[a]
            else:
                keep_axes.append(a - nb)
                keep_n.append(v)
        if not keep_axes or all(v == 0.0 for v in keep_n):
            return Full() if 0.0 < off else Empty()
        return Halfspace(tuple(keep_n), off, tuple(keep_axes))

    def bounds(self, dim):
        lo = np.full(dim, -_INF)
        hi = np.full(dim, _INF)
        nz = [(a, v) for a, v in zip(self.axes, self.normal) if v != 0.0]
        if len(nz) == 1:
            a, v = nz[0]
            if v > 0:
                hi[a] = self.offset / v
            else:
                lo[a] = self.offset / v
        return lo, hi


@dataclass(frozen=True)
class Full(Node):
    def member(self, p):
        return True

    def closed_member(self, p):
        return True

    def axes_set(self):
        return frozenset()

    def slice_first(self, t, nb):
        return Full()

    def bounds(self, dim):
        return np.full(dim, -_INF), np.full(dim, _INF)


@dataclass(frozen=True)
class Empty(Node):
    def member(self, p):
        return False

    def closed_member(self, p):
        return False

    def axes_set(self):
        return frozenset()

    def slice_first(self, t, nb):
        return Empty()

    def bounds(self, dim):
        return np.full(dim, _INF), np.full(dim, -_INF)


@dataclass(frozen=True)
class Union(Node):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise InvalidParam("union needs at least one part")

    def member(self, p):
        return any(q.member(p) for q in self.parts)

    def closed_member(self, p):
        return any(q.closed_member(p) for q in self.parts)

    def axes_set(self):
        return frozenset().union(*(q.axes_set() for q in self.parts))

    def slice_first(self, t, nb):
        out = []
        for q in self.parts:
            s = q.slice_first(t, nb)
            if isinstance(s, Full):
                return Full()
            if not isinstance(s, Empty):
                out.append(s)
        if not out:
            return Empty()
        if len(out) == 1:
            return out[0]
        return Union(tuple(out))

    def bounds(self, dim):
        los, his = zip(*(q.bounds(dim) for q in self.parts))
        return np.minimum.reduce(los), np.maximum.reduce(his)


@dataclass(frozen=True)
class Intersection(Node):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise InvalidParam("intersection needs at least one part")

    def member(self, p):
        return all(q.member(p) for q in self.parts)

    def closed_member(self, p):
        return all(q.closed_member(p) for q in self.parts)

    def axes_set(self):
        return frozenset().union(*(q.axes_set() for q in self.parts))

    def slice_first(self, t, nb):
        out = []
        for q in self.parts:
            s = q.slice_first(t, nb)
            if isinstance(s, Empty):
                return Empty()
            if not isinstance(s, Full):
                out.append(s)
        if not out:
            return Full()
        if len(out) == 1:
            return out[0]
        return Intersection(tuple(out))

    def bounds(self, dim):
        los, his = zip(*(q.bounds(dim) for q in self.parts))
        return np.maximum.reduce(los), np.minimum.reduce(his)


@dataclass(frozen=True)
class Complement(Node):
    """Open complement of the closed version of ``part``."""

    part: Node

    def member(self, p):
        return not self.part.closed_member(p)

    def closed_member(self, p):
        return not self.part.member(p)

    def axes_set(self):
        return self.part.axes_set()

    def slice_first(self, t, nb):
        s = self.part.slice_first(t, nb)
        if isinstance(s, Full):
            return Empty()
        if isinstance(s, Empty):
            return Full()
        return Complement(s)

    def bounds(self, dim):
        return np.full(dim, -_INF), np.full(dim, _INF)


# ---------------------------------------------------------------------------
# 1-d interval decomposition (for quadrature; open intervals, merged across
# measure-zero seams so point punctures are invisible to integrals)


def _merge_open(intervals):
    ivs = sorted((a, b) for (a, b) in intervals if b > a)
    out = []
    for a, b in ivs:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _intersect_lists(xs, ys):
    out = []
    for (a, b) in xs:
        for (c, d) in ys:
            lo, hi = max(a, c), min(b, d)
            if hi > lo:
                out.append((lo, hi))
    return _merge_open(out)


def _complement_of_closure(ivs):
    out = []
    prev = -_INF
    for (a, b) in ivs:
        if a > prev:
            out.append((prev, a))
        prev = max(prev, b)
    if prev < _INF:
        out.append((prev, _INF))
    return out


def node_intervals(node: Node) -> list:
    """Open-interval decomposition of a one-dimensional CSG node."""
    if isinstance(node, Full):
        return [(-_INF, _INF)]
    if isinstance(node, Empty):
        return []
    if isinstance(node, Ball):
        (c,) = node.center
        if node.radius <= 0.0:
            return []
        return [(c - node.radius, c + node.radius)]
    if isinstance(node, Box):
        (l,), (h,) = node.lo, node.hi
        return [(l, h)] if h > l else []
    if isinstance(node, Halfspace):
        (v,) = node.normal
        if v > 0:
            return [(-_INF, node.offset / v)]
        return [(node.offset / v, _INF)]
    if isinstance(node, Union):
        parts = []
        for q in node.parts:
            parts.extend(node_intervals(q))
        return _merge_open(parts)
    if isinstance(node, Intersection):
        acc = [(-_INF, _INF)]
        for q in node.parts:
            acc = _intersect_lists(acc, node_intervals(q))
        return acc
    if isinstance(node, Complement):
        return _complement_of_closure(node_intervals(node.part))
    raise InvalidParam(f"cannot decompose node of type {type(node).__name__}")


def _critical_points(node: Node, axis: int) -> list:
    """Abscissae along ``axis`` where the slice structure of ``node`` can change."""
    if isinstance(node, Ball):
        out = []
        for a, c in zip(node.axes, node.center):
            if a == axis:
                out.extend((c - node.radius, c + node.radius, c))
        return out
    if isinstance(node, Box):
        out = []
        for a, l, h in zip(node.axes, node.lo, node.hi):
            if a == axis:
                out.extend((l, h))
        return out
    if isinstance(node, Halfspace):
        nz = [(a, v) for a, v in zip(node.axes, node.normal) if v != 0.0]
        if len(nz) == 1 and nz[0][0] == axis:
            return [node.offset / nz[0][1]]
        return []
    if isinstance(node, (Union, Intersection)):
        out = []
        for q in node.parts:
            out.extend(_critical_points(q, axis))
        return out
    if isinstance(node, Complement):
        return _critical_points(node.part, axis)
    return []


# ---------------------------------------------------------------------------
# Distances with exactness tracking


def _axis_groups(parts):
    """Partition parts into connected components under shared-axis overlap."""
    groups = []
    for q in parts:
        ax = q.axes_set()
        hit = [g for g in groups if g[0] & ax] if ax else []
        if not hit:
            groups.append([ax, [q]])
        else:
            merged_ax = ax
            merged_parts = [q]
            for g in hit:
                merged_ax = merged_ax | g[0]
                merged_parts.extend(g[1])
                groups.remove(g)
            groups.append([merged_ax, merged_parts])
    return [g[1] for g in groups]


def dist_to_complement(node: Node, p: np.ndarray):
    """(signed distance from p to the complement of node, exact flag).

    Nonnegative when p is in the node; the sign is meaningful to the
    combiners. Intersections combine exactly by min; unions combine exactly by
    Pythagoras across disjoint axis groups, and fall back to a max lower bound
    (flagged inexact) within a shared group.
    """
    if isinstance(node, Full):
        return _INF, True
    if isinstance(node, Empty):
        return 0.0, True
    if isinstance(node, Ball):
        return node.radius - math.sqrt(node._dist2(p)), True
    if isinstance(node, Box):
        v = min(min(p[a] - l, h - p[a]) for a, l, h in zip(node.axes, node.lo, node.hi))
        return v, True
    if isinstance(node, Halfspace):
        nrm = math.sqrt(sum(v * v for v in node.normal))
        return (node.offset - node._dot(p)) / nrm, True
    if isinstance(node, Intersection):
        best, exact = _INF, True
        for q in node.parts:
            v, e = dist_to_complement(q, p)
            exact = exact and e
            best = min(best, v)
        return best, exact
    if isinstance(node, Union):
        groups = _axis_groups(node.parts)
        vals, exact = [], True
        for g in groups:
            if len(g) == 1:
                v, e = dist_to_complement(g[0], p)
            else:
                v, e = -_INF, False
                for q in g:
                    qv, _ = dist_to_complement(q, p)
                    v = max(v, qv)
            vals.append(v)
            exact = exact and e
        if len(vals) == 1:
            return vals[0], exact
        return math.sqrt(sum(max(v, 0.0) ** 2 for v in vals)), exact
    if isinstance(node, Complement):
        return dist_to_set(node.part, p)
    raise InvalidParam(f"no distance rule for {type(node).__name__}")


def dist_to_set(node: Node, p: np.ndarray):
    """(distance from p to the closure of node, exact flag).  Zero inside."""
    if node.closed_member(p):
        return 0.0, True
    if isinstance(node, Full):
        return 0.0, True
    if isinstance(node, Empty):
        return _INF, True
    if isinstance(node, Ball):
        return max(math.sqrt(node._dist2(p)) - node.radius, 0.0), True
    if isinstance(node, Box):
        s = 0.0
        for a, l, h in zip(node.axes, node.lo, node.hi):
            e = max(l - p[a], p[a] - h, 0.0)
            s += e * e
        return math.sqrt(s), True
    if isinstance(node, Halfspace):
        nrm = math.sqrt(sum(v * v for v in node.normal))
        return max((node._dot(p) - node.offset) / nrm, 0.0), True
    if isinstance(node, Union):
        best, exact = _INF, True
        for q in node.parts:
            v, e = dist_to_set(q, p)
            exact = exact and e
            best = min(best, v)
        return best, exact
    if isinstance(node, Intersection):
        groups = _axis_groups(node.parts)
        vals, exact = [], True
        for g in groups:
            if len(g) == 1:
                v, e = dist_to_set(g[0], p)
            else:
                v, e = 0.0, False
                for q in g:
                    qv, _ = dist_to_set(q, p)
                    v = max(v, qv)
            vals.append(v)
            exact = exact and e
        if len(vals) == 1:
            return vals[0], exact
        return math.sqrt(sum(v * v for v in vals)), exact
    if isinstance(node, Complement):
        v, e = dist_to_complement(node.part, p)
        return max(v, 0.0), e
    raise InvalidParam(f"no distance rule for {type(node).__name__}")


# ---------------------------------------------------------------------------
# Domains


def _as_real_point(p, kind: str, rdim: int) -> np.ndarray:
    arr = np.asarray(p)
    if kind == "complex" and np.iscomplexobj(arr):
        arr = arr.ravel()
        if 2 * arr.size != rdim:
            raise InvalidParam(f"expected {rdim // 2} complex coordinates, got {arr.size}")
        out = np.empty(rdim)
        out[0::2] = arr.real
        out[1::2] = arr.imag
        return out
    arr = np.asarray(arr, dtype=float).ravel()
    if arr.size != rdim:
        raise InvalidParam(f"expected a real point of dimension {rdim}, got {arr.size}")
    return arr


@dataclass(frozen=True)
class Domain:
    """An open set in R^(m+n) or C^(m+n) with a declared base/fiber split."""

    csg: Node
    split: tuple
    kind: str = "real"

    def __post_init__(self):
        m, n = self.split
        if m < 0 or n < 0 or m + n < 1:
            raise InvalidParam(f"bad ambient split {self.split}")
        if self.kind not in ("real", "complex"):
            raise InvalidParam(f"kind must be 'real' or 'complex', got {self.kind!r}")
        object.__setattr__(self, "split", (int(m), int(n)))
        bad = [a for a in self.csg.axes_set() if not (0 <= a < self.rdim)]
        if bad:
            raise InvalidParam(f"csg axes {bad} outside ambient dimension {self.rdim}")

    @property
    def mult(self) -> int:
        return 2 if self.kind == "complex" else 1

    @property
    def base_rdim(self) -> int:
        return self.split[0] * self.mult

    @property
    def fiber_rdim(self) -> int:
        return self.split[1] * self.mult

    @property
    def rdim(self) -> int:
        return self.base_rdim + self.fiber_rdim

    def point(self, p) -> np.ndarray:
        return _as_real_point(p, self.kind, self.rdim)

    def member(self, p) -> bool:
        return self.csg.member(self.point(p))

    def closed_member(self, p) -> bool:
        return self.csg.closed_member(self.point(p))

    def bounds(self):
        return self.csg.bounds(self.rdim)

    def fiber(self, t) -> "FiberDomain":
        return fiber(self, t)

    def descriptor(self) -> dict:
        return {"csg": _node_to_dict(self.csg), "split": list(self.split), "kind": self.kind}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)


@dataclass(frozen=True)
class FiberDomain:
    """The slice of a domain over a fixed base point.

    Membership delegates to the parent domain (exact); the sliced CSG node
    drives interval decompositions, bounds, and distances.
    """

    parent: Domain
    t: np.ndarray
    node: Node
    dim: int

    def member(self, x) -> bool:
        x = _as_real_point(x, self.parent.kind, self.dim)
        return self.parent.csg.member(np.concatenate([self.t, x]))

    def closed_member(self, x) -> bool:
        x = _as_real_point(x, self.parent.kind, self.dim)
        return self.parent.csg.closed_member(np.concatenate([self.t, x]))

    def quad_intervals(self) -> list:
        if self.dim != 1:
            raise InvalidParam("quad_intervals applies to one-dimensional fibers")
        return node_intervals(self.node)

    def slice_intervals(self, x: float) -> list:
        if self.dim != 2:
            raise InvalidParam("slice_intervals applies to two-dimensional fibers")
        return node_intervals(self.node.slice_first(np.array([float(x)]), 1))

    def critical_xs(self) -> list:
        return sorted(set(_critical_points(self.node, 0)))

    def bounds(self):
        return self.node.bounds(self.dim)

    def as_domain(self) -> Domain:
        n = self.dim // self.parent.mult
        return Domain(self.node, (0, n), self.parent.kind)


def fiber(domain: Domain, t) -> FiberDomain:
    t_arr = _as_real_point(t, domain.kind, domain.base_rdim)
    node = domain.csg.slice_first(t_arr, domain.base_rdim)
    return FiberDomain(domain, t_arr, node, domain.fiber_rdim)


@dataclass(frozen=True)
class DistanceInfo:
    value: float
    exact: bool
    bracket: float  # certified width of [lower, value]; 0 when exact


def _ray_directions(dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    rng = np.random.default_rng(20210921)
    dirs = rng.standard_normal((128, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    eyes = np.concatenate([np.eye(dim), -np.eye(dim)])
    return np.concatenate([eyes, dirs])


def _ray_exit_upper_bound(node: Node, p: np.ndarray, lower: float) -> float:
    """Smallest boundary crossing found along a deterministic ray fan."""
    best = _INF
    for d in _ray_directions(p.size):
        lam = max(lower, 1e-9)
        cap = 1e9
        inside = lam
        while node.member(p + lam * d):
            inside = lam
            lam *= 2.0
            if lam > cap:
                break
        if lam > cap:
            continue
        outside = lam
        for _ in range(80):
            mid = 0.5 * (inside + outside)
            if node.member(p + mid * d):
                inside = mid
            else:
                outside = mid
        best = min(best, outside)
    return best


def boundary_distance(domain: Domain, p) -> DistanceInfo:
    """Distance from an interior point to the domain's complement.

    Exact (bracket 0) whenever the CSG recursion supports it; otherwise the
    returned value is a sampled upper bound and ``bracket`` certifies the gap
    to the recursive lower bound.  Raises PointOutsideDomain for outside
    points.
    """
    q = domain.point(p)
    if not domain.csg.member(q):
        raise PointOutsideDomain(f"point {q.tolist()} is not in the domain")
    v, exact = dist_to_complement(domain.csg, q)
    if exact:
        return DistanceInfo(float(v), True, 0.0)
    lower = max(float(v), 0.0)
    upper = _ray_exit_upper_bound(domain.csg, q, lower)
    if math.isinf(upper):
        return DistanceInfo(lower, False, _INF)
    return DistanceInfo(float(upper), False, float(upper - lower))


def fiber_distance(domain: Domain, t, x) -> float:
    """Distance from x to the complement of the fiber over t (within the fiber)."""
    fd = fiber(domain, t)
    x_arr = _as_real_point(x, domain.kind, fd.dim)
    if not fd.member(x_arr):
        raise PointOutsideDomain(
            f"fiber point {x_arr.tolist()} is not in the slice over {fd.t.tolist()}"
        )
    info = boundary_distance(fd.as_domain(), x_arr)
    return info.value


# ---------------------------------------------------------------------------
# Affine fiber maps and analytic discs


@dataclass(frozen=True)
class AffineFiberMap:
    """a(t) = x0 + A (t - t0), in packed real coordinates."""

    x0: tuple
    mat: tuple  # rows, one per fiber coordinate
    t0: tuple

    def __post_init__(self):
        x0 = tuple(float(v) for v in self.x0)
        t0 = tuple(float(v) for v in self.t0)
        mat = tuple(tuple(float(v) for v in row) for row in self.mat)
        if len(mat) != len(x0):
            raise InvalidParam("matrix row count must match fiber dimension")
        for row in mat:
            if len(row) != len(t0):
                raise InvalidParam("matrix column count must match base dimension")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "t0", t0)

    @property
    def base_rdim(self) -> int:
        return len(self.t0)

    @property
    def fiber_rdim(self) -> int:
        return len(self.x0)

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).ravel()
        if t.size != self.base_rdim:
            raise InvalidParam(f"expected base point of dimension {self.base_rdim}")
        dt = t - np.array(self.t0)
        return np.array(self.x0) + np.array(self.mat) @ dt

    @staticmethod
    def constant(x0, base_rdim: int) -> "AffineFiberMap":
        x0 = tuple(float(v) for v in np.atleast_1d(x0))
        return AffineFiberMap(x0, tuple(tuple(0.0 for _ in range(base_rdim)) for _ in x0),
                              tuple(0.0 for _ in range(base_rdim)))

    @staticmethod
    def through(t0, x0, t1, x1) -> "AffineFiberMap":
        """The affine map on a one-dimensional base with a(t0)=x0, a(t1)=x1."""
        t0, t1 = float(t0), float(t1)
        if t0 == t1:
            raise InvalidParam("through() needs distinct base points")
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        slope = (x1 - x0) / (t1 - t0)
        return AffineFiberMap(tuple(x0), tuple((s,) for s in slope), (t0,))

    @staticmethod
    def complex_affine(a0: complex, slope: complex = 0.0, t0: complex = 0.0) -> "AffineFiberMap":
        """Holomorphic affine map a(tau) = a0 + slope (tau - t0), packed as reals."""
        a0 = complex(a0)
        s = complex(slope)
        t0 = complex(t0)
        mat = ((s.real, -s.imag), (s.imag, s.real))
        return AffineFiberMap((a0.real, a0.imag), mat, (t0.real, t0.imag))


def _horner(coeffs, w: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * w + c
    return acc


@dataclass(frozen=True)
class AnalyticDisc:
    """A polynomial map of the closed unit disc into C x C^n.

    ``base`` holds the ascending coefficients of the base component; each
    entry of ``fibers`` holds the coefficients of one fiber component.
    """

    base: tuple
    fibers: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(complex(c) for c in self.base))
        object.__setattr__(self, "fibers",
                           tuple(tuple(complex(c) for c in g) for g in self.fibers))
        if not self.base:
            raise InvalidParam("base component needs at least one coefficient")
        if not self.fibers:
            raise InvalidParam("need at least one fiber component")

    @property
    def n_fiber(self) -> int:
        return len(self.fibers)

    def base_at(self, w: complex) -> complex:
        return _horner(self.base, complex(w))

    def fiber_at(self, w: complex) -> list:
        return [_horner(g, complex(w)) for g in self.fibers]

    def eval_complex(self, w: complex) -> list:
        return [self.base_at(w)] + self.fiber_at(w)

    def eval_real(self, w: complex) -> np.ndarray:
        vals = self.eval_complex(w)
        out = np.empty(2 * len(vals))
        for i, z in enumerate(vals):
            out[2 * i] = z.real
            out[2 * i + 1] = z.imag
        return out

    def is_base_constant(self) -> bool:
        return all(c == 0 for c in self.base[1:])


@dataclass(frozen=True)
class DiscDistanceReport:
    d_disc: float
    d_boundary: float
    gap: float
    n_interior: int
    n_boundary: int
    exact: bool

    def to_jsonable(self) -> dict:
        return {
            "d_disc": self.d_disc,
            "d_boundary": self.d_boundary,
            "gap": self.gap,
            "n_interior": self.n_interior,
            "n_boundary": self.n_boundary,
            "exact": self.exact,
        }


def _sunflower_points(n: int) -> list:
    """Deterministic, near-uniform interior sample of the closed unit disc."""
    pts = [0j]
    for j in range(1, n + 1):
        r = math.sqrt(j / (n + 1.0))
        th = j * _GOLDEN_ANGLE
        pts.append(complex(r * math.cos(th), r * math.sin(th)))
    return pts


def disc_distance_check(domain: Domain, disc: AnalyticDisc,
                        n_interior: int = 4000, n_boundary: int = 256) -> DiscDistanceReport:
    """Compare the deepest boundary distance over a closed analytic disc with
    the deepest over its boundary circle.

    ``gap = d_disc - d_boundary`` is nonpositive by construction (the boundary
    samples are a subset of the disc samples); a strictly negative gap
    exhibits a disc whose interior approaches the boundary of the domain more
    closely than its edge does.  Raises DiscEscapesDomain when any sample
    leaves the domain.
    """
    if domain.kind != "complex":
        raise InvalidParam("disc_distance_check needs a complex-coordinate domain")
    if domain.split[0] != 1 or domain.split[1] != disc.n_fiber:
        raise InvalidParam(
            f"disc maps into C x C^{disc.n_fiber}, domain split is {domain.split}"
        )
    if n_boundary < 8 or n_interior < 1:
        raise InvalidParam("need n_boundary >= 8 and n_interior >= 1")

    def dist_at(w: complex) -> tuple:
        p = disc.eval_real(w)
        if not domain.csg.member(p):
            raise DiscEscapesDomain(f"disc point at w={w!r} leaves the domain")
        return dist_to_complement(domain.csg, p)

    exact_all = True
    d_boundary = _INF
    boundary_vals = []
    for j in range(n_boundary):
        th = 2.0 * math.pi * j / n_boundary
        v, e = dist_at(complex(math.cos(th), math.sin(th)))
        exact_all = exact_all and e
        boundary_vals.append(v)
        d_boundary = min(d_boundary, v)

    d_disc = d_boundary  # boundary samples are included in the disc samples
    for w in _sunflower_points(n_interior):
        v, e = dist_at(w)
        exact_all = exact_all and e
        d_disc = min(d_disc, v)

    return DiscDistanceReport(
        d_disc=float(d_disc),
        d_boundary=float(d_boundary),
        gap=float(d_disc - d_boundary),
        n_interior=n_interior + 1,
        n_boundary=n_boundary,
        exact=exact_all,
    )


@dataclass(frozen=True)
class MidpointReport:
    midpoint: tuple
    in_closure: bool

    def to_jsonable(self) -> dict:
        return {"midpoint": list(self.midpoint), "in_closure": self.in_closure}


def midpoint_closure_check(domain: Domain, p0, p1) -> MidpointReport:
    """Whether the midpoint of two domain points stays in the closure."""
    a = domain.point(p0)
    b = domain.point(p1)
    for name, q in (("p0", a), ("p1", b)):
        if not domain.csg.member(q):
            raise PointOutsideDomain(f"{name} = {q.tolist()} is not in the domain")
    mid = 0.5 * (a + b)
    return MidpointReport(tuple(float(v) for v in mid), domain.csg.closed_member(mid))


# ---------------------------------------------------------------------------
# JSON descriptors


def _node_to_dict(node: Node) -> dict:
    if isinstance(node, Ball):
        return {"op": "ball", "center": list(node.center), "radius": node.radius,
                "axes": list(node.axes)}
    if isinstance(node, Box):
        return {"op": "box", "lo": list(node.lo), "hi": list(node.hi),
                "axes": list(node.axes)}
    if isinstance(node, Halfspace):
        return {"op": "halfspace", "normal": list(node.normal), "offset": node.offset,
                "axes": list(node.axes)}
    if isinstance(node, Full):
        return {"op": "full"}
    if isinstance(node, Empty):
        return {"op": "empty"}
    if isinstance(node, Union):
        return {"op": "union", "parts": [_node_to_dict(q) for q in node.parts]}
    if isinstance(node, Intersection):
        return {"op": "intersection", "parts": [_node_to_dict(q) for q in node.parts]}
    if isinstance(node, Complement):
        return {"op": "complement", "part": _node_to_dict(node.part)}
    raise InvalidParam(f"cannot serialize node of type {type(node).__name__}")


def _node_from_dict(d: dict) -> Node:
    try:
        op = d["op"]
    except (TypeError, KeyError):
        raise InvalidParam(f"bad CSG node descriptor: {d!r}")
    if op == "ball":
        return Ball(tuple(d["center"]), d["radius"], tuple(d["axes"]))
    if op == "box":
        return Box(tuple(d["lo"]), tuple(d["hi"]), tuple(d["axes"]))
    if op == "halfspace":
        return Halfspace(tuple(d["normal"]), d["offset"], tuple(d["axes"]))
    if op == "full":
        return Full()
    if op == "empty":
        return Empty()
    if op == "union":
        return Union(tuple(_node_from_dict(q) for q in d["parts"]))
    if op == "intersection":
        return Intersection(tuple(_node_from_dict(q) for q in d["parts"]))
    if op == "complement":
        return Complement(_node_from_dict(d["part"]))
    raise InvalidParam(f"unknown CSG op {op!r}")


def domain_to_json(domain: Domain) -> str:
    return domain.to_json()


def domain_from_json(s: str) -> Domain:
    try:
        d = json.loads(s)
    except json.JSONDecodeError as e:
        raise InvalidParam(f"domain descriptor is not valid JSON: {e}")
    if not isinstance(d, dict) or set(d) - {"csg", "split", "kind"}:
        raise InvalidParam("domain descriptor must carry csg/split/kind only")
    if "csg" not in d or "split" not in d:
        raise InvalidParam("domain descriptor needs both 'csg' and 'split'")
    return Domain(_node_from_dict(d["csg"]), tuple(d["split"]), d.get("kind", "real"))


# ---------------------------------------------------------------------------
# Stock domains


def full_space(split, kind: str = "real") -> Domain:
    return Domain(Full(), tuple(split), kind)


def ball_domain(split, radius: float = 1.0, center=None, kind: str = "real") -> Domain:
    m, n = split
    mult = 2 if kind == "complex" else 1
    dim = (m + n) * mult
    if center is None:
        center = (0.0,) * dim
    return Domain(Ball(tuple(center), radius, tuple(range(dim))), (m, n), kind)


def box_domain(lo, hi, split, kind: str = "real") -> Domain:
    dim = len(lo)
    return Domain(Box(tuple(lo), tuple(hi), tuple(range(dim))), tuple(split), kind)


def punctured_ball(split, radius: float = 1.0, kind: str = "real") -> Domain:
    """The unit ball with the origin removed."""
    m, n = split
    mult = 2 if kind == "complex" else 1
    dim = (m + n) * mult
    axes = tuple(range(dim))
    zero = (0.0,) * dim
    node = Intersection((Ball(zero, radius, axes), Complement(Ball(zero, 0.0, axes))))
    return Domain(node, (m, n), kind)


def bidisc() -> Domain:
    """The unit bidisc in C^2, split into base disc x fiber disc."""
    node = Intersection((
        Ball((0.0, 0.0), 1.0, (0, 1)),
        Ball((0.0, 0.0), 1.0, (2, 3)),
    ))
    return Domain(node, (1, 1), "complex")


def hartogs_figure(inner: float = 0.5) -> Domain:
    """The bidisc with the closed set {|tau| <= inner} x {|z| >= inner} removed."""
    if not (0.0 < inner < 1.0):
        raise InvalidParam("inner radius must lie in (0, 1)")
    removed = Intersection((
        Ball((0.0, 0.0), inner, (0, 1)),
        Complement(Ball((0.0, 0.0), inner, (2, 3))),
    ))
    node = Intersection((
        Ball((0.0, 0.0), 1.0, (0, 1)),
        Ball((0.0, 0.0), 1.0, (2, 3)),
        Complement(removed),
    ))
    return Domain(node, (1, 1), "complex")


def dumbbell(bulge: float = 0.3, neck: float = 0.02, reach: float = 1.0) -> Domain:
    """Two bulges joined by a thin neck along the base axis, in R x R."""
    if not (0.0 < neck < bulge):
        raise InvalidParam("need 0 < neck < bulge")
    node = Union((
        Ball((-reach, 0.0), bulge, (0, 1)),
        Ball((reach, 0.0), bulge, (0, 1)),
        Box((-reach, -neck), (reach, neck), (0, 1)),
    ))
    return Domain(node, (1, 1), "real")


def disc_region(radius: float = 1.0, center: complex = 0j) -> Domain:
    """A disc in C, set up as a pure-fiber region (split (0, 1))."""
    c = complex(center)
    return Domain(Ball((c.real, c.imag), radius, (0, 1)), (0, 1), "complex")


def plane_region() -> Domain:
    """All of C as a pure-fiber region."""
    return Domain(Full(), (0, 1), "complex")
