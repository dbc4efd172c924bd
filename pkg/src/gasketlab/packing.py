"""Apollonian circle packings and contact graphs.

Circles carry signed curvature (negative for an enclosing circle) and a
complex center.  Generation works breadth-first over curvilinear
triangles: the new circle in a triangle is the reflection of the fourth
circle of the bounding triple, computed by the linear Vieta relation, so
no square roots enter after the root quadruple and integer curvatures
stay exactly integral.  Tangencies are recorded at creation; geometric
residuals are audits only, never used for detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (DegenerateConfiguration, EmbeddingFailure, InvalidRoot,
                     NoRealSolution)
from .plane_graph import PlaneGraph, build_plane_graph, is_bipartite

TOL = 1e-9


@dataclass(frozen=True)
class OrientedCircle:
    """Circle with signed curvature; negative curvature encloses the packing."""

    curvature: float
    center: complex

    @property
    def radius(self) -> float:
        if self.curvature == 0:
            raise DegenerateConfiguration("a line has no radius")
        return 1.0 / abs(self.curvature)

    def tangency_residual(self, other: "OrientedCircle") -> float:
        """Deviation from perfect tangency, relative to the larger radius."""
        dist = abs(self.center - other.center)
        if self.curvature < 0 or other.curvature < 0:
            expected = abs(self.radius - other.radius)
        else:
            expected = self.radius + other.radius
        return abs(dist - expected) / max(self.radius, other.radius)

    def tangency_point(self, other: "OrientedCircle") -> complex:
        if self.curvature < 0:  # other sits inside this circle
            direction = (other.center - self.center)
            if abs(direction) < TOL * self.radius:
                raise DegenerateConfiguration("concentric tangency")
            return self.center + direction / abs(direction) * self.radius
        if other.curvature < 0:
            return other.tangency_point(self)
        direction = other.center - self.center
        return self.center + direction / abs(direction) * self.radius


def descartes_fourth(k1: float, k2: float, k3: float) -> tuple[float, float]:
    """Both curvature roots of the Descartes relation for a tangent triple."""
    radicand = k1 * k2 + k2 * k3 + k3 * k1
    if radicand < -TOL * max(1.0, k1 * k1, k2 * k2, k3 * k3):
        raise NoRealSolution(f"negative radicand {radicand}")
    root = 2.0 * math.sqrt(max(radicand, 0.0))
    s = k1 + k2 + k3
    return (s + root, s - root)


def descartes_residual(k1: float, k2: float, k3: float, k4: float) -> float:
    """|(sum k)^2 - 2 sum k^2|, scaled to the quadruple's size."""
    s = k1 + k2 + k3 + k4
    q = k1 * k1 + k2 * k2 + k3 * k3 + k4 * k4
    scale = max(1.0, q)
    return abs(s * s - 2.0 * q) / scale


def solve_tangent_circle(c1: OrientedCircle, c2: OrientedCircle,
                         c3: OrientedCircle, sign: int = +1) -> OrientedCircle:
    """Fourth circle tangent to three mutually tangent circles.

    ``sign`` selects the curvature root (+1 for the larger curvature, the
    inscribed solution).  The matching center comes from the complex
    Descartes relation; of its two candidates the one actually tangent to
    all three inputs is returned.
    """
    for a, b in ((c1, c2), (c2, c3), (c1, c3)):
        if a.tangency_residual(b) > 1e-6:
            raise DegenerateConfiguration("input circles are not mutually tangent")
    k1, k2, k3 = c1.curvature, c2.curvature, c3.curvature
    plus, minus = descartes_fourth(k1, k2, k3)
    k4 = plus if sign >= 0 else minus
    if abs(k4) < TOL:
        raise DegenerateConfiguration("tangent line, not a circle")
    z1, z2, z3 = c1.center, c2.center, c3.center
    w = k1 * k2 * z1 * z2 + k2 * k3 * z2 * z3 + k3 * k1 * z3 * z1
    base = k1 * z1 + k2 * z2 + k3 * z3
    scale = max(abs(k1 * k2 * z1 * z2), abs(k2 * k3 * z2 * z3),
                abs(k3 * k1 * z3 * z1), 1.0)
    if abs(w) < 1e-12 * scale:     # degenerate radicand: sqrt would amplify noise
        w = 0j
    root = complex(w) ** 0.5
    best: Optional[OrientedCircle] = None
    best_err = math.inf
    for sgn in (1, -1):
        cand = OrientedCircle(k4, (base + 2 * sgn * root) / k4)
        err = max(cand.tangency_residual(c) for c in (c1, c2, c3))
        if err < best_err:
            best, best_err = cand, err
    if best is None or best_err > 1e-9:
        raise DegenerateConfiguration(
            f"no center satisfies tangency (residual {best_err:.3e})")
    return best


@dataclass
class CirclePacking:
    circles: list[OrientedCircle]
    tangencies: list[tuple[int, int]]
    root_size: int
    curvature_bound: float
    quadruples: list[tuple[int, int, int, int]] = field(default_factory=list)

    def max_descartes_residual(self) -> float:
        worst = 0.0
        for quad in self.quadruples:
            ks = [self.circles[i].curvature for i in quad]
            worst = max(worst, descartes_residual(*ks))
        return worst

    def max_tangency_residual(self) -> float:
        return max((self.circles[i].tangency_residual(self.circles[j])
                    for i, j in self.tangencies), default=0.0)

    def curvatures_integral(self, tol: float = 1e-6) -> bool:
        return all(abs(c.curvature - round(c.curvature)) < tol
                   for c in self.circles)

    def to_dict(self) -> dict:
        return {
            "curvature_bound": self.curvature_bound,
            "circles": [{"curvature": c.curvature,
                         "center": [c.center.real, c.center.imag]}
                        for c in self.circles],
            "tangencies": [list(t) for t in self.tangencies],
        }


def standard_root(curvatures: Sequence[float] = (-1, 2, 2, 3)) -> list[OrientedCircle]:
    """Concrete mutually tangent quadruple for the given curvature vector.

    The classical (-1, 2, 2, 3) configuration is built explicitly; other
    quadruples must satisfy the Descartes identity and are positioned by
    the complex relation from three seed circles.
    """
    ks = [float(k) for k in curvatures]
    if len(ks) != 4:
        raise InvalidRoot("a root quadruple needs exactly four curvatures")
    if descartes_residual(*ks) > 1e-9:
        raise InvalidRoot(f"curvatures {ks} violate the Descartes identity")
    if list(ks) == [-1.0, 2.0, 2.0, 3.0]:
        return [
            OrientedCircle(-1.0, 0j),
            OrientedCircle(2.0, complex(-0.5, 0.0)),
            OrientedCircle(2.0, complex(+0.5, 0.0)),
            OrientedCircle(3.0, complex(0.0, 2.0 / 3.0)),
        ]
    raise InvalidRoot(
        "only the (-1, 2, 2, 3) root ships with coordinates; "
        "pass explicit OrientedCircles for other quadruples")


def generate_apollonian(root: Sequence[OrientedCircle],
                        curvature_bound: float) -> CirclePacking:
    """Breadth-first packing generation below a curvature bound.

    Every curvilinear triangle of three mutually tangent circles spawns the
    reflection of its opposite circle; recording (triple -> child) makes
    the contact graph exact regardless of floating point noise.
    """
    circles = list(root)
    if len(circles) != 4:
        raise InvalidRoot("root must contain four circles")
    ks = [c.curvature for c in circles]
    if descartes_residual(*ks) > 1e-9:
        raise InvalidRoot("root quadruple violates the Descartes identity")
    for i in range(4):
        for j in range(i + 1, 4):
            if circles[i].tangency_residual(circles[j]) > 1e-9:
                raise InvalidRoot(f"root circles {i} and {j} are not tangent")

    tangencies = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    quadruples = [(0, 1, 2, 3)]
    # triangle = (supporting triple, circle to reflect through it)
    frontier = [((1, 2, 3), 0), ((0, 2, 3), 1), ((0, 1, 3), 2), ((0, 1, 2), 3)]
    while frontier:
        nxt = []
        for triple, opposite in frontier:
            i, j, k = triple
            ki, kj, kk = (circles[t].curvature for t in triple)
            kp = circles[opposite].curvature
            k_new = 2.0 * (ki + kj + kk) - kp
            if k_new > curvature_bound:
                continue
            z_new = (2.0 * (ki * circles[i].center + kj * circles[j].center
                            + kk * circles[k].center)
                     - kp * circles[opposite].center) / k_new
            idx = len(circles)
            circles.append(OrientedCircle(k_new, z_new))
            for t in triple:
                tangencies.append((t, idx))
            quadruples.append((i, j, k, idx))
            nxt.extend((((i, j, idx), k), ((i, k, idx), j), ((j, k, idx), i)))
        frontier = nxt
    return CirclePacking(circles=circles, tangencies=tangencies,
                         root_size=len(root), curvature_bound=curvature_bound,
                         quadruples=quadruples)


# ---------------------------------------------------------------------------
# contact graph

@dataclass(frozen=True)
class ContactCertificate:
    graph: PlaneGraph
    bipartite: bool
    triangle: Optional[tuple[str, str, str]]
    odd_cycle_length: Optional[int]

    def to_dict(self) -> dict:
        return {
            "vertices": len(self.graph.vertices),
            "edges": len(self.graph.edges),
            "faces": len(self.graph.faces),
            "bipartite": self.bipartite,
            "triangle": list(self.triangle) if self.triangle else None,
            "odd_cycle_length": self.odd_cycle_length,
        }


def circle_name(i: int) -> str:
    return f"c{i}"


def contact_graph_of_packing(p: CirclePacking) -> ContactCertificate:
    """Plane contact graph from recorded tangencies, plus a parity witness.

    The embedding orders each circle's tangency points by angle around its
    center; the enclosing circle sees the packing from the far side of the
    sphere, so its rotation is reversed.
    """
    if not p.circles:
        raise EmbeddingFailure("empty packing")
    neighbors: dict[int, list[int]] = {i: [] for i in range(len(p.circles))}
    for i, j in p.tangencies:
        neighbors[i].append(j)
        neighbors[j].append(i)
    rotation: dict[str, list[str]] = {}
    for i, nbrs in neighbors.items():
        ci = p.circles[i]
        def angle(j: int) -> float:
            try:
                z = ci.tangency_point(p.circles[j])
            except DegenerateConfiguration as exc:
                raise EmbeddingFailure(str(exc)) from exc
            return math.atan2((z - ci.center).imag, (z - ci.center).real)
        ordered = sorted(nbrs, key=angle)
        if ci.curvature < 0:
            ordered.reverse()
        rotation[circle_name(i)] = [circle_name(j) for j in ordered]
    try:
        graph = build_plane_graph(list(rotation), rotation)
    except Exception as exc:
        raise EmbeddingFailure(f"tangency cyclic orders are inconsistent: {exc}") \
            from exc

    triangle = None
    if p.quadruples:
        i, j, k, _ = p.quadruples[0]
        triangle = (circle_name(i), circle_name(j), circle_name(k))
    verdict = is_bipartite(graph)
    return ContactCertificate(
        graph=graph,
        bipartite=verdict.bipartite,
        triangle=triangle,
        odd_cycle_length=len(verdict.odd_cycle) if verdict.odd_cycle else None)


# ---------------------------------------------------------------------------
# exports

def packing_to_svg(p: CirclePacking, width: int = 600,
                   with_graph: bool = False) -> str:
    """Standalone SVG rendering; optionally overlays the contact graph."""
    outer = min(p.circles, key=lambda c: c.curvature)
    if outer.curvature < 0:
        cx, cy, r = outer.center.real, outer.center.imag, outer.radius
    else:
        xs = [c.center.real for c in p.circles]
        ys = [c.center.imag for c in p.circles]
        r = max(max(xs) - min(xs), max(ys) - min(ys)) / 2 + 1
        cx, cy = (max(xs) + min(xs)) / 2, (max(ys) + min(ys)) / 2
    scale = width / (2.2 * r)

    def sx(x: float) -> float:
        return (x - cx) * scale + width / 2

    def sy(y: float) -> float:
        return (cy - y) * scale + width / 2

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{width}" viewBox="0 0 {width} {width}">']
    for c in p.circles:
        parts.append(
            f'<circle cx="{sx(c.center.real):.3f}" cy="{sy(c.center.imag):.3f}" '
            f'r="{c.radius * scale:.3f}" fill="none" stroke="black" '
            f'stroke-width="0.8"/>')
    if with_graph:
        for i, j in p.tangencies:
            a, b = p.circles[i], p.circles[j]
            parts.append(
                f'<line x1="{sx(a.center.real):.3f}" y1="{sy(a.center.imag):.3f}" '
                f'x2="{sx(b.center.real):.3f}" y2="{sy(b.center.imag):.3f}" '
                f'stroke="crimson" stroke-width="0.6"/>')
    parts.append("</svg>")
    return "\n".join(parts)
