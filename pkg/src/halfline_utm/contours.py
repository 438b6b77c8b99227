"""Quadrature contours in the complex plane.

Three kinds are needed by the solution formulas: the (truncated) real line,
counterclockwise boundaries of tubular neighborhoods of rays from the origin,
and small counterclockwise loops (circles around a point, stadiums around a
segment).  A contour is a node/weight list: integrate(f) = sum w_i f(node_i),
with the d-lambda direction folded into the weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import DEFAULT_ORDER, composite_nodes, graded_edges, panel_nodes

__all__ = [
    "Contour", "ContourError", "build_real_line", "build_ray_neighborhood",
    "build_loop", "build_stadium", "integrate",
]


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class Contour:
    """Oriented quadrature path: ``integral f = weights @ f(nodes)``."""

    kind: str  # real_line | ray_neighborhood | closed_loop
    nodes: np.ndarray
    weights: np.ndarray
    params: dict = field(default_factory=dict)

    def __len__(self):
        return self.nodes.size

    @property
    def closed(self):
        return self.kind == "closed_loop"

    def mirror(self) -> "Contour":
        """Reflection across the imaginary axis, orientation preserved.

        If z(s) traces this contour counterclockwise, -conj(z(1-s)) traces the
        mirror counterclockwise with differential +conj(dz); the node order is
        reversed so the list still walks continuously along the path.
        """
        return Contour(
            kind=self.kind,
            nodes=-np.conj(self.nodes[::-1]),
            weights=np.conj(self.weights[::-1]),
            params={**self.params, "mirrored": True},
        )


def _segment_nodes(z_a: complex, z_b: complex, n_panels: int, order=DEFAULT_ORDER):
    s, w = composite_nodes(np.linspace(0.0, 1.0, n_panels + 1), order)
    direction = z_b - z_a
    return z_a + s * direction, w * direction


def _arc_nodes(center: complex, radius: float, phi_a: float, phi_b: float,
               n_panels: int, order=DEFAULT_ORDER):
    phi, w = composite_nodes(np.linspace(phi_a, phi_b, n_panels + 1), order)
    pts = center + radius * np.exp(1j * phi)
    return pts, w * 1j * radius * np.exp(1j * phi)


def build_real_line(R: float, n_panels: int = 48, order: int = DEFAULT_ORDER,
                    grading: float = 2.5) -> Contour:
    """Truncated real line [-R, R], left to right, panels graded toward 0."""
    if R <= 0:
        raise ContourError("truncation radius must be positive")
    if n_panels < 8:
        raise ContourError("need at least 8 panels")
    half = max(4, n_panels // 2)
    pos_edges = R * np.linspace(0.0, 1.0, half + 1) ** grading
    edges = np.concatenate([-pos_edges[::-1], pos_edges[1:]])
    x, w = composite_nodes(edges, order)
    return Contour("real_line", x.astype(complex), w.astype(complex),
                   {"R": R, "n_panels": n_panels, "order": order, "grading": grading})


def build_ray_neighborhood(theta: float, c0: float, w: float, R: float,
                           order: int = DEFAULT_ORDER, density: float = 1.0,
                           pole_reach: float | None = None) -> Contour:
    """Counterclockwise boundary of the w-neighborhood of the ray
    {eta e^{i theta} : eta >= c0}, truncated at radius R.

    Path: in along the clockwise-side edge from radius R, semicircular cap of
    radius w around c0 e^{i theta}, back out along the other edge.  ``w`` must
    satisfy w < c0 sin(min(theta, pi - theta)) so the neighborhood and its
    reflection -lambda stay in their own half-planes.

    ``pole_reach``: outer radius of the stretch of the ray that carries the
    singularities (defaults to 1.5 c0); panels are kept fine out to it.
    """
    if not 0 < theta < np.pi:
        raise ContourError("ray angle must lie in (0, pi)")
    limit = c0 * np.sin(min(theta, np.pi - theta))
    if not 0 < w < limit:
        raise ContourError(
            f"half-width {w} violates 0 < w < c0*sin(theta) = {limit:.6g}; "
            "the neighborhood would cross the real axis")
    if R <= c0:
        raise ContourError("truncation radius must exceed the ray start c0")
    u = np.exp(1j * theta)
    reach = pole_reach if pole_reach is not None else 1.5 * c0
    h0 = max(w / (2.0 * density), 1e-12)
    edge_grid = graded_edges(c0, R, h0=h0, ratio=1.30, h_max=np.inf)
    # force fine resolution along the singular stretch of the ray
    fine = graded_edges(c0, min(max(reach * 1.2, c0 + w), R), h0=h0, ratio=1.15, h_max=w)
    edge_grid = np.unique(np.concatenate([edge_grid, fine]))

    nodes, weights = [], []
    # counterclockwise (region on the left): in along the +i w u edge from R
    # down to c0, around the cap through the inward point (c0 - w) u, out
    # along the -i w u edge from c0 back up to R
    for a, b in zip(edge_grid[::-1][:-1], edge_grid[::-1][1:]):
        z, dw = _segment_nodes(a * u + 1j * w * u, b * u + 1j * w * u, 1, order)
        nodes.append(z)
        weights.append(dw)
    n_cap = max(4, int(np.ceil(4 * density)))
    z, dw = _arc_nodes(c0 * u, w, theta + 0.5 * np.pi, theta + 1.5 * np.pi, n_cap, order)
    nodes.append(z)
    weights.append(dw)
    for a, b in zip(edge_grid[:-1], edge_grid[1:]):
        z, dw = _segment_nodes(a * u - 1j * w * u, b * u - 1j * w * u, 1, order)
        nodes.append(z)
        weights.append(dw)
    return Contour("ray_neighborhood", np.concatenate(nodes), np.concatenate(weights),
                   {"theta": theta, "c0": c0, "w": w, "R": R, "order": order,
                    "density": density, "pole_reach": reach})


def build_loop(center: complex, r: float, n: int = 192,
               excluded: np.ndarray | None = None) -> Contour:
    """Counterclockwise circle around ``center``; trapezoid nodes (spectrally
    accurate for integrands analytic in an annulus around the circle).

    ``excluded``: points (e.g. non-target denominator zeros) the loop must not
    enclose or touch.
    """
    if r <= 0:
        raise ContourError("loop radius must be positive")
    center = complex(center)
    if excluded is not None and len(excluded):
        d = np.min(np.abs(np.asarray(excluded) - center))
        if r >= d:
            raise ContourError(
                f"loop radius {r} around {center:.6g} would enclose an excluded "
                f"point at distance {d:.6g}")
    if abs(center.imag) > 0 and r >= abs(center.imag):
        raise ContourError("loop would cross the real axis")
    phi = 2.0 * np.pi * np.arange(n) / n
    pts = center + r * np.exp(1j * phi)
    w = 1j * r * np.exp(1j * phi) * (2.0 * np.pi / n)
    return Contour("closed_loop", pts, w, {"center": center, "r": r, "n": n})


def build_stadium(seg_a: complex, seg_b: complex, r: float,
                  order: int = DEFAULT_ORDER, density: float = 1.0) -> Contour:
    """Counterclockwise stadium: segment [seg_a, seg_b] inflated by radius r.

    Used in place of an infinite ray neighborhood when the singular stretch of
    the ray is a finite segment: no truncation error, closed-curve quadrature.
    """
    seg_a, seg_b = complex(seg_a), complex(seg_b)
    if r <= 0:
        raise ContourError("stadium radius must be positive")
    length = abs(seg_b - seg_a)
    if length == 0:
        raise ContourError("degenerate segment; use build_loop")
    u = (seg_b - seg_a) / length
    nvec = 1j * u
    theta = np.angle(u)
    n_edge = max(3, int(np.ceil(length / r * 0.75 * density)))
    n_cap = max(4, int(np.ceil(4 * density)))
    nodes, weights = [], []
    # edge on the -n side, a -> b
    z, dw = _segment_nodes(seg_a - r * nvec, seg_b - r * nvec, n_edge, order)
    nodes.append(z); weights.append(dw)
    # cap around seg_b: from angle theta - pi/2 to theta + pi/2
    z, dw = _arc_nodes(seg_b, r, theta - 0.5 * np.pi, theta + 0.5 * np.pi, n_cap, order)
    nodes.append(z); weights.append(dw)
    # edge on the +n side, b -> a
    z, dw = _segment_nodes(seg_b + r * nvec, seg_a + r * nvec, n_edge, order)
    nodes.append(z); weights.append(dw)
    # cap around seg_a: from theta + pi/2 to theta + 3pi/2
    z, dw = _arc_nodes(seg_a, r, theta + 0.5 * np.pi, theta + 1.5 * np.pi, n_cap, order)
    nodes.append(z); weights.append(dw)
    return Contour("closed_loop", np.concatenate(nodes), np.concatenate(weights),
                   {"seg_a": seg_a, "seg_b": seg_b, "r": r, "order": order,
                    "density": density, "shape": "stadium"})


def integrate(contour: Contour, f, with_error: bool = False):
    """sum_i w_i f(node_i).  ``f`` maps a complex array to a complex array.

    with_error=True also returns a crude error estimate from comparing
    against the half-node subsampled rule (closed loops only).
    """
    vals = np.asarray(f(contour.nodes), dtype=complex)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ContourError(f"non-finite integrand value at node {contour.nodes[idx]:.6g}")
    total = contour.weights @ vals
    if not with_error:
        return total
    if contour.kind == "closed_loop" and "n" in contour.params and contour.params["n"] % 2 == 0:
        coarse = 2.0 * (contour.weights[::2] @ vals[::2])
        return total, abs(total - coarse)
    return total, np.nan
