"""SVG picture of a planar coloring over one fundamental domain."""

import itertools

import numpy as np

PALETTE = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6",
    "#bfef45", "#fabed4", "#469990", "#dcbeff", "#9a6324", "#800000", "#aaffc3",
)  # fmt: skip


def _ordered(vertices):
    c = vertices.mean(axis=0)
    ang = np.arctan2(vertices[:, 1] - c[1], vertices[:, 0] - c[0])
    return vertices[np.argsort(ang)]


def _pts(P):
    return " ".join(f"{x:.6f},{y:.6f}" for x, y in P)


def render(C, size=600):
    """Pieces of every color meeting the scaled fundamental domain; the first
    translate is drawn last so the first-match rule is what shows."""
    from .color import CELL_PARTITION

    til = C.tiling
    if til.dimension != 2:
        raise ValueError("SVG rendering needs n = 2")
    L = til.lattice
    s = C.scale
    B = L.basis * s
    domain = np.array([[0, 0], B[:, 0], B[:, 0] + B[:, 1], B[:, 1]])
    lo, hi = domain.min(axis=0), domain.max(axis=0)
    pad = 1.2
    lo, hi = lo - pad, hi + pad
    span = hi - lo
    rel = til.relative_cells(C.nu)
    copies = np.array(list(itertools.product(range(-2, 3), repeat=2)))
    shapes = []
    if C.mode == CELL_PARTITION:
        p = C.partition
        for i, (cell, x) in enumerate(zip(rel, til.sites)):
            for z in copies:
                color = (p["offsets"][i] + int(np.dot(p["weights"], z))) % int(p["modulus"])
                V = s * (cell.vertices + x + L.points(z))
                shapes.append((color, V))
    else:
        for j in reversed(range(len(C.translates))):
            t = C.translates[j]
            for i, (cell, x) in enumerate(zip(rel, til.sites)):
                for z in copies:
                    V = s * (cell.vertices + x + t + L.points(z))
                    shapes.append((j, V))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size * span[1] / span[0]:.0f}" '
        f'viewBox="{lo[0]:.6f} {-hi[1]:.6f} {span[0]:.6f} {span[1]:.6f}">',
        f'<defs><clipPath id="fd"><polygon points="{_pts(domain * [1, -1])}"/></clipPath></defs>',
        '<g clip-path="url(#fd)">',
        f'<polygon points="{_pts(domain * [1, -1])}" fill="#ffffff"/>',
    ]
    for color, V in shapes:
        P = _ordered(V) * [1, -1]
        out.append(f'<polygon points="{_pts(P)}" fill="{PALETTE[color % len(PALETTE)]}" stroke="#000000" stroke-width="0.003"/>')
    out.append("</g>")
    out.append(f'<polygon points="{_pts(domain * [1, -1])}" fill="none" stroke="#000000" stroke-width="0.01"/>')
    centre = domain.mean(axis=0) * [1, -1]
    # the unit circle of the Euclidean norm; polygon bodies are drawn as their own boundary
    if C.body.is_euclidean:
        out.append(
            f'<circle cx="{centre[0]:.6f}" cy="{centre[1]:.6f}" r="{C.body.scale:.6f}" '
            'fill="none" stroke="#000000" stroke-width="0.01" stroke-dasharray="0.04,0.03"/>'
        )
    else:
        V = _ordered(C.body.vertices * C.body.scale) * [1, -1] + centre
        out.append(f'<polygon points="{_pts(V)}" fill="none" stroke="#000000" stroke-width="0.01" stroke-dasharray="0.04,0.03"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
