"""Holonomies and linking numbers in the circuit complement.

The line integral of the field around a closed loop equals, by the Ampere /
Stokes argument, 4*pi*k times the (integer) linking number of the loop with
the circuit.  That identity is the computable form of the claim that the
field is a flat connection on the knot complement: curl-free away from the
wire yet with non-trivial circulation around it.

Two independent routes are implemented so they can catch each other's bugs:

* ``holonomy`` integrates the closed-form superposed field along the loop
  (per-edge interval-halving quadrature with a Richardson-style error
  estimate from successive refinements);
* ``linking_number`` evaluates the Gauss double integral over both curves by
  purely numerical panel quadrature -- no surface construction, no reuse of
  the closed-form field -- and rounds to the nearest integer, refusing to
  answer when the rounding residual is ambiguous.

Sign conventions: a loop circulating counterclockwise about +z around a
single +z current stick has holonomy +4*pi*k and linking number +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import LatticeKnot, parse_point_lines, segments
from .biot_savart import (
    DEFAULT_EXCLUSION_RADIUS,
    FieldError,
    QuadratureError,
    _field_core,
    _segment_arrays,
)


class LoopOnConductorError(FieldError):
    """A loop edge passes within the exclusion radius of the circuit."""

    def __init__(self, loop_edge, segment_index, distance):
        self.loop_edge = loop_edge
        self.segment_index = segment_index
        self.distance = float(distance)
        super().__init__(
            f"loop edge {loop_edge} passes {distance:.3g} from circuit "
            f"segment {segment_index}"
        )


class LinkingPrecisionError(FieldError):
    """Gauss-integral rounding is ambiguous; finer quadrature is needed."""


@dataclass(frozen=True)
class Loop:
    """Oriented closed polyline (real coordinates, not lattice-bound)."""

    vertices: tuple[tuple[float, float, float], ...]
    name: str = ""

    def __post_init__(self):
        verts = tuple(tuple(float(c) for c in v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError(f"loop needs at least 3 vertices, got {len(verts)}")
        for i in range(len(verts)):
            if verts[i] == verts[(i + 1) % len(verts)]:
                raise ValueError(f"consecutive loop vertices {i} coincide: {verts[i]}")

    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = [np.asarray(p, dtype=float) for p in self.vertices]
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def reversed(self) -> "Loop":
        return Loop(vertices=tuple(reversed(self.vertices)), name=self.name)

    def translated(self, offset) -> "Loop":
        off = tuple(float(c) for c in offset)
        return Loop(
            vertices=tuple(tuple(c + o for c, o in zip(v, off)) for v in self.vertices),
            name=self.name,
        )

    def scaled(self, factor: float) -> "Loop":
        return Loop(
            vertices=tuple(tuple(c * factor for c in v) for v in self.vertices),
            name=self.name,
        )


@dataclass(frozen=True)
class HolonomyResult:
    """Line integral of the field around a loop, in units of k."""

    value: float
    estimated_error: float
    edges_evaluated: int
    inferred_linking: int
    residual: float
    k: float


def _segment_segment_distances(p0, p1, q0s, q1s):
    """Distance from one segment (p0, p1) to each of N segments (q0s, q1s).

    Standard clamped closest-point computation between segment pairs, with
    the parallel case resolved by the same clamping iteration.
    """
    d1 = p1 - p0                       # (3,)
    d2 = q1s - q0s                     # (N, 3)
    r = p0[None, :] - q0s              # (N, 3)
    a = float(np.dot(d1, d1))
    e = np.einsum("nc,nc->n", d2, d2)
    f = np.einsum("nc,nc->n", d2, r)
    c = r @ d1
    b = d2 @ d1
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0.0, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        # Clamp t, then recompute s against the clamped t where needed.
        s = np.where(t < 0.0, np.clip(-c / a, 0.0, 1.0),
                     np.where(t > 1.0, np.clip((b - c) / a, 0.0, 1.0), s))
        t = np.clip(t, 0.0, 1.0)
    closest1 = p0[None, :] + s[:, None] * d1[None, :]
    closest2 = q0s + t[:, None] * d2
    return np.linalg.norm(closest1 - closest2, axis=1)


def loop_clearance(knot: LatticeKnot, loop: Loop):
    """Minimum distance from each loop edge to the circuit.

    Returns (clearance, (loop_edge, segment_index)) for the closest approach.
    """
    starts, ends = _segment_arrays(segments(knot))
    best = math.inf
    where = (0, 1)
    for i, (a, b) in enumerate(loop.edges()):
        d = _segment_segment_distances(a, b, starts, ends)
        j = int(np.argmin(d))
        if d[j] < best:
            best = float(d[j])
            where = (i, j + 1)
    return best, where


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def holonomy(knot: LatticeKnot, loop: Loop, tol: float = 1e-6,
             exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS,
             max_levels: int = 18) -> HolonomyResult:
    """Integrate the circuit's field along the loop.

    Each loop edge gets an equal share of the absolute tolerance and is
    integrated with composite fixed-order Gauss panels under interval
    halving; the Richardson-style error estimate is the difference between
    successive refinement levels.
    """
    segs = segments(knot)
    starts, ends = _segment_arrays(segs)

    edges = loop.edges()
    for i, (a, b) in enumerate(edges):
        d = _segment_segment_distances(a, b, starts, ends)
        j = int(np.argmin(d))
        if d[j] < exclusion_radius:
            raise LoopOnConductorError(i, j + 1, d[j])

    budget = tol / len(edges)
    value = 0.0
    est = 0.0
    for a, b in edges:
        e = b - a

        def edge_integral(n_panels):
            # Gauss nodes of every panel evaluated in one batch.
            offsets = (np.arange(n_panels)[:, None] + 0.5 * (_GL_X + 1.0)[None, :]) / n_panels
            t = offsets.ravel()
            pts = a[None, :] + t[:, None] * e[None, :]
            contrib, _ = _field_core(starts, ends, pts)
            b_along = np.einsum("mc,c->m", np.sum(contrib, axis=1), e)
            w = np.broadcast_to(_GL_W[None, :] / (2.0 * n_panels), offsets.shape).ravel()
            return float(np.dot(w, b_along))

        prev = edge_integral(1)
        for level in range(1, max_levels + 1):
            cur = edge_integral(2 ** level)
            err = abs(cur - prev)
            prev = cur
            if err <= budget:
                break
        else:
            raise QuadratureError(
                f"holonomy edge failed to converge to {budget:.3g} "
                f"after {max_levels} halvings"
            )
        value += cur
        est += err

    value *= knot.k
    est *= abs(knot.k)
    four_pi_k = 4.0 * math.pi * knot.k
    inferred = int(round(value / four_pi_k)) if knot.k != 0 else 0
    residual = value - four_pi_k * inferred
    return HolonomyResult(
        value=value,
        estimated_error=est,
        edges_evaluated=len(edges),
        inferred_linking=inferred,
        residual=residual,
        k=knot.k,
    )


def _chunk_polyline(points_start, points_end, max_len=2.0):
    """Split segments into sub-segments no longer than max_len."""
    out_start, out_end = [], []
    for p, q in zip(points_start, points_end):
        n = max(1, int(math.ceil(np.linalg.norm(q - p) / max_len)))
        ts = np.linspace(0.0, 1.0, n + 1)
        for t0, t1 in zip(ts[:-1], ts[1:]):
            out_start.append(p + t0 * (q - p))
            out_end.append(p + t1 * (q - p))
    return np.array(out_start), np.array(out_end)


_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


def _gauss_pair_integrals(p0, e, q0, f, w, level):
    """Tensor-panel value of the Gauss integrand for each (loop, knot) pair.

    Integrates w . (P(s) - Q(t)) / |P(s) - Q(t)|^3 over the unit square with
    2^level x 2^level panels and a fixed 4-point Gauss rule per direction.
    """
    cells = 2 ** level
    nodes = ((np.arange(cells)[:, None] + 0.5 * (_GL4_X + 1.0)[None, :]) / cells).ravel()
    wts = np.broadcast_to(_GL4_W[None, :] / (2.0 * cells), (cells, 4)).ravel()

    out = np.empty(len(p0))
    # Batch over pairs to bound peak memory at high refinement levels.
    n_nodes = len(nodes)
    batch = max(1, int(5e6 // (n_nodes * n_nodes * 3)))
    for lo in range(0, len(p0), batch):
        hi = lo + batch
        ps = p0[lo:hi, None, :] + nodes[None, :, None] * e[lo:hi, None, :]   # (K, S, 3)
        qs = q0[lo:hi, None, :] + nodes[None, :, None] * f[lo:hi, None, :]   # (K, T, 3)
        diff = ps[:, :, None, :] - qs[:, None, :, :]                         # (K, S, T, 3)
        d3 = np.sum(diff * diff, axis=-1) ** 1.5
        g = np.einsum("kstc,kc->kst", diff, w[lo:hi]) / d3
        out[lo:hi] = np.einsum("kst,s,t->k", g, wts, wts)
    return out


def linking_number(knot: LatticeKnot, loop: Loop, tol: float = 1e-3,
                   max_level: int = 7) -> int:
    """Gauss-integral linking number of the loop with the knot.

    Purely numerical oracle: both curves are chunked, every transverse
    chunk pair contributes a panel-quadrature double integral, and panels
    are refined until successive levels agree.  Raises
    LinkingPrecisionError when the result does not round convincingly.
    """
    starts, ends = _segment_arrays(segments(knot))
    clear, (i, j) = loop_clearance(knot, loop)
    if clear <= 0.0:
        raise LoopOnConductorError(i, j, clear)

    lv = [np.asarray(p, dtype=float) for p in loop.vertices]
    ls = np.array(lv)
    le = np.array(lv[1:] + lv[:1])
    p0, p1 = _chunk_polyline(ls, le)
    q0, q1 = _chunk_polyline(starts, ends)

    # All (loop chunk, knot chunk) pairs; parallel pairs integrate to zero
    # exactly because dl1 x dl2 vanishes.
    np_, nq = len(p0), len(q0)
    pi = np.repeat(np.arange(np_), nq)
    qi = np.tile(np.arange(nq), np_)
    e = (p1 - p0)[pi]
    f = (q1 - q0)[qi]
    w = np.cross(e, f)
    active = np.einsum("kc,kc->k", w, w) > 0.0
    a0, ae, b0, bf, wv = p0[pi][active], e[active], q0[qi][active], f[active], w[active]

    if len(a0) == 0:
        return 0

    per_pair_tol = (4.0 * math.pi * tol) / len(a0)
    vals = _gauss_pair_integrals(a0, ae, b0, bf, wv, 0)
    err = np.full(len(a0), math.inf)
    unconverged = np.arange(len(a0))
    for level in range(1, max_level + 1):
        new = _gauss_pair_integrals(
            a0[unconverged], ae[unconverged], b0[unconverged], bf[unconverged],
            wv[unconverged], level,
        )
        err[unconverged] = np.abs(new - vals[unconverged])
        vals[unconverged] = new
        unconverged = unconverged[err[unconverged] > per_pair_tol]
        if len(unconverged) == 0:
            break
    else:
        raise LinkingPrecisionError(
            f"{len(unconverged)} chunk pairs unconverged at level {max_level}"
        )

    total = float(np.sum(vals)) / (4.0 * math.pi)
    nearest = int(round(total))
    residual = abs(total - nearest)
    if residual >= 0.25:
        raise LinkingPrecisionError(
            f"Gauss integral {total:.6f} rounds ambiguously (residual {residual:.3f})"
        )
    return nearest


@dataclass(frozen=True)
class LoopCheck:
    loop_name: str
    holonomy: float
    expected: float
    linking: int
    residual: float
    passed: bool


@dataclass(frozen=True)
class FlatConnectionReport:
    checks: tuple[LoopCheck, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_flat_connection(knot: LatticeKnot, loops, tol: float = 1e-5) -> FlatConnectionReport:
    """Check holonomy = 4*pi*k*Lk for every loop, Lk from the Gauss oracle."""
    checks = []
    for loop in loops:
        res = holonomy(knot, loop, tol=min(tol, 1e-6))
        lk = linking_number(knot, loop)
        expected = 4.0 * math.pi * knot.k * lk
        resid = abs(res.value - expected)
        checks.append(
            LoopCheck(
                loop_name=loop.name,
                holonomy=res.value,
                expected=expected,
                linking=lk,
                residual=resid,
                passed=resid < tol * max(1.0, abs(res.value)),
            )
        )
    return FlatConnectionReport(checks=tuple(checks), tol=tol)


# --- loop file format (same grammar as knot files, real coordinates) --------


def parse_loop_text(text: str, name: str = "") -> Loop:
    return Loop(vertices=tuple(parse_point_lines(text, float)), name=name)


def read_loop_file(path, name: str | None = None) -> Loop:
    p = Path(path)
    return parse_loop_text(p.read_text(encoding="ascii"), name=name or p.stem)


def format_loop(loop: Loop, header_comments: tuple[str, ...] = ()) -> str:
    lines = [f"# {c}" for c in header_comments]
    lines += [f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in loop.vertices]
    return "\n".join(lines) + "\n"


def write_loop_file(loop: Loop, path, header_comments: tuple[str, ...] = ()) -> None:
    Path(path).write_text(format_loop(loop, header_comments), encoding="ascii")
