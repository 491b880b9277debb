"""Quadrature engines for the energy-balance integrals.

Two kinds of integral dominate this problem: Gaussian-weighted velocity
integrals whose integrand is a Lorentzian times exp(-v^2), and spatial
integrals over the beam/crystal overlap whose integrand is smooth except
for a resonance stripe and the density edge.  Velocity integrals use
Gauss-Hermite rules, switching to graded adaptive Gauss-Kronrod panels
when the Lorentzian becomes too narrow for polynomial quadrature; spatial
integrals use a globally adaptive Gauss-Kronrod scheme with vectorized
panel evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

__all__ = [
    "GaussHermiteRule",
    "QuadratureSpec",
    "QuadratureError",
    "gauss_hermite",
    "integrate_1d",
    "integrate_disk_xy",
    "gauss_lorentz_moments",
]


@dataclass(frozen=True, eq=False)
class GaussHermiteRule:
    """Nodes and weights of a Gauss-Hermite rule for weight exp(-v^2)."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive integrators.

    Convergence requires the global error estimate to fall below
    ``max(abs_tol, rel_tol * |integral|)``.  ``max_subdivisions`` caps the
    number of panel bisections before giving up.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError(f"abs_tol must be non-negative, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError(
                f"max_subdivisions must be at least 1, got {self.max_subdivisions}")


class QuadratureError(RuntimeError):
    """Adaptive integration failed to meet its tolerance.

    Carries the best available ``estimate`` and its ``error`` bound so a
    caller can decide whether the partial result is still usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


def gauss_hermite(order: int) -> GaussHermiteRule:
    """Build a Gauss-Hermite rule; exact for exp(-v^2) * poly(v) up to
    degree 2*order - 1."""
    if not 1 <= int(order) <= 200:
        raise ValueError(f"order must be in [1, 200], got {order}")
    nodes, weights = hermgauss(int(order))
    return GaussHermiteRule(order=int(order), nodes=nodes, weights=weights)


# 15-point Kronrod extension of the 7-point Gauss rule (positive half;
# standard QUADPACK abscissae and weights).
_XK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

# full 15-point arrays, ordered left to right
_KNODES = np.concatenate([-_XK[:7], _XK[::-1]])
_KWEIGHTS = np.concatenate([_WK[:7], _WK[::-1]])
# Gauss-7 weights aligned with the Kronrod nodes (zero at pure-Kronrod nodes)
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:14:2] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]


def _panel_nodes(a, b):
    """Kronrod nodes for panels [a_i, b_i]; shape (npanels, 15)."""
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    return mid + half * _KNODES


def _panel_integrals(fv, a, b):
    """Kronrod and Gauss estimates from node values fv of shape (n, 15)."""
    half = 0.5 * (b - a)
    k = fv @ _KWEIGHTS * half
    g = fv @ _GWEIGHTS * half
    return k, np.abs(k - g)


def _integrate_family(f, a, b, rel_tol, abs_tol, max_subdivisions,
                      breakpoints=None):
    """Adaptively integrate a family of integrands over one shared mesh.

    ``f`` maps an ndarray of n points to an (n, nk) array: nk related
    integrands evaluated at the same points.  Panels are refined until
    every member's summed error estimate passes its tolerance, so members
    needing resolution in different places all get it.  ``abs_tol`` may be
    a scalar or an (nk,) array.  Returns ``(values, errors)`` of shape
    (nk,).
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError(f"integration limits must be finite, got [{a}, {b}]")

    pts = [a, b]
    if breakpoints is not None:
        pts.extend(p for p in np.asarray(breakpoints, dtype=float)
                   if a < p < b)
    pts = np.unique(np.asarray(pts, dtype=float))
    lo, hi = pts[:-1], pts[1:]

    def evaluate(lo, hi):
        x = _panel_nodes(lo, hi).ravel()
        fv = np.asarray(f(x), dtype=float)
        if not np.isfinite(fv).all():
            bad = x[np.argwhere(~np.isfinite(fv.reshape(x.size, -1)))[0][0]]
            raise QuadratureError(
                f"integrand returned a non-finite value at x = {bad!r}")
        # panel-major blocks of 15 nodes
        return fv.reshape(len(lo), 15, -1)

    def panel_integrals(fv, lo, hi):
        half = 0.5 * (hi - lo)[:, None]
        k = np.einsum("pnk,n->pk", fv, _KWEIGHTS) * half
        g = np.einsum("pnk,n->pk", fv, _GWEIGHTS) * half
        return k, np.abs(k - g)

    vals, errs = panel_integrals(evaluate(lo, hi), lo, hi)
    abs_tol = np.broadcast_to(np.asarray(abs_tol, dtype=float),
                              (vals.shape[1],))
    splits = 0
    while True:
        totals = vals.sum(axis=0)
        err = errs.sum(axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(totals))
        if (err <= tol).all():
            return totals, err
        mask = (errs > 0.5 * tol / len(vals)).any(axis=1)
        if not mask.any():
            worst = (errs / tol).max(axis=1)
            mask = worst == worst.max()
        if splits + int(mask.sum()) > max_subdivisions:
            raise QuadratureError(
                f"needed more than {max_subdivisions} subdivisions "
                f"(max error {err.max():.3e})",
                estimate=totals, error=err)
        splits += int(mask.sum())
        mid = 0.5 * (lo[mask] + hi[mask])
        new_lo = np.concatenate([lo[mask], mid])
        new_hi = np.concatenate([mid, hi[mask]])
        new_vals, new_errs = panel_integrals(
            evaluate(new_lo, new_hi), new_lo, new_hi)
        lo = np.concatenate([lo[~mask], new_lo])
        hi = np.concatenate([hi[~mask], new_hi])
        vals = np.concatenate([vals[~mask], new_vals])
        errs = np.concatenate([errs[~mask], new_errs])


def integrate_1d(f, a, b, spec=None, breakpoints=None):
    """Globally adaptive Gauss-Kronrod integration of f over [a, b].

    The integrand must be vectorized: given an ndarray of points it returns
    the ndarray of values.  Each refinement round evaluates every panel
    needing subdivision in a single call, so the cost of adaptivity is a
    handful of vectorized evaluations rather than per-panel Python loops.

    Returns ``(value, error_estimate)``; raises :class:`QuadratureError`
    if the tolerance cannot be met within ``max_subdivisions`` bisections.

    ``breakpoints`` optionally seeds the initial mesh with known structure
    (resonance locations, support edges); points outside (a, b) are ignored.
    """
    spec = spec or QuadratureSpec()
    if b <= a:
        return 0.0, 0.0
    vals, errs = _integrate_family(
        lambda x: np.asarray(f(x), dtype=float)[:, None],
        a, b, rel_tol=spec.rel_tol, abs_tol=spec.abs_tol,
        max_subdivisions=spec.max_subdivisions, breakpoints=breakpoints)
    return float(vals[0]), float(errs[0])


def integrate_disk_xy(f, radius, spec=None):
    """Integrate f(x, y) over the disk x^2 + y^2 <= radius^2.

    The inner y-integral runs along the chord at each outer x-node with
    limits +/- sqrt(R^2 - x^2); the integrand is called as ``f(x, y_array)``
    with scalar x.  Inner convergence failures propagate.  The returned
    error combines the outer panel estimate with the integrated inner
    estimates.
    """
    spec = spec or QuadratureSpec()
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    inner_spec = QuadratureSpec(
        rel_tol=spec.rel_tol,
        abs_tol=spec.abs_tol / (4 * radius) if spec.abs_tol else 0.0,
        max_subdivisions=spec.max_subdivisions,
    )
    inner_err_sum = 0.0
    inner_count = 0

    def chord_integral(xs):
        nonlocal inner_err_sum, inner_count
        out = np.empty_like(xs)
        for i, x in enumerate(xs):
            half = radius * radius - x * x
            if half <= 0:
                out[i] = 0.0
                continue
            half = math.sqrt(half)
            val, err = integrate_1d(lambda y: f(x, y), -half, half,
                                    inner_spec)
            out[i] = val
            inner_err_sum += err
            inner_count += 1
        return out

    value, outer_err = integrate_1d(chord_integral, -radius, radius, spec)
    inner_err = (inner_err_sum / inner_count * 2 * radius) if inner_count else 0.0
    return value, outer_err + inner_err


def _graded_breakpoints(center, width, lo, hi, levels):
    """Panel edges packed geometrically around a Lorentzian center.

    Returns a (npairs, 2*levels + 2) array of edges clipped to [lo, hi];
    zero-width panels from the clipping are harmless and removed later.
    """
    j = np.arange(levels)
    steps = width[:, None] * 2.0**j
    edges = np.concatenate([
        center[:, None] - steps[:, ::-1], center[:, None] + steps], axis=1)
    return np.clip(edges, lo, hi)


def gauss_lorentz_moments(center, width, rule=None, spec=None,
                          method="hermite"):
    """Moments of exp(-v^2) against a unit-peak Lorentzian.

    Computes, vectorized over broadcastable ``center`` and ``width``,

        I0 = integral exp(-v^2) / ((v - center)^2 + width^2) dv
        I1 = integral v exp(-v^2) / ((v - center)^2 + width^2) dv

    ``method="hermite"`` evaluates them with a Gauss-Hermite rule (default
    order 40), accurate while the Lorentzian half-width is of order one.
    ``method="adaptive"`` integrates on [-8, 8] with panels packed
    geometrically around the Lorentzian core, refined to tolerance; use it
    when the width falls below the Hermite rule's resolution.
    """
    center = np.asarray(center, dtype=float)
    width = np.asarray(width, dtype=float)
    if np.any(width <= 0):
        raise ValueError("Lorentzian width must be positive")

    if method == "hermite":
        rule = rule or gauss_hermite(40)
        x, w = rule.nodes, rule.weights
        den = (x - center[..., None]) ** 2 + width[..., None] ** 2
        i0 = (w / den).sum(axis=-1)
        i1 = (w * x / den).sum(axis=-1)
        return i0, i1
    if method != "adaptive":
        raise ValueError(f"unknown method {method!r}")

    spec = spec or QuadratureSpec()
    shape = np.broadcast_shapes(center.shape, width.shape)
    c = np.broadcast_to(center, shape).ravel()
    s = np.broadcast_to(width, shape).ravel()
    npairs = c.size
    span = 8.0

    levels = int(min(26, max(3, math.ceil(math.log2(
        2 * span / max(s.min(), 1e-300))))))
    edges = _graded_breakpoints(c, s, -span, span, levels)
    edges = np.concatenate([
        np.full((npairs, 1), -span), edges, np.full((npairs, 1), span)],
        axis=1)
    edges.sort(axis=1)
    owner = np.repeat(np.arange(npairs), edges.shape[1] - 1)
    lo = edges[:, :-1].ravel()
    hi = edges[:, 1:].ravel()
    keep = hi > lo
    owner, lo, hi = owner[keep], lo[keep], hi[keep]

    def eval_panels(owner, lo, hi):
        v = _panel_nodes(lo, hi)
        gauss = np.exp(-v * v)
        den = (v - c[owner, None]) ** 2 + s[owner, None] ** 2
        f0 = gauss / den
        k0, e0 = _panel_integrals(f0, lo, hi)
        k1, e1 = _panel_integrals(v * f0, lo, hi)
        return k0, k1, e0, e1

    k0, k1, e0, e1 = eval_panels(owner, lo, hi)
    splits = 0
    while True:
        i0 = np.bincount(owner, weights=k0, minlength=npairs)
        i1 = np.bincount(owner, weights=k1, minlength=npairs)
        # normalize both moment errors by a common per-pair scale
        scale = np.abs(i0) * (1 + np.abs(c))
        tol = np.maximum(spec.abs_tol, spec.rel_tol * scale)
        err = np.bincount(owner, weights=e0, minlength=npairs) + \
            np.bincount(owner, weights=e1, minlength=npairs)
        bad = err > tol
        if not bad.any():
            return i0.reshape(shape), i1.reshape(shape)
        counts = np.bincount(owner, minlength=npairs)
        mask = bad[owner] & ((e0 + e1) > 0.25 * tol[owner] / counts[owner])
        if not mask.any():
            mask = bad[owner]
        if splits + int(mask.sum()) > spec.max_subdivisions * max(
                1, npairs // 4):
            raise QuadratureError(
                "Lorentzian moment refinement exceeded the subdivision "
                f"budget ({spec.max_subdivisions})",
                estimate=i0.reshape(shape), error=float(err.max()))
        splits += int(mask.sum())
        mid = 0.5 * (lo[mask] + hi[mask])
        add_owner = np.concatenate([owner[mask], owner[mask]])
        add_lo = np.concatenate([lo[mask], mid])
        add_hi = np.concatenate([mid, hi[mask]])
        a0, a1, ae0, ae1 = eval_panels(add_owner, add_lo, add_hi)
        owner = np.concatenate([owner[~mask], add_owner])
        lo = np.concatenate([lo[~mask], add_lo])
        hi = np.concatenate([hi[~mask], add_hi])
        k0 = np.concatenate([k0[~mask], a0])
        k1 = np.concatenate([k1[~mask], a1])
        e0 = np.concatenate([e0[~mask], ae0])
        e1 = np.concatenate([e1[~mask], ae1])
