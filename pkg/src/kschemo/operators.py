"""Discrete spatial operators: diffusion, chemotactic transport, nonlocal source.

Everything is assembled in flux form on cell faces with zero flux at the
boundary faces, so the discrete integrals of laplacian() and
chemo_divergence() telescope to zero regardless of the input fields.  That
telescoping is what makes the per-step mass identity of the stepper exact
up to solver/rounding noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, _require_finite, lp_norm_pow
from .params import ModelParams

FACE_SCHEMES = ("upwind", "central")


@dataclass
class OperatorWorkspace:
    """Preallocated face-flux and scratch buffers, one per worker."""

    flux: tuple[np.ndarray, ...]
    scratch: np.ndarray

    @classmethod
    def for_grid(cls, grid: Grid) -> "OperatorWorkspace":
        if grid.dim == 1:
            (nx,) = grid.cells
            flux = (np.zeros(nx + 1),)
        else:
            nx, ny = grid.cells
            flux = (np.zeros((nx + 1, ny)), np.zeros((nx, ny + 1)))
        return cls(flux=flux, scratch=grid.zeros())


def _face_slabs(arr: np.ndarray, axis: int):
    left = tuple(slice(None, -1) if ax == axis else slice(None) for ax in range(arr.ndim))
    right = tuple(slice(1, None) if ax == axis else slice(None) for ax in range(arr.ndim))
    return arr[left], arr[right]


def laplacian(f: np.ndarray, grid: Grid, ws: OperatorWorkspace | None = None) -> np.ndarray:
    """Second-order Neumann Laplacian (3-point/5-point stencil) in flux form."""
    arr = _require_finite(f)
    if ws is None:
        ws = OperatorWorkspace.for_grid(grid)
    out = np.zeros_like(arr)
    for axis in range(grid.dim):
        h = grid.h[axis]
        flux = ws.flux[axis]
        flux.fill(0.0)
        interior = tuple(
            slice(1, -1) if ax == axis else slice(None) for ax in range(grid.dim)
        )
        f_l, f_r = _face_slabs(arr, axis)
        flux[interior] = (f_r - f_l) / h
        fl, fr = _face_slabs(flux, axis)
        out += (fr - fl) / h
    return out


def chemo_divergence(
    u: np.ndarray,
    v: np.ndarray,
    grid: Grid,
    chi: float,
    scheme: str = "upwind",
    positivity_tol: float = 1e-12,
    ws: OperatorWorkspace | None = None,
) -> np.ndarray:
    """Flux-form div(u * grad(v)); face value of u upwinded on sign(v_R - v_L).

    Upwinding preserves nonnegativity of the explicit transport update under
    the stepper's dt bound at first-order accuracy; scheme="central" uses the
    arithmetic face mean instead (second order, not positivity-safe).  The
    sensitivity chi fixes the transport direction; it is nonnegative here so
    the upwind side is decided by the sign of (v_R - v_L) alone.
    """
    if scheme not in FACE_SCHEMES:
        raise ValueError(f"unknown face scheme {scheme!r}")
    if chi < 0:
        raise ValueError(f"chi >= 0 required, got {chi}")
    ua = _require_finite(u, "u")
    va = _require_finite(v, "v")
    umin = float(ua.min())
    if umin < -positivity_tol:
        raise ValueError(f"u dips to {umin}, below -{positivity_tol}")
    if ws is None:
        ws = OperatorWorkspace.for_grid(grid)

    out = np.zeros_like(ua)
    for axis in range(grid.dim):
        h = grid.h[axis]
        flux = ws.flux[axis]
        flux.fill(0.0)
        interior = tuple(
            slice(1, -1) if ax == axis else slice(None) for ax in range(grid.dim)
        )
        v_l, v_r = _face_slabs(va, axis)
        dv = (v_r - v_l) / h
        u_l, u_r = _face_slabs(ua, axis)
        if scheme == "upwind":
            u_face = np.where(dv > 0, u_l, u_r)
        else:
            u_face = 0.5 * (u_l + u_r)
        flux[interior] = u_face * dv
        fl, fr = _face_slabs(flux, axis)
        out += (fr - fl) / h
    return out


def nonlocal_source(
    u: np.ndarray,
    grid: Grid,
    params: ModelParams,
    positivity_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Reaction field a*u^alpha - b*u^alpha * I with I = int(u^beta).

    Returns (source field, I).  The integral is taken from the current u
    (explicit treatment), which keeps the reaction pointwise once I is
    known.  Values of u in [-positivity_tol, 0) are treated as 0 so
    fractional powers stay real; larger negatives are scheme errors.
    """
    ua = _require_finite(u, "u")
    umin = float(ua.min())
    if umin < -positivity_tol:
        raise ValueError(f"u dips to {umin}, below -{positivity_tol}")
    u_pos = np.maximum(ua, 0.0)
    if params.alpha == 1.0:
        u_alpha = u_pos
    else:
        u_alpha = u_pos**params.alpha
    nl_integral = lp_norm_pow(u_pos, grid, params.beta)
    source = (params.a - params.b * nl_integral) * u_alpha
    return source, nl_integral
