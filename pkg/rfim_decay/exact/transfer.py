"""Column transfer matrix for rectangles, at finite β and in the (min, +) semiring.

The rectangle is cut into slices along its longer side; the frontier holds
one spin per row of the current slice, 2^width states in all. Sites are
absorbed one at a time, so each step touches every frontier state once and
the cost per site is O(2^width) instead of the O(4^width) of a full slice
matrix.

Frontier arrays are flat with C-order bit layout: viewed with shape
(2,)*width, axis ``r`` is row ``r`` and index 0 means spin +1.

Finite β works with weights scaled so that every per-step factor is at most
1 and renormalises to the running maximum after each step, accumulating the
scale in log form. Marginals come from a backward pass that stores only the
messages of requested sites, followed by the forward pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ..errors import EngineCapacityError

if TYPE_CHECKING:
    from collections.abc import Iterable

    from ..lattice import LatticeRegion
    from ..model import IsingInstance

TRANSFER_WIDTH_CAP = 16


@dataclass(frozen=True)
class _Step:
    site: int
    row: int
    left: float
    down: float
    ext: float


def transfer_width(region: LatticeRegion) -> int:
    x0, x1, y0, y1 = region.bounds
    return min(x1 - x0 + 1, y1 - y0 + 1)


def supports(region: LatticeRegion, width_cap: int = TRANSFER_WIDTH_CAP) -> bool:
    return region.is_rectangle and transfer_width(region) <= width_cap


def _schedule(instance: IsingInstance, width_cap: int) -> tuple[int, list[_Step]]:
    region = instance.region
    if not region.is_rectangle:
        raise EngineCapacityError("The transfer matrix needs a rectangular region; use enumeration or Monte Carlo")
    x0, x1, y0, y1 = region.bounds
    nx, ny = x1 - x0 + 1, y1 - y0 + 1
    width, length = (ny, nx) if ny <= nx else (nx, ny)
    if width > width_cap:
        raise EngineCapacityError(
            f"Transfer-matrix width {width} exceeds the cap {width_cap}; use Monte Carlo (mc) for this region"
        )

    def site(c: int, r: int) -> int:
        coords = (x0 + c, y0 + r) if ny <= nx else (x0 + r, y0 + c)
        return region.index[coords]

    def coupling(i: int, j: int) -> float:
        return float(instance.couplings[region.edge_index[(min(i, j), max(i, j))]])

    steps: list[_Step] = []
    for c in range(length):
        for r in range(width):
            i = site(c, r)
            left = coupling(site(c - 1, r), i) if c > 0 else 0.0
            down = coupling(site(c, r - 1), i) if r > 0 else 0.0
            steps.append(_Step(i, r, left, down, float(instance.ext[i])))
    return width, steps


def _forward(psi: np.ndarray, step: _Step, beta: float) -> tuple[np.ndarray, float]:
    r = step.row
    v = psi.reshape(1 << r, 2, -1)
    a, b = v[:, 0, :], v[:, 1, :]
    q = math.exp(-2.0 * beta * step.left)
    new = np.empty_like(v)
    new[:, 0, :] = a + q * b
    new[:, 1, :] = q * a + b
    log_inc = beta * step.left
    if r > 0 and step.down:
        qd = math.exp(-2.0 * beta * step.down)
        pair = new.reshape(1 << (r - 1), 2, 2, -1)
        pair[:, 0, 1, :] *= qd
        pair[:, 1, 0, :] *= qd
        log_inc += beta * step.down
    qe = math.exp(-2.0 * beta * abs(step.ext))
    new[:, 1 if step.ext >= 0 else 0, :] *= qe
    log_inc += beta * abs(step.ext)
    top = float(new.max())
    if not top > 0.0:
        raise EngineCapacityError("Transfer-matrix weights underflowed; use the ground-state engine at this beta")
    new /= top
    return new.reshape(-1), log_inc + math.log(top)


def _backward(chi: np.ndarray, step: _Step, beta: float) -> np.ndarray:
    r = step.row
    v = chi.reshape(1 << r, 2, -1).copy()
    if r > 0 and step.down:
        qd = math.exp(-2.0 * beta * step.down)
        pair = v.reshape(1 << (r - 1), 2, 2, -1)
        pair[:, 0, 1, :] *= qd
        pair[:, 1, 0, :] *= qd
    qe = math.exp(-2.0 * beta * abs(step.ext))
    v[:, 1 if step.ext >= 0 else 0, :] *= qe
    q = math.exp(-2.0 * beta * step.left)
    plus, minus = v[:, 0, :], v[:, 1, :]
    out = np.empty_like(v)
    out[:, 0, :] = plus + q * minus
    out[:, 1, :] = q * plus + minus
    top = float(out.max())
    if not top > 0.0:
        raise EngineCapacityError("Transfer-matrix weights underflowed; use the ground-state engine at this beta")
    out /= top
    return out.reshape(-1)


def _row_split(joint: np.ndarray, row: int) -> tuple[float, float]:
    v = joint.reshape(1 << row, 2, -1)
    return float(v[:, 0, :].sum()), float(v[:, 1, :].sum())


def solve(
    instance: IsingInstance,
    beta: float,
    sites: Iterable[int] = (),
    width_cap: int = TRANSFER_WIDTH_CAP,
) -> tuple[float, dict[int, float]]:
    """Return ``(log Z, {site index: ⟨σ⟩})`` for the requested site indices."""
    width, steps = _schedule(instance, width_cap)
    position = {step.site: t for t, step in enumerate(steps)}
    wanted = {position[i] for i in sites}

    stored: dict[int, np.ndarray] = {}
    if wanted:
        chi = np.ones(1 << width)
        for t in range(len(steps) - 1, min(wanted) - 1, -1):
            if t in wanted:
                stored[t] = chi
            chi = _backward(chi, steps[t], beta)

    psi = np.zeros(1 << width)
    psi[0] = 1.0
    log_z = 0.0
    mags: dict[int, float] = {}
    for t, step in enumerate(steps):
        psi, inc = _forward(psi, step, beta)
        log_z += inc
        if t in stored:
            plus, minus = _row_split(psi * stored.pop(t), step.row)
            mags[step.site] = (plus - minus) / (plus + minus)
    return log_z + math.log(float(psi.sum())), mags


# -- (min, +) semiring with degeneracy counts ---------------------------------


def _tropical_min(
    e1: np.ndarray, c1: np.ndarray, e2: np.ndarray, c2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    e = np.minimum(e1, e2)
    c = np.where(e1 == e, c1, 0.0) + np.where(e2 == e, c2, 0.0)
    return e, c


def _add_local_energy(energy: np.ndarray, step: _Step) -> None:
    """Add −J_down·s_{r−1}·s_r − ext·s_r in place; ``energy`` is shaped (low, 2, high)."""
    r = step.row
    if r > 0 and step.down:
        pair = energy.reshape(1 << (r - 1), 2, 2, -1)
        pair[:, 0, 0, :] -= step.down
        pair[:, 1, 1, :] -= step.down
        pair[:, 0, 1, :] += step.down
        pair[:, 1, 0, :] += step.down
    energy[:, 0, :] -= step.ext
    energy[:, 1, :] += step.ext


def _tropical_forward(
    energy: np.ndarray, count: np.ndarray, step: _Step
) -> tuple[np.ndarray, np.ndarray]:
    r = step.row
    ve, vc = energy.reshape(1 << r, 2, -1), count.reshape(1 << r, 2, -1)
    new_e, new_c = np.empty_like(ve), np.empty_like(vc)
    j = step.left
    new_e[:, 0, :], new_c[:, 0, :] = _tropical_min(ve[:, 0, :] - j, vc[:, 0, :], ve[:, 1, :] + j, vc[:, 1, :])
    new_e[:, 1, :], new_c[:, 1, :] = _tropical_min(ve[:, 0, :] + j, vc[:, 0, :], ve[:, 1, :] - j, vc[:, 1, :])
    _add_local_energy(new_e, step)
    return new_e.reshape(-1), new_c.reshape(-1)


def _tropical_backward(
    energy: np.ndarray, count: np.ndarray, step: _Step
) -> tuple[np.ndarray, np.ndarray]:
    r = step.row
    ve = energy.reshape(1 << r, 2, -1).copy()
    vc = count.reshape(1 << r, 2, -1)
    _add_local_energy(ve, step)
    out_e, out_c = np.empty_like(ve), np.empty_like(vc)
    j = step.left
    out_e[:, 0, :], out_c[:, 0, :] = _tropical_min(ve[:, 0, :] - j, vc[:, 0, :], ve[:, 1, :] + j, vc[:, 1, :])
    out_e[:, 1, :], out_c[:, 1, :] = _tropical_min(ve[:, 0, :] + j, vc[:, 0, :], ve[:, 1, :] - j, vc[:, 1, :])
    return out_e.reshape(-1), out_c.reshape(-1)


def solve_ground_state(
    instance: IsingInstance,
    sites: Iterable[int] = (),
    width_cap: int = TRANSFER_WIDTH_CAP,
) -> tuple[float, float, dict[int, float]]:
    """Return ``(min H, number of minimisers, {site index: ⟨σ⟩ over minimisers})``.

    Energies are compared exactly, so only exact floating-point ties count as
    degenerate.
    """
    width, steps = _schedule(instance, width_cap)
    position = {step.site: t for t, step in enumerate(steps)}
    wanted = {position[i] for i in sites}
    size = 1 << width

    stored: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    if wanted:
        rest_e, rest_c = np.zeros(size), np.ones(size)
        for t in range(len(steps) - 1, min(wanted) - 1, -1):
            if t in wanted:
                stored[t] = (rest_e, rest_c)
            rest_e, rest_c = _tropical_backward(rest_e, rest_c, steps[t])

    energy = np.full(size, math.inf)
    count = np.zeros(size)
    energy[0], count[0] = 0.0, 1.0
    mags: dict[int, float] = {}
    for t, step in enumerate(steps):
        energy, count = _tropical_forward(energy, count, step)
        if t in stored:
            rest_e, rest_c = stored.pop(t)
            total = energy + rest_e
            weight = np.where(total == total.min(), count * rest_c, 0.0)
            plus, minus = _row_split(weight, step.row)
            mags[step.site] = (plus - minus) / (plus + minus)
    e_min = float(energy.min())
    return e_min, float(count[energy == e_min].sum()), mags
