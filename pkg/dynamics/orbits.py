"""Orbit iteration with attractor detection.

``run_orbits`` is the vectorised engine shared by the scalar entry point
``iterate_orbit`` and every renderer: it advances a batch of seeds one step
at a time and retires each seed as soon as it lands within tolerance of an
attractor.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator, model_validator

from dynamics.numerics import (
    INFINITY,
    RationalMap,
    SpherePoint,
    coefficient_array,
    rational_apply,
    rational_apply_batch,
    to_sphere,
)

MAX_TRACE_STEPS = 10 ** 6
INDETERMINATE_REACH = 10

StepFn = Callable[[np.ndarray, np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


class OrbitConfig(BaseModel):
    """Iteration budget and proximity tests; inf_threshold defaults to 1/tol."""

    model_config = ConfigDict(frozen=True)

    max_iters: PositiveInt = 50
    tol: float = 1e-2
    inf_threshold: float

    @model_validator(mode="before")
    @classmethod
    def _default_inf_threshold(cls, data):
        if isinstance(data, dict) and data.get("inf_threshold") is None:
            tol = float(data.get("tol", 1e-2))
            if tol > 0:
                data = {**data, "inf_threshold": 1 / tol}
        return data

    @field_validator("tol")
    @classmethod
    def _tol_in_unit_interval(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError(f"tol must lie in (0, 1), got {value}")
        return value

    @field_validator("inf_threshold")
    @classmethod
    def _threshold_above_one(cls, value: float) -> float:
        if not value > 1:
            raise ValueError(f"inf_threshold must exceed 1, got {value}")
        return value


class OrbitStatus(IntEnum):
    NO_CONVERGENCE = 0
    TO_ZERO = 1
    TO_INFINITY = 2
    TO_STRANGE = 3


@dataclass(frozen=True)
class OrbitOutcome:
    status: OrbitStatus
    iters: int
    final: SpherePoint
    attractor: Optional[int] = None

    def describe(self) -> str:
        if self.status is OrbitStatus.TO_STRANGE:
            return f"{self.status.name}({self.attractor}) after {self.iters} steps"
        return f"{self.status.name} after {self.iters} steps"


@dataclass
class OrbitBatch:
    """Per-seed results of ``run_orbits`` as parallel arrays."""

    status: np.ndarray
    attractor: np.ndarray
    iters: np.ndarray
    final: np.ndarray
    final_inf: np.ndarray

    def outcome(self, index: int) -> OrbitOutcome:
        status = OrbitStatus(int(self.status[index]))
        final = INFINITY if self.final_inf[index] else to_sphere(complex(self.final[index]))
        attractor = int(self.attractor[index]) if status is OrbitStatus.TO_STRANGE else None
        return OrbitOutcome(status, int(self.iters[index]), final, attractor)


def _near(z: np.ndarray, z_inf: np.ndarray, target: SpherePoint, cfg: OrbitConfig) -> np.ndarray:
    if target is INFINITY:
        return z_inf | (np.abs(z) > cfg.inf_threshold)
    return ~z_inf & (np.abs(z - complex(target)) < cfg.tol)


def _classify(z, z_inf, cfg, targets, strange):
    status = np.zeros(z.shape, dtype=np.int8)
    attractor = np.full(z.shape, -1, dtype=np.int32)
    undecided = np.ones(z.shape, dtype=bool)
    for code, target in zip((OrbitStatus.TO_ZERO, OrbitStatus.TO_INFINITY), targets):
        hit = undecided & _near(z, z_inf, target, cfg)
        status[hit] = code
        undecided &= ~hit
    for index, point in enumerate(strange):
        hit = undecided & _near(z, z_inf, point, cfg)
        status[hit] = OrbitStatus.TO_STRANGE
        attractor[hit] = index
        undecided &= ~hit
    return status, attractor


def _resolve_indeterminate(z, cfg, targets, strange):
    """Nearest finite attractor among {root a} and the strange ones within 10*tol."""
    candidates = [(OrbitStatus.TO_ZERO, -1, targets[0])]
    candidates += [(OrbitStatus.TO_STRANGE, i, p) for i, p in enumerate(strange)]
    status = np.zeros(z.shape, dtype=np.int8)
    attractor = np.full(z.shape, -1, dtype=np.int32)
    best = np.full(z.shape, INDETERMINATE_REACH * cfg.tol)
    for code, index, point in candidates:
        if point is INFINITY:
            continue
        distance = np.abs(z - complex(point))
        closer = distance < best
        status[closer] = code
        attractor[closer] = index
        best = np.where(closer, distance, best)
    return status, attractor


def run_orbits(
    step: StepFn,
    z0: np.ndarray,
    z0_inf: np.ndarray,
    cfg: OrbitConfig,
    targets: Tuple[SpherePoint, SpherePoint] = (0j, INFINITY),
    strange: Sequence[SpherePoint] = (),
) -> OrbitBatch:
    """Iterate every seed until it is classified or the budget runs out.

    ``step(z, z_inf, index)`` maps the still-active seeds (``index`` holds
    their positions in the batch) to ``(w, w_inf, indeterminate)``.
    Seeds are tested before the first step, so a seed already inside a
    tolerance disc reports ``iters = 0``.
    """
    z = np.array(z0, dtype=complex).ravel()
    z_inf = np.array(z0_inf, dtype=bool).ravel()
    status, attractor = _classify(z, z_inf, cfg, targets, strange)
    iters = np.zeros(z.shape, dtype=np.int32)

    active = np.flatnonzero(status == OrbitStatus.NO_CONVERGENCE)
    for n in range(1, cfg.max_iters + 1):
        if active.size == 0:
            break
        previous = z[active]
        w, w_inf, stuck = step(previous, z_inf[active], active)
        w = np.where(stuck, previous, w)
        z[active] = w
        z_inf[active] = w_inf
        iters[active] = n

        st, at = _classify(w, w_inf, cfg, targets, strange)
        if stuck.any():
            st_stuck, at_stuck = _resolve_indeterminate(previous[stuck], cfg, targets, strange)
            st[stuck] = st_stuck
            at[stuck] = at_stuck
        status[active] = st
        attractor[active] = at
        active = active[(st == OrbitStatus.NO_CONVERGENCE) & ~stuck]

    iters[status == OrbitStatus.NO_CONVERGENCE] = cfg.max_iters
    return OrbitBatch(status, attractor, iters, z, z_inf)


def map_step(F: RationalMap) -> StepFn:
    """A batch step function applying one fixed rational map."""
    length = F.degree + 1
    num = coefficient_array(F.num, length)
    den = coefficient_array(F.den, length)

    def step(z, z_inf, _index):
        return rational_apply_batch(num, den, z, z_inf)

    return step


def iterate_orbit(
    F: RationalMap,
    z0: SpherePoint,
    cfg: OrbitConfig,
    strange_attractors: Sequence[SpherePoint] = (),
    targets: Tuple[SpherePoint, SpherePoint] = (0j, INFINITY),
) -> OrbitOutcome:
    z0 = to_sphere(z0)
    at_infinity = z0 is INFINITY
    seed = np.array([0j if at_infinity else z0])
    batch = run_orbits(map_step(F), seed, np.array([at_infinity]), cfg, targets, strange_attractors)
    return batch.outcome(0)


def orbit_trace(F: RationalMap, z0: SpherePoint, n: int) -> List[SpherePoint]:
    """The first n+1 orbit points, z0 included, without convergence tests."""
    if not 0 <= n <= MAX_TRACE_STEPS:
        raise ValueError(f"trace length must lie in [0, {MAX_TRACE_STEPS}], got {n}")
    points = [to_sphere(z0)]
    for _ in range(n):
        points.append(rational_apply(F, points[-1]))
    return points
