"""Timing harness separating field construction cost from control cost."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics
from .control import ControllerParams, safe_controls
from .field import IspField, PotentialTuple, RegionOfInterest, compose_many, make_field, write_roi


@dataclass(frozen=True)
class BenchRow:
    n_objects: int
    median_ns: int
    field_bytes: int
    compose_ns: int

    def csv(self) -> str:
        return f"{self.n_objects},{self.median_ns},{self.field_bytes}"


def random_object_fields(n, width, height, rng):
    fields = []
    for _ in range(n):
        w = int(rng.integers(1, max(2, width // 4)))
        h = int(rng.integers(1, max(2, height // 4)))
        x = int(rng.integers(0, width - w + 1))
        y = int(rng.integers(0, height - h + 1))
        value = PotentialTuple.make(rng.uniform(0.1, 10.0), rng.uniform(-1.5, 0.5))
        fields.append(write_roi(make_field(width, height),
                                RegionOfInterest(x, y, x + w - 1, y + h - 1), value))
    return fields


def run_bench(width=640, height=480, object_counts=(1, 10, 100), repetitions=200,
              seed=0, params: ControllerParams | None = None, warmup=20) -> list[BenchRow]:
    """Median ``safe_controls`` time per object count on pre-composed fields.

    Repetitions are interleaved round-robin across the counts so slow drift in
    machine load hits every count equally.
    """
    if not object_counts:
        raise ValueError("object_counts must not be empty")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rng = np.random.default_rng(seed)
    intr = CameraIntrinsics.centered(width, height, width / 2.0)
    params = params or ControllerParams(w_theta=min(9, width), w_a=min(64, width))

    composed: dict[int, IspField] = {}
    compose_ns = {}
    for n in object_counts:
        parts = random_object_fields(n, width, height, rng)
        t0 = time.perf_counter_ns()
        composed[n] = compose_many(parts, width, height)
        compose_ns[n] = time.perf_counter_ns() - t0

    for _ in range(warmup):
        for n in object_counts:
            safe_controls(composed[n], intr, params)
    samples = {n: [] for n in object_counts}
    for _ in range(repetitions):
        for n in object_counts:
            fld = composed[n]
            t0 = time.perf_counter_ns()
            safe_controls(fld, intr, params)
            samples[n].append(time.perf_counter_ns() - t0)

    return [BenchRow(n, int(statistics.median(samples[n])), composed[n].nbytes, compose_ns[n])
            for n in object_counts]
