"""Deterministic generators for random networks and ground-truth states.

The generator builds a random spanning tree first (connected by
construction) and then sprinkles extra edges, allowing parallel pipes up to a
fixed multiplicity cap. Ground-truth states sample heads and derive the rest
in closed form, so they satisfy the hydraulic principles to machine
precision and serve as the oracle for every round-trip test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .completion import complete_from_heads
from .errors import InfeasibleConfigError
from .hydraulics import HydraulicState
from .network import Network, PipeParams, build_network, resistance

#: Maximum number of parallel pipes between one node pair.
MAX_PARALLEL_PIPES = 2


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    n_reservoirs: int = 1
    n_consumers: int = 3
    extra_edges: int = 0
    head_range: tuple[float, float] = (50.0, 150.0)
    resistance_range: tuple[float, float] = (0.5, 5.0)


def params_for_resistance(
    target: float, diameter: float = 0.3, roughness: float = 100.0
) -> PipeParams:
    """Pipe parameters realizing a given resistance (resistance is linear in length)."""
    if not target > 0:
        raise ValueError("target resistance must be positive")
    unit = resistance(PipeParams(length=1.0, diameter=diameter, roughness=roughness))
    return PipeParams(length=target / unit, diameter=diameter, roughness=roughness)


def _validate(cfg: GeneratorConfig) -> None:
    if cfg.n_reservoirs < 1 or cfg.n_consumers < 1:
        raise InfeasibleConfigError("need at least one reservoir and one consumer")
    if cfg.extra_edges < 0:
        raise InfeasibleConfigError("extra_edges must be nonnegative")
    lo, hi = cfg.head_range
    if not lo <= hi:
        raise InfeasibleConfigError("head_range must be a nonempty interval")
    r_lo, r_hi = cfg.resistance_range
    if not (0 < r_lo <= r_hi):
        raise InfeasibleConfigError("resistance_range must be positive and nonempty")
    n = cfg.n_reservoirs + cfg.n_consumers
    capacity = MAX_PARALLEL_PIPES * (n * (n - 1) // 2) - (n - 1)
    if cfg.extra_edges > capacity:
        raise InfeasibleConfigError(
            f"extra_edges={cfg.extra_edges} exceeds the capacity {capacity} "
            f"of a {n}-node network with at most {MAX_PARALLEL_PIPES} parallel pipes per pair"
        )


def random_connected_wds(cfg: GeneratorConfig) -> Network:
    """Random connected network, deterministic in the seed.

    Exactly ``n_reservoirs + n_consumers`` nodes and
    ``(n_nodes - 1) + extra_edges`` pipes; pipe resistances land inside
    ``resistance_range``.
    """
    _validate(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_reservoirs + cfg.n_consumers
    node_ids = [f"R{i + 1}" for i in range(cfg.n_reservoirs)] + [
        f"J{i + 1}" for i in range(cfg.n_consumers)
    ]
    roles = ["reservoir"] * cfg.n_reservoirs + ["consumer"] * cfg.n_consumers

    # Random recursive tree over a node permutation, then extra edges drawn
    # from the remaining pair slots without replacement.
    order = rng.permutation(n)
    pair_count: dict[tuple[int, int], int] = {}
    edges: list[tuple[int, int]] = []
    for i in range(1, n):
        a = int(order[int(rng.integers(0, i))])
        b = int(order[i])
        tail, head = (a, b) if rng.random() < 0.5 else (b, a)
        edges.append((tail, head))
        key = (min(a, b), max(a, b))
        pair_count[key] = pair_count.get(key, 0) + 1

    slots: list[tuple[int, int]] = []
    for a in range(n):
        for b in range(a + 1, n):
            free = MAX_PARALLEL_PIPES - pair_count.get((a, b), 0)
            slots.extend([(a, b)] * free)
    if cfg.extra_edges:
        picks = rng.choice(len(slots), size=cfg.extra_edges, replace=False)
        for idx in sorted(int(i) for i in picks):
            a, b = slots[idx]
            tail, head = (a, b) if rng.random() < 0.5 else (b, a)
            edges.append((tail, head))

    r_lo, r_hi = cfg.resistance_range
    pipes = []
    for k, (tail, head) in enumerate(edges):
        target_r = float(rng.uniform(r_lo, r_hi))
        pipes.append(
            (f"P{k + 1}", node_ids[tail], node_ids[head], params_for_resistance(target_r))
        )

    return build_network(list(zip(node_ids, roles)), pipes)


def random_ground_truth_state(
    net: Network, seed: int, head_range: tuple[float, float] = (50.0, 150.0)
) -> HydraulicState:
    """Physically correct state from uniformly sampled heads (closed-form completion)."""
    rng = np.random.default_rng(seed)
    lo, hi = head_range
    heads = rng.uniform(lo, hi, net.n_nodes)
    return complete_from_heads(net, heads).state
