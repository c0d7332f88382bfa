"""Batch studies: N-k contingency runs and initial-condition sweeps.

Both are embarrassingly parallel over independent solves on the shared
immutable network; results are gathered in input order so repeated runs are
deterministic.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .network import Network, validate
from .indexing import IndexMap, StateVector
from .solver import (
    CONVERGED,
    DIVERGED,
    INFEASIBLE,
    InitSpec,
    SolverOptions,
    solve,
    transfer_state,
    validate_solution,
)

__all__ = [
    "Outage",
    "ContingencySet",
    "ContingencyResult",
    "SweepSpec",
    "SweepResult",
    "apply_outage",
    "sample_contingencies",
    "run_contingencies",
    "run_sweep",
]


@dataclass(frozen=True)
class Outage:
    label: str
    gen_ids: tuple = ()
    branch_ids: tuple = ()
    transformer_ids: tuple = ()


@dataclass
class ContingencySet:
    outages: list[Outage] = field(default_factory=list)


@dataclass
class ContingencyResult:
    label: str
    status: str
    reason: str = ""
    inner_iterations: int = 0
    homotopy_steps: int = 0
    max_mismatch: float = float("nan")

    def csv_row(self) -> str:
        return (
            f"{self.label},{self.status},{self.inner_iterations},"
            f"{self.homotopy_steps},{self.max_mismatch!r}"
        )


@dataclass
class SweepSpec:
    samples: int = 15
    vmag_range: tuple = (0.9, 1.1)
    vang_range_deg: tuple = (-40.0, 40.0)
    seed: int | None = None


@dataclass
class SweepResult:
    samples: list  # (vmag0, vang0_deg)
    statuses: list
    iterations: list
    max_pairwise_dv: float
    n_converged: int

    def csv(self) -> str:
        lines = ["sample,vmag0,vang0,status,iters"]
        for k, ((vm, va), st, it) in enumerate(
            zip(self.samples, self.statuses, self.iterations)
        ):
            lines.append(f"{k},{vm!r},{va!r},{st},{it}")
        return "\n".join(lines) + "\n"


def apply_outage(network: Network, outage: Outage) -> Network:
    """New network with the outaged devices removed."""
    missing = []
    gens = tuple(g for g in network.generators if g.id not in outage.gen_ids)
    if len(gens) != len(network.generators) - len(outage.gen_ids):
        missing.append(f"gens {outage.gen_ids}")
    branches = tuple(b for b in network.branches if b.id not in outage.branch_ids)
    if len(branches) != len(network.branches) - len(outage.branch_ids):
        missing.append(f"branches {outage.branch_ids}")
    xfmrs = tuple(t for t in network.transformers if t.id not in outage.transformer_ids)
    if len(xfmrs) != len(network.transformers) - len(outage.transformer_ids):
        missing.append(f"transformers {outage.transformer_ids}")
    if missing:
        raise ValueError(f"outage {outage.label}: unknown devices: {', '.join(missing)}")
    return network.with_devices(generators=gens, branches=branches, transformers=xfmrs)


def sample_contingencies(
    network: Network, base_state: StateVector, top_fraction: float = 0.1
) -> ContingencySet:
    """The usual screening set: the largest online generators and the most
    heavily loaded series elements, dropped one at a time."""
    outages: list[Outage] = []
    gens = sorted(network.generators, key=lambda g: -float(np.sum(np.abs(g.p))))
    n_gen = max(1, int(round(top_fraction * len(gens)))) if gens else 0
    for g in gens[:n_gen]:
        outages.append(Outage(label=f"LG_gen{g.id}", gen_ids=(g.id,)))

    v = base_state.v_complex()

    def flow(dev) -> float:
        i = network.bus_index[dev.from_bus]
        l = network.bus_index[dev.to_bus]
        total = 0.0
        for pr in range(network.nphase):
            cur = 0.0
            for pc in range(network.nphase):
                cur += dev.y_series[pr, pc] * (v[pc, i] - v[pc, l])
            total += abs(v[pr, i] * np.conj(cur))
        return total

    series = [("branch", b) for b in network.branches] + [
        ("xfmr", t) for t in network.transformers
    ]
    series.sort(key=lambda kv: -flow(kv[1]))
    n_ser = max(1, int(round(top_fraction * len(series)))) if series else 0
    for kind, dev in series[:n_ser]:
        if kind == "branch":
            outages.append(Outage(label=f"LB_branch{dev.id}", branch_ids=(dev.id,)))
        else:
            outages.append(Outage(label=f"LB_xfmr{dev.id}", transformer_ids=(dev.id,)))
    return ContingencySet(outages)


def _run_one_contingency(
    network: Network,
    base_state: StateVector,
    outage: Outage,
    options: SolverOptions,
    mismatch_tol: float,
) -> ContingencyResult:
    try:
        post = apply_outage(network, outage)
    except ValueError as exc:
        return ContingencyResult(outage.label, INFEASIBLE, reason=str(exc))
    issues = validate(post)
    if any(i.code in ("missing_slack",) for i in issues):
        return ContingencyResult(outage.label, INFEASIBLE, reason="islanding without slack")
    if issues:
        return ContingencyResult(
            outage.label, INFEASIBLE, reason="; ".join(str(i) for i in issues)
        )
    index = IndexMap(post)
    warm = transfer_state(base_state, post, index)
    opts = replace(options, init=InitSpec(kind="warm", state=warm))
    try:
        report, state = solve(post, opts)
    except ValueError as exc:
        return ContingencyResult(outage.label, INFEASIBLE, reason=str(exc))
    result = ContingencyResult(
        outage.label,
        report.status,
        inner_iterations=report.inner_iterations,
        homotopy_steps=report.homotopy_steps,
    )
    if report.status == CONVERGED:
        mis = validate_solution(post, state)
        result.max_mismatch = mis.max
        if mis.max > mismatch_tol:
            result.status = DIVERGED
            result.reason = "solution failed independent mismatch check"
    return result


def run_contingencies(
    network: Network,
    base_state: StateVector,
    cset: ContingencySet,
    options: SolverOptions | None = None,
    workers: int | None = None,
) -> list[ContingencyResult]:
    """Solve each outage warm-started from the base operating point.

    A converged status is only reported when the solution also passes the
    independent mismatch check at 10x the Newton tolerance.
    """
    if options is None:
        options = SolverOptions()
    mismatch_tol = 10.0 * options.nr.tol
    if not cset.outages:
        return []
    if workers is None or workers <= 1:
        return [
            _run_one_contingency(network, base_state, o, options, mismatch_tol)
            for o in cset.outages
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [
            pool.submit(_run_one_contingency, network, base_state, o, options, mismatch_tol)
            for o in cset.outages
        ]
        return [f.result() for f in futs]


def tally(results: list[ContingencyResult]) -> dict:
    out = {CONVERGED: 0, DIVERGED: 0, INFEASIBLE: 0}
    for r in results:
        out[r.status] += 1
    return out


def run_sweep(
    network: Network,
    spec: SweepSpec,
    options: SolverOptions | None = None,
    workers: int | None = None,
) -> SweepResult:
    """Solve from ``spec.samples`` uniformly sampled initial conditions.

    Every bus of one sample shares the same sampled magnitude and angle. The
    pairwise voltage spread over the converged samples measures whether they
    all landed on the same solution.
    """
    if options is None:
        options = SolverOptions()
    rng = np.random.default_rng(spec.seed)
    samples = [
        (
            float(rng.uniform(*spec.vmag_range)),
            float(rng.uniform(*spec.vang_range_deg)),
        )
        for _ in range(spec.samples)
    ]

    def run_one(sample):
        vm, va = sample
        opts = replace(options, init=InitSpec(kind="uniform", vmag=vm, vang_deg=va))
        report, state = solve(network, opts)
        return report, state

    if workers is None or workers <= 1:
        outcomes = [run_one(s) for s in samples]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_one, samples))

    statuses = [rep.status for rep, _ in outcomes]
    iters = [rep.inner_iterations for rep, _ in outcomes]
    solved = [st.v_complex() for rep, st in outcomes if rep.status == CONVERGED]
    spread = 0.0
    for a in range(len(solved)):
        for b in range(a + 1, len(solved)):
            spread = max(spread, float(np.max(np.abs(solved[a] - solved[b]))))
    return SweepResult(
        samples=samples,
        statuses=statuses,
        iterations=iters,
        max_pairwise_dv=spread,
        n_converged=sum(1 for s in statuses if s == CONVERGED),
    )
