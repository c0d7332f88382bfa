"""End-to-end solve: inner Newton loop (optionally under continuation) plus
the outer device-limit loop adjusting generator Q limits, switched shunts and
controlled transformer taps until nothing moves.

The outer loop runs the inner solve, then enforces device limits one pass at
a time. Generators whose free reactive power leaves its band are pinned at
the violated limit (their bus drops to PQ); pinned machines are released when
the regulated voltage crosses the set-point in the relieving direction.
A device that reverses itself is frozen for the remaining passes so the loop
cannot oscillate forever; running out of passes reports Infeasible.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .homotopy import HomotopySchedule, run_homotopy
from .indexing import IndexMap, StateVector, flat_state
from .linsys import SingularityError, SparseSystem
from .network import Connection, Network, PHASE_OFFSETS, PhaseDomain, validate
from .nr import NrOptions, check_convergence, run_newton
from .reference import build_ybus
from .stamps import GEN_PINNED, GEN_VC, GenModes, effective_params

__all__ = [
    "CONVERGED",
    "DIVERGED",
    "INFEASIBLE",
    "InitSpec",
    "SolverOptions",
    "SolveReport",
    "MismatchReport",
    "initialize_state",
    "uniform_state",
    "solve",
    "validate_solution",
]

CONVERGED = "converged"
DIVERGED = "diverged"
INFEASIBLE = "infeasible"

EXIT_CODES = {CONVERGED: 0, DIVERGED: 1, INFEASIBLE: 2}


@dataclass
class InitSpec:
    """Where the initial state comes from.

    kinds: ``flat`` (1 pu at reference angles), ``random`` (per-bus uniform
    magnitude/angle samples), ``uniform`` (one sampled magnitude/angle pair
    applied to every bus), ``warm`` (copy a prior state), ``file`` (JSON
    solution document).
    """

    kind: str = "flat"
    vmag_range: tuple = (0.9, 1.1)
    vang_range_deg: tuple = (-40.0, 40.0)
    seed: int | None = None
    vmag: float = 1.0
    vang_deg: float = 0.0
    state: StateVector | None = None
    path: str | None = None


@dataclass
class SolverOptions:
    nr: NrOptions = field(default_factory=NrOptions)
    homotopy: str = "none"  # none | tx | power
    schedule: HomotopySchedule = field(default_factory=HomotopySchedule)
    init: InitSpec = field(default_factory=InitSpec)
    outer_max_passes: int = 10
    enforce_q_limits: bool = True
    adjust_shunts: bool = False
    adjust_taps: bool = False
    tap_deadband: float = 0.01

    def __post_init__(self):
        if self.outer_max_passes < 1:
            raise ValueError("outer_max_passes must be >= 1")
        if self.homotopy not in ("none", "tx", "power"):
            raise ValueError(f"unknown homotopy method {self.homotopy!r}")


@dataclass
class SolveReport:
    status: str
    inner_iterations: int = 0
    homotopy_steps: int = 0
    outer_passes: int = 0
    switch_events: list = field(default_factory=list)
    max_kcl_residual: float = math.nan
    max_constraint_residual: float = math.nan
    wall_time_s: float = 0.0
    vmag: np.ndarray | None = None
    vang_deg: np.ndarray | None = None
    last_lambda: float | None = None
    lambda_trace: list = field(default_factory=list)
    nr_trace: list = field(default_factory=list)
    final_taps: dict = field(default_factory=dict)
    final_shunt_blocks: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_dict(self) -> dict:
        """JSON-friendly form; volatile timing lives under ``meta``."""
        return {
            "status": self.status,
            "inner_iterations": self.inner_iterations,
            "homotopy_steps": self.homotopy_steps,
            "outer_passes": self.outer_passes,
            "switch_events": self.switch_events,
            "max_kcl_residual": self.max_kcl_residual,
            "max_constraint_residual": self.max_constraint_residual,
            "last_lambda": self.last_lambda,
            "vmag": None if self.vmag is None else self.vmag.tolist(),
            "vang_deg": None if self.vang_deg is None else self.vang_deg.tolist(),
            "final_taps": {str(k): np.asarray(v).tolist() for k, v in self.final_taps.items()},
            "final_shunt_blocks": {str(k): v for k, v in self.final_shunt_blocks.items()},
            "meta": {"wall_time_s": self.wall_time_s},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


# ---------------------------------------------------------------------------
# Initial conditions


def uniform_state(network: Network, index: IndexMap, vmag: float, vang_deg: float) -> StateVector:
    """Every bus at the same magnitude/angle (plus balanced phase offsets)."""
    state = flat_state(index)
    offsets = PHASE_OFFSETS[network.domain]
    ang = math.radians(vang_deg)
    for ph in range(index.nphase):
        v = vmag * np.exp(1j * (ang + offsets[ph]))
        for k in range(index.nbus):
            state.x[index.vr(k, ph)] = v.real
            state.x[index.vi(k, ph)] = v.imag
    return state


def initialize_state(network: Network, spec: InitSpec, index: IndexMap | None = None) -> StateVector:
    """Build the starting state; Q slots and source currents start at zero."""
    if index is None:
        index = IndexMap(network)
    if spec.kind == "flat":
        return flat_state(index)
    if spec.kind == "uniform":
        return uniform_state(network, index, spec.vmag, spec.vang_deg)
    if spec.kind == "random":
        rng = np.random.default_rng(spec.seed)
        state = flat_state(index)
        offsets = PHASE_OFFSETS[network.domain]
        mags = rng.uniform(spec.vmag_range[0], spec.vmag_range[1], size=index.nbus)
        angs = np.radians(
            rng.uniform(spec.vang_range_deg[0], spec.vang_range_deg[1], size=index.nbus)
        )
        for k in range(index.nbus):
            for ph in range(index.nphase):
                v = mags[k] * np.exp(1j * (angs[k] + offsets[ph]))
                state.x[index.vr(k, ph)] = v.real
                state.x[index.vi(k, ph)] = v.imag
        return state
    if spec.kind == "warm":
        if spec.state is None:
            raise ValueError("warm start needs a state")
        if spec.state.x.shape[0] != index.dim:
            raise ValueError("warm-start state dimension mismatch")
        return StateVector(spec.state.x.copy(), index)
    if spec.kind == "file":
        from .caseio import read_solution_json

        with open(spec.path, "r", encoding="utf-8") as fh:
            doc = read_solution_json(fh.read())
        state = flat_state(index)
        phase_pos = {name: ph for ph, name in enumerate(network.domain.phases)}
        for rec in doc["buses"]:
            pos = network.bus_index[int(rec["bus"])]
            ph = phase_pos[rec["phase"]]
            state.x[index.vr(pos, ph)] = float(rec["vr_pu"])
            state.x[index.vi(pos, ph)] = float(rec["vi_pu"])
        return state
    raise ValueError(f"unknown init kind {spec.kind!r}")


def transfer_state(
    old: StateVector, new_network: Network, new_index: IndexMap
) -> StateVector:
    """Map a state onto another network by bus/generator identity (warm starts
    across contingencies, where devices may have disappeared)."""
    old_index = old.index
    old_net = old_index.network
    state = flat_state(new_index)
    for bus_id, new_pos in new_network.bus_index.items():
        if bus_id not in old_net.bus_index:
            continue
        old_pos = old_net.bus_index[bus_id]
        for ph in range(new_index.nphase):
            state.x[new_index.vr(new_pos, ph)] = old.x[old_index.vr(old_pos, ph)]
            state.x[new_index.vi(new_pos, ph)] = old.x[old_index.vi(old_pos, ph)]
    old_gen_pos = {g.id: k for k, g in enumerate(old_net.generators)}
    for k, g in enumerate(new_network.generators):
        if not new_index.has_q_slot(k):
            continue
        ko = old_gen_pos.get(g.id)
        if ko is None or not old_index.has_q_slot(ko):
            continue
        for ph in range(new_index.nphase):
            state.x[new_index.q_gen(k, ph)] = old.x[old_index.q_gen(ko, ph)]
    return state


# ---------------------------------------------------------------------------
# Outer-loop device enforcement


def _target_vmag(network: Network, state: StateVector, bus_id: int) -> float:
    pos = network.bus_index[bus_id]
    v = state.v_complex()[:, pos]
    return float(np.mean(np.abs(v)))


def _enforce_q_limits(network, index, state, modes, frozen, events, pass_no, tol):
    changed = False
    for gen_pos in index.vc_gen_positions:
        gen = network.generators[gen_pos]
        vset = network.bus(gen.target_bus()).v_set
        for ph in range(index.nphase):
            key = ("qlim", gen.id, ph)
            if key in frozen:
                continue
            mode = modes.mode[gen_pos, ph]
            if mode == GEN_VC:
                q = state.q_gen(gen_pos, ph)
                if q > gen.qmax + tol:
                    modes.mode[gen_pos, ph] = GEN_PINNED
                    modes.q_pin[gen_pos, ph] = gen.qmax
                    state.x[index.q_gen(gen_pos, ph)] = gen.qmax
                    events.append(
                        {"pass": pass_no, "device": f"gen {gen.id}", "phase": ph,
                         "action": "pin_qmax", "value": gen.qmax}
                    )
                    changed = True
                elif q < gen.qmin - tol:
                    modes.mode[gen_pos, ph] = GEN_PINNED
                    modes.q_pin[gen_pos, ph] = gen.qmin
                    state.x[index.q_gen(gen_pos, ph)] = gen.qmin
                    events.append(
                        {"pass": pass_no, "device": f"gen {gen.id}", "phase": ph,
                         "action": "pin_qmin", "value": gen.qmin}
                    )
                    changed = True
            else:
                pin = modes.q_pin[gen_pos, ph]
                vmag = _target_vmag(network, state, gen.target_bus())
                release = (
                    (pin == gen.qmax and vmag > vset + tol)
                    or (pin == gen.qmin and vmag < vset - tol)
                )
                if release:
                    modes.mode[gen_pos, ph] = GEN_VC
                    events.append(
                        {"pass": pass_no, "device": f"gen {gen.id}", "phase": ph,
                         "action": "release", "value": pin}
                    )
                    changed = True
            # opposite-direction flip-flop: freeze at the current mode
            acts = [e["action"] for e in events
                    if e["device"] == f"gen {gen.id}" and e["phase"] == ph]
            if len(acts) >= 2 and acts[-1] != acts[-2]:
                frozen.add(key)
    return changed


def _adjust_shunts(network, state, shunt_blocks, frozen, events, pass_no):
    changed = False
    for sh in network.shunts:
        if not sh.switchable or sh.block_b is None:
            continue
        key = ("shunt", sh.id)
        if key in frozen:
            continue
        vmag = _target_vmag(network, state, sh.bus)
        blocks = shunt_blocks[sh.id]
        direction = 0
        capacitive = float(sh.block_b[0]) > 0
        if vmag < sh.v_lo:
            direction = 1 if capacitive else -1
        elif vmag > sh.v_hi:
            direction = -1 if capacitive else 1
        new_blocks = min(max(blocks + direction, 0), sh.max_blocks)
        if new_blocks != blocks:
            shunt_blocks[sh.id] = new_blocks
            events.append(
                {"pass": pass_no, "device": f"shunt {sh.id}", "action": "blocks",
                 "value": new_blocks}
            )
            changed = True
            dirs = [e["value"] for e in events if e["device"] == f"shunt {sh.id}"]
            if len(dirs) >= 3 and (dirs[-1] - dirs[-2]) * (dirs[-2] - dirs[-3]) < 0:
                frozen.add(key)
    return changed


def _adjust_taps(network, state, taps, frozen, events, pass_no, deadband):
    changed = False
    for tx in network.transformers:
        if tx.controlled_bus is None:
            continue
        key = ("tap", tx.id)
        if key in frozen:
            continue
        target = tx.v_target
        if target is None:
            target = network.bus(tx.controlled_bus).v_set
        if target is None:
            continue
        vmag = _target_vmag(network, state, tx.controlled_bus)
        tap = taps[tx.id]
        direction = 0.0
        if vmag < target - deadband:
            direction = -tx.tap_step  # lower tap raises the regulated side
        elif vmag > target + deadband:
            direction = tx.tap_step
        if direction == 0.0:
            continue
        new_tap = np.clip(tap + direction, tx.tap_min, tx.tap_max)
        if not np.array_equal(new_tap, tap):
            taps[tx.id] = new_tap
            events.append(
                {"pass": pass_no, "device": f"xfmr {tx.id}", "action": "tap",
                 "value": float(new_tap[0])}
            )
            changed = True
            vals = [e["value"] for e in events if e["device"] == f"xfmr {tx.id}"]
            if len(vals) >= 3 and (vals[-1] - vals[-2]) * (vals[-2] - vals[-3]) < 0:
                frozen.add(key)
    return changed


# ---------------------------------------------------------------------------
# The driver


def solve(network: Network, options: SolverOptions | None = None):
    """Run the full pipeline; returns ``(SolveReport, StateVector)``."""
    if options is None:
        options = SolverOptions()
    issues = validate(network)
    if issues:
        raise ValueError("invalid network: " + "; ".join(str(i) for i in issues))

    t0 = time.perf_counter()
    index = IndexMap(network)
    modes = GenModes.initial(network)
    shunt_blocks = {sh.id: sh.blocks_on for sh in network.shunts}
    taps = {tx.id: np.array(tx.tap) for tx in network.transformers}
    system = SparseSystem(index.dim)

    state = initialize_state(network, options.init, index)
    report = SolveReport(status=DIVERGED)
    frozen: set = set()
    events: list = []
    total_inner = 0
    homotopy_steps = 0
    lam_trace: list = []
    nr_trace: list = []
    status = DIVERGED
    pass_no = 0

    for pass_no in range(1, options.outer_max_passes + 1):
        params = effective_params(network, shunt_blocks, taps)
        ok = False
        if options.homotopy != "none" and pass_no == 1:
            hres = run_homotopy(
                network, options.homotopy, options.nr, options.schedule,
                index=index, modes=modes, base=params, system=system, nr_trace=nr_trace,
            )
            total_inner += hres.inner_iterations
            homotopy_steps += hres.steps
            lam_trace = hres.accepted
            ok = hres.converged
            if ok:
                state = hres.state
            else:
                report.last_lambda = hres.last_good_lambda
        else:
            try:
                state_new, ok, iters = run_newton(
                    network, params, index, state, options.nr, modes, system, nr_trace
                )
                total_inner += iters
            except SingularityError:
                ok = False
            if ok:
                state = state_new
            elif options.homotopy != "none":
                # devices moved and plain re-solve stalled: continue again
                hres = run_homotopy(
                    network, options.homotopy, options.nr, options.schedule,
                    index=index, modes=modes, base=params, system=system, nr_trace=nr_trace,
                )
                total_inner += hres.inner_iterations
                homotopy_steps += hres.steps
                lam_trace = hres.accepted
                ok = hres.converged
                if ok:
                    state = hres.state
                else:
                    report.last_lambda = hres.last_good_lambda
        if not ok:
            status = DIVERGED
            break

        changed = False
        if options.enforce_q_limits:
            changed |= _enforce_q_limits(
                network, index, state, modes, frozen, events, pass_no, 10 * options.nr.tol
            )
        if options.adjust_shunts:
            changed |= _adjust_shunts(network, state, shunt_blocks, frozen, events, pass_no)
        if options.adjust_taps:
            changed |= _adjust_taps(
                network, state, taps, frozen, events, pass_no, options.tap_deadband
            )
        if not changed:
            status = CONVERGED
            break
    else:
        status = INFEASIBLE

    report.status = status
    report.inner_iterations = total_inner
    report.homotopy_steps = homotopy_steps
    report.outer_passes = pass_no
    report.switch_events = events
    report.lambda_trace = lam_trace
    report.nr_trace = nr_trace
    report.final_taps = taps
    report.final_shunt_blocks = shunt_blocks
    report.wall_time_s = time.perf_counter() - t0

    if status == CONVERGED:
        params = effective_params(network, shunt_blocks, taps)
        res = check_convergence(network, state, options.nr.tol, modes, params)
        report.max_kcl_residual = res.max_kcl
        report.max_constraint_residual = res.max_constraint
        if not res.converged:
            report.status = DIVERGED
    v = state.v_complex()
    report.vmag = np.abs(v)
    report.vang_deg = np.degrees(np.angle(v))
    return report, state


# ---------------------------------------------------------------------------
# Independent solution validation (admittance-matrix mismatch equations)


@dataclass
class MismatchReport:
    domain: PhaseDomain
    max_p: float = 0.0
    max_q: float = 0.0
    max_i: float = 0.0
    per_bus: np.ndarray | None = None  # max mismatch magnitude per bus

    @property
    def max(self) -> float:
        return max(self.max_p, self.max_q, self.max_i)


def _ybus_threephase(network: Network) -> np.ndarray:
    """Dense complex admittance over (bus, phase) nodes, phase-major blocks."""
    n = network.nbus
    nph = network.nphase
    dim = n * nph
    y = np.zeros((dim, dim), dtype=complex)

    def node(pos, ph):
        return ph * n + pos

    for br in network.branches:
        i = network.bus_index[br.from_bus]
        l = network.bus_index[br.to_bus]
        for pr in range(nph):
            for pc in range(nph):
                ys = complex(br.y_series[pr, pc])
                y[node(i, pr), node(i, pc)] += ys
                y[node(i, pr), node(l, pc)] -= ys
                y[node(l, pr), node(l, pc)] += ys
                y[node(l, pr), node(i, pc)] -= ys
            y[node(i, pr), node(i, pr)] += 1j * float(br.b_from[pr])
            y[node(l, pr), node(l, pr)] += 1j * float(br.b_to[pr])
    for tx in network.transformers:
        i = network.bus_index[tx.from_bus]
        l = network.bus_index[tx.to_bus]
        nr = np.asarray(tx.tap) * np.exp(1j * np.asarray(tx.shift))
        for pr in range(nph):
            for pc in range(nph):
                ys = complex(tx.y_series[pr, pc])
                y[node(i, pr), node(i, pc)] += ys / (np.conj(nr[pr]) * nr[pc])
                y[node(i, pr), node(l, pc)] -= ys / np.conj(nr[pr])
                y[node(l, pr), node(i, pc)] -= ys / nr[pc]
                y[node(l, pr), node(l, pc)] += ys
    for sh in network.shunts:
        k = network.bus_index[sh.bus]
        b = np.asarray(sh.b, dtype=float)
        if sh.switchable and sh.block_b is not None:
            b = b + sh.blocks_on * np.asarray(sh.block_b, dtype=float)
        for ph in range(nph):
            y[node(k, ph), node(k, ph)] += complex(float(sh.g[ph]), b[ph])
    return y


def _device_injections(network: Network, state: StateVector) -> np.ndarray:
    """Net complex current injected by sources minus loads, per (phase, bus)."""
    n = network.nbus
    nph = network.nphase
    v = state.v_complex()  # (nph, n)
    inj = np.zeros((nph, n), dtype=complex)
    for gpos, gen in enumerate(network.generators):
        k = network.bus_index[gen.bus]
        q = state.gen_q_per_phase(gpos)
        for ph in range(nph):
            s = complex(float(gen.p[ph]), float(q[ph]))
            inj[ph, k] += np.conj(s / v[ph, k])
    for ld in network.zip_loads:
        k = network.bus_index[ld.bus]
        if ld.connection == Connection.WYE:
            for ph in range(nph):
                u = v[ph, k]
                inj[ph, k] -= _zip_complex_current(ld.y[ph], ld.i[ph], ld.s[ph], u)
        else:
            for d, (a, b) in enumerate(((0, 1), (1, 2), (2, 0))):
                u = v[a, k] - v[b, k]
                i_d = _zip_complex_current(ld.y[d], ld.i[d], ld.s[d], u)
                inj[a, k] -= i_d
                inj[b, k] += i_d
    for ld in network.big_loads:
        k = network.bus_index[ld.bus]
        for ph in range(nph):
            inj[ph, k] -= complex(ld.alpha[ph]) + complex(ld.y[ph]) * v[ph, k]
    return inj


def _zip_complex_current(y, ic, s, u: complex) -> complex:
    y = complex(y)
    ic = complex(ic)
    s = complex(s)
    i = y * u
    if s != 0:
        i += np.conj(s) * u / (abs(u) ** 2)
    if ic != 0:
        i += np.conj(ic) * u / abs(u)
    return i


def validate_solution(network: Network, state: StateVector) -> MismatchReport:
    """Mismatch of the candidate solution against the admittance-matrix
    network equations, coded independently of the stamping path.

    Positive sequence reports power mismatches, three phase current
    mismatches; slack buses are excluded (their injection is free).
    """
    n = network.nbus
    nph = network.nphase
    v = state.v_complex()
    slack_pos = {network.bus_index[b.id] for b in network.slack_buses()}

    if network.domain == PhaseDomain.POSITIVE_SEQUENCE:
        ybus = build_ybus(network)
        s_calc = v[0] * np.conj(ybus @ v[0])
        s_dev = v[0] * np.conj(_device_injections(network, state)[0])
        ds = s_dev - s_calc
        per_bus = np.abs(ds)
        keep = np.array([k not in slack_pos for k in range(n)])
        max_p = float(np.max(np.abs(ds.real[keep]))) if keep.any() else 0.0
        max_q = float(np.max(np.abs(ds.imag[keep]))) if keep.any() else 0.0
        return MismatchReport(network.domain, max_p=max_p, max_q=max_q, per_bus=per_bus)

    ybus = _ybus_threephase(network)
    vflat = v.reshape(-1)  # phase-major
    i_net = (ybus @ vflat).reshape(nph, n)
    di = _device_injections(network, state) - i_net
    per_bus = np.max(np.abs(di), axis=0)
    keep = np.array([k not in slack_pos for k in range(n)])
    max_i = float(np.max(per_bus[keep])) if keep.any() else 0.0
    return MismatchReport(network.domain, max_i=max_i, per_bus=per_bus)
