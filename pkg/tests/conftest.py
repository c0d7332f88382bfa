import math
import os

import numpy as np
import pytest

from steadygrid.network import (
    BigLoad,
    Branch,
    Bus,
    BusKind,
    Connection,
    Generator,
    Network,
    PhaseDomain,
    Shunt,
    Transformer,
    ZipLoad,
    coupled_line_y,
    phase_array,
    phase_carray,
    series_y,
)

CASE_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "cases")

# Oracle corpus: positive-sequence cases the dense reference can also solve.
ORACLE_CASES = [
    "case2.net",
    "case2_twosol.net",
    "case3_ring.net",
    "case4_pv.net",
    "case5_mesh.net",
    "case9.net",
    "case14.net",
    "case12_radial.net",
    "case20_radial.net",
    "case30_mesh.net",
    "case56_mesh.net",
    "case196_mesh.net",
    "case_qlim.net",
]

ALL_NET_CASES = ORACLE_CASES + ["case6_remote.net", "hard_corridor.net"]


def case_path(name: str) -> str:
    return os.path.join(CASE_DIR, name)


@pytest.fixture(scope="session")
def cases_dir() -> str:
    return CASE_DIR


def make_branch(idx, f, t, r, x, b=0.0, nphase=1):
    return Branch(
        idx, f, t,
        y_series=series_y(r, x, nphase),
        b_from=phase_array(b / 2.0, nphase),
        b_to=phase_array(b / 2.0, nphase),
    )


def make_zip(idx, bus, nphase=1, connection=Connection.WYE, y=0.0, i=0.0, s=0.0):
    return ZipLoad(
        idx, bus, connection,
        y=phase_carray(y, nphase), i=phase_carray(i, nphase), s=phase_carray(s, nphase),
    )


def net_2bus(p=0.5, q=0.2, r=0.01, x=0.1, vset=1.0):
    buses = (Bus(1, BusKind.SLACK, 138.0, vset, 0.0), Bus(2, BusKind.PQ, 138.0))
    return Network(
        PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
        zip_loads=(make_zip(1, 2, s=complex(p, q)),),
        branches=(make_branch(1, 1, 2, r, x),),
    )


def net_linear():
    """slack + branch + BIG load: every device linear."""
    buses = (Bus(1, BusKind.SLACK, 138.0, 1.0, 0.0), Bus(2, BusKind.PQ, 138.0))
    big = BigLoad(1, 2, alpha=phase_carray(0.3 + 0.1j, 1), y=phase_carray(0.05 - 0.02j, 1))
    return Network(
        PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
        big_loads=(big,),
        branches=(make_branch(1, 1, 2, 0.01, 0.1),),
    )


def net_3bus():
    buses = (
        Bus(1, BusKind.SLACK, 138.0, 1.02, 0.0),
        Bus(2, BusKind.PQ, 138.0),
        Bus(3, BusKind.PQ, 138.0, v_set=1.01),
    )
    gen = Generator(1, 3, p=phase_array(0.4, 1), q=None, qmin=-1.0, qmax=1.0)
    return Network(
        PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
        generators=(gen,),
        zip_loads=(make_zip(1, 2, s=0.6 + 0.2j, i=0.05 + 0.01j, y=0.02 - 0.01j),),
        branches=(make_branch(1, 1, 2, 0.02, 0.1, 0.02), make_branch(2, 2, 3, 0.02, 0.09)),
    )


def net_allparts():
    """Positive-sequence network touching every device type."""
    buses = (
        Bus(1, BusKind.SLACK, 138.0, 1.03, 0.0),
        Bus(2, BusKind.PQ, 138.0),
        Bus(3, BusKind.PQ, 138.0, v_set=1.0),
        Bus(4, BusKind.PQ, 138.0),
    )
    gen = Generator(1, 3, p=phase_array(0.5, 1), q=None, qmin=-2.0, qmax=2.0)
    genf = Generator(2, 4, p=phase_array(0.1, 1), q=phase_array(0.05, 1))
    tx = Transformer(
        1, 3, 4, y_series=series_y(0.005, 0.08), tap=phase_array(0.97, 1),
        shift=phase_array(math.radians(2.0), 1),
    )
    sh = Shunt(1, 2, g=phase_array(0.01, 1), b=phase_array(0.15, 1))
    big = BigLoad(1, 4, alpha=phase_carray(0.08 + 0.02j, 1), y=phase_carray(-0.02 + 0.01j, 1))
    return Network(
        PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
        generators=(gen, genf),
        zip_loads=(
            make_zip(1, 2, y=0.03 - 0.012j, i=0.06 + 0.02j, s=0.45 + 0.18j),
            make_zip(2, 4, s=0.3 + 0.1j),
        ),
        big_loads=(big,),
        branches=(make_branch(1, 1, 2, 0.02, 0.1, 0.04), make_branch(2, 2, 3, 0.018, 0.09)),
        transformers=(tx,),
        shunts=(sh,),
    )


def net_3phase():
    """Small unbalanced three-phase network with every load style."""
    buses = (
        Bus(1, BusKind.SLACK, 12.47, 1.0, 0.0),
        Bus(2, BusKind.PQ, 12.47),
        Bus(3, BusKind.PQ, 12.47),
    )
    br = Branch(
        1, 1, 2,
        y_series=coupled_line_y(0.01, 0.04, 0.002, 0.012),
        b_from=phase_array(0.0, 3), b_to=phase_array(0.0, 3),
    )
    tx = Transformer(
        1, 2, 3, y_series=series_y(0.005, 0.05, 3),
        tap=phase_array(1.0, 3), shift=phase_array(0.0, 3),
    )
    wye = ZipLoad(
        1, 2, Connection.WYE,
        y=phase_carray([0.02 - 0.005j, 0.01 - 0.002j, 0.015 - 0.004j], 3),
        i=phase_carray([0.05 + 0.01j, 0.02 + 0.005j, 0.0], 3),
        s=phase_carray([0.15 + 0.05j, 0.25 + 0.08j, 0.1 + 0.02j], 3),
    )
    delta = ZipLoad(
        2, 3, Connection.DELTA,
        y=phase_carray([0.01 - 0.004j, 0.0, 0.0], 3),
        i=phase_carray([0.02 + 0.008j, 0.0, 0.01 + 0.002j], 3),
        s=phase_carray([0.1 + 0.03j, 0.05 + 0.01j, 0.12 + 0.04j], 3),
    )
    big = BigLoad(
        1, 3,
        alpha=phase_carray([0.03 + 0.01j, 0.02 + 0.005j, 0.04 + 0.012j], 3),
        y=phase_carray([-0.005 + 0.002j, -0.004 + 0.0015j, -0.006 + 0.0025j], 3),
    )
    return Network(
        PhaseDomain.THREE_PHASE, 10.0, buses,
        zip_loads=(wye, delta), big_loads=(big,),
        branches=(br,), transformers=(tx,),
    )


def random_network(seed: int, domain=PhaseDomain.POSITIVE_SEQUENCE) -> Network:
    """Structurally valid random network for round-trip properties."""
    rng = np.random.default_rng(seed)
    nph = domain.nphase
    n = int(rng.integers(3, 9))
    buses = [Bus(1, BusKind.SLACK, 138.0, float(rng.uniform(0.98, 1.05)), 0.0)]
    for k in range(2, n + 1):
        buses.append(Bus(k, BusKind.PQ, 138.0))
    branches = []
    for k in range(2, n + 1):
        other = int(rng.integers(1, k))
        y = series_y(float(rng.uniform(0.005, 0.05)), float(rng.uniform(0.03, 0.2)), nph)
        branches.append(
            Branch(k - 1, other, k, y_series=y,
                   b_from=phase_array(float(rng.uniform(0, 0.02)), nph),
                   b_to=phase_array(float(rng.uniform(0, 0.02)), nph))
        )
    gens = []
    if rng.random() < 0.7:
        gbus = int(rng.integers(2, n + 1))
        buses[gbus - 1] = Bus(gbus, BusKind.PQ, 138.0, v_set=float(rng.uniform(0.99, 1.04)))
        gens.append(Generator(1, gbus, p=phase_array(float(rng.uniform(0.1, 0.6)), nph),
                              q=None, qmin=-2.0, qmax=2.0))
    loads = []
    for lid in range(1, int(rng.integers(1, 4)) + 1):
        conn = Connection.WYE
        if nph == 3 and rng.random() < 0.4:
            conn = Connection.DELTA
        loads.append(
            ZipLoad(lid, int(rng.integers(2, n + 1)), conn,
                    y=phase_carray(complex(rng.uniform(0, 0.05), -rng.uniform(0, 0.02)), nph),
                    i=phase_carray(complex(rng.uniform(0, 0.1), rng.uniform(0, 0.03)), nph),
                    s=phase_carray(complex(rng.uniform(0.05, 0.4), rng.uniform(0, 0.15)), nph))
        )
    shunts = ()
    if rng.random() < 0.5:
        shunts = (Shunt(1, int(rng.integers(2, n + 1)),
                        g=phase_array(0.0, nph), b=phase_array(float(rng.uniform(0, 0.1)), nph)),)
    return Network(domain, 100.0, tuple(buses), tuple(gens), tuple(loads), (),
                   tuple(branches), (), shunts)
