import math

import numpy as np
import pytest

from steadygrid.network import (
    Branch,
    Bus,
    BusKind,
    Generator,
    Network,
    PhaseDomain,
    from_pu_impedance,
    from_pu_power,
    coupled_line_y,
    phase_array,
    series_y,
    to_pu_impedance,
    to_pu_power,
    validate,
    z_base,
)

from conftest import make_branch, make_zip, net_2bus


def test_minimal_network_validates_clean():
    assert validate(net_2bus()) == []


def test_missing_slack_reported_per_island():
    buses = (Bus(1, BusKind.PQ, 138.0), Bus(2, BusKind.PQ, 138.0))
    net = Network(PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
                  branches=(make_branch(1, 1, 2, 0.01, 0.1),))
    issues = validate(net)
    assert [i.code for i in issues] == ["missing_slack"]
    assert issues[0].device == "island 0"


def test_two_islands_each_need_slack():
    buses = (
        Bus(1, BusKind.SLACK, 138.0, 1.0),
        Bus(2, BusKind.PQ, 138.0),
        Bus(3, BusKind.PQ, 138.0),
        Bus(4, BusKind.PQ, 138.0),
    )
    net = Network(PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
                  branches=(make_branch(1, 1, 2, 0.01, 0.1), make_branch(2, 3, 4, 0.01, 0.1)))
    codes = [i.code for i in validate(net)]
    assert codes == ["missing_slack"]
    assert net.n_islands == 2


def test_unreachable_remote_bus():
    buses = (
        Bus(1, BusKind.SLACK, 138.0, 1.0),
        Bus(2, BusKind.PQ, 138.0),
        Bus(3, BusKind.PQ, 138.0, v_set=1.0),
        Bus(4, BusKind.SLACK, 138.0, 1.0),
    )
    # bus 4 is its own island; gen at 2 cannot reach it
    gen = Generator(7, 2, p=phase_array(0.1, 1), q=None, remote_bus=4)
    net = Network(PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
                  generators=(gen,),
                  branches=(make_branch(1, 1, 2, 0.01, 0.1), make_branch(2, 2, 3, 0.01, 0.1)))
    issues = validate(net)
    assert any(i.code == "unreachable_remote" and "gen 7" in i.device for i in issues)


def test_qlim_order_and_vset_checks():
    buses = (Bus(1, BusKind.SLACK, 138.0, 1.0), Bus(2, BusKind.PQ, 138.0, v_set=-0.5))
    gen = Generator(1, 2, p=phase_array(0.1, 1), q=phase_array(0.0, 1), qmin=1.0, qmax=-1.0)
    net = Network(PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses, generators=(gen,),
                  branches=(make_branch(1, 1, 2, 0.01, 0.1),))
    codes = {i.code for i in validate(net)}
    assert "qlim_order" in codes
    assert "bad_vset" in codes


def test_three_phase_branch_symmetry_enforced():
    y = np.array(coupled_line_y(0.01, 0.05, 0.002, 0.01))
    y[0, 1] += 1e-9  # break symmetry
    buses = (Bus(1, BusKind.SLACK, 12.47, 1.0), Bus(2, BusKind.PQ, 12.47))
    br = Branch(1, 1, 2, y_series=y, b_from=phase_array(0.0, 3), b_to=phase_array(0.0, 3))
    net = Network(PhaseDomain.THREE_PHASE, 10.0, buses, branches=(br,))
    assert any(i.code == "asymmetric_y" for i in validate(net))


def test_coupled_line_helper_is_exactly_symmetric():
    y = coupled_line_y(0.02, 0.08, 0.005, 0.02)
    assert np.array_equal(y, y.T)


def test_bus_kind_derivation():
    net = net_2bus()
    assert net.bus_kind(1) == BusKind.SLACK
    assert net.bus_kind(2) == BusKind.PQ


def test_dangling_reference_detected():
    buses = (Bus(1, BusKind.SLACK, 138.0, 1.0), Bus(2, BusKind.PQ, 138.0))
    net = Network(PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
                  zip_loads=(make_zip(1, 99, s=0.1),),
                  branches=(make_branch(1, 1, 2, 0.01, 0.1),))
    assert any(i.code == "unknown_bus" for i in validate(net))


# -- per-unit conversions ----------------------------------------------------


def test_power_base_ratio_one():
    assert to_pu_power(100.0, 100.0) == 1.0


def test_power_complex_parts():
    assert to_pu_power(50.0, 100.0) == 0.5
    assert to_pu_power(10.0, 100.0) == 0.1


def test_impedance_conversion_138kv():
    # 5 ohm on a 138 kV / 100 MVA base: Z_base = 190.44 ohm
    z = to_pu_impedance(5.0, 138.0, 100.0)
    assert z == pytest.approx(5.0 / 190.44, rel=1e-15)
    assert round(z, 5) == 0.02625


def test_per_unit_round_trip_identity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        mw = float(rng.uniform(-500, 500))
        base = float(rng.uniform(1, 1000))
        assert abs(from_pu_power(to_pu_power(mw, base), base) - mw) < 1e-12 * max(1, abs(mw))
        ohm = float(rng.uniform(0.01, 100))
        kv = float(rng.uniform(1, 765))
        back = from_pu_impedance(to_pu_impedance(ohm, kv, base), kv, base)
        assert abs(back - ohm) < 1e-12 * max(1, abs(ohm))


def test_bad_base_rejected():
    with pytest.raises(ValueError):
        to_pu_power(10.0, 0.0)
    with pytest.raises(ValueError):
        z_base(-1.0, 100.0)


def test_islands_union_find():
    buses = tuple(Bus(k, BusKind.PQ, 138.0) for k in range(1, 6))
    net = Network(PhaseDomain.POSITIVE_SEQUENCE, 100.0, buses,
                  branches=(make_branch(1, 1, 2, 0.01, 0.1),
                            make_branch(2, 4, 5, 0.01, 0.1)))
    assert net.islands[0] == net.islands[1]
    assert net.islands[3] == net.islands[4]
    assert len({net.islands[0], net.islands[2], net.islands[3]}) == 3


def test_network_is_immutable():
    net = net_2bus()
    with pytest.raises(Exception):
        net.base_mva = 50.0
    with pytest.raises(Exception):
        net.branches[0].y_series[0, 0] = 1.0  # read-only array
