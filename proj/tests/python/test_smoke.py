"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import crnbalance

SIX_SPECIES = """\
species: A B C D E F
A + E <-> B ; kf=1 kr=1
A + F <-> B ; kf=1 kr=1
B <-> C ; kf=1 kr=1
A <-> D ; kf=1 kr=1
D + E <-> C ; kf=2 kr=2
D + F <-> C ; kf=1 kr=1
"""


def test_structure_of_the_conservative_example():
    sys = crnbalance.System("A + B <-> 2 C ; kf=1 kr=1\nC <-> B ; kf=1 kr=1\n")
    rep = sys.structure()
    assert rep["conservative"] is True
    assert rep["conservation_basis"]["vectors"] == [["1", "1", "1"]]
    assert rep["cycle_basis"]["dim"] == 0


def test_nullspace_matches_the_known_kernel():
    assert crnbalance.nullspace([["-1", "2"], ["1", "-2"]]) == [["2", "1"]]


def test_check_db_and_energy():
    sys = crnbalance.System("A <-> B ; kf=2 kr=1\n")
    rep = sys.check_db()
    assert rep["balanced"] is True
    e = rep["energy"]["particular"]
    assert e[1] - e[0] == pytest.approx(math.log(0.5))


def test_reduce_reports_the_circuit_value():
    sys = crnbalance.System(SIX_SPECIES)
    rep = sys.reduce({"E": 1.0, "F": 2.0})
    assert rep["stability"]["verdict"] == "NOT_DB"
    cycles = rep["stability"]["violated_cycles"]
    assert len(cycles) == 1
    assert cycles[0]["circuit_value"] == pytest.approx(9.0 / 8.0)
    # On the equilibrium family the reduction keeps detailed balance.
    assert sys.reduce({"E": 2.0, "F": 2.0})["stability"]["reduced_balanced"] is True


def test_completion_certificate_is_green():
    sys = crnbalance.System(
        "S1 <-> S2 ; kf=2 kr=1\nS2 <-> S3 ; kf=1 kr=1\n"
        "S3 <-> S4 ; kf=1 kr=1\nS4 <-> S1 ; kf=1 kr=1\n"
    )
    rep = sys.complete()
    assert rep["certificate"]["all_green"] is True
    assert rep["certificate"]["acyclic"] is True

    blocked = sys.complete(
        constrained=[
            "S1 <-> S2",
            "S2 <-> S3",
            "S3 <-> S4",
            "S4 <-> S1",
        ]
    )
    assert blocked["status"] == "IMPOSSIBLE"


def test_simulation_free_energy_is_monotone():
    sys = crnbalance.System("A <-> B ; kf=1 kr=1\n")
    traj = sys.simulate(t_end=20.0, init={"A": 2.0})
    assert traj["status"] in ("OK", "STEADY_STATE")
    fe = traj["free_energy"]
    assert all(b <= a + 1e-8 for a, b in zip(fe, fe[1:]))
    assert traj["final_state"][0] == pytest.approx(1.0, abs=1e-6)


def test_flux_simulation_converges():
    sys = crnbalance.System("X <-> Y ; kf=1 kr=1\nY <-> Z ; kf=1 kr=1\n")
    traj = sys.simulate_flux(t_end=60.0, freeze={"X": 2.0}, init={"Y": 0.3, "Z": 0.7})
    assert traj["final_state"] == pytest.approx([2.0, 2.0, 2.0], abs=1e-5)
    assert traj["final_cumulative_flux"][0] == pytest.approx(3.0, abs=1e-5)


def test_parse_errors_are_exceptions():
    with pytest.raises(Exception):
        crnbalance.System("A <-> B\n")
