import itertools
import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from substation_sci.cases import mtba_5l, rba_5, sba_6
from substation_sci.ldm import (IdentificationError, MtbaInputs, RbaPairInputs, SbaBranchInputs, ldm_identify,
                                ldm_identify_mtba, ldm_identify_rba, ldm_identify_sba, ldm_mtba, ldm_rba_pair,
                                ldm_sba_branch, preprocess_mtba, preprocess_rba_pair, preprocess_sba_branch)
from substation_sci.nn import RBA_PAIR_ROWS, SBA_BRANCH_ROWS
from substation_sci.phasor import Phasor, PmuFrame
from substation_sci.stream import NoiseModel, default_operating_point, enumerate_scenarios, synthesize
from substation_sci.topology import enumerate_cas, observable

ON = Phasor(1.0, 0.1)
ON_OTHER = Phasor(0.99, 0.0)
OFF = Phasor(0.0, 0.0)


def frame(spec, **values):
    return PmuFrame(0, spec.substation_id, {k: v for k, v in values.items()})


def test_preprocess_rba_pair():
    assert preprocess_rba_pair(ON, ON) == RbaPairInputs(A=1, B=1, C=1)
    assert preprocess_rba_pair(ON, ON_OTHER) == RbaPairInputs(A=1, B=1, C=0)
    assert preprocess_rba_pair(ON, OFF) == RbaPairInputs(A=1, B=0, C=0)
    assert preprocess_rba_pair(OFF, OFF) == RbaPairInputs(A=0, B=0, C=1)


def test_preprocess_sba_and_mtba():
    assert preprocess_sba_branch(ON, Phasor(0.5, -0.2)) == SbaBranchInputs(A=1, B=1)
    assert preprocess_sba_branch(ON, OFF) == SbaBranchInputs(A=1, B=0)
    assert preprocess_mtba(ON, ON) == MtbaInputs(C=1, A=1, T=1)
    assert preprocess_mtba(OFF, ON) == MtbaInputs(C=0, A=0, T=1)


@pytest.mark.parametrize("x, y", RBA_PAIR_ROWS.rows)
def test_rba_rule_reproduces_table(x, y):
    c, a, b = x
    assert ldm_rba_pair(RbaPairInputs(A=a, B=b, C=c)) == y


@pytest.mark.parametrize("x, y", SBA_BRANCH_ROWS.rows)
def test_sba_rule_reproduces_table(x, y):
    b, a = x
    assert ldm_sba_branch(SbaBranchInputs(A=a, B=b)) == y


def test_rules_are_fail_safe_on_every_input():
    for c, a, b in itertools.product((0, 1), repeat=3):
        inp = RbaPairInputs(A=a, B=b, C=c)
        assert ldm_rba_pair(inp) == (1 if (a, b, c) == (1, 1, 1) else 0)
        if inp.infeasible:
            assert ldm_rba_pair(inp) == 0
    for a, b in itertools.product((0, 1), repeat=2):
        assert ldm_sba_branch(SbaBranchInputs(A=a, B=b)) == (a and b)
    for c, a, t in itertools.product((0, 1), repeat=3):
        assert ldm_mtba(MtbaInputs(C=c, A=a, T=t)) == (c and a)


def test_rba_all_connected():
    spec = rba_5()
    fa = ldm_identify_rba(spec, frame(spec, V1=ON, V2=ON, V3=ON, V4=ON))
    assert fa.node_partition == (("1", "2", "3", "4"),)
    assert fa.in_service


def test_rba_separation():
    spec = rba_5()
    fa = ldm_identify_rba(spec, frame(spec, V1=ON, V2=ON_OTHER, V3=ON_OTHER, V4=ON))
    assert fa.node_partition == (("1", "4"), ("2", "3"))


def test_rba_dead_ring_is_all_singletons():
    spec = rba_5()
    fa = ldm_identify_rba(spec, frame(spec, V1=OFF, V2=OFF, V3=OFF, V4=OFF))
    assert fa.node_partition == (("1",), ("2",), ("3",), ("4",))
    assert not fa.in_service


def test_mtba_cases():
    spec = mtba_5l()
    tied = ldm_identify_mtba(spec, frame(spec, V_main=ON, V_transfer=ON))
    assert tied.node_partition == (("main", "transfer"),)
    isolated = ldm_identify_mtba(spec, frame(spec, V_main=OFF, V_transfer=ON))
    assert isolated.node_partition == (("main",), ("transfer",))
    assert isolated.group_energized == (False, True)
    out = ldm_identify_mtba(spec, frame(spec, V_main=OFF, V_transfer=OFF))
    assert not out.in_service


def test_sba_rows():
    spec = sba_6()
    currents = {f"I_L{k}": (Phasor(0.5, 0.0) if k % 2 else OFF) for k in range(1, 7)}
    fa = ldm_identify_sba(spec, frame(spec, V_bus=ON, **currents))
    assert fa.connected == {"L1": True, "L2": False, "L3": True, "L4": False, "L5": True, "L6": False}


def test_missing_channel_is_named():
    spec = rba_5()
    with pytest.raises(IdentificationError, match="V3"):
        ldm_identify(spec, frame(spec, V1=ON, V2=ON, V4=ON))


def test_wrong_kind_rejected():
    spec = rba_5()
    with pytest.raises(IdentificationError):
        ldm_identify_sba(spec, frame(spec, V1=ON, V2=ON, V3=ON, V4=ON))


def test_infeasible_inputs_are_flagged():
    spec = sba_6()
    currents = {f"I_L{k}": Phasor(0.5, 0.0) for k in range(1, 7)}
    flags = []
    fa = ldm_identify_sba(spec, frame(spec, V_bus=OFF, **currents), flags=flags)
    assert len(flags) == 6
    assert not any(fa.connected.values())


@pytest.mark.parametrize("make", [mtba_5l, rba_5, sba_6])
def test_exhaustive_noise_free(make):
    spec = make()
    for sc in enumerate_scenarios(spec, duration=0.1):
        for lf in synthesize(spec, sc):
            assert ldm_identify(spec, lf.frame) == observable(spec, lf.truth)


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from([mtba_5l, rba_5, sba_6]), scale=st.floats(0.8, 1.2),
       rotation=st.floats(-math.pi, math.pi), seed=st.integers(0, 2 ** 16), data=st.data())
def test_scaling_and_rotation_invariance(kind, scale, rotation, seed, data):
    spec = kind()
    ca = data.draw(st.sampled_from(enumerate_cas(spec)))
    op = default_operating_point(spec).scaled(scale).rotated(rotation)
    base = enumerate_scenarios(spec, duration=2 / 30)[0]
    plain = replace(base, initial_ca=ca)
    moved = replace(base, initial_ca=ca, operating_point=op, noise=NoiseModel())
    for a, b in zip(synthesize(spec, plain, seed), synthesize(spec, moved, seed)):
        assert ldm_identify(spec, a.frame) == ldm_identify(spec, b.frame) == observable(spec, a.truth)
