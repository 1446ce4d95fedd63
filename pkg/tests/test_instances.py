import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqa_chain.errors import ParseError, ValidationError
from sqa_chain.instances import (
    Instance,
    classical_ground_energy,
    generate_instance,
    load_instance,
    save_instance,
)


def test_ordered_generation_is_constant():
    inst = generate_instance(3, "ordered(1)", 0)
    assert inst.couplings.tolist() == [1.0, 1.0]


def test_generation_deterministic_in_seed():
    a = generate_instance(256, "uniform01", 123)
    b = generate_instance(256, "uniform01", 123)
    assert np.array_equal(a.couplings, b.couplings)
    c = generate_instance(256, "uniform01", 124)
    assert not np.array_equal(a.couplings, c.couplings)


@pytest.mark.parametrize("seed", [0, 1, 987654321])
def test_large_sample_mean(seed):
    inst = generate_instance(10_000, "uniform01", seed)
    assert 0.49 <= inst.couplings.mean() <= 0.51


@pytest.mark.parametrize("seed", range(5))
def test_uniform01_support(seed):
    inst = generate_instance(500, "uniform01", seed)
    assert np.all(inst.couplings > 0.0)
    assert np.all(inst.couplings <= 1.0)


def test_too_short_chain_rejected():
    with pytest.raises(ValidationError):
        generate_instance(1, "uniform01", 0)


def test_unknown_distribution_rejected():
    with pytest.raises(ValidationError):
        generate_instance(4, "gaussian", 0)


def test_ground_energy_examples():
    inst = Instance(3, np.array([0.5, 0.25]), "uniform01", 0)
    assert classical_ground_energy(inst) == pytest.approx(-0.25, abs=1e-15)
    ordered = generate_instance(256, "ordered(1)", 0)
    assert classical_ground_energy(ordered) == pytest.approx(-255 / 256, abs=1e-15)
    rnd = generate_instance(64, "uniform01", 5)
    assert -1.0 < classical_ground_energy(rnd) < 0.0


@settings(max_examples=30, deadline=None)
@given(
    length=st.integers(min_value=2, max_value=40),
    seed=st.integers(min_value=0, max_value=2**63),
    ordered=st.booleans(),
)
def test_save_load_round_trip(tmp_path_factory, length, seed, ordered):
    dist = "ordered(0.75)" if ordered else "uniform01"
    inst = generate_instance(length, dist, seed)
    path = tmp_path_factory.mktemp("inst") / "chain.txt"
    save_instance(inst, path)
    assert load_instance(path) == inst


def test_load_reports_coupling_count(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("L=3\ndistribution=uniform01\nseed=0\n0.5\n")
    with pytest.raises(ParseError, match="expected 2 couplings"):
        load_instance(path)


def test_load_rejects_nonpositive_coupling(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("L=3\ndistribution=uniform01\nseed=0\n0.5\n-0.1\n")
    with pytest.raises(ValidationError, match="J > 0"):
        load_instance(path)


def test_load_names_bad_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("L=3\ndistribution=uniform01\nseed=0\n0.5\nnot-a-number\n")
    with pytest.raises(ParseError, match="line 5"):
        load_instance(path)


def test_load_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("length=3\ndistribution=uniform01\nseed=0\n0.5\n0.7\n")
    with pytest.raises(ParseError, match="line 1"):
        load_instance(path)


def test_regeneration_from_metadata_is_bit_identical(tmp_path):
    inst = generate_instance(128, "uniform01", 777)
    path = tmp_path / "chain.txt"
    save_instance(inst, path)
    loaded = load_instance(path)
    regenerated = generate_instance(loaded.length, loaded.distribution, loaded.seed)
    assert np.array_equal(regenerated.couplings, inst.couplings)


def test_instance_validates_coupling_count():
    with pytest.raises(ValidationError):
        Instance(4, np.array([0.5, 0.5]), "uniform01", 0)


def test_instance_validates_positivity():
    with pytest.raises(ValidationError):
        Instance(3, np.array([0.5, 0.0]), "uniform01", 0)
