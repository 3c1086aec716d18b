import math

import mpmath as mp
import numpy as np
import pytest

from polyszego.errors import ValidationError
from polyszego.experiments import (
    ConvergenceTable,
    asym_l2,
    asym_pointwise,
    config_hash,
    format_number,
    growth_bound_probe,
    growth_constant_stable,
    outer_truncation,
    precision_scaling_experiment,
    random_alphas,
    roundtrip_error,
    szego_distance_experiment,
    validate_candidate,
    variational_sandwich,
    wave_operator_probe,
)
from polyszego.measures import bernstein_szego, laurent_expand, lebesgue, with_atoms
from polyszego.szego_functions import kernel_data

ROOT1 = kernel_data([1])


def test_table_validation_and_slope():
    t = ConvergenceTable([1, 2, 4, 8], ["m"], [[1.0], [0.5], [0.25], [0.125]])
    assert abs(t.loglog_slope("m", top_half=False) + 1) < 1e-12
    assert t.strictly_decreasing("m")
    assert t.to_csv().splitlines()[0] == "n,m"
    with pytest.raises(ValidationError):
        ConvergenceTable([1], ["m"], [[float("nan")]]).validate()
    with pytest.raises(ValidationError):
        ConvergenceTable([1], ["m"], [[-1.0]]).validate()
    with pytest.raises(ValidationError):
        ConvergenceTable([1, 2], ["m"], [[1.0]])


def test_format_number_round_trips():
    x = mp.mpf(1) / 3
    s = format_number(x, 128)
    assert mp.mpf(s) == x
    assert format_number(0.1) == "0.1"


def test_pointwise_lebesgue_and_finite_rank():
    t = asym_pointwise(lebesgue(), None, ROOT1, [0.3j, -0.5], [1, 2, 4])
    assert max(float(v) for row in t.metrics for v in row) <= 1e-10
    t = asym_pointwise(bernstein_szego([0.5]), None, ROOT1, [0.3j], range(1, 9))
    assert all(float(v) <= 1e-6 for v in t.column("z0"))


def test_l2_lebesgue_and_finite_rank():
    t = asym_l2(lebesgue(), None, ROOT1, [1, 2, 4], grid_size=2**12)
    assert max(t.column("l2")) <= 1e-8
    t = asym_l2(bernstein_szego([0.5]), None, ROOT1, [1, 4], grid_size=2**14)
    col = t.column("l2")
    assert col[1] <= col[0] + 1e-12
    assert t.metadata["radial_offset"] == 0.0


def test_l2_arc_column():
    t = asym_l2(bernstein_szego([0.5]), None, ROOT1, [1, 2], grid_size=2**12,
                arc=(np.pi / 2, 3 * np.pi / 2))
    assert t.columns == ["l2", "l2_arc"]
    assert all(a <= b + 1e-15 for a, b in zip(t.column("l2_arc"), t.column("l2")))


def test_growth_lebesgue_and_bs():
    t = growth_bound_probe(lebesgue(), None, ROOT1, 0.3, [1, 2], grid_size=2**12)
    assert all(float(v) <= 1 for v in t.column("sup"))
    t = growth_bound_probe(bernstein_szego([0.5]), None, ROOT1, 0.3, [1, 2, 4, 8],
                           grid_size=2**14)
    assert growth_constant_stable(t)


def test_wave_operator_lebesgue():
    t = wave_operator_probe(lebesgue(), None, ROOT1, 0, [2, 4, 8])
    assert max(t.column("residual")) <= 1e-6


def test_wave_operator_atom_restricts_target():
    mu = with_atoms(bernstein_szego([0.5]), [(-1, 0.1)])
    t = wave_operator_probe(mu, None, ROOT1, 0, [2, 4])
    assert t.column("residual")[1] < t.column("residual")[0]


def test_sandwich_lebesgue_example():
    rep = variational_sandwich(lebesgue(), laurent_expand([1]), [[1]])
    assert abs(rep.lower - mp.exp(-2)) < 1e-18
    assert abs(rep.upper - 1) < 1e-18
    assert abs(rep.candidates[0]["norm2"] - 1) < 1e-25
    assert abs(rep.candidates[0]["lambda"] - 1) < 1e-18
    assert rep.ordered()


def test_sandwich_rejects_zero_in_disk():
    rep = variational_sandwich(bernstein_szego([0.5]), laurent_expand([1]), [[1, 2], [1]])
    assert len(rep.rejected) == 1 and "zero" in rep.rejected[0]["reason"]
    assert rep.ordered()
    with pytest.raises(ValidationError):
        validate_candidate([-1, 0.1])


def test_outer_truncation_rank_one():
    # 1/D for a = 1/2 is (1 - z/2)/√(3/4)
    g = outer_truncation(bernstein_szego([0.5]), 4)
    expected = [2 / mp.sqrt(3), -1 / mp.sqrt(3), 0, 0, 0]
    assert all(abs(a - b) < 1e-12 for a, b in zip(g, expected))


def test_extremal_examples():
    t = szego_distance_experiment(bernstein_szego([0.5]), [1, 2, 5])
    assert all(abs(v - mp.mpf(3) / 4) < 1e-25 for v in t.column("inv_kernel"))
    assert all(v < 1e-18 for v in t.column("abs_gap"))
    t = szego_distance_experiment(lebesgue(), [1, 4])
    assert t.column("inv_kernel") == [1, 1]


def test_roundtrip_small():
    rng = np.random.default_rng(1)
    assert roundtrip_error(random_alphas(rng, 8, 0.5)) <= 1e-10


def test_precision_scaling_table_shape():
    t = precision_scaling_experiment([4, 6], [64, 96], seed=2)
    assert t.columns == ["bits64", "bits96"] and t.n_values == [4, 6]
    assert all(math.isfinite(float(v)) for row in t.metrics for v in row)


def test_config_hash_stable():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
