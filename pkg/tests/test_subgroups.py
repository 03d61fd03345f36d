import numpy as np
import pytest

from rmx.cohort import make_snapshot
from rmx.errors import SchemaError
from rmx.schema import VariableSchema
from rmx.subgroups import SubgroupSpec, build_partition, partition_counts

SCHEMA = (
    VariableSchema("sex", "binary", roles=("subgroup",), levels=("female", "male")),
    VariableSchema("age", "continuous", roles=("subgroup",), valid_range=(0.0, 120.0)),
    VariableSchema("income", "categorical", roles=("subgroup",),
                   levels=("low", "mid", "high")),
    VariableSchema("height", "continuous", roles=("predictor",)),
)


def snapshot(sex, age, income=None, height=None):
    n = len(sex)
    income = [np.nan] * n if income is None else income
    height = [170.0] * n if height is None else height
    cov = np.array([sex, age, income, height], np.float64)
    return make_snapshot(SCHEMA, cov, [100.0] * n, [0] * n, [("loaded", n)])


def test_single_binary_axis():
    snap = snapshot(sex=[0, 1, 0, 1, 1], age=[50] * 5)
    part = build_partition(snap, SubgroupSpec(("sex",)))
    assert [g.label for g in part.subgroups] == ["sex=female", "sex=male"]
    assert [g.count for g in part.subgroups] == [2, 3]
    assert [g.color_index for g in part.subgroups] == [0, 1]
    np.testing.assert_array_equal(part.subgroups[0].members, [0, 2])
    assert part.excluded_missing.size == 0


def test_cross_product_ordering():
    # first variable is the outer (slow) axis
    snap = snapshot(sex=[0, 1, 0, 1], age=[30, 30, 70, 70])
    spec = SubgroupSpec(("sex", "age"), bins={"age": (0.0, 50.0, 120.0)})
    part = build_partition(snap, spec)
    assert [g.label for g in part.subgroups] == [
        "sex=female & age=[0,50)",
        "sex=female & age=[50,120]",
        "sex=male & age=[0,50)",
        "sex=male & age=[50,120]",
    ]
    assert all(g.count == 1 for g in part.subgroups)


def test_continuous_binning_half_open_and_final_closed():
    snap = snapshot(sex=[0] * 5, age=[40.0, 50.0, 59.9, 60.0, 120.0])
    part = build_partition(snap, SubgroupSpec(("age",),
                                              bins={"age": (40.0, 60.0, 120.0)}))
    by_label = {g.label: g for g in part.subgroups}
    # 60 rolls into the upper bin; the top edge itself is included
    np.testing.assert_array_equal(by_label["age=[40,60)"].members, [0, 1, 2])
    np.testing.assert_array_equal(by_label["age=[60,120]"].members, [3, 4])


def test_out_of_range_and_missing_are_excluded():
    snap = snapshot(sex=[0, 0, 0, 0], age=[30.0, 80.0, 20.0, np.nan])
    part = build_partition(snap, SubgroupSpec(("age",),
                                              bins={"age": (25.0, 60.0)}))
    assert len(part.subgroups) == 1
    np.testing.assert_array_equal(part.subgroups[0].members, [0])
    np.testing.assert_array_equal(part.excluded_missing, [1, 2, 3])
    assert part.included == 1


def test_empty_cells_dropped_and_colors_stay_sequential():
    # no young males: that cell vanishes, colors renumber 0..2
    snap = snapshot(sex=[0, 0, 1], age=[30, 70, 70])
    spec = SubgroupSpec(("sex", "age"), bins={"age": (0.0, 50.0, 120.0)})
    part = build_partition(snap, spec)
    assert [g.label for g in part.subgroups] == [
        "sex=female & age=[0,50)",
        "sex=female & age=[50,120]",
        "sex=male & age=[50,120]",
    ]
    assert [g.color_index for g in part.subgroups] == [0, 1, 2]


def test_categorical_axis_with_missing():
    snap = snapshot(sex=[0] * 4, age=[50] * 4, income=[0.0, 2.0, np.nan, 2.0])
    part = build_partition(snap, SubgroupSpec(("income",)))
    assert [g.label for g in part.subgroups] == ["income=low", "income=high"]
    np.testing.assert_array_equal(part.excluded_missing, [2])


def test_partition_id_deterministic_and_content_sensitive():
    snap = snapshot(sex=[0, 1], age=[30, 70])
    spec = SubgroupSpec(("sex",))
    a = build_partition(snap, spec)
    b = build_partition(snap, spec)
    assert a.partition_id == b.partition_id
    c = build_partition(snap, SubgroupSpec(("age",), bins={"age": (0.0, 50.0, 120.0)}))
    assert a.partition_id != c.partition_id
    assert a.snapshot_id == snap.snapshot_id


def test_find_and_to_json():
    snap = snapshot(sex=[0, 1], age=[30, 70])
    part = build_partition(snap, SubgroupSpec(("sex",)))
    assert part.find("sex=male").count == 1
    with pytest.raises(SchemaError):
        part.find("sex=other")
    doc = part.to_json()
    assert doc["subgroups"][0]["label"] == "sex=female"
    assert "members" not in doc["subgroups"][0]
    doc = part.to_json(include_members=True)
    assert doc["subgroups"][0]["members"] == [0]


def test_spec_validation():
    with pytest.raises(SchemaError):
        SubgroupSpec(())
    with pytest.raises(SchemaError):
        SubgroupSpec(("sex", "sex"))
    with pytest.raises(SchemaError):
        SubgroupSpec(("age",), bins={"age": (50.0,)})
    with pytest.raises(SchemaError):
        SubgroupSpec(("age",), bins={"age": (60.0, 50.0)})


def test_axis_role_and_bin_requirements():
    snap = snapshot(sex=[0], age=[50])
    with pytest.raises(SchemaError, match="subgroup role"):
        build_partition(snap, SubgroupSpec(("height",)))
    with pytest.raises(SchemaError, match="bins"):
        build_partition(snap, SubgroupSpec(("age",)))


def test_partition_counts():
    snap = snapshot(sex=[0, 1, 1], age=[30, 70, 70])
    part = build_partition(snap, SubgroupSpec(("sex",)))
    assert partition_counts(part) == [
        ("sex=female", 1, pytest.approx(100.0 / 3)),
        ("sex=male", 2, pytest.approx(200.0 / 3)),
    ]
