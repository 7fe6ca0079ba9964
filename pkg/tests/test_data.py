import math

import numpy as np
import pytest
from scipy import integrate, stats as sps

from mdlinfer.data import (
    Dataset,
    IngestConfig,
    control_first_quartile,
    generate_synthetic,
    ingest_csv,
    preprocess,
    write_long_csv,
)
from mdlinfer.errors import (
    AlreadyPreprocessed,
    DuplicateFeatureId,
    GroupTooSmall,
    InputError,
    NonPositiveAfterShift,
    ParseError,
)
from mdlinfer.statistics import FeatureSample, abs_two_sample_t

CFG = IngestConfig("case", "ctrl")


def write(tmp_path, text):
    p = tmp_path / "in.csv"
    p.write_text(text)
    return p


def long_rows(layout):
    lines = ["feature_id,group,value"]
    for fid, group, values in layout:
        lines += [f"{fid},{group},{v}" for v in values]
    return "\n".join(lines) + "\n"


def test_ingest_well_formed(tmp_path):
    layout = [(f"p{i}", g, [1.0 + i, 2.0, 3.5]) for i in range(3) for g in ("case", "ctrl")]
    layout.append(("p0", "other", [9.0]))  # groups outside the contrast are skipped
    ds = ingest_csv(write(tmp_path, long_rows(layout)), CFG)
    assert len(ds) == 3 and ds.group_labels == ("case", "ctrl")
    assert ds.features[1].group_x == (2.0, 2.0, 3.5)


def test_unequal_sizes_supported(tmp_path):
    layout = [("a", "case", [1, 2]), ("a", "ctrl", [1, 2, 3, 4]), ("b", "case", [1, 2, 3]), ("b", "ctrl", [5, 6])]
    ds = ingest_csv(write(tmp_path, long_rows(layout)), CFG)
    assert [(f.m, f.n) for f in ds.features] == [(2, 4), (3, 2)]


def test_non_numeric_cell(tmp_path):
    text = long_rows([("a", "case", [1, 2]), ("a", "ctrl", [1, 2])]).replace("2\n", "two\n", 1)
    with pytest.raises(ParseError) as err:
        ingest_csv(write(tmp_path, text), CFG)
    assert err.value.problems[0][:2] == (3, "value")
    assert "line 3" in str(err.value)


def test_missing_column(tmp_path):
    with pytest.raises(ParseError):
        ingest_csv(write(tmp_path, "feature_id,value\na,1\n"), CFG)


def test_group_too_small(tmp_path):
    with pytest.raises(GroupTooSmall):
        ingest_csv(write(tmp_path, long_rows([("a", "case", [1]), ("a", "ctrl", [1, 2])])), CFG)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        ingest_csv(tmp_path / "nope.csv", CFG)


def test_duplicate_ids_rejected():
    f = FeatureSample("a", [1, 2], [3, 4])
    with pytest.raises(DuplicateFeatureId):
        Dataset((f, f))


def test_preprocess_quartile_example():
    ds = Dataset((FeatureSample("a", [0.5, 8.0], [1, 2]), FeatureSample("b", [1, 1.5], [3, 4])))
    assert control_first_quartile(ds) == pytest.approx(1.75)
    out = preprocess(ds)
    assert out.preprocessing_log.shift == pytest.approx(1.75)
    assert out.features[0].group_x[1] == pytest.approx(math.log(9.75))
    with pytest.raises(AlreadyPreprocessed):
        preprocess(out)


def test_preprocess_rejects_nonpositive():
    ds = Dataset((FeatureSample("a", [1, 2], [0, 0]), FeatureSample("b", [0, 3], [0, 0])))
    with pytest.raises(NonPositiveAfterShift) as err:
        preprocess(ds)
    assert ("a", "y", 0.0) in err.value.offending


def test_preprocess_keeps_order():
    rng = np.random.default_rng(0)
    ds = Dataset((FeatureSample("a", rng.uniform(0, 5, 6), rng.uniform(0, 5, 6)),))
    out = preprocess(ds)
    for raw, new in ((ds.features[0].group_x, out.features[0].group_x),):
        assert list(np.argsort(raw)) == list(np.argsort(new))


def test_generator_deterministic_and_labelled():
    a = generate_synthetic(30, 4, 5, 0.3, 1.5, 9)
    b = generate_synthetic(30, 4, 5, 0.3, 1.5, 9)
    assert a == b
    assert len(a.truth) == 30 and a.features[0].m == 4 and a.features[0].n == 5
    assert generate_synthetic(30, 4, 5, 1.0, 1.5, 9).truth == (False,) * 30


def test_generator_null_matches_folded_central_t():
    ds = generate_synthetic(10_000, 8, 8, 1.0, 2.0, 1)
    t = np.array([abs_two_sample_t(f).value for f in ds.features])
    df = 14
    mean = 2 * integrate.quad(lambda x: x * sps.t.pdf(x, df), 0, np.inf)[0]
    assert abs(t.mean() - mean) <= 3 * t.std(ddof=1) / math.sqrt(t.size)


def test_generator_pi0_zero_theta_zero_is_null():
    a = generate_synthetic(2000, 8, 8, 1.0, 0.0, 4)
    b = generate_synthetic(2000, 8, 8, 0.0, 0.0, 5)
    ta = [abs_two_sample_t(f).value for f in a.features]
    tb = [abs_two_sample_t(f).value for f in b.features]
    assert sps.ks_2samp(ta, tb).pvalue > 0.01


def test_long_csv_round_trip(tmp_path):
    ds = generate_synthetic(5, 3, 4, 0.5, 2.0, 0)
    write_long_csv(ds, tmp_path / "d.csv")
    back = ingest_csv(tmp_path / "d.csv", IngestConfig("x", "y"))
    assert back.features == ds.features
