import numpy as np
import pytest

from mploss.data import COLUMNS, Dataset, generate_synthetic, load_dataset, power_curve, save_dataset
from mploss.errors import MalformedCsv, SchemaViolation

HEADER = ",".join(COLUMNS) + "\n"


def write(tmp_path, body, header=HEADER):
    p = tmp_path / "d.csv"
    p.write_text(header + body)
    return p


def test_header_only_gives_empty_dataset(tmp_path):
    ds = load_dataset(write(tmp_path, ""))
    assert len(ds) == 0
    assert ds.features.shape == (0, 4)


def test_negative_wind_rejected_with_line(tmp_path):
    body = "t0,1,2,3,4,50,5\nt1,1,2,3,4,50,-1\n"
    with pytest.raises(SchemaViolation, match="line 3"):
        load_dataset(write(tmp_path, body))


def test_out_of_range_rows_listed(tmp_path):
    body = "t0,1,2,3,4,50,30\nt1,1,2,3,4,70,5\nt2,1,2,3,4,50,5\n"
    with pytest.raises(SchemaViolation) as exc:
        load_dataset(write(tmp_path, body), capacity=28.0, load_range=(40.0, 60.0))
    assert "line 2" in str(exc.value) and "line 3" in str(exc.value)
    assert "line 4" not in str(exc.value)


def test_malformed_files(tmp_path):
    with pytest.raises(MalformedCsv, match="header"):
        load_dataset(write(tmp_path, "", header="a,b\n"))
    with pytest.raises(MalformedCsv, match=":2:"):
        load_dataset(write(tmp_path, "t0,1,2,x,4,50,5\n"))
    with pytest.raises(MalformedCsv):
        load_dataset(write(tmp_path, "t0,1,2\n"))
    with pytest.raises(MalformedCsv, match="empty"):
        load_dataset(write(tmp_path, "", header=""))


def test_five_row_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    ds = Dataset(rng.uniform(0, 20, (5, 4)), rng.uniform(0, 28, 5), rng.uniform(40, 60, 5),
                 [f"2022-01-01T0{i}:00" for i in range(5)])
    save_dataset(ds, tmp_path / "a.csv")
    back = load_dataset(tmp_path / "a.csv")
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.y, ds.y)
    np.testing.assert_array_equal(back.l, ds.l)
    assert back.timestamps == ds.timestamps
    save_dataset(back, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_synthetic_generator():
    a = generate_synthetic(500, 28.0, (40.0, 60.0), seed=3)
    b = generate_synthetic(500, 28.0, (40.0, 60.0), seed=3)
    np.testing.assert_array_equal(a.y, b.y)
    a.check(28.0, (40.0, 60.0))
    assert a.y.std() > 1.0
    assert a.timestamps == sorted(a.timestamps)
    # target scales with capacity on the same draws
    c = generate_synthetic(500, 14.0, (40.0, 60.0), seed=3)
    np.testing.assert_allclose(c.y, a.y / 2)


def test_power_curve_shape():
    np.testing.assert_array_equal(power_curve([0.0, 3.0, 12.0, 20.0, 25.0]), [0, 0, 1, 1, 0])
    assert 0 < power_curve(8.0) < 1


def test_slicing():
    ds = generate_synthetic(10, 28.0, (40.0, 60.0))
    assert len(ds[:3]) == 3
    assert len(ds[4]) == 1
    assert ds[2:4].timestamps == ds.timestamps[2:4]
