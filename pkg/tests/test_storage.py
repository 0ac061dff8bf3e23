import numpy as np
import pytest

from covloc import BlockCovariance, EnsembleState
from covloc.storage import (
    FormatError,
    read_array,
    read_covariance,
    read_covariance_csv,
    read_ensemble,
    write_array,
    write_covariance,
    write_covariance_csv,
    write_csv,
    write_ensemble,
    write_ensemble_csv,
)


def test_array_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.standard_normal((5, 7, 2))
    path = tmp_path / "x.cvl"
    write_array(path, data, 1.25)
    back, t = read_array(path)
    assert t == 1.25
    np.testing.assert_array_equal(back, data)


def test_header_layout_is_the_documented_one(tmp_path):
    path = tmp_path / "x.cvl"
    write_array(path, np.zeros((2, 3, 1)), 0.5)
    raw = path.read_bytes()
    assert raw[:4] == b"CVL1"
    assert int.from_bytes(raw[4:12], "little") == 2
    assert int.from_bytes(raw[12:20], "little") == 3
    assert int.from_bytes(raw[20:28], "little") == 1
    assert np.frombuffer(raw[28:36], dtype="<f8")[0] == 0.5
    assert len(raw) == 36 + 8 * 6


def test_ensemble_roundtrip(tmp_path):
    samples = np.arange(24, dtype=float).reshape(3, 4, 2)
    ens = EnsembleState(samples=samples, time=2.0, seeds=(1, 2, 3))
    path = tmp_path / "e.cvl"
    write_ensemble(path, ens)
    back, t = read_ensemble(path)
    np.testing.assert_array_equal(back, samples)
    assert t == 2.0


def test_covariance_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    m = rng.standard_normal((8, 8))
    cov = BlockCovariance(m + m.T, 4, 2)
    path = tmp_path / "c.cvl"
    write_covariance(path, cov, 5.0)
    back, t = read_covariance(path, block_dim=2)
    np.testing.assert_array_equal(back.data, cov.data)
    assert (back.n_blocks, back.block_dim, t) == (4, 2, 5.0)


def test_covariance_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    m = rng.standard_normal((6, 6))
    cov = BlockCovariance(m + m.T, 6, 1)
    path = tmp_path / "c.csv"
    write_covariance_csv(path, cov)
    back = read_covariance_csv(path)
    np.testing.assert_array_equal(back.data, cov.data)


def test_ensemble_csv_columns(tmp_path):
    ens = EnsembleState(samples=np.zeros((2, 3, 1)), time=0.0, seeds=(0, 1))
    path = tmp_path / "e.csv"
    write_ensemble_csv(path, ens)
    lines = path.read_text().splitlines()
    assert lines[0] == "sample,block,component,value"
    assert len(lines) == 1 + 2 * 3


def test_csv_floats_roundtrip_exactly(tmp_path):
    path = tmp_path / "vals.csv"
    values = [0.1, 1.0 / 3.0, 1e-300, 123456.789012345678]
    write_csv(path, ["v"], [(v,) for v in values])
    back = [float(line) for line in path.read_text().splitlines()[1:]]
    assert back == values


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.cvl"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(FormatError):
        read_array(path)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "short.cvl"
    write_array(path, np.zeros((2, 2, 1)), 0.0)
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(FormatError):
        read_array(path)


def test_covariance_reader_checks_shape(tmp_path):
    path = tmp_path / "notcov.cvl"
    write_array(path, np.zeros((3, 4, 2)), 0.0)
    with pytest.raises(FormatError):
        read_covariance(path)
