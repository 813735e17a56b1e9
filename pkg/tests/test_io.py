import struct

import numpy as np
import pytest

from wlrtr.tensor_io import (
    HEADER,
    BadMagicError,
    ConfigError,
    DimensionError,
    TruncatedError,
    export_band_images,
    load_matrix,
    load_raw,
    load_tensor,
    read_config,
    save_tensor,
)


def test_round_trip_bit_exact(tmp_path, rng):
    t = rng.standard_normal((5, 7, 3)) * 1e3
    p = tmp_path / "t.hst"
    save_tensor(p, t)
    back = load_tensor(p)
    assert back.dtype == np.float64 and np.array_equal(back, t)


def test_float32_payload(tmp_path, rng):
    t = rng.standard_normal((3, 4, 2))
    p = tmp_path / "f.hst"
    save_tensor(p, t, dtype="float32")
    assert p.stat().st_size == 17 + 24 * 4
    assert np.array_equal(load_tensor(p), t.astype(np.float32).astype(np.float64))


def test_header_size_and_layout(tmp_path):
    p = tmp_path / "one.hst"
    save_tensor(p, np.full((1, 1, 1), 2.5))
    raw = p.read_bytes()
    assert HEADER.size == 17 and len(raw) == 25
    assert raw[:4] == b"HST1"
    assert struct.unpack("<III", raw[4:16]) == (1, 1, 1) and raw[16] == 1
    t = np.arange(12.0).reshape(2, 3, 2)
    save_tensor(p, t)
    payload = np.frombuffer(p.read_bytes()[17:], "<f8")
    assert np.array_equal(payload, np.concatenate([t[:, :, 0].ravel(), t[:, :, 1].ravel()]))


def test_distinct_errors(tmp_path, rng):
    p = tmp_path / "t.hst"
    save_tensor(p, rng.standard_normal((4, 4, 2)))
    raw = p.read_bytes()
    bad = tmp_path / "bad.hst"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(BadMagicError):
        load_tensor(bad)
    bad.write_bytes(raw[:-1])
    with pytest.raises(TruncatedError):
        load_tensor(bad)
    bad.write_bytes(raw[:12])
    with pytest.raises(TruncatedError):
        load_tensor(bad)
    bad.write_bytes(HEADER.pack(b"HST1", 0, 4, 2, 1) + raw[17:])
    with pytest.raises(DimensionError):
        load_tensor(bad)
    bad.write_bytes(HEADER.pack(b"HST1", 2**31, 2**31, 4, 1))
    with pytest.raises(DimensionError):
        load_tensor(bad)
    bad.write_bytes(HEADER.pack(b"HST1", 4, 4, 2, 7) + raw[17:])
    with pytest.raises(DimensionError):
        load_tensor(bad)
    assert len({BadMagicError.code, TruncatedError.code, DimensionError.code}) == 3


def test_save_rejects_bad_shapes(tmp_path):
    with pytest.raises(DimensionError):
        save_tensor(tmp_path / "x.hst", np.zeros((2, 2)))


def test_raw_import(tmp_path, rng):
    t = rng.standard_normal((3, 5, 2))
    p = tmp_path / "r.bsq"
    p.write_bytes(np.ascontiguousarray(t.transpose(2, 0, 1)).astype("<f4").tobytes())
    assert np.allclose(load_raw(p, 3, 5, 2, 0), t, atol=1e-6)
    with pytest.raises(TruncatedError):
        load_raw(p, 3, 5, 3, 0)


def test_pgm_export(tmp_path):
    t = np.full((3, 4, 2), 128.0)
    t[0, 0, 1] = 300
    t[0, 1, 1] = -5
    t[0, 2, 1] = 1.6
    paths = export_band_images(t, tmp_path / "img")
    assert len(paths) == 2
    raw = paths[0].read_bytes()
    head = b"P5\n4 3\n255\n"
    assert raw.startswith(head) and set(raw[len(head):]) == {128}
    px = np.frombuffer(paths[1].read_bytes()[len(head):], np.uint8).reshape(3, 4)
    assert px[0, 0] == 255 and px[0, 1] == 0 and px[0, 2] == 2


def test_load_matrix(tmp_path):
    p = tmp_path / "k.txt"
    p.write_text("# kernel\n1 2 3\n4 5 6\n")
    assert np.array_equal(load_matrix(p), [[1, 2, 3], [4, 5, 6]])
    p.write_text("7\n")
    assert load_matrix(p).shape == (1, 1)


def test_config_parse(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nsigma = 10\n\nstripe-fraction=0.3  # trailing\n")
    assert read_config(p) == {"sigma": "10", "stripe_fraction": "0.3"}
    with pytest.raises(ConfigError):
        read_config(p, allowed={"sigma"})
    p.write_text("novalue\n")
    with pytest.raises(ConfigError):
        read_config(p)
