import math
import struct
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecast.compression import (
    CompressedSignal,
    MaxCompressionWarning,
    WaveletCompressor,
    compress,
    compress_frame,
    compression_report,
    decode_varint,
    decompress,
    decompress_frame,
    deserialize,
    deserialize_bundle,
    encode_varint,
    keep_count,
    lossy_frame,
    measure_lossless,
    serialize,
    serialize_bundle,
    top_k,
)
from wavecast.data import SyntheticConfig, generate_synthetic
from wavecast.exceptions import CorruptionError, FormatError, InvalidRateError
from wavecast.wavelet import WAVELETS, wavedec

RATES = (0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999)


@pytest.fixture(scope="module")
def frame():
    return generate_synthetic(SyntheticConfig(days=2), seed=3)[0]


def expected_zeros(total, n, rate):
    return total - min(max(keep_count(total, n, rate), 1), total)


def test_rate_zero_is_lossless(rng):
    x = rng.standard_normal(500)
    for w in WAVELETS:
        cs = compress(x, w, 0.0)
        assert len(cs.indices) == cs.total_count
        assert np.max(np.abs(decompress(cs) - x)) < 1e-9


def test_constant_haar_signal_survives_rate_09():
    x = np.full(1024, 5.0)
    cs = compress(x, "bior1.1", 0.9)
    # Haar on 1024 samples has exactly 1024 coefficients, so 102 are kept.
    assert cs.total_count == 1024
    assert len(cs.indices) == 1024 - 922
    np.testing.assert_allclose(decompress(cs), x, atol=1e-12)


def test_zero_count_for_rate_08(rng):
    x = rng.standard_normal(1000)
    for w in WAVELETS:
        cs = compress(x, w, 0.8)
        assert abs(cs.zero_count - 800) <= 1


@pytest.mark.parametrize("w", WAVELETS)
@pytest.mark.parametrize("n", [64, 1000, 7200, 14400])
def test_rate_accounting(w, n):
    x = np.random.default_rng(n).standard_normal(n)
    total = wavedec(x, w).total_count
    for r in RATES:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MaxCompressionWarning)
            cs = compress(x, w, r)
        assert cs.zero_count == expected_zeros(total, n, r)


def test_achieved_rate_within_one_sample(rng):
    x = rng.standard_normal(2000)
    for w in WAVELETS:
        for r in RATES:
            assert abs(compress(x, w, r).achieved_rate - r) <= 1 / 2000 + 1e-15


def test_half_up_rounding():
    # 0.5 * 5 = 2.5 rounds up to 3 zeros
    assert keep_count(10, 5, 0.5) == 7


@pytest.mark.parametrize("r", [1.0, 1.5, -0.1, float("nan")])
def test_invalid_rate(r):
    with pytest.raises(InvalidRateError):
        compress(np.ones(16), "bior1.1", r)


def test_max_compression_warning():
    with pytest.warns(MaxCompressionWarning):
        cs = compress(np.arange(8.0), "bior1.1", 0.99999)
    assert len(cs.indices) >= 1


def test_top_k_tie_break():
    assert top_k(np.array([1.0, -3.0, 3.0, 2.0, -3.0]), 2).tolist() == [1, 2]


@pytest.mark.parametrize("w", WAVELETS)
def test_nested_keep_sets_and_monotone_error(w):
    x = np.cumsum(np.random.default_rng(7).standard_normal(3000))
    kept, errors = None, []
    for r in RATES:
        cs = compress(x, w, r)
        if kept is not None:
            assert set(cs.indices.tolist()) <= kept
        kept = set(cs.indices.tolist())
        errors.append(np.linalg.norm(decompress(cs) - x))
    assert all(b >= a for a, b in zip(errors, errors[1:]))


def test_gibbs_overshoot_near_step():
    x = np.where(np.arange(1024) < 512, 0.0, 1.0)
    y = decompress(compress(x, "bior6.8", 0.99))
    assert y.max() > 1.0 or y.min() < 0.0


def test_length_preserved_for_all_rates(rng):
    x = rng.standard_normal(777)
    for w in WAVELETS:
        for r in (0.0, *RATES):
            assert len(decompress(compress(x, w, r))) == 777


def test_decompress_out_of_range_index():
    cs = compress(np.arange(32.0), "bior1.1", 0.5)
    bad = CompressedSignal(cs.wavelet, cs.boundary_mode, cs.levels, cs.original_length, [10**6], [1.0])
    with pytest.raises(CorruptionError):
        decompress(bad)


def test_frame_bundle(frame):
    bundle = compress_frame(frame, "bior2.8", 0.0)
    assert len(bundle.signals) == 4
    back = decompress_frame(bundle)
    assert back.names == frame.names
    np.testing.assert_array_equal(back.timestamps, frame.timestamps)
    assert np.max(np.abs(back.to_array() - frame.to_array())) < 1e-9


def test_frame_rate_per_variable(frame):
    n = len(frame)
    for rate in compress_frame(frame, "bior3.9", 0.95).achieved_rates().values():
        assert abs(rate - 0.95) <= 1 / n


def test_lossy_frame_shape(frame):
    out = lossy_frame(frame, "bior6.8", 0.99)
    assert out.to_array().shape == frame.to_array().shape


def test_varint_examples():
    assert encode_varint(300) == b"\xac\x02"
    assert decode_varint(b"\xac\x02", 0) == (300, 2)
    with pytest.raises(FormatError):
        decode_varint(b"\x80", 0)


@given(st.integers(0, 2**63 - 1))
def test_varint_round_trip(v):
    raw = encode_varint(v)
    assert decode_varint(raw, 0) == (v, len(raw))


@given(
    w=st.sampled_from(WAVELETS),
    n=st.integers(2, 600),
    r=st.sampled_from((0.0, *RATES)),
    seed=st.integers(0, 10**6),
)
def test_serialize_round_trip(w, n, r, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MaxCompressionWarning)
        cs = compress(x, w, r)
    blob = serialize(cs)
    assert deserialize(blob) == cs
    assert serialize(deserialize(blob)) == blob


def test_empty_kept_list():
    cs = CompressedSignal("bior1.1", "symmetric", 2, 8, [], [], 0.5)
    back = deserialize(serialize(cs))
    assert back == cs
    np.testing.assert_array_equal(decompress(back), np.zeros(8))


def test_serialization_is_deterministic(rng):
    x = rng.standard_normal(100)
    assert serialize(compress(x, "bior2.8", 0.9)) == serialize(compress(x.copy(), "bior2.8", 0.9))


def test_format_errors_carry_offsets():
    blob = serialize(compress(np.arange(64.0), "bior1.1", 0.5))
    with pytest.raises(FormatError) as exc:
        deserialize(b"XXXX" + blob[4:])
    assert exc.value.offset == 0
    with pytest.raises(FormatError) as exc:
        deserialize(blob[:4] + b"\x09" + blob[5:])
    assert exc.value.offset == 4
    with pytest.raises(FormatError):
        deserialize(blob[:-3])
    with pytest.raises(FormatError):
        deserialize(blob + b"\x00")


def test_bundle_round_trip(frame):
    bundle = compress_frame(frame, "bior1.5", 0.9)
    blob = serialize_bundle(bundle)
    back = deserialize_bundle(blob)
    assert back == bundle
    assert serialize_bundle(back) == blob
    with pytest.raises(FormatError):
        deserialize_bundle(blob[:-1])


def test_bundle_header_layout(frame):
    blob = serialize_bundle(compress_frame(frame, "bior1.1", 0.5))
    magic, version, count, step, start = struct.unpack_from("<4sBBIq", blob)
    assert (magic, version, count, step, start) == (b"WVB1", 1, 4, 60, int(frame.timestamps[0]))


def test_lossless_on_zeros():
    m = measure_lossless(bytes(1 << 20))
    assert m.available and m.rate > 0.99


def test_lossless_on_random_floats(rng):
    m = measure_lossless(rng.standard_normal(20000).tobytes())
    assert m.rate < 0.1


def test_lossless_expansion_warns():
    with pytest.warns(UserWarning, match="expanded"):
        m = measure_lossless(b"abc", codec=lambda data: data + b"xx")
    assert m.available and m.rate < 0


def test_lossless_missing_codec(monkeypatch):
    from wavecast.compression import lossless

    monkeypatch.setattr(lossless, "brotli_codec", lambda quality=11: None)
    m = measure_lossless(b"abc")
    assert not m.available and m.rate is None


def test_compression_report(frame):
    rep = compression_report([frame], ["bior1.1"], [0.9]).to_dict()
    assert rep["reference_lossless_rate"] == 0.36
    entry = rep["bytes_lossy"][0]
    assert entry["bytes"] < rep["bytes_raw"]


def test_compressor_estimator(rng):
    from sklearn.base import clone

    X = rng.standard_normal((256, 3))
    est = WaveletCompressor("bior2.8", 0.0)
    np.testing.assert_allclose(est.fit_transform(X), X, atol=1e-9)
    lossy = clone(est).set_params(rate=0.9).fit(X)
    out = lossy.transform(X)
    assert out.shape == X.shape
    assert np.all(np.abs(lossy.achieved_rates_ - 0.9) <= 1 / 256)
    assert math.isclose(est.get_params()["rate"], 0.0)
