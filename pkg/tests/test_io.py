import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pskg import io as pio
from pskg.analysis import PatternSeries
from pskg.generator import EdgeList
from pskg.initiator import InitiatorMatrix, derive_marginals
from pskg.partition import compute_partition, uniform_partition

from conftest import SPLIT_ROWS

SPLIT_MARG = derive_marginals(InitiatorMatrix(SPLIT_ROWS))


@st.composite
def edge_lists(draw):
    N = draw(st.one_of(st.integers(1, 50), st.integers(2**40, 2**64 - 1)))
    pairs = draw(st.lists(st.tuples(st.integers(0, N - 1), st.integers(0, N - 1)), max_size=50))
    return EdgeList.from_pairs(N, pairs)


def test_tsv_single_edge():
    out = pio.write_edge_list(EdgeList.from_pairs(2, [(0, 1)]), "tsv")
    assert out.startswith(b"#") and out.endswith(b"\n0\t1\n")
    body = [l for l in out.decode().splitlines() if not l.startswith("#")]
    assert body == ["0\t1"]


@pytest.mark.parametrize("fmt", pio.EDGE_FORMATS)
def test_empty_list_header_only(fmt):
    g = EdgeList(8, [], [])
    out = pio.write_edge_list(g, fmt)
    if fmt == "tsv":
        assert all(l.startswith("#") for l in out.decode().splitlines())
    else:
        assert len(out) == 21
    assert pio.read_edge_list(out) == g


def test_tsv_meta_in_header():
    meta = {"model": "pskg", "k": 3, "seed": 9}
    out = pio.write_edge_list(EdgeList.from_pairs(8, [(1, 2)]), "tsv", meta)
    h = pio.read_header(out)
    assert h["model"] == "pskg" and h["seed"] == "9" and h["n_vertices"] == "8"


def test_binary_layout():
    out = pio.write_edge_list(EdgeList.from_pairs(5, [(1, 4)]), "binary")
    assert out[:5] == b"PSKG\x01"
    assert int.from_bytes(out[5:13], "little") == 5
    assert int.from_bytes(out[13:21], "little") == 1
    assert np.frombuffer(out[21:], "<u8").tolist() == [1, 4]


def test_binary_million_edges_roundtrip():
    rng = np.random.default_rng(0)
    N = 2**20
    g = EdgeList(N, rng.integers(0, N, 10**6), rng.integers(0, N, 10**6))
    out = pio.write_edge_list(g, "binary")
    back = pio.read_edge_list(out)
    assert back == g
    assert pio.write_edge_list(back, "binary") == out


def test_truncated_binary():
    out = pio.write_edge_list(EdgeList.from_pairs(4, [(0, 1), (2, 3)]), "binary")
    for cut in (3, 10, len(out) - 1):
        with pytest.raises(pio.FormatError, match="truncated"):
            pio.read_edge_list(out[:cut], "binary")
    with pytest.raises(pio.FormatError, match="trailing"):
        pio.read_edge_list(out + b"\0", "binary")


def test_bad_magic():
    out = bytearray(pio.write_edge_list(EdgeList.from_pairs(4, [(0, 1)]), "binary"))
    out[0:4] = b"XXXX"
    with pytest.raises(pio.FormatError, match="magic"):
        pio.read_edge_list(bytes(out), "binary")


def test_binary_id_out_of_range():
    out = bytearray(pio.write_edge_list(EdgeList.from_pairs(4, [(0, 3)]), "binary"))
    out[5:13] = (3).to_bytes(8, "little")
    with pytest.raises(pio.FormatError, match="n_vertices"):
        pio.read_edge_list(bytes(out))


def test_tsv_non_numeric_names_line():
    data = b"# pskg edge list\n# n_vertices: 4\n0\t1\na\tb\n"
    with pytest.raises(pio.FormatError, match="line 4"):
        pio.read_edge_list(data)


def test_tsv_errors():
    with pytest.raises(pio.FormatError, match="line 2"):
        pio.read_edge_list(b"# n_vertices: 4\n0\t9\n")
    with pytest.raises(pio.FormatError, match="2 tab-separated"):
        pio.read_edge_list(b"0 1\n")


def test_tsv_without_header_infers_N():
    g = pio.read_edge_list(b"0\t5\n2\t1\n")
    assert g.n_vertices == 6 and g.pairs() == [(0, 5), (2, 1)]


@settings(max_examples=100, deadline=None)
@given(g=edge_lists(), fmt=st.sampled_from(pio.EDGE_FORMATS))
def test_edge_list_roundtrip(g, fmt):
    out = pio.write_edge_list(g, fmt)
    back = pio.read_edge_list(out)
    assert back == g
    assert pio.write_edge_list(back, fmt) == out


def test_series_empty_header_only():
    assert pio.write_series_csv(PatternSeries("hop", [], [])) == b"x,y\n"
    assert len(pio.read_series_csv(b"x,y\n", "hop").x) == 0


floats = st.floats(0, 1e12, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(xs=st.lists(floats, unique=True, max_size=30), data=st.data())
def test_series_roundtrip(xs, data):
    xs = sorted(xs)
    ys = data.draw(st.lists(floats, min_size=len(xs), max_size=len(xs)))
    s = PatternSeries("degree", xs, ys)
    out = pio.write_series_csv(s)
    back = pio.read_series_csv(out, "degree")
    assert back == s
    assert pio.write_series_csv(back) == out


def test_series_bad_rows():
    with pytest.raises(pio.FormatError):
        pio.read_series_csv(b"a,b\n1,2\n", "hop")
    with pytest.raises(pio.FormatError, match="line 3"):
        pio.read_series_csv(b"x,y\n1,2\n3\n", "hop")


def test_split_partition_table(split_marg):
    out = pio.write_partition_table(compute_partition(split_marg, 3, 4))
    rows = [l.split("\t")[:3] for l in out.decode().splitlines()]
    assert rows == [["0", "0", "1"], ["1", "1", "3"], ["2", "3", "5"], ["3", "5", "8"]]


@settings(max_examples=100, deadline=None)
@given(n_workers=st.integers(1, 64), k=st.integers(1, 10), uniform=st.booleans())
def test_partition_table_roundtrip(n_workers, k, uniform):
    make = uniform_partition if uniform else compute_partition
    t = make(SPLIT_MARG, k, min(n_workers, 2**k))
    out = pio.write_partition_table(t)
    assert pio.read_partition_table(out) == t
    assert pio.write_partition_table(t) == out


def test_partition_table_errors():
    with pytest.raises(pio.FormatError, match="out of order"):
        pio.read_partition_table(b"1\t0\t4\t1.0\n")
    with pytest.raises(pio.FormatError, match="line 1"):
        pio.read_partition_table(b"0\t0\n")
