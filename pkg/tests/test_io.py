"""File formats: point CSV/binary, coreset CSV, sketch bundles."""

from fractions import Fraction

import numpy as np
import pytest

from detclust.dimreduce import cost_preserving_sketch
from detclust.errors import InputError
from detclust.geometry import (
    ClusteringParams,
    ExtendedPointSet,
    WeightedPointSet,
    center_grid,
)
from detclust.io import (
    PointFileHeader,
    read_coreset,
    read_points,
    read_sketch,
    write_coreset,
    write_points,
    write_sketch,
)
from detclust.linmap import pair_distortions
from detclust.rings import ring_coreset, verify_offset_coreset


def test_header_line_round_trip():
    h = PointFileHeader(dim=5, count=-1, weighted=True, ext=False)
    assert PointFileHeader.from_line(h.to_line()) == h
    parsed = PointFileHeader.from_line("# dim=2 weighted=0 ext=0")
    assert parsed.dim == 2 and not parsed.weighted and not parsed.ext
    assert parsed.row_width == 2


def test_header_bytes_round_trip():
    h = PointFileHeader(dim=3, count=17, weighted=False, ext=True)
    back, off = PointFileHeader.from_bytes(h.to_bytes())
    assert back == h
    assert off == len(h.to_bytes())
    with pytest.raises(InputError):
        PointFileHeader.from_bytes(b"NOTDCL" + b"\x00" * 14)


def test_header_line_rejects_garbage():
    for bad in (
        "dim=2 weighted=0 ext=0",
        "# dim=2 weighted=0",
        "# dim=2 weighted=0 ext=0 extra=1",
        "# dim=x weighted=0 ext=0",
        "# dim=2 weighted=2 ext=0",
    ):
        with pytest.raises(InputError):
            PointFileHeader.from_line(bad)


def test_minimal_csv_reads_one_unit_point(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("# dim=2 weighted=0 ext=0\n1.0,2.0\n")
    ps = read_points(f)
    assert isinstance(ps, WeightedPointSet)
    assert np.array_equal(ps.points, [[1.0, 2.0]])
    assert np.array_equal(ps.weights, [1.0])


def test_csv_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(4)
    pts = rng.standard_normal((25, 3)) * 1e3
    f = tmp_path / "p.csv"
    write_points(pts, f)
    back = read_points(f)
    assert back.points.tobytes() == pts.tobytes()
    assert (back.weights == 1.0).all()


def test_weighted_and_extended_round_trips(tmp_path):
    rng = np.random.default_rng(7)
    pts = rng.standard_normal((12, 2))
    w = rng.uniform(0.5, 4.0, 12)
    e = rng.uniform(0.0, 2.0, 12)
    fw = tmp_path / "w.csv"
    write_points(WeightedPointSet(pts, w), fw)
    bw = read_points(fw)
    assert isinstance(bw, WeightedPointSet)
    assert bw.points.tobytes() == pts.tobytes()
    assert bw.weights.tobytes() == w.tobytes()
    fe = tmp_path / "e.csv"
    write_points(ExtendedPointSet(pts, extensions=e, weights=w), fe)
    be = read_points(fe)
    assert isinstance(be, ExtendedPointSet)
    assert be.points.tobytes() == pts.tobytes()
    assert be.extensions.tobytes() == e.tobytes()
    assert be.weights.tobytes() == w.tobytes()


def test_binary_round_trip_and_cross_format(tmp_path):
    rng = np.random.default_rng(9)
    pts = rng.standard_normal((30, 4))
    w = rng.uniform(1.0, 3.0, 30)
    fb = tmp_path / "p.bin"
    fc = tmp_path / "p.csv"
    write_points((pts, w), fb, binary=True)
    write_points((pts, w), fc)
    b = read_points(fb)
    c = read_points(fc)
    assert b.points.tobytes() == c.points.tobytes() == pts.tobytes()
    assert b.weights.tobytes() == c.weights.tobytes() == w.tobytes()


def test_unit_weights_stored_unweighted(tmp_path):
    pts = np.array([[0.0, 1.0], [2.0, 3.0]])
    f = tmp_path / "u.csv"
    write_points(WeightedPointSet(pts, np.ones(2)), f)
    assert "weighted=0" in f.read_text().splitlines()[0]


def test_csv_errors_name_the_line(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("# dim=2 weighted=0 ext=0\n1.0,2.0\n3.0,nan\n")
    with pytest.raises(InputError, match="line 3"):
        read_points(f)
    f.write_text("# dim=2 weighted=0 ext=0\n1.0,2.0,9.0\n")
    with pytest.raises(InputError, match="line 2"):
        read_points(f)
    f.write_text("# dim=2 weighted=0 ext=0\n1.0,zork\n")
    with pytest.raises(InputError, match="line 2"):
        read_points(f)
    f.write_text("# dim=2 weighted=0 ext=0\ninf,2.0\n")
    with pytest.raises(InputError, match="line 2"):
        read_points(f)
    f.write_text("")
    with pytest.raises(InputError, match="line 1"):
        read_points(f)
    f.write_text("# dim=2 weighted=0 ext=0\n")
    with pytest.raises(InputError, match="no points"):
        read_points(f)


def test_binary_payload_length_checked(tmp_path):
    f = tmp_path / "t.bin"
    h = PointFileHeader(dim=2, count=3, weighted=False, ext=False)
    f.write_bytes(h.to_bytes() + b"\x00" * 40)  # 3*2*8 = 48 expected
    with pytest.raises(InputError, match="header implies"):
        read_points(f)


def blob_instance():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((40, 2)) * 0.8
    b = rng.standard_normal((40, 2)) * 0.8 + [6.0, 0.0]
    return np.vstack([a, b])


def test_coreset_round_trip_preserves_verification(tmp_path):
    pts = blob_instance()
    params = ClusteringParams(k=2, z=2, epsilon=0.3)
    core = ring_coreset(pts, params, alpha=2.0)
    f = tmp_path / "core.csv"
    write_coreset(core, params, f)
    back, bparams = read_coreset(f)
    assert bparams == params
    assert back.points.tobytes() == core.points.tobytes()
    assert np.array_equal(back.weight_num, core.weight_num)
    assert np.array_equal(back.weight_den, core.weight_den)
    assert back.offset == core.offset
    assert back.total_weight == Fraction(pts.shape[0])
    grid = center_grid(pts, per_axis=3)
    a = verify_offset_coreset(pts, core, params, grid)
    b = verify_offset_coreset(pts, back, params, grid)
    assert a.max_relative_error == b.max_relative_error  # bit-exact replay
    assert a.checked == b.checked


def test_coreset_header_hex_offset(tmp_path):
    pts = blob_instance()
    params = ClusteringParams(k=2, z=2, epsilon=0.3)
    core = ring_coreset(pts, params, alpha=2.0)
    assert core.offset == 0.0
    f = tmp_path / "core.csv"
    write_coreset(core, params, f)
    head = f.read_text().splitlines()[0]
    ftok = [t for t in head.split() if t.startswith("F=")][0]
    assert float.fromhex(ftok[2:]) == 0.0


def test_coreset_file_errors(tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("# dim=2 F=0x0.0p+0 k=2 z=2 eps=0.3\n1.0,2.0\n")
    with pytest.raises(InputError, match="line 2"):
        read_coreset(f)  # missing weight column
    f.write_text("# dim=2 k=2 z=2 eps=0.3\n")
    with pytest.raises(InputError, match="header"):
        read_coreset(f)
    f.write_text("# dim=2 F=0x0.0p+0 k=2 z=2 eps=0.3\n")
    with pytest.raises(InputError, match="no rows"):
        read_coreset(f)


def test_sketch_bundle_round_trip(tmp_path):
    # ten distinct locations duplicated in d=30 so the net stays in budget
    rng = np.random.default_rng(13)
    locs = rng.standard_normal((10, 30)) * 3.0
    pts = np.repeat(locs, 3, axis=0)
    params = ClusteringParams(k=2, z=2, epsilon=0.3)
    sk = cost_preserving_sketch(pts, params)
    net = sk.coreset.representatives
    f = tmp_path / "sk.json"
    write_sketch(sk.map, net, params, f)
    lin, bnet, bparams = read_sketch(f)
    assert bparams == params
    assert lin.matrix.tobytes() == sk.map.matrix.tobytes()
    assert bnet.tobytes() == np.asarray(net, dtype=np.float64).tobytes()
    assert lin.certificate == sk.map.certificate
    assert lin.eps == sk.map.eps
    a = pair_distortions(sk.map, net)
    b = pair_distortions(lin, bnet)
    assert a == b
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "other"}')
    with pytest.raises(InputError, match="sketch"):
        read_sketch(bad)
