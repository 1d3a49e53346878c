"""Point, coreset, and sketch file formats.

Two point formats share one header model:

* CSV: a comment header ``# dim=<d> weighted=<0|1> ext=<0|1>`` followed by
  comma-separated rows (base coordinates, then the extension column when
  ext=1, then the weight column when weighted=1). Coordinates are written
  with shortest round-trip decimals, so write -> read is bit-identical.
* binary: magic ``DCLUS1``, little-endian header (dim u32, count u64,
  weighted u8, ext u8), then row-major little-endian float64 payload.

Coreset files are CSV with exact integer-ratio weights and a hex-float
offset scalar, so verification replays bit-exactly. Sketch bundles are
JSON with every float hex-encoded.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geometry import ClusteringParams, ExtendedPointSet, WeightedPointSet
from .linmap import LinearMap
from .rings import OffsetCoreset

MAGIC = b"DCLUS1"
_BIN_HEADER = struct.Struct("<IQBB")


@dataclass(frozen=True)
class PointFileHeader:
    """Shared header for both point formats. count is -1 when the format
    leaves it implicit (CSV infers it from the rows)."""

    dim: int
    count: int
    weighted: bool
    ext: bool

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("header dim must be positive")

    def to_line(self):
        return f"# dim={self.dim} weighted={int(self.weighted)} ext={int(self.ext)}"

    @classmethod
    def from_line(cls, line):
        parts = line.strip().split()
        fields = {}
        if not parts or parts[0] != "#":
            raise InputError("line 1: malformed header, expected '# dim=... weighted=... ext=...'")
        for tok in parts[1:]:
            key, _, val = tok.partition("=")
            if not val or key in fields:
                raise InputError(f"line 1: malformed header field {tok!r}")
            fields[key] = val
        if set(fields) != {"dim", "weighted", "ext"}:
            raise InputError("line 1: header must define exactly dim, weighted, ext")
        try:
            dim = int(fields["dim"])
            weighted = int(fields["weighted"])
            ext = int(fields["ext"])
        except ValueError:
            raise InputError("line 1: header fields must be integers") from None
        if weighted not in (0, 1) or ext not in (0, 1):
            raise InputError("line 1: weighted and ext flags must be 0 or 1")
        return cls(dim=dim, count=-1, weighted=bool(weighted), ext=bool(ext))

    def to_bytes(self):
        if self.count < 0:
            raise InputError("binary header needs an explicit count")
        return MAGIC + _BIN_HEADER.pack(self.dim, self.count, int(self.weighted), int(self.ext))

    @classmethod
    def from_bytes(cls, buf):
        head = len(MAGIC) + _BIN_HEADER.size
        if len(buf) < head or buf[: len(MAGIC)] != MAGIC:
            raise InputError("malformed binary header (bad magic)")
        dim, count, weighted, ext = _BIN_HEADER.unpack(buf[len(MAGIC) : head])
        if weighted not in (0, 1) or ext not in (0, 1):
            raise InputError("malformed binary header (bad flags)")
        return cls(dim=dim, count=count, weighted=bool(weighted), ext=bool(ext)), head

    @property
    def row_width(self):
        return self.dim + int(self.ext) + int(self.weighted)


def _split_columns(header, rows):
    d = header.dim
    base = rows[:, :d]
    col = d
    extensions = None
    weights = None
    if header.ext:
        extensions = rows[:, col]
        col += 1
    if header.weighted:
        weights = rows[:, col]
    if header.ext:
        return ExtendedPointSet(base, extensions=extensions, weights=weights)
    if header.weighted:
        return WeightedPointSet(base, weights)
    return WeightedPointSet(base)


def _read_csv_points(path):
    rows = []
    header = None
    with open(path, "r", encoding="ascii") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if ln == 1:
                header = PointFileHeader.from_line(line)
                continue
            if not line:
                continue
            toks = line.split(",")
            if len(toks) != header.row_width:
                raise InputError(
                    f"line {ln}: expected {header.row_width} values, got {len(toks)}"
                )
            try:
                vals = [float(t) for t in toks]
            except ValueError:
                raise InputError(f"line {ln}: unparseable number") from None
            if not all(np.isfinite(vals)):
                raise InputError(f"line {ln}: non-finite value")
            rows.append(vals)
    if header is None:
        raise InputError("line 1: empty file")
    if not rows:
        raise InputError("file contains no points")
    return _split_columns(header, np.array(rows, dtype=np.float64))


def _read_binary_points(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    header, off = PointFileHeader.from_bytes(buf)
    expect = header.count * header.row_width * 8
    if len(buf) - off != expect:
        raise InputError(
            f"binary payload is {len(buf) - off} bytes, header implies {expect}"
        )
    flat = np.frombuffer(buf, dtype="<f8", offset=off).astype(np.float64)
    rows = flat.reshape(header.count, header.row_width)
    bad = np.flatnonzero(~np.isfinite(rows).all(axis=1))
    if bad.size:
        raise InputError(f"row {int(bad[0])}: non-finite value")
    if header.count == 0:
        raise InputError("file contains no points")
    return _split_columns(header, rows)


def read_points(path):
    """Parse a CSV or binary point file into a point set.

    Returns an ExtendedPointSet when the header sets ext=1, otherwise a
    WeightedPointSet (unit weights unless weighted=1).
    """
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return _read_binary_points(path)
    return _read_csv_points(path)


def _normalize_pointset(data):
    if isinstance(data, ExtendedPointSet):
        return data.points, data.extensions, data.weights
    if isinstance(data, WeightedPointSet):
        return data.points, None, data.weights
    if isinstance(data, tuple) and len(data) == 2:
        ws = WeightedPointSet(data[0], data[1])
        return ws.points, None, ws.weights
    ws = WeightedPointSet(np.asarray(data, dtype=np.float64))
    return ws.points, None, ws.weights


def write_points(data, path, *, binary=False):
    """Write a point set (array, (points, weights), WeightedPointSet, or
    ExtendedPointSet). All-unit weights are stored as weighted=0."""
    pts, extensions, weights = _normalize_pointset(data)
    weighted = weights is not None and not (weights == 1.0).all()
    cols = [pts]
    if extensions is not None:
        cols.append(extensions[:, None])
    if weighted:
        cols.append(weights[:, None])
    rows = np.hstack(cols)
    header = PointFileHeader(
        dim=pts.shape[1],
        count=pts.shape[0],
        weighted=bool(weighted),
        ext=extensions is not None,
    )
    if binary:
        with open(path, "wb") as fh:
            fh.write(header.to_bytes())
            fh.write(rows.astype("<f8").tobytes(order="C"))
        return
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header.to_line() + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_coreset(core, params, path):
    """Coreset CSV: hex-float offset in the header, exact a/b weights per
    row, shortest round-trip coordinates."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(
            f"# dim={core.points.shape[1]} F={float(core.offset).hex()}"
            f" k={params.k} z={params.z} eps={repr(float(params.epsilon))}\n"
        )
        for row, num, den in zip(core.points, core.weight_num, core.weight_den):
            coords = ",".join(repr(float(v)) for v in row)
            fh.write(f"{coords},{int(num)}/{int(den)}\n")


def read_coreset(path):
    """Inverse of write_coreset. Returns (OffsetCoreset, ClusteringParams);
    row provenance is rebuilt as ("file", i)."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError("line 1: empty file")
    parts = lines[0].split()
    if not parts or parts[0] != "#":
        raise InputError("line 1: malformed coreset header")
    fields = {}
    for tok in parts[1:]:
        key, _, val = tok.partition("=")
        if not val or key in fields:
            raise InputError(f"line 1: malformed header field {tok!r}")
        fields[key] = val
    if set(fields) != {"dim", "F", "k", "z", "eps"}:
        raise InputError("line 1: coreset header must define dim, F, k, z, eps")
    try:
        dim = int(fields["dim"])
        offset = float.fromhex(fields["F"])
        params = ClusteringParams(
            k=int(fields["k"]), z=int(fields["z"]), epsilon=float(fields["eps"])
        )
    except ValueError:
        raise InputError("line 1: malformed coreset header value") from None
    pts, nums, dens = [], [], []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        if len(toks) != dim + 1:
            raise InputError(f"line {ln}: expected {dim + 1} values, got {len(toks)}")
        try:
            coords = [float(t) for t in toks[:-1]]
            num, _, den = toks[-1].partition("/")
            w = (int(num), int(den) if den else 1)
        except ValueError:
            raise InputError(f"line {ln}: unparseable value") from None
        if not all(np.isfinite(coords)):
            raise InputError(f"line {ln}: non-finite coordinate")
        pts.append(coords)
        nums.append(w[0])
        dens.append(w[1])
    if not pts:
        raise InputError("coreset file contains no rows")
    core = OffsetCoreset(
        points=np.array(pts, dtype=np.float64),
        weight_num=np.array(nums, dtype=np.int64),
        weight_den=np.array(dens, dtype=np.int64),
        offset=offset,
        provenance=tuple(("file", i) for i in range(len(pts))),
    )
    return core, params


def _hex_tree(value):
    if isinstance(value, float):
        return float(value).hex()
    if isinstance(value, (np.floating,)):
        return float(value).hex()
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, str):
        return value
    raise InputError(f"cannot serialize certificate value {value!r}")


def _unhex_tree(value):
    if isinstance(value, str) and value.startswith(("0x", "-0x")):
        return float.fromhex(value)
    return value


def write_sketch(lin, net_points, params, path):
    """Sketch bundle JSON: the map matrix, its distortion certificate, and
    the witness-net rows it was certified on, all floats hex-encoded."""
    net = np.asarray(net_points, dtype=np.float64)
    doc = {
        "format": "dclus-sketch-1",
        "k": params.k,
        "z": params.z,
        "eps": float(params.epsilon).hex(),
        "map_eps": None if lin.eps is None else float(lin.eps).hex(),
        "rows": int(lin.m),
        "cols": int(lin.d),
        "matrix": [float(v).hex() for v in lin.matrix.ravel(order="C")],
        "certificate": None
        if lin.certificate is None
        else {k: _hex_tree(v) for k, v in lin.certificate.items()},
        "net": [[float(v).hex() for v in row] for row in net],
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_sketch(path):
    """Inverse of write_sketch: (LinearMap, net array, ClusteringParams)."""
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != "dclus-sketch-1":
        raise InputError("not a sketch bundle")
    try:
        m, d = int(doc["rows"]), int(doc["cols"])
        matrix = np.array(
            [float.fromhex(v) for v in doc["matrix"]], dtype=np.float64
        ).reshape(m, d)
        eps = float.fromhex(doc["eps"])
        params = ClusteringParams(k=int(doc["k"]), z=int(doc["z"]), epsilon=eps)
        map_eps = doc["map_eps"]
        if map_eps is not None:
            map_eps = float.fromhex(map_eps)
        cert = doc["certificate"]
        if cert is not None:
            cert = {k: _unhex_tree(v) for k, v in cert.items()}
        net = np.array(
            [[float.fromhex(v) for v in row] for row in doc["net"]],
            dtype=np.float64,
        )
    except (KeyError, ValueError, TypeError):
        raise InputError("malformed sketch bundle") from None
    lin = LinearMap(matrix, eps=map_eps, certificate=cert)
    return lin, net, params
