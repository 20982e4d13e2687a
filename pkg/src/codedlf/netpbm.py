"""Binary netpbm I/O: PGM (P5) images and PBM (P4) bit planes.

PBM bits store mask transmittance directly (1 = light passes), which is the
inverse of the netpbm "1 is black" display convention.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError
from .lf_core import CodedImage, CodingMask

CODED_MAXVAL = 510  # coded values span [0, 2] in steps of 1/255


def _read_header(buf: bytes, pos: int, nfields: int) -> tuple[list[bytes], int]:
    fields = []
    n = len(buf)
    while len(fields) < nfields:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated netpbm header")
        fields.append(buf[start:pos])
    # exactly one whitespace byte separates header and raster
    return fields, pos + 1


def _encode_pgm(levels: np.ndarray, maxval: int) -> bytes:
    H, W = levels.shape
    header = f"P5\n{W} {H}\n{maxval}\n".encode("ascii")
    dtype = np.uint8 if maxval < 256 else ">u2"
    return header + levels.astype(dtype).tobytes()


def read_pgm_levels(path) -> tuple[np.ndarray, int]:
    """Integer sample values and maxval of a P5 file."""
    buf = Path(path).read_bytes()
    fields, pos = _read_header(buf, 0, 4)
    if fields[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        W, H, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if not 0 < maxval < 65536 or W < 1 or H < 1:
        raise FormatError(f"{path}: invalid PGM header values")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    need = W * H * dtype.itemsize
    raster = buf[pos : pos + need]
    if len(raster) != need:
        raise FormatError(f"{path}: truncated PGM raster")
    levels = np.frombuffer(raster, dtype=dtype).reshape(H, W).astype(np.int64)
    if levels.max(initial=0) > maxval:
        raise FormatError(f"{path}: sample exceeds maxval")
    return levels, maxval


def write_pgm(path, image, maxval: int = 255) -> None:
    """Write a [0, 1] image, quantized to ``maxval`` levels."""
    img = np.asarray(image, dtype=np.float64)
    levels = np.clip(np.rint(img * maxval), 0, maxval)
    Path(path).write_bytes(_encode_pgm(levels, maxval))


def read_pgm(path) -> np.ndarray:
    """Read a P5 file as float intensities ``level / maxval``."""
    levels, maxval = read_pgm_levels(path)
    return levels / float(maxval)


def write_coded(path, ci: CodedImage) -> None:
    """Store a coded image in [0, 2] losslessly when views were 8-bit.

    Values are written as ``round(CI * 255)`` with maxval 510, so the file
    reads as ``CI / 2`` under the usual netpbm normalization.
    """
    img = ci.image if isinstance(ci, CodedImage) else np.asarray(ci, dtype=np.float64)
    levels = np.clip(np.rint(img * 255.0), 0, CODED_MAXVAL)
    Path(path).write_bytes(_encode_pgm(levels, CODED_MAXVAL))


def read_coded(path, mask_id: str = "") -> CodedImage:
    levels, maxval = read_pgm_levels(path)
    if maxval == CODED_MAXVAL:
        img = levels / 255.0
    else:
        # plain 8-bit coded image: already normalized to [0, 1]
        img = levels / float(maxval)
    return CodedImage(image=img, mask_id=mask_id)


def encode_pbm(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8)
    H, W = bits.shape
    packed = np.packbits(bits, axis=1)
    return f"P4\n{W} {H}\n".encode("ascii") + packed.tobytes()


def decode_pbm_stream(buf: bytes) -> list[np.ndarray]:
    """All P4 images in a (possibly multi-image) byte stream."""
    out = []
    pos = 0
    while True:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(buf):
            break
        fields, pos = _read_header(buf, pos, 3)
        if fields[0] != b"P4":
            raise FormatError(f"not a binary PBM (magic {fields[0]!r})")
        W, H = int(fields[1]), int(fields[2])
        row_bytes = (W + 7) // 8
        need = row_bytes * H
        raster = buf[pos : pos + need]
        if len(raster) != need:
            raise FormatError("truncated PBM raster")
        rows = np.frombuffer(raster, dtype=np.uint8).reshape(H, row_bytes)
        out.append(np.unpackbits(rows, axis=1)[:, :W].copy())
        pos += need
    return out


def write_mask(directory, mask: CodingMask, stem: str = "mask") -> None:
    """``<stem>.pbm`` holds phi0 then phi1; ``<stem>.json`` the parameters."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{stem}.pbm").write_bytes(encode_pbm(mask.phi0) + encode_pbm(mask.phi1))
    (directory / f"{stem}.json").write_text(json.dumps(mask.sidecar(), indent=2, sort_keys=True) + "\n")


def read_mask(path, stem: str = "mask") -> CodingMask:
    """Load a mask from a directory or from its ``.json``/``.pbm`` path."""
    path = Path(path)
    if path.is_dir():
        pbm, meta = path / f"{stem}.pbm", path / f"{stem}.json"
    else:
        pbm, meta = path.with_suffix(".pbm"), path.with_suffix(".json")
    planes = decode_pbm_stream(pbm.read_bytes())
    if len(planes) != 2:
        raise FormatError(f"{pbm}: expected 2 mask planes, found {len(planes)}")
    side = json.loads(meta.read_text()) if meta.exists() else {}
    return CodingMask(
        phi0=planes[0],
        phi1=planes[1],
        mode=side.get("mode", "independent"),
        shift_px=int(side.get("shift_px", 0)),
        transmittance=float(side.get("transmittance", 0.5)),
        seed=int(side.get("seed", 0)),
    )
