"""Image file I/O: float32 EXR (lossless), Radiance HDR, 8-bit PNG.

All in-memory images are numpy arrays of shape (H, W, 3), RGB channel
order, row-major. EXR support is a minimal self-contained codec for
uncompressed float32 RGB scanline files: round trips are bit-exact,
which the light-basis files require. Radiance HDR goes through OpenCV
(shared-exponent RGBE, lossy at the ~0.5% level, fine for environment
maps). PNG is 8-bit and used for display-referred images in [0, 1].
"""

from __future__ import annotations

import struct
from pathlib import Path

import cv2
import numpy as np

_EXR_MAGIC = b"\x76\x2f\x31\x01"
_PT_FLOAT = 2  # pixel type tag for 32-bit float channels


def _exr_attr(name: str, type_name: str, payload: bytes) -> bytes:
    return name.encode() + b"\0" + type_name.encode() + b"\0" + struct.pack("<i", len(payload)) + payload


def _exr_channel(name: str) -> bytes:
    # name, pixel type, pLinear + 3 reserved, xSampling, ySampling
    return name.encode() + b"\0" + struct.pack("<iBBBBii", _PT_FLOAT, 0, 0, 0, 0, 1, 1)


def save_exr(path: str | Path, image: np.ndarray) -> None:
    """Write an uncompressed float32 RGB scanline EXR."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got {image.shape}")
    img = np.ascontiguousarray(image, dtype=np.float32)
    h, w = img.shape[:2]

    box = struct.pack("<iiii", 0, 0, w - 1, h - 1)
    header = b"".join(
        [
            _EXR_MAGIC,
            struct.pack("<i", 2),  # version 2, no extended flags
            _exr_attr("channels", "chlist", _exr_channel("B") + _exr_channel("G") + _exr_channel("R") + b"\0"),
            _exr_attr("compression", "compression", b"\0"),
            _exr_attr("dataWindow", "box2i", box),
            _exr_attr("displayWindow", "box2i", box),
            _exr_attr("lineOrder", "lineOrder", b"\0"),
            _exr_attr("pixelAspectRatio", "float", struct.pack("<f", 1.0)),
            _exr_attr("screenWindowCenter", "v2f", struct.pack("<ff", 0.0, 0.0)),
            _exr_attr("screenWindowWidth", "float", struct.pack("<f", 1.0)),
            b"\0",
        ]
    )

    row_bytes = 3 * 4 * w
    block_size = 8 + row_bytes  # y + size prefix per scanline block
    first = len(header) + 8 * h
    offsets = struct.pack("<" + "Q" * h, *(first + y * block_size for y in range(h)))

    blocks = bytearray()
    for y in range(h):
        blocks += struct.pack("<ii", y, row_bytes)
        # channels stored alphabetically: B, G, R; planar within the scanline
        blocks += img[y, :, 2].tobytes()
        blocks += img[y, :, 1].tobytes()
        blocks += img[y, :, 0].tobytes()

    from .util import atomic_write_bytes

    atomic_write_bytes(path, header + offsets + bytes(blocks))


def load_exr(path: str | Path) -> np.ndarray:
    """Read an EXR written by :func:`save_exr` (uncompressed float32 RGB)."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != _EXR_MAGIC:
        raise ValueError(f"{path}: not an EXR file")
    pos = 8

    def read_cstr() -> str:
        nonlocal pos
        end = data.index(b"\0", pos)
        s = data[pos:end].decode()
        pos = end + 1
        return s

    attrs: dict[str, tuple[str, bytes]] = {}
    while data[pos] != 0:
        name = read_cstr()
        type_name = read_cstr()
        (size,) = struct.unpack_from("<i", data, pos)
        pos += 4
        attrs[name] = (type_name, data[pos : pos + size])
        pos += size
    pos += 1  # header terminator

    if attrs["compression"][1] != b"\0":
        raise ValueError(f"{path}: only uncompressed EXR is supported")
    x0, y0, x1, y1 = struct.unpack("<iiii", attrs["dataWindow"][1])
    w, h = x1 - x0 + 1, y1 - y0 + 1

    chl = attrs["channels"][1]
    names = []
    cp = 0
    while chl[cp] != 0:
        end = chl.index(b"\0", cp)
        names.append(chl[cp:end].decode())
        (ptype,) = struct.unpack_from("<i", chl, end + 1)
        if ptype != _PT_FLOAT:
            raise ValueError(f"{path}: only float32 channels are supported")
        cp = end + 1 + 16
    if names != ["B", "G", "R"]:
        raise ValueError(f"{path}: expected B,G,R channels, got {names}")

    offsets = struct.unpack_from("<" + "Q" * h, data, pos)
    img = np.empty((h, w, 3), dtype=np.float32)
    row_bytes = 3 * 4 * w
    for off in offsets:
        y, size = struct.unpack_from("<ii", data, off)
        if size != row_bytes:
            raise ValueError(f"{path}: unexpected scanline size {size}")
        row = np.frombuffer(data, dtype="<f4", count=3 * w, offset=off + 8).reshape(3, w)
        img[y - y0, :, 2] = row[0]
        img[y - y0, :, 1] = row[1]
        img[y - y0, :, 0] = row[2]
    return img


def save_hdr(path: str | Path, image: np.ndarray) -> None:
    """Write a Radiance .hdr (RGBE). Lossy; intended for environment maps."""
    img = np.ascontiguousarray(image, dtype=np.float32)
    ok, buf = cv2.imencode(".hdr", img[:, :, ::-1])
    if not ok:
        raise IOError(f"failed to encode {path}")
    from .util import atomic_write_bytes

    atomic_write_bytes(path, buf.tobytes())


def load_hdr(path: str | Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if img is None:
        raise IOError(f"failed to read {path}")
    return np.ascontiguousarray(img[:, :, ::-1], dtype=np.float32)


def encode_png(image: np.ndarray) -> bytes:
    """Encode a float image in [0, 1] (or a uint8 image) as PNG bytes."""
    if image.dtype != np.uint8:
        image = to_uint8(image)
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(image[:, :, ::-1]))
    if not ok:
        raise IOError("failed to encode PNG")
    return buf.tobytes()


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNG bytes to a float32 image in [0, 1]."""
    raw = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), cv2.IMREAD_COLOR)
    if raw is None:
        raise ValueError("failed to decode PNG")
    return np.ascontiguousarray(raw[:, :, ::-1], dtype=np.float32) / 255.0


def save_png(path: str | Path, image: np.ndarray) -> None:
    from .util import atomic_write_bytes

    atomic_write_bytes(path, encode_png(image))


def load_png(path: str | Path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_png(f.read())


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Quantize a float image in [0, 1] to uint8 with round-half-away."""
    return np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)


def save_image(path: str | Path, image: np.ndarray) -> None:
    """Dispatch on extension: .exr, .hdr or .png."""
    ext = Path(path).suffix.lower()
    if ext == ".exr":
        save_exr(path, image)
    elif ext == ".hdr":
        save_hdr(path, image)
    elif ext == ".png":
        save_png(path, image)
    else:
        raise ValueError(f"unsupported image extension: {ext}")


def load_image(path: str | Path) -> np.ndarray:
    ext = Path(path).suffix.lower()
    if ext == ".exr":
        return load_exr(path)
    if ext == ".hdr":
        return load_hdr(path)
    if ext == ".png":
        return load_png(path)
    raise ValueError(f"unsupported image extension: {ext}")
