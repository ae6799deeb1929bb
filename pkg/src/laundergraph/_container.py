"""Versioned little-endian section container with a CRC-64 trailer.

Layout::

    magic[4] | u32 version | u32 n_sections
    n_sections x (name[24] | dtype[8] | u64 offset | u64 nbytes | u64 count)
    section payloads, each 8-byte aligned
    u64 crc64 over every preceding byte
"""

import struct

import numpy as np

from . import kernels

_HEADER = struct.Struct("<4sII")
_ENTRY = struct.Struct("<24s8sQQQ")
_TRAILER = struct.Struct("<Q")


class ContainerError(ValueError):
    pass


def _pad(n):
    return (-n) % 8


def encode_strings(values):
    blobs = [str(v).encode("utf-8") for v in values]
    offsets = np.zeros(len(blobs) + 1, dtype="<i8")
    np.cumsum([len(b) for b in blobs], out=offsets[1:])
    return offsets, np.frombuffer(b"".join(blobs), dtype=np.uint8)


def decode_strings(offsets, data):
    raw = data.tobytes()
    return [raw[offsets[i]:offsets[i + 1]].decode("utf-8") for i in range(len(offsets) - 1)]


def write_container(path, magic: bytes, version: int, sections: dict):
    """Write ``sections`` (name -> 1-D array) to ``path``; returns the CRC."""
    arrays = []
    for name, arr in sections.items():
        arr = np.ascontiguousarray(arr)
        if arr.ndim != 1:
            raise ContainerError(f"section {name!r} must be 1-D")
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        arrays.append((name, arr))
    head = _HEADER.size + _ENTRY.size * len(arrays)
    offset = head + _pad(head)
    table = []
    for name, arr in arrays:
        table.append(_ENTRY.pack(name.encode("ascii"), arr.dtype.str.encode("ascii"),
                                 offset, arr.nbytes, arr.shape[0]))
        offset += arr.nbytes + _pad(arr.nbytes)
    buf = bytearray(_HEADER.pack(magic, version, len(arrays)))
    for entry in table:
        buf += entry
    buf += b"\0" * _pad(len(buf))
    for _, arr in arrays:
        buf += arr.tobytes()
        buf += b"\0" * _pad(arr.nbytes)
    crc = int(kernels.crc64(np.frombuffer(bytes(buf), dtype=np.uint8)))
    buf += _TRAILER.pack(crc)
    with open(path, "wb") as fh:
        fh.write(bytes(buf))
    return crc


def read_container(path, magic: bytes, versions) -> tuple[int, dict]:
    """Validate and decode a container; raises :class:`ContainerError`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + _TRAILER.size:
        raise ContainerError("file truncated")
    (stored,) = _TRAILER.unpack_from(raw, len(raw) - _TRAILER.size)
    body = np.frombuffer(raw, dtype=np.uint8, count=len(raw) - _TRAILER.size)
    if int(kernels.crc64(body)) != stored:
        raise ContainerError("checksum mismatch")
    got_magic, version, count = _HEADER.unpack_from(raw, 0)
    if got_magic != magic:
        raise ContainerError(f"bad magic {got_magic!r}")
    if version not in versions:
        raise ContainerError(f"unsupported format version {version}")
    sections = {}
    for i in range(count):
        name, dtype, offset, nbytes, n = _ENTRY.unpack_from(raw, _HEADER.size + i * _ENTRY.size)
        name = name.rstrip(b"\0").decode("ascii")
        dt = np.dtype(dtype.rstrip(b"\0").decode("ascii"))
        if offset + nbytes > body.size or n * dt.itemsize != nbytes:
            raise ContainerError(f"section {name!r} out of bounds")
        sections[name] = np.frombuffer(raw, dtype=dt, count=n, offset=offset)
    return version, sections
