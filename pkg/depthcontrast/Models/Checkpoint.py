__all__ = [
    'encode_checkpoint',
    'decode_checkpoint',
]

import json
import struct
from collections import OrderedDict

import numpy as np

from ..Exceptions import FormatError

MAGIC = b"DCKP"
VERSION = 1
U32 = struct.Struct("<I")


class _Reader(object):

    def __init__(self, data):
        self._data = data
        self.offset = 0

    def take(self, count, what):
        if self.offset + count > len(self._data):
            raise FormatError("truncated checkpoint while reading " + what, self.offset)
        chunk = self._data[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def u32(self, what):
        return U32.unpack(self.take(U32.size, what))[0]

    def done(self):
        return self.offset == len(self._data)


def encode_checkpoint(snapshot, tensors, width=8):
    """Encodes named tensors and a configuration snapshot as ``DCKP`` bytes.

    The layout is: magic, u32 version, u32 width (4 or 8 bytes per value), u32 length and the
    UTF-8 JSON snapshot, u32 tensor count, then one record per tensor: u32 name length, name,
    u32 rank, one u32 per dimension, little-endian payload.

    Parameters:
        snapshot (dict): The configuration snapshot; must be JSON serializable.
        tensors (dict): An ordered mapping of names to arrays.
        width (int, optional): 8 for 64-bit payloads, 4 for 32-bit ones.

    Returns:
        bytes: The encoded checkpoint.

    Raises:
        AssertionError: If the input parameters are invalid.
    """
    assert width in (4, 8), "`width` must be 4 or 8."
    dtype = np.dtype("<f8" if width == 8 else "<f4")
    text = json.dumps(snapshot, sort_keys=True).encode("utf-8")
    parts = [MAGIC, U32.pack(VERSION), U32.pack(width), U32.pack(len(text)), text, U32.pack(len(tensors))]
    for name, value in tensors.items():
        value = np.asarray(value)
        encoded = name.encode("utf-8")
        parts.append(U32.pack(len(encoded)))
        parts.append(encoded)
        parts.append(U32.pack(value.ndim))
        parts.extend(U32.pack(size) for size in value.shape)
        parts.append(np.ascontiguousarray(value, dtype=dtype).tobytes())
    return b"".join(parts)


def decode_checkpoint(data):
    """Decodes ``DCKP`` bytes.

    Parameters:
        data (bytes): The encoded checkpoint.

    Returns:
        tuple: The configuration snapshot (dict) and an ordered dict of name to
        ``numpy.float64`` arrays.

    Raises:
        :class:`depthcontrast.Exceptions.FormatError`: If the bytes are not a valid checkpoint;
            the error carries the byte offset.
    """
    reader = _Reader(data)
    if reader.take(4, "magic") != MAGIC:
        raise FormatError("bad checkpoint magic", 0)
    version = reader.u32("version")
    if version != VERSION:
        raise FormatError("unsupported checkpoint version {}".format(version), 4)
    width = reader.u32("width")
    if width not in (4, 8):
        raise FormatError("unsupported value width {}".format(width), 8)
    dtype = np.dtype("<f8" if width == 8 else "<f4")
    length = reader.u32("snapshot length")
    start = reader.offset
    try:
        snapshot = json.loads(reader.take(length, "snapshot").decode("utf-8"))
    except (UnicodeDecodeError, ValueError):
        raise FormatError("snapshot is not UTF-8 JSON", start)

    tensors = OrderedDict()
    for _ in range(reader.u32("tensor count")):
        name = reader.take(reader.u32("name length"), "name").decode("utf-8")
        shape = tuple(reader.u32("dimension") for _ in range(reader.u32("rank")))
        count = int(np.prod(shape, dtype=np.int64))
        payload = reader.take(count * dtype.itemsize, "payload of " + name)
        tensors[name] = np.frombuffer(payload, dtype=dtype).reshape(shape).astype(np.float64)
    if not reader.done():
        raise FormatError("trailing bytes after the last tensor", reader.offset)
    return snapshot, tensors
