__all__ = [
    'encode_plane',
    'decode_plane',
    'write_plane',
    'read_plane',
]

import struct

import numpy as np

from ..Exceptions import FormatError, NumericalError, ShapeError

MAGIC = b"DPC1"
HEADER = struct.Struct("<4sII")
PAYLOAD_DTYPE = np.dtype("<f4")


def encode_plane(plane):
    """Encodes a plane as ``DPC1`` bytes: magic, u32 height, u32 width, then little-endian 32-bit
    floats in row-major order.

    Parameters:
        plane (numpy.ndarray): An ``H x W`` array of finite values.

    Returns:
        bytes: The encoded plane.

    Raises:
        :class:`depthcontrast.Exceptions.ShapeError`: If the plane is not two-dimensional.
        :class:`depthcontrast.Exceptions.NumericalError`: If a value is not finite.
    """
    plane = np.asarray(plane)
    if plane.ndim != 2 or plane.size == 0:
        raise ShapeError("a plane must be a non-empty H x W array", [plane.shape])
    if not np.all(np.isfinite(plane)):
        raise NumericalError("plane holds non-finite values")
    height, width = plane.shape
    return HEADER.pack(MAGIC, height, width) + np.ascontiguousarray(plane, dtype=PAYLOAD_DTYPE).tobytes()


def decode_plane(data):
    """Decodes ``DPC1`` bytes.

    Parameters:
        data (bytes): The encoded plane.

    Returns:
        numpy.ndarray: The ``H x W`` plane as ``numpy.float32``.

    Raises:
        :class:`depthcontrast.Exceptions.FormatError`: If the magic is wrong or the payload length
            disagrees with the header; the error carries the byte offset.
    """
    if len(data) < HEADER.size:
        raise FormatError("truncated plane header", len(data))
    magic, height, width = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError("bad plane magic {!r}".format(magic), 0)
    expected = HEADER.size + height * width * PAYLOAD_DTYPE.itemsize
    if height == 0 or width == 0 or len(data) != expected:
        raise FormatError("payload holds {} bytes, header implies {}".format(
            len(data) - HEADER.size, expected - HEADER.size), min(len(data), expected))
    return np.frombuffer(data, dtype=PAYLOAD_DTYPE, offset=HEADER.size).reshape(height, width).astype(np.float32)


def write_plane(path, plane):
    """Writes a plane file; see :func:`encode_plane`."""
    data = encode_plane(plane)
    with open(path, "wb") as file:
        file.write(data)


def read_plane(path):
    """Reads a plane file; see :func:`decode_plane`."""
    with open(path, "rb") as file:
        return decode_plane(file.read())
