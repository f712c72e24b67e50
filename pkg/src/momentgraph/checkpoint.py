"""Binary parameter checkpoints.

Layout: magic bytes "DORI", format version u32, then one record per
parameter: name length (u64), UTF-8 name, rank (u64), dims (u64 each),
row-major f64 little-endian payload. Records run to end of file.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import CheckpointError

MAGIC = b"DORI"
VERSION = 1


def save_params(params: dict, path: str) -> None:
    """Write named float64 arrays (Tensors or ndarrays) to a checkpoint file."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        for name in sorted(params):
            arr = np.ascontiguousarray(getattr(params[name], "data", params[name]), dtype=np.float64)
            encoded = name.encode("utf-8")
            f.write(struct.pack("<Q", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<Q", arr.ndim))
            for dim in arr.shape:
                f.write(struct.pack("<Q", dim))
            f.write(arr.astype("<f8").tobytes())


def load_params(path: str) -> dict[str, np.ndarray]:
    """Read a checkpoint back into a name -> ndarray map."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic bytes")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    out: dict[str, np.ndarray] = {}
    offset = 8
    while offset < len(blob):
        try:
            (name_len,) = struct.unpack_from("<Q", blob, offset)
            offset += 8
            name = blob[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<Q", blob, offset)
            offset += 8
            dims = struct.unpack_from(f"<{rank}Q", blob, offset)
            offset += 8 * rank
            count = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).copy()
            offset += 8 * count
        except (struct.error, UnicodeDecodeError, ValueError) as exc:
            raise CheckpointError(f"{path}: truncated or corrupt record: {exc}")
        out[name] = arr.reshape(dims)
    return out
