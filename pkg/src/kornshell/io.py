"""Flat binary and CSV serialization for grid fields.

Blob layout (little-endian):

    magic    4 bytes  b"KSF1"
    kind     uint8    number of channels: 1 scalar, 3 vector, 9 matrix
    n_t      uint32
    n_theta  uint32
    n_z      uint32
    h        float64
    omega    float64
    z_lo     float64
    z_hi     float64
    name_len uint16   length of the UTF-8 patch name
    name     name_len bytes
    payload  kind * n_t*n_theta*n_z float64, each channel flattened
             t-fastest (theta next, z slowest)

CSV output is meant for small grids only: one row per node in the same
t-fastest order, with node coordinates followed by the channel values.
"""

import struct

import numpy as np

from kornshell.grid import ScalarField, ShellGrid, VecField3

MAGIC = b"KSF1"
_HEADER = struct.Struct("<4sBIIIddddH")
CSV_NODE_LIMIT = 200_000

__all__ = ["save_blob", "load_blob", "save_csv", "channels_of"]


def channels_of(obj):
    """(kind, list of (n_t, n_theta, n_z) arrays, channel names)."""
    if isinstance(obj, ScalarField):
        return 1, [obj.values], ["value"]
    if isinstance(obj, VecField3):
        return 3, [c.values for c in obj.components()], ["u_t", "u_theta", "u_z"]
    entries = getattr(obj, "entries", None)
    if entries is not None:
        arrays = [entries[i, j] for i in range(3) for j in range(3)]
        names = [f"M{i + 1}{j + 1}" for i in range(3) for j in range(3)]
        return 9, arrays, names
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def save_blob(path, obj, patch_name=""):
    kind, arrays, _ = channels_of(obj)
    grid = obj.grid
    name = patch_name.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC, kind, grid.n_t, grid.n_theta, grid.n_z,
                grid.h, grid.omega, grid.z_lo, grid.z_hi, len(name),
            )
        )
        fh.write(name)
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr.ravel(order="F")).tobytes())


def load_blob(path):
    """Returns (object, patch_name); object type follows the stored kind."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, kind, n_t, n_theta, n_z, h, omega, z_lo, z_hi, name_len = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"not a field blob: bad magic {magic!r}")
        name = fh.read(name_len).decode("utf-8")
        grid = ShellGrid(h=h, n_t=n_t, n_theta=n_theta, n_z=n_z, omega=omega, z_lo=z_lo, z_hi=z_hi)
        count = n_t * n_theta * n_z
        arrays = []
        for _ in range(kind):
            flat = np.frombuffer(fh.read(8 * count), dtype="<f8")
            arrays.append(flat.reshape(grid.shape, order="F").copy())
    if kind == 1:
        return ScalarField(grid, arrays[0]), name
    if kind == 3:
        return VecField3(*(ScalarField(grid, a) for a in arrays)), name
    if kind == 9:
        from kornshell.shell_ops import FrameMatrixField

        entries = np.stack(arrays).reshape((3, 3) + grid.shape)
        return FrameMatrixField(grid, entries), name
    raise ValueError(f"unknown channel count {kind}")


def save_csv(path, obj):
    _, arrays, names = channels_of(obj)
    grid = obj.grid
    n_nodes = grid.n_t * grid.n_theta * grid.n_z
    if n_nodes > CSV_NODE_LIMIT:
        raise ValueError(f"grid too large for CSV ({n_nodes} nodes > {CSV_NODE_LIMIT})")
    T, TH, Z = grid.meshes()
    columns = [T.ravel(order="F"), TH.ravel(order="F"), Z.ravel(order="F")]
    columns += [a.ravel(order="F") for a in arrays]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["t", "theta", "z"] + names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
