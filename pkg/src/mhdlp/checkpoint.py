"""Binary checkpoint format for MHD states.

Layout (little-endian throughout):

    bytes 0..7    magic "MHDCKPT1"
    bytes 8..55   header: dims, n as int64; period, t, nu, eta as float64
    then          u components, then b components, each a C-order
                  complex128 array over the full wavenumber grid

Corrupt files (bad magic, truncation, trailing bytes) raise
:class:`CheckpointError` naming the offending byte offset.
"""

import numpy as np

from .fields import SpectralField
from .grid import Grid
from .solver import MHDState, PhysicsParams

MAGIC = b"MHDCKPT1"
_HEADER_INTS = np.dtype("<i8")
_HEADER_FLOATS = np.dtype("<f8")
_COMPLEX = np.dtype("<c16")


class CheckpointError(ValueError):
    """Malformed checkpoint file; carries the byte offset of the problem."""

    def __init__(self, path, offset: int, detail: str):
        super().__init__(f"{path}: {detail} (byte offset {offset})")
        self.path = str(path)
        self.offset = offset


def write_checkpoint(path, state: MHDState, physics: PhysicsParams) -> None:
    grid = state.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.asarray([grid.dims, grid.n], dtype=_HEADER_INTS).tobytes())
        fh.write(np.asarray([grid.period, state.t, physics.nu, physics.eta],
                            dtype=_HEADER_FLOATS).tobytes())
        fh.write(np.ascontiguousarray(state.u.data, dtype=_COMPLEX).tobytes())
        fh.write(np.ascontiguousarray(state.b.data, dtype=_COMPLEX).tobytes())


def read_checkpoint(path) -> tuple[MHDState, PhysicsParams]:
    with open(path, "rb") as fh:
        raw = fh.read()

    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(path, 0, "bad magic")
    off = len(MAGIC)
    if len(raw) < off + 16 + 32:
        raise CheckpointError(path, len(raw), "truncated header")
    dims, n = (int(v) for v in np.frombuffer(raw, _HEADER_INTS, count=2, offset=off))
    off += 16
    period, t, nu, eta = (
        float(v) for v in np.frombuffer(raw, _HEADER_FLOATS, count=4, offset=off)
    )
    off += 32

    try:
        grid = Grid(dims, n, period)
    except ValueError as exc:
        raise CheckpointError(path, 8, f"invalid header: {exc}") from None

    per_field = dims * grid.size
    for name in ("u", "b"):
        need = per_field * _COMPLEX.itemsize
        if len(raw) - off < need:
            raise CheckpointError(path, len(raw),
                                  f"truncated {name} payload, expected {need} bytes")
        if name == "u":
            u_data = np.frombuffer(raw, _COMPLEX, count=per_field, offset=off)
        else:
            b_data = np.frombuffer(raw, _COMPLEX, count=per_field, offset=off)
        off += need
    if off != len(raw):
        raise CheckpointError(path, off, f"{len(raw) - off} unexpected trailing bytes")

    shape = (dims,) + grid.shape
    u = SpectralField(grid, u_data.reshape(shape).astype(np.complex128),
                      divergence_free=True)
    b = SpectralField(grid, b_data.reshape(shape).astype(np.complex128),
                      divergence_free=True)
    return MHDState(u=u, b=b, t=t), PhysicsParams(nu=nu, eta=eta)
