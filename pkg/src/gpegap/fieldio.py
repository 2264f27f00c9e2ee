"""Binary export/import of converged fields.

Data file: row-major (C order) little-endian 8-byte floats; complex fields
interleave re/im per node. A sidecar text header ``<path>.hdr`` records the
grid so the field can be reloaded without the originating config.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from gpegap.domain import BoundaryCondition, BoxDomain, Grid, make_grid

_HEADER_VERSION = 1


def save_field(path, phi: np.ndarray, grid: Grid, beta: float) -> None:
    path = Path(path)
    complex_field = bool(np.iscomplexobj(phi))
    data = np.ascontiguousarray(phi, dtype=np.complex128 if complex_field else np.float64)
    path.write_bytes(data.astype("<c16" if complex_field else "<f8").tobytes())
    lines = [
        f"version {_HEADER_VERSION}",
        f"dim {grid.dim}",
        "n " + " ".join(str(m) for m in grid.n),
        "lengths " + " ".join(repr(L) for L in grid.domain.lengths),
        "origin " + " ".join(repr(o) for o in grid.domain.origin),
        f"bc {grid.bc.value}",
        f"beta {beta!r}",
        f"complex {int(complex_field)}",
    ]
    Path(str(path) + ".hdr").write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_field(path) -> tuple[np.ndarray, Grid, float]:
    path = Path(path)
    header: dict[str, str] = {}
    for line in Path(str(path) + ".hdr").read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, rest = line.partition(" ")
            header[key] = rest.strip()
    n = tuple(int(v) for v in header["n"].split())
    lengths = tuple(float(v) for v in header["lengths"].split())
    origin = tuple(float(v) for v in header["origin"].split())
    bc = BoundaryCondition(header["bc"])
    beta = float(header["beta"])
    grid = make_grid(BoxDomain(lengths=lengths, origin=origin), n, bc)
    dtype = "<c16" if header.get("complex", "0") == "1" else "<f8"
    data = np.frombuffer(path.read_bytes(), dtype=dtype).reshape(n)
    return data.copy(), grid, beta
