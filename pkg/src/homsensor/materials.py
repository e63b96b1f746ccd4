"""Optical materials: dispersion tables and constant-index media.

A material is either a tabulated complex refractive index n + ik sampled
on a strictly increasing vacuum-wavelength grid (linear interpolation in
between, hard error outside), or a wavelength-independent constant.
The package ships the Johnson & Christy (1972) gold table as its default
metal; everything else in a typical sensor stack (glass prism, aqueous
analyte) is modeled as a constant.

Sign convention: complex indices are written n + ik with k >= 0, paired
with exp(-i omega t) time dependence, so absorbing media attenuate
forward-propagating waves.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import MaterialDataError, WavelengthRangeError

EV_NM = 1239.84193  # photon energy (eV) times vacuum wavelength (nm)

_GOLD_RESOURCE = "gold_johnson_christy_1972.csv"


# ---------------------------------------------------------------------------
# material table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaterialTable:
    """Tabulated dispersion: n(lambda) + i k(lambda) on a wavelength grid.

    Attributes
    ----------
    wavelength_nm : ndarray
        Strictly increasing vacuum wavelengths in nm, at least two rows.
    n, k : ndarray
        Real index and extinction coefficient at each wavelength, k >= 0.
    name : str
        Short label used in error messages and file metadata.
    """

    wavelength_nm: np.ndarray
    n: np.ndarray
    k: np.ndarray
    name: str = "table"

    def __post_init__(self):
        lam = np.asarray(self.wavelength_nm, dtype=float)
        n = np.asarray(self.n, dtype=float)
        k = np.asarray(self.k, dtype=float)
        object.__setattr__(self, "wavelength_nm", lam)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        if lam.ndim != 1 or lam.size < 2:
            raise MaterialDataError(
                "material %r needs at least two tabulated rows, got %d"
                % (self.name, lam.size))
        if n.shape != lam.shape or k.shape != lam.shape:
            raise MaterialDataError(
                "material %r: column lengths disagree" % (self.name,))
        if not (np.isfinite(lam).all() and np.isfinite(n).all()
                and np.isfinite(k).all()):
            raise MaterialDataError(
                "material %r contains non-finite entries" % (self.name,))
        if not np.all(np.diff(lam) > 0.0):
            raise MaterialDataError(
                "material %r: wavelengths must be strictly increasing"
                % (self.name,))
        if np.any(k < 0.0):
            raise MaterialDataError(
                "material %r: extinction coefficient must be >= 0"
                % (self.name,))

    @property
    def wavelength_min_nm(self) -> float:
        return float(self.wavelength_nm[0])

    @property
    def wavelength_max_nm(self) -> float:
        return float(self.wavelength_nm[-1])

    def index(self, wavelength_nm):
        """Complex refractive index at the given wavelength(s) in nm.

        Linear interpolation on n and k separately.  Raises
        WavelengthRangeError if any requested wavelength falls outside
        the tabulated window.
        """
        lam = np.asarray(wavelength_nm, dtype=float)
        if np.any(lam < self.wavelength_min_nm) or np.any(lam > self.wavelength_max_nm):
            raise WavelengthRangeError(
                "material %r tabulated on [%.3f, %.3f] nm, requested "
                "wavelength(s) reach [%.3f, %.3f] nm"
                % (self.name, self.wavelength_min_nm, self.wavelength_max_nm,
                   float(np.min(lam)), float(np.max(lam))))
        n = np.interp(lam, self.wavelength_nm, self.n)
        k = np.interp(lam, self.wavelength_nm, self.k)
        out = n + 1j * k
        if np.ndim(wavelength_nm) == 0:
            return complex(out)
        return out


# ---------------------------------------------------------------------------
# material wrapper (table or constant)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Material:
    """A dispersive (tabulated) or constant-index optical medium."""

    name: str
    table: MaterialTable | None = None
    constant: complex | None = None
    citation: str = ""

    def __post_init__(self):
        if (self.table is None) == (self.constant is None):
            raise MaterialDataError(
                "material %r must define exactly one of table / constant"
                % (self.name,))
        if self.constant is not None:
            c = complex(self.constant)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise MaterialDataError(
                    "material %r: constant index must be finite" % (self.name,))
            if c.real <= 0.0:
                raise MaterialDataError(
                    "material %r: Re(n) must be positive" % (self.name,))
            if c.imag < 0.0:
                raise MaterialDataError(
                    "material %r: Im(n) must be >= 0 (passive medium)"
                    % (self.name,))
            object.__setattr__(self, "constant", c)

    @property
    def is_dispersive(self) -> bool:
        return self.table is not None

    def index(self, wavelength_nm):
        """Complex index at wavelength(s) in nm (broadcasts for tables)."""
        if self.table is not None:
            return self.table.index(wavelength_nm)
        if np.ndim(wavelength_nm) == 0:
            return self.constant
        return np.full(np.shape(wavelength_nm), self.constant, dtype=complex)

    def wavelength_window_nm(self) -> tuple[float, float] | None:
        """Valid wavelength window in nm, or None for a constant medium."""
        if self.table is None:
            return None
        return (self.table.wavelength_min_nm, self.table.wavelength_max_nm)


def constant_material(name: str, index) -> Material:
    """Convenience constructor for a non-dispersive medium."""
    return Material(name=name, constant=complex(index))


def refractive_index(material: Material, wavelength_nm):
    """Module-level accessor, equivalent to material.index(wavelength_nm)."""
    return material.index(wavelength_nm)


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

_HEADER = ("wavelength_nm", "n", "k")


def parse_material_csv(text: str, name: str = "table") -> MaterialTable:
    """Parse a dispersion table from CSV text.

    Format: '#' comment lines anywhere, one header row
    'wavelength_nm,n,k', then one row per sample.  Raises
    MaterialDataError with a line number on any malformed content.
    """
    lam, nn, kk = [], [], []
    header_seen = False
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or (row[0].lstrip().startswith("#")):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            if tuple(cells) != _HEADER:
                raise MaterialDataError(
                    "line %d: expected header %s, got %r"
                    % (lineno, ",".join(_HEADER), ",".join(cells)))
            header_seen = True
            continue
        if len(cells) != 3:
            raise MaterialDataError(
                "line %d: expected 3 columns, got %d" % (lineno, len(cells)))
        try:
            lam.append(float(cells[0]))
            nn.append(float(cells[1]))
            kk.append(float(cells[2]))
        except ValueError as exc:
            raise MaterialDataError("line %d: %s" % (lineno, exc)) from exc
    if not header_seen:
        raise MaterialDataError("missing header row %r" % (",".join(_HEADER),))
    return MaterialTable(np.array(lam), np.array(nn), np.array(kk), name=name)


def material_table_to_csv(table: MaterialTable, comments: tuple[str, ...] = ()) -> str:
    """Serialize a table to CSV with full float64 round-trip precision."""
    lines = ["# %s" % c for c in comments]
    lines.append(",".join(_HEADER))
    for lam, n, k in zip(table.wavelength_nm, table.n, table.k):
        lines.append("%s,%s,%s" % (repr(float(lam)), repr(float(n)), repr(float(k))))
    return "\n".join(lines) + "\n"


def load_material_table(path, name: str | None = None) -> MaterialTable:
    """Read a dispersion table from a CSV file on disk."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_material_csv(text, name=name or str(path))


def save_material_table(table: MaterialTable, path, comments: tuple[str, ...] = ()):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(material_table_to_csv(table, comments))


# ---------------------------------------------------------------------------
# bundled gold data
# ---------------------------------------------------------------------------

_gold_cache: list[Material] = []


def gold_jc() -> Material:
    """Gold from the Johnson & Christy (1972) thin-film measurements.

    49 rows spanning 0.64 to 6.60 eV (roughly 188 to 1937 nm), shipped
    with the package.  The instance is cached; tables are immutable.
    """
    if not _gold_cache:
        text = (resources.files(__package__) / "data" / _GOLD_RESOURCE).read_text()
        table = parse_material_csv(text, name="Au (Johnson & Christy 1972)")
        _gold_cache.append(Material(
            name="Au",
            table=table,
            citation="P. B. Johnson and R. W. Christy, Phys. Rev. B 6, 4370 (1972)",
        ))
    return _gold_cache[0]
