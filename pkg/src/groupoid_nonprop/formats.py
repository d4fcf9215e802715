"""Plain-text interchange formats.

Groupoid file::

    groupoid v1
    units: a b c
    truncated: x          (optional)
    [arrows]
    <id> <d> <r> <inverse_id> <weight>
    [compose]
    <left> <right> <result>

Weights are integers, fractions ``p/q`` (kept exact) or floats.

Band-model file::

    [model]
    name = step-potential
    dim = 1
    truncation = 2000
    profile = exact
    [interior]
    core_radius = 0
    [boundary]
    points = -inf +inf
    fiber_map = sign
    [coefficients]
    <offset> = const <c>
    <offset> = fiber core=<c> <n>=<v> ...
    <offset> = tanh center=<c> amplitude=<a> scale=<s>
    <offset> = table default=<c> <point>:<v> ...
    [limits]              (optional overrides, checked against the forms)
    <n> <offset> = <v>

Offsets and points are comma-separated integers (``1`` or ``1,0``).  Numbers
are Python literals (``4.0``, ``(1+2j)``).  ``#`` starts a comment line.
Writers produce a canonical text that parses back to an equal value.
"""

from __future__ import annotations

from fractions import Fraction
from io import StringIO
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algebra import Kernel, UnitFunction
from .boundary import (
    BandKernel,
    Coefficient,
    CompactificationModel,
    parse_point,
    point_label,
)
from .errors import BadModelError, ModelFileError
from .groupoid import FiniteGroupoid
from .representations import OperatorMatrix
from .spectral import SpectrumSet
from .verifier import LatticeSystem

# -- numbers -----------------------------------------------------------------


def fmt_number(z) -> str:
    if isinstance(z, (int, np.integer)) and not isinstance(z, bool):
        return str(int(z))
    if isinstance(z, Fraction):
        return str(z)
    z = complex(z)
    if z.imag == 0:
        return repr(float(z.real))
    return repr(z).replace(" ", "")


def parse_weight(tok: str):
    if "/" in tok:
        return Fraction(tok)
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def parse_complex(tok: str) -> complex:
    return complex(tok)


def _parse_real(tok: str):
    if any(c in tok for c in ".eEn"):
        return float(tok)
    return Fraction(tok)


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if s and not s.startswith("#"):
            yield i, s


def _read(source) -> tuple[str, str | None]:
    if isinstance(source, Path) or (
        isinstance(source, str) and source.strip() and "\n" not in source and Path(source).is_file()
    ):
        p = Path(source)
        try:
            return p.read_text(), str(p)
        except (OSError, UnicodeDecodeError) as exc:
            raise ModelFileError(f"cannot read file: {exc}", path=str(p)) from None
    return str(source), None


# -- groupoids --------------------------------------------------------------


def dump_groupoid(g: FiniteGroupoid) -> str:
    out = StringIO()
    out.write("groupoid v1\n")
    out.write("units: " + " ".join(g.units) + "\n")
    if g.truncated:
        out.write("truncated: " + " ".join(u for u in g.units if u in g.truncated) + "\n")
    out.write("[arrows]\n")
    for i, a in enumerate(g.arrows):
        inv = g.arrows[g.inv[i]].id
        out.write(f"{a.id} {a.d} {a.r} {inv} {fmt_number(g.haar[i])}\n")
    out.write("[compose]\n")
    ids = [a.id for a in g.arrows]
    for (x, y), z in sorted(g.table.items()):
        out.write(f"{ids[x]} {ids[y]} {ids[z]}\n")
    return out.getvalue()


def load_groupoid(source) -> FiniteGroupoid:
    text, path = _read(source)
    lines = list(_lines(text))
    if not lines or lines[0][1] != "groupoid v1":
        raise ModelFileError("missing 'groupoid v1' header", line=lines[0][0] if lines else 1, path=path)
    units = truncated = None
    section = None
    arrows, inverse, compose, haar = [], {}, {}, {}
    for no, s in lines[1:]:
        if s in ("[arrows]", "[compose]"):
            section = s
            continue
        if section is None:
            key, sep, rest = s.partition(":")
            if not sep or key not in ("units", "truncated"):
                raise ModelFileError(f"unexpected header line {s!r}", line=no, path=path)
            if key == "units":
                units = rest.split()
            else:
                truncated = rest.split()
            continue
        tok = s.split()
        if section == "[arrows]":
            if len(tok) != 5:
                raise ModelFileError("arrow lines need 'id d r inverse weight'", line=no, path=path)
            try:
                w = parse_weight(tok[4])
            except (ValueError, ZeroDivisionError):
                raise ModelFileError(f"bad weight {tok[4]!r}", line=no, path=path) from None
            arrows.append((tok[0], tok[1], tok[2]))
            inverse[tok[0]] = tok[3]
            haar[tok[0]] = w
        else:
            if len(tok) != 3:
                raise ModelFileError("composition lines need 'left right result'", line=no, path=path)
            compose[(tok[0], tok[1])] = tok[2]
    if units is None:
        raise ModelFileError("missing 'units:' line", line=lines[0][0], path=path)
    try:
        return FiniteGroupoid(units, arrows, inverse, compose, haar, truncated or ())
    except ValueError as exc:
        raise ModelFileError(str(exc), path=path) from None


# -- kernels and unit functions ------------------------------------------------


def _dump_values(labels: Sequence[str], values: np.ndarray, skip_zero: bool) -> str:
    out = StringIO()
    for lbl, v in zip(labels, values):
        if skip_zero and v == 0:
            continue
        if isinstance(v, Fraction):
            out.write(f"{lbl} {v} 0\n")
        else:
            v = complex(v)
            out.write(f"{lbl} {repr(v.real)} {repr(v.imag)}\n")
    return out.getvalue()


def _load_values(text: str, index, n: int, path=None):
    vals: dict[int, object] = {}
    exact = True
    for no, s in _lines(text):
        tok = s.split()
        if len(tok) != 3:
            raise ModelFileError("value lines need 'id re im'", line=no, path=path)
        try:
            i = index(tok[0])
        except (KeyError, ValueError):
            raise ModelFileError(f"unknown identifier {tok[0]!r}", line=no, path=path) from None
        try:
            re, im = _parse_real(tok[1]), _parse_real(tok[2])
        except (ValueError, ZeroDivisionError):
            raise ModelFileError("bad number", line=no, path=path) from None
        if isinstance(re, float) or isinstance(im, float) or im != 0:
            exact = False
        vals[i] = (re, im)
    if exact:
        out = np.array([Fraction(0)] * n, dtype=object)
        for i, (re, _) in vals.items():
            out[i] = re
    else:
        out = np.zeros(n, dtype=complex)
        for i, (re, im) in vals.items():
            out[i] = complex(float(re), float(im))
    return out


def dump_kernel(f: Kernel) -> str:
    """``arrow_id re im`` per nonzero value."""
    return _dump_values([a.id for a in f.parent.arrows], f.values, skip_zero=True)


def load_kernel(source, g: FiniteGroupoid) -> Kernel:
    """Parse kernel lines; all-rational real input gives an exact kernel."""
    text, path = _read(source)
    return Kernel(g, _load_values(text, g.arrow, g.n_arrows, path))


def dump_unit_function(psi: UnitFunction) -> str:
    return _dump_values(psi.parent.units, psi.values, skip_zero=False)


def load_unit_function(source, g: FiniteGroupoid) -> UnitFunction:
    text, path = _read(source)
    return UnitFunction(g, _load_values(text, g.unit, g.n_units, path))


# -- matrices and spectra ---------------------------------------------------------


def dump_matrix(H: OperatorMatrix) -> str:
    out = StringIO()
    out.write("# basis: " + " ".join(str(b) if isinstance(b, str) else point_label(b) for b in H.basis) + "\n")
    out.write("# weights: " + " ".join(repr(float(w)) for w in H.weights) + "\n")
    for row in np.asarray(H.dense(), dtype=complex):
        out.write(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row) + "\n")
    return out.getvalue()


def load_matrix(source) -> OperatorMatrix:
    text, path = _read(source)
    basis = weights = None
    rows = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("# basis:"):
            basis = s[len("# basis:"):].split()
        elif s.startswith("# weights:"):
            try:
                weights = [float(t) for t in s[len("# weights:"):].split()]
            except ValueError:
                raise ModelFileError("bad weight", line=no, path=path) from None
        elif s.startswith("#"):
            continue
        else:
            try:
                nums = [float(t) for t in s.split()]
            except ValueError:
                raise ModelFileError("bad number", line=no, path=path) from None
            if len(nums) % 2:
                raise ModelFileError("matrix rows need re/im pairs", line=no, path=path)
            rows.append(np.array(nums[0::2]) + 1j * np.array(nums[1::2]))
    if basis is None:
        raise ModelFileError("missing basis header", line=1, path=path)
    if len(rows) != len(basis) or any(len(r) != len(basis) for r in rows):
        raise ModelFileError(f"expected a {len(basis)}x{len(basis)} matrix", path=path)
    try:
        return OperatorMatrix(basis, np.array(rows), weights)
    except ValueError as exc:
        raise ModelFileError(str(exc), path=path) from None


def dump_spectrum(S: SpectrumSet) -> str:
    out = StringIO()
    out.write(f"# kind={S.kind},step={S.step!r}\n")
    out.write("re,im\n")
    for z in S.points.astype(complex):
        out.write(f"{float(z.real)!r},{float(z.imag)!r}\n")
    return out.getvalue()


def load_spectrum(source) -> SpectrumSet:
    text, path = _read(source)
    lines = text.splitlines()
    try:
        meta = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split(","))
        kind, step = meta["kind"], float(meta["step"])
    except (IndexError, KeyError, ValueError):
        raise ModelFileError("expected '# kind=...,step=...' header", line=1, path=path) from None
    pts = []
    for no, ln in enumerate(lines[2:], start=3):
        if not ln.strip():
            continue
        try:
            a, b = ln.split(",")
            pts.append(complex(float(a), float(b)))
        except ValueError:
            raise ModelFileError("expected 're,im'", line=no, path=path) from None
    pts = np.array(pts, dtype=complex)
    if not np.any(pts.imag):
        pts = pts.real
    try:
        return SpectrumSet(pts, kind, step)
    except ValueError as exc:
        raise ModelFileError(str(exc), line=1, path=path) from None


# -- band models -------------------------------------------------------------------


def _fmt_coefficient(c: Coefficient, cm: CompactificationModel) -> str:
    if c.kind == "const":
        return f"const {fmt_number(c.params[0])}"
    if c.kind == "fiber":
        core, table = c.params
        return "fiber core=" + fmt_number(core) + "".join(f" {n}={fmt_number(v)}" for n, v in table)
    if c.kind == "tanh":
        ce, a, s = c.params
        return f"tanh center={fmt_number(ce)} amplitude={fmt_number(a)} scale={s!r}"
    if c.kind == "table":
        items, default = c.params
        return "table default=" + fmt_number(default) + "".join(
            f" {point_label(p)}:{fmt_number(v)}" for p, v in items
        )
    raise BadModelError(f"coefficient kind {c.kind!r} has no text form")


def _parse_kv(tokens: Sequence[str], no: int, path) -> dict[str, str]:
    out = {}
    for t in tokens:
        k, sep, v = t.partition("=")
        if not sep:
            raise ModelFileError(f"expected key=value, got {t!r}", line=no, path=path)
        out[k] = v
    return out


def _parse_coefficient(text: str, dim: int, no: int, path) -> Coefficient:
    tok = text.split()
    if not tok:
        raise ModelFileError("empty coefficient", line=no, path=path)
    kind, rest = tok[0], tok[1:]
    try:
        if kind == "const":
            if len(rest) != 1:
                raise ValueError("const takes one value")
            return Coefficient.const(parse_complex(rest[0]))
        if kind == "fiber":
            kv = _parse_kv(rest, no, path)
            core = parse_complex(kv.pop("core"))
            return Coefficient.fiber(core, {n: parse_complex(v) for n, v in kv.items()})
        if kind == "tanh":
            kv = _parse_kv(rest, no, path)
            if set(kv) != {"center", "amplitude", "scale"}:
                raise ValueError("tanh needs center, amplitude and scale")
            return Coefficient.tanh(parse_complex(kv["center"]), parse_complex(kv["amplitude"]), float(kv["scale"]))
        if kind == "table":
            if not rest or not rest[0].startswith("default="):
                raise ValueError("table needs default=<value> first")
            default = parse_complex(rest[0][len("default="):])
            vals = {}
            for t in rest[1:]:
                p, sep, v = t.partition(":")
                if not sep:
                    raise ValueError(f"table entries are point:value, got {t!r}")
                vals[parse_point(p, dim)] = parse_complex(v)
            return Coefficient.table(vals, default)
    except (ValueError, KeyError) as exc:
        raise ModelFileError(f"bad {kind} coefficient: {exc}", line=no, path=path) from None
    raise ModelFileError(f"unknown coefficient form {kind!r}", line=no, path=path)


_SECTIONS = ("[model]", "[interior]", "[boundary]", "[coefficients]", "[limits]")
_KEYS = {
    "[model]": {"name", "dim", "truncation", "profile"},
    "[interior]": {"core_radius"},
    "[boundary]": {"points", "fiber_map"},
}


def dump_model(system: LatticeSystem) -> str:
    cm, bk = system.model, system.kernel
    out = StringIO()
    out.write("[model]\n")
    out.write(f"name = {system.name}\n")
    out.write(f"dim = {cm.dim}\n")
    out.write(f"truncation = {cm.truncation}\n")
    out.write(f"profile = {bk.profile}\n")
    out.write("[interior]\n")
    out.write(f"core_radius = {cm.core_radius}\n")
    out.write("[boundary]\n")
    out.write("points = " + " ".join(cm.boundary) + "\n")
    out.write(f"fiber_map = {cm.fiber_map}\n")
    out.write("[coefficients]\n")
    for k, c in bk.coefficients.items():
        out.write(f"{point_label(k)} = {_fmt_coefficient(c, cm)}\n")
    if bk.limits:
        out.write("[limits]\n")
        for (n, k), v in bk.limits.items():
            out.write(f"{n} {point_label(k)} = {fmt_number(v)}\n")
    return out.getvalue()


def load_model(source) -> LatticeSystem:
    """Parse a band-model file; every problem is reported with its line number."""
    text, path = _read(source)
    section = None
    values: dict[str, dict] = {s: {} for s in _SECTIONS}
    lineno: dict[str, int] = {}
    coeff_lines: list[tuple[int, str, str]] = []
    limit_lines: list[tuple[int, str, str, str]] = []
    last = 1
    for no, s in _lines(text):
        last = no
        if s.startswith("["):
            if s not in _SECTIONS:
                raise ModelFileError(f"unknown section {s}", line=no, path=path)
            section = s
            continue
        if section is None:
            raise ModelFileError("content before the first section", line=no, path=path)
        key, sep, val = s.partition("=")
        if not sep and section != "[coefficients]":
            raise ModelFileError(f"expected 'key = value', got {s!r}", line=no, path=path)
        key, val = key.strip(), val.strip()
        if section == "[coefficients]":
            if not sep:
                raise ModelFileError(f"expected '<offset> = <form>', got {s!r}", line=no, path=path)
            coeff_lines.append((no, key, val))
        elif section == "[limits]":
            parts = key.split()
            if len(parts) != 2:
                raise ModelFileError("limit lines are '<boundary point> <offset> = <value>'", line=no, path=path)
            limit_lines.append((no, parts[0], parts[1], val))
        else:
            if key not in _KEYS[section]:
                raise ModelFileError(f"unknown key {key!r} in {section}", line=no, path=path)
            values[section][key] = val
            lineno[key] = no

    def need(section, key, conv=str):
        if key not in values[section]:
            raise ModelFileError(f"missing {key} in {section}", line=last, path=path)
        try:
            return conv(values[section][key])
        except ValueError:
            raise ModelFileError(f"bad value for {key}", line=lineno[key], path=path) from None

    dim = need("[model]", "dim", int)
    truncation = need("[model]", "truncation", int)
    core_radius = need("[interior]", "core_radius", int)
    points = tuple(need("[boundary]", "points").split())
    fiber_map = need("[boundary]", "fiber_map")
    try:
        cm = CompactificationModel(dim, points, fiber_map, core_radius, truncation)
    except BadModelError as exc:
        raise ModelFileError(str(exc).removeprefix("E_BAD_MODEL: "), line=lineno.get("fiber_map", last), path=path) from None
    coeffs = {}
    for no, k, form in coeff_lines:
        try:
            off = parse_point(k, dim)
        except ValueError as exc:
            raise ModelFileError(str(exc), line=no, path=path) from None
        if off in coeffs:
            raise ModelFileError(f"duplicate offset {k}", line=no, path=path)
        coeffs[off] = _parse_coefficient(form, dim, no, path)
    limits = {}
    for no, n, k, v in limit_lines:
        try:
            limits[(n, parse_point(k, dim))] = parse_complex(v)
        except ValueError as exc:
            raise ModelFileError(str(exc), line=no, path=path) from None
    name = values["[model]"].get("name", "model")
    profile = values["[model]"].get("profile", "exact")
    bk = BandKernel(dim, coeffs, limits, profile)
    # validate limits and forms against the geometry, pointing at the offending line
    for no, k, _ in coeff_lines:
        off = parse_point(k, dim)
        try:
            for n in cm.boundary:
                coeffs[off].limit(cm, n)
            coeffs[off].values(cm.with_truncation(max(1, cm.core_radius + 1)))
        except BadModelError as exc:
            raise ModelFileError(str(exc).removeprefix("E_BAD_MODEL: "), line=no, path=path) from None
    try:
        return LatticeSystem(cm, bk, name)
    except BadModelError as exc:
        no = limit_lines[0][0] if limit_lines else last
        raise ModelFileError(str(exc).removeprefix("E_BAD_MODEL: "), line=no, path=path) from None


def sniff(source) -> str:
    """``'groupoid'`` or ``'model'`` from the first meaningful line."""
    text, path = _read(source)
    for _, s in _lines(text):
        return "groupoid" if s.startswith("groupoid") else "model"
    raise ModelFileError("empty file", line=1, path=path)
