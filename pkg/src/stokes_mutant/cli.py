"""Command-line entry point, file formats and the Dubrovin-type comparison.

Files are JSON.  Complex numbers are ``[re, im]`` pairs and matrices are
row-major lists of rows.  Three kinds of document are understood:
``stokes-data``, ``mutation-system`` and ``stokes-multiplier``.

Exit codes: 0 success, 1 validation failure or failed verdict, 2 numerical
failure, 3 malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import _subspace as sub
from .cohomology import (
    CompleteIntersection,
    class_to_json,
    euler_chi_hrr,
    euler_matrix,
    gamma_map_matrix,
    hpoly_format,
    pairing_A_matrix,
    pairing_B_matrix,
    resolve_gamma_convention,
    topological_euler,
)
from .direction import ExponentSet, bullet_bookkeeping, ordered_ids, tau_theta
from .mutation import (
    BraidWord,
    MonodromyRep,
    MutationSystem,
    Permutation,
    StokesData,
    StokesStructure,
    StructureError,
    apply_braid,
    assemble_theta_bullet,
    bullet_transport_word,
    factorize_stokes_multiplier,
    reduced_word_lift,
    to_stokes_data,
    validate_mutation_system,
    validate_stokes_data,
)
from .quantum import (
    ZERO_ID,
    AccuracyError,
    ObstructionError,
    asymptotic_classes,
    extract_zero_block,
    exponent_values,
    pipeline_tuple,
    property_O_check,
    quantum_ring_matrix,
)
from .sod import build_b_mutation_system

FORMAT = "stokes-mutant"
FORMAT_VERSION = 1

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_MALFORMED = 0, 1, 2, 3


class MalformedInput(ValueError):
    """An input file that cannot be parsed into the expected document."""


# ---------------------------------------------------------------------------
# JSON encoding


def cjson(z: complex) -> list:
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def matrix_json(M: np.ndarray) -> list:
    return [[cjson(x) for x in row] for row in np.atleast_2d(np.asarray(M, complex))]


def _cparse(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise MalformedInput(f"expected a number or [re, im], got {v!r}")


def matrix_parse(rows, shape: tuple | None = None) -> np.ndarray:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise MalformedInput("matrix must be a list of rows")
    M = np.array([[_cparse(x) for x in r] for r in rows], complex)
    if rows and len({len(r) for r in rows}) != 1:
        raise MalformedInput("ragged matrix")
    if shape is not None:
        M = M.reshape(shape) if M.size == 0 else M
        if M.shape != shape:
            raise MalformedInput(f"matrix has shape {M.shape}, expected {shape}")
    return M


def _exact_string(z: complex) -> str | None:
    if abs(z.imag) > 0:
        return None
    fr = Fraction(z.real).limit_denominator(1000)
    return str(fr) if float(fr) == z.real else None


def exponents_json(C: ExponentSet) -> list:
    out = []
    for cid, val in C.items():
        entry = {"id": cid, "value": cjson(val)}
        exact = _exact_string(val)
        entry["exact"] = exact if exact is not None else None
        out.append(entry)
    return out


def exponents_parse(items) -> ExponentSet:
    if not isinstance(items, list) or not items:
        raise MalformedInput("exponents must be a non-empty list")
    try:
        return ExponentSet((str(e["id"]), _cparse(e["value"])) for e in items)
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"bad exponent entry: {exc}") from exc
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc


def _grading_json(g) -> list | None:
    return None if g is None else [int(x) for x in np.asarray(g)]


def stokes_data_json(sd: StokesData, meta: dict | None = None) -> dict:
    return {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "kind": "stokes-data",
        "exponents": exponents_json(sd.exponents),
        "order": list(sd.order),
        "ambient": {"dim": sd.ambient.dim, "T": matrix_json(sd.T), "grading": _grading_json(sd.ambient.grading)},
        "blocks": [{"id": c, "dim": sd.blocks[c].dim, "T": matrix_json(sd.blocks[c].T),
                    "grading": _grading_json(sd.blocks[c].grading)} for c in sd.order],
        "f": matrix_json(sd.f),
        "f_star": matrix_json(sd.f_star),
        "meta": meta or {},
    }


def mutation_system_json(ms: MutationSystem, side: str | None = None, meta: dict | None = None) -> dict:
    return {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "kind": "mutation-system",
        "side": side,
        "exponents": exponents_json(ms.exponents),
        "order": list(ms.order),
        "blocks": [{"id": c, "dim": int(ms.block_dims[c]),
                    "grading": None if ms.block_grading is None else _grading_json(ms.block_grading[c])}
                   for c in ms.order],
        "pairing": matrix_json(ms.pairing),
        "grading": _grading_json(ms.grading),
        "f": matrix_json(ms.f),
        "meta": meta or {},
    }


def multiplier_json(C: ExponentSet, theta0: float, g: np.ndarray, dims: Sequence[int]) -> dict:
    return {"format": FORMAT, "version": FORMAT_VERSION, "kind": "stokes-multiplier",
            "exponents": exponents_json(C), "theta0": theta0, "dims": list(dims), "matrix": matrix_json(g)}


def _check_header(doc) -> str:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise MalformedInput("not a stokes-mutant document")
    if doc.get("version") != FORMAT_VERSION:
        raise MalformedInput(f"unsupported version {doc.get('version')!r}")
    kind = doc.get("kind")
    if kind not in ("stokes-data", "mutation-system", "stokes-multiplier"):
        raise MalformedInput(f"unknown kind {kind!r}")
    return kind


def parse_document(doc: dict):
    """StokesData, MutationSystem, or (ExponentSet, theta0, matrix, dims) for a multiplier."""
    kind = _check_header(doc)
    try:
        C = exponents_parse(doc["exponents"])
        if kind == "stokes-multiplier":
            g = matrix_parse(doc["matrix"])
            return C, float(doc["theta0"]), g, tuple(int(d) for d in doc["dims"])
        order = tuple(doc["order"])
        blocks = {b["id"]: b for b in doc["blocks"]}
        if set(blocks) != set(order):
            raise MalformedInput("blocks and order list different ids")
        if kind == "stokes-data":
            amb = doc["ambient"]
            n = int(amb["dim"])
            ambient = MonodromyRep(n, matrix_parse(amb["T"], (n, n)), amb.get("grading"))
            reps = {c: MonodromyRep(int(b["dim"]), matrix_parse(b["T"], (int(b["dim"]),) * 2), b.get("grading"))
                    for c, b in blocks.items()}
            return StokesData(ambient, C, order, reps, matrix_parse(doc["f"], (n, n)),
                              matrix_parse(doc["f_star"], (n, n)))
        P = matrix_parse(doc["pairing"])
        n = P.shape[0]
        dims = {c: int(b["dim"]) for c, b in blocks.items()}
        grading = doc.get("grading")
        bg = None
        if grading is not None:
            bg = {c: np.array(b["grading"], dtype=int) for c, b in blocks.items()}
            grading = np.array(grading, dtype=int)
        return MutationSystem(P, C, order, dims, matrix_parse(doc["f"], (n, n)), grading, bg)
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"{type(exc).__name__}: {exc}") from exc


_PAIR = re.compile(r"\[\s*(-?[0-9][0-9.eE+-]*),\s*(-?[0-9][0-9.eE+-]*)\s*\]")


def dumps(doc: dict) -> str:
    """Canonical text: fixed key order as built, two-space indent, [re, im] pairs on one line."""
    return _PAIR.sub(r"[\1, \2]", json.dumps(doc, indent=2, allow_nan=False)) + "\n"


def load(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(str(exc)) from exc
    return parse_document(doc), doc


def to_json(obj, meta: dict | None = None, side: str | None = None) -> dict:
    if isinstance(obj, MutationSystem):
        return mutation_system_json(obj, side, meta)
    return stokes_data_json(obj, meta)


# ---------------------------------------------------------------------------
# braid words on the command line


def parse_word(text: str, m: int) -> BraidWord:
    """Braid letters ``s<i>``, ``s<i>^-1`` plus ``D`` / ``D^-1`` for the half twist."""
    delta = reduced_word_lift(Permutation.longest(m))
    out = BraidWord(m, ())
    for tok in text.replace(",", " ").split():
        if tok == "D":
            out = out * delta
        elif tok in ("D^-1", "D'"):
            out = out * delta.inverse()
        else:
            out = out * BraidWord.parse(tok, m)
    return out


# ---------------------------------------------------------------------------
# variety arguments


def variety_from_args(args) -> CompleteIntersection:
    if getattr(args, "pn", None) is not None:
        return CompleteIntersection.projective_space(args.pn)
    if getattr(args, "ci", None):
        N, *degs = args.ci
        return CompleteIntersection(N, tuple(degs))
    raise MalformedInput("give --pn n or --ci N d1 d2 ...")


def resolve_convention(name: str) -> str:
    return resolve_gamma_convention().convention if name == "auto" else name


# ---------------------------------------------------------------------------
# the Dubrovin-type comparison


@dataclass
class DubrovinReport:
    """A-side asymptotic frame against Gamma of the B-side, both at theta0."""

    variety: str
    theta0: float
    convention: str
    order: tuple
    tuple_angles: dict
    braid_word: str
    distances: dict
    gram_a: np.ndarray
    gram_b: np.ndarray
    gram_a_raw: np.ndarray
    signs: list
    gram_difference: float
    residual_agreement: float | None
    bookkeeping: dict
    tolerances: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def max_distance(self) -> float:
        return max(self.distances.values())

    @property
    def checks(self) -> dict:
        tol = self.tolerances["tol_cmp"]
        out = {
            "subspace distances": self.max_distance <= tol,
            "Gram matrices": self.gram_difference <= tol,
            "bookkeeping identities": all(self.bookkeeping.values()),
        }
        if self.residual_agreement is not None:
            out["residual agreement"] = self.residual_agreement <= self.tolerances["tol_residual"]
        return out

    @property
    def verdict(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "format": FORMAT, "version": FORMAT_VERSION, "kind": "dubrovin-report",
            "variety": self.variety, "theta0": self.theta0, "convention": self.convention,
            "order": list(self.order), "tuple": self.tuple_angles, "braid_word": self.braid_word,
            "distances": self.distances, "gram_a": matrix_json(self.gram_a), "gram_b": matrix_json(self.gram_b),
            "gram_a_raw": matrix_json(self.gram_a_raw), "signs": self.signs,
            "gram_difference": self.gram_difference, "residual_agreement": self.residual_agreement,
            "bookkeeping": self.bookkeeping, "tolerances": self.tolerances, "checks": self.checks,
            "verdict": "pass" if self.verdict else "fail", "diagnostics": self.diagnostics,
        }

    def to_markdown(self) -> str:
        def fmt(M):
            rows = []
            for row in np.asarray(M):
                rows.append("| " + " | ".join(_fmt_c(x) for x in row) + " |")
            head = "| " + " | ".join(str(c) for c in self.order_cols) + " |"
            sep = "|" + "---|" * M.shape[1]
            return "\n".join([head, sep] + rows)

        lines = [f"# Dubrovin-type check: {self.variety}", "",
                 f"- theta0: {self.theta0}", f"- Gamma convention: {self.convention}",
                 f"- order at theta0: {', '.join(self.order)}",
                 f"- braid word (tuple to theta0): `{self.braid_word or 'identity'}`",
                 f"- tolerances: {', '.join(f'{k}={v:g}' for k, v in self.tolerances.items())}",
                 f"- verdict: **{'pass' if self.verdict else 'fail'}**", "",
                 "## Subspace distances (largest principal angle)", "",
                 "| exponent | distance |", "|---|---|"]
        lines += [f"| {c} | {d:.3e} |" for c, d in self.distances.items()]
        lines += ["", "## Gram matrix, A-side (aligned bases)", "", fmt(self.gram_a), "",
                  "## Gram matrix, B-side", "", fmt(self.gram_b), "",
                  f"Largest entry difference after sign conjugation: {self.gram_difference:.3e}", ""]
        if self.residual_agreement is not None:
            lines += [f"Residual block, two orthogonality computations: {self.residual_agreement:.3e}", ""]
        lines += ["## Checks", ""] + [f"- {k}: {'ok' if v else 'FAILED'}" for k, v in self.checks.items()]
        lines += [f"- bookkeeping {k}: {'ok' if v else 'FAILED'}" for k, v in self.bookkeeping.items()]
        return "\n".join(lines) + "\n"

    @property
    def order_cols(self) -> list:
        cols = []
        for c, dim in self.diagnostics.get("block_dims", {}).items():
            cols += [c] if dim == 1 else [f"{c}[{j}]" for j in range(dim)]
        return cols


def _fmt_c(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-9 * max(1.0, abs(z)):
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _align(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Basis of span A closest to B column by column (least squares)."""
    X = np.linalg.lstsq(A, B, rcond=None)[0]
    return A @ X


def dubrovin_check(ci: CompleteIntersection, theta0: float = 0.1, order: int = 60, M: int = 20,
                   rtol: float = 1e-10, atol: float = 1e-13, tol_cmp: float = 1e-3,
                   convention: str = "auto", tol_residual: float = 1e-8) -> DubrovinReport:
    """Compare Im ^A f_{theta0,c} with Gamma(Im ^B f_c) for every exponent c."""
    t_start = time.perf_counter()
    conv = resolve_convention(convention)
    G = gamma_map_matrix(ci, conv)
    PA, PB = pairing_A_matrix(ci), pairing_B_matrix(ci)
    tup = pipeline_tuple(ci, theta0)
    frame = asymptotic_classes(ci, theta0, M=M, order=order, rtol=rtol, atol=atol)
    C = frame.mutation_system().exponents
    word = bullet_transport_word(C, theta0, tup)
    a0 = apply_braid(frame.mutation_system(), word)
    b_bullet = build_b_mutation_system(ci, tup)
    b0 = apply_braid(b_bullet, word)
    if tuple(a0.order) != tuple(b0.order):
        raise StructureError("A and B orders disagree at theta0")
    distances = {c: sub.subspace_distance(a0.f_block(c), G @ b0.f_block(c)) for c in a0.order}

    # Gram matrices: A-side bases aligned to Gamma of the B-side bases
    aligned = [_align(a0.f_block(c), G @ b0.f_block(c)) for c in a0.order]
    FA = np.hstack(aligned)
    FB = np.hstack([b0.f_block(c) for c in b0.order])
    gram_a = FA.T @ PA @ FA
    gram_b = FB.T @ PB @ FB
    gram_a_raw = a0.f.T @ PA @ a0.f
    signs = [1.0 if (np.vdot(a, g).real >= 0) else -1.0 for a, g in zip(FA.T, (G @ FB).T)]
    D = np.diag(signs)
    scale = max(1.0, float(np.abs(gram_b).max()))
    gram_diff = float(np.abs(D @ gram_a @ D - gram_b).max() / scale)

    residual = None
    if ZERO_ID in C.ids:
        lines = {c: G @ b_bullet.f_block(c) for c in b_bullet.order if c != ZERO_ID}
        via_a = extract_zero_block(ci, lines, b_bullet.order, PA)
        residual = sub.subspace_distance(G @ b_bullet.f_block(ZERO_ID), via_a)

    bk = bullet_bookkeeping(C, theta0, tup)
    book = {"first inversion-set identity": bool(bk.first_identity),
            "second inversion-set identity": bool(bk.second_identity)}
    # reassemble the tuple frame from the theta0 frame through reindexing
    try:
        sd0 = to_stokes_data(a0)
        assembled = assemble_theta_bullet(StokesStructure(sd0, theta0), tup)
        fb = frame.mutation_system()
        d_assembled = max(sub.subspace_distance(assembled.f_block(c), fb.f_block(c)) for c in fb.order)
        book["reindexing reassembles the tuple frame"] = d_assembled <= tol_cmp
    except (StructureError, ValueError):
        d_assembled = math.inf
        book["reindexing reassembles the tuple frame"] = False

    diagnostics = {
        "block_dims": {c: int(a0.block_dims[c]) for c in a0.order},
        "frame_cond": frame.diagnostics["frame_cond"],
        "series_order": order, "M": M,
        "reassembly_distance": d_assembled,
        "a_residual_distance": distances.get(ZERO_ID),
        "runtime_s": time.perf_counter() - t_start,
        "line_diagnostics": {c: {k: v for k, v in vars(d).items() if isinstance(v, (int, float))}
                             for c, d in frame.diagnostics["lines"].items()},
    }
    return DubrovinReport(
        variety=ci.label, theta0=theta0, convention=conv, order=tuple(a0.order),
        tuple_angles={c: tup[c] for c in C.ids}, braid_word=str(word), distances=distances,
        gram_a=gram_a, gram_b=gram_b, gram_a_raw=gram_a_raw, signs=signs, gram_difference=gram_diff,
        residual_agreement=residual, bookkeeping=book,
        tolerances={"tol_cmp": tol_cmp, "tol_residual": tol_residual, "rtol": rtol, "atol": atol},
        diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# commands


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(path: str, tol: float = 1e-10) -> int:
    obj, _ = load(path)
    if isinstance(obj, tuple):
        raise MalformedInput("validate expects stokes-data or mutation-system")
    rep = validate_mutation_system(obj, tol) if isinstance(obj, MutationSystem) else validate_stokes_data(obj, tol)
    print(str(rep))
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_mutate(path: str, word: str, out: str | None = None) -> int:
    obj, doc = load(path)
    if isinstance(obj, tuple):
        raise MalformedInput("mutate expects stokes-data or mutation-system")
    m = len(obj.order)
    try:
        w = parse_word(word, m)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    new = apply_braid(obj, w)
    meta = dict(doc.get("meta") or {})
    meta["braid_applied"] = str(w)
    if isinstance(new, MutationSystem):
        text = dumps(mutation_system_json(new, doc.get("side"), meta))
    else:
        text = dumps(stokes_data_json(new, meta))
    _write(text, out)
    return EXIT_OK


def cmd_factor(path: str, theta0: float | None = None, out: str | None = None) -> int:
    obj, _ = load(path)
    if not isinstance(obj, tuple):
        raise MalformedInput("factor expects a stokes-multiplier document")
    C, th, g, dims = obj
    th = th if theta0 is None else theta0
    try:
        factors = factorize_stokes_multiplier(g, C, th, dims)
    except StructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    n = g.shape[0]
    doc = {"format": FORMAT, "version": FORMAT_VERSION, "kind": "stokes-factors", "theta0": th,
           "factors": [{"theta": t, "matrix": matrix_json(fk), "identity": bool(np.allclose(fk, np.eye(n)))}
                       for t, fk in factors]}
    _write(dumps(doc), out)
    return EXIT_OK


def cmd_fano_info(ci: CompleteIntersection, out: str | None = None) -> int:
    rep = property_O_check(ci)
    doc = {
        "variety": ci.label, "dim": ci.dim, "index": ci.index, "degree": ci.degree,
        "euler_characteristic": topological_euler(ci), "primitive_dim": ci.b_prim,
        "cohomology_dim": ci.n_total,
        "exponents": [{"id": c, "value": cjson(v)} for c, v in exponent_values(ci).items()],
        "T_max": rep.T_max, "property_O": rep.clauses,
        "spectrum": [{"value": cjson(v), "multiplicity": m} for v, m in rep.eigenvalues],
        "quantum_ring_matrix": matrix_json(quantum_ring_matrix(ci)),
    }
    _write(dumps(doc), out)
    return EXIT_OK


def cmd_euler_matrix(ci: CompleteIntersection, out: str | None = None) -> int:
    ks = range(ci.index)
    exact = [[int(euler_chi_hrr(ci, i, j)) for j in ks] for i in ks]
    numeric = euler_matrix(ci)
    doc = {"variety": ci.label, "line_bundles": [f"O({k})" for k in ks], "euler_matrix": exact,
           "pairing_residual": float(np.abs(numeric - np.array(exact)).max())}
    _write(dumps(doc), out)
    return EXIT_OK


def cmd_gamma_basis(ci: CompleteIntersection, convention: str = "auto", out: str | None = None) -> int:
    conv = resolve_convention(convention)
    G = gamma_map_matrix(ci, conv)
    from .cohomology import mukai_vector

    items = []
    for k in range(ci.index):
        v = G @ mukai_vector(ci, k).to_vector()
        items.append({"k": k, "vector": class_to_json(v), "ambient": hpoly_format(v[: ci.n_amb])})
    _write(dumps({"variety": ci.label, "convention": conv, "classes": items}), out)
    return EXIT_OK


def cmd_stokes_compute(ci: CompleteIntersection, theta0: float, order: int, rtol: float, atol: float,
                       at: str = "theta0", out: str | None = None) -> int:
    frame = asymptotic_classes(ci, theta0, order=order, rtol=rtol, atol=atol)
    if at == "theta0":
        frame = frame.at_theta0()
    ms = frame.mutation_system()
    meta = {"side": "A", "variety": ci.label, "theta0": theta0, "at": at, "series_order": order,
            "rtol": rtol, "atol": atol, "M": frame.diagnostics["M"],
            "radii": {c: [d.rho_seed, d.rho_outer] for c, d in frame.diagnostics["lines"].items()},
            "tuple": None if at == "theta0" else {c: frame.tuple[c] for c in ms.order}}
    _write(dumps(mutation_system_json(ms, "A", meta)), out)
    return EXIT_OK


def cmd_check(ci: CompleteIntersection, theta0: float, order: int, rtol: float, atol: float,
              tol_cmp: float, convention: str, out: str | None = None, report: str | None = None) -> DubrovinReport:
    rep = dubrovin_check(ci, theta0, order=order, rtol=rtol, atol=atol, tol_cmp=tol_cmp, convention=convention)
    md = rep.to_markdown()
    if report:
        Path(report).write_text(md)
    else:
        sys.stdout.write(md)
    if out:
        Path(out).write_text(dumps(_jsonable(rep.to_json())))
    return rep


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stokes-mutant", description="Mutation systems, Stokes data and "
                                "the Dubrovin-type comparison for Fano complete intersections.")
    p.add_argument("--version", action="version", version=__version__)
    top = p.add_subparsers(dest="group", required=True)

    def variety(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--pn", type=int, metavar="n", help="projective space P^n")
        g.add_argument("--ci", type=int, nargs="+", metavar="N d", help="complete intersection: N then degrees")

    def numerics(sp):
        sp.add_argument("--theta0", type=float, default=0.1)
        sp.add_argument("--order", type=int, default=60, help="series order at infinity")
        sp.add_argument("--rtol", type=float, default=1e-10)
        sp.add_argument("--atol", type=float, default=1e-13)

    mut = top.add_parser("mutsys", help="mutation systems and Stokes data files").add_subparsers(
        dest="cmd", required=True)
    sp = mut.add_parser("validate")
    sp.add_argument("path")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp = mut.add_parser("mutate")
    sp.add_argument("path")
    sp.add_argument("word", help='braid word, e.g. "s1 s2^-1"; D is the half twist')
    sp.add_argument("--out")
    sp = mut.add_parser("factor")
    sp.add_argument("path")
    sp.add_argument("--theta0", type=float)
    sp.add_argument("--out")

    fano = top.add_parser("fano", help="classical data of a Fano complete intersection").add_subparsers(
        dest="cmd", required=True)
    for name in ("info", "euler-matrix", "gamma-basis"):
        sp = fano.add_parser(name)
        variety(sp)
        sp.add_argument("--out")
        if name == "gamma-basis":
            sp.add_argument("--convention", choices=["a", "b", "auto"], default="auto")

    st = top.add_parser("stokes", help="asymptotic classes of the quantum connection").add_subparsers(
        dest="cmd", required=True)
    sp = st.add_parser("compute")
    variety(sp)
    numerics(sp)
    sp.add_argument("--at", choices=["theta0", "tuple"], default="theta0")
    sp.add_argument("--out")

    du = top.add_parser("dubrovin", help="compare A- and B-side").add_subparsers(dest="cmd", required=True)
    sp = du.add_parser("check")
    variety(sp)
    numerics(sp)
    sp.add_argument("--tol-cmp", type=float, default=1e-3)
    sp.add_argument("--convention", choices=["a", "b", "auto"], default="auto")
    sp.add_argument("--out", help="JSON report path")
    sp.add_argument("--report", help="markdown report path (stdout otherwise)")
    return p


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    key = (args.group, args.cmd)
    if key == ("mutsys", "validate"):
        return cmd_validate(args.path, args.tol)
    if key == ("mutsys", "mutate"):
        return cmd_mutate(args.path, args.word, args.out)
    if key == ("mutsys", "factor"):
        return cmd_factor(args.path, args.theta0, args.out)
    ci = variety_from_args(args)
    if key == ("fano", "info"):
        return cmd_fano_info(ci, args.out)
    if key == ("fano", "euler-matrix"):
        return cmd_euler_matrix(ci, args.out)
    if key == ("fano", "gamma-basis"):
        return cmd_gamma_basis(ci, args.convention, args.out)
    if key == ("stokes", "compute"):
        return cmd_stokes_compute(ci, args.theta0, args.order, args.rtol, args.atol, args.at, args.out)
    if key == ("dubrovin", "check"):
        rep = cmd_check(ci, args.theta0, args.order, args.rtol, args.atol, args.tol_cmp, args.convention,
                        args.out, args.report)
        return EXIT_OK if rep.verdict else EXIT_INVALID
    raise MalformedInput(f"unknown command {key}")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        code = run(argv)
    except MalformedInput as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        code = EXIT_MALFORMED
    except StructureError as exc:
        print(f"invalid structure: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    except (AccuracyError, ObstructionError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_MALFORMED
    return code


if __name__ == "__main__":
    sys.exit(main())
