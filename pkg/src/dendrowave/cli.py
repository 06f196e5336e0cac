"""Command-line pipeline: cluster, transform, filter, padic, check.

Conventions shared by every subcommand: CSV files are comma separated
with a header row, UTF-8, decimal points; dendrograms travel as JSON
only; floats print with 12 significant digits while rationals stay exact.
Files are written into --out, else $DENDROWAVE_OUTDIR, else the working
directory.  Exit codes: 0 success, 1 a validation failure (for example a
matrix that is not ultrametric), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .demo import demo_names, load_demo, walkthrough_text
from .haar import (
    THRESHOLD_RULES,
    WaveletDecomposition,
    detail_norms,
    forward,
    forward_indicator,
    hard_threshold,
    inverse,
    reconstruct_matrix_form,
)
from .hcluster import LINKAGES, agglomerate, pairwise_euclidean
from .padic import (
    cluster_code,
    decode,
    dilate,
    encode,
    pdistance,
    pnorm,
    power_repr,
)
from .tree import (
    Dendrogram,
    ValidationError,
    cluster,
    from_json,
    load_json,
    save_json,
    terminal,
)
from .ultrametric import (
    canonical_form,
    cophenetic,
    is_ultrametric,
    matrix_from_csv,
    matrix_to_csv,
    triangle_classify,
)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _outdir(args) -> Path:
    path = getattr(args, "out", None) or os.environ.get("DENDROWAVE_OUTDIR") or "."
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------------------- CSV

def _read_rows(path: str) -> list[list[str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return [row for row in csv.reader(fh) if row]
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def read_data_csv(path: str) -> tuple[list[str], np.ndarray]:
    """Numeric observation matrix: header row of feature names, then rows."""
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [s.strip() for s in rows[0]]
    width = len(header)
    data = np.zeros((len(rows) - 1, width))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ValidationError(
                f"{path}: row {i}: expected {width} values, got {len(row)}"
            )
        for j, cell in enumerate(row, start=1):
            try:
                data[i - 2, j - 1] = float(cell)
            except ValueError as exc:
                raise ValidationError(
                    f"{path}: row {i}, column {j}: could not parse {cell.strip()!r}"
                ) from exc
    return header, data


def _write_csv(path: Path, rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _write_branch_csv(path: Path, w: WaveletDecomposition) -> None:
    header = ["terminal"] + [f"cluster_{k}" for k in w.order]
    rows = [header]
    for i, label in enumerate(w.tree.labels):
        rows.append([label] + [str(int(v)) for v in w.branch_codes[i]])
    _write_csv(path, rows)


def _write_detail_csv(path: Path, w: WaveletDecomposition, features: list[str]) -> None:
    rows = [["cluster"] + features]
    for k in w.order:
        rows.append([f"cluster_{k}"] + [_fmt(v) for v in w.details[k - 1]])
    _write_csv(path, rows)


def _write_smooth_csv(path: Path, w: WaveletDecomposition, features: list[str]) -> None:
    _write_csv(path, [features, [_fmt(v) for v in w.smooth]])


def _read_branch_csv(path: str) -> tuple[list[str], np.ndarray]:
    """Branch-code CSV as written by transform: labels column, sign columns."""
    rows = _read_rows(path)
    n = len(rows) - 1
    if n < 1:
        raise ValidationError(f"{path}: expected a header row plus terminal rows")
    labels = [row[0] for row in rows[1:]]
    out = np.zeros((n, n - 1), dtype=np.int8)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != n:
            raise ValidationError(f"{path}: row {i}: expected {n} columns")
        for j, cell in enumerate(row[1:], start=2):
            try:
                out[i - 2, j - 2] = int(cell)
            except ValueError as exc:
                raise ValidationError(
                    f"{path}: row {i}, column {j}: could not parse {cell.strip()!r}"
                ) from exc
    return labels, out


def _read_float_table(path: str, skip_first_col: bool) -> tuple[list[str], np.ndarray]:
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = rows[0][1:] if skip_first_col else rows[0]
    body = rows[1:]
    out = np.zeros((len(body), len(header)))
    for i, row in enumerate(body, start=2):
        cells = row[1:] if skip_first_col else row
        if len(cells) != len(header):
            raise ValidationError(f"{path}: row {i}: expected {len(header)} values")
        for j, cell in enumerate(cells, start=1):
            try:
                out[i - 2, j - 1] = float(cell)
            except ValueError as exc:
                raise ValidationError(
                    f"{path}: row {i}, column {j}: could not parse {cell.strip()!r}"
                ) from exc
    return [s.strip() for s in header], out


# -------------------------------------------------------------------- bundles

def save_bundle(w: WaveletDecomposition, features: list[str], outdir: Path) -> list[Path]:
    """Write C.csv, D.csv, smooth.csv, dendrogram.json and meta.json."""
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "C": outdir / "C.csv",
        "D": outdir / "D.csv",
        "smooth": outdir / "smooth.csv",
        "tree": outdir / "dendrogram.json",
        "meta": outdir / "meta.json",
    }
    _write_branch_csv(paths["C"], w)
    _write_detail_csv(paths["D"], w, features)
    _write_smooth_csv(paths["smooth"], w, features)
    save_json(w.tree, paths["tree"])
    meta = {
        "format": "decomposition",
        "mode": w.mode,
        "n_terminals": w.n_terminals,
        "n_features": w.n_features,
        "features": features,
        "child_sizes": None
        if w.child_sizes is None
        else [[int(a), int(b)] for a, b in w.child_sizes],
    }
    with open(paths["meta"], "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return list(paths.values())


def load_bundle(bundle_dir: str) -> tuple[WaveletDecomposition, list[str]]:
    base = Path(bundle_dir)
    meta_path = base / "meta.json"
    try:
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {meta_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{meta_path}: not valid JSON: {exc}") from exc
    if meta.get("format") != "decomposition":
        raise ValidationError(f"{meta_path}: expected a decomposition bundle")
    tree = load_json(base / "dendrogram.json")
    _, C = _read_branch_csv(str(base / "C.csv"))
    if C.shape[0] != tree.n_terminals:
        raise ValidationError(f"{base / 'C.csv'}: rows do not match the dendrogram")
    features, D = _read_float_table(str(base / "D.csv"), skip_first_col=True)
    _, smooth = _read_float_table(str(base / "smooth.csv"), skip_first_col=False)
    sizes = meta.get("child_sizes")
    child_sizes = None if sizes is None else np.asarray(sizes, dtype=np.int64)
    w = WaveletDecomposition(
        tree, C, D, smooth[0], meta.get("mode", "ultrametric"), child_sizes=child_sizes
    )
    return w, features


# ------------------------------------------------------------------- commands

def cmd_cluster(args) -> int:
    header, X = read_data_csv(args.data)
    if X.shape[0] < 2:
        raise ValidationError(f"{args.data}: need n >= 2 observation rows")
    diss = pairwise_euclidean(X)
    if args.squared:
        diss = diss**2
    tree = agglomerate(diss, args.linkage)
    outdir = _outdir(args)
    tree_path = outdir / "dendrogram.json"
    coph_path = outdir / "cophenetic.csv"
    save_json(tree, tree_path)
    use = "levels" if tree.levels is not None else "ranks"
    M = cophenetic(tree, use=use)
    with open(coph_path, "w", encoding="utf-8") as fh:
        fh.write(matrix_to_csv(M, tree.labels))
    print(f"clustered {X.shape[0]} observations with {args.linkage} linkage")
    print(f"wrote {tree_path}")
    print(f"wrote {coph_path} (cophenetic {use})")
    return 0


def cmd_transform(args) -> int:
    tree = load_json(args.tree)
    if args.mode == "indicator":
        if args.data != "-":
            print(
                "warning: indicator mode transforms the identity matrix; "
                f"ignoring {args.data}",
                file=sys.stderr,
            )
        w = forward_indicator(tree)
        features = list(w.tree.labels)
    else:
        if args.data == "-":
            raise ValidationError("ultrametric mode needs a data CSV")
        features, X = read_data_csv(args.data)
        w = forward(X, tree)
    outdir = _outdir(args)
    for path in save_bundle(w, features, outdir):
        print(f"wrote {path}")
    if args.check:
        direct = inverse(w)
        matrix_form = reconstruct_matrix_form(w)
        if args.mode == "indicator":
            original = np.eye(tree.n_terminals)
        else:
            original = X
        err_direct = float(np.abs(direct - original).max(initial=0.0))
        err_paths = float(np.abs(direct - matrix_form).max(initial=0.0))
        print(f"round-trip max abs error: {_fmt(err_direct)}")
        print(f"recursive vs matrix form max abs error: {_fmt(err_paths)}")
        if err_direct >= 1e-9:
            print("check FAILED: reconstruction error above 1e-9", file=sys.stderr)
            return 1
        print("check passed")
    return 0


def cmd_filter(args) -> int:
    w, features = load_bundle(args.bundle)
    outdir = _outdir(args)
    if args.sweep:
        print("keep-k sweep (Frobenius error against the full reconstruction):")
        full = inverse(w)
        for k in range(w.details.shape[0] + 1):
            rec = inverse(hard_threshold(w, "keep-k", k))
            err = float(np.linalg.norm(rec - full))
            print(f"  k={k}: {_fmt(err)}")
        return 0
    if args.value is None:
        raise ValidationError("--value is required unless --sweep is given")
    value = int(args.value) if args.rule == "keep-k" else float(args.value)
    filtered = hard_threshold(w, args.rule, value)
    full = inverse(w)
    rec = inverse(filtered)
    bundle_dir = outdir / "filtered"
    for path in save_bundle(filtered, features, bundle_dir):
        print(f"wrote {path}")
    rec_path = outdir / "reconstruction.csv"
    rows = [features] + [[_fmt(v) for v in row] for row in rec]
    _write_csv(rec_path, rows)
    print(f"wrote {rec_path}")
    zeroed = int(
        np.sum(np.any(filtered.details != w.details, axis=1))
    )
    print(f"rule {args.rule}, value {args.value}: {zeroed} detail rows changed")
    print(f"Frobenius error: {_fmt(float(np.linalg.norm(rec - full)))}")
    print(f"max abs error: {_fmt(float(np.abs(rec - full).max(initial=0.0)))}")
    return 0


def _node_by_name(tree: Dendrogram, name: str):
    if name in tree.labels:
        return terminal(tree.labels.index(name) + 1)
    m = re.fullmatch(r"q(\d+)", name)
    if m and 1 <= int(m.group(1)) <= tree.n_clusters:
        return cluster(int(m.group(1)))
    raise ValidationError(f"unknown node {name!r} (terminal label or q<rank>)")


def cmd_padic(args) -> int:
    base = args.base
    if base == 2:
        print(
            "warning: base 2 decimal values can collide; use base >= 3 "
            "to keep codes distinct",
            file=sys.stderr,
        )
    if args.padic_cmd == "decode":
        labels, mat = _read_branch_csv(args.matrix)
        tree = decode(mat, labels=labels)
        outdir = _outdir(args)
        path = outdir / "dendrogram.json"
        save_json(tree, path)
        print(f"decoded {tree.n_terminals} terminals, {tree.n_clusters} clusters")
        print(f"wrote {path}")
        return 0

    tree = load_json(args.tree)
    if args.padic_cmd == "encode":
        codes, _ = encode(tree, base)
        print(f"base p = {base}")
        for i, code in enumerate(codes, start=1):
            print(f"{tree.labels[i - 1]} = {code.to_string()} ({code.decimal()})")
        return 0
    if args.padic_cmd == "dist":
        a = _node_by_name(tree, args.a)
        b = _node_by_name(tree, args.b)
        print(power_repr(pdistance(a, b, d=tree, base=base), base))
        return 0
    if args.padic_cmd == "norm":
        node = _node_by_name(tree, args.node)
        print(power_repr(pnorm(tree, node, base), base))
        return 0
    # dilate
    if args.all:
        codes, _ = encode(tree, base)
        sym = str(base)
        for i, code in enumerate(codes, start=1):
            print(
                f"{tree.labels[i - 1]}: {code.to_string(sym)} -> "
                f"{dilate(code).to_string(sym)}"
            )
        return 0
    if not args.node:
        raise ValidationError("dilate needs a node name or --all")
    node = _node_by_name(tree, args.node)
    code = cluster_code(tree, node, base)
    sym = str(base)
    print(f"{code.to_string(sym)} -> {dilate(code).to_string(sym)}")
    return 0


def cmd_check(args) -> int:
    if args.demo:
        if args.demo not in demo_names():
            raise ValidationError(
                f"unknown demo {args.demo!r}; available: {', '.join(demo_names())}"
            )
        load_demo(args.demo)
        print(walkthrough_text(), end="")
        return 0
    if not args.input:
        raise ValidationError("check needs a matrix CSV, a dendrogram JSON, or --demo")
    path = args.input
    if path.endswith(".json"):
        tree = load_json(path)
        print(f"dendrogram: {tree.n_terminals} terminals, {tree.n_clusters} ranked merges")
        print(f"levels: {'present' if tree.levels is not None else 'absent'}")
        M = cophenetic(tree, use="ranks")
        verdict = is_ultrametric(M, tol=0)
        print(f"cophenetic ranks ultrametric: {'PASS' if verdict else 'FAIL'}")
        return 0 if verdict else 1
    if not path.endswith(".csv"):
        raise ValidationError(f"cannot tell matrix CSV from dendrogram JSON: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        labels, M = matrix_from_csv(fh.read())
    failures = 0
    try:
        verdict = is_ultrametric(M)
    except ValidationError as exc:
        print(f"matrix check FAILED: {exc}")
        return 1
    if verdict:
        print("ultrametric: PASS")
    else:
        failures += 1
        x, y, z = verdict.witness
        print("ultrametric: FAIL")
        print(
            f"  witness: ({labels[x]},{labels[y]},{labels[z]}) with "
            f"d({labels[x]},{labels[z]}) = {_fmt(M[x, z])} > "
            f"max({_fmt(M[x, y])}, {_fmt(M[y, z])})"
        )
    census = triangle_classify(M)
    print(
        f"triangles: equilateral={census.equilateral} "
        f"isosceles-small-base={census.isosceles_small_base} "
        f"violating={census.violating}"
    )
    if verdict:
        order_tree = agglomerate(M, "single")
        order = [i - 1 for i in order_tree.leaf_order()]
        _, canon = canonical_form(M, order)
        print(f"canonical layout under single-linkage order: {'PASS' if canon else 'FAIL'}")
        if not canon:
            failures += 1
    return 1 if failures else 0


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dendrowave",
        description="Dendrogram wavelets, p-adic codes, and ultrametric checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cluster = sub.add_parser("cluster", help="agglomerate a data CSV into a dendrogram")
    p_cluster.add_argument("data", help="observation CSV (header row, one row per item)")
    p_cluster.add_argument(
        "--linkage", default="single", choices=sorted(LINKAGES), help="merge criterion"
    )
    p_cluster.add_argument(
        "--squared",
        action="store_true",
        help="feed squared Euclidean distances (classical ward/centroid/median)",
    )
    p_cluster.add_argument("--out", help="output directory")
    p_cluster.set_defaults(func=cmd_cluster)

    p_transform = sub.add_parser("transform", help="run the wavelet transform")
    p_transform.add_argument("data", help="observation CSV, or - in indicator mode")
    p_transform.add_argument("tree", help="dendrogram JSON")
    p_transform.add_argument(
        "--mode", default="ultrametric", choices=("ultrametric", "indicator")
    )
    p_transform.add_argument(
        "--check", action="store_true", help="verify the round trip below 1e-9"
    )
    p_transform.add_argument("--out", help="output directory")
    p_transform.set_defaults(func=cmd_transform)

    p_filter = sub.add_parser("filter", help="hard-threshold a decomposition bundle")
    p_filter.add_argument("bundle", help="directory written by transform")
    p_filter.add_argument("--rule", default="keep-k", choices=THRESHOLD_RULES)
    p_filter.add_argument("--value", help="threshold t, or k for keep-k")
    p_filter.add_argument(
        "--sweep", action="store_true", help="print the full keep-k error table"
    )
    p_filter.add_argument("--out", help="output directory")
    p_filter.set_defaults(func=cmd_filter)

    p_padic = sub.add_parser("padic", help="codes, sums, distances, norms, dilation")
    p_padic.add_argument("--base", type=int, default=3, help="the prime-like base p")
    padic_sub = p_padic.add_subparsers(dest="padic_cmd", required=True)

    pp_encode = padic_sub.add_parser("encode", help="print every terminal code")
    pp_encode.add_argument("tree", help="dendrogram JSON")

    pp_dist = padic_sub.add_parser("dist", help="distance between two nodes")
    pp_dist.add_argument("tree", help="dendrogram JSON")
    pp_dist.add_argument("a", help="terminal label or q<rank>")
    pp_dist.add_argument("b", help="terminal label or q<rank>")

    pp_norm = padic_sub.add_parser("norm", help="norm of one node")
    pp_norm.add_argument("tree", help="dendrogram JSON")
    pp_norm.add_argument("node", help="terminal label or q<rank>")

    pp_dilate = padic_sub.add_parser("dilate", help="multiply codes by 1/p")
    pp_dilate.add_argument("tree", help="dendrogram JSON")
    pp_dilate.add_argument("node", nargs="?", help="terminal label or q<rank>")
    pp_dilate.add_argument("--all", action="store_true", help="dilate every terminal")

    pp_decode = padic_sub.add_parser("decode", help="rebuild a dendrogram from C.csv")
    pp_decode.add_argument("matrix", help="branch-code CSV written by transform")
    pp_decode.add_argument("--out", help="output directory")

    p_padic.set_defaults(func=cmd_padic)

    p_check = sub.add_parser("check", help="validate a matrix or dendrogram")
    p_check.add_argument("input", nargs="?", help="matrix CSV or dendrogram JSON")
    p_check.add_argument(
        "--demo",
        help=f"print a built-in walkthrough instead ({', '.join(demo_names())})",
    )
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else 0 if code is None else 2
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
