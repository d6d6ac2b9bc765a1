"""Command-line entry point: reproducible experiment runs with file outputs.

Subcommands
-----------
sort        run the streaming sorter, write trace.csv (and forest.json,
            sequence.csv when the run is small enough to materialize)
simulate    sample a field, run the particle system, write rep.json and
            field.csv (rep.svg with --svg)
estimate    growth-constant experiments (ratio | slope | strip), write
            estimate.json and estimate.csv
check       run a named invariant suite; exit 1 with a counterexample dump
            on violation

Every subcommand takes --seed (default 1729, fixed so bare invocations are
reproducible) and writes byte-identical outputs for identical arguments.
Exit codes: 0 success, 1 invariant violation, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from . import estimator, hammersley, heap_sorter, oracle, poisson_field
from .offspring import parse_spec

DEFAULT_SEED = 1729


# ---------------------------------------------------------------------------
# small io helpers
# ---------------------------------------------------------------------------

def _outdir(args) -> Path:
    # HEAPSTREAM_OUT is the only env override: it replaces the default output dir
    out = Path(args.out if args.out is not None
               else os.environ.get("HEAPSTREAM_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_trace_csv(path: Path, r_values) -> None:
    with open(path, "w", newline="") as fp:
        fp.write("n,R\n")
        for i, r in enumerate(r_values, start=1):
            fp.write(f"{i},{int(r)}\n")


def _write_sequence_csv(path: Path, labels, caps) -> None:
    with open(path, "w", newline="") as fp:
        fp.write("u,nu\n")
        for u, nu in zip(labels, caps):
            fp.write(f"{u:.17g},{int(nu)}\n")


def _read_sequence_csv(path: str) -> list[tuple[float, int]]:
    pairs = []
    with open(path, newline="") as fp:
        reader = csv.reader(fp)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["u", "nu"]:
            raise ValueError(f"sequence file {path}: expected header 'u,nu'")
        for row in reader:
            if not row:
                continue
            pairs.append((float(row[0]), int(row[1])))
    return pairs


def _parse_widths(text: str) -> list[float]:
    """Comma-separated widths; a token 'e<k>' means e**k."""
    widths = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.startswith("e") and tok[1:].lstrip("-").isdigit():
            widths.append(math.e ** int(tok[1:]))
        else:
            try:
                widths.append(float(tok))
            except ValueError:
                raise ValueError(f"bad width token {tok!r}") from None
    return widths


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sort(args) -> int:
    out = _outdir(args)
    if args.sequence_file:
        pairs = _read_sequence_csv(args.sequence_file)
        forest, trace = heap_sorter.run(pairs)
        labels = trace.labels
        caps = trace.capacities
    else:
        if args.n is None:
            raise ValueError("--n is required unless --sequence-file is given")
        dist = parse_spec(args.mu)
        if args.n <= heap_sorter.FOREST_DUMP_MAX_N:
            labels, caps = heap_sorter.random_sequence(dist, args.n, args.seed)
            forest, trace = heap_sorter.run(zip(labels, caps))
        else:
            trace = heap_sorter.run_random(dist, args.n, args.seed)
            forest, labels, caps = None, None, None
    _write_trace_csv(out / "trace.csv", trace.r_values)
    written = ["trace.csv"]
    if forest is not None:
        _write_json(out / "forest.json", forest.to_tree_dicts())
        _write_sequence_csv(out / "sequence.csv", labels, caps)
        written += ["forest.json", "sequence.csv"]
    n = len(trace)
    final = trace.tree_count(n) if n else 0
    print(f"sorted n={n} final R={final}; wrote {', '.join(written)} to {out}")
    return 0


def cmd_simulate(args) -> int:
    out = _outdir(args)
    dist = parse_spec(args.mu)
    if not args.a < args.b:
        raise ValueError(f"--a must be < --b, got {args.a} >= {args.b}")
    field = poisson_field.sample_field(args.a, args.b, args.horizon, dist, args.seed)
    rep = hammersley.simulate(field)
    _write_json(out / "rep.json", rep.to_json_dict())
    poisson_field.dump_atoms_csv(field, str(out / "field.csv"))
    written = ["rep.json", "field.csv"]
    if args.svg:
        (out / "rep.svg").write_text(
            hammersley.render_svg(rep, field, args.svg_width, args.svg_height))
        written.append("rep.svg")
    print(f"simulated {len(field)} atoms on ({args.a}, {args.b}) x (0, {args.horizon}]; "
          f"wrote {', '.join(written)} to {out}")
    return 0


def cmd_estimate(args) -> int:
    out = _outdir(args)
    dist = parse_spec(args.mu)
    if args.method in ("ratio", "slope"):
        if args.n is None:
            raise ValueError(f"--n is required for method {args.method}")
        res = estimator.estimate_c_discrete(dist, args.n, args.replicas,
                                            seed=args.seed, jobs=args.jobs)
        doc = res.to_json_dict()
        doc["method"] = args.method
        _write_json(out / "estimate.json", doc)
        headline = res.ratio if args.method == "ratio" else res.slope
        if res.warning:
            print(f"warning: {res.warning}", file=sys.stderr)
    else:
        if args.widths is None:
            raise ValueError("--widths is required for method strip")
        widths = _parse_widths(args.widths)
        res = estimator.estimate_r_inf(dist, widths, args.replicas, seed=args.seed,
                                       coupled=not args.uncoupled, jobs=args.jobs)
        doc = res.to_json_dict()
        doc["method"] = "strip"
        _write_json(out / "estimate.json", doc)
        with open(out / "counts.csv", "w", newline="") as fp:
            fp.write(",".join(f"W={w:.17g}" for w in res.widths) + "\n")
            for row in res.counts:
                fp.write(",".join(str(int(v)) for v in row) + "\n")
        headline = res.estimates[-1]
    (out / "estimate.csv").write_text(res.to_csv_text())
    print(f"{headline.method}: {headline.point:.4f} "
          f"[{headline.ci_low:.4f}, {headline.ci_high:.4f}] "
          f"({headline.replicas} replicas); wrote estimate.json, estimate.csv to {out}")
    return 0


# ---------------------------------------------------------------------------
# invariant suites
# ---------------------------------------------------------------------------

def _dump_field_counterexample(out: Path, name: str, field, rep=None) -> None:
    poisson_field.dump_atoms_csv(field, str(out / f"{name}.field.csv"))
    if rep is not None:
        _write_json(out / f"{name}.rep.json", rep.to_json_dict())


def _suite_optimality(dist, seed: int, trials: int, out: Path) -> tuple[bool, str]:
    # capacities are pinned to uniform {1,2,3} by the suite definition
    rng = np.random.default_rng(seed)
    for k in range(trials):
        n = int(rng.integers(1, 9))
        labels = rng.random(n)
        caps = rng.integers(1, 4, size=n)
        pairs = list(zip(labels.tolist(), caps.tolist()))
        _, trace = heap_sorter.run(pairs)
        for m in range(1, n + 1):
            greedy = trace.tree_count(m)
            optimal = oracle.min_heap_partition(pairs[:m])
            if greedy != optimal:
                path = out / "optimality.sequence.csv"
                _write_sequence_csv(path, labels, caps)
                return False, (f"trial {k}: greedy R({m})={greedy} but optimum={optimal}; "
                               f"sequence dumped to {path}")
    return True, f"greedy matched the exhaustive optimum on {trials} instances (all prefixes)"


def _suite_ulam(dist, seed: int, trials: int, out: Path, n: int = 2000) -> tuple[bool, str]:
    dist = parse_spec("dirac:1")   # the reduction only holds for capacity 1
    for k in range(trials):
        trace = heap_sorter.run_random(dist, n, seed + k, keep_sequence=True)
        got = trace.tree_count(n)
        want = oracle.lds_length(trace.labels)
        if got != want:
            path = out / "ulam.sequence.csv"
            _write_sequence_csv(path, trace.labels, trace.capacities)
            return False, f"trial {k}: R({n})={got} but longest decreasing run={want}; dumped {path}"
    return True, f"capacity-1 tree count equals decreasing-subsequence length on {trials} runs"


def _suite_scaling(dist, seed: int, trials: int, out: Path) -> tuple[bool, str]:
    factors = [math.e, 1.0 / math.e, 3.7]
    for k in range(trials):
        c = factors[k % len(factors)]
        report = estimator.scaling_check(dist, 0.0, 1.0, 30.0, c,
                                         seed=seed + k, ks_pairs=0)
        if not report.coupling_passed:
            field = poisson_field.sample_field(0.0, 1.0, 30.0, dist, seed + k)
            _dump_field_counterexample(out, "scaling", field, hammersley.simulate(field))
            return False, (f"trial {k}: rescaling by {c} did not map the simulation "
                           f"(max rel err {report.max_rel_err:.3g})")
    return True, f"rescaled simulations matched line-for-line on {trials} trials"


def _suite_monotonicity(dist, seed: int, trials: int, out: Path) -> tuple[bool, str]:
    for k in range(trials):
        wide = poisson_field.sample_field(0.0, 4.0, 10.0, dist, seed + k)
        narrow = poisson_field.restrict(wide, 0.0, 1.0, 0.0, wide.horizon)
        rep_w = hammersley.simulate(wide)
        rep_n = hammersley.simulate(narrow)
        heights_n = set(rep_n.rootless_heights().tolist())
        heights_w = set(rep_w.rootless_heights().tolist())
        if not heights_n <= heights_w:
            _dump_field_counterexample(out, "monotonicity-right", wide, rep_w)
            return False, f"trial {k}: right extension removed a rootless line"

        full = poisson_field.sample_field(0.0, 2.0, 8.0, dist, seed + trials + k)
        cut = poisson_field.restrict(full, 0.0, 2.0, 1.0, full.horizon)
        c_full = hammersley.simulate(full).count_crossings(0.0, 1.0, full.horizon)
        c_cut = hammersley.simulate(cut).count_crossings(0.0, 1.0, full.horizon)
        if c_cut < c_full:
            _dump_field_counterexample(out, "monotonicity-height", full,
                                       hammersley.simulate(full))
            return False, (f"trial {k}: deleting atoms below height 1 lowered the "
                           f"boundary crossings ({c_full} -> {c_cut})")
    return True, f"right-extension and height-deletion couplings held on {trials} trials"


def _suite_restriction(dist, seed: int, trials: int, out: Path) -> tuple[bool, str]:
    for k in range(trials):
        wide = poisson_field.sample_field(-1.0, 1.0, 10.0, dist, seed + k)
        narrow = poisson_field.restrict(wide, 0.0, 1.0, 0.0, wide.horizon)
        rep_w = hammersley.simulate(wide)
        rep_n = hammersley.simulate(narrow)
        ok = _left_compatible(rep_w, rep_n, boundary=0.0)
        if not ok:
            _dump_field_counterexample(out, "restriction", wide, rep_w)
            return False, f"trial {k}: left-boundary restriction changed the interior diagram"
    return True, f"interior diagram agreed under left restriction on {trials} trials"


def _left_compatible(rep_wide, rep_narrow, boundary: float) -> bool:
    """Interior of the wide diagram (labels > boundary) must equal the narrow
    diagram, with fathers at or left of the boundary turned rootless."""
    wide_lines = {}
    x0s = rep_wide.h_x_left()
    for t, x0, x1 in zip(rep_wide.atom_t, x0s, rep_wide.atom_u):
        if x1 > boundary:
            wide_lines[float(t)] = (float(x0), float(x1))
    narrow_lines = {float(l.t): (l.x0, l.x1) for l in rep_narrow.h_lines()}
    if set(wide_lines) != set(narrow_lines):
        return False
    for t, (x0n, x1n) in narrow_lines.items():
        x0w, x1w = wide_lines[t]
        if x1w != x1n:
            return False
        expected_x0 = x0w if x0w > boundary else boundary
        if x0n != expected_x0:
            return False
    # particle lifetimes right of the boundary agree (position, birth, death, open)
    wide_v = {(v.x, v.t0, v.t1, v.open) for v in rep_wide.v_lines() if v.x > boundary}
    narrow_v = set(rep_narrow.v_lines())
    return wide_v == narrow_v


def _suite_timechange(dist, seed: int, trials: int, out: Path) -> tuple[bool, str]:
    for k in range(trials):
        field = poisson_field.sample_field(0.0, 1.0, 50.0, dist, seed + k)
        if len(field) == 0:
            continue
        rep = hammersley.simulate(field)
        _, trace = heap_sorter.run(zip(field.u, field.nu))
        for n in range(1, len(field) + 1):
            got = rep.count_roots(0.0, float(field.t[n - 1]))
            want = trace.tree_count(n)
            if got != want:
                _dump_field_counterexample(out, "timechange", field, rep)
                return False, (f"trial {k}: window count {got} != tree count {want} "
                               f"at n={n}")
    return True, f"window counts matched tree counts at every atom on {trials} fields"


_SUITES = {
    "optimality": _suite_optimality,
    "ulam": _suite_ulam,
    "scaling": _suite_scaling,
    "monotonicity": _suite_monotonicity,
    "restriction": _suite_restriction,
    "timechange": _suite_timechange,
}


def cmd_check(args) -> int:
    out = _outdir(args)
    suite = _SUITES[args.suite]
    ok, message = suite(parse_spec(args.mu), args.seed, args.trials, out)
    print(f"[{args.suite}] {'PASS' if ok else 'FAIL'}: {message}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heapstream",
        description="Streaming heap sorting and its strip particle system: "
                    "simulation, estimation, and invariant checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"RNG seed (default: {DEFAULT_SEED}, fixed for reproducibility)")
        p.add_argument("--out", default=None,
                       help="output directory (default: $HEAPSTREAM_OUT or .)")

    p = sub.add_parser("sort", help="run the streaming sorter")
    p.add_argument("--mu", default="dirac:2",
                   help="offspring law: dirac:<k> | geom:<p> | pmf:<p1>,<p2>,... (default: dirac:2)")
    p.add_argument("--n", type=int,
                   help=f"sequence length (forest.json and sequence.csv are written "
                        f"only for n <= {heap_sorter.FOREST_DUMP_MAX_N})")
    p.add_argument("--sequence-file", help="CSV (u,nu) to replay instead of sampling")
    common(p)
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("simulate", help="simulate the particle system on a box")
    p.add_argument("--mu", default="dirac:2")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=15.0)
    p.add_argument("--svg", action="store_true", help="also write rep.svg")
    p.add_argument("--svg-width", type=int, default=900)
    p.add_argument("--svg-height", type=int, default=500)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="growth-constant experiments")
    p.add_argument("--mu", default="dirac:2")
    p.add_argument("--method", choices=["ratio", "slope", "strip"], required=True)
    p.add_argument("--n", type=int, help="run length for ratio/slope")
    p.add_argument("--widths", help="strip widths, e.g. 'e1,e2,e3' or '2.7,7.4'")
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--uncoupled", action="store_true",
                   help="strip method: sample widths independently instead of nested")
    p.add_argument("--jobs", type=int, default=1,
                   help="replica thread count (outputs identical for any value)")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("check", help="run an invariant suite")
    p.add_argument("--suite", choices=sorted(_SUITES), required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mu", default="dirac:2",
                   help="offspring law for the field-based suites "
                        "(optimality and ulam pin their own laws)")
    common(p)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
