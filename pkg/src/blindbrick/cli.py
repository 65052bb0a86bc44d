"""Batch command line: compile, run, attack, audit, report.

Exit codes: 0 ok, 2 validation failure, 3 property violation detected.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._validation import check_circuit, check_config, parse_colluders, parse_params
from .adversary import (StateSpaceTooLarge, audit_collusion, exact_view_tv,
                        run_distinguishing_game)
from .circuit import LogicalCircuit, Single
from .compiler import compile_circuit
from .config import VERSION
from .gates import PairSlot, physical_count
from .obfuscator import MASK_STREAM, obfuscate, rng_stream, strip_secrets
from .protocol import estimate_leak_time, run

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 2, 3


class CliError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _stamp(args, cfg) -> dict:
    return {"version": VERSION, "seed": args.seed, "params": cfg.to_dict()}


def _config(args):
    return check_config(parse_params(args.params), seed=args.seed,
                        mask_tracks=False if getattr(args, "no_mask_tracks", False) else None)


def _compiled(args, cfg):
    circuit = check_circuit(args.circuit)
    cc = compile_circuit(circuit, cfg, rng_stream(args.seed, MASK_STREAM))
    return obfuscate(cc, args.seed)


def cmd_compile(args) -> int:
    cfg = _config(args)
    program = _compiled(args, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(args, cfg)
    (out / "public.json").write_text(_dump({**stamp, "public": strip_secrets(program).data}))
    (out / "secret.json").write_text(_dump({**stamp, "secret": program.secret()}))
    print(_dump({**stamp, "public_shape": program.public_shape,
                 "files": [str(out / "public.json"), str(out / "secret.json")]}), end="")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    program = _compiled(args, cfg)
    result = run(program, cfg, args.seed)
    body = {**_stamp(args, cfg), "result": result.to_dict()}
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(_dump(body))
        (out / "transcripts.jsonl").write_text("\n".join(result.transcript_lines()) + "\n")
    print(_dump(body), end="")
    return EXIT_OK


def _pair(spec: str) -> tuple[LogicalCircuit, LogicalCircuit]:
    paths = [p for p in spec.split(",") if p]
    if len(paths) != 2:
        raise CliError("--pair needs two circuit files separated by a comma")
    for p in paths:
        if Path(p).name == "secret.json":
            raise CliError("attack never reads secret.json")
    return check_circuit(paths[0]), check_circuit(paths[1])


def cmd_attack(args) -> int:
    cfg = _config(args)
    c0, c1 = _pair(args.pair)
    ids = parse_colluders(args.colluders, cfg.N, cfg.K)
    game = run_distinguishing_game(c0, c1, ids, args.trials, args.seed, cfg, args.rehearsals)
    try:
        tv = exact_view_tv(c0, c1, ids, cfg)
    except StateSpaceTooLarge:
        tv = None
    violation = tv is not None and game.advantage > tv / 2 + game.ci
    if tv is None:
        verdict = "tv-unavailable"
    elif violation:
        verdict = "violation"
    elif tv:
        verdict = "leaks-within-bound"
    else:
        verdict = "blind"
    body = {**_stamp(args, cfg), "pair": args.pair, "colluders": [str(s) for s in ids],
            **game.to_dict(), "exact_tv": tv, "verdict": verdict}
    print(_dump(body), end="")
    return EXIT_VIOLATION if violation else EXIT_OK


def default_corpus():
    def one(g):
        return LogicalCircuit(1, (Single(0, g),))
    return [("identity-vs-identity", (one("I"), one("I"))), ("identity-vs-x", (one("I"), one("X")))]


def cmd_audit(args) -> int:
    cfg = _config(args)
    corpus = default_corpus()
    if args.corpus:
        doc = json.loads(Path(args.corpus).read_text())
        corpus = [(item["name"], (LogicalCircuit.from_dict(item["c0"]), LogicalCircuit.from_dict(item["c1"])))
                  for item in doc]
    report = audit_collusion(cfg, corpus, args.trials, args.rehearsals, args.seed)
    body = {**_stamp(args, cfg), **report}
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "audit.json").write_text(_dump(body))
    print(_dump(body), end="")
    return EXIT_VIOLATION if report["flags"] else EXIT_OK


def public_counts(public: dict) -> dict:
    """Gate accounting from a public program alone (every window has exactly one real track)."""
    shape = public["shape"]
    real = {"V": 0, "U": 0, "mask": 0}
    total = dict(real)
    total_phys = dict(real)
    tracks = {}
    for w in public["windows"]:
        k = w["kind"]
        real[k] += w["width"]
        tracks[k] = len(w["tracks"])
        total[k] += w["width"] * len(w["tracks"])
        total_phys[k] += sum(physical_count(PairSlot.from_code(c) for c in t) for t in w["tracks"])
    N, W, n = shape["N"], shape["W"], shape["n"]
    added_v = total["V"] - real["V"]
    added_u = total["U"] - real["U"]
    checks = {
        "dummy_V_within_bound": added_v <= (3 ** W - 1) * real["V"],
        "dummy_U_within_bound": added_u <= (3 ** 2 - 1) * real["U"],
        "mask_total_matches": total["mask"] == 2 * N * tracks.get("mask", 1) * n,
    }
    # informational: 4-track mask windows exceed the 4N*3^W*n figure when W = 1
    reference = {"mask_within_4N3^Wn": total_phys["mask"] <= 4 * N * 3 ** W * n}
    return {"real_slots": real, "total_slots": total, "total_physical": total_phys,
            "tracks_per_window": tracks, "added_by_dummies": added_v + added_u,
            "added_by_masks": total["mask"],
            "bounds": {"dummy_factor": 3 ** W, "mask_physical_bound": 4 * N * 3 ** W * n},
            "checks": checks, "reference_bounds": reference}


def cmd_report(args) -> int:
    path = Path(args.out_dir) / "public.json"
    if not path.is_file():
        raise CliError(f"missing {path}; run compile first")
    doc = json.loads(path.read_text())
    counts = public_counts(doc["public"])
    K = doc["params"]["K"]
    leak = estimate_leak_time(K, args.t)
    body = {"version": doc["version"], "seed": doc["seed"], "params": doc["params"],
            "counts": counts, "leak_time": {"K": K, "t": args.t, "unit": args.t_unit, "value": leak}}
    if args.format == "json":
        print(_dump(body), end="")
    else:
        rows = [("window type", "real pairs", "total pairs", "physical gates", "tracks")]
        for k in ("V", "U", "mask"):
            rows.append((k, counts["real_slots"][k], counts["total_slots"][k],
                         counts["total_physical"][k], counts["tracks_per_window"].get(k, 0)))
        for r in rows:
            print(f"{r[0]:<12}{r[1]:>12}{r[2]:>13}{r[3]:>16}{r[4]:>8}")
        print(f"added by dummies: {counts['added_by_dummies']}")
        print(f"added by masks: {counts['added_by_masks']}")
        for name, ok in counts["checks"].items():
            print(f"{name}: {'ok' if ok else 'VIOLATION'}")
        for name, ok in counts["reference_bounds"].items():
            print(f"{name}: {'ok' if ok else 'exceeded (informational)'}")
        print(f"(K+1)t = {leak:g} {args.t_unit}")
    return EXIT_OK if all(counts["checks"].values()) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindbrick", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, circuit=True):
        if circuit:
            p.add_argument("--circuit", required=True, help="logical circuit JSON file")
        p.add_argument("--params", default="", help="e.g. N=4,K=4,m=16,p=4 (W optional)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-mask-tracks", action="store_true",
                       help="run output-mask blocks without dummy tracks")

    p = sub.add_parser("compile", help="write public.json and secret.json")
    common(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="delegate one circuit and dump transcripts")
    common(p)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("attack", help="distinguishing game between two circuits")
    common(p, circuit=False)
    p.add_argument("--pair", required=True, help="c0.json,c1.json")
    p.add_argument("--colluders", required=True, help="e.g. A1,A2,B3")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--rehearsals", type=int, default=2000)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("audit", help="games and exact TV over colluder templates")
    common(p, circuit=False)
    p.add_argument("--corpus", help='JSON list of {"name", "c0", "c1"}')
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--rehearsals", type=int, default=200)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("report", help="overhead table and leak-time estimate")
    p.add_argument("--out-dir", required=True, help="directory holding public.json")
    p.add_argument("--t", type=float, default=1.0, help="mean time between leaks")
    p.add_argument("--t-unit", default="days")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, CliError, OSError) as exc:
        print(_dump({"error": type(exc).__name__, "message": str(exc)}), end="")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
