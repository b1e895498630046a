"""Command-line pipeline: generate -> resist -> sparsify -> compare / importance.

Every command writes a JSON manifest holding the fully resolved argument
list; ``cpns replay MANIFEST`` re-runs it and reproduces the outputs byte for
byte.

Exit codes: 0 ok, 2 usage, 3 input parse error, 4 validation error,
5 numerical non-convergence, 6 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .contagion import epidemic_edge_importance, save_importance_tsv, save_states_packed, save_trajectory_csv, si_runs
from .errors import ConvergenceError, DegenerateError, EdgeListParseError, ValidationError
from .generators import FAMILIES, GeneratorSpec, generate
from .graph import connected_components, load_edge_list, save_edge_list
from .metrics import METRICS, baseline, compare_series, importance_pairs, pearson_r, write_series_csv
from .seeding import derive_seed, run_rng
from .sparsify import STRATEGIES, q_for_fraction, save_sparsifier, ss_sample, uniform_sample
from .spectral import EXACT_MAX_N, approx_resistance, exact_resistance

EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_IO = 2, 3, 4, 5, 6


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


def _write_manifest(args, outputs, parser):
    path = Path(args.manifest) if args.manifest else Path(args.out_dir) / f"{args.command}.manifest.json"
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")}
    doc = {
        "tool": "cpns",
        "version": __version__,
        "command": args.command,
        "params": params,
        "argv": canonical_argv(parser, args),
        "outputs": [str(p) for p in outputs],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def canonical_argv(parser, args):
    """Rebuild an argv that spells out every option, defaults included."""
    sub = _subparsers(parser)[args.command]
    argv = [args.command]
    positionals = []
    for action in sub._actions:
        if isinstance(action, argparse._HelpAction):
            continue
        value = getattr(args, action.dest)
        if not action.option_strings:
            positionals += [_fmt(v) for v in (value if isinstance(value, list) else [value])]
        elif isinstance(action, argparse._StoreTrueAction):
            if value:
                argv.append(action.option_strings[-1])
        elif value is not None:
            vals = value if isinstance(value, list) else [value]
            argv += [action.option_strings[-1], *[_fmt(v) for v in vals]]
    return argv + (["--"] + positionals if positionals else [])


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def _resolve_mode(mode, n):
    if mode == "auto":
        return "exact" if n <= EXACT_MAX_N else "approx"
    return mode


def _sketch(g, mode, epsilon, seed):
    if _resolve_mode(mode, g.n) == "exact":
        return exact_resistance(g)
    return approx_resistance(g, epsilon, seed=seed)


def cmd_generate(args):
    spec = GeneratorSpec(
        family=args.family, n=args.n, seed=args.seed,
        explog_p=args.explog_p, explog_beta=args.explog_beta,
        blocks=args.blocks, p_in=args.p_in, p_out=args.p_out,
        normal_mean=args.normal_mean, normal_sd=args.normal_sd,
        powerlaw_alpha=args.powerlaw_alpha, powerlaw_min=args.powerlaw_min,
    )
    g = generate(spec)
    out = Path(args.out_dir) / (args.output or f"{args.family}_n{args.n}_s{args.seed}.tsv")
    save_edge_list(g, out)
    count, _ = connected_components(g)
    _progress(f"generated {args.family}: n={g.n} m={g.m} components={count} -> {out}")
    return [out]


def cmd_resist(args):
    g = load_edge_list(args.input)
    sk = _sketch(g, args.mode, args.epsilon, args.seed)
    out = Path(args.out_dir) / (args.output or f"{Path(args.input).stem}.resist.tsv")
    with_component = sk.n_components > 1
    with open(out, "w") as fh:
        fh.write("u\tv\tw\tR\tleverage" + ("\tcomponent" if with_component else "") + "\n")
        for e, (a, b, w) in enumerate(g.edges()):
            row = f"{a}\t{b}\t{w!r}\t{float(sk.resistance[e])!r}\t{float(sk.leverage[e])!r}"
            if with_component:
                row += f"\t{int(sk.labels[a])}"
            fh.write(row + "\n")
    _progress(f"{sk.method} resistances for {g.m} edges, leverage sum {sk.leverage_sum():.6g} -> {out}")
    return [out]


def cmd_sparsify(args):
    g = load_edge_list(args.input)
    sk = None
    if args.strategy == "ss":
        sk = _sketch(g, args.mode, args.epsilon, args.seed)
        p = sk.leverage
    else:
        p = np.full(g.m, 1.0 / g.m)
    outputs = []
    stem = Path(args.input).stem
    for k, frac in enumerate(args.fraction):
        q = q_for_fraction(g, p, frac)
        for d in range(args.draws):
            seed = derive_seed(args.seed, k, d)
            if args.strategy == "ss":
                sp = ss_sample(g, sk, q, seed, target_fraction=frac)
            else:
                sp = uniform_sample(g, q, seed, target_fraction=frac)
            out = Path(args.out_dir) / f"{stem}.{args.strategy}-{round(frac * 100):02d}.d{d}.tsv"
            side = save_sparsifier(sp, out)
            count, _ = connected_components(sp.graph)
            _progress(f"{args.strategy} fraction={frac} q={q} draw={d}: kept {sp.graph.m}/{g.m} edges "
                      f"({sp.fraction_kept:.3f}), components={count} -> {out}")
            outputs += [out, side]
    return outputs


def _label_for(path):
    side = Path(path).with_suffix(".json")
    if side.exists():
        meta = json.loads(side.read_text())
        if meta.get("fraction") is not None:
            return f"{meta['strategy']}-{round(meta['fraction'] * 100):02d}"
        return meta.get("strategy", Path(path).stem)
    return Path(path).stem


def cmd_compare(args):
    g = load_edge_list(args.original)
    pz = args.patient_zero
    if pz is None:
        pz = int(run_rng(args.seed, 0xC0FFEE).integers(g.n))
    _progress(f"patient zero {pz}; {args.runs} runs on original")
    orig = si_runs(g, args.gamma, args.timesteps, pz, args.runs, args.seed, stream=0, workers=args.workers)
    groups = {}
    for i, path in enumerate(args.sparsifiers):
        sg = load_edge_list(path)
        if sg.n != g.n:
            raise ValidationError(f"{path}: n={sg.n} differs from original n={g.n}")
        label = _label_for(path)
        _progress(f"{args.cpns_runs} runs on {path} [{label}]")
        runs = si_runs(sg, args.gamma, args.timesteps, pz, args.cpns_runs, args.seed, stream=i + 1,
                       workers=args.workers)
        groups.setdefault(label, []).extend(runs)
    out_dir = Path(args.out_dir)
    outputs = []
    print("label\tmetric\tfraction_of_steps_within_baseline_ci")
    for metric in args.metrics:
        base = baseline(orig, metric)
        series = [base]
        for label, runs in groups.items():
            s = compare_series(orig, runs, metric, label=label)
            series.append(s)
            print(f"{label}\t{metric}\t{float(s.within(base).mean()):.4f}")
        out = out_dir / f"{args.prefix}{metric}.csv"
        write_series_csv(series, out)
        outputs.append(out)
    if args.trajectories:
        tdir = out_dir / f"{args.prefix}trajectories"
        tdir.mkdir(exist_ok=True)
        for label, runs in [("original", orig), *groups.items()]:
            for r, traj in enumerate(runs):
                save_trajectory_csv(traj, tdir / f"{label}.r{r}.csv")
                save_states_packed(traj, tdir / f"{label}.r{r}.states.npy")
                outputs += [tdir / f"{label}.r{r}.csv", tdir / f"{label}.r{r}.states.npy"]
    return outputs


def cmd_importance(args):
    g = load_edge_list(args.input)
    sk = _sketch(g, args.mode, args.epsilon, args.seed)
    total = g.n

    def progress(done, _):
        if done % max(1, total // 10) == 0 or done == total:
            _progress(f"importance: {done}/{total} sources")

    table = epidemic_edge_importance(g, args.gamma, args.runs_per_source, args.seed, leverage=sk.leverage,
                                     workers=args.workers, progress=progress)
    stem = args.output or Path(args.input).stem
    out_dir = Path(args.out_dir)
    tsv = out_dir / f"{stem}.importance.tsv"
    save_importance_tsv(table, tsv)
    pairs = importance_pairs(table, args.pairing)
    ptsv = out_dir / f"{stem}.pairs.tsv"
    with open(ptsv, "w") as fh:
        fh.write("eei_norm\tleverage_norm\n")
        for a, b in pairs:
            fh.write(f"{float(a)!r}\t{float(b)!r}\n")
    try:
        r = pearson_r(pairs[:, 0], pairs[:, 1])
        rtext = f"{r:.6f}"
    except DegenerateError:
        r, rtext = None, "degenerate"
    summary = out_dir / f"{stem}.importance.json"
    summary.write_text(json.dumps({"pearson_r": r, "pairing": args.pairing, "gamma": args.gamma,
                                   "runs_per_source": args.runs_per_source, "leverage_method": sk.method,
                                   "edges": g.m}, indent=2, sort_keys=True) + "\n")
    print(f"r={rtext}")
    return [tsv, ptsv, summary]


def cmd_replay(args):
    doc = json.loads(Path(args.manifest_file).read_text())
    if doc.get("tool") != "cpns":
        raise ValidationError(f"{args.manifest_file} is not a cpns manifest")
    return main(doc["argv"], _exit=False)


def build_parser():
    parser = argparse.ArgumentParser(prog="cpns", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"cpns {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        if seed:
            p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--out-dir", default=".", help="output directory (default .)")
        p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--manifest", default=None, help="manifest path (default OUT_DIR/COMMAND.manifest.json)")

    def resistance_flags(p):
        p.add_argument("--mode", choices=("auto", "exact", "approx"), default="auto",
                       help=f"auto = exact when n <= {EXACT_MAX_N}")
        p.add_argument("--epsilon", type=float, default=0.1, help="JL accuracy for approx mode (default 0.1)")

    p = sub.add_parser("generate", help="generate a network")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    d = GeneratorSpec("sbm4", 4)
    p.add_argument("--explog-p", type=float, default=d.explog_p)
    p.add_argument("--explog-beta", type=float, default=d.explog_beta)
    p.add_argument("--blocks", type=int, default=d.blocks)
    p.add_argument("--p-in", type=float, default=d.p_in)
    p.add_argument("--p-out", type=float, default=d.p_out)
    p.add_argument("--normal-mean", type=float, default=d.normal_mean)
    p.add_argument("--normal-sd", type=float, default=d.normal_sd)
    p.add_argument("--powerlaw-alpha", type=float, default=d.powerlaw_alpha)
    p.add_argument("--powerlaw-min", type=float, default=d.powerlaw_min)
    p.add_argument("--output", default=None, help="file name inside OUT_DIR")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("resist", help="per-edge effective resistance and leverage")
    p.add_argument("input")
    resistance_flags(p)
    p.add_argument("--output", default=None)
    common(p)
    p.set_defaults(func=cmd_resist)

    p = sub.add_parser("sparsify", help="draw sparsifiers at target edge fractions")
    p.add_argument("input")
    p.add_argument("--strategy", choices=STRATEGIES, default="ss")
    p.add_argument("--fraction", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--draws", type=int, default=1)
    resistance_flags(p)
    common(p)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("compare", help="SI fidelity of sparsifiers against the original network")
    p.add_argument("original")
    p.add_argument("sparsifiers", nargs="*")
    p.add_argument("--gamma", type=float, default=0.01)
    p.add_argument("--timesteps", type=int, default=200)
    p.add_argument("--runs", type=int, default=100, help="runs on the original network")
    p.add_argument("--cpns-runs", type=int, default=10, help="runs per sparsifier file")
    p.add_argument("--patient-zero", type=int, default=None, help="default: uniform draw from the seed")
    p.add_argument("--metrics", nargs="+", choices=METRICS, default=list(METRICS))
    p.add_argument("--prefix", default="compare_")
    p.add_argument("--trajectories", action="store_true", help="also dump every run")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("importance", help="epidemic edge importance vs leverage")
    p.add_argument("input")
    p.add_argument("--gamma", type=float, default=3e-3)
    p.add_argument("--runs-per-source", type=int, default=100)
    p.add_argument("--pairing", choices=("paired", "quantile"), default="paired")
    resistance_flags(p)
    p.add_argument("--output", default=None, help="output file stem")
    common(p)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay, manifest=None)
    return parser


def main(argv=None, _exit=True):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if _exit:
            raise
        return exc.code
    code = 0
    try:
        if args.command == "replay":
            code = args.func(args)
        else:
            if hasattr(args, "workers") and args.workers < 1:
                raise ValidationError("--workers must be >= 1")
            Path(args.out_dir).mkdir(parents=True, exist_ok=True)
            outputs = args.func(args)
            _write_manifest(args, outputs, parser)
    except EdgeListParseError as exc:
        _progress(f"cpns: parse error: {exc}")
        code = EXIT_PARSE
    except (json.JSONDecodeError, KeyError) as exc:
        _progress(f"cpns: malformed manifest: {exc}")
        code = EXIT_PARSE
    except (ValidationError, DegenerateError) as exc:
        _progress(f"cpns: invalid input: {exc}")
        code = EXIT_VALIDATION
    except ConvergenceError as exc:
        _progress(f"cpns: numerical failure: {exc}")
        code = EXIT_CONVERGENCE
    except OSError as exc:
        _progress(f"cpns: I/O error: {exc}")
        code = EXIT_IO
    if _exit:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
