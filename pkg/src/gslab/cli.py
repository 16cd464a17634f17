"""``gslab`` command line: build, witness, scan, fringe, graphs."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import counting, graphs, optics, qalgebra, witness

SCHEMA = 1
SEED_ENV = "GSLAB_SEED"


class CLIError(Exception):
    pass


def _resolve_seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CLIError(f"{SEED_ENV}={env!r} is not an integer") from None


def _parse_noise(text: str | None) -> optics.NoiseModel | None:
    if text is None:
        return None
    if text == "ideal":
        return optics.NoiseModel.ideal()
    if text == "calibrated":
        return counting.calibrated_noise()
    if text == "calibrated-joint":
        return counting.calibrated_noise(joint_calibration=True)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise optics.ConfigError(f"--noise JSON error at column {exc.colno}: {exc.msg}") from None
    return optics.NoiseModel.from_dict(data)


def _load_setup(args, default: str = "ghz6") -> tuple[optics.SetupConfig, optics.NoiseModel]:
    if args.config:
        config, noise = optics.SetupConfig.from_json(Path(args.config).read_text())
    else:
        config, noise = optics.SetupConfig.preset(args.preset or default), optics.NoiseModel()
    override = _parse_noise(args.noise)
    return config, override or noise


def _out_dir(args) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, data: dict):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _manifest(args, out: Path, seed: int | None, command: str):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    _write_json(out / "manifest.json", {
        "schema": SCHEMA, "command": command, "config": args.config,
        "out": str(out), "parameters": params, "seed": seed,
    })


def cmd_build(args) -> dict:
    config, noise = _load_setup(args)
    outcome = optics.build_setup(config, noise)
    summary = {
        "schema": SCHEMA,
        "setup": config.name,
        "noise": noise.to_dict(),
        "success_probability": outcome.success_probability,
        "fidelity_ghz6": qalgebra.fidelity(outcome.state, qalgebra.ghz_state(6)),
        "fidelity_cluster6": qalgebra.fidelity(outcome.state, qalgebra.cluster6()),
    }
    out = _out_dir(args)
    if out:
        _write_json(out / "build.json", summary)
        if args.save_state:
            np.save(out / "state.npy", np.asarray(outcome.state.matrix))
        _manifest(args, out, None, "build")
    return summary


def _witness_state(args, plan):
    if args.white_noise is not None:
        return witness.white_noise_state(plan.target, args.white_noise)
    config, noise = _load_setup(args, "cluster6" if plan.name == "W_C_tilde" else "ghz6")
    return optics.build_setup(config, noise).state


def _bits(k: int) -> str:
    return format(k, "06b")


def _figure_data(out: Path, plan, state, report, args):
    events = args.events
    def histogram(setting):
        if args.analytic:
            p = counting.outcome_distribution(state, setting)
            return ("outcome_bits", "expected_count"), [(_bits(k), repr(float(x) * events)) for k, x in enumerate(p)]
        rec = next(r for r in report.records if r.setting == setting)
        return ("outcome_bits", "count"), [(_bits(k), int(c)) for k, c in enumerate(rec.counts)]

    if plan.name == "W_G":
        header, rows = histogram(plan.settings[0])
        _write_csv(out / "fig3a_hv_counts.csv", header, rows)
        signs = witness.parity_signs()
        rows = []
        for setting in plan.settings[1:]:
            n = int(setting.choices[0][1:])
            if args.analytic:
                p = counting.outcome_distribution(state, setting)
                est = counting.linear_estimate(p, signs, events)
            else:
                rec = next(r for r in report.records if r.setting == setting)
                est = counting.parity_expectation(rec, signs)
            rows.append((n, repr(est.mean), repr(est.stderr)))
        _write_csv(out / "fig3b_expectations.csv", ("n", "expectation", "stderr"), rows)
    else:
        for setting, name in zip(plan.settings[:2], ("fig4b_zzzxxx_counts.csv", "fig4c_xxxzzz_counts.csv")):
            header, rows = histogram(setting)
            _write_csv(out / name, header, rows)


def cmd_witness(args) -> dict:
    plan = witness.plan_by_name(args.plan)
    seed = _resolve_seed(args.seed)
    state = _witness_state(args, plan)
    report = counting.run_protocol(state, plan, args.events, seed, analytic=args.analytic)
    result = report.to_dict()
    result["fidelity_is_lower_bound"] = plan.fidelity_is_bound
    result["analytic"] = bool(args.analytic)
    result["events_per_setting"] = args.events
    result["seed"] = seed
    out = _out_dir(args)
    if out:
        _write_json(out / "report.json", result)
        rows = []
        for k, setting in enumerate(plan.settings):
            if args.analytic:
                p = counting.outcome_distribution(state, setting)
                rows += [(setting.label, _bits(i), repr(float(x) * args.events)) for i, x in enumerate(p)]
            else:
                rec = report.records[k]
                rows += [(setting.label, _bits(i), int(c)) for i, c in enumerate(rec.counts)]
        _write_csv(out / "counts.csv", ("setting_label", "outcome_bits", "count"), rows)
        _figure_data(out, plan, state, report, args)
        _manifest(args, out, seed, "witness")
    return result


def _grid(text: str) -> list[float]:
    if "," in text:
        values = [float(x) for x in text.split(",")]
    else:
        n = int(text)
        if n < 2:
            raise CLIError("grid needs at least 2 points")
        values = list(np.linspace(0.0, 1.0, n))
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise CLIError("grid values must lie in [0, 1]")
    return values


def cmd_scan(args) -> dict:
    plan = witness.plan_by_name(args.plan)
    target = plan.target
    rows = []
    for p in _grid(args.grid):
        rows.append((repr(float(p)), repr(plan.evaluate(witness.white_noise_state(target, p)))))
    threshold = witness.noise_threshold(plan, target)
    result = {"schema": SCHEMA, "witness": plan.name, "threshold": threshold,
              "values": [[float(p), float(v)] for p, v in rows]}
    out = _out_dir(args)
    if out:
        _write_csv(out / "scan.csv", ("p", "witness_value"), rows)
        _write_json(out / "threshold.json", {"schema": SCHEMA, "witness": plan.name, "threshold": threshold})
        _manifest(args, out, None, "scan")
    return result


def cmd_fringe(args) -> dict:
    noise = _parse_noise(args.noise) or optics.NoiseModel()
    rho4 = optics.fourfold_state(noise, args.overlap)
    scan = counting.fringe_scan(rho4, args.points)
    result = {"schema": SCHEMA, "overlap": args.overlap,
              "visibility": counting.fringe_visibility(scan), "points": len(scan)}
    out = _out_dir(args)
    if out:
        _write_csv(out / "fringe.csv", ("phi_radians", "expectation"),
                   [(repr(p), repr(v)) for p, v in scan])
        _write_json(out / "fringe.json", result)
        _manifest(args, out, None, "fringe")
    return result


def cmd_graphs(args) -> dict:
    if args.action == "list":
        return {"schema": SCHEMA, "graphs": graphs.graph_names()}
    if not args.name:
        raise CLIError("graphs export needs a graph name")
    g = graphs.named_graph(args.name)
    data = {"schema": SCHEMA, "name": args.name, **json.loads(g.to_json())}
    out = _out_dir(args)
    if out:
        _write_json(out / f"{args.name}.json", data)
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gslab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def setup_flags(p):
        p.add_argument("--preset", choices=["ghz6", "cluster6"])
        p.add_argument("--config", help="setup JSON file")
        p.add_argument("--noise", help="'ideal', 'calibrated', 'calibrated-joint' or a noise JSON object")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("build", help="simulate the fusion setup and summarize the state")
    setup_flags(p)
    p.add_argument("--save-state", action="store_true", help="write the density matrix as state.npy")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("witness", help="measure a witness (sampled or analytic)")
    setup_flags(p)
    p.add_argument("--plan", choices=["ghz", "cluster"], required=True)
    p.add_argument("--events", type=int, default=counting.DEFAULT_EVENTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--analytic", action="store_true", help="use exact outcome distributions")
    p.add_argument("--white-noise", type=float, metavar="P",
                   help="evaluate on P*target + (1-P)*I/64 instead of the optical setup")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("scan", help="witness value along the white-noise family")
    p.add_argument("--plan", choices=["ghz", "cluster"], required=True)
    p.add_argument("--grid", default="11", help="point count or comma-separated p values")
    p.add_argument("--out")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fringe", help="fourfold M_phi fringe behind one fusion")
    p.add_argument("--noise")
    p.add_argument("--overlap", type=float, default=1.0)
    p.add_argument("--points", type=int, default=181)
    p.add_argument("--out")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_fringe)

    p = sub.add_parser("graphs", help="list or export the named graphs")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("name", nargs="?")
    p.add_argument("--out")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_graphs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (CLIError, optics.ConfigError, optics.EmptyPostselectionError,
            witness.NoSignChangeError, KeyError, ValueError, OSError) as exc:
        error = {"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc).strip("'\"")}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
