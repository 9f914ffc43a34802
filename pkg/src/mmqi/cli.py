"""``mmqi`` command-line interface.

Exit codes: 0 success, 2 config error, 3 numerical-domain error, 4 I/O error.
Every command prints a JSON run report on stdout. Floats are written with at
most 12 significant digits and keys in a fixed order, so reruns with the same
config and seed are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np
import scipy

from mmqi import config as cfgmod
from mmqi import distinguishable as dist
from mmqi import estimation, farfield, metrology
from mmqi.errors import ConfigError, MmqiError
from mmqi.fock import enumerate_basis
from mmqi.operators import build_generators, direction_generator
from mmqi.states import noon_state, random_separable, sector_union, three_mode_example

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SPLIT_ARM = {"z": 0.91, "zeta": 0.5, "k": 10.0, "dk": 0.5}
SWEEP_HEADER = ["draw", "N", "M", "direction_seed", "qfi", "budget", "margin"]


class OutputError(Exception):
    pass


def fmt(x) -> str:
    # + 0.0 folds -0.0 into 0.0
    return f"{float(x) + 0.0:.12g}"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise MmqiError(f"non-finite output value {x}")
        return float(fmt(x))
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _versions() -> dict:
    try:
        own = version("artifact")
    except PackageNotFoundError:  # pragma: no cover
        own = "unknown"
    return {"mmqi": own, "numpy": np.__version__, "scipy": scipy.__version__}


def warning(code: str, message: str) -> dict:
    return {"code": code, "message": message}


def report(task: str, inputs: dict, outputs: dict, warnings=(), seed=None) -> dict:
    return {
        "task": task,
        "inputs": inputs,
        "outputs": outputs,
        "warnings": list(warnings),
        "versions": _versions(),
        "seed": seed,
    }


def write_files(files: dict) -> None:
    """Write ``{path: text}`` atomically; nothing is written if any target fails."""
    staged = []
    umask = os.umask(0)
    os.umask(umask)
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o666 & ~umask)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except OSError as exc:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise OutputError(str(exc)) from exc


def _cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(v)
    return fmt(v)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# -- commands ----------------------------------------------------------------


def cmd_qfi(cfg: dict) -> dict:
    exp = cfgmod.experiment(cfg)
    table = cfgmod.particle_table(cfg)
    inputs = {"representation": exp.representation, "M": exp.M, "state": exp.state_spec,
              "direction": exp.direction.tolist()}
    if table is None:
        N = cfg.get("N", 2)
        inputs["N"] = N
        state = exp.build(N)
        gen = direction_generator(build_generators(state.basis), exp.direction)
        rep = metrology.QfiReport.from_value(metrology.qfi(state, gen), N)
    else:
        inputs["P"] = {str(n): p for n, p in table}
        union = sector_union([(p, exp.build(n)) for n, p in table])
        rep = metrology.qfi_blockwise(union, exp.direction)
    outputs = {"qfi": rep.value, "particle_budget": rep.particle_budget, "witness": rep.witness.value}
    return report("qfi", inputs, outputs, seed=exp.state_spec.get("seed"))


def _random_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def bound_sweep_rows(cfg: dict):
    """Rows of the separable-bound audit plus NOON control rows.

    Draw ``i`` samples its state with seed ``seed + i`` and its directions from
    ``default_rng([1, seed + i])``; every row scans the z axis plus
    ``directions`` random unit vectors and reports the largest QFI.
    """
    draws = cfg.get("draws", 10)
    seed = cfg.get("seed", 0)
    rep = cfg.get("representation", "bosonic")
    Ns = cfg.get("N_list", [2, 3, 4])
    Ms = cfg.get("M_list", [1, 2, 3] if rep == "bosonic" else [1, 2])
    n_comp = cfg.get("n_components", 4)
    n_dir = cfg.get("directions", 10)
    controls = cfg.get("noon_controls", 0)
    combos = [(N, M) for N in Ns for M in Ms]
    rows, flagged = [], []
    for i in range(draws + controls):
        N, M = combos[i % len(combos)]
        dseed = seed + i
        control = i >= draws
        if rep == "bosonic":
            basis = enumerate_basis(N, M)
            state = noon_state(basis) if control else random_separable(basis, n_comp, seed + i)
            space = basis
        else:
            state = dist.noon_distinguishable(N, M) if control else dist.random_product_mixture(N, M, n_comp, seed + i)
            space = state.basis
        if not hasattr(state, "matrix"):
            state = state.projector()
        dirs = np.vstack([[0.0, 0.0, 1.0], _random_directions(np.random.default_rng([1, dseed]), n_dir)])
        q = float(np.max(metrology.qfi_mixed_directions(state, build_generators(space), dirs)))
        margin = q - N
        rows.append([i, N, M, dseed, q, float(N), margin])
        if margin > metrology.WITNESS_TOL:
            flagged.append({"draw": i, "control": control, "margin": margin, "entangled": True})
    return rows, flagged, draws


def cmd_bound_sweep(cfg: dict, out: str | None) -> tuple[dict, dict]:
    rows, flagged, draws = bound_sweep_rows(cfg)
    sep_margins = [r[6] for r in rows[:draws]]
    outputs = {
        "rows": len(rows),
        "max_margin": max(r[6] for r in rows),
        "separable_max_margin": max(sep_margins),
        "bound_holds": max(sep_margins) <= metrology.WITNESS_TOL,
        "entangled": flagged,
    }
    out = out or "bound_sweep.csv"
    outputs["csv"] = str(out)
    inputs = {k: cfg[k] for k in ("representation", "draws", "N_list", "M_list", "n_components",
                                  "directions", "noon_controls") if k in cfg}
    return report("bound-sweep", inputs, outputs, seed=cfg.get("seed", 0)), {out: csv_text(SWEEP_HEADER, rows)}


def _split_arm_params(cfg: dict) -> dict:
    return {k: cfg.get(k, v) for k, v in SPLIT_ARM.items()}


def pattern_summary(cfg: dict):
    p = _split_arm_params(cfg)
    model = cfg.get("model", "closed_form")
    sample = farfield.threemode_pattern(
        p["z"], p["zeta"], p["k"], p["dk"], cfg.get("grid", farfield.DEFAULT_GRID), cfg.get("window"), model
    )
    eta2 = farfield.eta_squared(three_mode_state(p, N=cfg.get("N", 4)))
    summary = {
        "nu2": sample.nu2,
        "eta2": eta2,
        "ratio": farfield.operational_xi(eta2, sample.nu2),
        "p_max": sample.p_max,
        "p_min": sample.p_min,
    }
    return p, model, sample, summary


def three_mode_state(p: dict, N: int):
    return three_mode_example(enumerate_basis(N, 2), p["z"], p["zeta"])


def _caveat():
    return warning(farfield.WARN_OPERATIONAL_WITNESS, farfield.OPERATIONAL_WITNESS_CAVEAT)


def _pattern_warnings(sample) -> list:
    w = [_caveat()]
    if sample.window_limited:
        w.append(warning(farfield.WARN_WINDOW_LIMITED, "incommensurate fringe frequencies; visibility is window-limited"))
    return w


def cmd_pattern(cfg: dict, out: str | None, summary_path: str | None):
    p, model, sample, summary = pattern_summary(cfg)
    out = Path(out or "pattern.csv")
    summary_path = Path(summary_path) if summary_path else out.with_suffix(".json")
    files = {
        out: csv_text(["x", "p"], zip(sample.xs, sample.ps)),
        summary_path: dumps(summary),
    }
    inputs = {**p, "grid": len(sample.xs), "window": sample.window, "model": model}
    outputs = {**summary, "csv": str(out), "summary": str(summary_path)}
    return report("pattern", inputs, outputs, _pattern_warnings(sample)), files


def cmd_sensitivity(cfg: dict) -> dict:
    exp = cfgmod.experiment(cfg, {"kind": "coherent", "z": 0.5})
    if "P" in cfg:
        raise ConfigError("config error at P: sensitivity needs a fixed N")
    N = cfg.get("N", 4)
    theta = cfg.get("theta", 0.0)
    m = cfg.get("m", 1000)
    repeats = cfg.get("repeats", 0)
    seed = cfg.get("seed", 0)
    state = exp.build(N)
    gens = build_generators(state.basis)
    try:
        sens = metrology.estimator_sensitivity(state, theta, m, gens)
    except MmqiError as exc:
        raise type(exc)(
            f"estimator_sensitivity: {exc}. The mean imbalance carries no phase signal here; "
            "pick a state with <Jx> != 0 or move theta away from a stationary point."
        ) from exc
    outputs = {
        "delta2_theta": sens.delta2_theta,
        "crlb": sens.crlb,
        "shot_noise_ratio": m * N * sens.delta2_theta,
    }
    if repeats > 0:
        emp = estimation.empirical_sensitivity(state, theta, m, repeats, gens, seed)
        se = estimation.variance_standard_error(emp, repeats)
        outputs.update(
            empirical_delta2_theta=emp,
            empirical_standard_error=se,
            empirical_z_score=(emp - sens.delta2_theta) / se,
            empirical_shot_noise_ratio=m * N * emp,
        )
    inputs = {"representation": exp.representation, "N": N, "M": exp.M, "state": exp.state_spec,
              "theta": theta, "m": m, "repeats": repeats}
    return report("sensitivity", inputs, outputs, seed=seed)


def witness_comparison(p: dict, N: int, sample, eta2: float) -> dict:
    """Operational ratio vs. the true squeezing parameter and QFI of the same state."""
    state = three_mode_state(p, N)
    gens = build_generators(state.basis)
    xi2 = metrology.xi_squared(state, gens)
    q_axes = {a: metrology.qfi_pure(state, gens[a]) for a in "xyz"}
    q_max, _ = metrology.max_qfi_pure(state, gens)
    ratio = farfield.operational_xi(eta2, sample.nu2)
    verdict = metrology.QfiReport.from_value(q_max, N).witness.value
    density = farfield.threemode_pattern(p["z"], p["zeta"], p["k"], p["dk"], model="density")
    return {
        "N": N,
        "eta2": eta2,
        "nu2": sample.nu2,
        "operational_xi": ratio,
        "operational_verdict": "ENTANGLED" if ratio < 1 else "SEPARABLE_CONSISTENT",
        "xi_squared": xi2,
        "xi_s_squared": metrology.xi_s_squared(state, gens),
        "qfi_x": q_axes["x"],
        "qfi_y": q_axes["y"],
        "qfi_z": q_axes["z"],
        "qfi_max": q_max,
        "particle_budget": N,
        "qfi_verdict": verdict,
        "discordant": bool(ratio < 1 and xi2 >= 1 and q_max <= N + metrology.WITNESS_TOL),
        "density_model_nu2": density.nu2,
        "density_model_operational_xi": farfield.operational_xi(eta2, density.nu2),
    }


def cmd_reproduce_fig3(cfg: dict, outdir: str | None):
    p, model, sample, summary = pattern_summary(cfg)
    N = cfg.get("N", 4)
    comparison = witness_comparison(p, N, sample, summary["eta2"])
    outdir = Path(outdir or "fig3")
    files = {
        outdir / "pattern.csv": csv_text(["x", "p"], zip(sample.xs, sample.ps)),
        outdir / "summary.json": dumps(summary),
        outdir / "witness_comparison.json": dumps({**comparison, "warnings": [_caveat()]}),
    }
    outputs = {**summary, "operational_xi": comparison["operational_xi"], "xi_squared": comparison["xi_squared"],
               "qfi_max": comparison["qfi_max"], "discordant": comparison["discordant"], "outdir": str(outdir)}
    inputs = {**p, "grid": len(sample.xs), "model": model, "N": N}
    return report("reproduce-fig3", inputs, outputs, _pattern_warnings(sample)), files


# -- argument handling -------------------------------------------------------

_OVERRIDES = [
    ("--N", int), ("--M", int), ("--seed", int), ("--theta", float), ("--m", int),
    ("--repeats", int), ("--grid", int), ("--window", float), ("--z", float), ("--zeta", float),
    ("--k", float), ("--dk", float), ("--draws", int), ("--n-components", int),
    ("--directions", int), ("--noon-controls", int),
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmqi", description="Multi-mode two-arm interferometer metrology.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("qfi", "bound-sweep", "pattern", "sensitivity", "reproduce-fig3"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        for flag, typ in _OVERRIDES:
            p.add_argument(flag, type=typ, dest=flag[2:].replace("-", "_"))
        p.add_argument("--representation", choices=["bosonic", "distinguishable"])
        p.add_argument("--model", choices=["closed_form", "density"])
        if name in ("bound-sweep", "pattern"):
            p.add_argument("--out", help="CSV output path")
        if name == "pattern":
            p.add_argument("--summary", help="summary JSON path (default: next to --out)")
        if name == "reproduce-fig3":
            p.add_argument("--outdir", help="output directory (default: fig3)")
    return parser


def merged_config(args) -> dict:
    cfg = cfgmod.load_config(args.config)
    for flag, _ in _OVERRIDES:
        key = flag[2:].replace("-", "_")
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    for key in ("representation", "model"):
        if getattr(args, key, None) is not None:
            cfg[key] = getattr(args, key)
    return cfgmod.validate(cfg)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = merged_config(args)
        files = {}
        if args.command == "qfi":
            rep = cmd_qfi(cfg)
        elif args.command == "bound-sweep":
            rep, files = cmd_bound_sweep(cfg, args.out)
        elif args.command == "pattern":
            rep, files = cmd_pattern(cfg, args.out, args.summary)
        elif args.command == "sensitivity":
            rep = cmd_sensitivity(cfg)
        else:
            rep, files = cmd_reproduce_fig3(cfg, args.outdir)
        text = dumps(rep)
        write_files(files)
    except ConfigError as exc:
        print(f"mmqi: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MmqiError as exc:
        print(f"mmqi {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OutputError as exc:
        print(f"mmqi {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
