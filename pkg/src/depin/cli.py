"""Command-line front end.

Subcommands: pure, fe, phi, hc, smooth, verify.  Options may come from a
flat key=value config file (--config); explicit flags override file
entries.  Every output file embeds the effective configuration, the tool
version and the seed, and contains nothing run-dependent beyond them, so
identical configurations produce byte-identical outputs regardless of the
worker count (capped by the DEPIN_THREADS environment variable).

Kernel specs: ``geometric:p=0.5[,n_max=64]``, ``srw:n_max=512``,
``power:alpha=3,s=1,n_max=4096[,defect=0.5]``, ``file:PATH``.
Law specs: ``gaussian``, ``uniform``, ``rademacher``.

Comma lists that begin with a minus sign need the ``--flag=value`` form
(``--h=-1,-0.5``), as usual with argparse.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import locate_hc, smoothing_check
from .disorder import disorder_law, sample_disorder, spawn_seed
from .engine import (ModelSpec, log_partition_constrained, log_partition_copolymer,
                     log_partition_pinning)
from .estimator import estimate_free_energy, estimate_phi
from .kernel import geometric_kernel, kernel_from_file, power_kernel, srw_kernel
from .oracle import (brute_force_constrained, brute_force_copolymer,
                     brute_force_pinning)
from .pure_solver import pure_asymptotics, solve_free_energy_pure


class UsageError(ValueError):
    """Bad or missing command-line option (exit code 2)."""


def parse_kernel_spec(text: str):
    name, _, rest = text.partition(":")
    if name == "file":
        if not rest:
            raise ValueError("file kernel needs a path: file:PATH")
        return kernel_from_file(rest)
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise ValueError(f"malformed kernel parameter {item!r}")
            params[key.strip()] = val.strip()
    try:
        if name == "geometric":
            n_max = int(params["n_max"]) if "n_max" in params else None
            return geometric_kernel(float(params["p"]), n_max=n_max)
        if name == "srw":
            return srw_kernel(int(params["n_max"]))
        if name == "power":
            return power_kernel(float(params["alpha"]), int(params.get("s", 1)),
                                int(params["n_max"]), float(params.get("defect", 0.0)))
    except KeyError as exc:
        raise ValueError(f"kernel spec {text!r} misses parameter {exc}") from None
    raise ValueError(f"unknown kernel family {name!r}")


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str):
    """Comma list or lo:hi:step range (inclusive of hi up to rounding)."""
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        count = int(round((hi - lo) / step)) + 1
        return [lo + i * step for i in range(count)]
    return [float(x) for x in text.split(",") if x]


def read_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"{path}: malformed config line {raw!r}")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


# per-subcommand option tables: name -> (converter, default, help)
_COMMON = {
    "kernel": (str, None, "kernel spec (see module docstring)"),
    "law": (str, "gaussian", "disorder law"),
    "beta": (float, 0.0, "disorder strength"),
    "seed": (int, 0, "master seed (64-bit)"),
    "replicas": (int, 8, "disorder replicas"),
    "out": (str, None, "output directory"),
}

_OPTIONS = {
    "pure": {
        "kernel": _COMMON["kernel"],
        "h": (_float_list, None, "field value(s), comma list or lo:hi:step"),
        "asymptotics": (bool, False, "also print the transition classification"),
        "out": _COMMON["out"],
    },
    "fe": {
        **_COMMON,
        "kind": (str, "pinning", "model kind"),
        "h": (_float_list, None, "field value(s)"),
        "N": (_int_list, None, "system size(s)"),
    },
    "phi": {
        **_COMMON,
        "kind": (str, "pinning", "model kind"),
        "m_grid": (_float_list, None, "density grid, comma list or lo:hi:step"),
        "epsilon": (float, None, "window half-width (default max(1/sqrt(N), 2s/N))"),
        "N": (int, None, "system size"),
    },
    "hc": {
        **_COMMON,
        "kind": (str, "pinning", "model kind"),
        "N_list": (_int_list, None, "extrapolation sizes"),
        "tol": (float, 1e-3, "bisection tolerance on h"),
        "h_lo": (float, None, "optional lower search bound"),
        "h_hi": (float, None, "optional upper search bound"),
    },
    "smooth": {
        **_COMMON,
        "kind": (str, "pinning", "model kind"),
        "N_list": (_int_list, None, "extrapolation sizes"),
        "tol": (float, 2e-3, "bisection tolerance on h"),
        "scan_gaps": (_float_list, None, "distances below h_c to scan"),
    },
    "verify": {
        "N": (int, 12, "maximum size for the oracle battery"),
        "draws": (int, 20, "random draws per check"),
        "seed": (int, 0, "master seed"),
    },
}

_REQUIRED = {
    "pure": ("kernel", "h"),
    "fe": ("kernel", "h", "N"),
    "phi": ("kernel", "m_grid", "N"),
    "hc": ("kernel", "N_list"),
    "smooth": ("kernel", "N_list"),
    "verify": (),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depin",
        description="disordered polymer depinning: exact recursions and analysis")
    parser.add_argument("--version", action="version", version=f"depin {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in _OPTIONS.items():
        sp = subs.add_parser(cmd)
        sp.add_argument("--config", default=None, help="key=value config file")
        for name, (conv, _default, help_text) in opts.items():
            flag = "--" + name.replace("_", "-")
            if conv is bool:
                sp.add_argument(flag, action="store_const", const=True,
                                default=None, help=help_text)
            else:
                sp.add_argument(flag, type=str, default=None, help=help_text)
    return parser


def _merge_options(cmd: str, args: argparse.Namespace) -> dict:
    table = _OPTIONS[cmd]
    file_cfg = read_config_file(args.config) if args.config else {}
    merged = {}
    for name, (conv, default, _help) in table.items():
        raw = getattr(args, name)
        if raw is None and name in file_cfg:
            raw = file_cfg[name]
        if raw is None:
            merged[name] = default
        elif conv is bool:
            merged[name] = raw if isinstance(raw, bool) else raw.lower() in ("1", "true", "yes")
        else:
            try:
                merged[name] = conv(raw) if isinstance(raw, str) else raw
            except ValueError as exc:
                raise UsageError(
                    f"--{name.replace('_', '-')}: bad value {raw!r} ({exc})") from None
    for name in _REQUIRED[cmd]:
        if merged[name] is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
    return merged


def _config_echo(cmd: str, merged: dict) -> dict:
    """Effective options for the output metadata; destination paths are not
    part of a run's identity and are left out so outputs stay byte-identical
    wherever they are written."""
    echo = {"command": cmd, "version": __version__}
    for key in sorted(merged):
        if key == "out":
            continue
        val = merged[key]
        if isinstance(val, list):
            echo[key] = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
        else:
            echo[key] = val
    return echo


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, columns, rows, config: dict) -> None:
    lines = [f"# depin {__version__}"]
    for key, val in config.items():
        lines.append(f"# {key}={val}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8", newline="\n")


def _write_plot(path: Path, csv_name: str, xlabel: str, ylabel: str,
                using: str, style: str) -> None:
    script = "\n".join([
        "set datafile separator ','",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        f"plot '{csv_name}' using {using} with {style} notitle",
        ""])
    path.write_text(script, encoding="utf-8", newline="\n")


def _outdir(merged: dict) -> Path | None:
    if not merged.get("out"):
        return None
    path = Path(merged["out"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_pure(merged: dict) -> int:
    kernel = parse_kernel_spec(merged["kernel"])
    rows = []
    for h in merged["h"]:
        sol = solve_free_energy_pure(kernel, h)
        rows.append((h, sol.b, int(sol.localized), sol.residual))
        print(f"h={_fmt(h)} b={_fmt(sol.b)} localized={sol.localized}")
    if merged["asymptotics"]:
        cls = pure_asymptotics(kernel)
        print(f"order={cls.order} exponent={_fmt(cls.exponent)} "
              f"slope={'-' if cls.slope is None else _fmt(cls.slope)} "
              f"hc={_fmt(cls.hc)}")
    out = _outdir(merged)
    if out:
        cfg = _config_echo("pure", merged)
        _write_csv(out / "pure.csv", ["h", "b", "localized", "residual"], rows, cfg)
        _write_plot(out / "pure.gp", "pure.csv", "h", "b", "1:2", "linespoints")
    return 0


def _cmd_fe(merged: dict) -> int:
    kernel = parse_kernel_spec(merged["kernel"])
    law = disorder_law(merged["law"])
    rows = []
    for n in merged["N"]:
        for h in merged["h"]:
            model = ModelSpec(merged["kind"], merged["beta"], h, kernel)
            est = estimate_free_energy(model, law, n, merged["replicas"], merged["seed"])
            rows.append((n, merged["beta"], h, est.mean, est.stderr,
                         merged["replicas"], merged["seed"]))
            print(f"N={n} h={_fmt(h)} F={_fmt(est.mean)} stderr={_fmt(est.stderr)}")
    out = _outdir(merged)
    if out:
        cfg = _config_echo("fe", merged)
        _write_csv(out / "fe.csv",
                   ["N", "beta", "h", "mean", "stderr", "replicas", "seed"], rows, cfg)
        _write_plot(out / "fe.gp", "fe.csv", "h", "F", "3:4:5", "yerrorlines")
    return 0


def _cmd_phi(merged: dict) -> int:
    kernel = parse_kernel_spec(merged["kernel"])
    law = disorder_law(merged["law"])
    n = merged["N"]
    model = ModelSpec(merged["kind"], merged["beta"], 0.0, kernel)
    curve = estimate_phi(model, law, merged["m_grid"], merged["epsilon"], n,
                         merged["replicas"], merged["seed"])
    rows = [(m, curve.epsilon, v, s, int(f)) for m, v, s, f in
            zip(curve.m_grid, curve.values, curve.stderr, curve.feasible)]
    for m, _eps, v, s, f in rows:
        print(f"m={_fmt(m)} phi={_fmt(v)} stderr={_fmt(s)} feasible={bool(f)}")
    out = _outdir(merged)
    if out:
        cfg = _config_echo("phi", merged)
        _write_csv(out / "phi.csv", ["m", "epsilon", "value", "stderr", "feasible"],
                   rows, cfg)
        _write_plot(out / "phi.gp", "phi.csv", "m", "phi", "1:3:4", "yerrorlines")
    return 0


def _cmd_hc(merged: dict) -> int:
    kernel = parse_kernel_spec(merged["kernel"])
    law = disorder_law(merged["law"])
    window = None
    if merged["h_lo"] is not None and merged["h_hi"] is not None:
        window = (merged["h_lo"], merged["h_hi"])
    fit = locate_hc(merged["kind"], merged["beta"], kernel, law, merged["N_list"],
                    merged["replicas"], merged["seed"], merged["tol"],
                    h_window=window)
    print(f"hc={_fmt(fit.hc)} +- {_fmt(fit.hc_err)}")
    out = _outdir(merged)
    if out:
        payload = {"hc": fit.hc, "hc_err": fit.hc_err,
                   "probes": [list(p) for p in fit.points],
                   "config": _config_echo("hc", merged)}
        _write_json(out / "hc.json", payload)
    return 0


def _cmd_smooth(merged: dict) -> int:
    kernel = parse_kernel_spec(merged["kernel"])
    law = disorder_law(merged["law"])
    cfg = _config_echo("smooth", merged)
    kwargs = {}
    if merged["scan_gaps"]:
        kwargs["scan_gaps"] = tuple(merged["scan_gaps"])
    report = smoothing_check(merged["beta"], kernel, law, n_list=merged["N_list"],
                             replicas=merged["replicas"], seed=merged["seed"],
                             tol=merged["tol"], kind=merged["kind"],
                             config=cfg, **kwargs)
    print(f"hc={_fmt(report.hc)} +- {_fmt(report.hc_err)}")
    print(f"exponent={_fmt(report.exponent)} +- {_fmt(report.exponent_err)}")
    print(f"envelope_ok={report.envelope_ok} ratio_decreasing={report.ratio_decreasing}")
    out = _outdir(merged)
    if out:
        payload = report.to_dict()
        payload["exponent_err"] = report.exponent_err
        _write_json(out / "smooth.json", payload)
        rows = [(merged["N_list"][-1], report.beta, h, f, s,
                 merged["replicas"], merged["seed"]) for h, f, s in report.points]
        _write_csv(out / "smooth_points.csv",
                   ["N", "beta", "h", "mean", "stderr", "replicas", "seed"], rows, cfg)
        _write_plot(out / "smooth.gp", "smooth_points.csv",
                    "h", "F", "3:4:5", "yerrorlines")
    return 0


def _verify_battery(n_cap: int, draws: int, seed: int):
    """Cross-check the recursions against brute force; yields (name, ok, detail)."""
    law = disorder_law("gaussian")
    kern = geometric_kernel(0.5, n_max=32)
    kern_srw = srw_kernel(16)
    rel = 1e-12

    def pin_case(i):
        rng_seed = spawn_seed(seed, i)
        om = sample_disorder(law, 16, rng_seed)
        beta = 0.25 * (i % 8)
        h = -2.0 + 0.37 * (i % 11)
        n = min(n_cap, 16)
        model = ModelSpec("pinning", beta, h, kern)
        got = log_partition_pinning(model, om, n).final_logz
        want = math.log(brute_force_pinning(kern, om, beta, h, n).value)
        return abs(got - want) <= rel * max(1.0, abs(want))

    def cop_case(i):
        om = sample_disorder(law, 14, spawn_seed(seed, 1000 + i))
        beta = 0.25 * (i % 8)
        h = 0.3 * (i % 5)
        n = min(n_cap - n_cap % 2, 14)
        model = ModelSpec("copolymer", beta, h, kern_srw)
        got = log_partition_copolymer(model, om, n).final_logz
        want = math.log(brute_force_copolymer(kern_srw, om, beta, h, n).value)
        return abs(got - want) <= rel * max(1.0, abs(want))

    def con_case(i):
        om = sample_disorder(law, 16, spawn_seed(seed, 2000 + i))
        beta = 0.25 * (i % 8)
        n = min(n_cap, 16)
        model = ModelSpec("pinning", beta, 0.0, kern)
        table = log_partition_constrained(model, om, n)
        want = brute_force_constrained(kern, om, beta, n)
        for j, val in want.items():
            if abs(math.exp(table.logz_j[-1][j]) - val) > rel * val:
                return False
        return True

    for name, case in (("pinning", pin_case), ("copolymer", cop_case),
                       ("constrained", con_case)):
        ok = sum(1 for i in range(draws) if case(i))
        yield name, ok == draws, f"{ok}/{draws}"


def _cmd_verify(merged: dict) -> int:
    all_ok = True
    for name, ok, detail in _verify_battery(merged["N"], merged["draws"], merged["seed"]):
        all_ok &= ok
        print(f"{name}: {detail} {'ok' if ok else 'FAILED'}")
    if all_ok:
        print("all oracle checks passed")
        return 0
    print("oracle checks FAILED")
    return 1


_HANDLERS = {
    "pure": _cmd_pure,
    "fe": _cmd_fe,
    "phi": _cmd_phi,
    "hc": _cmd_hc,
    "smooth": _cmd_smooth,
    "verify": _cmd_verify,
}


def run(argv) -> int:
    """Execute one CLI invocation; 0 on success, 2 on usage error, 1 on failure."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        merged = _merge_options(args.command, args)
        return _HANDLERS[args.command](merged)
    except UsageError as exc:
        print(f"depin {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"depin {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
