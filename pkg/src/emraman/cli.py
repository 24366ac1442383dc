"""Command-line front end: ``emraman <subcommand> [flags]``.

Artifacts are CSV (``#`` header lines echo the tool version and the resolved
config) or flat JSON.  Exit codes: 0 success, 1 regime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from . import figures as fg
from . import spectral as sp
from . import symflow as sf
from . import zakharov as zk
from .interaction import RATE_PAIRS, growth_rates, interaction_report
from .resonance import (
    ALL_PAIRS,
    RegimeError,
    find_axis_resonances,
    resonance_curve,
    slow_circle_radius,
    space_time_resonances,
    thresholds,
)
from .spectral import PlasmaParams


class UsageError(ValueError):
    """Invalid flag combination or value."""


# ------------------------------------------------------------------ formatting


def fmt(value: object) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(value)


def _jsonable(value: object) -> object:
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def render_csv(columns: Sequence[str], rows: Sequence[Sequence[object]], config: Dict[str, object]) -> str:
    lines = [
        f"# emraman {__version__}",
        "# config: " + json.dumps(_jsonable(config), sort_keys=True),
        ",".join(columns),
    ]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def render_json(payload: Dict[str, object], config: Dict[str, object]) -> str:
    body = {"tool": "emraman", "version": __version__, "config": _jsonable(config)}
    body.update(_jsonable(payload))
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def _write(text: str, output: Optional[str]) -> None:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _emit(args: argparse.Namespace, columns, rows, payload: Dict[str, object], summary: str) -> None:
    config = _config(args)
    if args.format == "json":
        body = dict(payload)
        body["columns"] = list(columns)
        body["rows"] = [[_jsonable(v) for v in r] for r in rows]
        _write(render_json(body, config), args.output)
    else:
        _write(render_csv(columns, rows, config), args.output)
    print(summary, file=sys.stderr)


def _config(args: argparse.Namespace) -> Dict[str, object]:
    """Resolved flags; the artifact path is omitted so identical runs are byte-identical."""
    skip = ("func", "output")
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


# ------------------------------------------------------------------ parsing helpers


def _pair(text: str):
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad pair {text!r}; expected j,j'") from exc
    if len(vals) != 2 or not (1 <= vals[0] < vals[1] <= 5):
        raise argparse.ArgumentTypeError(f"bad pair {text!r}; need 1 <= j < j' <= 5")
    return vals


def _triplet(text: str):
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad triplet {text!r}") from exc
    if len(vals) != 3 or any(not 1 <= v <= 5 for v in vals):
        raise argparse.ArgumentTypeError(f"bad triplet {text!r}; need three labels in 1..5")
    return vals


def _eta(text: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eta {text!r}") from exc
    if len(vals) == 1:
        vals = (vals[0], 0.0)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"bad eta {text!r}; expected e1[,e2]")
    return vals


def _envelope(text: str) -> str:
    try:
        sf.EnvelopeSpec.parse(text)
    except (ValueError, IndexError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return text


def _params(args: argparse.Namespace) -> PlasmaParams:
    try:
        return PlasmaParams(epsilon=args.epsilon, theta_e=args.theta_e, alpha_ie=args.alpha_ie, k=args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ------------------------------------------------------------------ subcommands


def cmd_dispersion(args: argparse.Namespace) -> int:
    if not 0 < args.theta_e:
        raise UsageError("--theta-e must be positive")
    table = fg.variety_table(args.theta_e, args.xi_min, args.xi_max, args.samples, r=args.eta[0])
    last = table.rows[-1]
    _emit(args, table.columns, table.rows, {},
          f"dispersion: {len(table.rows)} samples, lambda2({fmt(last[0])}) = {fmt(last[2])}")
    return 0


def cmd_resonances(args: argparse.Namespace) -> int:
    p = _params(args)
    pairs = [tuple(args.pair)] if args.pair else list(ALL_PAIRS)
    rows: List[List[object]] = []
    n_roots = 0
    for pr in pairs:
        for rec in find_axis_resonances(p, pr):
            rows.append(["root", f"{pr[0]}{pr[1]}", 0, rec.xi, 0.0, rec.phase_residual])
            n_roots += 1
        if args.curves:
            for cid, curve in enumerate(resonance_curve(p, pr, n=args.curve_n)):
                for x, r in curve:
                    rows.append(["curve", f"{pr[0]}{pr[1]}", cid, float(x), float(r), math.nan])
    roots = [fmt(r[3]) for r in rows if r[0] == "root"]
    _emit(args, ["kind", "pair", "curve", "xi", "r", "phase_residual"], rows, {},
          f"resonances: {n_roots} axis roots" + (f" ({', '.join(roots)})" if n_roots <= 6 else ""))
    return 0


def cmd_spacetime(args: argparse.Namespace) -> int:
    p = _params(args)
    th = thresholds(p)
    pairs = [tuple(args.pair)] if args.pair else list(RATE_PAIRS)
    rows = []
    for pr in pairs:
        for rec in space_time_resonances(p, pr):
            rep = interaction_report(p, pr, rec.xi)
            rows.append([f"{pr[0]}{pr[1]}", rec.xi, rec.phase_residual, rep.trace_matrix.real,
                         rep.classification, rep.raman_direction])
    payload = {"k_c": th.k_c, "k_min": th.k_min, "localization_condition": th.cond_k_thetae}
    _emit(args, ["pair", "xi", "phase_residual", "trace", "classification", "direction"], rows, payload,
          f"spacetime: {len(rows)} space-time resonances, k_c = {fmt(th.k_c)}, k_min = {fmt(th.k_min)}")
    return 0


def _scan_theta(args: argparse.Namespace) -> float:
    if args.method == "closed":
        if not args.theta_e > 0:
            raise UsageError("--theta-e must be positive")
    elif not 0 < args.theta_e < 1:
        raise UsageError("--method matrix needs 0 < theta_e < 1")
    return args.theta_e


def cmd_trace_scan(args: argparse.Namespace) -> int:
    th = _scan_theta(args)
    table = fg.trace_table(fg.k_grid(args.k_min, args.k_max, args.samples), th, args.method)
    _emit(args, table.columns, table.rows, {}, f"trace-scan: {len(table.rows)} values of k ({args.method})")
    return 0


def cmd_rate_scan(args: argparse.Namespace) -> int:
    th = _scan_theta(args)
    table = fg.rate_table(fg.k_grid(args.k_min, args.k_max, args.samples), th, args.method)
    last = table.rows[-1]
    _emit(args, table.columns, table.rows, {},
          f"rate-scan: gamma_backward({fmt(last[0])}) = {fmt(last[1])}, gamma_forward = {fmt(last[2])}")
    return 0


def _flow_spec(args: argparse.Namespace, p: PlasmaParams, env: sf.EnvelopeSpec):
    if args.triplet:
        xi = 0.0 if args.xi in (None, "auto") else float(args.xi)
        eta = args.eta if args.eta_given else (slow_circle_radius(p), 0.0)
        spec = sf.triplet_block_spec(p, args.triplet, xi, eta, env)
        # largest edge-pair rate sqrt(c_ab c_ba)
        pred = 0.0
        for cp_a in spec.couplings:
            for cp_b in spec.couplings:
                if cp_a.target == cp_b.source and cp_a.source == cp_b.target:
                    pred = max(pred, max(np.sqrt(complex(cp_a.coefficient * cp_b.coefficient)).real, 0.0))
        return spec, xi, eta, env.sup * pred
    pair = tuple(args.pair or (1, 4))
    eta = args.eta
    if args.xi in (None, "auto"):
        if eta == (0.0, 0.0):
            xi = sf.backward_root(p, pair) if pair == (1, 4) else find_axis_resonances(p, pair)[0].xi
        else:
            xi, _ = sf.off_axis_resonance(p, pair, math.hypot(*eta))
    else:
        xi = float(args.xi)
    spec = sf.pair_block_spec(p, pair, xi, eta, env)
    prod = complex(spec.couplings[0].coefficient * spec.couplings[1].coefficient)
    return spec, xi, eta, env.sup * max(np.sqrt(prod).real, 0.0)


def cmd_flow(args: argparse.Namespace) -> int:
    p = _params(args)
    eps = args.epsilon if args.epsilon > 0 else 1e-4
    flow_params = p.replace(epsilon=0.0)
    env = sf.EnvelopeSpec.parse(args.envelope)
    try:
        spec, xi, eta, predicted = _flow_spec(args, flow_params, env)
    except (sf.FlowError, IndexError) as exc:
        raise RegimeError(f"no resonant frequency for the requested block: {exc}") from exc
    grid = sf.FlowGrid(length=args.grid_l, n_points=args.grid_n, epsilon=eps, dt=args.dt)
    se = math.sqrt(eps)
    t_final = args.t_final if args.t_final is not None else (10 * se / predicted if predicted > 0 else 10 * se)
    try:
        traj = sf.run_flow(spec, grid, t_final, n_snapshots=101, keep_snapshots=False)
    except sf.FlowError as exc:
        raise UsageError(str(exc)) from exc
    fit = sf.estimate_growth(traj)
    rel = abs(fit.rate - predicted) / predicted if predicted > 0 else math.nan
    payload = {
        "labels": list(spec.labels),
        "xi": xi,
        "eta1": eta[0],
        "eta2": eta[1],
        "epsilon_flow": eps,
        "t_final": t_final,
        "fitted_rate": fit.rate,
        "predicted_rate": predicted,
        "relative_error": rel,
        "r_squared": fit.r_squared,
        "reliable": fit.reliable,
    }
    cols = ["t", "sup_norm", "l2_norm"] + [f"sup_{j}" for j in spec.labels]
    if args.format == "json":
        _write(render_json(payload, _config(args)), args.output)
    else:
        _write(render_csv(cols, traj.rows(), _config(args)), args.output)
    print(f"flow {spec.kind} {spec.labels}: fitted_rate = {fmt(fit.rate)}, predicted_rate = {fmt(predicted)}, "
          f"R^2 = {fmt(fit.r_squared)}", file=sys.stderr)
    return 0


def cmd_zakharov(args: argparse.Namespace) -> int:
    p = _params(args)
    env = sf.EnvelopeSpec.parse(args.envelope)
    if env.kind != "gauss":
        raise UsageError("zakharov needs a localized envelope (gauss:A,w)")
    grid = zk.ZakharovGrid(n_points=args.grid_n, length=args.grid_l, dim_y=args.dim_y, dt=args.dt or 1e-3)
    try:
        state = zk.init_from_wkb(zk.gaussian_envelope(env.amplitude, env.width), p, grid,
                                 nonlinear=not args.linear)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    t_final = 1.0 if args.t_final is None else args.t_final
    rep = zk.run_and_report(state, t_final)
    payload = rep.summary()
    if args.format == "json":
        _write(render_json(payload, _config(args)), args.output)
    else:
        coords = grid.coords()
        names = ["x"] + [f"y{i + 1}" for i in range(grid.dim_y)]
        E = rep.final.E.ravel()
        n = rep.final.n.ravel()
        flat = [c.ravel() for c in coords]
        rows = [[*(c[i] for c in flat), E[i].real, E[i].imag, n[i]] for i in range(E.size)]
        _write(render_csv(names + ["re_E", "im_E", "n"], rows, _config(args)), args.output)
    print(f"zakharov: T = {fmt(rep.final.time)}, mass_drift = {fmt(rep.mass_drift)}, "
          f"amplitude_max = {fmt(rep.amplitude_max)}", file=sys.stderr)
    return 0


def _spectral_check(p: PlasmaParams, seed: int, samples: int = 200) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = rng.uniform(-1.0, 1.0, 3)
        z *= 20.0 * rng.uniform() ** (1 / 3) / max(np.linalg.norm(z), 1e-12)
        dec = sp.spectral_decomposition(p.replace(epsilon=0.0), tuple(z))
        A = sp.symbol_matrix(p, tuple(z), with_epsilon=False)
        worst = max(worst, float(np.linalg.norm(A - dec.reconstruct())))
    return worst


def cmd_report(args: argparse.Namespace) -> int:
    p = _params(args)
    th = thresholds(p)
    rows = []
    for pr in ALL_PAIRS:
        for rec in find_axis_resonances(p, pr):
            rep = interaction_report(p, pr, rec.xi)
            rate = max(np.sqrt(complex(rep.trace_matrix)).real, 0.0)
            closed = rep.trace_closed.real if rep.trace_closed is not None else math.nan
            rows.append([f"{pr[0]}{pr[1]}", rec.xi, rec.phase_residual, rep.trace_matrix.real, closed,
                         rep.classification, rep.raman_direction, rate])
    payload: Dict[str, object] = {
        "k_c": th.k_c,
        "k_min": th.k_min,
        "localization_condition": th.cond_k_thetae,
        "spectral_check_max_error": _spectral_check(p, args.seed),
    }
    try:
        gr = growth_rates(p)
        payload.update(gamma=gr.gamma, regime=gr.regime, acoustic_bound=gr.acoustic_bound)
    except RegimeError:
        payload.update(gamma=math.nan, regime="outside-localization")
    cols = ["pair", "xi", "phase_residual", "trace_matrix", "trace_closed", "classification", "direction", "rate"]
    _emit(args, cols, rows, payload,
          f"report: {len(rows)} axis resonances, gamma = {fmt(payload['gamma'])}, regime = {payload['regime']}")
    if args.output and not args.no_plots:
        from .plots import plot_table

        stem = Path(args.output).with_suffix("")
        for fid in ("variety", "unstable-resonances", "rate-vs-k"):
            plot_table(fid, fg.figure_table(fid, p), f"{stem}_{fid}.png")
    return 0


def cmd_figure(args: argparse.Namespace) -> int:
    theta = args.theta_e
    if args.id == "variety" and not args.theta_given:
        theta = math.sqrt(0.05)
    if args.id in ("trace-vs-k", "rate-vs-k"):
        th = _scan_theta(args)
        p = PlasmaParams(theta_e=min(th, 0.5), k=args.k)
        table = fg.figure_table(args.id, p, args.k_min, args.k_max, args.samples, args.method, theta_override=th)
    else:
        p = PlasmaParams(theta_e=theta, k=args.k, alpha_ie=args.alpha_ie) if theta < 1 else None
        if p is None:
            raise UsageError("--theta-e must be < 1 for this figure")
        table = fg.figure_table(args.id, p)
    _emit(args, table.columns, table.rows, {"figure": args.id}, f"figure {args.id}: {len(table.rows)} rows")
    if args.png:
        from .plots import plot_table

        plot_table(args.id, table, args.png)
    return 0


# ------------------------------------------------------------------ parser


def _common(sp_: argparse.ArgumentParser) -> None:
    sp_.add_argument("--k", type=float, default=3.0, help="pump wavenumber")
    sp_.add_argument("--theta-e", type=float, default=0.1, help="electron thermal parameter")
    sp_.add_argument("--alpha-ie", type=float, default=0.0, help="ion/electron thermal ratio")
    sp_.add_argument("--epsilon", type=float, default=0.0, help="mass ratio epsilon")
    sp_.add_argument("--output", "-o", default=None, help="artifact path (default: stdout)")
    sp_.add_argument("--format", choices=("csv", "json"), default="csv")
    sp_.add_argument("--seed", type=int, default=0, help="seed for sampled checks")


def _scan(sp_: argparse.ArgumentParser) -> None:
    sp_.add_argument("--k-min", type=float, default=1.8)
    sp_.add_argument("--k-max", type=float, default=5.0)
    sp_.add_argument("--samples", type=int, default=50)
    sp_.add_argument("--method", choices=("closed", "matrix"), default="closed",
                     help="leading-order closed forms or the full matrix pipeline")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="emraman", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"emraman {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dispersion", help="sample the characteristic variety")
    _common(s)
    s.add_argument("--xi-min", type=float, default=-5.0)
    s.add_argument("--xi-max", type=float, default=5.0)
    s.add_argument("--samples", type=int, default=201)
    s.add_argument("--eta", type=_eta, default=(0.0, 0.0))
    s.set_defaults(func=cmd_dispersion)

    s = sub.add_parser("resonances", help="axis resonances and resonance curves")
    _common(s)
    s.add_argument("--pair", type=_pair, default=None)
    s.add_argument("--curves", action="store_true", help="also trace the curves in (xi, |eta|)")
    s.add_argument("--curve-n", type=int, default=300)
    s.set_defaults(func=cmd_resonances)

    s = sub.add_parser("spacetime", help="space-time resonances and thresholds")
    _common(s)
    s.add_argument("--pair", type=_pair, default=None)
    s.set_defaults(func=cmd_spacetime)

    s = sub.add_parser("trace-scan", help="traces at the resonances versus k")
    _common(s)
    _scan(s)
    s.set_defaults(func=cmd_trace_scan)

    s = sub.add_parser("rate-scan", help="backward/forward Raman rates versus k")
    _common(s)
    _scan(s)
    s.set_defaults(func=cmd_rate_scan)

    s = sub.add_parser("flow", help="symbolic-flow run with fitted versus predicted rate")
    _common(s)
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--pair", type=_pair, default=None)
    grp.add_argument("--triplet", type=_triplet, default=None)
    s.add_argument("--xi", default="auto", help="frozen xi or 'auto'")
    s.add_argument("--eta", type=_eta, default=None)
    s.add_argument("--grid-n", type=int, default=256)
    s.add_argument("--grid-l", type=float, default=40.0)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--t-final", type=float, default=None)
    s.add_argument("--envelope", type=_envelope, default="const:1", help="const:A or gauss:A,w")
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("zakharov", help="envelope run of the Zakharov system")
    _common(s)
    s.add_argument("--grid-n", type=int, default=128)
    s.add_argument("--grid-l", type=float, default=40.0)
    s.add_argument("--dim-y", type=int, choices=(1, 2), default=1)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t-final", type=float, default=None)
    s.add_argument("--envelope", type=_envelope, default="gauss:1,2")
    s.add_argument("--linear", action="store_true", help="switch the n-E coupling off")
    s.set_defaults(func=cmd_zakharov)

    s = sub.add_parser("report", help="classification table for every pair")
    _common(s)
    s.add_argument("--no-plots", action="store_true", help="skip the PNG figures next to --output")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("figure", help="data (and optional PNG) for one standard plot")
    _common(s)
    _scan(s)
    s.add_argument("--id", required=True, choices=fg.FIGURE_IDS)
    s.add_argument("--png", default=None, help="also render the figure to this PNG path")
    s.set_defaults(func=cmd_figure)
    return ap


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    raw = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(raw)
    except SystemExit as exc:
        return int(exc.code or 0)
    if hasattr(args, "eta") and args.command == "flow":
        args.eta_given = args.eta is not None
        if args.eta is None:
            args.eta = (0.0, 0.0)
    if args.command == "figure":
        args.theta_given = "--theta-e" in raw or any(a.startswith("--theta-e=") for a in raw)
    try:
        return args.func(args)
    except RegimeError as exc:
        print(f"emraman: regime error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        print(f"emraman: usage error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
