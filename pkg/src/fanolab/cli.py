"""Command-line entry point: ``fanolab {spectral,bound-states,decay,sweep}``.

Exit codes: 0 success, 1 domain error, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import decay, lattice, spectral
from .errors import ConfigError, EmptySweep, FanoDomainError
from .model import ModelParams, outside_bound_state_window, validate
from .output import dumps, ensure_dir, write_report, write_table

log = logging.getLogger("fanolab")

PRESETS = {
    "fig4": dict(kappa0=1.0, kappaa=0.2, n0=12, omega_a=0.15),
    "fig5": dict(kappa0=1.0, kappaa=0.2, n0=12, omega_a=0.0),
}


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _absorber_spec(text: str):
    if text in ("default", "none"):
        return text
    try:
        start, strength, power = text.split(":")
        return lattice.Absorber(start=int(start), strength=float(strength), power=int(power))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("absorber must be 'default', 'none' or START:STRENGTH:POWER") from exc


def _model_args(p: argparse.ArgumentParser, n0_list: bool = False) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set: fig4 (no BIC) or fig5 (BIC at omega_a = 0)")
    g.add_argument("--kappa0", type=float, default=None, help="lattice hopping rate (default 1)")
    g.add_argument("--kappa-a", dest="kappaa", type=float, default=None, help="level coupling (default 0.2)")
    if n0_list:
        g.add_argument("--n0", type=_int_list, default=None, help="comma-separated attachment sites")
    else:
        g.add_argument("--n0", type=int, default=None, help="attachment site (default 12)")
    g.add_argument("--omega-a", dest="omega_a", type=float, default=None, help="level frequency (default 0)")
    g.add_argument("--resonance-tol", type=float, default=None,
                   help="|omega_a - Omega_m| below which a resonance is declared (units of kappa0)")


def _output_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--out", type=Path, required=required, help="output directory")
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")


def _sim_args(p: argparse.ArgumentParser, t_max: float) -> None:
    g = p.add_argument_group("simulation")
    g.add_argument("--t-max", type=float, default=t_max)
    g.add_argument("--rk-tol", type=float, default=1e-9)
    g.add_argument("--lattice-size", type=int, default=None, help="number of lattice sites N")
    g.add_argument("--absorber", type=_absorber_spec, default="default",
                   help="'default' (last 25%%, strength kappa0, power 3), 'none' or START:STRENGTH:POWER")
    g.add_argument("--stride", type=float, default=None, help="sampling interval (default 0.1/kappa0)")
    g.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")


def _params(args, n0=None) -> ModelParams:
    base = dict(kappa0=1.0, kappaa=0.2, n0=12, omega_a=0.0)
    if args.preset:
        base.update(PRESETS[args.preset])
    for key in ("kappa0", "kappaa", "omega_a"):
        if getattr(args, key, None) is not None:
            base[key] = getattr(args, key)
    if n0 is not None:
        base["n0"] = n0
    elif getattr(args, "n0", None) is not None:
        base["n0"] = args.n0
    return validate(ModelParams(**base))


def _sim_config(params: ModelParams, args, t_max: float | None = None, store_sites: bool = True) -> lattice.SimConfig:
    t_max = args.t_max if t_max is None else t_max
    stride = args.stride if args.stride is not None else 0.1 / params.kappa0
    kw = dict(rk_tol=args.rk_tol, snapshot_stride=stride, store_sites=store_sites)
    spec = args.absorber
    if spec == "none":
        cfg = lattice.default_config(params, t_max, absorber=False, **kw)
        if args.lattice_size is not None:
            cfg = lattice.SimConfig(N=args.lattice_size, t_max=t_max, **kw)
    elif spec == "default":
        cfg = lattice.default_config(params, t_max, absorber=True, **kw)
        if args.lattice_size is not None:
            n = args.lattice_size
            cfg = lattice.SimConfig(
                N=n, t_max=t_max, absorber=lattice.Absorber(n - n // 4, params.kappa0, 3), **kw
            )
    else:
        n = args.lattice_size if args.lattice_size is not None else lattice.default_config(params, t_max).N
        cfg = lattice.SimConfig(N=n, t_max=t_max, absorber=spec, **kw)
    return cfg.check(params)


def _config_meta(cfg: lattice.SimConfig) -> dict:
    ab = cfg.absorber
    return {
        "N": cfg.N,
        "t_max": cfg.t_max,
        "rk_tol": cfg.rk_tol,
        "snapshot_stride": cfg.snapshot_stride,
        "absorber": None if ab is None else {"start": ab.start, "strength": ab.strength, "power": ab.power},
    }


# -- spectral -----------------------------------------------------------------------------


def _spectral_rows(params: ModelParams, grid: int):
    k0 = params.kappa0
    omegas = np.linspace(-3.0 * k0, 3.0 * k0, grid)
    rows = []
    for w in omegas:
        if abs(w) > 2.0 * k0:
            g = 0.0
            d = float(spectral.level_shift_delta(params, w))
        elif abs(w) == 2.0 * k0:
            g = 0.0
            d = spectral.delta_edge_limit(params, "upper" if w > 0 else "lower")
        else:
            g = float(spectral.spectral_density_G(params, w))
            d = float(spectral.level_shift_delta(params, w))
        rows.append((w / k0, g / k0, d / k0))
    return rows


def cmd_spectral(args) -> dict:
    if args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    out = ensure_dir(args.out)
    n0_values = args.n0 or [1, 2, 4, 8]
    written = []
    for n0 in n0_values:
        params = _params(args, n0=n0)
        meta = {"command": "spectral", "params": params.as_dict(), "grid": args.grid,
                "omega_range": [-3.0 * params.kappa0, 3.0 * params.kappa0]}
        paths = write_table(out / f"spectral_n0_{n0}", ("omega", "G", "Delta"),
                            _spectral_rows(params, args.grid), meta, args.output_format)
        written.extend(str(p) for p in paths)
    return {"command": "spectral", "files": written}


# -- bound states --------------------------------------------------------------------------


def bound_state_report(params: ModelParams, resonance_tol: float | None = None) -> dict:
    (lower, upper), inside = outside_bound_state_window(params)
    outside = spectral.find_outside_bound_states(params)
    bics = []
    for st in spectral.bic_bound_states(params, tol=resonance_tol):
        cands = decay.residue_candidates(params)
        bics.append({
            "omega": st.omega,
            "m": st.m_index,
            "weight": st.weight,
            "weight_PaperEq25": cands[decay.ResidueFormula.PAPER_EQ25],
            "weight_EigenvectorOverlap": cands[decay.ResidueFormula.EIGENVECTOR_OVERLAP],
        })
    return {
        "params": params.as_dict(),
        "window": {"lower": lower, "upper": upper, "omega_a_inside": inside},
        "outside_states": [
            {"omega": st.omega, "kind": st.kind.value, "residual": st.residual} for st in outside
        ],
        "bic": bics,
        "residue_formula": decay.resolve_residue_formula().winner.value if bics else None,
    }


def cmd_bound_states(args) -> dict:
    params = _params(args)
    report = {"command": "bound-states", **bound_state_report(params, args.resonance_tol)}
    if args.out is not None:
        out = ensure_dir(args.out)
        if args.output_format == "json":
            report["files"] = [str(write_report(out / "bound_states.json", report))]
        else:
            rows = [(s["omega"], 0, math.nan, math.nan, s["residual"]) for s in report["outside_states"]]
            rows += [(b["omega"], 1, b["m"], b["weight"], 0.0) for b in report["bic"]]
            meta = {"command": "bound-states", "params": params.as_dict(), "window": report["window"]}
            paths = write_table(out / "bound_states", ("omega", "in_continuum", "m", "weight", "residual"),
                                rows, meta, "csv")
            report["files"] = [str(p) for p in paths]
    return report


# -- decay ---------------------------------------------------------------------------------


def _tail_window(t_max: float, tail) -> tuple[float, float]:
    if tail:
        return float(tail[0]), float(tail[1])
    return 0.75 * t_max, t_max


def cmd_decay(args) -> dict:
    params = _params(args)
    cfg = _sim_config(params, args, store_sites=args.sites)
    out = ensure_dir(args.out)
    trace = lattice.integrate(params, cfg, backend=args.backend)
    columns = ["t", "abs_ca", "re_ca", "im_ca", "norm"]
    data = [trace.times, np.abs(trace.ca_series), trace.ca_series.real, trace.ca_series.imag, trace.norm_series]
    tail = _tail_window(cfg.t_max, args.tail)
    report = {
        "command": "decay",
        "params": params.as_dict(),
        "sim": _config_meta(cfg),
        "backend": lattice.BACKEND if args.backend == "auto" else args.backend,
        "steps_accepted": trace.steps_accepted,
        "steps_rejected": trace.steps_rejected,
    }
    tail_abs = np.abs(trace.ca_series[trace.window(*tail)])
    report["plateau"] = {
        "window": list(tail),
        "mean": float(tail_abs.mean()) if tail_abs.size else None,
        "min": float(tail_abs.min()) if tail_abs.size else None,
        "max": float(tail_abs.max()) if tail_abs.size else None,
        "final_abs_ca": float(abs(trace.ca_series[-1])),
    }
    if args.analytic:
        values = decay.analytic_series(params, trace.times)
        columns += ["analytic_abs_ca", "analytic_re_ca", "analytic_im_ca"]
        data += [np.abs(values), values.real, values.imag]
        cmp = decay.compare_traces(trace, (trace.times, values), (0.0, cfg.t_max), tail)
        report["comparison"] = cmp.as_dict()
        report["pole_amplitude"] = decay.pole_amplitude(params)
    meta = {"command": "decay", "params": params.as_dict(), "sim": _config_meta(cfg)}
    files = write_table(out / "decay", columns, np.column_stack(data), meta, args.output_format)
    if args.sites:
        site_cols = ["t"] + [f"c{n}" for n in range(1, cfg.N + 1)]
        files += write_table(out / "sites", site_cols, np.column_stack([trace.times, trace.site_snapshots]),
                             {**meta, "quantity": "|c_n|"}, args.output_format)
    report["files"] = [str(p) for p in files]
    write_report(out / "decay_report.json", report)
    return report


# -- sweep ---------------------------------------------------------------------------------


def _sweep_point(task):
    params, cfg, backend, tail = task
    trace = lattice.integrate(params, cfg, backend=backend)
    tail_abs = np.abs(trace.ca_series[trace.window(*tail)])
    return float(tail_abs.mean()), float(abs(trace.ca_series[-1]))


def cmd_sweep(args) -> dict:
    values = args.values
    if not values:
        raise EmptySweep("sweep grid is empty")
    out = ensure_dir(args.out)
    tasks, points = [], []
    for v in values:
        if args.param == "omega_a":
            params = _params(args).replace(omega_a=float(v))
        elif args.param == "n0":
            params = _params(args, n0=int(v))
        else:
            params = _params(args).replace(kappaa=float(v) * _params(args).kappa0)
        validate(params)
        cfg = _sim_config(params, args, store_sites=False)
        tasks.append((params, cfg, args.backend, _tail_window(cfg.t_max, args.tail)))
        points.append((float(v), params))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = []
    for (v, params), (tail_mean, final_abs) in zip(points, results):
        z = decay.pole_amplitude(params, tol=args.resonance_tol)
        is_bic = bool(spectral.bic_bound_states(params, tol=args.resonance_tol))
        rows.append((v, params.omega_a, params.n0, params.kappaa, tail_mean, final_abs, z, is_bic))
    rows.sort(key=lambda r: r[0])
    meta = {"command": "sweep", "param": args.param, "base_params": _params(args).as_dict(),
            "t_max": args.t_max, "tail": list(_tail_window(args.t_max, args.tail))}
    columns = ("value", "omega_a", "n0", "kappa_a", "tail_mean_abs_ca", "final_abs_ca", "pole_amplitude", "bic")
    files = write_table(out / f"sweep_{args.param}", columns, rows, meta, args.output_format)
    return {"command": "sweep", "rows": len(rows), "files": [str(p) for p in files]}


# -- entry point ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fanolab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectral", help="tables of G and Delta versus omega for several n0")
    _model_args(p, n0_list=True)
    p.add_argument("--grid", type=int, default=1201, help="number of omega samples on [-3 kappa0, 3 kappa0]")
    _output_args(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("bound-states", help="bound states inside and outside the band")
    _model_args(p)
    _output_args(p, required=False)
    p.set_defaults(func=cmd_bound_states)

    p = sub.add_parser("decay", help="lattice simulation of the survival amplitude")
    _model_args(p)
    _sim_args(p, t_max=200.0)
    p.add_argument("--analytic", action="store_true", help="add the exact decay law as overlay columns")
    p.add_argument("--sites", action="store_true", help="also write the |c_n(t)| grid")
    p.add_argument("--tail", type=_float_list, default=None, help="plateau window T0,T1")
    _output_args(p)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("sweep", help="tail |c_a| over a parameter grid")
    _model_args(p)
    _sim_args(p, t_max=100.0)
    p.add_argument("--param", choices=("omega_a", "n0", "kappa_a"), default="omega_a")
    p.add_argument("--values", type=_float_list, required=True, help="comma-separated grid")
    p.add_argument("--tail", type=_float_list, default=None, help="plateau window T0,T1")
    p.add_argument("--jobs", type=int, default=1)
    _output_args(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        result = args.func(args)
    except ConfigError as exc:
        print(f"fanolab: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fanolab: I/O error: {exc}", file=sys.stderr)
        return 2
    except FanoDomainError as exc:
        print(f"fanolab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
