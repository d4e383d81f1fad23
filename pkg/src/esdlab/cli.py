"""Command-line front end: sweeps, measure comparisons, tomography, optics.

Every command accepts ``--config FILE`` holding flat ``key = value`` lines
(keys are the long flag names); flags given on the command line win.
Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import channels, esd, mcompare, measures, states, tomography
from .errors import ConvergenceError, EsdlabError, ParameterError

OUT_DIR_ENV = "ESDLAB_OUT_DIR"
EXIT_INVALID = 2
EXIT_NUMERIC = 3


# ------------------------------------------------------------ plumbing

def _read_config(path: str) -> dict:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.BadParameter(f"line {n}: expected key = value", param_hint="--config")
        k, v = (s.strip() for s in line.split("=", 1))
        key = k.lstrip("-").replace("-", "_")
        if v.lower() in ("true", "yes", "on"):
            out[key] = True
        elif v.lower() in ("false", "no", "off"):
            out[key] = False
        else:
            out[key] = v
    return out


def _load_config(ctx: click.Context, param, value):
    if value:
        try:
            conf = _read_config(value)
        except OSError as exc:
            raise click.BadParameter(str(exc), param_hint="--config")
        known = {p.name for p in ctx.command.params}
        unknown = sorted(set(conf) - known)
        if unknown:
            raise click.BadParameter(f"unknown keys: {', '.join(unknown)}", param_hint="--config")
        ctx.default_map = {**(ctx.default_map or {}), **conf}
    return value


def config_option(f):
    return click.option("--config", type=click.Path(dir_okay=False), callback=_load_config,
                        is_eager=True, expose_value=False,
                        help="key = value file; command-line flags override it.")(f)


def _out_path(name: str | None, default: str) -> Path:
    p = Path(name or default)
    if not p.is_absolute():
        p = Path(os.environ.get(OUT_DIR_ENV, ".")) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _g9(x) -> str:
    if isinstance(x, str):
        return x
    s = f"{float(x):.9g}"
    return "0" if s == "-0" else s


def _g17(x) -> str:
    s = f"{float(x):.17g}"
    return "0" if s == "-0" else s


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)] + [",".join(_g9(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _g17(v) if np.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    if isinstance(v, states.DensityMatrix):
        return v.to_json()
    raise TypeError(f"cannot serialize {type(v)}")


def _write_json(path: Path, obj) -> None:
    path.write_text(_json_value(obj) + "\n")


def _fail(exc: Exception) -> None:
    code = EXIT_NUMERIC if isinstance(exc, (ConvergenceError, ArithmeticError)) else EXIT_INVALID
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _run(fn):
    try:
        fn()
    except (EsdlabError, ValueError, ArithmeticError) as exc:
        _fail(exc)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Entanglement sudden death, measure comparison and tomography tools."""


# ----------------------------------------------------------------- esd

_FAMILIES = ("x", "qubit-qutrit-I", "qubit-qutrit-II")
_X_LUO_MODES = {"sx,sx": "double-not", "sx,i": "single-not", "i,sx": "single-not"}


def _report_lines(rep: esd.RegimeReport) -> list[str]:
    def f(v):
        return "none" if v is None else f"{v:.6g}"
    lines = [f"p0={f(rep.p0)}", f"pA={f(rep.pA)}", f"pB={f(rep.pB)}",
             f"regimes={rep.regime_set or '-'}",
             "boundaries=" + (",".join(f"{b:.6g}" for b in rep.boundaries) or "none")]
    for reg, lo, hi in rep.regimes:
        lines.append(f"  {reg}: [{lo:.6g}, {hi:.6g})")
    return lines


def _emit_report(rep: esd.RegimeReport, out, fmt: str) -> None:
    for line in _report_lines(rep):
        click.echo(line)
    path = _out_path(out, "esd." + fmt)
    if fmt == "csv":
        _write_csv(path, ["p_n", "p_end", "regime"], rep.p_end_curve)
    else:
        _write_json(path, {"p0": rep.p0, "pA": rep.pA, "pB": rep.pB, "regimes": rep.regime_set,
                           "boundaries": rep.boundaries,
                           "curve": [list(r) for r in rep.p_end_curve]})
    click.echo(f"wrote {path}")


def _esd_impl(u, v, mode, family, x, luo, grid, points, out, fmt, jobs):
    if family == "x":
        if u is None or v is None:
            raise click.UsageError("the x family needs --u and --v")
        if luo is not None:
            key = ",".join(channels.canonical_unitary_name(n).lower() for n in luo.split(","))
            if key not in _X_LUO_MODES:
                raise click.BadParameter("X states support sx,sx / sx,i / i,sx", param_hint="--luo")
            mode = _X_LUO_MODES[key]
        rho0 = states.x_state(u, v)
        if abs(v) == 0:
            raise ParameterError("separable input (|v| = 0): no entanglement to track")
        if mode == "none":
            p0 = esd.esd_p0_x(u, v)
            click.echo(f"p0={p0:.6g}")
            ps = np.linspace(0.0, 1.0, points)
            fam = channels.family_for((2, 2))

            def row(p):
                rho = channels.apply(rho0, fam(float(p)))
                return (float(p), measures.negativity(rho), rho.purity())

            rows = esd.run_grid(row, list(ps), jobs)
            path = _out_path(out, "esd." + fmt)
            if fmt == "csv":
                _write_csv(path, ["p", "negativity", "purity"], rows)
            else:
                _write_json(path, {"p0": p0, "rows": [list(r) for r in rows]})
            click.echo(f"wrote {path}")
            return
        _emit_report(esd.x_state_report(u, v, mode, grid=grid), out, fmt)
        return
    if luo is None:
        raise click.UsageError("qubit-qutrit families need --luo")
    state = "I" if family.endswith("-I") else "II"
    rep = esd.qq3_manipulation_curves(state, luo, x=x, grid=grid)
    _emit_report(rep, out, fmt)


def _esd_options(f):
    opts = [
        click.option("--u", type=float, default=None, help="X-state population of |00>."),
        click.option("--v", type=float, default=None, help="X-state coherence |v|."),
        click.option("--mode", type=click.Choice(["none", "single-not", "double-not"]), default="none",
                     show_default=True, help="NOT applied between the two damping stages."),
        click.option("--family", type=click.Choice(_FAMILIES), default="x", show_default=True),
        click.option("--x", type=float, default=None, help="Mixing parameter of the qubit-qutrit states."),
        click.option("--grid", type=int, default=120, show_default=True, help="p_n grid size."),
        click.option("--points", type=int, default=101, show_default=True,
                     help="Rows in the uninterrupted negativity table."),
        click.option("--out", type=str, default=None, help=f"Output file (relative to ${OUT_DIR_ENV})."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
        click.option("--jobs", type=int, default=1, show_default=True, help="Worker threads for sweeps."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


@main.command("esd")
@config_option
@_esd_options
@click.option("--luo", type=str, default=None, help="Local unitary pair, e.g. sx,f01.")
def cmd_esd(u, v, mode, family, x, grid, points, out, fmt, jobs, luo):
    """Sudden-death thresholds and LUO regime reports."""
    _run(lambda: _esd_impl(u, v, mode, family, x, luo, grid, points, out, fmt, jobs))


@main.command("manipulate")
@config_option
@_esd_options
@click.option("--luo", type=str, required=True, help="Local unitary pair, e.g. sx,sx or sx,f01.")
def cmd_manipulate(u, v, mode, family, x, grid, points, out, fmt, jobs, luo):
    """Same as esd with a mandatory local-unitary pair."""
    _run(lambda: _esd_impl(u, v, mode, family, x, luo, grid, points, out, fmt, jobs))


# ------------------------------------------------------------- compare

QUBIT_TABLE_C0 = (0.1, 0.2, 0.4, 0.7, 0.7071, 0.8, 0.9)
QUTRIT_TABLE = ((0.1, 0.1), (0.3, 0.8), (0.5774, 0.5774), (0.6, 0.6), (0.9, 0.3))
_TABLE_ALIASES = {"3.1": "qubit", "3.3": "qutrit"}


@main.command("compare")
@config_option
@click.option("--table", type=str, default=None, help="Print the reference rows: qubit or qutrit.")
@click.option("--qutrit", is_flag=True, default=False, help="Two-qutrit measures instead of two-qubit.")
@click.option("--optimize", is_flag=True, default=False, help="Report the maxima of each ΔQ.")
@click.option("--grid", type=int, default=101, show_default=True, help="Number of c0 values in [0, 1].")
@click.option("--out", type=str, default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
def cmd_compare(table, qutrit, optimize, grid, out, jobs):
    """Fractional deviations of pure states from the maximally entangled one."""
    def go():
        nonlocal qutrit
        if table is not None:
            t = _TABLE_ALIASES.get(table, table)
            if t not in ("qubit", "qutrit"):
                raise click.BadParameter("use qubit or qutrit", param_hint="--table")
            qutrit = qutrit or t == "qutrit"
        if qutrit:
            header = ["c0", "c1", "E", "N", "C", "QE", "QN", "QC", "dQNE", "dQEC", "dQNC"]
            if table is not None:
                pts = list(QUTRIT_TABLE)
            else:
                g = np.linspace(0.0, 1.0, grid)
                pts = [(a, b) for a in g for b in g if a * a + b * b <= 1 + 1e-12]
            rows_obj = esd.run_grid(lambda ab: mcompare.qutrit_deviation_row(*ab), pts, jobs)
            rows = [[r.c0, r.c1, r.measures["E"], r.measures["N"], r.measures["C"],
                     *(100 * r.q[k] for k in ("QE", "QN", "QC")),
                     *(100 * r.dq[k] for k in ("dQNE", "dQEC", "dQNC"))] for r in rows_obj]
        else:
            header = ["c0", "N", "LN", "EOF", "QN", "QL", "QE", "dQNL", "dQEL", "dQNE"]
            pts = list(QUBIT_TABLE_C0) if table is not None else list(np.linspace(0.0, 1.0, grid))
            rows_obj = esd.run_grid(mcompare.deviation_row, pts, jobs)
            rows = [[r.c0, r.measures["N"], r.measures["LN"], r.measures["EOF"],
                     *(100 * r.q[k] for k in ("QN", "QL", "QE")),
                     *(100 * r.dq[k] for k in ("dQNL", "dQEL", "dQNE"))] for r in rows_obj]
        if table is not None:
            click.echo(" | ".join(header))
            for row in rows:
                n_coef = 2 if qutrit else 1
                cells = [f"{v:.4f}" for v in row[:n_coef]]
                cells += [f"{v:.4f}" for v in row[n_coef:n_coef + 3]]
                cells += [f"{v:.2f}" for v in row[n_coef + 3:]]
                click.echo(" | ".join(cells))
        if optimize:
            if qutrit:
                for e in mcompare.qutrit_max_delta_q():
                    click.echo(f"max {e.name} = {100 * e.value:.2f}% at c0={e.c0:.4f}, c1={e.c1:.4f}")
            else:
                for e in mcompare.max_delta_q():
                    click.echo(f"max {e.name} = {100 * e.value:.2f}% at c0={e.c0:.4f} (and {e.mirror:.4f})")
        path = _out_path(out, "compare_qutrit.csv" if qutrit else "compare.csv")
        _write_csv(path, header, rows)
        click.echo(f"wrote {path}")

    _run(go)


# -------------------------------------------------------------- qutrit

@main.command("qutrit")
@config_option
@click.option("--x", type=float, default=0.25, show_default=True, help="Two-qutrit mixing parameter.")
@click.option("--a", type=float, default=1.0, show_default=True, help="Damping ratio of the coherent level.")
@click.option("--b", type=float, default=0.75, show_default=True, help="Damping ratio of the other level.")
@click.option("--luo", type=str, default=None, help="Trit-flip pair, e.g. f01,i.")
@click.option("--grid", type=int, default=80, show_default=True)
@click.option("--out", type=str, default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
def cmd_qutrit(x, a, b, luo, grid, out, fmt):
    """Negativity sudden death of the two-qutrit family and its manipulation."""
    def go():
        rep = esd.qutrit_qutrit_nsd(x, a, b, luo=luo, grid=grid)
        click.echo(f"nsd={rep.p0:.6g}")
        for p, val in rep.extras.get("realigned_after", {}).items():
            click.echo(f"realigned_negativity(p={p:.6g})={val:.3g}")
        if luo is not None:
            _emit_report(rep, out or ("qutrit." + fmt), fmt)

    _run(go)


# ---------------------------------------------------------------- tomo

def _parse_state(spec: str) -> states.DensityMatrix:
    s = spec.strip().lower()
    if s == "bell":
        return states.two_qubit_pure(1 / np.sqrt(2))
    if s in ("hh", "00"):
        return states.two_qubit_pure(1.0)
    if s.startswith("x:"):
        u, v = (float(t) for t in s[2:].split(","))
        return states.x_state(u, v)
    if s.startswith("pure:"):
        return states.two_qubit_pure(float(s[5:]))
    if s.startswith("random:"):
        return states.random_density((2, 2), np.random.Generator(np.random.PCG64(int(s[7:]))))
    raise click.BadParameter("use bell, hh, x:u,v, pure:c0 or random:seed", param_hint="--state")


@main.command("tomo")
@config_option
@click.option("--state", type=str, default="bell", show_default=True,
              help="bell, hh, x:u,v, pure:c0 or random:seed.")
@click.option("--flux", type=float, default=1e4, show_default=True, help="Counts per setting for Tr[Pρ]=1.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noiseless", is_flag=True, default=False, help="Use expected counts, no Poisson noise.")
@click.option("--decohere", type=str, default=None, help="dtau:tau_c in fs; scales the |00><11| corner.")
@click.option("--records", "records_out", type=str, default="tomo_records.csv", show_default=True)
@click.option("--report", "report_out", type=str, default="tomo_report.json", show_default=True)
def cmd_tomo(state, flux, seed, noiseless, decohere, records_out, report_out):
    """Simulate 36-setting counts and reconstruct by maximum likelihood."""
    def go():
        target = _parse_state(state)
        if decohere:
            dt, tc = (float(t) for t in decohere.split(":"))
            target = tomography.decohere_corner(target, tomography.decoherence_factor(dt, tc))
        recs = tomography.simulate_counts(target, flux=flux, seed=seed,
                                          noise=None if noiseless else "poisson")
        rows = []
        for r in recs:
            (s1, s2) = r.settings
            rows.append([s1.qwp_deg, s1.hwp_deg, s2.qwp_deg, s2.hwp_deg, r.counts, r.duration])
        rpath = _out_path(records_out, "tomo_records.csv")
        _write_csv(rpath, ["arm1_qwp", "arm1_hwp", "arm2_qwp", "arm2_hwp", "counts", "duration_s"], rows)
        res = tomography.mle_fit(recs)
        rho = res.rho_mle
        report = {
            "density_matrix": rho,
            "fidelity_vs_target": measures.fidelity(rho, target),
            "concurrence": measures.concurrence_2q(rho),
            "purity": rho.purity(),
            "likelihood": res.likelihood,
            "iterations": res.iterations,
            "seed": seed,
            "noise": "none" if noiseless else "poisson",
            "corner": abs(rho.mat[0, 3]),
        }
        jpath = _out_path(report_out, "tomo_report.json")
        _write_json(jpath, report)
        click.echo(f"fidelity={report['fidelity_vs_target']:.8f} concurrence={report['concurrence']:.6f} "
                   f"purity={report['purity']:.6f} corner={report['corner']:.6f}")
        click.echo(f"wrote {rpath}")
        click.echo(f"wrote {jpath}")

    _run(go)


# -------------------------------------------------------------- optics

@main.command("optics")
@config_option
@click.option("--lambda-nm", type=float, default=405.0, show_default=True, help="Centre wavelength.")
@click.option("--dlambda-nm", type=float, default=1.2, show_default=True, help="Bandwidth.")
@click.option("--dtau-fs", type=float, default=210.0, show_default=True, help="Walk-off delay.")
@click.option("--corner", type=float, default=0.5, show_default=True, help="Undecohered coherence.")
@click.option("--out", type=str, default=None, help="Optional JSON output.")
def cmd_optics(lambda_nm, dlambda_nm, dtau_fs, corner, out):
    """Coherence time, walk-off decoherence, BBO indices and phase matching."""
    def go():
        l_c, tau_c = tomography.coherence(lambda_nm, dlambda_nm)
        fac = tomography.decoherence_factor(dtau_fs, tau_c)
        lam_um = lambda_nm / 1000.0
        res = {"l_c_um": l_c, "tau_c_fs": tau_c, "decoherence_factor": fac, "corner": corner * fac}
        try:
            n_o, n_e = tomography.sellmeier_bbo(lam_um)
            res.update(n_o=n_o, n_e=n_e)
            res["theta_pm_deg"] = float(np.rad2deg(tomography.phase_match_angle(lam_um)))
        except EsdlabError as exc:
            click.echo(f"note: {exc}", err=True)
        for k, v in res.items():
            click.echo(f"{k}={v:.6g}")
        if out:
            path = _out_path(out, "optics.json")
            _write_json(path, res)
            click.echo(f"wrote {path}")

    _run(go)


if __name__ == "__main__":
    main()
