"""Command-line front end: flat key = value configs in, CSV tables out.

Commands
--------
heat        chi series, heat cumulants, and the thermodynamic ledger
dynamics    u = 0 Bloch/energy series, with weak-coupling reference columns
            for the unbiased model
oracle-ibm  analytic zero-tunnelling tables (chi, mean, variance)
variational additive and variational equilibrium predictions over a sweep
sweep       cross-product of list-valued parameters, one summary row each
converge    asymptotic mean/variance versus depth, delta, or p
compare     engine versus oracle (dense window or analytic) with errors

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 partial sweep failure.  Every output embeds the resolved configuration
and engine version in `#`-prefixed metadata lines.
"""

from __future__ import annotations

import argparse
import itertools
import math
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bathcorr import BathParams, SpectralDensity, build_eta_table
from .errors import HeatmpoError
from .heatstats import cumulants_from_chi, default_u_eps, fdr_ratio, thermo_ledger
from .ibm import ibm_chi, ibm_cumulant, IbmCumulantRequest, ibm_mean_heat
from .quapi import dense_propagate
from .spinsys import SpinParams, SpinState, markov_rates, markov_reference
from .tempo import RunConfig, tempo_propagate
from .tensornet import TruncationPolicy
from .varpol import additive_prediction, solve_silbey_harris, variational_prediction

COMMANDS = ("heat", "dynamics", "oracle-ibm", "variational", "sweep",
            "converge", "compare")

_SCALAR_KEYS = {
    "alpha": float, "omega_c": float, "temperature": float,
    "omega0": float, "omega_tunnel": float, "delta": float,
    "n_steps": int, "depth": int, "p": float, "max_bond": int,
    "u": float, "t_pad": float,
}
_LIST_KEYS = {"alpha", "temperature", "omega_tunnel", "u", "depth", "p", "delta"}
_OTHER_KEYS = {"command", "initial", "axis", "oracle", "sweep_keys"}
ALLOWED_KEYS = set(_SCALAR_KEYS) | _OTHER_KEYS

_DEFAULTS = {
    "alpha": 0.1, "omega_c": 5.0, "temperature": 5.0,
    "omega0": 0.0, "omega_tunnel": 1.0, "initial": "up",
    "delta": 0.02, "n_steps": 100, "depth": 100, "p": 80.0,
    "max_bond": None, "u": None, "t_pad": 1.0,
    "axis": "depth", "oracle": "ibm",
}


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict:
    """Flat `key = value` lines; `#` starts a comment; lists are
    comma-separated and only allowed on sweepable keys."""
    raw: dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {ln}: expected 'key = value', got {stripped!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        raw[key] = value

    unknown = sorted(set(raw) - ALLOWED_KEYS)
    if unknown:
        raise ConfigError(
            "unknown config keys: " + ", ".join(unknown)
            + "; allowed keys: " + ", ".join(sorted(ALLOWED_KEYS)))

    cfg: dict = {}
    for key, value in raw.items():
        if key in _OTHER_KEYS:
            cfg[key] = value
            continue
        conv = _SCALAR_KEYS[key]
        parts = [p.strip() for p in value.split(",")] if "," in value else [value]
        if len(parts) > 1 and key not in _LIST_KEYS:
            raise ConfigError(f"key {key!r} does not accept a list")
        try:
            vals = [math.inf if (conv is float and p.lower() in ("inf", "infinity"))
                    else conv(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: cannot parse {value!r}") from exc
        cfg[key] = vals if len(parts) > 1 else vals[0]
    return cfg


def _resolved(cfg: dict) -> dict:
    out = dict(_DEFAULTS)
    out.update(cfg)
    return out


def _scalar_view(cfg: dict) -> dict:
    """Collapse any single-element leftovers; reject stray lists."""
    for key, value in cfg.items():
        if isinstance(value, list):
            raise ConfigError(f"key {key!r} must be a single value for this command")
    return cfg


def _run_config(cfg: dict, u: float) -> RunConfig:
    bath = BathParams(temperature=cfg["temperature"],
                      spectral=SpectralDensity(alpha=cfg["alpha"],
                                               omega_c=cfg["omega_c"]))
    spin = SpinParams(omega0=cfg["omega0"], omega_tunnel=cfg["omega_tunnel"])
    policy = TruncationPolicy(p_exponent=cfg["p"], max_bond=cfg["max_bond"])
    return RunConfig(spin=spin, bath=bath, initial=SpinState.named(cfg["initial"]),
                     delta=cfg["delta"], n_steps=cfg["n_steps"],
                     depth=cfg["depth"], policy=policy, u=u)


def _resolve_u(cfg: dict) -> float:
    if cfg["u"] is not None:
        return cfg["u"]
    return default_u_eps(cfg["alpha"], cfg["omega_c"])


def _metadata_lines(cfg: dict, command: str) -> list[str]:
    lines = [f"# engine_version = {__version__}", f"# command = {command}"]
    for key in sorted(cfg):
        if key in ("command",):
            continue
        lines.append(f"# {key} = {cfg[key]}")
    return lines


def _write_csv(path: str, meta: list[str], header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in meta:
            fh.write(line + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return f"{float(v):.12g}"


# ---------------------------------------------------------------- commands

def _cmd_heat(cfg: dict, out_path: str) -> None:
    cfg = _scalar_view(cfg)
    u_eps = _resolve_u(cfg)
    run_u = _run_config(cfg, u_eps)
    series, _ = tempo_propagate(run_u)
    run_0 = _run_config(cfg, 0.0)
    series0, states = tempo_propagate(run_0)
    cum = cumulants_from_chi(series, u_eps)
    ledger = thermo_ledger(states, cum, run_u.spin, run_u.bath)
    ratio = fdr_ratio(cum, run_u.bath)
    header = ["t", "chi_re", "chi_im", "mean_q", "var_q", "fd_error",
              "delta_u", "delta_s", "mean_w", "sigma", "fdr_ratio",
              "bond_max", "discarded_cum"]
    rows = [
        (t, series.chi[i].real, series.chi[i].imag, cum.mean_q[i], cum.var_q[i],
         cum.fd_error_estimate[i], ledger.delta_u[i], ledger.delta_s[i],
         ledger.mean_w[i], ledger.sigma[i], ratio[i],
         series.bond_max[i], series.discarded_cum[i])
        for i, t in enumerate(series.times)]
    meta = _metadata_lines({**cfg, "u": u_eps}, "heat")
    meta.append(f"# chi0_max_deviation = {np.max(np.abs(series0.chi - 1.0)):.3e}")
    _write_csv(out_path, meta, header, rows)


def _cmd_dynamics(cfg: dict, out_path: str) -> None:
    cfg = _scalar_view(cfg)
    run = _run_config(cfg, 0.0)
    series, states = tempo_propagate(run)
    ham = run.spin.hamiltonian
    s_x = np.array([s.s_x for s in states])
    s_y = np.array([s.s_y for s in states])
    s_z = np.array([s.s_z for s in states])
    energy = np.array([s.expect(ham) for s in states])
    header = ["t", "s_x", "s_y", "s_z", "delta_u", "bond_max"]
    cols = [series.times, s_x, s_y, s_z, energy - energy[0], series.bond_max]
    if run.spin.unbiased:
        mx, mz, mdu = markov_reference(run.spin, run.bath, run.initial, series.times)
        rates = markov_rates(run.spin, run.bath)
        header += ["s_x_markov", "s_z_markov", "delta_u_markov"]
        cols += [mx, mz, mdu]
        extra = [f"# markov_gamma = {rates.gamma:.12g}",
                 f"# markov_sx_eq = {rates.sx_eq:.12g}"]
    else:
        extra = ["# markov_reference = omitted (biased model)"]
    rows = list(zip(*cols))
    _write_csv(out_path, _metadata_lines(cfg, "dynamics") + extra, header, rows)


def _cmd_oracle_ibm(cfg: dict, out_path: str) -> None:
    cfg = _scalar_view(cfg)
    u = _resolve_u(cfg)
    bath = BathParams(temperature=cfg["temperature"],
                      spectral=SpectralDensity(alpha=cfg["alpha"],
                                               omega_c=cfg["omega_c"]))
    times = cfg["delta"] * np.arange(cfg["n_steps"] + 1)
    header = ["t", "chi_re", "chi_im", "mean_q", "var_q"]
    rows = []
    for t in times:
        chi = ibm_chi(bath, float(t), u)
        rows.append((t, chi.real, chi.imag, ibm_mean_heat(bath, float(t)),
                     ibm_cumulant(IbmCumulantRequest(order=2, bath=bath, t=float(t)))))
    meta = _metadata_lines({**cfg, "u": u}, "oracle-ibm")
    meta.append("# asymptotics realized by dropping the oscillatory term "
                "(long-time limit)")
    _write_csv(out_path, meta, header, rows)


def _cmd_variational(cfg: dict, out_path: str) -> None:
    alphas = cfg["alpha"] if isinstance(cfg["alpha"], list) else [cfg["alpha"]]
    temps = (cfg["temperature"] if isinstance(cfg["temperature"], list)
             else [cfg["temperature"]])
    spin = SpinParams(omega0=cfg["omega0"], omega_tunnel=cfg["omega_tunnel"])
    state = SpinState.named(cfg["initial"])
    header = ["alpha", "temperature", "omega_renorm", "e_r_renorm",
              "free_energy_bound", "converged", "q_additive", "q_variational"]
    rows = []
    for alpha, temp in itertools.product(alphas, temps):
        bath = BathParams(temperature=temp,
                          spectral=SpectralDensity(alpha=alpha, omega_c=cfg["omega_c"]))
        sol = solve_silbey_harris(spin, bath)
        add = additive_prediction(spin, bath, state)
        var = variational_prediction(sol, state)
        rows.append((alpha, temp, sol.omega_renorm, sol.e_r_renorm,
                     sol.free_energy_bound, sol.converged,
                     add.mean_heat, var.mean_heat))
    _write_csv(out_path, _metadata_lines(cfg, "variational"), header, rows)


def _sweep_row(args):
    """One isolated sweep run; returns (index, row dict | error string)."""
    index, row_cfg = args
    try:
        u_eps = _resolve_u(row_cfg)
        run = _run_config(row_cfg, u_eps)
        series, _ = tempo_propagate(run)
        cum = cumulants_from_chi(series, u_eps)
        return index, {
            "mean_q_final": cum.mean_q[-1],
            "var_q_final": cum.var_q[-1],
            "u": u_eps,
            "bond_max": int(series.bond_max.max()),
            "discarded_cum": series.discarded_cum[-1],
        }
    except Exception as exc:  # noqa: BLE001 - reported per row
        return index, f"{type(exc).__name__}: {exc}"


def _cmd_sweep(cfg: dict, out_path: str, workers: int) -> int:
    axes = {k: v for k, v in cfg.items() if isinstance(v, list)}
    for key in axes:
        if key not in _LIST_KEYS:
            raise ConfigError(f"key {key!r} is not sweepable")
    names = sorted(axes)
    combos = list(itertools.product(*(axes[k] for k in names))) or [()]
    jobs = []
    for i, combo in enumerate(combos):
        row_cfg = dict(cfg)
        row_cfg.update(dict(zip(names, combo)))
        jobs.append((i, row_cfg))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_sweep_row, jobs))
    else:
        results = dict(map(_sweep_row, jobs))

    header = names + ["mean_q_final", "var_q_final", "u", "bond_max",
                      "discarded_cum", "status"]
    rows, failures = [], 0
    for i, combo in enumerate(combos):
        res = results[i]
        if isinstance(res, str):
            failures += 1
            rows.append(list(combo) + ["nan"] * 5 + [f"error: {res}"])
        else:
            rows.append(list(combo) + [res["mean_q_final"], res["var_q_final"],
                                       res["u"], res["bond_max"],
                                       res["discarded_cum"], "ok"])
    meta = _metadata_lines(cfg, "sweep")
    meta.append(f"# rows = {len(combos)}  failures = {failures}  workers = {workers}")
    _write_csv(out_path, meta, header, rows)
    return 4 if failures else 0


def _cmd_converge(cfg: dict, out_path: str) -> None:
    axis = cfg["axis"]
    if axis not in ("depth", "delta", "p"):
        raise ConfigError(f"converge axis must be depth, delta or p, got {axis!r}")
    values = cfg[axis]
    if not isinstance(values, list):
        values = [values]
    if cfg["omega_tunnel"] != 0.0:
        raise ConfigError("converge compares against the zero-tunnelling "
                          "oracle; set omega_tunnel = 0")
    u = _resolve_u(cfg)
    header = [axis, "t_read", "mean_q", "mean_q_oracle", "rel_err_mean",
              "var_q", "var_q_oracle", "rel_err_var", "bond_max"]
    rows = []
    for value in values:
        row_cfg = dict(cfg)
        row_cfg[axis] = value
        # read one padding time past the memory window so the true series
        # has saturated while window-truncation drift stays bounded
        t_read = row_cfg["depth"] * row_cfg["delta"] + cfg["t_pad"]
        row_cfg["n_steps"] = int(math.ceil(t_read / row_cfg["delta"]))
        run = _run_config(row_cfg, u)
        series, _ = tempo_propagate(run)
        cum = cumulants_from_chi(series, u)
        bath = run.bath
        t_fin = float(series.times[-1])
        chi_o = ibm_chi(bath, t_fin, u)
        mean_o = chi_o.imag / u
        var_o = -2.0 * (chi_o.real - 1.0) / u ** 2 - mean_o ** 2
        rows.append((value, t_fin, cum.mean_q[-1], mean_o,
                     abs(cum.mean_q[-1] - mean_o) / abs(mean_o),
                     cum.var_q[-1], var_o,
                     abs(cum.var_q[-1] - var_o) / abs(var_o),
                     int(series.bond_max.max())))
    meta = _metadata_lines({**cfg, "u": u}, "converge")
    meta.append("# oracle = analytic chi at the same u and t_read")
    _write_csv(out_path, meta, header, rows)


def _cmd_compare(cfg: dict, out_path: str) -> None:
    cfg = _scalar_view(cfg)
    oracle = cfg["oracle"]
    u = _resolve_u(cfg)
    run = _run_config(cfg, u)
    series, _ = tempo_propagate(run)
    rows = []
    if oracle == "quapi":
        table = build_eta_table(run.bath, cfg["delta"], cfg["depth"], u)
        ref, _ = dense_propagate(run.initial, run.spin, table, cfg["n_steps"])
        header = ["t", "chi_re", "chi_im", "chi_re_oracle", "chi_im_oracle",
                  "abs_err", "rel_err"]
        for i, t in enumerate(series.times):
            err = abs(series.chi[i] - ref.chi[i])
            rows.append((t, series.chi[i].real, series.chi[i].imag,
                         ref.chi[i].real, ref.chi[i].imag, err,
                         err / max(abs(ref.chi[i]), 1e-300)))
    elif oracle == "ibm":
        if cfg["omega_tunnel"] != 0.0:
            raise ConfigError("the analytic oracle requires omega_tunnel = 0")
        header = ["t", "chi_re", "chi_im", "chi_re_oracle", "chi_im_oracle",
                  "abs_err", "rel_err"]
        for i, t in enumerate(series.times):
            ref = ibm_chi(run.bath, float(t), u)
            err = abs(series.chi[i] - ref)
            rows.append((t, series.chi[i].real, series.chi[i].imag,
                         ref.real, ref.imag, err, err / max(abs(ref), 1e-300)))
    else:
        raise ConfigError(f"unknown oracle {oracle!r}; expected quapi or ibm")
    _write_csv(out_path, _metadata_lines({**cfg, "u": u}, "compare"), header, rows)


# ------------------------------------------------------------------- main

def run_job(command: str, cfg: dict, out_path: str, workers: int) -> int:
    cfg = _resolved(cfg)
    if command == "heat":
        _cmd_heat(cfg, out_path)
    elif command == "dynamics":
        _cmd_dynamics(cfg, out_path)
    elif command == "oracle-ibm":
        _cmd_oracle_ibm(cfg, out_path)
    elif command == "variational":
        _cmd_variational(cfg, out_path)
    elif command == "sweep":
        return _cmd_sweep(cfg, out_path, workers)
    elif command == "converge":
        _cmd_converge(cfg, out_path)
    elif command == "compare":
        _cmd_compare(cfg, out_path)
    else:
        raise ConfigError(f"unknown command {command!r}; expected one of "
                          + ", ".join(COMMANDS))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="heatmpo",
        description="Heat counting statistics for a two-level system in a "
                    "bosonic bath")
    parser.add_argument("command", nargs="?", help="|".join(COMMANDS))
    parser.add_argument("--command", dest="command_flag", default=None)
    parser.add_argument("--config", required=True, help="key = value file")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config_text(fh.read())
        command = args.command_flag or args.command or cfg.get("command")
        if not command:
            raise ConfigError("no command given (positional, --command, or "
                              "'command = ...' in the config)")
        cfg.pop("command", None)
        return run_job(command, cfg, args.out, max(1, args.workers))
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HeatmpoError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
