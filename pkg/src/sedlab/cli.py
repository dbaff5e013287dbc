"""Command-line surface: reproducible runs with CSV + figure emission.

Every command writes its data files and a manifest.json (parameters, seeds,
code version, timestamps, sha256 digests) into the --out directory; files
are written atomically.  `sedlab --from-manifest <file>` re-executes the
recorded command and reproduces the data files byte for byte.  Exit codes:
0 success, 2 invalid parameter or domain, 3 numerical failure; errors are
one JSON line on stderr.
"""

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import field as field_mod
from . import phase_space as ps
from . import rates as rates_mod
from . import simulate as sim_mod
from .orbits import OrbitParams
from .simulate import CloseApproachError


class DomainError(ValueError):
    pass


# --- emission helpers -----------------------------------------------------

def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _atomic_write(path, data):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def _write_figure(path, draw):
    import matplotlib
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt
    fig = draw(plt)
    import io
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=110,
                metadata={"Software": "sedlab " + __version__})
    plt.close(fig)
    _atomic_write(path, buf.getvalue())


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _utcnow():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _parse_grid(text, name):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise DomainError("%s must be lo:hi:count, got %r" % (name, text))
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise DomainError("%s must be lo:hi:count, got %r" % (name, text))
    if n < 1:
        raise DomainError("%s needs at least one point" % name)
    return np.linspace(lo, hi, n)


# --- command implementations ----------------------------------------------
# Each run_* takes the resolved parameter dict and the output directory and
# returns {"outputs": [relative paths], "seeds": [ints]}.

def run_rates(params, out):
    rows = []
    if params["mode"] == "kappa":
        for kap in params["kappa_values"]:
            if not 0.0 <= kap <= 1.0:
                raise DomainError("kappa must lie in [0, 1], got %g" % kap)
            if kap == 0.0:
                # finite shape-function limit; the rates themselves diverge
                # at fixed energy as the orbit degenerates
                rows.append((kap, rates_mod.f0_closed_form(),
                             math.inf, -math.inf, math.inf))
                continue
            orbit = OrbitParams.from_k_eps(1.0, math.sqrt(max(0.0, 1.0 - kap * kap)))
            rb = rates_mod.total_rate(orbit)
            rows.append((kap, rates_mod.field_gain_f(kap),
                         rb.gain_rate, rb.loss_rate, rb.total_rate))
    else:
        orbit = OrbitParams.from_k_eps(params["k"], params["eps"], params["d"])
        rb = rates_mod.total_rate(orbit)
        fval = rates_mod.field_gain_f(orbit.kappa) if params["d"] == 0.0 else math.nan
        rows.append((orbit.kappa, fval, rb.gain_rate, rb.loss_rate, rb.total_rate))

    _write_csv(out / "rates.csv", ("kappa", "f", "gain", "loss", "total"), rows)
    arr = np.array(rows, dtype=float)

    def draw(plt):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
        ax1.plot(arr[:, 0], arr[:, 1], "o-", ms=3)
        ax1.set_xlabel("kappa")
        ax1.set_ylabel("f(kappa)")
        good = np.isfinite(arr[:, 4])
        ax2.plot(arr[good, 0], arr[good, 4], "o-", ms=3, color="tab:red")
        ax2.axhline(0.0, color="0.6", lw=0.8)
        ax2.set_xlabel("kappa")
        ax2.set_ylabel("total rate / beta^2")
        fig.tight_layout()
        return fig

    _write_figure(out / "rates.png", draw)
    return {"outputs": ["rates.csv", "rates.png"], "seeds": []}


def run_gmu(params, out):
    d = params["d"]
    rows = []
    for mu in params["mu_values"]:
        if mu < 0.0:
            raise DomainError("mu must be nonnegative, got %g" % mu)
        g = rates_mod.G_of_mu(mu)
        h = rates_mod.H_of_mu(mu)
        if d is None:
            # vanishing-dipole limit: the per-period change carries H's sign
            sign = 0.0 if h == 0.0 else math.copysign(1.0, h)
        else:
            try:
                delta = rates_mod.per_period_delta_dipole(mu, d)
                sign = 0.0 if delta == 0.0 else math.copysign(1.0, delta)
            except ValueError:
                sign = math.nan  # (mu, d) pair not reachable by any orbit
        rows.append((mu, g, h, sign))
    _write_csv(out / "gmu.csv", ("mu", "G", "H", "delta_sign"), rows)
    arr = np.array(rows, dtype=float)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(5.4, 3.6))
        ax.plot(arr[:, 0], arr[:, 1], "o-", ms=3, label="G")
        ax.plot(arr[:, 0], arr[:, 2], "s-", ms=3, label="H")
        ax.set_xlabel("mu")
        ax.legend(frameon=False)
        fig.tight_layout()
        return fig

    _write_figure(out / "gmu.png", draw)
    return {"outputs": ["gmu.csv", "gmu.png"], "seeds": []}


def _sim_config(params):
    initial = OrbitParams.from_k_eps(params["k"], params["eps"], params["d"])
    return sim_mod.SimConfig(
        beta=params["beta"], d=params["d"], tau_c=params["tau_c"],
        dt_base=params["dt_base"], t_max=params["t_max"], seed=params["seed"],
        initial=initial, ionisation_r=params["ionisation_r"],
        ionisation_window=params["ionisation_window"],
        include_field=params["field"], include_damping=params["damping"],
        omega_cap=params["omega_cap"], rtol=params["rtol"])


def _trajectory_rows(record):
    s = record.samples
    for i in range(len(s)):
        r, v = s["r"][i], s["v"][i]
        yield (s["t"][i], r[0], r[1], r[2], v[0], v[1], v[2],
               s["energy"][i], s["L"][i])


_TRAJ_HEADER = ("t", "rx", "ry", "rz", "vx", "vy", "vz", "energy", "L")


def run_simulate(params, out):
    config = _sim_config(params)
    n_runs = params["ensemble"] or 1
    if n_runs == 1:
        records = [sim_mod.integrate(config)]
        seeds = [config.seed]
        _write_csv(out / "trajectory.csv", _TRAJ_HEADER,
                   _trajectory_rows(records[0]))
        outputs = ["trajectory.csv"]
    else:
        records = sim_mod.run_ensemble(config, n_runs)
        seeds = [config.seed + i for i in range(n_runs)]
        outputs = []
        for i, rec in enumerate(records):
            name = "trajectory_%03d.csv" % i
            _write_csv(out / name, _TRAJ_HEADER, _trajectory_rows(rec))
            outputs.append(name)

    hist = sim_mod.aggregate_histogram(records)
    _write_csv(out / "histogram.csv", ("bin_lo", "bin_hi", "weight"), hist)
    summary = [(i, seeds[i], rec.termination,
                math.nan if rec.ionised_at is None else rec.ionised_at,
                rec.energy[-1], rec.L[-1])
               for i, rec in enumerate(records)]
    _write_csv(out / "runs.csv",
               ("run", "seed", "termination", "ionised_at",
                "final_energy", "final_L"), summary)
    outputs += ["histogram.csv", "runs.csv"]

    rec0 = records[0]

    def draw(plt):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
        ax1.plot(rec0.t, rec0.energy, lw=0.8, label="energy")
        ax1.plot(rec0.t, rec0.L, lw=0.8, label="L")
        if rec0.ionised_at is not None:
            ax1.axvline(rec0.ionised_at, color="0.6", lw=0.8, ls="--")
        ax1.set_xlabel("t")
        ax1.legend(frameon=False)
        ax2.stairs(hist[:, 2], np.append(hist[:, 0], hist[-1, 1]),
                   fill=True, alpha=0.6)
        ax2.set_xlabel("L")
        ax2.set_ylabel("dwell weight")
        fig.tight_layout()
        return fig

    _write_figure(out / "simulate.png", draw)
    outputs.append("simulate.png")
    return {"outputs": outputs, "seeds": seeds}


def run_field_check(params, out):
    tau_c = params["tau_c"]
    if tau_c <= 0.0:
        raise DomainError("tau_c must be positive")
    seeds = [params["seed"] + i for i in range(params["n_seeds"])]
    lags = np.asarray(params["lag_grid_tau"], dtype=float) * tau_c
    est = field_mod.autocorrelation_estimate(seeds, lags, tau_c,
                                             n_modes=params["n_modes"])
    rows = [(lag, mean, err, field_mod.exact_autocorrelation(lag, tau_c))
            for lag, mean, err in est]
    _write_csv(out / "field_check.csv",
               ("lag", "estimate", "stderr", "exact"), rows)
    arr = np.array(rows, dtype=float)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(5.4, 3.6))
        ax.errorbar(arr[:, 0] / tau_c, arr[:, 1], yerr=arr[:, 2],
                    fmt="o", ms=3, label="ensemble")
        ax.plot(arr[:, 0] / tau_c, arr[:, 3], "-", lw=1.0, label="exact")
        ax.set_xlabel("lag / tau_c")
        ax.set_ylabel("autocorrelation")
        ax.legend(frameon=False)
        fig.tight_layout()
        return fig

    _write_figure(out / "field_check.png", draw)
    return {"outputs": ["field_check.csv", "field_check.png"], "seeds": seeds}


def run_phase(params, out):
    gs = ps.GroundStateParams(d=params["d"])  # rejects d > 1/4
    outputs = []

    r_grid = np.asarray(params["r_grid"], dtype=float)
    if np.any(r_grid <= 0.0):
        raise DomainError("r grid must be positive")
    amp = ps.psi0(r_grid, gs)
    marg = np.array([ps.momentum_marginal(r, gs) for r in r_grid])
    _write_csv(out / "psi0.csv", ("r", "psi0", "psi0_sq", "marginal"),
               zip(r_grid, amp, amp ** 2, marg))
    outputs.append("psi0.csv")

    # (energy, kappa) nodes matched to the density's own weight so the mass
    # column sums to one at quadrature accuracy
    from scipy.special import roots_genlaguerre, roots_jacobi
    l0 = gs.l0
    sig = 2.0 + 4.0 * l0
    eexp = 6.0 + 4.0 * l0
    c_e = 2.0 / (1.0 + l0)
    u, wu = roots_genlaguerre(params["n_energy"], 4.0 + 4.0 * l0)
    x, wx = roots_jacobi(params["n_kappa"], 0.0, sig)
    evals = c_e / u
    kvals = 0.5 * (1.0 + x)
    pref = c_e ** (1.0 - eexp) * 2.0 ** (-sig - 1.0)
    pe_rows = []
    for ei, wi in zip(evals, wu):
        w_e = ei ** (-eexp) * math.exp(-c_e / ei)
        for kj, wj in zip(kvals, wx):
            dens = ps.dist_E_kappa(-ei, kj, gs)
            mass = pref * wi * wj * dens / (w_e * kj ** sig)
            pe_rows.append((-ei, kj, dens, mass))
    _write_csv(out / "p_e_kappa.csv", ("energy", "kappa", "density", "mass"),
               pe_rows)
    outputs.append("p_e_kappa.csv")

    l_grid = None
    curve = None
    if params["d"] == 0.0:
        l_grid = np.asarray(params["L_grid"], dtype=float)
        curve = ps.conjecture_L_curve(l_grid, gs)
        _write_csv(out / "l_curve.csv", ("L", "density"), zip(l_grid, curve))
        outputs.append("l_curve.csv")

    def draw(plt):
        n_panels = 2 if curve is None else 3
        fig, axes = plt.subplots(1, n_panels, figsize=(4.2 * n_panels, 3.4))
        axes[0].plot(r_grid, amp ** 2, lw=1.0, label="psi0^2")
        axes[0].plot(r_grid, marg, "o", ms=2.5, label="momentum marginal")
        axes[0].set_xlabel("r")
        axes[0].legend(frameon=False)
        pe = np.array(pe_rows, dtype=float)
        sc = axes[1].scatter(pe[:, 1], -pe[:, 0], c=pe[:, 3], s=6,
                             cmap="viridis")
        axes[1].set_yscale("log")
        axes[1].set_xlabel("kappa")
        axes[1].set_ylabel("|energy|")
        fig.colorbar(sc, ax=axes[1], label="mass")
        if curve is not None:
            axes[2].plot(l_grid, curve, lw=1.2)
            axes[2].axvline(rates_mod.f0_closed_form(), color="0.6",
                            lw=0.8, ls="--")
            axes[2].set_xlabel("L")
            axes[2].set_ylabel("P(L)")
        fig.tight_layout()
        return fig

    _write_figure(out / "phase.png", draw)
    outputs.append("phase.png")
    return {"outputs": outputs, "seeds": []}


def run_fig1_overlay(params, out):
    config = sim_mod.SimConfig(
        beta=params["beta"], d=0.0, tau_c=params["tau_c"],
        dt_base=params["dt_base"], t_max=params["t_max"],
        seed=params["seed"],
        initial=OrbitParams.from_k_eps(params["k"], params["eps"]),
        rtol=params["rtol"])
    records = sim_mod.run_ensemble(config, params["n_runs"])
    seeds = [config.seed + i for i in range(params["n_runs"])]
    hist = sim_mod.aggregate_histogram(records)
    total = hist[:, 2].sum()
    if total <= 0.0:
        raise RuntimeError("ensemble produced an empty dwell histogram")
    width = hist[0, 1] - hist[0, 0]
    centers = 0.5 * (hist[:, 0] + hist[:, 1])
    curve = ps.conjecture_L_curve(centers)
    scaled = curve * total * width
    rows = np.column_stack([hist[:, 0], hist[:, 1], hist[:, 2], curve, scaled])
    _write_csv(out / "overlay.csv",
               ("bin_lo", "bin_hi", "weight", "curve_density", "curve_scaled"),
               rows)

    def draw(plt):
        fig, ax = plt.subplots(figsize=(5.8, 3.8))
        ax.stairs(hist[:, 2], np.append(hist[:, 0], hist[-1, 1]),
                  fill=True, alpha=0.55, label="dwell histogram")
        ax.plot(centers, scaled, "-", lw=1.4, color="tab:red",
                label="ground-state L curve")
        ax.axvline(rates_mod.f0_closed_form(), color="0.4", lw=0.9, ls="--",
                   label="L = f(0)")
        ax.set_xlabel("L")
        ax.set_ylabel("dwell weight")
        ax.legend(frameon=False)
        fig.tight_layout()
        return fig

    _write_figure(out / "fig1_overlay.png", draw)
    return {"outputs": ["overlay.csv", "fig1_overlay.png"], "seeds": seeds}


RUNNERS = {
    "rates": run_rates,
    "gmu": run_gmu,
    "simulate": run_simulate,
    "field-check": run_field_check,
    "phase": run_phase,
    "fig1-overlay": run_fig1_overlay,
}


# --- argument handling ------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("domain", self.prog.split()[-1], message, 2)


def _fail(kind, command, message, code):
    sys.stderr.write(json.dumps(
        {"error": kind, "command": command, "message": message}) + "\n")
    sys.exit(code)


def _resolve(args, config, spec):
    """Merge flag values over config-file values over defaults; flags win."""
    params = {}
    for name, default in spec:
        flag = getattr(args, name)
        if flag is not None:
            params[name] = flag
        elif name in config:
            params[name] = config[name]
        else:
            params[name] = default
    unknown = set(config) - {name for name, _ in spec}
    if unknown:
        raise DomainError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    return params


_SIM_SPEC = [
    ("beta", 0.02), ("d", 0.0), ("tau_c", 1e-3), ("dt_base", 0.25),
    ("t_max", 400.0), ("seed", 20260816), ("k", 1.0), ("eps", 0.3),
    ("ionisation_r", 50.0), ("ionisation_window", 5.0), ("field", True),
    ("damping", True), ("rtol", 1e-10), ("omega_cap", None), ("ensemble", None),
]

_OVERLAY_SPEC = [
    ("beta", 0.05), ("tau_c", 1e-3), ("dt_base", 0.25), ("t_max", 400.0),
    ("seed", 20260816), ("k", 1.0), ("eps", 0.3), ("rtol", 1e-10),
    ("n_runs", 8),
]


def _add_sim_flags(sub):
    sub.add_argument("--beta", type=float)
    sub.add_argument("--d", type=float)
    sub.add_argument("--tau-c", dest="tau_c", type=float)
    sub.add_argument("--dt-base", dest="dt_base", type=float)
    sub.add_argument("--t-max", dest="t_max", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--k", type=float)
    sub.add_argument("--eps", type=float)
    sub.add_argument("--rtol", type=float)


def build_parser():
    top = _Parser(prog="sedlab", description=__doc__.splitlines()[0])
    top.add_argument("--from-manifest", metavar="FILE",
                     help="re-execute the command recorded in a manifest.json")
    top.add_argument("--out", help="output directory (with --from-manifest: "
                     "defaults to the manifest's directory)")
    subs = top.add_subparsers(dest="command")

    def add(name, help_text):
        sub = subs.add_parser(name, help=help_text, prog="sedlab " + name)
        sub.add_argument("--config", metavar="FILE",
                         help="JSON parameter file; explicit flags win")
        sub.add_argument("--out", help="output directory (default: ./%s_out)"
                         % name.replace("-", "_"))
        return sub

    p = add("rates", "orbit-averaged gain/loss/total rate table")
    p.add_argument("--kappa", type=float)
    p.add_argument("--kappa-grid", dest="kappa_grid")
    p.add_argument("--eps", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--d", type=float)

    p = add("gmu", "scaled-limit stability functions G and H")
    p.add_argument("--mu", type=float)
    p.add_argument("--mu-grid", dest="mu_grid")
    p.add_argument("--d", type=float)

    p = add("simulate", "stochastic trajectory run or ensemble")
    _add_sim_flags(p)
    p.add_argument("--ionisation-r", dest="ionisation_r", type=float)
    p.add_argument("--ionisation-window", dest="ionisation_window", type=float)
    p.add_argument("--omega-cap", dest="omega_cap", type=float)
    p.add_argument("--field", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--damping", action=argparse.BooleanOptionalAction,
                   default=None)
    p.add_argument("--ensemble", type=int, metavar="N")

    p = add("field-check", "field autocorrelation against the exact kernel")
    p.add_argument("--tau-c", dest="tau_c", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-seeds", dest="n_seeds", type=int)
    p.add_argument("--n-modes", dest="n_modes", type=int)
    p.add_argument("--lag-grid", dest="lag_grid",
                   help="lag grid in units of tau_c, lo:hi:count")

    p = add("phase", "ground-state phase-space curves")
    p.add_argument("--d", type=float)
    p.add_argument("--r-grid", dest="r_grid")
    p.add_argument("--L-grid", dest="L_grid")
    p.add_argument("--n-energy", dest="n_energy", type=int)
    p.add_argument("--n-kappa", dest="n_kappa", type=int)

    p = add("fig1-overlay", "dwell histogram with the ground-state L curve")
    _add_sim_flags(p)
    p.add_argument("--n-runs", dest="n_runs", type=int)

    return top


def _load_config(args):
    if getattr(args, "config", None) is None:
        return {}
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError("cannot read config %s: %s" % (args.config, exc))
    if not isinstance(doc, dict):
        raise DomainError("config file must hold a JSON object")
    return doc


def _build_params(args):
    """Turn parsed flags plus config file into the resolved parameter dict
    that the manifest records and run_* executes."""
    config = _load_config(args)
    cmd = args.command
    if cmd == "rates":
        spec = [("kappa", None), ("kappa_grid", None), ("eps", None),
                ("k", None), ("d", 0.0)]
        p = _resolve(args, config, spec)
        if p["kappa"] is not None:
            values = [p["kappa"]]
        elif p["kappa_grid"] is not None:
            values = [float(v) for v in _parse_grid(p["kappa_grid"], "kappa grid")]
        elif p["eps"] is not None or p["k"] is not None:
            if p["eps"] is None or p["k"] is None:
                raise DomainError("orbit mode needs both --eps and --k")
            return {"mode": "orbit", "eps": p["eps"], "k": p["k"], "d": p["d"]}
        else:
            raise DomainError("give --kappa, --kappa-grid, or --eps with --k")
        return {"mode": "kappa", "kappa_values": values}
    if cmd == "gmu":
        spec = [("mu", None), ("mu_grid", None), ("d", None)]
        p = _resolve(args, config, spec)
        if p["mu"] is not None:
            values = [p["mu"]]
        else:
            values = [float(v) for v in
                      _parse_grid(p["mu_grid"] or "0:1:21", "mu grid")]
        return {"mu_values": values, "d": p["d"]}
    if cmd == "simulate":
        return _resolve(args, config, _SIM_SPEC)
    if cmd == "field-check":
        spec = [("tau_c", 1e-3), ("seed", 101), ("n_seeds", 400),
                ("n_modes", 1024), ("lag_grid", "0:10:21")]
        p = _resolve(args, config, spec)
        grid = [float(v) for v in _parse_grid(p["lag_grid"], "lag grid")]
        if any(v < 0 for v in grid):
            raise DomainError("lags must be nonnegative")
        return {"tau_c": p["tau_c"], "seed": p["seed"],
                "n_seeds": p["n_seeds"], "n_modes": p["n_modes"],
                "lag_grid_tau": grid}
    if cmd == "phase":
        spec = [("d", 0.0), ("r_grid", "0.05:6:120"), ("L_grid", "0.02:2:100"),
                ("n_energy", 48), ("n_kappa", 40)]
        p = _resolve(args, config, spec)
        return {"d": p["d"],
                "r_grid": [float(v) for v in _parse_grid(p["r_grid"], "r grid")],
                "L_grid": [float(v) for v in _parse_grid(p["L_grid"], "L grid")],
                "n_energy": p["n_energy"], "n_kappa": p["n_kappa"]}
    if cmd == "fig1-overlay":
        return _resolve(args, config, _OVERLAY_SPEC)
    raise DomainError("unknown command %r" % cmd)


def _execute(command, params, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _utcnow()
    info = RUNNERS[command](params, out_dir)
    finished = _utcnow()
    manifest = {
        "command": command,
        "parameters": params,
        "seeds": info["seeds"],
        "code_version": __version__,
        "started": started,
        "finished": finished,
        "outputs": [{"path": name, "sha256": _sha256(out_dir / name)}
                    for name in info["outputs"]],
    }
    _atomic_write(out_dir / "manifest.json",
                  (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())
    for name in info["outputs"]:
        print("wrote %s" % (out_dir / name))
    print("wrote %s" % (out_dir / "manifest.json"))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.from_manifest is not None:
        try:
            with open(args.from_manifest) as fh:
                doc = json.load(fh)
            command = doc["command"]
            params = doc["parameters"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            _fail("domain", "from-manifest", "bad manifest: %s" % exc, 2)
        if command not in RUNNERS:
            _fail("domain", "from-manifest",
                  "manifest names unknown command %r" % command, 2)
        out = args.out or str(Path(args.from_manifest).parent)
        return _run_guarded(command, params, out)
    if args.command is None:
        _fail("domain", "sedlab", "no command given", 2)
    try:
        params = _build_params(args)
    except ValueError as exc:
        _fail("domain", args.command, str(exc), 2)
    out = args.out or "./%s_out" % args.command.replace("-", "_")
    return _run_guarded(args.command, params, out)


def _run_guarded(command, params, out):
    try:
        return _execute(command, params, out)
    except CloseApproachError as exc:
        _fail("runtime", command, str(exc), 3)
    except ValueError as exc:
        _fail("domain", command, str(exc), 2)
    except (ArithmeticError, RuntimeError) as exc:
        _fail("runtime", command, str(exc), 3)


if __name__ == "__main__":
    sys.exit(main())
