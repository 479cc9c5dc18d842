"""Command-line front end.

Subcommands: simulate, bryant, spectral-check, weights-report, uniqueness,
diagnostics, suite.  JSON for configs and reports, CSV for fields and time
series; every CSV carries a header row and a comment line with the
generating config hash.  Exit codes: 0 pass, 1 failure, 2 usage error.
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import acceptance, bryant, diagnostics, geometry, solver, spectral, tip, uniqueness, weights
from .config import ExperimentConfig, parse_config
from .errors import RicciOvalsError
from .states import ProfileState, RescaledState


def _config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.effective_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path, header, columns, cfg_hash: str):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write(f"# config-hash: {cfg_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    header = lines[0].strip().split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return header, data


def save_trajectory(traj: solver.Trajectory, out_dir: str, cfg: ExperimentConfig) -> str:
    os.makedirs(out_dir, exist_ok=True)
    h = _config_hash(cfg)
    files = []
    for k, st in enumerate(traj.states):
        name = f"snapshot_{k:05d}.csv"
        path = os.path.join(out_dir, name)
        if isinstance(st, RescaledState):
            write_csv(path, ["sigma", "u"], [st.sigma_grid, st.u], h)
            meta = {"tau": st.tau, "kind": "rescaled",
                    "sigma_plus": st.sigma_plus, "sigma_minus": st.sigma_minus}
        else:
            write_csv(path, ["x", "phi", "psi"], [st.x_grid, st.phi, st.psi], h)
            meta = {"t": st.t, "tau_offset": st.tau_offset, "kind": "physical",
                    "closed": bool(st.closed)}
        files.append({"file": name, **meta})
    manifest = {
        "kind": traj.kind,
        "termination": traj.termination,
        "times": [float(t) for t in traj.times],
        "config": cfg.effective_dict(),
        "config_hash": h,
        "snapshots": files,
    }
    mpath = os.path.join(out_dir, "run-manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return mpath


def load_trajectory(manifest_path: str) -> solver.Trajectory:
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = os.path.dirname(manifest_path)
    states = []
    for snap in manifest["snapshots"]:
        _, data = read_csv(os.path.join(base, snap["file"]))
        if snap["kind"] == "rescaled":
            states.append(RescaledState(
                sigma_grid=data[:, 0], u=data[:, 1], tau=snap["tau"],
                sigma_plus=snap.get("sigma_plus", math.nan),
                sigma_minus=snap.get("sigma_minus", math.nan)))
        else:
            states.append(ProfileState(
                x_grid=data[:, 0], phi=data[:, 1], psi=data[:, 2],
                t=snap["t"], tau_offset=snap.get("tau_offset", 0.0),
                closed=snap.get("closed")))
    return solver.Trajectory(times=np.array(manifest["times"]),
                             states=tuple(states), kind=manifest["kind"],
                             termination=manifest["termination"])


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(args):
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    out = args.out or cfg.out_dir
    traj = solver.run(cfg.solver_config())
    mpath = save_trajectory(traj, out, cfg)
    print(f"wrote {mpath} ({len(traj)} snapshots, termination: {traj.termination})")
    return 0


def cmd_bryant(args):
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    table = bryant.solve()
    defect = bryant.farfield_defect(table)
    path = os.path.join(out, "bryant.csv")
    write_csv(path, ["rho", "Z0", "dZ0", "defect"],
              [table.rho, table.Z0, table.dZ0, defect], _config_hash(cfg))
    print(f"wrote {path} (residual {table.residual:.2e})")
    return 0


def cmd_spectral_check(args):
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    quad = spectral.default_quadrature()
    rng = np.random.default_rng(cfg.seed)
    sig = np.linspace(-cfg.domain, cfg.domain, 1601)
    taper = np.exp(-((sig / (0.9 * cfg.domain)) ** 8))

    eigen = {}
    for n in (0, 2, 4, 6):
        pn = spectral.hermite_sigma(n, sig)
        dp = np.polynomial.hermite.hermval(sig / 2.0, np.polynomial.hermite.hermder(
            [0.0] * n + [1.0])) / 2.0
        d2p = np.polynomial.hermite.hermval(sig / 2.0, np.polynomial.hermite.hermder(
            [0.0] * n + [1.0], 2)) / 4.0
        L = spectral.apply_L(sig, pn, df=dp, d2f=d2p)
        scale = np.abs(pn[np.abs(sig) <= 12]).max()
        eigen[f"psi{n}"] = float(np.abs((L - spectral.eigenvalue(n) * pn))[np.abs(sig) <= 12].max() / scale)

    p2 = spectral.hermite_sigma(2, quad.sigma)
    constants = {
        "mass": float(quad.integrate(np.ones_like(quad.sigma))),
        "psi2_norm_sq": float(quad.integrate(p2 * p2)),
        "constant8": float(quad.integrate(p2**3) / quad.integrate(p2 * p2)),
    }

    # empirical operator bounds over a smooth random battery
    ratios = {"sigma_f_D_to_H": 0.0, "dsigma_f_H_to_Dstar": 0.0,
              "sigma2_f_D_to_Dstar": 0.0}
    for _ in range(100):
        coef = rng.normal(size=9) / (1.0 + np.arange(9)) ** 2
        f = sum(c * spectral.hermite_sigma(n, sig) for n, c in enumerate(coef)) * taper
        nh, nd, ndual = spectral.norms((sig, f), quad=quad)
        sf_h, _, sf_dual = spectral.norms((sig, sig * f), quad=quad)
        df = np.gradient(f, sig)
        _, _, df_dual = spectral.norms((sig, df), quad=quad)
        s2h, _, s2_dual = spectral.norms((sig, sig * sig * f), quad=quad)
        ratios["sigma_f_D_to_H"] = max(ratios["sigma_f_D_to_H"], sf_h / nd)
        ratios["dsigma_f_H_to_Dstar"] = max(ratios["dsigma_f_H_to_Dstar"], df_dual / nh)
        ratios["sigma2_f_D_to_Dstar"] = max(ratios["sigma2_f_D_to_Dstar"], s2_dual / nd)

    report = {"eigen_defects": eigen, "constants": constants,
              "operator_bounds": ratios, "seed": cfg.seed}
    path = os.path.join(out, "spectral-check.json")
    _write_json(path, report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_weights_report(args):
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    tau = cfg.tau0
    theta_band, L_band = 0.25, 5.0

    def family(t):
        rs = solver.oval_ansatz(t, n=8193)
        tp = tip.invert_profile(rs, theta=theta_band, n_u=513)
        return tp, weights.build_weight(tp)

    rep = weights.weight_properties(family, tau, theta_band, L_band)
    rs = solver.oval_ansatz(tau, n=8193)
    tp = tip.invert_profile(rs, theta=cfg.theta, n_u=513)
    tw = weights.build_weight(tp)
    ratio, defect = weights.poincare_battery(tw, n_cases=100, seed=cfg.seed)
    rep.update(poincare_max_ratio=ratio, poincare_min_defect=defect,
               tau=tau, theta=cfg.theta)
    path = os.path.join(out, "weights-report.json")
    _write_json(path, rep)
    print(json.dumps(rep, indent=2, sort_keys=True))
    return 0


def cmd_uniqueness(args):
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    tr1 = load_trajectory(args.first)
    tr2 = load_trajectory(args.second)
    tau0 = cfg.tau0 if args.tau0 is None else args.tau0
    theta = cfg.theta if args.theta is None else args.theta
    g_fit, info = uniqueness.fit_gauge(tr1, tr2, tau0, theta)
    sig = tr1.states[0].sigma_grid
    sel = (tr1.times >= tr1.times[0] + 1.0) & (tr1.times <= tau0)
    out_times = tr1.times[sel]
    _, matg = geometry.apply_gauge_trajectory(tr2.times, tr2.u_matrix(),
                                              tr2.states[0].sigma_grid, g_fit,
                                              out_times=out_times)
    slices = [
        uniqueness.pair_slice_from_states(
            RescaledState(sigma_grid=sig, u=tr1.lookup(sig, tt), tau=tt),
            RescaledState(sigma_grid=sig, u=matg[k], tau=tt), theta)
        for k, tt in enumerate(out_times)
    ]
    led = uniqueness.norm_ledger(slices, theta, tau0)
    taus, a_vals, F_vals = uniqueness.neutral_mode_series(slices)
    h = _config_hash(cfg)
    write_csv(os.path.join(out, "neutral-mode.csv"), ["tau", "a", "F"],
              [taus, a_vals, F_vals], h)
    payload = {
        "gauge": {"beta_at_tau0": g_fit.beta_at_tau0, "gamma": g_fit.gamma,
                  "tau0": g_fit.tau0, "admissible_eps1": g_fit.is_admissible(1.0)},
        "fit": {k: (float(v) if isinstance(v, (int, float)) else v)
                for k, v in info.items()},
        "ledger": {k: float(v) for k, v in led.items()},
    }
    _write_json(os.path.join(out, "uniqueness.json"), payload)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_diagnostics(args):
    cfg = parse_config(args.config) if args.config else ExperimentConfig()
    out = args.out or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    if args.manifest:
        traj = load_trajectory(args.manifest)
        states = list(traj.states)
    else:
        states = [solver.oval_ansatz(cfg.tau0, n=8193)]
    rs = states[-1] if isinstance(states[-1], RescaledState) else geometry.to_rescaled(states[-1])
    rep = diagnostics.appendix_suite(rs, theta=cfg.theta, L=cfg.L)
    scorecard = diagnostics.asymptotics_report(states, theta=cfg.theta)
    payload = {
        "appendix": [
            {"name": c.name, "formula": c.formula, "region": c.region,
             "measured": c.measured, "threshold": c.threshold,
             "passed": c.passed, "applicable": c.applicable, **c.extras}
            for c in rep.checks
        ],
        "scorecard": scorecard,
    }
    _write_json(os.path.join(out, "diagnostics.json"), payload)
    sig, u, du, d2u, d3u = diagnostics._sigma_fields(rs)
    write_csv(os.path.join(out, "fields.csv"),
              ["sigma", "u", "u_s", "u_ss", "u_sss"],
              [sig, u, du, d2u, d3u], _config_hash(cfg))
    for line in rep.lines():
        print(line)
    return 0 if rep.all_passed else 1


def cmd_suite(args):
    code, records = acceptance.run_suite(args.name)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, f"suite-{args.name}.json"),
                    {"records": records, "exit_code": code})
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="ricci-ovals",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--config", metavar="PATH", default=None)
    ap.add_argument("--out", metavar="DIR", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate").set_defaults(fn=cmd_simulate)
    sub.add_parser("bryant").set_defaults(fn=cmd_bryant)
    sub.add_parser("spectral-check").set_defaults(fn=cmd_spectral_check)
    sub.add_parser("weights-report").set_defaults(fn=cmd_weights_report)

    pu = sub.add_parser("uniqueness")
    pu.add_argument("first", help="run-manifest.json of the first solution")
    pu.add_argument("second", help="run-manifest.json of the second solution")
    pu.add_argument("--tau0", type=float, default=None)
    pu.add_argument("--theta", type=float, default=None)
    pu.set_defaults(fn=cmd_uniqueness)

    pd = sub.add_parser("diagnostics")
    pd.add_argument("--manifest", default=None)
    pd.set_defaults(fn=cmd_diagnostics)

    ps = sub.add_parser("suite")
    ps.add_argument("--name", choices=("quick", "acceptance"), default="quick")
    ps.set_defaults(fn=cmd_suite)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except RicciOvalsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
