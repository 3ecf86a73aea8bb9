"""Command-line front end: TOML scenario configs, deterministic runs, CSV
emission with a hashed manifest.

Subcommands: ``run`` executes a scenario config, ``validate`` checks a config
and the model assumptions without running, ``catalog`` lists the named damping
and source options.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import carleman as carl
from .diagnostics import (energy_report, fit_decay_rate, fit_quasi_stability,
                          quasi_stability_terms)
from .discretize import Grid, StateZ, build_grid
from .errors import BresseLabError, ConfigError
from .evolve import (IntegratorConfig, bresse_linearized_couplings,
                     default_dt, make_linear_system, simulate)
from .model import (BeamParameters, DAMPING_LAWS, DampingSpec, Localizer,
                    SOURCE_CATALOG, SourceSpec, make_damping_law, make_source,
                    no_damping, validate as validate_model)
from .stationary import (enumerate_stationary, gradient_norm_squared,
                         stationary_bound)

KINDS = ("simulate", "decay", "stationary", "carleman", "ucp",
         "quasi-stability")


@dataclasses.dataclass
class ScenarioConfig:
    """Parsed and validated scenario description."""

    kind: str
    seed: int
    out: str
    params: BeamParameters
    damping: DampingSpec
    sources: SourceSpec
    grid: Grid
    integrator: IntegratorConfig
    initial: dict
    extras: dict
    raw: dict

    @property
    def timoshenko_degenerate(self) -> bool:
        return self.params.is_timoshenko


def _effective_dict(cfg: ScenarioConfig) -> dict:
    """Raw config with every defaulted field filled in."""
    d = {k: v for k, v in cfg.raw.items()}
    d["kind"] = cfg.kind
    d["seed"] = cfg.seed
    d["out"] = cfg.out
    d["model"] = {f.name: getattr(cfg.params, f.name)
                  for f in dataclasses.fields(cfg.params)}
    d["model"]["label"] = ("timoshenko-degenerate"
                          if cfg.timoshenko_degenerate else "arched")
    d["damping"] = {
        "law": [law.name for law in cfg.damping.laws],
        "intervals": [list(loc.interval) for loc in cfg.damping.localizers],
        "amplitude": [loc.amplitude for loc in cfg.damping.localizers],
    }
    src = dict(d.get("source", {}))
    src.setdefault("name", cfg.sources.name)
    d["source"] = src
    d["grid"] = {"n": cfg.grid.n, "dt": cfg.integrator.dt,
                 "t_end": cfg.integrator.t_end,
                 "stride": cfg.integrator.stride}
    d["initial"] = cfg.initial
    return d


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}")
    return parse_config(raw)


def parse_config(raw: dict) -> ScenarioConfig:
    kind = raw.get("kind", "simulate")
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; options: {KINDS}")
    seed = int(raw.get("seed", 0))
    out = str(raw.get("out", "out"))

    model = raw.get("model", {})
    try:
        params = BeamParameters(**{k: float(v) for k, v in model.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad model block: {exc}")

    dmp = raw.get("damping", {})
    laws = dmp.get("law", "linear")
    if isinstance(laws, str):
        laws = [laws] * 3
    if len(laws) != 3:
        raise ConfigError("damping.law needs one name or three")
    try:
        law_objs = tuple(make_damping_law(name) for name in laws)
    except KeyError as exc:
        raise ConfigError(str(exc))
    intervals = dmp.get("intervals", [[0.0, params.length]] * 3)
    amps = dmp.get("amplitude", 1.0)
    if np.isscalar(amps):
        amps = [float(amps)] * 3
    if len(intervals) != 3 or len(amps) != 3:
        raise ConfigError("damping needs three intervals and amplitudes")
    try:
        locs = tuple(Localizer(interval=(float(iv[0]), float(iv[1])),
                               amplitude=float(a))
                     for iv, a in zip(intervals, amps))
        damping = (DampingSpec(laws=law_objs, localizers=locs)
                   if any(a > 0 for a in amps) else no_damping(params.length))
    except ValueError as exc:
        raise ConfigError(f"bad damping block: {exc}")

    src = dict(raw.get("source", {"name": "zero"}))
    name = src.pop("name", "zero")
    try:
        sources = make_source(name, **src)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad source block: {exc}")

    gr = raw.get("grid", {})
    n = int(gr.get("n", 100))
    grid = build_grid(params.length, n)
    dt = float(gr.get("dt", 0.0)) or default_dt(grid)
    t_end = float(gr.get("t_end", 10.0))
    stride = int(gr.get("stride", 10))
    integrator = IntegratorConfig(dt=dt, t_end=t_end, stride=stride)

    initial = dict(raw.get("initial", {}))
    initial.setdefault("kind", "sine")
    initial.setdefault("amplitude", 1.0)
    initial.setdefault("mode", 1)

    extras = dict(raw.get(kind.replace("-", "_"), {}))
    return ScenarioConfig(kind=kind, seed=seed, out=out, params=params,
                          damping=damping, sources=sources, grid=grid,
                          integrator=integrator, initial=initial,
                          extras=extras, raw=raw)


# ---------------------------------------------------------------------------
# emission helpers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize config value {v!r}")


def write_toml(path: Path, data: dict) -> None:
    top = []
    tables = []
    for k, v in data.items():
        if isinstance(v, dict):
            body = "\n".join(f"{kk} = {_toml_value(vv)}" for kk, vv in v.items())
            tables.append(f"[{k}]\n{body}")
        else:
            top.append(f"{k} = {_toml_value(v)}")
    path.write_text("\n".join(top) + "\n\n" + "\n\n".join(tables) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


def _initial_state(cfg: ScenarioConfig) -> StateZ:
    grid = cfg.grid
    kind = cfg.initial.get("kind", "sine")
    amp = float(cfg.initial.get("amplitude", 1.0))
    mode = int(cfg.initial.get("mode", 1))
    x = grid.nodes / grid.length
    if kind == "sine":
        f = amp * np.sin(mode * np.pi * x)
        z = np.zeros(grid.n)
        return StateZ(f.copy(), f.copy(), f.copy(), z.copy(), z.copy(),
                      z.copy())
    if kind == "velocity":
        f = amp * np.sin(mode * np.pi * x)
        z = np.zeros(grid.n)
        return StateZ(z.copy(), z.copy(), z.copy(), f.copy(), f.copy(),
                      f.copy())
    if kind == "zero":
        return StateZ.zero(grid)
    raise ConfigError(f"unknown initial kind {kind!r}")


def _energy_rows(report):
    defect = (report.total + report.cum_dissipation - report.total[0])
    for i in range(len(report.times)):
        yield (report.times[i], report.state_norm_sq[i], report.total[i],
               report.cum_dissipation[i], defect[i])


_ENERGY_HEADER = ["time", "state_norm_sq", "lyapunov_energy",
                  "cumulative_dissipation", "identity_defect"]


def _run_simulate(cfg: ScenarioConfig, out: Path) -> dict:
    traj = simulate(_initial_state(cfg), cfg.params, cfg.damping, cfg.sources,
                    cfg.integrator, cfg.grid)
    report = energy_report(traj, cfg.params, cfg.sources)
    write_csv(out / "energy.csv", _ENERGY_HEADER, _energy_rows(report))
    return {"identity_residual": report.identity_residual,
            "final_energy": report.final_total}


def _run_decay(cfg: ScenarioConfig, out: Path) -> dict:
    traj = simulate(_initial_state(cfg), cfg.params, cfg.damping, cfg.sources,
                    cfg.integrator, cfg.grid)
    report = energy_report(traj, cfg.params, cfg.sources)
    write_csv(out / "energy.csv", _ENERGY_HEADER, _energy_rows(report))
    fit = fit_decay_rate(report.times, report.total)
    write_csv(out / "decay_fit.csv",
              ["decay_rate", "amplitude", "fit_residual", "window_start",
               "window_end", "n_points"],
              [(fit.omega, fit.amplitude, fit.residual, fit.t_start,
                fit.t_end, fit.n_points)])
    return {"decay_rate": fit.omega, "fit_residual": fit.residual}


def _run_stationary(cfg: ScenarioConfig, out: Path) -> dict:
    sols = enumerate_stationary(cfg.params, cfg.sources, cfg.grid,
                                n_guesses=int(cfg.extras.get("n_guesses", 8)),
                                seed=cfg.seed)
    bound = stationary_bound(cfg.params, cfg.sources, cfg.grid)
    rows = []
    for i, s in enumerate(sols):
        g2 = gradient_norm_squared(s, cfg.grid)
        rows.append((i, s.residual_norm, g2, bound, g2 <= bound * (1 + 1e-9)))
    write_csv(out / "stationary.csv",
              ["solution", "residual_max_norm", "gradient_norm_sq",
               "bound_sq", "within_bound"], rows)
    return {"n_solutions": len(sols), "bound_sq": bound}


def _make_setup(cfg: ScenarioConfig) -> carl.CarlemanSetup:
    ex = cfg.extras
    L = cfg.params.length
    return carl.make_setup(length=L, L0=float(ex.get("L0", 0.5 * L)),
                           epsilon=float(ex.get("epsilon", 0.2 * L)),
                           T=float(ex.get("T", 4.0)),
                           c=float(ex.get("c", 0.5)),
                           delta=float(ex.get("delta", 0.5)),
                           sigma=float(ex.get("sigma", 0.25 * L * L)))


def _run_carleman(cfg: ScenarioConfig, out: Path) -> dict:
    setup = _make_setup(cfg)
    gammas, p, q = bresse_linearized_couplings(cfg.params)
    checks = carl.verify_setup(setup, gammas=gammas)
    write_csv(out / "setup_checks.csv", ["check", "value"],
              [(k, v if not isinstance(v, list) else min(v))
               for k, v in checks.items()])

    amp = float(cfg.initial.get("amplitude", 1.0))
    mode = int(cfg.initial.get("mode", 1))
    u0 = [lambda x, a=amp, m=mode, L=cfg.params.length:
          a * np.sin(m * np.pi * x / L)] * 3
    u1 = [lambda x: np.zeros_like(x)] * 3
    icfg = IntegratorConfig(dt=cfg.integrator.dt, t_end=setup.T,
                            stride=cfg.integrator.stride)
    trajs = carl.simulate_cutoff_subsystems(gammas, p, q, u0, u1, setup,
                                            cfg.grid.n, icfg)
    report = carl.carleman_inequality_check(trajs, setup)
    write_csv(out / "carleman_report.csv",
              ["tau", "boundary_terms", "endpoint_energy", "k_T"],
              [(r.tau, r.lhs, r.endpoint_energy, r.k_T) for r in report.rows])
    return {"all_setup_checks_passed": checks["all_passed"],
            "max_kt_energy": report.max_kt_energy}


def _run_ucp(cfg: ScenarioConfig, out: Path) -> dict:
    setup = _make_setup(cfg)
    gammas, p, q = bresse_linearized_couplings(cfg.params)
    system = make_linear_system(gammas, p, q, cfg.params.length, cfg.grid.n)
    rng = np.random.default_rng(cfg.seed)
    n_samples = int(cfg.extras.get("n_samples", 50))
    icfg = IntegratorConfig(dt=cfg.integrator.dt, t_end=setup.T,
                            stride=cfg.integrator.stride)
    x = system.abs_nodes / cfg.params.length
    rows = []
    ratios = []
    for s in range(n_samples):
        coef = rng.normal(size=(3, 4))
        U = np.stack([sum(c * np.sin((m + 1) * np.pi * x)
                          for m, c in enumerate(row)) for row in coef])
        V = np.zeros_like(U)
        rep = carl.ucp_experiment(system, U, V, setup, icfg)
        rows.append((s, rep.initial_energy, rep.terminal_energy, rep.ratio))
        ratios.append(rep.ratio)
    write_csv(out / "ucp_report.csv",
              ["sample", "initial_energy", "terminal_energy",
               "observability_ratio"], rows)
    return {"min_ratio": min(ratios) if ratios else 0.0,
            "n_samples": n_samples}


def _run_quasi_stability(cfg: ScenarioConfig, out: Path) -> dict:
    rng = np.random.default_rng(cfg.seed)
    n_pairs = int(cfg.extras.get("n_pairs", 10))
    x = cfg.grid.nodes / cfg.grid.length
    pairs = []
    rows = []
    for pidx in range(n_pairs):
        states = []
        for _ in range(2):
            fields = [sum(c * np.sin((m + 1) * np.pi * x) for m, c in
                          enumerate(rng.normal(scale=0.5, size=3)))
                      for _ in range(6)]
            states.append(StateZ(*fields))
        t1 = simulate(states[0], cfg.params, cfg.damping, cfg.sources,
                      cfg.integrator, cfg.grid)
        t2 = simulate(states[1], cfg.params, cfg.damping, cfg.sources,
                      cfg.integrator, cfg.grid)
        terms = quasi_stability_terms(t1, t2, cfg.params, cfg.sources)
        pairs.append(terms)
    c1, omega, c2 = fit_quasi_stability(pairs)
    for pidx, terms in enumerate(pairs):
        rhs = (c1 * np.exp(-omega * terms.times) * terms.diff_norm_sq[0]
               + c2 * terms.sup_lower_order)
        viol = float(np.max((terms.diff_norm_sq - rhs)
                            / np.maximum(rhs, 1e-300)))
        rows.append((pidx, terms.diff_norm_sq[0], terms.diff_norm_sq[-1],
                     max(0.0, viol)))
    write_csv(out / "quasi_stability.csv",
              ["pair", "initial_gap_sq", "final_gap_sq",
               "max_relative_violation"], rows)
    write_csv(out / "quasi_stability_fit.csv", ["c1", "omega", "c2"],
              [(c1, omega, c2)])
    return {"c1": c1, "omega": omega, "c2": c2,
            "max_violation": max((r[3] for r in rows), default=0.0)}


_SCENARIOS = {
    "simulate": _run_simulate,
    "decay": _run_decay,
    "stationary": _run_stationary,
    "carleman": _run_carleman,
    "ucp": _run_ucp,
    "quasi-stability": _run_quasi_stability,
}


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> dict:
    """Execute a scenario, writing CSVs, the effective config, and a manifest
    with a sha256 per artifact; returns the manifest dict."""
    out = Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    eff = out / "effective_config.toml"
    write_toml(eff, _effective_dict(cfg))
    summary = _SCENARIOS[cfg.kind](cfg, out)
    artifacts = {p.name: _sha256(p)
                 for p in sorted(out.iterdir())
                 if p.suffix in (".csv", ".toml") and p.name != "manifest.json"}
    manifest = {"kind": cfg.kind, "seed": cfg.seed,
                "config_sha256": _sha256(eff), "artifacts": artifacts,
                "summary": summary}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                  sort_keys=True) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    manifest = run_scenario(cfg, out_dir=args.out)
    print(json.dumps(manifest["summary"], sort_keys=True))
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = validate_model(cfg.params, cfg.damping, cfg.sources)
    for check in report.checks:
        print(f"{check.name}: {'pass' if check.passed else 'FAIL'}"
              f" ({check.detail})")
    return 0 if report.all_passed else 1


def _cmd_catalog(args) -> int:
    print("damping laws:")
    for name in sorted(DAMPING_LAWS):
        law = DAMPING_LAWS[name]()
        print(f"  {name}: slope range [{law.slope_min}, {law.slope_max}]")
    print("sources:")
    for name in sorted(SOURCE_CATALOG):
        print(f"  {name}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bresse-lab",
        description="Numerical laboratory for a damped arched-beam system")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config and the model "
                                            "assumptions without running")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_cat = sub.add_parser("catalog", help="list damping and source options")
    p_cat.set_defaults(func=_cmd_catalog)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BresseLabError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
