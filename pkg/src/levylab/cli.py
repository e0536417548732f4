"""Command-line experiment runner.

Every subcommand is deterministic given its flags and ``--seed`` and writes
CSV or JSON to ``--out`` (stdout by default).  Exit status: 0 on success, 2 on
invalid arguments, 3 when a resource limit is hit.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics, folner, group, sphere, subspace
from ._parallel import chunk_rng
from .errors import InvalidArgument, ResourceLimitError
from .sets import Cover, hemisphere

COMMANDS = ("alpha-exact", "alpha-mc", "levy-bound", "angles", "isometry-check", "proximity", "leader", "f2",
            "lift-cover", "scan", "almost-invariant", "folner", "levy-sequence", "hamming")
RESERVED = ("command", "seed", "out", "format")


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    format: str = "json"

    def to_text(self) -> str:
        lines = [f"command = {self.command}", f"seed = {self.seed}", f"format = {self.format}"]
        if self.out is not None:
            lines.append(f"out = {self.out}")
        lines += [f"{k} = {_render(v)}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        raw = {}
        for num, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidArgument(f"config line {num}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key.replace("-", "_")] = value
        if "command" not in raw:
            raise InvalidArgument("config file names no command")
        params = {k: _parse(v) for k, v in raw.items() if k not in RESERVED}
        return cls(raw["command"], params, int(raw.get("seed", 0)), raw.get("out"), raw.get("format", "json"))


def _render(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _parse(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


# --- serialization helpers -------------------------------------------------------


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_default) + "\n"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _report_rows(reports) -> list[dict]:
    return [dict(label=r.label, transforms=" ".join(r.transforms), epsilon=r.epsilon, verdict=r.verdict,
                 samples=r.samples, seed=r.seed, best_score=r.best_score, certificate=r.certificate)
            for r in reports]


# --- subcommands -------------------------------------------------------------------------


def _grid(p) -> np.ndarray:
    if "eps" in p:
        return np.array([float(p["eps"])])
    return np.linspace(0.0, float(p.get("eps_max", math.pi / 2)), int(p.get("points", 31)))


def cmd_alpha_exact(p, seed):
    curve = sphere.exact_curve(int(p.get("n", 2)), _grid(p))
    return curve.to_dict(), curve.to_csv()


def cmd_alpha_mc(p, seed):
    curve = sphere.empirical_curve(int(p.get("d", 3)), _grid(p), int(p.get("m", 10**4)), seed)
    return curve.to_dict(), curve.to_csv()


def cmd_levy_bound(p, seed):
    curve = sphere.levy_curve(int(p.get("n", 1)), _grid(p))
    return curve.to_dict(), curve.to_csv()


def cmd_angles(p, seed):
    d, n = int(p.get("d", 40)), int(p.get("n", 5))
    rng = chunk_rng(seed, "cli-angles", 0)
    F1, F2 = subspace.random_frame(d, n, rng), subspace.random_frame(d, n, rng)
    pad = subspace.principal_angles(F1, F2)
    obj = json.loads(pad.to_json())
    obj["trace_distance"] = subspace.trace_distance(F1, F2)
    rows = [dict(i=i, angle=float(t), cos=float(c)) for i, (t, c) in enumerate(zip(pad.angles, pad.cosines))]
    return obj, _csv(rows)


def cmd_isometry_check(p, seed):
    d, n = int(p.get("d", 60)), int(p.get("n", 10))
    pairs, m = int(p.get("pairs", 10)), int(p.get("m", 1000))
    rows = []
    for k in range(pairs):
        rng = chunk_rng(seed, "cli-isometry", k)
        F1, F2 = subspace.random_frame(d, n, rng), subspace.random_frame(d, n, rng)
        chk = subspace.isometry_bound_check(F1, F2, m, seed + k)
        unit = subspace.build_isometry(F1, F2).unitarity_residual()
        rows.append(dict(pair=k, samples=chk.samples, violations=chk.violations,
                         sphere_violations=chk.sphere_violations, worst_ratio=chk.worst_ratio,
                         unitarity_residual=unit))
    return dict(d=d, n=n, pairs=rows, total_violations=sum(r["violations"] for r in rows)), _csv(rows)


def cmd_proximity(p, seed):
    n, theta, eps = int(p.get("n", 100)), float(p.get("theta", 0.02)), float(p.get("eps", 0.1))
    F1, F2 = subspace.tilted_pair(n, theta)
    res = subspace.proximity_mass(F1, F2, eps, int(p.get("m", 10**4)), seed)
    row = dict(rank=res.rank, theta=theta, eps=eps, estimate=res.estimate, stderr=res.stderr,
               reference_bound=res.reference_bound, trace_condition=res.trace_condition,
               side_condition=res.side_condition, samples=res.samples, seed=res.seed)
    return row, _csv([row])


def cmd_leader(p, seed):
    res = dynamics.leader_experiment(int(p.get("d", 300)), float(p.get("eps", 0.05)),
                                     int(p.get("budget", 10**6)), seed)
    reports = [res.A, res.B, res.falsification_A, res.falsification_B]
    return res.to_dict(), _csv(_report_rows(reports))


def cmd_f2(p, seed):
    res = dynamics.f2_experiment(int(p.get("R", 6)), float(p.get("eps", 1 / 12)), int(p.get("k", 4)),
                                 int(p.get("samples", 10**4)), int(p.get("budget", 10**5)), seed)
    return res.to_dict(), _csv(_report_rows([res.A1, res.A2]))


def cmd_lift_cover(p, seed):
    d1, d2 = int(p.get("d1", 2)), int(p.get("d2", 2))
    m = int(p.get("m", 10**5))
    eps = float(p.get("eps", 0.3))
    delta = float(p.get("delta", min(eps / 3, math.pi / 8) / 2))
    c1 = Cover([hemisphere(d1, 0, 1), hemisphere(d1, 0, -1)])
    c2 = Cover([hemisphere(d2, 0, 1), hemisphere(d2, 0, -1)])
    lifted = dynamics.lift_cover(c1, d1, d2, c2)
    uncovered = lifted.covering_check(d1 + d2, m, seed)
    margin = dynamics.lift_margin_check(d1, d2, delta, eps, min(m, 10**4), seed)
    row = dict(d1=d1, d2=d2, sets=len(lifted), samples=m, uncovered=uncovered, delta=delta, eps=eps,
               margin_samples=margin.samples, margin_violations=margin.violations, worst_angle=margin.worst_angle)
    return row, _csv([row])


def cmd_scan(p, seed):
    eps, budget = float(p.get("eps", 0.1)), int(p.get("budget", 10**4))
    family = p.get("group", "z2")
    if family == "z2":
        d = int(p.get("d", 41))
        cover = Cover([hemisphere(d, 0, 1), hemisphere(d, 0, -1)])
        transforms = [group.ScalarAction(1, d, "1"), group.ScalarAction(-1, d, "-1")]
    elif family == "leader":
        d = int(p.get("d", 300))
        A, B, phis, psis, _ = dynamics.leader_sets(d)
        cover, transforms = Cover([A, B]), phis + psis
    else:
        raise InvalidArgument(f"unknown group {family!r} (z2 or leader)")
    reports = [rep for _, rep in dynamics.essential_element_scan(cover, transforms, eps, d, budget, seed)]
    return dict(group=family, d=d, reports=[r.to_dict() for r in reports]), _csv(_report_rows(reports))


def _f2_generators(R: int):
    return [group.RegularAction(group.A_GEN, R), group.RegularAction(group.B_GEN, R)]


def cmd_almost_invariant(p, seed):
    family = p.get("group", "cyclic")
    support = None
    if family == "cyclic":
        actions = [group.cyclic_shift(int(p.get("k", 12)))]
    elif family == "z2":
        d = int(p.get("d", 10))
        actions = [group.ScalarAction(1, d, "1"), group.ScalarAction(-1, d, "-1")]
    elif family == "f2":
        R = int(p.get("R", 7))
        actions = _f2_generators(R)
        support = np.flatnonzero([len(w) <= R - 1 for w in actions[0].words])
    else:
        raise InvalidArgument(f"unknown group {family!r} (cyclic, z2 or f2)")
    res = folner.almost_invariant_vector(actions, support=support)
    row = dict(group=family, dim=actions[0].dim, residual=res.residual, top_eigenvalue=res.top_eigenvalue,
               mean_square=res.mean_square)
    return row, _csv([row])


def cmd_folner(p, seed):
    family = p.get("group", "zshift")
    if family == "zshift":
        actions = [group.integer_shift(int(p.get("d", 100)))]
    elif family == "f2":
        actions = _f2_generators(int(p.get("R", 3)))
    else:
        raise InvalidArgument(f"unknown group {family!r} (zshift or f2)")
    res = folner.folner_subset_search(actions, int(p.get("n", 20)), str(p.get("strategy", "greedy-swap")),
                                      int(p.get("restarts", 32)), seed)
    rows = [dict(generator=k, ratio=v) for k, v in res.ratios.items()]
    return res.to_dict(), _csv(rows)


def cmd_levy_sequence(p, seed):
    family = p.get("group", "z2")
    eps, m = float(p.get("eps", 0.1)), int(p.get("m", 2000))
    dims = [int(x) for x in str(p.get("dims", "5,10,20,40")).split(",")]
    d = int(p.get("d", max(dims)))
    if family == "z2":
        actions = [group.ScalarAction(-1, d, "-1")]
        frames = [subspace.Frame.coordinate(d, range(k)) for k in dims]
    elif family == "circle":
        angles = 2 * math.pi * ((np.arange(1, d + 1) * math.sqrt(2)) % 1.0)
        actions = [group.DenseAction(np.diag(np.exp(1j * angles)), "rot")]
        frames = [subspace.Frame(subspace.Frame.coordinate(d, range(k)).columns.astype(complex)) for k in dims]
    else:
        raise InvalidArgument(f"unknown group {family!r} (z2 or circle)")
    cover = Cover([hemisphere(d, 0, 1), hemisphere(d, 0, -1)])
    res = folner.levy_sequence_experiment(frames, actions, cover, eps, m, seed, int(p.get("budget", 20000)))
    rows = [dict(rank=r, **{f"ratio_{k}": v for k, v in ratio.items()},
                 **{f"measure_{i}": mu for i, mu in enumerate(meas)})
            for r, ratio, meas in zip(res.ranks, res.ratios, res.measures)]
    return res.to_dict(), _csv(rows)


def cmd_hamming(p, seed):
    if "sigma" in p or "eta" in p:
        s, t = group.Permutation.parse(str(p["sigma"])), group.Permutation.parse(str(p["eta"]))
    else:
        s, t = group.sigma_eta(int(p.get("n", 10)))
    obj = dict(n=s.degree, sigma=str(s), eta=str(t), hamming=group.hamming(s, t),
               phi_sigma_eta=str(group.phi(s, t)), phi_sigmaeta_etasq=str(group.phi(s * t, t * t)))
    return obj, _csv([obj])


HANDLERS = {
    "alpha-exact": cmd_alpha_exact, "alpha-mc": cmd_alpha_mc, "levy-bound": cmd_levy_bound,
    "angles": cmd_angles, "isometry-check": cmd_isometry_check, "proximity": cmd_proximity,
    "leader": cmd_leader, "f2": cmd_f2, "lift-cover": cmd_lift_cover, "scan": cmd_scan,
    "almost-invariant": cmd_almost_invariant, "folner": cmd_folner, "levy-sequence": cmd_levy_sequence,
    "hamming": cmd_hamming,
}


def render(config: ExperimentConfig) -> str:
    if config.command not in HANDLERS:
        raise InvalidArgument(f"unknown subcommand {config.command!r}")
    if config.format not in ("csv", "json"):
        raise InvalidArgument(f"format must be csv or json, got {config.format!r}")
    obj, text = HANDLERS[config.command](config.params, config.seed)
    return text if config.format == "csv" else _json(obj)


def run(config: ExperimentConfig) -> int:
    try:
        text = render(config)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    if config.out:
        Path(config.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# --- argument parsing -----------------------------------------------------------------------

_FLAGS = {
    "alpha-exact": [("n", int, "sphere dimension n of S^n"), ("eps", float, "single radius"),
                    ("eps-max", float, "largest radius of the grid"), ("points", int, "grid size")],
    "alpha-mc": [("d", int, "ambient dimension (sphere S^{d-1})"), ("m", int, "samples"), ("eps", float, ""),
                 ("eps-max", float, ""), ("points", int, "")],
    "levy-bound": [("n", int, "bound parameter; bounds alpha of S^{n+1}"), ("eps", float, ""),
                   ("eps-max", float, ""), ("points", int, "")],
    "angles": [("d", int, "ambient dimension"), ("n", int, "rank")],
    "isometry-check": [("d", int, ""), ("n", int, "rank"), ("pairs", int, ""), ("m", int, "samples per pair")],
    "proximity": [("n", int, "rank"), ("theta", float, "common principal angle"), ("eps", float, ""),
                  ("m", int, "samples")],
    "leader": [("d", int, "dimension, multiple of 3"), ("eps", float, ""), ("budget", int, "search samples")],
    "f2": [("R", int, "ball radius"), ("eps", float, ""), ("k", int, "number of shifts a^i"),
           ("samples", int, ""), ("budget", int, "")],
    "lift-cover": [("d1", int, ""), ("d2", int, ""), ("m", int, ""), ("eps", float, ""), ("delta", float, "")],
    "scan": [("group", str, "z2 or leader"), ("d", int, ""), ("eps", float, ""), ("budget", int, "")],
    "almost-invariant": [("group", str, "cyclic, z2 or f2"), ("k", int, ""), ("d", int, ""), ("R", int, "")],
    "folner": [("group", str, "zshift or f2"), ("d", int, ""), ("R", int, ""), ("n", int, "subset size"),
               ("strategy", str, "greedy-swap or exhaustive"), ("restarts", int, "")],
    "levy-sequence": [("group", str, "z2 or circle"), ("d", int, ""), ("dims", str, "comma-separated ranks"),
                      ("eps", float, ""), ("m", int, ""), ("budget", int, "")],
    "hamming": [("n", int, "even degree"), ("sigma", str, "one-line images"), ("eta", str, "one-line images")],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levylab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        for flag, typ, help_ in _FLAGS[name]:
            sp.add_argument(f"--{flag}", type=typ, default=None, help=help_ or None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--config", default=None, help="flat key = value file; flags override it")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = ExperimentConfig(args.command)
    if args.config:
        base = ExperimentConfig.from_text(Path(args.config).read_text(encoding="utf-8"))
        if base.command != args.command:
            raise InvalidArgument(f"config is for {base.command!r}, not {args.command!r}")
    params = dict(base.params)
    for key, value in vars(args).items():
        if key in ("command", "config", "seed", "out", "format") or value is None:
            continue
        params[key] = value
    return ExperimentConfig(args.command, params,
                            args.seed if args.seed is not None else base.seed,
                            args.out if args.out is not None else base.out,
                            args.format if args.format is not None else base.format)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except (InvalidArgument, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
