"""Command-line entry point: model configuration, experiment orchestration, CSV output.

Subcommands: rd-curve, verify-pfr, redundancy-sweep, gray-wyner.  All inputs
come from a single JSON config (probabilities as decimal strings, seed as a
64-hex-char string); all randomness flows from the config seed.  Outputs are
deterministic functions of (config, seed).

Exit codes:
    0  success, all requested checks pass
    1  a requested check failed (a bound or law violated empirically)
    2  config parse/validation failure
    3  solver non-convergence
    4  gray-wyner round-trip mismatch (internal invariant breach)
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .codebook import arrival_stream, derive_subseed
from .errors import NotConverged, PfrlabError
from .gray_wyner import GwModel, gw_decode, gw_records_to_csv, gw_run_trials
from .pfr import dominance_parameter, geometric_parameter_exact, pfr_select
from .prob import DistortionMatrix, FinitePmf, Kernel, Seed, kl_divergence
from .rd import ba_fixed_slope, solve_at_distortion
from .redundancy import (CODE_KINDS, ETA_KINDS, bound_rhs, estimate_tail,
                         records_to_csv, run_trials)


class ConfigError(PfrlabError):
    def __init__(self, field: str, msg: str):
        super().__init__(f"config error in field '{field}': {msg}")
        self.field = field


def _number(v, field: str) -> float:
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(field, f"expected a decimal number, got {v!r}") from None
    if not math.isfinite(x):
        raise ConfigError(field, f"value must be finite, got {v!r}")
    return x


def _vector(v, field: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ConfigError(field, "expected a nonempty list")
    return np.array([_number(e, field) for e in v])


def _matrix(v, field: str) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ConfigError(field, "expected a nonempty list of rows")
    rows = [_vector(r, field) for r in v]
    if len({r.size for r in rows}) != 1:
        raise ConfigError(field, "rows have inconsistent lengths")
    return np.stack(rows)


def _pmf(v, field: str) -> FinitePmf:
    try:
        return FinitePmf(_vector(v, field))
    except ValueError as e:
        raise ConfigError(field, str(e)) from None


def _kernel(v, field: str) -> Kernel:
    try:
        return Kernel(_matrix(v, field))
    except ValueError as e:
        raise ConfigError(field, str(e)) from None


@dataclass
class ExperimentConfig:
    mode: str
    source: FinitePmf
    distortion: DistortionMatrix
    target_D: float
    trials: int
    seed: Seed
    gamma_grid: list
    pfr_target: FinitePmf
    pfr_proposal: FinitePmf
    gw_model: GwModel


_REQUIRED = {
    "rd-curve": ("source", "distortion"),
    "verify-pfr": ("trials", "seed"),
    "redundancy-sweep": ("source", "distortion", "target_D", "trials", "seed",
                         "gamma_grid"),
    "gray-wyner": ("gray_wyner", "trials", "seed"),
}


def load_config(path: str, mode: str, trials_override=None,
                seed_override=None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")

    cfg_mode = raw.get("mode")
    if cfg_mode is not None and cfg_mode != mode:
        raise ConfigError("mode", f"config says {cfg_mode!r} but subcommand is {mode!r}")

    for field in _REQUIRED[mode]:
        if field == "trials" and trials_override is not None:
            continue
        if field == "seed" and seed_override is not None:
            continue
        if field not in raw:
            raise ConfigError(field, "required for this mode but missing")

    source = _pmf(raw["source"], "source") if "source" in raw else None
    distortion = None
    if "distortion" in raw:
        try:
            distortion = DistortionMatrix(_matrix(raw["distortion"], "distortion"))
        except ValueError as e:
            raise ConfigError("distortion", str(e)) from None
    if source is not None and distortion is not None:
        if distortion.shape[0] != len(source):
            raise ConfigError("distortion",
                              f"has {distortion.shape[0]} rows but source has "
                              f"{len(source)} symbols")

    target_d = _number(raw["target_D"], "target_D") if "target_D" in raw else None

    trials = trials_override
    if trials is None and "trials" in raw:
        trials = raw["trials"]
    if trials is not None:
        if not isinstance(trials, int) or trials < 1:
            raise ConfigError("trials", f"must be an integer >= 1, got {trials!r}")

    seed = None
    seed_raw = seed_override if seed_override is not None else raw.get("seed")
    if seed_raw is not None:
        try:
            seed = Seed.from_hex(str(seed_raw))
        except ValueError as e:
            raise ConfigError("seed", str(e)) from None

    gamma_grid = None
    if "gamma_grid" in raw:
        gamma_grid = [_number(g, "gamma_grid") for g in raw["gamma_grid"]]
        if mode == "redundancy-sweep" and not gamma_grid:
            raise ConfigError("gamma_grid", "must be nonempty for redundancy-sweep")

    pfr_target = pfr_proposal = None
    if "pfr" in raw:
        blk = raw["pfr"]
        if not isinstance(blk, dict):
            raise ConfigError("pfr", "expected an object with target/proposal")
        if "target" in blk:
            pfr_target = _pmf(blk["target"], "pfr.target")
        if "proposal" in blk:
            pfr_proposal = _pmf(blk["proposal"], "pfr.proposal")
    if mode == "verify-pfr":
        if pfr_target is None:
            if source is None:
                raise ConfigError("pfr.target",
                                  "verify-pfr needs a pfr.target block or a source pmf")
            pfr_target = source
        if pfr_proposal is None:
            pfr_proposal = FinitePmf.uniform(len(pfr_target))
        if len(pfr_proposal) != len(pfr_target):
            raise ConfigError("pfr.proposal", "alphabet differs from pfr.target")

    gw_model = None
    if "gray_wyner" in raw:
        blk = raw["gray_wyner"]
        if not isinstance(blk, dict):
            raise ConfigError("gray_wyner", "expected an object")
        for key in ("joint_source", "u_kernel", "y1_kernel", "y2_kernel"):
            if key not in blk:
                raise ConfigError(f"gray_wyner.{key}", "missing")
        try:
            gw_model = GwModel(
                joint_source=_matrix(blk["joint_source"], "gray_wyner.joint_source"),
                u_kernel=_kernel(blk["u_kernel"], "gray_wyner.u_kernel"),
                y1_kernel=_kernel(blk["y1_kernel"], "gray_wyner.y1_kernel"),
                y2_kernel=_kernel(blk["y2_kernel"], "gray_wyner.y2_kernel"))
        except ValueError as e:
            raise ConfigError("gray_wyner", str(e)) from None

    return ExperimentConfig(mode=mode, source=source, distortion=distortion,
                            target_D=target_d, trials=trials, seed=seed,
                            gamma_grid=gamma_grid, pfr_target=pfr_target,
                            pfr_proposal=pfr_proposal, gw_model=gw_model)


def _g(v: float) -> str:
    return format(float(v), ".9g")


def _write(out_dir: str, name: str, lines) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line + "\n")
    return path


def cmd_rd_curve(cfg: ExperimentConfig, out_dir: str) -> int:
    source, d = cfg.source, cfg.distortion
    zero = ba_fixed_slope(source, d, 0.0)
    d_min = float(source.probs @ d.d.min(axis=1))
    lines = ["s,D,R,lambda_star"]
    if zero.distortion - d_min <= 1e-12:
        lines.append(f"{_g(0.0)},{_g(zero.distortion)},{_g(0.0)},{_g(0.0)}")
        _write(out_dir, "rd_curve.csv", lines)
        return 0
    span = zero.distortion - d_min
    s_hi = 1.0
    for _ in range(60):
        sol = ba_fixed_slope(source, d, s_hi)
        if sol.distortion <= d_min + 1e-4 * span:
            break
        s_hi *= 2.0
    slopes = np.geomspace(s_hi / 1024.0, s_hi, 23)
    rows = [(0.0, zero)] + [(float(s), ba_fixed_slope(source, d, float(s)))
                            for s in slopes]
    prev_d, prev_r = math.inf, -math.inf
    ok = True
    for s, sol in rows:
        lines.append(f"{_g(s)},{_g(sol.distortion)},{_g(sol.rate)},"
                     f"{_g(sol.slope_lambda)}")
        ok &= sol.distortion <= prev_d + 1e-9 and sol.rate >= prev_r - 1e-9
        prev_d, prev_r = sol.distortion, sol.rate
    _write(out_dir, "rd_curve.csv", lines)
    return 0 if ok else 1


def cmd_verify_pfr(cfg: ExperimentConfig, out_dir: str) -> int:
    target, proposal, seed, n = (cfg.pfr_target, cfg.pfr_proposal, cfg.seed,
                                 cfg.trials)
    ks = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    for t in range(n):
        stream = arrival_stream(derive_subseed(seed, t, "codebook"), "codebook",
                                proposal)
        res = pfr_select(target, proposal, stream)
        ks[t], ys[t] = res.k, res.y
    m = len(target)
    checks = []

    freq = np.bincount(ys, minlength=m) / n
    tv = 0.5 * float(np.abs(freq - target.probs).sum())
    checks.append(("marginal_tv", tv, 3.0 * math.sqrt(m / n), tv <= 3.0 * math.sqrt(m / n)))

    for y in target.support:
        ky = ks[ys == y]
        if ky.size < 20_000:
            continue
        p_geom = geometric_parameter_exact(target, proposal, int(y))
        kmax = int(ky.max())
        emp = np.bincount(ky, minlength=kmax + 1)[1:] / ky.size
        grid = np.arange(1, kmax + 1)
        pmf = p_geom * (1.0 - p_geom) ** (grid - 1)
        tv_k = 0.5 * (float(np.abs(emp - pmf).sum()) + (1.0 - p_geom) ** kmax)
        checks.append((f"conditional_geom_tv_y{y}", tv_k, 0.02, tv_k <= 0.02))

    for y in target.support:
        ky = ks[ys == y]
        if ky.size == 0:
            continue
        p_dom = dominance_parameter(target, proposal, int(y))
        worst = -math.inf
        for k in range(1, 51):
            surv = float((ky > k).mean())
            se = math.sqrt(surv * (1.0 - surv) / ky.size)
            worst = max(worst, surv - (1.0 - p_dom) ** k - 3.0 * se)
        checks.append((f"dominance_slack_y{y}", worst, 0.0, worst <= 0.0))

    logk = np.log2(ks)
    bound = kl_divergence(target, proposal) + 1.0
    stat = float(logk.mean()) + 3.0 * float(logk.std(ddof=1) / math.sqrt(n))
    checks.append(("mean_log2_k_plus_3se", stat, bound, stat <= bound))

    res0 = pfr_select(target, proposal,
                      arrival_stream(derive_subseed(seed, 0, "codebook"),
                                     "codebook", proposal))
    same = res0.k == int(ks[0]) and res0.y == int(ys[0])
    checks.append(("replay_determinism", float(same), 1.0, same))

    stable = True
    for t in range(min(n, 1000)):
        res = pfr_select(target, proposal,
                         arrival_stream(derive_subseed(seed, t, "codebook"),
                                        "codebook", proposal),
                         horizon_scale=2.0)
        stable &= res.k == int(ks[t]) and res.y == int(ys[t])
    checks.append(("stopping_rule_horizon_x2", float(stable), 1.0, stable))

    lines = ["check,statistic,threshold,passed"]
    for name, stat, thr, passed in checks:
        lines.append(f"{name},{_g(stat)},{_g(thr)},{str(bool(passed)).lower()}")
    _write(out_dir, "pfr_checks.csv", lines)
    return 0 if all(c[3] for c in checks) else 1


def cmd_redundancy_sweep(cfg: ExperimentConfig, out_dir: str, threads: int) -> int:
    sol = solve_at_distortion(cfg.source, cfg.distortion, cfg.target_D)
    records = run_trials(sol, cfg.source, cfg.distortion, cfg.trials, cfg.seed,
                         threads=threads)
    with open(os.path.join(_ensure(out_dir), "trials.csv"), "w") as fh:
        records_to_csv(records, fh)
    lines = ["eta_kind,code_kind,gamma,p_hat,std_err,bound_rhs"]
    ok = True
    for eta in ETA_KINDS:
        for code in CODE_KINDS:
            for gamma in cfg.gamma_grid:
                tail = estimate_tail(records, eta, code, gamma)
                rhs = bound_rhs(sol, cfg.source, cfg.distortion, eta, code, gamma)
                ok &= tail.p_hat - 3.0 * tail.std_err <= rhs
                lines.append(f"{eta},{code},{_g(gamma)},{_g(tail.p_hat)},"
                             f"{_g(tail.std_err)},{_g(rhs)}")
    _write(out_dir, "tails.csv", lines)
    return 0 if ok else 1


def cmd_gray_wyner(cfg: ExperimentConfig, out_dir: str, threads: int) -> int:
    model, seed, n = cfg.gw_model, cfg.seed, cfg.trials
    records = gw_run_trials(model, n, seed, threads=threads)
    for r in records:
        dec = gw_decode(model, r.k0, r.k1, r.k2, derive_subseed(seed, r.trial, "gw"))
        if dec != (r.u, r.y1, r.y2):
            print(f"round-trip mismatch at trial {r.trial}: {dec} != "
                  f"({r.u},{r.y1},{r.y2})", file=sys.stderr)
            return 4
    with open(os.path.join(_ensure(out_dir), "gw_trials.csv"), "w") as fh:
        gw_records_to_csv(records, fh)

    bounds = [("mean_log2_k0", np.log2([r.k0 for r in records]),
               model.mi_u_sources + 1.0),
              ("mean_log2_k1", np.log2([r.k1 for r in records]),
               model.mi_y_source_given_u(1) + 1.0),
              ("mean_log2_k2", np.log2([r.k2 for r in records]),
               model.mi_y_source_given_u(2) + 1.0)]
    lines = ["quantity,value,bound,passed"]
    ok = True
    for name, vals, bound in bounds:
        stat = float(np.mean(vals))
        if len(vals) > 1:
            stat += 3.0 * float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
        passed = stat <= bound
        ok &= passed
        lines.append(f"{name}_plus_3se,{_g(stat)},{_g(bound)},{str(passed).lower()}")
    _write(out_dir, "gw_summary.csv", lines)
    return 0 if ok else 1


def _ensure(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pfrlab",
        description="One-shot lossy compression experiments via the Poisson "
                    "functional representation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("rd-curve", "verify-pfr", "redundancy-sweep", "gray-wyner"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--out", default=".", help="output directory for CSVs")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: PFRLAB_THREADS or 1)")
        p.add_argument("--trials", type=int, default=None,
                       help="override config trial count")
        p.add_argument("--seed", default=None,
                       help="override config seed (64 hex chars)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("PFRLAB_THREADS", "1"))
    try:
        cfg = load_config(args.config, args.command, trials_override=args.trials,
                          seed_override=args.seed)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return 2
    try:
        if args.command == "rd-curve":
            return cmd_rd_curve(cfg, args.out)
        if args.command == "verify-pfr":
            return cmd_verify_pfr(cfg, args.out)
        if args.command == "redundancy-sweep":
            return cmd_redundancy_sweep(cfg, args.out, threads)
        return cmd_gray_wyner(cfg, args.out, threads)
    except NotConverged as e:
        print(f"solver did not converge: {e}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
