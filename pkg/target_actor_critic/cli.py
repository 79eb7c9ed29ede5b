"""
Command-line entry point of the lab.

Subcommands:
    validate  Check MDP, feature and run-configuration files
    oracle    Closed-form report at one or more θ (``--check`` exits 1 on a failed check)
    run       Monte-Carlo replicates of the algorithm; metrics CSV and a run manifest
    sweep     Averaged errors over several horizons with log-log rate fits
    audit     Every standing hypothesis on one instance over sampled θ
    check     Step-size report, bound exponents, T(ε) and τ_T for a schedule

Exit codes: 0 success, 1 validation or check failure, 2 usage error.
"""

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import yaml

from target_actor_critic import __version__
from target_actor_critic.algorithm import RunResult, select_metrics
from target_actor_critic.config import LabConfig, RunDocument, load_run_document, load_settings
from target_actor_critic.config.documents import RUN_KEYS
from target_actor_critic.errors import InvalidConfigError, InvalidMdpError, NumericalFault
from target_actor_critic.experiments import (
    Instance,
    assumption_audit,
    experiment_config,
    figure_to_svg,
    rate_figure,
    rate_sweep,
    run_seeds,
    seed_mean,
)
from target_actor_critic.features import features_from_document, set_rank_tol
from target_actor_critic.mdp import mdp_from_document
from target_actor_critic.oracle import chain_structure, oracle_report, set_condition_warning, state_action_kernel
from target_actor_critic.policy import SoftmaxPolicy, policy_features_from_document
from target_actor_critic.schedules import (
    PowerSchedule,
    actor_rate_exponents,
    check_stepsizes,
    critic_rate_exponents,
    mixing_time,
    sample_complexity,
)
from target_actor_critic.storage import ResultStore, content_hash, load_document

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


@dataclass
class RunManifest:
    """
    Provenance of one `run` or `sweep` invocation.

    Attributes:
        config: Run document as executed, after command-line overrides
        input_hashes: sha256 per input source
        outputs: sha256 per written file, keyed by name inside the output directory
        aborted: Replicates stopped by a non-finite iterate, with step and reason
    """

    command: str
    config: Dict[str, Any]
    input_hashes: Dict[str, str]
    seeds: List[int]
    started: str
    finished: str = ""
    tool_version: str = __version__
    target_mode: str = "polyak"
    outputs: Dict[str, str] = field(default_factory=dict)
    aborted: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "RunManifest":
        return cls(**document)

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        return cls.from_dict(load_document(path))

    def verify(self, out_dir: Path, input_hashes: Optional[Dict[str, str]] = None) -> List[str]:
        """
        Recompute hashes and list every mismatch.

        Args:
            out_dir: Directory holding the recorded outputs
            input_hashes: Freshly computed input hashes; inputs are skipped when None

        Returns:
            List of mismatch descriptions; empty when everything matches
        """
        problems = []
        for name, expected in self.outputs.items():
            path = Path(out_dir) / name
            if not path.exists():
                problems.append(f"output {name} is missing")
            elif content_hash(path) != expected:
                problems.append(f"output {name} changed")
        if input_hashes is not None:
            for name, expected in self.input_hashes.items():
                if input_hashes.get(name) != expected:
                    problems.append(f"input {name} changed")
        return problems


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _add_instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", help="Run document (YAML/JSON, schema_version 1)")
    parser.add_argument("--mdp", help="MDP file or built-in name (default-garnet, two-cycle, two-state)")
    parser.add_argument("--policy-features", "--policy", dest="policy_features",
                        help="Policy-feature file or 'tabular'")
    parser.add_argument("--critic-features", "--features", dest="critic_features",
                        help="Critic-feature file, 'tabular' or 'deficient'")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Base seed; replicate r uses seed + r")
    parser.add_argument("--seeds", type=int, metavar="N", help="Number of replicates")
    parser.add_argument("--horizon", type=int, metavar="T", help="Steps per replicate")
    parser.add_argument("--stride", type=int, help="Steps between recorded metric rows")
    parser.add_argument("--jobs", type=int, help="Worker processes (0 = available parallelism)")
    parser.add_argument("--out", help="Output directory (default: OUTPUT_DIR setting)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv", help="Table format (default: csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="target-ac",
        description="Numerical lab for the three-timescale target-based actor-critic on finite MDPs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Check a hand-written MDP file
  target-ac validate garnet.yaml

  # Oracle report at θ = 0 with every spectral and fixed-point check
  target-ac oracle --mdp default-garnet --theta zeros --check

  # 20 replicates of a run document on 4 workers
  target-ac run --config run.yaml --seeds 20 --jobs 4 --out results/run

  # Rate sweep with SVG plots
  target-ac sweep --config sweep.yaml --plot --out results/sweep
""",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--settings", help="Settings YAML overriding the packaged defaults")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Override the LOG_LEVEL setting")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="Validate MDP, feature or run-configuration files")
    p.add_argument("paths", nargs="+", help="Files to validate (kind detected from content)")

    p = sub.add_parser("oracle", help="Closed-form oracle report at θ")
    _add_instance_flags(p)
    p.add_argument("--theta", action="append",
                   help="'zeros', comma-separated values, or a file with theta/thetas (repeatable)")
    p.add_argument("--samples", type=int, default=0, help="Additional Gaussian θ draws")
    p.add_argument("--seed", type=int, default=0, help="Seed of the θ draws and random test vectors")
    p.add_argument("--check", action="store_true", help="Exit 1 if any check fails")
    p.add_argument("--out", help="Write oracle.yaml (or oracle.json) here instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default=None,
                   help="json writes JSON; the default is YAML")

    p = sub.add_parser("run", help="Run seeded replicates and record metrics")
    _add_instance_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("sweep", help="Averaged errors over horizons with rate fits")
    _add_instance_flags(p)
    _add_run_flags(p)
    p.add_argument("--horizons", help="Comma-separated horizons (at least 3 spanning 2 decades)")
    p.add_argument("--plot", action="store_true", help="Write one SVG per fitted quantity")
    p.add_argument("--check", action="store_true", help="Exit 1 if any fit was refused")

    p = sub.add_parser("audit", help="Audit every standing hypothesis over sampled θ")
    _add_instance_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("check", help="Step-size report for a schedule")
    _add_instance_flags(p)
    p.add_argument("--schedule", help="c1,c2,c3,a_exp,xi_exp,b_exp (default: from --config)")
    p.add_argument("--horizon", type=int, metavar="T", help="Horizon for ratios and τ_T")
    p.add_argument("--epsilon", type=float, help="Target accuracy for T(ε)")
    return parser


def _setup(args: argparse.Namespace) -> Optional[LabConfig]:
    settings = load_settings(args.settings)
    ok, problems = settings.validate()
    if not ok:
        for problem in problems:
            print(f"settings: {problem}", file=sys.stderr)
        return None
    lab = settings.to_lab_config()
    level = args.log_level or lab.log_level
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
    set_condition_warning(lab.condition_warning)
    set_rank_tol(lab.rank_tol)
    return lab


def _source(value: str) -> str:
    """File arguments become absolute so they do not resolve against the run document's directory."""
    path = Path(value)
    return str(path.resolve()) if path.suffix or path.exists() else value


def _document(args: argparse.Namespace) -> RunDocument:
    document = load_run_document(args.config) if args.config else RunDocument()
    if args.mdp:
        document.mdp = _source(args.mdp)
    if args.policy_features:
        document.policy_features = _source(args.policy_features)
    if args.critic_features:
        document.critic_features = _source(args.critic_features)
    overrides = {
        "seed": getattr(args, "seed", None),
        "seeds": getattr(args, "seeds", None),
        "horizon": getattr(args, "horizon", None),
        "snapshot_stride": getattr(args, "stride", None),
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(document, name, value)
    if getattr(args, "horizons", None):
        document.horizons = [int(h) for h in args.horizons.split(",")]
    problems = document.validate()
    if problems:
        raise InvalidConfigError("Invalid run configuration: " + "; ".join(problems))
    return document


def _jobs(args: argparse.Namespace, document: RunDocument, lab: LabConfig) -> int:
    if args.jobs is not None:
        return args.jobs
    return document.jobs if document.jobs is not None else lab.jobs


def _store(args: argparse.Namespace, lab: LabConfig) -> ResultStore:
    return ResultStore(args.out or lab.output_dir, lab.float_format)


def _save_table(store: ResultStore, df: pd.DataFrame, stem: str, fmt: str) -> str:
    name = f"{stem}.{fmt}"
    if fmt == "json":
        store.save_data(df.to_dict(orient="records"), name)
    else:
        store.save_data(df, name)
    return name


def _record(store: ResultStore, manifest: RunManifest, name: str) -> None:
    manifest.outputs[name] = content_hash(store.resolve(name))


def _abort_entries(results: Sequence[RunResult]) -> List[Dict[str, Any]]:
    return [
        {"replicate": r.replicate, "step": r.abort_step, "reason": r.abort_reason}
        for r in results
        if r.aborted
    ]


# ------------------------------------------------------------------ validate


def _validate_file(path: Path) -> List[str]:
    """Problems found in one document; empty when it is valid."""
    try:
        document = load_document(path)
        if "kernel" in document:
            mdp_from_document(document, source=str(path))
            return []
        if "matrix" in document:
            return features_from_document(document).validate()
        if "features" in document:
            policy_features_from_document(document)
            return []
        if "schema_version" in document and set(document) <= RUN_KEYS:
            run_document = load_run_document(path)
            experiment_config(run_document, jobs=1)
            return []
    except InvalidMdpError as e:
        return [str(v) for v in e.violations]
    except yaml.YAMLError as e:
        return [f"unparsable YAML: {e}"]
    except (InvalidConfigError, ValueError) as e:
        return [str(e)]
    return ["unrecognised document: expected an MDP, critic features, policy features or a run document"]


def cmd_validate(args: argparse.Namespace, lab: LabConfig) -> int:
    failed = False
    for raw in args.paths:
        path = Path(raw)
        problems = _validate_file(path)
        if problems:
            failed = True
            print(f"{path}: INVALID", file=sys.stderr)
            for problem in problems:
                print(f"  - {problem}", file=sys.stderr)
        else:
            print(f"{path}: ok")
    return EXIT_FAILED if failed else EXIT_OK


# ------------------------------------------------------------------ oracle


def parse_thetas(values: Optional[Sequence[str]], instance: Instance) -> List[np.ndarray]:
    """
    Resolve --theta arguments.

    Args:
        values: Each 'zeros', a comma-separated vector, or a file holding `theta` (one vector)
            or `thetas` (a list of vectors)
        instance: Supplies the dimension d

    Raises:
        ValueError: On a vector of the wrong length
    """
    d = instance.policy_features.shape[2]
    thetas: List[np.ndarray] = []
    for value in values or ["zeros"]:
        if value == "zeros":
            thetas.append(instance.theta0())
        elif Path(value).suffix and Path(value).exists():
            document = load_document(value)
            rows = document["thetas"] if "thetas" in document else [document["theta"]]
            thetas.extend(np.asarray(row, dtype=float) for row in rows)
        else:
            thetas.append(np.array([float(x) for x in value.split(",")]))
    for theta in thetas:
        if theta.shape != (d,):
            raise ValueError(f"θ must have {d} entries, got {theta.shape[0]}")
    return thetas


def cmd_oracle(args: argparse.Namespace, lab: LabConfig) -> int:
    document = _document(args)
    instance = experiment_config(document, jobs=1).instance
    thetas = parse_thetas(args.theta, instance)
    if args.samples:
        thetas.extend(instance.sample_thetas(args.samples, args.seed)[1:])

    reports, failed = [], []
    for i, theta in enumerate(thetas):
        policy = SoftmaxPolicy(instance.policy_features, theta)
        report = oracle_report(instance.mdp, policy, instance.features, lab.oracle_random_v, args.seed)
        reports.append(report.to_document())
        failed += [f"θ #{i}: {name}" for name, ok in report.checks().items() if not ok]
    logger.info(f"Oracle reports at {len(thetas)} θ on {instance.name}")

    if args.out:
        store = ResultStore(args.out, lab.float_format)
        if args.format == "json":
            store.save_data(reports, "oracle.json")
        else:
            store.save_data(yaml.safe_dump_all(reports, sort_keys=False), "oracle.yaml", file_type="txt")
    else:
        sys.stdout.write(yaml.safe_dump_all(reports, sort_keys=False))

    if args.check and failed:
        print("Failed checks:", file=sys.stderr)
        for name in failed:
            print(f"  - {name}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


# ------------------------------------------------------------------ run


def cmd_run(args: argparse.Namespace, lab: LabConfig) -> int:
    started = _now()
    document = _document(args)
    config = experiment_config(document, jobs=_jobs(args, document, lab))
    store = _store(args, lab)
    logger.info(
        f"Run {config.kind} on {config.instance.name}: T = {config.horizon}, "
        f"{config.n_seeds} seed(s), {config.jobs} job(s)"
    )

    results = run_seeds([config.run_config(r) for r in range(config.n_seeds)], config.jobs)
    metrics = pd.concat(
        [select_metrics(r.metrics, document.metrics).assign(replicate=r.replicate) for r in results],
        ignore_index=True,
    )
    metrics = metrics[["replicate"] + [c for c in metrics.columns if c != "replicate"]]
    snapshots = pd.concat(
        [r.snapshot_frame().assign(replicate=r.replicate) for r in results], ignore_index=True
    )
    snapshots = snapshots[["replicate"] + [c for c in snapshots.columns if c != "replicate"]]
    columns = [c for c in metrics.columns if c not in ("replicate", "t")]
    means = seed_mean(results, columns)

    manifest = RunManifest(
        command="run",
        config=document.to_document(),
        input_hashes=dict(config.instance.inputs),
        seeds=[document.seed + r for r in range(config.n_seeds)],
        started=started,
        target_mode=config.options.target_mode,
        aborted=_abort_entries(results),
    )
    for df, stem in ((metrics, "metrics"), (snapshots, "snapshots"), (means, "metrics_mean")):
        _record(store, manifest, _save_table(store, df, stem, args.format))
    manifest.finished = _now()
    store.save_data(manifest.to_dict(), "manifest.json")

    kept = means.iloc[-1] if not means.empty else None
    print(f"{len(results) - len(manifest.aborted)}/{len(results)} replicate(s) completed; outputs in {store.out_dir}")
    if kept is not None and "critic_error_sq_mean" in means:
        print(f"  t = {int(kept['t'])}: mean ‖ω − ω̄*‖² = {kept['critic_error_sq_mean']:.6g}")
    return EXIT_OK


# ------------------------------------------------------------------ sweep


def cmd_sweep(args: argparse.Namespace, lab: LabConfig) -> int:
    started = _now()
    document = _document(args)
    config = experiment_config(document, jobs=_jobs(args, document, lab))
    store = _store(args, lab)
    result = rate_sweep(config)

    manifest = RunManifest(
        command="sweep",
        config=document.to_document(),
        input_hashes=dict(config.instance.inputs),
        seeds=[document.seed + r for r in range(config.n_seeds)],
        started=started,
        target_mode=config.options.target_mode,
    )
    _record(store, manifest, _save_table(store, result.table, "sweep", args.format))
    store.save_data(result.to_dict(), "rate_fit.json")
    _record(store, manifest, "rate_fit.json")
    if args.plot:
        for quantity, fit in result.fits.items():
            name = f"{quantity}.svg"
            store.save_data(figure_to_svg(rate_figure(fit)), name)
            _record(store, manifest, name)
    manifest.finished = _now()
    store.save_data(manifest.to_dict(), "manifest.json")

    for quantity, fit in result.fits.items():
        print(
            f"{quantity}: slope {fit.slope:.4f} ± {fit.slope_stderr:.4f} "
            f"(dominant bound exponent {fit.theoretical_exponent:.4f}, {fit.dominant_term})"
        )
    for quantity, reason in result.refused.items():
        print(f"{quantity}: fit refused ({reason})", file=sys.stderr)
    print(f"T(ε = {result.epsilon}) ≈ {result.sample_complexity:.4g} (up to constants)")
    if args.check and result.refused:
        return EXIT_FAILED
    return EXIT_OK


# ------------------------------------------------------------------ audit


def cmd_audit(args: argparse.Namespace, lab: LabConfig) -> int:
    document = _document(args)
    config = experiment_config(document, jobs=1)
    store = _store(args, lab)
    thetas = config.instance.sample_thetas(document.theta_samples, document.seed)
    report = assumption_audit(
        config.instance.mdp,
        config.instance.policy_features,
        config.instance.features,
        config.schedule,
        thetas=thetas,
        horizon=max(document.horizon, 1),
        n_random_v=lab.oracle_random_v,
        seed=document.seed,
    )
    if args.format == "json":
        store.save_data(report.to_dict(), "audit.json")
    else:
        store.save_data(report.to_frame(), "audit.csv")

    for item in report.items:
        status = "ok" if item.passed else ("FAIL" if item.required else "note")
        print(f"[{status:>4}] {item.name}: {item.detail}")
    return EXIT_OK if report.passed else EXIT_FAILED


# ------------------------------------------------------------------ check


def parse_schedule(value: str) -> PowerSchedule:
    parts = [float(x) for x in value.split(",")]
    if len(parts) != 6:
        raise ValueError(f"--schedule needs 6 values c1,c2,c3,a_exp,xi_exp,b_exp, got {len(parts)}")
    return PowerSchedule(*parts)


def cmd_check(args: argparse.Namespace, lab: LabConfig) -> int:
    document = _document(args)
    schedule = parse_schedule(args.schedule) if args.schedule else document.schedule
    horizon = args.horizon or max(document.horizon, 1)
    epsilon = args.epsilon if args.epsilon is not None else document.epsilon

    steps = check_stepsizes(schedule, horizon)
    output: Dict[str, Any] = {
        "schedule": schedule.to_document(),
        "problems": schedule.validate(),
        "stepsizes": steps.to_dict(),
        "critic_exponents": critic_rate_exponents(schedule).terms,
        "actor_exponents": actor_rate_exponents(schedule).terms if schedule.c1 > 0 else None,
        "epsilon": epsilon,
        "sample_complexity": sample_complexity(epsilon),
    }

    instance = experiment_config(document, jobs=1).instance
    policy = SoftmaxPolicy(instance.policy_features, instance.theta0())
    if chain_structure(state_action_kernel(instance.mdp, policy, artificial=True)).ergodic:
        try:
            output["mixing_time"] = mixing_time(schedule, horizon, mdp=instance.mdp, policy=policy)
        except (ValueError, NumericalFault) as e:
            logger.warning(f"τ_T not computed: {e}")
            output["mixing_time"] = None
    else:
        output["mixing_time"] = None

    sys.stdout.write(yaml.safe_dump(output, sort_keys=False))
    if output["problems"] or steps.regimes == ["none"]:
        return EXIT_FAILED
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "oracle": cmd_oracle,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "check": cmd_check,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run the subcommand.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Exit code: 0 success, 1 validation or check failure, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    lab = _setup(args)
    if lab is None:
        return EXIT_FAILED
    try:
        return COMMANDS[args.command](args, lab)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidMdpError as e:
        print(f"error: {e}", file=sys.stderr)
        for violation in e.violations:
            print(f"  - {violation}", file=sys.stderr)
        return EXIT_FAILED
    except (InvalidConfigError, NumericalFault, ValueError, yaml.YAMLError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
