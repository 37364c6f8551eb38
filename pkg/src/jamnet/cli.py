"""Command-line harness: config ingestion, dispatch, sweeps, CSV/JSON output.

Config documents are strict JSON; unknown keys anywhere are rejected.  Every
run writes `<out>.csv` (tabular results) and `<out>.json` (the full report
with strategies, multipliers and discrepancy notes).  Identical config and
seed produce byte-identical outputs.

Exit codes: 0 success, 1 invalid config/scenario, 2 solver non-convergence
or numerical failure (diagnostics still written to the JSON report).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

from . import asym, bounds, simulate, symmetric
from .model import (
    KNOWN_DISCREPANCY_TAGS,
    InvalidProfile,
    InvalidScenario,
    JamnetError,
    NetworkScenario,
    NoRoot,
    NonConvergence,
    NumericalFailure,
    SensorParams,
    Setting,
    SingularDenominator,
    profile_to_dict,
    scenario_to_dict,
    validate_scenario,
)

COMMANDS = ("closed-form", "solve-asym", "simulate", "verify", "ceo-curve", "maxcorr", "sweep")

_TOP_KEYS = {
    "setting",
    "transmitters",
    "adversaries",
    "sum_power_transmit",
    "sum_power_attack",
    "epsilon",
    "eta",
    "monte_carlo",
    "sweep",
    "output_path",
}
_MC_KEYS = {"samples", "seed", "chunks"}
_SWEEP_KEYS = {"param", "from", "to", "steps"}
_SWEEP_PARAMS = {
    "sum_power_attack", "P_A",
    "sum_power_transmit", "P_T",
    "power", "P",
    "alpha", "beta", "epsilon", "eta",
    "rate", "rho",
}


class ParseError(JamnetError):
    """The config document violates the schema."""


@dataclasses.dataclass(frozen=True)
class MonteCarloConfig:
    samples: int
    seed: int
    chunks: int = 1


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    param: str
    start: float
    stop: float
    steps: int


@dataclasses.dataclass(frozen=True)
class RunConfig:
    scenario: NetworkScenario
    command: str
    monte_carlo: MonteCarloConfig | None
    sweep: SweepConfig | None
    output_path: str


def _require_keys(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)} in {where}")


def _parse_sensors(node, where: str) -> tuple[SensorParams, ...]:
    def one(entry, where_entry: str) -> SensorParams:
        if not isinstance(entry, dict):
            raise ParseError(f"{where_entry} must be an object")
        _require_keys(entry, {"alpha", "beta", "power"}, where_entry)
        for key in ("alpha", "beta", "power"):
            if key not in entry:
                raise ParseError(f"{where_entry} missing '{key}'")
        return SensorParams(alpha=entry["alpha"], beta=entry["beta"], power=entry["power"])

    if isinstance(node, dict):
        _require_keys(node, {"count", "alpha", "beta", "power"}, where)
        for key in ("count", "alpha", "beta", "power"):
            if key not in node:
                raise ParseError(f"{where} shorthand missing '{key}'")
        count = node["count"]
        if not isinstance(count, int) or count < 0:
            raise ParseError(f"{where}.count must be a nonnegative integer")
        sensor = SensorParams(alpha=node["alpha"], beta=node["beta"], power=node["power"])
        return (sensor,) * count
    if isinstance(node, list):
        return tuple(one(entry, f"{where}[{i}]") for i, entry in enumerate(node))
    raise ParseError(f"{where} must be a list of sensors or a count shorthand")


def parse_config(document: str, command: str) -> RunConfig:
    """Parse and validate a config document for ``command``.

    Raises ParseError for schema violations and propagates InvalidScenario
    from scenario validation.
    """
    if command not in COMMANDS:
        raise ParseError(f"unknown command {command!r}")
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: line {exc.lineno}, col {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config document must be a JSON object")
    _require_keys(raw, _TOP_KEYS, "top level")

    if "setting" not in raw:
        raise ParseError("'setting' is required")
    try:
        setting = Setting(raw["setting"])
    except ValueError:
        raise ParseError(f"unknown setting {raw['setting']!r}") from None

    transmitters = _parse_sensors(raw.get("transmitters", []), "transmitters")
    adversaries = _parse_sensors(raw.get("adversaries", []), "adversaries")

    if setting is Setting.SYM_III:
        if "epsilon" not in raw:
            raise ParseError("epsilon required for SymIII")
        if "eta" not in raw:
            raise ParseError("eta required for SymIII")

    scenario = validate_scenario(
        NetworkScenario(
            transmitters=transmitters,
            adversaries=adversaries,
            setting=setting,
            sum_power_transmit=raw.get("sum_power_transmit"),
            sum_power_attack=raw.get("sum_power_attack"),
            epsilon=raw.get("epsilon"),
            eta=raw.get("eta"),
        )
    )

    mc = None
    if "monte_carlo" in raw:
        node = raw["monte_carlo"]
        if not isinstance(node, dict):
            raise ParseError("monte_carlo must be an object")
        _require_keys(node, _MC_KEYS, "monte_carlo")
        if "samples" not in node or "seed" not in node:
            raise ParseError("monte_carlo requires 'samples' and 'seed'")
        samples, seed = node["samples"], node["seed"]
        chunks = node.get("chunks", 1)
        if not isinstance(samples, int) or samples < 1:
            raise ParseError("monte_carlo.samples must be a positive integer")
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ParseError("monte_carlo.seed must be an unsigned 64-bit integer")
        if not isinstance(chunks, int) or chunks < 1:
            raise ParseError("monte_carlo.chunks must be a positive integer")
        mc = MonteCarloConfig(samples=samples, seed=seed, chunks=chunks)

    sweep = None
    if "sweep" in raw:
        node = raw["sweep"]
        if not isinstance(node, dict):
            raise ParseError("sweep must be an object")
        _require_keys(node, _SWEEP_KEYS, "sweep")
        for key in _SWEEP_KEYS:
            if key not in node:
                raise ParseError(f"sweep requires '{key}'")
        if node["param"] not in _SWEEP_PARAMS:
            raise ParseError(f"unknown sweep param {node['param']!r}")
        steps = node["steps"]
        if not isinstance(steps, int) or steps < 1:
            raise ParseError("sweep.steps must be a positive integer")
        sweep = SweepConfig(param=node["param"], start=float(node["from"]),
                            stop=float(node["to"]), steps=steps)

    if command == "simulate" and mc is None:
        raise ParseError("simulate requires a monte_carlo block")
    if command == "sweep" and sweep is None:
        raise ParseError("sweep requires a sweep block")

    output_path = raw.get("output_path", "jamnet-run")
    if not isinstance(output_path, str) or not output_path:
        raise ParseError("output_path must be a nonempty string")
    return RunConfig(scenario=scenario, command=command, monte_carlo=mc,
                     sweep=sweep, output_path=output_path)


# -- dispatch -----------------------------------------------------------------

def equilibrium_report(s: NetworkScenario, solver_cfg=None):
    """The setting's equilibrium report (closed form or solver)."""
    if s.setting is Setting.SYM_I:
        return symmetric.solve_setting1(s)
    if s.setting is Setting.SYM_II:
        return symmetric.solve_setting2(s)
    if s.setting is Setting.SYM_III:
        return symmetric.solve_setting3(s)
    if s.setting is Setting.ASYM_I:
        return asym.solve_theorem4(s)
    return asym.solve_theorem5(s, solver_cfg)


def _symmetric_params(s: NetworkScenario):
    sensors = s.transmitters + s.adversaries
    p = sensors[0]
    return p.alpha, p.beta, p.power


def _report_to_json(report) -> dict:
    return {
        "cost": report.cost,
        "oracle_cost": report.oracle_cost,
        "multipliers": dict(sorted(report.multipliers.items())),
        "kkt_residuals": list(report.kkt_residuals),
        "profile": profile_to_dict(report.profile),
        "discrepancy_notes": list(report.discrepancy_notes),
    }


def _tags_in(notes) -> dict[str, str]:
    tags = set()
    for note in notes:
        if "[" in note and "]" in note:
            tags.add(note[note.rindex("[") + 1 : note.rindex("]")])
    return {tag: KNOWN_DISCREPANCY_TAGS.get(tag, "") for tag in sorted(tags)}


def _run_closed_form(cfg: RunConfig):
    s = cfg.scenario
    if not s.setting.is_symmetric:
        raise InvalidScenario("closed-form handles the symmetric settings; use solve-asym")
    report = equilibrium_report(s)
    alpha, beta, power = _symmetric_params(s)
    rows = [[s.setting.value, s.num_transmitters, s.num_adversaries,
             alpha, beta, power, report.cost, report.oracle_cost]]
    header = ["setting", "M", "K", "alpha", "beta", "P", "cost_printed", "cost_oracle"]
    summary = f"{s.setting.value}: cost={report.cost:.6g} oracle={report.oracle_cost:.6g}"
    return header, rows, {"report": _report_to_json(report)}, summary


def _run_solve_asym(cfg: RunConfig):
    s = cfg.scenario
    if s.setting.is_symmetric:
        raise InvalidScenario("solve-asym handles AsymI/AsymII; use closed-form")
    report = equilibrium_report(s)
    mult = report.multipliers
    adv = report.profile.adversary
    adv_coeffs = list(getattr(adv, "coeffs", ())) or [0.0] * s.num_adversaries
    coeffs = list(report.profile.transmit_coeffs) + adv_coeffs
    max_res = max((abs(r) for r in report.kkt_residuals), default=0.0)
    header = (
        ["lambda1", "lambda2", "lambda3", "lambda4"]
        + [f"c_{i + 1}" for i in range(len(coeffs))]
        + ["cost_oracle", "max_kkt_residual"]
    )
    rows = [[mult.get("lambda1", ""), mult.get("lambda2", ""),
             mult.get("lambda3", ""), mult.get("lambda4", "")]
            + coeffs + [report.oracle_cost, max_res]]
    summary = f"{s.setting.value}: cost={report.oracle_cost:.6g} max|res|={max_res:.3g}"
    return header, rows, {"report": _report_to_json(report)}, summary


def _run_simulate(cfg: RunConfig, seed_override: int | None):
    s = cfg.scenario
    mc = cfg.monte_carlo
    seed = mc.seed if seed_override is None else seed_override
    report = equilibrium_report(s)
    result = simulate.run_monte_carlo(s, report.profile, mc.samples, seed, mc.chunks)
    analytic = report.oracle_cost
    header = ["samples", "seed", "empirical_mse", "standard_error", "analytic_mse"]
    rows = [[result.samples, result.seed, result.empirical_mse,
             result.standard_error, analytic]]
    extra = {
        "report": _report_to_json(report),
        "monte_carlo": dataclasses.asdict(result),
    }
    summary = (
        f"{s.setting.value}: empirical={result.empirical_mse:.6g} "
        f"(SE {result.standard_error:.2g}) analytic={analytic:.6g}"
    )
    return header, rows, extra, summary


def _run_verify(cfg: RunConfig):
    s = cfg.scenario
    report = equilibrium_report(s)
    adv, tx = simulate.verify_saddle_point(s, report.profile)
    header = ["direction", "base_cost", "best_deviation_cost", "deviation_params"]
    rows = [
        [adv.direction, adv.base_cost, adv.best_deviation_cost, adv.deviation_params],
        [tx.direction, tx.base_cost, tx.best_deviation_cost, tx.deviation_params],
    ]
    extra = {
        "report": _report_to_json(report),
        "adversary_check": dataclasses.asdict(adv),
        "transmitter_check": dataclasses.asdict(tx),
    }
    summary = (
        f"adversary best deviation {adv.best_deviation_cost:.6g} vs base {adv.base_cost:.6g}; "
        f"transmitter best deviation {tx.best_deviation_cost:.6g}"
    )
    return header, rows, extra, summary


def _run_ceo_curve(cfg: RunConfig):
    s = cfg.scenario
    betas = [p.beta for p in s.transmitters]
    if not betas:
        raise InvalidScenario("ceo-curve needs at least one transmitter")
    if cfg.sweep is not None and cfg.sweep.param == "rate":
        rates = _sweep_values(cfg.sweep)
    else:
        rates = [0.1 * i for i in range(101)]
    points = bounds.ceo_curve(rates, betas)
    header = ["rate", "distortion"]
    rows = [[pt.rate, pt.distortion] for pt in points]
    extra = {"estimation_floor": bounds.ceo_estimation_floor(betas),
             "sigma_t2": bounds.ceo_sigma_t(betas)}
    summary = f"{len(points)} rate-distortion points, floor={extra['estimation_floor']:.6g}"
    return header, rows, extra, summary


def _run_maxcorr(cfg: RunConfig):
    if cfg.sweep is not None and cfg.sweep.param == "rho":
        rhos = _sweep_values(cfg.sweep)
    else:
        rhos = [0.0, 0.3, 0.5, 0.9]
    header = ["rho", "rho_star", "abs_error"]
    rows = []
    for rho in rhos:
        star = bounds.maximal_correlation_discrete(rho)
        rows.append([rho, star, abs(star - abs(rho))])
    summary = f"max |rho_star - |rho|| = {max(r[2] for r in rows):.3g} over {len(rows)} points"
    return header, rows, {"grid_n": 257, "range_sigmas": 5.0}, summary


def _sweep_values(sw: SweepConfig) -> list[float]:
    if sw.steps == 1:
        return [sw.start]
    step = (sw.stop - sw.start) / (sw.steps - 1)
    return [sw.start + i * step for i in range(sw.steps)]


def _scenario_with(s: NetworkScenario, param: str, value: float) -> NetworkScenario:
    def redo_sensors(sensors, **kw):
        return tuple(dataclasses.replace(p, **kw) for p in sensors)

    if param in ("sum_power_attack", "P_A"):
        return dataclasses.replace(s, sum_power_attack=value)
    if param in ("sum_power_transmit", "P_T"):
        return dataclasses.replace(s, sum_power_transmit=value)
    if param in ("power", "P"):
        return dataclasses.replace(
            s,
            transmitters=redo_sensors(s.transmitters, power=value),
            adversaries=redo_sensors(s.adversaries, power=value),
        )
    if param == "alpha":
        return dataclasses.replace(
            s,
            transmitters=redo_sensors(s.transmitters, alpha=value),
            adversaries=redo_sensors(s.adversaries, alpha=value),
        )
    if param == "beta":
        return dataclasses.replace(
            s,
            transmitters=redo_sensors(s.transmitters, beta=value),
            adversaries=redo_sensors(s.adversaries, beta=value),
        )
    if param == "epsilon":
        return dataclasses.replace(s, epsilon=value)
    if param == "eta":
        return dataclasses.replace(s, eta=value)
    raise ParseError(f"sweep param {param!r} does not apply to a scenario")


def _run_sweep(cfg: RunConfig):
    sw = cfg.sweep
    header = ["param", "value", "cost_oracle"]
    rows = []
    notes: list[str] = []
    for value in _sweep_values(sw):
        scenario = validate_scenario(_scenario_with(cfg.scenario, sw.param, value))
        report = equilibrium_report(scenario)
        rows.append([sw.param, value, report.oracle_cost])
        notes.extend(report.discrepancy_notes)
    extra = {"discrepancy_notes": sorted(set(notes))}
    summary = f"swept {sw.param} over {len(rows)} points"
    return header, rows, extra, summary


def run_command(cfg: RunConfig, seed_override: int | None = None, out_override: str | None = None) -> int:
    """Dispatch, write `<out>.csv` and `<out>.json`, print a one-line summary."""
    out_stem = out_override or cfg.output_path
    if out_stem.endswith(".csv") or out_stem.endswith(".json"):
        out_stem = out_stem.rsplit(".", 1)[0]
    csv_path = Path(out_stem + ".csv")
    json_path = Path(out_stem + ".json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    payload: dict = {
        "command": cfg.command,
        "scenario": scenario_to_dict(cfg.scenario),
    }
    try:
        if cfg.command == "closed-form":
            header, rows, extra, summary = _run_closed_form(cfg)
        elif cfg.command == "solve-asym":
            header, rows, extra, summary = _run_solve_asym(cfg)
        elif cfg.command == "simulate":
            header, rows, extra, summary = _run_simulate(cfg, seed_override)
        elif cfg.command == "verify":
            header, rows, extra, summary = _run_verify(cfg)
        elif cfg.command == "ceo-curve":
            header, rows, extra, summary = _run_ceo_curve(cfg)
        elif cfg.command == "maxcorr":
            header, rows, extra, summary = _run_maxcorr(cfg)
        elif cfg.command == "sweep":
            header, rows, extra, summary = _run_sweep(cfg)
        else:  # pragma: no cover - parse_config rejects unknown commands
            raise ParseError(f"unknown command {cfg.command!r}")
    except (NonConvergence, SingularDenominator, NoRoot, NumericalFailure) as exc:
        payload["error"] = {
            "type": type(exc).__name__,
            "message": str(exc),
            "iterations": getattr(exc, "iterations", None),
            "residuals": list(getattr(exc, "residuals", ())),
        }
        json_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        print(f"jamnet {cfg.command}: FAILED ({type(exc).__name__}: {exc})")
        return 2

    report_json = extra.get("report", {})
    all_notes = list(report_json.get("discrepancy_notes", [])) + list(
        extra.get("discrepancy_notes", [])
    )
    payload.update(extra)
    payload["known_discrepancy_tags"] = _tags_in(all_notes)

    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    print(f"jamnet {cfg.command}: {summary} -> {csv_path}, {json_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jamnet",
        description="Equilibria of Gaussian sensor networks with jamming sensors",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON config document")
    parser.add_argument("--out", default=None, help="output stem (overrides config output_path)")
    parser.add_argument("--seed", type=int, default=None, help="override monte_carlo.seed")
    args = parser.parse_args(argv)

    try:
        document = Path(args.config).read_text()
    except OSError as exc:
        print(f"jamnet: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = parse_config(document, args.command)
    except (ParseError, InvalidScenario, InvalidProfile) as exc:
        print(f"jamnet: invalid config: {exc}", file=sys.stderr)
        return 1

    try:
        return run_command(cfg, seed_override=args.seed, out_override=args.out)
    except (ParseError, InvalidScenario, InvalidProfile) as exc:
        print(f"jamnet: invalid config: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
