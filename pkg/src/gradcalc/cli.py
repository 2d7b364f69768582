"""Batch runner: load a model file, run check suites, print a deterministic report.

Exit status: 0 when every check passes, 1 when some identity fails, 2 on a
configuration or infrastructure error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .core import Check

SCHEMA_VERSION = 1
MODEL_KEYS = {"group", "dimension", "metric_mode", "xi", "fermion_mass", "sectors_enabled", "validate_group"}
BUILTIN_MODELS = ("u1", "su2", "su3")


class ConfigError(Exception):
    """Bad command line, model file or check list (exit status 2)."""


@dataclass
class RunConfig:
    model_path: str = "su2"
    checks: list = field(default_factory=lambda: ["all"])
    seed: int = 0
    report_format: str = "text"
    metric_mode: str | None = None
    jobs: int = 1
    timings: bool = False


# --------------------------------------------------------------------------
# model loading
# --------------------------------------------------------------------------

def read_model_dict(path: str) -> dict:
    """Parse a model file (or a built-in alias) and apply defaults; no validation."""
    if path in BUILTIN_MODELS and not Path(path).exists():
        text = resources.files("gradcalc").joinpath(f"data/models/{path}.json").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read model file {path!r}: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file {path!r} is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError("the model file must hold a JSON object")
    unknown = set(d) - MODEL_KEYS
    if unknown:
        raise ConfigError(f"unknown model keys {sorted(unknown)}")
    d.setdefault("sectors_enabled", ["fermion", "gauge", "ghost"])
    return d


def build_model(d: dict):
    from .ym_brst import model_from_dict

    try:
        return model_from_dict(d)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise ConfigError(f"invalid model: {exc}") from None


def load_model(path: str, metric_mode: str | None = None):
    """Load, validate and build a FieldModel.

    The Lie data is checked on load; a failing axiom is a configuration error
    unless the file sets ``"validate_group": false``.
    """
    d = read_model_dict(path)
    if metric_mode:
        d["metric_mode"] = metric_mode
    fm, report = build_model(d)
    failed = [c for c in report if not c.passed]
    if failed and d.get("validate_group", True):
        raise ConfigError("; ".join(f"{c.name} failed: {c.witness}" for c in failed))
    return fm


# --------------------------------------------------------------------------
# check registry
# --------------------------------------------------------------------------

def _fock_axioms(fm, rng):
    from .fock import check_fock_axioms

    return check_fock_axioms(rng, n_cases=20)


def _fock_normal_order(fm, rng):
    from .fock import check_normal_order

    return check_normal_order(rng, n_cases=20)


def _fock_lattice(fm, rng):
    from .fock import BOSON, FERMION, charge_commutator_check, free_field_check

    out = []
    for stats in (FERMION, BOSON):
        for N in (2, 3):
            out += free_field_check(N, 1, stats)
    rotation = [[0, -1], [1, 0]]
    for stats in (BOSON, FERMION):
        out += charge_commutator_check(2, rotation, stats)
    return out


def _ring_properties(fm, rng):
    from .jetring import check_ring_properties

    return check_ring_properties(rng, 25, m=2) + [
        c._replace(name=c.name + "[m=4]") for c in check_ring_properties(rng, 25, m=4)]


def _dH_nilpotent(fm, rng):
    from .varcalc import check_dH_nilpotent

    return check_dH_nilpotent(rng, 50)


def _dH_delta_commute(fm, rng):
    from .varcalc import check_dH_delta_commute

    return check_dH_delta_commute(rng, 50)


def _splitting(fm, rng):
    from .varcalc import check_el_trivial, check_splitting

    return check_splitting(rng, 25) + check_el_trivial(rng)


def _el_oracle(fm, rng):
    from .varcalc import euler_lagrange_oracle

    return euler_lagrange_oracle()


def _lie_algebra(fm, rng):
    from .ym_brst import validate_lie_algebra

    return validate_lie_algebra(fm.lie)


def _lagrangian_variants(fm):
    """Fermions need the flat background: split a formal model with fermions in two."""
    if fm.metric_mode == "formal" and fm.has("fermion"):
        return [("formal", fm.variant(sectors=fm.sectors - {"fermion"})),
                ("constant", fm.variant(metric_mode="constant"))]
    return [("", fm)]


def _per_variant(fm, fn):
    out = []
    for tag, sub in _lagrangian_variants(fm):
        out += [c._replace(name=f"{c.name}[{tag}]") if tag else c for c in fn(sub)]
    return out


def _nilpotency(fm, rng):
    from .ym_brst import check_nilpotent

    return check_nilpotent(fm, rng, 50)


def _theta_S(fm, rng):
    from .ym_brst import check_theta_S

    return check_theta_S(fm, rng, 50)


def _ghost_exactness(fm, rng):
    from .ym_brst import ghost_exactness

    return ghost_exactness(fm)[2]


def _gauge_invariance(fm, rng):
    from .ym_brst import gauge_invariance

    return gauge_invariance(fm.variant(metric_mode="constant"))


def _brst_current(fm, rng):
    from .ym_brst import brst_current

    return _per_variant(fm, lambda sub: brst_current(sub)[1])


def _faddeev_popov(fm, rng):
    from .ym_brst import fp_current

    return _per_variant(fm, fp_current)


def _second_order(fm, rng):
    from .ym_brst import second_order_equivalence

    return _per_variant(fm, second_order_equivalence)


def _dirac(fm, rng):
    from .ym_brst import check_dirac_projectors, on_shell_momenta

    m = fm.dim if fm.dim in (2, 4) else 4
    moms = on_shell_momenta(24, m)
    results: dict = {}
    order = []
    for p, mass in moms:
        for c in check_dirac_projectors(p, mass):
            if c.name not in results:
                order.append(c.name)
                results[c.name] = c._replace(witness="")
            if not c.passed and results[c.name].passed:
                results[c.name] = c
    out = [Check("dirac.momenta_count", len(moms) >= 20, f"{len(moms)} momenta")]
    return out + [results[k] for k in order]


# name -> (function, required sectors)
CHECKS = {
    "fock_axioms": (_fock_axioms, ()),
    "fock_normal_order": (_fock_normal_order, ()),
    "fock_lattice": (_fock_lattice, ()),
    "ring_properties": (_ring_properties, ()),
    "dH_nilpotent": (_dH_nilpotent, ()),
    "dH_delta_commute": (_dH_delta_commute, ()),
    "splitting": (_splitting, ()),
    "euler_lagrange_oracle": (_el_oracle, ()),
    "lie_algebra": (_lie_algebra, ()),
    "nilpotency": (_nilpotency, ()),
    "theta_S_delta": (_theta_S, ()),
    "ghost_exactness": (_ghost_exactness, ("ghost",)),
    "gauge_invariance": (_gauge_invariance, ()),
    "brst_current": (_brst_current, ()),
    "faddeev_popov": (_faddeev_popov, ("ghost",)),
    "second_order": (_second_order, ("ghost",)),
    "dirac_projectors": (_dirac, ()),
}


def resolve_checks(names) -> list[str]:
    flat = []
    for item in names:
        flat += [x.strip() for x in str(item).split(",") if x.strip()]
    if not flat or "all" in flat:
        return list(CHECKS)
    unknown = [x for x in flat if x not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check(s) {unknown}; use --list-checks")
    seen = []
    for x in flat:
        if x not in seen:
            seen.append(x)
    return seen


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

def _run_one(model_dict: dict, name: str, seed: int) -> dict:
    fm, _ = build_model(model_dict)
    fn, needs = CHECKS[name]
    missing = [s for s in needs if not fm.has(s)]
    if missing:
        return {"name": name, "status": "skipped", "reason": f"model lacks sector(s) {missing}",
                "results": [], "seconds": 0.0}
    rng = random.Random(f"{seed}:{name}")
    t0 = time.perf_counter()
    try:
        results = fn(fm, rng)
    except (ValueError, ArithmeticError) as exc:
        results = [Check(f"{name}.error", False, f"{type(exc).__name__}: {exc}")]
    dt = time.perf_counter() - t0
    status = "pass" if all(c.passed for c in results) else "fail"
    return {"name": name, "status": status, "results": [c.as_dict() for c in results], "seconds": dt}


def run(config: RunConfig) -> dict:
    """Execute the configured checks and assemble the report (order follows the check list)."""
    names = resolve_checks(config.checks)
    d = read_model_dict(config.model_path)
    if config.metric_mode:
        if config.metric_mode not in ("constant", "formal"):
            raise ConfigError("--metric must be 'constant' or 'formal'")
        d["metric_mode"] = config.metric_mode
    load_model(config.model_path, config.metric_mode)  # validates (raises ConfigError)
    if config.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_run_one, d, n, config.seed) for n in names]
            entries = [f.result() for f in futures]
    else:
        entries = [_run_one(d, n, config.seed) for n in names]
    for e in entries:
        seconds = e.pop("seconds")
        if config.timings:
            e["seconds"] = round(seconds, 3)
        failed = [r for r in e["results"] if not r["passed"]]
        e["witness"] = failed[0]["witness"] if failed else ""
    summary = {s: sum(e["status"] == s for e in entries) for s in ("pass", "fail", "skipped")}
    summary["total"] = len(entries)
    model = {k: d[k] for k in sorted(d)}
    return {"schema_version": SCHEMA_VERSION, "model": model, "seed": config.seed,
            "checks": entries, "summary": summary}


def format_text(report: dict) -> str:
    m = report["model"]
    group = m["group"] if isinstance(m["group"], str) else "inline"
    lines = [
        f"gradcalc report (schema {report['schema_version']})",
        f"model: group={group} dimension={m.get('dimension', 4)} metric={m.get('metric_mode', 'constant')} "
        f"sectors={','.join(m['sectors_enabled'])}",
        f"seed: {report['seed']}",
    ]
    for e in report["checks"]:
        ok = sum(r["passed"] for r in e["results"])
        head = f"{e['status'].upper():7s} {e['name']}"
        if e["status"] == "skipped":
            head += f" ({e['reason']})"
        else:
            head += f" ({ok}/{len(e['results'])})"
        if "seconds" in e:
            head += f" {e['seconds']:.3f}s"
        lines.append(head)
        for r in e["results"]:
            lines.append(f"    {'ok  ' if r['passed'] else 'FAIL'} {r['name']}")
            if not r["passed"] and r["witness"]:
                lines.append(f"         {r['witness']}")
    s = report["summary"]
    lines.append(f"summary: {s['pass']} passed, {s['fail']} failed, {s['skipped']} skipped, {s['total']} total")
    return "\n".join(lines) + "\n"


def format_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return format_text(report)


def exit_status(report: dict) -> int:
    return 1 if report["summary"]["fail"] else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gradcalc", description="Run exact identity checks on a gauge-theory model.")
    p.add_argument("--model", default="su2",
                   help="model JSON file or a built-in alias (u1, su2, su3); default su2")
    p.add_argument("--check", action="append", default=None,
                   help="check name, comma list or 'all' (repeatable; default all)")
    p.add_argument("--seed", type=int, default=0, help="seed for the randomized corpora")
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.add_argument("--metric", choices=("constant", "formal"), default=None, help="override the model metric mode")
    p.add_argument("--jobs", type=int, default=1, help="checks run in parallel processes")
    p.add_argument("--list-checks", action="store_true", help="print check names and exit")
    p.add_argument("--timings", action="store_true", help="include wall times (reports stop being reproducible)")
    p.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_checks:
        for name, (fn, needs) in CHECKS.items():
            extra = f"  (needs {', '.join(needs)})" if needs else ""
            print(f"{name}{extra}")
        return 0
    config = RunConfig(args.model, args.check or ["all"], args.seed, args.report, args.metric,
                       max(1, args.jobs), args.timings)
    try:
        report = run(config)
    except ConfigError as exc:
        print(f"gradcalc: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # infrastructure failure: keep the exit-code contract
        print(f"gradcalc: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = format_report(report, config.report_format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return exit_status(report)


if __name__ == "__main__":
    sys.exit(main())
