"""Config-driven experiment runner.

Usage: smallbasis --config configs/example36.json --out results/ [--seed N] [--jobs N]
       [--allow-brackets]

Each task writes <id>.json and <id>.csv.  Exit codes: 0 every verdict passed, 1 some
verdict failed, 2 configuration error, 3 resource cap hit (or inexact result without
--allow-brackets).  A resource cap takes precedence over a verdict failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import jsonschema

from .chain import ideal_quotient_growth
from .lambdas import EnumerationCapError, lambda_q_exact, lambda_z_exact, verify_certificate
from .models import (
    BaseLocusError,
    ModelError,
    MonomialIdeal,
    MonomialModel,
    Weighted,
    build_model,
    corollary_b_check,
    predicted_small_span,
    small_section_chain,
    strictly_small_span,
    theorem_a_check,
)
from .norms import VertexCapError, eval_norm, four_space_norms, value_approx, value_str
from .random_instances import chain_instances, four_space_instances, sandwich_instances
from .reals import PrecisionError, number_to_json

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3

log = logging.getLogger("smallbasis")

# ---------------------------------------------------------------------------
# configuration schema

_RATIONAL = {"anyOf": [{"type": "integer"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_EXPONENTS = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 3}
_DEGREE = {"type": "integer", "minimum": 1}

_METRIC = {
    "oneOf": [
        {"type": "object", "required": ["kind", "beta", "gamma"], "additionalProperties": False,
         "properties": {"kind": {"const": "Weighted"}, "beta": _RATIONAL, "gamma": _RATIONAL}},
        {"type": "object", "required": ["kind", "a", "b"], "additionalProperties": False,
         "properties": {"kind": {"const": "WeightedGeneral"}, "a": _RATIONAL, "b": _RATIONAL}},
        {"type": "object", "required": ["kind"], "additionalProperties": False,
         "properties": {"kind": {"const": "FubiniStudy"}, "tau": _RATIONAL,
                        "t_power": {"enum": ["n", "1"]}, "blowup": {"type": "boolean"}}},
    ]
}

_MODEL = {
    "type": "object",
    "required": ["space", "metric", "max_degree"],
    "additionalProperties": False,
    "properties": {"space": {"enum": ["P1", "P2"]}, "metric": _METRIC, "max_degree": _DEGREE},
}

_COUNT = {"type": "integer", "minimum": 0, "maximum": 100000}

_TASK_PARAMS = {
    "lemma12": {"count": _COUNT, "poly_count": _COUNT},
    "lemma11": {"count": _COUNT, "vectors": _COUNT},
    "prop14": {"count": _COUNT},
    "prop23": {"I": {"type": "array", "items": _EXPONENTS}, "J": {"type": "array", "items": _EXPONENTS},
               "K": {"type": "array", "items": _EXPONENTS}, "max_degree": _DEGREE,
               "A": _RATIONAL, "e": _RATIONAL},
    "spans": {"max_degree": _DEGREE},
    "theoremA": {"sections": {"type": "array", "minItems": 1, "items": _EXPONENTS}, "N": _DEGREE},
    "corollaryB": {"n0": {"anyOf": [_DEGREE, {"type": "array", "items": _DEGREE, "minItems": 1}]},
                   "N": _DEGREE},
    "chain": {"s": _EXPONENTS, "n": _DEGREE, "n1": _DEGREE,
              "ideals": {"type": "array", "items": {"type": "array", "items": _EXPONENTS}}},
}

_REQUIRED = {"prop23": ["I", "J", "K"], "theoremA": ["sections"], "chain": ["s", "n"]}
_NEEDS_MODEL = {"prop23", "spans", "theoremA", "corollaryB", "chain"}


def _task_schema(kind: str) -> dict:
    props = {"kind": {"const": kind}, "id": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
             "model": _MODEL}
    props.update(_TASK_PARAMS[kind])
    return {"type": "object", "required": ["kind"] + _REQUIRED.get(kind, []),
            "additionalProperties": False, "properties": props}


CONFIG_SCHEMA = {
    "type": "object",
    "required": ["tasks"],
    "additionalProperties": False,
    "properties": {
        "model": _MODEL,
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
        "tasks": {"type": "array", "items": {"type": "object", "required": ["kind"],
                                             "properties": {"kind": {"enum": sorted(_TASK_PARAMS)}}}},
    },
}


class ConfigError(ValueError):
    pass


def _format_path(path) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


def validate_config(cfg: Any) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
        for i, task in enumerate(cfg["tasks"]):
            try:
                jsonschema.validate(task, _task_schema(task["kind"]))
            except jsonschema.ValidationError as exc:
                exc.path.appendleft(i)
                exc.path.appendleft("tasks")
                raise
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{_format_path(exc.absolute_path)}: {exc.message}") from None
    ids = [t["id"] for t in task_list(cfg)]
    if len(set(ids)) != len(ids):
        raise ConfigError("$.tasks: task ids are not unique")
    for i, task in enumerate(cfg["tasks"]):
        if task["kind"] in _NEEDS_MODEL and "model" not in task and "model" not in cfg:
            raise ConfigError(f"$.tasks[{i}]: task needs a model")
        try:
            model = _model(cfg, task)
        except ModelError as exc:
            raise ConfigError(f"$.tasks[{i}].model: {exc}") from None
        if task["kind"] == "spans" and (model is None or not isinstance(model.metric, Weighted)):
            raise ConfigError(f"$.tasks[{i}]: spans needs a P1 Weighted model")


def task_list(cfg: dict) -> list[dict]:
    out = []
    for i, task in enumerate(cfg["tasks"]):
        t = dict(task)
        t.setdefault("id", f"{i:02d}-{task['kind']}")
        out.append(t)
    return out


def _model(cfg: dict, task: dict) -> MonomialModel | None:
    spec = task.get("model", cfg.get("model"))
    return None if spec is None else MonomialModel.from_json(spec)


# ---------------------------------------------------------------------------
# reports

@dataclass
class TaskReport:
    task_id: str
    kind: str
    verdict: bool
    exact: bool = True
    capped: bool = False
    result: dict = field(default_factory=dict)
    witness: Any = None
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)  # dicts; exact numbers become str + _approx columns

    def to_json(self, params: dict, seed: int) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.task_id,
            "kind": self.kind,
            "seed": seed,
            "params": params,
            "verdict": self.verdict,
            "exact": self.exact,
            "capped": self.capped,
            "witness": self.witness,
            "result": self.result,
        }


def _is_number(x) -> bool:
    return not isinstance(x, (bool, str, int, list, tuple, dict, type(None)))


def _csv_table(rep: TaskReport) -> list[list[str]]:
    header = []
    numeric = set()
    for c in rep.columns:
        header.append(c)
        if any(_is_number(r.get(c)) for r in rep.rows):
            numeric.add(c)
            header.append(f"{c}_approx")
    out = [header]
    for r in rep.rows:
        line = []
        for c in rep.columns:
            v = r.get(c)
            if c in numeric:
                line.append("" if v is None else value_str(v))
                line.append("" if v is None else value_approx(v, 20))
            elif isinstance(v, bool):
                line.append("yes" if v else "no")
            elif isinstance(v, (list, tuple)):
                line.append(" ".join(str(x) for x in v))
            else:
                line.append("" if v is None else str(v))
        out.append(line)
    return out


def write_report(rep: TaskReport, params: dict, seed: int, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{rep.task_id}.json", "w") as fh:
        json.dump(rep.to_json(params, seed), fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(out_dir / f"{rep.task_id}.csv", "w", newline="") as fh:
        csv.writer(fh).writerows(_csv_table(rep))


def _j(x):
    return None if x is None else number_to_json(x)


# ---------------------------------------------------------------------------
# task runners

def _task_seed(seed: int, task_id: str) -> int:
    return random.Random(f"{seed}:{task_id}").getrandbits(63)


def run_lemma12(task, model, seed) -> TaskReport:
    rep = TaskReport(task["id"], "lemma12", True,
                     columns=["instance", "rank", "lambda_q", "lambda_z", "rank_times_lambda_q", "ok"])
    failures = []
    for i, m in enumerate(sandwich_instances(seed, task.get("count", 150), task.get("poly_count", 50))):
        q, z = lambda_q_exact(m), lambda_z_exact(m)
        if not (q.exact and z.exact):
            rep.exact = False
            rep.rows.append({"instance": i, "rank": m.rank, "ok": False})
            continue
        ok = (q.value <= z.value <= m.rank * q.value
              and verify_certificate(q.certificate, m) and verify_certificate(z.certificate, m))
        if not ok:
            failures.append({"instance": i, "q_basis": [[str(x) for x in v] for v in q.certificate.vectors],
                             "z_basis": [[str(x) for x in v] for v in z.certificate.vectors]})
        rep.rows.append({"instance": i, "rank": m.rank, "lambda_q": q.value, "lambda_z": z.value,
                         "rank_times_lambda_q": m.rank * q.value, "ok": ok})
    rep.verdict = not failures
    rep.witness = failures or None
    rep.result = {"instances": len(rep.rows), "failures": len(failures)}
    return rep


def run_lemma11(task, model, seed) -> TaskReport:
    rep = TaskReport(task["id"], "lemma11", True,
                     columns=["instance", "ambient", "rank_t", "rank_u", "rank_w", "vectors", "mismatches"])
    failures = []
    for i, ins in enumerate(four_space_instances(seed, task.get("count", 100), task.get("vectors", 20))):
        fs = four_space_norms(ins.norm, ins.t, ins.u, ins.w)
        bad = 0
        for v in ins.vectors:
            a, b = fs.evaluate(v)
            if a != b:
                bad += 1
                failures.append({"instance": i, "vector": list(v), "first": _j(a), "second": _j(b)})
        rep.rows.append({"instance": i, "ambient": ins.w.ambient_dim, "rank_t": ins.t.rank,
                         "rank_u": ins.u.rank, "rank_w": ins.w.rank, "vectors": len(ins.vectors),
                         "mismatches": bad})
    rep.verdict = not failures
    rep.witness = failures or None
    rep.result = {"instances": len(rep.rows), "mismatches": len(failures)}
    return rep


def run_prop14(task, model, seed) -> TaskReport:
    from .chain import chain_lambda_bound

    rep = TaskReport(task["id"], "prop14", True,
                     columns=["instance", "ranks", "bound", "max_norm", "lambda_q", "q_basis", "ok"])
    failures = []
    for i, c in enumerate(chain_instances(seed, task.get("count", 100))):
        res = chain_lambda_bound(c)
        lq = lambda_q_exact(c.top)
        rep.exact = rep.exact and res.exact and lq.exact
        top = lq.value if lq.exact else lq.lower
        max_norm = max((eval_norm(c.top.norm, v) for v in res.basis), default=Fraction(0))
        qb = res.is_q_basis(c.top.module)
        ok = qb and max_norm <= res.bound and top <= res.bound
        if not ok:
            failures.append({"instance": i, "basis": [[str(x) for x in v] for v in res.basis],
                             "bound": _j(res.bound)})
        rep.rows.append({"instance": i, "ranks": [m.rank for m in c.modules], "bound": res.bound,
                         "max_norm": max_norm, "lambda_q": top, "q_basis": qb, "ok": ok})
    rep.verdict = not failures
    rep.witness = failures or None
    rep.result = {"instances": len(rep.rows), "failures": len(failures)}
    return rep


def _ideal(gens) -> MonomialIdeal:
    return MonomialIdeal(tuple(tuple(g) for g in gens))


def run_prop23(task, model, seed) -> TaskReport:
    ring = build_model(model)
    top = task.get("max_degree", ring.max_degree)
    kwargs = {}
    if "A" in task:
        kwargs["A"] = Fraction(task["A"])
    rep23 = ideal_quotient_growth(ring, _ideal(task["I"]), _ideal(task["J"]), _ideal(task["K"]),
                                  range(1, top + 1), e=Fraction(task.get("e", 0)), **kwargs)
    rep = TaskReport(task["id"], "prop23", rep23.verdict, exact=rep23.extra.get("exact", True),
                     columns=["n", "lambda_q", "bound", "ratio"], result=rep23.to_json())
    for n, v, b, r in zip(rep23.degrees, rep23.values, rep23.bounds, rep23.ratios):
        rep.rows.append({"n": n, "lambda_q": v, "bound": b, "ratio": r})
    if not rep23.verdict:
        rep.witness = [{"n": n, "lambda_q": _j(v), "bound": _j(b)}
                       for n, v, b in zip(rep23.degrees, rep23.values, rep23.bounds)
                       if n >= rep23.checked_from and not v <= b]
    return rep


def run_spans(task, model, seed) -> TaskReport:
    top = min(task.get("max_degree", model.max_degree), model.max_degree)
    rep = TaskReport(task["id"], "spans", True,
                     columns=["d", "strict_computed", "strict_predicted", "weak_computed",
                              "weak_predicted", "equal"])
    bad = []
    for d in range(1, top + 1):
        sc, sp = strictly_small_span(model, d, True), predicted_small_span(model, d, True)
        wc, wp = strictly_small_span(model, d, False), predicted_small_span(model, d, False)
        eq = sc.same_as(sp) and wc.same_as(wp)
        if not eq:
            bad.append(d)

        def idx(lat):
            return [next(i for i, x in enumerate(row) if x) for row in lat.hnf().basis]

        rep.rows.append({"d": d, "strict_computed": idx(sc), "strict_predicted": idx(sp),
                         "weak_computed": idx(wc), "weak_predicted": idx(wp), "equal": eq})
    rep.verdict = not bad
    rep.witness = [{"degree": d} for d in bad] or None
    rep.result = {"degrees": top, "mismatched_degrees": bad}
    return rep


_GRADED_COLUMNS = ["n", "rank", "lambda_q", "lambda_z", "bound", "B_n", "strictly_small_basis"]


def run_theorem_a(task, model, seed) -> TaskReport:
    ring = build_model(model)
    sections = [tuple(s) for s in task["sections"]]
    N = min(task.get("N", ring.max_degree), ring.max_degree)
    rep = TaskReport(task["id"], "theoremA", True, columns=list(_GRADED_COLUMNS))
    try:
        ta = theorem_a_check(ring, sections, N)
    except BaseLocusError as exc:
        rep.verdict = False
        rep.witness = {"base_locus": [l.name for l in exc.loci]}
        rep.result = {"error": str(exc)}
        return rep
    ex = ta.extra
    for i, n in enumerate(ta.degrees):
        rep.rows.append({"n": n, "rank": ex["ranks"][i], "lambda_q": _num(ex["lambda_q"][i]),
                         "lambda_z": ta.values[i], "bound": ta.bounds[i], "B_n": _num(ex["B_z"][i]),
                         "strictly_small_basis": ex["strictly_small"][i]})
    rep.verdict = ta.verdict
    rep.exact = ex["exact"]
    rep.result = ta.to_json()
    if not ta.verdict:
        rep.witness = {"B_z": ex["B_z"], "B_q": ex["B_q"]}
    return rep


def _num(obj):
    from .reals import from_json
    return from_json(obj)


def run_corollary_b(task, model, seed) -> TaskReport:
    ring = build_model(model)
    n0s = task.get("n0", 1)
    n0s = [n0s] if isinstance(n0s, int) else list(n0s)
    N = min(task.get("N", ring.max_degree), ring.max_degree)
    rep = TaskReport(task["id"], "corollaryB", True, columns=list(_GRADED_COLUMNS) + ["n0"])
    reports = []
    for n0 in n0s:
        cb = corollary_b_check(ring, n0, N)
        reports.append(cb.to_json())
        rep.verdict = rep.verdict and cb.verdict
        for d in cb.degrees:
            rep.rows.append({"n0": n0, "n": d.degree, "rank": d.rank, "lambda_z": d.lambda_z,
                             "strictly_small_basis": d.strictly_small})
        if not cb.hypothesis_holds:
            rep.witness = (rep.witness or []) + [{"n0": n0, "locus": [l.name for l in cb.obstruction]}]
    rep.result = {"reports": reports}
    return rep


def run_chain(task, model, seed) -> TaskReport:
    ring = build_model(model)
    ideals = None
    if "ideals" in task:
        ideals = [_ideal(g) for g in task["ideals"]]
    n = task["n"]
    sc = small_section_chain(ring, tuple(task["s"]), n, task.get("n1", 1), ideals)
    res = sc.result
    lq = lambda_q_exact(ring.component(n))
    top = lq.value if lq.exact else lq.lower
    ok = (res.max_norm <= res.bound and top <= res.bound and sc.op_norms_ok
          and all(v == 0 for v in sc.collapse_ranks.values()) and res.is_q_basis(ring.component(n).module))
    rep = TaskReport(task["id"], "chain", ok, exact=res.exact and lq.exact,
                     columns=["module", "rows", "op_norm", "s_norm_power"])
    for i, rows, op, bound in sc.op_norms:
        rep.rows.append({"module": i, "rows": rows, "op_norm": op, "s_norm_power": bound})
    rep.result = {
        "bound": _j(res.bound),
        "max_norm": _j(res.max_norm),
        "lambda_q_top": _j(top),
        "collapse_ranks": {str(k): v for k, v in sorted(sc.collapse_ranks.items())},
        "op_norms_ok": sc.op_norms_ok,
        "chain": res.to_json(),
    }
    if not ok:
        rep.witness = {"bound": _j(res.bound), "max_norm": _j(res.max_norm), "lambda_q_top": _j(top)}
    return rep


RUNNERS: dict[str, Callable] = {
    "lemma12": run_lemma12,
    "lemma11": run_lemma11,
    "prop14": run_prop14,
    "prop23": run_prop23,
    "spans": run_spans,
    "theoremA": run_theorem_a,
    "corollaryB": run_corollary_b,
    "chain": run_chain,
}


def run_task(cfg: dict, task: dict, seed: int) -> TaskReport:
    model = _model(cfg, task)
    tseed = _task_seed(seed, task["id"])
    try:
        return RUNNERS[task["kind"]](task, model, tseed)
    except (EnumerationCapError, VertexCapError, PrecisionError) as exc:
        return TaskReport(task["id"], task["kind"], False, exact=False, capped=True,
                          witness={"resource": type(exc).__name__, "detail": str(exc)})


def _params(task: dict) -> dict:
    return {k: v for k, v in sorted(task.items()) if k not in ("id", "kind")}


# ---------------------------------------------------------------------------
# entry point

def run(cfg: dict, seed: int = 0, out: Path | None = None, allow_brackets: bool = False,
        jobs: int = 1) -> tuple[int, list[TaskReport]]:
    validate_config(cfg)
    tasks = task_list(cfg)
    if not tasks:
        return EXIT_OK, []
    out = Path(out if out is not None else cfg.get("output", "results"))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_task, [cfg] * len(tasks), tasks, [seed] * len(tasks)))
    else:
        reports = [run_task(cfg, t, seed) for t in tasks]
    status = EXIT_OK
    for task, rep in sorted(zip(tasks, reports), key=lambda p: p[0]["id"]):
        write_report(rep, _params(task), seed, out)
        if rep.capped or (not rep.exact and not allow_brackets):
            status = EXIT_CAP
            print(f"{rep.task_id}: resource cap or inexact result: {json.dumps(rep.witness, sort_keys=True)}",
                  file=sys.stderr)
        elif not rep.verdict:
            if status == EXIT_OK:
                status = EXIT_VERDICT
            print(f"{rep.task_id}: verdict failed; witness {json.dumps(rep.witness, sort_keys=True)}",
                  file=sys.stderr)
        log.info("%s %s verdict=%s exact=%s", rep.task_id, rep.kind, rep.verdict, rep.exact)
    return status, reports


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="smallbasis", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, type=Path, help="experiment config (JSON)")
    ap.add_argument("--seed", type=int, default=None, help="seed for randomized suites (u64)")
    ap.add_argument("--out", type=Path, default=None, help="report directory")
    ap.add_argument("--allow-brackets", action="store_true",
                    help="accept lambda brackets when enumeration caps are hit")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 1 << 64:
        print("config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("config error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else (cfg.get("seed", 0) if isinstance(cfg, dict) else 0)
    try:
        status, _ = run(cfg, seed, args.out, args.allow_brackets, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return status


if __name__ == "__main__":
    sys.exit(main())
