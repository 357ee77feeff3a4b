"""Command line front end. Reads a JSON job (file or stdin), runs one mode and
writes JSON to stdout; a short human summary goes to stderr.

Exit codes: 0 success, 2 hypothesis violation, 1 internal error, 64 bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from sympy import factorint

from .base_field import IdealL
from .bounds import BoundInput, candidate_primes, ceilings, crude_bound
from .cm_field import (CMField, IdealK, class_group, cm_field_from_json, ideal_from_json,
                       roots_of_unity_count)
from .counting import coincidence_total, gz1_valuation
from .errors import CMError, HypothesisViolation
from .orders import (all_sign_vectors, build_order, default_signs, make_context,
                     order_discriminant, orders_equal)
from .reciprocity import eligibility

EXIT_OK, EXIT_INTERNAL, EXIT_HYPOTHESIS, EXIT_USAGE = 0, 1, 2, 64
MODES = ("bound", "classify", "coincide", "classgroup", "gz1", "dump-order")


class UsageError(Exception):
    pass


@dataclass
class JobSpec:
    mode: str
    K: Optional[dict] = None
    Kprime: Optional[dict] = None
    p: Optional[int] = None
    n: int = 1
    multiplicity: Optional[int] = None
    d: Optional[int] = None
    dprime: Optional[int] = None
    ideal: Optional[dict] = None
    signs: Optional[List[int]] = None
    distinct: bool = False
    config: Dict[str, int] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.config.get("search_seed", 0))

    @property
    def alpha0_budget(self) -> int:
        return int(self.config.get("alpha0_budget", 200000))

    @property
    def relation_budget(self) -> int:
        return int(self.config.get("relation_budget", 4000))


def _opt_int(v) -> Optional[int]:
    return None if v is None else int(v)


def parse_job(data: dict, mode: Optional[str] = None) -> JobSpec:
    if not isinstance(data, dict):
        raise UsageError("job must be a JSON object")
    mode = mode or data.get("mode")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {', '.join(MODES)}")
    cfg = dict(data.get("config", {}))
    for k in ("alpha0_budget", "relation_budget", "search_seed"):
        if k in data:
            cfg[k] = data[k]
    try:
        job = JobSpec(mode=mode, K=data.get("K", data.get("K1")),
                      Kprime=data.get("Kprime", data.get("K2")), p=_opt_int(data.get("p")),
                      n=int(data.get("n", 1)), multiplicity=_opt_int(data.get("multiplicity")),
                      d=_opt_int(data.get("d")), dprime=_opt_int(data.get("dprime")),
                      ideal=data.get("ideal"), signs=data.get("signs"),
                      distinct=bool(data.get("distinct", False)),
                      config={k: int(v) for k, v in cfg.items()})
    except (TypeError, ValueError) as e:
        raise UsageError(f"bad field value: {e}") from e
    need = {"bound": ["K", "Kprime"], "classify": ["K", "p"], "coincide": ["K", "Kprime"],
            "classgroup": ["K"], "gz1": ["d", "dprime"], "dump-order": ["K", "p"]}[mode]
    missing = [k for k in need if getattr(job, k) is None]
    if missing:
        raise UsageError(f"mode {mode} needs {', '.join(missing)}")
    return job


def _field(data: dict) -> CMField:
    if not isinstance(data, dict) or "D" not in data:
        raise UsageError("field JSON needs D and either a, b or radicand")
    try:
        return cm_field_from_json(data)
    except (KeyError, TypeError) as e:
        raise UsageError(f"bad field JSON: {e}") from e


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

def do_bound(job: JobSpec) -> dict:
    B = BoundInput(_field(job.K), _field(job.Kprime))
    b = crude_bound(B)
    return {"bound": str(b), "ceilings": {k: str(v) for k, v in ceilings(B).items()},
            "candidates": [c.to_json() for c in candidate_primes(B)]}


def do_classgroup(job: JobSpec) -> dict:
    K = _field(job.K)
    G = class_group(K, relation_budget=job.relation_budget)
    return {"h": str(G.order), "structure": [str(s) for s in G.structure],
            "w": str(roots_of_unity_count(K)),
            "representatives": [I.to_json() for I in G.representatives]}


def do_classify(job: JobSpec) -> dict:
    K = _field(job.K)
    ok, reason = eligibility(K, job.p)
    out: Dict[str, Any] = {"p": str(job.p), "eligible": ok, "reason": reason}
    if not ok:
        raise HypothesisViolation("ineligible prime", f"p={job.p}: {reason}")
    ctx = make_context(K, job.p, job.n, seed=job.seed, budget=job.alpha0_budget)
    G = class_group(K, avoid=_avoid(ctx), relation_budget=job.relation_budget)
    orders, classes = [], []
    for c, a in zip(G.rep_classes, G.representatives):
        R = build_order(ctx, a)
        orders.append(R)
        classes.append({"class": [str(v) for v in c], "ideal": a.to_json(),
                        "signs": list(default_signs(ctx, a)), "lambda": R.lam.to_json(),
                        "discriminant": order_discriminant(R).generator.to_json()})
    distinct = all(not orders_equal(orders[i], orders[j])
                   for i in range(len(orders)) for j in range(i + 1, len(orders)))
    out.update({"alpha0": ctx.alpha0.to_json(), "h": str(G.order), "classes": classes,
                "pairwise_distinct": distinct})
    return out


def _avoid(ctx):
    return IdealL.of(ctx.alpha0 * ctx.K.d * ctx.p)


def do_dump_order(job: JobSpec) -> dict:
    K = _field(job.K)
    ctx = make_context(K, job.p, job.n, seed=job.seed, budget=job.alpha0_budget)
    a = ideal_from_json(K, job.ideal) if job.ideal else IdealK.unit(K)
    signs = tuple(job.signs) if job.signs else None
    if signs is not None and signs not in all_sign_vectors(ctx):
        raise UsageError("signs must be a vector of +-1, one per prime dividing d")
    R = build_order(ctx, a, signs)
    out = R.to_json()
    out.update({"p": str(job.p), "n": str(job.n), "alpha0": ctx.alpha0.to_json(),
                "lambda": R.lam.to_json(), "signs": list(R.label[1]), "ideal": a.to_json()})
    return out


def do_coincide(job: JobSpec) -> dict:
    K, Kp = _field(job.K), _field(job.Kprime)
    rep = coincidence_total(K, Kp, job.p, job.n, job.multiplicity, seed=job.seed,
                            budget=job.alpha0_budget, relation_budget=job.relation_budget,
                            allow_same=not job.distinct)
    _log(f"p={job.p}: eligible={rep.eligible} total={rep.total} "
         + " ".join(f"{k}={v:.2f}s" for k, v in rep.timings.items()))
    return rep.to_json()


def scan(job: JobSpec, out=None):
    """One JSON line per candidate prime, in ascending order."""
    out = out or sys.stdout
    K, Kp = _field(job.K), _field(job.Kprime)
    if job.distinct and K.same_order(Kp):
        raise HypothesisViolation("distinct fields", "K and K' coincide")
    for c in candidate_primes(BoundInput(K, Kp)):
        entry: Dict[str, Any] = {"p": str(c.p), "behavior": c.behavior}
        if c.notes:
            entry.update({"eligible": False, "covered": False, "reason": "; ".join(c.notes)})
        else:
            try:
                rep = coincidence_total(K, Kp, c.p, job.n, job.multiplicity, seed=job.seed,
                                        budget=job.alpha0_budget,
                                        relation_budget=job.relation_budget)
                entry.update(rep.to_json())
                entry["p"] = str(c.p)
                entry["covered"] = True
                entry["positive"] = bool(rep.total)
            except CMError as e:
                entry.update({"error": type(e).__name__, "detail": str(e)})
        out.write(_dumps(entry) + "\n")
        out.flush()


def do_gz1(job: JobSpec) -> dict:
    d, dp = job.d, job.dprime
    N = d * dp
    if job.p is not None:
        ps = [job.p]
    else:
        ps = set()
        x = -math.isqrt(N)
        while x * x <= N:
            if x * x < N and (N - x * x) % 4 == 0:
                ps |= set(factorint((N - x * x) // 4))
            x += 1
        ps = sorted(ps)
    out = {"d": str(d), "dprime": str(dp), "valuations": {}}
    for label, D in (("field_d", d), ("field_dprime", dp)):
        out["valuations"][label] = {str(p): str(gz1_valuation(d, dp, p, D)) for p in ps}
    return out


HANDLERS = {"bound": do_bound, "classgroup": do_classgroup, "classify": do_classify,
            "gz1": do_gz1, "dump-order": do_dump_order}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmcoincidence", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="mode", required=True)
    for m in MODES:
        sp = sub.add_parser(m)
        sp.add_argument("--job", help="job JSON file (default: standard input)")
        sp.add_argument("--seed", type=int, dest="search_seed")
        sp.add_argument("--alpha0-budget", type=int, dest="alpha0_budget")
        sp.add_argument("--relation-budget", type=int, dest="relation_budget")
        if m in ("coincide", "classify", "dump-order", "gz1"):
            sp.add_argument("--p", type=int)
        if m in ("coincide", "classify", "dump-order"):
            sp.add_argument("--n", type=int)
        if m == "coincide":
            sp.add_argument("--multiplicity", type=int)
            sp.add_argument("--distinct", action="store_true", default=None)
        if m == "gz1":
            sp.add_argument("--d", type=int)
            sp.add_argument("--dprime", type=int)
        if m == "dump-order":
            sp.add_argument("--out", help="write the order JSON here as well")
    return ap


def _read_job(args) -> dict:
    if args.job:
        with open(args.job) as fh:
            text = fh.read()
    elif args.mode == "gz1" and args.d is not None:
        text = "{}"
    else:
        text = sys.stdin.read()
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed JSON: {e}") from e
    if not isinstance(data, dict):
        raise UsageError("job must be a JSON object")
    for k in ("p", "n", "multiplicity", "d", "dprime", "distinct"):
        v = getattr(args, k, None)
        if v is not None:
            data[k] = v
    for k in ("search_seed", "alpha0_budget", "relation_budget"):
        v = getattr(args, k, None)
        if v is not None:
            data.setdefault("config", {})[k] = v
    return data


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    t0 = time.perf_counter()
    try:
        job = parse_job(_read_job(args), args.mode)
        if job.mode == "coincide" and job.p is None:
            scan(job)
        else:
            if job.mode == "coincide":
                result = do_coincide(job)
            else:
                result = HANDLERS[job.mode](job)
            text = _dumps(result)
            print(text)
            if getattr(args, "out", None):
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
    except UsageError as e:
        _log(f"usage error: {e}")
        return EXIT_USAGE
    except HypothesisViolation as e:
        print(_dumps({"error": "hypothesis", "clause": e.clause, "detail": e.detail}))
        _log(f"hypothesis violated: {e}")
        return EXIT_HYPOTHESIS
    except Exception as e:  # internal failure, reported rather than traced
        print(_dumps({"error": "internal", "type": type(e).__name__, "detail": str(e)}))
        _log(f"internal error: {type(e).__name__}: {e}")
        return EXIT_INTERNAL
    _log(f"{job.mode} done in {time.perf_counter() - t0:.2f}s")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
