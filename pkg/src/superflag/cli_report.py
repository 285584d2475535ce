"""Command-line surface, result envelopes, output formats and the on-disk cell cache."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .bwb_engine import (
    Mode,
    OutsideHypothesesError,
    RigidityVerdict,
    Verdict,
    direct_table,
    pushforward_node,
    rigidity_report,
)
from .characters import decompose
from .flag_geometry import (
    NAMED_REPS,
    FlagType,
    MalformedFlagTypeError,
    even_dimension,
    named_rep,
    odd_dimension,
    reductive_blocks,
    validate_flag_type,
)
from .root_weights import Weight, build_root_data, classify, weyl_dim
from .sheaf_catalog import FAMILIES, UNDEFINED_AT_R1, LesNode, Range, SheafId, sheaf_rep

log = logging.getLogger("superflag")

SCHEMA = "superflag.result/1"
CACHE_ENV = "SUPERFLAG_CACHE_DIR"
FORMATS = ("json", "csv", "md")

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    """Bad command-line input; maps to exit status 2."""


# ---------------------------------------------------------------------------
# cache


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "superflag"


def _canonical(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


class ResultCache:
    """Content-addressed JSON store keyed by (tool version, key); writes are atomic renames."""

    def __init__(self, root: Path | str, version: str = __version__):
        self.root = Path(root)
        self.version = version
        self.hits = 0
        self.misses = 0

    def path_for(self, key: str) -> Path:
        digest = hashlib.sha256(f"{self.version}\0{key}".encode()).hexdigest()
        return self.root / digest[:2] / f"{digest}.json"

    def get(self, key: str) -> Any | None:
        path = self.path_for(key)
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            self.misses += 1
            return None
        try:
            entry = json.loads(raw)
            payload = entry["payload"]
            ok = (
                entry.get("version") == self.version
                and entry.get("key") == key
                and entry.get("checksum") == hashlib.sha256(_canonical(payload)).hexdigest()
            )
        except (ValueError, KeyError, TypeError):
            ok = False
        if not ok:
            log.warning("cache entry %s is corrupt; recomputing", path.name)
            try:
                path.unlink()
            except FileNotFoundError:
                pass
            self.misses += 1
            return None
        self.hits += 1
        return payload

    def put(self, key: str, value: Any) -> None:
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "version": self.version,
            "key": key,
            "checksum": hashlib.sha256(_canonical(value)).hexdigest(),
            "payload": value,
        }
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(_canonical(entry))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def roundtrip(self, key: str, value: Any) -> Any:
        self.put(key, value)
        return self.get(key)


# ---------------------------------------------------------------------------
# envelopes and emitters


@dataclass(frozen=True)
class RunConfig:
    command: str
    flag_type: FlagType | None
    fmt: str = "json"
    cache_dir: Path | None = None
    allow_nonadmissible: bool = False
    jobs: int = 1


@dataclass
class ResultEnvelope:
    """Everything a command reports; ``run`` holds the only non-deterministic fields."""

    command: str
    inputs: dict[str, str]
    summary: dict[str, str]
    records: list[dict[str, str]] = field(default_factory=list)
    assumptions: list[dict[str, str]] = field(default_factory=list)
    run: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "input": self.inputs,
            "summary": self.summary,
            "records": self.records,
            "assumptions": self.assumptions,
            "run": self.run,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> ResultEnvelope:
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        return cls(
            data["command"], data["input"], data["summary"], data["records"], data["assumptions"], data["run"]
        )


def emit(env: ResultEnvelope, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(env.to_json(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["section", "key", "value"])
        for k, v in env.summary.items():
            writer.writerow(["summary", k, v])
        for i, rec in enumerate(env.records):
            for k, v in rec.items():
                writer.writerow([f"record{i}", k, v])
        for a in env.assumptions:
            writer.writerow(["assumption", a["key"], a["statement"]])
        return buf.getvalue()
    if fmt == "md":
        lines = [f"# {env.command}", ""]
        lines += [f"- **{k}**: {v}" for k, v in env.summary.items()]
        if env.records:
            cols = list(dict.fromkeys(k for rec in env.records for k in rec))
            lines += ["", "| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
            lines += ["| " + " | ".join(rec.get(c, "") for c in cols) + " |" for rec in env.records]
        if env.assumptions:
            lines += ["", "## Assumptions", ""]
            lines += [f"- `{a['key']}` ({a['kind']}): {a['statement']}" for a in env.assumptions]
        return "\n".join(lines) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


def _range_str(r) -> str:
    return str(r)


def _node_fields(node: LesNode) -> dict[str, str]:
    return {"h0": _range_str(node.h0), "h1": _range_str(node.h1), "h2": _range_str(node.h2)}


# ---------------------------------------------------------------------------
# argument parsing


def parse_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise UsageError(f"cannot parse integer tuple {text!r}") from exc


def parse_flag_type(args: argparse.Namespace) -> FlagType:
    if args.m is None or args.n is None or args.k is None or args.l is None:
        raise UsageError("a flag type needs --m, --n, --k and --l")
    ft = FlagType(args.m, args.n, parse_tuple(args.k), parse_tuple(args.l))
    try:
        validate_flag_type(ft)
    except MalformedFlagTypeError as exc:
        raise UsageError(str(exc)) from exc
    return ft


def parse_weight(text: str, m: int, n: int) -> Weight:
    mu, sep, lam = text.strip("() ").partition("|")
    if not sep:
        raise UsageError("weights are written as a,b,...|c,d,...")
    w = Weight(parse_tuple(mu), parse_tuple(lam))
    if len(w.mu) != m or len(w.lam) != n:
        raise UsageError(f"weight {text!r} does not have shape ({m}|{n})")
    return w


def _ft_inputs(ft: FlagType) -> dict[str, str]:
    return {
        "m": str(ft.m),
        "n": str(ft.n),
        "k": ",".join(map(str, ft.k)),
        "l": ",".join(map(str, ft.l)),
        "label": ft.label(),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superflag", description="Cohomology and rigidity of flag supermanifolds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, type_spec: bool = True) -> None:
        if type_spec:
            p.add_argument("--m", type=int)
            p.add_argument("--n", type=int)
            p.add_argument("--k", help="comma-separated k_0,...,k_r with k_0 = m")
            p.add_argument("--l", help="comma-separated l_0,...,l_r with l_0 = n")
        p.add_argument("--format", choices=FORMATS, default="json")
        p.add_argument("--output", help="write the report here instead of stdout")

    common(sub.add_parser("validate", help="check genericity and admissibility"))

    p = sub.add_parser("reps", help="isotropy representation of a named module or sheaf cell")
    common(p)
    p.add_argument("--rep", choices=NAMED_REPS)
    p.add_argument("--sheaf", choices=FAMILIES)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)

    p = sub.add_parser("cohomology", help="cohomology of a sheaf cell")
    common(p)
    p.add_argument("--sheaf", choices=FAMILIES, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--deg", type=int, action="append", help="degree to report (repeatable)")
    p.add_argument("--route", choices=("combined", "direct"), default="combined")
    p.add_argument("--cache-dir")
    p.add_argument("--no-cache", action="store_true")

    p = sub.add_parser("rigidity", help="decide H^1(T) = 0")
    common(p)
    p.add_argument("--allow-nonadmissible", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cache-dir")
    p.add_argument("--no-cache", action="store_true")

    common(sub.add_parser("oracle-cocycle", help="invariant cocycles of the (2,2) tangent piece"))

    p = sub.add_parser("bwb-classify", help="Bott classification of one weight")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--weight", required=True, help="a,b,...|c,d,...")
    common(p, type_spec=False)
    return parser


# ---------------------------------------------------------------------------
# commands


def _cache(args: argparse.Namespace) -> ResultCache | None:
    if getattr(args, "no_cache", False):
        return None
    root = getattr(args, "cache_dir", None) or default_cache_dir()
    return ResultCache(root)


def cmd_validate(args: argparse.Namespace) -> tuple[ResultEnvelope, int]:
    ft = parse_flag_type(args)
    v = validate_flag_type(ft)
    summary = {
        "label": ft.label(),
        "generic": str(v.generic).lower(),
        "admissible": str(v.admissible).lower(),
        "violated_pair": "" if v.violated_pair is None else ",".join(map(str, v.violated_pair)),
        "reason": v.reason,
        "even_dimension": str(even_dimension(ft)),
        "odd_dimension": str(odd_dimension(ft)),
    }
    return ResultEnvelope("validate", _ft_inputs(ft), summary), EXIT_OK if v.admissible else EXIT_REFUSED


def _constituent_records(c) -> list[dict[str, str]]:
    blocks = c.blocks
    out = []
    for hw, mult in decompose(c).constituents:
        w = Weight.from_coords(hw, blocks.m)
        out.append({"highest_weight": str(w), "multiplicity": str(mult)})
    return out


def _sheaf_id(args: argparse.Namespace) -> SheafId:
    try:
        return SheafId(args.sheaf, args.p, args.q)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_reps(args: argparse.Namespace) -> tuple[ResultEnvelope, int]:
    ft = parse_flag_type(args)
    inputs = _ft_inputs(ft)
    if (args.rep is None) == (args.sheaf is None):
        raise UsageError("give exactly one of --rep or --sheaf")
    if args.rep is not None:
        c = named_rep(ft, args.rep).character
        inputs["rep"] = args.rep
        name = args.rep
    else:
        if args.p is None:
            raise UsageError("--sheaf needs --p")
        sid = _sheaf_id(args)
        inputs["sheaf"] = sid.label()
        name = sid.label()
        rep = sheaf_rep(ft, sid)
        if rep is UNDEFINED_AT_R1:
            return ResultEnvelope("reps", inputs, {"name": name, "status": "undefined-at-r1"}), EXIT_REFUSED
        c = rep
    summary = {"name": name, "dimension": str(c.dim), "blocks": str(reductive_blocks(ft))}
    return ResultEnvelope("reps", inputs, summary, _constituent_records(c)), EXIT_OK


def cmd_cohomology(args: argparse.Namespace) -> tuple[ResultEnvelope, int]:
    ft = parse_flag_type(args)
    sid = _sheaf_id(args)
    inputs = _ft_inputs(ft) | {"sheaf": sid.label(), "route": args.route}
    cache = _cache(args)
    key = f"{ft.key()}/{sid.label()}"
    table = None
    if cache is not None:
        from .bwb_engine import table_from_json, table_to_json

        hit = cache.get(key)
        if hit is not None:
            table = table_from_json(hit)
    if table is None:
        table = direct_table(ft, sid)
        if table is not None and cache is not None:
            cache.put(key, table_to_json(table))
    if table is None:
        summary = {"sheaf": sid.label(), "status": "undefined-at-r1"}
        return ResultEnvelope("cohomology", inputs, summary), EXIT_REFUSED
    node = table.node()
    if args.route == "combined":
        node = node.refine(pushforward_node(ft, sid))
    ranges = [node.h0, node.h1, node.h2]
    degrees = sorted(set(args.deg or [0, 1, 2]))
    summary = {"sheaf": sid.label(), "mode": table.mode.value}
    pinched = True
    for d in degrees:
        if d < 0:
            raise UsageError("degrees are non-negative")
        if d < 3:
            rng = ranges[d]
        else:
            rng = Range(0 if table.mode is Mode.UPPER_BOUND else table.total(d), table.total(d))
        pinched = pinched and rng.is_exact
        summary[f"h{d}"] = str(rng)
    summary["exact"] = str(pinched).lower()
    records = []
    for d in degrees:
        for w, mult, dim in table.modules(d):
            records.append({"degree": str(d), "highest_weight": str(w), "multiplicity": str(mult), "weyl_dim": str(dim)})
    return ResultEnvelope("cohomology", inputs, summary, records), EXIT_OK


def verdict_summary(v: RigidityVerdict) -> dict[str, str]:
    if v.verdict is Verdict.RIGID:
        line = "Rigid"
        if v.h1_T2.is_exact and v.h1_T2.value == 1:
            line += "; H^1(T_2) = C; unique non-split model"
    elif v.verdict is Verdict.OUTSIDE_HYPOTHESES:
        line = "OutsideHypotheses; no rigidity claim"
    else:
        line = "NotProven; bounds do not pinch"
    summary = {
        "verdict": v.verdict.value,
        "statement": line,
        "h1_T2": str(v.h1_T2),
        "h1_T": str(v.h1_T),
        "h1_T2_provenance": " <- ".join(v.h1_T2_provenance),
    }
    if v.cocycle is not None:
        summary["cocycle"] = f"Z1={v.cocycle.z1}, B1={v.cocycle.b1}, H1={v.cocycle.h1}"
    return summary


def verdict_records(v: RigidityVerdict) -> list[dict[str, str]]:
    records = []
    for fam in ("A", "C", "T"):
        for p, node in sorted(v.pieces[fam].items()):
            records.append({"sheaf": f"{fam}[{p}]"} | _node_fields(node))
    for fam in ("Av", "Ah", "Cv", "Ch", "Tv", "Th"):
        for (p, q), node in sorted(v.cells.get(fam, {}).items()):
            if node.h0.hi == 0 and node.h1.hi == 0:
                continue
            records.append({"sheaf": f"{fam}[{p},{q}]"} | _node_fields(node))
    return records


def cmd_rigidity(args: argparse.Namespace) -> tuple[ResultEnvelope, int]:
    ft = parse_flag_type(args)
    inputs = _ft_inputs(ft) | {"allow_nonadmissible": str(args.allow_nonadmissible).lower()}
    cache = _cache(args)
    try:
        v = rigidity_report(ft, allow_nonadmissible=args.allow_nonadmissible, jobs=max(1, args.jobs), cache=cache)
    except OutsideHypothesesError as exc:
        summary = {"verdict": "Refused", "statement": str(exc)}
        return ResultEnvelope("rigidity", inputs, summary), EXIT_REFUSED
    env = ResultEnvelope(
        "rigidity",
        inputs,
        verdict_summary(v),
        verdict_records(v),
        [{"key": a.key, "kind": a.kind, "statement": a.statement} for a in v.assumptions],
    )
    if cache is not None:
        env.run["cache_hits"] = str(cache.hits)
    return env, EXIT_OK if v.verdict is Verdict.RIGID else EXIT_REFUSED


def cmd_oracle_cocycle(args: argparse.Namespace) -> tuple[ResultEnvelope, int]:
    from .super_charts import UndefinedAtR1Error, vertical_cocycle_dim
    from .bwb_engine import _trivial_count

    ft = parse_flag_type(args)
    inputs = _ft_inputs(ft)
    try:
        res = vertical_cocycle_dim(ft, _trivial_count(ft, SheafId("T", 2, 2)) if ft.r >= 2 else None)
    except UndefinedAtR1Error as exc:
        return ResultEnvelope("oracle-cocycle", inputs, {"status": "undefined-at-r1", "reason": str(exc)}), EXIT_REFUSED
    summary = {
        "Z1": str(res.z1),
        "B1": str(res.b1),
        "H1": str(res.h1),
        "B1_exact": str(res.b1_exact).lower(),
        "vertical_rank": str(res.vertical_rank),
        "full_rank": str(res.full_rank),
        "equations": str(res.equations),
    }
    return ResultEnvelope("oracle-cocycle", inputs, summary), EXIT_OK


def cmd_bwb_classify(args: argparse.Namespace) -> tuple[ResultEnvelope, int]:
    try:
        rd = build_root_data(args.m, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    w = parse_weight(args.weight, args.m, args.n)
    bc = classify(w, rd)
    inputs = {"m": str(args.m), "n": str(args.n), "weight": str(w)}
    if not bc.regular:
        summary = {"weight": str(w), "kind": "singular"}
    else:
        summary = {
            "weight": str(w),
            "kind": "regular",
            "index": str(bc.index),
            "dot_image": str(bc.dot_image),
            "weyl_dim": str(weyl_dim(bc.dot_image, rd)),
        }
    return ResultEnvelope("bwb-classify", inputs, summary), EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "reps": cmd_reps,
    "cohomology": cmd_cohomology,
    "rigidity": cmd_rigidity,
    "oracle-cocycle": cmd_oracle_cocycle,
    "bwb-classify": cmd_bwb_classify,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        env, status = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"superflag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    env.run["wall_clock_s"] = f"{time.perf_counter() - start:.3f}"
    text = emit(env, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
