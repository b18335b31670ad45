"""Serializable run records (JSON / CSV)."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

from .engine import BitAllocation, BlockConfig, CostReport
from .grover import AmplitudeProblem
from .postprocess import AWQAEResult

TABLE_HEADER = ["trial", "true_amplitude", "awqae_estimate", "fullqae_estimate", "error_pct"]


def problem_to_dict(problem: AmplitudeProblem) -> dict:
    return {
        "variant": problem.variant,
        "p": problem.p,
        "n_target": problem.n_target,
        "marked": sorted(problem.marked),
        "phase": problem.phase,
    }


def problem_from_dict(d: dict) -> AmplitudeProblem:
    return AmplitudeProblem(
        d["variant"], d["p"], d["n_target"], frozenset(d["marked"]), d.get("phase")
    )


@dataclass
class RunRecord:
    inputs: dict
    outputs: dict
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(d["inputs"], d["outputs"], d.get("timing", {}))

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls.from_dict(json.loads(text))


def make_run_record(
    problem: AmplitudeProblem,
    allocation: BitAllocation,
    config: BlockConfig,
    result: AWQAEResult,
    cost: CostReport,
    total_ms: float,
) -> RunRecord:
    res = result.resolved
    return RunRecord(
        inputs={
            "problem": problem_to_dict(problem),
            "allocation": list(allocation.m_list),
            "config": asdict(config),
            "seed": config.rng_seed,
        },
        outputs={
            "phi_raw": result.raw.phi_raw,
            "amb_flags": list(result.raw.amb_flags),
            "b_a_used": result.raw.b_a,
            **res.to_dict(),
            "blocks": [b.to_dict() for b in result.raw.blocks],
            "cost": cost.to_dict(),
        },
        timing={
            "block_ms": [b.wall_ms for b in result.raw.blocks],
            "total_ms": total_ms,
        },
    )


def rows_to_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def csv_to_rows(text: str, types: dict) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    return [{k: types.get(k, str)(v) for k, v in row.items()} for row in reader]
