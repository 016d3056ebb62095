"""Provenance records and the 16-check promotion gate.

The gate verifies a workspace/output pair without writing anything:

    R1  workspace structure (contract, hash manifest, processed table)
    R2  expected output files present
    R3  gate config parses and carries its pins
    R4  contract document parses
    R5  declared tier counts match the entries
    R6  contract bytes and tier counts match the gate-config pins
    R7  per-measure CSV schema
    R8  multiverse CSV schema
    R9  summary JSON schemas (run + multiverse)
    R10 provenance schema; recorded output digests match the files
    R11 toolchain versions recorded and matching the live environment
    R12 run-config echo well-formed and consistent with the gate mode
    R13 raw archive digests match the manifest            (final only)
    R14 ingest evidence present with a consistent filter partition
                                                          (final only)
    R15 synthetic-data marker absent                      (final only)
    R16 processed table digest matches the manifest       (final only)

Smoke mode executes R1-R12 and reports R13-R16 as skipped, never passed.
"""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy
import scipy

from . import __version__
from .errors import ReliakitError, SchemaError
from .hashutil import sha256_file
from .outputs import (
    DIGESTED_OUTPUTS,
    GATE_REPORT_JSON,
    INGEST_EVIDENCE_JSON,
    MULTIVERSE_CSV,
    MULTIVERSE_SUMMARY_JSON,
    PER_MEASURE_CSV,
    PROVENANCE_JSON,
    SUMMARY_JSON,
    canonical_json,
    validate_multiverse_csv,
    validate_multiverse_summary_json,
    validate_per_measure_csv,
    validate_provenance_json,
    validate_summary_json,
    write_json,
)
from .registry import parse_contract, verify_declared_counts

CONTRACT_RELPATH = "contracts/measures.json"
HASH_MANIFEST = "expected_hashes.json"
GATE_CONFIG = "gate_config.json"
PROCESSED_RELPATH = "data/processed/long.csv"
SYNTHETIC_MARKER = "data/processed/SYNTHETIC_DATA"

REQUIRED_OUTPUTS = (
    PER_MEASURE_CSV,
    SUMMARY_JSON,
    MULTIVERSE_CSV,
    MULTIVERSE_SUMMARY_JSON,
    INGEST_EVIDENCE_JSON,
    PROVENANCE_JSON,
)


def toolchain_versions() -> dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "reliakit": __version__,
    }


@dataclass(frozen=True)
class ProvenanceRecord:
    run_mode: str
    base_seed: int
    bootstrap_b: int
    toolchain_versions: dict[str, str]
    input_digests: dict[str, str]
    output_digests: dict[str, str]
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "run_mode": self.run_mode,
            "base_seed": self.base_seed,
            "bootstrap_b": self.bootstrap_b,
            "toolchain_versions": dict(self.toolchain_versions),
            "input_digests": dict(self.input_digests),
            "output_digests": dict(self.output_digests),
            "timestamp": self.timestamp,
        }


def build_provenance(
    run_mode: str,
    base_seed: int,
    bootstrap_b: int,
    input_digests: dict[str, str],
    out_dir: Path,
) -> ProvenanceRecord:
    """Digest every known output present in out_dir and assemble the record."""
    output_digests: dict[str, str] = {}
    for name in DIGESTED_OUTPUTS:
        path = out_dir / name
        if path.is_file():
            output_digests[name] = sha256_file(path)
    return ProvenanceRecord(
        run_mode=run_mode,
        base_seed=base_seed,
        bootstrap_b=bootstrap_b,
        toolchain_versions=toolchain_versions(),
        input_digests=dict(input_digests),
        output_digests=output_digests,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def emit_provenance(record: ProvenanceRecord, out_dir: Path) -> Path:
    path = out_dir / PROVENANCE_JSON
    write_json(path, record.to_dict())
    return path


# ---------------------------------------------------------------------------
# promotion gate


@dataclass(frozen=True)
class GateCheck:
    id: str
    name: str
    passed: bool
    skipped: bool
    detail: str


@dataclass(frozen=True)
class GateReport:
    mode: str
    checks: tuple[GateCheck, ...]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks if not c.skipped)

    @property
    def executed(self) -> int:
        return sum(not c.skipped for c in self.checks)

    @property
    def skipped(self) -> int:
        return sum(c.skipped for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "overall": self.overall,
            "executed": self.executed,
            "skipped": self.skipped,
            "checks": [
                {
                    "id": c.id,
                    "name": c.name,
                    "passed": c.passed,
                    "skipped": c.skipped,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }


def write_gate_report(report: GateReport, out_dir: Path) -> Path:
    path = out_dir / GATE_REPORT_JSON
    write_json(path, report.to_dict())
    return path


def _load_gate_config(workspace: Path) -> dict:
    path = workspace / GATE_CONFIG
    if not path.is_file():
        raise SchemaError(f"{GATE_CONFIG}: missing")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{GATE_CONFIG}: invalid JSON ({exc})") from None
    for key in ("schema_version", "pinned_tier_counts", "pinned_digests"):
        if key not in doc:
            raise SchemaError(f"{GATE_CONFIG}: missing key {key!r}")
    if not isinstance(doc["pinned_tier_counts"], dict) or not isinstance(
        doc["pinned_digests"], dict
    ):
        raise SchemaError(f"{GATE_CONFIG}: pins must be objects")
    return doc


def _load_hash_manifest(workspace: Path) -> dict[str, str]:
    path = workspace / HASH_MANIFEST
    doc = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in doc.items()
    ):
        raise SchemaError(f"{HASH_MANIFEST}: must map relative paths to hex digests")
    return doc


def run_gate(mode: str, workspace: Path, out_dir: Path) -> GateReport:
    """Execute the promotion gate. Read-only and idempotent: the report is
    returned, not written (cmd_verify persists it)."""
    if mode not in ("smoke", "final"):
        raise ValueError(f"gate mode must be smoke or final, got {mode!r}")
    workspace = Path(workspace)
    out_dir = Path(out_dir)
    checks: list[GateCheck] = []

    def run_check(check_id: str, name: str, fn) -> None:
        try:
            detail = fn()
            checks.append(GateCheck(check_id, name, True, False, detail or "ok"))
        except (ReliakitError, OSError, json.JSONDecodeError, ValueError) as exc:
            checks.append(GateCheck(check_id, name, False, False, str(exc)))

    def skip(check_id: str, name: str) -> None:
        checks.append(GateCheck(check_id, name, False, True, "final mode only"))

    def r1() -> str:
        missing = [
            rel
            for rel in (CONTRACT_RELPATH, HASH_MANIFEST, PROCESSED_RELPATH)
            if not (workspace / rel).is_file()
        ]
        if missing:
            raise SchemaError(f"missing workspace files: {missing}")
        return "workspace layout complete"

    def r2() -> str:
        missing = [name for name in REQUIRED_OUTPUTS if not (out_dir / name).is_file()]
        if missing:
            raise SchemaError(f"missing outputs: {missing}")
        return f"{len(REQUIRED_OUTPUTS)} output files present"

    def r3() -> str:
        _load_gate_config(workspace)
        return "gate config well-formed"

    def r4() -> str:
        registry = parse_contract(workspace / CONTRACT_RELPATH)
        return f"{len(registry.entries)} entries parsed"

    def r5() -> str:
        registry = parse_contract(workspace / CONTRACT_RELPATH)
        verify_declared_counts(registry)
        return "declared counts match entries"

    def r6() -> str:
        config = _load_gate_config(workspace)
        registry = parse_contract(workspace / CONTRACT_RELPATH)
        if registry.tier_counts() != config["pinned_tier_counts"]:
            raise SchemaError(
                f"tier counts {registry.tier_counts()} != pinned "
                f"{config['pinned_tier_counts']}"
            )
        for rel, expected in sorted(config["pinned_digests"].items()):
            observed = sha256_file(workspace / rel)
            if observed != expected:
                raise SchemaError(f"{rel}: digest {observed} != pinned {expected}")
        return "contract pins verified"

    def r7() -> str:
        n = validate_per_measure_csv(out_dir / PER_MEASURE_CSV)
        return f"{n} rows valid"

    def r8() -> str:
        n = validate_multiverse_csv(out_dir / MULTIVERSE_CSV)
        return f"{n} rows valid"

    def r9() -> str:
        validate_summary_json(out_dir / SUMMARY_JSON)
        validate_multiverse_summary_json(out_dir / MULTIVERSE_SUMMARY_JSON)
        return "summaries valid"

    def r10() -> str:
        doc = validate_provenance_json(out_dir / PROVENANCE_JSON)
        for name, recorded in sorted(doc["output_digests"].items()):
            path = out_dir / name
            if not path.is_file():
                raise SchemaError(f"{name}: digested output missing")
            observed = sha256_file(path)
            if observed != recorded:
                raise SchemaError(f"{name}: digest {observed} != recorded {recorded}")
        return f"{len(doc['output_digests'])} output digests verified"

    def r11() -> str:
        doc = validate_provenance_json(out_dir / PROVENANCE_JSON)
        live = toolchain_versions()
        recorded = doc["toolchain_versions"]
        missing = [k for k in live if k not in recorded]
        if missing:
            raise SchemaError(f"toolchain_versions missing {missing}")
        drift = {
            k: (recorded[k], live[k]) for k in live if recorded[k] != live[k]
        }
        if drift:
            raise SchemaError(f"toolchain drift: {drift}")
        return "toolchain matches live environment"

    def r12() -> str:
        doc = validate_provenance_json(out_dir / PROVENANCE_JSON)
        if doc["run_mode"] != mode:
            raise SchemaError(
                f"run_mode {doc['run_mode']!r} inconsistent with gate mode {mode!r}"
            )
        return f"run config echo consistent ({doc['run_mode']}, seed {doc['base_seed']}, B {doc['bootstrap_b']})"

    def r13() -> str:
        manifest = _load_hash_manifest(workspace)
        raw = {rel: d for rel, d in manifest.items() if rel.startswith("raw/")}
        if not raw:
            raise SchemaError("no raw archives pinned in the manifest")
        for rel, expected in sorted(raw.items()):
            path = workspace / "data" / rel
            if not path.is_file():
                raise SchemaError(f"data/{rel}: missing")
            observed = sha256_file(path)
            if observed != expected:
                raise SchemaError(f"data/{rel}: digest {observed} != pinned {expected}")
        return f"{len(raw)} raw archives verified"

    def r14() -> str:
        path = out_dir / INGEST_EVIDENCE_JSON
        if not path.is_file():
            raise SchemaError(f"{INGEST_EVIDENCE_JSON}: missing")
        doc = json.loads(path.read_text(encoding="utf-8"))
        measures = doc.get("measures")
        if not isinstance(measures, dict) or not measures:
            raise SchemaError(f"{INGEST_EVIDENCE_JSON}: no per-measure evidence")
        for measure_id, entry in sorted(measures.items()):
            fc = entry["filter_counts"]
            total = fc["below_min"] + fc["above_max"] + fc["kept"]
            if total != entry["row_count"]:
                raise SchemaError(
                    f"{measure_id}: filter counts {total} != row_count {entry['row_count']}"
                )
        return f"{len(measures)} measures consistent"

    def r15() -> str:
        marker = workspace / SYNTHETIC_MARKER
        if marker.exists():
            raise SchemaError(f"{SYNTHETIC_MARKER} present in a final workspace")
        return "no synthetic-data marker"

    def r16() -> str:
        manifest = _load_hash_manifest(workspace)
        expected = manifest.get("processed/long.csv")
        if expected is None:
            raise SchemaError("processed/long.csv not pinned in the manifest")
        observed = sha256_file(workspace / PROCESSED_RELPATH)
        if observed != expected:
            raise SchemaError(
                f"processed/long.csv: digest {observed} != pinned {expected}"
            )
        return "processed table digest verified"

    run_check("R1", "workspace-structure", r1)
    run_check("R2", "output-files-present", r2)
    run_check("R3", "gate-config", r3)
    run_check("R4", "contract-parses", r4)
    run_check("R5", "contract-counts", r5)
    run_check("R6", "contract-pins", r6)
    run_check("R7", "per-measure-schema", r7)
    run_check("R8", "multiverse-schema", r8)
    run_check("R9", "summary-schemas", r9)
    run_check("R10", "output-digests", r10)
    run_check("R11", "toolchain-lock", r11)
    run_check("R12", "run-config-echo", r12)
    final_checks = (
        ("R13", "raw-archive-digests", r13),
        ("R14", "ingest-evidence", r14),
        ("R15", "synthetic-data-flag", r15),
        ("R16", "processed-digest", r16),
    )
    for check_id, name, fn in final_checks:
        if mode == "final":
            run_check(check_id, name, fn)
        else:
            skip(check_id, name)
    return GateReport(mode=mode, checks=tuple(checks))


__all__ = [
    "ProvenanceRecord",
    "GateCheck",
    "GateReport",
    "build_provenance",
    "emit_provenance",
    "run_gate",
    "write_gate_report",
    "toolchain_versions",
    "canonical_json",
]
