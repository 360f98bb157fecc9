import json
from pathlib import Path

import pytest

from ragocl.chunker import RawMetaModel
from ragocl.corpus import DatasetRecord, build_kb

FIXTURES = Path(__file__).parent / "fixtures"
METAMODELS = FIXTURES / "metamodels"
SWEEP_DATASET = FIXTURES / "sweep_dataset.jsonl"


def load_metamodels() -> dict[str, RawMetaModel]:
    return {p.stem: RawMetaModel(p.stem, p.read_text(encoding="utf-8")) for p in sorted(METAMODELS.glob("*.puml"))}


def metamodel_counts() -> dict[str, dict[str, int]]:
    return json.loads((FIXTURES / "metamodel_counts.json").read_text())


def record(sid, model, plantuml, spec="some specification", ocl="context A inv: true"):
    return DatasetRecord(sid, ocl, spec, model, plantuml)


@pytest.fixture
def metamodels():
    return load_metamodels()


@pytest.fixture
def fixture_kb(metamodels):
    recs = [record(str(i), m.name, m.plantuml_text) for i, m in enumerate(metamodels.values())]
    return build_kb(recs, dataset="fixtures", built_at="2026-01-01T00:00:00+00:00")


def write_jsonl(path: Path, rows) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path
