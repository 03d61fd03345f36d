"""HTTP JSON API over the engine.

One cohort snapshot is active at a time; replacing it atomically invalidates
every snapshot-derived cache (partitions, sensitive subspaces). All read
endpoints are pure over (snapshot, request), so identical calls return
identical bodies.
"""

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import cohort as cohort_mod
from . import fairness as fairness_mod
from . import reports, riskmodels, subgroups, synth
from . import schema as schema_mod
from .errors import ComputationError, DataError


class SessionState:
    def __init__(self, default_threshold_risk: float = 0.05):
        self.lock = threading.Lock()
        self.snapshot = None
        self.partitions = {}
        self.subspace_cache = {}
        self.models = {m.name: m for m in riskmodels.builtin_models()}
        self.default_threshold_risk = default_threshold_risk

    def swap_snapshot(self, snapshot):
        with self.lock:
            self.snapshot = snapshot
            self.partitions = {}
            self.subspace_cache = {}

    def view(self):
        """Consistent (snapshot, partitions, subspace_cache) triple."""
        with self.lock:
            return self.snapshot, self.partitions, self.subspace_cache


class CohortRequest(BaseModel):
    csv_path: str | None = None
    schema_path: str | None = None
    filter: list | None = None
    synth_spec: dict | None = None
    synth_spec_path: str | None = None


class SubgroupsRequest(BaseModel):
    variables: list[str]
    bins: dict[str, list[float]] | None = None
    include_members: bool = False


class ThresholdBody(BaseModel):
    risk: float


class ProtectedBody(BaseModel):
    attribute: str
    privileged: str
    unprivileged: str


class SummaryRequest(BaseModel):
    partition_id: str
    models: list[str]
    threshold: ThresholdBody
    protected: list[ProtectedBody] = []
    audit: dict | None = None


class ExplainRequest(BaseModel):
    partition_id: str
    model: str
    subgroup: int | None = None
    subgroup_label: str | None = None
    fraction: float = 0.1
    seed: int = 0


def _snapshot_or_409(state):
    snapshot, partitions, subspaces = state.view()
    if snapshot is None:
        raise HTTPException(status_code=409, detail="no cohort loaded")
    return snapshot, partitions, subspaces


def _partition_or_404(partitions, snapshot, partition_id):
    partition = partitions.get(partition_id)
    if partition is None or partition.snapshot_id != snapshot.snapshot_id:
        raise HTTPException(status_code=404, detail=f"unknown partition {partition_id!r}")
    return partition


def _models_or_404(state, names):
    out = []
    for name in names:
        model = state.models.get(name)
        if model is None:
            raise HTTPException(status_code=404, detail=f"unknown model {name!r}")
        out.append(model)
    return out


def create_app(default_threshold_risk: float = 0.05,
               frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="rmx", docs_url=None, redoc_url=None)
    state = SessionState(default_threshold_risk)
    app.state.engine = state

    @app.exception_handler(DataError)
    def _data_error(_request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(ComputationError)
    def _computation_error(_request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    def _value_error(_request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/schema")
    def get_schema():
        snapshot, _, _ = _snapshot_or_409(state)
        return schema_mod.schema_to_json(snapshot.schema)

    @app.get("/api/models")
    def get_models():
        return [
            {
                "name": m.name,
                "c": m.c,
                "bias": m.bias,
                "horizon_days": m.horizon_days,
                "n_terms": len(m.terms),
            }
            for m in state.models.values()
        ]

    @app.post("/api/cohort")
    def post_cohort(body: CohortRequest):
        sources = [s for s in (body.csv_path, body.synth_spec, body.synth_spec_path)
                   if s is not None]
        if len(sources) != 1:
            raise HTTPException(status_code=422,
                                detail="provide exactly one of csv_path, synth_spec, synth_spec_path")
        if body.csv_path is not None:
            if not Path(body.csv_path).is_file():
                raise HTTPException(status_code=400,
                                    detail=f"no such file: {body.csv_path}")
            schema = (schema_mod.load_schema(body.schema_path)
                      if body.schema_path else schema_mod.builtin_schema())
            rules = cohort_mod.filter_from_json(body.filter or [])
            snapshot = cohort_mod.load_csv(body.csv_path, schema, rules)
        else:
            doc = body.synth_spec
            if doc is None:
                path = Path(body.synth_spec_path)
                if not path.is_file():
                    raise HTTPException(status_code=400,
                                        detail=f"no such file: {body.synth_spec_path}")
                spec = synth.load_spec(path)
            else:
                spec = synth.spec_from_json(doc)
            snapshot = synth.generate_synthetic(spec)
        state.swap_snapshot(snapshot)
        return {
            "snapshot_id": snapshot.snapshot_id,
            "n": snapshot.n,
            "ledger": [[desc, count] for desc, count in snapshot.ledger],
        }

    @app.post("/api/subgroups")
    def post_subgroups(body: SubgroupsRequest):
        snapshot, partitions, _ = _snapshot_or_409(state)
        spec = subgroups.SubgroupSpec(tuple(body.variables), body.bins)
        partition = subgroups.build_partition(snapshot, spec)
        with state.lock:
            if state.snapshot is snapshot:
                state.partitions[partition.partition_id] = partition
        return partition.to_json(include_members=body.include_members)

    @app.post("/api/summary")
    def post_summary(body: SummaryRequest):
        snapshot, partitions, subspaces = _snapshot_or_409(state)
        partition = _partition_or_404(partitions, snapshot, body.partition_id)
        models = _models_or_404(state, body.models)
        splits = [fairness_mod.ProtectedSplit(p.attribute, p.privileged, p.unprivileged)
                  for p in body.protected]
        audit = reports.audit_options(body.audit) if body.audit is not None else None
        return reports.build_summary(snapshot, partition, models,
                                     body.threshold.risk, splits, audit,
                                     subspace_cache=subspaces)

    @app.get("/api/distribution")
    def get_distribution(model: str, bins: int = 40, partition_id: str | None = None,
                         subgroup: int | None = None, threshold_risk: float | None = None):
        snapshot, partitions, _ = _snapshot_or_409(state)
        risk = threshold_risk if threshold_risk is not None else state.default_threshold_risk
        the_model = _models_or_404(state, [model])[0]
        rows = None
        if partition_id is not None:
            partition = _partition_or_404(partitions, snapshot, partition_id)
            if subgroup is not None:
                if not 0 <= subgroup < len(partition.subgroups):
                    raise HTTPException(status_code=404, detail=f"no subgroup {subgroup}")
                members = partition.subgroups[subgroup].members
                rows = reports.model_rows(snapshot, the_model, members)
        return reports.build_distribution(snapshot, the_model, risk, bins, rows)

    @app.get("/api/survival")
    def get_survival(partition_id: str, horizon_days: int | None = None):
        snapshot, partitions, _ = _snapshot_or_409(state)
        partition = _partition_or_404(partitions, snapshot, partition_id)
        horizon = horizon_days
        if horizon is None:
            horizon = max(m.horizon_days for m in state.models.values())
        return reports.build_survival(snapshot, partition, horizon)

    @app.post("/api/explain")
    def post_explain(body: ExplainRequest):
        snapshot, partitions, _ = _snapshot_or_409(state)
        partition = _partition_or_404(partitions, snapshot, body.partition_id)
        model = _models_or_404(state, [body.model])[0]
        if (body.subgroup is None) == (body.subgroup_label is None):
            raise HTTPException(status_code=422,
                                detail="provide exactly one of subgroup, subgroup_label")
        if body.subgroup is not None:
            if not 0 <= body.subgroup < len(partition.subgroups):
                raise HTTPException(status_code=404, detail=f"no subgroup {body.subgroup}")
            group = partition.subgroups[body.subgroup]
        else:
            try:
                group = partition.find(body.subgroup_label)
            except DataError:
                raise HTTPException(status_code=404,
                                    detail=f"no subgroup labeled {body.subgroup_label!r}") from None
        return reports.build_explanation(snapshot, partition, group, model,
                                         body.fraction, body.seed)

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
