from enum import Enum
from typing import Dict, List, Optional, Any
from datetime import datetime, timezone
from pydantic import BaseModel, Field


class AnalysisStatus(str, Enum):
    ANALYZED = "analyzed"
    FAILED = "failed"


class FailureStage(str, Enum):
    """Where an analysis gave up."""
    EXIT_FORM = "exit-form"
    SPATIAL_CHANGE = "spatial-change"
    TRANSF_MAP = "transf-map"
    ABSTRACTION = "abstraction"
    CONDITION_CHECK = "condition-check"
    VERIFICATION = "verification"
    WORLD_EXPLOSION = "world-explosion"
    LEARNING = "learning"
    CALLEE = "callee"
    LOWERING = "lowering"


class PipelineStage(str, Enum):
    """Stages a source file passes through."""
    PARSE = "parse"
    LOWER = "lower"
    ANALYZE = "analyze"
    CHECK = "check"
    COMPLETED = "completed"
    FAILED = "failed"


class ContractKind(str, Enum):
    ATOMIC = "atomic"
    FUNCTION = "function"
    LOOP_SUMMARY = "loopSummary"


class GuardrailCheck(BaseModel):
    """Result of a resource-limit check."""
    passed: bool
    reason: str
    policy_violated: Optional[str] = None


class ContractVars(BaseModel):
    anchors: List[str] = Field(default_factory=list)
    logicals: List[str] = Field(default_factory=list)


class ContractView(BaseModel):
    """Rendered form of one function contract."""
    pre: str
    post: List[str]
    vars: ContractVars = Field(default_factory=ContractVars)


class OracleViolation(BaseModel):
    """A pre-model whose execution broke the contract."""
    kind: str  # "err" or "post"
    stack: Dict[str, int] = Field(default_factory=dict)
    heap: Dict[str, int] = Field(default_factory=dict)
    detail: str = ""


class OracleReport(BaseModel):
    contract: str
    samples: int = 0
    violations: List[OracleViolation] = Field(default_factory=list)
    inconclusive: int = 0
    note: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.violations


class ConditionCertificate(BaseModel):
    """Outcome of one shape-extrapolation side condition."""
    condition: str
    statement: str
    proved: bool


class TimelineEvent(BaseModel):
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    stage: str
    message: str
    data: Dict[str, Any] = Field(default_factory=dict)


class FunctionReport(BaseModel):
    """Per-function result of an analysis run."""
    function: str
    status: AnalysisStatus
    contracts: List[ContractView] = Field(default_factory=list)
    diagnostics: List[str] = Field(default_factory=list)
    failure_stage: Optional[FailureStage] = None
    iterations: Optional[int] = None
    certificates: List[ConditionCertificate] = Field(default_factory=list)
    oracle: List[OracleReport] = Field(default_factory=list)
    timeline: List[TimelineEvent] = Field(default_factory=list)

    def add_timeline_event(self, stage: str, message: str, data: Dict[str, Any] = None):
        """Add an event to the function timeline."""
        self.timeline.append(TimelineEvent(stage=stage, message=message, data=data or {}))


class AnalysisReport(BaseModel):
    """Result of running the pipeline on one source file."""
    path: str
    stage: PipelineStage = PipelineStage.PARSE
    functions: List[FunctionReport] = Field(default_factory=list)
    error: Optional[str] = None
    timeline: List[TimelineEvent] = Field(default_factory=list)

    def add_timeline_event(self, stage: str, message: str, data: Dict[str, Any] = None):
        self.timeline.append(TimelineEvent(stage=stage, message=message, data=data or {}))

    @property
    def all_analyzed(self) -> bool:
        return all(f.status == AnalysisStatus.ANALYZED for f in self.functions)

    @property
    def has_violations(self) -> bool:
        return any(r.violations for f in self.functions for r in f.oracle)

    def to_json_payload(self) -> List[Dict[str, Any]]:
        """The stable per-function JSON form printed by the CLI."""
        payload = []
        for f in self.functions:
            entry = {
                "function": f.function,
                "contracts": [c.model_dump() for c in f.contracts],
                "status": f.status.value,
                "diagnostics": list(f.diagnostics),
            }
            if f.oracle:
                entry["oracle"] = [r.model_dump(exclude={"note"} if r.note is None else None)
                                   for r in f.oracle]
            payload.append(entry)
        return payload


class CorpusRow(BaseModel):
    file: str
    expected: str
    actual: str
    stage: Optional[str] = None
    expected_stage: Optional[str] = None
    iterations: List[int] = Field(default_factory=list)
    violations: int = 0

    @property
    def matches(self) -> bool:
        if self.expected != self.actual:
            return False
        if self.expected == "fail" and self.expected_stage:
            return self.stage == self.expected_stage
        return self.violations == 0


class CorpusReport(BaseModel):
    rows: List[CorpusRow] = Field(default_factory=list)

    @property
    def mismatches(self) -> List[CorpusRow]:
        return [r for r in self.rows if not r.matches]
