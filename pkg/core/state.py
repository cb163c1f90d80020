from typing import TYPE_CHECKING, Dict, List, Optional

from .errors import AbducerError
from .models import AnalysisStatus

if TYPE_CHECKING:
    from engine.base import FunctionSummary


class SummaryStore:
    """Function summaries, each published exactly once and then only read."""

    def __init__(self):
        self.summaries: Dict[str, "FunctionSummary"] = {}

    def publish(self, summary: "FunctionSummary"):
        """Publish the summary of a function that has none yet."""
        if summary.function in self.summaries:
            raise AbducerError(f"summary of {summary.function} already published")
        self.summaries[summary.function] = summary

    def get(self, function: str) -> Optional["FunctionSummary"]:
        """Get a summary by function name."""
        return self.summaries.get(function)

    def list_summaries(self, status: Optional[AnalysisStatus] = None) -> List["FunctionSummary"]:
        """List summaries in publication order."""
        return [s for s in self.summaries.values() if status is None or s.status == status]

    def get_statistics(self) -> Dict:
        """Get overall statistics."""
        summaries = list(self.summaries.values())
        analyzed = [s for s in summaries if s.status == AnalysisStatus.ANALYZED]
        failed = [s for s in summaries if s.status == AnalysisStatus.FAILED]
        loops = [s for s in analyzed if s.iterations is not None]

        stages: Dict[str, int] = {}
        for s in failed:
            if s.failure_stage is not None:
                stages[s.failure_stage.value] = stages.get(s.failure_stage.value, 0) + 1

        return {
            "total_functions": len(summaries),
            "analyzed": len(analyzed),
            "failed": len(failed),
            "contracts": sum(len(s.contracts) for s in analyzed),
            "loops_extrapolated": len(loops),
            "avg_loop_iterations": sum(s.iterations for s in loops) / len(loops) if loops else 0,
            "failure_stages": stages,
        }
