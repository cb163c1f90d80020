from typing import Dict, Any
from .models import GuardrailCheck


class GuardrailEngine:
    """Enforces resource limits on the analysis."""

    def __init__(self, config: Dict[str, Any] = None):
        self.config = self._default_config()
        if config:
            self.config.update(config)

    def _default_config(self) -> Dict[str, Any]:
        """Default limits."""
        return {
            "max_worlds": 64,
            "max_worklist_steps": 20000,
            "max_posts_per_location": 32,
            "max_block_depth": 2,
            "max_enumerated_models": 4000,
        }

    def check_world_count(self, live_worlds: int) -> GuardrailCheck:
        limit = self.config["max_worlds"]
        if live_worlds > limit:
            return GuardrailCheck(
                passed=False,
                reason=f"world explosion: {live_worlds} live worlds exceeds max {limit}",
                policy_violated="max_worlds",
            )
        return GuardrailCheck(passed=True, reason="world count within limit")

    def check_worklist_steps(self, steps: int) -> GuardrailCheck:
        limit = self.config["max_worklist_steps"]
        if steps > limit:
            return GuardrailCheck(
                passed=False,
                reason=f"worklist ran {steps} steps, max is {limit}",
                policy_violated="max_worklist_steps",
            )
        return GuardrailCheck(passed=True, reason="worklist steps within limit")

    def check_posts_at_location(self, posts: int) -> GuardrailCheck:
        limit = self.config["max_posts_per_location"]
        if posts > limit:
            return GuardrailCheck(
                passed=False,
                reason=f"{posts} postconditions at one location exceeds max {limit}",
                policy_violated="max_posts_per_location",
            )
        return GuardrailCheck(passed=True, reason="posts per location within limit")

    @property
    def max_enumerated_models(self) -> int:
        return self.config["max_enumerated_models"]

    @property
    def max_block_depth(self) -> int:
        return self.config["max_block_depth"]
