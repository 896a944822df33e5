"""Semantic-level evaluation toolkit for event extraction."""

from .criteria import Criterion, CriteriaSet, Setting, default_criteria
from .model import (
    CountTally,
    Direction,
    Instance,
    JudgmentRecord,
    Mention,
    ReasonTag,
    Scores,
    Task,
    validate_instance,
)
from .prompts import PromptKind, render_prompt

__version__ = "0.1.0"

__all__ = [
    "CountTally",
    "Criterion",
    "CriteriaSet",
    "Direction",
    "Instance",
    "JudgmentRecord",
    "Mention",
    "PromptKind",
    "ReasonTag",
    "Scores",
    "Setting",
    "Task",
    "default_criteria",
    "render_prompt",
    "validate_instance",
    "__version__",
]
